#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "commands.hpp"
#include "entry/errors.hpp"

namespace entrysim {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("entrysim_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    options_.out = dir_;
  }
  void TearDown() override { fs::remove_all(dir_); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static std::vector<std::vector<std::string>> rows(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> out;
    for (std::string line; std::getline(in, line);) {
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
      out.push_back(cells);
    }
    return out;
  }

  fs::path dir_;
  Options options_;
  entry::ScenarioConfig config_;
};

TEST_F(CliTest, ReferenceThenZeroDynamicsClassifiesEveryRow) {
  ASSERT_EQ(run_subcommand("make-reference", config_, options_), kExitOk);
  ASSERT_TRUE(fs::exists(dir_ / "reference.csv"));
  ASSERT_EQ(run_subcommand("analyze-zero-dynamics", config_, options_), kExitOk);
  const auto table = rows(dir_ / "zero_dynamics.csv");
  const auto reference = entry::ReferenceTrajectory::load_csv(dir_ / "reference.csv");
  ASSERT_EQ(table.size(), reference.size() + 1);
  const auto& header = table.front();
  const auto col = std::find(header.begin(), header.end(), "classification") - header.begin();
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto& cls = table[i][static_cast<std::size_t>(col)];
    ASSERT_TRUE(cls == "FC1-unstable-oscillatory" || cls == "FC2-unstable-saddle" || cls == "stable") << cls;
  }
}

TEST_F(CliTest, BothControllersShareTheReferenceColumns) {
  ASSERT_EQ(run_subcommand("make-reference", config_, options_), kExitOk);
  ASSERT_EQ(run_subcommand("run-nominal", config_, options_), kExitOk);
  ASSERT_TRUE(fs::exists(dir_ / "trajectory_proposed.csv"));
  ASSERT_TRUE(fs::exists(dir_ / "trajectory_shuttle.csv"));
  const auto a = rows(dir_ / "tracking_proposed.csv");
  const auto b = rows(dir_ / "tracking_shuttle.csv");
  ASSERT_EQ(a.size(), b.size());
  ASSERT_GT(a.size(), 100u);
  EXPECT_EQ(a.front(), b.front());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t c = 0; c < 4; ++c) ASSERT_EQ(a[i][c], b[i][c]) << "row " << i << " column " << a[0][c];
  }
}

TEST_F(CliTest, CompareOfIdenticalInputsIsZero) {
  ASSERT_EQ(run_subcommand("make-reference", config_, options_), kExitOk);
  options_.runs = 3;
  options_.controller = "proposed";
  ASSERT_EQ(run_subcommand("run-mc", config_, options_), kExitOk);
  options_.inputs = {dir_ / "metrics_proposed.csv", dir_ / "metrics_proposed.csv"};
  ASSERT_EQ(run_subcommand("compare", config_, options_), kExitOk);
  const auto table = rows(dir_ / "comparison.csv");
  ASSERT_GT(table.size(), 3u);
  for (std::size_t i = 1; i < table.size(); ++i) {
    EXPECT_EQ(std::stod(table[i][4]), 0.0) << table[i][0] << " " << table[i][1];
    EXPECT_EQ(std::stod(table[i][5]), 1.0) << table[i][0] << " " << table[i][1];
  }
}

TEST_F(CliTest, MonteCarloOutputIsReproducible) {
  ASSERT_EQ(run_subcommand("make-reference", config_, options_), kExitOk);
  options_.runs = 4;
  options_.seed = 9;
  options_.controller = "shuttle";
  options_.threads = 1;
  ASSERT_EQ(run_subcommand("run-mc", config_, options_), kExitOk);
  const auto first = slurp(dir_ / "metrics_shuttle.csv");
  options_.threads = 2;
  ASSERT_EQ(run_subcommand("run-mc", config_, options_), kExitOk);
  EXPECT_EQ(slurp(dir_ / "metrics_shuttle.csv"), first);
  EXPECT_FALSE(fs::exists(dir_ / "metrics_proposed.csv"));
}

TEST_F(CliTest, MissingReferenceIsADependencyError) {
  EXPECT_THROW((void)run_subcommand("run-nominal", config_, options_), entry::DependencyError);
  EXPECT_THROW((void)run_subcommand("analyze-zero-dynamics", config_, options_), entry::DependencyError);
}

TEST_F(CliTest, BadArgumentsAreConfigErrors) {
  EXPECT_THROW((void)run_subcommand("fly", config_, options_), entry::ConfigError);
  EXPECT_THROW((void)run_subcommand("compare", config_, options_), entry::ConfigError);
  options_.controller = "pid";
  EXPECT_THROW((void)run_subcommand("run-nominal", config_, options_), entry::ConfigError);
}

}  // namespace
}  // namespace entrysim
