#pragma once

#include <memory>

#include "entry/config.hpp"

namespace entry::test {

/// The pinned scenario and its reference, built once per process.
inline const Scenario& pinned() {
  static const Scenario s = pinned_scenario();
  return s;
}

inline std::shared_ptr<const ReferenceTrajectory> pinned_reference() {
  static const auto ref = std::make_shared<const ReferenceTrajectory>(build_reference(pinned()));
  return ref;
}

inline double velocity_scale() { return pinned().env.velocity_scale(); }

}  // namespace entry::test
