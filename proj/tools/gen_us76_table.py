#!/usr/bin/env python3
"""Writes core/data/us76.csv: 1976 US Standard Atmosphere, 0-150 km at 1 km.

Below 86 km the layered hydrostatic model is evaluated directly; above it the
published tabulated temperature/density values are interpolated (log-linear
in density).
"""
import math
import sys

R0 = 6356766.0
G0 = 9.80665
RAIR = 287.05287
GAMMA = 1.4

LAYERS = [  # base geopotential altitude [m], lapse rate [K/m]
    (0.0, -0.0065), (11000.0, 0.0), (20000.0, 0.001), (32000.0, 0.0028),
    (47000.0, 0.0), (51000.0, -0.0028), (71000.0, -0.002), (84852.0, 0.0),
]

UPPER = [  # geometric altitude [m], temperature [K], density [kg/m^3]
    (86000.0, 186.87, 6.958e-6), (90000.0, 186.87, 3.416e-6),
    (95000.0, 188.42, 1.393e-6), (100000.0, 195.08, 5.604e-7),
    (110000.0, 240.00, 9.708e-8), (120000.0, 360.00, 2.222e-8),
    (130000.0, 469.27, 8.152e-9), (140000.0, 559.63, 3.831e-9),
    (150000.0, 634.39, 2.076e-9),
]


def lower(h):
    hp = R0 * h / (R0 + h)
    t, p = 288.15, 101325.0
    for i, (hb, lapse) in enumerate(LAYERS):
        top = LAYERS[i + 1][0] if i + 1 < len(LAYERS) else float("inf")
        dh = min(hp, top) - hb
        if lapse == 0.0:
            p_new = p * math.exp(-G0 * dh / (RAIR * t))
            t_new = t
        else:
            t_new = t + lapse * dh
            p_new = p * (t_new / t) ** (-G0 / (RAIR * lapse))
        if hp <= top:
            return t_new, p_new / (RAIR * t_new)
        t, p = t_new, p_new
    raise AssertionError


def upper(h):
    for (h0, t0, r0), (h1, t1, r1) in zip(UPPER, UPPER[1:]):
        if h0 <= h <= h1:
            w = (h - h0) / (h1 - h0)
            return t0 + w * (t1 - t0), math.exp(math.log(r0) + w * (math.log(r1) - math.log(r0)))
    raise ValueError(h)


def main(path):
    with open(path, "w") as out:
        out.write("altitude_m,density_kg_m3,speed_of_sound_m_s\n")
        for km in range(0, 151):
            h = km * 1000.0
            t, rho = lower(h) if h < 86000.0 else upper(h)
            out.write(f"{h:.1f},{rho:.6e},{math.sqrt(GAMMA * RAIR * t):.4f}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "core/data/us76.csv")
