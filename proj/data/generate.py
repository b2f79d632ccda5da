#!/usr/bin/env python3
"""Regenerate the bundled synthetic measurement datasets.

All files are produced with fixed RNG seeds so the repository contents are
reproducible. The datasets mimic the qualitative regimes of the measured
devices (lambda ~ 0.73 for the stimulated scheme, ~ 0.28 for the
re-excitation scheme, and an s-shell blinking plateau of 2.865) and are used
by the test suite and the `stixsim analyze` examples.
"""

import math
import random

V_HOM = 0.93


def write_lambda(path, lam, v0, seed):
    rng = random.Random(seed)
    lines = ["rho00,visibility"]
    for i in range(41):
        rho00 = 0.05 + 0.9 * i / 40.0
        v = lam * lam * rho00 * math.sqrt(V_HOM) + v0
        v += rng.gauss(0.0, 0.01)
        lines.append(f"{rho00:.6f},{max(v, 0.0):.6f}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def write_blinking(path, a, b, tau_ms, seed):
    rng = random.Random(seed)
    lines = ["delay_ms,g2"]
    for i in range(-400, 401):
        tau = i * 0.002  # +-0.8 ms window
        y = a * math.exp(-abs(tau / tau_ms)) + b
        y += rng.gauss(0.0, 0.005)
        lines.append(f"{tau:.4f},{max(y, 0.0):.6f}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def write_g2(path, center_amp, side_amp, sigma_ns, spacing_ns, seed):
    rng = random.Random(seed)
    lines = ["delay_ns,counts"]
    for i in range(-3000, 3001):
        t = i * 0.01
        y = 0.0
        for k in range(-2, 3):
            amp = center_amp if k == 0 else side_amp
            d = t - k * spacing_ns
            y += amp * math.exp(-0.5 * (d / sigma_ns) ** 2)
        y += rng.gauss(0.0, 1e-4)
        lines.append(f"{t:.2f},{max(y, 0.0):.8f}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    write_lambda("lambda_stix.csv", 0.73, 0.01, seed=101)
    write_lambda("lambda_rex.csv", 0.28, 0.01, seed=202)
    write_blinking("blinking_sshell.csv", 1.865, 1.0, 0.12, seed=303)
    write_g2("g2_stix.csv", 0.0009, 1.0, 0.8, 12.5, seed=404)
