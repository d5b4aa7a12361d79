#!/usr/bin/env python3
"""The geometry of the first-order residual iteration.

Eigenvector starts die in one step.  Between each pair of eigenvalues lies a
pair of "critical lines" where the iteration is at its slowest: orbits
zig-zag between the two lines, contracting by exactly
(lambda_j - lambda_i)/(lambda_j + lambda_i) per step.  A two-point blend
collapses such an orbit onto an eigenvector.  The script ends by writing a
phase portrait (SVG + CSV) for a 2-D operator.
"""

import numpy as np

from trisolve.dynamics import (
    accelerate,
    critical_pair,
    eigenbasis_equivalence,
    first_order_image,
    first_order_orbit,
    write_phase_portrait,
)

h = np.diag([1.0, 3.0])

print("=== eigenvector start: one-step convergence ===")
orbit = first_order_orbit(h, np.array([0.0, 1.0]), steps=5)
print(f"norms: {orbit.norms}\n")

print("=== critical-line start: exact geometric zig-zag ===")
pair = critical_pair(1.0, 3.0, np.array([1.0, 0.0]), np.array([0.0, 1.0]))
print(f"contraction factor rho = {pair.rho}")
orbit = first_order_orbit(h, pair.r_plus, steps=8)
for k, nrm in enumerate(orbit.norms):
    print(f"  step {k}: ||r|| = {nrm:.10f}   (rho^k = {pair.rho**k:.10f})")

print("\n=== the acceleration blend kills a critical-line orbit ===")
r_bar = accelerate(h, orbit.points[0], orbit.points[1])
print(f"||F(blend)|| = {np.linalg.norm(first_order_image(h, r_bar)):.2e} "
      "(a plain step would only halve the norm)")

print("\n=== orbit norms are basis-independent ===")
rng = np.random.default_rng(3)
q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
h_full = (q * np.linspace(1.0, 4.0, 6)) @ q.T
report = eigenbasis_equivalence(0.5 * (h_full + h_full.T), rng.standard_normal(6), 20)
print(f"max deviation between the orbit under H and under its eigenvalue "
      f"matrix: {report['max_norm_deviation']:.2e}")

print("\n=== phase portrait ===")
write_phase_portrait(h, "portrait.svg", "portrait.csv", num_starts=24, steps=12)
print("wrote portrait.svg and portrait.csv "
      "(critical lines drawn in gold, orbits in blue)")
