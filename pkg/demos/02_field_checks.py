"""Regularity and weight-class checks for candidate exponents and weights.

A smooth exponent passes the log-Hoelder test; a jump does not, and its
estimated constant grows as the grid is refined.  Weights are tested
through the local integrability of ``w^(-1/(p-1))``.
"""

import numpy as np

from pxlaplace import (
    ExponentProfile,
    build_mesh,
    check_jump_condition,
    check_log_holder,
    check_weight_class,
)
from pxlaplace.fields import jump_radius

for n in (65, 257):
    mesh = build_mesh([(0.0, 1.0)], n)
    smooth = ExponentProfile.from_expr("1.5 + x/2", mesh)
    step = ExponentProfile(mesh, np.where(mesh.coords[0] > 0.5, 2.5, 1.5))
    print(f"n = {n}")
    print(f"  log-Hoelder estimate, smooth exponent: {check_log_holder(smooth).value:.3f}")
    print(f"  log-Hoelder estimate, step exponent:   {check_log_holder(step).value:.3f}")

square = build_mesh([(0.0, 1.0), (0.0, 1.0)], 33)
p = ExponentProfile.from_expr("1.4 + x*y/2", square)
r = jump_radius(p)
rep = check_jump_condition(p, r=r)
print(f"\njump condition in 2d holds for r = {r:.3f}: p*_B >= {rep.witness['p_star_min']:.3f}")

mesh = build_mesh([(0.0, 1.0)], 129)
for weight in ("1", "x^0.5", "x"):
    rep = check_weight_class(weight, "2", mesh)
    status = "integrable" if rep.passed else "not integrable"
    print(f"dual weight of {weight:>6} with p = 2: {status}, integral estimate {rep.value}")
