"""Luxemburg norms of a variable-exponent space and how they relate to the modular.

For constant exponents the norm is the familiar p-norm.  With a variable
exponent the modular is no longer a power of the norm, but it stays pinned
between ``||f||^p-`` and ``||f||^p+``.  This script shows both facts on a
few scaled copies of one function.
"""

import numpy as np

from pxlaplace import ExponentProfile, WeightProfile, build_mesh, luxemburg_norm, modular
from pxlaplace.spaces import classical_norm

mesh = build_mesh([(0.0, 1.0)], 513)
x = mesh.coords[0]
f = np.sin(np.pi * x) * np.exp(x)

p_const = ExponentProfile.from_expr("2.5", mesh)
print("constant exponent 2.5")
print(f"  Luxemburg norm   {luxemburg_norm(f, p_const).value:.12f}")
print(f"  classical norm   {classical_norm(f, 2.5, mesh):.12f}")

p = ExponentProfile.from_expr("1.5 + x", mesh)
w = WeightProfile.from_expr("1 + x^2", mesh)
print(f"\nvariable exponent p(x) = 1.5 + x  (p- = {p.lower}, p+ = {p.upper}), weight 1 + x^2")
print(f"{'scale':>8} {'norm':>12} {'modular':>12} {'lower':>12} {'upper':>12}")
for scale in (0.01, 0.3, 1.0, 3.0, 100.0):
    g = scale * f
    nrm = luxemburg_norm(g, p, w).value
    rho = modular(g, p, w)
    lo, hi = sorted((nrm ** p.lower, nrm ** p.upper))
    print(f"{scale:8.2f} {nrm:12.5e} {rho:12.5e} {lo:12.5e} {hi:12.5e}")

r = luxemburg_norm(f, p, w)
print(f"\nat lambda = ||f|| the modular of f/lambda is {r.modular_at_value:.12f} "
      f"({r.iterations} bisection steps)")
