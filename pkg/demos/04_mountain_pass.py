"""A nontrivial critical point when the lower-order term grows faster.

For ``p+ < q-`` the origin is a strict local minimum and the energy falls
to minus infinity along every ray, so minimization is useless.  The
mountain-pass search deforms a path from 0 to a negative-energy point
until its highest point is a saddle.  For p = 2, q = 4 the Euler-Lagrange
equation is -f'' = f^3, whose positive solution is known by shooting.
"""

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from pxlaplace import Problem, SolveConfig, build_mesh, solve_mountain_pass

mesh = build_mesh([(0.0, 1.0)], 257)
problem = Problem.from_exprs(mesh, p="2", q="4")
report = solve_mountain_pass(SolveConfig(mode="mountain-pass"), problem)
geo = report.extra
print(f"J on the sphere of radius {geo['sphere_radius']}: min {geo['sphere_min_energy']:.3e} > 0")
print(f"ray endpoint t = {geo['endpoint_t']:g} with J = "
      f"{geo['ray_energy'][geo['ray_t'].index(geo['endpoint_t'])]:.3e}")
print(f"path search: {geo['path_iterations']} steps, highest path energy "
      f"{geo['path_max_energy']:.6f}")
print(f"critical point: J = {report.energy.total:.6f}, residual {report.residual:.2e}")


def first_zero(slope):
    def hit(x, y):
        return y[0]
    hit.terminal, hit.direction = True, -1
    sol = solve_ivp(lambda x, y: [y[1], -y[0] ** 3], (0, 10), [0, slope], events=hit,
                    rtol=1e-12, atol=1e-14, dense_output=True)
    return sol.t_events[0][0], sol


slope = brentq(lambda s: first_zero(s)[0] - 1.0, 1.0, 100.0)
ref = first_zero(slope)[1].sol(mesh.coords[0])[0]
u = np.abs(report.solution.values)
print(f"shooting slope f'(0) = {slope:.8f}")
print(f"relative max difference to the shooting solution: {np.abs(u - ref).max() / ref.max():.2e}")
