"""Critical points of the discrete energy: minimization and mountain-pass search."""

from __future__ import annotations

import io
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.sparse.linalg import spsolve

from .energy import EnergyBreakdown, EnergyModel, Problem
from .fieldspec import parse
from .mesh import GridFunction
from .sampling import bump, random_samples
from .spaces import equivalent_norm

__all__ = [
    "StandingAssumptionError",
    "GeometryError",
    "SolveConfig",
    "SolveReport",
    "solve",
    "solve_min",
    "solve_mountain_pass",
    "initial_guess",
    "mountain_pass_geometry",
]

MODES = ("min", "mountain-pass")


class StandingAssumptionError(ValueError):
    """The exponent order required by the selected mode does not hold."""


class GeometryError(RuntimeError):
    """The mountain-pass geometry could not be confirmed numerically."""


@dataclass
class SolveConfig:
    mode: str = "min"
    max_iterations: int = 5000
    tol: float = 1e-6
    armijo: float = 1e-4
    backtrack: float = 0.5
    initial: str | None = None
    path_points: int = 21
    lam: float | None = None
    preconditioner: str = "stiffness"
    sphere_radius: float = 0.01
    geometry_samples: int = 20
    polish_switch: float = 1e-3
    polish_iterations: int = 60
    seed: int = 0

    def __post_init__(self):
        if self.mode == "mp":
            self.mode = "mountain-pass"
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (self.tol > 0 and 0 < self.armijo < 1 and 0 < self.backtrack < 1):
            raise ValueError("tolerances must be positive and line-search factors in (0, 1)")
        if self.path_points < 3:
            raise ValueError("a mountain-pass path needs at least 3 points")
        if self.preconditioner not in ("stiffness", "none"):
            raise ValueError("preconditioner must be 'stiffness' or 'none'")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SolveReport:
    solution: GridFunction
    energy: EnergyBreakdown
    residual: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)  # (phase, energy, gradient norm)
    mode: str = "min"
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "residual": float(self.residual),
            "energy": self.energy.to_dict(),
            "max_abs": float(np.max(np.abs(self.solution.values))),
            "trace_length": len(self.trace),
            "extra": self.extra,
        }

    def trace_csv(self) -> str:
        buf = io.StringIO()
        buf.write("iteration,phase,energy,gradient_norm\n")
        for k, (phase, e, g) in enumerate(self.trace):
            buf.write(f"{k},{phase},{e!r},{g!r}\n")
        return buf.getvalue()


# ---------------------------------------------------------------------------
# Shared pieces


class _Metric:
    """Inner product and gradient map for the descent directions."""

    def __init__(self, model: EnergyModel, kind: str):
        self.model = model
        self.kind = kind
        self.i = model.interior
        if kind == "stiffness":
            self.lu = model.preconditioner()
            self.k = model.stiffness()

    def direction(self, eg: np.ndarray) -> np.ndarray:
        """Gradient in this metric from the Euclidean gradient (full nodal arrays)."""
        out = np.zeros_like(eg)
        if self.kind == "stiffness":
            out[self.i] = self.lu.solve(eg[self.i])
        else:
            out[self.i] = eg[self.i] / self.model.mesh.weights[self.i]
        return out

    def norm(self, u: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(u, u), 0.0)))

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        if self.kind == "stiffness":
            return float(u[self.i] @ (self.k @ v[self.i]))
        return float(np.dot(self.model.mesh.weights * u, v))


def _check_lambda(problem: Problem, lam: float | None, mode: str) -> float:
    if lam is None:
        top = problem.p.upper if mode == "min" else max(problem.p.upper, problem.q.upper)
        lam = 2.0 * top
    if not problem.p.upper < lam:
        raise StandingAssumptionError(
            f"standing assumption p+ < lambda violated (p+ = {problem.p.upper:g}, "
            f"lambda = {lam:g})"
        )
    return lam


def _armijo(model: EnergyModel, f, value, slope, d, step, cfg: SolveConfig):
    """Backtrack from ``step`` until the sufficient-decrease test holds."""
    while step > 1e-14:
        trial = f + step * d
        tv = model.value(trial)
        if tv <= value + cfg.armijo * step * slope:
            return trial, tv, step
        step *= cfg.backtrack
    return None, value, 0.0


def initial_guess(model: EnergyModel, cfg: SolveConfig) -> np.ndarray:
    """Configured expression, else the largest ``2^-k`` multiple of a bump with J < 0."""
    mesh = model.mesh
    if cfg.initial:
        return GridFunction.from_expr(mesh, parse(cfg.initial), trace_zero=True).values
    b = bump(mesh).values
    for k in range(60):
        t = 2.0 ** -k
        if model.value(t * b) < 0:
            return t * b
    return b


# ---------------------------------------------------------------------------
# Minimization


def solve_min(config: SolveConfig, problem: Problem) -> SolveReport:
    """Minimize J by steepest descent with Armijo backtracking.

    Requires the coercive order q+ < p-.  The descent direction is the
    gradient in the weighted-stiffness metric unless ``preconditioner`` is
    ``'none'``, in which case the quadrature (L2) gradient is used.
    """
    if not problem.coercive:
        raise StandingAssumptionError(
            "standing assumption 1 < q- <= q+ < p- <= p+ violated "
            f"(q+ = {problem.q.upper:g}, p- = {problem.p.lower:g})"
        )
    lam = _check_lambda(problem, config.lam, "min")
    model = EnergyModel(problem)
    metric = _Metric(model, config.preconditioner)
    f = initial_guess(model, config)
    value = model.value(f)
    initial_value = value
    trace = []
    step = 1.0
    converged = False
    stalled = False
    it = 0
    for it in range(config.max_iterations + 1):
        eg = model.euclidean_gradient(f)
        gnorm = float(np.max(np.abs(eg[model.interior] / model.mesh.weights[model.interior]),
                             initial=0.0))
        trace.append(("descent", value, gnorm))
        if gnorm <= config.tol:
            converged = True
            break
        if it == config.max_iterations:
            break
        d = -metric.direction(eg)
        slope = float(eg @ d)
        new_f, new_value, used = _armijo(model, f, value, slope, d, min(2.0 * step, 1e8), config)
        if new_f is None:
            stalled = True
            break
        f, value, step = new_f, new_value, used
    sol = GridFunction(model.mesh, f, True)
    residual = model.residual(f)
    return SolveReport(
        sol, model.energy(f), residual, it, converged and residual <= config.tol, trace, "min",
        {"initial_energy": initial_value, "lambda": lam, "line_search_stall": stalled,
         "ps_quantity": value - model.pairing(f, f) / lam},
    )


# ---------------------------------------------------------------------------
# Mountain pass


def mountain_pass_geometry(model: EnergyModel, cfg: SolveConfig) -> dict:
    """Confirm J > 0 on a small gradient-norm sphere and J -> -inf along a ray.

    Returns the ray endpoint ``e`` with ``J(e) < 0`` and diagnostics; raises
    :class:`GeometryError` if either condition fails.
    """
    mesh = model.mesh
    p, w = model.problem.p, model.problem.w
    sphere = []
    for spec in random_samples(cfg.seed, cfg.geometry_samples, mesh.d):
        f = spec.evaluate(mesh)
        nrm = equivalent_norm(f, p, w)
        if nrm == 0:
            continue
        sphere.append(model.value(f.values * (cfg.sphere_radius / nrm)))
    b = bump(mesh)
    b_scaled = b.values * (cfg.sphere_radius / equivalent_norm(b, p, w))
    sphere.append(model.value(b_scaled))
    if min(sphere) <= 0:
        raise GeometryError(
            f"J is not positive on the sphere of radius {cfg.sphere_radius:g} "
            f"(min {min(sphere):.3g})"
        )
    ts, values = [], []
    t = 1.0
    first_negative = None
    for _ in range(80):
        ts.append(t)
        values.append(model.value(t * b.values))
        if first_negative is None and values[-1] < 0:
            first_negative = len(values) - 1
        if first_negative is not None and len(values) - first_negative > 3:
            break
        t *= 2.0
    if first_negative is None:
        raise GeometryError("no point with J < 0 found along the bump ray")
    tail = values[first_negative:]
    if any(b2 >= b1 for b1, b2 in zip(tail, tail[1:])):
        raise GeometryError("J is not decreasing along the ray past the sign change")
    t_end = ts[first_negative]
    return {
        "endpoint": t_end * b.values,
        "sphere_min_energy": float(min(sphere)),
        "sphere_radius": cfg.sphere_radius,
        "ray_t": ts,
        "ray_energy": values,
        "endpoint_t": t_end,
    }


REPARAMETRIZE_EVERY = 10


def _redistribute(path: list, metric: "_Metric") -> list:
    """Move the interior path points to equal arclength along the polyline."""
    seg = np.array([metric.norm(b - a) for a, b in zip(path, path[1:])])
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0:
        return path
    out = [path[0]]
    for target in np.linspace(0.0, s[-1], len(path))[1:-1]:
        j = min(int(np.searchsorted(s, target, side="right")) - 1, len(seg) - 1)
        frac = (target - s[j]) / seg[j] if seg[j] > 0 else 0.0
        out.append(path[j] + frac * (path[j + 1] - path[j]))
    out.append(path[-1])
    return out


def _polish(model: EnergyModel, f: np.ndarray, cfg: SolveConfig, trace: list) -> tuple:
    """Minimize the squared residual norm with damped Newton (Gauss-Newton) steps."""
    i = model.interior
    w = model.mesh.weights
    for k in range(cfg.polish_iterations):
        eg = model.euclidean_gradient(f)
        G = eg / w
        r = float(np.max(np.abs(G[i]), initial=0.0))
        trace.append(("polish", model.value(f), r))
        if r <= cfg.tol:
            return f, True, k
        phi0 = float(np.dot(w, G * G))
        s = np.zeros_like(f)
        s[i] = spsolve(model.hessian(f), -eg[i])
        step = 1.0
        accepted = False
        while step > 1e-10:
            trial = f + step * s
            Gt = model.gradient(trial)
            if float(np.dot(w, Gt * Gt)) < (1.0 - 1e-4 * step) * phi0:
                f, accepted = trial, True
                break
            step *= 0.5
        if not accepted:
            return f, False, k
    return f, model.residual(f) <= cfg.tol, cfg.polish_iterations


def solve_mountain_pass(config: SolveConfig, problem: Problem) -> SolveReport:
    """Discrete mountain-pass search between 0 and a low-energy endpoint.

    The path maximizer is repeatedly moved along the descent direction with
    its path-tangent component removed, until the path maximum stagnates or
    its gradient falls below ``polish_switch``; the result is then polished
    by residual minimization.  Requires p+ < q-.
    """
    if not problem.superlinear:
        raise StandingAssumptionError(
            "mountain-pass hypothesis p+ < q- violated "
            f"(p+ = {problem.p.upper:g}, q- = {problem.q.lower:g})"
        )
    lam = _check_lambda(problem, config.lam, "mountain-pass")
    model = EnergyModel(problem)
    metric = _Metric(model, config.preconditioner)
    geom = mountain_pass_geometry(model, config)
    e = geom.pop("endpoint")
    m = config.path_points
    path = [e * (k / (m - 1)) for k in range(m)]
    energies = np.array([model.value(f) for f in path])
    trace = []
    w = model.mesh.weights
    step = 1.0
    flat = 0
    best_prev = None
    it = 0
    for it in range(config.max_iterations):
        k = 1 + int(np.argmax(energies[1:-1]))
        f = path[k]
        eg = model.euclidean_gradient(f)
        gnorm = float(np.max(np.abs(eg[model.interior] / w[model.interior]), initial=0.0))
        trace.append(("path", float(energies[k]), gnorm))
        if gnorm <= max(config.polish_switch, config.tol):
            break
        if best_prev is not None and abs(best_prev - energies[k]) <= 1e-13 * abs(energies[k]):
            flat += 1
            if flat >= 5:
                break
        else:
            flat = 0
        best_prev = float(energies[k])
        d = -metric.direction(eg)
        tau = path[k + 1] - path[k - 1]
        tt = metric.inner(tau, tau)
        if tt > 0:
            d = d - (metric.inner(d, tau) / tt) * tau
        slope = float(eg @ d)
        if slope >= 0:
            break
        # keep the moved point within half the local spacing so the path stays connected
        spacing = min(metric.norm(path[k] - path[k - 1]), metric.norm(path[k + 1] - path[k]))
        dn = metric.norm(d)
        cap = 0.5 * spacing / dn if dn > 0 else 1e8
        new_f, new_value, used = _armijo(model, f, energies[k], slope, d,
                                         min(2.0 * step, cap, 1e8), config)
        if new_f is None:
            break
        path[k], energies[k], step = new_f, new_value, used
        if (it + 1) % REPARAMETRIZE_EVERY == 0:
            path = _redistribute(path, metric)
            energies = np.array([model.value(f) for f in path])
    k = 1 + int(np.argmax(energies[1:-1]))
    f, polished, _ = _polish(model, path[k].copy(), config, trace)
    breakdown = model.energy(f)
    residual = model.residual(f)
    nontrivial = bool(np.max(np.abs(f)) > 0 and breakdown.total > 0)
    geom.update(
        path_max_energy=float(energies[k]),
        path_iterations=it,
        lambda_=lam,
        nontrivial=nontrivial,
        ps_quantity=breakdown.total - model.pairing(f, f) / lam,
    )
    return SolveReport(
        GridFunction(model.mesh, f, True), breakdown, residual, len(trace),
        bool(polished and nontrivial and residual <= config.tol), trace, "mountain-pass", geom,
    )


def solve(config: SolveConfig, problem: Problem) -> SolveReport:
    if config.mode == "min":
        return solve_min(config, problem)
    return solve_mountain_pass(config, problem)
