"""Weighted variable-exponent modulars and Luxemburg norms on a mesh."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .fields import ExponentProfile, WeightProfile, conjugate_exponent
from .mesh import GridFunction, Mesh, gradient_magnitude

__all__ = [
    "NormError",
    "StandingAssumptionWarning",
    "NormResult",
    "modular",
    "luxemburg_norm",
    "classical_norm",
    "sobolev_norm",
    "equivalent_norm",
    "holder_pairing",
    "standing_order_violation",
    "floor_modular_pair",
    "floor_norm_pair",
]

NORM_TOL = 1e-10


class NormError(ArithmeticError):
    pass


class StandingAssumptionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class NormResult:
    value: float
    modular_at_value: float
    iterations: int

    def __float__(self) -> float:
        return self.value


def _nodal(obj, size: int, default: float = 1.0) -> np.ndarray:
    if obj is None:
        return np.full(size, default)
    if isinstance(obj, (ExponentProfile, WeightProfile, GridFunction)):
        return obj.values
    arr = np.asarray(obj, dtype=float)
    return np.broadcast_to(arr, (size,)) if arr.ndim == 0 else arr.reshape(-1)


def _mesh_of(*objs) -> Mesh:
    for o in objs:
        m = getattr(o, "mesh", None)
        if m is not None:
            return m
    raise TypeError("cannot infer the mesh: pass a GridFunction or a profile")


def _modular_raw(a: np.ndarray, p: np.ndarray, w: np.ndarray, qw: np.ndarray) -> float:
    with np.errstate(over="ignore"):
        return float(np.sum(qw * np.power(a, p) * w))


def modular(f, p, w=None, mesh: Mesh | None = None) -> float:
    """Trapezoid quadrature of ``|f|^p w``; overflow yields ``inf``."""
    mesh = mesh or _mesh_of(f, p, w)
    a = np.abs(_nodal(f, mesh.size))
    return _modular_raw(a, _nodal(p, mesh.size), _nodal(w, mesh.size), mesh.weights)


def luxemburg_norm(f, p, w=None, mesh: Mesh | None = None, tol: float = NORM_TOL,
                   max_doublings: int = 200) -> NormResult:
    """Luxemburg norm ``inf{lam > 0 : rho(f/lam) <= 1}``.

    Bisection on ``log(lam)`` until ``|rho(f/lam) - 1| <= tol``; the bracket
    is grown from ``lam0 = max|f|`` by doubling or halving.
    """
    mesh = mesh or _mesh_of(f, p, w)
    a = np.abs(_nodal(f, mesh.size))
    pv, wv, qw = _nodal(p, mesh.size), _nodal(w, mesh.size), mesh.weights
    top = float(a.max())
    if top == 0.0:
        return NormResult(0.0, 0.0, 0)
    if not math.isfinite(_modular_raw(a, pv, wv, qw)):
        raise NormError("modular of f is not finite")

    def rho(lam):
        return _modular_raw(a / lam, pv, wv, qw)

    iterations = 0
    lam = top
    r = rho(lam)
    if abs(r - 1.0) <= tol:
        return NormResult(lam, r, 0)
    if r > 1.0:
        lo, hi = lam, 2.0 * lam
        while rho(hi) > 1.0:
            iterations += 1
            if iterations > max_doublings:
                raise NormError("failed to bracket the norm (degenerate field)")
            lo, hi = hi, 2.0 * hi
    else:
        lo, hi = 0.5 * lam, lam
        while rho(lo) < 1.0:
            iterations += 1
            if iterations > max_doublings:
                raise NormError("failed to bracket the norm (degenerate field)")
            lo, hi = 0.5 * lo, lo
    log_lo, log_hi = math.log(lo), math.log(hi)
    while True:
        iterations += 1
        mid = 0.5 * (log_lo + log_hi)
        lam = math.exp(mid)
        r = rho(lam)
        if abs(r - 1.0) <= tol or mid in (log_lo, log_hi):
            return NormResult(lam, r, iterations)
        if r > 1.0:
            log_lo = mid
        else:
            log_hi = mid


def classical_norm(f, p: float, mesh: Mesh | None = None) -> float:
    """Quadrature p-norm ``(sum w |f|^p)^(1/p)`` for a constant exponent."""
    mesh = mesh or _mesh_of(f)
    a = np.abs(_nodal(f, mesh.size))
    return float(np.sum(mesh.weights * a ** p)) ** (1.0 / p)


def standing_order_violation(q: ExponentProfile, p: ExponentProfile,
                             lam: float | None = None) -> str | None:
    """Describe a violation of ``1 < q- <= q+ < p- <= p+ < lam``, else None."""
    if not q.lower > 1.0:
        return f"standing assumption 1 < q- violated (q- = {q.lower:g})"
    if not q.upper < p.lower:
        return (f"standing assumption 1 < q- <= q+ < p- <= p+ violated "
                f"(q+ = {q.upper:g}, p- = {p.lower:g})")
    if lam is not None and not p.upper < lam:
        return f"standing assumption p+ < lambda violated (p+ = {p.upper:g}, lambda = {lam:g})"
    return None


def sobolev_norm(f: GridFunction, q, p, w0=None, w=None) -> float:
    """``||f||_{q, w0} + || |grad f| ||_{p, w}`` with the nodal gradient."""
    if isinstance(q, ExponentProfile) and isinstance(p, ExponentProfile):
        problem = standing_order_violation(q, p)
        if problem:
            warnings.warn(problem, StandingAssumptionWarning, stacklevel=2)
    mesh = f.mesh
    base = luxemburg_norm(f, q, w0, mesh).value
    grad = luxemburg_norm(gradient_magnitude(f), p, w, mesh).value
    return base + grad


def equivalent_norm(f: GridFunction, p, w=None) -> float:
    """Gradient norm ``|| |grad f| ||_{p, w}`` on the zero-trace space."""
    if not f.trace_zero:
        raise ValueError("the gradient norm is a norm on zero-trace functions only")
    return luxemburg_norm(gradient_magnitude(f), p, w, f.mesh).value


def holder_pairing(f, g, p: ExponentProfile, w=None, mesh: Mesh | None = None) -> tuple:
    """Return ``(int |f g|, 2 ||f w^(1/p)||_p ||g w^(-1/p)||_p')``."""
    mesh = mesh or _mesh_of(f, g, p)
    fv, gv = _nodal(f, mesh.size), _nodal(g, mesh.size)
    lhs = float(np.dot(mesh.weights, np.abs(fv * gv)))
    if lhs == 0.0 and (not fv.any() or not gv.any()):
        return 0.0, 0.0
    wv, pv = _nodal(w, mesh.size), _nodal(p, mesh.size)
    pc = conjugate_exponent(p) if isinstance(p, ExponentProfile) else pv / (pv - 1.0)
    left = luxemburg_norm(fv * wv ** (1.0 / pv), pv, None, mesh).value
    right = luxemburg_norm(gv * wv ** (-1.0 / pv), _nodal(pc, mesh.size), None, mesh).value
    return lhs, 2.0 * left * right


def floor_modular_pair(f, p, w, floor: float, mesh: Mesh | None = None) -> tuple:
    """``(floor * rho_p(f), rho_{p,w}(f))`` accumulated term by term.

    Both sums share quadrature order and per-node powers, so the inequality
    ``floor <= w`` carries over to the floating-point results exactly.
    """
    mesh = mesh or _mesh_of(f, p, w)
    a = np.abs(_nodal(f, mesh.size))
    with np.errstate(over="ignore"):
        base = mesh.weights * np.power(a, _nodal(p, mesh.size))
    return float(np.sum(base * floor)), float(np.sum(base * _nodal(w, mesh.size)))


def floor_norm_pair(f, p: ExponentProfile, w, floor: float) -> tuple:
    """``(min(C^(1/p-), C^(1/p+)) ||f||_p, ||f||_{p,w})`` for the floor C."""
    c = min(floor ** (1.0 / p.lower), floor ** (1.0 / p.upper))
    return c * luxemburg_norm(f, p, None, p.mesh).value, luxemburg_norm(f, p, w, p.mesh).value
