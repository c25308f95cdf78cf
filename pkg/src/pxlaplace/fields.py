"""Exponent and weight fields: bounds, conjugates, dual weights and class checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fieldspec import BinOp, FieldDomainError, FieldExpr, Neg, Num, constant, parse
from .mesh import Mesh

__all__ = [
    "ExponentClassError",
    "WeightClassError",
    "ExponentProfile",
    "WeightProfile",
    "ConditionReport",
    "exponent_bounds",
    "conjugate_exponent",
    "sobolev_conjugate",
    "dual_weight",
    "check_log_holder",
    "check_jump_condition",
    "jump_radius",
    "integrability",
    "check_weight_class",
    "check_embedding_hypotheses",
    "check_sobolev_embedding",
    "weight_dominance",
]


class ExponentClassError(ValueError):
    """Exponent outside the class 1 < p- <= p+ < infinity."""


class WeightClassError(ValueError):
    """Weight not strictly positive on the mesh."""


def _as_expr(e) -> FieldExpr | None:
    if e is None:
        return None
    if isinstance(e, FieldExpr):
        return e
    if isinstance(e, str):
        return parse(e)
    if isinstance(e, (int, float)):
        return constant(e)
    return getattr(e, "expr", None)


def exponent_bounds(p, mesh: Mesh) -> tuple:
    """Return (p-, p+) as min and max over the mesh nodes.

    Raises :class:`ExponentClassError` unless 1 < p- and p+ < infinity.
    """
    values = p.values if isinstance(p, ExponentProfile) else mesh.evaluate(_as_expr(p))
    lo, hi = float(np.min(values)), float(np.max(values))
    if not lo > 1.0:
        raise ExponentClassError(f"essential infimum {lo!r} must exceed 1")
    if not np.isfinite(hi):
        raise ExponentClassError("exponent is unbounded on the mesh")
    return lo, hi


@dataclass(eq=False)
class ExponentProfile:
    """Nodal samples of a variable exponent together with its bounds."""

    mesh: Mesh
    values: np.ndarray
    expr: FieldExpr | None = None
    lower: float = field(init=False)
    upper: float = field(init=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        self.lower, self.upper = exponent_bounds(self, self.mesh)

    @classmethod
    def from_expr(cls, expr, mesh: Mesh) -> "ExponentProfile":
        expr = _as_expr(expr)
        return cls(mesh, mesh.evaluate(expr), expr)

    @property
    def is_constant(self) -> bool:
        return self.lower == self.upper

    def __repr__(self) -> str:
        label = "array" if self.expr is None else str(self.expr)
        return f"ExponentProfile({label}, lower={self.lower:g}, upper={self.upper:g})"


@dataclass(eq=False)
class WeightProfile:
    """Nodal samples of a weight; strictly positive at every node."""

    mesh: Mesh
    values: np.ndarray
    expr: FieldExpr | None = None
    floor: float = field(init=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(self.values)):
            raise WeightClassError("weight is not finite at every node")
        self.floor = float(np.min(self.values))
        if not self.floor > 0.0:
            i = int(np.argmin(self.values))
            raise WeightClassError(
                f"weight must be positive at every node, found {self.floor!r} "
                f"at {tuple(self.mesh.points[i])}"
            )

    @classmethod
    def from_expr(cls, expr, mesh: Mesh) -> "WeightProfile":
        expr = _as_expr(expr)
        return cls(mesh, mesh.evaluate(expr), expr)

    @property
    def ceiling(self) -> float:
        return float(np.max(self.values))

    def __repr__(self) -> str:
        label = "array" if self.expr is None else str(self.expr)
        return f"WeightProfile({label}, floor={self.floor:g})"


def conjugate_exponent(p: ExponentProfile) -> ExponentProfile:
    """Pointwise p' = p / (p - 1)."""
    expr = None
    if p.expr is not None:
        expr = FieldExpr(BinOp("/", p.expr.root, BinOp("-", p.expr.root, Num(1.0))))
    return ExponentProfile(p.mesh, p.values / (p.values - 1.0), expr)


def sobolev_conjugate(p, d: int) -> np.ndarray:
    """Nodal Sobolev conjugate: d p / (d - p) where p < d, +inf elsewhere."""
    if d < 1:
        raise ValueError("dimension must be at least 1")
    values = np.asarray(p.values if hasattr(p, "values") else p, dtype=float)
    out = np.full(values.shape, np.inf)
    below = values < d
    out[below] = d * values[below] / (d - values[below])
    return out


def dual_weight(w: WeightProfile, p: ExponentProfile) -> WeightProfile:
    """Dual weight w^(1 - p') = w^(-1/(p - 1))."""
    expr = None
    if w.expr is not None and p.expr is not None:
        exponent = Neg(BinOp("/", Num(1.0), BinOp("-", p.expr.root, Num(1.0))))
        expr = FieldExpr(BinOp("^", w.expr.root, exponent))
    return WeightProfile(w.mesh, w.values ** (-1.0 / (p.values - 1.0)), expr)


@dataclass
class ConditionReport:
    """Outcome of a hypothesis check; serializes to ``{name, pass, witness, value}``."""

    name: str
    passed: bool
    value: float | None = None
    witness: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": bool(self.passed),
            "witness": _jsonable(self.witness),
            "value": _jsonable(self.value),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


# ---------------------------------------------------------------------------
# Regularity conditions


def check_log_holder(p: ExponentProfile, mesh: Mesh | None = None, cap: float = 1.0,
                     block: int = 512) -> ConditionReport:
    """Estimate the log-Hoelder constant by scanning all node pairs.

    ``C_est = max |p(x) - p(y)| * (-ln|x - y|)`` over pairs with
    ``0 < |x - y| <= 1/2``; passes iff ``C_est <= cap``.
    """
    mesh = mesh or p.mesh
    if mesh.size < 2:
        raise ValueError("need at least two nodes")
    pts, vals = mesh.points, p.values
    best, arg = 0.0, (0, 0)
    for start in range(0, mesh.size, block):
        stop = min(start + block, mesh.size)
        dist = np.sqrt(((pts[start:stop, None, :] - pts[None, :, :]) ** 2).sum(-1))
        dp = np.abs(vals[start:stop, None] - vals[None, :])
        ok = (dist > 0) & (dist <= 0.5)
        with np.errstate(divide="ignore"):
            score = np.where(ok, dp * -np.log(np.where(ok, dist, 1.0)), 0.0)
        k = int(np.argmax(score))
        if score.flat[k] > best:
            best = float(score.flat[k])
            arg = (start + k // mesh.size, k % mesh.size)
    i, j = arg
    return ConditionReport(
        "log_holder",
        best <= cap,
        best,
        {"x": mesh.points[i].tolist(), "y": mesh.points[j].tolist(), "cap": cap},
    )


def _ball_offsets(mesh: Mesh, r: float) -> list:
    reach = [int(np.floor(r / h * (1 + 1e-12))) for h in mesh.h]
    ranges = [range(-k, k + 1) for k in reach]
    out = []
    for off in np.array(np.meshgrid(*ranges, indexing="ij")).reshape(mesh.d, -1).T:
        dist2 = sum((o * h) ** 2 for o, h in zip(off, mesh.h))
        if dist2 <= r * r * (1 + 1e-12):
            out.append(tuple(int(o) for o in off))
    return out


def _shift(arr: np.ndarray, off: tuple, fill: float) -> np.ndarray:
    """out[i] = arr[i + off] where defined, ``fill`` elsewhere."""
    out = np.full(arr.shape, fill)
    if any(abs(o) >= m for o, m in zip(off, arr.shape)):
        return out
    src, dst = [], []
    for o, m in zip(off, arr.shape):
        if o >= 0:
            src.append(slice(o, m))
            dst.append(slice(0, m - o))
        else:
            src.append(slice(0, m + o))
            dst.append(slice(-o, m))
    out[tuple(dst)] = arr[tuple(src)]
    return out


def ball_bounds(p: ExponentProfile, r: float, mesh: Mesh | None = None) -> tuple:
    """Per-node (p-_B, p+_B) over nodes of the closed ball B(x, r) inside the box."""
    mesh = mesh or p.mesh
    vals = p.values.reshape(mesh.shape)
    lo = np.full(mesh.shape, np.inf)
    hi = np.full(mesh.shape, -np.inf)
    for off in _ball_offsets(mesh, r):
        lo = np.minimum(lo, _shift(vals, off, np.inf))
        hi = np.maximum(hi, _shift(vals, off, -np.inf))
    return lo.ravel(), hi.ravel()


def check_jump_condition(p: ExponentProfile, mesh: Mesh | None = None,
                         r: float = 0.1) -> ConditionReport:
    """Check that every ball B(x, r) has p-_B >= d or p+_B <= d p-_B / (d - p-_B).

    The witness carries the per-node local Sobolev exponent ``p_star_B``.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    mesh = mesh or p.mesh
    d = mesh.d
    lo, hi = ball_bounds(p, r, mesh)
    below = lo < d
    critical = np.full(lo.shape, np.inf)
    critical[below] = d * lo[below] / (d - lo[below])
    p_star = np.where(below, critical, hi)
    margin = np.where(below, critical - hi, np.inf)
    ok = margin >= 0
    k = int(np.argmin(margin))
    return ConditionReport(
        "jump_condition",
        bool(ok.all()),
        float(margin[k]),
        {
            "radius": r,
            "x": mesh.points[k].tolist(),
            "p_minus_ball": float(lo[k]),
            "p_plus_ball": float(hi[k]),
            "p_star_ball": float(p_star[k]),
            "p_star_min": float(p_star.min()),
        },
    )


def jump_radius(p: ExponentProfile, mesh: Mesh | None = None) -> float | None:
    """Largest radius of the form diam / 2^k for which the jump condition holds."""
    mesh = mesh or p.mesh
    r = mesh.diameter
    while r >= min(mesh.h):
        if check_jump_condition(p, mesh, r):
            return r
        r /= 2.0
    return None


# ---------------------------------------------------------------------------
# Integrability


def _midpoint_integral(func: Callable, box, cells: int) -> float:
    axes = []
    for lo, hi in box:
        h = (hi - lo) / cells
        axes.append(lo + h * (np.arange(cells) + 0.5))
    grids = np.meshgrid(*axes, indexing="ij")
    vol = np.prod([(hi - lo) / cells for lo, hi in box])
    with np.errstate(all="ignore"):
        vals = func(tuple(g.ravel() for g in grids))
    return float(np.sum(vals) * vol)


def integrability(func: Callable, box, base_cells: int = 16, refine: int = 4,
                  ratio_cap: float = 0.95) -> dict:
    """Decide whether ``func`` is integrable over ``box`` from three midpoint sums.

    The midpoint rule never samples the box faces, so boundary singularities
    are tolerated.  Successive increments of a convergent sum shrink
    geometrically; increments that do not shrink (ratio >= ``ratio_cap``)
    signal divergence.  Returns the estimate, a geometric extrapolation and
    the verdict.
    """
    levels = [base_cells * refine ** k for k in range(3)]
    try:
        sums = [_midpoint_integral(func, box, c) for c in levels]
    except (FieldDomainError, FloatingPointError, OverflowError) as exc:
        return {"finite": False, "estimate": float("inf"), "extrapolated": float("inf"),
                "ratio": None, "error": str(exc)}
    if not all(np.isfinite(sums)):
        return {"finite": False, "estimate": float("inf"), "extrapolated": float("inf"),
                "ratio": None, "error": "quadrature overflow"}
    d1, d2 = sums[1] - sums[0], sums[2] - sums[1]
    scale = max(1.0, abs(sums[2]))
    if abs(d2) <= 1e-12 * scale:
        return {"finite": True, "estimate": sums[2], "extrapolated": sums[2], "ratio": 0.0}
    ratio = d2 / d1 if d1 != 0 else np.inf
    finite = abs(ratio) < ratio_cap
    extrap = sums[2] + d2 * ratio / (1.0 - ratio) if finite else float("inf")
    return {"finite": bool(finite), "estimate": sums[2], "extrapolated": float(extrap),
            "ratio": float(ratio)}


def _dyadic_cover(box, level: int) -> list:
    cuts = [np.linspace(lo, hi, 2 ** level + 1) for lo, hi in box]
    boxes = []
    for idx in np.ndindex(*(2 ** level,) * len(box)):
        boxes.append(tuple((float(c[i]), float(c[i + 1])) for c, i in zip(cuts, idx)))
    return boxes


def _integrable_report(name: str, func: Callable, mesh: Mesh, cover_level: int,
                       refine: int) -> ConditionReport:
    per_axis = max(16, (max(mesh.shape) - 1) // 2 ** cover_level)
    total, worst = 0.0, None
    for sub in _dyadic_cover(mesh.box, cover_level):
        res = integrability(func, sub, per_axis, refine)
        if not res["finite"]:
            return ConditionReport(name, False, float("inf"), {"box": sub, **res})
        total += res["extrapolated"]
        if worst is None or res["estimate"] > worst[1]["estimate"]:
            worst = (sub, res)
    return ConditionReport(name, True, total, {"box": worst[0], **worst[1]})


def _field(e) -> Callable:
    expr = _as_expr(e)
    if expr is None:
        raise ValueError("integrability checks need fields given as expressions")
    return expr.on_points


def check_weight_class(w, p, mesh: Mesh, cover_level: int = 2,
                       refine: int = 4) -> ConditionReport:
    """Membership of ``w`` in the class with ``w^(-1/(p-1))`` locally integrable.

    Each box of a dyadic cover is integrated; ``value`` is the extrapolated
    integral of the dual weight over the whole box domain.
    """
    wf, pf = _field(w), _field(p)

    def dual(c):
        return wf(c) ** (-1.0 / (pf(c) - 1.0))

    return _integrable_report("weight_class", dual, mesh, cover_level, refine)


def weight_dominance(w_small: WeightProfile, w_big: WeightProfile) -> float:
    """Smallest c with w_small <= c * w_big at every node."""
    return float(np.max(w_small.values / w_big.values))


def check_embedding_hypotheses(mesh: Mesh, *, w0, w, q, p, w1=None, alpha=None, t=None,
                               floor: float | None = None, r=None, cover_level: int = 2,
                               refine: int = 4) -> list:
    """Hypotheses of the compact embedding into the ``w1``-weighted ``r``-space.

    (I) ``w1 > 0`` with ``w1`` in the ``alpha``-Lebesgue space, ``alpha > 1``;
    (II) ``w0^(-t/(q-t))`` and ``w^(-t/(p-t))`` integrable with ``1 < t < q < p``;
    (III) ``w0 >= floor > 0``.  When ``r`` is supplied, also checks the target
    range ``1 < r < t* / beta`` with ``1/alpha + 1/beta = 1``.
    Hypotheses whose inputs are missing are omitted from the result.
    """
    reports = []
    nodes = mesh.coords

    def nodal(e):
        return _field(e)(nodes)

    if w1 is not None and alpha is not None:
        a_vals, w1_vals = nodal(alpha), nodal(w1)
        ok_nodes = bool(a_vals.min() > 1.0 and w1_vals.min() > 0.0)
        w1f, af = _field(w1), _field(alpha)
        rep = _integrable_report("hypothesis_I", lambda c: w1f(c) ** af(c), mesh,
                                 cover_level, refine)
        rep.passed = rep.passed and ok_nodes
        rep.witness.update(alpha_min=float(a_vals.min()), w1_min=float(w1_vals.min()))
        reports.append(rep)

    if t is not None:
        t_vals, q_vals, p_vals = nodal(t), nodal(q), nodal(p)
        order = bool(np.all((1.0 < t_vals) & (t_vals < q_vals) & (q_vals < p_vals)))
        tf, qf, pf, w0f, wf = _field(t), _field(q), _field(p), _field(w0), _field(w)
        r0 = _integrable_report(
            "hypothesis_II_w0", lambda c: w0f(c) ** (-tf(c) / (qf(c) - tf(c))), mesh,
            cover_level, refine)
        r1 = _integrable_report(
            "hypothesis_II_w", lambda c: wf(c) ** (-tf(c) / (pf(c) - tf(c))), mesh,
            cover_level, refine)
        for rep in (r0, r1):
            rep.passed = rep.passed and order
            rep.witness["exponent_order"] = order
            reports.append(rep)

    if floor is not None:
        w0_min = float(nodal(w0).min())
        reports.append(ConditionReport(
            "hypothesis_III", bool(floor > 0 and w0_min >= floor), w0_min, {"floor": floor}))

    if r is not None and t is not None and alpha is not None:
        r_vals, a_vals = nodal(r), nodal(alpha)
        beta = a_vals / (a_vals - 1.0)
        bound = sobolev_conjugate(nodal(t), mesh.d) / beta
        ok = bool(np.all((r_vals > 1.0) & (r_vals < bound)))
        gap = bound - r_vals
        k = int(np.argmin(gap))
        reports.append(ConditionReport(
            "target_exponent_range", ok, float(gap[k]),
            {"x": mesh.points[k].tolist(), "r": float(r_vals[k]), "bound": float(bound[k])}))
    return reports


def check_sobolev_embedding(p: ExponentProfile, r: ExponentProfile,
                            log_holder_cap: float = 1.0) -> list:
    """Hypothesis predicate for the unweighted embedding into the ``r``-space.

    Continuity on the closure with p- > 1 is taken as the meaning of the
    continuous-exponent class; continuity itself is probed with the
    log-Hoelder scan.  Returns reports for the hypotheses, the embedding
    ``r <= p*`` and the compactness margin ``inf(p* - r) > 0``.
    """
    mesh = p.mesh
    d = mesh.d
    lh = check_log_holder(p, mesh, log_holder_cap)
    below_d = ConditionReport("p_plus_below_dimension", p.upper < d, p.upper, {"d": d})
    r_class = ConditionReport("r_minus_above_one", r.lower > 1.0, r.lower)
    p_star = sobolev_conjugate(p, d)
    gap = p_star - r.values
    k = int(np.argmin(gap))
    embed = ConditionReport("r_below_sobolev_conjugate", bool(np.all(gap >= 0)),
                            float(gap[k]), {"x": mesh.points[k].tolist()})
    compact = ConditionReport("compactness_margin", bool(gap[k] > 0), float(gap[k]),
                              {"x": mesh.points[k].tolist()})
    return [lh, below_d, r_class, embed, compact]
