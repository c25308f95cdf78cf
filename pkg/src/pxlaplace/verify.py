"""Desk-scale property checks for the inequalities of the function-space theory.

Every suite draws reproducible trace-zero samples (see :mod:`.sampling`),
evaluates one family of inequalities on them and returns a
:class:`SuiteReport`.  Pointwise-derived inequalities are checked with zero
tolerance, norm-level ones with a relative slack of ``NORM_SLACK``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .energy import EnergyModel, Problem
from .fields import (
    ExponentProfile,
    WeightProfile,
    _jsonable,
    check_embedding_hypotheses,
    weight_dominance,
)
from .mesh import Mesh, build_mesh
from .sampling import SampleSpec, random_samples
from .spaces import (
    equivalent_norm,
    floor_modular_pair,
    floor_norm_pair,
    holder_pairing,
    luxemburg_norm,
    modular,
    sobolev_norm,
)

__all__ = [
    "NORM_SLACK",
    "FieldConfig",
    "SuiteReport",
    "SUITES",
    "SANDWICH_CONFIGS",
    "check_sandwich",
    "check_unit_ball",
    "check_holder",
    "check_poincare",
    "check_floor_embedding",
    "check_coercivity",
    "check_lambda_properties",
    "check_mp_geometry",
    "estimate_embedding_constants",
    "run_suite",
    "dump_reports",
]

NORM_SLACK = 1e-8
REFINEMENT_DRIFT = 0.10


@dataclass(frozen=True)
class FieldConfig:
    """Mesh and field expressions a suite runs on."""

    box: tuple = ((0.0, 1.0),)
    n: int = 65
    p: str = "2"
    q: str = "1.5"
    w: str = "1"
    w0: str = "1"
    w1: str | None = None
    r: str | None = None
    t: str | None = None
    alpha: str | None = None
    floor: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "box", tuple(tuple(float(v) for v in b) for b in self.box))

    @property
    def d(self) -> int:
        return len(self.box)

    def mesh(self) -> Mesh:
        return build_mesh(self.box, self.n)

    def refined(self) -> "FieldConfig":
        """Same fields on the nested mesh with twice as many cells."""
        return replace(self, n=2 * self.n - 1)

    def profiles(self, mesh: Mesh | None = None) -> dict:
        mesh = mesh or self.mesh()
        return {
            "mesh": mesh,
            "p": ExponentProfile.from_expr(self.p, mesh),
            "q": ExponentProfile.from_expr(self.q, mesh),
            "w": WeightProfile.from_expr(self.w, mesh),
            "w0": WeightProfile.from_expr(self.w0, mesh),
        }

    def problem(self, mesh: Mesh | None = None) -> Problem:
        pr = self.profiles(mesh)
        return Problem(pr["mesh"], pr["p"], pr["q"], pr["w"], pr["w0"])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["box"] = [list(b) for b in self.box]
        return d


@dataclass
class SuiteReport:
    suite: str
    cases: int = 0
    failures: int = 0
    constants: dict = field(default_factory=dict)
    witness: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.cases > 0

    def to_dict(self) -> dict:
        return _jsonable({
            "suite": self.suite,
            "pass": self.passed,
            "cases": self.cases,
            "failures": self.failures,
            "constants": self.constants,
            "witness": self.witness,
            "details": self.details,
        })


class _Tracker:
    """Counts failures and keeps the case with the smallest margin."""

    def __init__(self, report: SuiteReport):
        self.report = report
        self.worst = math.inf
        self.first_failure = None

    def record(self, margin: float, ok: bool, witness: dict):
        self.report.cases += 1
        if not ok:
            self.report.failures += 1
            if self.first_failure is None:
                self.first_failure = witness
        if margin < self.worst:
            self.worst = margin
            self.report.witness = dict(witness, margin=margin)

    def finish(self) -> SuiteReport:
        if self.first_failure is not None:
            self.report.witness = dict(self.first_failure, first_failure=True)
        return self.report


def _le(a: float, b: float, slack: float = NORM_SLACK) -> bool:
    """``a <= b`` up to a relative slack (both sides non-negative)."""
    return a <= b * (1.0 + slack) + 1e-300


def _rel_margin(a: float, b: float) -> float:
    return (b - a) / max(abs(b), 1e-300)


def _scaled_samples(seed: int, count: int, d: int, decades: float = 3.0) -> list:
    """Random samples with amplitudes spread log-uniformly over ``+-decades``."""
    rng = np.random.default_rng([seed, 1])
    specs = random_samples(seed, count, d)
    return [s.scaled(float(10.0 ** rng.uniform(-decades, decades))) for s in specs]


# ---------------------------------------------------------------------------
# Lebesgue-space suites

SANDWICH_CONFIGS = (
    FieldConfig(p="1.5 + x/2", w="1"),
    FieldConfig(p="2 + sin(3*x)", w="1 + x"),
    FieldConfig(p="3 - x^2", w="exp(-x)", n=129),
    FieldConfig(box=((0.0, 1.0), (0.0, 1.0)), n=33, p="1.7 + x*y", w="1 + x + y^2"),
)


def _sandwich_case(f: np.ndarray, p: ExponentProfile, w: WeightProfile, mesh: Mesh) -> tuple:
    rho = modular(f, p, w, mesh)
    nrm = luxemburg_norm(f, p, w, mesh).value
    lo_e, hi_e = (p.upper, p.lower) if nrm <= 1.0 else (p.lower, p.upper)
    checks = [
        (nrm ** lo_e, rho),            # norm^p+- <= rho
        (rho, nrm ** hi_e),            # rho <= norm^p-+
        (min(rho ** (1 / p.lower), rho ** (1 / p.upper)), nrm),
        (nrm, max(rho ** (1 / p.lower), rho ** (1 / p.upper))),
    ]
    ok = all(_le(a, b) for a, b in checks)
    margin = min(_rel_margin(a, b) for a, b in checks)
    return ok, margin, {"rho": rho, "norm": nrm}


def check_sandwich(samples: int = 125, seed: int = 0, configs=None) -> SuiteReport:
    """Two-sided norm/modular bounds on ``samples`` fields per configuration."""
    configs = SANDWICH_CONFIGS if configs is None else configs
    report = SuiteReport("sandwich")
    track = _Tracker(report)
    for ci, cfg in enumerate(configs):
        pr = cfg.profiles()
        for si, spec in enumerate(_scaled_samples(seed + ci, samples, cfg.d)):
            f = spec.evaluate(pr["mesh"]).values
            if not f.any():
                continue
            ok, margin, vals = _sandwich_case(f, pr["p"], pr["w"], pr["mesh"])
            track.record(margin, ok, {"config": ci, "sample": si, "spec": spec.to_dict(), **vals})
    report.constants["worst_relative_margin"] = track.worst
    report.details["configs"] = [c.to_dict() for c in configs]
    return track.finish()


def check_unit_ball(samples: int = 125, seed: int = 0, configs=None,
                    tol: float = NORM_SLACK) -> SuiteReport:
    """``rho(f / ||f||) = 1`` for nonzero samples."""
    configs = SANDWICH_CONFIGS if configs is None else configs
    report = SuiteReport("unit_ball")
    track = _Tracker(report)
    worst = 0.0
    for ci, cfg in enumerate(configs):
        pr = cfg.profiles()
        for si, spec in enumerate(_scaled_samples(seed + ci, samples, cfg.d)):
            f = spec.evaluate(pr["mesh"]).values
            if not f.any():
                continue
            nrm = luxemburg_norm(f, pr["p"], pr["w"], pr["mesh"]).value
            defect = abs(modular(f / nrm, pr["p"], pr["w"], pr["mesh"]) - 1.0)
            worst = max(worst, defect)
            track.record(tol - defect, defect <= tol, {"config": ci, "sample": si,
                                                       "defect": defect})
    report.constants["max_defect"] = worst
    return track.finish()


def check_holder(samples: int = 125, seed: int = 0, configs=None) -> SuiteReport:
    """Weighted Hoelder inequality with constant 2 on random pairs."""
    configs = SANDWICH_CONFIGS if configs is None else configs
    report = SuiteReport("holder")
    track = _Tracker(report)
    ratio = 0.0
    for ci, cfg in enumerate(configs):
        pr = cfg.profiles()
        fs = _scaled_samples(seed + ci, samples, cfg.d)
        gs = _scaled_samples(seed + ci + 1000, samples, cfg.d)
        for si, (a, b) in enumerate(zip(fs, gs)):
            f, g = a.evaluate(pr["mesh"]).values, b.evaluate(pr["mesh"]).values
            lhs, rhs = holder_pairing(f, g, pr["p"], pr["w"], pr["mesh"])
            if rhs == 0.0:
                continue
            ratio = max(ratio, lhs / rhs)
            track.record(_rel_margin(lhs, rhs), lhs <= rhs,
                         {"config": ci, "sample": si, "lhs": lhs, "rhs": rhs})
    report.constants["max_lhs_over_rhs"] = ratio
    return track.finish()


# ---------------------------------------------------------------------------
# Poincare and embedding constants


POINCARE_DEFAULT = FieldConfig(n=129, p="2", q="2")


def _poincare_samples(seed: int, samples: int, d: int) -> list:
    modes = [SampleSpec((((k,) * d, 1.0),), (0.5,) * d, 1.0, 0.0)
             for k in range(1, 7)]
    return modes + random_samples(seed, samples, d)


def _poincare_estimate(cfg: FieldConfig, specs: list) -> tuple:
    pr = cfg.profiles()
    best, arg = 0.0, None
    for i, spec in enumerate(specs):
        f = spec.evaluate(pr["mesh"])
        g = equivalent_norm(f, pr["p"], pr["w"])
        if g == 0.0:
            continue
        ratio = luxemburg_norm(f, pr["q"], pr["w0"]).value / g
        if ratio > best:
            best, arg = ratio, i
    return best, arg


def check_poincare(samples: int = 40, seed: int = 0,
                   config: FieldConfig = POINCARE_DEFAULT) -> SuiteReport:
    """``C_est = max ||f||_{q,w0} / ||grad f||_{p,w}`` and its drift under refinement."""
    pr = config.profiles()
    report = SuiteReport("poincare")
    report.constants["dominance"] = weight_dominance(pr["w0"], pr["w"])
    specs = _poincare_samples(seed, samples, config.d)
    c, arg = _poincare_estimate(config, specs)
    c2, _ = _poincare_estimate(config.refined(), specs)
    drift = abs(c2 / c - 1.0) if c > 0 else math.inf
    report.cases = len(specs)
    stable = math.isfinite(c) and c > 0 and drift <= REFINEMENT_DRIFT
    report.failures = 0 if stable else 1
    report.constants.update(C_est=c, C_est_refined=c2, drift=drift)
    report.witness = {"sample": arg, "spec": specs[arg].to_dict() if arg is not None else None,
                      "n": config.n, "n_refined": config.refined().n}
    return report


EMBEDDING_DEFAULT = FieldConfig(p="3", q="2.5", w="1", w0="1", w1="1", r="2", t="2",
                                alpha="2", floor=1.0)


def _embedding_constants(cfg: FieldConfig, specs: list) -> dict:
    pr = cfg.profiles()
    mesh = pr["mesh"]
    r = ExponentProfile.from_expr(cfg.r, mesh)
    w1 = WeightProfile.from_expr(cfg.w1 or "1", mesh)
    out = {"C1": None, "C2": None, "above": 0, "below": 0}
    for spec in specs:
        f = spec.evaluate(mesh)
        nrm = sobolev_norm(f, pr["q"], pr["p"], pr["w0"], pr["w"])
        if nrm == 0.0:
            continue
        rho = modular(f, r, w1)
        if nrm > 1.0:
            key, e = "C1", r.upper
            out["above"] += 1
        else:
            key, e = "C2", r.lower
            out["below"] += 1
        val = rho / nrm ** e
        out[key] = val if out[key] is None else max(out[key], val)
    return out


def _normalized_samples(cfg: FieldConfig, seed: int, count: int, decades: float = 2.0) -> list:
    """Samples rescaled to Sobolev norms spread log-uniformly over ``+-decades``.

    The factors are fixed on the coarse mesh, so the refined mesh sees the same functions.
    """
    pr = cfg.profiles()
    rng = np.random.default_rng([seed, 2])
    out = []
    for spec in random_samples(seed, count, cfg.d):
        nrm = sobolev_norm(spec.evaluate(pr["mesh"]), pr["q"], pr["p"], pr["w0"], pr["w"])
        target = float(10.0 ** rng.uniform(-decades, decades))
        out.append(spec.scaled(target / nrm) if nrm > 0 else spec)
    return out


def estimate_embedding_constants(samples: int = 40, seed: int = 0,
                                 config: FieldConfig = EMBEDDING_DEFAULT) -> SuiteReport:
    """Constants of the modular bounds for the weighted compact embedding."""
    mesh = config.mesh()
    report = SuiteReport("embedding_constants")
    hyps = check_embedding_hypotheses(mesh, w0=config.w0, w=config.w, q=config.q, p=config.p,
                                      w1=config.w1, alpha=config.alpha, t=config.t,
                                      floor=config.floor, r=config.r)
    report.details["hypotheses"] = [h.to_dict() for h in hyps]
    if not hyps or not all(hyps):
        report.cases = len(hyps)
        report.failures = sum(1 for h in hyps if not h) or 1
        report.witness = {"failed": [h.name for h in hyps if not h]}
        return report
    specs = _normalized_samples(config, seed, samples)
    coarse = _embedding_constants(config, specs)
    fine = _embedding_constants(config.refined(), specs)
    report.cases = coarse["above"] + coarse["below"]
    for key in ("C1", "C2"):
        a, b = coarse[key], fine[key]
        if a is None or b is None:
            warnings.warn(f"no samples in the {key} branch; branch skipped", RuntimeWarning,
                          stacklevel=2)
            report.details[f"{key}_skipped"] = True
            continue
        drift = abs(b / a - 1.0)
        report.constants.update({key: a, f"{key}_refined": b, f"{key}_drift": drift})
        if not (math.isfinite(a) and drift <= REFINEMENT_DRIFT):
            report.failures += 1
            report.witness[key] = {"coarse": a, "fine": b, "drift": drift}
    report.details["branch_counts"] = {"above": coarse["above"], "below": coarse["below"]}
    return report


# ---------------------------------------------------------------------------
# Weighted floor embedding


FLOOR_DEFAULT = FieldConfig(p="1.5 + x/2", w="1 + x", floor=1.0)


def check_floor_embedding(samples: int = 100, seed: int = 0,
                          config: FieldConfig = FLOOR_DEFAULT) -> SuiteReport:
    """``C rho_p(f) <= rho_{p,w}(f)`` exactly, and the norm form up to the norm slack."""
    pr = config.profiles()
    floor = 1.0 if config.floor is None else config.floor
    if not 0 < floor <= pr["w"].floor:
        raise ValueError(f"floor constant {floor:g} must lie in (0, min w = {pr['w'].floor:g}]")
    report = SuiteReport("floor_embedding")
    track = _Tracker(report)
    same_constant_violations = 0
    for si, spec in enumerate(_scaled_samples(seed, samples, config.d)):
        f = spec.evaluate(pr["mesh"])
        if not f.values.any():
            continue
        a, b = floor_modular_pair(f, pr["p"], pr["w"], floor)
        na, nb = floor_norm_pair(f, pr["p"], pr["w"], floor)
        ok = a <= b and _le(na, nb)
        # same constant on both sides of the norm inequality: logged, not asserted
        plain = luxemburg_norm(f, pr["p"], None, pr["mesh"]).value
        same_constant_violations += not _le(floor * plain, nb)
        track.record(min(_rel_margin(a, b), _rel_margin(na, nb)), ok,
                     {"sample": si, "floor_modular": a, "weighted_modular": b,
                      "floor_norm": na, "weighted_norm": nb})
    report.constants["floor"] = floor
    report.details["same_constant_norm_violations"] = same_constant_violations
    return track.finish()


# ---------------------------------------------------------------------------
# Energy suites


COERCIVE_DEFAULT = FieldConfig(p="2", q="1.5")
SUPERLINEAR_DEFAULT = FieldConfig(p="2", q="4")
LAMBDA_DEFAULT = FieldConfig(p="1.8 + x/3", q="1.5")


def _ray_scan(model: EnergyModel, g, ts):
    return [model.ray_energy(g, t) for t in ts]


def check_coercivity(rays: int = 20, seed: int = 0, config: FieldConfig = COERCIVE_DEFAULT,
                     target: float = 1e6, max_exponent: int = 80) -> SuiteReport:
    """Exact lower bound along rays and growth of J past a threshold."""
    problem = config.problem()
    if not problem.coercive:
        raise ValueError(
            "standing assumption 1 < q- <= q+ < p- <= p+ violated "
            f"(q+ = {problem.q.upper:g}, p- = {problem.p.lower:g})")
    model = EnergyModel(problem)
    report = SuiteReport("coercivity")
    track = _Tracker(report)
    ts = [0.0] + [2.0 ** k for k in range(-10, max_exponent + 1)]
    thresholds = []
    for si, spec in enumerate(random_samples(seed, rays, config.d)):
        f = spec.evaluate(model.mesh)
        nrm = equivalent_norm(f, problem.p, problem.w)
        if nrm == 0.0:
            continue
        g = f.values / nrm
        values = _ray_scan(model, g, ts)
        bounds = [model.coercivity_lower_bound(g, t) for t in ts]
        bound_ok = all(b <= v for b, v in zip(bounds, values))
        bmargin = min(v - b for b, v in zip(bounds, values))
        # threshold: last index where J fails to increase
        k0 = max((k for k in range(1, len(values)) if values[k] <= values[k - 1]), default=0)
        reached = [k for k in range(k0, len(values)) if values[k] > target]
        ok = bound_ok and values[0] == 0.0 and bool(reached) and k0 < len(values) - 1
        if reached:
            thresholds.append(ts[k0])
        track.record(bmargin, ok, {"sample": si, "spec": spec.to_dict(),
                                   "bound_ok": bound_ok, "threshold_t": ts[k0],
                                   "t_reaching_target": ts[reached[0]] if reached else None})
    report.constants["max_threshold_t"] = max(thresholds) if thresholds else None
    report.constants["target"] = target
    return track.finish()


def check_lambda_properties(pairs: int = 100, seed: int = 0,
                            config: FieldConfig = LAMBDA_DEFAULT,
                            slack: float = 1e-12) -> SuiteReport:
    """Convexity of the gradient part and strict monotonicity of its derivative."""
    problem = config.problem()
    full = EnergyModel(problem)
    model = EnergyModel(Problem(problem.mesh, problem.p, problem.p, problem.w,
                                np.zeros(problem.mesh.size)))
    report = SuiteReport("lambda_properties")
    track = _Tracker(report)
    fs = random_samples(seed, pairs, config.d)
    gs = random_samples(seed + 1000, pairs, config.d)
    worst_convexity, min_pairing = math.inf, math.inf
    full_min, full_negative = math.inf, 0
    for si, (a, b) in enumerate(zip(fs, gs)):
        f, g = a.evaluate(model.mesh).values, b.evaluate(model.mesh).values
        if np.array_equal(f, g):
            continue
        # the full derivative subtracts a monotone term; its pairing is logged only
        full_pair = full.pairing(f, f - g) - full.pairing(g, f - g)
        full_min = min(full_min, full_pair)
        full_negative += full_pair <= 0
        conv = model.lambda_value(g) - model.lambda_value(f) - model.lambda_pairing(f, g - f)
        mono = model.lambda_pairing(f, f - g) - model.lambda_pairing(g, f - g)
        worst_convexity = min(worst_convexity, conv)
        min_pairing = min(min_pairing, mono)
        track.record(min(conv, mono), conv >= -slack and mono > 0,
                     {"pair": si, "convexity_slack": conv, "monotonicity_pairing": mono})
    report.constants.update(min_convexity_slack=worst_convexity,
                            min_monotonicity_pairing=min_pairing)
    report.details.update(full_derivative_min_pairing=full_min,
                          full_derivative_nonpositive=full_negative)
    return track.finish()


def check_mp_geometry(samples: int = 50, seed: int = 0,
                      config: FieldConfig = SUPERLINEAR_DEFAULT, rho0: float = 0.01,
                      target: float = -1e3, max_exponent: int = 40) -> SuiteReport:
    """Positivity on a small sphere and divergence to minus infinity along rays.

    The asserted ray bound is ``t^p+ rho_p(grad g) / p- - t^q- rho_q(g) / q+``
    for ``t >= 1``; the version without the ``1/p``, ``1/q`` factors is not a
    valid upper bound in general and is only logged.
    """
    problem = config.problem()
    if not problem.superlinear:
        raise ValueError(
            "mountain-pass hypothesis p+ < q- violated "
            f"(p+ = {problem.p.upper:g}, q- = {problem.q.lower:g})")
    model = EnergyModel(problem)
    report = SuiteReport("mp_geometry")
    track = _Tracker(report)
    ts = [2.0 ** k for k in range(0, max_exponent + 1)]
    sphere_min = math.inf
    literal_violations = 0
    for si, spec in enumerate(random_samples(seed, samples, config.d)):
        f = spec.evaluate(model.mesh)
        nrm = equivalent_norm(f, problem.p, problem.w)
        if nrm == 0.0:
            continue
        g = f.values / nrm
        j_small = model.value(g * rho0)
        sphere_min = min(sphere_min, j_small)
        values = _ray_scan(model, g, ts)
        bounds = [model.ray_upper_bound(g, t) for t in ts]
        bound_ok = all(v <= b for v, b in zip(values, bounds))
        literal_violations += sum(v > model.literal_ray_bound(g, t) for v, t in zip(values, ts))
        diverges = any(v < target for v in values)
        ok = j_small > 0 and bound_ok and diverges
        track.record(min(min(b - v for v, b in zip(values, bounds)), j_small), ok,
                     {"sample": si, "spec": spec.to_dict(), "sphere_energy": j_small,
                      "bound_ok": bound_ok, "diverges": diverges})
    report.constants.update(sphere_min_energy=sphere_min, rho0=rho0,
                            literal_bound_violations=literal_violations)
    return track.finish()


# ---------------------------------------------------------------------------
# Dispatch


SUITES = {
    "sandwich": check_sandwich,
    "unit-ball": check_unit_ball,
    "holder": check_holder,
    "poincare": check_poincare,
    "floor": check_floor_embedding,
    "coercivity": check_coercivity,
    "lambda": check_lambda_properties,
    "mp-geometry": check_mp_geometry,
    "embedding": estimate_embedding_constants,
}


def run_suite(name: str, samples: int | None = None, seed: int = 0,
              config: FieldConfig | None = None) -> SuiteReport:
    """Run one suite by name; ``config`` replaces the suite's default fields."""
    fn = SUITES[name]
    kwargs = {"seed": seed}
    if samples is not None:
        kwargs["rays" if name == "coercivity" else "pairs" if name == "lambda"
               else "samples"] = samples
    if config is not None:
        kwargs["configs" if name in ("sandwich", "unit-ball", "holder") else "config"] = (
            (config,) if name in ("sandwich", "unit-ball", "holder") else config)
    return fn(**kwargs)


def dump_reports(reports) -> str:
    """Serialize reports to a JSON document with stable key order."""
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n"
