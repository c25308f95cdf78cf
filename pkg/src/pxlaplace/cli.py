"""Command-line front end: ``python -m pxlaplace <command> ...``.

Commands
--------
analyze              regularity and weight-class checks on the configured fields
norm CSV             modular, Luxemburg and Sobolev norms of a grid function
solve {min,mp}       minimization or mountain-pass search
verify SUITE|all     property suites
report [JSON ...]    merge reports; ``--show-config`` echoes the parsed config

Exit status is 0 when every requested check passes, 1 on a failed check or
a non-converged solve, and 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .energy import Problem
from .fields import (
    ExponentClassError,
    ExponentProfile,
    WeightClassError,
    WeightProfile,
    _jsonable,
    check_embedding_hypotheses,
    check_jump_condition,
    check_log_holder,
    check_weight_class,
    jump_radius,
)
from .fieldspec import FieldSpecError, parse
from .mesh import MeshError, build_mesh, read_csv, write_csv
from .solvers import GeometryError, SolveConfig, StandingAssumptionError, solve
from .spaces import (
    equivalent_norm,
    luxemburg_norm,
    modular,
    sobolev_norm,
    standing_order_violation,
)
from .verify import SUITES, FieldConfig, SuiteReport, dump_reports, run_suite

__all__ = ["ConfigError", "VerifySection", "RunConfig", "load_config", "run", "main"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class VerifySection:
    suites: list = field(default_factory=lambda: ["all"])
    samples: int | None = None
    seed: int = 0


@dataclass
class RunConfig:
    box: list = field(default_factory=lambda: [[0.0, 1.0]])
    n: int = 65
    d: int | None = None
    p: str = "2"
    q: str = "1.5"
    w: str = "1"
    w0: str = "1"
    w1: str | None = None
    r: str | None = None
    t: str | None = None
    alpha: str | None = None
    floor: float | None = None
    solver: SolveConfig = field(default_factory=SolveConfig)
    verify: VerifySection = field(default_factory=VerifySection)
    out: str = "out"

    def __post_init__(self):
        self.box = [[float(lo), float(hi)] for lo, hi in self.box]
        if self.d is not None and self.d != len(self.box):
            raise ConfigError(f"d = {self.d} does not match a box with {len(self.box)} axes")
        for name in ("p", "q", "w", "w0", "w1", "r", "t", "alpha"):
            text = getattr(self, name)
            if text is None:
                continue
            try:
                expr = parse(str(text))
            except FieldSpecError as exc:
                raise ConfigError(f"field {name!r}: {exc}") from exc
            if expr.required_dim > len(self.box):
                raise ConfigError(f"field {name!r} uses a coordinate beyond d = {len(self.box)}")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            solver = SolveConfig(**data.pop("solver", {}))
            verify = VerifySection(**data.pop("verify", {}))
            return cls(solver=solver, verify=verify, **data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def field_config(self) -> FieldConfig:
        return FieldConfig(box=tuple(map(tuple, self.box)), n=self.n, p=self.p, q=self.q,
                           w=self.w, w0=self.w0, w1=self.w1, r=self.r, t=self.t,
                           alpha=self.alpha, floor=self.floor)


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return RunConfig.from_dict(data)


# ---------------------------------------------------------------------------
# Commands


def _write(out: Path, name: str, text: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _profiles(cfg: RunConfig) -> dict:
    return cfg.field_config().profiles()


def cmd_analyze(cfg: RunConfig, args) -> int:
    pr = _profiles(cfg)
    mesh = pr["mesh"]
    checks = [check_log_holder(pr["p"]), check_log_holder(pr["q"])]
    checks[1].name = "log_holder_q"
    radius = jump_radius(pr["p"])
    if radius is not None:
        checks.append(check_jump_condition(pr["p"], r=radius))
    checks.append(check_weight_class(pr["w"], pr["p"], mesh))
    checks.append(check_weight_class(pr["w0"], pr["q"], mesh))
    checks[-1].name = "weight_class_w0"
    checks += check_embedding_hypotheses(mesh, w0=cfg.w0, w=cfg.w, q=cfg.q, p=cfg.p,
                                         w1=cfg.w1, alpha=cfg.alpha, t=cfg.t,
                                         floor=cfg.floor, r=cfg.r)
    order = _order_violation(cfg, pr)
    report = {
        "command": "analyze",
        "mesh": mesh.describe(),
        "bounds": {"p": [pr["p"].lower, pr["p"].upper], "q": [pr["q"].lower, pr["q"].upper]},
        "jump_radius": radius,
        "checks": [c.to_dict() for c in checks],
        "exponent_order": order or "ok",
    }
    report["pass"] = all(c.passed for c in checks) and order is None
    _write(Path(args.out), "report.json", _dumps(report))
    return EXIT_OK if report["pass"] else EXIT_FAIL


def _order_violation(cfg: RunConfig, pr: dict) -> str | None:
    if cfg.solver.mode == "min":
        return standing_order_violation(pr["q"], pr["p"], cfg.solver.lam)
    if not pr["p"].upper < pr["q"].lower:
        return (f"mountain-pass hypothesis p+ < q- violated "
                f"(p+ = {pr['p'].upper:g}, q- = {pr['q'].lower:g})")
    return None


def cmd_norm(cfg: RunConfig, args) -> int:
    f = read_csv(args.csv)
    mesh = f.mesh
    p = ExponentProfile.from_expr(cfg.p, mesh)
    q = ExponentProfile.from_expr(cfg.q, mesh)
    problem = standing_order_violation(q, p)
    if problem:
        raise ConfigError(problem)
    w, w0 = WeightProfile.from_expr(cfg.w, mesh), WeightProfile.from_expr(cfg.w0, mesh)
    report = {
        "command": "norm",
        "mesh": mesh.describe(),
        "modular_q_w0": modular(f, q, w0),
        "norm_q_w0": luxemburg_norm(f, q, w0).value,
        "sobolev_norm": sobolev_norm(f, q, p, w0, w),
        "pass": True,
    }
    if f.trace_zero:
        report["gradient_norm_p_w"] = equivalent_norm(f, p, w)
    _write(Path(args.out), "report.json", _dumps(report))
    return EXIT_OK


def cmd_solve(cfg: RunConfig, args) -> int:
    solver = replace(cfg.solver, mode="min" if args.mode == "min" else "mountain-pass")
    if args.seed is not None:
        solver = replace(solver, seed=args.seed)
    mesh = build_mesh(cfg.box, cfg.n)
    w0 = 0 if cfg.w0.strip() == "0" else cfg.w0
    problem = Problem.from_exprs(mesh, cfg.p, cfg.q, cfg.w, w0)
    try:
        result = solve(solver, problem)
    except StandingAssumptionError as exc:
        raise ConfigError(str(exc)) from exc
    except GeometryError as exc:
        _write(Path(args.out), "report.json",
               _dumps({"command": "solve", "mode": solver.mode, "pass": False,
                       "error": f"mountain-pass geometry: {exc}"}))
        print(f"error: mountain-pass geometry: {exc}", file=sys.stderr)
        return EXIT_FAIL
    out = Path(args.out)
    report = {"command": "solve", "mesh": mesh.describe(), "config": solver.to_dict(),
              **result.to_dict(), "pass": bool(result.converged)}
    _write(out, "report.json", _dumps(report))
    _write(out, "solution.csv", write_csv(result.solution))
    _write(out, "trace.csv", result.trace_csv())
    return EXIT_OK if result.converged else EXIT_FAIL


_COMPATIBLE = {
    "coercivity": lambda fc: fc.problem().coercive,
    "mp-geometry": lambda fc: fc.problem().superlinear,
    "embedding": lambda fc: fc.r is not None and fc.t is not None,
}


def cmd_verify(cfg: RunConfig, args) -> int:
    seed = cfg.verify.seed if args.seed is None else args.seed
    names = list(SUITES) if args.suite == "all" else [args.suite]
    custom = cfg.field_config() if args.config else None
    reports, skipped = [], []
    for name in names:
        if custom is not None and args.suite == "all":
            check = _COMPATIBLE.get(name)
            if check is not None and not check(custom):
                skipped.append(name)
                continue
        try:
            reports.append(run_suite(name, cfg.verify.samples, seed, custom))
        except (ValueError, ArithmeticError) as exc:
            raise ConfigError(f"suite {name}: {exc}") from exc
    text = dump_reports(reports)
    if skipped:
        doc = json.loads(text)
        doc.append({"suite": "skipped", "names": skipped, "pass": True})
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    _write(Path(args.out), "report.json", text)
    for r in reports:
        print(f"{r.suite}: {'pass' if r.passed else 'FAIL'} "
              f"({r.cases} cases, {r.failures} failures)")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _passes(doc) -> bool:
    if isinstance(doc, list):
        return all(_passes(d) for d in doc)
    if isinstance(doc, dict):
        return doc.get("pass", True) is not False
    return True


def cmd_report(cfg: RunConfig, args) -> int:
    if args.show_config:
        sys.stdout.write(cfg.to_json())
        if not args.reports:
            return EXIT_OK
    merged = {}
    for path in args.reports:
        try:
            merged[str(path)] = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read report {path}: {exc}") from exc
    doc = {"reports": merged, "pass": all(_passes(d) for d in merged.values())}
    _write(Path(args.out), "report.json", _dumps(doc))
    return EXIT_OK if doc["pass"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# Entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", help="output directory (default from config)")
    common.add_argument("--grid", type=int, help="override the grid size n")

    parser = argparse.ArgumentParser(prog="pxlaplace", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="field regularity checks")
    p_norm = sub.add_parser("norm", parents=[common], help="norms of a CSV grid function")
    p_norm.add_argument("csv")
    p_solve = sub.add_parser("solve", parents=[common], help="find a critical point")
    p_solve.add_argument("mode", choices=["min", "mp"])
    p_ver = sub.add_parser("verify", parents=[common], help="run property suites")
    p_ver.add_argument("suite", choices=sorted(SUITES) + ["all"])
    p_rep = sub.add_parser("report", parents=[common], help="merge JSON reports")
    p_rep.add_argument("reports", nargs="*")
    p_rep.add_argument("--show-config", action="store_true")
    return parser


COMMANDS = {"analyze": cmd_analyze, "norm": cmd_norm, "solve": cmd_solve,
            "verify": cmd_verify, "report": cmd_report}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.grid is not None:
            cfg = replace(cfg, n=args.grid)
        if args.seed is not None:
            cfg = replace(cfg, verify=replace(cfg.verify, seed=args.seed),
                          solver=replace(cfg.solver, seed=args.seed))
        args.out = args.out or cfg.out
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, FieldSpecError, MeshError, ExponentClassError,
            WeightClassError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
