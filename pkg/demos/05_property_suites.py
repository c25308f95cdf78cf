"""Running the inequality suites and reading their reports.

Each suite samples reproducible random functions, checks one family of
inequalities and reports counts, estimated constants and the tightest case.
"""

from pxlaplace.verify import SUITES, FieldConfig, check_poincare, dump_reports, run_suite

reports = [run_suite(name, samples=40, seed=0) for name in SUITES]
for rep in reports:
    consts = ", ".join(f"{k}={v:.4g}" for k, v in rep.constants.items()
                       if isinstance(v, float))
    print(f"{rep.suite:<20} {'pass' if rep.passed else 'FAIL'}  cases={rep.cases:<4} {consts}")

print("\nPoincare constant of the unit interval as the grid is refined:")
for n in (65, 129, 257, 513):
    rep = check_poincare(20, seed=0, config=FieldConfig(n=n, p="2", q="2"))
    print(f"  n = {n:4d}: C_est = {rep.constants['C_est']:.6f}")

text = dump_reports(reports)
print(f"\nJSON report is {len(text)} bytes and identical on every run with seed 0")
