"""Fitted path dimension of the analytic nonselective path length, for several D."""

from _common import run_config

table = run_config("dimension_vs_D.yaml", __doc__)
print(f"{'D':>10} {'d':>10} {'residual':>10}  well-defined")
for D, d, res, _, ok in table.rows:
    print(f"{D:>10.3g} {d:>10.5f} {res:>10.2e}  {bool(ok)}")
