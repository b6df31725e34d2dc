"""Closed-form Gaussian maps against the grid wavefunction, over random scenarios."""

from _common import run_config

table = run_config("oracle_validation.yaml", __doc__)
for op, err in sorted(table.summary["worst"].items()):
    print(f"{op:<20} worst relative error {err:.2e}")
print("passed" if table.summary["passed"] else "FAILED", "at tolerance", table.summary["tolerance"])
