"""Local dimension vs resolution for a packet with mean momentum: 1 when coarse, 2 when fine."""

from _common import run_config

table = run_config("momentum_transition.yaml", __doc__)
for label, fit in table.summary.items():
    print(label, f"global fit d={fit['d']:.3f} residual={fit['residual']:.2f} well-defined={fit['well_defined']}")
    for dx, d in fit["local_d"]:
        print(f"  dx={dx:<10.4g} local d={d:.4f}")
