"""Sampled (outcome-increment) path dimension in the feedback-stabilised regime."""

from _common import run_config

table = run_config("selective_dimension.yaml", __doc__)
for dx, tau, sigma, t_c, n, l, se in table.rows:
    print(f"dx={dx:<8.4g} tau={tau:<10.3g} increments={n:<5d} <l>={l:.4g} +- {se:.2g}")
fit = table.summary["fit"]
print(f"d = {fit['d']:.4f}, residual {fit['residual']:.2e}")
