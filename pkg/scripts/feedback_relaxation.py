"""Ensemble means under matched feedback against the damped-oscillator reference."""

from _common import run_config

table = run_config("feedback_relaxation.yaml", __doc__)
print(f"{'t':>6} {'<a>':>12} {'se':>9} {'ref':>12} {'z':>6}")
for t, ma, sa, ra, *_ in table.rows[::4]:
    print(f"{t:>6.2f} {ma:>12.4e} {sa:>9.2e} {ra:>12.4e} {abs(ma - ra) / sa:>6.2f}")
s = table.summary
print(f"max z: a {s['max_z_a']:.2f}, b {s['max_z_b']:.2f}; final delta {s['final_delta']:.4f}, eps {s['final_eps']:.4f}")
