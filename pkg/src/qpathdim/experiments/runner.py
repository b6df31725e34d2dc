"""Mode dispatch: turn a validated config into a :class:`ResultTable`."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..dimension import ResolutionSchedule, analytic_points, fit_dimension, path_length_sampled
from ..gaussian_state import Constants, GaussianState, MeterConfig
from ..nonselective import ContinuousLimit, interval_for
from ..selective import FeedbackConfig, ensemble_summary, feedback_mean_reference, simulate_ensemble
from ..validation import check_scenario, random_scenarios
from .config import validate_config

__all__ = ["ResultTable", "run_experiment"]


@dataclass
class ResultTable:
    """Rows keyed by the swept parameter, plus plot-ready series.

    ``metadata["config"]`` alone is enough to regenerate ``columns``, ``rows``
    and ``series``; ``metadata["run"]`` holds what legitimately varies between
    runs (start time, wall time, partial flag).
    """

    mode: str
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    series: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def partial(self) -> bool:
        return bool(self.metadata.get("run", {}).get("partial", False))


def _constants(cfg) -> Constants:
    return Constants(cfg["constants"]["hbar"], cfg["constants"]["mass"])


def _dx_values(sched) -> list[float]:
    if sched.get("dx") is not None:
        return sorted((float(v) for v in sched["dx"]), reverse=True)
    r = sched["dx_range"]
    hi, lo, n = float(r["max"]), float(r["min"]), int(r.get("n", 13))
    return list(np.geomspace(hi, lo, n))


def _fit_summary(fit) -> dict:
    return {
        "d": fit.d,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "residual": fit.residual,
        "well_defined": fit.well_defined,
        "n_points": fit.n_points,
        "local_d": [list(p) for p in fit.local_d],
    }


def _nonselective_dimension(cfg, table: ResultTable) -> None:
    c = _constants(cfg)
    sched = cfg["schedule"]
    schedule = ResolutionSchedule(tuple(_dx_values(sched)), sched["b_scale"], sched.get("T"), c)
    init = cfg["initial"]
    thr = cfg["fit"]["threshold"]
    for D in cfg["measurement"]["D"]:
        limit = ContinuousLimit(D)
        pts = analytic_points(schedule, limit, eps0=init["eps"], p_av=init["p_av"])
        fit = fit_dimension(pts, threshold=thr)
        table.rows.append((D, fit.d, fit.residual, fit.n_points, int(fit.well_defined)))
        label = f"D={limit}"
        table.series.append({"name": f"path_length {label}", "x": [p[0] for p in pts],
                             "y": [p[1] for p in pts], "yerr": [0.0] * len(pts)})
        table.series.append({"name": f"local_d {label}", "x": [p[0] for p in fit.local_d],
                             "y": [p[1] for p in fit.local_d], "yerr": [0.0] * len(fit.local_d)})
        table.summary[label] = _fit_summary(fit)


def _selective_point(args):
    dx, cfg, index = args
    c = _constants(cfg)
    sched, meas, ens = cfg["schedule"], cfg["measurement"], cfg["ensemble"]
    dx_max = _dx_values(sched)[0]
    tau = interval_for(dx, sched["b_scale"], c)
    T = sched["steps_at_max_dx"] * interval_for(dx_max, sched["b_scale"], c)
    n_inc = int(round(T / tau))
    sigma = 2.0 * (meas["meter_resolution"] * dx) ** 2
    meter = MeterConfig(sigma, tau)
    fb = FeedbackConfig.matched(meter.diffusion, c) if cfg["feedback"].get("enabled", True) else None
    state0 = GaussianState.from_width(dx)
    # n_inc increments need n_inc + 1 recorded readings
    records = simulate_ensemble(state0, meter, n_inc + 1, ens["n_traj"], fb,
                                master_seed=ens["master_seed"] + index, c=c, burn_in=ens["burn_in"])
    lengths = np.array([path_length_sampled(r) for r in records])
    se = float(lengths.std(ddof=1) / math.sqrt(lengths.size)) if lengths.size > 1 else math.nan
    return (dx, tau, sigma, None if fb is None else fb.t_c, n_inc, float(lengths.mean()), se)


def _selective_dimension(cfg, table: ResultTable, workers: int) -> None:
    dxs = _dx_values(cfg["schedule"])
    jobs = [(dx, cfg, i) for i, dx in enumerate(dxs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map preserves input order, so aggregation ignores completion order
            for row in pool.map(_selective_point, jobs):
                table.rows.append(row)
    else:
        for job in jobs:
            table.rows.append(_selective_point(job))
    pts = [(r[0], r[5]) for r in table.rows]
    table.series.append({"name": "path_length (outcome increments)", "x": [r[0] for r in table.rows],
                         "y": [r[5] for r in table.rows], "yerr": [r[6] for r in table.rows]})
    if len(pts) >= 3:
        fit = fit_dimension(pts, threshold=cfg["fit"]["threshold"])
        table.summary["fit"] = _fit_summary(fit)
        table.summary["path_length_definition"] = "sum of |outcome[r+1] - outcome[r]| over recorded meter readings"


def _feedback_relaxation(cfg, table: ResultTable) -> None:
    c = _constants(cfg)
    init, meas, ens = cfg["initial"], cfg["measurement"], cfg["ensemble"]
    state0 = GaussianState(init["a"], init["b_mom"], init["delta"], init["eps"])
    meter = MeterConfig(meas["sigma"], meas["tau"])
    fb = FeedbackConfig(cfg["feedback"]["t_c"])
    n_steps = int(round(cfg["duration"] / meter.tau))
    s = ensemble_summary(state0, meter, n_steps, ens["n_traj"], fb, ens["master_seed"], c, every=cfg["every"])
    ref_a, ref_b = feedback_mean_reference(state0.a, state0.b_mom, fb.t_c, s.times, c)
    for k in range(len(s.times)):
        table.rows.append((s.times[k], s.mean_a[k], s.stderr_a[k], float(ref_a[k]),
                           s.mean_b[k], s.stderr_b[k], float(ref_b[k])))
    t = list(map(float, s.times))
    table.series.append({"name": "mean_a", "x": t, "y": list(map(float, s.mean_a)), "yerr": list(map(float, s.stderr_a))})
    table.series.append({"name": "mean_b", "x": t, "y": list(map(float, s.mean_b)), "yerr": list(map(float, s.stderr_b))})
    table.series.append({"name": "reference_a", "x": t, "y": list(map(float, ref_a)), "yerr": [0.0] * len(t)})
    za = np.abs(s.mean_a - ref_a) / s.stderr_a
    zb = np.abs(s.mean_b - ref_b) / s.stderr_b
    table.summary.update(max_z_a=float(za.max()), max_z_b=float(zb.max()),
                         final_delta=float(s.delta[-1]), final_eps=float(s.eps[-1]))


def _oracle_validation(cfg, table: ResultTable) -> None:
    c = _constants(cfg)
    tol = cfg["tolerance"]
    worst: dict[str, float] = {}
    for i, sc in enumerate(random_scenarios(cfg["n_scenarios"], cfg["ensemble"]["master_seed"])):
        errs = check_scenario(sc, c, cfg["grid_points"])
        for op, e in errs.items():
            table.rows.append((i, op, e, int(e <= tol)))
            worst[op] = max(worst.get(op, 0.0), e)
    table.summary.update(worst=worst, tolerance=tol, passed=all(v <= tol for v in worst.values()))


_COLUMNS = {
    "nonselective-dimension": ["D", "d_fit", "residual", "n_points", "well_defined"],
    "selective-dimension": ["dx", "tau", "sigma", "t_c", "n_increments", "l_mean", "l_stderr"],
    "feedback-relaxation": ["t", "mean_a", "stderr_a", "reference_a", "mean_b", "stderr_b", "reference_b"],
    "oracle-validation": ["scenario", "operation", "rel_error", "passed"],
}


def run_experiment(config: dict, workers: int | None = None) -> ResultTable:
    """Run one experiment.

    A ``KeyboardInterrupt`` mid-run returns whatever rows exist, marked
    partial, instead of discarding them.
    """
    cfg = validate_config(config)
    mode = cfg["mode"]
    workers = workers or cfg.get("workers") or os.cpu_count() or 1
    table = ResultTable(mode=mode, columns=list(_COLUMNS[mode]))
    started = time.time()
    partial = False
    try:
        if mode == "nonselective-dimension":
            _nonselective_dimension(cfg, table)
        elif mode == "selective-dimension":
            _selective_dimension(cfg, table, int(workers))
        elif mode == "feedback-relaxation":
            _feedback_relaxation(cfg, table)
        else:
            _oracle_validation(cfg, table)
    except KeyboardInterrupt:
        partial = True
    table.metadata = {
        "config": cfg,
        "seed": cfg["ensemble"]["master_seed"],
        "code_version": __version__,
        "run": {
            "started": time.strftime("%Y-%m-%dT%H:%M:%S", time.localtime(started)),
            "wall_time_s": round(time.time() - started, 3),
            "partial": partial,
        },
    }
    return table
