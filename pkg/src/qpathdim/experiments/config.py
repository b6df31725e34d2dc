"""Experiment configuration: a YAML key/value tree, validated per mode.

Units are natural (whatever ``constants.hbar`` and ``constants.mass`` say);
no unit strings are parsed.
"""

from __future__ import annotations

import copy
import json
import math
from pathlib import Path

import yaml

from ..selective import ConfigurationError

__all__ = ["MODES", "ConfigurationError", "apply_override", "load_config", "validate_config"]

MODES = ("nonselective-dimension", "selective-dimension", "feedback-relaxation", "oracle-validation")

DEFAULTS = {
    "constants": {"hbar": 1.0, "mass": 1.0},
    "initial": {"a": 0.0, "b_mom": 0.0, "delta": 1.0, "eps": 0.0},
    "ensemble": {"n_traj": 1000, "master_seed": 0, "burn_in": 200},
    "fit": {"threshold": 1e-2},
    "output": {"directory": "results", "formats": ["csv", "json"]},
    "workers": None,
}


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(path) -> dict:
    """Read a YAML config, or the config echoed in an emitted result file."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".csv":
        for line in text.splitlines():
            if line.startswith("# config: "):
                return json.loads(line[len("# config: "):])
        raise ConfigurationError(f"{path}: no '# config:' metadata line")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: not valid YAML/JSON: {exc}") from None
    if isinstance(data, dict) and "metadata" in data and "rows" in data:
        return data["metadata"]["config"]
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a mapping")
    return data


def apply_override(cfg: dict, item: str) -> dict:
    """Apply ``dotted.key=value``; the value is parsed as YAML."""
    if "=" not in item:
        raise ConfigurationError(f"override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    value = yaml.safe_load(raw)
    out = copy.deepcopy(cfg)
    node = out
    parts = key.strip().split(".")
    for p in parts[:-1]:
        nxt = node.setdefault(p, {})
        if not isinstance(nxt, dict):
            raise ConfigurationError(f"override {key!r}: {p!r} is not a mapping")
        node = nxt
    node[parts[-1]] = value
    return out


def _num(value, name: str, positive: bool = True, allow_inf: bool = False) -> float:
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", ".inf"):
        value = math.inf
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be a number, got {value!r}") from None
    if math.isnan(x) or (math.isinf(x) and not allow_inf):
        raise ConfigurationError(f"{name} must be finite, got {value!r}")
    if positive and not x > 0:
        raise ConfigurationError(f"{name} must be positive, got {value!r}")
    return x


def _need(cfg: dict, dotted: str):
    node = cfg
    for p in dotted.split("."):
        if not isinstance(node, dict) or node.get(p) is None:
            raise ConfigurationError(f"mode {cfg['mode']!r} requires '{dotted}'")
        node = node[p]
    return node


def _dx_list(sched: dict) -> list[float]:
    if sched.get("dx") is not None:
        dx = [_num(v, "schedule.dx[]") for v in sched["dx"]]
    elif sched.get("dx_range") is not None:
        r = sched["dx_range"]
        lo, hi = _num(r.get("min"), "schedule.dx_range.min"), _num(r.get("max"), "schedule.dx_range.max")
        n = int(r.get("n", 13))
        if n < 3 or not hi > lo:
            raise ConfigurationError("schedule.dx_range needs max > min and n >= 3")
        dx = [hi * (lo / hi) ** (i / (n - 1)) for i in range(n)]
    else:
        raise ConfigurationError("schedule needs 'dx' (list) or 'dx_range' {max, min, n}")
    dx = sorted(dx, reverse=True)
    if len(dx) < 3 or len(set(dx)) != len(dx):
        raise ConfigurationError("schedule needs at least 3 distinct dx values")
    return dx


def _check_feedback_match(D: float, t_c: float, c: dict, override: bool) -> None:
    want = 2.0 * c["hbar"] * t_c**2 / c["mass"]
    if not override and abs(D - want) > 1e-9 * want:
        raise ConfigurationError(
            f"feedback t_c={t_c} requires D = 2 hbar t_c^2/m = {want!r} but D = {D!r}; "
            "fix measurement or set feedback.override: true"
        )


def validate_config(raw: dict) -> dict:
    """Fill defaults, check mode-specific fields, and return a normalized config."""
    if not isinstance(raw, dict):
        raise ConfigurationError("config must be a mapping")
    mode = raw.get("mode")
    if mode not in MODES:
        raise ConfigurationError(f"mode must be one of {', '.join(MODES)}; got {mode!r}")
    cfg = _merge(DEFAULTS, raw)
    c = cfg["constants"]
    c["hbar"] = _num(c["hbar"], "constants.hbar")
    c["mass"] = _num(c["mass"], "constants.mass")
    ens = cfg["ensemble"]
    ens["master_seed"] = int(ens["master_seed"])
    ens["n_traj"] = int(ens["n_traj"])
    if ens["n_traj"] < 1:
        raise ConfigurationError("ensemble.n_traj must be >= 1")
    if cfg["workers"] is not None and int(cfg["workers"]) < 1:
        raise ConfigurationError("workers must be >= 1")
    cfg["fit"]["threshold"] = _num(cfg["fit"]["threshold"], "fit.threshold")
    for k in ("a", "b_mom", "eps"):
        cfg["initial"][k] = _num(cfg["initial"][k], f"initial.{k}", positive=False)
    cfg["initial"]["delta"] = _num(cfg["initial"]["delta"], "initial.delta")
    fmts = cfg["output"]["formats"]
    if isinstance(fmts, str):
        fmts = [fmts]
    if not set(fmts) <= {"csv", "json"} or not fmts:
        raise ConfigurationError(f"output.formats must be a subset of [csv, json], got {fmts!r}")
    cfg["output"]["formats"] = list(fmts)

    meas = cfg.setdefault("measurement", {}) or {}
    cfg["measurement"] = meas
    fb = cfg.get("feedback") or {}

    if mode == "nonselective-dimension":
        sched = _need(cfg, "schedule")
        sched["b_scale"] = _num(_need(cfg, "schedule.b_scale"), "schedule.b_scale")
        dx = _dx_list(sched)
        t_max = 2.0 * c["mass"] * sched["b_scale"] * dx[0] ** 2 / c["hbar"]
        if sched.get("T") is not None:
            sched["T"] = _num(sched["T"], "schedule.T")
            if t_max > sched["T"] * (1 + 1e-12):
                raise ConfigurationError(f"schedule.T={sched['T']} is shorter than t(dx_max)={t_max}")
        Ds = _need(cfg, "measurement.D")
        Ds = Ds if isinstance(Ds, list) else [Ds]
        meas["D"] = [_num(v, "measurement.D", allow_inf=True) for v in Ds]
        cfg["initial"]["p_av"] = _num(cfg["initial"].get("p_av", 0.0), "initial.p_av", positive=False)

    elif mode == "selective-dimension":
        sched = _need(cfg, "schedule")
        sched["b_scale"] = _num(_need(cfg, "schedule.b_scale"), "schedule.b_scale")
        _dx_list(sched)
        sched["steps_at_max_dx"] = int(sched.get("steps_at_max_dx", 50))
        if sched["steps_at_max_dx"] < 2:
            raise ConfigurationError("schedule.steps_at_max_dx must be >= 2")
        meas["meter_resolution"] = _num(meas.get("meter_resolution", 1.0), "measurement.meter_resolution")
        fb = {"enabled": True, **fb}
        cfg["feedback"] = fb
        ens["burn_in"] = int(ens["burn_in"])

    elif mode == "feedback-relaxation":
        tau = _num(_need(cfg, "measurement.tau"), "measurement.tau")
        t_c = _num(_need(cfg, "feedback.t_c"), "feedback.t_c")
        sigma, D = meas.get("sigma"), meas.get("D")
        if sigma is not None:
            sigma = _num(sigma, "measurement.sigma")
        if D is not None:
            D = _num(D, "measurement.D")
        if sigma is not None and D is not None and abs(sigma * tau - D) > 1e-9 * D:
            raise ConfigurationError(f"inconsistent measurement: sigma*tau = {sigma * tau!r} but D = {D!r}")
        if D is None:
            D = sigma * tau if sigma is not None else 2.0 * c["hbar"] * t_c**2 / c["mass"]
        _check_feedback_match(D, t_c, c, bool(fb.get("override", False)))
        meas.update(tau=tau, D=D, sigma=D / tau)
        fb["t_c"] = t_c
        cfg["feedback"] = fb
        cfg["duration"] = _num(_need(cfg, "duration"), "duration")
        cfg["every"] = int(cfg.get("every", 1))
        if cfg["every"] < 1:
            raise ConfigurationError("every must be >= 1")

    elif mode == "oracle-validation":
        cfg["n_scenarios"] = int(cfg.get("n_scenarios", 100))
        cfg["grid_points"] = int(cfg.get("grid_points", 4096))
        cfg["tolerance"] = _num(cfg.get("tolerance", 1e-6), "tolerance")
        if cfg["n_scenarios"] < 1:
            raise ConfigurationError("n_scenarios must be >= 1")
    return cfg
