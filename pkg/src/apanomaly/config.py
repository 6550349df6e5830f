"""Flat key-value scenario configuration.

Files contain `key = value` lines ('#' starts a comment). Unknown keys are
hard errors so typos never silently fall back to defaults. Command-line
overrides take precedence over the file, which takes precedence over the
built-in defaults.
"""

from __future__ import annotations

import re
from dataclasses import replace

from .errors import ValidationError
from .session_sim import (AnomalySpec, FlowSpec, ScenarioSpec, SimParams,
                          TopologySpec, TrafficPlan, default_topology,
                          default_traffic, MOBILITY_CLASSES)

_SCALAR_KEYS = {
    "topology.ap_count": int,
    "topology.sta_count": int,
    "run.duration_s": float,
    "run.slot_s": float,
    "run.seed": int,
    "anomaly.kind": str,
    "anomaly.target_ap": int,
    "anomaly.window_start_s": float,
    "anomaly.window_end_s": float,
    "anomaly.halt_period_s": float,
    "anomaly.noise_dbm": float,
    "anomaly.burst_duration_s": float,
    "anomaly.sleep_duration_s": float,
    "anomaly.direction": str,
    "anomaly.node_count": int,
    "traffic.flows": int,
}

_SIM_PARAM_KEYS = {
    "sim.handover_leave_prob": float,
    "sim.handover_return_prob": float,
    "sim.blind_spot_prob": float,
    "sim.reconnect_mean_s": float,
    "sim.reassoc_prob": float,
    "sim.inroom_disconnect_prob": float,
    "sim.account_interval_min_s": float,
    "sim.account_interval_max_s": float,
    "sim.activity_on_to_off": float,
    "sim.activity_off_to_on": float,
    "sim.idle_rate_factor": float,
    "sim.migration_rate": float,
    "sim.migration_move_prob": float,
    "sim.migration_max_movers": int,
    "sim.downlink_capacity_Bps": float,
    "sim.uplink_saturated_keep": float,
    "sim.overload_churn_factor": float,
    "sim.burst_mean_bytes": float,
    "sim.burst_sd_bytes": float,
    "sim.burst_rate_per_s": float,
    "sim.noise_churn_slope": float,
}

_FLOW_FIELD_TYPES = {
    "direction": str,
    "targets": str,
    "mean_bytes": float,
    "sd_bytes": float,
    "rate_per_s": float,
}

_STATION_FIELD_TYPES = {"ap": int, "mobility": str}

_FLOW_RE = re.compile(r"^traffic\.flow\.(\d+)\.(\w+)$")
_STATION_RE = re.compile(r"^topology\.station\.(\d+)\.(\w+)$")


def parse_config_text(text: str) -> dict[str, str]:
    """Parse `key = value` lines into a flat string map."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ValidationError(f"config line {lineno}: empty key")
        if key in out:
            raise ValidationError(f"config line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def parse_overrides(pairs: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValidationError(f"override {pair!r}: expected key=value")
        key, value = pair.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _key_type(key: str):
    if key in _SCALAR_KEYS:
        return _SCALAR_KEYS[key]
    if key in _SIM_PARAM_KEYS:
        return _SIM_PARAM_KEYS[key]
    m = _FLOW_RE.match(key)
    if m and m.group(2) in _FLOW_FIELD_TYPES:
        return _FLOW_FIELD_TYPES[m.group(2)]
    m = _STATION_RE.match(key)
    if m and m.group(2) in _STATION_FIELD_TYPES:
        return _STATION_FIELD_TYPES[m.group(2)]
    return None


def _convert(key: str, value: str):
    typ = _key_type(key)
    if typ is None:
        raise ValidationError(f"config: unknown key {key!r}")
    if typ is str:
        return value
    try:
        return typ(value)
    except ValueError:
        raise ValidationError(f"config: key {key!r} expects {typ.__name__}, got {value!r}") from None


def build_scenario(config: dict[str, str] | None = None,
                   overrides: dict[str, str] | None = None,
                   seed: int | None = None) -> ScenarioSpec:
    """Materialize a ScenarioSpec from flat keys; unknown keys raise."""
    merged: dict[str, str] = {}
    merged.update(config or {})
    merged.update(overrides or {})
    values = {key: _convert(key, val) for key, val in merged.items()}

    ap_count = values.get("topology.ap_count", 2)
    sta_count = values.get("topology.sta_count", 16)
    topo = default_topology(ap_count=ap_count, sta_count=sta_count)
    assignment = dict(topo.initial_assignment)
    mobility = dict(topo.mobility)
    for key, val in values.items():
        m = _STATION_RE.match(key)
        if not m:
            continue
        sid, fieldname = int(m.group(1)), m.group(2)
        if sid >= sta_count:
            raise ValidationError(f"config: {key!r} references station {sid} >= sta_count")
        if fieldname == "ap":
            assignment[sid] = val
        else:
            if val not in MOBILITY_CLASSES:
                raise ValidationError(f"config: {key!r} must be one of {MOBILITY_CLASSES}")
            mobility[sid] = val
    topo = TopologySpec(ap_count=ap_count, sta_count=sta_count,
                        initial_assignment=assignment, mobility=mobility)

    if "traffic.flows" in values:
        n_flows = values["traffic.flows"]
        flows = []
        for i in range(n_flows):
            fields = {}
            for fieldname, typ in _FLOW_FIELD_TYPES.items():
                key = f"traffic.flow.{i}.{fieldname}"
                if key not in values:
                    raise ValidationError(f"config: missing {key!r} for declared flow {i}")
                fields[fieldname] = values[key]
            flows.append(FlowSpec(**fields))
        traffic = TrafficPlan(flows=tuple(flows))
    else:
        for key in values:
            if _FLOW_RE.match(key):
                raise ValidationError(
                    f"config: {key!r} requires traffic.flows to declare the flow count")
        traffic = default_traffic()

    anomaly = AnomalySpec(
        kind=values.get("anomaly.kind", "none"),
        target_ap=values.get("anomaly.target_ap", 1),
        window=(values.get("anomaly.window_start_s", 0.0),
                values.get("anomaly.window_end_s", 0.0)),
        halt_period_s=values.get("anomaly.halt_period_s", 15.0),
        noise_dbm=values.get("anomaly.noise_dbm", -110.0),
        burst_duration_s=values.get("anomaly.burst_duration_s", 30.0),
        sleep_duration_s=values.get("anomaly.sleep_duration_s", 30.0),
        direction=values.get("anomaly.direction", "arrival"),
        node_count=values.get("anomaly.node_count", 7))

    params = SimParams(**{key.split(".", 1)[1]: val for key, val in values.items()
                          if key in _SIM_PARAM_KEYS})

    spec = ScenarioSpec(
        topology=topo, traffic=traffic, anomaly=anomaly,
        run_duration_s=values.get("run.duration_s", 600.0),
        slot_length_s=values.get("run.slot_s", 15.0),
        seed=values.get("run.seed", 1),
        params=params)
    if seed is not None:
        spec = replace(spec, seed=seed)
    spec.validate()
    return spec


def scenario_to_config(spec: ScenarioSpec) -> dict[str, str]:
    """Flatten a ScenarioSpec back into the documented key set."""
    out: dict[str, str] = {
        "topology.ap_count": str(spec.topology.ap_count),
        "topology.sta_count": str(spec.topology.sta_count),
        "run.duration_s": f"{spec.run_duration_s:g}",
        "run.slot_s": f"{spec.slot_length_s:g}",
        "run.seed": str(spec.seed),
        "anomaly.kind": spec.anomaly.kind,
    }
    default_topo = default_topology(spec.topology.ap_count, spec.topology.sta_count)
    for sid in range(spec.topology.sta_count):
        if spec.topology.initial_assignment[sid] != default_topo.initial_assignment[sid]:
            out[f"topology.station.{sid}.ap"] = str(spec.topology.initial_assignment[sid])
        if spec.topology.mobility[sid] != default_topo.mobility[sid]:
            out[f"topology.station.{sid}.mobility"] = spec.topology.mobility[sid]
    if spec.anomaly.kind != "none":
        a = spec.anomaly
        out["anomaly.target_ap"] = str(a.target_ap)
        out["anomaly.window_start_s"] = f"{a.window[0]:g}"
        out["anomaly.window_end_s"] = f"{a.window[1]:g}"
        if a.kind == "ap_halt":
            out["anomaly.halt_period_s"] = f"{a.halt_period_s:g}"
        elif a.kind == "noise":
            out["anomaly.noise_dbm"] = f"{a.noise_dbm:g}"
        elif a.kind == "overload":
            out["anomaly.burst_duration_s"] = f"{a.burst_duration_s:g}"
            out["anomaly.sleep_duration_s"] = f"{a.sleep_duration_s:g}"
        elif a.kind == "flash_crowd":
            out["anomaly.direction"] = a.direction
            out["anomaly.node_count"] = str(a.node_count)
    out["traffic.flows"] = str(len(spec.traffic.flows))
    for i, flow in enumerate(spec.traffic.flows):
        out[f"traffic.flow.{i}.direction"] = flow.direction
        out[f"traffic.flow.{i}.targets"] = flow.targets
        out[f"traffic.flow.{i}.mean_bytes"] = f"{flow.mean_bytes:g}"
        out[f"traffic.flow.{i}.sd_bytes"] = f"{flow.sd_bytes:g}"
        out[f"traffic.flow.{i}.rate_per_s"] = f"{flow.rate_per_s:g}"
    defaults = SimParams()
    for key in _SIM_PARAM_KEYS:
        attr = key.split(".", 1)[1]
        value = getattr(spec.params, attr)
        if value != getattr(defaults, attr):
            out[key] = f"{value:g}"
    return out


def format_config(config: dict[str, str]) -> str:
    return "".join(f"{key} = {config[key]}\n" for key in sorted(config))
