"""Shared operation layer behind the command line tool and the HTTP service.

Both front ends funnel through execute() and serialize with dumps(), so a
given request produces the same JSON document bytes either way. Parameters
arrive as plain JSON-able dicts and are checked against a schema first;
domain errors surface as GridStabError subclasses with stable codes.
"""

from __future__ import annotations

import json
import math

import jsonschema
import numpy as np

from .control import colocated_config, droop_gains, pbc_gains, uniform_gains, APNP, Configuration, KINDS
from .errors import GridStabError, NoStabilizingGain, ParseError, SchemaError, UnboundedGain
from .feeder import Feeder, PhaseSet, build_sensitivity, feeder_from_dict, feeder_to_dict, load_feeder
from .ieee123 import build_ieee123
from .metrics import line_metrics, path_cumulative_metrics
from .placement import (
    SamplingSpec,
    branch_metrics_ranking,
    cpp,
    cross_apply_experiment,
)
from .simulate import SimScenario, run
from .stability import analytic_acrit, bisect_acrit, gain_sweep
from .twobus import FAMILIES, family_builder, two_bus_feeder


def _two_bus_default():
    feeder, _ = two_bus_feeder("pbc_1ph", x=0.2)
    return feeder


BUILTIN_FEEDERS = {"ieee123": build_ieee123, "two_bus": _two_bus_default}


def dumps(doc):
    """Canonical JSON serialization shared by every front end."""
    return json.dumps(_clean(doc), sort_keys=True, separators=(",", ":"), allow_nan=False)


def _clean(obj):
    """Make a document JSON-safe: numpy scalars to python, non-finite to None."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


# ---------------------------------------------------------------------------
# shared parameter parsing

_FEEDER_SPEC = {"anyOf": [{"type": "string"}, {"type": "object"}]}
_CONFIG_SPEC = {
    "type": "array",
    "items": {
        "anyOf": [
            {"type": "string"},
            {
                "type": "object",
                "required": ["actuator"],
                "properties": {
                    "actuator": {"type": "string"},
                    "performance": {"type": "string"},
                    "phases": {"type": "string"},
                },
                "additionalProperties": False,
            },
        ]
    },
}
_SAMPLING_SPEC = {
    "type": "object",
    "required": ["seed"],
    "properties": {
        "num_samples": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "gain_range": {
            "type": "array",
            "minItems": 2,
            "maxItems": 2,
            "items": {"type": "number", "exclusiveMinimum": 0},
        },
        "pbc_f22_tie": {"anyOf": [{"type": "number"}, {"type": "null"}]},
    },
    "additionalProperties": False,
}
_GAINS_SPEC = {
    "type": "object",
    "properties": {
        "scale": {"type": "number"},
        "f11": {"type": "array"},
        "f21": {"type": "array"},
        "f22": {"type": "array"},
    },
    "additionalProperties": False,
}


def resolve_feeder(spec, default_feeder=None):
    if spec is None:
        if default_feeder is None:
            raise SchemaError("no feeder given and no default configured")
        return default_feeder
    if isinstance(spec, Feeder):
        return spec
    if isinstance(spec, dict):
        return feeder_from_dict(spec)
    if spec in BUILTIN_FEEDERS:
        return BUILTIN_FEEDERS[spec]()
    return load_feeder(spec)


def parse_config(obj, feeder):
    if not obj:
        return Configuration([])
    if all(isinstance(e, str) for e in obj):
        return colocated_config(list(obj), feeder)
    apnps = []
    for e in obj:
        if isinstance(e, str):
            e = {"actuator": e}
        act = e["actuator"]
        perf = e.get("performance", act)
        if act not in feeder.nodes or perf not in feeder.nodes:
            raise ParseError("configuration names unknown node")
        phases = (
            PhaseSet.from_string(e["phases"]) if "phases" in e else feeder.nodes[act]
        )
        apnps.append(APNP(act, perf, phases))
    return Configuration(apnps).validate(feeder)


def parse_sampling(obj):
    obj = dict(obj or {})
    kwargs = {
        "num_samples": int(obj.get("num_samples", 100)),
        "seed": int(obj["seed"]) if "seed" in obj else 0,
    }
    if "gain_range" in obj:
        kwargs["gain_range"] = tuple(float(v) for v in obj["gain_range"])
    if "pbc_f22_tie" in obj:
        tie = obj["pbc_f22_tie"]
        kwargs["pbc_f22_tie"] = None if tie is None else float(tie)
    return SamplingSpec(**kwargs)


def parse_gains(obj, sens, cfg, kind):
    obj = obj or {}
    if "scale" in obj:
        return uniform_gains(sens, cfg, kind, float(obj["scale"]))
    m = len(cfg.apnps)

    def table(key, required):
        if key not in obj:
            if required:
                raise SchemaError("gains require %r (or a scale)" % key)
            return None
        t = np.asarray(obj[key], dtype=float)
        if t.shape != (m, 3):
            raise SchemaError("%s must be a %d x 3 table" % (key, m))
        return t

    f11 = table("f11", True)
    if kind == "droop":
        return droop_gains(sens, cfg, f11, table("f21", True))
    f22 = table("f22", False)
    if f22 is None:
        f22 = 2.0 * f11
    return pbc_gains(sens, cfg, f11, f22)


def _family_params(params):
    allowed = {"x", "d", "l1", "c_x", "l2"}
    out = {k: float(v) for k, v in (params or {}).items()}
    bad = set(out) - allowed
    if bad:
        raise SchemaError("unknown family parameters: %s" % sorted(bad))
    return out


# ---------------------------------------------------------------------------
# operations

def op_feeder_info(params, default_feeder=None):
    feeder = resolve_feeder(params.get("feeder"), default_feeder)
    parent = {feeder.substation: None}
    depth = {feeder.substation: 0}
    for nid in feeder.node_ids():
        parent[nid] = feeder.parent[nid]
        depth[nid] = feeder.depth(nid)
    order = [feeder.substation] + list(feeder.node_ids())
    return _clean(
        {
            "feeder": feeder_to_dict(feeder),
            "layout": {"parent": parent, "depth": depth, "order": order},
            "summary": {
                "substation": feeder.substation,
                "n_nodes": len(feeder.nodes),
                "n_lines": len(feeder.lines),
                "base_kv": feeder.base_kv,
                "base_mva": feeder.base_mva,
            },
        }
    )


METRIC_COLUMNS = [
    "scope", "id", "phases",
    "d_a", "d_b", "d_c",
    "cx_a", "cx_b", "cx_c",
    "cr_a", "cr_b", "cr_c",
    "l1_a", "l1_b", "l1_c",
    "l2", "d_mean", "cx_mean",
]


def _present_mean(vec, phases):
    idx = list(phases.indices())
    vals = np.asarray(vec, dtype=float)[idx]
    vals = vals[np.isfinite(vals)]
    return float(np.mean(vals)) if vals.size else None


def op_metrics(params, default_feeder=None):
    feeder = resolve_feeder(params.get("feeder"), default_feeder)
    rows = []
    for ln in feeder.lines:
        lm = line_metrics(ln)
        ph = ln.imp.phases
        rows.append(
            ["line", "%s->%s" % (ln.from_id, ln.to_id), ph.to_string()]
            + list(lm.d) + list(lm.c_x) + list(lm.c_r) + list(lm.l1)
            + [lm.l2, _present_mean(lm.d, ph), _present_mean(lm.c_x, ph)]
        )
    for rec in path_cumulative_metrics(feeder):
        rows.append(
            ["path", rec["node"], rec["phases"]]
            + list(rec["d"]) + list(rec["c_x"]) + list(rec["c_r"]) + list(rec["l1"])
            + [rec["l2"], rec["d_mean"], rec["c_x_mean"]]
        )
    return _clean({"columns": METRIC_COLUMNS, "rows": rows})


def op_acrit(params, default_feeder=None):
    family = params["family"]
    if family not in FAMILIES:
        raise SchemaError("unknown family %r" % family)
    fparams = _family_params(params.get("params"))
    builder = family_builder(family, **fparams)
    doc = {"family": family, "params": fparams, "analytic": None}
    try:
        doc["analytic"] = analytic_acrit(family, **fparams).a_crit
    except ValueError:
        pass
    crit = bisect_acrit(builder)
    doc["bisection"] = {
        "a_crit": crit.a_crit,
        "bracket": list(crit.bracket),
        "iterations": crit.iterations,
    }
    doc["a_crit"] = doc["analytic"] if doc["analytic"] is not None else crit.a_crit
    doc["method"] = "analytic+bisection" if doc["analytic"] is not None else "bisection"
    return _clean(doc)


def _grid_values(spec):
    if isinstance(spec, list):
        return [float(v) for v in spec]
    start, stop = float(spec["start"]), float(spec["stop"])
    num = int(spec.get("num", 25))
    if spec.get("spacing", "log") == "log":
        if start <= 0 or stop <= 0:
            raise SchemaError("log spacing needs positive endpoints")
        return list(np.geomspace(start, stop, num))
    return list(np.linspace(start, stop, num))


def op_sweep(params, default_feeder=None):
    family = params["family"]
    if family not in FAMILIES:
        raise SchemaError("unknown family %r" % family)
    fparams = _family_params(params.get("params"))
    builder = family_builder(family, **fparams)
    values = _grid_values(params["gains"])
    rows = [[a, rho, stable] for a, rho, stable in gain_sweep(builder, values)]
    a_crit = None
    try:
        a_crit = bisect_acrit(builder).a_crit
    except (NoStabilizingGain, UnboundedGain):
        pass
    return _clean(
        {
            "family": family,
            "params": fparams,
            "columns": ["a", "rho", "stable"],
            "rows": rows,
            "a_crit": a_crit,
        }
    )


TRAJECTORY_COLUMNS = ["step", "time_s", "node", "phase", "vmag", "angle_deg", "p_inv", "q_inv"]


def op_simulate(params, default_feeder=None):
    feeder = resolve_feeder(params.get("feeder"), default_feeder)
    cfg = parse_config(params["config"], feeder)
    kind = params["kind"]
    if kind not in KINDS:
        raise SchemaError("kind must be one of %s" % (KINDS,))
    sens = build_sensitivity(feeder)
    gains = parse_gains(params.get("gains"), sens, cfg, kind)
    loads = {str(k): v for k, v in (params.get("loads") or {}).items()}
    scn = SimScenario(
        feeder=feeder,
        config=cfg,
        kind=kind,
        gains=gains,
        loads=loads,
        v_ref=float(params.get("v_ref", 1.0)),
        delta_ref_deg=float(params.get("delta_ref_deg", 0.0)),
        v_init=None if params.get("v_init") is None else float(params["v_init"]),
        delta_init_deg=(
            None if params.get("delta_init_deg") is None else float(params["delta_init_deg"])
        ),
        horizon=int(params.get("horizon", 50)),
        solver=params.get("solver", "linear"),
        step_period_s=float(params.get("step_period_s", 1.0)),
        divergence_threshold=float(params.get("divergence_threshold", 0.5)),
    )
    traj = run(scn)
    rows = []
    steps = traj.vmag.shape[0]
    for k in range(steps):
        for j, nid in enumerate(traj.node_ids):
            for i in range(3):
                col = 3 * j + i
                if not traj.active[col]:
                    continue
                rows.append(
                    [
                        k,
                        traj.times[k],
                        nid,
                        "ABC"[i],
                        traj.vmag[k, col],
                        traj.angle_deg[k, col],
                        traj.p_inv[k, col],
                        traj.q_inv[k, col],
                    ]
                )
    return _clean(
        {
            "columns": TRAJECTORY_COLUMNS,
            "rows": rows,
            "kind": kind,
            "solver": scn.solver,
            "horizon": scn.horizon,
            "divergence_step": traj.divergence_step,
            "divergence_time_s": traj.divergence_time_s,
            "reason": traj.reason,
        }
    )


def _verdict_doc(v):
    return {
        "node": v.node,
        "color": v.color,
        "good_fraction": v.good_fraction,
        "best_rho": v.best_rho,
        "best_gains": v.best_gains,
        "error": v.error,
    }


def _sampling_doc(spec):
    return {
        "num_samples": spec.num_samples,
        "seed": spec.seed,
        "gain_range": list(spec.gain_range),
        "distribution": spec.distribution,
        "pbc_f22_tie": spec.pbc_f22_tie,
    }


def op_heatmap(params, default_feeder=None):
    feeder = resolve_feeder(params.get("feeder"), default_feeder)
    kind = params["kind"]
    if kind not in KINDS:
        raise SchemaError("kind must be one of %s" % (KINDS,))
    base_cfg = parse_config(params.get("config") or [], feeder)
    spec = parse_sampling(params.get("sampling"))
    result = cpp(feeder, base_cfg, kind, spec)
    return _clean(
        {
            "kind": result.kind,
            "config": list(result.base_nodes),
            "sampling": _sampling_doc(result.spec),
            "counts": result.counts,
            "verdicts": [_verdict_doc(v) for v in result.verdicts],
        }
    )


TABLE1_COLUMNS = [
    "kind", "ratio", "factor", "m", "trials",
    "support", "contradict", "inconclusive", "not_found", "status",
]


def _cell_row(cell):
    return [
        cell.kind, cell.ratio, cell.factor, cell.m, cell.trials,
        cell.support, cell.contradict, cell.inconclusive, cell.not_found, cell.status,
    ]


def op_experiment(params, default_feeder=None):
    which = params["which"]
    feeder = resolve_feeder(params.get("feeder"), default_feeder)
    if which == "table1":
        kind = params.get("kind", "pbc")
        if kind not in KINDS:
            raise SchemaError("kind must be one of %s" % (KINDS,))
        ms = params.get("m", [1])
        if isinstance(ms, int):
            ms = [ms]
        spec = parse_sampling(params.get("sampling") or {"seed": 0, "num_samples": 40})
        rows = []
        for m in ms:
            cell = cross_apply_experiment(
                feeder,
                kind,
                int(m),
                ratio=params.get("ratio", "rx"),
                factor=float(params.get("factor", 1.5)),
                trials=int(params.get("trials", 10)),
                spec=spec,
                budget=int(params.get("budget", 500)),
            )
            rows.append(_cell_row(cell))
        return _clean(
            {
                "experiment": "table1",
                "sampling": _sampling_doc(spec),
                "columns": TABLE1_COLUMNS,
                "rows": rows,
            }
        )
    if which == "branch_compare":
        kinds = params.get("kinds", list(KINDS))
        chi = params["chi"]
        spec = parse_sampling(params.get("sampling"))
        rows = []
        details = {}
        for kind in kinds:
            if kind not in KINDS:
                raise SchemaError("kind must be one of %s" % (KINDS,))
            details[kind] = {}
            for name in sorted(chi):
                base = parse_config(chi[name], feeder)
                res = cpp(feeder, base, kind, spec)
                c = res.counts
                rows.append(
                    [kind, name, " ".join(res.base_nodes),
                     c["blue"], c["yellow"], c["red"], c["error"]]
                )
                details[kind][name] = {
                    "config": list(res.base_nodes),
                    "counts": c,
                    "colors": {v.node: v.color for v in res.verdicts},
                }
        return _clean(
            {
                "experiment": "branch_compare",
                "sampling": _sampling_doc(spec),
                "columns": ["kind", "set", "config", "blue", "yellow", "red", "error"],
                "rows": rows,
                "details": details,
            }
        )
    if which == "ranking":
        ranking = branch_metrics_ranking(feeder)
        rows = []
        for label, key in (("rx", "d_mean"), ("phase", "c_x_mean")):
            for pos, rec in enumerate(ranking["by_" + label], start=1):
                br = rec["branch"]
                rows.append(
                    [label, pos, rec["node"], "%s->%s" % (br[0], br[1]) if br else "", rec[key]]
                )
        return _clean(
            {
                "experiment": "ranking",
                "columns": ["list", "rank", "node", "branch", "value"],
                "rows": rows,
            }
        )
    raise SchemaError("unknown experiment %r" % which)


# ---------------------------------------------------------------------------
# dispatch and validation

SCHEMAS = {
    "feeder_info": {
        "type": "object",
        "properties": {"feeder": _FEEDER_SPEC},
        "additionalProperties": False,
    },
    "metrics": {
        "type": "object",
        "properties": {"feeder": _FEEDER_SPEC},
        "additionalProperties": False,
    },
    "acrit": {
        "type": "object",
        "required": ["family"],
        "properties": {
            "family": {"type": "string"},
            "params": {"type": "object"},
        },
        "additionalProperties": False,
    },
    "sweep": {
        "type": "object",
        "required": ["family", "gains"],
        "properties": {
            "family": {"type": "string"},
            "params": {"type": "object"},
            "gains": {
                "anyOf": [
                    {"type": "array", "items": {"type": "number"}},
                    {
                        "type": "object",
                        "required": ["start", "stop"],
                        "properties": {
                            "start": {"type": "number"},
                            "stop": {"type": "number"},
                            "num": {"type": "integer", "minimum": 2},
                            "spacing": {"enum": ["log", "linear"]},
                        },
                        "additionalProperties": False,
                    },
                ]
            },
        },
        "additionalProperties": False,
    },
    "simulate": {
        "type": "object",
        "required": ["config", "kind"],
        "properties": {
            "feeder": _FEEDER_SPEC,
            "config": _CONFIG_SPEC,
            "kind": {"type": "string"},
            "gains": _GAINS_SPEC,
            "loads": {"type": "object"},
            "v_ref": {"type": "number"},
            "delta_ref_deg": {"type": "number"},
            "v_init": {"anyOf": [{"type": "number"}, {"type": "null"}]},
            "delta_init_deg": {"anyOf": [{"type": "number"}, {"type": "null"}]},
            "horizon": {"type": "integer", "minimum": 1},
            "solver": {"enum": ["linear", "exact_two_bus"]},
            "step_period_s": {"type": "number", "exclusiveMinimum": 0},
            "divergence_threshold": {"type": "number", "exclusiveMinimum": 0},
        },
        "additionalProperties": False,
    },
    "heatmap": {
        "type": "object",
        "required": ["kind"],
        "properties": {
            "feeder": _FEEDER_SPEC,
            "kind": {"type": "string"},
            "config": _CONFIG_SPEC,
            "sampling": _SAMPLING_SPEC,
            "background": {"type": "boolean"},
        },
        "additionalProperties": False,
    },
    "experiment": {
        "type": "object",
        "required": ["which"],
        "properties": {
            "which": {"enum": ["table1", "branch_compare", "ranking"]},
            "feeder": _FEEDER_SPEC,
            "kind": {"type": "string"},
            "kinds": {"type": "array", "items": {"type": "string"}},
            "m": {"anyOf": [{"type": "integer"}, {"type": "array", "items": {"type": "integer"}}]},
            "ratio": {"enum": ["rx", "phase"]},
            "factor": {"type": "number"},
            "trials": {"type": "integer", "minimum": 1},
            "budget": {"type": "integer", "minimum": 1},
            "chi": {"type": "object"},
            "sampling": _SAMPLING_SPEC,
        },
        "additionalProperties": False,
    },
}

HANDLERS = {
    "feeder_info": op_feeder_info,
    "metrics": op_metrics,
    "acrit": op_acrit,
    "sweep": op_sweep,
    "simulate": op_simulate,
    "heatmap": op_heatmap,
    "experiment": op_experiment,
}


def validate_params(op, params):
    if op not in SCHEMAS:
        raise SchemaError("unknown operation %r" % op)
    try:
        jsonschema.validate(params, SCHEMAS[op])
    except jsonschema.ValidationError as exc:
        raise SchemaError("invalid %s request: %s" % (op, exc.message))


def execute(op, params, default_feeder=None):
    """Validate params against the op schema, run it, return a JSON-able dict."""
    validate_params(op, params)
    params = dict(params)
    params.pop("background", None)
    return HANDLERS[op](params, default_feeder=default_feeder)
