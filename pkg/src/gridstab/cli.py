"""Command line front end.

Every subcommand funnels through ops.execute, the same layer the HTTP
service uses, so the two produce identical JSON documents. Exit codes:
0 success, 1 domain error, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import ops
from .errors import GridStabError, SchemaError

TABLE_OPS = {"metrics", "sweep", "simulate", "experiment"}


def _csv_text(doc):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(doc["columns"])
    for row in doc["rows"]:
        w.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def _emit(doc, args, as_json):
    if as_json:
        text = ops.dumps(doc)
        if args.out:
            with open(args.out, "wb") as fh:
                fh.write(text.encode())
        else:
            print(text)
    else:
        text = _csv_text(doc)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _parse_float_list(s):
    return [float(v) for v in s.split(",") if v.strip() != ""]


def _parse_str_list(s):
    return [v.strip() for v in s.split(",") if v.strip() != ""]


def _family_params(args):
    params = {}
    for key in ("x", "d", "l1", "c_x", "l2"):
        val = getattr(args, key.replace("c_x", "cx"), None)
        if val is not None:
            params[key] = val
    return params


def _sampling_params(args):
    out = {"seed": args.seed, "num_samples": args.samples}
    if args.gain_range:
        out["gain_range"] = _parse_float_list(args.gain_range)
    if args.tie is not None:
        out["pbc_f22_tie"] = None if args.tie.lower() == "none" else float(args.tie)
    return out


def _add_family_args(p):
    p.add_argument("--family", required=True, help="two-bus family name")
    p.add_argument("--x", type=float, help="reactance (single phase families)")
    p.add_argument("--d", type=float, help="R/X ratio")
    p.add_argument("--l1", type=float, help="impedance magnitude")
    p.add_argument("--cx", type=float, help="phase ratio")
    p.add_argument("--l2", type=float, help="largest singular value")


def _add_sampling_args(p, samples_default):
    p.add_argument("--samples", type=int, default=samples_default)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gain-range", dest="gain_range", help="lo,hi")
    p.add_argument("--tie", help="PBC watt gain tie factor, or 'none' to sample independently")


def build_parser():
    ap = argparse.ArgumentParser(prog="gridstab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", help="per-line and path-cumulative impedance metrics")
    p.add_argument("--feeder", required=True, help="feeder JSON path or builtin name")
    p.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    p.add_argument("--out", help="write output to this path")

    p = sub.add_parser("acrit", help="critical gain for a two-bus family")
    _add_family_args(p)
    p.add_argument("--out", help="write output to this path")

    p = sub.add_parser("sweep", help="spectral radius over a gain grid")
    _add_family_args(p)
    p.add_argument("--values", help="explicit comma separated gain values")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--num", type=int, default=25)
    p.add_argument("--spacing", choices=["log", "linear"], default="log")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", help="write output to this path")

    p = sub.add_parser("simulate", help="quasi-static closed loop simulation")
    p.add_argument("--feeder", help="feeder JSON path or builtin name")
    p.add_argument("--scenario", help="JSON file with simulate parameters")
    p.add_argument("--kind", choices=["droop", "pbc"])
    p.add_argument("--config", help="comma separated co-located controller nodes")
    p.add_argument("--scale", type=float, help="uniform gain scale")
    p.add_argument("--horizon", type=int)
    p.add_argument("--solver", choices=["linear", "exact_two_bus"])
    p.add_argument("--loads", help="JSON object: node -> [P, Q] consumption in pu")
    p.add_argument("--v-ref", dest="v_ref", type=float)
    p.add_argument("--delta-ref-deg", dest="delta_ref_deg", type=float)
    p.add_argument("--v-init", dest="v_init", type=float)
    p.add_argument("--delta-init-deg", dest="delta_init_deg", type=float)
    p.add_argument("--divergence-threshold", dest="divergence_threshold", type=float)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", help="write output to this path")

    p = sub.add_parser("heatmap", help="candidate placement heatmap")
    p.add_argument("--feeder", required=True)
    p.add_argument("--kind", required=True, choices=["droop", "pbc"])
    p.add_argument("--config", help="comma separated base controller nodes")
    _add_sampling_args(p, 100)
    p.add_argument("--out", help="write output to this path")

    p = sub.add_parser("experiment", help="cross application and placement studies")
    p.add_argument("which", choices=["table1", "branch-compare", "ranking"])
    p.add_argument("--feeder", required=True)
    p.add_argument("--kind", default="pbc", choices=["droop", "pbc"])
    p.add_argument("--kinds", help="comma separated kinds for branch-compare")
    p.add_argument("--m", default="1", help="controller count(s), comma separated")
    p.add_argument("--ratio", default="rx", choices=["rx", "phase"])
    p.add_argument("--factor", type=float, default=1.5)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--budget", type=int, default=500)
    p.add_argument("--chi1", help="comma separated nodes for the first base set")
    p.add_argument("--chi2", help="comma separated nodes for the second base set")
    _add_sampling_args(p, 40)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", help="write output to this path")

    p = sub.add_parser("serve", help="run the local HTTP service")
    p.add_argument("--feeder", default="ieee123", help="feeder served by default")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None, help="default: GRIDSTAB_PORT or 8321")

    return ap


def _params_for(args):
    cmd = args.command
    if cmd == "metrics":
        return "metrics", {"feeder": args.feeder}
    if cmd == "acrit":
        return "acrit", {"family": args.family, "params": _family_params(args)}
    if cmd == "sweep":
        if args.values:
            gains = _parse_float_list(args.values)
        else:
            if args.start is None or args.stop is None:
                raise SchemaError("sweep needs --values or --start/--stop")
            gains = {
                "start": args.start,
                "stop": args.stop,
                "num": args.num,
                "spacing": args.spacing,
            }
        return "sweep", {"family": args.family, "params": _family_params(args), "gains": gains}
    if cmd == "simulate":
        params = {}
        if args.scenario:
            with open(args.scenario) as fh:
                params = json.load(fh)
        if args.feeder:
            params["feeder"] = args.feeder
        if args.config:
            params["config"] = _parse_str_list(args.config)
        if args.kind:
            params["kind"] = args.kind
        if args.scale is not None:
            params["gains"] = {"scale": args.scale}
        if args.loads:
            params["loads"] = json.loads(args.loads)
        for key in (
            "horizon",
            "solver",
            "v_ref",
            "delta_ref_deg",
            "v_init",
            "delta_init_deg",
            "divergence_threshold",
        ):
            val = getattr(args, key)
            if val is not None:
                params[key] = val
        return "simulate", params
    if cmd == "heatmap":
        params = {
            "feeder": args.feeder,
            "kind": args.kind,
            "sampling": _sampling_params(args),
        }
        if args.config:
            params["config"] = _parse_str_list(args.config)
        return "heatmap", params
    if cmd == "experiment":
        which = args.which.replace("-", "_")
        params = {"which": which, "feeder": args.feeder, "sampling": _sampling_params(args)}
        if which == "table1":
            params.update(
                {
                    "kind": args.kind,
                    "m": [int(v) for v in _parse_str_list(args.m)],
                    "ratio": args.ratio,
                    "factor": args.factor,
                    "trials": args.trials,
                    "budget": args.budget,
                }
            )
        elif which == "branch_compare":
            if not (args.chi1 and args.chi2):
                raise SchemaError("branch-compare needs --chi1 and --chi2")
            params["chi"] = {"chi1": _parse_str_list(args.chi1), "chi2": _parse_str_list(args.chi2)}
            if args.kinds:
                params["kinds"] = _parse_str_list(args.kinds)
        else:
            params.pop("sampling")
        return "experiment", params
    raise SchemaError("unknown command %r" % cmd)


def _serve(args):
    import uvicorn

    from .service import create_app

    port = args.port
    if port is None:
        port = int(os.environ.get("GRIDSTAB_PORT", "8321"))
    app = create_app(args.feeder)
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "serve":
            return _serve(args)
        op, params = _params_for(args)
        doc = ops.execute(op, params)
    except SchemaError as exc:
        print("error[%s]: %s" % (exc.code, exc), file=sys.stderr)
        return 2
    except GridStabError as exc:
        print("error[%s]: %s" % (exc.code, exc), file=sys.stderr)
        return 1
    as_json = op not in TABLE_OPS or getattr(args, "json", False)
    _emit(doc, args, as_json)
    return 0


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
