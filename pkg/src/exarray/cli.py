"""Command-line interface: load spec files, run estimators and structure
tests, and emit replayable reports.

Seeds are mandatory everywhere; there is no wall-clock default.  Reports
embed the invoked configuration and seed, so any run can be replayed from its
report file.  Exit codes: 0 success, 2 validation failure, 3 inconsistent
verdict under ``--assert``.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import sys
from pathlib import Path

from . import definetti as dfn
from . import distill as dst
from . import measure as me
from . import montecarlo as mc
from . import serialization as ser
from .errors import ExarrayError
from .representation import realize_array, validate_spec

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INCONSISTENT = 3


class CliError(Exception):
    pass


def _load_json_file(path: str, kind: str):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise CliError(f"cannot read {kind} file {path}: {e}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise CliError(f"{path}:{e.lineno}:{e.colno}: malformed JSON in {kind} file ({e.msg})")


def _load_inline_or_file(arg: str, kind: str):
    arg = arg.strip()
    if arg[:1] in ("{", "[", '"'):
        try:
            return json.loads(arg)
        except json.JSONDecodeError as e:
            raise CliError(f"inline {kind}:{e.lineno}:{e.colno}: malformed JSON ({e.msg})")
    return _load_json_file(arg, kind)


def _load_rho(args):
    obj = _load_json_file(args.rho, "representation spec")
    rho = ser.rho_from_json(obj, path=args.rho)
    report = validate_spec(rho)
    if not report.valid:
        raise CliError(f"{args.rho}: invalid spec: " + "; ".join(report.findings))
    return rho

def _load_event(args, attr="event"):
    path = getattr(args, attr)
    obj = _load_json_file(path, "event file")
    return ser.event_from_json(obj, path=path)


def _load_map(arg: str, kind: str) -> dict[str, int]:
    obj = _load_inline_or_file(arg, kind)
    if not isinstance(obj, dict):
        raise CliError(f"{kind} must be a JSON object of vertex -> index")
    return {str(k): int(v) for k, v in obj.items()}


def _schedule(arg: str) -> list[int]:
    try:
        return [int(p) for p in str(arg).split(",") if p != ""]
    except ValueError:
        raise CliError(f"-M expects an integer or comma list, got {arg!r}")


def _emit(args, payload: dict, csv_rows: list[dict] | None = None) -> None:
    payload = {"schema": ser.SCHEMA_VERSION, **payload}
    if not args.no_timestamp:
        payload["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    if args.format == "json":
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        if not csv_rows:
            csv_rows = [_flatten(payload.get("result", payload))]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(csv_rows[0].keys()))
        writer.writeheader()
        writer.writerows(csv_rows)
        text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _flatten(obj, prefix: str = "") -> dict:
    out = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.update(_flatten(v, f"{prefix}{k}." if not prefix else f"{prefix}{k}."))
    elif isinstance(obj, (list, tuple)):
        out[prefix.rstrip(".")] = json.dumps(obj)
    else:
        out[prefix.rstrip(".")] = obj
    return out


def _config_echo(args) -> dict:
    # workers is an execution detail; results are independent of it by
    # contract, so it stays out of the replay config
    skip = {"func", "out", "format", "no_timestamp", "workers"}
    return {
        k: v for k, v in sorted(vars(args).items())
        if k not in skip and v is not None
    }


def _verdicts(result) -> list[str]:
    out = []
    if isinstance(result, dict):
        for k, v in result.items():
            if k == "verdict":
                out.append(v)
            else:
                out.extend(_verdicts(v))
    elif isinstance(result, (list, tuple)):
        for v in result:
            out.extend(_verdicts(v))
    return out


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_sample(args):
    rho = _load_rho(args)
    array = realize_array(rho, args.seed, args.index_bound[0])
    rows = [
        {**{f"i{t}": v for t, v in enumerate(edge, 1)}, "value": array[edge]}
        for edge in array.edges()
    ]
    return {"command": "sample", "config": _config_echo(args),
            "result": {"size": array.size, "arity": array.arity, "edges": rows}}, rows


def cmd_estimate(args):
    rho, event = _load_rho(args), _load_event(args)
    rep = mc.estimate_direct(rho, event, args.replicates, args.seed, workers=args.workers)
    return {"command": "estimate", "config": _config_echo(args), "result": rep.to_dict()}, None


def cmd_empirical(args):
    rho, event = _load_rho(args), _load_event(args)
    rep = mc.estimate_empirical(
        rho, event, args.index_bound[0], args.replicates, args.seed,
        reuse_array=args.reuse_array, workers=args.workers,
    )
    return {"command": "empirical", "config": _config_echo(args), "result": rep.to_dict()}, None


def cmd_converge(args):
    rho, event = _load_rho(args), _load_event(args)
    report = mc.convergence_harness(
        rho, event, args.index_bound, args.replicates, args.seed, workers=args.workers
    )
    return (
        {"command": "converge", "config": _config_echo(args), "result": report.to_dict()},
        report.to_rows(),
    )


def cmd_test_exch(args):
    rho, event = _load_rho(args), _load_event(args)
    f1 = _load_map(args.map1, "--map1")
    f2 = _load_map(args.map2, "--map2")
    rep = mc.exchangeability_test(
        rho, event, f1, f2, args.replicates, args.seed, workers=args.workers
    )
    return {"command": "test-exch", "config": _config_echo(args), "result": rep.to_dict()}, None


def cmd_test_dissoc(args):
    rho, event = _load_rho(args), _load_event(args)
    event2 = _load_event(args, "event2")
    f1 = _load_map(args.map1, "--map1")
    f2 = _load_map(args.map2, "--map2")
    rep = mc.dissociation_test(
        rho, event, event2, f1, f2, args.replicates, args.seed, workers=args.workers
    )
    return {"command": "test-dissoc", "config": _config_echo(args), "result": rep.to_dict()}, None


def cmd_second_moment(args):
    rho, event = _load_rho(args), _load_event(args)
    rep = mc.second_moment_diag(
        rho, event, args.index_bound[0], args.blocks, args.replicates, args.seed,
        draws_per_block=args.draws, workers=args.workers,
    )
    return {"command": "second-moment", "config": _config_echo(args), "result": rep.to_dict()}, None


def cmd_definetti(args):
    probs = [float(p) for p in args.probs.split(",")]
    weights = [float(w) for w in args.weights.split(",")]
    mixture = dfn.MixtureSpec(list(zip(probs, weights)))
    hist = dfn.frequency_limit_histogram(
        mixture.to_rho(), args.sequence_length, args.replicates, args.seed,
        bins=args.bins,
    )
    moments = {str(k): dfn.mixture_moment(mixture, k) for k in range(6)}
    result = {"histogram": hist.to_dict(), "moments": moments}
    return {"command": "definetti", "config": _config_echo(args), "result": result}, hist.to_rows()


def cmd_inner_approx(args):
    expr = ser.set_from_json(_load_inline_or_file(args.set, "--set"))
    mu = ser.distribution_from_json(_load_inline_or_file(args.dist, "--dist"))
    inner = me.inner_approx(expr, mu, args.eps)
    result = {
        "inner": ser.set_to_json(inner),
        "measure": me.measure_of(expr, mu),
        "inner_measure": me.measure_of(inner, mu),
        "eps": args.eps,
    }
    return {"command": "inner-approx", "config": _config_echo(args), "result": result}, None


def cmd_distill(args):
    rho = _load_rho(args)
    array = realize_array(rho, args.seed, args.index_bound[0])
    est = dst.estimate_block_rho(array, args.blocks)
    result = {"blocks": est.to_dict()}
    if args.event:
        event = _load_event(args)
        comparison = dst.resample_and_compare(
            est, event, array, args.replicates, args.seed, workers=args.workers
        )
        result["comparison"] = comparison.to_dict()
    return {"command": "distill", "config": _config_echo(args), "result": result}, None


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exarray",
        description="Exchangeable-array sampling, event estimation, and structure tests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, rho=True, event=True, n=True, m=False):
        if rho:
            p.add_argument("--rho", required=True, help="representation spec JSON file")
        if event:
            p.add_argument("--event", required=event is True,
                           help="event hypergraph JSON file")
        if n:
            p.add_argument("-N", "--replicates", type=int, required=True)
        if m:
            p.add_argument("-M", "--index-bound", type=_schedule, required=True,
                           help="index bound (or comma list for converge)")
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--assert", dest="assert_", action="store_true",
                       help="exit 3 when any verdict is inconsistent")
        p.add_argument("--no-timestamp", action="store_true")

    p = sub.add_parser("sample", help="realize an array and emit its edge list")
    common(p, event=False, n=False, m=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("estimate", help="direct representation sampling")
    common(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("empirical", help="uniform-placement sampling into a size-M array")
    common(p, m=True)
    p.add_argument("--reuse-array", action="store_true",
                   help="share one realized array across replicates")
    p.set_defaults(func=cmd_empirical)

    p = sub.add_parser("converge", help="empirical estimates along an M schedule")
    common(p, m=True)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("test-exch", help="exchangeability z-test for two placements")
    common(p)
    p.add_argument("--map1", required=True, help="JSON object or file: vertex -> index")
    p.add_argument("--map2", required=True)
    p.set_defaults(func=cmd_test_exch)

    p = sub.add_parser("test-dissoc", help="independence z-test over disjoint ranges")
    common(p)
    p.add_argument("--event2", required=True)
    p.add_argument("--map1", required=True)
    p.add_argument("--map2", required=True)
    p.set_defaults(func=cmd_test_dissoc)

    p = sub.add_parser("second-moment", help="block dispersion diagnostic")
    common(p, m=True)
    p.add_argument("--blocks", type=int, required=True)
    p.add_argument("--draws", type=int, default=64, help="placements per block")
    p.set_defaults(func=cmd_second_moment)

    p = sub.add_parser("definetti", help="mixture moments and frequency histogram")
    common(p, rho=False, event=False)
    p.add_argument("--probs", required=True, help="comma list of component probabilities")
    p.add_argument("--weights", required=True, help="comma list of component weights")
    p.add_argument("-L", "--sequence-length", type=int, required=True)
    p.add_argument("--bins", type=int, default=20)
    p.set_defaults(func=cmd_definetti)

    p = sub.add_parser("inner-approx", help="compact-class inner approximation")
    p.add_argument("--set", required=True, help="set expression JSON (inline or file)")
    p.add_argument("--dist", required=True, help="distribution JSON (inline or file)")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--assert", dest="assert_", action="store_true")
    p.add_argument("--no-timestamp", action="store_true")
    p.set_defaults(func=cmd_inner_approx, seed=None, workers=1)

    p = sub.add_parser("distill", help="recover block densities from a realized array")
    common(p, event="optional", m=True)
    p.add_argument("--blocks", type=int, required=True)
    p.set_defaults(func=cmd_distill)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload, csv_rows = args.func(args)
    except (CliError, ser.SchemaError, ExarrayError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    _emit(args, payload, csv_rows)
    if args.assert_ and "inconsistent" in _verdicts(payload.get("result", {})):
        return EXIT_INCONSISTENT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
