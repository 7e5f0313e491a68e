"""Command-line entry point: ``orbitqsl <command> [options]``.

Exit codes: 0 on success, 1 on a validation error (bad state, non-Hermitian
H, ...), 2 on unparseable input or bad arguments.  Errors are reported on
stderr as a one-line JSON object.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
from typing import Any

import numpy as np

from . import __version__
from .config import override_tolerances
from .cptp import apply_channel, channel_from_json, channel_visibility, cptp_bound, dilate, effective_speed, system_from_json
from .errors import OrbitQSLError, ParseError, ValidationError
from .interferometer import default_settings, fit_fringe, measured_bounds, sample_scan
from .numerics import check_unitary, matrix_from_json, matrix_to_json, propagator
from .orbit_metric import bargmann_angle, orbit_distance, path_length, quantum_speed, visibility_phase
from .reproduce import EXAMPLES
from .speed_limits import combined_bound, mean_uncertainty, mt_bound
from .states import schedule_from_json, state_from_json, state_to_json
from .sweep import SweepConfig, rows_to_csv, run_sweep, summarize

COMMANDS = ("bound", "metric", "channel", "interfere", "reproduce", "sweep")


# -- input helpers --------------------------------------------------------------


def _load_input(path: str | None) -> Any:
    if path is None:
        raise ParseError("this command needs --input (a JSON file, or '-' for stdin)")
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from exc


def _instances(doc: Any) -> list[dict]:
    if isinstance(doc, dict) and "instances" in doc:
        doc = doc["instances"]
    items = doc if isinstance(doc, list) else [doc]
    if not all(isinstance(x, dict) for x in items):
        raise ParseError("each instance must be a JSON object")
    return items


def _require(inst: dict, key: str) -> Any:
    if key not in inst:
        raise ParseError(f"instance is missing '{key}'")
    return inst[key]


def _float(inst: dict, key: str, default: float | None = None) -> float:
    value = inst.get(key, default)
    if value is None:
        raise ParseError(f"instance is missing '{key}'")
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"'{key}' must be a number") from exc


def _hamiltonian(inst: dict, hbar: float):
    if "schedule" in inst:
        return schedule_from_json(inst["schedule"], hbar)
    return schedule_from_json({"H": _require(inst, "H"), "hbar": hbar})


# -- commands -------------------------------------------------------------------


def cmd_bound(args) -> list[dict]:
    out = []
    for inst in _instances(_load_input(args.input)):
        hbar = _float(inst, "hbar", args.hbar)
        rho = state_from_json(_require(inst, "rho"))
        sched = _hamiltonian(inst, hbar)
        T = _float(inst, "T")
        if sched.kind == "constant":
            out.append(combined_bound(rho, sched.constant_H, T, hbar).to_json())
            continue
        U = sched.propagator(0.0, T)
        pv = visibility_phase(rho, U)
        bound = mt_bound(rho, sched, T)
        out.append({
            "T": T,
            "hbar": hbar,
            "schedule": "sampled",
            "visibility": pv.visibility,
            "phase": pv.phase,
            "bargmann_angle": bargmann_angle(rho, U),
            "mean_delta_H": mean_uncertainty(rho, sched, T),
            "path_length": path_length(rho, sched, 0.0, T),
            "mt_bound": bound if math.isfinite(bound) else None,
            "reasons": {} if math.isfinite(bound) else {"mt_bound": "infinite: zero speed, nonzero angle"},
        })
    return out


def cmd_metric(args) -> list[dict]:
    out = []
    for inst in _instances(_load_input(args.input)):
        hbar = _float(inst, "hbar", args.hbar)
        rho = state_from_json(_require(inst, "rho"))
        record: dict[str, Any] = {}
        if "U" in inst:
            U = check_unitary(matrix_from_json(inst["U"]))
        else:
            sched = _hamiltonian(inst, hbar)
            T = _float(inst, "T")
            U = sched.propagator(0.0, T)
            record["path_length"] = path_length(rho, sched, 0.0, T) if T > 0 else 0.0
            record["initial_speed"] = quantum_speed(rho, sched.at(0.0), hbar)
        pv = visibility_phase(rho, U)
        record.update({
            "visibility": pv.visibility,
            "phase": pv.phase,
            "distance": orbit_distance(rho, U),
            "bargmann_angle": bargmann_angle(rho, U),
            "final_state": state_to_json(rho.evolve(U)),
        })
        out.append(record)
    return out


def cmd_channel(args) -> list[dict]:
    out = []
    for inst in _instances(_load_input(args.input)):
        rho = state_from_json(_require(inst, "rho"))
        if "channel" in inst:
            ch = channel_from_json(inst["channel"])
            out.append({"output_state": state_to_json(apply_channel(rho, ch))})
            continue
        system = system_from_json(_require(inst, "system"), args.hbar)
        T = _float(inst, "T")
        ch = dilate(system, T)
        bound = cptp_bound(rho, system, T)
        out.append({
            "T": T,
            "kraus": ch.to_json()["kraus"],
            "completeness_defect": ch.completeness_defect(),
            "output_state": state_to_json(apply_channel(rho, ch)),
            "visibility": channel_visibility(rho, system, T),
            "effective_speed": effective_speed(rho, system),
            "cptp_bound": bound if math.isfinite(bound) else None,
            "reasons": {} if math.isfinite(bound) else {"cptp_bound": "infinite: zero speed, nonzero angle"},
        })
    return out


def cmd_interfere(args) -> list[dict] | str:
    out = []
    csv_parts = []
    for k, inst in enumerate(_instances(_load_input(args.input))):
        hbar = _float(inst, "hbar", args.hbar)
        rho = state_from_json(_require(inst, "rho"))
        H = matrix_from_json(_require(inst, "H"))
        T = _float(inst, "T")
        settings = np.asarray(inst.get("settings", default_settings()), dtype=float)
        seed = int(np.random.SeedSequence(args.seed, spawn_key=(4, k)).generate_state(1)[0])
        scan = sample_scan(rho, propagator(H, T, hbar), np.eye(rho.dim), settings, args.shots, seed)
        if args.format == "csv":
            csv_parts.append(scan.to_csv())
            continue
        fit = fit_fringe(scan)
        report = combined_bound(rho, H, T, hbar)
        measured = measured_bounds(rho, H, T, args.tau, settings, args.shots, seed, hbar, mean_H=report.mean_H)
        measured["fit"] = {
            "visibility": fit.visibility,
            "phase": fit.phase,
            "visibility_stderr": fit.visibility_stderr,
            "phase_stderr": fit.phase_stderr,
            "phase_identifiable": fit.phase_identifiable,
        }
        measured["true_speed"] = quantum_speed(rho, H, hbar)
        report.measured = measured
        record = report.to_json()
        record["scan"] = scan.to_json()
        out.append(record)
    return "".join(csv_parts) if args.format == "csv" else out


def cmd_reproduce(args) -> list[dict]:
    names = list(EXAMPLES) if args.which == "all" else [args.which]
    out = []
    for name in names:
        if name == "qubit-example":
            out.append(EXAMPLES[name](printed_tol=args.printed_tol))
        else:
            out.append(EXAMPLES[name](seed=args.seed))
    return out


def cmd_sweep(args) -> list[dict] | str:
    dims = tuple(int(d) for d in args.dims.split(","))
    if any(d < 1 for d in dims):
        raise ValidationError("dimensions must be positive")
    cfg = SweepConfig(dims=dims, count=args.count, t_max=args.tmax, hbar=args.hbar, seed=args.seed, jobs=args.jobs)
    rows = run_sweep(cfg)
    if args.format == "csv":
        return rows_to_csv(rows)
    return [{"summary": summarize(rows), "rows": rows}]


HANDLERS = {
    "bound": cmd_bound,
    "metric": cmd_metric,
    "channel": cmd_channel,
    "interfere": cmd_interfere,
    "reproduce": cmd_reproduce,
    "sweep": cmd_sweep,
}


# -- rendering ------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _fmt(value) -> str:
    if isinstance(value, bool) or value is None:
        return str(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, list) and all(isinstance(v, (int, float)) for v in value):
        return "[" + ", ".join(_fmt(float(v)) for v in value) + "]"
    return str(value)


_TABLE_SKIP = ("reasons", "scan", "final_state", "output_state", "kraus", "rows")


def _flatten(record: dict, prefix: str = "") -> dict:
    """Scalar fields of a record, nested dicts as dotted keys; bulky payloads skipped."""
    flat = {}
    for key, value in record.items():
        if key in _TABLE_SKIP:
            continue
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{prefix}{key}."))
        elif isinstance(value, list) and value and isinstance(value[0], (list, dict)):
            continue
        else:
            flat[prefix + key] = value
    return flat


def render_table(results: list[dict]) -> str:
    lines = []
    for k, record in enumerate(results):
        if k:
            lines.append("")
        if "checks" in record:
            lines.append(f"== {record['example']} ==")
            lines.append(f"{'check':32s} {'computed':>28s} {'printed':>28s}  verdict")
            for c in record["checks"]:
                verdict = "-" if c["match"] is None else ("match" if c["match"] else "MISMATCH")
                lines.append(f"{c['name']:32s} {_fmt(c['computed']):>28s} {_fmt(c['printed']):>28s}  {verdict}")
            continue
        flat = _flatten(record)
        width = max((len(key) for key in flat), default=0)
        for key, value in flat.items():
            lines.append(f"{key:<{width}}  {_fmt(value)}")
        for key, value in record.get("reasons", {}).items():
            lines.append(f"{'':<{width}}  ({key}: {value})")
    return "\n".join(lines) + "\n"


def render(command: str, results, args) -> str:
    if isinstance(results, str):
        return results
    results = _jsonable(results)
    if args.format == "table":
        return render_table(results)
    if args.format == "csv":
        raise ValidationError(f"--format csv is only available for 'interfere' and 'sweep', not '{command}'")
    envelope = {"command": command, "version": __version__}
    if not args.deterministic:
        envelope["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    envelope["seed"] = args.seed
    envelope["results"] = results
    return json.dumps(envelope, indent=2) + "\n"


# -- argument parsing -----------------------------------------------------------


def _shots(text: str) -> int | None:
    if text.lower() in ("inf", "exact", "none"):
        return None
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("shots must be >= 1 or 'inf'")
    return value


def _tol_pair(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("tolerance override must look like name=value")
    return key.strip(), float(value)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", help="input JSON file ('-' for stdin)")
    common.add_argument("--output", "-o", help="write output here instead of stdout")
    common.add_argument("--format", "-f", choices=("json", "csv", "table"), default=None)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--hbar", type=float, default=1.0)
    common.add_argument("--shots", type=_shots, default=100_000, help="shots per setting, or 'inf'")
    common.add_argument("--tau", type=float, default=0.05, help="arm delay for the speed measurement")
    common.add_argument("--deterministic", action="store_true", help="omit the timestamp")
    common.add_argument("--tol", type=_tol_pair, action="append", default=[], metavar="NAME=VALUE",
                        help="override a numerical tolerance (herm, unit, psd, recon, ...)")

    parser = argparse.ArgumentParser(prog="orbitqsl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("bound", parents=[common], help="all time bounds for (rho, H, T)")
    sub.add_parser("metric", parents=[common], help="visibility, phase, distance, angle, path length")
    sub.add_parser("channel", parents=[common], help="apply a Kraus channel or a dilated system")
    sub.add_parser("interfere", parents=[common], help="simulate the interferometric measurement")
    rep = sub.add_parser("reproduce", parents=[common], help="recompute the worked examples")
    rep.add_argument("which", nargs="?", default="all", choices=("all", *EXAMPLES))
    rep.add_argument("--printed-tol", type=float, default=0.005)
    sw = sub.add_parser("sweep", parents=[common], help="random-instance bound-validity sweep")
    sw.add_argument("--dims", default="2,3,4")
    sw.add_argument("--count", type=int, default=1000)
    sw.add_argument("--tmax", type=float, default=4 * math.pi)
    sw.add_argument("--jobs", type=int, default=1)
    return parser


def _fail(exc: OrbitQSLError, code: int) -> int:
    sys.stderr.write(json.dumps({"error": exc.code, "type": type(exc).__name__, "message": str(exc)}) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command == "sweep" else "json"
    try:
        with override_tolerances(**dict(args.tol)):
            text = render(args.command, HANDLERS[args.command](args), args)
    except KeyError as exc:
        return _fail(ParseError(str(exc)), 2)
    except ParseError as exc:
        return _fail(exc, 2)
    except OrbitQSLError as exc:
        return _fail(exc, 1)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
