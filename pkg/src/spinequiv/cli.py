"""``spinequiv`` command-line interface.

Every command writes a JSON report (``report.json``) and a plain-text
rendering (``report.txt``) to ``--out`` when given, and prints the text to
stdout.  ``simulate`` additionally writes ``trace.csv``.  Reports carry the
package version, the resolved configuration and the seed, and contain no
timestamps, so reruns with the same inputs are byte-identical.

Exit status is 0 whenever the command ran, whatever it concluded, 2 for bad
input and 1 when ``verify-theorems`` finds a failing check.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cartan import (
    Involution,
    VerificationError,
    closure_residuals,
    involution_properties,
    odd_even_split,
    theorem3_spectral_premises,
    verify_theorem_1_2,
)
from .config import ConfigError, load_model, load_schedule, schedule_from_rows
from .dynamics import bloch_state, propagate, two_level_model
from .equivalence import (
    Verdict,
    bloch_components,
    condition_star_decide,
    falsify_by_simulation,
    two_level_decide,
)
from .network import ModelError

TOL_DEFAULTS = {"state": 1e-10, "falsify": 1e-8, "two-level": 1e-9, "theorem": 1e-12, "closure": 1e-10}
THEOREM_SPINS = ("1/2", "1", "3/2", "2", "5/2")
CLOSURE_DIMS = ((2, 2), (2, 3), (2, 2, 2), (3, 4))


# -- report plumbing ----------------------------------------------------------------------


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def to_json(report: dict) -> str:
    return json.dumps(_plain(report), indent=2, sort_keys=True) + "\n"


def to_text(report: dict, indent: int = 0) -> str:
    lines = []
    pad = "  " * indent
    for key in sorted(report):
        val = report[key]
        if isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.append(to_text(val, indent + 1).rstrip("\n"))
        elif isinstance(val, list) and val and isinstance(val[0], dict):
            lines.append(f"{pad}{key}:")
            for item in val:
                lines.append(to_text(item, indent + 1).rstrip("\n"))
                lines.append(f"{pad}  --")
        else:
            lines.append(f"{pad}{key}: {val!r}" if isinstance(val, float) else f"{pad}{key}: {val}")
    return "\n".join(l for l in lines if l) + "\n"


def emit(report: dict, out: str | None, extra: dict | None = None) -> None:
    report = _plain(report)
    text = to_text(report)
    if "summary" in report:
        text = f"{report['summary']}\n\n{text}"
    sys.stdout.write(text)
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        (d / "report.json").write_text(to_json(report))
        (d / "report.txt").write_text(text)
        for name, content in (extra or {}).items():
            (d / name).write_text(content)


def _tolerances(pairs: list[str]) -> dict:
    tol = dict(TOL_DEFAULTS)
    for item in pairs or []:
        name, sep, value = item.partition("=")
        if not sep or name not in tol:
            raise ConfigError(f"--tol expects NAME=VALUE with NAME in {sorted(tol)}, got {item!r}")
        try:
            tol[name] = float(value)
        except ValueError:
            raise ConfigError(f"--tol {name}: {value!r} is not a number") from None
        if not tol[name] > 0:
            raise ConfigError(f"--tol {name} must be positive")
    return tol


def _resolved(args, tol: dict, **extra) -> dict:
    cfg = {"command": args.command, "seed": args.seed, "tol": tol}
    for key in ("model", "model2", "schedule", "trials", "horizon", "samples", "first", "second"):
        if getattr(args, key, None) is not None:
            cfg[key] = getattr(args, key)
    cfg.update(extra)
    return cfg


def _header(args, tol, **extra) -> dict:
    return {"tool": "spinequiv", "version": __version__, "config": _resolved(args, tol, **extra), "seed": args.seed}


# -- commands --------------------------------------------------------------------------------


def cmd_decompose(args, tol) -> int:
    model, _ = load_model(args.model)
    split = odd_even_split(model.site_dims, max_dim=max(model.dim, 256))
    inv = Involution(split)
    report = _header(args, tol, model_params=model.params())
    report["split"] = {
        "site_dims": list(split.site_dims),
        "dim": split.dim,
        "odd_count": split.odd_count,
        "even_count": split.even_count,
        "local_types": ["AII" if d % 2 == 0 else "AI" for d in split.site_dims],
        "tags": split.tag_strings(),
        "parity": ["odd" if p else "even" for p in split.parity_grid.reshape(-1)],
        "closure_residuals": closure_residuals(split),
        "involution_properties": involution_properties(inv, pairs=20, seed=args.seed),
    }
    report["summary"] = f"odd {split.odd_count}, even {split.even_count} (dimension {split.dim})"
    emit(report, args.out)
    return 0


def _falsify(m1, m2, args, tol):
    return falsify_by_simulation(m1, m2, args.trials, args.horizon, args.seed, tol["falsify"], args.samples)


def cmd_check_equiv(args, tol) -> int:
    m1, _ = load_model(args.model)
    m2, _ = load_model(args.model2)
    verdict = condition_star_decide(m1, m2, tol=tol["state"])
    report = _header(args, tol, model_params=m1.params(), model2_params=m2.params())
    if verdict.verdict is Verdict.DISTINCT and args.trials > 0 and tuple(m1.labels) == tuple(m2.labels):
        res = _falsify(m1, m2, args, tol)
        verdict.witness = res.witness
        report["falsification"] = res.as_dict()
    report["verdict"] = verdict.as_dict()
    report["summary"] = f"verdict: {verdict.verdict.value}"
    emit(report, args.out)
    return 0


def cmd_falsify(args, tol) -> int:
    m1, _ = load_model(args.model)
    m2, _ = load_model(args.model2)
    res = _falsify(m1, m2, args, tol)
    report = _header(args, tol, model_params=m1.params(), model2_params=m2.params())
    report["falsification"] = res.as_dict()
    report["summary"] = (
        f"witness found in trial {res.witness.trial + 1}, gap {res.witness.gap!r}"
        if res.found
        else f"no witness in {res.trials_run} trials (max gap {res.max_gap!r})"
    )
    emit(report, args.out)
    return 0


def cmd_simulate(args, tol) -> int:
    model, doc = load_model(args.model)
    if args.schedule is not None:
        sched = load_schedule(args.schedule)
    elif doc.get("schedule") is not None:
        sched = schedule_from_rows(doc["schedule"])
    else:
        raise ConfigError("simulate needs --schedule or a 'schedule' field in the model file")
    if args.horizon is not None:
        sched = sched.truncated(args.horizon)
    trace = propagate(model, sched, args.samples)
    csv = trace.to_csv()
    report = _header(args, tol, model_params=model.params(), schedule_rows=sched.as_rows())
    report["summary"] = f"{len(trace.times)} samples up to t = {sched.horizon!r}"
    report["trace"] = {"samples": len(trace.times), "horizon": sched.horizon, "labels": list(trace.labels)}
    emit(report, args.out, {"trace.csv": csv})
    if not args.out:
        sys.stdout.write(csv)
    return 0


def cmd_verify(args, tol) -> int:
    ok = True
    conj, spectra, closure = [], [], []
    for l in THEOREM_SPINS:
        try:
            conj.append(verify_theorem_1_2(l, tol["theorem"]).as_dict())
        except VerificationError as exc:
            ok = False
            conj.append({"spin": l, "passed": False, "error": str(exc)})
        try:
            rep = theorem3_spectral_premises(l)
            spectra.append(rep.as_dict())
            ok &= rep.passed
        except ValueError:
            pass  # integer spin: no half-integer premises to check
    for dims in CLOSURE_DIMS:
        split = odd_even_split(dims)
        res = closure_residuals(split)
        props = involution_properties(Involution(split), pairs=20, seed=args.seed)
        passed = max(*res.values(), *props.values()) <= tol["closure"]
        ok &= passed
        closure.append({"dims": list(dims), "closure": res, "involution": props, "passed": passed})
    report = _header(args, tol)
    report.update({"conjugation": conj, "spectra": spectra, "odd_even": closure, "passed": bool(ok)})
    report["summary"] = "all checks passed" if ok else "some checks FAILED"
    emit(report, args.out)
    return 0 if ok else 1


def _parse_two_level(text: str, flag: str):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"{flag} expects x,y,rx,ry,rz") from None
    if len(vals) != 5:
        raise ConfigError(f"{flag} expects five numbers x,y,rx,ry,rz, got {len(vals)}")
    x, y, rx, ry, rz = vals
    try:
        return two_level_model(x, y, bloch_state(rx, ry, rz))
    except ModelError as exc:
        raise ConfigError(f"{flag}: {exc}") from None


def cmd_two_level(args, tol) -> int:
    a = _parse_two_level(args.first, "--first")
    b = _parse_two_level(args.second, "--second")
    verdict = two_level_decide(a.x, a.y, a.rho0, b.x, b.y, b.rho0, tol=tol["two-level"])
    report = _header(args, tol)
    report["verdict"] = verdict.as_dict()
    report["summary"] = (
        "undecided" if verdict.equivalent is None
        else f"equivalent, alpha = {verdict.alpha!r}" if verdict.equivalent
        else "not equivalent"
    )
    report["bloch"] = {"first": bloch_components(a.rho0), "second": bloch_components(b.rho0)}
    if verdict.equivalent is False and args.trials > 0:
        report["falsification"] = _falsify(a, b, args, tol).as_dict()
    emit(report, args.out)
    return 0


COMMANDS = {
    "decompose": (cmd_decompose, "odd-even Cartan split of a model's algebra", ("model",)),
    "check-equiv": (cmd_check_equiv, "exact equivalence decision for two models", ("model", "model2")),
    "simulate": (cmd_simulate, "simulate a model and write its output trace", ("model",)),
    "falsify": (cmd_falsify, "search random schedules for an output discrepancy", ("model", "model2")),
    "verify-theorems": (cmd_verify, "conjugation, spectral and closure checks", ()),
    "two-level": (cmd_two_level, "equivalence of two single-control two-level models", ()),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinequiv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_, models) in COMMANDS.items():
        p = sub.add_parser(name, help=help_)
        if "model" in models:
            p.add_argument("--model", required=True, help="model YAML file")
        if "model2" in models:
            p.add_argument("--model2", required=True, help="second model YAML file")
        if name == "simulate":
            p.add_argument("--schedule", help="schedule file (YAML/CSV) or inline 'd,ux,uy,uz;...'")
        if name == "two-level":
            p.add_argument("--first", required=True, metavar="X,Y,RX,RY,RZ", help="drift and Bloch components")
            p.add_argument("--second", required=True, metavar="X,Y,RX,RY,RZ")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE", help=f"one of {sorted(TOL_DEFAULTS)}")
        p.add_argument("--out", help="directory for report files")
        if name in ("check-equiv", "falsify", "two-level"):
            p.add_argument("--trials", type=int, default=50)
        if name in ("check-equiv", "falsify", "two-level", "simulate"):
            p.add_argument("--horizon", type=float, default=None if name == "simulate" else 8.0)
            p.add_argument("--samples", type=int, default=9, help="samples per segment")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return 2
    try:
        tol = _tolerances(args.tol)
        return COMMANDS[args.command][0](args, tol)
    except (ConfigError, ModelError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
