"""Command-line entry point: ``chbell <command> [flags]``.

Exit status is 0 on success, 2 on invalid input (one-line diagnostic on
stderr) and 1 on I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import analyze as _analyze
from . import lhv as _lhv
from . import simulate as _simulate
from .bell import ch_from_counts, configuration_probabilities
from .errors import (
    FormatError,
    ManifestError,
    NoViolationError,
    UndefinedRatioError,
    ValidationError,
)
from .model import (
    AnalyzerConfig,
    EntangledState,
    Polarizer,
    detector_from_dict,
    polarizer_from_dict,
    state_from_dict,
)
from .optimizer import optimize_angles
from .prediction import fringe_scan, singles_probability, visibility
from .threshold import threshold_curve

PROG = "chbell"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    pass


def _floats(text, n=None, name="value"):
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"--{name}: expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) not in ((n,) if isinstance(n, int) else n):
        raise UsageError(f"--{name}: expected {n} values, got {len(vals)}")
    return vals


def _state(text) -> EntangledState:
    vals = _floats(text, (1, 2), "f")
    return EntangledState(vals[0], vals[1] if len(vals) > 1 else 0.0)


def _pols(args):
    return Polarizer(args.eps_par1, args.eps_perp1), Polarizer(args.eps_par2, args.eps_perp2)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _fmt(args, default):
    if args.format:
        return args.format
    if args.output and args.output.lower().endswith(".csv"):
        return "csv"
    if args.output and args.output.lower().endswith(".json"):
        return "json"
    return default


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_predict(args):
    state = _state(args.f)
    pol1, pol2 = _pols(args)
    if args.scan_arm is not None:
        scan = fringe_scan(state, args.scan_arm, args.scan_fixed, pol1, pol2, args.step)
        if _fmt(args, "csv") == "csv":
            return scan.to_csv()
        return _dump_json(
            {
                "fixed_arm": scan.fixed_arm,
                "fixed_angle": scan.fixed_angle,
                "visibility": visibility(scan),
                "samples": [[a, p] for a, p in scan.samples],
            }
        )
    if args.angles is None:
        raise UsageError("predict needs --angles (or --scan-arm for a fringe scan)")
    cfg = AnalyzerConfig.from_angles(_floats(args.angles, 4, "angles"), pol1, pol2)
    probs = configuration_probabilities(state, cfg)
    rows = [
        {"setting1": s1.label(), "setting2": s2.label(), "probability": p}
        for (s1, s2), p in zip(cfg.configurations(), probs)
    ]
    if _fmt(args, "json") == "csv":
        lines = ["setting1,setting2,probability"] + [
            f"{r['setting1']},{r['setting2']},{r['probability']:.9g}" for r in rows
        ]
        return "\n".join(lines) + "\n"
    num = probs[0] - probs[1] + probs[2] + probs[3]
    den = probs[4] + probs[5]
    return _dump_json(
        {
            "f": {"re": state.f_re, "im": state.f_im},
            "angles_deg": list(cfg.angles),
            "configurations": rows,
            "singles": {
                "arm1_theta1_prime": singles_probability(state, 1, cfg.theta1_prime, pol1),
                "arm2_theta2": singles_probability(state, 2, cfg.theta2, pol2),
            },
            "ch": num - den,
            "r": num / den if den > 0 else None,
        }
    )


def cmd_optimize(args):
    pol1, pol2 = _pols(args)
    res = optimize_angles(_state(args.f), pol1, pol2, objective=args.objective, step=args.step)
    if _fmt(args, "json") == "csv":
        a = res.angles
        return f"theta1,theta1_prime,theta2,theta2_prime,objective,value\n{a[0]:.9g},{a[1]:.9g},{a[2]:.9g},{a[3]:.9g},{res.objective},{res.objective_value:.12g}\n"
    return _dump_json(res.to_dict())


def cmd_threshold(args):
    pol1, pol2 = _pols(args)
    curve = threshold_curve(args.f_min, args.f_max, args.steps, pol1, pol2)
    if _fmt(args, "csv") == "csv":
        return curve.to_csv()
    return _dump_json(curve.to_dict())


def cmd_lhv(args):
    if args.form == "counts":
        report = _lhv.enumerate_counts_form(args.no_enhancement)
    else:
        report = _lhv.enumerate_probability_form()
    out = report.to_dict()
    if args.mixtures:
        out["mixture_max_ch"] = _lhv.mixture_bound_check(args.mixtures, args.seed, args.no_enhancement, report.mode)
        out["seed"] = args.seed
    return _dump_json(out)


def load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc.msg})") from None
    return data


def plan_from_config(data, seed=None) -> _simulate.RunPlan:
    try:
        state = state_from_dict(data["f"])
        cfg = AnalyzerConfig.from_angles(
            data["angles_deg"], polarizer_from_dict(data.get("pol1")), polarizer_from_dict(data.get("pol2"))
        )
        detector = detector_from_dict(data["detector"])
        duration = data["duration_s"]
    except KeyError as exc:
        raise ValidationError(f"config is missing {exc}") from None
    return _simulate.RunPlan(
        state,
        cfg,
        detector,
        float(duration),
        seed=int(data.get("seed", 0) if seed is None else seed),
        jitter_ns=float(data.get("jitter_ns", 0.0)),
    )


def cmd_simulate(args):
    plan = plan_from_config(load_config(args.config), args.seed)
    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {args.out}: {exc.strerror}") from exc
    if args.events:
        runs = _simulate.simulate_events(plan)
        _simulate.write_events(runs, args.out, plan.cfg.angles)
        summary = {
            "manifest": os.path.join(args.out, "manifest.json"),
            "seed": plan.seed,
            "events": [[len(e1), len(e2)] for e1, e2 in runs],
        }
        return _dump_json(summary)
    counts = _simulate.simulate_counts(plan)
    try:
        result = ch_from_counts(counts).to_dict()
    except UndefinedRatioError as exc:
        result = exc.result.to_dict()
    text = _dump_json({"seed": plan.seed, "counts": counts.to_dict(), "result": result})
    _emit(text, os.path.join(args.out, "counts.json"))
    return text


def cmd_analyze(args):
    manifest = _analyze.load_manifest(args.manifest)
    counts = _analyze.count_runs(manifest, args.window_ns)
    if args.per_run_csv:
        _emit(_analyze.per_run_csv(counts), args.per_run_csv)
    try:
        result = _analyze.analyze_counts(counts, args.window_ns, args.subtract_accidentals)
    except UndefinedRatioError as exc:
        print(f"{PROG}: warning: {exc}", file=sys.stderr)
        result = exc.result
    return _dump_json(result.to_dict())


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_pols(p):
    for arm in (1, 2):
        p.add_argument(f"--eps-par{arm}", type=float, default=1.0, help=f"arm {arm} aligned transmission")
        p.add_argument(f"--eps-perp{arm}", type=float, default=0.0, help=f"arm {arm} crossed transmission")


def _add_output(p, formats=("json", "csv")):
    p.add_argument("-o", "--output", help="write to this file instead of stdout")
    p.add_argument("--format", choices=formats, help="output format (default depends on command)")


def build_parser():
    parser = _Parser(prog=PROG, description="Clauser-Horne Bell-test toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("predict", help="closed-form probabilities, CH and R")
    p.add_argument("--f", required=True, metavar="RE[,IM]")
    p.add_argument("--angles", metavar="A,B,C,D", help="theta1,theta1',theta2,theta2' in degrees")
    p.add_argument("--scan-arm", type=int, choices=(1, 2), help="fixed arm for a fringe scan")
    p.add_argument("--scan-fixed", type=float, default=45.0, help="fixed-arm angle (degrees)")
    p.add_argument("--step", type=float, default=1.0, help="fringe scan step (degrees)")
    _add_pols(p)
    _add_output(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("optimize", help="angles maximising CH or R")
    p.add_argument("--f", required=True, metavar="RE[,IM]")
    p.add_argument("--objective", type=str.upper, choices=("CH", "R"), default="CH")
    p.add_argument("--step", type=float, default=1.0, help="grid step (degrees)")
    _add_pols(p)
    _add_output(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("threshold", help="critical detection efficiency curve")
    p.add_argument("--f-min", type=float, required=True)
    p.add_argument("--f-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    _add_pols(p)
    _add_output(p)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("lhv", help="enumerate deterministic local strategies")
    p.add_argument("--form", choices=("counts", "prob"), default="counts")
    p.add_argument("--no-enhancement", action="store_true")
    p.add_argument("--mixtures", type=int, default=0, help="also test this many random mixtures")
    p.add_argument("--seed", type=int, default=0)
    _add_output(p, ("json",))
    p.set_defaults(func=cmd_lhv)

    p = sub.add_parser("simulate", help="Monte-Carlo counts or event files")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--events", action="store_true", help="write timestamp files and a manifest")
    p.add_argument("--seed", type=int, help="override the config seed")
    _add_output(p, ("json",))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="coincidence analysis of event files")
    p.add_argument("--manifest", required=True)
    p.add_argument("--window-ns", type=float, required=True)
    p.add_argument("--subtract-accidentals", action="store_true")
    p.add_argument("--per-run-csv", help="also write per-run coincidence counts here")
    _add_output(p, ("json",))
    p.set_defaults(func=cmd_analyze)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.func(args)
        _emit(text, args.output)
    except (UsageError, ValidationError, ManifestError, FormatError, NoViolationError, UndefinedRatioError) as exc:
        msg = " ".join(str(exc).split())
        print(f"{PROG}: error: {msg}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
