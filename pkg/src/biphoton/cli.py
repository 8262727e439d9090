"""Command-line interface.

Every subcommand prints one JSON envelope {command, parameters,
results, schema_version} with numbers rounded to 9 significant digits;
tables and event sets can be exported as CSV instead.  Angles are read
as radians unless --degrees is given, and are always reported in
radians.  Exit codes: 0 success, 1 failed validation or runtime
failure, 2 usage errors (bad flags, out-of-range parameters).
"""

import argparse
import json
import math
import os
import sys

from .bell import (
    ChshSettings,
    PsiAngles,
    chsh,
    correlation_closed_form,
    correlation_via_table,
    hom_port_probabilities,
)
from .detection import (
    DetectorModel,
    JointProbabilityTable,
    apply_alpha_confusion,
    closed_form_ideal_table,
    closed_form_lossy_table,
    joint_table,
)
from .montecarlo import SamplerConfig, estimate_chsh, estimate_correlation, sample_events
from .optimize import (
    NoConvergenceError,
    NoViolationError,
    critical_efficiency,
    maximize_chsh,
)
from .selftest import run_all

SCHEMA_VERSION = 1

#: published thresholds shipped for comparison in critical-eta output
REFERENCE_THRESHOLDS = ((1.0, 0.91), (0.875, 0.91), (0.75, 0.92), (0.5, 0.92), (0.0, 0.926))


def _sig9(x: float) -> float:
    return float(f"{x:.9g}")


def _clean(obj):
    """Round every float to 9 significant digits, recursively."""
    if isinstance(obj, float):
        return _sig9(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _emit(command: str, parameters: dict, results: dict) -> None:
    envelope = {
        "command": command,
        "parameters": _clean(parameters),
        "results": _clean(results),
        "schema_version": SCHEMA_VERSION,
    }
    print(json.dumps(envelope, indent=2))


def _angle(value: float, degrees: bool) -> float:
    return math.radians(value) if degrees else value


def _workers() -> int:
    raw = os.environ.get("BIPHOTON_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _settings_dict(settings: ChshSettings) -> dict:
    return {
        "psi1": settings.psi1,
        "psi1_prime": settings.psi1_prime,
        "psi2": settings.psi2,
        "psi2_prime": settings.psi2_prime,
    }


def cmd_probs(args) -> int:
    model = DetectorModel(alpha=args.alpha, eta=args.eta)
    theta1 = _angle(args.theta1, args.degrees)
    theta2 = _angle(args.theta2, args.degrees)
    table = apply_alpha_confusion(joint_table(theta1, theta2, model.eta), model.alpha)
    if model.eta == 1.0:
        formula = closed_form_ideal_table(theta1, theta2)
    else:
        formula = closed_form_lossy_table(theta1, theta2, model.eta)
    formula_table = apply_alpha_confusion(
        JointProbabilityTable(formula, theta1, theta2, model.eta, 1.0), model.alpha
    )
    records = table.records()
    formula_records = formula_table.records()
    max_dev = max(
        abs(r["p"] - f["p"]) for r, f in zip(records, formula_records)
    )
    params = {
        "theta1": theta1,
        "theta2": theta2,
        "eta": model.eta,
        "alpha": model.alpha,
        "format": args.format,
    }
    if args.format == "csv":
        print("i,j,theta1,theta2,eta,alpha,p")
        for r in records:
            print(
                f"{r['i']},{r['j']},{r['theta1']:.9g},{r['theta2']:.9g},"
                f"{r['eta']:.9g},{r['alpha']:.9g},{r['p']:.9g}"
            )
        return 0
    for r, f in zip(records, formula_records):
        r["p_formula"] = f["p"]
    _emit("probs", params, {
        "records": records,
        "total": table.total,
        "max_formula_deviation": max_dev,
    })
    return 0


def cmd_correlation(args) -> int:
    model = DetectorModel(alpha=args.alpha, eta=args.eta)
    psi = PsiAngles(_angle(args.psi1, args.degrees), _angle(args.psi2, args.degrees))
    closed = correlation_closed_form(psi, model)
    tabled = correlation_via_table(psi, model)
    _emit(
        "correlation",
        {"psi1": psi.psi1, "psi2": psi.psi2, "eta": model.eta, "alpha": model.alpha},
        {
            "correlation": closed,
            "correlation_from_table": tabled,
            "difference": abs(closed - tabled),
        },
    )
    return 0


def _parse_settings(args, degrees: bool) -> ChshSettings:
    return ChshSettings(
        _angle(args.psi1, degrees),
        _angle(args.psi1_prime, degrees),
        _angle(args.psi2, degrees),
        _angle(args.psi2_prime, degrees),
    )


def cmd_chsh(args) -> int:
    model = DetectorModel(alpha=args.alpha, eta=args.eta)
    settings = _parse_settings(args, args.degrees)
    closed = chsh(settings, model)
    tabled = chsh(settings, model, method="table")
    _emit(
        "chsh",
        dict(_settings_dict(settings), eta=model.eta, alpha=model.alpha),
        {
            "s": closed,
            "s_from_table": tabled,
            "margin": closed - 2.0,
            "difference": abs(closed - tabled),
        },
    )
    return 0


def cmd_optimize(args) -> int:
    model = DetectorModel(alpha=args.alpha, eta=args.eta)
    result = maximize_chsh(
        model, starts=args.starts, tol=args.tol, seed=args.seed, workers=_workers()
    )
    _emit(
        "optimize",
        {
            "eta": model.eta,
            "alpha": model.alpha,
            "starts": args.starts,
            "tol": args.tol,
            "seed": args.seed,
        },
        {
            "best_value": result.best_value,
            "settings": _settings_dict(result.settings),
            "starts_used": result.starts_used,
            "converged": result.converged,
        },
    )
    return 0


def cmd_critical_eta(args) -> int:
    if not 0.0 <= args.alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {args.alpha!r}")
    result = critical_efficiency(
        args.alpha, tol=args.tol, starts=args.starts, seed=args.seed,
        workers=_workers(),
    )
    reference = None
    for known_alpha, eta in REFERENCE_THRESHOLDS:
        if abs(known_alpha - args.alpha) < 1e-9:
            reference = eta
            break
    _emit(
        "critical-eta",
        {"alpha": args.alpha, "tol": args.tol, "starts": args.starts,
         "seed": args.seed},
        {
            "eta_critical": result.eta_critical,
            "bracket_width": result.bracket_width,
            "settings_at_threshold": _settings_dict(result.settings_at_threshold),
            "reference": reference,
        },
    )
    return 0


def cmd_hom_scan(args) -> int:
    if args.points < 2:
        raise ValueError("points must be at least 2")
    start = _angle(args.start, args.degrees)
    stop = _angle(args.stop, args.degrees)
    theta2 = _angle(args.theta2, args.degrees)
    step = (stop - start) / (args.points - 1)
    rows = []
    for k in range(args.points):
        theta1 = start + k * step
        probs = hom_port_probabilities(theta1, theta2)
        rows.append(dict({"theta1": theta1, "theta2": theta2}, **probs.as_dict()))
    params = {
        "start": start,
        "stop": stop,
        "points": args.points,
        "theta2": theta2,
        "format": args.format,
    }
    if args.format == "csv":
        cols = ["theta1", "theta2", "p_4_3", "p_5_3", "p_6_3", "p_3_4", "p_3_5", "p_3_6"]
        print(",".join(cols))
        for row in rows:
            print(",".join(f"{row[c]:.9g}" for c in cols))
        return 0
    _emit("hom-scan", params, {"grid": rows})
    return 0


def cmd_sample(args) -> int:
    model = DetectorModel(alpha=args.alpha, eta=args.eta)
    cfg = SamplerConfig(
        seed=args.seed,
        n_per_setting=args.n,
        model=model,
        settings=_parse_settings(args, args.degrees),
    )
    events = sample_events(cfg)
    events.to_csv(args.out)
    groups = events.split_by_setting()
    per_setting = {}
    for label, group in groups.items():
        mean, err = estimate_correlation(group)
        per_setting[label] = {"e": mean, "stderr": err, "n": len(group)}
    s, s_err = estimate_chsh(groups)
    _emit(
        "sample",
        dict(
            _settings_dict(cfg.settings),
            eta=model.eta,
            alpha=model.alpha,
            seed=args.seed,
            n=args.n,
            out=args.out,
        ),
        {
            "out": args.out,
            "n_events": len(events),
            "per_setting": per_setting,
            "s_estimate": s,
            "s_stderr": s_err,
        },
    )
    return 0


def cmd_validate(args) -> int:
    failures = run_all()
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biphoton",
        description="Two-photon interferometer statistics, CHSH analysis and sampling",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_degrees(p):
        p.add_argument("--degrees", action="store_true",
                       help="read angle arguments as degrees")

    def add_model(p):
        p.add_argument("--eta", type=float, default=1.0,
                       help="detector efficiency in (0, 1]")
        p.add_argument("--alpha", type=float, default=1.0,
                       help="double-click recognition probability in [0, 1]")

    p = sub.add_parser("probs", help="6x6 joint outcome table")
    p.add_argument("theta1", type=float)
    p.add_argument("theta2", type=float)
    add_model(p)
    add_degrees(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_probs)

    p = sub.add_parser("correlation", help="E(psi1, psi2) by both routes")
    p.add_argument("psi1", type=float)
    p.add_argument("psi2", type=float)
    add_model(p)
    add_degrees(p)
    p.set_defaults(func=cmd_correlation)

    def add_settings(p):
        p.add_argument("psi1", type=float)
        p.add_argument("psi1_prime", type=float)
        p.add_argument("psi2", type=float)
        p.add_argument("psi2_prime", type=float)

    p = sub.add_parser("chsh", help="S and the margin over 2")
    add_settings(p)
    add_model(p)
    add_degrees(p)
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("optimize", help="maximize S over the four angles")
    add_model(p)
    p.add_argument("--starts", type=int, default=64)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("critical-eta", help="efficiency threshold for violation")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--starts", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_critical_eta)

    p = sub.add_parser("hom-scan", help="single-station pair statistics vs theta1")
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=math.pi / 2.0)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--theta2", type=float, default=0.0)
    add_degrees(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_hom_scan)

    p = sub.add_parser("sample", help="draw seeded events and export CSV")
    add_settings(p)
    add_model(p)
    add_degrees(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=10000,
                   help="events per setting")
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("validate", help="run the library's invariant checks")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NoConvergenceError, NoViolationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
