"""Command line interface.

Subcommands: ``evaluate`` scores a prediction file (optionally running the
handover replay and a leaderboard-style replay of a precomputed score
vector), ``simulate`` replays handovers on their own, ``baseline`` writes
reference prediction files, ``leaderboard`` ranks report files, ``validate``
checks files against the schemas, and ``synth`` writes the bundled
synthetic dataset.

Exit codes: 0 success, 1 scoring/simulation failure, 2 I/O or parse
failure. Every flag can also be given in a ``key=value`` config file via
``--config``; explicit flags win over the file, the file wins over
defaults.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .baselines import average_baseline, fill_missing_tasks, random_baseline
from .io import (
    ParseError,
    load_annotations,
    load_pose_tracks,
    load_predictions,
    save_predictions,
)
from .model import Split, build_density_table, select_split
from .scoring import (
    SCORE_KEYS,
    BASE_WEIGHTS,
    ScoreReport,
    ScoringError,
    capacity_dimensions_score,
    evaluate,
    overall_score,
    predicted_object_mass,
)
from .simulator import SimParams, SimulationError, simulate_handovers

EXIT_OK = 0
EXIT_SCORING = 1
EXIT_IO = 2

SCORE_LABELS = {
    "s1": "filling level", "s2": "filling type", "s3": "capacity",
    "s4": "container mass", "s5": "width at top", "s6": "width at bottom",
    "s7": "height", "s8": "filling mass", "s9": "object safety",
    "s10": "delivery accuracy", "s11": "joint type and level",
    "s12": "capacity and dimensions", "S": "overall",
}

_SPLIT_CHOICES = ["train", "public-test", "private-test", "combined"]

# (flag, dest, SimParams field)
_SIM_FLAGS = [
    ("--gravity", "gravity", "gravity"),
    ("--max-accel", "max_accel", "max_acceleration"),
    ("--friction", "friction", "friction"),
    ("--sensitivity", "sensitivity", "safety_sensitivity"),
    ("--max-target-distance", "max_target_distance", "max_target_distance_mm"),
    ("--tip-over-angle", "tip_over_angle", "tip_over_override_rad"),
    ("--ee-speed", "ee_speed", "ee_speed_mps"),
    ("--reach-tolerance", "reach_tolerance", "reach_tolerance_mm"),
    ("--hold-after-end", "hold_after_end", "hold_after_end_s"),
    ("--grip-margin", "grip_margin", "grip_margin_mm"),
    ("--slip-threshold", "slip_threshold", "slip_threshold"),
    ("--slip-length", "slip_length", "slip_length_mm"),
    ("--break-ratio", "break_ratio", "break_ratio"),
]


def entry() -> None:
    sys.exit(main())


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_IO
    try:
        _apply_config_file(args)
        return args.handler(args)
    except ParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    except (ScoringError, SimulationError, ValueError, KeyError) as err:
        message = err.args[0] if err.args else err
        print(f"error: {message}", file=sys.stderr)
        return EXIT_SCORING


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graspbench",
        description="Score container-property estimation submissions and "
                    "replay annotated handovers.")
    sub = parser.add_subparsers(dest="command")
    parser.set_defaults(command=None)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="key=value file with flag defaults")
        p.add_argument("--jobs", type=int, help="parallel configurations (default 1)")
        p.add_argument("--seed", type=int, help="seed for randomized baselines")

    def sim_flags(p: argparse.ArgumentParser) -> None:
        for flag, dest, _ in _SIM_FLAGS:
            p.add_argument(flag, dest=dest, type=float)
        p.add_argument("--home", help="end-effector home as x,y,z in mm")
        p.add_argument("--target", help="delivery target override as x,y,z in mm")

    p = sub.add_parser("evaluate", help="score a prediction file")
    p.add_argument("--annotations", help="annotation CSV")
    p.add_argument("--predictions", help="prediction CSV")
    p.add_argument("--algorithm", help="name for the report (default: file stem)")
    p.add_argument("--split", choices=_SPLIT_CHOICES)
    p.add_argument("--out", help="report JSON path (per-config CSV and "
                                 "figures are written alongside)")
    p.add_argument("--fill-missing", choices=["ran", "avg"],
                   help="fill unaddressed tasks from a baseline")
    p.add_argument("--s12-literal", action=argparse.BooleanOptionalAction,
                   default=None,
                   help="compose s12 from capacity, container mass, and widths")
    p.add_argument("--simulate", action=argparse.BooleanOptionalAction,
                   default=None, help="also run the handover replay")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction,
                   default=None, help="render charts next to --out (default on)")
    p.add_argument("--trace", help="write the simulation trace CSV here")
    p.add_argument("--replay", help="JSON score vector to aggregate instead "
                                    "of evaluating files")
    common(p)
    sim_flags(p)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("simulate", help="replay handovers")
    p.add_argument("--annotations", required=True)
    p.add_argument("--predictions", help="prediction CSV (omit to replay "
                                         "with true masses)")
    p.add_argument("--split", choices=_SPLIT_CHOICES)
    p.add_argument("--out", help="outcome CSV path (summary JSON and figure "
                                 "are written alongside)")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction,
                   default=None)
    p.add_argument("--trace", help="write the simulation trace CSV here")
    common(p)
    sim_flags(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("baseline", help="write a reference prediction file")
    p.add_argument("--annotations", required=True)
    p.add_argument("--mode", choices=["ran", "avg"], required=True)
    p.add_argument("--split", choices=_SPLIT_CHOICES)
    p.add_argument("--out", required=True, help="prediction CSV to write")
    common(p)
    p.set_defaults(handler=cmd_baseline)

    p = sub.add_parser("leaderboard", help="rank report files")
    p.add_argument("reports", nargs="+", help="report JSON files")
    p.add_argument("--out", help="leaderboard CSV path (figure alongside)")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction,
                   default=None)
    common(p)
    p.set_defaults(handler=cmd_leaderboard)

    p = sub.add_parser("validate", help="check files against the schemas")
    p.add_argument("--annotations", required=True)
    p.add_argument("--predictions", nargs="*", default=[])
    p.add_argument("--check-tracks", action=argparse.BooleanOptionalAction,
                   default=None, help="also load and cross-check pose tracks")
    common(p)
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("synth", help="write the synthetic demo dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--unreachable", action=argparse.BooleanOptionalAction,
                   default=None, help="include an out-of-reach configuration")
    common(p)
    p.set_defaults(handler=cmd_synth)

    return parser


def _parse_config_file(path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(path, "expected key=value", row=lineno)
        key, raw = line.split("=", 1)
        values[key.strip()] = raw.strip()
    return values


def _coerce(raw: str):
    lowered = raw.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            continue
    return raw


def _apply_config_file(args) -> None:
    if not getattr(args, "config", None):
        return
    for key, raw in _parse_config_file(args.config).items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise ValueError(f"unknown config key '{key}'")
        if getattr(args, dest) is None:
            setattr(args, dest, _coerce(raw))


def _vec3(raw) -> tuple[float, float, float]:
    if isinstance(raw, (tuple, list)):
        parts = [float(v) for v in raw]
    else:
        parts = [float(v) for v in str(raw).split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected three comma-separated values, got '{raw}'")
    return (parts[0], parts[1], parts[2])


def _sim_params(args) -> SimParams:
    kwargs = {}
    for _, dest, field in _SIM_FLAGS:
        value = getattr(args, dest, None)
        if value is not None:
            kwargs[field] = float(value)
    if getattr(args, "home", None) is not None:
        kwargs["home_mm"] = _vec3(args.home)
    if getattr(args, "target", None) is not None:
        kwargs["target_mm"] = _vec3(args.target)
    return SimParams(**kwargs)


def _run_echo(args, params: SimParams | None = None) -> dict:
    skip = {"handler", "command", "config"}
    echo = {key: value for key, value in sorted(vars(args).items())
            if key not in skip and not key.startswith("_") and value is not None
            and not any(key == dest for _, dest, _ in _SIM_FLAGS)
            and key not in ("home", "target")}
    if params is not None:
        from dataclasses import asdict

        echo["sim_params"] = asdict(params)
    return echo


def _require(args, *names) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            raise ValueError(f"--{name.replace('_', '-')} is required")


def _format_cell(value, addressed: bool) -> str:
    if value is None or not addressed:
        return "--"
    return f"{value:.2f}"


def _print_report(report: ScoreReport) -> None:
    print(f"algorithm: {report.algorithm}  split: {report.split}  "
          f"configurations: {report.config_count}  "
          f"tasks addressed: {report.n_tasks}/5")
    for key in list(SCORE_KEYS) + ["S"]:
        cell = _format_cell(report.scores.get(key),
                            report.addressed.get(key, True))
        print(f"  {key:<4} {SCORE_LABELS[key]:<26} {cell:>8}")


def _write_report(report: ScoreReport, out, figures: bool) -> None:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    payload = report.to_dict()
    out.write_text(json.dumps(payload, indent=2) + "\n")
    per_config_path = out.with_name(out.stem + "_per_config.csv")
    with per_config_path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["config_id", "measure", "estimated", "error",
                         "contribution"])
        for row in payload["per_config"]:
            writer.writerow([row["config_id"], row["measure"], row["estimated"],
                             "" if row["error"] is None else row["error"],
                             row["contribution"]])
    if figures:
        from . import figures as charts

        charts.save_score_chart(payload, out.with_name(out.stem + "_scores.png"))
        if payload.get("sim"):
            charts.save_outcome_chart(payload["sim"]["outcomes"],
                                      out.with_name(out.stem + "_outcomes.png"))
    print(f"report written to {out}")


def _write_trace(rows, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["config_id", "frame", "ee_x", "ee_y", "ee_z", "state"])
        for config_id, frame, x, y, z, state in rows:
            writer.writerow([config_id, frame, repr(x), repr(y), repr(z), state])


def cmd_evaluate(args) -> int:
    if getattr(args, "replay", None):
        return _replay_vector(args)
    _require(args, "annotations", "predictions")
    split = args.split or "combined"
    annotations = load_annotations(args.annotations)
    selected = select_split(annotations, split)
    if not selected:
        raise ScoringError(f"no configurations in split '{split}'")
    train = [a for a in annotations if a.split is Split.TRAIN]
    densities = build_density_table(train)
    # A submission may cover more splits than the one being evaluated, so
    # rows are validated against every annotated configuration.
    predictions = load_predictions(args.predictions,
                                   [a.config_id for a in annotations],
                                   algorithm=args.algorithm)
    if args.fill_missing:
        config_ids = [a.config_id for a in selected]
        if args.fill_missing == "ran":
            filler = random_baseline(config_ids, train, seed=args.seed or 0)
        else:
            filler = average_baseline(config_ids, train)
        predictions = fill_missing_tasks(predictions, filler)

    sim_scores = None
    sim_payload = None
    params = None
    if args.simulate:
        params = _sim_params(args)
        tracks = load_pose_tracks(selected, Path(args.annotations).parent)
        masses = {a.config_id:
                  predicted_object_mass(predictions.record(a.config_id), densities)
                  for a in selected}
        trace_rows = [] if args.trace else None
        result = simulate_handovers(selected, tracks, masses, params,
                                    jobs=args.jobs or 1, trace=trace_rows)
        sim_scores = (result.safety_score, result.delivery_score)
        sim_payload = result.to_dict(params)
        if args.trace:
            _write_trace(trace_rows, args.trace)

    report = evaluate(annotations, predictions, densities, sim_scores,
                      split=split, s12_literal=bool(args.s12_literal),
                      run=_run_echo(args, params))
    report.sim = sim_payload
    _print_report(report)
    if args.out:
        _write_report(report, args.out, figures=args.figures is not False)
    return EXIT_OK


def _replay_vector(args) -> int:
    payload = json.loads(Path(args.replay).read_text())
    scores_pct = dict(payload.get("scores", {}))
    n_tasks = int(payload.get("n_tasks", 5))
    internal = {key: (None if scores_pct.get(key) is None
                      else scores_pct[key] / 100.0)
                for key in BASE_WEIGHTS}
    composite_keys = (("s3", "s4", "s5", "s6") if args.s12_literal
                      else ("s3", "s5", "s6", "s7"))
    if "s12" not in scores_pct and all(internal.get(k) is not None
                                       for k in composite_keys):
        scores_pct["s12"] = 100.0 * capacity_dimensions_score(
            *(internal[k] for k in composite_keys))
    overall = 100.0 * overall_score(internal, n_tasks)
    scores_pct["S"] = overall
    addressed = {key: scores_pct.get(key) is not None
                 for key in list(SCORE_KEYS) + ["S"]}
    report = ScoreReport(
        algorithm=payload.get("algorithm", Path(args.replay).stem),
        split=payload.get("split", "replay"),
        scores={key: scores_pct.get(key) for key in list(SCORE_KEYS) + ["S"]},
        weights=dict(BASE_WEIGHTS),
        n_tasks=n_tasks,
        config_count=int(payload.get("config_count", 0)),
        addressed=addressed,
        run=_run_echo(args),
    )
    _print_report(report)
    if args.out:
        _write_report(report, args.out, figures=args.figures is not False)
    return EXIT_OK


def cmd_simulate(args) -> int:
    split = args.split or "combined"
    annotations = load_annotations(args.annotations)
    selected = select_split(annotations, split)
    if not selected:
        raise SimulationError(f"no configurations in split '{split}'")
    params = _sim_params(args)
    tracks = load_pose_tracks(selected, Path(args.annotations).parent)
    if args.predictions:
        train = [a for a in annotations if a.split is Split.TRAIN]
        densities = build_density_table(train)
        predictions = load_predictions(args.predictions,
                                       [a.config_id for a in annotations])
        masses = {a.config_id:
                  predicted_object_mass(predictions.record(a.config_id), densities)
                  for a in selected}
        source = predictions.algorithm
    else:
        masses = {a.config_id: a.object_mass_g for a in selected}
        source = "ground truth"
    trace_rows = [] if args.trace else None
    result = simulate_handovers(selected, tracks, masses, params,
                                jobs=args.jobs or 1, trace=trace_rows)
    if args.trace:
        _write_trace(trace_rows, args.trace)

    print(f"masses: {source}  split: {split}  "
          f"configurations: {len(result.outcomes)}  "
          f"discarded: {len(result.calibration.discarded)}")
    header = (f"  {'config_id':<18} {'reached':<8} {'grasped':<8} "
              f"{'dropped':<8} {'broken':<7} {'safety':>8} {'delivery':>9}")
    print(header)
    for o in result.outcomes:
        print(f"  {o.config_id:<18} {str(o.reached):<8} {str(o.grasped):<8} "
              f"{str(o.dropped):<8} {str(o.broken):<7} "
              f"{o.safety:>8.4f} {o.delivery:>9.4f}")
    print(f"object safety score:    {result.safety_score:.2f}")
    print(f"delivery accuracy score: {result.delivery_score:.2f}")

    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        payload = result.to_dict(params)
        with out.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["config_id", "mass_estimated", "reached", "grasped",
                             "applied_force_n", "required_force_n", "safety",
                             "dropped", "broken", "place_offset_mm", "tilt_rad",
                             "delivery"])
            for row in payload["outcomes"]:
                writer.writerow([
                    row["config_id"], int(row["mass_estimated"]),
                    int(row["reached"]), int(row["grasped"]),
                    row["applied_force_n"], row["required_force_n"],
                    row["safety"], int(row["dropped"]), int(row["broken"]),
                    "" if row["place_offset_mm"] is None else row["place_offset_mm"],
                    "" if row["tilt_rad"] is None else row["tilt_rad"],
                    row["delivery"],
                ])
        out.with_suffix(".json").write_text(json.dumps(payload, indent=2) + "\n")
        if args.figures is not False:
            from . import figures as charts

            charts.save_outcome_chart(payload["outcomes"],
                                      out.with_name(out.stem + "_outcomes.png"))
        print(f"outcomes written to {out}")
    return EXIT_OK


def cmd_baseline(args) -> int:
    annotations = load_annotations(args.annotations)
    split = args.split or "combined"
    selected = select_split(annotations, split)
    if not selected:
        raise ScoringError(f"no configurations in split '{split}'")
    train = [a for a in annotations if a.split is Split.TRAIN]
    config_ids = [a.config_id for a in selected]
    if args.mode == "ran":
        predictions = random_baseline(config_ids, train, seed=args.seed or 0)
    else:
        predictions = average_baseline(config_ids, train)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_predictions(predictions, out)
    print(f"{predictions.algorithm} predictions for {len(config_ids)} "
          f"configurations written to {out}")
    return EXIT_OK


def cmd_leaderboard(args) -> int:
    rows = []
    for raw_path in args.reports:
        path = Path(raw_path)
        try:
            payload = json.loads(path.read_text())
            scores = payload["scores"]
            row = {
                "algorithm": payload.get("algorithm", path.stem),
                "scores": {key: scores.get(key) for key in list(SCORE_KEYS) + ["S"]},
                "addressed": payload.get("addressed", {}),
                "n_tasks": payload.get("n_tasks"),
            }
        except (OSError, ValueError, KeyError, TypeError) as err:
            print(f"warning: skipping {path}: {err}", file=sys.stderr)
            continue
        rows.append(row)
    if not rows:
        print("error: no readable reports", file=sys.stderr)
        return EXIT_IO
    rows.sort(key=lambda row: (-(row["scores"].get("S") if row["scores"].get("S")
                                 is not None else float("-inf")),
                               row["algorithm"]))

    columns = list(SCORE_KEYS) + ["S"]
    name_width = max(9, max(len(row["algorithm"]) for row in rows))
    print(f"{'algorithm':<{name_width}} " + " ".join(f"{c:>7}" for c in columns))
    for row in rows:
        cells = [_format_cell(row["scores"].get(key),
                              row["addressed"].get(key, True))
                 for key in columns]
        print(f"{row['algorithm']:<{name_width}} "
              + " ".join(f"{c:>7}" for c in cells))

    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with out.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["algorithm"] + columns)
            for row in rows:
                writer.writerow([row["algorithm"]] + [
                    _format_cell(row["scores"].get(key),
                                 row["addressed"].get(key, True))
                    for key in columns
                ])
        if args.figures is not False:
            from . import figures as charts

            charts.save_leaderboard_chart(rows, out.with_suffix(".png"))
        print(f"leaderboard written to {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    status = EXIT_OK
    annotations = None
    try:
        annotations = load_annotations(args.annotations)
        print(f"OK {args.annotations}: {len(annotations)} configurations")
    except ParseError as err:
        print(f"FAIL {err}", file=sys.stderr)
        return EXIT_IO
    config_ids = [a.config_id for a in annotations]
    for path in args.predictions:
        try:
            predictions = load_predictions(path, config_ids)
            tasks = ", ".join(sorted(predictions.tasks_addressed)) or "none"
            print(f"OK {path}: tasks addressed: {tasks}")
        except (ParseError, OSError) as err:
            print(f"FAIL {err}", file=sys.stderr)
            status = EXIT_IO
    if args.check_tracks:
        try:
            tracks = load_pose_tracks(annotations, Path(args.annotations).parent)
            print(f"OK pose tracks: {len(tracks)} loaded")
        except ParseError as err:
            print(f"FAIL {err}", file=sys.stderr)
            status = EXIT_IO
    return status


def cmd_synth(args) -> int:
    from .synth import write_synthetic_dataset

    layout = write_synthetic_dataset(args.out,
                                     include_unreachable=bool(args.unreachable))
    for name, path in layout.items():
        print(f"{name}: {path}")
    return EXIT_OK


if __name__ == "__main__":
    entry()
