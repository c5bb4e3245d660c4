"""Command line entry point.

Exit status is 0 on success, 1 for usage errors and 2 for bad or missing
input data.
"""

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .bench import bench_csv, load_scenes, run_bench
from .pipeline import (METHODS, ConfigError, PipelineConfig, PreprocessConfig, StageError,
                       detect_pipeline, lines_csv, preprocess)
from .prob import PROB_COLUMNS, SamplingScenario, scenario_row
from .raster import PgmError, load_pgm, render_overlay, save_pgm
from .synth import SceneSpec, generate_scene

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read_text(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from exc


def _write(path, data):
    try:
        mode = "wb" if isinstance(data, bytes) else "w"
        with open(path, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from exc


def _load_image(path):
    try:
        return load_pgm(path)
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from exc
    except PgmError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _load_config(path):
    if path is None:
        return PipelineConfig()
    try:
        return PipelineConfig.from_json(_read_text(path))
    except ConfigError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _save_image(path, img):
    try:
        save_pgm(path, img)
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from exc


def cmd_preprocess(args):
    img = _load_image(args.input)
    opts = {"method": args.method}
    if args.sigma is not None:
        opts["sigma"] = args.sigma
    if args.threshold is not None:
        if args.method == "hessian":
            opts["response_threshold"] = args.threshold
        else:
            opts["canny_high"] = args.threshold
            opts["canny_low"] = args.low if args.low is not None else 0.4 * args.threshold
    elif args.low is not None:
        opts["canny_low"] = args.low
    try:
        cfg = PreprocessConfig(**opts)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _save_image(args.output, preprocess(img, cfg).to_gray())
    return EXIT_OK


def cmd_detect(args):
    config = _load_config(args.config)
    img = _load_image(args.input)
    try:
        report = detect_pipeline(img, config, args.method)
    except StageError as exc:
        raise DataError(f"{args.input}: {exc}") from exc
    out = args.output or config.output.report
    text = report.to_json(include_timings=args.timings)
    if out:
        _write(out, text)
    else:
        sys.stdout.write(text)
    overlay = args.overlay or config.output.overlay
    if overlay:
        _save_image(overlay, render_overlay(img, report.lines))
    lines_path = args.csv or config.output.csv
    if lines_path:
        _write(lines_path, lines_csv(report.method, report.lines))
    return EXIT_OK


def cmd_synth(args):
    try:
        spec = SceneSpec.from_json(_read_text(args.spec))
        img, truth = generate_scene(spec)
    except (ValueError, TypeError, KeyError) as exc:
        raise DataError(f"{args.spec}: {exc}") from exc
    _save_image(args.output, img)
    if args.truth:
        _write(args.truth, json.dumps(truth.to_dict(), indent=2) + "\n")
    return EXIT_OK


def cmd_bench(args):
    config = _load_config(args.config)
    try:
        scenes = load_scenes(args.scenes)
    except FileNotFoundError as exc:
        raise DataError(str(exc)) from exc
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    if args.repetitions < 3:
        raise UsageError("--repetitions must be >= 3")
    records = run_bench(scenes, config, args.repetitions)
    text = bench_csv(records)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _scenarios(path):
    try:
        doc = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc
    trials, seed = 100_000, 0
    if isinstance(doc, dict) and "scenarios" in doc:
        trials = doc.get("trials", trials)
        seed = doc.get("seed", seed)
        doc = doc["scenarios"]
    items = doc if isinstance(doc, list) else [doc]
    try:
        return [SamplingScenario(**item) for item in items], trials, seed
    except (TypeError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from exc


def cmd_prob(args):
    scenarios, trials, seed = _scenarios(args.scenario)
    trials = args.trials if args.trials is not None else trials
    seed = args.seed if args.seed is not None else seed
    if trials < 1:
        raise UsageError("--trials must be >= 1")
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=PROB_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for k, sc in enumerate(scenarios):
        try:
            row = scenario_row(sc, trials, seed + 2 * k)
        except ValueError as exc:
            raise DataError(f"{args.scenario}: scenario {k}: {exc}") from exc
        writer.writerow({key: (repr(v) if isinstance(v, float) else v) for key, v in row.items()})
    if args.output:
        _write(args.output, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="powerline-hough",
                     description="Power line detection with region-restricted Hough transforms.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("preprocess", help="compute a binary edge map")
    p.add_argument("input", help="input PGM")
    p.add_argument("--method", choices=("hessian", "canny"), default="hessian")
    p.add_argument("--sigma", type=float, help="Hessian smoothing scale")
    p.add_argument("--threshold", type=float,
                   help="ridge response fraction (hessian) or high gradient threshold (canny)")
    p.add_argument("--low", type=float, help="low gradient threshold (canny)")
    p.add_argument("-o", "--output", required=True, help="output PGM (edges 255)")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("detect", help="detect lines in a grayscale image")
    p.add_argument("input", help="input PGM")
    p.add_argument("--config", help="pipeline config JSON")
    p.add_argument("--method", choices=METHODS, default="improved")
    p.add_argument("-o", "--output", help="report JSON (stdout when omitted)")
    p.add_argument("--overlay", help="write the image with detected lines drawn")
    p.add_argument("--csv", help="write detected lines as CSV")
    p.add_argument("--timings", action="store_true", help="include stage timings in the report")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("synth", help="render a synthetic scene")
    p.add_argument("--spec", required=True, help="scene spec JSON")
    p.add_argument("-o", "--output", required=True, help="output PGM")
    p.add_argument("--truth", help="ground truth JSON")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="compare the three methods on a scene corpus")
    p.add_argument("--scenes", required=True, help="directory of scene spec JSON files")
    p.add_argument("--config", help="pipeline config JSON")
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("-o", "--output", help="bench CSV (stdout when omitted)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("prob", help="tabulate hit, miss and false-detection probabilities")
    p.add_argument("--scenario", required=True, help="scenario JSON (object, list, or {scenarios: [...]})")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per scheme")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output", help="output CSV (stdout when omitted)")
    p.set_defaults(func=cmd_prob)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
