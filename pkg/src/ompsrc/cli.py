"""Command-line interface.

Subcommands: ``build-dict``, ``evaluate``, ``classify`` and ``synth-gen``.
Settings come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines (keys are the long option names with dashes or
underscores), then the ``OMPSRC_THREADS`` environment variable for the
thread count, then explicit flags.
"""

import argparse
import configparser
import csv
import io
import json
import logging
import os
import sys
import time
from pathlib import Path

from .dataset import SynthConfig, generate_synthetic, load_split, write_dataset
from .dictfile import load_dictionary, save_dictionary
from .errors import OmpSrcError
from .imageio import read_image
from .omp import ExactSparsity, Noiseless, ResidualBound
from .pipeline import GridSpec, build_dictionary, classify_image, evaluate

log = logging.getLogger("ompsrc")

THREADS_ENV = "OMPSRC_THREADS"

DEFAULTS = {
    "data_dir": None,
    "dict": "dictionary.spkd",
    "width": 55,
    "height": 66,
    "grid": ["11x11"],
    "stop": "exact",
    "split": "test",
    "format": "csv",
    "report": None,
    "timing": None,
    "threads": "1",
    "out": None,
    "n_classes": 10,
    "n_train": 14,
    "n_test": 12,
    "subspace_dim": 3,
    "noise_sigma": 0.05,
    "occlusion": 0.3,
    "seed": 42,
}

CSV_HEADER = ["kind", "id", "true_label", "predicted_label", "correct", "vote_margin", "accuracy"]


class UsageError(Exception):
    pass


def parse_grid(text):
    try:
        x_n, y_n = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"bad grid {text!r}, expected e.g. 11x11") from None
    return x_n, y_n


def parse_stop(text, patch_dim):
    """Stopping rule from ``exact[:s]``, ``bound:t`` or ``noiseless[:eps]``.

    A bare ``exact`` runs for the full patch dimension.
    """
    kind, _, arg = text.partition(":")
    try:
        if kind == "exact":
            return ExactSparsity(int(arg) if arg else patch_dim)
        if kind == "bound" and arg:
            return ResidualBound(float(arg))
        if kind == "noiseless":
            return Noiseless(float(arg)) if arg else Noiseless()
    except ValueError:
        pass
    raise UsageError(f"bad stopping rule {text!r}; use exact[:s], bound:t or noiseless[:eps]")


def rule_name(rule):
    if isinstance(rule, ExactSparsity):
        return f"exact:{rule.s}"
    if isinstance(rule, ResidualBound):
        return f"bound:{rule.t!r}"
    return f"noiseless:{rule.eps!r}"


def read_config(path):
    text = Path(path).read_text()
    parser = configparser.ConfigParser(interpolation=None)
    if not text.lstrip().startswith("["):
        text = "[ompsrc]\n" + text
    parser.read_string(text)
    values = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"{path}: unknown setting {key!r}")
            values[key] = value.split() if key == "grid" else value
    return values


def resolve(args):
    """Merge defaults, config file, environment and flags into one dict."""
    settings = dict(DEFAULTS)
    from_file = read_config(args.config) if args.config else {}
    settings.update(from_file)
    settings["grid_explicit"] = "grid" in from_file or getattr(args, "grid", None) is not None
    if os.environ.get(THREADS_ENV):
        settings["threads"] = os.environ[THREADS_ENV]
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            settings[key] = value
    for key in ("width", "height", "n_classes", "n_train", "n_test", "subspace_dim", "seed"):
        settings[key] = int(settings[key])
    for key in ("noise_sigma", "occlusion"):
        settings[key] = float(settings[key])
    threads = str(settings["threads"])
    if threads == "auto":
        settings["threads"] = os.cpu_count() or 1
    elif threads.isdigit() and int(threads) >= 1:
        settings["threads"] = int(threads)
    else:
        raise UsageError(f"bad thread count {threads!r}")
    if isinstance(settings["grid"], str):
        settings["grid"] = [settings["grid"]]
    return settings


def require(settings, key):
    if settings[key] is None:
        raise UsageError(f"--{key.replace('_', '-')} is required")
    return settings[key]


def cmd_build_dict(s):
    grids = s["grid"]
    if len(grids) != 1:
        raise UsageError("build-dict takes exactly one --grid")
    grid = GridSpec(s["width"], s["height"], *parse_grid(grids[0]))
    train, _ = load_split(require(s, "data_dir"))
    if not train:
        raise OmpSrcError(f"no training samples in {s['data_dir']}")
    d = build_dictionary(train, grid)
    save_dictionary(d, s["dict"])
    print(f"classes: {len(d.masks)}")
    print(f"training images: {d.n_train}")
    print(f"grid: {grid.x_n}x{grid.y_n} on {grid.width}x{grid.height}, "
          f"patch {grid.grid_w}x{grid.grid_h} ({grid.patch_dim} values)")
    print(f"dictionary: {s['dict']}")
    return 0


def format_report(report, grid, rule, fmt):
    if fmt == "json":
        doc = {
            "grid": {"width": grid.width, "height": grid.height, "x_n": grid.x_n, "y_n": grid.y_n},
            "stopping_rule": rule_name(rule),
            "n_images": report.n_images,
            "global_accuracy": report.global_accuracy,
            "per_class_accuracy": report.per_class_accuracy,
            "images": [
                {"image_id": p.name, "true_label": p.true_label, "predicted_label": p.predicted,
                 "correct": p.correct, "vote_margin": p.vote_margin}
                for p in report.predictions
            ],
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for p in report.predictions:
        w.writerow(["image", p.name, p.true_label, p.predicted, int(p.correct), p.vote_margin, ""])
    for label, acc in report.per_class_accuracy.items():
        w.writerow(["class", label, "", "", "", "", f"{acc:.6f}"])
    w.writerow(["global", "", "", "", "", "", f"{report.global_accuracy:.6f}"])
    return buf.getvalue()


def report_path(base, grid, n_configs):
    if base is None or n_configs == 1:
        return base
    base = Path(base)
    return base.with_name(f"{base.stem}-{grid.x_n}x{grid.y_n}{base.suffix}")


def cmd_evaluate(s, grid_given):
    train, test = load_split(require(s, "data_dir"))
    samples = test if s["split"] == "test" else train
    if not samples:
        raise OmpSrcError(f"no {s['split']} samples in {s['data_dir']}")
    if grid_given:
        grids = [GridSpec(s["width"], s["height"], *parse_grid(g)) for g in s["grid"]]
        if not train:
            raise OmpSrcError(f"no training samples in {s['data_dir']}")
        dictionaries = [build_dictionary(train, g) for g in grids]
    else:
        dictionaries = [load_dictionary(s["dict"])]
    timings = []
    for d in dictionaries:
        rule = parse_stop(s["stop"], d.grid.patch_dim)
        start = time.perf_counter()
        report = evaluate(d, samples, rule, workers=s["threads"])
        elapsed = time.perf_counter() - start
        timings.append((d.grid, report.n_images, elapsed))
        text = format_report(report, d.grid, rule, s["format"])
        path = report_path(s["report"], d.grid, len(dictionaries))
        if path is None:
            sys.stdout.write(text)
        else:
            Path(path).write_text(text)
        print(f"grid {d.grid.x_n}x{d.grid.y_n}: global accuracy {report.global_accuracy:.4f} "
              f"({sum(p.correct for p in report.predictions)}/{report.n_images})",
              file=sys.stdout if path else sys.stderr)
        print(f"grid {d.grid.x_n}x{d.grid.y_n}: {elapsed / report.n_images:.3f} s per image "
              f"with {s['threads']} thread(s)", file=sys.stderr)
    if s["timing"]:
        with open(s["timing"], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["grid", "n_images", "seconds", "seconds_per_image"])
            for g, n, sec in timings:
                w.writerow([f"{g.x_n}x{g.y_n}", n, f"{sec:.6f}", f"{sec / n:.6f}"])
    return 0


def cmd_classify(s, image_path):
    d = load_dictionary(s["dict"])
    rule = parse_stop(s["stop"], d.grid.patch_dim)
    pred = classify_image(d, read_image(image_path), rule, name=Path(image_path).stem)
    print(f"predicted: {pred.predicted}")
    print("votes: " + " ".join(f"{k}={v}" for k, v in
                              sorted(pred.votes.items(), key=lambda kv: (-kv[1], kv[0]))))
    print("residual totals:")
    for label, total in sorted(pred.residual_totals.items(), key=lambda kv: (kv[1], kv[0])):
        print(f"  {label} {total:.6f}")
    return 0


def cmd_synth_gen(s):
    out = Path(require(s, "out"))
    cfg = SynthConfig(n_classes=s["n_classes"], n_train_per_class=s["n_train"],
                      n_test_per_class=s["n_test"], width=s["width"], height=s["height"],
                      subspace_dim=s["subspace_dim"], noise_sigma=s["noise_sigma"],
                      occlusion_fraction=s["occlusion"], seed=s["seed"])
    train, test = generate_synthetic(cfg)
    write_dataset(train, test, out)
    print(f"wrote {len(train)} training and {len(test)} test images to {out}")
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="file of key = value settings")
    common.add_argument("-v", "--verbose", action="store_true")

    def geometry(p):
        p.add_argument("--width", type=int, help="resize width in pixels (55)")
        p.add_argument("--height", type=int, help="resize height in pixels (66)")

    parser = argparse.ArgumentParser(prog="ompsrc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-dict", parents=[common], help="build a dictionary from training images")
    p.add_argument("--data-dir")
    p.add_argument("--dict", help="output dictionary file")
    geometry(p)
    p.add_argument("--grid", action="append", help="patch grid, e.g. 11x11")

    p = sub.add_parser("evaluate", parents=[common], help="classify a labelled image set")
    p.add_argument("--data-dir")
    p.add_argument("--dict", help="dictionary file (ignored when --grid is given)")
    geometry(p)
    p.add_argument("--grid", action="append",
                   help="build a dictionary for this grid from the training images; repeatable")
    p.add_argument("--stop", help="exact[:s], bound:t or noiseless[:eps] (exact)")
    p.add_argument("--split", choices=["test", "train"])
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--report", help="report file; stdout if omitted")
    p.add_argument("--timing", help="write wall-clock timings to this CSV file")
    p.add_argument("--threads", help=f"worker threads or 'auto' (also ${THREADS_ENV})")

    p = sub.add_parser("classify", parents=[common], help="classify a single image")
    p.add_argument("image")
    p.add_argument("--dict")
    p.add_argument("--stop")

    p = sub.add_parser("synth-gen", parents=[common], help="write a synthetic occluded dataset")
    p.add_argument("--out")
    geometry(p)
    p.add_argument("--n-classes", type=int)
    p.add_argument("--n-train", type=int)
    p.add_argument("--n-test", type=int)
    p.add_argument("--subspace-dim", type=int)
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--occlusion", type=float, help="fraction of rows masked in test images")
    p.add_argument("--seed", type=int)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    try:
        s = resolve(args)
        if args.command == "build-dict":
            return cmd_build_dict(s)
        if args.command == "evaluate":
            return cmd_evaluate(s, s["grid_explicit"])
        if args.command == "classify":
            return cmd_classify(s, args.image)
        return cmd_synth_gen(s)
    except UsageError as exc:
        print(f"ompsrc: usage error: {exc}", file=sys.stderr)
        return 2
    except (OmpSrcError, OSError, configparser.Error) as exc:
        print(f"ompsrc: error: {exc}", file=sys.stderr)
        return 1
