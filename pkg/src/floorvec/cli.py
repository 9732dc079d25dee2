"""``floorvec`` command line: batch parse, render, vectorize, evaluate and generate."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .core import CHANNEL_KINDS, IconClass, RoomClass, kind_name

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class UsageError(Exception):
    pass


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _stem(path) -> str:
    name = Path(path).name
    for suffix in (".heatmaps.fpt", ".rooms.png", ".icons.png"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return Path(path).stem


def _is_file_target(out: str, suffixes) -> bool:
    return Path(out).suffix.lower() in suffixes


# ---------------------------------------------------------------------------
# per-input workers (top level so a process pool can pickle them)


def _work_parse(task):
    from .svgio import parse_annotation, serialize_model

    text = Path(task["input"]).read_text(encoding="utf-8")
    parsed = parse_annotation(text)
    out = Path(task["output"])
    _write_text(out, serialize_model(parsed.model, task["format"]))
    return {"outputs": [str(out)], "warnings": list(parsed.warnings)}


def _work_render(task):
    from .formats import write_fpt1, write_png
    from .raster import render
    from .svgio import load_model

    model = load_model(task["input"])
    maps, stack = render(model, task["sigma"])
    base = Path(task["output_dir"]) / _stem(task["input"])
    base.parent.mkdir(parents=True, exist_ok=True)
    outs = [f"{base}.rooms.png", f"{base}.icons.png", f"{base}.heatmaps.fpt"]
    write_png(outs[0], maps.rooms)
    write_png(outs[1], maps.icons)
    write_fpt1(outs[2], stack)
    return {"outputs": outs}


def _work_vectorize(task):
    from .formats import read_fpt1, read_png
    from .raster import SegmentationMaps
    from .svgio import serialize_model
    from .vectorizer import VectorizeConfig, vectorize

    maps = SegmentationMaps(read_png(task["rooms"]), read_png(task["icons"]))
    stack = read_fpt1(task["heatmaps"])
    result = vectorize(maps, stack, VectorizeConfig(**task["config"]))
    out = Path(task["output"])
    _write_text(out, serialize_model(result.model, task["format"], strict=False))
    diag_path = Path(f"{out}.diagnostics.jsonl")
    _write_text(diag_path, "".join(json.dumps(d, sort_keys=True) + "\n"
                                   for d in result.diagnostics))
    return {"outputs": [str(out), str(diag_path)], "diagnostics": len(result.diagnostics)}


def _run_tasks(worker, tasks, jobs):
    """Run ``worker`` over ``tasks`` in input order; failures stay per task."""
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            futures = [pool.submit(_isolated, worker, t) for t in tasks]
            results = [f.result() for f in futures]
    else:
        results = [_isolated(worker, t) for t in tasks]
    entries = []
    for k, (task, res) in enumerate(zip(tasks, results), 1):
        entry = {"input": task.get("input", task.get("heatmaps")), **res}
        _log(f"[{k}/{len(tasks)}] {entry['input']}: {entry['status']}"
             + (f" ({entry['message']})" if entry["status"] == "error" else ""))
        entries.append(entry)
    return entries


def _isolated(worker, task):
    """Per-file isolation: any exception becomes an error entry."""
    t0 = time.perf_counter()
    try:
        entry = {"status": "ok", **worker(task)}
    except Exception as exc:
        entry = {"status": "error", "message": f"{type(exc).__name__}: {exc}"}
    entry["timing_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    return entry


def _single(fn, label):
    """Run one in-process step with the same entry shape as batch workers."""
    t0 = time.perf_counter()
    try:
        entry = {"input": label, "status": "ok", **fn()}
    except Exception as exc:
        entry = {"input": label, "status": "error", "message": f"{type(exc).__name__}: {exc}"}
        _log(f"{label}: error ({entry['message']})")
    entry["timing_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    return entry


# ---------------------------------------------------------------------------
# subcommands; each returns (manifest path, manifest entries)


def cmd_parse(args):
    inputs = list(args.input)
    ext = "." + args.format
    if len(inputs) == 1 and _is_file_target(args.out, {".json", ".svg"}):
        outs = [Path(args.out)]
    else:
        outs = [Path(args.out) / (_stem(p) + ext) for p in inputs]
    tasks = [{"input": i, "output": str(o), "format": args.format} for i, o in zip(inputs, outs)]
    return _run_tasks(_work_parse, tasks, args.jobs)


def cmd_render(args):
    tasks = [{"input": m, "output_dir": args.out, "sigma": args.sigma} for m in args.model]
    return _run_tasks(_work_render, tasks, args.jobs)


def _vectorize_config(args):
    return {"threshold": args.threshold, "nms_radius": args.nms_radius,
            "axis_tol": args.axis_tol, "min_wall_coverage": args.min_wall_coverage,
            "separating_coverage": args.separating_coverage,
            "opening_margin": args.opening_margin}


def cmd_vectorize(args):
    cfg = _vectorize_config(args)
    ext = "." + args.format
    if args.input_dir:
        if args.rooms or args.icons or args.heatmaps:
            raise UsageError("--input-dir excludes --rooms/--icons/--heatmaps")
        stems = sorted(_stem(p) for p in Path(args.input_dir).glob("*.heatmaps.fpt"))
        d = Path(args.input_dir)
        tasks = [{"rooms": str(d / f"{s}.rooms.png"), "icons": str(d / f"{s}.icons.png"),
                  "heatmaps": str(d / f"{s}.heatmaps.fpt"),
                  "output": str(Path(args.out) / (s + ext)), "format": args.format,
                  "config": cfg} for s in stems]
    else:
        if not (args.rooms and args.icons and args.heatmaps):
            raise UsageError("vectorize needs --rooms, --icons and --heatmaps (or --input-dir)")
        tasks = [{"rooms": args.rooms, "icons": args.icons, "heatmaps": args.heatmaps,
                  "output": args.out, "format": args.format, "config": cfg}]
    return _run_tasks(_work_vectorize, tasks, args.jobs)


def _default_report(first_input, suffix):
    return str(Path(first_input).with_name(Path(first_input).stem + suffix))


def cmd_eval_detection(args):
    from .metrics import (
        CategoryScore,
        DetectionConfig,
        DetectionReport,
        detection_csv,
        detection_metrics,
        to_json,
    )
    from .svgio import load_model

    if len(args.pred) != len(args.gt):
        raise UsageError("--pred and --gt need the same number of files")
    args.out = args.out or _default_report(args.pred[0], ".detection.json")
    config = DetectionConfig(args.junction_tol, args.iou)
    entries, reports = [], []
    for p, g in zip(args.pred, args.gt):
        def step(p=p, g=g):
            rep = detection_metrics(load_model(p), load_model(g), config=config)
            reports.append(rep)
            return {"gt": g, "scores": {k: {"acc": s.acc, "recall": s.recall}
                                        for k, s in rep.categories.items()}}
        entries.append(_single(step, p))
    if reports:
        # micro-average: pool match counts over all pairs
        pooled = {}
        for name in reports[0].categories:
            n_pred = sum(r[name].n_pred for r in reports)
            n_gt = sum(r[name].n_gt for r in reports)
            n_match = sum(len(r[name].matches) for r in reports)
            pooled[name] = CategoryScore(n_pred, n_gt, tuple((k, k, 0.0) for k in range(n_match)))
        summary = DetectionReport(pooled)
        body = {name: {"acc": s.acc, "recall": s.recall, "n_pred": s.n_pred, "n_gt": s.n_gt,
                       "n_matched": len(s.matches)} for name, s in pooled.items()}
        per_file = [r.to_dict() for r in reports] if len(reports) > 1 else None
        doc = {"summary": body, "files": per_file} if per_file else reports[0].to_dict()
        _write_text(Path(args.out), to_json(doc) + "\n")
        if args.csv:
            _write_text(Path(args.csv), detection_csv(summary))
    return entries


def cmd_eval_segmentation(args):
    from .formats import read_png
    from .metrics import class_names, segmentation_classes_csv, segmentation_metrics, to_json

    if args.classes < 1:
        raise UsageError("--classes must be >= 1")
    args.out = args.out or _default_report(args.pred, ".segmentation.json")

    def step():
        rep = segmentation_metrics(read_png(args.pred), read_png(args.gt), args.classes)
        doc = rep.to_dict()
        doc["class_names"] = class_names(args.classes)
        _write_text(Path(args.out), to_json(doc) + "\n")
        outs = [args.out]
        if args.csv:
            _write_text(Path(args.csv), segmentation_classes_csv(rep))
            outs.append(args.csv)
        return {"gt": args.gt, "outputs": outs}

    return [_single(step, args.pred)]


def cmd_stats(args):
    from .metrics import dataset_stats, stats_csv, to_json
    from .svgio import load_model

    models, entries = [], []
    for path in args.input:
        def step(path=path):
            models.append(load_model(path))
            return {}
        entries.append(_single(step, path))
    stats = dataset_stats(models)
    out = Path(args.out)
    _write_text(out / "stats.json", to_json(stats) + "\n")
    for name, text in stats_csv(stats).items():
        _write_text(out / f"{name}.csv", text)
    return entries


def sample_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def cmd_synth(args):
    from .formats import write_fpt1, write_png
    from .raster import render
    from .svgio import model_to_dict, serialize_model
    from .synth import SynthConfig, generate

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for k in range(args.count):
        name = f"sample_{k:04d}"

        def step(k=k, name=name):
            cfg = SynthConfig(seed=sample_seed(args.seed, k),
                              image_size=(args.width, args.height), grid=(args.rows, args.cols),
                              wall_width_range=tuple(args.wall_width),
                              icon_count_range=tuple(args.icons),
                              opening_count_range=tuple(args.openings),
                              min_separation=args.separation)
            model = generate(cfg)
            maps, stack = render(model, args.sigma)
            base = out / name
            _write_text(Path(f"{base}.svg"), serialize_model(model, "svg"))
            _write_text(Path(f"{base}.json"), serialize_model(model, "json"))
            write_png(f"{base}.rooms.png", maps.rooms)
            write_png(f"{base}.icons.png", maps.icons)
            write_fpt1(f"{base}.heatmaps.fpt", stack)
            counts = {key: len(v) for key, v in model_to_dict(model).items()
                      if isinstance(v, list) and key != "image_size"}
            return {"seed": cfg.seed, "counts": counts,
                    "outputs": [f"{name}{s}" for s in (".svg", ".json", ".rooms.png",
                                                       ".icons.png", ".heatmaps.fpt")]}
        entries.append(_single(step, name))
        _log(f"[{k + 1}/{args.count}] {name}: {entries[-1]['status']}")
    return entries


def _loss_checks(args):
    from .formats import read_fpt1
    from .losses import (
        directional_check,
        finite_difference_check,
        heatmap_uncertainty_loss,
        optimal_sigma,
        segmentation_uncertainty_loss,
    )

    tol = 1e-5
    rows = []
    rng = np.random.default_rng(args.seed)
    worst = {"heatmap_pred": 0.0, "heatmap_sigma": 0.0, "seg_logits": 0.0, "seg_sigma": 0.0}
    for _ in range(args.instances):
        c, h, w = int(rng.integers(1, 4)), int(rng.integers(1, 5)), int(rng.integers(1, 5))
        pred, target = rng.random((c, h, w)), rng.random((c, h, w))
        sig = rng.uniform(0.5, 2.0, c)
        t = heatmap_uncertainty_loss(pred, target, sig)
        worst["heatmap_pred"] = max(worst["heatmap_pred"], finite_difference_check(
            lambda x: heatmap_uncertainty_loss(x, target, sig).value, pred, t.grad_pred))
        worst["heatmap_sigma"] = max(worst["heatmap_sigma"], finite_difference_check(
            lambda x: heatmap_uncertainty_loss(pred, target, x).value, sig, t.grad_sigma))
        logits = rng.normal(size=(3, 4, 4))
        labels = rng.integers(0, 3, (4, 4))
        s = float(rng.uniform(0.5, 2.0))
        seg = segmentation_uncertainty_loss(logits, labels, s)
        worst["seg_logits"] = max(worst["seg_logits"], finite_difference_check(
            lambda x: segmentation_uncertainty_loss(x, labels, s).value, logits, seg.grad_logits))
        worst["seg_sigma"] = max(worst["seg_sigma"], finite_difference_check(
            lambda x: segmentation_uncertainty_loss(logits, labels, float(x[0])).value,
            np.array([s]), np.array([seg.grad_sigma])))
    for name, err in worst.items():
        rows.append((f"finite differences: {name}", err, err < tol))
    uniform = segmentation_uncertainty_loss(np.zeros((12, 2, 2)), np.zeros((2, 2), int), 1.0).value
    rows.append(("uniform softmax C=12", abs(uniform - math.log(12)), abs(uniform - math.log(12)) < 1e-6))
    unit = heatmap_uncertainty_loss(np.ones((1, 1, 1)), np.zeros((1, 1, 1)), [1.0]).value
    rows.append(("unit residual sigma=1", abs(unit - (0.5 + math.log(2))),
                 abs(unit - (0.5 + math.log(2))) < 1e-6))
    roots = [optimal_sigma(r) for r in (0.1, 1.0, 10.0)]
    ok = all(abs(-r / s ** 3 + 1 / (1 + s)) < 1e-9 for r, s in zip((0.1, 1.0, 10.0), roots))
    rows.append(("optimal sigma stationarity", 0.0, ok and roots == sorted(set(roots))))
    if args.pred or args.target:
        if not (args.pred and args.target):
            raise UsageError("--pred and --target go together")
        pred, target = read_fpt1(args.pred).astype(np.float64), read_fpt1(args.target).astype(np.float64)
        sig = np.full(pred.shape[0], args.sigma)
        t = heatmap_uncertainty_loss(pred, target, sig)
        err = directional_check(lambda x: heatmap_uncertainty_loss(x, target, sig).value,
                                pred, t.grad_pred, seed=args.seed)
        rows.append(("directional check on input tensors", err, err < tol))
        rows.append(("input heatmap loss value", t.value, math.isfinite(t.value)))
    return rows


def cmd_loss_check(args):
    entries = []
    rows = []

    def step():
        rows.extend(_loss_checks(args))
        return {"checks": [{"check": n, "value": v, "pass": bool(ok)} for n, v, ok in rows]}

    entries.append(_single(step, args.pred or "<random instances>"))
    if rows:
        width = max(len(n) for n, _, _ in rows)
        for n, v, ok in rows:
            _log(f"{'PASS' if ok else 'FAIL'}  {n.ljust(width)}  {v:.3e}")
        if not all(ok for _, _, ok in rows):
            entries[-1]["status"] = "error"
            entries[-1]["message"] = "one or more checks failed"
    _write_text(Path(args.out), json.dumps(entries[-1].get("checks", []), indent=2) + "\n")
    return entries


def class_tables() -> dict:
    return {
        "rooms": [{"code": int(c), "name": c.name} for c in RoomClass],
        "icons": [{"code": int(c), "name": c.name} for c in IconClass],
        "channels": [{"code": k, "name": kind_name(kind)} for k, kind in enumerate(CHANNEL_KINDS)],
    }


def cmd_classes(args):
    return [_single(lambda: (_write_text(Path(args.out), json.dumps(class_tables(), indent=2)
                                        + "\n") or {"outputs": [args.out]}), "classes")]


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p):
    p.add_argument("--config", default=argparse.SUPPRESS,
                   help="TOML file with defaults for this command's flags")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="worker processes for batch inputs (default: logical cores)")


def _pair(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected LO,HI")
    return [int(v) for v in parts]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="floorvec", description=__doc__)
    parser.add_argument("--version", action="version", version=f"floorvec {__version__}")
    parser.add_argument("--config", help="TOML file with flag defaults (top level and [command])")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="annotation SVG to fpv-1 JSON (or normalized SVG)")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--out", required=True, help="output file (single input) or directory")
    p.add_argument("--format", choices=("json", "svg"), default="json")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("render", help="model to class PNGs and an FPT1 heatmap stack")
    p.add_argument("--model", nargs="+", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--sigma", type=float, default=2.0)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("vectorize", help="maps and heatmaps to a vector model")
    p.add_argument("--rooms")
    p.add_argument("--icons")
    p.add_argument("--heatmaps")
    p.add_argument("--input-dir", help="batch mode: every STEM.heatmaps.fpt with its PNGs")
    p.add_argument("--out", required=True, help="output file, or directory with --input-dir")
    p.add_argument("--format", choices=("json", "svg"), default="json")
    p.add_argument("--threshold", type=float, default=0.4)
    p.add_argument("--nms-radius", type=float, default=5.0)
    p.add_argument("--axis-tol", type=float, default=3.0)
    p.add_argument("--min-wall-coverage", type=float, default=0.5)
    p.add_argument("--separating-coverage", type=float, default=0.95)
    p.add_argument("--opening-margin", type=float, default=2.0)
    p.set_defaults(func=cmd_vectorize)

    p = sub.add_parser("eval-detection", help="junction/opening/icon/room acc and recall")
    p.add_argument("--pred", nargs="+", required=True)
    p.add_argument("--gt", nargs="+", required=True)
    p.add_argument("--out", help="JSON report (default: next to the first prediction)")
    p.add_argument("--csv", help="optional CSV table")
    p.add_argument("--junction-tol", type=float, default=None)
    p.add_argument("--iou", type=float, default=0.5)
    p.set_defaults(func=cmd_eval_detection)

    p = sub.add_parser("eval-segmentation", help="overall/mean accuracy and mean IoU")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--out", help="JSON report (default: next to the prediction)")
    p.add_argument("--csv", help="optional per-class CSV table")
    p.set_defaults(func=cmd_eval_segmentation)

    p = sub.add_parser("stats", help="dataset statistics over model files")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="write a seeded synthetic corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--rows", type=int, default=2)
    p.add_argument("--cols", type=int, default=2)
    p.add_argument("--wall-width", type=_pair, default=[3, 6], metavar="LO,HI")
    p.add_argument("--icons", type=_pair, default=[0, 3], metavar="LO,HI")
    p.add_argument("--openings", type=_pair, default=[0, 3], metavar="LO,HI")
    p.add_argument("--separation", type=int, default=8)
    p.add_argument("--sigma", type=float, default=2.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("loss-check", help="verify loss gradients and closed-form values")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pred", help="FPT1 predicted heatmaps (optional)")
    p.add_argument("--target", help="FPT1 target heatmaps (optional)")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--out", default="loss-check.json")
    p.set_defaults(func=cmd_loss_check)

    p = sub.add_parser("classes", help="write the class-code tables")
    p.add_argument("--out", default="classes.json")
    p.set_defaults(func=cmd_classes)

    for p in sub.choices.values():
        _add_common(p)
    return parser


def _apply_config(parser, argv):
    """Load ``--config`` and install its values as defaults of the chosen subcommand."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    try:
        with open(known.config, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from None
    command = next((a for a in argv if a in parser._subparsers._group_actions[0].choices), None)
    values = {k: v for k, v in data.items() if not isinstance(v, dict)}
    if command and isinstance(data.get(command), dict):
        values.update(data[command])
    if command:
        sub = parser._subparsers._group_actions[0].choices[command]
        dests = {a.dest for a in sub._actions}
        values = {k.replace("-", "_"): v for k, v in values.items()}
        unknown = sorted(set(values) - dests)
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
        sub.set_defaults(**values)
    return values


def _manifest_path(args) -> Path:
    out = Path(args.out)
    if args.command in ("render", "stats", "synth") or (
            args.command in ("parse", "vectorize") and not out.suffix):
        return out / "manifest.json"
    return Path(f"{out}.manifest.json")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        config_values = _apply_config(parser, argv)
    except UsageError as exc:
        _log(f"floorvec: error: {exc}")
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.jobs < 1:
        _log("floorvec: error: --jobs must be >= 1")
        return EXIT_USAGE
    try:
        entries = args.func(args)
    except UsageError as exc:
        _log(f"floorvec {args.command}: error: {exc}")
        return EXIT_USAGE
    snapshot = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    manifest = {
        "tool": "floorvec",
        "version": __version__,
        "command": args.command,
        "config": snapshot,
        "config_file_values": config_values,
        "entries": entries,
    }
    path = _manifest_path(args)
    _write_text(path, json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    failed = sum(e["status"] != "ok" for e in entries)
    if failed:
        _log(f"floorvec {args.command}: {failed} of {len(entries)} inputs failed")
        return EXIT_PARTIAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
