"""Command-line front end.

    trendvis ingest     --snapshots FILE... | --trajectories CSV  [--meta CSV] --out DIR
    trendvis visibility BUNDLE --topic ID... | --all  [--at D | grid flags]
    trendvis sweep      BUNDLE [grid flags] [--category L] [--per-category] [--min-topics K]
    trendvis synth      CONFIG [OUTDIR]
    trendvis report     BUNDLE --out DIR [--figures fig1,fig2,fig3,fig4]

Global flags (accepted before or after the subcommand): ``--strict``,
``--r-cap N``, ``--seed S``, ``--out DIR``.

Exit codes: 0 success, 1 fatal data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path
from urllib.parse import quote

from . import __version__
from ._backend import BACKEND
from .bundle import (
    atomic_write,
    bundle_inputs,
    category_csv,
    dumps_json,
    fmt,
    fmt_d,
    load_bundle,
    profile_csv,
    sweep_csv,
    sweep_summary,
    write_bundle,
    write_diagnostics,
)
from .errors import TrendvisError, UnknownTopic
from .ingest import merge_snapshot_sources, parse_metadata_csv, parse_trajectory_csv, snapshots_to_trajectories
from .manifest import MANIFEST, RunManifest
from .model import Dataset, Diagnostic, parse_epoch, validate_dataset
from .regression import (
    filter_regression_points,
    ols_loglog,
    per_category_sweep,
    restrict_to_category,
    sweep_dmax,
)
from .synth import generate_dataset, ground_truth, parse_config
from .visibility import find_crossover, make_grid, rank1_dwell, visibility, visibility_profile

# Every default lives here; manifests record the resolved values.
DEFAULTS: dict[str, object] = {
    "strict": False,
    "r_cap": 50,
    "seed": None,
    "out": None,
    "d_min": 0.0,
    "d_max": 3.0,
    "d_step": 0.015,
    "min_topics": 30,
    "fig3_d": 0.8,
    "figures": "fig1,fig2,fig3,fig4",
}

FIGURES = ("fig1", "fig2", "fig3", "fig4")


class UsageError(Exception):
    pass


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--strict", action="store_true", default=argparse.SUPPRESS, help="abort on the first bad record")
    g.add_argument("--r-cap", type=int, default=argparse.SUPPRESS, metavar="N", help="deepest recorded rank (default 50)")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the synthetic seed")
    g.add_argument("--out", default=argparse.SUPPRESS, metavar="DIR", help="output directory")
    return p


def _grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d-min", type=float, default=argparse.SUPPRESS)
    p.add_argument("--d-max", type=float, default=argparse.SUPPRESS)
    p.add_argument("--d-step", type=float, default=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="trendvis", parents=[common], description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="parse crawls or tables into a dataset bundle")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--snapshots", nargs="+", metavar="FILE")
    src.add_argument("--trajectories", metavar="CSV")
    p.add_argument("--meta", metavar="CSV")
    p.add_argument("--epoch", help="ISO-8601 timestamp mapped to minute 0")

    p = sub.add_parser("visibility", parents=[common], help="visibility profiles of selected topics")
    p.add_argument("bundle")
    sel = p.add_mutually_exclusive_group(required=True)
    sel.add_argument("--topic", action="append", metavar="ID")
    sel.add_argument("--all", action="store_true")
    p.add_argument("--at", type=float, metavar="D", help="print V at a single level")
    _grid_flags(p)

    p = sub.add_parser("sweep", parents=[common], help="R^2 of log reads on log visibility across the grid")
    p.add_argument("bundle")
    _grid_flags(p)
    p.add_argument("--category", metavar="LABEL")
    p.add_argument("--per-category", action="store_true")
    p.add_argument("--min-topics", type=int, default=argparse.SUPPRESS)
    p.add_argument("--refine", action="store_true", help="golden-section search around the grid maximum")

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic bundle from a config file")
    p.add_argument("config")
    p.add_argument("outdir", nargs="?")

    p = sub.add_parser("report", parents=[common], help="plot-ready data for the four figures")
    p.add_argument("bundle")
    p.add_argument("--figures", default=argparse.SUPPRESS, help="comma list of fig1..fig4")
    p.add_argument("--topics", help="comma list of topic ids for fig1/fig2")
    p.add_argument("--d", dest="fig3_d", type=float, default=argparse.SUPPRESS, help="level for the fig3 scatter")
    _grid_flags(p)
    return parser


def _resolve(args: argparse.Namespace) -> argparse.Namespace:
    args.explicit = set(vars(args))
    for key, value in DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    if args.r_cap < 1:
        raise UsageError("--r-cap must be >= 1")
    return args


def _grid(args) -> tuple[list[float], dict]:
    if not (math.isfinite(args.d_step) and args.d_step > 0):
        raise UsageError(f"--d-step must be positive, got {args.d_step}")
    if args.d_min < 0 or args.d_max < args.d_min:
        raise UsageError(f"need 0 <= --d-min <= --d-max, got [{args.d_min}, {args.d_max}]")
    spec = {"d_min": args.d_min, "d_max": args.d_max, "d_step": args.d_step}
    grid = make_grid(args.d_min, args.d_max, args.d_step)
    spec["n_points"] = len(grid)
    return grid, spec


def _params(args, *keys) -> dict:
    base = {"strict": args.strict, "r_cap": args.r_cap}
    base.update({k: getattr(args, k) for k in keys})
    return base


def _finish(manifest: RunManifest, out: Path, written: list[Path]) -> None:
    for path in written:
        manifest.add_output(path, out)
    atomic_write(out / MANIFEST, dumps_json(manifest.to_dict()))


def _manifest(command: str, params: dict) -> RunManifest:
    return RunManifest(command, params, tool_version=__version__, backend=BACKEND)


def _require_out(args) -> Path:
    if not args.out:
        raise UsageError("--out DIR is required")
    return Path(args.out)


def cmd_ingest(args) -> int:
    out = _require_out(args)
    diags: list[Diagnostic] = []
    epoch = parse_epoch(args.epoch) if args.epoch else None
    manifest = _manifest("ingest", _params(args, "snapshots", "trajectories", "meta", "epoch"))
    if args.snapshots:
        epoch, snaps = merge_snapshot_sources(
            args.snapshots, epoch=epoch, r_cap=args.r_cap, strict=args.strict, diagnostics=diags
        )
        trajectories = snapshots_to_trajectories(snaps, r_cap=args.r_cap, strict=args.strict, diagnostics=diags)
        inputs = list(args.snapshots)
    else:
        trajectories = parse_trajectory_csv(args.trajectories, r_cap=args.r_cap, strict=args.strict, diagnostics=diags)
        inputs = [args.trajectories]
    meta = {}
    if args.meta:
        meta = parse_metadata_csv(args.meta, strict=args.strict, diagnostics=diags)
        inputs.append(args.meta)
    ds = Dataset(trajectories, meta, args.r_cap, epoch)
    preflight = validate_dataset(ds) if args.meta else []
    for path in inputs:
        manifest.add_input(path)
    written = write_bundle(ds, out)
    written.append(write_diagnostics(out, diags, preflight))
    _finish(manifest, out, written)
    print(json.dumps({"topics": len(ds.trajectories), "observations": ds.n_observations, "diagnostics": len(diags)}))
    return 0


def _load(args) -> tuple[Dataset, list[Path]]:
    ds = load_bundle(args.bundle, strict=args.strict)
    return ds, bundle_inputs(args.bundle)


def _safe_name(topic: str) -> str:
    return quote(topic, safe="")


def cmd_visibility(args) -> int:
    ds, inputs = _load(args)
    topics = sorted(ds.trajectories) if args.all else args.topic
    for t in topics:
        if t not in ds.trajectories:
            raise UnknownTopic(f"unknown topic {t!r}")
    if args.at is not None:
        values = [(t, visibility(ds.trajectories[t], args.at)) for t in topics]
        if len(values) == 1:
            text = f"{fmt(values[0][1])}\n"
        else:
            text = "topic_id,visibility\n" + "".join(f"{t},{fmt(v)}\n" for t, v in values)
        grid_spec = {"at": args.at}
        files = {"visibility.csv": text}
    else:
        grid, grid_spec = _grid(args)
        profiles = {t: visibility_profile(ds.trajectories[t], grid) for t in topics}
        if len(topics) == 1:
            text = profile_csv(profiles[topics[0]])
        else:
            text = "topic_id,d,visibility\n" + "".join(
                f"{t},{fmt_d(d)},{fmt(v)}\n" for t in topics for d, v in profiles[t]
            )
        files = {f"profiles/{_safe_name(t)}.csv": profile_csv(p) for t, p in profiles.items()}
    if args.out:
        out = Path(args.out)
        manifest = _manifest("visibility", {**_params(args, "bundle"), "topics": topics, "grid": grid_spec})
        for p in inputs:
            manifest.add_input(p)
        written = [atomic_write(out / name, body) for name, body in files.items()]
        _finish(manifest, out, written)
    sys.stdout.write(text)
    return 0


def cmd_sweep(args) -> int:
    grid, grid_spec = _grid(args)
    ds, inputs = _load(args)
    if args.category is not None:
        ds = restrict_to_category(ds, args.category)
    result = sweep_dmax(ds, grid, refine=args.refine)
    summary = sweep_summary(result, grid_spec)
    if args.category is not None:
        summary["category"] = args.category
    files = {"sweep.csv": sweep_csv(result), "summary.json": dumps_json(summary)}
    if args.per_category:
        if args.min_topics < 3:
            raise UsageError("--min-topics must be >= 3")
        analysis = per_category_sweep(ds, grid, args.min_topics)
        files["categories.csv"] = category_csv(analysis)
        summary["skipped_categories"] = [
            {"category": c, "n_topics": n, "reason": why} for c, n, why in analysis.skipped
        ]
        files["summary.json"] = dumps_json(summary)
    if args.out:
        out = Path(args.out)
        manifest = _manifest(
            "sweep",
            {**_params(args, "bundle", "category", "per_category", "min_topics", "refine"), "grid": grid_spec},
        )
        for p in inputs:
            manifest.add_input(p)
        _finish(manifest, out, [atomic_write(out / n, body) for n, body in files.items()])
    sys.stdout.write(dumps_json(summary))
    return 0


def cmd_synth(args) -> int:
    if args.outdir and getattr(args, "out", None) and args.outdir != args.out:
        raise UsageError("give the output directory once (positional or --out)")
    args.out = args.outdir or args.out
    out = _require_out(args)
    cfg = parse_config(Path(args.config).read_text("utf-8"))
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if "r_cap" in args.explicit:
        cfg = replace(cfg, r_cap=args.r_cap)
    ds = generate_dataset(cfg)
    manifest = _manifest("synth", {**_params(args, "config"), "synth": cfg.as_dict()})
    manifest.parameters["r_cap"] = cfg.r_cap
    manifest.add_input(args.config)
    written = write_bundle(ds, out)
    written.append(atomic_write(out / "truth.json", dumps_json(ground_truth(cfg, ds))))
    written.append(atomic_write(out / "config.resolved.txt", cfg.to_text()))
    _finish(manifest, out, written)
    print(json.dumps({"topics": len(ds.trajectories), "observations": ds.n_observations}))
    return 0


def _default_pair(ds: Dataset) -> list[str]:
    """Longest-lived topic plus the topic with the most time at rank 1."""
    if not ds.trajectories:
        return []
    trajs = sorted(ds.trajectories.values(), key=lambda t: t.topic)
    longest = max(trajs, key=len)
    others = [t for t in trajs if t.topic != longest.topic]
    if not others:
        return [longest.topic]
    top = max(others, key=lambda t: (rank1_dwell(t), visibility(t, 3.0)))
    return [longest.topic, top.topic]


def cmd_report(args) -> int:
    out = _require_out(args)
    figures = [f.strip() for f in args.figures.split(",") if f.strip()]
    unknown = set(figures) - set(FIGURES)
    if unknown:
        raise UsageError(f"unknown figures: {', '.join(sorted(unknown))}")
    grid, grid_spec = _grid(args)
    ds, inputs = _load(args)
    topics = [t.strip() for t in args.topics.split(",")] if args.topics else _default_pair(ds)
    for t in topics:
        if t not in ds.trajectories:
            raise UnknownTopic(f"unknown topic {t!r}")
    files: dict[str, str] = {}
    summary: dict = {"topics": topics, "grid_spec": grid_spec}
    if "fig1" in figures:
        files["fig1.csv"] = "topic_id,t,rank\n" + "".join(
            f"{t},{m},{r}\n" for t in topics for m, r in ds.trajectories[t].pairs()
        )
    if "fig2" in figures:
        files["fig2.csv"] = "topic_id,d,visibility\n" + "".join(
            f"{t},{fmt_d(d)},{fmt(v)}\n" for t in topics for d, v in visibility_profile(ds.trajectories[t], grid)
        )
        if len(topics) >= 2:
            a, b = ds.trajectories[topics[0]], ds.trajectories[topics[1]]
            summary["crossover"] = find_crossover(a, b, grid[0], grid[-1], 1e-9)
    if "fig3" in figures:
        points, _ = filter_regression_points(ds, args.fig3_d)
        fit = ols_loglog(points)
        files["fig3_scatter.csv"] = "log10_v,log10_reads\n" + "".join(
            f"{fmt(math.log10(v))},{fmt(math.log10(r))}\n" for v, r in points
        )
        files["fig3_fit.json"] = dumps_json(
            {"d": args.fig3_d, "slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2, "n": fit.n}
        )
    if "fig4" in figures:
        result = sweep_dmax(ds, grid)
        files["fig4.csv"] = "d,r2\n" + "".join(f"{fmt_d(d)},{fmt(r2)}\n" for d, r2 in result.curve)
        summary["sweep"] = sweep_summary(result, grid_spec)
    files["report.json"] = dumps_json(summary)
    manifest = _manifest(
        "report", {**_params(args, "bundle", "figures", "fig3_d"), "topics": topics, "grid": grid_spec}
    )
    for p in inputs:
        manifest.add_input(p)
    _finish(manifest, out, [atomic_write(out / n, body) for n, body in files.items()])
    sys.stdout.write(dumps_json(summary))
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "visibility": cmd_visibility,
    "sweep": cmd_sweep,
    "synth": cmd_synth,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = _resolve(parser.parse_args(argv))
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"trendvis: error: {exc}", file=sys.stderr)
        return 2
    except (TrendvisError, OSError, ValueError) as exc:
        print(f"trendvis: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
