"""On-disk dataset bundles and CSV exports.

A bundle is a directory holding ``trajectories.csv``, ``meta.csv`` and
``dataset.json`` (``r_cap`` and epoch). Every file is written to a
temporary name and renamed into place.
"""

from __future__ import annotations

import io
import json
import os
import tempfile
from collections.abc import Iterable
from pathlib import Path

from .ingest import (
    format_timestamp,
    parse_metadata_csv,
    parse_trajectory_csv,
    write_metadata_csv,
    write_trajectory_csv,
)
from .model import Dataset, Diagnostic, parse_epoch
from .regression import CategoryAnalysis, SweepResult

TRAJECTORIES = "trajectories.csv"
META = "meta.csv"
DATASET = "dataset.json"
DIAGNOSTICS = "diagnostics.json"


def atomic_write(path: str | os.PathLike, data: str | bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = data.encode("utf-8") if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def fmt(x: float) -> str:
    """Full double precision: 17 significant digits."""
    return format(float(x), ".17g")


def fmt_d(d: float) -> str:
    return repr(float(d))


def dataset_csv_texts(ds: Dataset) -> dict[str, str]:
    traj, meta = io.StringIO(), io.StringIO()
    write_trajectory_csv(dict(ds.trajectories), traj)
    write_metadata_csv(dict(ds.meta), meta)
    info = {"r_cap": ds.r_cap, "epoch": None if ds.epoch is None else format_timestamp(ds.epoch)}
    return {TRAJECTORIES: traj.getvalue(), META: meta.getvalue(), DATASET: dumps_json(info)}


def write_bundle(ds: Dataset, out_dir: str | os.PathLike) -> list[Path]:
    out_dir = Path(out_dir)
    return [atomic_write(out_dir / name, text) for name, text in dataset_csv_texts(ds).items()]


def write_diagnostics(out_dir: str | os.PathLike, diagnostics: Iterable[Diagnostic], preflight: Iterable[Diagnostic] = ()) -> Path:
    diags = [d.as_dict() for d in diagnostics]
    payload = {"count": len(diags), "diagnostics": diags, "preflight": [d.as_dict() for d in preflight]}
    return atomic_write(Path(out_dir) / DIAGNOSTICS, dumps_json(payload))


def bundle_inputs(path: str | os.PathLike) -> list[Path]:
    path = Path(path)
    return [p for p in (path / DATASET, path / TRAJECTORIES, path / META) if p.exists()]


def load_bundle(
    path: str | os.PathLike,
    *,
    strict: bool = False,
    diagnostics: list[Diagnostic] | None = None,
) -> Dataset:
    path = Path(path)
    if not (path / TRAJECTORIES).exists():
        raise FileNotFoundError(f"{path} is not a dataset bundle (no {TRAJECTORIES})")
    info = json.loads((path / DATASET).read_text("utf-8")) if (path / DATASET).exists() else {}
    r_cap = int(info.get("r_cap", 50))
    epoch = info.get("epoch")
    trajectories = parse_trajectory_csv(path / TRAJECTORIES, r_cap=r_cap, strict=strict, diagnostics=diagnostics)
    meta = {}
    if (path / META).exists():
        meta = parse_metadata_csv(path / META, strict=strict, diagnostics=diagnostics)
    return Dataset(trajectories, meta, r_cap, None if epoch is None else parse_epoch(epoch))


def profile_csv(profile: Iterable[tuple[float, float]]) -> str:
    return "d,visibility\n" + "".join(f"{fmt_d(d)},{fmt(v)}\n" for d, v in profile)


def sweep_csv(result: SweepResult) -> str:
    return "d,r2,n\n" + "".join(f"{fmt_d(d)},{fmt(r2)},{result.n}\n" for d, r2 in result.curve)


def sweep_summary(result: SweepResult, grid_spec: dict) -> dict:
    out = {
        "d_max": result.d_max,
        "r2_max": result.r2_max,
        "boundary": result.boundary.value,
        "n": result.n,
        "grid_spec": grid_spec,
    }
    if result.refined is not None:
        out["refined"] = {"d": result.refined[0], "r2": result.refined[1]}
    return out


def category_csv(analysis: CategoryAnalysis) -> str:
    rows = "".join(
        f"{r.category},{fmt(r.r2_max)},{fmt_d(r.d_max)},{r.n_topics},{r.boundary.value}\n"
        for r in analysis.reports
    )
    return "category,r2_max,d_max,n_topics,boundary\n" + rows
