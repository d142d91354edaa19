"""Synthetic trajectories and read counts with known ground truth.

Each topic follows a reflected integer random walk on ranks
``1 .. r_cap + latent_depth``; minutes spent below ``r_cap`` are not
recorded, which produces the same gap structure as a real top-list crawl.
Reads are ``round(c * V(d_star) ** b * 10 ** eps)`` with
``eps ~ Normal(0, sigma)``, floored at 1.

Topic ``i`` draws from its own child of ``SeedSequence(seed)``, so the
output does not depend on generation order.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import InvalidConfig
from .model import DEFAULT_R_CAP, Dataset, TopicMeta, Trajectory, parse_epoch
from .visibility import visibility

DEFAULT_EPOCH = "2000-01-01T00:00:00Z"
DEFAULT_CATEGORY = "unknown"


@dataclass(frozen=True)
class CategorySpec:
    label: str
    weight: float = 1.0
    d_star: float | None = None


@dataclass(frozen=True)
class SynthConfig:
    n_topics: int = 1000
    seed: int = 0
    r_cap: int = DEFAULT_R_CAP
    # rank walk
    entry_alpha: float = 1.0  # entry rank pmf proportional to r ** -entry_alpha
    step_sd: float = 2.0
    step_drift: float = 0.2  # mean per-minute rank change (positive drifts down the list)
    exit_prob: float = 0.01
    max_duration: int = 600
    latent_depth: int = 50  # off-list ranks the walk may wander through
    start_span: int = 10080
    # read model
    c: float = 1e6
    b: float = 1.0
    d_star: float = 1.0
    sigma: float = 0.0
    categories: tuple[CategorySpec, ...] = ()
    epoch: str = DEFAULT_EPOCH

    def __post_init__(self) -> None:
        checks = [
            (self.n_topics >= 1, "n_topics must be >= 1"),
            (0 <= self.seed < 2**64, "seed must fit in 64 bits"),
            (self.r_cap >= 1, "r_cap must be >= 1"),
            (math.isfinite(self.entry_alpha), "entry_alpha must be finite"),
            (self.step_sd >= 0, "step_sd must be >= 0"),
            (math.isfinite(self.step_drift), "step_drift must be finite"),
            (0 < self.exit_prob <= 1, "exit_prob must be in (0, 1]"),
            (self.max_duration >= 1, "max_duration must be >= 1"),
            (self.latent_depth >= 0, "latent_depth must be >= 0"),
            (self.start_span >= 0, "start_span must be >= 0"),
            (self.c > 0 and math.isfinite(self.c), "c must be positive"),
            (self.b > 0 and math.isfinite(self.b), "b must be positive"),
            (self.d_star >= 0 and math.isfinite(self.d_star), "d_star must be >= 0"),
            (self.sigma >= 0 and math.isfinite(self.sigma), "sigma must be >= 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise InvalidConfig(msg)
        labels = [cat.label for cat in self.categories]
        if len(set(labels)) != len(labels):
            raise InvalidConfig("duplicate category label")
        for cat in self.categories:
            if not cat.label or any(ch in cat.label for ch in ",:\n"):
                raise InvalidConfig(f"bad category label {cat.label!r}")
            if not cat.weight > 0:
                raise InvalidConfig(f"category {cat.label!r} weight must be positive")
            if cat.d_star is not None and not cat.d_star >= 0:
                raise InvalidConfig(f"category {cat.label!r} d_star must be >= 0")
        try:
            parse_epoch(self.epoch)
        except ValueError as exc:
            raise InvalidConfig(f"bad epoch {self.epoch!r}") from exc

    def resolved_categories(self) -> tuple[CategorySpec, ...]:
        if not self.categories:
            return (CategorySpec(DEFAULT_CATEGORY, 1.0, self.d_star),)
        return tuple(
            CategorySpec(c.label, c.weight, self.d_star if c.d_star is None else c.d_star)
            for c in self.categories
        )

    def to_text(self) -> str:
        """Flat ``key = value`` form accepted by :func:`parse_config`."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "categories":
                if not value:
                    continue
                value = ", ".join(
                    f"{c.label}:{c.weight!r}" + ("" if c.d_star is None else f":{c.d_star!r}")
                    for c in value
                )
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        d = asdict(self)
        d["categories"] = [asdict(c) for c in self.categories]
        return d


def _parse_categories(text: str) -> tuple[CategorySpec, ...]:
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        parts = [p.strip() for p in item.split(":")]
        if len(parts) not in (1, 2, 3):
            raise InvalidConfig(f"bad category entry {item!r}")
        weight = float(parts[1]) if len(parts) > 1 else 1.0
        d_star = float(parts[2]) if len(parts) > 2 else None
        out.append(CategorySpec(parts[0], weight, d_star))
    return tuple(out)


def parse_config(text: str) -> SynthConfig:
    """Read a flat ``key = value`` config; ``#`` starts a comment."""
    types = {f.name: f.type for f in fields(SynthConfig)}
    kwargs: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (s.strip() for s in line.partition("="))
        if not sep:
            raise InvalidConfig(f"line {lineno}: expected key = value")
        if key not in types:
            raise InvalidConfig(f"line {lineno}: unknown key {key!r}")
        try:
            if key == "categories":
                kwargs[key] = _parse_categories(value)
            elif types[key] == "int":
                kwargs[key] = int(value)
            elif types[key] == "float":
                kwargs[key] = float(value)
            else:
                kwargs[key] = value
        except ValueError as exc:
            raise InvalidConfig(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return SynthConfig(**kwargs)


def _allocate(n: int, weights: list[float]) -> list[int]:
    """Split ``n`` into integer counts proportional to ``weights`` (largest remainder)."""
    total = sum(weights)
    quotas = [n * w / total for w in weights]
    counts = [int(math.floor(q)) for q in quotas]
    order = sorted(range(len(weights)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[: n - sum(counts)]:
        counts[i] += 1
    return counts


def _entry_pmf(cfg: SynthConfig) -> np.ndarray:
    p = np.arange(1, cfg.r_cap + 1, dtype=np.float64) ** -cfg.entry_alpha
    return p / p.sum()


def rank_walk(cfg: SynthConfig, rng: np.random.Generator, pmf: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """One topic's recorded (times, ranks)."""
    if pmf is None:
        pmf = _entry_pmf(cfg)
    start = int(rng.integers(0, cfg.start_span + 1))
    duration = min(int(rng.geometric(cfg.exit_prob)), cfg.max_duration)
    entry = int(rng.choice(cfg.r_cap, p=pmf))  # zero-based
    steps = np.rint(rng.normal(cfg.step_drift, cfg.step_sd, duration - 1)).astype(np.int64)
    pos = entry + np.concatenate(([0], np.cumsum(steps)))
    top = cfg.r_cap + cfg.latent_depth - 1
    if top == 0:
        pos = np.zeros_like(pos)
    else:
        # folding an unbounded walk reflects it at 0 and `top`
        pos = np.mod(pos, 2 * top)
        pos = np.where(pos > top, 2 * top - pos, pos)
    ranks = pos + 1
    recorded = ranks <= cfg.r_cap
    times = start + np.arange(duration, dtype=np.int64)
    return times[recorded], ranks[recorded]


def generate_dataset(cfg: SynthConfig) -> Dataset:
    """Deterministic synthetic dataset for ``cfg``."""
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.n_topics + 1)
    cats = cfg.resolved_categories()
    labels = [
        cat for cat, k in zip(cats, _allocate(cfg.n_topics, [c.weight for c in cats])) for _ in range(k)
    ]
    assign = np.random.default_rng(children[0]).permutation(cfg.n_topics)
    width = len(str(cfg.n_topics - 1))
    pmf = _entry_pmf(cfg)
    trajectories, meta = {}, {}
    for i in range(cfg.n_topics):
        rng = np.random.default_rng(children[i + 1])
        topic = f"s{i:0{width}d}"
        times, ranks = rank_walk(cfg, rng, pmf)
        traj = Trajectory(topic, times, ranks, cfg.r_cap)
        cat = labels[int(assign[i])]
        eps = cfg.sigma * float(rng.standard_normal())
        reads = max(1, int(round(cfg.c * visibility(traj, cat.d_star) ** cfg.b * 10.0**eps)))
        trajectories[topic] = traj
        meta[topic] = TopicMeta(topic, cat.label, reads)
    return Dataset(trajectories, meta, cfg.r_cap, parse_epoch(cfg.epoch))


def ground_truth(cfg: SynthConfig, ds: Dataset | None = None) -> dict:
    """Sidecar record of the generating parameters per category."""
    counts: dict[str, int] = {}
    if ds is not None:
        for m in ds.meta.values():
            counts[m.category] = counts.get(m.category, 0) + 1
    return {
        "seed": cfg.seed,
        "n_topics": cfg.n_topics,
        "categories": [
            {
                "category": c.label,
                "d_star": c.d_star,
                "b": cfg.b,
                "c": cfg.c,
                "sigma": cfg.sigma,
                "seed": cfg.seed,
                "weight": c.weight,
                **({"n_topics": counts.get(c.label, 0)} if ds is not None else {}),
            }
            for c in cfg.resolved_categories()
        ],
    }


__all__ = [
    "CategorySpec",
    "SynthConfig",
    "generate_dataset",
    "ground_truth",
    "oracle_sweep",
    "parse_config",
    "rank_walk",
]

from .oracle import oracle_sweep  # noqa: E402
