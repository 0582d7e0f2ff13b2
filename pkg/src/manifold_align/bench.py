"""Experiment sweeps: build dataset pairs per grid cell, score them, emit CSV rows."""

from __future__ import annotations

import io
import logging
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import synthgen
from ._accel import worker_count
from .alignment import cka, cka_linear, kendall_tau, mka_fast
from .kernels import SigmaPolicy, knn_rbf_from_distances, rbf_from_distances, symmetrize_tconorm
from .matrix_io import as_matrix, format_float
from .neighbors import knn_graph, manifold_kernel_from_graph, pairwise_distances

log = logging.getLogger(__name__)

SCHEMA = "manifold-align v1"
COLUMNS = (
    "row_type", "experiment", "metric", "k", "delta", "r", "t", "d", "n",
    "stage", "c", "seed", "score", "elapsed_ms",
)
K_METRICS = ("mka", "kcka", "cka-sym")
ALL_METRICS = K_METRICS + ("cka", "cka-rbf")
EXPERIMENTS = (
    "swiss-s", "rings", "clusters", "gauss-perturb", "gauss-lost",
    "uniform-translate", "sigma-convergence",
)
DEFAULT_SEEDS = (1, 2, 3, 4, 5)
SIGMA_MULTIPLIERS = (1.0, 3.0, 10.0, 30.0, 100.0)


def derive_seed(seed: int, stream: int) -> int:
    """Independent child seed for a secondary random stream (noise, second spot)."""
    return int(np.random.SeedSequence([int(seed), int(stream)]).generate_state(1, np.uint64)[0])


def parse_grid(text: str, cast=float) -> list:
    """Parse ``a,b,c`` and/or ``start:stop:step`` (stop inclusive within 1e-12)."""
    values = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            bits = part.split(":")
            if len(bits) != 3:
                raise ValueError(f"bad range {part!r}; expected start:stop:step")
            start, stop, step = (float(b) for b in bits)
            if step <= 0:
                raise ValueError(f"range step must be positive in {part!r}")
            i = 0
            while start + i * step <= stop + 1e-12:
                v = round(start + i * step, 12)
                values.append(_strict_int(v) if cast is int else cast(v))
                i += 1
        else:
            values.append(_strict_int(part) if cast is int else cast(part))
    if not values:
        raise ValueError(f"empty grid {text!r}")
    return values


def _strict_int(v) -> int:
    f = float(v)
    if not f.is_integer():
        raise ValueError(f"expected an integer, got {v!r}")
    return int(f)


@dataclass
class BenchConfig:
    experiment: str
    n: int | None = None
    d: int | None = None
    k: list = field(default_factory=list)
    r: list = field(default_factory=list)
    t: list = field(default_factory=list)
    c: list = field(default_factory=list)
    delta: list = field(default_factory=list)
    scale: float = 0.5
    metrics: list = field(default_factory=list)
    seeds: list = field(default_factory=lambda: list(DEFAULT_SEEDS))
    rbf_squared: bool | None = None
    kcka_zero_diagonal: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        dflt = {"rbf_squared": False, **_DEFAULTS[self.experiment]}
        for name, value in dflt.items():
            if getattr(self, name) in (None, []):
                setattr(self, name, list(value) if isinstance(value, (list, tuple)) else value)
        unknown = set(self.metrics) - set(ALL_METRICS)
        if unknown:
            raise ValueError(f"unknown metric(s) {sorted(unknown)}; choose from {', '.join(ALL_METRICS)}")
        if not self.seeds:
            raise ValueError("need at least one seed")


_DEFAULTS = {
    "swiss-s": dict(n=1000, r=np.round(np.arange(0.30, 0.70 + 1e-9, 0.05), 12).tolist(),
                    k=[10, 15, 25, 50, 100, 200, 300, 400], metrics=["mka"]),
    "rings": dict(n=500, k=[10, 50, 100, 200, 400], metrics=["mka"]),
    "clusters": dict(n=300, k=[10, 50, 100, 200, 400], c=list(range(1, 13)), metrics=["mka"]),
    "gauss-perturb": dict(n=1000, d=100, k=[10, 25, 50, 100, 200], metrics=["mka"]),
    "gauss-lost": dict(n=1000, d=100, k=[10, 25, 50, 100, 200], metrics=["mka"]),
    "uniform-translate": dict(n=500, d=100, t=[1.0, 10.0, 50.0], k=[100], metrics=["mka"]),
    "sigma-convergence": dict(n=300, d=20, delta=list(SIGMA_MULTIPLIERS), metrics=["cka-rbf", "cka"],
                              rbf_squared=True),
}


class Prepared:
    """Distances and a k-NN graph for one matrix, shared across metrics and k."""

    def __init__(self, x, k_max: int | None):
        self.x = as_matrix(x)
        self.d = pairwise_distances(self.x)
        self._graph = knn_graph(self.d, k_max) if k_max else None
        self._manifold = {}

    def manifold(self, k: int):
        if k not in self._manifold:
            self._manifold[k] = manifold_kernel_from_graph(self._graph.truncate(k))
        return self._manifold[k]


def score_metric(metric: str, px: Prepared, py: Prepared, k=None, policy=None,
                 squared=False, zero_diagonal=False) -> float:
    if metric == "mka":
        return mka_fast(px.manifold(k), py.manifold(k))
    if metric == "cka-sym":
        return cka(symmetrize_tconorm(px.manifold(k)), symmetrize_tconorm(py.manifold(k)))
    if metric == "kcka":
        return cka(
            knn_rbf_from_distances(px.d, k, zero_diagonal).to_dense(),
            knn_rbf_from_distances(py.d, k, zero_diagonal).to_dense(),
        )
    if metric == "cka":
        return cka_linear(px.x, py.x)
    if metric == "cka-rbf":
        policy = policy or SigmaPolicy.median()
        return cka(
            rbf_from_distances(px.d, policy.resolve(px.d), squared),
            rbf_from_distances(py.d, policy.resolve(py.d), squared),
        )
    raise ValueError(f"unknown metric {metric!r}")


@dataclass
class Cell:
    """One dataset pair in the sweep; ``config`` fills the CSV config columns."""

    config: dict
    seed: int


def _cells(cfg: BenchConfig) -> list[Cell]:
    e = cfg.experiment
    cells = []
    for seed in cfg.seeds:
        if e == "swiss-s":
            cells += [Cell(dict(r=r, n=cfg.n), seed) for r in cfg.r]
        elif e == "rings":
            cells += [Cell(dict(stage=s, n=cfg.n), seed) for s in (5, 4, 3, 2, 1)]
        elif e == "clusters":
            cells += [Cell(dict(c=c, n=cfg.n), seed) for c in cfg.c]
        elif e in ("gauss-perturb", "gauss-lost"):
            cells.append(Cell(dict(n=cfg.n, d=cfg.d), seed))
        elif e == "uniform-translate":
            cells += [Cell(dict(t=t, d=cfg.d, n=2 * cfg.n), seed) for t in cfg.t]
        elif e == "sigma-convergence":
            cells.append(Cell(dict(n=cfg.n, d=cfg.d), seed))
    return cells


def build_pair(cfg: BenchConfig, cell: Cell):
    e, s, cc = cfg.experiment, cell.seed, cell.config
    if e == "swiss-s":
        return synthgen.gen_swiss_roll(cfg.n, s)[0], synthgen.gen_s_curve(cfg.n, cc["r"], s)[0]
    if e == "rings":
        return synthgen.gen_rings(cfg.n, 5, s), synthgen.gen_rings(cfg.n, cc["stage"], s)
    if e == "clusters":
        return synthgen.gen_clusters(cfg.n, 1, s), synthgen.gen_clusters(cfg.n, cc["c"], s)
    if e == "gauss-perturb":
        x = synthgen.gen_gaussian_spot(cfg.n, cfg.d, s)
        return x, synthgen.perturb(x, cfg.scale, derive_seed(s, 1))
    if e == "gauss-lost":
        return synthgen.lost_correspondence(cfg.n, cfg.d, s, derive_seed(s, 2))
    if e == "uniform-translate":
        return (synthgen.gen_uniform_two_spots(cfg.n, cfg.d, 0.0, s),
                synthgen.gen_uniform_two_spots(cfg.n, cfg.d, cc["t"], s))
    if e == "sigma-convergence":
        return (synthgen.gen_gaussian_spot(cfg.n, cfg.d, s),
                synthgen.gen_gaussian_spot(cfg.n, cfg.d, derive_seed(s, 3)))
    raise ValueError(e)


def effective_k(ks, n: int) -> list[int]:
    out = []
    for k in ks:
        k = int(k)
        if k > n - 1:
            log.warning("k=%d exceeds n-1=%d; using k=%d", k, n - 1, n - 1)
            k = n - 1
        if k < 2:
            raise ValueError(f"k={k} below 2")
        if k not in out:
            out.append(k)
    return out


@dataclass
class ResultRow:
    row_type: str
    experiment: str
    metric: str
    score: float
    config: dict = field(default_factory=dict)
    seed: int | None = None
    elapsed_ms: float | None = None

    def cells(self) -> list[str]:
        vals = dict(self.config)
        vals.update(row_type=self.row_type, experiment=self.experiment, metric=self.metric,
                    seed=self.seed, score=self.score, elapsed_ms=self.elapsed_ms)
        out = []
        for col in COLUMNS:
            v = vals.get(col)
            if v is None:
                out.append("")
            elif col == "elapsed_ms":
                out.append(f"{v:.3f}")
            elif isinstance(v, float):
                out.append(format_float(v))
            else:
                out.append(str(v))
        return out


def _run_cell(cfg: BenchConfig, cell: Cell) -> list[ResultRow]:
    x, y = build_pair(cfg, cell)
    n = x.n_samples
    wants_k = [m for m in cfg.metrics if m in K_METRICS]
    ks = effective_k(cfg.k, n) if wants_k else []
    k_max = max(ks) if ("mka" in wants_k or "cka-sym" in wants_k) else None
    px, py = Prepared(x, k_max), Prepared(y, k_max)
    rows = []

    def emit(metric, extra, **kw):
        t0 = time.perf_counter()
        value = score_metric(metric, px, py, squared=cfg.rbf_squared,
                             zero_diagonal=cfg.kcka_zero_diagonal, **kw)
        ms = (time.perf_counter() - t0) * 1e3
        if not np.isfinite(value):
            raise FloatingPointError(f"non-finite {metric} score for {cell.config}, seed {cell.seed}")
        rows.append(ResultRow("score", cfg.experiment, metric, value,
                              {**cell.config, **extra}, cell.seed, ms))

    for metric in cfg.metrics:
        if metric in K_METRICS:
            for k in ks:
                emit(metric, {"k": k}, k=k)
        elif metric == "cka-rbf":
            deltas = cfg.delta or [None]
            for delta in deltas:
                policy = SigmaPolicy.median() if delta is None else SigmaPolicy.scaled_median(delta)
                emit(metric, {"delta": delta}, policy=policy)
        else:
            emit(metric, {})
    return rows


def _summaries(cfg: BenchConfig, rows: list[ResultRow]) -> list[ResultRow]:
    out = []
    groups = {}
    for row in rows:
        key = (row.metric, tuple(sorted(row.config.items())))
        groups.setdefault(key, []).append(row.score)
    for (metric, items), scores in groups.items():
        conf = dict(items)
        out.append(ResultRow("mean", cfg.experiment, metric, float(np.mean(scores)), conf))
        out.append(ResultRow("std", cfg.experiment, metric, float(np.std(scores)), conf))
    if cfg.experiment in ("rings", "clusters"):
        axis = "stage" if cfg.experiment == "rings" else "c"
        by_metric = {}
        for (metric, items), scores in groups.items():
            conf = dict(items)
            level = conf.pop(axis)
            by_metric.setdefault((metric, tuple(sorted(conf.items()))), []).append(
                (level, float(np.mean(scores)))
            )
        for (metric, items), pairs in by_metric.items():
            levels = [p[0] for p in pairs]
            means = [p[1] for p in pairs]
            if len(pairs) >= 2 and len(set(means)) > 1:
                tau = kendall_tau(levels, means)
                out.append(ResultRow("tau", cfg.experiment, metric, tau, dict(items)))
    return out


def run(cfg: BenchConfig) -> list[ResultRow]:
    """Score every (config, seed) cell; rows come back in grid order."""
    cells = _cells(cfg)
    workers = min(worker_count(), len(cells))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_cell = list(pool.map(lambda c: _run_cell(cfg, c), cells))
    else:
        per_cell = [_run_cell(cfg, c) for c in cells]
    rows = [r for chunk in per_cell for r in chunk]
    return rows + _summaries(cfg, rows)


def to_csv(cfg: BenchConfig, rows: list[ResultRow]) -> str:
    buf = io.StringIO()
    buf.write(f"# {SCHEMA} {cfg.experiment}\n")
    buf.write(",".join(COLUMNS) + "\n")
    for row in rows:
        buf.write(",".join(row.cells()) + "\n")
    return buf.getvalue()


def write_csv(cfg: BenchConfig, path) -> list[ResultRow]:
    """Run the sweep and write it atomically; nothing is left behind on failure."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=".bench-", suffix=".csv", dir=path.parent or ".")
    os.close(fd)
    try:
        rows = run(cfg)
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(to_csv(cfg, rows))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return rows


def read_csv(path) -> list[dict]:
    """Parse an emitted result CSV into dicts (skips the schema comment)."""
    import csv

    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))
