"""Simulation harness: sample from a reference network, learn, evaluate, tabulate."""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BNError
from .graph import shd
from .model import DiscreteBn, fit_parameters, forward_sample, log_likelihood, n_parameters
from .netio import read_network
from .priors import PriorKind
from .scores import ScoreConfig, ScoreKind
from .search import SearchOptions, hill_climb

logger = logging.getLogger(__name__)

DEFAULT_RATIOS = (0.1, 0.2, 0.5, 1.0, 2.0, 5.0)


@dataclass(frozen=True)
class Cell:
    score: ScoreKind
    prior: PriorKind = PriorKind.U
    alpha: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "score", ScoreKind(self.score))
        object.__setattr__(self, "prior", PriorKind(self.prior))
        object.__setattr__(self, "alpha", float(self.alpha))

    @classmethod
    def parse(cls, spec: str) -> "Cell":
        """Parse ``score[:prior[:alpha]]``, e.g. ``bds:mu:1`` or ``bic``."""
        parts = spec.strip().lower().split(":")
        if not 1 <= len(parts) <= 3 or not parts[0]:
            raise ValueError(f"bad cell specification {spec!r}")
        score = ScoreKind(parts[0])
        prior = PriorKind(parts[1]) if len(parts) > 1 and parts[1] else PriorKind.U
        alpha = float(parts[2]) if len(parts) > 2 else 1.0
        return cls(score, prior, alpha)

    @property
    def label(self) -> str:
        name = {"bic": "BIC", "bdeu": "BDeu", "bds": "BDs", "k2": "K2"}[self.score.value]
        if self.score in (ScoreKind.BDEU, ScoreKind.BDS):
            name += f"({self.alpha:g})"
        return f"{self.prior.value.upper()}+{name}"

    @property
    def config(self) -> ScoreConfig:
        return ScoreConfig(self.score, self.alpha)


DEFAULT_CELLS = (
    Cell(ScoreKind.BIC),
    Cell(ScoreKind.BDEU, PriorKind.U, 1.0),
    Cell(ScoreKind.BDEU, PriorKind.U, 10.0),
    Cell(ScoreKind.BDS, PriorKind.U, 1.0),
    Cell(ScoreKind.BDS, PriorKind.U, 10.0),
    Cell(ScoreKind.BDEU, PriorKind.MU, 1.0),
    Cell(ScoreKind.BDEU, PriorKind.MU, 10.0),
    Cell(ScoreKind.BDS, PriorKind.MU, 1.0),
    Cell(ScoreKind.BDS, PriorKind.MU, 10.0),
)


@dataclass
class BenchmarkPlan:
    network: str | Path | DiscreteBn
    ratios: Sequence[float] = DEFAULT_RATIOS
    replicates: int = 20
    test_size: int = 10000
    cells: Sequence[Cell] = DEFAULT_CELLS
    seed: int = 0
    max_parents: int | None = 8
    min_train: int = 10
    fit_alpha: float = 1.0
    workers: int = 1

    def __post_init__(self):
        if any(not r > 0 for r in self.ratios):
            raise ValueError("ratios must be positive")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if self.test_size < 1:
            raise ValueError("test_size must be at least 1")
        self.cells = tuple(Cell.parse(c) if isinstance(c, str) else c for c in self.cells)
        if not self.cells:
            raise ValueError("at least one cell required")

    def load_network(self) -> DiscreteBn:
        if isinstance(self.network, DiscreteBn):
            return self.network
        return read_network(self.network)


@dataclass
class ResultRow:
    ratio: float
    replicate: int
    cell: str
    n_train: int
    n_test: int
    shd: int | None
    arcs_learned: int | None
    arcs_ratio: float | None
    predictive_ll: float | None
    wall_time: float = 0.0
    error: str = ""


def training_size(ratio: float, p: int, minimum: int = 10) -> int:
    """``round(ratio * p)``, half away from zero, clamped below at ``minimum``."""
    return max(minimum, int(math.floor(ratio * p + 0.5)))


def replicate_seeds(master: int, ratio_index: int, replicate: int):
    """Independent (train, test) seed sequences for one replicate."""
    ss = np.random.SeedSequence(master, spawn_key=(ratio_index, replicate))
    return ss.spawn(2)


def _run_task(args):
    ref, plan, ratio_index, ratio, replicate = args
    p = n_parameters(ref)
    n_train = training_size(ratio, p, plan.min_train)
    train_seed, test_seed = replicate_seeds(plan.seed, ratio_index, replicate)
    train = forward_sample(ref, n_train, train_seed)
    test = forward_sample(ref, plan.test_size, test_seed)
    ref_arcs = len(ref.dag.arcs)
    rows = []
    for cell in plan.cells:
        start = time.perf_counter()
        try:
            dag, _ = hill_climb(train, cell.config, cell.prior, SearchOptions(max_parents=plan.max_parents))
            fitted = fit_parameters(dag, train, plan.fit_alpha)
            row = ResultRow(
                ratio, replicate, cell.label, n_train, plan.test_size,
                shd(dag, ref.dag),
                len(dag.arcs),
                len(dag.arcs) / ref_arcs if ref_arcs else math.nan,
                log_likelihood(fitted, test),
            )
        except BNError as exc:
            logger.warning("cell %s failed at ratio %g replicate %d: %s", cell.label, ratio, replicate, exc)
            row = ResultRow(
                ratio, replicate, cell.label, n_train, plan.test_size,
                None, None, None, None, error=str(exc),
            )
        row.wall_time = time.perf_counter() - start
        rows.append(row)
    return rows


def run_benchmark(plan: BenchmarkPlan) -> list[ResultRow]:
    """Run every (ratio, replicate, cell) combination of ``plan``.

    Training and test samples depend only on the master seed, the ratio
    position and the replicate number; all cells of one replicate share them.
    """
    ref = plan.load_network()
    if n_parameters(ref) <= 0:
        raise ValueError("reference network has no free parameters")
    tasks = [
        (ref, plan, i, ratio, rep)
        for i, ratio in enumerate(plan.ratios)
        for rep in range(plan.replicates)
    ]
    if plan.workers > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            chunks = list(pool.map(_run_task, tasks))
    else:
        chunks = [_run_task(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


# --------------------------------------------------------------------------
# Output

_COLUMNS = ["ratio", "replicate", "cell", "n_train", "n_test", "shd", "arcs_learned", "arcs_ratio", "predictive_ll", "error"]


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_raw_csv(rows: Sequence[ResultRow], path, include_time: bool = False) -> None:
    columns = _COLUMNS + (["wall_time"] if include_time else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(getattr(row, c)) for c in columns])


def read_raw_csv(path) -> list[ResultRow]:
    types = {f.name: f.type for f in fields(ResultRow)}
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            kw = {}
            for name, value in rec.items():
                if name not in types:
                    continue
                if name in ("cell", "error"):
                    kw[name] = value
                elif value == "":
                    kw[name] = None
                elif name in ("replicate", "n_train", "n_test", "shd", "arcs_learned"):
                    kw[name] = int(value)
                else:
                    kw[name] = float(value)
            rows.append(ResultRow(**kw))
    return rows


METRICS = {
    "shd": ("Average SHD distance from the reference DAG (lower is better)", lambda r: r.shd, 2),
    "arcs": ("Average number of arcs, rescaled by the reference arc count (closer to 1 is better)",
             lambda r: r.arcs_ratio, 3),
    "loglik": ("Average predictive log-likelihood per test row, sign flipped (lower is better)",
               lambda r: -r.predictive_ll / r.n_test, 4),
}


def aggregate(rows: Sequence[ResultRow], metric: str) -> dict[tuple[float, str], float]:
    """Mean of ``metric`` over successful replicates, keyed by (ratio, cell)."""
    _, get, _ = METRICS[metric]
    groups: dict[tuple[float, str], list[float]] = {}
    for row in rows:
        if row.error:
            continue
        groups.setdefault((row.ratio, row.cell), []).append(get(row))
    return {key: float(np.mean(values)) for key, values in groups.items()}


def markdown_table(rows: Sequence[ResultRow], metric: str) -> str:
    title, _, digits = METRICS[metric]
    means = aggregate(rows, metric)
    ratios = sorted({r.ratio for r in rows})
    cells = list(dict.fromkeys(r.cell for r in rows))
    lines = [f"<!-- {title} -->", "| n/p | " + " | ".join(cells) + " |", "|---:|" + "---:|" * len(cells)]
    for ratio in ratios:
        vals = []
        for cell in cells:
            v = means.get((ratio, cell))
            vals.append("error" if v is None else f"{v:.{digits}f}")
        lines.append(f"| {ratio:g} | " + " | ".join(vals) + " |")
    return "\n".join(lines) + "\n"


def emit_tables(rows: Sequence[ResultRow], out_dir, include_time: bool = False) -> dict[str, Path]:
    """Write ``raw.csv``, ``shd.md``, ``arcs.md`` and ``loglik.md`` into ``out_dir``."""
    if not rows:
        raise ValueError("no results to write")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"raw": out / "raw.csv"}
    write_raw_csv(rows, paths["raw"], include_time)
    for metric in ("shd", "arcs", "loglik"):
        paths[metric] = out / f"{metric}.md"
        paths[metric].write_text(markdown_table(rows, metric), encoding="utf-8")
    return paths
