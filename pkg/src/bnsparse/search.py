"""Greedy hill climbing over DAGs and an exhaustive oracle for small networks."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import ResourceLimit
from .graph import Dag, Move, MoveKind, apply_move, enumerate_dags, valid_moves
from .priors import PriorKind, log_prior, log_prior_ratio
from .scores import ScoreCache, ScoreConfig, network_score, score_delta

logger = logging.getLogger(__name__)

CONVERGED = "converged"
ITERATION_CAPPED = "iteration-capped"


@dataclass
class SearchOptions:
    max_parents: int | None = None
    max_iterations: int | None = None  # None -> 10 * N**2
    epsilon: float = 0.0
    restarts: int = 0
    seed: int | None = None
    perturb: int | None = None  # random arc additions per restart; None -> N

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        for name in ("max_parents", "max_iterations", "perturb"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{name} must be positive")
        if self.restarts < 0:
            raise ValueError("restarts must be non-negative")


@dataclass(frozen=True)
class TraceStep:
    restart: int
    move: Move
    delta: float
    score: float


@dataclass
class SearchTrace:
    steps: list[TraceStep] = field(default_factory=list)
    status: str = CONVERGED
    initial_score: float = 0.0
    final_score: float = 0.0
    restart_scores: list[float] = field(default_factory=list)

    def to_text(self) -> str:
        lines = ["restart\tmove\tdelta\tscore"]
        lines += [f"{s.restart}\t{s.move}\t{s.delta!r}\t{s.score!r}" for s in self.steps]
        lines.append(f"# status {self.status}")
        lines.append(f"# final_score {self.final_score!r}")
        return "\n".join(lines) + "\n"


def objective(g: Dag, data: Dataset, cfg: ScoreConfig, prior, cache: ScoreCache | None = None) -> float:
    """Log score plus log prior (relative to the empty graph)."""
    return network_score(g, data, cfg, cache) + log_prior(prior, g)


def move_gain(g, m, data, cfg, prior, cache) -> float:
    return score_delta(g, m, data, cfg, cache) + log_prior_ratio(prior, m)


def best_move(g, data, cfg, prior, cache, max_parents=None):
    """Highest-gain valid move; the first in tie-break order wins ties."""
    best, best_gain = None, -np.inf
    for m in valid_moves(g, max_parents):
        gain = move_gain(g, m, data, cfg, prior, cache)
        if gain > best_gain:
            best, best_gain = m, gain
    return best, best_gain


def improving_moves(g, data, cfg, prior, cache=None, max_parents=None, epsilon=0.0):
    """Moves whose gain exceeds ``epsilon``; empty at a local optimum."""
    cache = cache if cache is not None else ScoreCache(data, cfg)
    return [
        m
        for m in valid_moves(g, max_parents)
        if move_gain(g, m, data, cfg, prior, cache) > epsilon
    ]


def _climb(start, data, cfg, prior, cache, opts, max_iter, restart, trace):
    g = start
    score = objective(g, data, cfg, prior, cache)
    for _ in range(max_iter):
        m, gain = best_move(g, data, cfg, prior, cache, opts.max_parents)
        if m is None or not gain > opts.epsilon:
            return g, score, CONVERGED
        g = apply_move(g, m)
        score = objective(g, data, cfg, prior, cache)
        trace.steps.append(TraceStep(restart, m, gain, score))
    m, gain = best_move(g, data, cfg, prior, cache, opts.max_parents)
    status = CONVERGED if m is None or not gain > opts.epsilon else ITERATION_CAPPED
    return g, score, status


def _perturb(g: Dag, rng, count: int, max_parents) -> Dag:
    for _ in range(count):
        adds = [m for m in valid_moves(g, max_parents) if m.kind is MoveKind.ADD]
        if not adds:
            break
        g = apply_move(g, adds[int(rng.integers(len(adds)))])
    return g


def hill_climb(
    data: Dataset,
    cfg: ScoreConfig,
    prior=PriorKind.U,
    opts: SearchOptions | None = None,
    cache: ScoreCache | None = None,
) -> tuple[Dag, SearchTrace]:
    """Maximise log score + log prior from the empty DAG by single-arc moves.

    Each iteration applies the best move if its gain exceeds ``opts.epsilon``.
    With ``opts.restarts > 0`` the incumbent is perturbed by random arc
    additions and re-climbed; the best-scoring graph is kept.
    """
    opts = opts or SearchOptions()
    prior = PriorKind(prior)
    cache = cache if cache is not None else ScoreCache(data, cfg)
    n = data.n_vars
    max_iter = opts.max_iterations if opts.max_iterations is not None else 10 * n * n
    trace = SearchTrace()
    empty = Dag(n)
    trace.initial_score = objective(empty, data, cfg, prior, cache)

    best, best_score, status = _climb(empty, data, cfg, prior, cache, opts, max_iter, 0, trace)
    trace.restart_scores.append(best_score)
    statuses = [status]
    if opts.restarts:
        rng = np.random.default_rng(opts.seed)
        count = opts.perturb if opts.perturb is not None else max(n, 1)
        for r in range(1, opts.restarts + 1):
            start = _perturb(best, rng, count, opts.max_parents)
            g, score, status = _climb(start, data, cfg, prior, cache, opts, max_iter, r, trace)
            trace.restart_scores.append(score)
            statuses.append(status)
            if score > best_score:
                best, best_score = g, score
    trace.status = CONVERGED if all(s == CONVERGED for s in statuses) else ITERATION_CAPPED
    trace.final_score = best_score
    logger.debug("hill climbing finished: %d steps, status %s", len(trace.steps), trace.status)
    return best, trace


@dataclass(frozen=True)
class MapResult:
    dag: Dag
    score: float
    runner_up: Dag | None
    gap: float  # best minus runner-up objective; 0.0 on an exact tie


def exhaustive_map(data: Dataset, cfg: ScoreConfig, prior=PriorKind.U, max_nodes: int = 5) -> MapResult:
    """Global maximiser of log score + log prior over all DAGs (``N <= 5``).

    Exact ties go to the graph with fewer arcs, then the lexicographically
    smallest sorted arc list.
    """
    n = data.n_vars
    if n > max_nodes:
        raise ResourceLimit(f"exhaustive search limited to {max_nodes} nodes, got {n}")
    cache = ScoreCache(data, cfg)
    ranked = sorted(
        ((objective(g, data, cfg, prior, cache), g) for g in enumerate_dags(n)),
        key=lambda item: (-item[0], len(item[1].arcs), sorted(item[1].arcs)),
    )
    score, dag = ranked[0]
    if len(ranked) == 1:
        return MapResult(dag, score, None, np.inf)
    runner_score, runner = ranked[1]
    return MapResult(dag, score, runner, score - runner_score)
