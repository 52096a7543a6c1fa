"""Decomposable log scores for discrete Bayesian networks.

All scores follow the convention larger = better and are on the log scale.
Graph priors are not included here; see :mod:`bnsparse.priors`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from .data import MAX_CONFIGS, ContingencyTable, Dataset, count_contingency
from .errors import DimensionError
from .graph import Dag, Move, MoveKind, check_move


class ScoreKind(str, Enum):
    BIC = "bic"
    BDEU = "bdeu"
    BDS = "bds"
    K2 = "k2"


@dataclass(frozen=True)
class ScoreConfig:
    kind: ScoreKind = ScoreKind.BDEU
    alpha: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ScoreKind(self.kind))
        object.__setattr__(self, "alpha", float(self.alpha))
        if self.kind in (ScoreKind.BDEU, ScoreKind.BDS) and not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    def __str__(self):
        if self.kind in (ScoreKind.BDEU, ScoreKind.BDS):
            return f"{self.kind.value}(alpha={self.alpha:g})"
        return self.kind.value


def _bd_rows(counts: np.ndarray, pseudo: float) -> float:
    """BD log term summed over the given rows, same pseudocount in every cell."""
    if counts.shape[0] == 0:
        return 0.0
    r = counts.shape[1]
    nij = counts.sum(axis=1)
    row = gammaln(r * pseudo) - gammaln(r * pseudo + nij)
    cell = gammaln(pseudo + counts) - gammaln(pseudo)
    return float(row.sum() + cell.sum())


def log_bdeu_local(t: ContingencyTable, alpha: float) -> float:
    # Unobserved configurations cancel exactly, so only observed rows are summed.
    return _bd_rows(t.observed(), alpha / (t.r * t.q))


def log_bds_local(t: ContingencyTable, alpha: float) -> float:
    q_obs = t.q_obs
    if q_obs == 0:
        return 0.0
    return _bd_rows(t.observed(), alpha / (t.r * q_obs))


def log_k2_local(t: ContingencyTable) -> float:
    counts = t.observed()
    if counts.shape[0] == 0:
        return 0.0
    r = t.r
    nij = counts.sum(axis=1)
    return float((gammaln(r) - gammaln(r + nij)).sum() + gammaln(1 + counts).sum())


def log_bic_local(t: ContingencyTable, n: int) -> float:
    """Maximised log-likelihood minus ``(r - 1) q / 2 * ln n``.

    ``n = 0`` carries no penalty.
    """
    counts = t.counts
    nij = np.broadcast_to(counts.sum(axis=1, keepdims=True), counts.shape)
    mask = counts > 0
    ll = float((counts[mask] * np.log(counts[mask] / nij[mask])).sum())
    penalty = 0.5 * (t.r - 1) * t.q * math.log(n) if n > 0 else 0.0
    return ll - penalty


def local_score(t: ContingencyTable, cfg: ScoreConfig, n: int | None = None) -> float:
    kind = cfg.kind
    if kind is ScoreKind.BDEU:
        return log_bdeu_local(t, cfg.alpha)
    if kind is ScoreKind.BDS:
        return log_bds_local(t, cfg.alpha)
    if kind is ScoreKind.K2:
        return log_k2_local(t)
    return log_bic_local(t, t.n if n is None else n)


def effective_sample_size(t: ContingencyTable, alpha: float, kind=ScoreKind.BDS) -> Fraction:
    """Total pseudocount mass placed on the observed cells of ``t``.

    Computed in exact rational arithmetic. For BDs this is ``alpha`` whenever
    any configuration is observed; for BDeu it shrinks to ``alpha q_obs / q``.
    """
    kind = ScoreKind(kind)
    q_obs = t.q_obs
    if q_obs == 0:
        return Fraction(0)
    a = Fraction(alpha)
    if kind is ScoreKind.BDS:
        per_cell = a / (t.r * q_obs)
    elif kind is ScoreKind.BDEU:
        per_cell = a / (t.r * t.q)
    else:
        raise ValueError(f"no imaginary sample size for {kind.value}")
    return sum((per_cell for _ in range(q_obs * t.r)), Fraction(0))


class ScoreCache:
    """Local scores of one dataset under one configuration.

    Entries are keyed by ``(child, sorted parents)`` and never change once
    inserted. Not thread-safe; use one cache per search run.
    """

    def __init__(self, data: Dataset, cfg: ScoreConfig, max_configs: int = MAX_CONFIGS):
        self.data = data
        self.cfg = cfg
        self.max_configs = max_configs
        self._store: dict[tuple[int, tuple[int, ...]], float] = {}
        self.hits = 0
        self.misses = 0

    def local(self, child: int, parents) -> float:
        key = (child, tuple(sorted(parents)))
        try:
            value = self._store[key]
            self.hits += 1
            return value
        except KeyError:
            pass
        self.misses += 1
        t = count_contingency(self.data, child, key[1], self.max_configs)
        value = local_score(t, self.cfg, self.data.n)
        self._store[key] = value
        return value

    def __len__(self):
        return len(self._store)

    def entries(self):
        """Cached ``(child, parents, value)`` triples in insertion order."""
        return [(c, p, v) for (c, p), v in self._store.items()]


def _resolve_cache(data, cfg, cache):
    if cache is None:
        return ScoreCache(data, cfg)
    if cache.data is not data or cache.cfg != cfg:
        raise ValueError("cache is bound to a different dataset or score configuration")
    return cache


def node_scores(g: Dag, data: Dataset, cfg: ScoreConfig, cache: ScoreCache | None = None) -> list[float]:
    if g.n != data.n_vars:
        raise DimensionError(f"DAG has {g.n} nodes, dataset has {data.n_vars} variables")
    cache = _resolve_cache(data, cfg, cache)
    return [cache.local(v, g.parents(v)) for v in range(g.n)]


def network_score(g: Dag, data: Dataset, cfg: ScoreConfig, cache: ScoreCache | None = None) -> float:
    total = 0.0
    for value in node_scores(g, data, cfg, cache):
        total += value
    return total


def score_delta(g: Dag, m: Move, data: Dataset, cfg: ScoreConfig, cache: ScoreCache | None = None) -> float:
    """Change in network score from applying ``m``; only touched nodes are rescored."""
    if g.n != data.n_vars:
        raise DimensionError(f"DAG has {g.n} nodes, dataset has {data.n_vars} variables")
    check_move(g, m)
    cache = _resolve_cache(data, cfg, cache)
    u, v = m.src, m.dst
    pv = g.parents(v)
    if m.kind is MoveKind.ADD:
        return cache.local(v, pv + (u,)) - cache.local(v, pv)
    without_u = tuple(p for p in pv if p != u)
    if m.kind is MoveKind.DELETE:
        return cache.local(v, without_u) - cache.local(v, pv)
    pu = g.parents(u)
    return (
        cache.local(v, without_u)
        - cache.local(v, pv)
        + cache.local(u, pu + (v,))
        - cache.local(u, pu)
    )
