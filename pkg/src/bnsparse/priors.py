"""Graph priors expressed as log prior ratios of single-arc moves."""

from __future__ import annotations

import math
from enum import Enum

from .graph import Dag, Move, MoveKind


class PriorKind(str, Enum):
    U = "u"
    MU = "mu"


# Marginal uniform: per-arc independent, each direction 1/4, no arc 1/2.
MU_P_FORWARD = 0.25
MU_P_BACKWARD = 0.25
MU_P_ABSENT = 0.5

LN2 = math.log(2.0)


def log_prior_ratio(prior, move: Move) -> float:
    """``log P(G') - log P(G)`` for the graph ``G'`` reached from ``G`` by ``move``."""
    prior = PriorKind(prior)
    if prior is PriorKind.U:
        return 0.0
    if move.kind is MoveKind.ADD:
        return math.log(MU_P_FORWARD / MU_P_ABSENT)
    if move.kind is MoveKind.DELETE:
        return math.log(MU_P_ABSENT / MU_P_FORWARD)
    return math.log(MU_P_BACKWARD / MU_P_FORWARD)


def log_prior(prior, g: Dag) -> float:
    """Log prior of ``g`` relative to the empty graph on the same nodes."""
    prior = PriorKind(prior)
    if prior is PriorKind.U:
        return 0.0
    return len(g.arcs) * math.log(MU_P_FORWARD / MU_P_ABSENT)


def u_marginal_approx(n: int) -> tuple[float, float]:
    """Large-N approximation of one arc's marginal under the uniform DAG prior.

    Returns ``(p_forward, p_absent)``; ``p_backward`` equals ``p_forward``.
    """
    if n < 2:
        raise ValueError("need at least two nodes")
    return 0.25 + 1.0 / (4 * (n - 1)), 0.5 - 1.0 / (2 * (n - 1))
