"""Parameterised discrete Bayesian networks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import Dataset, VariableSchema, config_index, count_contingency
from .errors import DimensionError, InvalidDistribution
from .graph import Dag, topological_order

ROW_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class Cpt:
    """``table[j, k] = P(child = k | parents in configuration j)``.

    ``j`` is the mixed-radix index of the parent levels, first parent most
    significant.
    """

    child: int
    parents: tuple[int, ...]
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        if table.ndim != 2:
            raise DimensionError("CPT table must be two-dimensional")
        if (table < 0).any() or (table > 1).any():
            raise InvalidDistribution(f"CPT of node {self.child} has entries outside [0, 1]")
        sums = table.sum(axis=1)
        if np.abs(sums - 1).max(initial=0) > ROW_TOLERANCE:
            raise InvalidDistribution(f"CPT rows of node {self.child} do not sum to 1")
        table.setflags(write=False)
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "table", table)

    def __eq__(self, other):
        if not isinstance(other, Cpt):
            return NotImplemented
        return (
            self.child == other.child
            and self.parents == other.parents
            and np.array_equal(self.table, other.table)
        )


class DiscreteBn:
    def __init__(self, dag: Dag, schema: Sequence[VariableSchema], cpts: Sequence[Cpt]):
        schema = tuple(schema)
        cpts = tuple(cpts)
        if not (dag.n == len(schema) == len(cpts)):
            raise DimensionError("DAG, schema and CPT list sizes differ")
        for v, cpt in enumerate(cpts):
            if cpt.child != v:
                raise DimensionError(f"CPT {v} belongs to node {cpt.child}")
            if sorted(cpt.parents) != list(dag.parents(v)):
                raise DimensionError(f"CPT parents of node {v} do not match the DAG")
            q = int(np.prod([schema[p].cardinality for p in cpt.parents], dtype=np.int64))
            if cpt.table.shape != (q, schema[v].cardinality):
                raise DimensionError(
                    f"CPT of node {v} has shape {cpt.table.shape}, expected {(q, schema[v].cardinality)}"
                )
        self.dag = dag
        self.schema = schema
        self.cpts = cpts

    @property
    def names(self):
        return tuple(v.name for v in self.schema)

    @property
    def cardinalities(self):
        return tuple(v.cardinality for v in self.schema)

    def __eq__(self, other):
        if not isinstance(other, DiscreteBn):
            return NotImplemented
        return self.dag == other.dag and self.schema == other.schema and self.cpts == other.cpts

    def __repr__(self):
        return f"DiscreteBn(vars={list(self.names)}, arcs={len(self.dag.arcs)})"


def fit_parameters(g: Dag, data: Dataset, alpha: float = 1.0, scheme: str = "bdeu") -> DiscreteBn:
    """Posterior-mean CPTs under a Dirichlet prior.

    ``scheme="bdeu"`` spreads ``alpha`` evenly over the ``r * q`` cells of each
    table; ``scheme="cell"`` adds ``alpha`` to every cell. Unobserved parent
    configurations get the uniform distribution in both schemes.
    """
    if g.n != data.n_vars:
        raise DimensionError(f"DAG has {g.n} nodes, dataset has {data.n_vars} variables")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    cpts = []
    for v in range(g.n):
        t = count_contingency(data, v, g.parents(v))
        if scheme == "bdeu":
            pseudo = alpha / (t.r * t.q)
        elif scheme == "cell":
            pseudo = alpha
        else:
            raise ValueError(f"unknown fitting scheme {scheme!r}")
        post = t.counts + pseudo
        cpts.append(Cpt(v, t.parents, post / post.sum(axis=1, keepdims=True)))
    return DiscreteBn(g, data.schema, cpts)


def forward_sample(bn: DiscreteBn, n: int, seed=None) -> Dataset:
    """Ancestral sampling of ``n`` rows using a PCG64 stream seeded by ``seed``."""
    if n < 0:
        raise ValueError("sample size must be non-negative")
    rng = np.random.default_rng(seed)
    rows = np.zeros((n, bn.dag.n), dtype=np.int64)
    card = bn.cardinalities
    for v in topological_order(bn.dag):
        cpt = bn.cpts[v]
        j = np.zeros(n, dtype=np.int64)
        for p in cpt.parents:
            j = j * card[p] + rows[:, p]
        # Inner boundaries only, so rounding in the last cumulative sum is harmless.
        bounds = np.cumsum(cpt.table, axis=1)[:, :-1]
        u = rng.random(n)
        rows[:, v] = (u[:, None] >= bounds[j]).sum(axis=1)
    return Dataset(bn.schema, rows)


def _check_schema(bn: DiscreteBn, data: Dataset) -> None:
    if bn.schema != data.schema:
        raise DimensionError("dataset schema does not match the network")


def node_log_likelihoods(bn: DiscreteBn, data: Dataset) -> list[float]:
    _check_schema(bn, data)
    out = []
    with np.errstate(divide="ignore"):
        for v, cpt in enumerate(bn.cpts):
            j = config_index(data, cpt.parents)
            out.append(float(np.log(cpt.table[j, data.rows[:, v]]).sum()))
    return out


def log_likelihood(bn: DiscreteBn, data: Dataset) -> float:
    return float(sum(node_log_likelihoods(bn, data)))


def n_parameters(model, schema: Sequence[VariableSchema] | None = None) -> int:
    """Free parameters ``sum_i (r_i - 1) q_i`` of a network or a DAG plus schema."""
    if isinstance(model, DiscreteBn):
        dag, schema = model.dag, model.schema
    else:
        dag = model
        if schema is None:
            raise ValueError("schema required when counting parameters of a bare DAG")
    card = [v.cardinality for v in schema]
    return sum((card[v] - 1) * int(np.prod([card[p] for p in dag.parents(v)])) for v in range(dag.n))
