import math
from fractions import Fraction
from itertools import combinations, product

import numpy as np
import pytest

from bnsparse.data import ContingencyTable, Dataset, VariableSchema
from bnsparse.graph import Dag
from bnsparse.model import Cpt, DiscreteBn


def sparse_pair_dataset():
    """Two binary variables: X1 is always level 2; X2 is level 1 twice, level 2 five times."""
    schema = [VariableSchema("X1", ("1", "2")), VariableSchema("X2", ("1", "2"))]
    rows = [[1, 0]] * 2 + [[1, 1]] * 5
    return Dataset(schema, rows)


@pytest.fixture
def sparse_pair():
    return sparse_pair_dataset()


def random_dataset(rng, n_rows, cards):
    schema = [VariableSchema(f"V{i}", tuple(str(k) for k in range(r))) for i, r in enumerate(cards)]
    rows = np.column_stack([rng.integers(r, size=n_rows) for r in cards]) if n_rows else np.zeros((0, len(cards)))
    return Dataset(schema, rows)


def random_bn(rng, cards, arc_prob=0.5, concentration=1.0):
    """Random DAG consistent with node order 0..N-1 plus Dirichlet CPTs."""
    n = len(cards)
    arcs = [(u, v) for u, v in combinations(range(n), 2) if rng.random() < arc_prob]
    dag = Dag(n, arcs)
    schema = [VariableSchema(f"V{i}", tuple(str(k) for k in range(r))) for i, r in enumerate(cards)]
    cpts = []
    for v in range(n):
        q = int(np.prod([cards[p] for p in dag.parents(v)]))
        table = rng.dirichlet([concentration] * cards[v], size=q)
        cpts.append(Cpt(v, dag.parents(v), table))
    return DiscreteBn(dag, schema, cpts)


def random_table(rng, q, r, sparse):
    """Random child-given-parents counts; sparse tables leave about half the rows empty."""
    counts = rng.integers(0, 6, size=(q, r))
    if sparse:
        keep = rng.random(q) < 0.5
        keep[rng.integers(q)] = True
        counts[~keep] = 0
    else:
        counts[:, 0] += 1
    return ContingencyTable(0, (1,), counts)


def rising(a: Fraction, n: int) -> Fraction:
    out = Fraction(1)
    for m in range(n):
        out *= a + m
    return out


def log_fraction(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def bd_oracle(counts, pseudo: Fraction, rows=None) -> float:
    """Exact BD local term with one rational pseudocount per cell.

    Uses Gamma(a + n) / Gamma(a) = a (a + 1) ... (a + n - 1).
    """
    counts = np.asarray(counts)
    r = counts.shape[1]
    value = Fraction(1)
    for j, row in enumerate(counts):
        if rows is not None and j not in rows:
            continue
        nij = int(row.sum())
        value /= rising(r * pseudo, nij)
        for c in row:
            value *= rising(pseudo, int(c))
    return log_fraction(value)


def brute_force_dags(n):
    """All DAGs by filtering every assignment of {absent, ->, <-} to node pairs."""
    pairs = list(combinations(range(n), 2))
    out = []
    for states in product(range(3), repeat=len(pairs)):
        arcs = []
        for (u, v), s in zip(pairs, states):
            if s == 1:
                arcs.append((u, v))
            elif s == 2:
                arcs.append((v, u))
        if _acyclic(n, arcs):
            out.append(frozenset(arcs))
    return out


def _acyclic(n, arcs):
    indeg = [0] * n
    children = [[] for _ in range(n)]
    for u, v in arcs:
        indeg[v] += 1
        children[u].append(v)
    stack = [v for v in range(n) if indeg[v] == 0]
    seen = 0
    while stack:
        v = stack.pop()
        seen += 1
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                stack.append(c)
    return seen == n


def robinson(n):
    """Number of labelled DAGs on n nodes by Robinson's recurrence."""
    a = [1]
    for m in range(1, n + 1):
        a.append(sum((-1) ** (k + 1) * math.comb(m, k) * 2 ** (k * (m - k)) * a[m - k] for k in range(1, m + 1)))
    return a[n]


def class_key(n, arcs):
    """(skeleton, v-structures) computed straight from an arc set."""
    arcs = set(arcs)
    skel = frozenset((min(u, v), max(u, v)) for u, v in arcs)
    vs = set()
    for c in range(n):
        pa = sorted(u for u, v in arcs if v == c)
        for a, b in combinations(pa, 2):
            if (min(a, b), max(a, b)) not in skel:
                vs.add((a, c, b))
    return skel, frozenset(vs)


def brute_force_cpdags(n):
    """Map each DAG arc set to its class's CPDAG, from orientation agreement within the class."""
    dags = brute_force_dags(n)
    classes = {}
    for arcs in dags:
        classes.setdefault(class_key(n, arcs), []).append(arcs)
    out = {}
    for (skel, _), members in classes.items():
        directed, undirected = set(), set()
        for a, b in skel:
            orientations = {(a, b) in m for m in members}
            if orientations == {True}:
                directed.add((a, b))
            elif orientations == {False}:
                directed.add((b, a))
            else:
                undirected.add((a, b))
        for m in members:
            out[m] = (frozenset(directed), frozenset(undirected))
    return out


_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or report.failed:
        if hasattr(report, "wasxfail"):
            _acceptance[name] = "FAIL (expected; " + report.wasxfail.removeprefix("reason: ") + ")"
        else:
            _acceptance[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        number = int(name.split("_")[2])
        label = " ".join(name.split("_")[3:])
        terminalreporter.write_line(f"criterion {number:2d}: {_acceptance[name]}  {label}")
