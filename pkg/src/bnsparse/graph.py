"""DAGs, single-arc moves, equivalence classes and exhaustive enumeration."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from .errors import CycleError, DimensionError, InvalidMove, ParseError, ResourceLimit

MAX_ENUMERATION_NODES = 6


class MoveKind(IntEnum):
    # Values double as the tie-break order used by the search.
    ADD = 0
    DELETE = 1
    REVERSE = 2


@dataclass(frozen=True, order=True)
class Move:
    kind: MoveKind
    src: int
    dst: int

    def __post_init__(self):
        if self.src == self.dst:
            raise InvalidMove(f"move endpoints coincide: {self.src}")

    def inverse(self) -> "Move":
        if self.kind is MoveKind.ADD:
            return Move(MoveKind.DELETE, self.src, self.dst)
        if self.kind is MoveKind.DELETE:
            return Move(MoveKind.ADD, self.src, self.dst)
        return Move(MoveKind.REVERSE, self.dst, self.src)

    def __str__(self):
        arrow = {MoveKind.ADD: "+", MoveKind.DELETE: "-", MoveKind.REVERSE: "~"}
        return f"{arrow[self.kind]}({self.src}->{self.dst})"


class Dag:
    """Immutable DAG over nodes ``0..n-1``."""

    __slots__ = ("n", "arcs", "_parents", "_children")

    def __init__(self, n: int, arcs: Iterable[tuple[int, int]] = ()):
        arcs = frozenset((int(u), int(v)) for u, v in arcs)
        parents = [[] for _ in range(n)]
        children = [[] for _ in range(n)]
        for u, v in arcs:
            if not (0 <= u < n and 0 <= v < n):
                raise DimensionError(f"arc {(u, v)} out of range for {n} nodes")
            if u == v:
                raise CycleError(f"self-loop on node {u}")
            if (v, u) in arcs:
                raise CycleError(f"arcs {u}->{v} and {v}->{u} both present")
            parents[v].append(u)
            children[u].append(v)
        self.n = n
        self.arcs = arcs
        self._parents = tuple(tuple(sorted(p)) for p in parents)
        self._children = tuple(tuple(sorted(c)) for c in children)
        if len(_kahn(self)) != n:
            raise CycleError("graph contains a directed cycle")

    @classmethod
    def _unchecked(cls, n, arcs, parents, children):
        g = cls.__new__(cls)
        g.n = n
        g.arcs = arcs
        g._parents = parents
        g._children = children
        return g

    @classmethod
    def from_parent_sets(cls, parent_sets: Sequence[Iterable[int]]) -> "Dag":
        return cls(len(parent_sets), [(p, v) for v, ps in enumerate(parent_sets) for p in ps])

    def parents(self, v: int) -> tuple[int, ...]:
        return self._parents[v]

    def children(self, v: int) -> tuple[int, ...]:
        return self._children[v]

    def has_arc(self, u: int, v: int) -> bool:
        return (u, v) in self.arcs

    def adjacent(self, u: int, v: int) -> bool:
        return (u, v) in self.arcs or (v, u) in self.arcs

    def has_path(self, u: int, v: int, skip: tuple[int, int] | None = None) -> bool:
        """Directed path ``u ~> v``, optionally ignoring the arc ``skip``."""
        if u == v:
            return True
        seen = {u}
        stack = [u]
        while stack:
            x = stack.pop()
            for y in self._children[x]:
                if (x, y) == skip or y in seen:
                    continue
                if y == v:
                    return True
                seen.add(y)
                stack.append(y)
        return False

    def skeleton(self) -> frozenset[tuple[int, int]]:
        return frozenset((min(u, v), max(u, v)) for u, v in self.arcs)

    def v_structures(self) -> frozenset[tuple[int, int, int]]:
        """Triples ``(a, c, b)`` with ``a -> c <- b``, ``a < b`` non-adjacent."""
        out = set()
        for c in range(self.n):
            for a, b in combinations(self._parents[c], 2):
                if not self.adjacent(a, b):
                    out.add((a, c, b))
        return frozenset(out)

    def __len__(self):
        return len(self.arcs)

    def __eq__(self, other):
        if not isinstance(other, Dag):
            return NotImplemented
        return self.n == other.n and self.arcs == other.arcs

    def __hash__(self):
        return hash((self.n, self.arcs))

    def __repr__(self):
        return f"Dag({self.n}, {sorted(self.arcs)})"


def _kahn(g: Dag) -> list[int]:
    indeg = [len(g.parents(v)) for v in range(g.n)]
    heap = [v for v in range(g.n) if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for c in g.children(v):
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    return order


def topological_order(g: Dag) -> list[int]:
    """Topological order taking the smallest available node first."""
    return _kahn(g)


def _replace(g: Dag, remove=(), add=()) -> Dag:
    arcs = set(g.arcs)
    parents = [list(p) for p in g._parents]
    children = [list(c) for c in g._children]
    for u, v in remove:
        arcs.discard((u, v))
        parents[v].remove(u)
        children[u].remove(v)
    for u, v in add:
        arcs.add((u, v))
        parents[v].append(u)
        children[u].append(v)
    return Dag._unchecked(
        g.n,
        frozenset(arcs),
        tuple(tuple(sorted(p)) for p in parents),
        tuple(tuple(sorted(c)) for c in children),
    )


def check_move(g: Dag, m: Move) -> None:
    """Raise if ``m`` cannot be applied to ``g``."""
    u, v = m.src, m.dst
    if not (0 <= u < g.n and 0 <= v < g.n):
        raise InvalidMove(f"{m} out of range for {g.n} nodes")
    if m.kind is MoveKind.ADD:
        if g.adjacent(u, v):
            raise InvalidMove(f"{m}: nodes already adjacent")
        if g.has_path(v, u):
            raise CycleError(f"{m} would create a cycle")
    else:
        if not g.has_arc(u, v):
            raise InvalidMove(f"{m}: arc {u}->{v} not present")
        if m.kind is MoveKind.REVERSE and g.has_path(u, v, skip=(u, v)):
            raise CycleError(f"{m} would create a cycle")


def is_valid_move(g: Dag, m: Move) -> bool:
    try:
        check_move(g, m)
    except (InvalidMove, CycleError):
        return False
    return True


def apply_move(g: Dag, m: Move) -> Dag:
    check_move(g, m)
    u, v = m.src, m.dst
    if m.kind is MoveKind.ADD:
        return _replace(g, add=[(u, v)])
    if m.kind is MoveKind.DELETE:
        return _replace(g, remove=[(u, v)])
    return _replace(g, remove=[(u, v)], add=[(v, u)])


def valid_moves(g: Dag, max_parents: int | None = None) -> Iterator[Move]:
    """All applicable single-arc moves in tie-break order."""
    n = g.n
    for u in range(n):
        for v in range(n):
            if u == v or g.adjacent(u, v):
                continue
            if max_parents is not None and len(g.parents(v)) >= max_parents:
                continue
            if not g.has_path(v, u):
                yield Move(MoveKind.ADD, u, v)
    arcs = sorted(g.arcs)
    for u, v in arcs:
        yield Move(MoveKind.DELETE, u, v)
    for u, v in arcs:
        if max_parents is not None and len(g.parents(u)) >= max_parents:
            continue
        if not g.has_path(u, v, skip=(u, v)):
            yield Move(MoveKind.REVERSE, u, v)


# --------------------------------------------------------------------------
# Equivalence classes


@dataclass(frozen=True)
class Cpdag:
    n: int
    directed: frozenset[tuple[int, int]]
    undirected: frozenset[tuple[int, int]]

    def status(self, a: int, b: int) -> str | tuple[int, int]:
        """``"absent"``, ``"undirected"`` or the directed arc on pair ``a, b``."""
        if (a, b) in self.directed:
            return (a, b)
        if (b, a) in self.directed:
            return (b, a)
        if (min(a, b), max(a, b)) in self.undirected:
            return "undirected"
        return "absent"

    def __str__(self):
        lines = [f"{u} -> {v}" for u, v in sorted(self.directed)]
        lines += [f"{u} -- {v}" for u, v in sorted(self.undirected)]
        return "\n".join(lines)


def to_cpdag(g: Dag) -> Cpdag:
    """Completed pattern of ``g``: compelled arcs directed, the rest undirected.

    Arcs in v-structures seed the compelled set; Meek's rules 1-3 are then
    applied to a fixed point.
    """
    directed = set()
    for a, c, b in g.v_structures():
        directed.add((a, c))
        directed.add((b, c))
    undirected = {e for e in g.skeleton()} - {(min(u, v), max(u, v)) for u, v in directed}

    def und(a, b):
        return (min(a, b), max(a, b)) in undirected

    def orient(a, b):
        undirected.discard((min(a, b), max(a, b)))
        directed.add((a, b))

    changed = True
    while changed:
        changed = False
        for e in sorted(undirected):
            for a, b in (e, e[::-1]):
                if not und(a, b):
                    break
                # R1: c -> a - b, c and b non-adjacent
                r1 = any(
                    (c, a) in directed and not g.adjacent(c, b)
                    for c in range(g.n)
                    if c != b
                )
                # R2: a -> c -> b with a - b
                r2 = any((a, c) in directed and (c, b) in directed for c in range(g.n))
                # R3: a - c -> b, a - d -> b, c and d non-adjacent
                r3 = False
                if not (r1 or r2):
                    mids = [
                        c for c in range(g.n)
                        if c not in (a, b) and und(a, c) and (c, b) in directed
                    ]
                    r3 = any(not g.adjacent(c, d) for c, d in combinations(mids, 2))
                if r1 or r2 or r3:
                    orient(a, b)
                    changed = True
                    break
    return Cpdag(g.n, frozenset(directed), frozenset(undirected))


def _check_dims(g1: Dag, g2: Dag) -> None:
    if g1.n != g2.n:
        raise DimensionError(f"node counts differ: {g1.n} vs {g2.n}")


def same_equivalence_class(g1: Dag, g2: Dag) -> bool:
    _check_dims(g1, g2)
    return g1.skeleton() == g2.skeleton() and g1.v_structures() == g2.v_structures()


def shd(g1: Dag, g2: Dag) -> int:
    """Structural Hamming distance between the CPDAGs of two DAGs.

    Every node pair whose status (absent, undirected, or directed one way
    or the other) differs counts 1.
    """
    _check_dims(g1, g2)
    c1, c2 = to_cpdag(g1), to_cpdag(g2)
    return sum(
        c1.status(a, b) != c2.status(a, b) for a, b in combinations(range(g1.n), 2)
    )


# --------------------------------------------------------------------------
# Enumeration


def _check_enum(n: int) -> None:
    if n < 0:
        raise ValueError("node count must be non-negative")
    if n > MAX_ENUMERATION_NODES:
        raise ResourceLimit(f"enumeration limited to {MAX_ENUMERATION_NODES} nodes, got {n}")


def iter_parent_masks(n: int) -> Iterator[tuple[int, ...]]:
    """Yield every labelled DAG on ``n`` nodes as a tuple of parent bitmasks.

    Nodes are inserted one at a time; node ``k`` receives a parent set ``P``
    and a child set ``C`` among earlier nodes, rejected when some member of
    ``C`` already reaches a member of ``P``.
    """
    _check_enum(n)

    def extend(k, parents, desc):
        if k == n:
            yield tuple(parents)
            return
        full = (1 << k) - 1
        sub = full
        while True:
            P = sub
            rest = full & ~P
            C = rest
            while True:
                ok = True
                dk = C
                c = C
                while c:
                    low = c & -c
                    i = low.bit_length() - 1
                    if desc[i] & P:
                        ok = False
                        break
                    dk |= desc[i]
                    c ^= low
                if ok:
                    new_parents = parents + [P]
                    new_desc = desc + [dk]
                    bit = 1 << k
                    c = C
                    while c:
                        low = c & -c
                        new_parents[low.bit_length() - 1] |= bit
                        c ^= low
                    for a in range(k):
                        if (P >> a) & 1 or desc[a] & P:
                            new_desc[a] = desc[a] | bit | dk
                    yield from extend(k + 1, new_parents, new_desc)
                if C == 0:
                    break
                C = (C - 1) & rest
            if sub == 0:
                break
            sub = (sub - 1) & full

    yield from extend(0, [], [])


def _mask_to_dag(n: int, masks: tuple[int, ...]) -> Dag:
    return Dag(n, [(p, v) for v in range(n) for p in range(n) if (masks[v] >> p) & 1])


def enumerate_dags(n: int) -> list[Dag]:
    """Every labelled DAG on ``n`` nodes exactly once (``n <= 6``).

    ``n = 6`` yields about 3.8 million graphs; prefer :func:`iter_parent_masks`
    there.
    """
    return [_mask_to_dag(n, m) for m in iter_parent_masks(n)]


def exact_arc_probability(n: int) -> tuple[Fraction, Fraction]:
    """``P(0 -> 1)`` and ``P(0, 1 not adjacent)`` under the uniform DAG prior."""
    if n < 2:
        raise ValueError("need at least two nodes")
    total = forward = absent = 0
    for masks in iter_parent_masks(n):
        total += 1
        if masks[1] & 1:
            forward += 1
        elif not (masks[0] >> 1) & 1:
            absent += 1
    return Fraction(forward, total), Fraction(absent, total)


# --------------------------------------------------------------------------
# Text format


def write_dag(g: Dag, names: Sequence[str] | None = None) -> str:
    """Serialise as a ``nodes:`` header followed by ``parent -> child`` lines."""
    if names is None:
        names = [str(i) for i in range(g.n)]
    if len(names) != g.n:
        raise DimensionError("one name per node required")
    lines = ["nodes: " + ", ".join(names)]
    lines += [f"{names[u]} -> {names[v]}" for u, v in sorted(g.arcs)]
    return "\n".join(lines) + "\n"


def read_dag(text: str) -> tuple[Dag, list[str]]:
    names = None
    arcs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if names is None:
            head, sep, rest = line.partition(":")
            if head.strip() != "nodes" or not sep:
                raise ParseError("expected 'nodes: name, ...' header", lineno, 1)
            names = [x.strip() for x in rest.split(",") if x.strip()]
            if len(set(names)) != len(names):
                raise ParseError("duplicate node names", lineno, 1)
            index = {x: i for i, x in enumerate(names)}
            continue
        parts = line.split("->")
        if len(parts) != 2:
            raise ParseError(f"expected 'parent -> child', got {line!r}", lineno, 1)
        u, v = (x.strip() for x in parts)
        for x in (u, v):
            if x not in index:
                raise ParseError(f"undeclared node {x!r}", lineno, raw.find(x) + 1)
        arcs.append((index[u], index[v]))
    if names is None:
        raise ParseError("missing 'nodes:' header", 1, 1)
    return Dag(len(names), arcs), names
