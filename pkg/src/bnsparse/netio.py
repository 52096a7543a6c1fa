"""Reading and writing discrete networks: a BIF subset and a native line format.

Supported BIF subset::

    network name { }
    variable X { type discrete [ 2 ] { a, b }; }
    probability ( X ) { table 0.3, 0.7; }
    probability ( Y | X ) { (a) 0.1, 0.9; (b) 0.5, 0.5; }

Native format, one record per line::

    bn <N>
    var <name> <level,level,...>
    parents <child> [<parent,parent,...>]
    cpt <child> <row> <p1> ... <pr>
"""

from __future__ import annotations

import re
from itertools import product
from pathlib import Path

import numpy as np

from .data import VariableSchema
from .errors import IncompleteTable, InvalidDistribution, ParseError
from .graph import Dag
from .model import ROW_TOLERANCE, Cpt, DiscreteBn

SUM_TOLERANCE = 1e-6

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<comment>//[^\n]*|/\*.*?\*/)|(?P<punct>[{}()\[\],;|])|(?P<word>[^\s{}()\[\],;|]+)",
    re.S,
)


class _Tokens:
    def __init__(self, text: str):
        self.items = []
        pos = 0
        line, line_start = 1, 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:  # pragma: no cover - the word class matches anything else
                raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
            if m.lastgroup in ("punct", "word"):
                self.items.append((m.group(), line, pos - line_start + 1))
            chunk = m.group()
            newlines = chunk.count("\n")
            if newlines:
                line += newlines
                line_start = pos + chunk.rfind("\n") + 1
            pos = m.end()
        self.i = 0
        self.eof = (line, pos - line_start + 1)

    def peek(self):
        return self.items[self.i][0] if self.i < len(self.items) else None

    def where(self):
        if self.i < len(self.items):
            return self.items[self.i][1:]
        return self.eof

    def next(self, what="token"):
        if self.i >= len(self.items):
            raise ParseError(f"unexpected end of input, expected {what}", *self.eof)
        tok = self.items[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok, line, col = self.next(repr(value))
        if tok != value:
            raise ParseError(f"expected {value!r}, got {tok!r}", line, col)
        return tok

    def word(self, what="name"):
        tok, line, col = self.next(what)
        if tok in "{}()[],;|":
            raise ParseError(f"expected {what}, got {tok!r}", line, col)
        return tok

    def number(self):
        tok, line, col = self.next("number")
        try:
            value = float(tok)
        except ValueError:
            raise ParseError(f"expected number, got {tok!r}", line, col) from None
        if not np.isfinite(value):
            raise ParseError(f"non-finite probability {tok!r}", line, col)
        return value

    def comma_list(self, item, close):
        values = [item()]
        while self.peek() == ",":
            self.next()
            values.append(item())
        if close is not None:
            self.expect(close)
        return values


def _normalise(row, where, name):
    row = np.asarray(row, dtype=float)
    if (row < 0).any():
        raise InvalidDistribution(f"negative probability for {name!r} at line {where[0]}")
    total = row.sum()
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise InvalidDistribution(
            f"probabilities for {name!r} at line {where[0]} sum to {total:.6g}"
        )
    # Rows already valid to float precision are kept bit-exact for round trips.
    if abs(total - 1.0) <= ROW_TOLERANCE:
        return row
    return row / total


def parse_bif(text: str) -> DiscreteBn:
    toks = _Tokens(text)
    levels: dict[str, tuple[str, ...]] = {}
    order: list[str] = []
    tables: dict[str, tuple[list[str], dict]] = {}

    toks.expect("network")
    toks.word("network name")
    toks.expect("{")
    if toks.peek() != "}":
        line, col = toks.where()
        raise ParseError("network properties are not supported", line, col)
    toks.expect("}")

    while toks.peek() is not None:
        kw, line, col = toks.next()
        if kw == "variable":
            name = toks.word("variable name")
            if name in levels:
                raise ParseError(f"variable {name!r} declared twice", line, col)
            toks.expect("{")
            toks.expect("type")
            toks.expect("discrete")
            toks.expect("[")
            count_tok, cl, cc = toks.next("level count")
            if not count_tok.isdigit():
                raise ParseError(f"expected level count, got {count_tok!r}", cl, cc)
            toks.expect("]")
            toks.expect("{")
            lv = toks.comma_list(lambda: toks.word("level"), "}")
            toks.expect(";")
            toks.expect("}")
            if len(lv) != int(count_tok):
                raise ParseError(f"variable {name!r} declares {count_tok} levels, lists {len(lv)}", cl, cc)
            if len(set(lv)) != len(lv):
                raise ParseError(f"duplicate levels for {name!r}", cl, cc)
            levels[name] = tuple(lv)
            order.append(name)
        elif kw == "probability":
            toks.expect("(")
            child_line, child_col = toks.where()
            child = toks.word("variable name")
            parents = []
            if toks.peek() == "|":
                toks.next()
                parents = toks.comma_list(toks.word, None)
            toks.expect(")")
            for name in [child] + parents:
                if name not in levels:
                    raise ParseError(f"undeclared variable {name!r}", child_line, child_col)
            if child in tables:
                raise ParseError(f"second probability block for {child!r}", line, col)
            if len(set(parents)) != len(parents) or child in parents:
                raise ParseError(f"repeated variable in probability block of {child!r}", line, col)
            rows = {}
            toks.expect("{")
            while toks.peek() != "}":
                where = toks.where()
                head = toks.peek()
                if head == "table":
                    toks.next()
                    if parents:
                        raise ParseError("'table' is only supported for root nodes", *where)
                    key = ()
                elif head == "(":
                    toks.next()
                    key = tuple(toks.comma_list(lambda: toks.word("level"), ")"))
                    if len(key) != len(parents):
                        raise ParseError("wrong number of parent levels", *where)
                    for p, value in zip(parents, key):
                        if value not in levels[p]:
                            raise ParseError(f"unknown level {value!r} of {p!r}", *where)
                else:
                    tok, tl, tc = toks.next()
                    if tok == "default":
                        raise ParseError("'default' entries are not supported", tl, tc)
                    raise ParseError(f"unexpected {tok!r} in probability block", tl, tc)
                values = toks.comma_list(toks.number, ";")
                if len(values) != len(levels[child]):
                    raise ParseError(
                        f"expected {len(levels[child])} probabilities, got {len(values)}", *where
                    )
                if key in rows:
                    raise ParseError(f"duplicate configuration {key} for {child!r}", *where)
                rows[key] = _normalise(values, where, child)
            toks.expect("}")
            tables[child] = (parents, rows)
        else:
            raise ParseError(f"unsupported construct {kw!r}", line, col)

    index = {name: i for i, name in enumerate(order)}
    schema = [VariableSchema(name, levels[name]) for name in order]
    arcs = []
    cpts = []
    for v, name in enumerate(order):
        if name not in tables:
            raise IncompleteTable(f"no probability block for {name!r}")
        parents, rows = tables[name]
        arcs.extend((index[p], v) for p in parents)
        configs = list(product(*(levels[p] for p in parents)))
        missing = [c for c in configs if c not in rows]
        if missing:
            raise IncompleteTable(f"{name!r} lacks rows for configurations {missing[:3]}")
        table = np.array([rows[c] for c in configs])
        cpts.append(Cpt(v, tuple(index[p] for p in parents), table))
    return DiscreteBn(Dag(len(order), arcs), schema, cpts)


def _fmt(p: float) -> str:
    return format(float(p), ".17g")


def write_bif(bn: DiscreteBn, name: str = "unknown") -> str:
    names = bn.names
    out = [f"network {name} {{", "}"]
    for v in bn.schema:
        out.append(f"variable {v.name} {{")
        out.append(f"  type discrete [ {v.cardinality} ] {{ {', '.join(v.levels)} }};")
        out.append("}")
    for cpt in bn.cpts:
        child = names[cpt.child]
        if not cpt.parents:
            out.append(f"probability ( {child} ) {{")
            out.append("  table " + ", ".join(_fmt(p) for p in cpt.table[0]) + ";")
        else:
            out.append(f"probability ( {child} | {', '.join(names[p] for p in cpt.parents)} ) {{")
            configs = product(*(bn.schema[p].levels for p in cpt.parents))
            for config, row in zip(configs, cpt.table):
                out.append(f"  ({', '.join(config)}) " + ", ".join(_fmt(p) for p in row) + ";")
        out.append("}")
    return "\n".join(out) + "\n"


def write_native(bn: DiscreteBn) -> str:
    names = bn.names
    out = [f"bn {bn.dag.n}"]
    for v in bn.schema:
        for label in (v.name, *v.levels):
            if not label or any(c.isspace() or c == "," for c in label):
                raise ValueError(f"label {label!r} cannot be written in native format")
        out.append(f"var {v.name} {','.join(v.levels)}")
    for cpt in bn.cpts:
        line = f"parents {names[cpt.child]}"
        if cpt.parents:
            line += " " + ",".join(names[p] for p in cpt.parents)
        out.append(line)
    for cpt in bn.cpts:
        for j, row in enumerate(cpt.table):
            out.append(f"cpt {names[cpt.child]} {j} " + " ".join(_fmt(p) for p in row))
    return "\n".join(out) + "\n"


def read_native(text: str) -> DiscreteBn:
    lines = [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), 1)]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError("empty network file", 1, 1)
    lineno, first = lines[0]
    head = first.split()
    if len(head) != 2 or head[0] != "bn" or not head[1].isdigit():
        raise ParseError("expected 'bn <N>' header", lineno, 1)
    n = int(head[1])
    schema: list[VariableSchema] = []
    index: dict[str, int] = {}
    parents: dict[int, tuple[int, ...]] = {}
    rows: dict[int, dict[int, list[float]]] = {}
    for lineno, line in lines[1:]:
        parts = line.split()
        kind = parts[0]
        if kind == "var":
            if len(parts) != 3:
                raise ParseError("expected 'var <name> <levels>'", lineno, 1)
            if parts[1] in index:
                raise ParseError(f"variable {parts[1]!r} declared twice", lineno, 1)
            lv = tuple(parts[2].split(","))
            if any(not x for x in lv) or len(set(lv)) != len(lv):
                raise ParseError(f"bad level list for {parts[1]!r}", lineno, 1)
            index[parts[1]] = len(schema)
            schema.append(VariableSchema(parts[1], lv))
        elif kind in ("parents", "cpt"):
            if len(parts) < 2 or parts[1] not in index:
                raise ParseError(f"unknown variable in {kind!r} record", lineno, 1)
            v = index[parts[1]]
            if kind == "parents":
                if len(parts) > 3:
                    raise ParseError("expected 'parents <child> [p1,p2,...]'", lineno, 1)
                names = parts[2].split(",") if len(parts) == 3 else []
                if any(p not in index for p in names):
                    raise ParseError(f"unknown parent in {names}", lineno, 1)
                parents[v] = tuple(index[p] for p in names)
            else:
                if len(parts) < 4 or not parts[2].isdigit():
                    raise ParseError("expected 'cpt <child> <row> <p1> ...'", lineno, 1)
                try:
                    probs = [float(x) for x in parts[3:]]
                except ValueError:
                    raise ParseError("malformed probability", lineno, 1) from None
                if len(probs) != schema[v].cardinality:
                    raise ParseError(
                        f"expected {schema[v].cardinality} probabilities, got {len(probs)}", lineno, 1
                    )
                rows.setdefault(v, {})[int(parts[2])] = probs
        else:
            raise ParseError(f"unknown record {kind!r}", lineno, 1)
    if len(schema) != n:
        raise ParseError(f"header declares {n} variables, found {len(schema)}", lineno, 1)
    cpts = []
    arcs = []
    for v in range(n):
        if v not in parents:
            raise ParseError(f"missing parents record for {schema[v].name!r}", lineno, 1)
        q = int(np.prod([schema[p].cardinality for p in parents[v]]))
        got = rows.get(v, {})
        if sorted(got) != list(range(q)):
            raise ParseError(f"CPT of {schema[v].name!r} is incomplete or has extra rows", lineno, 1)
        arcs.extend((p, v) for p in parents[v])
        try:
            cpts.append(Cpt(v, parents[v], np.array([got[j] for j in range(q)])))
        except InvalidDistribution as exc:
            raise ParseError(str(exc), lineno, 1) from None
    return DiscreteBn(Dag(n, arcs), schema, cpts)


def read_network(path) -> DiscreteBn:
    """Load a network file, native if it starts with ``bn``, BIF otherwise."""
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("bn ") or stripped.startswith("bn\t"):
        return read_native(text)
    return parse_bif(text)


def bundled_network(name: str) -> Path:
    """Path of a network file shipped with the package, e.g. ``"asia"``."""
    path = Path(__file__).parent / "networks" / f"{name}.bif"
    if not path.exists():
        raise FileNotFoundError(f"no bundled network named {name!r}")
    return path
