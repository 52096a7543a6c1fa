import numpy as np
import pytest

from bnsparse.errors import CycleError, IncompleteTable, InvalidDistribution, ParseError
from bnsparse.graph import Dag
from bnsparse.model import Cpt, DiscreteBn, fit_parameters
from bnsparse.data import VariableSchema
from bnsparse.netio import bundled_network, parse_bif, read_native, read_network, write_bif, write_native

from conftest import random_bn

MINIMAL = """
network tiny {
}
variable rain {
  type discrete [ 2 ] { yes, no };
}
variable wet {
  type discrete [ 3 ] { dry, damp, soaked };
}
probability ( rain ) {
  table 0.2, 0.8;
}
probability ( wet | rain ) {
  (yes) 0.1, 0.3, 0.6;
  (no) 0.7, 0.2, 0.1;
}
"""


def test_parse_minimal():
    bn = parse_bif(MINIMAL)
    assert bn.names == ("rain", "wet")
    assert bn.dag == Dag(2, [(0, 1)])
    assert bn.schema[1].levels == ("dry", "damp", "soaked")
    np.testing.assert_array_equal(bn.cpts[0].table, [[0.2, 0.8]])
    np.testing.assert_allclose(bn.cpts[1].table, [[0.1, 0.3, 0.6], [0.7, 0.2, 0.1]], atol=1e-15)


def test_row_sum_violation():
    with pytest.raises(InvalidDistribution):
        parse_bif(MINIMAL.replace("table 0.2, 0.8", "table 0.2, 0.7"))


def test_rounded_rows_are_normalised():
    bn = parse_bif(MINIMAL.replace("table 0.2, 0.8", "table 0.2, 0.8000005"))
    assert bn.cpts[0].table.sum() == pytest.approx(1.0, abs=1e-15)


def test_undeclared_variable():
    text = MINIMAL.replace("probability ( wet | rain )", "probability ( wet | snow )")
    with pytest.raises(ParseError):
        parse_bif(text)


def test_incomplete_table():
    text = MINIMAL.replace("  (no) 0.7, 0.2, 0.1;\n", "")
    with pytest.raises(IncompleteTable):
        parse_bif(text)


def test_syntax_error_location():
    with pytest.raises(ParseError) as info:
        parse_bif(MINIMAL.replace("type discrete [ 2 ]", "type discrete 2 ]"))
    assert info.value.line == 5


def test_cycle():
    text = """
network c {
}
variable a { type discrete [ 2 ] { 0, 1 }; }
variable b { type discrete [ 2 ] { 0, 1 }; }
probability ( a | b ) { (0) 0.5, 0.5; (1) 0.5, 0.5; }
probability ( b | a ) { (0) 0.5, 0.5; (1) 0.5, 0.5; }
"""
    with pytest.raises(CycleError):
        parse_bif(text)


def test_bif_round_trip():
    bn = read_network(bundled_network("asia"))
    assert len(bn.dag.arcs) == 8
    assert parse_bif(write_bif(bn, "asia")) == bn
    rng = np.random.default_rng(3)
    for _ in range(10):
        bn = random_bn(rng, list(rng.integers(2, 5, size=5)), 0.5, 0.7)
        assert parse_bif(write_bif(bn)) == bn


def v_structure():
    schema = [VariableSchema(f"X{i}", ("0", "1")) for i in range(3)]
    cpts = [
        Cpt(0, (), [[0.5, 0.5]]),
        Cpt(1, (), [[0.5, 0.5]]),
        Cpt(2, (0, 1), [[0.95, 0.05], [0.2, 0.8], [0.2, 0.8], [0.05, 0.95]]),
    ]
    return DiscreteBn(Dag(3, [(0, 2), (1, 2)]), schema, cpts)


def test_native_round_trip(sparse_pair):
    bn = v_structure()
    assert read_native(write_native(bn)) == bn
    fitted = fit_parameters(Dag(2, [(0, 1)]), sparse_pair)
    assert read_native(write_native(fitted)) == fitted
    rng = np.random.default_rng(8)
    for _ in range(10):
        bn = random_bn(rng, list(rng.integers(2, 5, size=4)), 0.6, 0.5)
        assert read_native(write_native(bn)) == bn


def test_native_truncated():
    text = write_native(v_structure())
    lines = text.splitlines()
    for cut in (1, len(lines) // 2, len(lines) - 1):
        with pytest.raises(ParseError):
            read_native("\n".join(lines[:cut]) + "\n")


def test_native_garbage():
    with pytest.raises(ParseError):
        read_native("hello\n")
    with pytest.raises(ParseError):
        read_native(write_native(v_structure()).replace("cpt X0 0 0.5 0.5", "cpt X0 0 0.5 0.6"))


def test_read_network_detects_format(tmp_path):
    bn = v_structure()
    (tmp_path / "a.bn").write_text(write_native(bn))
    (tmp_path / "a.bif").write_text(write_bif(bn))
    assert read_network(tmp_path / "a.bn") == bn
    assert read_network(tmp_path / "a.bif") == bn
