import math

import numpy as np
import pytest

from bnsparse.bench import (
    DEFAULT_CELLS,
    BenchmarkPlan,
    Cell,
    ResultRow,
    aggregate,
    emit_tables,
    markdown_table,
    read_raw_csv,
    replicate_seeds,
    run_benchmark,
    training_size,
)
from bnsparse.netio import bundled_network, read_network


@pytest.fixture(scope="module")
def asia():
    return read_network(bundled_network("asia"))


def test_training_size():
    assert training_size(0.1, 18) == 10
    assert training_size(1.0, 18) == 18
    assert training_size(0.5, 17, minimum=1) == 9
    assert training_size(0.5, 17) == 10
    assert training_size(5.0, 18) == 90
    assert training_size(0.1, 18, minimum=1) == 2


def test_cell_parse_and_labels():
    assert Cell.parse("bds:mu:1").label == "MU+BDs(1)"
    assert Cell.parse("bdeu:u:10").label == "U+BDeu(10)"
    assert Cell.parse("bic").label == "U+BIC"
    assert len(DEFAULT_CELLS) == 9
    with pytest.raises(ValueError):
        Cell.parse("foo")


def test_plan_validation():
    with pytest.raises(ValueError):
        BenchmarkPlan("x", ratios=[0.0])
    with pytest.raises(ValueError):
        BenchmarkPlan("x", replicates=0)


def test_replicate_seeds_independent():
    a_train, a_test = replicate_seeds(0, 0, 0)
    b_train, _ = replicate_seeds(0, 0, 1)
    draw = lambda s: np.random.default_rng(s).random(4).tolist()
    assert draw(a_train) != draw(a_test) != draw(b_train)
    assert draw(replicate_seeds(0, 0, 0)[0]) == draw(a_train)


def test_single_cell_single_replicate(asia, tmp_path):
    plan = BenchmarkPlan(asia, ratios=[1.0], replicates=1, test_size=200, cells=["bds:mu:1"], seed=3)
    rows = run_benchmark(plan)
    assert len(rows) == 1
    row = rows[0]
    assert row.n_train == 18 and row.n_test == 200
    assert row.shd >= 0 and row.arcs_ratio == row.arcs_learned / 8
    assert math.isfinite(row.predictive_ll) and row.predictive_ll < 0
    paths = emit_tables(rows, tmp_path)
    lines = paths["raw"].read_text().splitlines()
    assert len(lines) == 2
    assert lines[0].split(",")[:3] == ["ratio", "replicate", "cell"]
    assert "wall_time" not in lines[0]
    assert "| n/p | MU+BDs(1) |" in paths["shd"].read_text()


def _row(shd, cell="U+BIC", ratio=0.1, rep=0):
    return ResultRow(ratio, rep, cell, 10, 100, shd, shd, shd / 8, -100.0 * shd)


def test_aggregate_mean():
    rows = [_row(10, rep=0), _row(6, rep=1)]
    assert aggregate(rows, "shd") == {(0.1, "U+BIC"): 8.0}
    assert "| 0.1 | 8.00 |" in markdown_table(rows, "shd")
    assert aggregate(rows, "loglik")[(0.1, "U+BIC")] == pytest.approx(8.0)


def test_errors_are_skipped_in_means():
    bad = ResultRow(0.1, 2, "U+BIC", 10, 100, None, None, None, None, error="boom")
    assert aggregate([_row(4), bad], "shd") == {(0.1, "U+BIC"): 4.0}
    assert "error" in markdown_table([bad, _row(4, cell="MU+BDs(1)")], "shd")


def test_csv_round_trip_reproduces_tables(asia, tmp_path):
    plan = BenchmarkPlan(asia, ratios=[0.5, 1.0], replicates=2, test_size=100,
                         cells=["bdeu:u:1", "bic"], seed=1)
    rows = run_benchmark(plan)
    paths = emit_tables(rows, tmp_path)
    back = read_raw_csv(paths["raw"])
    for metric in ("shd", "arcs", "loglik"):
        assert markdown_table(back, metric) == paths[metric].read_text()


def test_deterministic_output(asia, tmp_path):
    plan = BenchmarkPlan(asia, ratios=[0.1], replicates=3, test_size=100,
                         cells=["bds:mu:1", "bdeu:u:1"], seed=9)
    a = emit_tables(run_benchmark(plan), tmp_path / "a")
    b = emit_tables(run_benchmark(plan), tmp_path / "b")
    for key in a:
        assert a[key].read_bytes() == b[key].read_bytes()


def test_parallel_matches_serial(asia):
    kw = dict(ratios=[0.5], replicates=2, test_size=50, cells=["bic"], seed=4)
    serial = run_benchmark(BenchmarkPlan(asia, **kw))
    parallel = run_benchmark(BenchmarkPlan(asia, workers=2, **kw))
    strip = lambda rows: [(r.replicate, r.shd, r.predictive_ll) for r in rows]
    assert strip(serial) == strip(parallel)


def test_emit_requires_rows(tmp_path):
    with pytest.raises(ValueError):
        emit_tables([], tmp_path)
