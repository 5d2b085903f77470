from __future__ import annotations

import json
import math

import pytest
from hypothesis import given, strategies as st

from shotgun.harness import (
    CollisionRow, DomainError, ExperimentConfig, collision_stats, radius_formulas, rows_to_csv,
    scan_sample, threshold_scan, write_csv,
)


def test_radius_formula_examples():
    w = radius_formulas(1000, 3, 2)
    assert w.R_minus == 4
    assert radius_formulas(10**5, 3, 2).R_plus == 12
    R_minus, R_plus, R_max = w
    assert R_minus <= R_max <= R_plus


@given(st.integers(3, 10**9), st.integers(3, 10), st.floats(0, 20))
def test_window_ordered(n, d, delta):
    w = radius_formulas(n, d, delta)
    assert w.R_minus <= w.R_plus
    ln = math.log(n)
    assert w.R_max == math.floor((ln + 2 * math.log(ln)) / (2 * math.log(d - 1)))


def test_formula_errors():
    with pytest.raises(DomainError):
        radius_formulas(2, 3)
    with pytest.raises(ValueError):
        radius_formulas(100, 2)
    with pytest.raises(ValueError):
        radius_formulas(100, 3, -1)


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        ExperimentConfig(n=[11], d=[3], radius=3)
    with pytest.raises(ValueError):
        ExperimentConfig(n=[10], d=[3], samples=0, radius=3)
    with pytest.raises(ValueError):
        ExperimentConfig(n=[10], d=[3], r_policy="nope")
    with pytest.raises(ValueError):
        ExperimentConfig(n=[10], d=[3])
    cfg = ExperimentConfig(n=100, d=3, r_policy="plus", delta=2)
    assert cfg.n == [100]
    assert cfg.resolve(100, 3) == radius_formulas(100, 3, 2).R_plus
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg.to_json()))
    assert ExperimentConfig.from_file(p) == cfg


def test_scan_rows():
    rec = scan_sample(300, 3, 1, 10.0)
    assert rec.r_distinct > 0 and rec.error == ""
    assert rec.in_window
    bad = scan_sample(301, 3, 1, 10.0)
    assert bad.error and bad.r_distinct == -1


def test_scan_reproducible(tmp_path):
    cfg = ExperimentConfig(n=[200, 100], d=[3], r_policy="plus", samples=3, seed_base=4)
    a = threshold_scan(cfg)
    b = threshold_scan(cfg)
    strip = lambda rows: [{**r.__dict__, "seconds": 0} for r in rows]  # noqa: E731
    assert strip(a) == strip(b)
    assert [(r.n, r.seed) for r in a] == [(100, 4), (100, 5), (100, 6), (200, 4), (200, 5), (200, 6)]
    write_csv(a, tmp_path / "scan.csv")
    lines = (tmp_path / "scan.csv").read_text().splitlines()
    assert len(lines) == 7 and lines[0].startswith("schema,n,d,seed")
    assert len(json.loads((tmp_path / "scan.json").read_text())) == 6


def test_collision_rows():
    cfg = ExperimentConfig(n=[500], d=[3], r_policy="plus", samples=200, sources=[1, 2])
    rows = collision_stats(cfg, radii=[1, 2, 3])
    assert len(rows) == 6
    assert all(isinstance(r, CollisionRow) for r in rows)
    for r in rows:
        assert r.samples == 200
        assert r.bound == pytest.approx(2 * r.sources**2 * 2 ** (2 * r.R) / 500)
        assert 0 <= r.mean_gamma <= r.max_gamma
    again = collision_stats(cfg, radii=[1, 2, 3])
    assert rows_to_csv(rows) == rows_to_csv(again)
    assert rows_to_csv([]) == ""


def test_collision_default_radii():
    cfg = ExperimentConfig(n=[1000], d=[3], r_policy="plus", samples=5)
    rows = collision_stats(cfg)
    assert [r.R for r in rows] == list(range(1, radius_formulas(1000, 3).R_max + 1))


@given(st.integers(3, 10**9), st.integers(3, 10))
def test_zero_delta_gap(n, d):
    w = radius_formulas(n, d, 0)
    assert 0 <= w.R_plus - w.R_minus <= 1


def test_parallel_equals_serial():
    base = dict(n=[150, 100], d=[3, 4], r_policy="plus", samples=2)
    a = threshold_scan(ExperimentConfig(**base, workers=1))
    b = threshold_scan(ExperimentConfig(**base, workers=2))
    strip = lambda rows: [{**r.__dict__, "seconds": 0} for r in rows]  # noqa: E731
    assert strip(a) == strip(b)


def test_rows_regenerable_from_seed():
    cfg = ExperimentConfig(n=[120, 240], d=[3], r_policy="plus", samples=5, seed_base=10)
    rows = threshold_scan(cfg)
    for r in rows[::2]:
        again = scan_sample(r.n, r.d, r.seed, r.delta, None)
        assert (again.r_distinct, again.gamma_at_r, again.in_window) == (r.r_distinct, r.gamma_at_r, r.in_window)
