import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shadowsim.amplitude import DomainError
from shadowsim.experiment import (
    OUTCOMES,
    TSIRELSON,
    amplitude_pipeline_probabilities,
    chsh,
    closed_form_probabilities,
    correlation,
    estimate_chsh_from_records,
    estimate_correlation,
    joint_distribution,
    mach_zehnder_probabilities,
    run_chsh_experiment,
    sample_coincidences,
    scan_rows,
)

angles = st.floats(-20.0, 20.0, allow_nan=False)
OPTIMAL = (0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4)


@given(angles, angles)
def test_distribution_normalized_and_symmetric(alpha, beta):
    d = joint_distribution(alpha, beta)
    assert d.as_array().sum() == pytest.approx(1.0, abs=1e-12)
    assert d.p_uu == d.p_dd and d.p_ud == d.p_du
    assert d.correlation == pytest.approx(math.cos(beta - alpha), abs=1e-12)


@given(angles, angles)
def test_marginals_do_not_depend_on_far_setting(alpha, beta):
    d = joint_distribution(alpha, beta)
    assert d.p_left_u == pytest.approx(0.5, abs=1e-15)
    assert d.p_right_u == pytest.approx(0.5, abs=1e-15)


def test_known_points():
    d = joint_distribution(0.0, 0.0)
    assert (d.p_uu, d.p_ud) == pytest.approx((0.5, 0.0), abs=1e-15)
    d = joint_distribution(0.0, math.pi)
    assert (d.p_uu, d.p_ud) == pytest.approx((0.0, 0.5), abs=1e-15)
    assert correlation(0.0, math.pi / 2) == pytest.approx(0.0, abs=1e-15)


@given(st.lists(st.tuples(angles, angles), min_size=1, max_size=30))
def test_vectorized_pipeline_agrees(points):
    a, b = np.array(points).T
    closed = np.array(closed_form_probabilities(a, b))
    assert np.max(np.abs(amplitude_pipeline_probabilities(a, b) - closed)) < 1e-12


def test_chsh_optimal_and_flat():
    res = chsh(*OPTIMAL)
    assert res.S == pytest.approx(TSIRELSON, abs=1e-12)
    assert res.violated
    flat = chsh(0.3, 0.3, 0.3, 0.3)
    assert flat.S == pytest.approx(2.0, abs=1e-12)
    assert not flat.violated


@given(angles, angles, angles, angles)
def test_chsh_never_beyond_tsirelson(a1, a2, b1, b2):
    assert abs(chsh(a1, a2, b1, b2).S) <= TSIRELSON + 1e-12


def test_sampler_is_worker_invariant_and_batch_consistent():
    one = sample_coincidences(0.2, 1.1, 150_000, seed=11)
    many = sample_coincidences(0.2, 1.1, 150_000, seed=11, workers=3)
    assert np.array_equal(one.outcome, many.outcome)
    assert np.array_equal(one.pair, many.pair)
    tail = sample_coincidences(0.2, 1.1, 50_000, seed=11, start=100_000)
    assert np.array_equal(one.outcome[100_000:], tail.outcome)


def test_sampler_never_draws_impossible_outcomes():
    table = sample_coincidences(0.0, 0.0, 100_000, seed=3)
    counts = dict(zip(OUTCOMES, table.counts()))
    assert counts[("u", "d'")] == 0 and counts[("d", "u'")] == 0


def test_records_carry_seed_paths():
    table = sample_coincidences(0.5, 0.1, 200, seed=9, start=65_530)
    recs = list(table.records())
    assert recs[0].seed_path == "9/0/65530"
    assert recs[-1].seed_path == "9/1/193"
    assert all(r.assignment.left_tangible in ("a", "b") for r in recs)


def test_estimate_correlation_accepts_records_and_tables():
    table = sample_coincidences(0.0, 1.0, 20_000, seed=2)
    e_table = estimate_correlation(table)
    e_recs = estimate_correlation(list(table.records()))
    assert e_table == e_recs
    assert abs(e_table[0] - math.cos(1.0)) < 4 * e_table[1]


def test_estimate_needs_enough_records():
    with pytest.raises(DomainError):
        estimate_correlation(sample_coincidences(0.0, 0.0, 50, seed=1))
    with pytest.raises(DomainError):
        estimate_chsh_from_records({}, OPTIMAL)


def test_run_chsh_small():
    est, tables = run_chsh_experiment(OPTIMAL, 100_000, seed=4)
    assert len(tables) == 4
    assert abs(est.S - TSIRELSON) < 4 * est.S_err
    assert est.S_err == pytest.approx(math.sqrt(4 * 0.5 / 100_000), rel=0.05)


@given(st.floats(-10, 10, allow_nan=False))
def test_mach_zehnder(phi):
    p_u, p_d = mach_zehnder_probabilities(phi)
    assert p_u == pytest.approx(math.cos(phi / 2) ** 2, abs=1e-12)
    assert p_u + p_d == pytest.approx(1.0, abs=1e-12)


def test_scan_rows_order():
    rows = list(scan_rows([0.0, 1.0], [0.0, 0.5, 1.0]))
    assert [(r[0], r[1]) for r in rows] == [(a, b) for a in (0.0, 1.0) for b in (0.0, 0.5, 1.0)]
