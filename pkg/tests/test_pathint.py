import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shadowsim import pathint as pi
from shadowsim.amplitude import DomainError

FREE = pi.PathParams()
HARMONIC = pi.PathParams(potential=pi.Potential("harmonic"))


def free_grid(n=2048, half=20.0, sigma=1.0, x0=0.0, k0=0.0, params=FREE):
    x = pi.uniform_grid(-half, half, n)
    return pi.PropagatorGrid(x, pi.gaussian_packet(x, x0, sigma, k0), 0.0, params).normalized()


def step(grid, cells=6.0):
    return (cells * grid.dx) ** 2 * grid.params.mass / grid.params.hbar


def test_uniform_grid_is_half_open():
    x = pi.uniform_grid(0.0, 1.0, 4)
    assert x.tolist() == [0.0, 0.25, 0.5, 0.75]


def test_slice_normalization_principal_branch():
    A = pi.slice_normalization(0.01)
    assert A == pytest.approx(np.sqrt(2j * math.pi * 0.01))
    assert 0 < np.angle(A) < math.pi / 2


def test_potential_parse_round_trip():
    pot = pi.Potential.parse("harmonic:omega=2,center=0.5")
    assert pot == pi.Potential("harmonic", omega=2.0, center=0.5)
    assert pi.Potential.parse(pot.spec()) == pot
    assert pi.Potential.parse("linear:force=0").is_free
    with pytest.raises(pi.ConfigurationError):
        pi.Potential.parse("harmonic:k=1")
    with pytest.raises(pi.ConfigurationError):
        pi.Potential.parse("quartic")


def test_sampling_guard():
    with pytest.raises(pi.ConfigurationError, match="coarse"):
        pi.check_sampling(1e-4, 0.05, 40.0)
    with pytest.raises(pi.ConfigurationError, match="domain"):
        pi.check_sampling(100.0, 0.05, 40.0)
    pi.check_sampling(0.1, 0.05, 40.0)


def test_bad_grid_rejected():
    with pytest.raises(pi.ConfigurationError):
        pi.PropagatorGrid(np.array([0.0, 1.0, 3.0]), np.zeros(3))


def test_window_is_flat_then_vanishes():
    eps, dx = 0.1, 0.05
    W = pi.window_halfwidth(eps, dx)
    w = pi.kernel_window(np.array([0.0, 0.2 * W, 0.6 * W, W, 1.01 * W]), eps, dx)
    assert w[0] == pytest.approx(1.0, abs=1e-12)
    assert w[1] == pytest.approx(1.0, abs=1e-7)
    assert w[2] == pytest.approx(0.5, abs=1e-12)
    assert w[3] < 1e-6 and w[4] == 0.0


def test_single_slice_kernel_is_exact():
    got = pi.discretized_kernel(0.0, 0.7, 0.5, 1, width=0)
    assert got == pytest.approx(complex(pi.free_kernel(0.7, 0.0, 0.5)), abs=1e-12)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-1, 1))
def test_slice_map_is_linear(c1, c2, k0):
    g1 = free_grid(n=512, half=10.0, k0=k0)
    g2 = free_grid(n=512, half=10.0, x0=1.0)
    eps = step(g1)
    mixed = pi.PropagatorGrid(g1.x, c1 * g1.psi + 1j * c2 * g2.psi)
    lhs = pi.slice_propagate(mixed, eps).psi
    rhs = c1 * pi.slice_propagate(g1, eps).psi + 1j * c2 * pi.slice_propagate(g2, eps).psi
    assert np.max(np.abs(lhs - rhs)) < 1e-12


@given(st.integers(-60, 60))
def test_translation_covariance(shift):
    g1 = free_grid(n=1024, half=10.0)
    g2 = pi.PropagatorGrid(g1.x, np.roll(g1.psi, shift))
    eps = step(g1)
    a = pi.slice_propagate(g1, eps).psi
    b = pi.slice_propagate(g2, eps).psi
    inner = slice(200, -200)
    assert np.max(np.abs(np.roll(a, shift)[inner] - b[inner])) < 1e-12


def test_matrix_and_convolution_agree():
    g = free_grid(n=512, half=10.0, k0=0.7)
    eps = step(g)
    a = pi.slice_propagate(g, eps, method="convolve").psi
    b = pi.slice_propagate(g, eps, method="matrix").psi
    assert np.max(np.abs(a - b)) < 1e-12


def test_free_norm_and_spreading():
    g = free_grid(sigma=2.0)
    trace = pi.evolve(g, step(g), 1000, record_every=100)
    assert np.max(np.abs(trace.norms() - 1.0)) < 1e-3
    for k in range(len(trace)):
        s = trace[k]
        assert s.width() == pytest.approx(pi.free_gaussian_width(2.0, s.t), rel=1e-2)


def test_moving_packet_center():
    g = free_grid(sigma=1.0, k0=1.5)
    trace = pi.evolve(g, step(g), 200, record_every=200)
    final = trace[1]
    assert final.center() == pytest.approx(1.5 * final.t, abs=1e-4)


def test_free_kernel_from_grid_delta():
    # every free slice kernel is exact, so only grid effects remain
    for k in pi.kernel_study(0.0, 1.0, 1.0, (4, 64), width=0):
        assert k.rel_error < 1e-6


def test_default_kernel_converges_monotonically():
    study = pi.kernel_study(0.0, 1.0, 1.0, (8, 16, 32, 64))
    errors = [k.rel_error for k in study]
    assert all(e2 < e1 for e1, e2 in zip(errors, errors[1:]))
    assert study[-1].rel_error_modulus < 1e-2 and study[-1].phase_error < 2e-2


def test_smeared_start_matches_smeared_reference():
    k = pi.kernel_study(0.0, 1.0, 1.0, (16,), width=0.1)[0]
    assert k.rel_error < 1e-5
    with pytest.raises(DomainError):
        pi.kernel_study(0.0, 1.0, 1.0, (8,), HARMONIC, width=0.1)


def test_linear_kernel_phase_converges_at_second_order():
    params = pi.PathParams(potential=pi.Potential("linear", force=2.0))
    coarse, fine = pi.kernel_study(0.0, 1.0, 1.0, (8, 16), params, width=0)
    # the midpoint rule misses -F^2 eps^3 / (24 m) per slice
    assert coarse.phase_error == pytest.approx(4.0 / (24 * 8 ** 2), rel=1e-3)
    assert coarse.phase_error / fine.phase_error == pytest.approx(4.0, rel=1e-2)
    assert fine.rel_error_modulus < 1e-6


@pytest.mark.parametrize("rule, modulus_order", [("midpoint", 1), ("trapezoid", 2)])
def test_harmonic_kernel_convergence_orders(rule, modulus_order):
    coarse, fine = pi.kernel_study(-0.5, 1.0, 1.0, (8, 16), HARMONIC, width=0, rule=rule)
    assert coarse.phase_error / fine.phase_error == pytest.approx(4.0, rel=0.05)
    ratio = coarse.rel_error_modulus / fine.rel_error_modulus
    assert ratio == pytest.approx(2.0 ** modulus_order, rel=0.05)


def test_harmonic_reference_range():
    with pytest.raises(DomainError):
        pi.analytic_kernel(1.0, 0.0, 4.0, HARMONIC)


def test_kernel_composition():
    T1, T2 = 0.6, 0.9
    width = 0.25 * math.sqrt(T1 + T2)
    got = pi.compose_kernels(-0.3, 0.8, T1, T2, width=width)
    ref = pi.smeared_free_kernel(0.8, -0.3, T1 + T2, width * math.sqrt(2))
    assert abs(got - ref) / abs(ref) < 1e-6


def test_coherent_state_oscillates():
    x = pi.uniform_grid(-10, 10, 2048)
    g = pi.PropagatorGrid(x, pi.coherent_state(x, 2.0, HARMONIC), 0.0, HARMONIC).normalized()
    eps = step(g)
    trace = pi.evolve(g, eps, int(round(math.pi / eps)), renormalize=True, record_every=50)
    err = max(abs(trace[k].center() - 2.0 * math.cos(trace[k].t)) for k in range(len(trace)))
    assert err < 1e-4


def test_ground_state_is_stationary():
    x = pi.uniform_grid(-10, 10, 2048)
    g = pi.PropagatorGrid(x, pi.coherent_state(x, 0.0, HARMONIC), 0.0, HARMONIC).normalized()
    eps = step(g)
    period = int(round(2 * math.pi / eps))
    trace = pi.evolve(g, eps, period, renormalize=True, record_every=period // 4)
    for k in range(len(trace)):
        assert np.max(np.abs(trace[k].density() - g.density())) < 1e-3


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_plane_wave_residual_at_floor(k):
    x = pi.uniform_grid(-20, 20, 2048)
    g = pi.PropagatorGrid(x, np.exp(1j * k * x))
    eps = step(g)
    trace = pi.evolve(g, eps, 4)
    # the truncated edges spoil a band one window wide on each side
    margin = 4 * int(math.ceil(pi.window_halfwidth(eps, g.dx) / g.dx))
    assert pi.schrodinger_residual(trace, margin=margin) < 1e-4


def test_boundary_invariant_on_wide_grid():
    g = free_grid(n=4096, half=40.0, sigma=3.7)
    trace = pi.evolve(g, step(g), 1000, record_every=10)
    assert trace.boundary_amplitudes().max() < 1e-8
    assert np.max(np.abs(trace.norms() - 1.0)) < 1e-3


def test_residual_needs_three_states():
    g = free_grid(n=512, half=10.0)
    with pytest.raises(DomainError):
        pi.schrodinger_residual(pi.evolve(g, step(g), 1))


def test_residual_shrinks_with_step():
    x = pi.uniform_grid(-10, 10, 2048)
    g = pi.PropagatorGrid(x, pi.coherent_state(x, 2.0, HARMONIC), 0.0, HARMONIC).normalized()
    eps = step(g, 8.0)
    r1 = pi.schrodinger_residual(pi.evolve(g, eps, 20))
    r2 = pi.schrodinger_residual(pi.evolve(g, eps / 2, 20))
    assert 1.5 <= r1 / r2 <= 2.5
    # refine dx alongside: dx^2 proportional to eps
    x2 = pi.uniform_grid(-10, 10, 2896)
    g2 = pi.PropagatorGrid(x2, pi.coherent_state(x2, 2.0, HARMONIC), 0.0, HARMONIC).normalized()
    r3 = pi.schrodinger_residual(pi.evolve(g2, eps * (g2.dx / g.dx) ** 2, 20))
    assert 1.5 <= r1 / r3 <= 2.5


def test_trace_rows():
    g = free_grid(n=128, half=10.0)
    trace = pi.evolve(g, 1.0, 2)
    rows = list(trace.rows())
    assert len(rows) == 3 * 128
    assert rows[0][:2] == (0.0, -10.0)
