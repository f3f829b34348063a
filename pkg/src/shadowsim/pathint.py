"""Time-sliced path-sum propagation on a uniform 1-D grid.

One slice of duration ``eps`` maps

    psi'(x) = (1/A) * sum_a exp(i S(x, a) / hbar) * psi(a) * dx,
    A = sqrt(2 pi i hbar eps / m),

where ``S(x, a)`` is the action of the straight path a -> x:
``m (x - a)^2 / (2 eps) - eps * V((x + a) / 2)``.

The kinetic phase grows quadratically with ``|x - a|`` and a plain grid
sum aliases once the chirp outruns the grid. The sum is therefore cut
where the kinetic phase reaches ``PHASE_CAP`` (50 pi), and the cut is
smoothed with an erfc edge so the truncation error stays exponentially
small. The grid must resolve the slice length scale
``sigma_eps = sqrt(hbar eps / m)`` by at least ``MIN_RESOLUTION`` points
so the cut lies inside the Nyquist limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.signal import fftconvolve
from scipy.special import erfc

from .amplitude import DomainError

PHASE_CAP = 50.0 * math.pi
# sigma_eps / dx at which the Nyquist cut coincides with the phase cap
MIN_RESOLUTION = math.sqrt(2.0 * PHASE_CAP) / math.pi
PLATEAU_FRACTION = 0.6
EDGE_WIDTHS = 4.0


class ConfigurationError(ValueError):
    """Grid or time step outside the supported sampling regime."""


@dataclass(frozen=True)
class Potential:
    """A named potential ``V(x)``.

    kinds: ``free`` (V = 0), ``harmonic`` (``m omega^2 (x - center)^2 / 2``),
    ``linear`` (``-force * x``).
    """

    kind: str = "free"
    omega: float = 1.0
    center: float = 0.0
    force: float = 0.0

    def __post_init__(self):
        if self.kind not in ("free", "harmonic", "linear"):
            raise ConfigurationError(f"unknown potential kind {self.kind!r}")

    @property
    def is_free(self) -> bool:
        return self.kind == "free" or (self.kind == "linear" and self.force == 0.0)

    def __call__(self, x, mass: float = 1.0):
        x = np.asarray(x, dtype=float)
        if self.kind == "harmonic":
            return 0.5 * mass * self.omega ** 2 * (x - self.center) ** 2
        if self.kind == "linear":
            return -self.force * x
        return np.zeros_like(x)

    @classmethod
    def parse(cls, text: str) -> "Potential":
        """``free``, ``harmonic:omega=1,center=0`` or ``linear:force=0.1``."""
        kind, _, rest = text.strip().partition(":")
        kwargs = {}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, eq, value = item.partition("=")
            if not eq or key not in ("omega", "center", "force"):
                raise ConfigurationError(f"bad potential parameter {item!r}")
            kwargs[key] = float(value)
        return cls(kind, **kwargs)

    def spec(self) -> str:
        if self.kind == "harmonic":
            return f"harmonic:omega={self.omega!r},center={self.center!r}"
        if self.kind == "linear":
            return f"linear:force={self.force!r}"
        return "free"


@dataclass(frozen=True)
class PathParams:
    mass: float = 1.0
    hbar: float = 1.0
    potential: Potential = field(default_factory=Potential)

    def __post_init__(self):
        if not (self.mass > 0 and self.hbar > 0):
            raise ConfigurationError("mass and hbar must be positive")

    def V(self, x):
        return self.potential(x, self.mass)

    def slice_length(self, eps: float) -> float:
        """``sigma_eps = sqrt(hbar eps / m)``."""
        return math.sqrt(self.hbar * eps / self.mass)


def uniform_grid(start: float, stop: float, count: int) -> np.ndarray:
    """Half-open grid ``start + k (stop - start)/count``, k < count."""
    if count < 2:
        raise ConfigurationError("grid needs at least 2 points")
    return start + (stop - start) / count * np.arange(count)


@dataclass(frozen=True)
class PropagatorGrid:
    x: np.ndarray
    psi: np.ndarray
    t: float = 0.0
    params: PathParams = field(default_factory=PathParams)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        psi = np.asarray(self.psi, dtype=complex)
        if x.ndim != 1 or x.shape != psi.shape or len(x) < 3:
            raise ConfigurationError("x and psi must be 1-D arrays of equal length >= 3")
        steps = np.diff(x)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0) or steps[0] <= 0:
            raise ConfigurationError("grid must be uniform and increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "psi", psi)

    @property
    def dx(self) -> float:
        return (self.x[-1] - self.x[0]) / (len(self.x) - 1)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.dx)

    def normalized(self) -> "PropagatorGrid":
        return replace(self, psi=self.psi / math.sqrt(self.norm()))

    def boundary_amplitude(self) -> float:
        return float(max(abs(self.psi[0]), abs(self.psi[-1])))

    def density(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    def center(self) -> float:
        p = self.density()
        return float(np.sum(p * self.x) / np.sum(p))

    def width(self) -> float:
        p = self.density()
        p = p / np.sum(p)
        mu = np.sum(p * self.x)
        return float(math.sqrt(np.sum(p * (self.x - mu) ** 2)))


# ---------------------------------------------------------------------------
# single slice


def slice_action(x, a, eps: float, params: PathParams = PathParams(), rule: str = "midpoint"):
    """Action of the straight path ``a -> x`` over one slice."""
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    kinetic = params.mass * (x - a) ** 2 / (2.0 * eps)
    if rule == "midpoint":
        potential = params.V(0.5 * (x + a))
    elif rule == "trapezoid":
        potential = 0.5 * (params.V(x) + params.V(a))
    else:
        raise ConfigurationError(f"unknown potential rule {rule!r}")
    return kinetic - eps * potential


def slice_normalization(eps: float, params: PathParams = PathParams()) -> complex:
    """``A = sqrt(2 pi i hbar eps / m)`` (principal branch)."""
    return np.sqrt(2j * math.pi * params.hbar * eps / params.mass)


def window_halfwidth(eps: float, dx: float, params: PathParams = PathParams()) -> float:
    s = params.slice_length(eps)
    return min(math.sqrt(2.0 * PHASE_CAP) * s, math.pi * s * s / dx)


def kernel_window(d, eps: float, dx: float, params: PathParams = PathParams()):
    """Smooth cut-off weight of the slice kernel at separation ``d``."""
    W = window_halfwidth(eps, dx, params)
    edge = (1.0 - PLATEAU_FRACTION) * W / EDGE_WIDTHS
    w = 0.5 * erfc((np.abs(d) - PLATEAU_FRACTION * W) / edge)
    return np.where(np.abs(d) <= W, w, 0.0)


def check_sampling(eps: float, dx: float, domain: float, params: PathParams = PathParams()):
    """Raise :class:`ConfigurationError` unless the slice is well sampled."""
    if not eps > 0:
        raise ConfigurationError("epsilon must be positive")
    s = params.slice_length(eps)
    if s < MIN_RESOLUTION * dx * (1 - 1e-9):
        raise ConfigurationError(
            f"grid too coarse for epsilon={eps:g}: need sqrt(hbar*eps/m) >= "
            f"{MIN_RESOLUTION:.3f}*dx (got sqrt(hbar*eps/m)/dx = {s / dx:.3f})"
        )
    if s > domain / 10.0:
        raise ConfigurationError(
            f"epsilon={eps:g} too long for a domain of width {domain:g}: "
            f"need sqrt(hbar*eps/m) <= domain/10"
        )


class SlicePropagator:
    """One-slice map for a fixed grid, step and parameter set.

    ``method='auto'`` uses FFT convolution when the potential vanishes
    (the kernel is then translation invariant) and a banded sparse
    matrix otherwise.
    """

    def __init__(self, n: int, x0: float, dx: float, eps: float,
                 params: PathParams = PathParams(), rule: str = "midpoint",
                 method: str = "auto"):
        check_sampling(eps, dx, dx * (n - 1), params)
        self.n, self.x0, self.dx, self.eps = n, x0, dx, eps
        self.params, self.rule = params, rule
        W = window_halfwidth(eps, dx, params)
        half = int(W / dx)
        self.offsets = np.arange(-half, half + 1)
        d = self.offsets * dx
        A = slice_normalization(eps, params)
        kinetic = params.mass * d ** 2 / (2.0 * eps)
        self.taps = kernel_window(d, eps, dx, params) * np.exp(1j * kinetic / params.hbar) * dx / A
        if method == "auto":
            method = "convolve" if params.potential.is_free else "matrix"
        if method not in ("convolve", "matrix"):
            raise ConfigurationError(f"unknown method {method!r}")
        self.method = method
        self.matrix = self._build_matrix() if method == "matrix" else None

    def _build_matrix(self):
        n, dx, eps = self.n, self.dx, self.eps
        x = self.x0 + dx * np.arange(n)
        rows, cols, vals = [], [], []
        for off, tap in zip(self.offsets, self.taps):
            i = np.arange(max(0, -off), min(n, n - off))
            if not len(i):
                continue
            j = i + off
            # entry (i, j): arrival x_i, departure a_j
            V = slice_action(x[i], x[j], eps, self.params, self.rule)
            kinetic = self.params.mass * (x[i] - x[j]) ** 2 / (2.0 * eps)
            pot_phase = np.exp(1j * (V - kinetic) / self.params.hbar)
            rows.append(i)
            cols.append(j)
            vals.append(tap * pot_phase)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        )

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix @ psi
        return fftconvolve(psi, self.taps, mode="same")


@lru_cache(maxsize=16)
def _cached_propagator(n, x0, dx, eps, params, rule, method):
    return SlicePropagator(n, x0, dx, eps, params, rule, method)


def propagator_for(grid: PropagatorGrid, eps: float, rule: str = "midpoint",
                   method: str = "auto") -> SlicePropagator:
    return _cached_propagator(len(grid.x), float(grid.x[0]), float(grid.dx), float(eps),
                              grid.params, rule, method)


def slice_propagate(grid: PropagatorGrid, epsilon: float, rule: str = "midpoint",
                    method: str = "auto") -> PropagatorGrid:
    """Advance ``grid`` by one slice of length ``epsilon``."""
    prop = propagator_for(grid, epsilon, rule, method)
    return replace(grid, psi=prop(grid.psi), t=grid.t + epsilon)


# ---------------------------------------------------------------------------
# evolution


@dataclass(frozen=True)
class Trace:
    x: np.ndarray
    times: np.ndarray
    psi: np.ndarray  # (len(times), len(x))
    params: PathParams
    epsilon: float

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, k: int) -> PropagatorGrid:
        return PropagatorGrid(self.x, self.psi[k], float(self.times[k]), self.params)

    def norms(self) -> np.ndarray:
        dx = (self.x[-1] - self.x[0]) / (len(self.x) - 1)
        return np.sum(np.abs(self.psi) ** 2, axis=1) * dx

    def boundary_amplitudes(self) -> np.ndarray:
        """``max(|psi(x_0)|, |psi(x_last)|)`` for every stored state."""
        return np.maximum(np.abs(self.psi[:, 0]), np.abs(self.psi[:, -1]))

    def rows(self) -> Iterator[tuple[float, float, float, float]]:
        """Export rows ``(t, x, Re psi, Im psi)``."""
        for t, psi in zip(self.times.tolist(), self.psi):
            for x, re, im in zip(self.x.tolist(), psi.real.tolist(), psi.imag.tolist()):
                yield t, x, re, im


def evolve(grid: PropagatorGrid, epsilon: float, slices: int, renormalize: bool = False,
           record_every: int = 1, rule: str = "midpoint", method: str = "auto") -> Trace:
    """Apply ``slices`` slices, storing every ``record_every``-th state.

    With ``renormalize`` the state is rescaled to unit norm after every
    slice.
    """
    if slices < 0 or record_every < 1:
        raise DomainError("slices must be >= 0 and record_every >= 1")
    prop = propagator_for(grid, epsilon, rule, method)
    dx = grid.dx
    psi = grid.psi.copy()
    times, states = [grid.t], [psi]
    for k in range(1, slices + 1):
        psi = prop(psi)
        if renormalize:
            psi = psi / math.sqrt(np.sum(np.abs(psi) ** 2) * dx)
        if k % record_every == 0 or k == slices:
            times.append(grid.t + k * epsilon)
            states.append(psi)
    return Trace(grid.x, np.array(times), np.array(states), grid.params, epsilon)


# ---------------------------------------------------------------------------
# packets and analytic references


def gaussian_packet(x, x0: float = 0.0, sigma: float = 1.0, k0: float = 0.0) -> np.ndarray:
    """Normalised Gaussian whose density has standard deviation ``sigma``."""
    x = np.asarray(x, dtype=float)
    return (2.0 * math.pi * sigma ** 2) ** -0.25 * np.exp(
        -((x - x0) ** 2) / (4.0 * sigma ** 2) + 1j * k0 * x
    )


def free_gaussian_width(sigma0: float, t: float, params: PathParams = PathParams()) -> float:
    return math.sqrt(sigma0 ** 2 + (params.hbar * t / (2.0 * params.mass * sigma0)) ** 2)


def oscillator_length(params: PathParams) -> float:
    """Density standard deviation of the harmonic ground state."""
    return math.sqrt(params.hbar / (2.0 * params.mass * params.potential.omega))


def coherent_state(x, x0: float, params: PathParams) -> np.ndarray:
    """Displaced harmonic ground state; its center follows ``x0 cos(omega t)``."""
    return gaussian_packet(x, params.potential.center + x0, oscillator_length(params))


def free_kernel(b, a, T: float, params: PathParams = PathParams()):
    """``sqrt(m / (2 pi i hbar T)) exp(i m (b - a)^2 / (2 hbar T))``."""
    m, hbar = params.mass, params.hbar
    pref = np.sqrt(m / (2j * math.pi * hbar * T))
    return pref * np.exp(1j * m * (np.asarray(b) - np.asarray(a)) ** 2 / (2.0 * hbar * T))


def analytic_kernel(b, a, T: float, params: PathParams = PathParams()):
    """Closed-form kernel for any supported potential.

    Linear: free kernel times ``exp(i (F T (a+b)/2 - F^2 T^3 / (24 m)) / hbar)``.
    Harmonic: the Mehler kernel, valid for ``0 < omega T < pi``.
    """
    pot, m, hbar = params.potential, params.mass, params.hbar
    if pot.is_free:
        return free_kernel(b, a, T, params)
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if pot.kind == "linear":
        F = pot.force
        phase = F * T * (a + b) / 2.0 - F * F * T ** 3 / (24.0 * m)
        return free_kernel(b, a, T, params) * np.exp(1j * phase / hbar)
    w = pot.omega
    if not 0.0 < w * T < math.pi:
        raise DomainError("closed-form harmonic kernel needs 0 < omega*T < pi")
    xa, xb = a - pot.center, b - pot.center
    sn, cs = math.sin(w * T), math.cos(w * T)
    pref = np.sqrt(m * w / (2j * math.pi * hbar * sn))
    return pref * np.exp(1j * m * w * ((xa ** 2 + xb ** 2) * cs - 2.0 * xa * xb) / (2.0 * hbar * sn))


# ---------------------------------------------------------------------------
# kernels


def kernel_grid(a: float, b: float, T: float, slices: int, params: PathParams,
                resolution: float, half_width: float | None) -> np.ndarray:
    """Grid for kernel extraction with both ``a`` and ``b`` on grid points."""
    eps = T / slices
    dx = params.slice_length(eps) / resolution
    if b != a:
        dx = abs(b - a) / math.ceil(abs(b - a) / dx)
    if half_width is None:
        # fastest component that survives the window leaves at
        # k = PLATEAU * cap / sigma_eps; keep it on the grid until T
        reach = (PLATEAU_FRACTION * math.sqrt(2.0 * PHASE_CAP) + 2.0) * math.sqrt(
            params.hbar * T * slices / params.mass)
        half_width = abs(b - a) + reach
    n_side = int(math.ceil(half_width / dx))
    return a + dx * np.arange(-n_side, n_side + 1)


def discretized_kernel(a: float, b: float, T: float, slices: int,
                       params: PathParams = PathParams(), width: float | None = None,
                       resolution: float = 6.0, half_width: float | None = None,
                       rule: str = "midpoint") -> complex:
    """``K(b, a; T)`` by iterating the slice map on a delta-like start.

    The start is a unit-area Gaussian of standard deviation ``width``
    (default ``2 dx``, which shrinks with the slice length), so the result
    is the kernel smeared over ``a`` (see :func:`smeared_free_kernel`).
    ``width=0`` uses the grid delta ``1/dx`` instead.
    """
    if slices < 1:
        raise DomainError("slices must be >= 1")
    if T <= 0:
        raise DomainError("T must be positive")
    if width is not None and width < 0:
        raise DomainError("width must be non-negative")
    if resolution < MIN_RESOLUTION:
        raise ConfigurationError(f"resolution must be >= {MIN_RESOLUTION:.3f}")
    x = kernel_grid(a, b, T, slices, params, resolution, half_width)
    dx = x[1] - x[0]
    if width is None:
        width = 2.0 * dx
    if width == 0:
        psi = np.zeros(len(x), dtype=complex)
        psi[np.argmin(np.abs(x - a))] = 1.0 / dx
    else:
        psi = np.exp(-((x - a) ** 2) / (2.0 * width ** 2)) / (math.sqrt(2.0 * math.pi) * width)
    trace = evolve(PropagatorGrid(x, psi, 0.0, params), T / slices, slices,
                   record_every=slices, rule=rule)
    return complex(trace.psi[-1][np.argmin(np.abs(x - b))])


@dataclass(frozen=True)
class KernelComparison:
    slices: int
    value: complex
    reference: complex

    @property
    def rel_error_modulus(self) -> float:
        return abs(abs(self.value) / abs(self.reference) - 1.0)

    @property
    def phase_error(self) -> float:
        return abs(float(np.angle(self.value / self.reference)))

    @property
    def rel_error(self) -> float:
        return abs(self.value - self.reference) / abs(self.reference)


def kernel_study(a: float, b: float, T: float, slice_counts: Sequence[int],
                 params: PathParams = PathParams(), width: float | None = None,
                 **kwargs) -> list[KernelComparison]:
    """Compare discretized kernels with :func:`analytic_kernel`.

    By default the start is the ``2 dx`` Gaussian and the reference is
    the point kernel, so the error includes the start-state smearing,
    which vanishes under refinement. An explicit ``width > 0`` (free
    particle only) is compared with the equally smeared kernel instead,
    and ``width=0`` starts from the grid delta.
    """
    if width is not None and width > 0:
        if not params.potential.is_free:
            raise DomainError("smeared reference kernels exist only for the free particle")
        ref = complex(smeared_free_kernel(b, a, T, width, params))
    else:
        ref = complex(analytic_kernel(b, a, T, params))
    return [KernelComparison(n, discretized_kernel(a, b, T, n, params, width, **kwargs), ref)
            for n in slice_counts]


def smeared_free_kernel(b, a, T: float, width: float, params: PathParams = PathParams()):
    """Free kernel convolved with a unit-area Gaussian of std ``width`` in ``a``."""
    tau = params.hbar * T / params.mass
    z = width ** 2 + 1j * tau
    d = np.asarray(b) - np.asarray(a)
    return np.exp(-(d ** 2) / (2.0 * z)) / np.sqrt(2.0 * math.pi * z)


def compose_kernels(a: float, c: float, T1: float, T2: float,
                    params: PathParams = PathParams(), slices: int = 32,
                    width: float | None = None, dx: float | None = None,
                    half_width: float | None = None) -> complex:
    """``sum_b K(c, b; T2) K(b, a; T1) db`` from two independent evolutions.

    Both legs start from unit-area Gaussians of std ``width`` (at ``a``
    and at ``c``) on one shared grid; the second leg relies on the
    endpoint symmetry ``K(c, b) = K(b, c)`` of a real potential. The
    result is the kernel for ``T1 + T2`` smeared by ``width`` at both
    ends, which for a translation-invariant kernel equals a single smear
    of std ``sqrt(2) * width``.
    """
    if width is None:
        width = 0.25 * math.sqrt(params.hbar * (T1 + T2) / params.mass)
    eps1, eps2 = T1 / slices, T2 / slices
    if dx is None:
        dx = min(params.slice_length(eps1), params.slice_length(eps2)) / 6.0
    if half_width is None:
        tau = params.hbar * max(T1, T2) / params.mass
        half_width = abs(c - a) + 10.0 * (width + tau / width)
    mid = 0.5 * (a + c)
    n_side = int(math.ceil(half_width / dx))
    x = mid + dx * np.arange(-n_side, n_side + 1)

    def leg(x0, T):
        psi = np.exp(-((x - x0) ** 2) / (2.0 * width ** 2)) / (math.sqrt(2.0 * math.pi) * width)
        tr = evolve(PropagatorGrid(x, psi, 0.0, params), T / slices, slices, record_every=slices)
        return tr.psi[-1]

    return complex(np.sum(leg(c, T2) * leg(a, T1)) * dx)


# ---------------------------------------------------------------------------
# Schrodinger consistency


def hamiltonian_action(psi: np.ndarray, x: np.ndarray, params: PathParams) -> np.ndarray:
    """``-hbar^2/(2m) psi'' + V psi`` with a centered 3-point Laplacian (interior only)."""
    dx = x[1] - x[0]
    lap = (psi[2:] - 2.0 * psi[1:-1] + psi[:-2]) / dx ** 2
    return -(params.hbar ** 2) / (2.0 * params.mass) * lap + params.V(x[1:-1]) * psi[1:-1]


def schrodinger_residual(trace: Trace, margin: int = 0) -> float:
    """Largest normalised residual of the Schrodinger equation along a trace.

    At every interior stored state ``k``::

        r_k = || i hbar (psi_{k+1} - psi_{k-1}) / (2 dt) - H psi_k || / || psi_k ||

    using consecutive stored states (uniform spacing required). ``margin``
    grid points at each edge are left out of the norms.
    """
    if len(trace) < 3:
        raise DomainError("need at least 3 consecutive stored slices")
    dts = np.diff(trace.times)
    if not np.allclose(dts, dts[0], rtol=1e-9):
        raise DomainError("stored slices must be evenly spaced in time")
    dt = dts[0]
    x, params = trace.x, trace.params
    if margin < 0 or 2 * margin + 3 > len(x):
        raise DomainError("margin leaves no interior points")
    dx = x[1] - x[0]
    inner = slice(margin, len(x) - 2 - margin)  # indexes the interior arrays
    worst = 0.0
    for k in range(1, len(trace) - 1):
        dpsi = 1j * params.hbar * (trace.psi[k + 1] - trace.psi[k - 1])[1:-1] / (2.0 * dt)
        res = (dpsi - hamiltonian_action(trace.psi[k], x, params))[inner]
        norm = math.sqrt(np.sum(np.abs(trace.psi[k][1:-1][inner]) ** 2) * dx)
        worst = max(worst, math.sqrt(np.sum(np.abs(res) ** 2) * dx) / norm)
    return worst
