"""Two-particle interference statistics.

Closed-form joint detector probabilities for the two-wing interferometer,
the correlation function and CHSH combination built on them, and a
seeded Monte Carlo coincidence sampler.

Outcome index order throughout: ``(u,u'), (u,d'), (d,u'), (d,d')``.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import rng as rngmod
from .amplitude import DomainError, probability_of
from .interferometer import Layout, build_mach_zehnder, build_rarity_tapster, path_factors
from .streams import (
    SourceAssignment,
    _pair_outcome,
    joint_amplitude,
    single_stream,
    source_normalization,
    stream_amplitude,
)

LEFT = ("u", "d")
RIGHT = ("u'", "d'")
OUTCOMES = tuple((l, r) for l in LEFT for r in RIGHT)
AGREEMENT_SIGN = np.array([1, -1, -1, 1])

ROUTE_TOL = 1e-12
TSIRELSON = 2.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class JointDistribution:
    p_uu: float
    p_ud: float
    p_du: float
    p_dd: float
    alpha: float
    beta: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p_uu, self.p_ud, self.p_du, self.p_dd])

    @property
    def correlation(self) -> float:
        return (self.p_uu + self.p_dd) - (self.p_ud + self.p_du)

    @property
    def p_left_u(self) -> float:
        return self.p_uu + self.p_ud

    @property
    def p_right_u(self) -> float:
        return self.p_uu + self.p_du


def closed_form_probabilities(alpha, beta):
    """``(p_uu, p_ud, p_du, p_dd)``; broadcasts over numpy arrays."""
    half = 0.5 * (np.asarray(beta) - np.asarray(alpha))
    same = 0.5 * np.cos(half) ** 2
    diff = 0.5 * np.sin(half) ** 2
    return same, diff, diff, same


def amplitude_probabilities(layout: Layout) -> np.ndarray:
    """Born probabilities of the four outcomes from the layout's path amplitudes."""
    return np.array([probability_of(joint_amplitude(layout, l, r)) for l, r in OUTCOMES])


def amplitude_pipeline_probabilities(alpha, beta, layout: Layout | None = None) -> np.ndarray:
    """Vectorised amplitude route: shape ``(4, n)`` outcome probabilities.

    Walks the layout's factor lists once and substitutes arrays of
    shifter settings for the ``PS_alpha``/``PS_beta`` factors, then sums
    products over the correlated path pairs exactly as the scalar stream
    composition does.
    """
    layout = layout or build_rarity_tapster(0.0, 0.0)
    settings = {"PS_alpha": np.atleast_1d(np.asarray(alpha, dtype=float)),
                "PS_beta": np.atleast_1d(np.asarray(beta, dtype=float))}
    brakets = {}
    for p in layout.paths:
        for det in layout.detectors_for(p):
            amp = np.ones(np.broadcast(*settings.values()).shape, dtype=complex)
            for eid, factor in path_factors(layout, p, det):
                amp = amp * (np.exp(1j * settings[eid]) if eid in settings else factor)
            brakets[(p.label, det)] = amp
    norm = source_normalization(layout)
    out = []
    for l, r in OUTCOMES:
        amp = sum(brakets[(pl, l)] * brakets[(pr, r)] for pl, pr in layout.pairs)
        out.append(np.abs(norm * amp) ** 2)
    return np.array(out)


def joint_distribution(alpha: float, beta: float, check: bool = True) -> JointDistribution:
    """Joint detector distribution at shifter settings ``alpha``, ``beta``.

    With ``check`` the closed form is compared against squared composite
    amplitudes of the built layout; a mismatch above 1e-12 raises
    ``ArithmeticError``.
    """
    probs = np.array([float(p) for p in closed_form_probabilities(alpha, beta)])
    if check:
        via_amplitudes = amplitude_probabilities(build_rarity_tapster(alpha, beta))
        gap = np.max(np.abs(via_amplitudes - probs))
        if gap > ROUTE_TOL:
            raise ArithmeticError(
                f"closed form and amplitude pipeline disagree by {gap:.3g} "
                f"at alpha={alpha!r}, beta={beta!r}"
            )
    return JointDistribution(*probs, alpha=float(alpha), beta=float(beta))


def correlation(alpha: float, beta: float) -> float:
    """``E = P(same) - P(different)``, which equals ``cos(beta - alpha)``."""
    p_uu, p_ud, p_du, p_dd = closed_form_probabilities(alpha, beta)
    return float((p_uu + p_dd) - (p_ud + p_du))


@dataclass(frozen=True)
class ChshResult:
    angles: tuple[float, float, float, float]
    E: tuple[float, float, float, float]
    S: float
    E_err: tuple[float, float, float, float] | None = None
    S_err: float | None = None

    @property
    def violated(self) -> bool:
        return abs(self.S) > 2.0

    @property
    def settings(self) -> tuple[tuple[float, float], ...]:
        return chsh_settings(*self.angles)


def chsh_settings(alpha1, alpha2, beta1, beta2):
    """The four (alpha, beta) settings in CHSH term order."""
    return ((alpha1, beta1), (alpha1, beta2), (alpha2, beta1), (alpha2, beta2))


def _chsh_combine(E):
    return E[0] - E[1] + E[2] + E[3]


def chsh(alpha1: float, alpha2: float, beta1: float, beta2: float) -> ChshResult:
    """``S = E(a1,b1) - E(a1,b2) + E(a2,b1) + E(a2,b2)``."""
    E = tuple(correlation(a, b) for a, b in chsh_settings(alpha1, alpha2, beta1, beta2))
    return ChshResult((alpha1, alpha2, beta1, beta2), E, _chsh_combine(E))


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class CoincidenceRecord:
    trial: int
    left: str
    right: str
    assignment: SourceAssignment
    seed_path: str


@dataclass
class CoincidenceTable:
    """Columnar store of sampled coincidences for one setting.

    ``outcome`` indexes :data:`OUTCOMES`, ``pair`` indexes the correlated
    path pairs of the layout (0 for (a,a'), 1 for (b,b')).
    """

    alpha: float
    beta: float
    seed: int
    outcome: np.ndarray
    pair: np.ndarray
    start: int = 0
    layout: Layout = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.outcome)

    def counts(self) -> np.ndarray:
        return np.bincount(self.outcome, minlength=4)

    def frequencies(self) -> np.ndarray:
        return self.counts() / len(self)

    def records(self) -> Iterator[CoincidenceRecord]:
        layout = self.layout or build_rarity_tapster(self.alpha, self.beta)
        for i, (o, k) in enumerate(zip(self.outcome.tolist(), self.pair.tolist())):
            trial = self.start + i
            left, right = OUTCOMES[o]
            assignment = _pair_outcome(layout, k)[0]
            yield CoincidenceRecord(trial, left, right, assignment,
                                    rngmod.seed_path(self.seed, trial))

    def rows(self) -> Iterator[tuple[int, str, str, str, str]]:
        """Event-log rows ``(trial, left, right, left_tangible, right_tangible)``."""
        layout = self.layout or build_rarity_tapster(self.alpha, self.beta)
        for i, (o, k) in enumerate(zip(self.outcome.tolist(), self.pair.tolist())):
            left, right = OUTCOMES[o]
            pl, pr = layout.pairs[k]
            yield self.start + i, left, right, pl, pr


def _sample_block(args):
    seed, block, lo, hi, cdf, n_pairs = args
    u_pair = rngmod.block_uniforms(seed, block, rngmod.ASSIGNMENT)[lo:hi]
    u_out = rngmod.block_uniforms(seed, block, rngmod.OUTCOME)[lo:hi]
    pair = np.minimum((u_pair * n_pairs).astype(np.int8), n_pairs - 1)
    outcome = np.searchsorted(cdf, u_out, side="right").astype(np.int8)
    return outcome, pair


def _outcome_cdf(dist: JointDistribution) -> np.ndarray:
    # three inner thresholds; searchsorted(side="right") skips any
    # zero-width bin, so zero-probability outcomes are never drawn
    return np.minimum(np.cumsum(dist.as_array())[:3], 1.0)


def sample_coincidences(alpha: float, beta: float, shots: int, seed: int,
                        workers: int = 1, start: int = 0) -> CoincidenceTable:
    """Draw ``shots`` coincidence events at one setting.

    Each trial draws its source assignment from the assignment substream
    and its detector pair jointly from the Born distribution using the
    outcome substream. Output depends only on ``(alpha, beta, seed,
    start, shots)``, never on ``workers``.
    """
    if shots < 1:
        raise DomainError("shots must be >= 1")
    if workers < 1:
        raise DomainError("workers must be >= 1")
    layout = build_rarity_tapster(alpha, beta)
    cdf = _outcome_cdf(joint_distribution(alpha, beta))
    n_pairs = len(layout.pairs)
    tasks = []
    trial, end = start, start + shots
    while trial < end:
        block, lo = divmod(trial, rngmod.BLOCK_SIZE)
        hi = min(rngmod.BLOCK_SIZE, lo + (end - trial))
        tasks.append((seed, block, lo, hi, cdf, n_pairs))
        trial += hi - lo
    if workers == 1 or len(tasks) == 1:
        parts = [_sample_block(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_sample_block, tasks))
    outcome = np.concatenate([p[0] for p in parts])
    pair = np.concatenate([p[1] for p in parts])
    return CoincidenceTable(float(alpha), float(beta), seed, outcome, pair, start, layout)


def _outcome_counts(records) -> np.ndarray:
    if isinstance(records, CoincidenceTable):
        return records.counts()
    tally = Counter((r.left, r.right) for r in records)
    return np.array([tally.get(o, 0) for o in OUTCOMES])


MIN_RECORDS = 100


def estimate_correlation(records) -> tuple[float, float, int]:
    """``(E, standard error, n)`` from one setting's coincidences."""
    counts = _outcome_counts(records)
    n = int(counts.sum())
    if n < MIN_RECORDS:
        raise DomainError(f"need at least {MIN_RECORDS} records per setting, got {n}")
    E = float(AGREEMENT_SIGN @ counts) / n
    # each trial contributes +-1, so Var = (1 - E^2) / n
    err = math.sqrt(max(0.0, 1.0 - E * E) / n)
    return E, err, n


def estimate_chsh_from_records(records_by_setting: Mapping[tuple[float, float], object],
                               angles: Sequence[float]) -> ChshResult:
    """Empirical CHSH statistic with a propagated standard error.

    ``records_by_setting`` maps each ``(alpha, beta)`` setting to a
    :class:`CoincidenceTable` or an iterable of :class:`CoincidenceRecord`.
    The four settings are independent samples, so their variances add.
    """
    angles = tuple(float(a) for a in angles)
    if len(angles) != 4:
        raise DomainError("angles must be (alpha1, alpha2, beta1, beta2)")
    E, errs = [], []
    for setting in chsh_settings(*angles):
        if setting not in records_by_setting:
            raise DomainError(f"no records for setting alpha={setting[0]}, beta={setting[1]}")
        e, s, _ = estimate_correlation(records_by_setting[setting])
        E.append(e)
        errs.append(s)
    S = _chsh_combine(E)
    S_err = math.sqrt(sum(s * s for s in errs))
    return ChshResult(angles, tuple(E), S, tuple(errs), S_err)


def run_chsh_experiment(angles: Sequence[float], shots: int, seed: int,
                        workers: int = 1) -> tuple[ChshResult, dict]:
    """Sample every CHSH setting and estimate ``S``.

    Setting ``k`` uses trial indices ``[k*shots, (k+1)*shots)`` of the
    seed's substreams, so the four samples never overlap.
    """
    tables = {}
    for k, setting in enumerate(chsh_settings(*angles)):
        tables[setting] = sample_coincidences(*setting, shots=shots, seed=seed,
                                              workers=workers, start=k * shots)
    return estimate_chsh_from_records(tables, angles), tables


def mach_zehnder_amplitudes(phi: float) -> tuple[complex, complex]:
    """Stream amplitudes ``(A(U), A(D))`` of the single-particle rig."""
    layout = build_mach_zehnder(phi)
    stream = single_stream(layout, 0)
    return stream_amplitude(stream, "U", layout), stream_amplitude(stream, "D", layout)


def mach_zehnder_probabilities(phi: float) -> tuple[float, float]:
    a_u, a_d = mach_zehnder_amplitudes(phi)
    return probability_of(a_u), probability_of(a_d)


def scan_rows(alphas: Iterable[float], betas: Iterable[float]):
    """Rows ``(alpha, beta, p_uu, p_ud, p_du, p_dd, E)`` over a grid."""
    betas = list(betas)
    for a in alphas:
        for b in betas:
            d = joint_distribution(a, b)
            yield (d.alpha, d.beta, d.p_uu, d.p_ud, d.p_du, d.p_dd, d.correlation)
