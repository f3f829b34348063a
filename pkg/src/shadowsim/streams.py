"""Tangible/shadow particle bookkeeping and the locality checks.

Each source event picks, at random, which alternative path carries the
tangible particle; shadow particles fill every other alternative. A
stream is one tangible particle plus its shadows. The stream amplitude
toward a detector is the sum of the member path amplitudes, and streams
from different tangible particles combine by multiplication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterator

import numpy as np

from . import rng as rngmod
from .amplitude import DomainError, product_independent, sum_alternatives
from .interferometer import Layout, congruent, path_amplitude

TANGIBLE = "tangible"
SHADOW = "shadow"


@dataclass(frozen=True, order=True)
class ParticleTag:
    kind: str
    path: str
    wing: str


@dataclass(frozen=True)
class Stream:
    id: str
    particles: tuple[ParticleTag, ...]

    def __post_init__(self):
        n_tangible = sum(p.kind == TANGIBLE for p in self.particles)
        if n_tangible != 1:
            raise DomainError(f"stream {self.id!r} has {n_tangible} tangible particles")
        paths = [p.path for p in self.particles]
        if len(set(paths)) != len(paths):
            raise DomainError(f"stream {self.id!r} puts two particles on one path")

    @property
    def tangible(self) -> ParticleTag:
        return next(p for p in self.particles if p.kind == TANGIBLE)

    @property
    def shadows(self) -> tuple[ParticleTag, ...]:
        return tuple(p for p in self.particles if p.kind == SHADOW)

    @property
    def paths(self) -> tuple[str, ...]:
        return tuple(p.path for p in self.particles)

    @property
    def wing(self) -> str:
        return self.particles[0].wing


@dataclass(frozen=True)
class SourceAssignment:
    left_tangible: str
    right_tangible: str
    shadows: tuple[str, ...]


def _make_stream(layout: Layout, wing: str, tangible: str) -> Stream:
    tags = tuple(
        ParticleTag(TANGIBLE if p.label == tangible else SHADOW, p.label, p.wing)
        for p in layout.paths_in_wing(wing)
    )
    return Stream(id=f"{wing}:{tangible}", particles=tags)


@lru_cache(maxsize=256)
def _pair_outcome(layout: Layout, index: int) -> tuple[SourceAssignment, Stream, Stream]:
    left, right = layout.pairs[index]
    left_stream = _make_stream(layout, "left", left)
    right_stream = _make_stream(layout, "right", right)
    shadows = tuple(p.path for p in left_stream.shadows + right_stream.shadows)
    return SourceAssignment(left, right, shadows), left_stream, right_stream


def _pair_index(layout: Layout, u: float) -> int:
    # equal weight for every correlated pair
    return min(int(u * len(layout.pairs)), len(layout.pairs) - 1)


def assign_streams(layout: Layout, rng: np.random.Generator):
    """Draw one source event: ``(SourceAssignment, left stream, right stream)``.

    The tangible pair lands on each correlated pair of paths with equal
    probability; the shadows take the complementary paths.
    """
    if not layout.is_two_particle:
        raise DomainError("assign_streams needs a two-particle layout; use assign_single_stream")
    return _pair_outcome(layout, _pair_index(layout, rng.random()))


def assign_streams_batch(layout: Layout, seed: int, count: int, start: int = 0) -> np.ndarray:
    """Pair index (into ``layout.pairs``) for trials ``start..start+count-1``.

    Partition invariant: uses the counter-based assignment substream.
    """
    if not layout.is_two_particle:
        raise DomainError("assign_streams_batch needs a two-particle layout")
    u = rngmod.trial_uniforms(seed, start, count, rngmod.ASSIGNMENT)
    return np.minimum((u * len(layout.pairs)).astype(np.int64), len(layout.pairs) - 1)


def iter_assignments(layout: Layout, seed: int, count: int, start: int = 0
                     ) -> Iterator[tuple[SourceAssignment, Stream, Stream]]:
    for idx in assign_streams_batch(layout, seed, count, start):
        yield _pair_outcome(layout, int(idx))


def single_stream(layout: Layout, tangible_index: int) -> Stream:
    """Stream over every path of ``layout`` with the tangible on one of them."""
    paths = layout.paths
    tags = tuple(
        ParticleTag(TANGIBLE if i == tangible_index else SHADOW, p.label, p.wing)
        for i, p in enumerate(paths)
    )
    return Stream(id=f"single:{paths[tangible_index].label}", particles=tags)


def assign_single_stream(layout: Layout, rng: np.random.Generator) -> Stream:
    """One tangible on a uniformly chosen path, shadows everywhere else."""
    if not layout.paths:
        raise DomainError("layout has no paths")
    n = len(layout.paths)
    return single_stream(layout, min(int(rng.random() * n), n - 1))


def stream_amplitude(stream: Stream, detector: str, layout: Layout) -> complex:
    """Sum of the member path amplitudes toward ``detector``.

    Tangible and shadow members count the same.
    """
    return sum_alternatives(path_amplitude(layout, p, detector) for p in stream.paths)


def source_normalization(layout: Layout) -> float:
    return 1.0 / math.sqrt(len(layout.pairs))


def composite_amplitude(stream_left: Stream, outcome_left: str,
                        stream_right: Stream, outcome_right: str,
                        layout: Layout) -> complex:
    """Joint amplitude for the two streams of one source event.

    Sum over correlated path pairs of products of wing-local path
    amplitudes, times the source normalization ``1/sqrt(#pairs)``.
    """
    if not layout.is_two_particle:
        raise DomainError("composite_amplitude needs a two-particle layout")
    known = {p.label for p in layout.paths}
    if not (set(stream_left.paths) <= known and set(stream_right.paths) <= known):
        raise DomainError("streams do not belong to this layout")
    if stream_left.wing != "left" or stream_right.wing != "right":
        raise DomainError("expected a left-wing and a right-wing stream")
    terms = [
        product_independent(path_amplitude(layout, pl, outcome_left),
                            path_amplitude(layout, pr, outcome_right))
        for pl, pr in layout.pairs
        if pl in stream_left.paths and pr in stream_right.paths
    ]
    if not terms:
        raise DomainError("streams share no correlated path pair")
    return source_normalization(layout) * sum_alternatives(terms)


def joint_amplitude(layout: Layout, outcome_left: str, outcome_right: str) -> complex:
    """Composite amplitude for any source event of ``layout``.

    Every event yields the same streams up to which member is tangible,
    so the first correlated pair is used.
    """
    _, left, right = _pair_outcome(layout, 0)
    return composite_amplitude(left, outcome_left, right, outcome_right, layout)


# ---------------------------------------------------------------------------
# locality checks


@dataclass(frozen=True)
class BraKet:
    detector: str
    path: str
    wing: str
    value: complex

    def __str__(self):
        return f"<{self.detector}|{self.path}>"


@dataclass(frozen=True)
class Check:
    name: str
    lhs: complex
    rhs: complex
    passed: bool
    detail: str = ""

    @property
    def difference(self) -> float:
        return abs(self.lhs - self.rhs)


@dataclass(frozen=True)
class Report:
    title: str
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = [f"{self.title}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            out.append(
                f"  {'PASS' if c.passed else 'FAIL'}  {c.name}  "
                f"lhs={c.lhs:.6g} rhs={c.rhs:.6g} |diff|={c.difference:.3g}"
                + (f"  {c.detail}" if c.detail else "")
            )
        return out


def _braket(layout: Layout, detector: str, path: str) -> BraKet:
    return BraKet(detector, path, layout.path(path).wing, path_amplitude(layout, path, detector))


def _check_congruence_meta(layout: Layout):
    if not layout.is_two_particle or not layout.congruent_pairs or not layout.detector_twins:
        raise DomainError("layout declares no congruent cross-wing paths")


def verify_congruence_identities(layout: Layout, mode: str = "congruence",
                                 tol: float = 1e-12) -> Report:
    """Check that the declared cross-wing twin paths carry equal amplitudes.

    For each declared pair (p, q) and detector twins (x, x') this compares
    ``<x|p>`` with ``<x'|q>``. In ``congruence`` mode the factor sequences
    must also match element by element; ``equivalence`` mode only asks
    for equal amplitudes.
    """
    if mode not in ("congruence", "equivalence"):
        raise ValueError(f"unknown mode {mode!r}")
    _check_congruence_meta(layout)
    checks = []
    for pl, pr in layout.congruent_pairs:
        for dl, dr in layout.detector_twins:
            lhs, rhs = _braket(layout, dl, pl), _braket(layout, dr, pr)
            ok = abs(lhs.value - rhs.value) <= tol
            checks.append(Check(f"{lhs} = {rhs}", lhs.value, rhs.value, ok))
        if mode == "congruence":
            same = congruent(layout, pl, pr, tol)
            checks.append(Check(f"factor sequence {pl} ~ {pr}", 0j, 0j, same,
                                "congruent" if same else "factor sequences differ"))
    return Report(f"{mode} identities", tuple(checks))


@dataclass(frozen=True)
class Term:
    factors: tuple[BraKet, ...]

    @property
    def value(self) -> complex:
        v = 1.0 + 0.0j
        for f in self.factors:
            v = product_independent(v, f.value)
        return v

    @property
    def wings(self) -> frozenset[str]:
        return frozenset(f.wing for f in self.factors)

    def __str__(self):
        return "".join(str(f) for f in self.factors)


def substituted_terms(layout: Layout, outcome_left: str, outcome_right: str
                      ) -> tuple[tuple[Term, ...], tuple[Term, ...]]:
    """Cross-wing sum-of-products and its twin-substituted regrouping.

    The left-hand terms pair ``<outcome_left|p><outcome_right|p'>`` over the
    correlated pairs. Each bra-ket on a declared twin path is swapped for
    the equal-by-congruence bra-ket from the other wing, chosen so every
    resulting term touches one wing only. The substituted bra-kets are
    evaluated from the layout, never assumed equal.
    """
    _check_congruence_meta(layout)
    to_left = {}
    to_right = {}
    for pl, pr in layout.congruent_pairs:
        for dl, dr in layout.detector_twins:
            to_left[(dr, pr)] = (dl, pl)
            to_right[(dl, pl)] = (dr, pr)
    lhs, rhs = [], []
    for pl, pr in layout.pairs:
        left = _braket(layout, outcome_left, pl)
        right = _braket(layout, outcome_right, pr)
        lhs.append(Term((left, right)))
        if (outcome_right, pr) in to_left:
            right = _braket(layout, *to_left[(outcome_right, pr)])
        elif (outcome_left, pl) in to_right:
            left = _braket(layout, *to_right[(outcome_left, pl)])
        rhs.append(Term((left, right)))
    return tuple(lhs), tuple(rhs)


def verify_local_factorization(layout: Layout, alpha: float | None = None,
                               beta: float | None = None, tol: float = 1e-12) -> Report:
    """Check that the twin substitution leaves every joint amplitude unchanged
    and that each substituted term is wing-local.

    ``alpha``/``beta`` override the settings of the ``PS_alpha``/``PS_beta``
    shifters when given.
    """
    overrides = {}
    if alpha is not None:
        overrides["PS_alpha"] = alpha
    if beta is not None:
        overrides["PS_beta"] = beta
    if overrides:
        layout = with_settings(layout, **overrides)
    _check_congruence_meta(layout)
    left_dets = [dl for dl, _ in layout.detector_twins]
    right_dets = [dr for _, dr in layout.detector_twins]
    checks = []
    for ol in left_dets:
        for orr in right_dets:
            lhs_terms, rhs_terms = substituted_terms(layout, ol, orr)
            lhs = sum_alternatives(t.value for t in lhs_terms)
            rhs = sum_alternatives(t.value for t in rhs_terms)
            local = all(len(t.wings) == 1 for t in rhs_terms)
            text = " + ".join(str(t) for t in rhs_terms)
            checks.append(Check(f"({ol},{orr}) sums", lhs, rhs, abs(lhs - rhs) <= tol,
                                " + ".join(str(t) for t in lhs_terms) + " -> " + text))
            checks.append(Check(f"({ol},{orr}) wing-local", 0j, 0j, local,
                                ", ".join("/".join(sorted(t.wings)) for t in rhs_terms)))
    return Report("local factorization", tuple(checks))


def with_settings(layout: Layout, **settings: float) -> Layout:
    """Copy of ``layout`` with phase-shifter settings replaced by id."""
    ids = {e.id for e in layout.elements}
    missing = set(settings) - ids
    if missing:
        raise DomainError(f"layout has no elements {sorted(missing)}")
    elements = tuple(
        replace(e, setting=float(settings[e.id])) if e.id in settings else e
        for e in layout.elements
    )
    params = dict(layout.params)
    for key, name in (("PS_alpha", "alpha"), ("PS_beta", "beta"), ("PS_phi", "phi")):
        if key in settings:
            params[name] = float(settings[key])
    return replace(layout, elements=elements, params=tuple(params.items()))


def assignment_rows(layout: Layout, seed: int, count: int, start: int = 0):
    """Rows ``(trial, left_tangible, right_tangible, shadow_paths)``."""
    for n, (a, _, _) in enumerate(iter_assignments(layout, seed, count, start), start):
        yield n, a.left_tangible, a.right_tangible, ";".join(a.shadows)


__all__ = [
    "BraKet", "Check", "ParticleTag", "Report", "SourceAssignment", "Stream", "Term",
    "assign_single_stream", "assign_streams", "single_stream", "assign_streams_batch", "assignment_rows",
    "composite_amplitude", "iter_assignments", "joint_amplitude", "source_normalization",
    "stream_amplitude", "substituted_terms", "verify_congruence_identities",
    "verify_local_factorization", "with_settings",
]
