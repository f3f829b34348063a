"""Interferometer layouts and per-path amplitudes.

A layout is a set of optical elements plus the routes (paths) a particle
can take from the source to the last beamsplitter in front of a detector
pair. Every element contributes one scalar factor to a path amplitude:

* 50/50 beamsplitter: ``1/sqrt(2)`` when transmitted, ``i/sqrt(2)`` when
  reflected.
* phase shifter with setting ``s``: ``exp(i*s)``.
* mirror: ``exp(i*phase)``, with ``phase = 0`` in the stock builders.
* source, detector: 1.

At the exit beamsplitter a path entering port ``k`` reaches
``outputs[k]`` by transmission and the other output by reflection.
Layouts are frozen and hashable.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

from .amplitude import DomainError, chain_route

SQRT_HALF = 1.0 / math.sqrt(2.0)
TRANSMIT = complex(SQRT_HALF, 0.0)
REFLECT = complex(0.0, SQRT_HALF)

ELEMENT_KINDS = ("source", "phase_shifter", "mirror", "beamsplitter", "detector")
ROLES = ("pass", "transmit", "reflect")
WINGS = ("left", "right", "single")


class LayoutError(DomainError):
    """A layout violates the element or path schema."""


@dataclass(frozen=True)
class Element:
    id: str
    kind: str
    setting: float = 0.0
    phase: float = 0.0
    outputs: tuple[str, str] | None = None
    split_ratio: float = 0.5

    def __post_init__(self):
        if self.kind not in ELEMENT_KINDS:
            raise LayoutError(f"unknown element kind {self.kind!r} (element {self.id!r})")
        if not (math.isfinite(self.setting) and math.isfinite(self.phase)):
            raise LayoutError(f"element {self.id!r}: non-finite phase")
        if self.kind == "beamsplitter":
            if self.outputs is None or len(self.outputs) != 2:
                raise LayoutError(f"beamsplitter {self.id!r} needs exactly two outputs")
            object.__setattr__(self, "outputs", tuple(self.outputs))
            if abs(self.split_ratio - 0.5) > 1e-12:
                raise LayoutError(
                    f"beamsplitter {self.id!r}: only 50/50 splitters are supported, "
                    f"got split_ratio={self.split_ratio}"
                )

    def factor(self, role: str = "pass") -> complex:
        if self.kind == "beamsplitter":
            if role == "transmit":
                return TRANSMIT
            if role == "reflect":
                return REFLECT
            raise LayoutError(f"beamsplitter {self.id!r} must be traversed as transmit/reflect")
        if role != "pass":
            raise LayoutError(f"element {self.id!r} ({self.kind}) only supports role 'pass'")
        if self.kind == "phase_shifter":
            return cmath.exp(1j * self.setting)
        if self.kind == "mirror":
            return cmath.exp(1j * self.phase) if self.phase else 1.0 + 0.0j
        return 1.0 + 0.0j


@dataclass(frozen=True)
class Path:
    label: str
    wing: str
    traversals: tuple[tuple[str, str], ...]
    exit_splitter: str
    exit_port: int

    def __post_init__(self):
        if self.wing not in WINGS:
            raise LayoutError(f"path {self.label!r}: unknown wing {self.wing!r}")
        if self.exit_port not in (0, 1):
            raise LayoutError(f"path {self.label!r}: exit port must be 0 or 1")
        trav = tuple((str(e), str(r)) for e, r in self.traversals)
        for _, role in trav:
            if role not in ROLES:
                raise LayoutError(f"path {self.label!r}: unknown role {role!r}")
        object.__setattr__(self, "traversals", trav)


@dataclass(frozen=True)
class Layout:
    """Immutable interferometer description.

    ``pairs`` lists the correlated (left, right) path pairs a two-particle
    source can emit into. ``congruent_pairs`` names the cross-wing path
    pairs the design relies on being congruent, and ``detector_twins``
    matches each left detector with its right-wing counterpart.
    """

    name: str
    elements: tuple[Element, ...]
    paths: tuple[Path, ...]
    pairs: tuple[tuple[str, str], ...] = ()
    congruent_pairs: tuple[tuple[str, str], ...] = ()
    detector_twins: tuple[tuple[str, str], ...] = ()
    params: tuple[tuple[str, float], ...] = field(default=())

    def __post_init__(self):
        ids = [e.id for e in self.elements]
        if len(set(ids)) != len(ids):
            raise LayoutError("element ids must be unique")
        labels = [p.label for p in self.paths]
        if len(set(labels)) != len(labels):
            raise LayoutError("path labels must be unique")
        by_id = {e.id: e for e in self.elements}
        detectors = {e.id for e in self.elements if e.kind == "detector"}
        for e in self.elements:
            if e.kind == "beamsplitter":
                for out in e.outputs:
                    if out not in detectors:
                        raise LayoutError(f"beamsplitter {e.id!r} feeds unknown detector {out!r}")
        for p in self.paths:
            for eid, _ in p.traversals:
                if eid not in by_id:
                    raise LayoutError(f"path {p.label!r} references unknown element {eid!r}")
            if not p.traversals or by_id[p.traversals[0][0]].kind != "source":
                raise LayoutError(f"path {p.label!r} must begin at a source")
            bs = by_id.get(p.exit_splitter)
            if bs is None or bs.kind != "beamsplitter":
                raise LayoutError(f"path {p.label!r}: exit {p.exit_splitter!r} is not a beamsplitter")
        for left, right in self.pairs + self.congruent_pairs:
            if left not in labels or right not in labels:
                raise LayoutError(f"pair ({left!r}, {right!r}) references unknown paths")

    def element(self, element_id: str) -> Element:
        for e in self.elements:
            if e.id == element_id:
                return e
        raise LayoutError(f"no element {element_id!r}")

    def path(self, label: str | Path) -> Path:
        if isinstance(label, Path):
            return label
        for p in self.paths:
            if p.label == label:
                return p
        raise LayoutError(f"no path {label!r}")

    def paths_in_wing(self, wing: str) -> tuple[Path, ...]:
        return tuple(p for p in self.paths if p.wing == wing)

    def detectors_for(self, path: str | Path) -> tuple[str, str]:
        p = self.path(path)
        return self.element(p.exit_splitter).outputs

    def detector_wing(self, detector: str) -> str:
        for p in self.paths:
            if detector in self.detectors_for(p):
                return p.wing
        raise LayoutError(f"detector {detector!r} is not fed by any path")

    @property
    def is_two_particle(self) -> bool:
        return bool(self.pairs)

    def param(self, name: str, default: float | None = None) -> float | None:
        return dict(self.params).get(name, default)


def path_factors(layout: Layout, path: str | Path, detector: str) -> list[tuple[str, complex]]:
    """Ordered ``(element id, factor)`` list for a path ending at ``detector``."""
    p = layout.path(path)
    outputs = layout.detectors_for(p)
    if detector not in outputs:
        raise DomainError(f"detector {detector!r} is not reachable from path {p.label!r}")
    factors = [(eid, layout.element(eid).factor(role)) for eid, role in p.traversals]
    exit_role = "transmit" if outputs.index(detector) == p.exit_port else "reflect"
    factors.append((p.exit_splitter, layout.element(p.exit_splitter).factor(exit_role)))
    return factors


def path_amplitude(layout: Layout, path: str | Path, detector: str) -> complex:
    """Bra-ket ``<detector|path>``: product of all factors along the route."""
    return chain_route(f for _, f in path_factors(layout, path, detector))


def _nontrivial(factors, tol):
    return [f for _, f in factors if abs(f - 1.0) > tol]


def congruent(layout: Layout, path_p: str | Path, path_q: str | Path, tol: float = 1e-12) -> bool:
    """True when both paths apply the same ordered factor sequence.

    Detectors are matched by output index at each path's exit splitter.
    Identity factors (plain mirrors, the source, zero-setting shifters)
    carry no phase and are skipped.
    """
    p, q = layout.path(path_p), layout.path(path_q)
    for dp, dq in zip(layout.detectors_for(p), layout.detectors_for(q)):
        fp = _nontrivial(path_factors(layout, p, dp), tol)
        fq = _nontrivial(path_factors(layout, q, dq), tol)
        if len(fp) != len(fq) or any(abs(a - b) > tol for a, b in zip(fp, fq)):
            return False
    return True


def equivalent(layout: Layout, path_p: str | Path, path_q: str | Path, tol: float = 1e-12) -> bool:
    """True when the two paths give equal amplitudes at matched detectors.

    Weaker than :func:`congruent`: factor order and grouping may differ.
    """
    p, q = layout.path(path_p), layout.path(path_q)
    return all(
        abs(path_amplitude(layout, p, dp) - path_amplitude(layout, q, dq)) <= tol
        for dp, dq in zip(layout.detectors_for(p), layout.detectors_for(q))
    )


def amplitude_table(layout: Layout) -> dict[tuple[str, str], complex]:
    """All ``(path, detector) -> amplitude`` entries of a layout."""
    return {
        (p.label, d): path_amplitude(layout, p, d)
        for p in layout.paths
        for d in layout.detectors_for(p)
    }


def build_rarity_tapster(alpha: float, beta: float, mirror_phase: float = 0.0) -> Layout:
    """Two-wing interferometer with shifter ``alpha`` on path a, ``beta`` on b'.

    Left wing: paths a, b meet at splitter BS_L with outputs (u, d).
    Right wing: paths a', b' meet at BS_R with outputs (u', d').
    Resulting bra-kets::

        <u|a>  = i e^{i alpha}/sqrt2   <d|a>  = e^{i alpha}/sqrt2
        <u|b>  = 1/sqrt2               <d|b>  = i/sqrt2
        <u'|a'> = 1/sqrt2              <d'|a'> = i/sqrt2
        <u'|b'> = i e^{i beta}/sqrt2   <d'|b'> = e^{i beta}/sqrt2
    """
    elements = (
        Element("S", "source"),
        Element("PS_alpha", "phase_shifter", setting=alpha),
        Element("PS_beta", "phase_shifter", setting=beta),
        Element("M_a", "mirror", phase=mirror_phase),
        Element("M_b", "mirror", phase=mirror_phase),
        Element("M_a'", "mirror", phase=mirror_phase),
        Element("M_b'", "mirror", phase=mirror_phase),
        Element("BS_L", "beamsplitter", outputs=("u", "d")),
        Element("BS_R", "beamsplitter", outputs=("u'", "d'")),
        Element("u", "detector"),
        Element("d", "detector"),
        Element("u'", "detector"),
        Element("d'", "detector"),
    )
    paths = (
        Path("a", "left", (("S", "pass"), ("PS_alpha", "pass"), ("M_a", "pass")), "BS_L", 1),
        Path("b", "left", (("S", "pass"), ("M_b", "pass")), "BS_L", 0),
        Path("a'", "right", (("S", "pass"), ("M_a'", "pass")), "BS_R", 0),
        Path("b'", "right", (("S", "pass"), ("PS_beta", "pass"), ("M_b'", "pass")), "BS_R", 1),
    )
    return Layout(
        name="rarity-tapster",
        elements=elements,
        paths=paths,
        pairs=(("a", "a'"), ("b", "b'")),
        congruent_pairs=(("b", "a'"),),
        detector_twins=(("u", "u'"), ("d", "d'")),
        params=(("alpha", float(alpha)), ("beta", float(beta))),
    )


def build_mach_zehnder(phi: float) -> Layout:
    """Single-particle Mach-Zehnder rig with phase ``phi`` on the upper arm.

    ``A(U) = (i/2)(e^{i phi} + 1)`` and ``A(D) = (e^{i phi} - 1)/2``, so
    ``P(U) = cos^2(phi/2)``.
    """
    elements = (
        Element("S", "source"),
        Element("BS1", "beamsplitter", outputs=("D", "U")),
        Element("PS_phi", "phase_shifter", setting=phi),
        Element("M_upper", "mirror"),
        Element("M_lower", "mirror"),
        Element("BS2", "beamsplitter", outputs=("U", "D")),
        Element("U", "detector"),
        Element("D", "detector"),
    )
    paths = (
        Path("upper", "single",
             (("S", "pass"), ("BS1", "transmit"), ("PS_phi", "pass"), ("M_upper", "pass")),
             "BS2", 1),
        Path("lower", "single",
             (("S", "pass"), ("BS1", "reflect"), ("M_lower", "pass")),
             "BS2", 0),
    )
    return Layout(name="mach-zehnder", elements=elements, paths=paths,
                  params=(("phi", float(phi)),))


def with_extra_phase(layout: Layout, path_label: str, delta: float) -> Layout:
    """Copy of ``layout`` with an extra phase shifter ``delta`` on one path.

    Used to break congruence on purpose. The shifter is inserted right
    after the source.
    """
    p = layout.path(path_label)
    new_id = f"PS_extra_{path_label}"
    shifter = Element(new_id, "phase_shifter", setting=delta)
    new_path = replace(p, traversals=p.traversals[:1] + ((new_id, "pass"),) + p.traversals[1:])
    paths = tuple(new_path if q.label == path_label else q for q in layout.paths)
    return replace(layout, elements=layout.elements + (shifter,), paths=paths,
                   name=f"{layout.name}+extra({path_label})")
