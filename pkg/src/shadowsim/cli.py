"""Batch command-line front end.

Subcommands: ``scan``, ``mc``, ``chsh``, ``verify``, ``pathint``, ``mz``.
Angles are radians; grids use ``start:stop:count`` (half-open).

Exit codes: 0 success, 1 a verification check failed, 2 configuration
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import experiment as ex
from . import pathint as pi
from .amplitude import DomainError
from .interferometer import LayoutError, build_rarity_tapster, with_extra_phase
from .layoutfile import load_layout, save_layout
from .streams import (
    assignment_rows,
    verify_congruence_identities,
    verify_local_factorization,
    with_settings,
)
from .tables import write_table

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
OUTPUT_DIR_ENV = "SHADOWSIM_OUTPUT_DIR"
MODES = ("scan", "mc", "chsh", "verify", "pathint", "mz")
BOUNDARY_WARN = 1e-8
VERIFY_MODES = ("congruence", "equivalence", "locality", "normalization")
PATHINT_TASKS = ("evolve", "kernel", "residual")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def parse_grid(text: str, name: str = "grid") -> tuple[float, ...]:
    """``start:stop:count`` -> ``count`` points in ``[start, stop)``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(name, f"expected start:stop:count, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(name, f"cannot parse {text!r}") from None
    if count < 1:
        raise ConfigError(name, "count must be >= 1")
    return tuple((start + (stop - start) / count * np.arange(count)).tolist())


def parse_floats(text: str, name: str, n: int | None = None) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(name, f"cannot parse {text!r}") from None
    if n is not None and len(values) != n:
        raise ConfigError(name, f"expected {n} comma-separated values")
    return values


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    alphas: tuple[float, ...] = (0.0,)
    betas: tuple[float, ...] = (0.0,)
    phis: tuple[float, ...] = (0.0,)
    shots: int | None = None
    seed: int | None = None
    workers: int = 1
    angles: tuple[float, ...] | None = None
    verify_mode: str = "congruence"
    layout: str | None = None
    inject: tuple[str, float] | None = None
    dump_layout: str | None = None
    task: str = "evolve"
    mass: float = 1.0
    hbar: float = 1.0
    potential: str = "free"
    grid: str = "-20:20:2048"
    eps: float | None = None
    slices: int = 100
    x0: float = 0.0
    sigma: float | None = None
    k0: float = 0.0
    renormalize: bool = False
    rule: str = "midpoint"
    record_every: int = 10
    kernel_a: float = 0.0
    kernel_b: float = 1.0
    kernel_T: float = 1.0
    slice_counts: tuple[int, ...] = (64, 128, 256)
    out: str | None = None
    fmt: str = "csv"
    assignments_out: str | None = None

    def validate(self) -> "ExperimentConfig":
        if self.mode not in MODES:
            raise ConfigError("mode", f"unknown mode {self.mode!r}")
        if self.fmt not in ("csv", "jsonl"):
            raise ConfigError("format", "must be csv or jsonl")
        for name in ("alphas", "betas", "phis"):
            if not getattr(self, name):
                raise ConfigError(name, "grid is empty")
        if self.mode == "mc":
            if self.seed is None:
                raise ConfigError("seed", "--seed is required for mc")
            if self.shots is None or self.shots < 1:
                raise ConfigError("shots", "must be >= 1")
        if self.mode == "chsh":
            if self.angles is None or len(self.angles) != 4:
                raise ConfigError("angles", "need alpha1,alpha2,beta1,beta2")
            if self.shots is not None:
                if self.shots < ex.MIN_RECORDS:
                    raise ConfigError("shots", f"must be >= {ex.MIN_RECORDS}")
                if self.seed is None:
                    raise ConfigError("seed", "--seed is required with --shots")
        if self.seed is not None and self.seed < 0:
            raise ConfigError("seed", "must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        if self.verify_mode not in VERIFY_MODES:
            raise ConfigError("verify_mode", f"must be one of {VERIFY_MODES}")
        if self.task not in PATHINT_TASKS:
            raise ConfigError("task", f"must be one of {PATHINT_TASKS}")
        if self.mode == "pathint":
            if self.slices < (2 if self.task == "residual" else 0):
                raise ConfigError("slices", "too few slices")
            if self.record_every < 1:
                raise ConfigError("record_every", "must be >= 1")
            if self.eps is not None and self.eps <= 0:
                raise ConfigError("eps", "must be positive")
            if self.rule not in ("midpoint", "trapezoid"):
                raise ConfigError("rule", "must be midpoint or trapezoid")
            if any(n < 1 for n in self.slice_counts):
                raise ConfigError("slice_counts", "must be >= 1")
        return self

    def output_path(self, default_name: str) -> str | None:
        if self.out is not None:
            return self.out
        outdir = os.environ.get(OUTPUT_DIR_ENV)
        if outdir:
            return str(Path(outdir) / f"{default_name}.{self.fmt}")
        return None


def _emit(cfg: ExperimentConfig, name: str, header, rows) -> int:
    path = cfg.output_path(name)
    rows = list(rows)
    if path is not None:
        write_table(path, header, rows, cfg.fmt)
        print(f"wrote {len(rows)} rows to {path}")
    return len(rows)


def _r6(v) -> str:
    if isinstance(v, complex):
        return f"{round(v.real, 6):g}{round(v.imag, 6):+g}j"
    return f"{round(float(v), 6):g}"


# ---------------------------------------------------------------------------


def run_scan(cfg: ExperimentConfig) -> int:
    rows = list(ex.scan_rows(cfg.alphas, cfg.betas))
    _emit(cfg, "scan", ("alpha", "beta", "p_uu", "p_ud", "p_du", "p_dd", "E"), rows)
    worst = max(abs(sum(r[2:6]) - 1.0) for r in rows)
    print(f"scan: {len(rows)} grid points, max |sum p - 1| = {worst:.3g}")
    for r in rows[:8]:
        print("  " + "  ".join(_r6(v) for v in r))
    if len(rows) > 8:
        print(f"  ... {len(rows) - 8} more rows")
    return EXIT_OK


def run_mc(cfg: ExperimentConfig) -> int:
    alpha, beta = cfg.alphas[0], cfg.betas[0]
    table = ex.sample_coincidences(alpha, beta, cfg.shots, cfg.seed, workers=cfg.workers)
    _emit(cfg, "mc", ("trial", "left", "right", "left_tangible", "right_tangible"), table.rows())
    if cfg.assignments_out:
        write_table(cfg.assignments_out,
                    ("trial", "left_tangible", "right_tangible", "shadow_paths"),
                    assignment_rows(table.layout, cfg.seed, cfg.shots), cfg.fmt)
    exact = ex.joint_distribution(alpha, beta).as_array()
    freq = table.frequencies()
    print(f"mc: alpha={_r6(alpha)} beta={_r6(beta)} shots={cfg.shots} seed={cfg.seed}")
    print("  outcome   freq      exact")
    for (l, r), f, p in zip(ex.OUTCOMES, freq, exact):
        print(f"  ({l},{r})".ljust(11) + f"{_r6(f):<10}{_r6(p)}")
    return EXIT_OK


def run_chsh(cfg: ExperimentConfig) -> int:
    res = ex.chsh(*cfg.angles)
    header = ["alpha", "beta", "E_exact"]
    rows = [[a, b, e] for (a, b), e in zip(res.settings, res.E)]
    est = None
    if cfg.shots is not None:
        est, _ = ex.run_chsh_experiment(cfg.angles, cfg.shots, cfg.seed, cfg.workers)
        header += ["E_hat", "E_err"]
        for row, e, s in zip(rows, est.E, est.E_err):
            row += [e, s]
    _emit(cfg, "chsh", header, rows)
    print(f"S = {res.S:.6f}  {'VIOLATED' if res.violated else 'not violated'} (|S| > 2)")
    if est is not None:
        lo = est.S - 3 * est.S_err
        print(f"S_hat = {est.S:.6f} +- {est.S_err:.6f}  lower 3-sigma bound {lo:.6f}  "
              f"{'VIOLATED' if lo > 2 else 'not violated'}")
    return EXIT_OK


def _verify_layout(cfg: ExperimentConfig):
    if cfg.layout:
        layout = load_layout(cfg.layout)
    else:
        layout = build_rarity_tapster(cfg.alphas[0], cfg.betas[0])
    if cfg.inject:
        layout = with_extra_phase(layout, *cfg.inject)
    return layout


def _normalization_report():
    checks = []
    grid = parse_grid(f"0:{2 * math.pi!r}:64")
    a, b = np.meshgrid(grid, grid)
    closed = np.array(ex.closed_form_probabilities(a.ravel(), b.ravel()))
    amps = ex.amplitude_pipeline_probabilities(a.ravel(), b.ravel())
    checks.append(("joint probabilities sum to 1", float(np.max(np.abs(closed.sum(0) - 1))), 1e-12))
    checks.append(("closed form = amplitude pipeline", float(np.max(np.abs(closed - amps))), 1e-12))
    left_u = closed[0] + closed[1]
    checks.append(("P(left=u) = 1/2", float(np.max(np.abs(left_u - 0.5))), 1e-15))
    mz = np.array([ex.mach_zehnder_probabilities(p) for p in grid])
    checks.append(("Mach-Zehnder P(U)+P(D) = 1", float(np.max(np.abs(mz.sum(1) - 1))), 1e-12))
    checks.append(("Mach-Zehnder P(U) = cos^2(phi/2)",
                   float(np.max(np.abs(mz[:, 0] - np.cos(np.array(grid) / 2) ** 2))), 1e-12))
    return checks


def run_verify(cfg: ExperimentConfig) -> int:
    if cfg.mode == "verify" and cfg.dump_layout:
        save_layout(_verify_layout(cfg), cfg.dump_layout)
        print(f"wrote layout to {cfg.dump_layout}")
    rows = []
    if cfg.verify_mode == "normalization":
        for name, err, tol in _normalization_report():
            rows.append((name, err, tol, "PASS" if err <= tol else "FAIL"))
        _emit(cfg, "verify", ("check", "max_error", "tolerance", "status"), rows)
        for r in rows:
            print(f"  {r[3]}  {r[0]}  max error {r[1]:.3g} (tol {r[2]:g})")
        ok = all(r[3] == "PASS" for r in rows)
    else:
        layout = _verify_layout(cfg)
        if cfg.verify_mode in ("congruence", "equivalence"):
            reports = [verify_congruence_identities(layout, cfg.verify_mode)]
        else:
            reports = [verify_congruence_identities(layout, "congruence"),
                       verify_local_factorization(layout)]
        for rep in reports:
            for c in rep.checks:
                rows.append((rep.title, c.name, c.lhs, c.rhs, c.difference,
                             "PASS" if c.passed else "FAIL"))
            print("\n".join(rep.lines()))
        _emit(cfg, "verify", ("report", "check", "lhs", "rhs", "difference", "status"),
              [(r[0], r[1], repr(r[2]), repr(r[3]), r[4], r[5]) for r in rows])
        ok = all(rep.passed for rep in reports)
    print("ALL CHECKS PASS" if ok else "CHECK FAILURE")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _pathint_params(cfg) -> pi.PathParams:
    try:
        return pi.PathParams(cfg.mass, cfg.hbar, pi.Potential.parse(cfg.potential))
    except (pi.ConfigurationError, ValueError) as exc:
        raise ConfigError("potential", str(exc)) from None


def _pathint_grid(cfg, params, refine: float = 1.0):
    parts = cfg.grid.split(":")
    if len(parts) != 3:
        raise ConfigError("grid", f"expected start:stop:count, got {cfg.grid!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError("grid", f"cannot parse {cfg.grid!r}") from None
    x = pi.uniform_grid(start, stop, int(round(count * refine)))
    if cfg.sigma is None and params.potential.kind == "harmonic":
        psi = pi.coherent_state(x, cfg.x0, params)
    else:
        psi = pi.gaussian_packet(x, cfg.x0, cfg.sigma or 1.0, cfg.k0)
    return pi.PropagatorGrid(x, psi, 0.0, params).normalized()


def _default_eps(grid: pi.PropagatorGrid, params: pi.PathParams, task: str) -> float:
    # 8 cells lets the residual task also halve eps on the same grid
    cells = 8.0 if task == "residual" else 6.0
    return (cells * grid.dx) ** 2 * params.mass / params.hbar


def run_pathint(cfg: ExperimentConfig) -> int:
    params = _pathint_params(cfg)
    if cfg.task == "kernel":
        study = pi.kernel_study(cfg.kernel_a, cfg.kernel_b, cfg.kernel_T, cfg.slice_counts,
                                params, rule=cfg.rule)
        rows = [(k.slices, k.rel_error_modulus, k.phase_error) for k in study]
        _emit(cfg, "kernel", ("slices", "rel_error_modulus", "phase_error"), rows)
        for r in rows:
            print(f"  slices={r[0]:<6d} rel_error_modulus={r[1]:.3e}  phase_error={r[2]:.3e}")
        return EXIT_OK
    grid = _pathint_grid(cfg, params)
    eps = cfg.eps if cfg.eps is not None else _default_eps(grid, params, cfg.task)
    try:
        pi.check_sampling(eps, grid.dx, grid.x[-1] - grid.x[0], params)
    except pi.ConfigurationError as exc:
        raise ConfigError("eps", str(exc)) from None
    if cfg.task == "evolve":
        trace = pi.evolve(grid, eps, cfg.slices, renormalize=cfg.renormalize,
                          record_every=cfg.record_every, rule=cfg.rule)
        _emit(cfg, "pathint", ("t", "x", "re_psi", "im_psi"), trace.rows())
        final = trace[len(trace) - 1]
        print(f"pathint: {cfg.slices} slices of eps={eps:.6g} on {len(grid.x)} points "
              f"(dx={grid.dx:.6g}), t={final.t:.6g}")
        print(f"  norm drift {final.norm() - 1:.3e}  center {final.center():.6f}  "
              f"width {final.width():.6f}  boundary |psi| {final.boundary_amplitude():.2e}")
        if params.potential.is_free and cfg.sigma is not None:
            print(f"  free spreading law width {pi.free_gaussian_width(cfg.sigma, final.t, params):.6f}")
        if trace.boundary_amplitudes().max() > BOUNDARY_WARN:
            print("warning: the state reaches the grid edge; widen --grid", file=sys.stderr)
        return EXIT_OK
    # residual at eps, then at eps/2 with dx^2 scaled alongside; the same
    # grid at eps/2 is added when that step is still resolved
    runs = [("base", grid, eps), ("refined", _pathint_grid(cfg, params, math.sqrt(2.0)), eps / 2)]
    domain = grid.x[-1] - grid.x[0]
    try:
        pi.check_sampling(eps / 2, grid.dx, domain, params)
        runs.append(("same-grid", grid, eps / 2))
    except pi.ConfigurationError:
        pass
    rows = []
    for name, g, e in runs:
        trace = pi.evolve(g, e, cfg.slices, rule=cfg.rule)
        rows.append((name, e, g.dx, pi.schrodinger_residual(trace)))
    _emit(cfg, "residual", ("run", "eps", "dx", "residual"), rows)
    for r in rows:
        print(f"  {r[0]:<10} eps={r[1]:.6g} dx={r[2]:.6g} residual={r[3]:.6e}")
    for r in rows[1:]:
        print(f"  ratio base/{r[0]} {rows[0][3] / r[3]:.4f}")
    return EXIT_OK


def run_mz(cfg: ExperimentConfig) -> int:
    rows = []
    for phi in cfg.phis:
        p_u, p_d = ex.mach_zehnder_probabilities(phi)
        rows.append((phi, p_u, p_d))
    _emit(cfg, "mz", ("phi", "p_u", "p_d"), rows)
    for r in rows[:8]:
        print("  " + "  ".join(_r6(v) for v in r))
    return EXIT_OK


RUNNERS = {"scan": run_scan, "mc": run_mc, "chsh": run_chsh, "verify": run_verify,
           "pathint": run_pathint, "mz": run_mz}


def run(config: ExperimentConfig) -> int:
    """Execute one configured run; returns the process exit code."""
    try:
        config.validate()
        return RUNNERS[config.mode](config)
    except (ConfigError, LayoutError, DomainError, pi.ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shadowsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="mode", required=True)

    def outputs(p):
        p.add_argument("--out", help="output table path ('-' for stdout); "
                       f"defaults to ${OUTPUT_DIR_ENV}/<command>.<format> when set")
        p.add_argument("--format", dest="fmt", choices=("csv", "jsonl"), default="csv")

    def angle_pair(p, grids=True):
        p.add_argument("--alpha", type=float, default=0.0)
        p.add_argument("--beta", type=float, default=0.0)
        if grids:
            p.add_argument("--alpha-grid")
            p.add_argument("--beta-grid")

    p = sub.add_parser("scan", help="joint probabilities over an angle grid")
    angle_pair(p)
    outputs(p)

    p = sub.add_parser("mc", help="Monte Carlo coincidence sampling")
    angle_pair(p, grids=False)
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--assignments", dest="assignments_out",
                   help="also write the tangible/shadow assignment trace here")
    outputs(p)

    p = sub.add_parser("chsh", help="CHSH statistic, exact and optionally sampled")
    p.add_argument("--angles", required=True, help="alpha1,alpha2,beta1,beta2")
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    outputs(p)

    p = sub.add_parser("verify", help="congruence / locality / normalization checks")
    p.add_argument("--mode", dest="verify_mode", choices=VERIFY_MODES, default="congruence")
    angle_pair(p, grids=False)
    p.add_argument("--layout", help="layout JSON document to check")
    p.add_argument("--inject-phase", help="PATH:DELTA extra phase on one path")
    p.add_argument("--dump-layout", help="write the checked layout as JSON")
    outputs(p)

    p = sub.add_parser("pathint", help="time-sliced propagator runs")
    p.add_argument("--task", choices=PATHINT_TASKS, default="evolve")
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--potential", default="free",
                   help="free | harmonic:omega=W,center=C | linear:force=F")
    p.add_argument("--grid", default="-20:20:2048",
                   help="start:stop:count (write --grid=-10:10:2048 for a negative start)")
    p.add_argument("--eps", type=float,
                   help="slice length (default (6 dx)^2 m/hbar, (8 dx)^2 m/hbar for residual)")
    p.add_argument("--slices", type=int, default=100)
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--sigma", type=float)
    p.add_argument("--k0", type=float, default=0.0)
    p.add_argument("--renormalize", action="store_true")
    p.add_argument("--rule", choices=("midpoint", "trapezoid"), default="midpoint",
                   help="potential rule inside the slice action")
    p.add_argument("--record-every", type=int, default=10)
    p.add_argument("--a", dest="kernel_a", type=float, default=0.0)
    p.add_argument("--b", dest="kernel_b", type=float, default=1.0)
    p.add_argument("--T", dest="kernel_T", type=float, default=1.0)
    p.add_argument("--slices-list", default="64,128,256")
    outputs(p)

    p = sub.add_parser("mz", help="Mach-Zehnder detector probabilities")
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--phi-grid")
    outputs(p)
    return parser


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    values = {f.name: getattr(ns, f.name) for f in fields(ExperimentConfig) if hasattr(ns, f.name)}
    values["mode"] = ns.mode
    if hasattr(ns, "alpha"):
        values["alphas"] = (parse_grid(ns.alpha_grid, "alpha_grid")
                            if getattr(ns, "alpha_grid", None) else (ns.alpha,))
        values["betas"] = (parse_grid(ns.beta_grid, "beta_grid")
                           if getattr(ns, "beta_grid", None) else (ns.beta,))
    if ns.mode == "mz":
        values["phis"] = parse_grid(ns.phi_grid, "phi_grid") if ns.phi_grid else (ns.phi,)
    if ns.mode == "chsh":
        values["angles"] = parse_floats(ns.angles, "angles", 4)
    if ns.mode == "verify" and ns.inject_phase:
        path, _, delta = ns.inject_phase.rpartition(":")
        if not path:
            raise ConfigError("inject_phase", "expected PATH:DELTA")
        values["inject"] = (path, parse_floats(delta, "inject_phase", 1)[0])
    if ns.mode == "pathint":
        values["slice_counts"] = tuple(int(v) for v in parse_floats(ns.slices_list, "slices_list"))
    return ExperimentConfig(**values)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
