"""gibbs-inverse: forward, invert, oracle, roundtrip and check workflows.

Exit codes: 0 ok, 1 numerical failure, 2 config error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import itertools
import logging
import math
import os
import sys
import warnings
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import io
from .algebra import SequenceFunctional, boltzmann_factors, gamma, gamma_inverse
from .expansion import SeriesDivergenceWarning, TruncationParams, forward_cluster
from .lattice import (
    ClusterSpec,
    SpecValidationError,
    format_key,
    half_box,
    potential_from_mayer,
    validate_cluster_spec,
)
from .oracle import FiniteVolume, MAX_SITES, partition_function, volume_sweep
from .solver import (
    SolverPoint,
    make_domain,
    pair_metric,
    random_mayer,
    solve,
    verify_contraction,
)
from .ursell import UrsellCache

log = logging.getLogger("gibbs_inverse")

COMMANDS = ("forward", "invert", "oracle", "roundtrip", "check")
EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

REQUIRED = {
    "forward": ("z", "potential"),
    "invert": ("target", "r"),
    "oracle": ("z", "potential", "k_max"),
    "roundtrip": ("z", "potential", "r"),
    "check": ("z", "r"),
}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    dim: int | None = None
    order: int = 4
    radius: int | None = None
    z: float | None = None
    potential: str | None = None
    target: str | None = None
    r: float | None = None
    tol: float = 1e-10
    max_iter: int = 200
    k_max: int | None = None
    samples: int = 100
    seed: int = 0
    out: str = "."
    threads: int = 1

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"command: unknown command {self.command!r}")
        for name in ("dim", "order", "z", "tol", "max_iter", "k_max", "samples", "threads"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"{name}: must be positive, got {value}")
        if self.radius is not None and self.radius < 0:
            raise ConfigError(f"radius: must be non-negative, got {self.radius}")
        if self.r is not None and not 0 < self.r < 1:
            raise ConfigError(f"r: must lie in (0, 1), got {self.r}")
        for name in REQUIRED[self.command]:
            if getattr(self, name) is None:
                raise ConfigError(f"{name}: required for '{self.command}'")

    def truncation(self) -> TruncationParams:
        return TruncationParams(self.order, self.radius)


_FLAGS = {
    "dim": int, "order": int, "radius": int, "z": float, "potential": str, "target": str,
    "r": float, "tol": float, "max_iter": int, "k_max": int, "samples": int, "seed": int,
    "out": str, "threads": int,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gibbs-inverse", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON config file, or a report.json from an earlier run")
    for name, typ in _FLAGS.items():
        parser.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def parse_config(argv: list[str] | None = None) -> RunConfig:
    parser = build_parser()
    args = parser.parse_args(argv)
    merged: dict = {}
    if args.config:
        try:
            data = io.read_json(args.config)
        except OSError as exc:
            parser.error(f"config: cannot read {args.config}: {exc}")
        except io.InputError as exc:
            parser.error(f"config: {exc}")
        data = data.get("config", data)
        known = {f.name for f in fields(RunConfig)}
        unknown = sorted(set(data) - known)
        if unknown:
            parser.error(f"config: unknown field(s) {', '.join(unknown)}")
        for name, value in data.items():
            if name == "command" or value is None:
                continue
            try:
                merged[name] = _FLAGS[name](value)
            except (TypeError, ValueError):
                parser.error(f"{name}: bad value {value!r} in config file")
    for name in _FLAGS:
        value = getattr(args, name)
        if value is not None:
            merged[name] = value
    if "threads" not in merged and os.environ.get("GIBBS_INVERSE_THREADS"):
        try:
            merged["threads"] = int(os.environ["GIBBS_INVERSE_THREADS"])
        except ValueError:
            parser.error("threads: GIBBS_INVERSE_THREADS must be an integer")
    cfg = RunConfig(command=args.command, **merged)
    try:
        cfg.validate()
    except ConfigError as exc:
        parser.error(str(exc))
    if args.verbose:
        logging.getLogger("gibbs_inverse").setLevel(logging.DEBUG)
    return cfg


# -- workflows -----------------------------------------------------------


def _load_potential(cfg: RunConfig):
    return io.parse_potential(io.read_json(cfg.potential), cfg.dim)


def _load_target(cfg: RunConfig) -> ClusterSpec:
    return io.parse_target(io.read_json(cfg.target), cfg.r, cfg.dim)


def _solve_summary(rep) -> dict:
    return {
        "z": rep.solution.z,
        "mayer_norm": 2.0 * math.fsum(abs(v) for _, v in rep.solution.g.canonical_items()),
        "iterations": rep.iterations,
        "converged": rep.converged,
        "final_step": rep.final_step,
        "residual": rep.residual,
        "contraction_ratios": rep.contraction_estimates,
        "max_contraction_ratio": max(rep.contraction_estimates, default=0.0),
        "left_domain": rep.left_domain,
        "escaped_domain": rep.escaped,
        "diverging_series": rep.diverging,
        "potential_valid": rep.potential is not None,
        "domain": asdict(rep.domain),
    }


def run_forward(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    g = _load_potential(cfg)
    fr = forward_cluster(cfg.z, g, cfg.truncation(), workers=cfg.threads)
    io.write_correlation_csv(out / "correlation.csv", g.dim, fr.omega1, fr.omega2)
    results = {
        "omega1": fr.omega1,
        "rho1": fr.omega1,
        "a_value": fr.a_value,
        "a_terms": fr.a_terms,
        "order_magnitudes": fr.order_magnitudes,
        "diverging_series": fr.diverging,
        "window_points": len(fr.omega2),
    }
    return (EXIT_NUMERICAL if fr.diverging else EXIT_OK), results


def run_invert(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    spec = _load_target(cfg)
    rep = solve(spec, cfg.truncation(), cfg.tol, cfg.max_iter, workers=cfg.threads)
    io.write_potential_csv(out / "potential.csv", rep.solution.g)
    if math.isfinite(rep.solution.z) and rep.solution.z > 0:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SeriesDivergenceWarning)
            fr = forward_cluster(rep.solution.z, rep.solution.g, TruncationParams(cfg.order, max(spec.support_radius(), cfg.radius or 0)))
        io.write_correlation_csv(out / "correlation.csv", spec.dim, fr.omega1, fr.omega2)
    return (EXIT_OK if rep.ok else EXIT_NUMERICAL), _solve_summary(rep)


def _probes(cfg: RunConfig, dim: int) -> list:
    return half_box(cfg.radius if cfg.radius is not None else 2, dim)


def run_oracle(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    g = _load_potential(cfg)
    phi = potential_from_mayer(g)
    side = 2 * cfg.k_max + 1
    if side**g.dim > MAX_SITES:
        raise ConfigError(f"k_max: box [-{cfg.k_max}, {cfg.k_max}]^{g.dim} exceeds {MAX_SITES} sites")
    probes = _probes(cfg, g.dim)
    rows = volume_sweep(cfg.z, phi, cfg.k_max, probes)
    io.write_sweep_csv(out / "sweep.csv", g.dim, rows, probes)
    last = rows[-1]
    results = {
        "partition_function": partition_function(FiniteVolume.box(cfg.k_max, g.dim), cfg.z, phi),
        "rho1": last.rho1,
        "rho2": {format_key(x): v for x, v in last.rho2.items()},
        "rho1_increments": [abs(b.rho1 - a.rho1) for a, b in zip(rows, rows[1:])],
    }
    return EXIT_OK, results


def run_roundtrip(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    g = _load_potential(cfg)
    t = cfg.truncation()
    fr = forward_cluster(cfg.z, g, t, workers=cfg.threads)
    spec = ClusterSpec(g.dim, fr.omega1, fr.omega2, cfg.r)
    report = validate_cluster_spec(spec)
    if not report.ok:
        raise SpecValidationError(report)
    rep = solve(spec, t, cfg.tol, cfg.max_iter, workers=cfg.threads)
    io.write_correlation_csv(out / "correlation.csv", g.dim, fr.omega1, fr.omega2)
    io.write_potential_csv(out / "potential.csv", rep.solution.g)
    results = _solve_summary(rep)
    results["recovery_error"] = pair_metric(rep.solution, SolverPoint(cfg.z, g), rep.domain)
    results["target"] = io.spec_to_json(spec)
    return (EXIT_OK if rep.ok and not fr.diverging else EXIT_NUMERICAL), results


def algebra_identity_suite(seed: int = 0, radius: int = 1, max_order: int = 4) -> dict:
    """Gamma/Gamma^-1 roundtrips and the Ursell recursion vs Gamma^-1 of Boltzmann factors."""
    rng = np.random.default_rng(seed)
    window = [(i,) for i in range(-radius, radius + 1)]
    table = {X: float(rng.normal()) for m in range(1, max_order + 1) for X in itertools.product(window, repeat=m)}
    phi = SequenceFunctional(lambda X: table.get(X, 0.0), max_order)
    psi = SequenceFunctional(lambda X: 1.0 if not X else table.get(X, 0.0), max_order)
    gg, ig = gamma(gamma_inverse(psi)), gamma_inverse(gamma(phi))
    err_gg = err_ig = 0.0
    for X in table:
        err_gg = max(err_gg, abs(gg(X) - psi(X)))
        err_ig = max(err_ig, abs(ig(X) - phi(X)))
    g = random_mayer(1, 2, 0.8, rng)
    cache = UrsellCache(g)
    ref = gamma_inverse(boltzmann_factors(potential_from_mayer(g), 5))
    err_u = 0.0
    for m in range(1, 6):
        for X in itertools.product(window, repeat=m):
            a, b = cache.ursell(X), ref(X)
            scale = max(abs(a), abs(b))
            if scale > 0:
                err_u = max(err_u, abs(a - b) / scale)
    return {
        "gamma_of_inverse_max_error": err_gg,
        "inverse_of_gamma_max_error": err_ig,
        "ursell_max_relative_error": err_u,
        "ok": err_gg < 1e-12 and err_ig < 1e-12 and err_u < 1e-10,
    }


def run_check(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    t = cfg.truncation()
    if cfg.target:
        spec = _load_target(cfg)
    else:
        rng = np.random.default_rng(cfg.seed)
        dim = cfg.dim or 1
        w = random_mayer(dim, cfg.radius or 2, cfg.r * cfg.z**2, rng)
        spec = ClusterSpec(dim, cfg.z, dict(w.items()), cfg.r)
    report = validate_cluster_spec(spec)
    if not report.ok:
        raise SpecValidationError(report)
    d = make_domain(spec.r, spec.omega1)
    cr = verify_contraction(d, spec, t, cfg.samples, cfg.seed, cfg.threads)
    identities = algebra_identity_suite(cfg.seed)
    results = {
        "max_ratio": cr.max_ratio,
        "images_in_domain": cr.images_in_domain,
        "u1": cr.u1,
        "u2": cr.u2,
        "inequalities": cr.inequalities,
        "samples": cr.samples,
        "algebra": identities,
        "domain": asdict(d),
    }
    ok = cr.ok and identities["ok"]
    return (EXIT_OK if ok else EXIT_NUMERICAL), results


RUNNERS = {
    "forward": run_forward,
    "invert": run_invert,
    "oracle": run_oracle,
    "roundtrip": run_roundtrip,
    "check": run_check,
}


def write_report(cfg: RunConfig, results: dict, status: int, out: Path) -> None:
    payload = {
        "config": asdict(cfg),
        "results": results,
        "exit_status": status,
        "zero_trim": io.ZERO_TRIM,
    }
    io.write_json(out / "report.json", _jsonable(payload))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def run_command(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        log.error("cannot create output directory %s: %s", out, exc)
        return EXIT_IO
    try:
        status, results = RUNNERS[cfg.command](cfg, out)
        write_report(cfg, results, status, out)
    except (ConfigError, io.InputError, SpecValidationError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    return status


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    cfg = parse_config(argv)
    return run_command(cfg)


if __name__ == "__main__":
    sys.exit(main())
