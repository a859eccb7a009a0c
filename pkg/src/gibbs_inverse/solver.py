"""Fixed-point recovery of (z, g) from target cluster functions.

Q(z, g) = (z', g') with

    z'    = omega1 - z^2 A(z, g)
    g'(x) = omega2(x) / z^2 - z B(z, g)(x),  x != 0;   g'(0) = -1

acts on D = [a1 z0, a2 z0] x {g : ||g|| <= c} with z0 = omega1, and is a
contraction there for small z0 in the metric

    rho((z1, g1), (z2, g2)) = h |z1 - z2| / z0 + ||g1 - g2||.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .expansion import (
    SeriesDivergenceWarning,
    TruncationParams,
    b_terms_on_window,
    forward_cluster,
    is_diverging,
    order_terms_A,
)
from .lattice import (
    ClusterSpec,
    MayerFunction,
    PairPotential,
    SpecValidationError,
    half_box,
    mayer_distance,
    mayer_norm,
    potential_from_mayer,
    validate_cluster_spec,
)
from .ursell import UrsellCache

log = logging.getLogger(__name__)

# iterates whose norm exceeds c by less than this fraction are tolerated
MARGINAL_ESCAPE = 0.05


class DomainWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class DomainParams:
    r: float
    z0: float
    a1: float
    a2: float
    c: float
    h: float

    @property
    def z_interval(self) -> tuple[float, float]:
        return (self.a1 * self.z0, self.a2 * self.z0)


def make_domain(r: float, z0: float) -> DomainParams:
    if not 0 < r < 1:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    if not z0 > 0:
        raise ValueError(f"z0 must be positive, got {z0}")
    a1 = math.sqrt(2 * r / (r + 1))
    a2 = 2.0
    return DomainParams(r=r, z0=z0, a1=a1, a2=a2, c=(r + 2) / 3, h=12 * a2 / a1**4)


@dataclass(frozen=True)
class SolverPoint:
    z: float
    g: MayerFunction


def in_domain(p: SolverPoint, d: DomainParams, slack: float = 0.0) -> bool:
    """Membership in D; ``slack`` widens the norm ball to c (1 + slack)."""
    lo, hi = d.z_interval
    # MayerFunction enforces g(0) = -1 and evenness at construction
    return lo <= p.z <= hi and mayer_norm(p.g) <= d.c * (1 + slack)


def pair_metric(p1: SolverPoint, p2: SolverPoint, d: DomainParams) -> float:
    if p1.g.dim != p2.g.dim:
        raise ValueError("points have different dimensions")
    return d.h * abs(p1.z - p2.z) / d.z0 + mayer_distance(p1.g, p2.g)


def solver_radius(spec: ClusterSpec, t: TruncationParams) -> int:
    if t.radius is not None:
        return t.radius
    return max(spec.support_radius(), 1)


@dataclass
class QImage:
    point: SolverPoint
    a_value: float
    b_values: dict
    diverging: bool


def apply_Q_detailed(
    p: SolverPoint,
    spec: ClusterSpec,
    d: DomainParams,
    t: TruncationParams,
    workers: int = 1,
    check: bool = True,
) -> QImage:
    if check and not in_domain(p, d, MARGINAL_ESCAPE):
        warnings.warn(f"Q applied outside the domain D at z = {p.z:.6g}, ||g|| = {mayer_norm(p.g):.6g}", DomainWarning, stacklevel=2)
    z, g = p.z, p.g
    cache = UrsellCache(g)
    a_terms = order_terms_A(z, g, t, cache)
    b_terms = b_terms_on_window(z, g, solver_radius(spec, t), t, cache, workers)
    diverging = is_diverging(a_terms) or any(is_diverging(v) for v in b_terms.values())
    a = math.fsum(a_terms)
    z_new = spec.omega1 - z * z * a
    values = {}
    b_values = {}
    for x, terms in b_terms.items():
        b = math.fsum(terms)
        b_values[x] = b
        # canonical x only; the constructor mirrors, so g' is exactly even
        values[x] = 0.5 * (spec.omega2_at(x) + spec.omega2_at(tuple(-u for u in x))) / (z * z) - z * b
    return QImage(SolverPoint(z_new, MayerFunction(g.dim, values)), a, b_values, diverging)


def apply_Q(
    p: SolverPoint,
    spec: ClusterSpec,
    d: DomainParams,
    t: TruncationParams,
    workers: int = 1,
) -> SolverPoint:
    image = apply_Q_detailed(p, spec, d, t, workers)
    if image.diverging:
        warnings.warn("series contributions are not decreasing inside Q", SeriesDivergenceWarning, stacklevel=2)
    return image.point


def initial_point(spec: ClusterSpec, t: TruncationParams) -> SolverPoint:
    """(z0, omega2 / z0^2): the leading-order solution."""
    z0 = spec.omega1
    radius = solver_radius(spec, t)
    values = {}
    for x in half_box(radius, spec.dim):
        values[x] = 0.5 * (spec.omega2_at(x) + spec.omega2_at(tuple(-u for u in x))) / z0**2
    return SolverPoint(z0, MayerFunction(spec.dim, values))


def residual(p: SolverPoint, spec: ClusterSpec, d: DomainParams, t: TruncationParams) -> float:
    """Forward-map defect h |omega1' - omega1| / z0 + sum |omega2' - omega2|.

    The forward map is evaluated at the truncation ``t`` over the solver
    window together with the target's own support.
    """
    radius = max(solver_radius(spec, t), spec.support_radius())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeriesDivergenceWarning)
        fwd = forward_cluster(p.z, p.g, TruncationParams(t.order, radius))
    keys = set(fwd.omega2) | set(spec.omega2)
    defect2 = math.fsum(abs(fwd.omega2.get(x, 0.0) - spec.omega2.get(x, 0.0)) for x in keys if any(x))
    return d.h * abs(fwd.omega1 - spec.omega1) / d.z0 + defect2


@dataclass
class SolveReport:
    solution: SolverPoint
    potential: PairPotential | None
    iterations: int
    final_step: float
    converged: bool
    steps: list[float] = field(default_factory=list)
    contraction_estimates: list[float] = field(default_factory=list)
    residual: float = math.nan
    left_domain: bool = False
    escaped: bool = False
    diverging: bool = False
    domain: DomainParams | None = None

    @property
    def ok(self) -> bool:
        return self.converged and not self.diverging and self.potential is not None


def solve(
    spec: ClusterSpec,
    t: TruncationParams = TruncationParams(),
    tol: float = 1e-10,
    max_iter: int = 200,
    start: SolverPoint | None = None,
    workers: int = 1,
) -> SolveReport:
    """Iterate Q from ``start`` (default: the leading-order point) to a fixed point."""
    report = validate_cluster_spec(spec)
    if not report.ok:
        raise SpecValidationError(report)
    d = make_domain(spec.r, spec.omega1)
    p = start or initial_point(spec, t)

    steps: list[float] = []
    left = escaped = diverging = False
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        image = apply_Q_detailed(p, spec, d, t, workers, check=False)
        q = image.point
        diverging |= image.diverging
        if not math.isfinite(q.z) or not all(math.isfinite(v) for _, v in q.g.canonical_items()):
            log.warning("iterate %d is not finite; stopping", iterations)
            p = q
            steps.append(math.inf)
            break
        if not in_domain(q, d):
            left = True
            if not in_domain(q, d, MARGINAL_ESCAPE):
                escaped = True
        step = pair_metric(q, p, d)
        steps.append(step)
        p = q
        log.debug("iteration %d: step %.3e, z = %.12g, ||g|| = %.6g", iterations, step, p.z, mayer_norm(p.g))
        if step < tol:
            converged = True
            break

    ratios = [b / a for a, b in zip(steps, steps[1:]) if a > 0 and math.isfinite(a) and math.isfinite(b)]
    try:
        potential = potential_from_mayer(p.g)
    except ValueError:
        potential = None
    res = residual(p, spec, d, t) if math.isfinite(p.z) else math.nan
    if not converged:
        warnings.warn(f"no convergence after {iterations} iterations (last step {steps[-1] if steps else math.nan:.3e})", RuntimeWarning, stacklevel=2)
    return SolveReport(
        solution=p,
        potential=potential,
        iterations=iterations,
        final_step=steps[-1] if steps else math.nan,
        converged=converged,
        steps=steps,
        contraction_estimates=ratios,
        residual=res,
        left_domain=left,
        escaped=escaped,
        diverging=diverging,
        domain=d,
    )


def random_mayer(dim: int, radius: int, norm: float, rng: np.random.Generator) -> MayerFunction:
    """Random even g on [-radius, radius]^d with ||g|| = norm."""
    xs = half_box(radius, dim)
    raw = rng.uniform(-1.0, 1.0, len(xs))
    total = 2.0 * np.abs(raw).sum()
    scale = norm / total if total > 0 else 0.0
    return MayerFunction(dim, {x: float(v * scale) for x, v in zip(xs, raw)})


def random_point(d: DomainParams, dim: int, radius: int, rng: np.random.Generator) -> SolverPoint:
    lo, hi = d.z_interval
    z = float(rng.uniform(lo, hi))
    return SolverPoint(z, random_mayer(dim, radius, float(rng.uniform(0.0, d.c)), rng))


@dataclass
class ContractionReport:
    max_ratio: float
    ratios: list[float]
    images_in_domain: bool
    u1: float
    u2: float
    inequalities: dict[str, bool]
    samples: int

    @property
    def ok(self) -> bool:
        return self.max_ratio <= 0.5 and self.images_in_domain


def verify_contraction(
    d: DomainParams,
    spec: ClusterSpec,
    t: TruncationParams,
    samples: int = 100,
    seed: int = 0,
    workers: int = 1,
) -> ContractionReport:
    """Sampled Lipschitz ratio of Q on D and the D -> D check.

    u1 = sup |A| and u2 = sup sum_x |B(x)| are measured over the samples and
    plugged into the sufficient conditions for Q(D) in D.
    """
    rng = np.random.default_rng(seed)
    radius = solver_radius(spec, t)
    ratios = []
    inside = True
    u1 = u2 = 0.0
    for _ in range(samples):
        p1 = random_point(d, spec.dim, radius, rng)
        p2 = random_point(d, spec.dim, radius, rng)
        images = []
        for p in (p1, p2):
            image = apply_Q_detailed(p, spec, d, t, workers, check=False)
            images.append(image.point)
            inside &= in_domain(image.point, d)
            u1 = max(u1, abs(image.a_value))
            u2 = max(u2, 2.0 * math.fsum(abs(b) for b in image.b_values.values()))
        dist = pair_metric(p1, p2, d)
        if dist > 0:
            ratios.append(pair_metric(images[0], images[1], d) / dist)
    z0, a1, a2, c, r = d.z0, d.a1, d.a2, d.c, d.r
    inequalities = {
        "upper_z": z0 + (a2 * z0) ** 2 * u1 <= a2 * z0,
        "lower_z": z0 - (a2 * z0) ** 2 * u1 >= a1 * z0,
        "norm": r * z0**2 / (a1 * z0) ** 2 + a2 * z0 * u2 <= c,
    }
    return ContractionReport(max(ratios, default=0.0), ratios, inside, u1, u2, inequalities, samples)
