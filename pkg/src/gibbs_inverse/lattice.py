"""Lattice points, symmetric finitely supported functions on Z^d, and the
potential/Mayer conversions used throughout the package.

Lattice points are plain tuples of ints.  Symmetric functions store one
canonical representative per pair {x, -x}; reads mirror automatically, so
f(x) == f(-x) holds by construction.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

Point = tuple[int, ...]


def origin(dim: int) -> Point:
    return (0,) * dim


def add(a: Point, b: Point) -> Point:
    return tuple(u + v for u, v in zip(a, b))


def sub(a: Point, b: Point) -> Point:
    return tuple(u - v for u, v in zip(a, b))


def neg(a: Point) -> Point:
    return tuple(-u for u in a)


def sup_norm(a: Point) -> int:
    return max((abs(u) for u in a), default=0)


def is_canonical(x: Point) -> bool:
    """True if the first nonzero coordinate of ``x`` is positive."""
    for u in x:
        if u:
            return u > 0
    return False


def canonical(x: Point) -> Point:
    return x if is_canonical(x) else neg(x)


def box(radius: int, dim: int) -> Iterator[Point]:
    """All points of [-radius, radius]^dim in lexicographic order."""
    return itertools.product(range(-radius, radius + 1), repeat=dim)


def half_box(radius: int, dim: int) -> list[Point]:
    """Canonical representatives of the nonzero points of the box."""
    return [x for x in box(radius, dim) if is_canonical(x)]


def parse_key(key: str) -> Point:
    return tuple(int(part) for part in key.split(","))


def format_key(x: Point) -> str:
    return ",".join(str(u) for u in x)


def as_point(x) -> Point:
    if isinstance(x, (int,)):
        return (x,)
    if isinstance(x, str):
        return parse_key(x)
    return tuple(int(u) for u in x)


class _SymmetricFunction:
    """Even function on Z^d with finite support off the origin."""

    origin_value: float = 0.0

    def __init__(self, dim: int, values: Mapping | Iterable = ()):
        if dim < 1:
            raise ValueError(f"dimension must be >= 1, got {dim}")
        items = values.items() if isinstance(values, Mapping) else values
        canon: dict[Point, float] = {}
        for key, value in items:
            x = as_point(key)
            if len(x) != dim:
                raise ValueError(f"point {x} does not have dimension {dim}")
            if not any(x):
                self._check_origin(float(value))
                continue
            c = canonical(x)
            value = float(value)
            if c in canon and canon[c] != value:
                raise ValueError(f"asymmetric values at {x} and {neg(x)}: {canon[c]} != {value}")
            canon[c] = value
        self.dim = dim
        self._values = {x: v for x, v in sorted(canon.items()) if v != 0.0}
        self._key = tuple(self._values.items())

    def _check_origin(self, value: float) -> None:
        if value != self.origin_value:
            raise ValueError(
                f"{type(self).__name__} must equal {self.origin_value} at the origin, got {value}"
            )

    def __call__(self, x: Point) -> float:
        if not any(x):
            return self.origin_value
        return self._values.get(canonical(x), 0.0)

    def canonical_items(self) -> list[tuple[Point, float]]:
        return list(self._values.items())

    def items(self) -> list[tuple[Point, float]]:
        """Every nonzero off-origin entry, both x and -x, sorted."""
        full = []
        for x, v in self._values.items():
            full.append((x, v))
            full.append((neg(x), v))
        return sorted(full)

    def support(self) -> list[Point]:
        return [x for x, _ in self.items()]

    def support_radius(self) -> int:
        return max((sup_norm(x) for x in self._values), default=0)

    def reflected(self):
        return type(self)(self.dim, {neg(x): v for x, v in self._values.items()})

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self.dim == other.dim and self._key == other._key

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.dim, self._key))

    def __repr__(self) -> str:
        body = ", ".join(f"{format_key(x)}: {v:.6g}" for x, v in self._values.items())
        return f"{type(self).__name__}(dim={self.dim}, {{{body}}})"


class MayerFunction(_SymmetricFunction):
    """g(x) = exp(-Phi(x)) - 1; equals -1 at the origin."""

    origin_value = -1.0


class PairPotential(_SymmetricFunction):
    """Pair potential; +inf at the origin (single occupancy), 0 off support."""

    origin_value = math.inf


def mayer_from_potential(phi: PairPotential) -> MayerFunction:
    return MayerFunction(phi.dim, {x: math.exp(-v) - 1.0 for x, v in phi.canonical_items()})


def potential_from_mayer(g: MayerFunction) -> PairPotential:
    values = {}
    for x, v in g.canonical_items():
        if v <= -1.0:
            raise ValueError(f"g({format_key(x)}) = {v} <= -1 has no finite potential")
        values[x] = -math.log1p(v)
    return PairPotential(g.dim, values)


def mayer_norm(g: MayerFunction) -> float:
    """Sum of |g(x)| over x != 0 (both x and -x counted)."""
    return 2.0 * math.fsum(abs(v) for _, v in g.canonical_items())


def mayer_distance(g1: MayerFunction, g2: MayerFunction) -> float:
    keys = set(dict(g1.canonical_items())) | set(dict(g2.canonical_items()))
    return 2.0 * math.fsum(abs(g1(x) - g2(x)) for x in keys)


@dataclass(frozen=True)
class ClusterSpec:
    """Target cluster functions: density-level omega1 and omega2(x), x != 0.

    ``omega2`` holds the full map (both x and -x); omega2(0) = -omega1**2 is
    implied and never stored.
    """

    dim: int
    omega1: float
    omega2: Mapping[Point, float] = field(default_factory=dict)
    r: float = 0.5

    def __post_init__(self):
        cleaned = {as_point(k): float(v) for k, v in dict(self.omega2).items()}
        object.__setattr__(self, "omega2", cleaned)

    def omega2_at(self, x: Point) -> float:
        if not any(x):
            return -self.omega1**2
        return self.omega2.get(x, 0.0)

    def support_radius(self) -> int:
        return max((sup_norm(x) for x, v in self.omega2.items() if v != 0.0), default=0)


@dataclass(frozen=True)
class CorrelationSpec:
    """Target density rho1 and pair correlation rho2(x), x != 0.

    Points absent from ``rho2`` are uncorrelated, rho2(x) = rho1**2; the
    origin value is 0 by convention.
    """

    dim: int
    rho1: float
    rho2: Mapping[Point, float] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {as_point(k): float(v) for k, v in dict(self.rho2).items() if any(as_point(k))}
        object.__setattr__(self, "rho2", cleaned)

    def rho2_at(self, x: Point) -> float:
        if not any(x):
            return 0.0
        return self.rho2.get(x, self.rho1**2)


@dataclass
class ValidationReport:
    checks: dict[str, bool]
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok


class SpecValidationError(ValueError):
    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__("; ".join(report.failures))


def validate_cluster_spec(spec: ClusterSpec) -> ValidationReport:
    checks: dict[str, bool] = {}
    failures: list[str] = []

    checks["omega1_positive"] = spec.omega1 > 0
    if not checks["omega1_positive"]:
        failures.append(f"omega1 must be positive, got {spec.omega1}")

    checks["r_in_unit_interval"] = 0 < spec.r < 1
    if not checks["r_in_unit_interval"]:
        failures.append(f"r must lie in (0, 1), got {spec.r}")

    bad = [x for x, v in spec.omega2.items() if v != spec.omega2.get(neg(x), 0.0)]
    checks["omega2_symmetric"] = not bad
    if bad:
        x = min(bad)
        failures.append(
            f"omega2 not symmetric: omega2({format_key(x)}) = {spec.omega2[x]} "
            f"!= omega2({format_key(neg(x))}) = {spec.omega2.get(neg(x), 0.0)}"
        )

    dims_ok = all(len(x) == spec.dim for x in spec.omega2)
    origin_free = all(any(x) for x in spec.omega2)
    checks["points_well_formed"] = dims_ok and origin_free
    if not dims_ok:
        failures.append(f"omega2 keys must have dimension {spec.dim}")
    if not origin_free:
        failures.append("omega2 must not carry an origin entry (implied -omega1^2)")

    total = math.fsum(abs(v) for x, v in spec.omega2.items() if any(x))
    bound = spec.r * spec.omega1**2
    checks["r_ball"] = total <= bound
    if not checks["r_ball"]:
        failures.append(f"sum |omega2| = {total:.6g} exceeds r * omega1^2 = {bound:.6g}")

    return ValidationReport(checks, failures)


def correlation_to_cluster(spec: CorrelationSpec, r: float) -> ClusterSpec:
    rho1sq = spec.rho1**2
    omega2 = {}
    for x, v in spec.rho2.items():
        w = v - rho1sq
        if w != 0.0:
            omega2[x] = w
    out = ClusterSpec(spec.dim, spec.rho1, omega2, r)
    report = validate_cluster_spec(out)
    if not report.ok:
        raise SpecValidationError(report)
    return out


def cluster_to_correlation(spec: ClusterSpec) -> CorrelationSpec:
    rho1sq = spec.omega1**2
    return CorrelationSpec(
        spec.dim, spec.omega1, {x: v + rho1sq for x, v in spec.omega2.items() if any(x)}
    )
