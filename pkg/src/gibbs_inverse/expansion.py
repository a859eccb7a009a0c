"""Truncated cluster expansions of the first two cluster functions.

    omega1    = z + z^2 A(z, g)
    omega2(x) = z^2 g(x) + z^3 B(z, g)(x)

    A(z, g)    = sum_{n>=1} z^(n-1)/n! sum_{y in (Z^d)^n} phi_{1+n}(0, y)
    B(z, g)(x) = sum_{n>=1} z^(n-1)/n! sum_{y in (Z^d)^n} phi_{2+n}(0, x, y)

The y-sums are exact lattice sums (Ursell functions vanish unless every
point is bond-connected to the origin), so only the order is truncated.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .lattice import MayerFunction, Point, half_box, neg, origin
from .ursell import UrsellCache


class SeriesDivergenceWarning(RuntimeWarning):
    """Order contributions stopped decreasing; z is likely too large."""


@dataclass(frozen=True)
class TruncationParams:
    """Series order and the lattice window for omega2 / g.

    ``radius`` is the sup-norm radius of the window [-R, R]^d on which
    omega2 (forward) and g (inverse) are carried.  ``None`` means the full
    reach of the truncated series, (order + 1) times the support radius of g.
    """

    order: int = 4
    radius: int | None = None

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        if self.radius is not None and self.radius < 0:
            raise ValueError(f"radius must be >= 0, got {self.radius}")

    def window_radius(self, g: MayerFunction) -> int:
        if self.radius is not None:
            return self.radius
        return (self.order + 1) * g.support_radius()


def is_diverging(terms: list[float]) -> bool:
    """Two consecutive increases in |term| flag a non-convergent regime."""
    mags = [abs(t) for t in terms]
    ups = [b > a for a, b in zip(mags, mags[1:])]
    return any(u and v for u, v in zip(ups, ups[1:]))


def _terms(z: float, sums: list[float]) -> list[float]:
    return [z ** (n - 1) / math.factorial(n) * s for n, s in enumerate(sums, start=1)]


def _check_args(z: float) -> None:
    if not z > 0:
        raise ValueError(f"activity must be positive, got {z}")


def order_terms_A(z: float, g: MayerFunction, t: TruncationParams, cache: UrsellCache | None = None) -> list[float]:
    _check_args(z)
    cache = cache or UrsellCache(g)
    o = origin(g.dim)
    return _terms(z, [cache.lattice_sum((o,), (), n) for n in range(1, t.order + 1)])


def order_terms_B(
    z: float, g: MayerFunction, x: Point, t: TruncationParams, cache: UrsellCache | None = None
) -> list[float]:
    _check_args(z)
    if not any(x):
        raise ValueError("B(z, g)(x) is defined for x != 0")
    cache = cache or UrsellCache(g)
    o = origin(g.dim)
    return _terms(z, [cache.lattice_sum((o,), (x,), n) for n in range(1, t.order + 1)])


def _summed(terms: list[float], what: str) -> float:
    if is_diverging(terms):
        warnings.warn(f"{what}: order contributions are not decreasing: {terms}", SeriesDivergenceWarning, stacklevel=3)
    return math.fsum(terms)


def series_A(z: float, g: MayerFunction, t: TruncationParams, cache: UrsellCache | None = None) -> float:
    return _summed(order_terms_A(z, g, t, cache), "A(z, g)")


def series_B(z: float, g: MayerFunction, x: Point, t: TruncationParams, cache: UrsellCache | None = None) -> float:
    return _summed(order_terms_B(z, g, x, t, cache), f"B(z, g)({x})")


def _b_terms_chunk(args):
    z, g, xs, t = args
    cache = UrsellCache(g)
    return [order_terms_B(z, g, x, t, cache) for x in xs]


def b_terms_on_window(
    z: float,
    g: MayerFunction,
    radius: int,
    t: TruncationParams,
    cache: UrsellCache | None = None,
    workers: int = 1,
) -> dict[Point, list[float]]:
    """Per-order B terms for every canonical x in [-radius, radius]^d."""
    xs = half_box(radius, g.dim)
    if workers <= 1 or len(xs) < 2:
        cache = cache or UrsellCache(g)
        return {x: order_terms_B(z, g, x, t, cache) for x in xs}
    chunks = [xs[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_b_terms_chunk, [(z, g, c, t) for c in chunks if c]))
    out = {}
    for chunk, res in zip(chunks, results):
        out.update(zip(chunk, res))
    return {x: out[x] for x in xs}


@dataclass
class ForwardResult:
    z: float
    g: MayerFunction
    omega1: float
    omega2: dict[Point, float]
    a_value: float
    b_values: dict[Point, float]
    a_terms: list[float]
    b_terms: dict[Point, list[float]] = field(repr=False)
    diverging: bool = False

    @property
    def order_magnitudes(self) -> list[float]:
        """Largest |order-n contribution| over A and all B(x), per order."""
        rows = [self.a_terms] + list(self.b_terms.values())
        return [max(abs(r[n]) for r in rows) for n in range(len(self.a_terms))]


def forward_cluster(
    z: float,
    g: MayerFunction,
    t: TruncationParams = TruncationParams(),
    workers: int = 1,
) -> ForwardResult:
    """(z, g) -> (omega1, omega2) on the window [-R, R]^d \\ {0}."""
    _check_args(z)
    cache = UrsellCache(g)
    a_terms = order_terms_A(z, g, t, cache)
    radius = t.window_radius(g)
    half = b_terms_on_window(z, g, radius, t, cache, workers)

    diverging = is_diverging(a_terms) or any(is_diverging(v) for v in half.values())
    if diverging:
        warnings.warn(f"forward map at z = {z}: series contributions are not decreasing", SeriesDivergenceWarning, stacklevel=2)

    a_value = math.fsum(a_terms)
    omega1 = z + z * z * a_value
    omega2: dict[Point, float] = {}
    b_values: dict[Point, float] = {}
    b_terms: dict[Point, list[float]] = {}
    for x, terms in half.items():
        b = math.fsum(terms)
        w = z * z * g(x) + z**3 * b
        for y in (x, neg(x)):
            b_values[y] = b
            omega2[y] = w
            b_terms[y] = terms
    omega2 = dict(sorted(omega2.items()))
    b_values = dict(sorted(b_values.items()))
    return ForwardResult(z, g, omega1, omega2, a_value, b_values, a_terms, b_terms, diverging)
