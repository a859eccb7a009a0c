"""Algebra of sequences psi = (psi_m)_{m>=0} of functions of m lattice points.

A :class:`SequenceFunctional` is evaluated lazily.  Every product below only
needs the operands on subsequences of the argument, so each evaluation works
on the 2^m subsets of one tuple X (bitmask indexed) and never materialises
whole components.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .lattice import MayerFunction, PairPotential, Point, sub

DEFAULT_MAX_ORDER = 5


class OrderOverflowError(ValueError):
    """A component beyond the functional's max_order was requested."""


@dataclass(frozen=True, eq=False)
class SequenceFunctional:
    func: Callable[[tuple[Point, ...]], float]
    max_order: int = DEFAULT_MAX_ORDER
    memoize: bool = True
    _memo: dict = field(default_factory=dict, repr=False)

    def __call__(self, X: Sequence[Point]) -> float:
        X = tuple(X)
        if len(X) > self.max_order:
            raise OrderOverflowError(
                f"component of order {len(X)} requested, max_order is {self.max_order}"
            )
        if not self.memoize:
            return self.func(X)
        try:
            return self._memo[X]
        except KeyError:
            value = self._memo[X] = float(self.func(X))
            return value

    @property
    def order0(self) -> float:
        return self(())

    @classmethod
    def from_tables(
        cls,
        tables: Mapping[int, Mapping[tuple[Point, ...], float]],
        order0: float = 0.0,
        max_order: int = DEFAULT_MAX_ORDER,
    ) -> "SequenceFunctional":
        """Build from explicit per-order tables; missing tuples are 0."""
        merged = {(): float(order0)}
        for m, table in tables.items():
            for X, v in table.items():
                if len(X) != m:
                    raise ValueError(f"tuple {X} filed under order {m}")
                merged[tuple(X)] = float(v)
        return cls(lambda X: merged.get(X, 0.0), max_order, memoize=False)


def unit(max_order: int = DEFAULT_MAX_ORDER) -> SequenceFunctional:
    return SequenceFunctional(lambda X: 1.0 if not X else 0.0, max_order, memoize=False)


def zero(max_order: int = DEFAULT_MAX_ORDER) -> SequenceFunctional:
    return SequenceFunctional(lambda X: 0.0, max_order, memoize=False)


def _check_order(X, *psis: SequenceFunctional) -> None:
    for psi in psis:
        if len(X) > psi.max_order:
            raise OrderOverflowError(
                f"|X| = {len(X)} exceeds operand max_order {psi.max_order}"
            )


def subset_values(psi: SequenceFunctional, X: Sequence[Point]) -> list[float]:
    """psi evaluated on every subsequence of X, indexed by bitmask."""
    m = len(X)
    out = []
    for mask in range(1 << m):
        out.append(psi(tuple(X[i] for i in range(m) if mask >> i & 1)))
    return out


def _convolve(a: list[float], b: list[float]) -> list[float]:
    """Subset convolution c[S] = sum_{T subset S} a[T] b[S \\ T]."""
    n = len(a)
    c = [0.0] * n
    for mask in range(n):
        total = 0.0
        sub_ = mask
        while True:
            total += a[sub_] * b[mask ^ sub_]
            if sub_ == 0:
                break
            sub_ = (sub_ - 1) & mask
        c[mask] = total
    return c


def star(psi1: SequenceFunctional, psi2: SequenceFunctional, X: Sequence[Point]) -> float:
    """(psi1 * psi2)(X): sum over all 2^|X| subsequences Y of psi1(Y) psi2(X \\ Y)."""
    X = tuple(X)
    _check_order(X, psi1, psi2)
    m = len(X)
    full = (1 << m) - 1
    total = 0.0
    for mask in range(1 << m):
        Y = tuple(X[i] for i in range(m) if mask >> i & 1)
        rest = tuple(X[i] for i in range(m) if (full ^ mask) >> i & 1)
        total += psi1(Y) * psi2(rest)
    return total


def star_product(psi1: SequenceFunctional, psi2: SequenceFunctional) -> SequenceFunctional:
    order = min(psi1.max_order, psi2.max_order)
    return SequenceFunctional(lambda X: star(psi1, psi2, X), order)


def _exp_series(vals: list[float], m: int) -> list[float]:
    # 1 + v + v*v/2! + ...; powers above m vanish on subsets of an m-tuple
    result = [0.0] * len(vals)
    result[0] = 1.0
    term = list(result)
    for k in range(1, m + 1):
        term = [t / k for t in _convolve(term, vals)]
        result = [r + t for r, t in zip(result, term)]
    return result


def _log_series(vals: list[float], m: int) -> list[float]:
    # v - v*v/2 + v*v*v/3 - ...
    result = [0.0] * len(vals)
    power = list(vals)
    for k in range(1, m + 1):
        sign = 1.0 if k % 2 else -1.0
        result = [r + sign * p / k for r, p in zip(result, power)]
        if k < m:
            power = _convolve(power, vals)
    return result


def gamma(phi: SequenceFunctional) -> SequenceFunctional:
    """Gamma phi = 1 + phi + phi*phi/2! + ... for phi with phi_0 = 0."""
    if phi.order0 != 0.0:
        raise ValueError(f"gamma needs phi_0 = 0, got {phi.order0}")

    def evaluate(X):
        return _exp_series(subset_values(phi, X), len(X))[-1]

    return SequenceFunctional(evaluate, phi.max_order)


def gamma_inverse(psi: SequenceFunctional) -> SequenceFunctional:
    """Inverse of gamma on 1 + A_+, via the logarithmic series in psi - 1."""
    if psi.order0 != 1.0:
        raise ValueError(f"gamma_inverse needs psi_0 = 1, got {psi.order0}")

    def evaluate(X):
        vals = subset_values(psi, X)
        vals[0] -= 1.0
        return _log_series(vals, len(X))[-1]

    return SequenceFunctional(evaluate, psi.max_order)


def partition_sum(phi: SequenceFunctional, X: Sequence[Point]) -> float:
    """Sum over set partitions {X_1..X_r} of X of phi(X_1)...phi(X_r).

    Independent of the series in :func:`gamma`; the two must agree.
    """
    X = tuple(X)
    m = len(X)
    vals = subset_values(phi, X)
    totals = [0.0] * (1 << m)
    totals[0] = 1.0
    for mask in range(1, 1 << m):
        low = mask & -mask
        rest = mask ^ low
        acc = 0.0
        sub_ = rest
        while True:
            acc += vals[sub_ | low] * totals[rest ^ sub_]
            if sub_ == 0:
                break
            sub_ = (sub_ - 1) & rest
        totals[mask] = acc
    return totals[-1]


def total_energy(phi: PairPotential, X: Sequence[Point]) -> float:
    """U(X) = sum_{i<j} Phi(x_i - x_j); +inf on any coincidence."""
    X = tuple(X)
    terms = [phi(sub(X[i], X[j])) for i in range(len(X)) for j in range(i + 1, len(X))]
    if any(t == math.inf for t in terms):
        return math.inf
    return math.fsum(terms)


def boltzmann(phi: PairPotential, X: Sequence[Point]) -> float:
    """exp(-U(X)); 0 when U is infinite, 1 on the empty tuple."""
    U = total_energy(phi, X)
    return 0.0 if U == math.inf else math.exp(-U)


def boltzmann_factors(phi: PairPotential, max_order: int = DEFAULT_MAX_ORDER) -> SequenceFunctional:
    return SequenceFunctional(lambda X: boltzmann(phi, X), max_order)


def mayer_boltzmann_factors(g: MayerFunction, max_order: int = DEFAULT_MAX_ORDER) -> SequenceFunctional:
    """Boltzmann factors written as products of (1 + g) over pairs."""

    def evaluate(X):
        w = 1.0
        for i in range(len(X)):
            for j in range(i + 1, len(X)):
                w *= 1.0 + g(sub(X[i], X[j]))
        return w

    return SequenceFunctional(evaluate, max_order)
