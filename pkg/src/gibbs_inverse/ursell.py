"""Ursell functions through the recursion on phi~_X(Y).

phi~_X(Y) = prod_{i>=2} f(x_i - x_1)
            * sum_{S subset Y} prod_{y in S} g(y - x_1) * phi~_{S u X\\x_1}(Y \\ S),

with phi~_{()}(Y) = 1 if Y is empty else 0, f = 1 + g, and the Ursell
function phi_{1+n}(x_1, y_1..y_n) = phi~_{(x_1)}(y_1..y_n).

The value is translation invariant and symmetric in X and in Y separately,
so memo keys translate the smallest X point to the origin and sort both
tuples.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from typing import Iterable, Sequence

import numpy as np

from .lattice import MayerFunction, Point, box, origin, sub, sup_norm

MAX_FREE_POINTS = 12


def _edge(g: MayerFunction, a: Point, b: Point) -> bool:
    return a == b or g(sub(a, b)) != 0.0


def connected_to(g: MayerFunction, X: Sequence[Point], Y: Sequence[Point]) -> bool:
    """True if every point of Y is linked to X by a chain of nonzero g bonds.

    Coincident points count as bonded since g(0) = -1.
    """
    reached = list(X)
    pending = list(Y)
    grew = True
    while pending and grew:
        grew = False
        keep = []
        for y in pending:
            if any(_edge(g, y, x) for x in reached):
                reached.append(y)
                grew = True
            else:
                keep.append(y)
        pending = keep
    return not pending


def _has_repeat(X: Sequence) -> bool:
    return len(set(X)) < len(X)


def multiplicity(points: Sequence) -> int:
    """Number of distinct orderings of a multiset."""
    out = math.factorial(len(points))
    for c in Counter(points).values():
        out //= math.factorial(c)
    return out


class _Codec:
    """Linear integer codes for lattice points.

    code(x) = sum_i x_i B^(d-1-i) is additive and, for |x_i| < B/2, orders
    points lexicographically.  Translating and sorting codes is much cheaper
    than doing the same on coordinate tuples.
    """

    BASE = 1 << 32

    def __init__(self, dim: int):
        self.dim = dim
        self._norms: dict[int, int] = {}

    def encode(self, x: Point) -> int:
        c = 0
        for u in x:
            if abs(u) >= self.BASE // 2:
                raise ValueError(f"coordinate {u} out of range")
            c = c * self.BASE + u
        return c

    def decode(self, c: int) -> Point:
        half = self.BASE // 2
        out = []
        for _ in range(self.dim):
            r = (c + half) % self.BASE - half
            out.append(r)
            c = (c - r) // self.BASE
        return tuple(reversed(out))

    def norm(self, c: int) -> int:
        try:
            return self._norms[c]
        except KeyError:
            v = self._norms[c] = sup_norm(self.decode(c))
            return v


def _canon(X: Sequence[int], Y: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    t = min(X)
    if t:
        return tuple(sorted([x - t for x in X])), tuple(sorted([y - t for y in Y]))
    return tuple(sorted(X)), tuple(sorted(Y))


class UrsellCache:
    """Memoised phi~ values and lattice sums for one Mayer function."""

    def __init__(self, g: MayerFunction):
        self.g = g
        self.dim = g.dim
        self.support_radius = g.support_radius()
        self.origin = origin(g.dim)
        # bond offsets from a fixed point; the origin is the coincidence bond
        self.bonds = [(self.origin, -1.0)] + [(x, v) for x, v in g.items()]
        self._codec = _Codec(g.dim)
        self._gc = {self._codec.encode(x): v for x, v in self.bonds}
        self._tilde: dict = {}
        self._sums: dict = {}
        self._bond_multisets: dict[int, list[tuple[tuple[int, ...], float]]] = {}

    def _encode_all(self, pts: Sequence[Point]) -> tuple[int, ...]:
        return tuple(self._codec.encode(tuple(p)) for p in pts)

    def _connected(self, X: Sequence[int], Y: Sequence[int]) -> bool:
        gc = self._gc
        reached = list(X)
        pending = list(Y)
        grew = True
        while pending and grew:
            grew = False
            keep = []
            for y in pending:
                if any((y - x) in gc for x in reached):
                    reached.append(y)
                    grew = True
                else:
                    keep.append(y)
            pending = keep
        return not pending

    # -- pointwise values -------------------------------------------------

    def phi_tilde(self, X: Sequence[Point], Y: Sequence[Point]) -> float:
        X, Y = tuple(X), tuple(Y)
        if not X:
            return 1.0 if not Y else 0.0
        if len(Y) > MAX_FREE_POINTS:
            raise ValueError(f"at most {MAX_FREE_POINTS} free points supported, got {len(Y)}")
        return self._phi_tilde(*_canon(self._encode_all(X), self._encode_all(Y)))

    def _phi_tilde(self, X, Y) -> float:
        key = (X, Y)
        try:
            return self._tilde[key]
        except KeyError:
            pass
        value = self._phi_tilde_raw(X, Y)
        self._tilde[key] = value
        return value

    def _phi_tilde_raw(self, X, Y) -> float:
        # canonical X is sorted with X[0] == 0
        if _has_repeat(X) or not self._connected(X, Y):
            return 0.0
        gc = self._gc
        rest = X[1:]
        pref = 1.0
        for xi in rest:
            pref *= 1.0 + gc.get(xi, 0.0)
        bonded = [(j, gc[y]) for j, y in enumerate(Y) if y in gc]
        total = 0.0
        for k in range(len(bonded) + 1):
            for chosen in itertools.combinations(bonded, k):
                w = 1.0
                picked = set()
                for j, gj in chosen:
                    w *= gj
                    picked.add(j)
                newX = rest + tuple(Y[j] for j in picked)
                if not newX:
                    total += w * (1.0 if len(picked) == len(Y) else 0.0)
                    continue
                newY = tuple(y for j, y in enumerate(Y) if j not in picked)
                total += w * self._phi_tilde(*_canon(newX, newY))
        return pref * total

    def ursell(self, X: Sequence[Point]) -> float:
        """phi_k(x_1..x_k) = phi~_{(x_1)}(x_2..x_k)."""
        X = tuple(X)
        if not X:
            raise ValueError("Ursell functions are defined for k >= 1 points")
        return self.phi_tilde(X[:1], X[1:])

    # -- lattice sums over free points ---------------------------------------

    def _multisets(self, s: int) -> list[tuple[tuple[int, ...], float]]:
        """Multisets of s bond offsets with weight (#orderings) * prod g."""
        try:
            return self._bond_multisets[s]
        except KeyError:
            pass
        codes = [(self._codec.encode(x), v) for x, v in self.bonds]
        out = []
        for combo in itertools.combinations_with_replacement(range(len(codes)), s):
            pts = tuple(codes[i][0] for i in combo)
            if s > 1 and _has_repeat(pts):
                # would put two coincident points into X, where phi~ vanishes
                continue
            w = float(multiplicity(pts))
            for i in combo:
                w *= codes[i][1]
            out.append((pts, w))
        self._bond_multisets[s] = out
        return out

    def lattice_sum(self, X: Sequence[Point], fixed: Sequence[Point], n: int) -> float:
        """Sum over y_1..y_n in Z^d of phi~_X(fixed, y_1..y_n).

        The free sums are exact: only finitely many y carry nonzero bonds.
        """
        X, fixed = tuple(X), tuple(fixed)
        if n < 0:
            raise ValueError("n must be >= 0")
        if not X:
            return 1.0 if not fixed and n == 0 else 0.0
        if n + len(fixed) > MAX_FREE_POINTS:
            raise ValueError(f"at most {MAX_FREE_POINTS} free points supported")
        return self._lattice_sum(*_canon(self._encode_all(X), self._encode_all(fixed)), n)

    def _lattice_sum(self, X, F, n) -> float:
        key = (X, F, n)
        try:
            return self._sums[key]
        except KeyError:
            pass
        value = self._lattice_sum_raw(X, F, n)
        self._sums[key] = value
        return value

    def _reachable(self, X, F, n) -> bool:
        # a fixed point needs a bond chain to X using at most n + |F| bonds
        reach = (n + len(F)) * self.support_radius
        norm = self._codec.norm
        return all(min(norm(f - x) for x in X) <= reach for f in F)

    def _lattice_sum_raw(self, X, F, n) -> float:
        if _has_repeat(X) or not self._reachable(X, F, n):
            return 0.0
        gc = self._gc
        rest = X[1:]
        pref = 1.0
        for xi in rest:
            pref *= 1.0 + gc.get(xi, 0.0)
        bondedF = [(j, gc[f]) for j, f in enumerate(F) if f in gc]
        total = 0.0
        for k in range(len(bondedF) + 1):
            for chosen in itertools.combinations(bondedF, k):
                wF = 1.0
                picked = set()
                for j, gj in chosen:
                    wF *= gj
                    picked.add(j)
                base = rest + tuple(F[j] for j in picked)
                Frest = tuple(f for j, f in enumerate(F) if j not in picked)
                taken = set(base)
                if len(taken) < len(base):
                    continue
                for s in range(n + 1):
                    acc = 0.0
                    for offsets, w in self._multisets(s):
                        if not taken.isdisjoint(offsets):
                            continue
                        newX = base + offsets
                        if not newX:
                            acc += w * (1.0 if not Frest and n == s else 0.0)
                            continue
                        acc += w * self._lattice_sum(*_canon(newX, Frest), n - s)
                    total += wF * math.comb(n, s) * acc
        return pref * total

    # -- diagnostics ------------------------------------------------------

    def tail_norm(
        self,
        m: int,
        n: int,
        radius: int,
        samples: int = 8,
        rng: np.random.Generator | int | None = 0,
    ) -> float:
        """max over sampled distinct X (m points) of sum_{Y in window^n} |phi~_X(Y)|.

        The window is [-radius, radius]^d.  For m = 1 translation invariance
        leaves the single choice X = (0,).
        """
        if m < 1 or n < 0:
            raise ValueError("need m >= 1 and n >= 0")
        window = list(box(radius, self.dim))
        if m == 1:
            candidates = [(self.origin,)]
        else:
            rng = np.random.default_rng(rng)
            others = [x for x in window if any(x)]
            candidates = []
            for _ in range(samples):
                idx = rng.choice(len(others), size=m - 1, replace=False)
                candidates.append((self.origin, *(others[i] for i in sorted(idx))))
        best = 0.0
        for X in candidates:
            best = max(best, self.abs_window_sum(X, window, n))
        return best

    def abs_window_sum(self, X: Sequence[Point], window: Iterable[Point], n: int) -> float:
        """sum over ordered Y in window^n of |phi~_X(Y)|, by multisets."""
        X = tuple(X)
        window = list(window)
        total = 0.0
        for combo in itertools.combinations_with_replacement(window, n):
            v = self.phi_tilde(X, combo)
            if v:
                total += multiplicity(combo) * abs(v)
        return total

