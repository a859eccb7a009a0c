"""Exact finite-volume Gibbs quantities by enumerating all 2^|Lambda| subsets.

Configurations are bitmasks over the sites of the volume.  Weights
z^|S| exp(-U(S)) are built by doubling: adding site i appends a copy of the
current weight table multiplied by z and by prod_{j in S, j < i} f(x_i - x_j),
itself built by doubling.  That is O(|Lambda| 2^|Lambda|) vectorised work.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .algebra import SequenceFunctional, gamma_inverse
from .lattice import ClusterSpec, PairPotential, Point, box, half_box, neg, origin, sub

MAX_SITES = 24


class VolumeTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteVolume:
    dim: int
    sites: tuple[Point, ...]

    def __post_init__(self):
        sites = tuple(tuple(s) for s in self.sites)
        if len(set(sites)) != len(sites):
            raise ValueError("sites must be distinct")
        if any(len(s) != self.dim for s in sites):
            raise ValueError(f"all sites must have dimension {self.dim}")
        if len(sites) > MAX_SITES:
            raise VolumeTooLargeError(f"{len(sites)} sites exceeds the enumeration cap of {MAX_SITES}")
        object.__setattr__(self, "sites", sites)

    @classmethod
    def box(cls, k: int, dim: int = 1) -> "FiniteVolume":
        return cls(dim, tuple(box(k, dim)))

    def __len__(self) -> int:
        return len(self.sites)

    def index(self, x: Point) -> int:
        return self.sites.index(tuple(x))


class GibbsEnsemble:
    """Grand-canonical weights of every configuration of a finite volume."""

    def __init__(self, vol: FiniteVolume, z: float, phi: PairPotential):
        if not z > 0:
            raise ValueError(f"activity must be positive, got {z}")
        self.vol, self.z, self.phi = vol, z, phi
        self._pos = {s: i for i, s in enumerate(vol.sites)}
        self.weights = self._enumerate()
        self.partition_function = float(self.weights.sum())

    def _enumerate(self) -> np.ndarray:
        sites = self.vol.sites
        w = np.ones(1)
        for i, xi in enumerate(sites):
            f = np.ones(1)
            for j in range(i):
                # exp(-inf) = 0 handles hard cores
                fij = math.exp(-self.phi(sub(xi, sites[j])))
                f = np.concatenate([f, f * fij])
            w = np.concatenate([w, w * (self.z * f)])
        return w

    def _occupied_sum(self, idx: Sequence[int]) -> float:
        n = len(self.vol)
        if n == 0:
            return float(self.weights.sum())
        # C-order reshape: axis a is the bit of site n - 1 - a
        t = self.weights.reshape((2,) * n)
        sel = [slice(None)] * n
        for i in idx:
            sel[n - 1 - i] = 1
        return float(t[tuple(sel)].sum())

    def correlation(self, X: Sequence[Point]) -> float:
        """rho_m(X): probability that every point of X is occupied."""
        X = [tuple(x) for x in X]
        if len(set(X)) < len(X):
            return 0.0
        if any(x not in self._pos for x in X):
            return 0.0
        return self._occupied_sum([self._pos[x] for x in X]) / self.partition_function

    def normalization(self) -> float:
        return float(self.weights.sum() / self.partition_function)


@lru_cache(maxsize=8)
def ensemble(vol: FiniteVolume, z: float, phi: PairPotential) -> GibbsEnsemble:
    return GibbsEnsemble(vol, z, phi)


def partition_function(vol: FiniteVolume, z: float, phi: PairPotential) -> float:
    return ensemble(vol, z, phi).partition_function


def correlation_finite(vol: FiniteVolume, z: float, phi: PairPotential, X: Sequence[Point]) -> float:
    return ensemble(vol, z, phi).correlation(X)


def correlation_functional(vol: FiniteVolume, z: float, phi: PairPotential, max_m: int = 4) -> SequenceFunctional:
    ens = ensemble(vol, z, phi)
    return SequenceFunctional(lambda X: 1.0 if not X else ens.correlation(X), max_m)


def cluster_finite(vol: FiniteVolume, z: float, phi: PairPotential, max_m: int = 4) -> SequenceFunctional:
    """Finite-volume cluster functions omega = Gamma^{-1} rho."""
    if max_m > 4:
        raise ValueError("cluster functions are assembled up to order 4")
    return gamma_inverse(correlation_functional(vol, z, phi, max_m))


@dataclass
class SweepRow:
    k: int
    sites: int
    rho1: float
    rho2: dict[Point, float]


def volume_sweep(
    z: float,
    phi: PairPotential,
    k_max: int,
    probes: Sequence[Point],
    k_min: int = 1,
) -> list[SweepRow]:
    """Central-site rho1 and rho2(0, x) on boxes [-k, k]^d, k = k_min..k_max."""
    dim = phi.dim
    o = origin(dim)
    rows = []
    for k in range(k_min, k_max + 1):
        vol = FiniteVolume.box(k, dim)
        ens = GibbsEnsemble(vol, z, phi)
        rho2 = {tuple(x): ens.correlation([o, tuple(x)]) if max(map(abs, x)) <= k else math.nan for x in probes}
        rows.append(SweepRow(k, len(vol), ens.correlation([o]), rho2))
    return rows


def cluster_spec_from_oracle(
    z: float,
    phi: PairPotential,
    k: int,
    radius: int,
    r: float,
) -> ClusterSpec:
    """Central-site cluster functions on [-k, k]^d as a target spec.

    omega2(x) = rho2(0, x) - rho1(0) rho1(x) for 0 < |x| <= radius.
    """
    vol = FiniteVolume.box(k, phi.dim)
    ens = ensemble(vol, z, phi)
    o = origin(phi.dim)
    rho0 = ens.correlation([o])
    omega2 = {}
    for x in half_box(radius, phi.dim):
        w = ens.correlation([o, x]) - rho0 * ens.correlation([x])
        wm = ens.correlation([o, neg(x)]) - rho0 * ens.correlation([neg(x)])
        # box reflection symmetry makes these equal up to rounding
        w = 0.5 * (w + wm)
        if w != 0.0:
            omega2[x] = omega2[neg(x)] = w
    return ClusterSpec(phi.dim, rho0, dict(sorted(omega2.items())), r)
