"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line."""
import itertools
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from gibbs_inverse.algebra import SequenceFunctional, boltzmann_factors, gamma, gamma_inverse
from gibbs_inverse.expansion import TruncationParams, forward_cluster
from gibbs_inverse.lattice import ClusterSpec, MayerFunction, box, mayer_norm, potential_from_mayer
from gibbs_inverse.oracle import FiniteVolume, cluster_spec_from_oracle, ensemble
from gibbs_inverse.solver import (
    SolverPoint,
    in_domain,
    make_domain,
    pair_metric,
    random_mayer,
    random_point,
    solve,
    verify_contraction,
)
from gibbs_inverse.ursell import UrsellCache

WINDOW = [(-1,), (0,), (1,)]


def tuples(max_m):
    for m in range(1, max_m + 1):
        yield from itertools.product(WINDOW, repeat=m)


def test_1_algebra_identities(record):
    rng = np.random.default_rng(11)
    table = {X: float(rng.normal()) for X in tuples(4)}
    phi = SequenceFunctional(lambda X: table[X] if X else 0.0, 4)
    rho = SequenceFunctional(lambda X: table[X] if X else 1.0, 4)
    err = 0.0
    for X in tuples(4):
        err = max(err, abs(gamma_inverse(gamma(phi))(X) - phi(X)), abs(gamma(gamma_inverse(rho))(X) - rho(X)))
    psi, om = gamma(phi), gamma_inverse(rho)
    closed = all(
        psi((a, b)) == phi((a, b)) + phi((a,)) * phi((b,)) and om((a, b)) == rho((a, b)) - rho((a,)) * rho((b,))
        for a, b in itertools.product(WINDOW, repeat=2)
    )
    ok = err < 1e-12 and closed
    assert record(1, ok, f"max |error| = {err:.2e}, m = 2 closed forms exact: {closed}")


def test_2_ursell_oracle(record):
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(10):
        g = random_mayer(1, 1, float(rng.uniform(0.1, 0.8)), rng)
        cache = UrsellCache(g)
        ref = gamma_inverse(boltzmann_factors(potential_from_mayer(g), 5))
        for X in tuples(5):
            a, b = cache.ursell(X), ref(X)
            scale = max(abs(a), abs(b))
            if scale:
                worst = max(worst, abs(a - b) / scale)
    assert record(2, worst < 1e-10, f"max relative error = {worst:.2e} over 10 Mayer functions")


def test_3_free_gas(record):
    z = 0.01
    fr = forward_cluster(z, MayerFunction(1, {}), TruncationParams(4, 3))
    d1 = abs(fr.omega1 - z / (1 + z))
    d2 = max(abs(v) for v in fr.omega2.values())
    rep = solve(ClusterSpec(1, 0.01, {}, 0.5), TruncationParams(4))
    dz = abs(rep.solution.z - 0.01 / 0.99)
    gn = mayer_norm(rep.solution.g)
    ok = d1 < 1e-10 and d2 < 1e-14 and dz < 1e-8 and gn < 1e-8
    assert record(3, ok, f"|omega1 - z/(1+z)| = {d1:.1e}, max|omega2| = {d2:.1e}, |z - 1/99| = {dz:.1e}, ||g|| = {gn:.1e}")


def _central(z, g, k=8):
    ens = ensemble(FiniteVolume.box(k, 1), z, potential_from_mayer(g))
    return ens.correlation([(0,)]), {x: ens.correlation([(0,), (x,)]) for x in (-2, -1, 1, 2)}


def test_4_expansion_vs_enumeration(record):
    g = MayerFunction(1, {(1,): -0.1})
    t = TruncationParams(4)
    defects = {}
    worst = 0.0
    for z in (0.01, 0.005):
        fr = forward_cluster(z, g, t)
        rho1, rho2 = _central(z, g)
        defects[z] = abs(fr.omega1 - rho1)
        if z == 0.01:
            worst = max([defects[z]] + [abs(fr.omega2[(x,)] + fr.omega1**2 - rho2[x]) for x in rho2])
    ratio = defects[0.01] / defects[0.005]
    ok = worst < 1e-8 and ratio >= 2**5
    assert record(4, ok, f"max defect at z = 0.01: {worst:.2e}; omega1 defect ratio on halving z = {ratio:.1f}")


def test_5_contraction_certificate(record):
    z0, r = 0.002, 0.5
    w = random_mayer(1, 2, 0.9 * r * z0**2, np.random.default_rng(1))
    spec = ClusterSpec(1, z0, dict(w.items()), r)
    d = make_domain(r, z0)
    cr = verify_contraction(d, spec, TruncationParams(4, 2), samples=100, seed=0)
    ok = cr.max_ratio <= 0.5 and cr.images_in_domain and all(cr.inequalities.values())
    assert record(5, ok, f"max ratio = {cr.max_ratio:.3f}, images in D: {cr.images_in_domain}, sufficient inequalities: {cr.inequalities}")


def test_6_roundtrip_recovery(record):
    g = MayerFunction(1, {(1,): -0.05, (2,): 0.02})
    t = TruncationParams(4)
    fr = forward_cluster(0.008, g, t)
    spec = ClusterSpec(1, fr.omega1, fr.omega2, 0.5)
    a = solve(spec, t)
    err = pair_metric(a.solution, SolverPoint(0.008, g), a.domain)
    start = random_point(a.domain, 1, 2, np.random.default_rng(9))
    b = solve(spec, t, start=start)
    spread = pair_metric(a.solution, b.solution, a.domain)
    ok = err < 1e-8 and a.iterations <= 40 and a.converged and in_domain(start, a.domain) and spread < 1e-8
    assert record(6, ok, f"recovery error = {err:.1e} in {a.iterations} iterations; second start differs by {spread:.1e}")


def test_7_ursell_growth(record):
    cache = UrsellCache(MayerFunction(1, {(1,): -0.25, (2,): 0.15}))
    window = list(box(4, 1))
    vals = [(cache.abs_window_sum([(0,)], window, n) / math.factorial(n)) ** (1 / (n + 1)) for n in range(1, 5)]
    ok = max(vals) <= 2 * vals[0]
    assert record(7, ok, "growth values " + ", ".join(f"{v:.4f}" for v in vals))


def test_8_cross_truncation(record):
    g = MayerFunction(1, {(1,): -0.1})
    spec = cluster_spec_from_oracle(0.005, potential_from_mayer(g), 10, 2, 0.5)
    s3 = solve(spec, TruncationParams(3, 2))
    s4 = solve(spec, TruncationParams(4, 2))
    dist = pair_metric(s3.solution, s4.solution, s3.domain)
    ok = dist < s3.residual
    assert record(8, ok, f"dist(N=3, N=4) = {dist:.3e}, N = 3 residual = {s3.residual:.3e}")


def test_9_cli_determinism(record, tmp_path):
    pot = tmp_path / "pot.json"
    pot.write_text(json.dumps({"dim": 1, "g": {"1": -0.05, "2": 0.02}}))
    codes, blobs = [], []
    for run in ("a", "b"):
        out = tmp_path / run
        proc = subprocess.run(
            [sys.executable, "-m", "gibbs_inverse.cli", "roundtrip", "--potential", str(pot), "--z", "0.008",
             "--r", "0.5", "--order", "4", "--out", str(out)],
            capture_output=True,
        )
        codes.append(proc.returncode)
        blobs.append({name: (out / name).read_bytes() for name in ("potential.csv", "correlation.csv")})
    same = blobs[0] == blobs[1]
    ok = codes == [0, 0] and same
    assert record(9, ok, f"exit codes {codes}, CSV outputs identical: {same}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
