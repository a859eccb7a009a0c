import math
import warnings

import numpy as np
import pytest

from gibbs_inverse.expansion import TruncationParams, forward_cluster
from gibbs_inverse.lattice import ClusterSpec, MayerFunction, SpecValidationError, mayer_norm
from gibbs_inverse.solver import (
    SolverPoint,
    apply_Q,
    in_domain,
    initial_point,
    make_domain,
    pair_metric,
    random_mayer,
    random_point,
    solve,
    verify_contraction,
)


def test_domain_constants():
    d = make_domain(0.5, 0.01)
    assert d.c == pytest.approx(5 / 6)
    assert d.a1 == pytest.approx(math.sqrt(2 / 3))
    assert d.a1 == pytest.approx(0.816497, abs=1e-6)
    assert d.a2 == 2.0
    assert d.h == pytest.approx(54.0)
    d2 = make_domain(0.08, 0.01)
    assert d2.a1 == pytest.approx(0.385, abs=5e-4)
    assert d2.h == pytest.approx(24 * (1.08 / 0.16) ** 2, rel=1e-13)
    assert d2.h == pytest.approx(1093.5, rel=1e-12)


def test_domain_rejects_bad_r():
    with pytest.raises(ValueError):
        make_domain(1.0, 0.01)


def test_metric():
    d = make_domain(0.5, 0.01)
    p = SolverPoint(0.01, MayerFunction(1, {(1,): -0.1}))
    q = SolverPoint(0.011, MayerFunction(1, {(1,): -0.05}))
    assert pair_metric(p, q, d) == pytest.approx(54 * 0.001 / 0.01 + 0.1)
    assert pair_metric(p, p, d) == 0.0


def test_free_gas_first_order_Q():
    spec = ClusterSpec(1, 0.01, {}, 0.5)
    d = make_domain(0.5, 0.01)
    q = apply_Q(SolverPoint(0.01, MayerFunction(1, {})), spec, d, TruncationParams(1, 2))
    assert q.z == pytest.approx(0.01 + 0.01**2, rel=1e-14)
    assert mayer_norm(q.g) == 0.0


def test_free_gas_solve():
    rep = solve(ClusterSpec(1, 0.01, {}, 0.5), TruncationParams(4))
    assert rep.ok
    assert abs(rep.solution.z - 0.01 / 0.99) < 1e-8
    assert mayer_norm(rep.solution.g) < 1e-8


def test_invalid_spec_raises():
    with pytest.raises(SpecValidationError):
        solve(ClusterSpec(1, 0.01, {(1,): -1e-4, (-1,): -1e-4}, 0.5))


def test_roundtrip_matched_truncation():
    g = MayerFunction(1, {(1,): -0.05})
    t = TruncationParams(4, 2)
    fr = forward_cluster(0.008, g, t)
    rep = solve(ClusterSpec(1, fr.omega1, fr.omega2, 0.5), t)
    assert rep.converged
    assert pair_metric(rep.solution, SolverPoint(0.008, g), rep.domain) < 1e-8
    assert rep.residual < 1e-9


def test_uniqueness_from_second_start():
    g = MayerFunction(1, {(1,): -0.05, (2,): 0.02})
    t = TruncationParams(4, 2)
    fr = forward_cluster(0.008, g, t)
    spec = ClusterSpec(1, fr.omega1, fr.omega2, 0.5)
    a = solve(spec, t)
    d = a.domain
    start = random_point(d, 1, 2, np.random.default_rng(5))
    assert in_domain(start, d)
    b = solve(spec, t, start=start)
    assert pair_metric(a.solution, b.solution, d) < 1e-8


def test_truncation_error_shrinks_with_order():
    # the spec comes from a much higher order; lower-order solves approach it
    g = MayerFunction(1, {(1,): -0.1})
    fr = forward_cluster(0.005, g, TruncationParams(8, 2))
    spec = ClusterSpec(1, fr.omega1, fr.omega2, 0.5)
    true = SolverPoint(0.005, g)
    errs = []
    for N in (2, 3, 4):
        rep = solve(spec, TruncationParams(N, 2))
        errs.append(pair_metric(rep.solution, true, rep.domain))
    assert errs[2] < errs[1] < errs[0]


def test_contraction_small_z0():
    rng = np.random.default_rng(3)
    w = random_mayer(1, 2, 0.5 * 0.005**2, rng)
    spec = ClusterSpec(1, 0.005, dict(w.items()), 0.5)
    d = make_domain(0.5, 0.005)
    rep = verify_contraction(d, spec, TruncationParams(3, 2), samples=15, seed=1)
    assert rep.max_ratio <= 0.5
    assert rep.images_in_domain
    assert all(rep.inequalities.values())


def test_large_z0_reported():
    spec = ClusterSpec(1, 0.4, {(1,): -0.032, (-1,): -0.032}, 0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = solve(spec, TruncationParams(4), max_iter=60)
    assert not rep.ok
    assert not rep.converged or rep.diverging


def test_initial_point():
    spec = ClusterSpec(1, 0.01, {(1,): -1e-5, (-1,): -1e-5}, 0.5)
    p = initial_point(spec, TruncationParams(4))
    assert p.z == 0.01
    assert p.g((1,)) == pytest.approx(-0.1)
