import math

import pytest

from gibbs_inverse.lattice import (
    ClusterSpec,
    CorrelationSpec,
    MayerFunction,
    PairPotential,
    SpecValidationError,
    canonical,
    cluster_to_correlation,
    correlation_to_cluster,
    format_key,
    half_box,
    mayer_distance,
    mayer_from_potential,
    mayer_norm,
    parse_key,
    potential_from_mayer,
    validate_cluster_spec,
)


def test_mayer_origin_and_mirror():
    g = MayerFunction(1, {(1,): -0.1, (2,): 0.05})
    assert g((0,)) == -1.0
    assert g((-1,)) == g((1,)) == -0.1
    assert g((7,)) == 0.0
    assert g.support_radius() == 2


def test_hard_core_maps_to_minus_one():
    phi = PairPotential(1, {(1,): math.inf})
    g = mayer_from_potential(phi)
    assert g((1,)) == -1.0 and g((0,)) == -1.0


def test_potential_roundtrip():
    phi = PairPotential(2, {(1, 0): 0.3, (0, 1): -0.2, (1, 1): 1.5})
    back = potential_from_mayer(mayer_from_potential(phi))
    for x, v in phi.items():
        assert back(x) == pytest.approx(v, rel=1e-14)


def test_asymmetric_values_rejected():
    with pytest.raises(ValueError):
        MayerFunction(1, {(1,): -0.1, (-1,): -0.2})


def test_bad_origin_rejected():
    with pytest.raises(ValueError):
        MayerFunction(1, {(0,): 0.5})


def test_potential_from_mayer_rejects_below_minus_one():
    with pytest.raises(ValueError):
        potential_from_mayer(MayerFunction(1, {(1,): -1.5}))


def test_norm_counts_both_signs_not_origin():
    g = MayerFunction(1, {(1,): -0.25, (2,): 0.15})
    assert mayer_norm(g) == pytest.approx(0.8)
    h = MayerFunction(1, {(1,): -0.25})
    assert mayer_distance(g, h) == pytest.approx(0.3)


def test_keys_and_canonical():
    assert parse_key("0,-1") == (0, -1)
    assert format_key((3,)) == "3"
    assert canonical((0, -2)) == (0, 2)
    assert half_box(1, 2) == [(0, 1), (1, -1), (1, 0), (1, 1)]


def test_validate_spec_r_ball():
    ok = ClusterSpec(1, 0.01, {(1,): -2e-5, (-1,): -2e-5}, 0.5)
    assert validate_cluster_spec(ok).ok
    bad = ClusterSpec(1, 0.01, {(1,): -4e-5, (-1,): -4e-5}, 0.5)
    rep = validate_cluster_spec(bad)
    assert not rep.ok and not rep.checks["r_ball"]


def test_validate_spec_asymmetry_and_r():
    rep = validate_cluster_spec(ClusterSpec(1, 0.01, {(1,): -1e-6}, 1.5))
    assert not rep.checks["omega2_symmetric"]
    assert not rep.checks["r_in_unit_interval"]


def test_correlation_cluster_conversion():
    c = CorrelationSpec(1, 0.1, {(1,): 0.009, (-1,): 0.009})
    s = correlation_to_cluster(c, 0.5)
    assert s.omega2[(1,)] == pytest.approx(-0.001)
    back = cluster_to_correlation(s)
    assert back.rho2_at((1,)) == pytest.approx(0.009)
    assert back.rho2_at((5,)) == pytest.approx(0.01)


def test_correlation_conversion_validates():
    with pytest.raises(SpecValidationError):
        correlation_to_cluster(CorrelationSpec(1, 0.1, {(1,): 0.0, (-1,): 0.0}), 0.5)
