import math

import numpy as np
import pytest

from carnotlw import (
    BLDatum,
    CorankGroup,
    GaussianInput,
    bl_constant,
    check_dimension_sampled,
    check_geometric,
    check_scaling,
    corank_linearized_datum,
    datum_from_json,
    datum_to_json,
    gaussian_quotient,
    lw_datum,
    pair_deletion_datum,
)

H1 = CorankGroup(0, 1, (1.0,))


# ---------------------------------------------------------------------------
# datum construction and validation

def test_lw_datum_shape():
    d = lw_datum(3)
    assert d.k == 3
    assert d.m == 3
    assert d.target_dims == (2, 2, 2)
    assert d.exps == (0.5, 0.5, 0.5)


def test_pair_deletion_datum_shape():
    d = pair_deletion_datum(2)
    assert d.k == 4
    assert d.target_dims == (2, 2)
    assert d.exps == (1.0, 1.0)
    # each map keeps the complementary pair of coordinates
    np.testing.assert_array_equal(d.maps[0], np.eye(4)[2:])
    np.testing.assert_array_equal(d.maps[1], np.eye(4)[:2])


def test_corank_linearized_datum_is_coordinate_deletion():
    d = corank_linearized_datum(H1)
    assert d.k == 3
    assert d.exps == (0.5, 0.5, 0.5)
    G = CorankGroup(1, 1, (1.0,))
    d2 = corank_linearized_datum(G)
    assert d2.k == 4
    assert d2.exps == pytest.approx((1 / 3,) * 4)


def test_datum_validation():
    with pytest.raises(ValueError):
        BLDatum(3, (), ())
    with pytest.raises(ValueError):
        BLDatum(3, (np.eye(2, 3),), (0.5, 0.5))  # count mismatch
    with pytest.raises(ValueError):
        BLDatum(3, (np.zeros((2, 3)),), (0.5,))  # rank-deficient
    with pytest.raises(ValueError):
        BLDatum(3, (np.eye(2, 3),), (-0.5,))  # negative exponent
    with pytest.raises(ValueError):
        lw_datum(1)
    with pytest.raises(ValueError):
        pair_deletion_datum(1)


def test_datum_json_round_trip():
    d = pair_deletion_datum(3)
    d2 = datum_from_json(datum_to_json(d))
    assert d2.k == d.k
    assert d2.exps == d.exps
    for a, b in zip(d.maps, d2.maps):
        np.testing.assert_array_equal(a, b)
    with pytest.raises(ValueError):
        datum_from_json('{"k": 3}')
    with pytest.raises(ValueError):
        datum_from_json("not json")


def test_gaussian_input_validation():
    with pytest.raises(ValueError):
        GaussianInput((np.array([[1.0, 0.5], [0.0, 1.0]]),))  # not symmetric
    with pytest.raises(ValueError):
        GaussianInput((np.diag([1.0, -2.0]),))  # not positive definite


# ---------------------------------------------------------------------------
# structural checks

def test_check_scaling():
    assert check_scaling(lw_datum(3))
    assert check_scaling(pair_deletion_datum(2))
    assert check_scaling(corank_linearized_datum(H1))
    doubled = BLDatum(3, lw_datum(3).maps, (1.0, 1.0, 1.0))
    assert not check_scaling(doubled)


def test_check_geometric():
    assert check_geometric(lw_datum(3))
    assert check_geometric(lw_datum(4))
    assert check_geometric(pair_deletion_datum(2))
    scaled_row = BLDatum(3, (2 * np.eye(2, 3), np.eye(2, 3)), (0.5, 0.5))
    assert not check_geometric(scaled_row)


def test_dimension_check_clean_on_deletion_family():
    d = lw_datum(3)
    subspaces = [np.eye(3)[:, [i]] for i in range(3)]
    subspaces += [np.eye(3)[:, [0, 1]], np.eye(3)[:, [0, 2]], np.eye(3)[:, [1, 2]]]
    subspaces += [np.eye(3)]
    assert check_dimension_sampled(d, subspaces=subspaces) == []


def test_dimension_check_catches_starved_direction():
    # weight zero on the only map that sees e_1 from two of the three
    lw = lw_datum(3)
    bad = BLDatum(3, lw.maps, (0.75, 0.75, 0.0))
    assert check_scaling(bad)
    viols = check_dimension_sampled(bad, subspaces=[np.eye(3)[:, [0]]])
    assert len(viols) == 1
    assert viols[0]["dim"] == 1
    assert viols[0]["bound"] < 1


# ---------------------------------------------------------------------------
# gaussian quotient

def test_quotient_identity_inputs_on_geometric_datum():
    for d in (lw_datum(3), lw_datum(4), pair_deletion_datum(2)):
        gin = GaussianInput(tuple(np.eye(kj) for kj in d.target_dims))
        assert gaussian_quotient(d, gin) == pytest.approx(1.0, abs=1e-12)


def test_quotient_hand_value():
    d = lw_datum(3)
    gin = GaussianInput((np.diag([1.0, 2.0]), np.eye(2), np.eye(2)))
    expected = 2 ** 0.25 / math.sqrt(1.5)
    assert gaussian_quotient(d, gin) == pytest.approx(expected, abs=1e-12)


def test_quotient_against_brute_force_quadrature():
    # midpoint quadrature of the actual integral ratio on gaussians
    d = lw_datum(3)
    a1 = np.diag([1.0, 2.0])
    gin = GaussianInput((a1, np.eye(2), np.eye(2)))
    res = 64
    ax = np.linspace(-3, 3, res, endpoint=False) + 3.0 / res
    pts = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 3)
    m = sum(
        q * (L.T @ A @ L)
        for q, L, A in zip(d.exps, d.maps, gin.mats)
    )
    lhs = float(
        np.exp(-math.pi * np.einsum("ij,jk,ik->i", pts, m, pts)).sum()
        * (6.0 / res) ** 3
    )
    rhs = math.prod(
        float(np.linalg.det(A)) ** (-0.5 * q) for q, A in zip(d.exps, gin.mats)
    )
    assert lhs / rhs == pytest.approx(gaussian_quotient(d, gin), abs=1e-3)


def test_quotient_scale_invariance():
    d = lw_datum(3)
    rng = np.random.default_rng(0)
    b = rng.standard_normal((2, 2))
    a = b @ b.T + np.eye(2)
    gin = GaussianInput((a, np.eye(2), 2 * np.eye(2)))
    gin_scaled = GaussianInput(tuple(3.7 * m for m in gin.mats))
    assert gaussian_quotient(d, gin) == pytest.approx(
        gaussian_quotient(d, gin_scaled), abs=1e-12
    )


# ---------------------------------------------------------------------------
# the constant

def test_bl_constant_geometric_is_one():
    est = bl_constant(lw_datum(3), n_starts=3)
    assert est.converged
    assert est.estimate == pytest.approx(1.0, abs=1e-6)


def test_bl_constant_holder_is_one():
    d = BLDatum(2, (np.eye(2), np.eye(2)), (0.3, 0.7))
    est = bl_constant(d, n_starts=2)
    assert est.estimate == pytest.approx(1.0, abs=1e-6)


def test_bl_constant_scaled_maps_law():
    # scaling every map by s multiplies the constant by s^-k
    s = 1.3
    base = lw_datum(3)
    scaled = BLDatum(3, tuple(s * m for m in base.maps), base.exps)
    est = bl_constant(scaled, n_starts=3)
    assert est.estimate == pytest.approx(s ** -3, rel=1e-4)


def test_bl_constant_infinite_when_scaling_fails():
    d = BLDatum(3, lw_datum(3).maps, (1.0, 1.0, 1.0))
    est = bl_constant(d)
    assert math.isinf(est.estimate)
    assert "scaling" in est.note


def test_bl_constant_infinite_when_dimension_fails():
    lw = lw_datum(3)
    bad = BLDatum(3, lw.maps, (0.75, 0.75, 0.0))
    est = bl_constant(bad, n_starts=2)
    assert math.isinf(est.estimate)


def test_bl_constant_argmax_attains_estimate():
    est = bl_constant(lw_datum(3), n_starts=2)
    assert est.argmax is not None
    assert gaussian_quotient(lw_datum(3), est.argmax) == pytest.approx(
        est.estimate, rel=1e-9
    )
