import numpy as np
import pytest

from htpotential import (
    GroupValidationError,
    build_group,
    custom_group,
    dilate,
    gauge_norm,
    heisenberg,
    identity,
    inverse,
    j_apply,
    multiply,
    point,
    quaternionic,
    validate_htype,
)
from tests.conftest import random_points

SYMPLECTIC_2 = [[0.0, 1.0], [-1.0, 0.0]]


def test_heisenberg_dimensions():
    spec = heisenberg(1)
    assert (spec.m, spec.k, spec.Q) == (2, 1, 4)
    assert heisenberg(2).Q == 6


def test_quaternionic_dimensions():
    spec = quaternionic(1)
    assert (spec.m, spec.k, spec.Q) == (4, 3, 10)


def test_builtin_groups_are_exactly_htype(h1, h2, quat):
    for spec in (h1, h2, quat):
        report = validate_htype(spec)
        assert report.max_defect == 0.0
        assert report.ok
        assert all(report.skew_ok) and all(report.orthogonal_ok)
        assert all(report.anticommute_ok.values())


def test_custom_matches_heisenberg():
    spec = custom_group([SYMPLECTIC_2])
    assert np.array_equal(spec.b, heisenberg(1).b)
    assert (spec.m, spec.k) == (2, 1)


def test_custom_rejects_anticommutation_failure():
    # two copies of the same symplectic J: J1 J2 + J2 J1 = -2 Id
    with pytest.raises(GroupValidationError, match="anticommute"):
        custom_group([SYMPLECTIC_2, SYMPLECTIC_2])
    spec = build_group("heisenberg", n=1)
    bad = np.array([SYMPLECTIC_2, SYMPLECTIC_2])
    report = validate_htype(type(spec)(m=2, k=2, b=bad))
    assert not report.anticommute_ok[(0, 1)]
    assert report.max_defect == 2.0


def test_custom_rejects_bad_shapes():
    with pytest.raises(GroupValidationError):
        custom_group([[[0.0, 1.0]]])
    with pytest.raises(GroupValidationError):
        custom_group(np.zeros((1, 2, 3)))


def test_multiply_basic(h1):
    g = point(h1, [1, 0], [0])
    h = point(h1, [0, 1], [0])
    prod = multiply(h1, g, h)
    assert np.allclose(prod.z, [1, 1])
    assert np.allclose(prod.t, [0.5])


def test_identity_and_inverse(h1, rng):
    e = identity(h1)
    for g in random_points(h1, rng, 10):
        ge = multiply(h1, g, e)
        assert np.array_equal(ge.z, g.z) and np.array_equal(ge.t, g.t)
        gg = multiply(h1, g, inverse(g))
        assert np.allclose(gg.z, 0) and np.allclose(gg.t, 0, atol=1e-16)
        back = inverse(inverse(g))
        assert np.array_equal(back.z, g.z) and np.array_equal(back.t, g.t)


def test_associativity(h1, quat, rng):
    for spec in (h1, quat):
        for _ in range(50):
            g, h, w = random_points(spec, rng, 3)
            lhs = multiply(spec, multiply(spec, g, h), w)
            rhs = multiply(spec, g, multiply(spec, h, w))
            assert np.abs(lhs.z - rhs.z).max() <= 1e-13
            assert np.abs(lhs.t - rhs.t).max() <= 1e-13


def test_multiply_dimension_mismatch(h1, quat):
    with pytest.raises(ValueError, match="dimensions"):
        multiply(h1, identity(h1), identity(quat))


def test_dilate(h1, rng):
    g = point(h1, [1, 0], [1])
    d = dilate(h1, 2.0, g)
    assert np.allclose(d.z, [2, 0]) and np.allclose(d.t, [4])
    same = dilate(h1, 1.0, g)
    assert np.array_equal(same.z, g.z) and np.array_equal(same.t, g.t)
    with pytest.raises(ValueError):
        dilate(h1, 0.0, g)
    with pytest.raises(ValueError):
        dilate(h1, -1.0, g)
    for g in random_points(h1, rng, 10):
        lam, mu = rng.uniform(0.2, 3.0, 2)
        a = dilate(h1, lam, dilate(h1, mu, g))
        b = dilate(h1, lam * mu, g)
        assert np.allclose(a.z, b.z) and np.allclose(a.t, b.t)


def test_gauge_norm_values(h1):
    assert gauge_norm(point(h1, [0, 0], [1])) == pytest.approx(2.0)
    assert gauge_norm(point(h1, [3, 4], [0])) == pytest.approx(5.0)
    assert gauge_norm(identity(h1)) == 0.0


def test_gauge_norm_homogeneity_and_symmetry(h1, quat, rng):
    for spec in (h1, quat):
        for g in random_points(spec, rng, 20):
            lam = rng.uniform(0.1, 5.0)
            assert gauge_norm(dilate(spec, lam, g)) == pytest.approx(
                lam * gauge_norm(g), rel=1e-14
            )
            assert gauge_norm(inverse(g)) == gauge_norm(g)


def test_j_apply_heisenberg_basis(h1):
    out = j_apply(h1, [1.0], [1.0, 0.0])
    assert np.allclose(out, [0.0, 1.0])


def test_j_apply_skew_and_isometry(h1, quat, rng):
    for spec in (h1, quat):
        for _ in range(50):
            z = rng.standard_normal(spec.m)
            t = rng.standard_normal(spec.k)
            jtz = j_apply(spec, t, z)
            assert abs(jtz @ z) <= 1e-12 * (z @ z) * np.linalg.norm(t)
            # |J(t) z| = |z| |t| on H-type groups
            assert np.linalg.norm(jtz) == pytest.approx(
                np.linalg.norm(z) * np.linalg.norm(t), rel=1e-12
            )


def test_j_apply_polarized(h1, quat, rng):
    for spec in (h1, quat):
        for _ in range(50):
            z = rng.standard_normal(spec.m)
            t1 = rng.standard_normal(spec.k)
            t2 = rng.standard_normal(spec.k)
            lhs = j_apply(spec, t1, z) @ j_apply(spec, t2, z)
            rhs = (t1 @ t2) * (z @ z)
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_dilation_scales_coordinate_volume(h1, quat):
    # the coordinate volume element is the Haar measure: a coordinate box
    # dilated by lambda gains a factor lambda^Q
    for spec in (h1, quat):
        lower = -np.ones(spec.dim)
        upper = np.full(spec.dim, 0.7)
        lam = 1.7
        vol = np.prod(upper - lower)
        scaled = np.prod(lam * (upper[: spec.m] - lower[: spec.m])) * np.prod(
            lam**2 * (upper[spec.m :] - lower[spec.m :])
        )
        assert scaled == pytest.approx(lam**spec.Q * vol, rel=1e-12)


def test_point_validates_dimensions(h1):
    with pytest.raises(ValueError):
        point(h1, [1.0], [0.0])
    with pytest.raises(ValueError):
        point(h1, [1.0, 2.0, 3.0], [0.0])
    with pytest.raises(ValueError):
        point(h1, [np.nan, 0.0], [0.0])


def test_build_group_dispatch():
    assert build_group("heisenberg", n=2).m == 4
    assert build_group("quaternionic", n=1).k == 3
    assert build_group("custom", b=[SYMPLECTIC_2]).Q == 4
    with pytest.raises(GroupValidationError):
        build_group("octonionic")
    with pytest.raises(GroupValidationError):
        build_group("custom")
