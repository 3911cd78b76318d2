import numpy as np
import pytest

from htpotential import (
    SingularityError,
    analytic_jet,
    commutator_defect,
    fd_jet,
    heisenberg,
    identity,
    kernel_field,
    point,
    primitives,
)
from htpotential.calculus import ScalarField, field_from_point_fn
from htpotential.groups import coords_of, gauge_norm
from tests.conftest import random_points

ALL_KERNELS = [("psi", None), ("chi", None), ("a", None), ("N", None),
               ("N_pow", -3.0), ("N_pow", -1.0), ("N_pow", 0.5), ("N_pow", 2.0),
               ("log_N", None)]


def jet_scale(jet):
    return abs(jet.value) + np.abs(jet.grad).sum() + np.abs(jet.hess).sum() + 1.0


def test_primitives_reference_point(h1):
    pr = primitives(h1, point(h1, [1, 0], [1]))
    assert pr.psi == 1.0
    assert pr.chi == 1.0
    assert pr.a == 17.0
    assert pr.norm == pytest.approx(17**0.25, rel=1e-15)
    assert np.allclose(pr.a_vec, [1.0, 4.0])
    assert pr.a_vec @ pr.a_vec == pytest.approx(pr.psi * pr.a, rel=1e-14)


def test_primitives_identity_and_flat(h1):
    pr = primitives(h1, identity(h1))
    assert pr.psi == pr.chi == pr.a == pr.norm == 0.0
    assert np.all(pr.a_vec == 0.0) and np.all(pr.b_mat == 0.0)
    z = np.array([0.3, -0.7])
    pr = primitives(h1, point(h1, z, [0.0]))
    assert np.allclose(pr.a_vec, (z @ z) * z)
    assert pr.norm == pytest.approx(np.sqrt(z @ z), rel=1e-15)


def test_primitives_invariants_random(h1, h2, quat, rng):
    for spec in (h1, h2, quat):
        for g in random_points(spec, rng, 200):
            pr = primitives(spec, g)
            assert pr.a == pytest.approx(pr.psi**2 + 16 * pr.chi, rel=1e-12)
            assert pr.norm**4 == pytest.approx(pr.a, rel=1e-12)
            # columns of b_mat are J_s z: orthogonal to z, Gram = psi Id
            assert np.abs(pr.b_mat.T @ g.z).max() <= 1e-12 * (pr.psi + 1)
            gram = pr.b_mat.T @ pr.b_mat
            assert np.abs(gram - pr.psi * np.eye(spec.k)).max() <= 1e-12 * (pr.psi + 1)
            assert pr.a_vec @ pr.a_vec == pytest.approx(pr.psi * pr.a, rel=1e-12)


def test_jet_psi_closed_form(h1, rng):
    for g in random_points(h1, rng, 5):
        jet = analytic_jet(h1, g, "psi")
        assert np.allclose(jet.grad, 2 * g.z)
        assert np.allclose(jet.hess, 2 * np.eye(2))


def test_jet_norm_reference_point(h1):
    g = point(h1, [1, 0], [1])
    jet = analytic_jet(h1, g, "N")
    assert np.allclose(jet.grad, 17 ** (-0.75) * np.array([1.0, 4.0]))
    assert jet.grad @ jet.grad == pytest.approx(17**-0.5, rel=1e-14)


def test_squared_gradient_identities(h1, quat, rng):
    for spec in (h1, quat):
        for g in random_points(spec, rng, 200):
            pr = primitives(spec, g)
            jpsi = analytic_jet(spec, g, "psi")
            jchi = analytic_jet(spec, g, "chi")
            ja = analytic_jet(spec, g, "a")
            jn = analytic_jet(spec, g, "N")
            assert jpsi.grad @ jpsi.grad == pytest.approx(4 * pr.psi, rel=1e-12)
            assert jchi.grad @ jchi.grad == pytest.approx(
                pr.psi * pr.chi, rel=1e-12, abs=1e-15
            )
            assert ja.grad @ ja.grad == pytest.approx(16 * pr.psi * pr.a, rel=1e-12)
            assert jn.grad @ jn.grad == pytest.approx(
                pr.psi / pr.norm**2, rel=1e-12, abs=1e-15
            )
            assert np.allclose(ja.grad, 4 * pr.a_vec)
            assert np.allclose(jn.grad, pr.norm**-3 * pr.a_vec)


def test_jets_match_fd_oracle(h1, quat, rng):
    for spec in (h1, quat):
        pts = random_points(spec, rng, 8)
        for kernel, q in ALL_KERNELS:
            fld = kernel_field(spec, kernel, q)
            for g in pts:
                jet = analytic_jet(spec, g, kernel, q)
                ref = fd_jet(spec, fld, g)
                scale = jet_scale(jet)
                assert abs(jet.value - ref.value) <= 1e-10 * scale
                assert np.abs(jet.grad - ref.grad).max() <= 1e-6 * scale
                assert np.abs(jet.hess - ref.hess).max() <= 1e-6 * scale


def test_npow_one_equals_norm_kernel(h1, rng):
    for g in random_points(h1, rng, 10):
        a = analytic_jet(h1, g, "N")
        b = analytic_jet(h1, g, "N_pow", q=1.0)
        assert a.value == b.value
        assert np.array_equal(a.grad, b.grad)
        assert np.array_equal(a.hess, b.hess)


def test_npow_tends_to_log(h1, quat, rng):
    q = 1e-6
    for spec in (h1, quat):
        for g in random_points(spec, rng, 10):
            jq = analytic_jet(spec, g, "N_pow", q=q)
            jlog = analytic_jet(spec, g, "log_N")
            scale = jet_scale(jlog)
            assert abs((jq.value - 1.0) / q - jlog.value) <= 1e-5 * scale
            assert np.abs(jq.grad / q - jlog.grad).max() <= 1e-5 * scale
            assert np.abs(jq.hess / q - jlog.hess).max() <= 1e-5 * scale


def test_singularity_policy(h1):
    e = identity(h1)
    for kernel, q in [("N", None), ("N_pow", -1.0), ("N_pow", 3.9), ("log_N", None)]:
        with pytest.raises(SingularityError):
            analytic_jet(h1, e, kernel, q)
    # smooth kernels and N^q with q >= 4 stay finite at the identity
    for kernel, q in [("psi", None), ("chi", None), ("a", None), ("N_pow", 4.0),
                      ("N_pow", 6.0)]:
        jet = analytic_jet(h1, e, kernel, q)
        assert np.isfinite(jet.value)
        assert np.all(np.isfinite(jet.hess))
    assert analytic_jet(h1, e, "N_pow", 4.0).value == 0.0


def test_hessian_symmetry_enforced(h1, rng):
    for g in random_points(h1, rng, 20):
        jet = analytic_jet(h1, g, "N_pow", q=-2.3)
        assert np.array_equal(jet.hess, jet.hess.T)


def test_fd_jet_linear_and_vertical_fields(h1, rng):
    # z_j has X-gradient e_j and zero Hessian; t_s has X_i t_s = B_is / 2
    zfield = ScalarField(evaluate=lambda x: x[:, 1])
    tfield = ScalarField(evaluate=lambda x: x[:, 2])
    for g in random_points(h1, rng, 5):
        jz = fd_jet(h1, zfield, g)
        assert np.abs(jz.grad - np.array([0.0, 1.0])).max() <= 1e-9
        assert np.abs(jz.hess).max() <= 1e-7
        jt = fd_jet(h1, tfield, g)
        pr = primitives(h1, g)
        assert np.abs(jt.grad - 0.5 * pr.b_mat[:, 0]).max() <= 1e-9


def test_fd_jet_pointwise_field_adapter(h1):
    g = point(h1, [0.7, -0.2], [0.4])
    fld = field_from_point_fn(h1, lambda gp: float(gp.z @ gp.z))
    jet = fd_jet(h1, fld, g)
    ref = analytic_jet(h1, g, "psi")
    assert np.abs(jet.grad - ref.grad).max() <= 1e-8
    assert np.abs(jet.hess - ref.hess).max() <= 1e-6


def test_commutator_structure_constant(h1, rng):
    # [X_1, X_2] t_1 = b^1_{12} d/dt_1 t_1 = 1; the defect subtracts it
    tfield = ScalarField(evaluate=lambda x: x[:, 2])
    for g in random_points(h1, rng, 5):
        assert abs(commutator_defect(h1, tfield, g, 0, 1)) <= 1e-9
    zfield = ScalarField(evaluate=lambda x: x[:, 0])
    for g in random_points(h1, rng, 5):
        assert abs(commutator_defect(h1, zfield, g, 0, 1)) <= 1e-9


def test_commutator_smooth_fields(h1, quat, rng):
    fields = [
        lambda x, m: x[:, 0] ** 2 * x[:, 1],
        lambda x, m: x[:, m] * x[:, 0],
        lambda x, m: np.einsum("ni,ni->n", x[:, :m], x[:, :m])
        * np.einsum("ns,ns->n", x[:, m:], x[:, m:]),
        lambda x, m: np.exp(-np.einsum("nd,nd->n", x, x)),
        lambda x, m: np.sin(x[:, 0]) * np.cos(x[:, m]),
    ]
    for spec in (h1, quat):
        pts = random_points(spec, rng, 3)
        for fn in fields:
            fld = ScalarField(evaluate=lambda x, fn=fn: fn(np.asarray(x, float), spec.m))
            for g in pts:
                for i in range(spec.m):
                    for j in range(i + 1, spec.m):
                        assert abs(commutator_defect(spec, fld, g, i, j)) < 1e-5


def test_commutator_requires_distinct_indices(h1):
    fld = kernel_field(h1, "psi")
    with pytest.raises(ValueError):
        commutator_defect(h1, fld, point(h1, [1, 0], [0]), 1, 1)
