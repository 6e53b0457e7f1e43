import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liespec import (
    DomainError, InputError, Metric, ad, adapted_change_of_basis, bi_invariant_metric, killing_form,
    metric_from_onb, onb_gram, preset, quotient_torus_metric, volume_ratio,
)
from liespec.algebra import adapted_onb, jacobi_defect
from liespec.groups import PRESET_NAMES

from conftest import random_metric, random_rotation, random_spd


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_presets_satisfy_jacobi_and_antisymmetry(name):
    c = preset(name).algebra.structure_constants
    assert np.max(np.abs(c + c.transpose(1, 0, 2)), initial=0) <= 1e-12
    assert jacobi_defect(c) <= 1e-12


def test_ad_of_e1(su2):
    M = ad(su2.algebra, [1, 0, 0])
    expected = np.zeros((3, 3))
    expected[2, 1] = 1.0
    expected[1, 2] = -1.0
    np.testing.assert_array_equal(M, expected)


def test_ad_zero_and_abelian(su2):
    assert not np.any(ad(su2.algebra, np.zeros(3)))
    assert not np.any(ad(preset("t2").algebra, [0.3, -2.0]))


def test_ad_dimension_mismatch(su2):
    with pytest.raises(InputError):
        ad(su2.algebra, [1, 0])


def test_killing_forms():
    np.testing.assert_allclose(killing_form(preset("su2").algebra), -2 * np.eye(3), atol=1e-14)
    assert not np.any(killing_form(preset("t2").algebra))
    B = killing_form(preset("su2xsu2").algebra)
    np.testing.assert_allclose(B, -2 * np.eye(6), atol=1e-14)


def test_killing_ad_invariance():
    rng = np.random.default_rng(3)
    for name in ("su2", "su2xsu2", "su2xt1"):
        alg = preset(name).algebra
        B = killing_form(alg)
        for _ in range(10):
            v, x, y = rng.normal(size=(3, alg.dim))
            A = ad(alg, v)
            assert abs((A @ x) @ B @ y + x @ B @ (A @ y)) < 1e-10


def test_killing_rotation_invariance(su2):
    B = killing_form(su2.algebra)
    Q = random_rotation(np.random.default_rng(0))
    np.testing.assert_allclose(Q.T @ B @ Q, B, atol=1e-10)


def test_bi_invariant_metric_examples():
    su2 = preset("su2").algebra
    np.testing.assert_allclose(bi_invariant_metric(su2, [0.5]).gram, np.eye(3))
    np.testing.assert_allclose(bi_invariant_metric(preset("su2xt1").algebra, [0.5], [[1.0]]).gram, np.eye(4))
    np.testing.assert_allclose(bi_invariant_metric(su2, [1.5]).gram, 3 * bi_invariant_metric(su2, [0.5]).gram)
    with pytest.raises(InputError):
        bi_invariant_metric(su2, [0.0])


def test_volume_ratio_examples(su2_g0):
    assert volume_ratio(su2_g0, su2_g0) == pytest.approx(1.0, abs=1e-15)
    assert volume_ratio(su2_g0.scaled(1.7), su2_g0) == pytest.approx(1.7 ** 1.5, rel=1e-14)
    g0 = Metric(np.eye(3))
    assert volume_ratio(Metric(np.diag([0.5, 1, 1])), g0) == pytest.approx(1 / np.sqrt(2), rel=1e-14)


def test_volume_ratio_reciprocal(su2, su2_g0):
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = random_metric(rng, su2, su2_g0)
        assert volume_ratio(g, su2_g0) * volume_ratio(su2_g0, g) == pytest.approx(1.0, abs=1e-12)


def test_metric_validation():
    with pytest.raises(InputError):
        Metric(np.array([[1.0, 0.2], [0.1, 1.0]]))
    with pytest.raises(InputError):
        Metric(np.diag([1.0, 0.0]))
    with pytest.raises(InputError):
        Metric(np.diag([1.0, -1.0]))


def test_adapted_blocks_identity():
    for name in ("su2", "su2xt1", "su2xsu2"):
        grp = preset(name)
        g0 = bi_invariant_metric(grp.algebra)
        blk = adapted_change_of_basis(g0, g0, grp.algebra)
        assert np.sum(blk.A ** 2) == pytest.approx(blk.n, abs=1e-12)
        assert not np.any(np.abs(blk.R) > 1e-12)
    su2 = preset("su2").algebra
    g0 = bi_invariant_metric(su2)
    blk = adapted_change_of_basis(g0, g0, su2)
    assert blk.R.shape == (3, 0)


def _su2xt1_coupled(v=(0.1, 0.0, 0.0)):
    v = np.asarray(v)
    S = np.eye(4)
    S[:3, 3] = S[3, :3] = v
    S[3, 3] = 1 + v @ v
    return S


def test_adapted_blocks_coupled_center():
    grp = preset("su2xt1")
    alg = grp.algebra
    g0 = bi_invariant_metric(alg, [0.5], [[1.0]])
    g = Metric(_su2xt1_coupled())
    blk = adapted_change_of_basis(g, g0, alg)
    assert np.max(np.abs(blk.R)) > 1e-3
    # reconstruction: the new basis is g-orthonormal
    P = adapted_onb(g0, alg)
    W = P @ blk.change_of_basis()
    np.testing.assert_allclose(W.T @ g.gram @ W, np.eye(4), atol=1e-10)
    assert np.linalg.det(blk.A) > 0


def test_adapted_blocks_reconstruction_random():
    rng = np.random.default_rng(11)
    for name in ("su2", "su2xt1", "su2xsu2"):
        grp = preset(name)
        alg = grp.algebra
        g0 = bi_invariant_metric(alg)
        P = adapted_onb(g0, alg)
        for _ in range(10):
            S = random_spd(rng, alg.dim, 0.3)
            S[alg.ss_dim:, alg.ss_dim:] = np.eye(alg.center_dim) + S[alg.ss_dim:, :alg.ss_dim] @ np.linalg.solve(
                S[:alg.ss_dim, :alg.ss_dim], S[:alg.ss_dim, alg.ss_dim:])
            g = metric_from_onb(S, g0, alg)
            blk = adapted_change_of_basis(g, g0, alg)
            assert blk.exact
            W = P @ blk.change_of_basis()
            np.testing.assert_allclose(W.T @ g.gram @ W, np.eye(alg.dim), atol=1e-10)


def test_adapted_blocks_rejects_non_spd():
    alg = preset("su2").algebra
    g0 = bi_invariant_metric(alg)
    with pytest.raises(InputError):
        adapted_change_of_basis(Metric(np.diag([1.0, 1.0, -1.0])), g0, alg)


def test_quotient_torus_metric_examples():
    alg = preset("su2xt1").algebra
    blockdiag = np.diag([1.0, 2.0, 3.0, 0.7])
    np.testing.assert_allclose(quotient_torus_metric(Metric(blockdiag), alg), [[0.7]], atol=1e-14)
    np.testing.assert_allclose(quotient_torus_metric(Metric(_su2xt1_coupled()), alg), [[1.0]], atol=1e-12)
    g = Metric(_su2xt1_coupled((0.2, -0.1, 0.3)))
    np.testing.assert_allclose(quotient_torus_metric(g.scaled(2.5), alg),
                               2.5 * quotient_torus_metric(g, alg), rtol=1e-12)
    with pytest.raises(DomainError):
        quotient_torus_metric(Metric(np.eye(3)), preset("su2").algebra)


def test_quotient_torus_metric_is_schur_complement():
    rng = np.random.default_rng(2)
    alg = preset("su2xt1").algebra
    g0 = bi_invariant_metric(alg)
    for _ in range(20):
        S = random_spd(rng, 4)
        g = metric_from_onb(S, g0, alg)
        schur = S[3:, 3:] - S[3:, :3] @ np.linalg.solve(S[:3, :3], S[:3, 3:])
        # the center of g0 is orthonormal in center coordinates, so both agree
        np.testing.assert_allclose(quotient_torus_metric(g, alg), schur, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.2, 5.0), min_size=3, max_size=3))
def test_onb_roundtrip(diag):
    alg = preset("su2").algebra
    g0 = bi_invariant_metric(alg)
    S = np.diag(diag)
    np.testing.assert_allclose(onb_gram(metric_from_onb(S, g0, alg), g0, alg), S, rtol=1e-12, atol=1e-14)


def test_lie_algebra_rejects_bad_constants():
    from liespec.algebra import Ideal, LieAlgebra
    c = np.zeros((3, 3, 3))
    c[0, 1, 2] = 1.0  # not antisymmetric
    with pytest.raises(InputError):
        LieAlgebra(3, c, (Ideal(0, 3, "simple"),))
    with pytest.raises(InputError):
        # abelian algebra declared simple fails the Killing check
        LieAlgebra(3, np.zeros((3, 3, 3)), (Ideal(0, 3, "simple"),))
