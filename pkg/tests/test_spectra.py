from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from liespec import (
    InputError, Metric, ResourceError, bi_invariant_metric, eigenvalue_equivalent_up_to_level,
    eigenvalue_set, hermitian_eigenvalues, laplace_block, metric_from_onb,
    preset, spectral_discrepancy, spectrum, su2_irrep, volume_ratio,
)
from liespec import _kernels
from liespec.reps import spin_matrices, trivial_irrep
from liespec.spectra import IrrepCache, cluster_values, leading_eigenvalue_set

from conftest import random_metric, random_rotation, random_spd

FOUR_PI2 = 4 * np.pi ** 2
BOTH_PATHS = [pytest.param(True, id="numba"), pytest.param(False, id="numpy")]


@pytest.mark.parametrize("use_numba", BOTH_PATHS)
def test_jacobi_matches_lapack(use_numba):
    rng = np.random.default_rng(0)
    for n in (1, 2, 5, 17, 40):
        X = rng.normal(size=(n, n))
        A = X + X.T
        w, off, _ = _kernels.jacobi_eigenvalues(A, use_numba=use_numba)
        np.testing.assert_allclose(w, np.linalg.eigvalsh(A), atol=1e-12 * np.linalg.norm(A))
        assert off <= 1e-13 * np.linalg.norm(A)


@pytest.mark.parametrize("use_numba", BOTH_PATHS)
def test_jacobi_degenerate_and_diagonal(use_numba):
    w, _, sweeps = _kernels.jacobi_eigenvalues(np.diag([3.0, 1.0, 2.0]), use_numba=use_numba)
    np.testing.assert_array_equal(w, [1, 2, 3])
    assert sweeps == 0
    Q = random_rotation(np.random.default_rng(1), 4)
    w, _, _ = _kernels.jacobi_eigenvalues(Q @ np.diag([1.0, 1.0, 1.0, 5.0]) @ Q.T, use_numba=use_numba)
    np.testing.assert_allclose(w, [1, 1, 1, 5], atol=1e-13)


MODERATE = st.one_of(st.just(0.0), st.floats(1e-6, 1e3), st.floats(-1e3, -1e-6))


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (6, 6), elements=MODERATE))
def test_jacobi_property(X):
    A = X + X.T
    w, _, _ = _kernels.jacobi_eigenvalues(A)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(A), atol=1e-12 * A.shape[0] * np.max(np.abs(A)))


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (6, 6), elements=st.floats(-1e3, 1e3)))
def test_jacobi_invariants_extreme_scales(X):
    # LAPACK itself loses accuracy when entries span hundreds of decades, so
    # check the scale-free invariants instead: trace and Frobenius norm.
    A = X + X.T
    w, _, _ = _kernels.jacobi_eigenvalues(A)
    peak = np.max(np.abs(A))
    if peak == 0:
        assert not np.any(w)
        return
    assert np.all(np.diff(w) >= 0)
    assert abs(np.sum(w) - np.trace(A)) <= 1e-12 * A.shape[0] * peak
    assert np.linalg.norm(w / peak) == pytest.approx(np.linalg.norm(A / peak), rel=1e-12)


@pytest.mark.parametrize("use_numba", BOTH_PATHS)
def test_contraction_paths_agree(use_numba):
    rng = np.random.default_rng(2)
    gens = su2_irrep(Fraction(5, 2)).generators
    X = rng.normal(size=(3, 3))
    ginv = np.linalg.inv(X @ X.T + np.eye(3))
    np.testing.assert_allclose(_kernels.laplace_contract(ginv, gens, use_numba=use_numba),
                               -np.einsum("ik,iab,kbc->ac", ginv, gens, gens), atol=1e-12)


def test_hermitian_eigenvalues_examples():
    np.testing.assert_array_equal(hermitian_eigenvalues(np.diag([3.0, 1.0, 2.0])), [1, 2, 3])
    np.testing.assert_allclose(hermitian_eigenvalues(0.375 * np.eye(2)), [0.375, 0.375])
    jx, jy, jz = spin_matrices(1)
    H = 0.5 * (2 * jx @ jx + jy @ jy + jz @ jz)
    np.testing.assert_allclose(hermitian_eigenvalues(H), [1.0, 1.5, 1.5], atol=1e-12)
    with pytest.raises(InputError):
        hermitian_eigenvalues(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_hermitian_eigenvalues_complex():
    rng = np.random.default_rng(3)
    for d in (2, 5, 12):
        Z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        H = Z + Z.conj().T
        np.testing.assert_allclose(hermitian_eigenvalues(H), np.linalg.eigvalsh(H), atol=1e-11)


def test_laplace_block_examples(su2, su2_g0):
    half = su2_irrep(Fraction(1, 2))
    np.testing.assert_allclose(laplace_block(su2_g0, half), 0.375 * np.eye(2), atol=1e-14)
    g = metric_from_onb(np.diag([2.0, 1.0, 1.0]), su2_g0, su2.algebra)
    np.testing.assert_allclose(laplace_block(g, half), 0.3125 * np.eye(2), atol=1e-14)
    np.testing.assert_array_equal(laplace_block(g, trivial_irrep(su2)), np.zeros((1, 1)))
    with pytest.raises(InputError):
        laplace_block(Metric(np.eye(2)), half)


def test_laplace_block_basis_independence(su2, su2_g0):
    rng = np.random.default_rng(4)
    ir = su2_irrep(2)
    for _ in range(10):
        g = random_metric(rng, su2, su2_g0)
        U = np.linalg.inv(np.linalg.cholesky(g.gram).T)  # g-orthonormal columns
        Y = np.einsum("ij,iab->jab", U, ir.generators)
        np.testing.assert_allclose(laplace_block(g, ir), -np.einsum("jab,jbc->ac", Y, Y), atol=1e-10)


def test_su2_bi_invariant_spectrum(su2, su2_g0):
    spec = spectrum(su2, su2_g0, su2_g0, 3.0)
    es = eigenvalue_set(spec)
    np.testing.assert_allclose(es.values, [0, 0.375, 1.0, 1.875, 3.0], atol=1e-12)
    np.testing.assert_array_equal(es.multiplicities, [1, 4, 9, 16, 25])
    assert spec.certificate.enum_cutoff >= 3.0 / spec.certificate.alpha


def test_torus_spectrum():
    grp = preset("t2")
    g0 = bi_invariant_metric(grp.algebra)
    es = eigenvalue_set(spectrum(grp, g0, g0, 200.0))
    np.testing.assert_allclose(es.values, FOUR_PI2 * np.array([0, 1, 2, 4, 5]), rtol=1e-12)
    np.testing.assert_array_equal(es.multiplicities, [1, 4, 4, 4, 8])
    # below 100 only the first three shells fit
    assert len(eigenvalue_set(spectrum(grp, g0, g0, 100.0))) == 3


def test_spectrum_budget_error(su2, su2_g0):
    with pytest.raises(ResourceError):
        spectrum(su2, su2_g0, su2_g0, 500.0, max_entries=1000)
    with pytest.raises(InputError):
        spectrum(su2, su2_g0, su2_g0, 0.0)


@pytest.mark.parametrize("name", ["su2", "su2xt1"])
def test_sandwich(name):
    grp = preset(name)
    g0 = bi_invariant_metric(grp.algebra)
    rng = np.random.default_rng(5)
    for _ in range(15):
        g = random_metric(rng, grp, g0)
        spec = spectrum(grp, g, g0, 45.0)
        a, b = spec.certificate.alpha, spec.certificate.beta
        for blk in spec.blocks:
            assert np.all(blk.eigenvalues >= a * blk.casimir0 - 1e-9)
            assert np.all(blk.eigenvalues <= b * blk.casimir0 + 1e-9)
            assert np.all(blk.eigenvalues >= -1e-10)


def test_spectrum_scaling(su2, su2_g0):
    rng = np.random.default_rng(6)
    g = random_metric(rng, su2, su2_g0)
    c = 2.5
    v1 = spectrum(su2, g, su2_g0, 5.0).values()
    v2 = spectrum(su2, g.scaled(c), su2_g0, 5.0 / c).values()
    np.testing.assert_allclose(v2, v1 / c, atol=1e-10)
    assert volume_ratio(g.scaled(c), g) == pytest.approx(c ** 1.5, rel=1e-12)


def test_conjugation_invariance(su2, su2_g0):
    rng = np.random.default_rng(7)
    for _ in range(5):
        S = random_spd(rng, 3)
        Q = random_rotation(rng)
        g1 = metric_from_onb(S, su2_g0, su2.algebra)
        g2 = metric_from_onb(Q.T @ S @ Q, su2_g0, su2.algebra)
        v1 = spectrum(su2, g1, su2_g0, 6.0).values()
        v2 = spectrum(su2, g2, su2_g0, 6.0).values()
        assert len(v1) == len(v2)
        np.testing.assert_allclose(v1, v2, atol=1e-9)


def test_block_continuity(su2, su2_g0):
    rng = np.random.default_rng(8)
    g = random_metric(rng, su2, su2_g0)
    ir = su2_irrep(Fraction(3, 2))
    base = hermitian_eigenvalues(laplace_block(su2_g0, ir))
    ts = np.linspace(0, 0.1, 21)
    vals = np.array([hermitian_eigenvalues(laplace_block(Metric((1 - t) * su2_g0.gram + t * g.gram), ir))
                     for t in ts])
    lip = np.max(np.abs(np.diff(vals, axis=0)) / np.diff(ts)[:, None])
    assert np.isfinite(lip)
    assert np.max(np.abs(vals - base)) <= lip * 0.1 + 1e-12
    small = hermitian_eigenvalues(laplace_block(Metric((1 - 1e-8) * su2_g0.gram + 1e-8 * g.gram), ir))
    np.testing.assert_allclose(small, base, atol=1e-6)


def test_eigenvalue_set_examples():
    es = cluster_values([0] + [0.375] * 4 + [1.0] * 9)
    np.testing.assert_array_equal(es.values, [0, 0.375, 1.0])
    np.testing.assert_array_equal(es.multiplicities, [1, 4, 9])
    assert len(cluster_values([1.0, 1.0 + 1e-12], cluster_tol=1e-9)) == 1
    vals = np.asarray(cluster_values([0, 1.0, 1.1, 3.0]).values)
    assert np.all(np.diff(vals) > 1e-8)


def test_level_equivalence(su2, su2_g0):
    s0 = eigenvalue_set(spectrum(su2, su2_g0, su2_g0, 3.0))
    assert eigenvalue_equivalent_up_to_level(s0, s0, 5)
    g = metric_from_onb(np.diag([0.5, 1, 1]), su2_g0, su2.algebra)
    s1 = eigenvalue_set(spectrum(su2, g, su2_g0, 5.0))
    assert not eigenvalue_equivalent_up_to_level(s0, s1, 2)
    pert = s0.values.copy()
    pert[-1] += 10 * 1e-6 * max(1.0, pert[-1])
    assert not eigenvalue_equivalent_up_to_level(s0, pert, len(pert))
    with pytest.raises(InputError, match="cutoff"):
        eigenvalue_equivalent_up_to_level(s0, s0, 10)


def test_spectral_discrepancy_examples():
    assert spectral_discrepancy([0, 1, 2], [0, 1, 2], 3) == 0
    assert spectral_discrepancy([0, 1, 2], [0, 1, 2.2], 3) == pytest.approx(0.1)
    assert spectral_discrepancy([0, 2], [0, 1], 2) == pytest.approx(0.5)
    assert spectral_discrepancy([0, 1], [0, 2], 2) == pytest.approx(1.0)


def test_leading_set_grows_cutoff(su2, su2_g0):
    cache = IrrepCache(su2, su2_g0)
    es = leading_eigenvalue_set(su2, su2_g0, su2_g0, 8, cutoff=0.5, cache=cache)
    assert len(es) >= 8
    np.testing.assert_allclose(es.values[:8], [k * (k + 2) / 8 for k in range(8)], atol=1e-12)


def test_spectrum_serialization(su2, su2_g0):
    spec = spectrum(su2, su2_g0, su2_g0, 1.0)
    d = spec.to_json()
    assert set(d) == {"cutoff", "certificate", "blocks"}
    assert set(d["certificate"]) == {"alpha", "beta", "enum_cutoff"}
    rows = spec.to_csv().strip().splitlines()
    assert rows[0] == "label,value,multiplicity"
    assert len(rows) - 1 == sum(len(b["eigenvalues"]) for b in d["blocks"])
