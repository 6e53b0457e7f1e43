"""Lie algebras given by structure constants, and left-invariant metrics on them.

A left-invariant metric is an inner product on the Lie algebra, stored as its
Gram matrix in the algebra's fixed reference basis.  Everything here is pure
numpy; the matrices involved are at most a few dozen entries across.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, InputError

STRUCTURE_TOL = 1e-12
SPD_PIVOT_TOL = 1e-12
SYMMETRY_TOL = 1e-14


@dataclass(frozen=True)
class Ideal:
    """Half-open index range ``[lo, hi)`` of the reference basis."""

    lo: int
    hi: int
    kind: str  # "simple" or "center"

    @property
    def size(self):
        return self.hi - self.lo

    @property
    def indices(self):
        return np.arange(self.lo, self.hi)


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """Real Lie algebra with ``[X_i, X_j] = sum_k c[i, j, k] X_k``.

    ``ideals`` partitions the basis into simple ideals and (at most) one center
    block.  The partition is declared by the caller and checked by
    :meth:`validate`, not discovered.
    """

    dim: int
    structure_constants: np.ndarray
    ideals: Tuple[Ideal, ...]
    name: str = ""

    def __post_init__(self):
        c = np.array(self.structure_constants, dtype=np.float64)
        c.setflags(write=False)
        object.__setattr__(self, "structure_constants", c)
        object.__setattr__(self, "ideals", tuple(self.ideals))
        self.validate()

    @property
    def simple_ideals(self):
        return [I for I in self.ideals if I.kind == "simple"]

    @property
    def center(self) -> Optional[Ideal]:
        found = [I for I in self.ideals if I.kind == "center"]
        return found[0] if found else None

    @property
    def ss_indices(self):
        idx = [I.indices for I in self.simple_ideals]
        return np.concatenate(idx) if idx else np.zeros(0, dtype=int)

    @property
    def center_indices(self):
        z = self.center
        return z.indices if z is not None else np.zeros(0, dtype=int)

    @property
    def ss_dim(self):
        return int(sum(I.size for I in self.simple_ideals))

    @property
    def center_dim(self):
        z = self.center
        return z.size if z is not None else 0

    @property
    def is_simple(self):
        return len(self.simple_ideals) == 1 and self.center_dim == 0

    def validate(self):
        m = self.dim
        c = self.structure_constants
        if m < 1:
            raise InputError("dim must be a positive integer")
        if c.shape != (m, m, m):
            raise InputError(f"structure_constants must have shape ({m}, {m}, {m}), got {c.shape}")
        if np.max(np.abs(c + c.transpose(1, 0, 2)), initial=0.0) > STRUCTURE_TOL:
            raise InputError("structure constants are not antisymmetric in the first two indices")
        jac = jacobi_defect(c)
        if jac > STRUCTURE_TOL * max(1.0, np.max(np.abs(c), initial=0.0) ** 2):
            raise InputError(f"Jacobi identity fails (max defect {jac:.3e})")

        covered = np.zeros(m, dtype=int)
        n_center = 0
        for I in self.ideals:
            if I.kind not in ("simple", "center"):
                raise InputError(f"ideal kind must be 'simple' or 'center', got {I.kind!r}")
            if not (0 <= I.lo < I.hi <= m):
                raise InputError(f"ideal range [{I.lo}, {I.hi}) outside 0..{m}")
            covered[I.lo:I.hi] += 1
            n_center += I.kind == "center"
        if np.any(covered != 1):
            raise InputError("ideals must partition the basis exactly once")
        if n_center > 1:
            raise InputError("at most one center block is allowed")

        for a, Ia in enumerate(self.ideals):
            for b, Ib in enumerate(self.ideals):
                block = c[Ia.lo:Ia.hi, Ib.lo:Ib.hi, :]
                if a != b or Ia.kind == "center":
                    if np.max(np.abs(block), initial=0.0) > STRUCTURE_TOL:
                        raise InputError(
                            f"brackets between ideals {a} and {b} do not vanish")
                else:
                    outside = np.ones(m, dtype=bool)
                    outside[Ia.lo:Ia.hi] = False
                    if np.max(np.abs(block[:, :, outside]), initial=0.0) > STRUCTURE_TOL:
                        raise InputError(f"ideal {a} is not closed under the bracket")
        B = killing_form(self)
        for a, I in enumerate(self.simple_ideals):
            blk = B[I.lo:I.hi, I.lo:I.hi]
            ev = np.linalg.eigvalsh(-blk)
            if ev[0] <= SPD_PIVOT_TOL * max(ev[-1], 1.0):
                raise InputError(f"Killing form is not negative definite on simple ideal {a}")


def jacobi_defect(c):
    """Largest violation of the Jacobi identity over all basis triples."""
    # [[X_i, X_j], X_k] = sum_l c_ijl [X_l, X_k] = sum_l,p c_ijl c_lkp X_p
    t = np.einsum("ijl,lkp->ijkp", c, c)
    cyc = t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)
    return float(np.max(np.abs(cyc), initial=0.0))


def ad(alg: LieAlgebra, v) -> np.ndarray:
    """Matrix of ``ad_v = [v, .]``; column ``j`` holds ``[v, X_j]``."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (alg.dim,):
        raise InputError(f"coefficient vector must have length {alg.dim}, got shape {v.shape}")
    return np.einsum("i,ijk->kj", v, alg.structure_constants)


def ad_matrices(alg: LieAlgebra) -> np.ndarray:
    """Stack of ``ad(e_i)`` for every reference basis vector, shape (m, m, m)."""
    return np.einsum("ijk->ikj", alg.structure_constants)


def killing_form(alg: LieAlgebra) -> np.ndarray:
    ads = ad_matrices(alg)
    B = np.einsum("iab,jba->ij", ads, ads)
    return 0.5 * (B + B.T)


def bracket(alg: LieAlgebra, x, y) -> np.ndarray:
    return ad(alg, x) @ np.asarray(y, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class Metric:
    """Left-invariant metric: SPD Gram matrix in the reference basis."""

    gram: np.ndarray

    def __post_init__(self):
        G = np.array(self.gram, dtype=np.float64)
        if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] == 0:
            raise InputError(f"Gram matrix must be square and non-empty, got shape {G.shape}")
        scale = np.max(np.abs(G))
        if np.max(np.abs(G - G.T)) > SYMMETRY_TOL * scale:
            raise InputError("Gram matrix is not symmetric")
        G = 0.5 * (G + G.T)
        cholesky_upper(G)
        G.setflags(write=False)
        object.__setattr__(self, "gram", G)

    @property
    def dim(self):
        return self.gram.shape[0]

    def scaled(self, c) -> "Metric":
        return Metric(c * self.gram)


def cholesky_upper(G) -> np.ndarray:
    """Upper-triangular ``U`` with ``G = U^T U``; rejects numerically singular input."""
    G = np.asarray(G, dtype=np.float64)
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        raise InputError("Gram matrix is not positive definite") from None
    pivots = np.diag(L) ** 2
    if pivots.size and np.min(pivots) <= SPD_PIVOT_TOL * np.max(np.diag(G)):
        raise InputError(
            f"Gram matrix is numerically singular (smallest pivot {np.min(pivots):.3e})")
    return L.T


def _orthonormal_columns(G):
    """Columns ``P`` with ``P^T G P = I`` (upper-triangular, from Cholesky)."""
    U = cholesky_upper(G)
    return np.linalg.inv(U)


def bi_invariant_metric(alg: LieAlgebra, scales: Sequence[float] = None, torus_gram=None) -> Metric:
    """Gram equal to ``-c_l B_l`` on simple ideal ``l`` and ``torus_gram`` on the center."""
    simple = alg.simple_ideals
    if scales is None:
        scales = [1.0] * len(simple)
    scales = np.atleast_1d(np.asarray(scales, dtype=np.float64))
    if scales.size == 1 and len(simple) > 1:
        scales = np.repeat(scales, len(simple))
    if scales.size != len(simple):
        raise InputError(f"expected {len(simple)} scales (one per simple ideal), got {scales.size}")
    if np.any(scales <= 0):
        raise InputError("bi-invariant scales must be positive")
    B = killing_form(alg)
    G = np.zeros((alg.dim, alg.dim))
    for c, I in zip(scales, simple):
        G[I.lo:I.hi, I.lo:I.hi] = -c * B[I.lo:I.hi, I.lo:I.hi]
    z = alg.center
    if z is not None:
        T = np.eye(z.size) if torus_gram is None else np.atleast_2d(np.asarray(torus_gram, dtype=np.float64))
        if T.shape != (z.size, z.size):
            raise InputError(f"torus_gram must be {z.size}x{z.size}")
        cholesky_upper(T)
        G[z.lo:z.hi, z.lo:z.hi] = T
    elif torus_gram is not None and np.size(torus_gram) > 0:
        raise InputError("algebra has no center; torus_gram must be omitted")
    return Metric(G)


def bi_invariant_scales(g0: Metric, alg: LieAlgebra, tol=1e-10) -> np.ndarray:
    """Recover ``c_l`` from a bi-invariant Gram; raises if ``g0`` is not bi-invariant."""
    check_bi_invariant(g0, alg, tol)
    B = killing_form(alg)
    out = []
    for I in alg.simple_ideals:
        blk = g0.gram[I.lo:I.hi, I.lo:I.hi]
        kb = B[I.lo:I.hi, I.lo:I.hi]
        out.append(-np.trace(blk) / np.trace(kb))
    return np.array(out)


def check_bi_invariant(g0: Metric, alg: LieAlgebra, tol=1e-10):
    G = g0.gram
    if G.shape != (alg.dim, alg.dim):
        raise InputError("metric and algebra dimensions differ")
    scale = np.max(np.abs(G))
    for A in ad_matrices(alg):
        if np.max(np.abs(A.T @ G + G @ A)) > tol * scale * max(1.0, np.max(np.abs(A))):
            raise InputError("reference metric g0 is not bi-invariant (ad is not skew)")
    ss = alg.ss_indices
    z = alg.center_indices
    if ss.size and z.size and np.max(np.abs(G[np.ix_(ss, z)])) > tol * scale:
        raise InputError("reference metric g0 does not make the center orthogonal to [g, g]")
    for a, Ia in enumerate(alg.simple_ideals):
        for b, Ib in enumerate(alg.simple_ideals):
            if a != b and np.max(np.abs(G[Ia.lo:Ia.hi, Ib.lo:Ib.hi])) > tol * scale:
                raise InputError("reference metric g0 does not make simple ideals orthogonal")


def volume_ratio(g: Metric, g0: Metric) -> float:
    """``vol(g) / vol(g0)``, the square root of det of ``g`` in a ``g0``-orthonormal basis."""
    if g.dim != g0.dim:
        raise InputError("metrics live on algebras of different dimension")
    _, ld = np.linalg.slogdet(g.gram)
    _, ld0 = np.linalg.slogdet(g0.gram)
    return float(np.exp(0.5 * (ld - ld0)))


def adapted_onb(g0: Metric, alg: LieAlgebra) -> np.ndarray:
    """``g0``-orthonormal basis adapted to the ideals.

    Columns are basis vectors in reference coordinates, ordered as the simple
    ideals (in declaration order) followed by the center.  Requires ``g0`` to be
    block diagonal with respect to that splitting.
    """
    G0 = g0.gram
    m = alg.dim
    if G0.shape != (m, m):
        raise InputError("metric and algebra dimensions differ")
    blocks = alg.simple_ideals + ([alg.center] if alg.center is not None else [])
    order = np.concatenate([I.indices for I in blocks])
    scale = np.max(np.abs(G0))
    for a, Ia in enumerate(blocks):
        for b, Ib in enumerate(blocks):
            if a != b and np.max(np.abs(G0[Ia.lo:Ia.hi, Ib.lo:Ib.hi])) > 1e-10 * scale:
                raise InputError("g0 is not block diagonal with respect to the ideal splitting")
    P = np.zeros((m, m))
    col = 0
    for I in blocks:
        P[I.lo:I.hi, col:col + I.size] = _orthonormal_columns(G0[I.lo:I.hi, I.lo:I.hi])
        col += I.size
    assert np.array_equal(np.sort(order), np.arange(m))
    return P


def onb_gram(g: Metric, g0: Metric, alg: LieAlgebra) -> np.ndarray:
    """Gram matrix of ``g`` in the ``g0``-adapted orthonormal basis."""
    P = adapted_onb(g0, alg)
    S = P.T @ g.gram @ P
    return 0.5 * (S + S.T)


def metric_from_onb(S, g0: Metric, alg: LieAlgebra) -> Metric:
    """Inverse of :func:`onb_gram`: the metric whose Gram in the adapted basis is ``S``."""
    S = np.asarray(S, dtype=np.float64)
    if S.shape != (alg.dim, alg.dim):
        raise InputError(f"expected a {alg.dim}x{alg.dim} Gram matrix, got {S.shape}")
    Pinv = np.linalg.inv(adapted_onb(g0, alg))
    G = Pinv.T @ S @ Pinv
    return Metric(0.5 * (G + G.T))


@dataclass(frozen=True, eq=False)
class AdaptedBasisBlocks:
    """Change of basis ``[[A, R], [0, I_k]]`` from the ``g0``-adapted basis.

    Columns of ``A`` give ``g``-orthonormal ``Y_j`` spanning the semisimple part;
    column ``s`` of ``R`` gives ``W_s`` so that ``Z_s + W_s`` is ``g``-orthogonal to
    it.  ``torus_gram`` is the ``g``-Gram of the ``Z_s + W_s`` (the quotient metric in
    ``g0``-orthonormal center coordinates); the ``Z_s + W_s`` are orthonormal, and the
    block form exact, precisely when it is the identity.
    """

    A: np.ndarray
    R: np.ndarray
    torus_gram: np.ndarray
    onb: np.ndarray

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def k(self):
        return self.R.shape[1]

    @property
    def exact(self):
        return bool(np.allclose(self.torus_gram, np.eye(self.k), rtol=0, atol=1e-10))

    @property
    def center_frame(self):
        """``T`` with ``T^T torus_gram T = I``; the identity in the exact case."""
        if self.k == 0:
            return np.zeros((0, 0))
        return np.linalg.inv(cholesky_upper(self.torus_gram))

    def orthonormal_change_of_basis(self):
        """``[[A, R T], [0, T]]``: always ``g``-orthonormal, equal to the block form when exact."""
        n, k = self.n, self.k
        T = self.center_frame
        M = np.zeros((n + k, n + k))
        M[:n, :n] = self.A
        M[:n, n:] = self.R @ T
        M[n:, n:] = T
        return M

    def change_of_basis(self):
        n, k = self.n, self.k
        T = np.zeros((n + k, n + k))
        T[:n, :n] = self.A
        T[:n, n:] = self.R
        T[n:, n:] = np.eye(k)
        return T


def adapted_change_of_basis(g: Metric, g0: Metric, alg: LieAlgebra) -> AdaptedBasisBlocks:
    if g.dim != alg.dim:
        raise InputError("metric and algebra dimensions differ")
    P = adapted_onb(g0, alg)
    S = P.T @ g.gram @ P
    S = 0.5 * (S + S.T)
    n = alg.ss_dim
    S11, S12, S22 = S[:n, :n], S[:n, n:], S[n:, n:]
    if n:
        A = np.linalg.inv(cholesky_upper(S11))
        if np.linalg.det(A) < 0:
            A[:, -1] *= -1.0
        R = -np.linalg.solve(S11, S12)
    else:
        A = np.zeros((0, 0))
        R = np.zeros((0, alg.center_dim))
    schur = S22 + S12.T @ R
    schur = 0.5 * (schur + schur.T)
    if schur.size:
        cholesky_upper(schur)
    return AdaptedBasisBlocks(A=A, R=R, torus_gram=schur, onb=P)


def quotient_torus_metric(g: Metric, alg: LieAlgebra) -> np.ndarray:
    """Metric induced on the center coordinates by ``g`` restricted to the
    ``g``-orthogonal complement of the semisimple part (a Schur complement)."""
    if alg.center_dim == 0:
        raise DomainError("algebra has no center; the quotient torus is trivial")
    if g.dim != alg.dim:
        raise InputError("metric and algebra dimensions differ")
    ss, z = alg.ss_indices, alg.center_indices
    G = g.gram
    Gzz = G[np.ix_(z, z)]
    if ss.size == 0:
        return Gzz.copy()
    Gsz = G[np.ix_(ss, z)]
    out = Gzz - Gsz.T @ np.linalg.solve(G[np.ix_(ss, ss)], Gsz)
    return 0.5 * (out + out.T)


def frobenius_sq(M) -> float:
    return float(np.sum(np.asarray(M) ** 2))
