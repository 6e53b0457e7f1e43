"""Irreducible unitary representations and their Peter-Weyl enumeration.

Simple factors are handled when they are three-dimensional (every such compact
simple algebra is su(2)); they get the spin-j representations.  The center
contributes one-dimensional characters indexed by the dual lattice.  Products
are Kronecker products.
"""
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np

from . import _kernels
from .algebra import LieAlgebra, Metric, _orthonormal_columns, killing_form
from .errors import InputError, ResourceError
from .groups import GroupModel, TorusLattice

TWO_PI = 2.0 * math.pi
SCALAR_TOL = 1e-10
DEFAULT_MAX_ENTRIES = 10**6


def _as_spin(j) -> Fraction:
    try:
        two_j = 2 * float(j)
    except (TypeError, ValueError):
        raise InputError(f"spin must be a number, got {j!r}") from None
    if two_j < 0 or abs(two_j - round(two_j)) > 1e-12:
        raise InputError(f"spin must be a non-negative integer or half-integer, got {j!r}")
    return Fraction(int(round(two_j)), 2)


@dataclass(frozen=True, order=True)
class IrrepLabel:
    spins: Tuple[Fraction, ...] = ()
    char: Tuple[int, ...] = ()
    tag: str = ""

    def to_json(self):
        out = {"spins": [float(j) for j in self.spins], "char": [int(c) for c in self.char]}
        if self.tag:
            out["tag"] = self.tag
        return out

    @classmethod
    def from_json(cls, data):
        return cls(tuple(_as_spin(j) for j in data.get("spins", [])),
                   tuple(int(c) for c in data.get("char", [])), data.get("tag", ""))

    @property
    def is_trivial(self):
        return all(j == 0 for j in self.spins) and all(c == 0 for c in self.char) and not self.tag

    def __str__(self):
        parts = [str(j) for j in self.spins]
        if self.char:
            parts.append("(" + ",".join(str(c) for c in self.char) + ")")
        s = "x".join(parts) if parts else "trivial"
        return f"{self.tag}[{s}]" if self.tag else s


@dataclass(frozen=True, eq=False)
class Irrep:
    """Irreducible representation of the Lie algebra.

    ``generators[i]`` is the skew-Hermitian matrix of reference basis vector
    ``X_i``; ``casimir0`` is the scalar by which the bi-invariant Laplacian acts.
    """

    label: IrrepLabel
    generators: np.ndarray = field(repr=False)
    casimir0: float = 0.0

    def __post_init__(self):
        g = np.array(self.generators, dtype=np.complex128)
        if g.ndim != 3 or g.shape[1] != g.shape[2]:
            raise InputError("generators must have shape (m, d, d)")
        g.setflags(write=False)
        object.__setattr__(self, "generators", g)

    @property
    def dim(self):
        return self.generators.shape[1]

    @property
    def algebra_dim(self):
        return self.generators.shape[0]


def spin_matrices(j):
    """Angular momentum matrices ``(Jx, Jy, Jz)``, rows ordered by descending weight."""
    j = _as_spin(j)
    d = int(2 * j + 1)
    jf = float(j)
    m = jf - np.arange(d)
    # <m+1| J+ |m> = sqrt(j(j+1) - m(m+1)); J+ raises, so it sits above the diagonal.
    jp = np.diag(np.sqrt(jf * (jf + 1) - m[1:] * (m[1:] + 1)), 1).astype(np.complex128)
    jm = jp.conj().T
    jx = 0.5 * (jp + jm)
    jy = -0.5j * (jp - jm)
    jz = np.diag(m).astype(np.complex128)
    return jx, jy, jz


def _ginv(g0, m):
    if g0 is None:
        return None
    G = g0.gram if isinstance(g0, Metric) else np.atleast_2d(np.asarray(g0, dtype=np.float64))
    if G.shape != (m, m):
        raise InputError(f"metric must be {m}x{m} for this representation")
    return np.linalg.inv(G)


def scalar_value(H, tol=SCALAR_TOL):
    """Return ``c`` if ``H == c I`` within ``tol * max(1, |c|)``, else raise."""
    d = H.shape[0]
    if d == 0:
        return 0.0
    c = float(np.real(np.trace(H))) / d
    resid = np.max(np.abs(H - c * np.eye(d)))
    if resid > tol * max(1.0, abs(c)):
        raise InputError(f"bi-invariant block is not scalar (residual {resid:.3e}); "
                         "is the reference metric bi-invariant?")
    return c


def casimir(generators, g0) -> float:
    gens = np.asarray(generators)
    H = _kernels.laplace_contract(_ginv(g0, gens.shape[0]), gens)
    return scalar_value(H)


def su2_irrep(j, g0=None) -> Irrep:
    """Spin-j representation of su(2) with ``[X1, X2] = X3`` (cyclic).

    ``g0`` defaults to minus the Killing form (Gram ``2 I``); ``casimir0`` is then
    ``j(j+1)/2``.
    """
    j = _as_spin(j)
    J = spin_matrices(j)
    gens = np.stack([-1j * Ja for Ja in J])
    if g0 is None:
        g0 = 2.0 * np.eye(3)
    return Irrep(IrrepLabel((j,), ()), gens, casimir(gens, g0))


def torus_character(lattice: TorusLattice, coeffs, torus_gram=None) -> Irrep:
    """Character ``exp(2 pi i mu)`` of the torus, ``mu = sum coeffs_i nu_i``.

    The generator of center vector ``Z`` is ``2 pi i mu(Z)``; with a flat metric
    ``gbar`` the Laplacian eigenvalue is ``4 pi^2 |mu|^2`` in the dual norm.
    """
    coeffs = np.asarray(coeffs)
    if coeffs.shape != (lattice.rank,) or not np.all(np.equal(np.mod(coeffs, 1), 0)):
        raise InputError(f"character needs {lattice.rank} integer coefficients")
    mu = lattice.covector(coeffs.astype(np.int64))
    gens = (1j * TWO_PI * mu).reshape(-1, 1, 1)
    if torus_gram is None:
        torus_gram = np.eye(lattice.rank)
    label = IrrepLabel((), tuple(int(c) for c in coeffs))
    return Irrep(label, gens, casimir(gens, torus_gram))


def product_irrep(factors: Sequence[Irrep], group: GroupModel = None) -> Irrep:
    """Outer tensor product.

    Without ``group`` the factors' algebras are concatenated in order.  With
    ``group`` the factors must match its simple ideals (in order) followed by
    one character of the center, and generators are placed at the ideals'
    reference indices.
    """
    factors = list(factors)
    if not factors:
        raise InputError("product of no factors")
    dims = [f.dim for f in factors]
    d = int(np.prod(dims))
    if group is None:
        slots = []
        off = 0
        for f in factors:
            slots.append(np.arange(off, off + f.algebra_dim))
            off += f.algebra_dim
        m = off
    else:
        alg = group.algebra
        blocks = alg.simple_ideals + ([alg.center] if alg.center is not None else [])
        if len(blocks) != len(factors):
            raise InputError(f"group {group.name or ''} has {len(blocks)} factors, got {len(factors)}")
        for I, f in zip(blocks, factors):
            if I.size != f.algebra_dim:
                raise InputError("factor irrep does not match the dimension of its ideal")
        slots = [I.indices for I in blocks]
        m = alg.dim
    gens = np.zeros((m, d, d), dtype=np.complex128)
    for pos, (f, idx) in enumerate(zip(factors, slots)):
        left = int(np.prod(dims[:pos]))
        right = int(np.prod(dims[pos + 1:]))
        for a, i in enumerate(idx):
            gens[i] = np.kron(np.kron(np.eye(left), f.generators[a]), np.eye(right))
    spins = tuple(s for f in factors for s in f.label.spins)
    char = tuple(c for f in factors for c in f.label.char)
    return Irrep(IrrepLabel(spins, char), gens, float(sum(f.casimir0 for f in factors)))


def su2_frame(alg: LieAlgebra, ideal_index: int) -> np.ndarray:
    """Matrix ``M`` with ``e_a = sum_b M[a, b] X_b`` identifying simple ideal
    ``ideal_index`` with the standard su(2)."""
    I = alg.simple_ideals[ideal_index]
    if I.size != 3:
        raise InputError("irreducible representations are only built for three-dimensional simple ideals")
    B = killing_form(alg)[I.lo:I.hi, I.lo:I.hi]
    U = _orthonormal_columns(-B)  # columns: -B-orthonormal basis u_p, ideal coordinates
    c = alg.structure_constants[I.lo:I.hi, I.lo:I.hi, I.lo:I.hi]

    def br(x, y):
        return np.einsum("i,j,ijk->k", x, y, c)

    w = np.linalg.solve(U, br(U[:, 0], U[:, 1]))
    if w[2] < 0:
        U[:, 2] *= -1.0
    Uinv = np.linalg.inv(U)
    k = 1.0 / math.sqrt(2.0)
    for p, q, r in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        w = Uinv @ br(U[:, p], U[:, q])
        target = np.zeros(3)
        target[r] = k
        if np.max(np.abs(w - target)) > 1e-10:
            raise InputError("simple ideal is not isomorphic to su(2)")
    # u_p -> X_p / sqrt(2) is an isomorphism onto the standard su(2).
    return Uinv.T * k


def adjoint_irrep(alg: LieAlgebra, ideal_index: int, g0=None) -> Irrep:
    """Adjoint action on simple ideal ``ideal_index``, in a ``-B``-orthonormal basis."""
    simple = alg.simple_ideals
    I = simple[ideal_index]
    B = killing_form(alg)[I.lo:I.hi, I.lo:I.hi]
    Q = _orthonormal_columns(-B)
    Qinv = np.linalg.inv(Q)
    c = alg.structure_constants
    gens = np.zeros((alg.dim, I.size, I.size), dtype=np.complex128)
    for i in range(I.lo, I.hi):
        adi = c[i, I.lo:I.hi, I.lo:I.hi].T
        gens[i] = Qinv @ adi @ Q
    if all(J.size == 3 for J in simple):
        spins = tuple(Fraction(1) if s == ideal_index else Fraction(0) for s in range(len(simple)))
    else:
        spins = ()
    label = IrrepLabel(spins, (0,) * alg.center_dim, tag=f"adjoint:{ideal_index}")
    cas = casimir(gens, g0) if g0 is not None else float("nan")
    return Irrep(label, gens, cas)


def trivial_irrep(group: GroupModel) -> Irrep:
    alg = group.algebra
    label = IrrepLabel(tuple(Fraction(0) for _ in alg.simple_ideals), (0,) * alg.center_dim)
    return Irrep(label, np.zeros((alg.dim, 1, 1)), 0.0)


def check_irrep(irrep: Irrep, alg: LieAlgebra, tol=1e-10):
    """Max skew-Hermiticity and commutation defects."""
    P = irrep.generators
    skew = float(np.max(np.abs(P + P.conj().transpose(0, 2, 1)), initial=0.0))
    comm = np.einsum("iab,jbc->ijac", P, P)
    comm = comm - comm.transpose(1, 0, 2, 3)
    rhs = np.einsum("ijk,kac->ijac", alg.structure_constants, P)
    return skew, float(np.max(np.abs(comm - rhs), initial=0.0))


# --------------------------------------------------------------------------
# Peter-Weyl enumeration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class _Plan:
    label: IrrepLabel
    casimir: float
    dim: int


def _factor_data(group: GroupModel, g0: Metric):
    alg = group.algebra
    if g0.dim != alg.dim:
        raise InputError("metric and group dimensions differ")
    G0 = g0.gram
    frames, kappas = [], []
    for s, I in enumerate(alg.simple_ideals):
        M = su2_frame(alg, s)
        half = su2_irrep(Fraction(1, 2))
        gens = np.einsum("ab,bxy->axy", M, half.generators)
        # spin-j Casimir is kappa * j(j+1) for the fixed block of g0
        kappas.append(casimir(gens, G0[I.lo:I.hi, I.lo:I.hi]) / 0.75)
        frames.append(M)
    z = alg.center
    Qdual = None
    if z is not None:
        N = group.lattice.dual_matrix
        Qdual = (TWO_PI ** 2) * N @ np.linalg.inv(G0[z.lo:z.hi, z.lo:z.hi]) @ N.T
        Qdual = 0.5 * (Qdual + Qdual.T)
    return frames, kappas, Qdual


def _spin_options(kappa, cutoff):
    out = []
    two_j = 0
    while True:
        j = two_j / 2.0
        val = kappa * j * (j + 1)
        if val > cutoff:
            break
        out.append((Fraction(two_j, 2), val))
        two_j += 1
    return out


def _char_options(Q, cutoff):
    k = Q.shape[0]
    lam_min = float(np.min(np.linalg.eigvalsh(Q)))
    radius = int(math.floor(math.sqrt(max(cutoff, 0.0) / lam_min))) if cutoff >= 0 else -1
    out = []
    if radius < 0:
        return out
    rng = range(-radius, radius + 1)
    for c in itertools.product(rng, repeat=k):
        v = np.array(c, dtype=np.float64)
        val = float(v @ Q @ v)
        if val <= cutoff:
            out.append((tuple(c), val))
    return out


def _plan(group: GroupModel, g0: Metric, cutoff: float):
    if cutoff < 0:
        raise InputError("cutoff must be non-negative")
    frames, kappas, Qdual = _factor_data(group, g0)
    slack = cutoff * (1 + 1e-9) + 1e-12
    spin_lists = [_spin_options(k, slack) for k in kappas]
    char_list = _char_options(Qdual, slack) if Qdual is not None else [((), 0.0)]
    plans = []
    for combo in itertools.product(*spin_lists):
        base = sum(v for _, v in combo)
        if base > slack:
            continue
        spins = tuple(j for j, _ in combo)
        for char, cv in char_list:
            total = base + cv
            if total > slack:
                continue
            if not group.admits(spins, char):
                continue
            d = int(np.prod([int(2 * j + 1) for j in spins])) if spins else 1
            plans.append(_Plan(IrrepLabel(spins, char), total, d))
    plans.sort(key=lambda p: (round(p.casimir, 9), p.label))
    return plans, frames


def enumeration_size(group: GroupModel, g0: Metric, cutoff: float) -> int:
    """Total matrix entries (sum of d^2) of the blocks below ``cutoff``."""
    plans, _ = _plan(group, g0, cutoff)
    return sum(p.dim ** 2 for p in plans)


def _build_irrep(group, g0, plan, frames):
    alg = group.algebra
    factors = []
    for s, (j, M) in enumerate(zip(plan.label.spins, frames)):
        base = su2_irrep(j)
        I = alg.simple_ideals[s]
        gens = np.einsum("ab,bxy->axy", M, base.generators)
        factors.append(Irrep(IrrepLabel((j,), ()), gens,
                             casimir(gens, g0.gram[I.lo:I.hi, I.lo:I.hi])))
    z = alg.center
    if z is not None:
        factors.append(torus_character(group.lattice, plan.label.char, g0.gram[z.lo:z.hi, z.lo:z.hi]))
    irrep = product_irrep(factors, group)
    value = casimir(irrep.generators, g0)
    if abs(value - irrep.casimir0) > SCALAR_TOL * max(1.0, abs(value)):
        raise InputError("Casimir additivity check failed; is g0 bi-invariant?")
    return Irrep(irrep.label, irrep.generators, value)


def enumerate_irreps(group: GroupModel, g0: Metric, cutoff: float,
                     max_entries: int = DEFAULT_MAX_ENTRIES) -> List[Irrep]:
    """All admissible irreps with ``casimir0 <= cutoff``, sorted by (casimir0, label).

    Raises :class:`ResourceError` when their blocks would hold more than
    ``max_entries`` matrix entries in total.
    """
    plans, frames = _plan(group, g0, cutoff)
    total = sum(p.dim ** 2 for p in plans)
    if max_entries is not None and total > max_entries:
        raise ResourceError(
            f"enumeration up to Casimir {cutoff:.6g} needs {total} matrix entries, "
            f"over the budget of {max_entries}", needed=total)
    out = [_build_irrep(group, g0, p, frames) for p in plans]
    return [ir for ir in out if ir.casimir0 <= cutoff * (1 + 1e-12) + 1e-12]
