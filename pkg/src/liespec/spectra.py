"""Laplace spectra of left-invariant metrics, block by block.

By Peter-Weyl every irrep ``V`` occurs in L^2(G) with multiplicity ``dim V``,
and a left-invariant Laplacian acts on each copy as the same ``d x d`` block
``-sum_ik (G^-1)_ik pi(X_i) pi(X_k)``.  A spectrum below ``cutoff`` is complete
because of the per-block sandwich ``alpha * casimir0 <= block <= beta * casimir0``
with ``alpha = 1/lambda_max(S)``, ``beta = 1/lambda_min(S)``, ``S`` the Gram of ``g``
in a ``g0``-orthonormal basis.
"""
import csv
import io
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import _kernels
from .algebra import Metric, onb_gram
from .errors import InputError, ResourceError
from .groups import GroupModel
from .reps import DEFAULT_MAX_ENTRIES, Irrep, IrrepLabel, enumerate_irreps

HERMITIAN_TOL = 1e-12
CLUSTER_TOL = 1e-8
MATCH_TOL = 1e-6


def laplace_block(g: Metric, irrep: Irrep) -> np.ndarray:
    """Hermitian block of the Laplacian of ``g`` on one copy of ``irrep``."""
    if irrep.algebra_dim != g.dim:
        raise InputError(f"irrep acts on a {irrep.algebra_dim}-dim algebra, metric is {g.dim}-dim")
    return _kernels.laplace_contract(np.linalg.inv(g.gram), irrep.generators)


def hermitian_eigenvalues(H, tol=HERMITIAN_TOL) -> np.ndarray:
    """Sorted eigenvalues of a Hermitian matrix (cyclic Jacobi).

    Complex input is diagonalised through its real symmetric ``2d x 2d``
    embedding ``[[Re, -Im], [Im, Re]]``, whose spectrum is that of ``H`` twice.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InputError("expected a square matrix")
    d = H.shape[0]
    if d == 0:
        return np.zeros(0)
    peak = float(np.max(np.abs(H)))
    if peak == 0.0:
        return np.zeros(d)
    norm = float(np.linalg.norm(H / peak)) * peak
    if np.max(np.abs(H - H.conj().T)) > tol * norm:
        raise InputError("matrix is not Hermitian within tolerance")
    H = 0.5 * (H + H.conj().T)
    im = np.imag(H) if np.iscomplexobj(H) else None
    if im is None or not np.any(im):
        w, off, _ = _kernels.jacobi_eigenvalues(np.real(H))
    else:
        re = np.real(H)
        emb = np.block([[re, -im], [im, re]])
        w, off, _ = _kernels.jacobi_eigenvalues(emb)
        off /= np.sqrt(2.0)
        w = w[::2]
    if off > tol * norm:
        raise RuntimeError(f"Jacobi iteration did not converge (off-diagonal {off:.3e})")
    return w


@dataclass(frozen=True)
class SpectrumBlock:
    label: IrrepLabel
    eigenvalues: np.ndarray = field(repr=False)
    weight: int
    casimir0: float


@dataclass(frozen=True)
class Certificate:
    alpha: float
    beta: float
    enum_cutoff: float


@dataclass(frozen=True)
class Spectrum:
    blocks: List[SpectrumBlock]
    cutoff: float
    certificate: Certificate

    def values(self, upto=None):
        """All eigenvalues ``<= upto`` (default: the cutoff) repeated by multiplicity."""
        upto = self.cutoff if upto is None else upto
        vals, mult = self.weighted(upto)
        return np.repeat(vals, mult)

    def weighted(self, upto=None):
        upto = self.cutoff if upto is None else upto
        lim = upto * (1 + 1e-12) + 1e-12
        vals, mult = [], []
        for b in self.blocks:
            for v in b.eigenvalues:
                if v <= lim:
                    vals.append(v)
                    mult.append(b.weight)
        order = np.argsort(vals, kind="stable")
        return np.asarray(vals)[order], np.asarray(mult, dtype=np.int64)[order]

    def to_json(self):
        return {
            "cutoff": self.cutoff,
            "certificate": {"alpha": self.certificate.alpha, "beta": self.certificate.beta,
                            "enum_cutoff": self.certificate.enum_cutoff},
            "blocks": [{"label": b.label.to_json(), "weight": b.weight,
                        "eigenvalues": [float(v) for v in b.eigenvalues]} for b in self.blocks],
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", "value", "multiplicity"])
        lim = self.cutoff * (1 + 1e-12) + 1e-12
        for b in self.blocks:
            for v in b.eigenvalues:
                if v <= lim:
                    w.writerow([str(b.label), "%.17g" % v, b.weight])
        return buf.getvalue()


class IrrepCache:
    """Irreps of ``group`` enumerated for a fixed ``g0``, grown on demand."""

    def __init__(self, group: GroupModel, g0: Metric, max_entries=DEFAULT_MAX_ENTRIES):
        self.group = group
        self.g0 = g0
        self.max_entries = max_entries
        self._cutoff = -1.0
        self._irreps: List[Irrep] = []

    def up_to(self, cutoff) -> List[Irrep]:
        if cutoff > self._cutoff:
            # over-enumerate a little so nearby requests hit the cache
            target = cutoff * 1.25 if self._cutoff >= 0 else cutoff
            try:
                self._irreps = enumerate_irreps(self.group, self.g0, target, self.max_entries)
            except ResourceError:
                if target == cutoff:
                    raise
                target = cutoff
                self._irreps = enumerate_irreps(self.group, self.g0, target, self.max_entries)
            self._cutoff = target
        lim = cutoff * (1 + 1e-12) + 1e-12
        return [ir for ir in self._irreps if ir.casimir0 <= lim]


def certificate_bounds(g: Metric, g0: Metric, group: GroupModel):
    S = onb_gram(g, g0, group.algebra)
    ev = np.linalg.eigvalsh(S)
    return 1.0 / ev[-1], 1.0 / ev[0]


def spectrum(group: GroupModel, g: Metric, g0: Metric, cutoff: float,
             max_entries: int = DEFAULT_MAX_ENTRIES, cache: Optional[IrrepCache] = None) -> Spectrum:
    """Every Laplace eigenvalue of ``g`` up to ``cutoff``, certified complete."""
    if not cutoff > 0:
        raise InputError("cutoff must be positive")
    if g.dim != group.algebra.dim:
        raise InputError("metric and group dimensions differ")
    alpha, beta = certificate_bounds(g, g0, group)
    enum_cutoff = cutoff / alpha * (1 + 1e-9)
    if cache is None:
        irreps = enumerate_irreps(group, g0, enum_cutoff, max_entries)
    else:
        irreps = cache.up_to(enum_cutoff)
    ginv = np.linalg.inv(g.gram)
    blocks = []
    for ir in irreps:
        H = _kernels.laplace_contract(ginv, ir.generators)
        blocks.append(SpectrumBlock(ir.label, hermitian_eigenvalues(H), ir.dim, ir.casimir0))
    return Spectrum(blocks, float(cutoff), Certificate(float(alpha), float(beta), float(enum_cutoff)))


@dataclass(frozen=True)
class EigenvalueSet:
    values: np.ndarray
    multiplicities: np.ndarray
    cluster_tol: float

    def __len__(self):
        return len(self.values)

    def to_json(self):
        return {"values": [float(v) for v in self.values],
                "multiplicities": [int(k) for k in self.multiplicities],
                "cluster_tol": self.cluster_tol}


def cluster_values(values, weights=None, cluster_tol=CLUSTER_TOL) -> EigenvalueSet:
    values = np.asarray(values, dtype=np.float64)
    weights = np.ones(len(values), dtype=np.int64) if weights is None else np.asarray(weights)
    order = np.argsort(values, kind="stable")
    values, weights = values[order], weights[order]
    reps, mults = [], []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > cluster_tol * max(1.0, abs(values[i])):
            w = weights[start:i]
            reps.append(float(np.sum(values[start:i] * w) / np.sum(w)))
            mults.append(int(np.sum(w)))
            start = i
    return EigenvalueSet(np.array(reps), np.array(mults, dtype=np.int64), cluster_tol)


def eigenvalue_set(spec: Spectrum, cluster_tol=CLUSTER_TOL) -> EigenvalueSet:
    """Distinct eigenvalues up to the cutoff, multiplicities ignored for ordering."""
    if not cluster_tol > 0:
        raise InputError("cluster_tol must be positive")
    vals, mult = spec.weighted()
    return cluster_values(vals, mult, cluster_tol)


def _values(s):
    return s.values if isinstance(s, EigenvalueSet) else np.asarray(s, dtype=np.float64)


def _leading(s1, s2, N):
    if N < 1:
        raise InputError("level N must be a positive integer")
    a, b = _values(s1), _values(s2)
    if len(a) < N or len(b) < N:
        raise InputError(f"need {N} distinct eigenvalues, have {len(a)} and {len(b)}; "
                         "increase the cutoff")
    return a[:N], b[:N]


def spectral_discrepancy(s1, s2, N) -> float:
    """``max_{i<N} |s1[i] - s2[i]| / max(1, s1[i])``; relative to ``s1``, so not symmetric."""
    a, b = _leading(s1, s2, N)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, a)))


def eigenvalue_equivalent_up_to_level(s1, s2, N, match_tol=MATCH_TOL) -> bool:
    a, b = _leading(s1, s2, N)
    return bool(np.all(np.abs(a - b) <= match_tol * np.maximum(1.0, a)))


def leading_eigenvalue_set(group: GroupModel, g: Metric, g0: Metric, count: int, cutoff=None,
                           cache: Optional[IrrepCache] = None, cluster_tol=CLUSTER_TOL,
                           max_doublings=30) -> EigenvalueSet:
    """Eigenvalue set holding at least ``count`` values, doubling the cutoff as needed."""
    if cutoff is None:
        cutoff = 1.0
    for _ in range(max_doublings):
        es = eigenvalue_set(spectrum(group, g, g0, cutoff, cache=cache,
                                     max_entries=cache.max_entries if cache else DEFAULT_MAX_ENTRIES),
                            cluster_tol)
        if len(es) >= count:
            return es
        cutoff *= 2.0
    raise ResourceError(f"could not reach {count} distinct eigenvalues", needed=cutoff)
