"""Trace identities and isolation experiments around a bi-invariant metric.

Distances to the isometry class of ``g0`` compare eigenvalues of Gram matrices
in a ``g0``-orthonormal basis, i.e. they minimise over orthogonal changes of
basis.  For su(2) factors the adjoint group is all of SO(3), so this is the
exact distance to the Ad-orbit.
"""
import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .algebra import (
    LieAlgebra, Metric, adapted_change_of_basis, bi_invariant_scales, cholesky_upper,
    frobenius_sq, metric_from_onb, onb_gram, volume_ratio,
)
from .errors import DomainError, HypothesisError, InputError, LiespecError, ResourceError
from .groups import GroupModel
from .reps import Irrep, adjoint_irrep
from .spectra import (
    CLUSTER_TOL, MATCH_TOL, IrrepCache, eigenvalue_set, laplace_block,
    leading_eigenvalue_set, spectral_discrepancy, spectrum,
)


# --------------------------------------------------------------------------
# traces
# --------------------------------------------------------------------------

def trace_block(g: Metric, irrep: Irrep) -> float:
    return float(np.real(np.trace(laplace_block(g, irrep))))


def ad_formula_trace(g: Metric, alg: LieAlgebra, ideal_index: int) -> float:
    """``-sum_j Tr((ad_{U_j} restricted to ideal)^2)`` over a ``g``-orthonormal basis ``U``."""
    I = alg.simple_ideals[ideal_index]
    U = np.linalg.inv(cholesky_upper(g.gram))
    c = alg.structure_constants[:, I.lo:I.hi, I.lo:I.hi]
    total = 0.0
    for j in range(alg.dim):
        adj = np.einsum("i,iab->ba", U[:, j], c)
        total -= float(np.trace(adj @ adj))
    return total


def _support(irrep: Irrep, alg: LieAlgebra):
    """Indices of simple ideals (and 'center') on which ``irrep`` acts nontrivially."""
    P = irrep.generators
    out = []
    for s, I in enumerate(alg.simple_ideals):
        if np.max(np.abs(P[I.lo:I.hi]), initial=0.0) > 0:
            out.append(s)
    z = alg.center
    if z is not None and np.max(np.abs(P[z.lo:z.hi]), initial=0.0) > 0:
        out.append("center")
    return out


@dataclass
class TraceReport:
    labels: List[str]
    traces: List[float]
    traces0: List[float]
    ratios: List[float]
    predicted_C: float
    frobenius_C: float
    spread: float
    volume_ratio: float
    distance: float
    skipped: List[str] = field(default_factory=list)

    @property
    def constant_ok(self):
        return bool(self.ratios and self.spread < 1e-9
                    and abs(np.mean(self.ratios) - self.predicted_C) < 1e-9)

    @property
    def strict_ok(self):
        """``C > 1`` whenever ``vol(g) <= vol(g0)`` and ``g`` is off the isometry class."""
        if self.volume_ratio <= 1 + 1e-12 and self.distance > 1e-12:
            return bool(self.predicted_C > 1)
        return True

    def to_json(self):
        return {
            "irreps": [{"label": l, "trace": t, "trace0": t0, "ratio": r}
                       for l, t, t0, r in zip(self.labels, self.traces, self.traces0, self.ratios)],
            "predicted_C": self.predicted_C, "frobenius_C": self.frobenius_C,
            "spread": self.spread, "volume_ratio": self.volume_ratio, "distance": self.distance,
            "constant_ok": self.constant_ok, "strict_ok": self.strict_ok, "skipped": self.skipped,
        }


def trace_ratio(g: Metric, g0: Metric, irreps: Sequence[Irrep], group: GroupModel) -> TraceReport:
    """``Tr(Delta_g | V) / Tr(Delta_0 | V)`` per nontrivial irrep, with the predicted constant.

    The prediction is ``sum_{i in l} (S^-1)_ii / n_l`` for the simple ideal ``l`` the
    irreps act on (``S``: Gram of ``g`` in the ``g0``-adapted basis); for a simple
    group this is ``|A|^2 / n``, also reported as ``frobenius_C``.
    """
    alg = group.algebra
    labels, traces, traces0, ratios, skipped = [], [], [], [], []
    supports = set()
    for ir in irreps:
        t0 = trace_block(g0, ir)
        if ir.label.is_trivial or abs(t0) < 1e-14:
            warnings.warn(f"skipping trivial irrep {ir.label}: the trace ratio is undefined", stacklevel=2)
            skipped.append(str(ir.label))
            continue
        t = trace_block(g, ir)
        supp = _support(ir, alg)
        supports.add(tuple(supp))
        labels.append(str(ir.label))
        traces.append(t)
        traces0.append(t0)
        ratios.append(t / t0)
    blocks = adapted_change_of_basis(g, g0, alg)
    n = blocks.n
    frob_C = frobenius_sq(blocks.A) / n if n else float("nan")
    predicted = float("nan")
    if len(supports) == 1:
        (supp,) = supports
        if len(supp) == 1 and supp[0] != "center":
            S = onb_gram(g, g0, alg)
            Sinv = np.linalg.inv(S)
            off = sum(I.size for I in alg.simple_ideals[:supp[0]])
            nl = alg.simple_ideals[supp[0]].size
            predicted = float(np.trace(Sinv[off:off + nl, off:off + nl]) / nl)
    spread = float(np.max(ratios) - np.min(ratios)) if ratios else float("nan")
    return TraceReport(labels, traces, traces0, ratios, predicted, frob_C, spread,
                       volume_ratio(g, g0), isometry_distance(g, g0, group), skipped)


@dataclass
class FrobeniusCheck:
    residual: float
    per_ideal: List[dict]
    traces: List[float]
    traces0: List[float]
    traces_equal: bool
    exact_blocks: bool

    def to_json(self):
        return {"residual": self.residual, "per_ideal": self.per_ideal, "traces": self.traces,
                "traces0": self.traces0, "traces_equal": self.traces_equal,
                "exact_blocks": self.exact_blocks}


def per_ideal_identity(g: Metric, g0: Metric, alg: LieAlgebra):
    """For each simple ideal: ``n_l`` and ``sum_{i in l} (sum_j a_ij^2 + sum_s r_is^2)``.

    ``r`` are the entries of ``R T``, the semisimple part of the ``g``-orthonormal
    center vectors; this is ``R`` itself when the block form is exact.
    """
    blocks = adapted_change_of_basis(g, g0, alg)
    RT = blocks.R @ blocks.center_frame if blocks.k else blocks.R
    out = []
    off = 0
    for I in alg.simple_ideals:
        rows = slice(off, off + I.size)
        out.append({"n": I.size,
                    "sum_sq": frobenius_sq(blocks.A[rows]) + frobenius_sq(RT[rows])})
        off += I.size
    return out, blocks


def frobenius_identity_check(g: Metric, g0: Metric, group: GroupModel,
                             irreps: Optional[Sequence[Irrep]] = None, trace_tol=1e-9) -> FrobeniusCheck:
    """Residual ``|n - |A|^2 - |R T|^2|`` together with the adjoint-trace data it rests on.

    ``irreps`` default to the adjoint representations on the simple ideals.  With
    the trace equalities ``Tr(Delta_g | V_l) = Tr(Delta_0 | V_l)`` in force the
    residual vanishes; in general ``c_l (Tr_g - Tr_0) = sum_sq_l - n_l``.
    """
    alg = group.algebra
    if not alg.simple_ideals:
        raise HypothesisError("the identity concerns the semisimple part; this group has none")
    bi_invariant_scales(g0, alg)
    if irreps is None:
        irreps = [adjoint_irrep(alg, s, g0.gram) for s in range(len(alg.simple_ideals))]
    traces = [trace_block(g, ir) for ir in irreps]
    traces0 = [trace_block(g0, ir) for ir in irreps]
    equal = all(abs(t - t0) <= trace_tol * max(1.0, abs(t0)) for t, t0 in zip(traces, traces0))
    per, blocks = per_ideal_identity(g, g0, alg)
    n = blocks.n
    residual = abs(n - sum(p["sum_sq"] for p in per))
    return FrobeniusCheck(float(residual), per, traces, traces0, bool(equal), blocks.exact)


def minimality_gap(A) -> float:
    """``|A|^2 - n`` for ``det A >= 1``; zero exactly on SO(n)."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError("minimality_gap needs a square matrix")
    n = A.shape[0]
    det = np.linalg.det(A)
    if det < 1 - 1e-12:
        raise DomainError(f"det(A) = {det:.6g} < 1")
    return float(frobenius_sq(A) - n)


def is_orthogonal(A, tol=1e-10) -> bool:
    A = np.asarray(A, dtype=np.float64)
    return bool(np.max(np.abs(A.T @ A - np.eye(A.shape[0]))) <= tol)


# --------------------------------------------------------------------------
# metric sampling and distances
# --------------------------------------------------------------------------

def isometry_distance(g: Metric, g0: Metric, group: GroupModel, other: Optional[Metric] = None) -> float:
    """Frobenius distance between the sorted ``g0``-adapted Gram eigenvalues of ``g``
    and ``other`` (default ``g0``); zero iff they are orthogonally conjugate."""
    S = onb_gram(g, g0, group.algebra)
    T = np.eye(S.shape[0]) if other is None else onb_gram(other, g0, group.algebra)
    return float(np.linalg.norm(np.linalg.eigvalsh(S) - np.linalg.eigvalsh(T)))


def _sym_exp(X):
    w, V = np.linalg.eigh(0.5 * (X + X.T))
    return (V * np.exp(w)) @ V.T


def cap_volume(S):
    """Rescale ``S`` so that ``det S <= 1`` (volume at most that of ``g0``)."""
    det = np.linalg.det(S)
    if det > 1:
        S = S / det ** (1.0 / S.shape[0])
    return S


def sample_perturbation(rng: np.random.Generator, m: int, radius: float) -> np.ndarray:
    """``E = exp(X)``, ``X`` symmetric with entries uniform in ``[-radius, radius]``,
    volume-capped.  Returned in ``g0``-adapted coordinates (``g0`` is the identity there)."""
    X = rng.uniform(-radius, radius, size=(m, m))
    X = np.triu(X) + np.triu(X, 1).T
    return cap_volume(_sym_exp(X))


def _child_rngs(seed, count):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


# --------------------------------------------------------------------------
# isolation scan
# --------------------------------------------------------------------------

DEFAULT_DELTAS = (0.0, 0.01, 0.02, 0.05, 0.1)


@dataclass
class ScanReport:
    params: dict
    reference: List[float]
    distance: np.ndarray
    volume: np.ndarray
    discrepancy: np.ndarray
    minima: List[dict]

    def to_json(self):
        return {
            "params": self.params,
            "reference": self.reference,
            "minima": self.minima,
            "samples": [{"index": i, "distance": float(d), "volume_ratio": float(v),
                         "discrepancy": float(x)}
                        for i, (d, v, x) in enumerate(zip(self.distance, self.volume, self.discrepancy))],
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "distance", "volume_ratio", "discrepancy"])
        for i, (d, v, x) in enumerate(zip(self.distance, self.volume, self.discrepancy)):
            w.writerow([i, "%.17g" % d, "%.17g" % v, "%.17g" % x])
        return buf.getvalue()


def isolation_scan(group: GroupModel, g0: Metric, radius: float, n_samples: int, N: int = 3,
                   cutoff: Optional[float] = None, seed: int = 0, deltas=DEFAULT_DELTAS,
                   cluster_tol=CLUSTER_TOL) -> ScanReport:
    """Level-``N`` discrepancy of random volume-capped metrics near ``g0``.

    Sample ``i`` draws from its own generator spawned from ``seed``, so results
    do not depend on evaluation order.
    """
    if radius < 0:
        raise InputError("radius must be non-negative")
    if n_samples < 1:
        raise InputError("need at least one sample")
    alg = group.algebra
    cache = IrrepCache(group, g0)
    ref = leading_eigenvalue_set(group, g0, g0, N, cutoff, cache=cache, cluster_tol=cluster_tol)
    base_cutoff = cutoff if cutoff is not None else float(ref.values[N - 1]) * 1.25 + 1e-9
    dist = np.empty(n_samples)
    vol = np.empty(n_samples)
    disc = np.empty(n_samples)
    for i, rng in enumerate(_child_rngs(seed, n_samples)):
        if radius > 0:
            S = sample_perturbation(rng, alg.dim, radius)
            g = metric_from_onb(S, g0, alg)
        else:
            S, g = np.eye(alg.dim), g0
        es = leading_eigenvalue_set(group, g, g0, N, base_cutoff, cache=cache, cluster_tol=cluster_tol)
        dist[i] = np.linalg.norm(np.linalg.eigvalsh(S) - 1.0)
        vol[i] = math.sqrt(np.linalg.det(S))
        disc[i] = spectral_discrepancy(ref, es, N)
    minima = []
    for delta in deltas:
        sel = np.flatnonzero(dist >= delta)
        if sel.size:
            k = int(sel[np.argmin(disc[sel])])
            minima.append({"delta": float(delta), "count": int(sel.size),
                           "min_discrepancy": float(disc[k]), "argmin": k})
        else:
            minima.append({"delta": float(delta), "count": 0, "min_discrepancy": None, "argmin": None})
    params = {"group": group.name, "radius": radius, "n_samples": n_samples, "level": N,
              "cutoff": cutoff, "seed": seed, "deltas": [float(d) for d in deltas],
              "cluster_tol": cluster_tol}
    return ScanReport(params, [float(v) for v in ref.values[:N]], dist, vol, disc, minima)


# --------------------------------------------------------------------------
# three-eigenvalue rigidity
# --------------------------------------------------------------------------

@dataclass
class RigidityResult:
    verdict: bool
    volume_ok: bool
    consecutive: bool
    alphas: List[float]
    matched: Optional[List[float]]
    volume_ratio: float
    trace_ratio: float
    reason: str

    def to_json(self):
        return {"verdict": self.verdict, "volume_ok": self.volume_ok, "consecutive": self.consecutive,
                "alphas": self.alphas, "matched": self.matched, "volume_ratio": self.volume_ratio,
                "trace_ratio": self.trace_ratio, "reason": self.reason}


def three_eigenvalue_test(group: GroupModel, g0: Metric, g: Metric, cutoff: Optional[float] = None,
                          start: int = 0, match_tol=MATCH_TOL, cluster_tol=CLUSTER_TOL) -> RigidityResult:
    """Do three consecutive distinct eigenvalues of ``g0`` (from index ``start``)
    reappear as consecutive distinct eigenvalues of ``g``, with ``vol(g) <= vol(g0)``?

    ``trace_ratio`` is ``Tr(Delta_g | V) / (alpha_2 dim V)`` on the ``alpha_2``-eigenspace
    ``V`` of ``Delta_0``; it exceeds 1 whenever ``g`` has smaller volume and is not ``g0``.
    """
    if not group.is_simple:
        raise HypothesisError("the three-eigenvalue test needs a simple group")
    cache = IrrepCache(group, g0)
    ref = leading_eigenvalue_set(group, g0, g0, start + 3, None, cache=cache, cluster_tol=cluster_tol)
    alphas = [float(v) for v in ref.values[start:start + 3]]
    need = alphas[2] * (1 + match_tol)
    if cutoff is None:
        cutoff = need * 1.25
    elif cutoff < need:
        raise ResourceError(f"cutoff {cutoff:.6g} cannot certify alpha_3; need at least {need:.17g}",
                            needed=need)

    vol = volume_ratio(g, g0)
    # alpha_2-eigenspace of Delta_0: every irrep with that Casimir, each with multiplicity dim
    v_irreps = [ir for ir in cache.up_to(alphas[1] * (1 + 1e-9))
                if abs(ir.casimir0 - alphas[1]) <= 1e-9 * max(1.0, alphas[1])]
    tr = sum(ir.dim * trace_block(g, ir) for ir in v_irreps)
    dimV = sum(ir.dim ** 2 for ir in v_irreps)
    tratio = tr / (alphas[1] * dimV) if dimV and alphas[1] > 0 else float("nan")

    if vol > 1 + 1e-12:
        return RigidityResult(False, False, False, alphas, None, vol, tratio, "volume exceeds vol(g0)")
    es = eigenvalue_set(spectrum(group, g, g0, cutoff, cache=cache), cluster_tol).values

    def close(x, a):
        return abs(x - a) <= match_tol * max(1.0, a)

    for i in range(len(es) - 2):
        if close(es[i], alphas[0]):
            window = [float(x) for x in es[i:i + 3]]
            ok = close(es[i + 1], alphas[1]) and close(es[i + 2], alphas[2])
            if ok:
                return RigidityResult(True, True, True, alphas, window, vol, tratio,
                                      "alpha_1..alpha_3 are consecutive eigenvalues of g")
            return RigidityResult(False, True, False, alphas, window, vol, tratio,
                                  "the eigenvalues following alpha_1 differ")
    return RigidityResult(False, True, False, alphas, None, vol, tratio,
                          "alpha_1 is not an eigenvalue of g")


# --------------------------------------------------------------------------
# isospectral competitor search
# --------------------------------------------------------------------------

def _tril_indices(m):
    return np.tril_indices(m)


def gram_from_log_cholesky(x, m):
    L = np.zeros((m, m))
    L[_tril_indices(m)] = x
    d = np.arange(m)
    L[d, d] = np.exp(L[d, d])
    return L @ L.T


def log_cholesky(S):
    L = np.linalg.cholesky(S)
    d = np.arange(S.shape[0])
    L = L.copy()
    L[d, d] = np.log(L[d, d])
    return L[_tril_indices(S.shape[0])]


@dataclass
class SearchResult:
    params: dict
    best_discrepancy: float
    best_gram: np.ndarray
    best_distance: float
    best_volume: float
    trace_C: float
    history: List[dict]
    starts: List[dict]
    evaluations: int
    converged: bool

    @property
    def incomplete(self):
        return not self.converged

    def to_json(self):
        return {
            "params": self.params,
            "best": {"discrepancy": self.best_discrepancy, "distance": self.best_distance,
                     "volume_ratio": self.best_volume, "trace_C": self.trace_C,
                     "gram_onb": [[float(x) for x in row] for row in self.best_gram]},
            "evaluations": self.evaluations, "converged": self.converged,
            "incomplete": self.incomplete, "starts": self.starts, "history": self.history,
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["evaluation", "start", "objective", "discrepancy", "distance", "best_feasible"])
        for h in self.history:
            w.writerow([h["evaluation"], h["start"], "%.17g" % h["objective"], "%.17g" % h["discrepancy"],
                        "%.17g" % h["distance"],
                        "" if h["best_feasible"] is None else "%.17g" % h["best_feasible"]])
        return buf.getvalue()


PENALTY_WEIGHT = 10.0
FAILED_OBJECTIVE = 1e3
INITIAL_STEP = 0.05
RESTART_EVALS_PER_PARAM = 50


def isospectral_search(group: GroupModel, g0: Metric, N: int = 3, cutoff: Optional[float] = None,
                       budget: int = 20000, seed: int = 0, exclusion_radius: float = 0.05,
                       n_starts: int = 8, start_radius: float = 0.3, starts=None,
                       cluster_tol=CLUSTER_TOL, history_stride: int = 1) -> SearchResult:
    """Minimise the level-``N`` discrepancy to ``g0`` over volume-capped metrics.

    Coordinates are the log-Cholesky entries of the Gram in the ``g0``-adapted
    basis; metrics within ``exclusion_radius`` of the isometry class of ``g0`` are
    penalised, and only metrics outside it count as candidates.  ``starts``
    optionally gives explicit initial Gram matrices (adapted basis) instead of
    random ones.
    """
    if exclusion_radius < 0:
        raise InputError("exclusion_radius must be non-negative")
    if budget < 1 or n_starts < 1:
        raise InputError("budget and n_starts must be positive")
    alg = group.algebra
    m = alg.dim
    cache = IrrepCache(group, g0)
    ref = leading_eigenvalue_set(group, g0, g0, N, cutoff, cache=cache, cluster_tol=cluster_tol)
    base_cutoff = cutoff if cutoff is not None else float(ref.values[N - 1]) * 1.25 + 1e-9

    if starts is None:
        rngs = _child_rngs(seed, n_starts)
        start_grams = [cap_volume(_sym_exp(r.uniform(-start_radius, start_radius, (m, m)))) for r in rngs]
    else:
        start_grams = [cap_volume(np.asarray(S, dtype=np.float64)) for S in starts]
    per_start = max(1, budget // len(start_grams))

    state = {"count": 0, "best": math.inf, "best_S": None, "best_dist": math.nan}
    history = []

    def evaluate(x, start_index):
        S = cap_volume(gram_from_log_cholesky(x, m))
        dist = float(np.linalg.norm(np.linalg.eigvalsh(S) - 1.0))
        try:
            g = metric_from_onb(S, g0, alg)
            es = leading_eigenvalue_set(group, g, g0, N, base_cutoff, cache=cache, cluster_tol=cluster_tol)
            disc = spectral_discrepancy(ref, es, N)
        except LiespecError:
            disc = FAILED_OBJECTIVE
        obj = disc + PENALTY_WEIGHT * max(0.0, exclusion_radius - dist)
        state["count"] += 1
        if dist >= exclusion_radius and disc < state["best"]:
            state["best"], state["best_S"], state["best_dist"] = disc, S, dist
        if state["count"] % history_stride == 0:
            history.append({"evaluation": state["count"], "start": start_index, "objective": obj,
                            "discrepancy": disc, "distance": dist,
                            "best_feasible": state["best"] if math.isfinite(state["best"]) else None})
        return obj

    start_info = []
    converged = False
    chunk = RESTART_EVALS_PER_PARAM * (m * (m + 1) // 2)
    for k, S0 in enumerate(start_grams):
        x = log_cholesky(S0)
        step, used, best_obj, diam = INITIAL_STEP, 0, math.inf, math.inf
        # Restart from the best vertex with a fresh simplex whenever a chunk ends:
        # the objective has kinks where eigenvalues cross, and a simplex that has
        # collapsed onto one stops making progress.
        while used < per_start:
            simplex = np.vstack([x, x + step * np.eye(x.size)])
            res = minimize(evaluate, x, args=(k,), method="Nelder-Mead",
                           options={"maxfev": min(chunk, per_start - used), "initial_simplex": simplex,
                                    "xatol": 1e-12, "fatol": 1e-14, "adaptive": True})
            used += int(res.nfev)
            final = res.final_simplex[0]
            diam = float(max(np.linalg.norm(a - b) for a in final for b in final))
            x, best_obj = res.x, min(best_obj, float(res.fun))
            if diam < 1e-10:
                converged = True
                break
            step = max(10.0 * diam, 1e-9)
        start_info.append({"start": k, "objective": best_obj, "evaluations": used,
                           "simplex_diameter": diam})

    best_S = state["best_S"]
    if best_S is None:
        best_S = np.full((m, m), np.nan)
        best_vol = trace_C = math.nan
    else:
        best_vol = math.sqrt(np.linalg.det(best_S))
        n = alg.ss_dim
        trace_C = float(np.trace(np.linalg.inv(best_S)[:n, :n]) / n) if n else math.nan
    params = {"group": group.name, "level": N, "cutoff": cutoff, "budget": budget, "seed": seed,
              "exclusion_radius": exclusion_radius, "n_starts": len(start_grams),
              "start_radius": start_radius, "cluster_tol": cluster_tol}
    return SearchResult(params, float(state["best"]), best_S, float(state["best_dist"]), best_vol,
                        trace_C, history, start_info, state["count"], converged)
