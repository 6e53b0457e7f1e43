"""Hot numeric kernels.

Every kernel exists twice: a plain-loop version compiled with ``numba.njit``
and a vectorised numpy version.  The numba path is used when numba imports
and ``LIESPEC_DISABLE_NUMBA`` is unset (or "0"); otherwise the numpy path is
used.  Both paths are importable directly for testing and benchmarking.
"""
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return wrap


def _flag_disabled():
    return os.environ.get("LIESPEC_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")


USE_NUMBA = HAVE_NUMBA and not _flag_disabled()

# Jacobi stops once the off-diagonal Frobenius norm drops below this multiple
# of the full Frobenius norm.
JACOBI_REL_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


# --------------------------------------------------------------------------
# cyclic Jacobi eigenvalues for real symmetric matrices
# --------------------------------------------------------------------------

def _jacobi_loop(a, rel_tol, max_sweeps):
    n = a.shape[0]
    a = a.copy()
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += a[i, j] * a[i, j]
    scale = np.sqrt(total)
    off = 0.0
    sweeps = 0
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j] * a[i, j]
        off = np.sqrt(off)
        if off <= rel_tol * scale or sweep == max_sweeps:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i]
    return np.sort(w), off, sweeps


def _jacobi_numpy(a, rel_tol, max_sweeps):
    n = a.shape[0]
    a = np.array(a, dtype=np.float64, copy=True)
    scale = np.linalg.norm(a)
    mask = ~np.eye(n, dtype=bool)
    sweeps = 0
    off = np.linalg.norm(a[mask])
    while off > rel_tol * scale and sweeps < max_sweeps:
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                a[:, p] = c * col_p - s * a[:, q]
                a[:, q] = s * col_p + c * a[:, q]
                row_p = a[p, :].copy()
                a[p, :] = c * row_p - s * a[q, :]
                a[q, :] = s * row_p + c * a[q, :]
        off = np.linalg.norm(a[mask])
    return np.sort(np.diag(a).copy()), off, sweeps


_jacobi_jit = njit(cache=True)(_jacobi_loop)


def jacobi_eigenvalues(a, rel_tol=JACOBI_REL_TOL, max_sweeps=JACOBI_MAX_SWEEPS, use_numba=None):
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.

    Returns ``(sorted eigenvalues, final off-diagonal norm, sweeps used)``.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.shape[0] == 0:
        return np.zeros(0), 0.0, 0
    if use_numba is None:
        use_numba = USE_NUMBA
    # normalise so squared norms neither underflow nor overflow
    s = float(np.max(np.abs(a)))
    if s == 0.0:
        return np.zeros(a.shape[0]), 0.0, 0
    a = a / s
    if use_numba and HAVE_NUMBA:
        w, off, sweeps = _jacobi_jit(a, rel_tol, max_sweeps)
    else:
        w, off, sweeps = _jacobi_numpy(a, rel_tol, max_sweeps)
    return w * s, float(off) * s, int(sweeps)


# --------------------------------------------------------------------------
# block Laplacian contraction  H = -sum_{ik} ginv[i, k] P_i P_k
# --------------------------------------------------------------------------

def _contract_loop(ginv, gens):
    m = gens.shape[0]
    d = gens.shape[1]
    out = np.zeros((d, d), dtype=np.complex128)
    for i in range(m):
        # T_i = sum_k ginv[i, k] P_k
        t = np.zeros((d, d), dtype=np.complex128)
        for k in range(m):
            w = ginv[i, k]
            if w != 0.0:
                for a in range(d):
                    for b in range(d):
                        t[a, b] += w * gens[k, a, b]
        for a in range(d):
            for c in range(d):
                acc = 0.0 + 0.0j
                for b in range(d):
                    acc += gens[i, a, b] * t[b, c]
                out[a, c] -= acc
    return out


def _contract_numpy(ginv, gens):
    weighted = np.tensordot(ginv, gens, axes=(1, 0))
    return -np.einsum("iab,ibc->ac", gens, weighted)


_contract_jit = njit(cache=True)(_contract_loop)


def laplace_contract(ginv, gens, use_numba=None):
    ginv = np.ascontiguousarray(ginv, dtype=np.float64)
    gens = np.ascontiguousarray(gens, dtype=np.complex128)
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba and HAVE_NUMBA:
        return _contract_jit(ginv, gens)
    return _contract_numpy(ginv, gens)
