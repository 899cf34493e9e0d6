"""Dense complex matrix kernel: sorted Hermitian eigendecomposition, sorted SVD,
norms and canonical angles.

Both factorizations are Jacobi methods (two-sided for the Hermitian
eigenproblem, one-sided Hestenes for the SVD) compiled with numba. Outputs are
sorted nonincreasingly and every column is phase-normalized so that its
largest-magnitude entry is real and nonnegative, which makes results
deterministic.
"""

from dataclasses import dataclass

import numba
import numpy as np

from .errors import (NonFinite, NotHermitian, NotOrthonormal, NotSquare,
                     RankMismatch, ShapeError)

EPS = np.finfo(np.float64).eps
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 30
HERMITIAN_TOL = 1e-12
ORTHONORMAL_TOL = 1e-10


@numba.njit(cache=True)
def _rotation(app, aqq, apq):
    # Complex Jacobi rotation J = [[c, s*ph], [-s*conj(ph), c]] that zeroes the
    # (p, q) entry of the Hermitian 2x2 block [[app, apq], [conj(apq), aqq]].
    g = abs(apq)
    ph = apq / g
    zeta = (aqq - app) / (2.0 * g)
    if zeta >= 0.0:
        t = 1.0 / (zeta + np.sqrt(1.0 + zeta * zeta))
    else:
        t = -1.0 / (-zeta + np.sqrt(1.0 + zeta * zeta))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    return c, s, t, ph


@numba.njit(cache=True)
def _jacobi_eigh(a, tol, max_sweeps):
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    fro2 = 0.0
    for i in range(n):
        for j in range(n):
            fro2 += a[i, j].real ** 2 + a[i, j].imag ** 2
    target = tol * np.sqrt(fro2)
    skip = 0.1 * target / max(n, 1)
    sweeps = 0
    while sweeps < max_sweeps:
        off2 = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off2 += a[p, q].real ** 2 + a[p, q].imag ** 2
        if np.sqrt(2.0 * off2) <= target:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                g = abs(apq)
                if g <= skip or g == 0.0:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                c, s, t, ph = _rotation(app, aqq, apq)
                sp = s * ph
                spc = s * np.conj(ph)
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - spc * akq
                    a[k, q] = sp * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - sp * aqk
                    a[q, k] = spc * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = app - t * g
                a[q, q] = aqq + t * g
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - spc * vkq
                    v[k, q] = sp * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i].real
    return w, v, sweeps


@numba.njit(cache=True)
def _jacobi_svd(b, tol, max_sweeps):
    # One-sided (Hestenes) Jacobi: rotate columns of g = b until pairwise
    # orthogonal; then g = U diag(sig) and b = g v^H.
    m, n = b.shape
    g = b.copy()
    v = np.eye(n, dtype=np.complex128)
    fro2 = 0.0
    for i in range(m):
        for j in range(n):
            fro2 += g[i, j].real ** 2 + g[i, j].imag ** 2
    floor = (max(m, n) * 2.220446049250313e-16) ** 2 * fro2
    sweeps = 0
    while sweeps < max_sweeps:
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0j
                for k in range(m):
                    gp = g[k, p]
                    gq = g[k, q]
                    alpha += gp.real ** 2 + gp.imag ** 2
                    beta += gq.real ** 2 + gq.imag ** 2
                    gamma += np.conj(gp) * gq
                if alpha <= floor or beta <= floor:
                    continue
                if abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                c, s, t, ph = _rotation(alpha, beta, gamma)
                sp = s * ph
                spc = s * np.conj(ph)
                for k in range(m):
                    gkp = g[k, p]
                    gkq = g[k, q]
                    g[k, p] = c * gkp - spc * gkq
                    g[k, q] = sp * gkp + c * gkq
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - spc * vkq
                    v[k, q] = sp * vkp + c * vkq
        sweeps += 1
        if not rotated:
            break
    sig = np.empty(n)
    for j in range(n):
        acc = 0.0
        for k in range(m):
            acc += g[k, j].real ** 2 + g[k, j].imag ** 2
        sig[j] = np.sqrt(acc)
    return g, sig, v


@dataclass(frozen=True)
class SpectralDecomposition:
    """``A = basis @ diag(eigenvalues) @ basis^H`` with eigenvalues nonincreasing."""

    eigenvalues: np.ndarray
    basis: np.ndarray


@dataclass(frozen=True)
class SingularDecomposition:
    """``B = left @ [diag(singulars); 0] @ right^H`` with singulars nonincreasing."""

    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray


def _frozen(x):
    x.flags.writeable = False
    return x


def as_matrix(M, name="matrix"):
    """Return ``M`` as a finite 2-D complex128 array (copy)."""
    M = np.array(M, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise ShapeError(f"{name} must be a nonempty 2-D array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NonFinite(f"{name} has NaN or Inf entries")
    return M


def fro(M):
    return float(np.sqrt(np.sum(M.real ** 2 + M.imag ** 2)))


def phase_fix(X):
    """Rotate each column by a unit scalar so its largest entry is real >= 0.

    Ties in magnitude (to 1e-12 relative) go to the lowest row index.
    """
    X = np.array(X, dtype=np.complex128)
    return X * _column_phases(X)


@numba.njit(cache=True)
def _column_phases(X):
    # Conjugate unit phase of each column's pivot (largest entry, lowest row
    # on ties); multiplying the column by it makes the pivot real >= 0.
    rows, cols = X.shape
    ph = np.ones(cols, dtype=np.complex128)
    for j in range(cols):
        top = 0.0
        for i in range(rows):
            top = max(top, abs(X[i, j]))
        if top == 0.0:
            continue
        for i in range(rows):
            if abs(X[i, j]) >= top * (1.0 - 1e-12):
                ph[j] = np.conj(X[i, j] / abs(X[i, j]))
                break
    return ph


@numba.njit(cache=True)
def _scale_columns(X, ph):
    for j in range(X.shape[1]):
        for i in range(X.shape[0]):
            X[i, j] *= ph[j]


@numba.njit(cache=True)
def _eigh_kernel(a):
    w, v, _ = _jacobi_eigh(a, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    order = np.argsort(-w, kind="mergesort")
    w = w[order]
    v = v[:, order]
    _scale_columns(v, _column_phases(v))
    return w, v


@numba.njit(cache=True)
def _svd_kernel(b):
    m, n = b.shape
    g, sig, v = _jacobi_svd(b, max(m, n) * EPS, JACOBI_MAX_SWEEPS)
    order = np.argsort(-sig, kind="mergesort")
    sig = sig[order]
    g = g[:, order]
    v = v[:, order]
    # Right vectors get the phase convention; left vectors inherit it.
    ph = _column_phases(v)
    _scale_columns(v, ph)
    _scale_columns(g, ph)
    cutoff = max(m, n) * EPS * sig[0]
    rank = 0
    if sig[0] > 0.0:
        for j in range(n):
            if sig[j] > cutoff:
                rank += 1
    u = np.empty((m, rank), dtype=np.complex128)
    for j in range(rank):
        for i in range(m):
            u[i, j] = g[i, j] / sig[j]
    # One modified Gram-Schmidt pass against roundoff in small columns.
    for j in range(1, rank):
        for p in range(j):
            d = 0.0j
            for i in range(m):
                d += np.conj(u[i, p]) * u[i, j]
            for i in range(m):
                u[i, j] -= d * u[i, p]
        nrm = 0.0
        for i in range(m):
            nrm += u[i, j].real ** 2 + u[i, j].imag ** 2
        nrm = np.sqrt(nrm)
        for i in range(m):
            u[i, j] /= nrm
    return u, sig, v, rank


def _eigh(a):
    # Unchecked fast path: a is complex128 and Hermitian.
    return _eigh_kernel(a.copy())


def _complete_basis(U, m):
    # Householder QR of the range basis: the trailing columns of the complete
    # Q are an orthonormal basis of the orthogonal complement.
    r = U.shape[1]
    if r == 0:
        return np.eye(m, dtype=np.complex128)
    Q, _ = np.linalg.qr(U, mode="complete")
    W = np.empty((m, m), dtype=np.complex128)
    W[:, :r] = U
    W[:, r:] = phase_fix(Q[:, r:])
    return W


def _svd(b):
    # Unchecked fast path for complex128 input with m >= n.
    m = b.shape[0]
    u, sig, v, rank = _svd_kernel(b)
    W = u if rank == m else _complete_basis(u, m)
    return W, sig, v


def eigh_sorted(A):
    """Hermitian eigendecomposition with eigenvalues in nonincreasing order.

    Parameters
    ----------
    A : array_like, (n, n)
        Hermitian matrix. Asymmetry up to ``1e-12 * ||A||_F`` is tolerated and
        removed by symmetrization.

    Returns
    -------
    SpectralDecomposition
    """
    A = as_matrix(A, "A")
    if A.shape[0] != A.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {A.shape}")
    scale = fro(A)
    if fro(A - A.conj().T) > HERMITIAN_TOL * scale:
        raise NotHermitian("matrix is not Hermitian within 1e-12 relative")
    A = 0.5 * (A + A.conj().T)
    w, v = _eigh(A)
    return SpectralDecomposition(_frozen(w), _frozen(v))


def svd_sorted(B):
    """Full SVD of an m x n matrix (m >= n), singular values nonincreasing.

    The left factor is completed to an m x m unitary by Gram-Schmidt on the
    standard basis; columns attached to zero singular values come from that
    completion.
    """
    B = as_matrix(B, "B")
    m, n = B.shape
    if m < n:
        raise ShapeError(f"svd_sorted needs m >= n, got {m} x {n}; transpose first")
    W, s, V = _svd(B)
    return SingularDecomposition(_frozen(W), _frozen(s), _frozen(V))


def singular_values(B):
    """Singular values only, nonincreasing; any shape."""
    B = as_matrix(B, "B")
    if B.shape[0] < B.shape[1]:
        B = B.conj().T
    _, sig, _ = _jacobi_svd(B, max(B.shape) * EPS, JACOBI_MAX_SWEEPS)
    return np.sort(sig)[::-1]


def matrix_norm(M, kind="frobenius"):
    """Frobenius or spectral norm."""
    M = as_matrix(M, "M")
    if kind in ("frobenius", "fro"):
        return fro(M)
    if kind in ("spectral", "2"):
        return float(singular_values(M)[0])
    raise ValueError(f"unknown norm kind {kind!r}")


def check_orthonormal(U, name="basis", tol=ORTHONORMAL_TOL):
    r = U.shape[1]
    if fro(U.conj().T @ U - np.eye(r)) > tol * max(1, r):
        raise NotOrthonormal(f"{name} does not have orthonormal columns")


def sin_theta(U1, U1t):
    """Sines of the canonical angles between ``range(U1)`` and ``range(U1t)``.

    Returns ``(fro, spec, angle_sines)`` where ``angle_sines`` is ascending
    (paired with the cosines in nonincreasing order).

    The sines are the singular values of ``(I - U1 U1^H) U1t``. This equals
    ``sqrt(1 - cos^2)`` with the cosines clamped to [0, 1], but keeps full
    absolute accuracy for small angles where the cosine form loses half the
    digits.
    """
    U1 = as_matrix(U1, "U1")
    U1t = as_matrix(U1t, "U1t")
    if U1.shape[0] != U1t.shape[0]:
        raise ShapeError("bases live in different ambient dimensions")
    if U1.shape[1] != U1t.shape[1]:
        raise RankMismatch(f"subspace dimensions differ: {U1.shape[1]} vs {U1t.shape[1]}")
    check_orthonormal(U1, "U1")
    check_orthonormal(U1t, "U1t")
    return _sin_theta(U1, U1t)


def _sin_theta(U1, U1t):
    if U1.shape[1] == U1.shape[0] or np.array_equal(U1, U1t):
        # Same subspace (or the whole space): every angle is zero.
        return 0.0, 0.0, np.zeros(U1.shape[1])
    proj = U1t - U1 @ (U1.conj().T @ U1t)
    _, sig, _ = _jacobi_svd(proj, max(proj.shape) * EPS, JACOBI_MAX_SWEEPS)
    sines = np.minimum(np.sort(sig), 1.0)
    return float(np.sqrt(np.sum(sines ** 2))), float(sines.max(initial=0.0)), sines
