"""Eigenvalue and eigenspace perturbation bounds for Hermitian matrices.

Classical comparators act on plain matrices; the combined bounds act on a
tracked :class:`~mptk.homotopy.EigPath` and its
:class:`~mptk.homotopy.GapProfile`.
"""

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from . import matcore
from .errors import NotInvariant, ShapeError
from .homotopy import EigPath
from .matcore import as_matrix, fro
from .reports import BoundId, BoundReport, weighted

INVARIANCE_RTOL = 1e-8
PAIRING_RTOL = 1e-9


def eig_term(w_tilde, w):
    """``||Eig(w_tilde) - Eig(w)||_F^2`` after sorting both nonincreasingly."""
    d = np.sort(np.asarray(w_tilde, dtype=float))[::-1] - np.sort(np.asarray(w, dtype=float))[::-1]
    return float(d @ d)


def _pair(A, At):
    A = as_matrix(A, "A")
    At = as_matrix(At, "At")
    if A.shape != At.shape:
        raise ShapeError(f"shape mismatch {A.shape} vs {At.shape}")
    return A, At


def hoffman_wielandt(A, At, squared=False):
    """``||Eig(At) - Eig(A)||_F <= ||At - A||_F``; both sides squared if asked."""
    A, At = _pair(A, At)
    lhs2 = eig_term(matcore.eigh_sorted(At).eigenvalues, matcore.eigh_sorted(A).eigenvalues)
    rhs2 = fro(At - A) ** 2
    if squared:
        return BoundReport(BoundId.HW, lhs2, rhs2, condition_note="squared",
                           components={"eigenvalue_term": lhs2})
    return BoundReport(BoundId.HW, math.sqrt(lhs2), math.sqrt(rhs2),
                       components={"eigenvalue_term": lhs2})


def _check_invariant(A, U, name):
    AU = A @ U
    L = U.conj().T @ AU
    if fro(AU - U @ L) > INVARIANCE_RTOL * max(fro(A), np.finfo(float).tiny):
        raise NotInvariant(f"{name} does not span an invariant subspace")
    return 0.5 * (L + L.conj().T)


def _multiset_remove(values, removed, tol):
    # Drop from ``values`` the nearest remaining match of every entry of ``removed``.
    rest = list(np.asarray(values, dtype=float))
    for x in removed:
        i = int(np.argmin(np.abs(np.asarray(rest) - x)))
        if abs(rest[i] - x) > tol:
            raise NotInvariant(f"eigenvalue {x!r} of the projected block is not in the spectrum")
        rest.pop(i)
    return np.array(rest)


@dataclass(frozen=True)
class _SubspaceSetup:
    lam: np.ndarray
    lam_tilde: np.ndarray
    delta12: float
    sin_fro: float
    sin_spec: float
    rhs_fro: float


def _subspace_setup(A, At, U1, U1t):
    A, At = _pair(A, At)
    U1 = as_matrix(U1, "U1")
    U1t = as_matrix(U1t, "U1t")
    if U1.shape[0] != A.shape[0]:
        raise ShapeError(f"U1 has {U1.shape[0]} rows, A is {A.shape[0]} x {A.shape[0]}")
    sin_fro, sin_spec, _ = matcore.sin_theta(U1, U1t)
    L = _check_invariant(A, U1, "U1")
    Lt = _check_invariant(At, U1t, "U1t")
    lam = matcore.eigh_sorted(L).eigenvalues
    lam_tilde = matcore.eigh_sorted(Lt).eigenvalues
    full = matcore.eigh_sorted(At).eigenvalues
    tol = PAIRING_RTOL * max(float(np.abs(full).max()), np.finfo(float).tiny)
    rest = _multiset_remove(full, lam_tilde, tol)
    if rest.size == 0:
        delta12 = math.inf
    else:
        delta12 = float(np.abs(lam[:, None] - rest[None, :]).min())
    return _SubspaceSetup(lam, lam_tilde, delta12, sin_fro, sin_spec, fro((At - A) @ U1))


def davis_kahan(A, At, U1, U1t):
    """``delta12 ||sin Theta(U1, U1t)||_F <= ||(At - A) U1||_F``.

    ``delta12`` separates the eigenvalues of ``U1^H A U1`` from the part of
    the spectrum of ``At`` not carried by ``U1t``; it is ``inf`` when ``U1t``
    spans the whole space.
    """
    s = _subspace_setup(A, At, U1, U1t)
    lhs = weighted(s.delta12, s.sin_fro)
    return BoundReport(
        BoundId.DK, lhs, s.rhs_fro, applicable=s.delta12 > 0,
        condition_note="requires delta12 > 0",
        components={"delta12": s.delta12, "sin_theta_fro": s.sin_fro},
    )


def li_sun_combined(A, At, U1, U1t):
    """Combined eigenvalue and eigenspace bound for a single invariant subspace."""
    s = _subspace_setup(A, At, U1, U1t)
    ev = eig_term(s.lam_tilde, s.lam)
    ev_weighted = (1.0 - s.sin_spec ** 2) * ev
    sub = weighted(s.delta12 ** 2, s.sin_fro ** 2)
    return BoundReport(
        BoundId.LISUN, ev_weighted + sub, s.rhs_fro ** 2, applicable=s.delta12 > 0,
        condition_note="requires delta12 > 0",
        components={"eigenvalue_term": ev_weighted, "subspace_term": sub,
                    "delta12": s.delta12, "sin_theta_spec": s.sin_spec},
    )


# --------------------------------------------------------------------------
# bounds along a tracked path


def basis_distance(path, j):
    """``||U_j(1) - U_j(0)||_F`` for the gauge-tracked bases."""
    return fro(path.basis(-1, j) - path.basis(0, j))


def block_sin_theta(path, j):
    return matcore._sin_theta(path.basis(0, j), path.basis(-1, j))


def combined_all_blocks(path: EigPath, gaps):
    """Eigenvalue term plus ``sum_j delta_{j,min}^2 ||U_j(1) - U_j(0)||_F^2``
    against ``||dA||_F^2``."""
    ev = eig_term(path.eigs[-1], path.eigs[0])
    comps = {"eigenvalue_term": ev}
    lhs = ev
    for j in range(path.partition.k):
        term = weighted(gaps.path_minima[j] ** 2, basis_distance(path, j) ** 2)
        comps[f"subspace_term_{j + 1}"] = term
        lhs += term
    rhs = fro(path.matrix(-1) - path.matrix(0)) ** 2
    return BoundReport(BoundId.COMBINED_ALL, lhs, rhs, components=comps)


def combined_single_block(path: EigPath, gaps, dA, block=0):
    """Single-block combined bound and its two sin-theta corollaries.

    Returns ``(main, sin_f, sin_only)``. All three require
    ``||dA||_2 < delta_{j,min}``.
    """
    dA = as_matrix(dA, "dA")
    j = block
    delta = float(gaps.path_minima[j])
    norm2 = matcore.matrix_norm(dA, "spectral")
    U1 = path.basis(0, j)
    rhs = fro(dA @ U1) ** 2
    applicable = norm2 < delta
    note = f"requires ||dA||_2 < delta_min ({norm2:.6g} vs {delta:.6g})"
    ev = eig_term(path.block_eigs(-1, j), path.block_eigs(0, j))
    ev_factor = (1.0 - norm2 / delta) ** 2 if delta > 0 else math.inf
    sub_factor = (delta - norm2) ** 2
    dist = basis_distance(path, j)
    sin_f = block_sin_theta(path, j)[0]

    ev_w = weighted(ev_factor, ev)
    main_sub = weighted(sub_factor, dist ** 2)
    main = BoundReport(
        BoundId.COMBINED_SINGLE, ev_w + main_sub, rhs, applicable, note,
        {"eigenvalue_term": ev_w, "subspace_term": main_sub, "delta_min": delta,
         "basis_distance": dist}, block=j)
    sin_sub = weighted(sub_factor, sin_f ** 2)
    cor_f = BoundReport(
        BoundId.COR_SIN_F, ev_w + sin_sub, rhs, applicable, note,
        {"eigenvalue_term": ev_w, "subspace_term": sin_sub, "sin_theta_fro": sin_f}, block=j)
    margin = delta - norm2
    if margin > 0:
        only_rhs = 0.0 if math.isinf(margin) else math.sqrt(rhs) / margin
    else:
        only_rhs = math.inf
    cor_only = BoundReport(
        BoundId.COR_SIN_ONLY, sin_f, only_rhs, applicable, note,
        {"sin_theta_fro": sin_f}, block=j)
    return main, cor_f, cor_only


@dataclass(frozen=True)
class DeltaTilde:
    """Per-block ``delta_tilde_j`` with the mixed gap and the eigenvalue correction."""

    per_block: np.ndarray
    mixed_gaps: np.ndarray
    corrections: np.ndarray
    clamped: List[int]


def delta_tilde(path: EigPath):
    """``delta_tilde_j^2 = delta_j^2 - ||Eig(Lambda_j(1)) - Eig(Lambda_j(0))||_F^2``.

    ``delta_j`` separates the t = 0 eigenvalues of block j from the t = 1
    eigenvalues of every other block. A negative square is reported as 0.
    """
    k = path.partition.k
    mixed = np.full(k, math.inf)
    corr = np.zeros(k)
    tilde = np.full(k, math.inf)
    clamped = []
    for j in range(k):
        lam0 = path.block_eigs(0, j)
        others = [path.block_eigs(-1, i) for i in range(k) if i != j]
        if others:
            rest = np.concatenate(others)
            mixed[j] = float(np.abs(lam0[:, None] - rest[None, :]).min())
        corr[j] = eig_term(path.block_eigs(-1, j), lam0)
        sq = mixed[j] ** 2 - corr[j]
        if sq < 0:
            clamped.append(j)
            sq = 0.0
        tilde[j] = math.sqrt(sq)
    return DeltaTilde(tilde, mixed, corr, clamped)


def total_bound(path: EigPath, A, At):
    """Eigenvalue term plus ``sum_j delta_tilde_j^2 ||sin Theta(U_j, U_j(1))||_2^2``."""
    A, At = _pair(A, At)
    ev = eig_term(matcore.eigh_sorted(At).eigenvalues, matcore.eigh_sorted(A).eigenvalues)
    dt = delta_tilde(path)
    comps = {"eigenvalue_term": ev}
    lhs = ev
    for j in range(path.partition.k):
        spec = block_sin_theta(path, j)[1]
        term = weighted(dt.per_block[j] ** 2, spec ** 2)
        comps[f"subspace_term_{j + 1}"] = term
        comps[f"delta_tilde_{j + 1}"] = float(dt.per_block[j])
        lhs += term
    note = ""
    if dt.clamped:
        note = "negative delta_tilde^2 set to 0 for blocks " + ",".join(str(j + 1) for j in dt.clamped)
    return BoundReport(BoundId.TOTAL_B, lhs, fro(At - A) ** 2, condition_note=note, components=comps)


def gap_lower_bound(gaps_at_zero, dA, tracked_minima=None):
    """Per-block prediction ``delta_{j,min} >= delta_j(0) - 2 ||dA||_2``.

    Each report has ``lhs`` = predicted lower bound and ``rhs`` = tracked
    path minimum (NaN when not supplied); ``applicable`` records whether the
    sufficient condition ``2 ||dA||_2 < delta_j(0)`` holds.
    """
    norm2 = matcore.matrix_norm(as_matrix(dA, "dA"), "spectral")
    reports = []
    for j, d0 in enumerate(np.asarray(gaps_at_zero, dtype=float)):
        tracked = math.nan if tracked_minima is None else float(tracked_minima[j])
        reports.append(BoundReport(
            BoundId.GAP_LOWER, float(d0 - 2.0 * norm2), tracked,
            applicable=bool(2.0 * norm2 < d0),
            condition_note="sufficient condition 2||dA||_2 < delta_j(0)",
            components={"delta_0": float(d0), "dA_spectral": norm2}, block=j))
    return reports


def mvt_check(path: EigPath, gaps, dA, block=0):
    """Single-block bound with rhs ``max_i ||dA U_j(t_i)||_F^2`` over the grid."""
    dA = as_matrix(dA, "dA")
    j = block
    ev = eig_term(path.block_eigs(-1, j), path.block_eigs(0, j))
    sub = weighted(float(gaps.path_minima[j]) ** 2, basis_distance(path, j) ** 2)
    sl = path.partition.slices()[j]
    prod = np.einsum("ab,tbr->tar", dA, path.bases[:, :, sl])
    per_t = (prod.real ** 2 + prod.imag ** 2).sum(axis=(1, 2))
    i0 = int(np.argmax(per_t))
    return BoundReport(
        BoundId.MVT, ev + sub, float(per_t[i0]),
        condition_note="rhs is the grid maximum of ||dA U_j(t)||_F^2",
        components={"eigenvalue_term": ev, "subspace_term": sub, "t0": float(path.t[i0])},
        block=j)
