"""Singular value and singular subspace perturbation bounds for general matrices."""

import math

import numpy as np

from . import matcore
from .bounds_eig import eig_term
from .errors import ShapeError
from .homotopy import SvdPath
from .matcore import as_matrix, fro
from .reports import BoundId, BoundReport, weighted


def mirsky(B, Bt, squared=False):
    """``||Sing(Bt) - Sing(B)||_F <= ||Bt - B||_F``; both sides squared if asked."""
    B = as_matrix(B, "B")
    Bt = as_matrix(Bt, "Bt")
    if B.shape != Bt.shape:
        raise ShapeError(f"shape mismatch {B.shape} vs {Bt.shape}")
    lhs2 = eig_term(matcore.singular_values(Bt), matcore.singular_values(B))
    rhs2 = fro(Bt - B) ** 2
    if squared:
        return BoundReport(BoundId.MIRSKY, lhs2, rhs2, condition_note="squared",
                           components={"singular_value_term": lhs2})
    return BoundReport(BoundId.MIRSKY, math.sqrt(lhs2), math.sqrt(rhs2),
                       components={"singular_value_term": lhs2})


def left_distance(path, j):
    return fro(path.left(-1, j) - path.left(0, j))


def right_distance(path, j):
    return fro(path.right(-1, j) - path.right(0, j))


def combined_all_svd(path: SvdPath, gaps):
    """Singular value term plus weighted left, right and null-space basis changes.

    For m > n the left blocks carry ``rho_hat_{j,min}^2 / 2``, the null-space
    block ``sigma_min^2 / 2`` and the right blocks ``rho_{j,min}^2 / 2``; for
    m == n both factors carry ``rho_{j,min}^2 / 2``.
    """
    sv = eig_term(path.sings[-1], path.sings[0])
    comps = {"singular_value_term": sv}
    lhs = sv
    for j in range(path.partition.k):
        rho = float(gaps.rho.path_minima[j])
        w_weight = float(gaps.rho_hat.path_minima[j]) if path.tall else rho
        wt = weighted(w_weight ** 2 / 2, left_distance(path, j) ** 2)
        vt = weighted(rho ** 2 / 2, right_distance(path, j) ** 2)
        comps[f"left_term_{j + 1}"] = wt
        comps[f"right_term_{j + 1}"] = vt
        lhs += wt + vt
    if path.tall:
        nt = weighted(gaps.sigma_min ** 2 / 2, left_distance(path, path.partition.k) ** 2)
        comps["null_term"] = nt
        lhs += nt
    rhs = fro(path.matrix(-1) - path.matrix(0)) ** 2
    return BoundReport(BoundId.SVD_COMBINED_ALL, lhs, rhs, components=comps)


def _single_setup(path, gaps, dB, j):
    dB = as_matrix(dB, "dB")
    norm2 = matcore.matrix_norm(dB, "spectral")
    rho = float(gaps.rho.path_minima[j])
    rho_hat = float(gaps.rho_hat.path_minima[j]) if path.tall else rho
    W1, V1 = path.left(0, j), path.right(0, j)
    base_rhs = fro(dB @ V1) ** 2 + fro(W1.conj().T @ dB) ** 2
    sv = eig_term(path.block_sings(-1, j), path.block_sings(0, j))
    return dB, norm2, rho, rho_hat, base_rhs, sv


def combined_single_svd(path: SvdPath, gaps, dB, block=0):
    """Single-block combined bound and its sin-theta corollary.

    Returns ``(main, sin)``. Requires ``||dB||_2 < rho_hat_{j,min}`` for
    m > n and ``||dB||_2 < rho_{j,min}`` for m == n.
    """
    j = block
    dB, norm2, rho, rho_hat, base_rhs, sv = _single_setup(path, gaps, dB, j)
    dw, dv = left_distance(path, j), right_distance(path, j)
    sw, sv_ = (matcore._sin_theta(path.left(0, j), path.left(-1, j))[0],
               matcore._sin_theta(path.right(0, j), path.right(-1, j))[0])
    comps = {"rho_min": rho, "rho_hat_min": rho_hat, "dB_spectral": norm2}
    if path.tall:
        applicable = norm2 < rho_hat
        note = f"requires ||dB||_2 < rho_hat_min ({norm2:.6g} vs {rho_hat:.6g})"
        if rho_hat > norm2:
            factor = 1.0 if math.isinf(rho_hat) else (rho_hat / (rho_hat - norm2)) ** 2
        else:
            factor = math.inf
        rhs = weighted(factor, base_rhs)
        sv_w = 2.0 * sv

        def lhs_of(a, b):
            return sv_w + weighted(rho_hat ** 2, a ** 2) + weighted(rho ** 2, b ** 2)
    else:
        applicable = norm2 < rho
        note = f"requires ||dB||_2 < rho_min ({norm2:.6g} vs {rho:.6g})"
        rhs = base_rhs
        sv_w = weighted(2.0 * ((1.0 - norm2 / rho) ** 2 if rho > 0 else math.inf), sv)

        def lhs_of(a, b):
            return sv_w + weighted((rho - norm2) ** 2, a ** 2 + b ** 2)
    main = BoundReport(
        BoundId.SVD_COMBINED_SINGLE, lhs_of(dw, dv), rhs, applicable, note,
        dict(comps, singular_value_term=sv_w, left_distance=dw, right_distance=dv), block=j)
    sin = BoundReport(
        BoundId.SVD_COR_SIN, lhs_of(sw, sv_), rhs, applicable, note,
        dict(comps, singular_value_term=sv_w, left_sin_theta=sw, right_sin_theta=sv_), block=j)
    return main, sin


def svd_gap_lower_bound(rho0, sigma0, dB, tracked_rho_hat=None, tracked_rho=None):
    """Per-block sufficient conditions and predicted gap lower bounds.

    Each report has ``lhs`` = predicted lower bound
    ``min(rho_j(0) - 2||dB||_2, sigma_{j,min}(0) - ||dB||_2)`` on
    ``rho_hat_{j,min}`` and ``rhs`` = the tracked value (NaN when not given).
    ``applicable`` records ``||dB||_2 <= min(rho_j(0)/2, sigma_{j,min}(0))``;
    the two local conditions are stored as 0/1 components.
    """
    norm2 = matcore.matrix_norm(as_matrix(dB, "dB"), "spectral")
    reports = []
    for j, (r0, s0) in enumerate(zip(np.asarray(rho0, float), np.asarray(sigma0, float))):
        comps = {
            "rho_0": float(r0), "sigma_min_0": float(s0), "dB_spectral": norm2,
            "predicted_rho_min": float(r0 - 2.0 * norm2),
            "local_condition": float(norm2 < min(r0 / 3.0, s0 / 2.0)),
            "rho_condition": float(r0 > 3.0 * norm2),
        }
        if tracked_rho is not None:
            comps["tracked_rho_min"] = float(tracked_rho[j])
        tracked = math.nan if tracked_rho_hat is None else float(tracked_rho_hat[j])
        reports.append(BoundReport(
            BoundId.SVD_GAP_LOWER, float(min(r0 - 2.0 * norm2, s0 - norm2)), tracked,
            applicable=bool(norm2 <= min(r0 / 2.0, s0)),
            condition_note="sufficient condition ||dB||_2 <= min(rho_j(0)/2, sigma_j,min(0))",
            components=comps, block=j))
    return reports


def svd_mvt_check(path: SvdPath, gaps, dB, block=0):
    """Single-block bound with rhs the grid maximum of
    ``||dB V_j(t)||_F^2 + ||W_j(t)^H dB||_F^2``."""
    j = block
    dB, _, rho, rho_hat, _, sv = _single_setup(path, gaps, dB, j)
    dw, dv = left_distance(path, j), right_distance(path, j)
    w_weight = rho_hat if path.tall else rho
    lhs = 2.0 * sv + weighted(w_weight ** 2, dw ** 2) + weighted(rho ** 2, dv ** 2)
    sl = path.partition.slices()[j]
    right = np.einsum("ab,tbr->tar", dB, path.rights[:, :, sl])
    left = np.einsum("tar,ab->trb", path.lefts[:, :, sl].conj(), dB)
    per_t = ((right.real ** 2 + right.imag ** 2).sum(axis=(1, 2))
             + (left.real ** 2 + left.imag ** 2).sum(axis=(1, 2)))
    i0 = int(np.argmax(per_t))
    return BoundReport(
        BoundId.SVD_MVT, lhs, float(per_t[i0]),
        condition_note="rhs is the grid maximum of ||dB V_j(t)||_F^2 + ||W_j(t)^H dB||_F^2",
        components={"singular_value_term": 2.0 * sv, "t0": float(path.t[i0])}, block=j)
