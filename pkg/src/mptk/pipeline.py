"""End-to-end verification: track a path, profile its gaps, evaluate every bound.

The command line front end and the randomized suites both go through these
two functions, so their numbers agree bit for bit.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

from . import bounds_eig as be
from . import bounds_svd as bs
from . import homotopy, matcore
from .reports import BoundId, BoundReport


@dataclass
class Verification:
    """Everything computed for one (matrix, perturbation, partition) instance."""

    kind: str
    path: object
    gaps: object
    reports: List[BoundReport]
    endpoint: List[Dict[str, float]]
    gauge_residual: float
    gauge_min_eig: float
    squared_classical: Optional[BoundReport] = None
    extras: Dict[str, float] = field(default_factory=dict)

    @property
    def violations(self):
        return [r for r in self.reports if not r.satisfied]

    @property
    def ok(self):
        return not self.violations

    def by_id(self, bound_id):
        return [r for r in self.reports if r.bound_id == BoundId(bound_id)]


def _blocks(k, target_block):
    if target_block is None:
        return range(k)
    if not 0 <= target_block < k:
        raise ValueError(f"target block {target_block + 1} outside 1..{k}")
    return [target_block]


def eig_verify(A, dA, partition, grid_points=homotopy.DEFAULT_GRID, target_block=None,
               adaptive=True):
    """Run every Hermitian bound on the path ``A + t dA``.

    ``target_block`` (0-based) restricts the single-block bounds to one block;
    by default every block is evaluated.
    """
    path = homotopy.track_eig_path(A, dA, partition, grid_points, adaptive=adaptive)
    gaps = homotopy.gap_profile_eig(path)
    # Endpoints exactly as tracked, so shared terms agree bitwise across bounds.
    A0, A1 = path.matrix(0), path.matrix(-1)
    dA = path.dA
    k = path.partition.k
    reports = [be.hoffman_wielandt(A0, A1)]
    hw2 = be.hoffman_wielandt(A0, A1, squared=True)
    blocks = _blocks(k, target_block)
    for j in blocks:
        U, Ut = path.basis(0, j), path.basis(-1, j)
        reports.append(_with_block(be.davis_kahan(A0, A1, U, Ut), j))
        reports.append(_with_block(be.li_sun_combined(A0, A1, U, Ut), j))
    reports.append(be.combined_all_blocks(path, gaps))
    for j in blocks:
        reports.extend(be.combined_single_block(path, gaps, dA, block=j))
    reports.append(be.total_bound(path, A0, A1))
    for j in blocks:
        reports.append(be.mvt_check(path, gaps, dA, block=j))
    reports.extend(be.gap_lower_bound(gaps.per_block_gaps[:, 0], dA, gaps.path_minima))
    endpoint = []
    for j in range(k):
        endpoint.append({
            "block": j,
            "basis_distance": be.basis_distance(path, j),
            "sin_theta_fro": be.block_sin_theta(path, j)[0],
        })
    herm, mineig = homotopy.eig_gauge_check(path)
    return Verification("hermitian", path, gaps, reports, endpoint, herm, mineig,
                        squared_classical=hw2,
                        extras={"perturbation_spectral": matcore.matrix_norm(dA, "spectral")})


def svd_verify(B, dB, partition, grid_points=homotopy.DEFAULT_GRID, target_block=None,
               adaptive=True):
    """Run every singular value bound on the path ``B + t dB`` (m >= n)."""
    path = homotopy.track_svd_path(B, dB, partition, grid_points, adaptive=adaptive)
    gaps = homotopy.gap_profile_svd(path)
    B0, B1 = path.matrix(0), path.matrix(-1)
    dB = path.dB
    k = path.partition.k
    reports = [bs.mirsky(B0, B1)]
    mirsky2 = bs.mirsky(B0, B1, squared=True)
    reports.append(bs.combined_all_svd(path, gaps))
    blocks = _blocks(k, target_block)
    for j in blocks:
        reports.extend(bs.combined_single_svd(path, gaps, dB, block=j))
    for j in blocks:
        reports.append(bs.svd_mvt_check(path, gaps, dB, block=j))
    reports.extend(bs.svd_gap_lower_bound(
        gaps.rho.per_block_gaps[:, 0], gaps.sigma_block.per_block_gaps[:, 0], dB,
        tracked_rho_hat=gaps.rho_hat.path_minima, tracked_rho=gaps.rho.path_minima))
    endpoint = []
    for j in range(k):
        endpoint.append({
            "block": j,
            "left_distance": bs.left_distance(path, j),
            "left_sin_theta_fro": matcore._sin_theta(path.left(0, j), path.left(-1, j))[0],
            "right_distance": bs.right_distance(path, j),
            "right_sin_theta_fro": matcore._sin_theta(path.right(0, j), path.right(-1, j))[0],
        })
    if path.tall:
        endpoint.append({
            "block": k,
            "left_distance": bs.left_distance(path, k),
            "left_sin_theta_fro": matcore._sin_theta(path.left(0, k), path.left(-1, k))[0],
        })
    herm, mineig = homotopy.svd_gauge_check(path)
    return Verification("general", path, gaps, reports, endpoint, herm, mineig,
                        squared_classical=mirsky2,
                        extras={"perturbation_spectral": matcore.matrix_norm(dB, "spectral")})


def _with_block(report, j):
    return replace(report, block=j)
