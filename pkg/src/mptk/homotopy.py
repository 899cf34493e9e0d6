"""Tracking of block decompositions along the affine paths A + t dA and B + t dB.

The bases are transported with a discrete gauge: at each grid step every block
basis is rotated inside its own span by the orthogonal Procrustes solution
against the previous sample. The first-order optimality condition of that
problem is ``U_j^H dU_j/dt = 0``, so on refinement the tracked bases converge
to the unique analytic bases satisfying that condition.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numba
import numpy as np

from . import matcore
from .errors import CountMismatch, RankCollapse, ShapeError
from .matcore import EPS, JACOBI_MAX_SWEEPS, as_matrix, fro

DEFAULT_GRID = 1025
# Steps whose subspaces turn by more than ~2.6 degrees are bisected.
STEP_MIN_COS = 0.999
MIN_STEP = 2.0 ** -40
COLLAPSE_TOL = 1e-8
AMBIGUITY_RTOL = 1e-12
ZERO_GAP_RTOL = 1e-12
CONTINUITY_C = 2.0
DIP_RATIO = 0.25


@dataclass(frozen=True)
class BlockPartition:
    """Ordered block sizes ``(r_1, ..., r_k)``."""

    sizes: Tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(r) for r in self.sizes)
        if not sizes or any(r < 1 for r in sizes):
            raise CountMismatch(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def parse(cls, text):
        try:
            return cls(tuple(int(x) for x in str(text).split(",") if x.strip()))
        except ValueError as exc:
            raise CountMismatch(f"malformed partition {text!r}") from exc

    @property
    def k(self):
        return len(self.sizes)

    @property
    def n(self):
        return sum(self.sizes)

    @property
    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.sizes)]).astype(np.int64)

    def slices(self):
        off = self.offsets
        return [slice(int(off[j]), int(off[j + 1])) for j in range(self.k)]

    def check(self, n):
        if self.n != n:
            raise CountMismatch(f"partition {self.sizes} sums to {self.n}, matrix dimension is {n}")

    def __str__(self):
        return ",".join(str(r) for r in self.sizes)


@dataclass(frozen=True)
class EigPathSample:
    t: float
    basis_blocks: List[np.ndarray]
    lambda_blocks: List[np.ndarray]
    block_eigs: List[np.ndarray]


@dataclass(frozen=True)
class SvdPathSample:
    t: float
    left_blocks: List[np.ndarray]
    right_blocks: List[np.ndarray]
    sigma_blocks: List[np.ndarray]
    block_sings: List[np.ndarray]


@dataclass
class PathMeta:
    """Diagnostics collected while tracking."""

    grid_points: int
    adaptive_insertions: int = 0
    step_refinements: int = 0
    block_ambiguity: List[Tuple[int, int]] = field(default_factory=list)
    discontinuities: List[int] = field(default_factory=list)
    continuity_flags: List[Tuple[int, int]] = field(default_factory=list)
    gauge_residual: float = 0.0
    min_step_cos: float = 1.0


@dataclass(frozen=True)
class EigPath:
    """Samples of ``A(t) = A + t dA``; bases are stored block-ordered.

    ``bases[i]`` is ``[U_1(t_i), ..., U_k(t_i)]`` and ``eigs[i]`` holds the
    matching eigenvalues, each block sorted nonincreasingly.
    """

    t: np.ndarray
    bases: np.ndarray
    eigs: np.ndarray
    partition: BlockPartition
    A: np.ndarray
    dA: np.ndarray
    meta: PathMeta

    def __len__(self):
        return len(self.t)

    def basis(self, i, j):
        return self.bases[i][:, self.partition.slices()[j]]

    def block_eigs(self, i, j):
        return self.eigs[i][self.partition.slices()[j]]

    def matrix(self, i):
        return self.A + self.t[i] * self.dA

    def lambda_block(self, i, j):
        U = self.basis(i, j)
        L = U.conj().T @ self.matrix(i) @ U
        return 0.5 * (L + L.conj().T)

    def sample(self, i):
        k = self.partition.k
        return EigPathSample(
            t=float(self.t[i]),
            basis_blocks=[self.basis(i, j) for j in range(k)],
            lambda_blocks=[self.lambda_block(i, j) for j in range(k)],
            block_eigs=[self.block_eigs(i, j) for j in range(k)],
        )

    @property
    def samples(self):
        return [self.sample(i) for i in range(len(self.t))]


@dataclass(frozen=True)
class SvdPath:
    """Samples of ``B(t) = B + t dB``.

    ``lefts[i]`` is ``[W_1, ..., W_k, W_{k+1}]`` (the last block, of width
    m - n, spans the null space of ``B(t)^H`` and is absent when m == n);
    ``rights[i]`` is ``[V_1, ..., V_k]``.
    """

    t: np.ndarray
    lefts: np.ndarray
    rights: np.ndarray
    sings: np.ndarray
    partition: BlockPartition
    B: np.ndarray
    dB: np.ndarray
    meta: PathMeta

    def __len__(self):
        return len(self.t)

    @property
    def m(self):
        return self.B.shape[0]

    @property
    def n(self):
        return self.B.shape[1]

    @property
    def tall(self):
        return self.m > self.n

    def left(self, i, j):
        if j == self.partition.k:
            return self.lefts[i][:, self.n:]
        return self.lefts[i][:, self.partition.slices()[j]]

    def right(self, i, j):
        return self.rights[i][:, self.partition.slices()[j]]

    def block_sings(self, i, j):
        return self.sings[i][self.partition.slices()[j]]

    def matrix(self, i):
        return self.B + self.t[i] * self.dB

    def sigma_block(self, i, j):
        return self.left(i, j).conj().T @ self.matrix(i) @ self.right(i, j)

    def sample(self, i):
        k = self.partition.k
        nblocks = k + 1 if self.tall else k
        return SvdPathSample(
            t=float(self.t[i]),
            left_blocks=[self.left(i, j) for j in range(nblocks)],
            right_blocks=[self.right(i, j) for j in range(k)],
            sigma_blocks=[self.sigma_block(i, j) for j in range(k)],
            block_sings=[self.block_sings(i, j) for j in range(k)],
        )

    @property
    def samples(self):
        return [self.sample(i) for i in range(len(self.t))]


@dataclass(frozen=True)
class GapProfile:
    """Per-block gap values on the grid and their minima over the path.

    ``per_block_gaps[j, i]`` is the gap of block j at ``grid[i]``. ``inf``
    marks the unconstrained single-block case.
    """

    grid: np.ndarray
    per_block_gaps: np.ndarray
    path_minima: np.ndarray
    resolution: float
    sigma_min: Optional[float] = None


@dataclass(frozen=True)
class SvdGapProfile:
    rho: GapProfile
    rho_hat: GapProfile
    sigma_block: GapProfile
    sigma_min: float
    square: bool


# --------------------------------------------------------------------------
# block assignment and alignment


def assign_to_blocks(prev_block_values, new_values):
    """Distribute ``new_values`` over blocks with fixed cardinalities.

    Minimizes the total ``|new - matched prev|`` over all size-respecting
    assignments. In one dimension this cost is minimized by the monotone
    (rank-to-rank) matching, which is what is returned; slots holding equal
    previous values are ordered by block index, so smaller new values go to
    the earlier block on ties.

    Returns a list of index arrays into ``new_values``, one per block, each
    ordered by nonincreasing value.
    """
    prev = [np.atleast_1d(np.asarray(p, dtype=float)).ravel() for p in prev_block_values]
    new = np.atleast_1d(np.asarray(new_values, dtype=float)).ravel()
    sizes = [len(p) for p in prev]
    if sum(sizes) != len(new):
        raise CountMismatch(f"{sum(sizes)} previous values but {len(new)} new values")
    if not prev:
        return []
    slot_vals = np.concatenate(prev)
    if np.all(slot_vals[1:] < slot_vals[:-1]) and np.all(new[1:] < new[:-1]):
        # Both strictly decreasing: rank matching is consecutive slices.
        cuts = np.cumsum(sizes)
        return [np.arange(c - r, c) for c, r in zip(cuts, sizes)]
    slot_block = np.repeat(np.arange(len(prev)), sizes)
    slot_order = np.lexsort((slot_block, slot_vals))
    new_order = np.lexsort((np.arange(len(new)), new))
    owner = np.empty(len(new), dtype=np.int64)
    owner[new_order] = slot_block[slot_order]
    groups = []
    for j in range(len(prev)):
        idx = np.flatnonzero(owner == j)
        groups.append(idx[np.argsort(-new[idx], kind="stable")])
    return groups


@numba.njit(cache=True)
def _polar_align(Y, prev, offsets, collapse_tol):
    # For each column block b: aligned_b = Y_b polar(Y_b^H prev_b). A block as
    # wide as the ambient space is carried over unchanged.
    rows, cols = Y.shape
    out = np.empty((rows, cols), dtype=np.complex128)
    nb = offsets.shape[0] - 1
    smin = np.ones(nb)
    herm = 0.0
    for b in range(nb):
        lo = offsets[b]
        hi = offsets[b + 1]
        r = hi - lo
        if r == rows:
            for i in range(rows):
                for j in range(lo, hi):
                    out[i, j] = prev[i, j]
            continue
        M = np.zeros((r, r), dtype=np.complex128)
        for p in range(r):
            for q in range(r):
                acc = 0.0j
                for i in range(rows):
                    acc += np.conj(Y[i, lo + p]) * prev[i, lo + q]
                M[p, q] = acc
        g, sig, z = matcore._jacobi_svd(M, r * EPS, JACOBI_MAX_SWEEPS)
        s = sig.min()
        smin[b] = s
        if s <= collapse_tol:
            continue
        P = np.zeros((r, r), dtype=np.complex128)
        for p in range(r):
            for q in range(r):
                acc = 0.0j
                for c in range(r):
                    acc += g[p, c] / sig[c] * np.conj(z[q, c])
                P[p, q] = acc
        for i in range(rows):
            for q in range(r):
                acc = 0.0j
                for p in range(r):
                    acc += Y[i, lo + p] * P[p, q]
                out[i, lo + q] = acc
        # Gauge residual: prev_b^H aligned_b must be Hermitian.
        for p in range(r):
            for q in range(p + 1, r):
                a = 0.0j
                bq = 0.0j
                for i in range(rows):
                    a += np.conj(prev[i, lo + p]) * out[i, lo + q]
                    bq += np.conj(prev[i, lo + q]) * out[i, lo + p]
                herm = max(herm, abs(a - np.conj(bq)))
            d = 0.0j
            for i in range(rows):
                d += np.conj(prev[i, lo + p]) * out[i, lo + p]
            herm = max(herm, abs(d.imag))
    return out, smin, herm


def _polar_fallback(Yb, Pb):
    # Polar factor of a (near-)singular overlap; the SVD completes the basis.
    dec = matcore.svd_sorted(Yb.conj().T @ Pb)
    return Yb @ (dec.left @ dec.right.conj().T)


def align_procrustes(prev, next, collapse_tol=COLLAPSE_TOL):
    """Rotate ``next`` inside its span to be closest to ``prev``.

    Returns ``(aligned, rotation)`` where ``rotation`` is the unitary
    minimizing ``||next @ P - prev||_F`` (the polar factor of
    ``next^H prev``) and ``aligned = next @ rotation``.
    """
    prev = as_matrix(prev, "prev")
    next = as_matrix(next, "next")
    if prev.shape != next.shape:
        raise ShapeError(f"shape mismatch {prev.shape} vs {next.shape}")
    matcore.check_orthonormal(prev, "prev")
    matcore.check_orthonormal(next, "next")
    dec = matcore.svd_sorted(next.conj().T @ prev)
    if dec.singulars[-1] <= collapse_tol:
        raise RankCollapse(
            "subspaces are numerically orthogonal "
            f"(smallest overlap {dec.singulars[-1]:.3g}); refine the grid")
    rotation = dec.left @ dec.right.conj().T
    return next @ rotation, rotation


# --------------------------------------------------------------------------
# tracking


def _grid(points):
    if int(points) < 2:
        raise ValueError("grid_points must be at least 2")
    return np.linspace(0.0, 1.0, int(points))


def _run(decompose, ts, sizes, n):
    """Sequentially track block frames over ``ts`` with step bisection.

    ``decompose(t)`` returns ``(values, frames)``; every frame has ``n``
    block columns optionally followed by a fixed tail block.
    """
    k = len(sizes)
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    values, frames = decompose(0.0)
    groups = [np.arange(offsets[j], offsets[j + 1]) for j in range(k)]
    frame_offsets = []
    for F in frames:
        off = offsets if F.shape[1] == n else np.append(offsets, F.shape[1])
        frame_offsets.append(off.astype(np.int64))

    def arrange(values, frames, groups):
        order = np.concatenate(groups)
        vals = values[order]
        out = []
        for F in frames:
            cols = order if F.shape[1] == n else np.concatenate([order, np.arange(n, F.shape[1])])
            out.append(np.ascontiguousarray(F[:, cols]))
        return vals, out

    vals, cur = arrange(values, frames, groups)
    out_t, out_vals, out_frames = [0.0], [vals], [cur]
    refinements = 0
    gauge = 0.0
    min_cos = 1.0
    discontinuities = []
    pending = list(ts[1:][::-1])
    while pending:
        t_next = pending[-1]
        t_prev = out_t[-1]
        values, frames = decompose(t_next)
        prev_blocks = [out_vals[-1][offsets[j]:offsets[j + 1]] for j in range(k)]
        groups = assign_to_blocks(prev_blocks, values)
        vals, cand = arrange(values, frames, groups)
        aligned = []
        worst = 1.0
        for F, P, off in zip(cand, out_frames[-1], frame_offsets):
            if np.array_equal(F, P):
                # Identical frames: the optimal rotation is exactly I.
                aligned.append((F.copy(), np.ones(len(off) - 1), F, P, off))
                continue
            A, smin, herm = _polar_align(F, P, off, COLLAPSE_TOL)
            worst = min(worst, smin.min())
            gauge = max(gauge, herm)
            aligned.append((A, smin, F, P, off))
        if worst < STEP_MIN_COS and (t_next - t_prev) > MIN_STEP:
            pending.append(0.5 * (t_prev + t_next))
            refinements += 1
            continue
        if worst < STEP_MIN_COS:
            discontinuities.append(len(out_t))
        result = []
        for A, smin, F, P, off in aligned:
            for b in np.flatnonzero(smin <= COLLAPSE_TOL):
                lo, hi = off[b], off[b + 1]
                A[:, lo:hi] = _polar_fallback(F[:, lo:hi], P[:, lo:hi])
            result.append(A)
        min_cos = min(min_cos, worst)
        pending.pop()
        out_t.append(t_next)
        out_vals.append(vals)
        out_frames.append(result)
    info = dict(step_refinements=refinements, gauge_residual=gauge,
                min_step_cos=min_cos, discontinuities=discontinuities)
    return np.array(out_t), np.array(out_vals), out_frames, info


def _dip_points(t, gaps):
    # Midpoints around interior samples where some block gap dips below
    # DIP_RATIO times both neighbours.
    extra = set()
    for row in gaps:
        if not np.all(np.isfinite(row)):
            continue
        left, mid, right = row[:-2], row[1:-1], row[2:]
        for i in np.flatnonzero(mid < DIP_RATIO * np.minimum(left, right)) + 1:
            extra.add(0.5 * (t[i - 1] + t[i]))
            extra.add(0.5 * (t[i] + t[i + 1]))
    return np.array(sorted(extra - set(t.tolist())))


def _block_gaps(values, sizes):
    """``gaps[j, i]``: distance from block j's values to all other blocks' values."""
    k = len(sizes)
    N = values.shape[0]
    if k == 1:
        return np.full((1, N), np.inf)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    D = np.abs(values[:, :, None] - values[:, None, :])
    gaps = np.empty((k, N))
    for j in range(k):
        inside = np.zeros(values.shape[1], dtype=bool)
        inside[offsets[j]:offsets[j + 1]] = True
        gaps[j] = D[:, inside][:, :, ~inside].min(axis=(1, 2))
    return gaps


def _finish_meta(meta, gaps, scale, steps, direction_norm, dt):
    # Ambiguity: gap below 1e-12 * ||M(t_i)||_2 at some sample.
    for j, i in zip(*np.nonzero(gaps <= AMBIGUITY_RTOL * scale[None, :])):
        meta.block_ambiguity.append((int(i), int(j)))
    # Continuity diagnostic: ||X_j(t_{i+1}) - X_j(t_i)|| <= C dt ||dM|| / gap.
    with np.errstate(divide="ignore", invalid="ignore"):
        limit = CONTINUITY_C * dt[None, :] * direction_norm / gaps[:, :-1]
    bad = (gaps[:, :-1] > 0) & (steps > limit)
    for j, i in zip(*np.nonzero(bad)):
        meta.continuity_flags.append((int(i), int(j)))


def _block_steps(frames, offsets):
    # ||X_j(t_{i+1}) - X_j(t_i)||_F for every block, shape (nblocks, N-1).
    F = np.asarray(frames)
    d = F[1:] - F[:-1]
    sq = (d.real ** 2 + d.imag ** 2).sum(axis=1)
    return np.array([np.sqrt(sq[:, offsets[j]:offsets[j + 1]].sum(axis=1))
                     for j in range(len(offsets) - 1)])


def track_eig_path(A, dA, partition, grid_points=DEFAULT_GRID, adaptive=True):
    """Track the gauge-fixed block eigendecomposition of ``A + t dA``, t in [0, 1].

    At t = 0 block 1 takes the r_1 largest eigenvalues, block 2 the next r_2,
    and so on. Each later sample re-decomposes ``A(t)``, assigns eigenvalues
    to blocks by :func:`assign_to_blocks` and aligns every block basis to the
    previous sample by :func:`align_procrustes`. Steps that turn a subspace by
    more than about 2.6 degrees are bisected; with ``adaptive`` one extra
    round of midpoints is inserted around sharp gap dips.
    """
    A = as_matrix(A, "A")
    dA = as_matrix(dA, "dA")
    if A.shape[0] != A.shape[1]:
        raise ShapeError(f"A must be square, got {A.shape}")
    if dA.shape != A.shape:
        raise ShapeError(f"dA has shape {dA.shape}, A has {A.shape}")
    if not isinstance(partition, BlockPartition):
        partition = BlockPartition(tuple(partition))
    n = A.shape[0]
    partition.check(n)
    for M, name in ((A, "A"), (dA, "dA")):
        if fro(M - M.conj().T) > matcore.HERMITIAN_TOL * fro(M):
            raise matcore.NotHermitian(f"{name} is not Hermitian")
    A = 0.5 * (A + A.conj().T)
    dA = 0.5 * (dA + dA.conj().T)

    def decompose(t):
        w, Y = matcore._eigh(A + t * dA)
        return w, [Y]

    base = _grid(grid_points)
    ts, vals, frames, info = _run(decompose, base, partition.sizes, n)
    insertions = 0
    if adaptive and partition.k > 1:
        extra = _dip_points(ts, _block_gaps(vals, partition.sizes))
        if extra.size:
            insertions = int(extra.size)
            ts, vals, frames, info = _run(decompose, np.union1d(base, extra),
                                          partition.sizes, n)
    bases = np.array([f[0] for f in frames])
    meta = PathMeta(grid_points=int(grid_points), adaptive_insertions=insertions, **info)
    gaps = _block_gaps(vals, partition.sizes)
    scale = np.abs(vals).max(axis=1)
    steps = _block_steps(bases, partition.offsets)
    _finish_meta(meta, gaps, scale, steps, fro(dA), np.diff(ts))
    return EigPath(t=ts, bases=bases, eigs=vals, partition=partition, A=A, dA=dA, meta=meta)


def track_svd_path(B, dB, partition, grid_points=DEFAULT_GRID, adaptive=True):
    """Track the gauge-fixed block SVD of ``B + t dB`` (m >= n), t in [0, 1].

    Same scheme as :func:`track_eig_path`; the left and right block bases are
    aligned independently, and for m > n the null-space block ``W_{k+1}`` is
    aligned like any other block.
    """
    B = as_matrix(B, "B")
    dB = as_matrix(dB, "dB")
    if dB.shape != B.shape:
        raise ShapeError(f"dB has shape {dB.shape}, B has {B.shape}")
    m, n = B.shape
    if m < n:
        raise ShapeError(f"need m >= n, got {m} x {n}")
    if not isinstance(partition, BlockPartition):
        partition = BlockPartition(tuple(partition))
    partition.check(n)

    def decompose(t):
        W, s, V = matcore._svd(B + t * dB)
        return s, [W, V]

    base = _grid(grid_points)
    ts, vals, frames, info = _run(decompose, base, partition.sizes, n)
    insertions = 0
    if adaptive:
        g = _svd_gap_arrays(vals, partition.sizes)
        extra = _dip_points(ts, np.vstack([g[0], g[1]]))
        if extra.size:
            insertions = int(extra.size)
            ts, vals, frames, info = _run(decompose, np.union1d(base, extra),
                                          partition.sizes, n)
    lefts = np.array([f[0] for f in frames])
    rights = np.array([f[1] for f in frames])
    meta = PathMeta(grid_points=int(grid_points), adaptive_insertions=insertions, **info)
    rho, rho_hat, _ = _svd_gap_arrays(vals, partition.sizes)
    scale = vals.max(axis=1)
    dt = np.diff(ts)
    right_steps = _block_steps(rights, partition.offsets)
    _finish_meta(meta, rho, scale, right_steps, np.sqrt(2.0) * fro(dB), dt)
    left_off = partition.offsets if m == n else np.append(partition.offsets, m)
    left_steps = _block_steps(lefts, left_off)
    sigma_all = vals.min(axis=1)
    left_gaps = rho_hat if m == n else np.vstack([rho_hat, sigma_all[None, :]])
    probe = PathMeta(grid_points=0)
    _finish_meta(probe, left_gaps, scale, left_steps, np.sqrt(2.0) * fro(dB), dt)
    meta.continuity_flags.extend(probe.continuity_flags)
    return SvdPath(t=ts, lefts=lefts, rights=rights, sings=vals, partition=partition,
                   B=B, dB=dB, meta=meta)


# --------------------------------------------------------------------------
# gap functionals


def _profile(grid, gaps, scale):
    minima = gaps.min(axis=1)
    minima = np.where(minima <= ZERO_GAP_RTOL * scale, 0.0, minima)
    resolution = float(np.diff(grid).max()) if len(grid) > 1 else 0.0
    return GapProfile(grid=grid, per_block_gaps=gaps, path_minima=minima, resolution=resolution)


def gap_profile_eig(path):
    """``delta_j(t)`` on the grid and ``delta_{j,min}`` for every block."""
    gaps = _block_gaps(path.eigs, path.partition.sizes)
    return _profile(path.t, gaps, float(np.abs(path.eigs).max()))


def _svd_gap_arrays(sings, sizes):
    rho = _block_gaps(sings, sizes)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    smin = np.array([sings[:, offsets[j]:offsets[j + 1]].min(axis=1) for j in range(len(sizes))])
    return rho, np.minimum(rho, smin), smin


def gap_profile_svd(path):
    """``rho_j``, ``rho_hat_j`` and ``sigma_{j,min}`` profiles plus ``sigma_min``."""
    rho, rho_hat, smin = _svd_gap_arrays(path.sings, path.partition.sizes)
    scale = float(path.sings.max())
    sigma_min = float(smin.min())
    if sigma_min <= ZERO_GAP_RTOL * scale:
        sigma_min = 0.0
    return SvdGapProfile(
        rho=_profile(path.t, rho, scale),
        rho_hat=_profile(path.t, rho_hat, scale),
        sigma_block=_profile(path.t, smin, scale),
        sigma_min=sigma_min,
        square=path.m == path.n,
    )


# --------------------------------------------------------------------------
# verification helpers


def gauge_check(frames, offsets):
    """Worst Hermitian residual and smallest eigenvalue of the Hermitian part of
    ``X_j(t_i)^H X_j(t_{i+1})`` over all steps and blocks.

    Uses LAPACK (numpy) so the check is independent of the tracker.
    """
    worst_herm, worst_eig = 0.0, np.inf
    F = np.asarray(frames)
    for b in range(len(offsets) - 1):
        X = F[:, :, offsets[b]:offsets[b + 1]]
        M = np.einsum("tir,tis->trs", X[:-1].conj(), X[1:])
        herm = np.linalg.norm(M - M.conj().transpose(0, 2, 1), axis=(1, 2))
        worst_herm = max(worst_herm, float(herm.max(initial=0.0)))
        H = 0.5 * (M + M.conj().transpose(0, 2, 1))
        if len(H):
            worst_eig = min(worst_eig, float(np.linalg.eigvalsh(H).min()))
    return worst_herm, worst_eig


def eig_gauge_check(path):
    return gauge_check(path.bases, path.partition.offsets)


def svd_gauge_check(path):
    left_off = path.partition.offsets
    if path.tall:
        left_off = np.append(left_off, path.m)
    h1, e1 = gauge_check(path.lefts, left_off)
    h2, e2 = gauge_check(path.rights, path.partition.offsets)
    return max(h1, h2), min(e1, e2)
