"""Problem generators, randomized verification suites, scaling study and the
closed-form 2x2 oracle."""

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import bounds_eig as be
from . import homotopy, matcore
from .homotopy import BlockPartition
from .matcore import fro
from .pipeline import eig_verify, svd_verify
from .reports import SLACK_RTOL

KINDS = ("hermitian", "general")
ESIN_TOL = 1e-10
GAUGE_TOL = 1e-8
GAP_PREDICTION_TOL = 1e-9
REDUCTION_TOL = 1e-12


@dataclass(frozen=True)
class ProblemSpec:
    """Recipe for one deterministic test problem.

    ``spectrum_plan`` holds the eigenvalues (hermitian) or singular values
    (general) of the base matrix; ``perturb_norm`` is the Frobenius norm of
    the generated perturbation.
    """

    kind: str
    n: int
    partition: BlockPartition
    spectrum_plan: Tuple[float, ...]
    perturb_norm: float
    seed: int
    m: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n < 1 or len(self.spectrum_plan) != self.n:
            raise ValueError("spectrum_plan must list exactly n values")
        if not isinstance(self.partition, BlockPartition):
            object.__setattr__(self, "partition", BlockPartition(tuple(self.partition)))
        self.partition.check(self.n)
        if self.perturb_norm < 0:
            raise ValueError("perturb_norm must be nonnegative")
        if self.kind == "general":
            m = self.n if self.m is None else self.m
            if m < self.n:
                raise ValueError(f"need m >= n, got m={m}, n={self.n}")
            if min(self.spectrum_plan) < 0:
                raise ValueError("singular values must be nonnegative")
            object.__setattr__(self, "m", m)


def random_unitary(n, rng):
    """Haar unitary: QR of a complex Gaussian with the diagonal phases of R removed."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.where(np.abs(d) > 0, np.abs(d), 1.0))


def _scaled(M, norm):
    if norm == 0:
        return np.zeros_like(M)
    return M * (norm / fro(M))


def gen_problem(spec: ProblemSpec):
    """Return ``(base, perturbation)`` for ``spec``; identical specs give identical bits."""
    rng = np.random.default_rng(spec.seed)
    plan = np.asarray(spec.spectrum_plan, dtype=float)
    n = spec.n
    if spec.kind == "hermitian":
        Q = random_unitary(n, rng)
        base = (Q * plan) @ Q.conj().T
        base = 0.5 * (base + base.conj().T)
        G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        return base, _scaled(0.5 * (G + G.conj().T), spec.perturb_norm)
    m = spec.m
    W = random_unitary(m, rng)
    V = random_unitary(n, rng)
    base = (W[:, :n] * plan) @ V.conj().T
    G = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    return base, _scaled(G, spec.perturb_norm)


# --------------------------------------------------------------------------
# suites


@dataclass(frozen=True)
class SuiteConfig:
    """Randomized suite settings.

    Hermitian trials rescale the perturbation to ``||dA||_2 = u min_j
    delta_j(0) / 2``; general trials to ``||dB||_2 = u min_j min(rho_j(0)/3,
    sigma_{j,min}(0)/2)``, with ``u`` uniform in ``u_range``. Either way the
    single-block hypotheses hold with at least a 2x margin.
    """

    kind: str = "hermitian"
    trials: int = 200
    n_range: Tuple[int, int] = (2, 10)
    extra_rows: Tuple[int, int] = (0, 3)
    u_range: Tuple[float, float] = (0.05, 0.5)
    grid_points: int = 513
    seed: int = 2024
    perturb_norm: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.trials < 0 or self.grid_points < 2:
            raise ValueError("trials must be >= 0 and grid_points >= 2")
        lo, hi = self.n_range
        if not 1 <= lo <= hi:
            raise ValueError(f"bad n_range {self.n_range}")
        for name in ("n_range", "extra_rows", "u_range"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    @classmethod
    def from_dict(cls, d):
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)


def random_partition(n, rng):
    k = int(rng.integers(1, n + 1))
    cuts = np.sort(rng.choice(np.arange(1, n), size=k - 1, replace=False)) if k > 1 else []
    edges = np.concatenate([[0], cuts, [n]]).astype(int)
    return BlockPartition(tuple(int(r) for r in np.diff(edges)))


def random_plan(partition, rng, positive):
    """Values descending, clustered per block with inter-block jumps."""
    steps = []
    for j, r in enumerate(partition.sizes):
        if j > 0:
            steps.append(rng.uniform(0.3, 2.0))
        steps.extend(rng.uniform(0.05, 1.0, size=r - 1))
    vals = np.concatenate([[0.0], np.cumsum(steps)])
    vals = vals.max() - vals
    vals = vals + (rng.uniform(0.5, 1.5) if positive else rng.uniform(-2.0, 2.0) - vals.mean())
    return tuple(float(v) for v in vals)


def trial_spec(config: SuiteConfig, index):
    """The unscaled problem spec of trial ``index``."""
    rng = np.random.default_rng([config.seed, index])
    n = int(rng.integers(config.n_range[0], config.n_range[1] + 1))
    partition = random_partition(n, rng)
    general = config.kind == "general"
    plan = random_plan(partition, rng, positive=general)
    m = n + int(rng.integers(config.extra_rows[0], config.extra_rows[1] + 1)) if general else None
    u = float(rng.uniform(*config.u_range))
    seed = int(rng.integers(0, 2 ** 63))
    return ProblemSpec(config.kind, n, partition, plan, 1.0, seed, m), u


def _target_spectral(spec, u):
    # Spectral norm aimed at by the rescaled perturbation.
    plan = np.sort(np.asarray(spec.spectrum_plan))[::-1]
    sizes = spec.partition.sizes
    gaps = homotopy._block_gaps(plan[None, :], sizes)[:, 0]
    if spec.kind == "hermitian":
        ref = gaps.min()
        if not math.isfinite(ref):
            ref = max(float(np.abs(plan).max()), 1.0)
        return u * ref / 2.0
    off = np.concatenate([[0], np.cumsum(sizes)])
    smin = np.array([plan[off[j]:off[j + 1]].min() for j in range(len(sizes))])
    return u * float(np.minimum(gaps / 3.0, smin / 2.0).min())


def scaled_trial_spec(config: SuiteConfig, index):
    """Trial spec with the perturbation norm set by the regime (or ``perturb_norm``)."""
    spec, u = trial_spec(config, index)
    if config.perturb_norm is not None:
        norm = float(config.perturb_norm)
    else:
        _, pilot = gen_problem(spec)
        norm = _target_spectral(spec, u) / matcore.matrix_norm(pilot, "spectral")
    return ProblemSpec(spec.kind, spec.n, spec.partition, spec.spectrum_plan, norm,
                       spec.seed, spec.m)


@dataclass
class Tally:
    applicable: int = 0
    satisfied: int = 0
    min_slack: float = math.inf
    min_relative_slack: float = math.inf

    def add(self, report):
        if not report.applicable:
            return
        self.applicable += 1
        self.satisfied += int(report.satisfied)
        self.min_slack = min(self.min_slack, report.slack)
        self.min_relative_slack = min(self.min_relative_slack, report.relative_slack)

    def merge(self, other):
        self.applicable += other.applicable
        self.satisfied += other.satisfied
        self.min_slack = min(self.min_slack, other.min_slack)
        self.min_relative_slack = min(self.min_relative_slack, other.min_relative_slack)


@dataclass
class Check:
    """Pass count of a structural property over all instances it applies to."""

    checked: int = 0
    passed: int = 0
    worst: float = math.inf

    def add(self, ok, margin):
        self.checked += 1
        self.passed += int(bool(ok))
        self.worst = min(self.worst, float(margin))

    def merge(self, other):
        self.checked += other.checked
        self.passed += other.passed
        self.worst = min(self.worst, other.worst)

    @property
    def ok(self):
        return self.passed == self.checked


CHECK_NAMES = ("dominance", "esin", "gap_prediction", "gauge", "reduction", "rho_hat_square")


@dataclass
class SuiteReport:
    kind: str
    trials: int
    tallies: Dict[str, Tally] = field(default_factory=dict)
    checks: Dict[str, Check] = field(default_factory=lambda: {c: Check() for c in CHECK_NAMES})
    block_ambiguity: int = 0
    failures: List[Tuple[int, str]] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def violations(self):
        return sum(t.applicable - t.satisfied for t in self.tallies.values())

    @property
    def ok(self):
        return (not self.failures and self.violations == 0
                and all(c.ok for c in self.checks.values()))

    def merge(self, other):
        for key, tally in other.tallies.items():
            self.tallies.setdefault(key, Tally()).merge(tally)
        for key, check in other.checks.items():
            self.checks[key].merge(check)
        self.block_ambiguity += other.block_ambiguity
        self.failures.extend(other.failures)

    def to_dict(self, include_time=True):
        d = {
            "kind": self.kind,
            "trials": self.trials,
            "ok": self.ok,
            "violations": self.violations,
            "tallies": {k: asdict(v) for k, v in sorted(self.tallies.items())},
            "checks": {k: dict(asdict(v), ok=v.ok) for k, v in self.checks.items()},
            "block_ambiguity": self.block_ambiguity,
            "failures": [list(f) for f in self.failures],
        }
        if include_time:
            d["wall_time"] = self.wall_time
        return d


def _tally_reports(result, reports):
    for r in reports:
        result.tallies.setdefault(r.bound_id.value, Tally()).add(r)


def _eig_trial(spec, config, result):
    A, dA = gen_problem(spec)
    v = eig_verify(A, dA, spec.partition, config.grid_points)
    _tally_reports(result, v.reports)
    path, k = v.path, spec.partition.k
    combined = v.by_id("CombinedAll")[0]
    hw2 = v.squared_classical
    result.checks["dominance"].add(
        combined.slack <= hw2.slack and combined.rhs == hw2.rhs, hw2.slack - combined.slack)
    for e in v.endpoint:
        margin = e["basis_distance"] - e["sin_theta_fro"] + ESIN_TOL
        result.checks["esin"].add(margin >= 0, margin)
    norm2 = v.extras["perturbation_spectral"]
    for j in range(k):
        d0 = v.gaps.per_block_gaps[j, 0]
        if math.isfinite(d0) and 2 * norm2 < d0:
            margin = v.gaps.path_minima[j] - (d0 - 2 * norm2) + GAP_PREDICTION_TOL
            result.checks["gap_prediction"].add(margin >= 0, margin)
    _gauge(result, v)
    if k == 1:
        diff = max(abs(combined.lhs - hw2.lhs), abs(combined.rhs - hw2.rhs))
        result.checks["reduction"].add(diff <= REDUCTION_TOL, REDUCTION_TOL - diff)
    result.block_ambiguity += len(path.meta.block_ambiguity)


def _svd_trial(spec, config, result):
    B, dB = gen_problem(spec)
    v = svd_verify(B, dB, spec.partition, config.grid_points)
    _tally_reports(result, v.reports)
    path, k = v.path, spec.partition.k
    combined = v.by_id("SvdCombinedAll")[0]
    m2 = v.squared_classical
    result.checks["dominance"].add(
        combined.slack <= m2.slack and combined.rhs == m2.rhs, m2.slack - combined.slack)
    for e in v.endpoint:
        for side in ("left", "right"):
            if f"{side}_distance" in e:
                margin = e[f"{side}_distance"] - e[f"{side}_sin_theta_fro"] + ESIN_TOL
                result.checks["esin"].add(margin >= 0, margin)
    norm2 = v.extras["perturbation_spectral"]
    for j in range(k):
        r0 = v.gaps.rho.per_block_gaps[j, 0]
        s0 = v.gaps.sigma_block.per_block_gaps[j, 0]
        if norm2 <= min(r0 / 2, s0):
            rho_hat = v.gaps.rho_hat.path_minima[j]
            result.checks["gap_prediction"].add(rho_hat > 0, rho_hat)
    _gauge(result, v)
    if not path.tall:
        for r in v.by_id("SvdCombinedSingle"):
            eq = r.components["rho_hat_min"] == r.components["rho_min"]
            result.checks["rho_hat_square"].add(eq, 0.0 if eq else -1.0)
        if k == 1:
            diff = max(abs(combined.lhs - m2.lhs), abs(combined.rhs - m2.rhs))
            result.checks["reduction"].add(diff <= REDUCTION_TOL, REDUCTION_TOL - diff)
    result.block_ambiguity += len(path.meta.block_ambiguity)


def _gauge(result, v):
    margin = min(GAUGE_TOL - v.gauge_residual, v.gauge_min_eig + GAUGE_TOL)
    result.checks["gauge"].add(margin >= 0, margin)


def run_trial(config: SuiteConfig, index):
    """Evaluate one trial; errors are recorded, never raised."""
    result = SuiteReport(config.kind, 1)
    try:
        spec = scaled_trial_spec(config, index)
        if config.kind == "hermitian":
            _eig_trial(spec, config, result)
        else:
            _svd_trial(spec, config, result)
    except Exception as exc:  # a failing trial must not stop the suite
        result.failures.append((index, f"{type(exc).__name__}: {exc}"))
    return result


def _run_chunk(args):
    config, indices = args
    out = SuiteReport(config.kind, 0)
    for i in indices:
        out.merge(run_trial(config, i))
    return out


def run_suite(config: SuiteConfig, workers=None):
    """Run ``config.trials`` independent trials and merge their tallies.

    ``workers`` defaults to the ``MPTK_THREADS`` environment variable (1 if
    unset). Trials are merged in index order, so the report does not depend on
    scheduling.
    """
    if workers is None:
        workers = int(os.environ.get("MPTK_THREADS", "1") or 1)
    start = time.perf_counter()
    report = SuiteReport(config.kind, config.trials)
    indices = list(range(config.trials))
    if workers <= 1 or config.trials <= 1:
        chunks = [_run_chunk((config, indices))]
    else:
        parts = [indices[w::workers] for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_chunk, [(config, p) for p in parts]))
    for chunk in chunks:
        report.merge(chunk)
    report.failures.sort()
    report.wall_time = time.perf_counter() - start
    return report


# --------------------------------------------------------------------------
# scaling study


@dataclass(frozen=True)
class ScalingRow:
    norm: float
    delta_min: Tuple[float, ...]
    delta_tilde: Tuple[float, ...]
    difference: Tuple[float, ...]
    ratio: Tuple[float, ...]
    flagged: bool


@dataclass(frozen=True)
class ScalingStudy:
    rows: List[ScalingRow]
    slopes: Tuple[float, ...]
    bounded: Tuple[bool, ...]


def _bounded(ratios):
    # "No monotone growth as the norm decreases": the magnitude sequence
    # (ordered by decreasing norm) must not be strictly increasing while also
    # more than doubling overall.
    r = np.abs([x for x in ratios if math.isfinite(x)])
    if len(r) < 2:
        return True
    growing = bool(np.all(np.diff(r) > 0))
    return not (growing and r[-1] > 2.0 * max(r[0], np.finfo(float).tiny))


def scaling_study(A, direction, partition, norms, grid_points=homotopy.DEFAULT_GRID):
    """Tabulate ``delta_{j,min} - delta_tilde_j`` for ``dA = s direction / ||direction||_F``.

    Rows whose path has a collapsed gap are flagged and left out of the
    log-log slope fit and of the boundedness verdict.
    """
    A = matcore.as_matrix(A, "A")
    direction = matcore.as_matrix(direction, "direction")
    if not isinstance(partition, BlockPartition):
        partition = BlockPartition(tuple(partition))
    rows = []
    for s in sorted(norms, reverse=True):
        dA = _scaled(direction, float(s))
        path = homotopy.track_eig_path(A, dA, partition, grid_points)
        gaps = homotopy.gap_profile_eig(path)
        dt = be.delta_tilde(path)
        dmin = gaps.path_minima
        diff = np.where(np.isfinite(dmin), dmin - dt.per_block, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(s > 0, diff / s, np.nan)
        flagged = bool(np.any(dmin == 0) or path.meta.block_ambiguity)
        rows.append(ScalingRow(float(s), tuple(map(float, dmin)), tuple(map(float, dt.per_block)),
                               tuple(map(float, diff)), tuple(map(float, ratio)), flagged))
    k = partition.k
    slopes, bounded = [], []
    for j in range(k):
        used = [r for r in rows if not r.flagged and r.norm > 0]
        x = np.array([math.log(r.norm) for r in used if r.difference[j] > 0])
        y = np.array([math.log(r.difference[j]) for r in used if r.difference[j] > 0])
        slopes.append(float(np.polyfit(x, y, 1)[0]) if len(x) >= 2 else math.nan)
        bounded.append(_bounded([r.ratio[j] for r in used]))
    return ScalingStudy(rows, tuple(slopes), tuple(bounded))


# --------------------------------------------------------------------------
# 2x2 oracle


@dataclass(frozen=True)
class Oracle2x2:
    eigenvalues: Tuple[float, float]
    theta: float
    defined: bool


def oracle_2x2_eig(A, dA, t, samples=4097):
    """Closed-form eigenvalues and eigenvector angle of ``A + t dA`` (2x2 real symmetric).

    ``theta`` solves ``tan(2 theta) = 2 a12 / (a22 - a11)``; the branch is
    followed continuously from the first parameter where it is defined, so
    ``theta(0) = 0`` for a diagonal ``A`` with ``a11 < a22``. The eigenvector
    continuing ``e1`` is ``(cos theta, -sin theta)``. ``defined`` is False
    when both the diagonal gap and the off-diagonal entry vanish at ``t``.
    """
    A = np.asarray(A, dtype=float)
    dA = np.asarray(dA, dtype=float)
    if A.shape != (2, 2) or dA.shape != (2, 2):
        raise ValueError("oracle_2x2_eig needs 2x2 matrices")
    M = A + t * dA
    a, b, d = M[0, 0], 0.5 * (M[0, 1] + M[1, 0]), M[1, 1]
    mean, rad = 0.5 * (a + d), math.hypot(0.5 * (d - a), b)
    eig = (mean + rad, mean - rad)
    ts = np.linspace(0.0, t, samples)
    off = (A[0, 1] + A[1, 0]) + ts * (dA[0, 1] + dA[1, 0])
    diag = (A[1, 1] - A[0, 0]) + ts * (dA[1, 1] - dA[0, 0])
    scale = max(np.abs(A).max(), np.abs(dA).max(), np.finfo(float).tiny)
    ok = np.hypot(off, diag) > 1e-14 * scale
    if not ok[-1]:
        return Oracle2x2(eig, math.nan, False)
    phi = np.unwrap(np.arctan2(off[ok], diag[ok]))
    return Oracle2x2(eig, float(phi[-1] / 2.0), True)
