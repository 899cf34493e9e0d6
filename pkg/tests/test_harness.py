import math

import numpy as np
import pytest

from mptk import harness
from mptk import homotopy as h
from mptk import matcore
from mptk.harness import ProblemSpec, SuiteConfig


def test_gen_problem_zero_perturbation():
    spec = ProblemSpec("hermitian", 2, (1, 1), (5.0, 1.0), 0.0, 7)
    A, dA = harness.gen_problem(spec)
    assert not np.any(dA)
    np.testing.assert_allclose(matcore.eigh_sorted(A).eigenvalues, [5, 1], atol=1e-12)


def test_gen_problem_deterministic():
    for kind, m in (("hermitian", None), ("general", 5)):
        spec = ProblemSpec(kind, 3, (1, 2), (4.0, 2.0, 1.0), 0.3, 42, m)
        a1, d1 = harness.gen_problem(spec)
        a2, d2 = harness.gen_problem(spec)
        assert a1.tobytes() == a2.tobytes() and d1.tobytes() == d2.tobytes()


def test_gen_problem_spectrum_and_norm():
    spec = ProblemSpec("hermitian", 3, (1, 2), (4.0, 2.0, 1.0), 0.3, 42)
    A, dA = harness.gen_problem(spec)
    np.testing.assert_allclose(matcore.eigh_sorted(A).eigenvalues, [4, 2, 1], atol=1e-12)
    assert np.linalg.norm(dA - dA.conj().T) == 0.0
    assert matcore.fro(dA) == pytest.approx(0.3, rel=1e-12)
    spec = ProblemSpec("general", 3, (1, 2), (4.0, 2.0, 1.0), 0.3, 42, 5)
    B, dB = harness.gen_problem(spec)
    assert B.shape == (5, 3) and dB.shape == (5, 3)
    np.testing.assert_allclose(np.linalg.svd(B, compute_uv=False), [4, 2, 1], atol=1e-12)
    assert matcore.fro(dB) == pytest.approx(0.3, rel=1e-12)


def test_problem_spec_validation():
    with pytest.raises(ValueError):
        ProblemSpec("other", 2, (1, 1), (1.0, 0.0), 0.1, 0)
    with pytest.raises(ValueError):
        ProblemSpec("hermitian", 2, (1, 1), (1.0,), 0.1, 0)
    with pytest.raises(ValueError):
        ProblemSpec("general", 3, (3,), (1.0, 1.0, 1.0), 0.1, 0, 2)
    with pytest.raises(ValueError):
        ProblemSpec("general", 2, (2,), (1.0, -1.0), 0.1, 0)


def test_random_unitary_is_unitary():
    Q = harness.random_unitary(6, np.random.default_rng(0))
    assert np.linalg.norm(Q.conj().T @ Q - np.eye(6)) < 1e-13


def test_scaled_trials_enforce_regime():
    for kind in harness.KINDS:
        config = SuiteConfig(kind=kind, trials=10)
        for i in range(10):
            spec = harness.scaled_trial_spec(config, i)
            base, pert = harness.gen_problem(spec)
            norm2 = matcore.matrix_norm(pert, "spectral")
            if kind == "hermitian":
                w = matcore.eigh_sorted(base).eigenvalues
                gaps = h._block_gaps(w[None, :], spec.partition.sizes)[:, 0]
                if math.isfinite(gaps.min()):
                    assert 2 * norm2 < gaps.min()
            else:
                assert base.shape[0] - base.shape[1] in range(0, 4)
                s = np.asarray(spec.spectrum_plan)
                gaps = h._block_gaps(s[None, :], spec.partition.sizes)[:, 0]
                off = np.cumsum((0,) + spec.partition.sizes)
                smin = [s[off[j]:off[j + 1]].min() for j in range(spec.partition.k)]
                assert norm2 < min(np.minimum(gaps / 3, np.asarray(smin) / 2)) * (1 + 1e-12)


def test_single_trial_zero_perturbation():
    for kind in harness.KINDS:
        report = harness.run_suite(SuiteConfig(kind=kind, trials=1, perturb_norm=0.0,
                                               grid_points=17))
        assert report.ok and report.violations == 0 and not report.failures
        for tally in report.tallies.values():
            assert tally.satisfied == tally.applicable
            assert tally.min_slack >= 0


def test_suite_deterministic_and_parallel_invariant():
    config = SuiteConfig(kind="hermitian", trials=6, n_range=(2, 5), grid_points=65)
    r1 = harness.run_suite(config, workers=1)
    r2 = harness.run_suite(config, workers=1)
    r3 = harness.run_suite(config, workers=2)
    d1 = r1.to_dict(include_time=False)
    assert d1 == r2.to_dict(include_time=False) == r3.to_dict(include_time=False)
    assert "wall_time" in r1.to_dict() and r1.ok


def test_small_general_suite():
    report = harness.run_suite(SuiteConfig(kind="general", trials=8, n_range=(1, 4),
                                           grid_points=65))
    assert report.ok, report.to_dict()
    assert report.checks["dominance"].checked == 8


def test_trial_failure_is_recorded(monkeypatch):
    def boom(*args, **kwargs):
        raise RuntimeError("bad trial")
    monkeypatch.setattr(harness, "eig_verify", boom)
    report = harness.run_suite(SuiteConfig(trials=2, grid_points=9))
    assert not report.ok
    assert report.failures == [(0, "RuntimeError: bad trial"), (1, "RuntimeError: bad trial")]


def test_suite_config_from_dict():
    c = SuiteConfig.from_dict({"kind": "general", "trials": 3, "n_range": [2, 4], "note": "x"})
    assert c.kind == "general" and c.trials == 3 and c.n_range == (2, 4)
    with pytest.raises(ValueError):
        SuiteConfig(kind="bogus")
    with pytest.raises(ValueError):
        SuiteConfig(grid_points=1)


# -- oracle ---------------------------------------------------------------------


def test_oracle_examples():
    A = np.diag([0.0, 3.0])
    dA = np.array([[0.0, 0.1], [0.1, 0.0]])
    o = harness.oracle_2x2_eig(A, dA, 1.0)
    r = math.sqrt(9.04)
    assert o.eigenvalues == pytest.approx(((3 + r) / 2, (3 - r) / 2), abs=1e-15)
    assert o.theta == pytest.approx(0.5 * math.atan(0.2 / 3), abs=1e-15)
    o = harness.oracle_2x2_eig(A, np.zeros((2, 2)), 0.7)
    assert o.eigenvalues == (3.0, 0.0) and o.theta == 0.0
    o = harness.oracle_2x2_eig(np.zeros((2, 2)), np.array([[0.0, 1.0], [1.0, 0.0]]), 1.0)
    assert o.eigenvalues == pytest.approx((1, -1)) and o.theta == pytest.approx(math.pi / 4)
    assert not harness.oracle_2x2_eig(np.eye(2), np.eye(2), 1.0).defined


@pytest.mark.parametrize("seed", range(6))
def test_tracked_path_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    a, c = sorted(rng.uniform(-2, 2, 2))
    A = np.array([[a, 0.0], [0.0, c]])
    X = rng.uniform(-0.5, 0.5, (2, 2))
    dA = X + X.T
    p = h.track_eig_path(A, dA, (1, 1), 257)
    for i in range(0, len(p), 8):
        o = harness.oracle_2x2_eig(A, dA, p.t[i])
        assert np.abs(p.eigs[i] - np.array(o.eigenvalues)).max() <= 1e-10
    o = harness.oracle_2x2_eig(A, dA, 1.0)
    # Block 2 starts at e1 (the smaller diagonal entry).
    dist = matcore.fro(p.basis(-1, 1) - p.basis(0, 1))
    assert dist == pytest.approx(2 * abs(math.sin(o.theta / 2)), abs=1e-8)


# -- scaling ---------------------------------------------------------------------


def test_scaling_zero_norms():
    study = harness.scaling_study(np.diag([0.0, 3.0]), np.array([[0, 1.0], [1.0, 0]]),
                                  (1, 1), [0.0, 0.0], grid_points=9)
    for row in study.rows:
        assert row.difference == (0.0, 0.0)


def test_scaling_two_by_two_bounded():
    study = harness.scaling_study(np.diag([0.0, 3.0]), np.array([[0, 0.1], [0.1, 0]]),
                                  (1, 1), [1e-1, 1e-2, 1e-3, 1e-4], grid_points=257)
    assert all(study.bounded)
    assert not any(r.flagged for r in study.rows)


def test_scaling_diagonal_family():
    study = harness.scaling_study(np.diag([2.0, 1.0, -1.0]), np.diag([1.0, -2.0, 0.5]),
                                  (1, 1, 1), [1e-1, 1e-2, 1e-3], grid_points=65)
    for row in study.rows:
        assert max(abs(x) for x in row.ratio) <= 3.0
    assert all(study.bounded)


def test_bounded_uses_magnitude():
    assert not harness._bounded([-0.1, -0.2, -0.5])
    assert harness._bounded([-0.0167, -0.00167, -0.000167])
    assert harness._bounded([1.0, 1.5, 1.9])
    assert harness._bounded([1.0])
