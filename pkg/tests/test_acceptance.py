"""The ten acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the pytest terminal
summary under "acceptance criteria".
"""

import json
import math
import os

import numpy as np
import pytest

from mptk import bounds_eig as be
from mptk import bounds_svd as bs
from mptk import cli, harness
from mptk import homotopy as h
from mptk.mmio import read_matrix, write_matrix
from mptk.pipeline import eig_verify

A2 = np.diag([0.0, 3.0])
DA2 = np.array([[0.0, 0.1], [0.1, 0.0]])
SLACK_FLOOR = -1e-8
WORKERS = int(os.environ.get("MPTK_THREADS") or os.cpu_count() or 1)

HERMITIAN_BOUNDS = ("HW", "DK", "LiSun", "CombinedAll", "CombinedSingle", "CorSinF",
                    "CorSinOnly", "TotalB", "MVT")
SVD_BOUNDS = ("Mirsky", "SvdCombinedAll", "SvdCombinedSingle", "SvdCorSin", "SvdMVT")


@pytest.fixture(scope="module")
def herm_suite():
    return harness.run_suite(harness.SuiteConfig(kind="hermitian", trials=200), WORKERS)


@pytest.fixture(scope="module")
def svd_config():
    return harness.SuiteConfig(kind="general", trials=200)


@pytest.fixture(scope="module")
def svd_suite(svd_config):
    return harness.run_suite(svd_config, WORKERS)


def _bound_verdict(suite, names):
    bad = []
    for name in names:
        t = suite.tallies.get(name)
        if t is None or t.applicable == 0:
            bad.append(f"{name}: never applicable")
        elif t.satisfied != t.applicable or t.min_relative_slack < SLACK_FLOOR:
            bad.append(f"{name}: {t.applicable - t.satisfied} violations, "
                       f"min rel slack {t.min_relative_slack:.3g}")
    worst = min(t.min_relative_slack for t in suite.tallies.values())
    return bad, worst


def _check(suites, name):
    checks = [s.checks[name] for s in suites]
    return sum(c.checked for c in checks), sum(c.passed for c in checks)


def test_criterion_01_hermitian_suite(herm_suite, criterion):
    bad, worst = _bound_verdict(herm_suite, HERMITIAN_BOUNDS)
    ok = not bad and not herm_suite.failures and herm_suite.violations == 0
    criterion(1, ok, f"hermitian suite, {herm_suite.trials} trials, "
                     f"{herm_suite.violations} violations, min rel slack {worst:.3g}")
    assert ok, (bad, herm_suite.failures)


def test_criterion_02_svd_suite(svd_suite, svd_config, criterion):
    bad, worst = _bound_verdict(svd_suite, SVD_BOUNDS)
    shapes = [harness.trial_spec(svd_config, i)[0] for i in range(svd_config.trials)]
    tall = sum(s.m > s.n for s in shapes)
    square = len(shapes) - tall
    ok = (not bad and not svd_suite.failures and svd_suite.violations == 0
          and tall > 0 and square > 0 and all(s.m <= s.n + 3 for s in shapes))
    criterion(2, ok, f"svd suite, {square} square + {tall} tall trials, "
                     f"{svd_suite.violations} violations, min rel slack {worst:.3g}")
    assert ok, (bad, svd_suite.failures)


def test_criterion_03_dominance(herm_suite, svd_suite, criterion):
    he = herm_suite.checks["dominance"]
    sv = svd_suite.checks["dominance"]
    ok = he.checked == herm_suite.trials and sv.checked == svd_suite.trials and he.ok and sv.ok
    criterion(3, ok, f"combined slack <= classical slack in {he.passed}/{he.checked} "
                     f"hermitian and {sv.passed}/{sv.checked} svd trials")
    assert ok


def test_criterion_04_reductions(herm_suite, svd_suite, criterion):
    he = herm_suite.checks["reduction"]
    sv = svd_suite.checks["reduction"]
    ok = he.checked > 0 and sv.checked > 0 and he.ok and sv.ok
    criterion(4, ok, f"k=1 reproduces the classical square to 1e-12 in {he.passed}/{he.checked} "
                     f"hermitian and {sv.passed}/{sv.checked} square svd trials")
    assert ok


def test_criterion_05_two_by_two_oracle(criterion):
    path = h.track_eig_path(A2, DA2, (1, 1), 1025)
    eig_err = max(np.abs(path.eigs[i] - harness.oracle_2x2_eig(A2, DA2, path.t[i]).eigenvalues).max()
                  for i in range(len(path)))
    gaps = h.gap_profile_eig(path)
    gap_err = abs(gaps.path_minima[0] - 3.0)
    sin_exact = math.sin(0.5 * math.atan(0.2 / 3))
    v = eig_verify(A2, DA2, (1, 1), 1025)
    sin_err = max(abs(r.components["sin_theta_fro"] - sin_exact) for r in v.by_id("DK"))
    ok = eig_err <= 1e-10 and gap_err <= 1e-9 and sin_err <= 1e-9
    criterion(5, ok, f"eigenvalue err {eig_err:.2g}, |delta_1,min - 3| {gap_err:.2g}, "
                     f"sin theta err {sin_err:.2g}")
    assert ok


def _convergence_instance(kind, spec):
    M, dM = harness.gen_problem(spec)
    out = []
    for grid in (2001, 4001):
        if kind == "hermitian":
            p = h.track_eig_path(M, dM, spec.partition, grid)
            g = h.gap_profile_eig(p)
            minima = g.path_minima
            dist = [be.basis_distance(p, j) for j in range(p.partition.k)]
            herm, mineig = h.eig_gauge_check(p)
        else:
            p = h.track_svd_path(M, dM, spec.partition, grid)
            g = h.gap_profile_svd(p)
            minima = np.concatenate([g.rho.path_minima, g.rho_hat.path_minima])
            k = p.partition.k
            dist = ([bs.left_distance(p, j) for j in range(k + int(p.tall))]
                    + [bs.right_distance(p, j) for j in range(k)])
            herm, mineig = h.svd_gauge_check(p)
        out.append((np.asarray(minima), np.asarray(dist), herm <= 1e-8 and mineig >= -1e-8,
                    bool(p.meta.block_ambiguity)))
    return out


def test_criterion_06_gauge_and_convergence(herm_suite, svd_suite, criterion):
    checked, passed = _check((herm_suite, svd_suite), "gauge")
    worst_rel = worst_abs = 0.0
    gauge_ok = checked == passed
    used = 0
    for kind in harness.KINDS:
        config = harness.SuiteConfig(kind=kind, seed=7, n_range=(2, 6))
        i = 0
        while used < (10 if kind == "hermitian" else 20):
            spec = harness.scaled_trial_spec(config, i)
            i += 1
            (m1, d1, g1, a1), (m2, d2, g2, a2) = _convergence_instance(kind, spec)
            if a1 or a2:
                continue
            used += 1
            gauge_ok &= g1 and g2
            finite = np.isfinite(m2)
            if finite.any():
                rel = np.abs(m1[finite] - m2[finite]) / np.maximum(np.abs(m2[finite]), 1e-300)
                worst_rel = max(worst_rel, float(rel.max()))
            worst_abs = max(worst_abs, float(np.abs(d1 - d2).max()))
    ok = gauge_ok and worst_rel <= 1e-6 and worst_abs <= 1e-6
    criterion(6, ok, f"gauge {passed}/{checked} suite paths + 40 refined paths; 2001->4001 "
                     f"over {used} instances: gap rel change {worst_rel:.2g}, "
                     f"basis change {worst_abs:.2g}")
    assert ok


def test_criterion_07_esin(herm_suite, svd_suite, criterion):
    checked, passed = _check((herm_suite, svd_suite), "esin")
    ok = checked > 0 and checked == passed
    criterion(7, ok, f"basis distance >= sin theta - 1e-10 on {passed}/{checked} blocks")
    assert ok


def test_criterion_08_gap_predictions(herm_suite, svd_suite, criterion):
    he = herm_suite.checks["gap_prediction"]
    sv = svd_suite.checks["gap_prediction"]
    ok = he.checked > 0 and sv.checked > 0 and he.ok and sv.ok
    criterion(8, ok, f"delta_min prediction {he.passed}/{he.checked}, "
                     f"rho_hat_min > 0 {sv.passed}/{sv.checked}")
    assert ok


def test_criterion_09_scaling(criterion):
    study = harness.scaling_study(A2, DA2, (1, 1), [1e-1, 1e-2, 1e-3, 1e-4], grid_points=1025)
    ratios = [max(r.ratio) for r in study.rows]
    ok = all(study.bounded) and not any(r.flagged for r in study.rows)
    criterion(9, ok, "ratio (delta_min - delta_tilde)/||dA||_F per norm: "
                     + ", ".join(f"{x:.3g}" for x in ratios))
    assert ok


def test_criterion_10_cli(tmp_path, capsys, criterion):
    identical = 0
    for seed in range(20):
        rng = np.random.default_rng([10, seed])
        n = int(rng.integers(1, 8))
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        path = tmp_path / f"m{seed}.mtx"
        write_matrix(path, M)
        identical += read_matrix(path).tobytes() == M.tobytes()
    a, da = tmp_path / "a.mtx", tmp_path / "da.mtx"
    write_matrix(a, A2)
    write_matrix(da, DA2)
    code = cli.main(["eig-verify", "--a", str(a), "--da", str(da), "--partition", "1,1"])
    doc = json.loads(capsys.readouterr().out)
    lib = eig_verify(A2, DA2, (1, 1), 1025)
    slack_err = max(abs(d["slack"] - r.slack) for d, r in zip(doc["reports"], lib.reports))
    same_count = len(doc["reports"]) == len(lib.reports)
    bad = [cli.main(["eig-verify", "--a", str(a), "--da", str(da), "--partition", p])
           for p in ("1,2", "1,x", "")]
    capsys.readouterr()
    ok = identical == 20 and code == 0 and same_count and slack_err <= 1e-12 and bad == [2, 2, 2]
    criterion(10, ok, f"{identical}/20 bit-identical round trips, eig-verify exit {code}, "
                      f"slack diff {slack_err:.2g}, malformed partition exits {bad}")
    assert ok
