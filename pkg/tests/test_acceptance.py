"""Acceptance suite: one PASS/FAIL line per criterion.

Each test records its line through the ``criterion`` fixture. The lines are
printed as they are produced and again, in order, in the terminal summary.
"""

import io
import math
import time

import numpy as np
import pytest

from oracles import brute_force_l1, brute_force_lp, random_bounded_instance
from polyphase import angles, bounds, duals, experiments, thresholds
from polyphase.cli import run
from polyphase.exponents import internal_rate, psi_ext
from polyphase.linprog import LPInstance, lp_solve, solve_P1
from polyphase.specfun import SQRT_PI, approximant, mills_R

NAMES = {
    1: "threshold table at delta=0.5",
    2: "strong thresholds near delta=1",
    3: "small-delta asymptotic ratios",
    4: "auxiliary lemma bounds",
    5: "saddlepoint at gamma=3/8",
    6: "angle oracles",
    7: "face-count formula against Monte Carlo",
    8: "finite-N bound inequalities",
    9: "empirical phase transition at N=200",
    10: "error-correction round trip",
    11: "LP solver against enumeration",
    12: "byte-identical seeded output",
}


@pytest.fixture
def criterion(request):
    def record(number, checks):
        failed = [label for label, ok in checks if not ok]
        status = "FAIL" if failed else "PASS"
        detail = "; ".join(label for label, _ in checks) if not failed else "failed: " + "; ".join(failed)
        line = f"criterion {number:2d} {status}: {NAMES[number]} ({detail})"
        request.config.acceptance_lines[number] = line
        print(line)
        assert not failed, line
    return record


def test_criterion_01_threshold_table(criterion):
    thresholds._edge_profile_obj.cache_clear()
    ref = {("simplex", "weak"): 0.5581, ("cross", "weak"): 0.3848,
           ("simplex", "strong"): 0.1335, ("cross", "strong"): 0.0894}
    t0 = time.perf_counter()
    got = {key: thresholds.rho_threshold(*key, 0.5) for key in ref}
    elapsed = time.perf_counter() - t0
    checks = [(f"{f} {k} {got[(f, k)]:.4f} vs {v}", abs(got[(f, k)] - v) <= 1e-3) for (f, k), v in ref.items()]
    checks.append((f"{elapsed:.1f} s < 10 s", elapsed < 10))
    criterion(1, checks)


def test_criterion_02_delta_near_one(criterion):
    s = thresholds.rho_threshold("simplex", "strong", 0.999)
    c = thresholds.rho_threshold("cross", "strong", 0.999)
    criterion(2, [(f"simplex {s:.4f} vs 0.3679", abs(s - 0.3679) <= 0.01),
                  (f"cross {c:.4f} vs 0.1685", abs(c - 0.1685) <= 0.01)])


def test_criterion_03_asymptotics(criterion):
    delta = 1e-3
    checks = []
    for fam in ("simplex", "cross"):
        weak = thresholds.rho_threshold(fam, "weak", delta) * abs(2 * math.log(delta))
        checks.append((f"weak {fam} ratio {weak:.3f} in [0.9, 1.1]", 0.9 <= weak <= 1.1))
    for fam in ("simplex", "cross"):
        strong = thresholds.asymptotic_rho(fam, "strong", delta) / thresholds.rho_threshold(fam, "strong", delta)
        checks.append((f"strong {fam} ratio {strong:.3f} in (1, 2)", 1 < strong < 2))
    criterion(3, checks)


def test_criterion_04_lemma_suite(criterion):
    t0 = time.perf_counter()
    checks = []
    for g in (1 / 30, 1 / 50, 1 / 100, 1 / 1000):
        y = duals.solve_s_gamma(g).y_gamma
        checks.append((f"y_gamma bound at {g:.4g}", abs(y - g ** 0.5 / (1 - g)) <= 4 * g ** 1.5))
    g = 1 / 30
    checks.append(("s_gamma approximant at 1/30",
                   abs(duals.solve_s_gamma(g).s_gamma - approximant("s_tilde", g)) <= 0.5 * g ** 0.5))
    for s in (6.0, 7.0, 10.0, 20.0):
        checks.append((f"Mills bracket at {s:g}", 1 - s ** -2 + 2.5 * s ** -4 < mills_R(s) < 1 - s ** -2 + 3 * s ** -4))
    for nu in (1e-3, 1e-4, 1e-5):
        for fam, which, scale in (("simplex", "x_tilde_plus", 2.0), ("cross", "y_tilde_pm", 1.0)):
            z = 1 / (scale * nu * SQRT_PI)
            approx = approximant(which, nu)
            t = duals.solve_external_argmin(fam, nu).argmin
            ok = abs(t - approx) <= 0.5 / approx * math.log(math.log(z)) / math.log(z)
            checks.append((f"{fam} argmin bound at {nu:g}", ok))
    elapsed = time.perf_counter() - t0
    checks = [c for c in checks if not c[1]] or [(f"{len(checks)} bounds hold", True)]
    checks.append((f"{elapsed:.2f} s < 1 s", elapsed < 1))
    criterion(4, checks)


def test_criterion_05_saddlepoint(criterion):
    z = duals.solve_saddlepoint_z(3 / 8).z_gamma
    s = duals.solve_s_gamma(3 / 8).s_gamma
    criterion(5, [(f"z = {z:.5f} vs -0.907", abs(z + 0.907) <= 1e-3),
                  (f"|z + s| = {abs(z + s):.1e}", abs(z + s) <= 1e-9)])


def test_criterion_06_angle_oracles(criterion):
    checks = []
    for ell in (1, 2, 3):
        b = angles.internal_angle(ell - 1, ell)
        checks.append((f"beta(T^{ell - 1}, T^{ell}) = {b:.12f}", abs(b - 0.5) <= 1e-9))
    # codimension-0 external angle, literal target 1/2
    a_top = angles.external_angle("external_simplex", 4, 5)
    checks.append((f"alpha codim-0 = {a_top:.12f} vs 1/2", abs(a_top - 0.5) <= 1e-9))
    a_seg = angles.external_angle("external_simplex", 0, 2)
    checks.append((f"alpha(T^0, T^1) = {a_seg:.12f} vs 3/8", abs(a_seg - 3 / 8) <= 1e-9))
    sad = angles.internal_angle(3, 15, angles.AngleMethod.SADDLEPOINT)
    ora = angles.internal_angle(3, 15, angles.AngleMethod.ORACLE)
    checks.append((f"saddlepoint/oracle at (3,15) = {sad / ora:.4f}", abs(sad / ora - 1) <= 0.1))
    criterion(6, checks)


def test_criterion_07_face_count_cross_check(criterion):
    t0 = time.perf_counter()
    mean, se = experiments.mc_face_count("simplex", 0, 2, 5, 10_000, 2024)
    elapsed = time.perf_counter() - t0
    delta = angles.discrepancy_delta("simplex", 0, 2, 5)
    diff = 5 - mean - delta
    criterion(7, [(f"delta {delta:.4f} vs MC {5 - mean:.4f} +- {se:.4f}", abs(diff) <= 3 * se),
                  (f"{elapsed:.0f} s < 300 s", elapsed < 300)])


def test_criterion_08_bound_inequalities(criterion):
    checks = []
    grid = [(ell, N) for N in (20, 50, 100, 200) for ell in sorted({1, N // 5, N // 2, (3 * N) // 4, N - 2})]
    ext_ok = all(
        angles.external_angle("external_simplex", ell, N) <= math.sqrt(N + 1) * math.exp(-N * psi_ext("simplex", ell / N))
        for ell, N in grid)
    checks.append((f"simplex external bound on {len(grid)} cases", ext_ok))
    cross_ok = all(
        angles.external_angle("external_cross", ell, N)
        <= 1.25 * math.sqrt(ell + 1) * math.exp(-N * psi_ext("cross", ell / N + 1 / (2 * N)))
        for ell, N in grid)
    checks.append((f"cross external bound on {len(grid)} cases", cross_ok))
    int_grid = [(0, 3, 20), (2, 10, 20), (5, 10, 20), (1, 17, 20), (0, 3, 50),
                (5, 25, 50), (1, 47, 50), (2, 10, 100), (10, 50, 100), (1, 97, 100)]
    int_ok = True
    for k, ell, N in int_grid:
        pv = bounds.perturbed_vars(k, ell, N)
        bound = 2 / math.pi * (N + 3) ** 2.5 * math.exp(-N * pv.nu_tilde * internal_rate(pv.gamma_tilde))
        int_ok &= angles.internal_angle(k, ell) <= bound
    checks.append((f"internal bound on {len(int_grid)} cases", int_ok))
    for kind, fn in (("strong", bounds.strong_bound), ("weak", bounds.weak_bound)):
        for fam in ("simplex", "cross"):
            logs = [fn(fam, int(0.05 * N / 2), N // 2, N).log_value for N in (500, 1000, 5000)]
            checks.append((f"{kind} {fam} decreasing in N", logs[0] > logs[1] > logs[2]))
    criterion(8, checks)


def test_criterion_09_empirical_transition(criterion):
    N, n, trials = 200, 100, 200
    t0 = time.perf_counter()
    rho = {"simplex": 0.5581, "cross": 0.3848}  # tabulated weak thresholds at delta = 1/2
    low = {f: math.floor(0.5 * rho[f] * n) for f in rho}
    # 2 * 0.5581 * n exceeds n for the simplex; the largest admissible k is n - 1
    high = {f: min(math.ceil(2 * rho[f] * n), n - 1) for f in rho}
    ks = sorted(set(low.values()) | set(high.values()))
    grids = {f: experiments.success_grid(experiments.ExperimentConfig(f, N, [n], ks, trials, 7))
             for f in rho}
    elapsed = time.perf_counter() - t0
    checks = []
    for f in ("cross", "simplex"):
        lo, hi = grids[f].cell(n, low[f]), grids[f].cell(n, high[f])
        checks.append((f"{f} k={low[f]} success {lo.fraction:.3f} >= 0.95", lo.fraction >= 0.95))
        checks.append((f"{f} k={high[f]} success {hi.fraction:.3f} <= 0.20", hi.fraction <= 0.20))
    dom = True
    for k in ks:
        s, c = grids["simplex"].cell(n, k), grids["cross"].cell(n, k)
        dom &= s.fraction >= c.fraction - 2 * math.hypot(s.stderr, c.stderr)
    checks.append((f"simplex >= cross - 2 stderr at k in {ks}", dom))
    checks.append((f"{elapsed:.0f} s < 1800 s", elapsed < 1800))
    criterion(9, checks)


def test_criterion_10_error_correction(criterion):
    res = experiments.ecc_roundtrip(experiments.EccConfig(200, 100, 10, trials=100, master_seed=1))
    rate = sum(t.exact for t in res) / len(res)
    clean = experiments.ecc_roundtrip(experiments.EccConfig(200, 100, 0, trials=20, master_seed=2))
    criterion(10, [(f"exact rate {rate:.2f} >= 0.95", rate >= 0.95),
                   ("error-free codewords all exact", all(t.exact for t in clean))])


def test_criterion_11_lp_oracle(criterion):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(50):
        R = int(rng.integers(1, 7))
        M = int(rng.integers(R, 13))
        c, A, b = random_bounded_instance(rng, R, M)
        sol = lp_solve(LPInstance(c, A, b))
        worst = max(worst, abs(sol.objective - brute_force_lp(c, A, b)) if sol.optimal else math.inf)
    p1_worst = 0.0
    for t in range(30):
        A = rng.standard_normal((5, 8))
        x0 = np.zeros(8)
        k = t % 3
        x0[rng.choice(8, k, replace=False)] = rng.choice([-1.0, 1.0], k)
        best, _ = brute_force_l1(A, A @ x0)
        sol = solve_P1(A, A @ x0)
        p1_worst = max(p1_worst, abs(sol.objective - best) if sol.optimal else math.inf)
    criterion(11, [(f"50 LPs, worst gap {worst:.1e} <= 1e-7", worst <= 1e-7),
                   (f"30 P1 instances, worst gap {p1_worst:.1e} <= 1e-7", p1_worst <= 1e-7)])


def test_criterion_12_determinism(criterion, tmp_path):
    cfg = tmp_path / "grid.cfg"
    cfg.write_text("family = simplex\nN = 60\nn_list = 20, 30\nk_rule = 3, 9, 15\ntrials = 4\nseed = 99\n")
    commands = {
        "experiment": ["experiment", "--config", str(cfg)],
        "ecc": ["ecc", "--N", "40", "--n", "20", "--k", "3", "--trials", "5", "--seed", "5"],
        "thresholds": ["thresholds", "--delta", "0.2:0.8:4"],
    }
    checks = []
    for name, argv in commands.items():
        outputs = []
        for i in range(2):
            path = tmp_path / f"{name}{i}.csv"
            code = run(argv + ["--out", str(path)], stdout=io.StringIO(), stderr=io.StringIO())
            outputs.append(path.read_bytes() if code == 0 else None)
        checks.append((f"{name} identical", outputs[0] is not None and outputs[0] == outputs[1]))
    criterion(12, checks)
