"""Acceptance checks, one test per criterion; each prints a single PASS/FAIL line."""

import math
import time

import mpmath
import numpy as np
import pytest
from scipy import stats

from wfexcursions import excursions as ex
from wfexcursions import greens as gr
from wfexcursions import hitting as ht
from wfexcursions import hyperfun as hf
from wfexcursions import simulate as sm
from wfexcursions import wfmodel as wm
from wfexcursions.laplinv import InversionConfig, invert_detailed

from conftest import THETA_GRID


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return emit


def rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_01_green_triform(report):
    start = time.perf_counter()
    worst = 0.0
    pts = (0.2, 0.5, 0.8)
    for t1, t2 in THETA_GRID:
        th = wm.make_theta(t1, t2)
        for lam in (0.5, 1.0, 5.0):
            for x in pts:
                for y in pts:
                    vals = [gr.green(th, lam, x, y, rep, tol=1.0).value for rep in gr.REPRESENTATIONS]
                    worst = max(worst, (max(vals) - min(vals)) / abs(vals[-1]))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-6 and elapsed < 30.0
    report(1, ok, f"max rel spread {worst:.2e} (tol 1e-6), {elapsed:.1f} s (limit 30 s)")
    assert ok


def test_criterion_02_new_identity(report):
    worst = 0.0
    pts = (0.2, 0.5, 0.8)
    for t1, t2 in THETA_GRID:
        th = wm.make_theta(t1, t2)
        for lam in (0.5, 1.0, 5.0):
            for x in pts:
                for y in pts:
                    worst = max(worst, gr.new_identity_check(th, lam, x, y))
    ok = worst < 1e-6
    report(2, ok, f"max rel discrepancy {worst:.2e} (tol 1e-6)")
    assert ok


def test_criterion_03_killing_order(report):
    rng = np.random.default_rng(np.random.SeedSequence(3))
    th = wm.make_theta(0.3, 0.7)
    worst = 0.0
    for f in (lambda y: y, lambda y: y * (1 - y)):
        for x, lam in zip(rng.uniform(0.01, 0.99, 10), np.exp(rng.uniform(math.log(0.05), math.log(50.0), 10))):
            a = gr.resolvent(th, lam, f, x, kind="killed01", order="0_then_1").value
            b = gr.resolvent(th, lam, f, x, kind="killed01", order="1_then_0").value
            worst = max(worst, rel(a, b))
    ok = worst < 1e-8
    report(3, ok, f"max rel difference {worst:.2e} over 2 x 10 points (tol 1e-8)")
    assert ok


def test_criterion_04a_killed_ratio_limit(report):
    # the x -> 0 ratio for the test functions of criterion 3; both vanish at 0, which
    # gives O(x) convergence (f(0) != 0 converges only like x^theta1, see the decisions notes)
    th = wm.make_theta(0.3, 0.7)
    worst = 0.0
    for f in (lambda y: y, lambda y: y * (1 - y)):
        for lam in (0.5, 1.0, 5.0):
            lim0, _ = gr.killed_ratio_limits(th, lam, f)
            near0, _ = gr.killed_ratio_at(th, lam, f, 1e-3)
            worst = max(worst, rel(near0, lim0))
    ok = worst < 1e-2
    report("4a", ok, f"killed-resolvent ratio at x = 1e-3 vs closed limit: max rel {worst:.2e} (tol 1e-2)")
    assert ok


def test_criterion_04b_boundary_functional_limits(report):
    # The ratios converge like x^theta_near (see the decisions notes); at x = 1e-3
    # the two same-boundary limits are several percent away, so this part fails.
    th = wm.make_theta(0.3, 0.7)
    names = ("r0", "r1", "cross")
    errs = {n: 0.0 for n in names}
    for lam in (0.5, 1.0, 5.0):
        limits = ht.boundary_ratio_limits(th, lam)
        at = ht.boundary_ratios_at(th, lam, 1e-3)
        for n, lim, v in zip(names, limits, at):
            errs[n] = max(errs[n], rel(v, lim))
    ok = all(e < 1e-2 for e in errs.values())
    detail = ", ".join(f"{n} {e:.2e}" for n, e in errs.items())
    report("4b", ok, f"boundary functional ratios at x = 1e-3 vs limits: {detail} (tol 1e-2)")
    assert ok


def test_criterion_05_complementarity(report):
    th = wm.make_theta(0.3, 0.7)
    sw = ex.switch_rate(th)
    worst_tm = worst_route = 0.0
    symmetric = True
    for lam in np.logspace(-2, 3, 10):
        phi = ex.phi_functionals(th, lam)
        worst_tm = max(worst_tm, rel(sw + phi.phi00, ex.total_mass(th, lam)))
        # phi00 through the boundary limit of the exit functionals, coded separately
        r0 = ht.boundary_ratio_limits(th, lam)[0]
        worst_route = max(worst_route, rel(phi.phi00, r0 * sw))
        symmetric &= phi.phi01 == phi.phi10
    ok = worst_tm < 1e-8 and worst_route < 1e-8 and symmetric
    report(5, ok, f"max rel {worst_tm:.2e}, exit-functional route {worst_route:.2e} (tol 1e-8), phi01 == phi10: {symmetric}")
    assert ok


def test_criterion_06_switching_rate(report):
    worst = 0.0
    for t1, t2 in THETA_GRID:
        th = wm.make_theta(t1, t2)
        target = 1.0 / (2 * math.exp(math.lgamma(t1) + math.lgamma(t2) - math.lgamma(t1 + t2))
                        * math.exp(math.lgamma(1 - t1) + math.lgamma(1 - t2) - math.lgamma(2 - t1 - t2)))
        for b in (0, 1):
            worst = max(worst, rel(ex.total_mass(th, 1e-8, b), target))
    half = rel(ex.total_mass(wm.make_theta(0.5, 0.5), 1e-8), 1 / (2 * math.pi**2))
    ok = worst < 1e-5 and half < 1e-5
    report(6, ok, f"max rel {worst:.2e}, theta = (1/2, 1/2) vs 1/(2 pi^2) {half:.2e} (tol 1e-5)")
    assert ok


def test_criterion_07_entrance_mass(report):
    # lambda * int n_lambda(dx) over (0, 1) misses the time after a switching excursion
    # reaches the far end, so it equals total_mass minus absorbed_mass_rate, not
    # total_mass; the stated identity fails at small lambda (see the decisions notes).
    th = wm.make_theta(0.3, 0.7)
    worst = worst_corrected = 0.0
    for lam in (0.5, 1.0, 5.0):
        mass = lam * ex.entrance_mass(th, lam)
        worst = max(worst, rel(mass, ex.total_mass(th, lam)))
        worst_corrected = max(worst_corrected, rel(mass, ex.total_mass(th, lam) - ex.absorbed_mass_rate(th, lam)))
    ok = worst < 1e-5
    report(7, ok, f"max rel vs total_mass {worst:.2e} (tol 1e-5); vs total_mass minus absorbed part {worst_corrected:.2e}")
    assert ok


@pytest.mark.parametrize("t1", [0.2, 0.3, 0.5, 0.8])
def test_criterion_08_hausdorff_index(report, t1):
    th = wm.make_theta(t1, 0.5)
    start = time.perf_counter()
    s0 = ex.hausdorff_index(th, 0)
    s1 = ex.hausdorff_index(th, 1)
    elapsed = time.perf_counter() - start
    ok = abs(s0 - (1 - t1)) < 0.05 and abs(s1 - 0.5) < 0.05 and elapsed < 10.0
    report(8, ok, f"theta1 = {t1}: index at 0 {s0:.4f} (want {1 - t1:.2f}), at 1 {s1:.4f} (want 0.50), {elapsed:.2f} s")
    assert ok


def test_criterion_09_exact_sampler_ks(report):
    th = wm.make_theta(0.3, 0.7)
    rng = np.random.default_rng(np.random.SeedSequence(9))
    start = time.perf_counter()
    pvals = []
    for t, x in ((0.1, 0.3), (0.5, 0.3), (1.0, 0.7)):
        draws = wm.exact_transition_sample(th, t, x, rng, size=10_000)
        pvals.append(stats.kstest(draws, lambda y: wm.transition_cdf(th, t, x, np.atleast_1d(y))).pvalue)
    elapsed = time.perf_counter() - start
    ok = min(pvals) > 0.01 and elapsed < 60.0
    report(9, ok, f"KS p-values {', '.join(f'{p:.3f}' for p in pvals)} (need > 0.01), {elapsed:.1f} s")
    assert ok


def test_criterion_10_monte_carlo(report):
    rng = np.random.default_rng(np.random.SeedSequence(10))
    exit_est = sm.estimate_exit_prob(wm.make_theta(0.5, 0.5), 0.25, n_paths=10_000, rng=rng)
    exit_ok = abs(exit_est.value - 1 / 3) < 3 * exit_est.std_error
    th = wm.make_theta(0.3, 0.7)
    hit = sm.estimate_hitting_laplace(th, 0.2, 0.8, 1.0, n_paths=10_000, rng=rng)
    ref = ht.hitting_laplace(th, 1.0, 0.2, 0.8)
    allowance = 0.02 * math.sqrt(hit.dt)
    hit_ok = abs(hit.value - ref) < 3 * hit.std_error + allowance
    ok = exit_ok and hit_ok
    report(10, ok, f"exit {exit_est.value:.4f} vs 1/3 (3 SE = {3 * exit_est.std_error:.4f}); "
                   f"hitting {hit.value:.5f} vs {ref:.5f} (3 SE + allowance = {3 * hit.std_error + allowance:.5f}, dt = {hit.dt})")
    assert ok


def test_criterion_11_entrance_density_shape(report):
    th = wm.make_theta(0.3, 0.7)
    cfg = InversionConfig()
    xs = np.linspace(0.025, 0.975, 39)
    negative_flagged_ok = 0
    masses = []
    dens_01 = {}
    for t in (0.1, 0.5, 1.0, 5.0):
        for x in xs:
            res = invert_detailed(lambda lam: ex.entrance_law_laplace(th, lam, 0, x), t, cfg)
            if res.discrepancy <= cfg.consistency_tol * abs(res.value) and res.value < 0:
                negative_flagged_ok += 1
            if t == 0.1:
                dens_01[round(x, 3)] = res.value
        masses.append(invert_detailed(lambda lam: ex.entrance_mass(th, lam), t, cfg).value)
    at05 = invert_detailed(lambda lam: ex.entrance_law_laplace(th, lam, 0, 0.05), 0.1, cfg).value
    at95 = invert_detailed(lambda lam: ex.entrance_law_laplace(th, lam, 0, 0.95), 0.1, cfg).value
    decreasing = all(u > v for u, v in zip(masses, masses[1:]))
    ok = negative_flagged_ok == 0 and decreasing and at05 > at95
    report(11, ok, f"negative values with passing flag: {negative_flagged_ok}; masses "
                   f"{', '.join(f'{m:.4f}' for m in masses)}; t = 0.1 density at 0.05 {at05:.3g} vs 0.95 {at95:.3g}")
    assert ok


def test_criterion_12_hypergeometric_suite(report):
    rng = np.random.default_rng(np.random.SeedSequence(12))
    gauss = 0.0
    for _ in range(50):
        a, b = rng.uniform(-1.5, 1.5, 2)
        c = a + b + rng.uniform(0.1, 2.0)
        expected = float(mpmath.hyp2f1(a, b, c, 1))
        gauss = max(gauss, abs(hf.hyp2f1(a, b, c, 1.0).value - expected) / max(abs(expected), 1e-300))
    deriv = conn = wron = resid = 0.0
    params = [(0.4, -0.8, 0.7), (1j * 2**0.5, -1j * 2**0.5, 0.3), (-0.1 + 1.5j, -0.1 - 1.5j, 0.6)]
    h = 1e-5
    for a, b, c in params:
        ah, bh, ak, bk = hf.connection_coefficients(a, b, c)
        for x in (0.1, 0.35, 0.6, 0.85):
            fd = (hf.hyp2f1(a, b, c, x + h).value - hf.hyp2f1(a, b, c, x - h).value) / (2 * h)
            deriv = max(deriv, rel(fd, hf.hyp2f1_deriv(a, b, c, x)))
            f, g, hh, k = hf.ode_solutions(a, b, c, x)
            conn = max(conn, rel(ah * f + bh * g, hh), rel(ak * f + bk * g, k))
            closed = hf.wronskians(a, b, c, x)
            d = 1e-3
            # five-point stencils for the first two derivatives of each solution
            grid = np.array([hf.ode_solutions(a, b, c, x + j * d) for j in (-2, -1, 0, 1, 2)])
            y0 = grid[2]
            d1 = (grid[0] - 8 * grid[1] + 8 * grid[3] - grid[4]) / (12 * d)
            d2 = (-grid[0] + 16 * grid[1] - 30 * grid[2] + 16 * grid[3] - grid[4]) / (12 * d * d)
            for (i, j), w in zip(((0, 1), (0, 2), (0, 3), (1, 2)), closed):
                wron = max(wron, rel(y0[i] * d1[j] - y0[j] * d1[i], w))
            r = x * (1 - x) * d2 + (c - (a + b + 1) * x).real * d1 - (a * b).real * y0
            scale = np.abs(x * (1 - x) * d2) + np.abs(c * d1) + np.abs((a * b).real * y0)
            resid = max(resid, float(np.max(np.abs(r) / scale)))
    ok = gauss < 1e-8 and deriv < 1e-5 and conn < 1e-8 and wron < 1e-6 and resid < 1e-6
    report(12, ok, f"Gauss sum {gauss:.1e} (1e-8), derivative {deriv:.1e} (1e-5), connection {conn:.1e} (1e-8), "
                   f"Wronskians {wron:.1e} (1e-6), ODE residual {resid:.1e} (1e-6)")
    assert ok
