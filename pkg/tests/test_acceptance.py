"""Acceptance criteria 1-12, one test per criterion, each printing a PASS/FAIL line."""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from rieszlab import constants as cst
from rieszlab import halfline as hl
from rieszlab import specfun as sf
from rieszlab import stats
from rieszlab.domains import make_domain
from rieszlab.galerkin import BasisSpec, SpectralParams, extrapolated_spectrum, spectrum_for
from rieszlab.quadrature import composite_gauss


@pytest.fixture
def report(capsys):
    def _report(number: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\nCRITERION {number:2d} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return _report


def test_criterion_01_bessel_representations(report):
    start = time.perf_counter()
    s = np.geomspace(0.1, 20.0, 40)
    worst = 0.0
    for n in (0, 2, 4, 6):
        beta = (n + 1) / 2
        heat = np.array([sf.bessel_k_heat(beta, x) for x in s])
        lap = np.array([sf.bessel_k_laplace(beta, x) for x in s])
        worst = max(worst, float(np.max(np.abs(heat / lap - 1))))
    closed = max(
        float(np.max(np.abs(np.array([sf.bessel_k_heat(0.5, x) for x in s])
                            / (np.sqrt(np.pi / (2 * s)) * np.exp(-s)) - 1))),
        float(np.max(np.abs(np.array([sf.bessel_k_heat(1.5, x) for x in s])
                            / (np.sqrt(np.pi / (2 * s)) * np.exp(-s) * (1 + 1 / s)) - 1))),
    )
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and closed <= 1e-10 and elapsed < 10
    report(1, ok, f"representation gap {worst:.2e}, closed-form gap {closed:.2e}, {elapsed:.1f} s")


def test_criterion_02_bessel_inequalities(report):
    s = np.geomspace(0.01, 50.0, 2000)
    sup = np.array([np.max(sf.decay_ratio(n, s)) for n in range(7)])
    sup_ratio = float(sup.max() / sup.min())
    literal = max(float(np.max(r) / np.min(r)) for r in (sf.decay_ratio(n, s) for n in range(7)))
    violations = 0
    s_shift = np.geomspace(1e-3, 50.0, 2000)
    for d in (2, 3):
        lhs, rhs = sf.shift_inequality(d, s_shift)
        # d = 3 is asymptotically tight as s -> 0; allow rounding only.
        violations += int(np.sum(lhs > rhs * (1 + 1e-12)))
    ok = sup_ratio < 50 and violations == 0
    report(2, ok, f"max/min of per-order suprema {sup_ratio:.1f} (pointwise max/min {literal:.1e} "
                  f"reflects the decay of each ratio), shift-inequality violations {violations}")


def test_criterion_03_phase_shift(report):
    far = abs(float(hl.phase_shift(0.0, 1e4)) - math.pi / 8)
    rng = np.random.default_rng(20240607)
    omega = rng.uniform(0, 10, 100)
    lam = rng.uniform(0.01, 100, 100)
    scale = max(abs(float(hl.phase_shift(o, x)) - float(hl.phase_shift(0.0, x / math.sqrt(1 + o * o))))
                for o, x in zip(omega, lam))
    violations = 0
    for om in np.linspace(0, 10, 50):
        c = math.sqrt(1 + om * om)
        grid = np.geomspace(1e-3, 1e3, 50)
        d1 = hl.phase_shift_derivative(om, grid)
        step = 1e-6 * grid
        d2 = (hl.phase_shift_derivative(om, grid + step) - hl.phase_shift_derivative(om, grid - step)) / (2 * step)
        violations += int(np.sum(~(d1 > 0)))
        violations += int(np.sum(d1 > c / (math.pi * (grid**2 + c * c)) * (1 + 1e-12)))
        violations += int(np.sum(np.abs(d2) > 3 * c / (math.pi * (grid**2 + c * c) ** 1.5) * (1 + 1e-6)))
    ok = far <= 2e-4 and scale <= 1e-12 and violations == 0
    report(3, ok, f"|theta(1e4) - pi/8| = {far:.2e}, scaling gap {scale:.1e}, derivative violations {violations}")


def test_criterion_04_g_reconstruction(report):
    start = time.perf_counter()
    worst_fit = worst_m0 = worst_m1 = 0.0
    bound_ok = True
    t = np.concatenate([[0.0], np.geomspace(1e-6, 100, 200)])
    for omega in (0.0, 1.0, 3.0):
        for lam in (0.25, 1.0, 4.0):
            fit = hl.fit_g(omega, lam)
            worst_fit = max(worst_fit, fit.fit_residual)
            worst_m0 = max(worst_m0, abs(fit.moment(0) / hl.g_zero_moment(omega, lam) - 1))
            worst_m1 = max(worst_m1, abs(fit.moment(1) / hl.g_first_moment(omega, lam) - 1))
            g = fit(t)
            bound_ok &= bool(np.all(g >= 0) and np.all(g <= math.sin(hl.phase_shift(omega, lam)) * (1 + 1e-4)))
    elapsed = time.perf_counter() - start
    ok = worst_fit <= 1e-5 and worst_m0 <= 1e-3 and worst_m1 <= 1e-3 and bound_ok and elapsed < 60
    report(4, ok, f"fit residual {worst_fit:.1e}, moment gaps {worst_m0:.1e}/{worst_m1:.1e}, "
                  f"0 <= G <= sin theta {bound_ok}, {elapsed:.1f} s")


def _transform_norm(omega, phi):
    breaks = np.concatenate([[0.0], np.geomspace(1e-3, 1.0, 8), np.linspace(1.5, 10.0, 18),
                             np.geomspace(12.0, 200.0, 12)])
    lam, w = composite_gauss(breaks, 8)
    vals = np.asarray(hl.pi_transform(omega, phi, lam))
    # |Pi phi|^2 decays like lam^-4 beyond the grid.
    return float(np.dot(w, vals**2)) + float(vals[-1] ** 2 * lam[-1] / 3)


@pytest.mark.slow
def test_criterion_05_unitarity(report):
    cases = [
        ("t exp(-t)", 0.0, lambda t: t * np.exp(-t), 0.25),
        ("t^2 exp(-t/2)", 1.0, lambda t: t * t * np.exp(-t / 2), 24.0),
        ("sin(t) exp(-t)", 3.0, lambda t: np.sin(t) * np.exp(-t), 0.125),
    ]
    gaps = [abs(_transform_norm(om, phi) / exact - 1) for _, om, phi, exact in cases]
    ok = max(gaps) <= 1e-3
    report(5, ok, ", ".join(f"{name}: {g:.1e}" for (name, *_), g in zip(cases, gaps)))


def test_criterion_06_first_constant(report):
    worst = 0.0
    for d in (2, 3):
        for mu in np.linspace(0, 10, 41):
            a = cst.lambda1(d, mu)
            worst = max(worst, abs(a - cst.lambda1(d, mu, method="quadrature")) / a)
    values = max(abs(cst.lambda1(2, 0.0) - 1 / (12 * math.pi)), abs(cst.lambda1(2, 1.0) - 1 / (3 * math.pi)))
    gaps2 = [cst.first_constant_gap(2, m) for m in (1e-1, 1e-2, 1e-3)]
    gaps3 = [cst.first_constant_gap(3, m) for m in (1e-1, 1e-2, 1e-3)]
    # d = 2: the first constant is exactly linear in mu, so every gap is zero (bounded).
    ok2 = all(g == 0.0 for g in gaps2)
    ok3 = min(gaps3) > 0 and max(gaps3) / min(gaps3) < 2
    ok = worst <= 1e-10 and values <= 1e-10 and ok2 and ok3
    report(6, ok, f"route gap {worst:.1e}, value gap {values:.1e}, d=2 gaps {gaps2}, "
                  f"d=3 gaps {[round(g, 6) for g in gaps3]}")


@pytest.mark.slow
def test_criterion_07_second_constant_dual_path(report):
    start = time.perf_counter()
    res = cst.lambda2(2, 0.0, validate=True)
    elapsed = time.perf_counter() - start
    ok = res.relative_gap <= 1e-3 and res.value > 0 and elapsed < 600
    report(7, ok, f"t-first {res.value:.10f}, kernel {res.check:.10f}, gap {res.relative_gap:.1e}, {elapsed:.0f} s")


@pytest.mark.slow
def test_criterion_08_weighted_kernel_norm(report):
    rows = [cst.weighted_k_norm(2, mu, delta) for mu in (0.0, 1.0, 4.0) for delta in (0.0, 0.5)]
    finite = all(math.isfinite(r.value) and not r.degraded for r in rows)
    spread = {}
    for delta in (0.0, 0.5):
        ratios = [r.ratio for r in rows if r.delta == delta]
        spread[delta] = max(ratios) / min(ratios)
    ok = finite and max(spread.values()) < 10
    detail = ", ".join(f"(mu={r.mu:g}, delta={r.delta:g}) ratio {r.ratio:.4f}" for r in rows)
    report(8, ok, f"{detail}; spread {spread[0.0]:.2f} / {spread[0.5]:.2f}")


@pytest.mark.slow
def test_criterion_09_berezin(report, unit_square):
    h_grid = np.geomspace(0.005, 1.0, 30)
    violations = []
    min_margin = math.inf
    for m in (0.0, 1.0):
        for n in (16, 20, 24, 28, 32):
            spec = spectrum_for(unit_square, SpectralParams(2, m), BasisSpec("tensor_sine", (n, n)), n * n)
            rep = stats.berezin_check(spec, unit_square, 2, m, h_grid, raise_on_violation=False)
            min_margin = min(min_margin, float(np.min(rep.margins / rep.rhs)))
            if not rep.passed:
                violations.append((m, n))
    report(9, not violations, f"violations {violations}, smallest relative margin {min_margin:.3f}")


@pytest.mark.slow
def test_criterion_10_two_term(report, unit_square, square_spectrum):
    target = 4 * cst.lambda2(2, 0.0).value - 1 / (4 * math.pi)
    ext = extrapolated_spectrum(unit_square, SpectralParams(2, 1.0), (20, 24, 28, 32), 350)
    ev = ext.eigenvalues
    fit = stats.extract_boundary_coefficient(ext, unit_square, 2, 1.0, (ev[49], ev[199]))
    raw = square_spectrum.eigenvalues
    raw_fit = stats.extract_boundary_coefficient(square_spectrum, unit_square, 2, 1.0, (raw[49], raw[199]))
    error = abs(fit.estimate / target - 1)
    planted = stats.synthetic_spectrum(2, 1.0, target, 2000)
    planted_fit = stats.extract_boundary_coefficient(planted, unit_square, 2, 1.0, (planted[49], planted[199]))
    planted_error = abs(planted_fit.estimate / target - 1)
    ok = error <= 0.15 and planted_error <= 0.01
    report(10, ok, f"target {target:.6f}; basis-extrapolated estimate {fit.estimate:.6f} +- {fit.stderr:.1e} "
                   f"({100 * error:.1f}%); raw 32x32 estimate {raw_fit.estimate:.6f} "
                   f"({100 * abs(raw_fit.estimate / target - 1):.0f}%); planted recovery {100 * planted_error:.3f}%")


def test_criterion_11_heat_trace(report, unit_square, square_spectrum):
    d1 = stats.heat_constants(2)[0]
    ratios = []
    for t in np.linspace(0.08, 0.2, 13):
        z = stats.heat_trace(square_spectrum, float(t), tail="weyl").value
        lead = d1 * unit_square.volume / t**2
        sub = stats.predict_heat_trace(2, 1.0, unit_square, float(t)) - lead
        ratios.append((z - sub) / lead)
    worst = max(abs(r - 1) for r in ratios)
    report(11, worst <= 0.05, f"ratio range [{min(ratios):.4f}, {max(ratios):.4f}] (counting-law tail above "
                              f"the computed spectrum)")


_FIXTURE_SCRIPT = r"""
import sys
from rieszlab.cli import main
out = sys.argv[1]
cmds = [
    ["constants", "--d", "2", "--mu", "0", "1", "--out", f"{out}/constants.csv"],
    ["constants", "--d", "3", "--mu", "0.5", "--format", "json", "--out", f"{out}/constants3.json"],
    ["phase-shift", "--omega", "0.5", "--lam", "0.1", "1", "10", "--out", f"{out}/phase.csv"],
    ["eigenfunction", "--omega", "1", "--lam", "2", "--out", f"{out}/eigenfunction.csv"],
    ["spectrum", "--domain", "rect:1x1", "--m", "1", "--basis", "sine:24x24", "--k", "200",
     "--out", f"{out}/spectrum.json"],
    ["spectrum", "--domain", "disk:0.5", "--basis", "tent:24x24", "--k", "40", "--out", f"{out}/disk.json"],
    ["verify", "--spectrum", f"{out}/spectrum.json", "--statistic", "riesz", "--out", f"{out}/riesz.csv"],
    ["heat-trace", "--spectrum", f"{out}/spectrum.json", "--tail", "weyl", "--out", f"{out}/heat.csv"],
]
for c in cmds:
    code = main(c)
    if code != 0:
        sys.exit(f"{c[0]} exited with {code}")
"""


@pytest.mark.slow
def test_criterion_12_determinism(report, tmp_path):
    dirs = [tmp_path / "run1", tmp_path / "run2"]
    for d in dirs:
        d.mkdir()
        subprocess.run([sys.executable, "-c", _FIXTURE_SCRIPT, str(d)], check=True)
    names = sorted(p.name for p in dirs[0].iterdir())
    differing = [n for n in names if (dirs[0] / n).read_bytes() != (dirs[1] / n).read_bytes()]
    ok = len(names) == 8 and not differing
    report(12, ok, f"{len(names)} fixtures from two fresh processes, differing: {differing or 'none'}")
