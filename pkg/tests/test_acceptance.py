"""Acceptance gate: one test per headline criterion, one PASS/FAIL line each.

Run with `pytest -v -s tests/test_acceptance.py` to see every line.  The
computationally heavy w0 = 300 um chirped point (thousands of OAM
sectors, tens of minutes) is opt-in: set CHIRPSPDC_HEAVY=1.
"""

import math
import os

import numpy as np
import pytest

from chirpspdc.model import (
    CrystalPumpConfig,
    TransversePair,
    amplitude_quadrature,
    amplitude_unchirped,
    auto_z_samples,
    longitudinal_closed_form,
    longitudinal_quadrature,
)
from chirpspdc.schmidt import (
    GAMMA_SINC_FIT,
    band_center_radius,
    calibrate_sinc_gamma,
    converged_solve,
    correlated_area,
    entropy,
    gaussian_approx_entropy,
    schmidt_number,
    solve,
    spiral_spectrum,
)

PAPER = CrystalPumpConfig()


def criterion(name: str, ok: bool, detail: str = ""):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def point1():
    return converged_solve(PAPER, workers=2)


@pytest.fixture(scope="module")
def alpha_trend():
    alphas = [0.0, 2.5e-6, 5e-6, 7.5e-6, 1e-5]
    out = []
    for a in alphas:
        spec, _ = solve(CrystalPumpConfig(alpha=a), workers=2)
        out.append((a, entropy(spec), schmidt_number(spec)))
    return out


def test_point1_unchirped_entropy_and_schmidt_number(point1):
    spec, diag = point1
    e, k = entropy(spec), schmidt_number(spec)
    criterion(
        "paper point 1 (alpha=0, L=20 mm, w0=100 um)",
        abs(e - 6.4) <= 0.2 and abs(k - 42.9) <= 0.05 * 42.9
        and diag["converged"],
        f"E={e:.4f} ebits (6.4±0.2), K={k:.3f} (42.9±5%), "
        f"doubling shift={diag['doubling_shift']:.2e}")


@pytest.mark.skipif(os.environ.get("CHIRPSPDC_HEAVY") != "1",
                    reason="heavy point (~30-60 min); set CHIRPSPDC_HEAVY=1")
def test_point2_heavy_chirped_waist300():
    cfg = CrystalPumpConfig(alpha=1e-5, w0=300.0)
    spec, diag = solve(cfg, workers=2)
    e, k = entropy(spec), schmidt_number(spec)
    criterion(
        "paper point 2 (alpha=1e-5 um^-2, w0=300 um)",
        abs(e - 16.6) <= 0.5 and abs(k - 87113) <= 0.1 * 87113,
        f"E={e:.4f} ebits (16.6±0.5), K={k:.1f} (87113±10%), "
        f"l_cut={diag['l_cut']}")


def test_schmidt_number_linear_in_chirp(alpha_trend):
    a = np.array([row[0] for row in alpha_trend])
    k = np.array([row[2] for row in alpha_trend])
    slope, intercept = np.polyfit(a, k, 1)
    fit = slope * a + intercept
    ss_res = float(np.sum((k - fit) ** 2))
    ss_tot = float(np.sum((k - k.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    criterion("K vs alpha linearity (w0=100 um)", r2 > 0.98,
              f"R^2={r2:.5f} (>0.98), K={np.round(k, 1).tolist()}")


def test_entropy_monotone_in_chirp(alpha_trend):
    e = [row[1] for row in alpha_trend]
    increments = [b - a for a, b in zip(e, e[1:])]
    criterion("E non-decreasing in alpha (w0=100 um)",
              all(d >= 0 for d in increments),
              f"E={[round(v, 4) for v in e]} (saturating increments "
              f"{[round(d, 3) for d in increments]})")


def test_gaussian_approximation_benchmark():
    e_short = gaussian_approx_entropy(CrystalPumpConfig(L=1000.0))
    e_long = gaussian_approx_entropy(PAPER)
    gamma = calibrate_sinc_gamma(target_entropy=4.2)
    criterion(
        "double-Gaussian entropy benchmark",
        abs(e_short - 8.5) <= 0.15 * 8.5 and abs(e_long - 4.2) <= 0.15 * 4.2
        and abs(gamma - GAMMA_SINC_FIT) < 5e-4,
        f"E(L=1 mm)={e_short:.3f} (~8.5), E(L=20 mm)={e_long:.3f} (~4.2), "
        f"calibrated gamma={gamma:.6f} (recorded {GAMMA_SINC_FIT})")


def test_closed_form_oracle_equivalence():
    rng = np.random.default_rng(42)
    worst = 0.0
    for alpha in (1e-7, 1e-6, 1e-5):
        cfg = CrystalPumpConfig(alpha=alpha)
        n = auto_z_samples(cfg)
        # pump envelope cancels in the ratio; sample d2 over the whole
        # band plus its tails where both evaluators stay representable
        d2 = rng.uniform(0.0, 2.0 * cfg.k_mismatch * cfg.alpha * cfg.L
                         + 0.25, 100)
        closed = longitudinal_closed_form(cfg, d2)
        quad = longitudinal_quadrature(cfg, d2, z_samples=n)
        ratio = closed / quad
        spread = float(np.std(ratio) / abs(np.mean(ratio)))
        worst = max(worst, spread)
        # and through the full amplitudes at representable (p, q, dphi)
        for _ in range(10):
            tp = TransversePair(p=float(rng.uniform(0, 0.05)),
                                q=float(rng.uniform(0, 0.05)),
                                delta_phi=float(rng.uniform(0, 2 * math.pi)))
            r = (complex(longitudinal_closed_form(cfg, tp.diff_sq))
                 / complex(longitudinal_quadrature(cfg, np.array([tp.diff_sq]), n)[0]))
            worst = max(worst, abs(r - np.mean(ratio)) / abs(np.mean(ratio)))
    criterion("closed form vs quadrature oracle (ratio constant)",
              worst < 1e-6, f"max relative spread {worst:.2e} (<1e-6); "
              "the constant itself is 1 (exact transcription)")


def test_alpha_to_zero_continuity():
    rng = np.random.default_rng(7)
    cfg = CrystalPumpConfig(alpha=1e-12)
    worst = 0.0
    for _ in range(50):
        tp = TransversePair(p=float(rng.uniform(0, 0.12)),
                            q=float(rng.uniform(0, 0.12)),
                            delta_phi=float(rng.uniform(0, 2 * math.pi)))
        quad = amplitude_quadrature(tp, cfg)
        sinc = cfg.L * amplitude_unchirped(tp, PAPER)
        worst = max(worst, abs(quad - sinc) / abs(sinc))
    criterion(
        "alpha -> 0 continuity at alpha=1e-12 (tolerance 1e-6)",
        worst < 1e-6,
        f"max relative deviation {worst:.2e}; the residual chirp phase "
        "alpha*L^2/12 ~ 3e-5 rad dominates and cannot drop below 1e-6 at "
        "this alpha (see notes on unattainable criteria)")


def test_invariant_suite(point1):
    spec, _ = point1
    lam = spec.lambdas()
    checks = []

    total = float(lam.sum()) + spec.tail_mass
    checks.append(("sum lambda", abs(total - 1.0) < 1e-9))

    sp = spiral_spectrum(spec)
    sym = max(abs(sp[l] - sp[-l]) for l in sp)
    checks.append(("P_l symmetry", sym < 1e-6))

    # analytic double-Gaussian spectrum
    from chirpspdc.schmidt import schmidt_decompose
    from chirpspdc.special import gauss_legendre
    a, b = 1.5, -0.9
    A, B = (a + b) / 2, (a - b) / 2
    mu = ((math.sqrt(A) - math.sqrt(B)) / (math.sqrt(A) + math.sqrt(B))) ** 2
    rule = gauss_legendre(200, -10.0, 10.0)
    x, sw = rule.nodes, np.sqrt(rule.weights)
    m = sw[:, None] * np.exp(-a * (x[:, None]**2 + x[None, :]**2)
                             - 2 * b * x[:, None] * x[None, :]) * sw[None, :]
    got = np.array([v for _, v in schmidt_decompose(m)])
    got /= got.sum()
    ref = (1 - mu) * mu ** np.arange(10)
    checks.append(("Mehler spectrum", float(np.abs(got[:10] - ref).max()) < 1e-8))

    from chirpspdc.schmidt import assemble_spectrum
    uniform = assemble_spectrum({0: [1.0] * 32})
    checks.append(("uniform spectrum",
                   entropy(uniform) == 5.0 and schmidt_number(uniform) == 32.0))

    s1, _ = solve(PAPER, n_radial=48, p_max=0.875, n_phi=1024, workers=1)
    s4, _ = solve(PAPER, n_radial=48, p_max=0.875, n_phi=1024, workers=4)
    checks.append(("worker-count determinism", s1.entries == s4.entries))

    failed = [name for name, ok in checks if not ok]
    criterion("invariant suite", not failed,
              f"{len(checks) - len(failed)}/{len(checks)} invariants hold"
              + (f"; failing: {failed}" if failed else ""))


def test_correlated_area_shrinks_with_chirp():
    rows = []
    for alpha in (0.0, 5e-6, 1e-5):
        cfg = CrystalPumpConfig(alpha=alpha)
        q = band_center_radius(cfg)
        rows.append((alpha,) + correlated_area(cfg, (q, 0.0)))
    radial = [r for _, r, _ in rows]
    azimuthal = [a for _, _, a in rows]
    radial_ok = all(b < a for a, b in zip(radial, radial[1:]))
    azimuthal_ok = all(b < a for a, b in zip(azimuthal, azimuthal[1:]))
    radial_note = ("strictly decreasing" if radial_ok else
                   "NOT strictly decreasing; pump-waist-limited at "
                   "~2 sqrt(2 ln 2)/w0 for every alpha")
    azimuthal_note = ("strictly decreasing" if azimuthal_ok
                      else "not decreasing")
    criterion(
        "correlated-area FWHM strictly decreasing in alpha",
        radial_ok and azimuthal_ok,
        f"radial={[f'{r:.5f}' for r in radial]} ({radial_note}), "
        f"azimuthal={[f'{a:.5f}' for a in azimuthal]} ({azimuthal_note})")


def test_oracle_evaluator_equivalence_on_entropy():
    cfg = CrystalPumpConfig(alpha=1e-6)
    common = dict(n_radial=64, p_max=1.6, n_phi=2048, check_edge_tail=False)
    s_closed, _ = solve(cfg, evaluator="closed", **common)
    s_quad, _ = solve(cfg, evaluator="quadrature", **common)
    de = abs(entropy(s_closed) - entropy(s_quad))
    criterion("entropy agreement closed form vs quadrature kernel",
              de < 1e-3, f"|dE| = {de:.2e} ebits (<1e-3) on a 64-node grid")
