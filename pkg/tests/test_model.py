"""Amplitude evaluators against independent oracles and each other."""

import math

import mpmath
import numpy as np
import pytest

from chirpspdc.model import (
    ChirpTooSmallError,
    CrystalPumpConfig,
    GratingSpec,
    QuadratureConvergenceError,
    TransversePair,
    amplitude,
    amplitude_closed_form,
    amplitude_quadrature,
    amplitude_unchirped,
    auto_z_samples,
    chirp_from_periods,
    longitudinal_closed_form,
    longitudinal_quadrature,
    longitudinal_sinc,
)

mpmath.mp.dps = 40

PAPER = CrystalPumpConfig()  # 400 nm, n_e = 2.27857, L = 20 mm, w0 = 100 um


def rng_pairs(n, seed, p_max=3.0):
    rng = np.random.default_rng(seed)
    return [TransversePair(p=float(p), q=float(q), delta_phi=float(dp))
            for p, q, dp in zip(rng.uniform(0, p_max, n),
                                rng.uniform(0, p_max, n),
                                rng.uniform(0, 2 * math.pi, n))]


# ----------------------------------------------------------------------
# configuration and grating

def test_k_p_definition():
    assert PAPER.k_p == pytest.approx(2 * math.pi * 2.27857 / 0.4, rel=1e-15)


def test_rejects_nonpositive_lengths():
    for kwargs in ({"L": 0.0}, {"w0": -1.0}, {"lambda_p": 0.0}, {"alpha": -1e-6}):
        with pytest.raises(ValueError):
            CrystalPumpConfig(**kwargs)


def test_zero_chirp_from_equal_periods():
    assert chirp_from_periods(GratingSpec(p_i=5.0, p_f=5.0, L=1234.0)) == 0.0


def test_chirp_round_trip():
    # invert alpha = (2 pi / L)(p_f - p_i)/(p_f p_i) for p_f at alpha = 1e-5
    L, p_i, alpha = 20000.0, 5.0, 1e-5
    p_f = p_i / (1.0 - alpha * L * p_i / (2 * math.pi))
    assert p_f == pytest.approx(5.9464, abs=5e-5)
    back = chirp_from_periods(GratingSpec(p_i=p_i, p_f=p_f, L=L))
    assert back == pytest.approx(alpha, rel=1e-10)


def test_negative_chirp_signed():
    assert chirp_from_periods(GratingSpec(p_i=5.0, p_f=4.0, L=100.0)) < 0


def test_pair_validation():
    with pytest.raises(ValueError):
        TransversePair(p=-0.1, q=0.0, delta_phi=0.0)
    with pytest.raises(ValueError):
        TransversePair(p=0.1, q=0.1, delta_phi=2 * math.pi)


# ----------------------------------------------------------------------
# quadrature evaluator

def test_quadrature_at_origin_unchirped_gives_length():
    tp = TransversePair(p=0.0, q=0.0, delta_phi=0.0)
    val = amplitude_quadrature(tp, PAPER)
    assert val == pytest.approx(PAPER.L + 0j, rel=1e-12)


def test_quadrature_fresnel_oracle():
    # p = q = 0, alpha > 0: pure chirp integral, mpmath as oracle
    cfg = CrystalPumpConfig(alpha=1e-7)
    tp = TransversePair(p=0.0, q=0.0, delta_phi=0.0)
    val = amplitude_quadrature(tp, cfg, z_samples=auto_z_samples(cfg))
    L = mpmath.mpf(cfg.L)
    ref = mpmath.quad(
        lambda z: mpmath.exp(1j * mpmath.mpf(cfg.alpha) * (z + L / 2) * z),
        mpmath.linspace(-L / 2, L / 2, 65))
    assert val == pytest.approx(complex(ref), rel=1e-9)


def test_quadrature_matches_sinc_form_at_zero_chirp():
    for tp in rng_pairs(20, seed=7, p_max=0.8):
        ref = PAPER.L * amplitude_unchirped(tp, PAPER)
        val = amplitude_quadrature(tp, PAPER)
        assert val == pytest.approx(ref, rel=1e-10, abs=1e-10 * PAPER.L)


def test_quadrature_convergence_guard():
    cfg = CrystalPumpConfig(alpha=1e-5)
    # 640 chirp cycles cannot be represented by 512 nodes
    with pytest.raises(QuadratureConvergenceError):
        longitudinal_quadrature(cfg, np.array([0.0]), z_samples=128)
    with pytest.raises(ValueError):
        longitudinal_quadrature(cfg, np.array([0.0]), z_samples=32)


# ----------------------------------------------------------------------
# closed form

def test_closed_form_rejects_tiny_chirp():
    with pytest.raises(ChirpTooSmallError):
        longitudinal_closed_form(PAPER, np.array([0.01]))


def test_closed_form_against_quadrature_smoke():
    cfg = CrystalPumpConfig(alpha=1e-5)
    n = auto_z_samples(cfg)
    for tp in rng_pairs(10, seed=3):
        a = amplitude_closed_form(tp, cfg)
        b = amplitude_quadrature(tp, cfg, z_samples=n)
        assert a == pytest.approx(b, rel=1e-8, abs=1e-10 * cfg.L)


def test_closed_form_even_in_delta_phi():
    cfg = CrystalPumpConfig(alpha=1e-6)
    for dphi in (0.3, 1.2, 2.9):
        a = amplitude_closed_form(TransversePair(1.0, 0.4, dphi), cfg)
        b = amplitude_closed_form(
            TransversePair(1.0, 0.4, 2 * math.pi - dphi), cfg)
        assert a == pytest.approx(b, rel=1e-13)


def test_exchange_symmetry():
    cfg = CrystalPumpConfig(alpha=1e-6)
    for tp in rng_pairs(10, seed=11):
        swapped = TransversePair(
            p=tp.q, q=tp.p,
            delta_phi=(2 * math.pi - tp.delta_phi) % (2 * math.pi))
        assert amplitude(tp, cfg) == pytest.approx(amplitude(swapped, cfg),
                                                   rel=1e-12)


def test_colinear_reduces_to_pump_times_bracket():
    # p = q, dphi = 0: |p-q| = 0, the longitudinal factor is d2-independent
    cfg = CrystalPumpConfig(alpha=1e-6)
    tp = TransversePair(p=0.7, q=0.7, delta_phi=0.0)
    val = amplitude_closed_form(tp, cfg)
    expected = (math.exp(-(cfg.w0**2 / 4) * (1.4**2))
                * complex(longitudinal_closed_form(cfg, np.array([0.0]))[0]))
    assert val == pytest.approx(expected, rel=1e-12)


# ----------------------------------------------------------------------
# sinc limit and band structure

def test_unchirped_origin_is_one():
    assert amplitude_unchirped(TransversePair(0, 0, 0), PAPER) == pytest.approx(1.0)


def test_first_sinc_zero_location():
    # under the relative-wavenumber mismatch convention the first zero of
    # the longitudinal factor sits at |p-q| = sqrt(16 pi k_p / L)
    d = math.sqrt(16 * math.pi * PAPER.k_p / PAPER.L)
    assert d == pytest.approx(0.3001, abs=2e-4)
    val = longitudinal_sinc(PAPER, np.array([d**2]))[0]
    assert abs(val) < 1e-10 * PAPER.L


def test_phase_matched_band_ordering():
    # in-band magnitude dominates out-of-band for alpha > 0
    cfg = CrystalPumpConfig(alpha=1e-5)
    mid = abs(longitudinal_closed_form(cfg, cfg.k_mismatch * cfg.alpha * cfg.L))
    out = abs(longitudinal_closed_form(cfg, 4 * cfg.k_mismatch * cfg.alpha * cfg.L))
    assert mid > 10 * out


def test_amplitude_dispatch():
    tp = TransversePair(0.2, 0.1, 1.0)
    assert amplitude(tp, PAPER) == amplitude_unchirped(tp, PAPER)
    chirped = CrystalPumpConfig(alpha=1e-6)
    assert amplitude(tp, chirped) == amplitude_closed_form(tp, chirped)


def test_band_edge_scale_matches_config():
    # stationary phase exists only while the mismatch stays below
    # alpha L / 2, so the swept band ends at d2 = k_mismatch alpha L
    cfg = CrystalPumpConfig(alpha=1e-5)
    d2_edge = cfg.k_mismatch * cfg.alpha * cfg.L
    inside = abs(longitudinal_closed_form(cfg, 0.5 * d2_edge))
    outside = abs(longitudinal_closed_form(cfg, 2.0 * d2_edge))
    assert inside > 50 * outside
    # on the plateau the magnitude approaches the stationary-phase value
    assert inside == pytest.approx(math.sqrt(math.pi / cfg.alpha), rel=0.2)
