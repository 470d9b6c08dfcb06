"""Physical configuration and the joint transverse amplitude of the pair.

All lengths are micrometers, wavenumbers rad/um, chirp um^-2.

The two-photon amplitude for a collinear, linearly chirped QPM crystal
factorizes into a pump envelope exp(-w0^2 |p+q|^2 / 4) and a longitudinal
phase-matching integral over the crystal,

    I(d2) = int_{-L/2}^{L/2} dz exp[i (mismatch(d2) z + alpha (z + L/2) z)],

with d2 = |p - q|^2.  The longitudinal mismatch is carried by the relative
transverse wavenumber (p - q)/2 at the pump wavenumber,
mismatch(d2) = d2 / (8 k_p); this convention reproduces the reference
entanglement figures (see tests/test_acceptance.py).  Three evaluators are
provided: the erf closed form, direct z-quadrature (the oracle), and the
unchirped sinc limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .special import INV_SQRT_I, SQRT_I, composite_gauss_legendre, erf_complex

__all__ = [
    "CrystalPumpConfig",
    "GratingSpec",
    "TransversePair",
    "ChirpTooSmallError",
    "QuadratureConvergenceError",
    "chirp_from_periods",
    "amplitude_closed_form",
    "amplitude_quadrature",
    "amplitude_unchirped",
    "amplitude",
    "longitudinal_closed_form",
    "longitudinal_quadrature",
    "longitudinal_sinc",
    "pump_envelope",
    "auto_z_samples",
]

#: below this chirp the closed form loses all significance; use the sinc limit
ALPHA_MIN = 1e-12


class ChirpTooSmallError(ValueError):
    """Closed-form evaluator called below its chirp threshold."""


class QuadratureConvergenceError(RuntimeError):
    """Doubling the z-sample count moved the result by more than the tolerance."""


@dataclass(frozen=True)
class CrystalPumpConfig:
    """Pump beam, crystal, and grating-chirp parameters."""

    lambda_p: float = 0.4       # pump wavelength, um
    n_e: float = 2.27857        # extraordinary index at lambda_p
    L: float = 20000.0          # crystal length, um
    w0: float = 100.0           # pump waist, um
    alpha: float = 0.0          # linear chirp, um^-2
    K0: float | None = None     # grating frequency at the entrance face (informational)

    def __post_init__(self):
        for name in ("lambda_p", "n_e", "L", "w0"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.alpha < 0:
            raise ValueError("negative chirp is not supported by the evaluators")

    @property
    def k_p(self) -> float:
        """Pump wavenumber inside the crystal, rad/um."""
        return 2.0 * math.pi * self.n_e / self.lambda_p

    @property
    def k_mismatch(self) -> float:
        """Wavenumber scale of the longitudinal mismatch.

        The relative transverse wavenumber (p - q)/2 dephases as
        |p - q|^2 / (8 k_p) = d2 / (2 * k_mismatch).
        """
        return 4.0 * self.k_p

    @property
    def rayleigh_range(self) -> float:
        """Pump diffraction length k_p w0^2 / 2, um."""
        return 0.5 * self.k_p * self.w0**2

    def mismatch(self, d2):
        """Longitudinal wavevector mismatch (rad/um) at |p-q|^2 = d2."""
        return np.asarray(d2) / (2.0 * self.k_mismatch)


@dataclass(frozen=True)
class GratingSpec:
    """Linearly chirped grating given by its end-face periods."""

    p_i: float  # period at the entrance face, um
    p_f: float  # period at the output face, um
    L: float    # crystal length, um

    def __post_init__(self):
        if self.p_i <= 0 or self.p_f <= 0 or self.L <= 0:
            raise ValueError("grating periods and length must be positive")


@dataclass(frozen=True)
class TransversePair:
    """Polar transverse wavenumbers of signal (p) and idler (q)."""

    p: float            # um^-1
    q: float            # um^-1
    delta_phi: float    # phi_p - phi_q, rad, in [0, 2*pi)

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError("radial wavenumbers must be nonnegative")
        if not 0.0 <= self.delta_phi < 2.0 * math.pi:
            raise ValueError("delta_phi must lie in [0, 2*pi)")

    @property
    def sum_sq(self) -> float:
        """|p + q|^2 for the vector sum."""
        return self.p**2 + self.q**2 + 2.0 * self.p * self.q * math.cos(self.delta_phi)

    @property
    def diff_sq(self) -> float:
        """|p - q|^2 for the vector difference."""
        return self.p**2 + self.q**2 - 2.0 * self.p * self.q * math.cos(self.delta_phi)


def chirp_from_periods(g: GratingSpec) -> float:
    """Chirp parameter from the end-face grating periods.

    alpha = (2 pi / L) (p_f - p_i) / (p_f p_i).  The sign follows the
    formula; a negative result (p_f < p_i) is returned as-is and left to
    the caller, since the amplitude evaluators accept only alpha >= 0.
    """
    return (2.0 * math.pi / g.L) * (g.p_f - g.p_i) / (g.p_f * g.p_i)


def pump_envelope(cfg: CrystalPumpConfig, s2):
    """Gaussian pump angular spectrum at |p + q|^2 = s2."""
    return np.exp(-(cfg.w0**2 / 4.0) * np.asarray(s2))


def longitudinal_sinc(cfg: CrystalPumpConfig, d2):
    """Unchirped longitudinal integral: L * sinc(L * mismatch / 2)."""
    x = 0.5 * cfg.L * cfg.mismatch(d2)
    return cfg.L * np.sinc(x / np.pi)


def longitudinal_closed_form(cfg: CrystalPumpConfig, d2):
    """Closed form of the chirped longitudinal integral via complex erf.

    sqrt(i pi / 4 alpha) exp[-i(alpha L^2/16 + L m(d2)/4 + m(d2)^2/(4 alpha))]
      * [erf(3 sqrt(alpha) L / (4 sqrt(i)) + m(d2)/(2 sqrt(i alpha)))
         - erf(-sqrt(alpha) L / (4 sqrt(i)) + m(d2)/(2 sqrt(i alpha)))],

    with m = mismatch and sqrt(i) on the principal branch.  Exactly equal
    (no free constant) to longitudinal_quadrature for alpha > 0.
    """
    alpha = cfg.alpha
    if alpha <= ALPHA_MIN:
        raise ChirpTooSmallError(
            f"alpha={alpha} <= {ALPHA_MIN}; use the unchirped sinc form"
        )
    sa = math.sqrt(alpha)
    m = cfg.mismatch(d2)
    x = m / (2.0 * sa)
    prefactor = math.sqrt(math.pi / (4.0 * alpha)) * SQRT_I
    phase = np.exp(-1j * (alpha * cfg.L**2 / 16.0 + 0.25 * cfg.L * m + m**2 / (4.0 * alpha)))
    bracket = erf_complex((0.75 * sa * cfg.L + x) * INV_SQRT_I) - erf_complex(
        (-0.25 * sa * cfg.L + x) * INV_SQRT_I
    )
    return prefactor * phase * bracket


def auto_z_samples(cfg: CrystalPumpConfig) -> int:
    """z-sample count matched to the ~alpha L^2 / 2pi chirp oscillations."""
    cycles = cfg.alpha * cfg.L**2 / (2.0 * math.pi)
    return max(512, 1 << int(math.ceil(math.log2(max(8.0 * cycles, 1.0)))))


def longitudinal_quadrature(cfg: CrystalPumpConfig, d2, z_samples: int = 512,
                            rtol: float = 1e-8):
    """Direct Gauss-Legendre evaluation of the longitudinal integral.

    Evaluates at z_samples and 2*z_samples nodes; raises
    QuadratureConvergenceError if the two differ by more than rtol
    (relative to the coarse-node magnitude scale).
    """
    if z_samples < 64:
        raise ValueError("z_samples must be >= 64")
    d2 = np.asarray(d2, dtype=float)
    results = []
    for n in (z_samples, 2 * z_samples):
        z, wz = composite_gauss_legendre(n, -cfg.L / 2.0, cfg.L / 2.0)
        phase = np.exp(
            1j * (cfg.mismatch(d2)[..., None] * z + cfg.alpha * (z + cfg.L / 2.0) * z)
        )
        results.append(np.sum(phase * wz, axis=-1))
    coarse, fine = results
    scale = np.max(np.abs(fine)) + 1e-300
    if np.max(np.abs(fine - coarse)) > rtol * scale:
        raise QuadratureConvergenceError(
            f"z-quadrature not converged at {z_samples} samples"
        )
    return fine


def amplitude_unchirped(tp: TransversePair, cfg: CrystalPumpConfig) -> complex:
    """Unchirped joint amplitude (sinc form), unnormalized with C = 1."""
    return complex(pump_envelope(cfg, tp.sum_sq) * longitudinal_sinc(cfg, tp.diff_sq) / cfg.L)


def amplitude_closed_form(tp: TransversePair, cfg: CrystalPumpConfig) -> complex:
    """Chirped joint amplitude via the erf closed form, unnormalized."""
    return complex(pump_envelope(cfg, tp.sum_sq) * longitudinal_closed_form(cfg, tp.diff_sq))


def amplitude_quadrature(tp: TransversePair, cfg: CrystalPumpConfig,
                         z_samples: int = 512) -> complex:
    """Joint amplitude by direct z-quadrature; the evaluator of record."""
    val = longitudinal_quadrature(cfg, np.array([tp.diff_sq]), z_samples)[0]
    return complex(pump_envelope(cfg, tp.sum_sq) * val)


def amplitude(tp: TransversePair, cfg: CrystalPumpConfig) -> complex:
    """Fast amplitude: closed form when chirped, sinc limit otherwise."""
    if cfg.alpha > ALPHA_MIN:
        return amplitude_closed_form(tp, cfg)
    return amplitude_unchirped(tp, cfg)
