"""OAM-sector kernels, Schmidt spectra, and entanglement metrics.

The joint amplitude depends on the azimuthal angles only through
delta_phi = phi_p - phi_q, so it splits into winding-number sectors

    Psi(p, q, delta_phi) = sum_l B_l(p, q) exp(i l delta_phi),

and each radial kernel B_l carries its own Schmidt spectrum.  B_l is
obtained by uniform angular sampling + FFT (spectrally accurate for the
periodic smooth integrand); the radial direction is discretized with a
Gauss-Legendre rule on [0, p_max], the measure p dp folded symmetrically
into the kernel matrix so that plain SVD yields the continuous spectrum.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import (
    ALPHA_MIN,
    CrystalPumpConfig,
    longitudinal_closed_form,
    longitudinal_quadrature,
    longitudinal_sinc,
    auto_z_samples,
)
from .special import gauss_legendre

__all__ = [
    "RadialGrid",
    "OamKernel",
    "SchmidtSpectrum",
    "EntanglementReport",
    "AliasingError",
    "TailMassError",
    "PeakNotFoundError",
    "default_p_max",
    "default_n_phi",
    "default_n_radial",
    "azimuthal_project",
    "build_kernel",
    "build_kernel_stack",
    "schmidt_decompose",
    "assemble_spectrum",
    "entropy",
    "schmidt_number",
    "spiral_spectrum",
    "correlated_area",
    "gaussian_approx_entropy",
    "calibrate_sinc_gamma",
    "GAMMA_SINC_FIT",
]

EPS_MODE = 1e-12    # relative eigenvalue truncation
EPS_TAIL = 1e-7     # spiral-spectrum tail threshold
ALIAS_TOL = 1e-10   # near-Nyquist azimuthal leakage tolerance


class AliasingError(RuntimeError):
    """Azimuthal sampling too coarse for the kernel's OAM content."""


class TailMassError(RuntimeError):
    """Radial cutoff p_max leaves too much marginal intensity near the edge."""


class PeakNotFoundError(RuntimeError):
    """Conditional coincidence density has no interior maximum on the scan."""


# ----------------------------------------------------------------------
# grids and sampling defaults

@dataclass(frozen=True)
class RadialGrid:
    """Gauss-Legendre discretization of the radial wavenumber on [0, p_max]."""

    nodes: np.ndarray    # um^-1, strictly increasing in (0, p_max)
    weights: np.ndarray
    p_max: float
    n_radial: int

    @classmethod
    def build(cls, n_radial: int, p_max: float) -> "RadialGrid":
        if n_radial < 2:
            raise ValueError("n_radial must be >= 2")
        if p_max <= 0:
            raise ValueError("p_max must be positive")
        rule = gauss_legendre(n_radial, 0.0, p_max)
        return cls(nodes=rule.nodes, weights=rule.weights, p_max=p_max,
                   n_radial=n_radial)

    @property
    def sqrt_measure(self) -> np.ndarray:
        """sqrt(w_i p_i): the symmetric fold of the radial measure p dp."""
        return np.sqrt(self.weights * self.nodes)


def default_p_max(cfg: CrystalPumpConfig) -> float:
    """Radial cutoff covering the chirped band, pump width, and sinc tails.

    The chirp sweeps phase matching over |p-q| up to sqrt(k_mismatch
    alpha L); photon radii reach half of that.  The unchirped sinc needs
    several lobes of tail for converged entropy, hence the 4x half-zero
    term.  Validated by the edge tail-mass check on every run.
    """
    band = math.sqrt(2.0 * cfg.k_p * cfg.alpha * cfg.L)
    sinc_tail = 4.0 * math.sqrt(4.0 * math.pi * cfg.k_p / cfg.L)
    return 1.25 * (max(band, sinc_tail) + 10.0 / cfg.w0)


def default_n_phi(cfg: CrystalPumpConfig, p_max: float) -> int:
    """Azimuthal sample count keeping near-Nyquist leakage below ALIAS_TOL.

    The fastest angular scale is the pump factor exp(-w0^2 p q (1 +
    cos(dphi)) / 2) at p = q = p_max, whose OAM content decays like
    exp(-l^2 / (w0^2 p_max^2)).
    """
    l_alias = cfg.w0 * p_max * math.sqrt(math.log(1.0 / ALIAS_TOL))
    n = 2.0 * 1.15 * l_alias
    return max(256, 1 << int(math.ceil(math.log2(n))))


def default_n_radial(cfg: CrystalPumpConfig) -> int:
    """Radial resolution default; the doubling gate overrides it."""
    return 256 if cfg.alpha <= 5e-6 else 512


# ----------------------------------------------------------------------
# kernel construction

@dataclass(frozen=True)
class OamKernel:
    """Weighted radial kernel matrix for one winding number.

    values[i, j] = sqrt(w_i p_i) B_l(p_i, p_j) sqrt(w_j p_j); its singular
    values squared are the Schmidt eigenvalues of the continuous kernel.
    """

    l: int
    values: np.ndarray
    grid: RadialGrid


def _longitudinal(cfg: CrystalPumpConfig, d2, evaluator: str, z_samples=None):
    if evaluator == "closed":
        if cfg.alpha > ALPHA_MIN:
            return longitudinal_closed_form(cfg, d2)
        return longitudinal_sinc(cfg, d2)
    if evaluator == "quadrature":
        n = z_samples or auto_z_samples(cfg)
        shape = d2.shape
        flat = d2.ravel()
        out = np.empty(flat.shape, complex)
        step = max(1, int(4e6 / max(n, 1)))
        for k0 in range(0, flat.size, step):
            out[k0:k0 + step] = longitudinal_quadrature(cfg, flat[k0:k0 + step], n)
        return out.reshape(shape)
    raise ValueError(f"unknown evaluator {evaluator!r}")


class KernelStack:
    """B_l matrices for l = 0..l_keep-1 plus sampling diagnostics.

    sector_weights[l] holds the exact eigenvalue sum ||M_l||_F^2 of every
    sector up to the Nyquist winding number, including those whose kernel
    was not stored, so tail masses and the l cutoff are never estimates.
    """

    def __init__(self, kernels: np.ndarray, grid: RadialGrid, n_phi: int,
                 alias_ratio: float, sector_weights: np.ndarray | None = None,
                 marginal: np.ndarray | None = None):
        self.kernels = kernels          # (l_keep, n, n), measure NOT folded
        self.grid = grid
        self.n_phi = n_phi
        self.alias_ratio = alias_ratio
        self.sector_weights = sector_weights
        self.marginal = marginal        # exact radial marginal, all sectors

    @property
    def l_keep(self) -> int:
        return self.kernels.shape[0]

    def weighted(self, l: int) -> np.ndarray:
        sw = self.grid.sqrt_measure
        m = np.asarray(self.kernels[l]).astype(np.complex128)
        m *= sw[:, None]
        m *= sw[None, :]
        return m

    def sector_sums(self) -> np.ndarray:
        """Exact per-sector eigenvalue sums ||M_l||_F^2, no SVD needed."""
        sw2 = self.grid.weights * self.grid.nodes
        out = np.empty(self.l_keep)
        for l in range(self.l_keep):
            a2 = np.abs(np.asarray(self.kernels[l])) ** 2
            out[l] = float(sw2 @ a2 @ sw2)
        return out

    def edge_tail_fraction(self) -> float:
        """Marginal intensity fraction on [0.9 p_max, p_max], all sectors."""
        if self.marginal is None:
            raise ValueError("stack built without marginal accumulation")
        sw2 = self.grid.weights * self.grid.nodes
        edge = self.grid.nodes >= 0.9 * self.grid.p_max
        total = float(self.marginal @ sw2)
        return float(self.marginal[edge] @ sw2[edge]) / total if total > 0 else 0.0


def build_kernel_stack(cfg: CrystalPumpConfig, grid: RadialGrid, n_phi: int,
                       l_keep: int | None = None, evaluator: str = "closed",
                       workers: int = 1, z_samples: int | None = None,
                       storage: np.ndarray | None = None,
                       check_alias: bool = True) -> KernelStack:
    """Evaluate Psi on the (p_i, p_j, delta_phi) grid and FFT out B_l.

    Psi is even in delta_phi, so only half the circle is evaluated; the
    (i, j) exchange symmetry halves the work again.  Output is bitwise
    independent of the worker count (disjoint block writes, fixed order).
    """
    n = grid.n_radial
    if n_phi < 4 or n_phi & (n_phi - 1):
        raise ValueError("n_phi must be a power of two >= 4")
    if l_keep is None:
        l_keep = n_phi // 2
    if l_keep > n_phi // 2:
        raise ValueError("l_keep cannot exceed n_phi/2")
    half = n_phi // 2 + 1
    cosphi = np.cos(2.0 * math.pi * np.arange(half) / n_phi)
    p = grid.nodes
    w2 = grid.weights * grid.nodes
    if storage is None:
        storage = np.empty((l_keep, n, n), np.complex128)
    nyq_idx = n_phi // 2 - 1

    block = max(8, int(math.sqrt(3e6 / half)))
    if evaluator == "quadrature":
        block = max(2, block // 4)
    pairs = [(i0, j0) for i0 in range(0, n, block) for j0 in range(i0, n, block)]

    def do_block(ij):
        i0, j0 = ij
        i1, j1 = min(n, i0 + block), min(n, j0 + block)
        pi = p[i0:i1, None, None]
        pj = p[None, j0:j1, None]
        ssq = pi**2 + pj**2
        cross = 2.0 * pi * pj * cosphi
        psi_half = np.asarray(
            _longitudinal(cfg, ssq - cross, evaluator, z_samples), complex)
        psi_half = psi_half * np.exp(-(cfg.w0**2 / 4.0) * (ssq + cross))
        full = np.empty((i1 - i0, j1 - j0, n_phi), complex)
        full[..., :half] = psi_half
        full[..., half:] = psi_half[..., -2:0:-1]
        coeff = np.fft.fft(full, axis=-1) / n_phi
        amax = float(np.abs(coeff[..., nyq_idx]).max())
        a2 = np.abs(coeff[..., :half]) ** 2
        fvec = np.einsum("i,j,ijl->l", w2[i0:i1], w2[j0:j1], a2)
        # angular mean of |Psi|^2 (Parseval: equals sum_l |B_l|^2)
        pw = np.abs(psi_half) ** 2
        pw[..., 1:-1] *= 2.0
        pw = pw.sum(axis=-1) / n_phi
        mvec = np.zeros(n)
        mvec[i0:i1] += pw @ w2[j0:j1]
        if j0 > i0:
            fvec *= 2.0
            mvec[j0:j1] += w2[i0:i1] @ pw
        blk = np.ascontiguousarray(np.moveaxis(coeff[..., :l_keep], 2, 0))
        storage[:, i0:i1, j0:j1] = blk
        if j0 > i0:
            storage[:, j0:j1, i0:i1] = blk.transpose(0, 2, 1)
        return amax, fvec, mvec

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(do_block, pairs))
    else:
        results = [do_block(ij) for ij in pairs]
    # fixed summation order keeps the result bitwise worker-independent
    sector_weights = np.zeros(half)
    marginal = np.zeros(n)
    for _, fvec, mvec in results:
        sector_weights += fvec
        marginal += mvec
    alias_num = max(amax for amax, _, _ in results)

    stack = KernelStack(storage, grid, n_phi, alias_ratio=0.0,
                        sector_weights=sector_weights, marginal=marginal)
    b0_max = float(np.abs(np.asarray(storage[0])).max())
    ratio = alias_num / b0_max if b0_max > 0 else 0.0
    stack.alias_ratio = ratio
    if check_alias and ratio > ALIAS_TOL:
        raise AliasingError(
            f"near-Nyquist azimuthal leakage {ratio:.2e} exceeds {ALIAS_TOL}; "
            f"increase n_phi (currently {n_phi})"
        )
    return stack


def azimuthal_project(l: int, p: float, q: float, cfg: CrystalPumpConfig,
                      n_phi: int, evaluator: str = "closed") -> complex:
    """Fourier coefficient of exp(i l dphi) in Psi(p, q, dphi).

    Uniform trapezoid sampling == DFT, spectrally accurate for the
    periodic smooth integrand.
    """
    if n_phi & (n_phi - 1) or n_phi < 4:
        raise ValueError("n_phi must be a power of two >= 4")
    if abs(l) >= n_phi // 2:
        raise ValueError("need n_phi > 2|l|")
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    c = np.cos(phi)
    ssq = p**2 + q**2 + 2.0 * p * q * c
    d2 = p**2 + q**2 - 2.0 * p * q * c
    psi = np.exp(-(cfg.w0**2 / 4.0) * ssq) * _longitudinal(cfg, d2, evaluator)
    coeff = np.fft.fft(psi) / n_phi
    if abs(coeff[n_phi // 2 - 1]) > ALIAS_TOL * max(abs(coeff[0]), 1e-300):
        raise AliasingError(f"n_phi={n_phi} insufficient at (p={p}, q={q})")
    return complex(coeff[l % n_phi])


def build_kernel(l: int, grid: RadialGrid, cfg: CrystalPumpConfig,
                 n_phi: int | None = None, evaluator: str = "closed") -> OamKernel:
    """Weighted kernel matrix for a single winding number."""
    if n_phi is None:
        n_phi = default_n_phi(cfg, grid.p_max)
    stack = build_kernel_stack(cfg, grid, n_phi, l_keep=abs(l) + 1,
                               evaluator=evaluator)
    return OamKernel(l=l, values=stack.weighted(abs(l)), grid=grid)


# ----------------------------------------------------------------------
# Schmidt spectra and metrics

@dataclass
class SchmidtSpectrum:
    """Normalized eigenvalue table lambda_{n, l} with truncation records."""

    entries: list[tuple[int, int, float]]   # (n, l, lambda), l signed
    l_max: int
    eps_mode: float
    tail_mass: float

    def lambdas(self) -> np.ndarray:
        return np.array([lam for _, _, lam in self.entries])

    def sector(self, l: int) -> np.ndarray:
        return np.array(sorted((lam for n, ll, lam in self.entries if ll == l),
                               reverse=True))


@dataclass
class EntanglementReport:
    """Metrics and diagnostics for one crystal/pump configuration."""

    E: float
    K: float
    spiral: dict[int, float]
    corr_area: tuple[float, float] | None
    diagnostics: dict = field(default_factory=dict)


def schmidt_decompose(kernel: OamKernel | np.ndarray,
                      eps_mode: float = EPS_MODE) -> list[tuple[int, float]]:
    """Schmidt eigenvalues of one weighted kernel matrix, descending.

    lambda_n = sigma_n^2 from the SVD; entries below eps_mode * sum are
    dropped.  LAPACK failure propagates as LinAlgError, never silently.
    """
    m = kernel.values if isinstance(kernel, OamKernel) else kernel
    if not np.all(np.isfinite(m)):
        raise ValueError("kernel matrix contains non-finite entries")
    sigma = np.linalg.svd(np.asarray(m, dtype=complex), compute_uv=False)
    lam = sigma**2
    total = lam.sum()
    keep = lam >= eps_mode * total if total > 0 else np.zeros(len(lam), bool)
    return [(n, float(v)) for n, v in enumerate(lam[keep])]


def assemble_spectrum(per_l: dict[int, list[float]], eps_tail: float = EPS_TAIL,
                      eps_mode: float = EPS_MODE, sector_tail: float = 0.0,
                      keep_all: bool = False) -> SchmidtSpectrum:
    """Merge per-sector eigenvalues, mirror to negative l, renormalize.

    per_l maps winding numbers to eigenvalue lists; nonnegative-only input
    is mirrored using B_l = B_{-l}.  l_max is cut where the spiral weight
    stays below eps_tail for 3 consecutive sectors; everything beyond
    (plus sub-eps_mode eigenvalues) is bookkept as tail mass so that
    sum(lambda) + tail = 1 exactly.
    """
    if not per_l:
        raise ValueError("no sectors given")
    ls = sorted(per_l)
    if ls[0] < 0:
        if {-l for l in ls if l < 0} != {l for l in ls if l > 0}:
            raise ValueError("signed sector coverage must be symmetric")
        sectors = {l: np.asarray(per_l[l], float) for l in ls if l >= 0}
    else:
        sectors = {l: np.asarray(per_l[l], float) for l in ls}
    sums = {l: s.sum() for l, s in sectors.items()}
    grand = sum((1 if l == 0 else 2) * s for l, s in sums.items()) + sector_tail
    if grand <= 0:
        raise ValueError("spectrum has no weight")

    l_max = max(sectors)
    if not keep_all:
        below = 0
        for l in sorted(sectors):
            weight = (1 if l == 0 else 2) * sums[l] / grand
            if l > 0 and weight < eps_tail:
                below += 1
                if below >= 3:
                    l_max = l - 3
                    break
            else:
                below = 0

    entries: list[tuple[int, int, float]] = []
    dropped = sector_tail
    for l in sorted(sectors):
        if l > l_max:
            dropped += (1 if l == 0 else 2) * sums[l]
            continue
        lam = np.sort(sectors[l])[::-1]
        keep = lam >= eps_mode * grand
        dropped += (1 if l == 0 else 2) * lam[~keep].sum()
        for n, v in enumerate(lam[keep]):
            entries.append((n, l, v / grand))
            if l > 0:
                entries.append((n, -l, v / grand))
    spec = SchmidtSpectrum(entries=entries, l_max=l_max, eps_mode=eps_mode,
                           tail_mass=dropped / grand)
    if spec.entries and sums.get(l_max, 1.0) / grand >= eps_tail and l_max == max(sectors):
        # spiral spectrum never dropped below threshold: sampling suspect
        if max(sectors) > 4:
            raise TailMassError(
                "spiral spectrum not decayed below eps_tail at the largest "
                "computed sector; increase l coverage or n_phi"
            )
    return spec


def entropy(spec: SchmidtSpectrum) -> float:
    """Entropy of entanglement E = -sum lambda log2 lambda, in ebits."""
    lam = spec.lambdas()
    lam = lam[lam > 0]
    return float(-(lam * np.log2(lam)).sum())


def schmidt_number(spec: SchmidtSpectrum) -> float:
    """Effective mode count K = 1 / sum lambda^2."""
    lam = spec.lambdas()
    return float(1.0 / (lam**2).sum())


def spiral_spectrum(spec: SchmidtSpectrum) -> dict[int, float]:
    """Per-winding-number weights P_l = sum_n lambda_{nl}."""
    out: dict[int, float] = {}
    for _, l, lam in spec.entries:
        out[l] = out.get(l, 0.0) + lam
    return dict(sorted(out.items()))


# ----------------------------------------------------------------------
# end-to-end solver

#: switch kernel storage to a disk-backed scratch array above this size
SPILL_BYTES = int(2.5e9)

#: edge tail fraction above which p_max is declared too small.  The sinc
#: tails fall off as a power law, so the outer-decade fraction at any
#: practical p_max sits in the 1e-5..1e-3 range while E and K are long
#: converged; 1e-3 flags genuine truncation without rejecting sound grids.
EDGE_TAIL_TOL = 1e-3


def _l_cut(weights: np.ndarray, eps_tail: float) -> int | None:
    """First l where the (doubled) sector weight stays below eps_tail
    for 3 consecutive sectors, or None if it never decays."""
    total = weights[0] + 2.0 * weights[1:].sum()
    if total <= 0:
        raise ValueError("kernel stack has no weight")
    below = 0
    for l in range(1, len(weights)):
        if 2.0 * weights[l] / total < eps_tail:
            below += 1
            if below >= 3:
                return l - 3
        else:
            below = 0
    return None


def solve(cfg: CrystalPumpConfig, n_radial: int | None = None,
          p_max: float | None = None, n_phi: int | None = None,
          evaluator: str = "closed", workers: int = 1,
          eps_mode: float = EPS_MODE, eps_tail: float = EPS_TAIL,
          scratch: str | None = None, z_samples: int | None = None,
          check_alias: bool = True,
          check_edge_tail: bool = True) -> tuple[SchmidtSpectrum, dict]:
    """Full Schmidt analysis for one configuration.

    Sizes the grids from the physics when not given, spills the kernel
    stack to a disk scratch file when it would not fit in memory, cuts
    the winding-number range from the exact per-sector weights, and
    returns (spectrum, diagnostics).  Deterministic for fixed numeric
    parameters regardless of workers.
    """
    import os
    import tempfile

    if p_max is None:
        p_max = default_p_max(cfg)
    if n_radial is None:
        n_radial = default_n_radial(cfg)
    if n_phi is None:
        n_phi = default_n_phi(cfg, p_max)
    grid = RadialGrid.build(n_radial, p_max)

    l_guess = min(n_phi // 2, max(64, int(math.ceil(1.8 * cfg.w0 * p_max))))
    tmp_path = None

    def make_storage(l_keep):
        nonlocal tmp_path
        if tmp_path is not None and os.path.exists(tmp_path):
            os.unlink(tmp_path)
            tmp_path = None
        nbytes = l_keep * n_radial * n_radial * 16
        if nbytes <= SPILL_BYTES:
            return np.empty((l_keep, n_radial, n_radial), np.complex128)
        fd, tmp_path = tempfile.mkstemp(suffix=".kern", dir=scratch)
        os.close(fd)
        return np.lib.format.open_memmap(
            tmp_path, mode="w+", dtype=np.complex64,
            shape=(l_keep, n_radial, n_radial))

    try:
        stack = build_kernel_stack(
            cfg, grid, n_phi, l_keep=l_guess, evaluator=evaluator,
            workers=workers, z_samples=z_samples,
            storage=make_storage(l_guess), check_alias=check_alias)
        cut = _l_cut(stack.sector_weights, eps_tail)
        if cut is None:
            raise TailMassError(
                "spiral spectrum has not decayed below eps_tail by the "
                f"Nyquist winding number {n_phi // 2}; increase n_phi")
        if cut >= l_guess:
            # guessed storage too small: one full rebuild with the exact cut
            stack = build_kernel_stack(
                cfg, grid, n_phi, l_keep=cut + 1, evaluator=evaluator,
                workers=workers, z_samples=z_samples,
                storage=make_storage(cut + 1), check_alias=check_alias)

        # the per-sector rule can still leave ~1e-6 total beyond the cut;
        # extend it (weights are known exactly) so Sum P_l stays within 1e-6
        w_all = stack.sector_weights
        total_w = w_all[0] + 2.0 * w_all[1:].sum()
        while (cut + 1 < len(w_all)
               and 2.0 * w_all[cut + 1:].sum() > 2e-7 * total_w):
            cut += 1
        if cut >= stack.l_keep:
            stack = build_kernel_stack(
                cfg, grid, n_phi, l_keep=cut + 1, evaluator=evaluator,
                workers=workers, z_samples=z_samples,
                storage=make_storage(cut + 1), check_alias=check_alias)

        edge_frac = stack.edge_tail_fraction()
        if check_edge_tail and edge_frac > EDGE_TAIL_TOL:
            raise TailMassError(
                f"fraction {edge_frac:.2e} of the marginal intensity sits in "
                f"the outer 10% of the radial window; increase p_max "
                f"(currently {p_max:.4g})")

        w = stack.sector_weights
        sector_tail = 2.0 * w[cut + 1:].sum()

        def sector_eigs(l):
            return [lam for _, lam in schmidt_decompose(stack.weighted(l),
                                                        eps_mode=0.0)]

        ls = list(range(cut + 1))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                eigs = list(pool.map(sector_eigs, ls))
        else:
            eigs = [sector_eigs(l) for l in ls]
        per_l = dict(zip(ls, eigs))
        spectrum = assemble_spectrum(per_l, eps_tail=eps_tail,
                                     eps_mode=eps_mode,
                                     sector_tail=sector_tail, keep_all=True)
        diagnostics = {
            "n_radial": n_radial,
            "n_phi": n_phi,
            "p_max": p_max,
            "l_cut": cut,
            "alias_ratio": stack.alias_ratio,
            "edge_tail_fraction": edge_frac,
            "sector_tail": sector_tail,
            "spilled": tmp_path is not None,
            "evaluator": evaluator,
        }
        return spectrum, diagnostics
    finally:
        if tmp_path is not None and os.path.exists(tmp_path):
            os.unlink(tmp_path)


def converged_solve(cfg: CrystalPumpConfig, rel_tol: float = 5e-3,
                    max_doublings: int = 2,
                    require: bool = True, **kwargs) -> tuple[SchmidtSpectrum, dict]:
    """solve() behind a grid-doubling gate.

    Runs a probe at half the radial and azimuthal resolution; the nominal
    result counts as converged when E and K move by less than rel_tol
    (relative) under that doubling.  If not, both resolutions are doubled
    and the test repeats, up to max_doublings times.  An unconverged
    result raises QuadratureConvergenceError when require is set and is
    returned with diagnostics['converged'] = False otherwise.  The probe
    runs without the aliasing/edge guards (it is deliberately coarse).
    """
    from .model import QuadratureConvergenceError

    n_radial = kwargs.pop("n_radial", None) or default_n_radial(cfg)
    p_max = kwargs.pop("p_max", None) or default_p_max(cfg)
    n_phi = kwargs.pop("n_phi", None) or default_n_phi(cfg, p_max)

    shift = math.inf
    for _ in range(max_doublings + 1):
        spec_c, _ = solve(cfg, n_radial=n_radial // 2, p_max=p_max,
                          n_phi=n_phi // 2, check_alias=False,
                          check_edge_tail=False, **kwargs)
        spec_f, diag = solve(cfg, n_radial=n_radial, p_max=p_max,
                             n_phi=n_phi, **kwargs)
        e_c, e_f = entropy(spec_c), entropy(spec_f)
        k_c, k_f = schmidt_number(spec_c), schmidt_number(spec_f)
        shift = max(abs(e_f - e_c) / max(abs(e_f), 1e-300),
                    abs(k_f - k_c) / max(abs(k_f), 1e-300))
        if shift <= rel_tol:
            diag["converged"] = True
            diag["doubling_shift"] = shift
            return spec_f, diag
        n_radial *= 2
        n_phi *= 2
    if require:
        raise QuadratureConvergenceError(
            f"E/K still moving by {shift:.3g} relative after "
            f"{max_doublings} grid doublings")
    diag["converged"] = False
    diag["doubling_shift"] = shift
    return spec_f, diag


# ----------------------------------------------------------------------
# correlated area

def _fwhm(x: np.ndarray, y: np.ndarray) -> float:
    """Full width at half maximum with linear interpolation at the crossings."""
    k = int(np.argmax(y))
    if k == 0 or k == len(y) - 1:
        raise PeakNotFoundError("maximum sits on the scan boundary")
    half = 0.5 * y[k]
    left = np.nonzero(y[:k] < half)[0]
    right = np.nonzero(y[k:] < half)[0]
    if len(left) == 0 or len(right) == 0:
        raise PeakNotFoundError("half-maximum crossing outside the scan range")
    i = left[-1]
    xl = x[i] + (x[i + 1] - x[i]) * (half - y[i]) / (y[i + 1] - y[i])
    j = k + right[0]
    xr = x[j - 1] + (x[j] - x[j - 1]) * (half - y[j - 1]) / (y[j] - y[j - 1])
    return float(xr - xl)


def correlated_area(cfg: CrystalPumpConfig, q_fixed: tuple[float, float],
                    n_scan: int = 4001) -> tuple[float, float]:
    """FWHM widths of the conditional coincidence density around its peak.

    With the idler held at radius q the signal concentrates back-to-back
    (delta_phi = pi).  Returns (radial_width um^-1, azimuthal_width rad):
    the radial cut runs through the peak at delta_phi = pi, the azimuthal
    cut along the arc at the peak radius.
    """
    q, _phi_q = q_fixed
    if q <= 0:
        raise ValueError("q_fixed radius must be positive")

    def density(p, dphi):
        c = np.cos(dphi)
        ssq = p**2 + q**2 + 2.0 * p * q * c
        d2 = p**2 + q**2 - 2.0 * p * q * c
        amp = np.exp(-(cfg.w0**2 / 4.0) * ssq) * _longitudinal(cfg, d2, "closed")
        return np.abs(amp) ** 2

    reach = 12.0 * math.sqrt(2.0) / cfg.w0
    p_scan = np.linspace(max(q - reach, 1e-6), q + reach, n_scan)
    radial_profile = density(p_scan, math.pi)
    radial_width = _fwhm(p_scan, radial_profile)
    p_peak = float(p_scan[np.argmax(radial_profile)])

    dphi_half = min(math.pi, 12.0 / (cfg.w0 * math.sqrt(p_peak * q)))
    dphi = np.linspace(math.pi - dphi_half, math.pi + dphi_half, n_scan)
    azimuthal_width = _fwhm(dphi, density(p_peak, dphi))
    return radial_width, azimuthal_width


def band_center_radius(cfg: CrystalPumpConfig) -> float:
    """Radius of the half-weight point of the phase-matched band.

    Chirped: photons sit at half the swept |p-q| band.  Unchirped: half
    of the sinc's half-power diameter.
    """
    if cfg.alpha > ALPHA_MIN:
        return 0.5 * math.sqrt(cfg.k_mismatch * cfg.alpha * cfg.L / 2.0)
    # sinc(x)^2 = 1/2 at x ~ 1.39156
    return 0.5 * math.sqrt(4.0 * 1.39156 * cfg.k_mismatch / cfg.L)


# ----------------------------------------------------------------------
# double-Gaussian analytic benchmark

#: gamma for sinc(u) ~ exp(-gamma u): calibrated so the L = 20 mm, w0 =
#: 100 um reference configuration gives E = 4.2 ebits exactly (see
#: calibrate_sinc_gamma); the value is close to the usual moment fits.
GAMMA_SINC_FIT = 0.45741954374618266


def _geometric_entropy(mu: float) -> float:
    """Entropy (bits) of the geometric spectrum lambda_n = (1-mu) mu^n."""
    if mu <= 0.0:
        return 0.0
    return -math.log2(1.0 - mu) - mu / (1.0 - mu) * math.log2(mu)


def gaussian_approx_entropy(cfg: CrystalPumpConfig,
                            gamma_fit: float = GAMMA_SINC_FIT) -> float:
    """Entropy estimate from the double-Gaussian (sinc -> Gaussian) kernel.

    Per Cartesian transverse dimension the kernel exp(-a(px+qx)^2 -
    b(px-qx)^2) has the geometric Schmidt spectrum with
    mu = ((sqrt(r)-1)/(sqrt(r)+1))^2, r = a/b = w0^2 k_p / (gamma L)
    (equivalently 2 L_d / (gamma L) with the Rayleigh range L_d); the
    total is twice the 1D entropy.  Valid on the unchirped path only.
    """
    if cfg.alpha > ALPHA_MIN:
        raise ValueError("the double-Gaussian benchmark applies to alpha = 0 only")
    r = cfg.w0**2 * cfg.k_p / (gamma_fit * cfg.L)
    if r < 1.0:
        r = 1.0 / r
    mu = ((math.sqrt(r) - 1.0) / (math.sqrt(r) + 1.0)) ** 2
    return 2.0 * _geometric_entropy(mu)


def calibrate_sinc_gamma(target_entropy: float = 4.2,
                         reference: CrystalPumpConfig | None = None) -> float:
    """Gamma such that the benchmark reproduces target_entropy at the reference."""
    from scipy.optimize import brentq

    ref = reference or CrystalPumpConfig()
    return float(brentq(
        lambda g: gaussian_approx_entropy(ref, g) - target_entropy, 1e-3, 10.0,
        xtol=1e-12))
