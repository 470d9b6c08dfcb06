"""Single-run and sweep orchestration with deterministic file emission.

Every number is written with 17 significant digits so byte-identity
across runs and worker counts is a checkable contract; files go through
a temp-file + rename so a crash never leaves a partial output visible.
"""

from __future__ import annotations

import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import schmidt
from .config import ParsedConfig
from .model import CrystalPumpConfig, QuadratureConvergenceError

__all__ = ["RunRequest", "SweepRequest", "RunFailure", "run_single",
           "run_sweep", "atomic_write", "SWEEP_AXES"]

SWEEP_AXES = ("alpha", "w0", "L")


class RunFailure(RuntimeError):
    """A computation-level failure (grid, convergence) for one run."""


@dataclass(frozen=True)
class RunRequest:
    """One configuration plus output selection."""

    parsed: ParsedConfig
    workers: int = 1
    converge: bool = True

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class SweepRequest:
    """A RunRequest swept along one physical axis."""

    base: RunRequest
    axis: str
    values: tuple[float, ...]
    parallelism: int = 1

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"axis must be one of {SWEEP_AXES}")
        if not self.values:
            raise ValueError("sweep values must be non-empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")


def _fmt(x) -> str:
    return "%.17g" % float(x)


def atomic_write(path: str, text: str) -> None:
    """Write text so that either the old or the new content is visible."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-",
                               suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _swept_config(cfg: CrystalPumpConfig, axis: str, value: float) -> CrystalPumpConfig:
    subst = {"alpha": "alpha", "w0": "w0", "L": "L"}[axis]
    kwargs = dict(lambda_p=cfg.lambda_p, n_e=cfg.n_e, L=cfg.L, w0=cfg.w0,
                  alpha=cfg.alpha)
    kwargs[subst] = value
    return CrystalPumpConfig(**kwargs)


def _compute(parsed: ParsedConfig, workers: int, converge: bool):
    cfg = parsed.cfg
    kwargs = dict(workers=workers)
    if parsed.p_max is not None:
        kwargs["p_max"] = parsed.p_max
    if parsed.n_phi is not None:
        kwargs["n_phi"] = parsed.n_phi
    if parsed.n_radial is not None:
        kwargs["n_radial"] = parsed.n_radial
    if converge:
        spec, diag = schmidt.converged_solve(cfg, require=False, **kwargs)
    else:
        spec, diag = schmidt.solve(cfg, **kwargs)
        diag["converged"] = None
    return spec, diag


def _report_payload(parsed: ParsedConfig, spec, diag) -> dict:
    cfg = parsed.cfg
    spiral = schmidt.spiral_spectrum(spec)
    q_probe = schmidt.band_center_radius(cfg)
    try:
        radial_w, azimuthal_w = schmidt.correlated_area(cfg, (q_probe, 0.0))
        corr = {"q_per_um": q_probe, "radial_fwhm_per_um": radial_w,
                "azimuthal_fwhm_rad": azimuthal_w}
    except schmidt.PeakNotFoundError as exc:
        corr = {"q_per_um": q_probe, "error": str(exc)}
    payload = {
        "config": parsed.resolved_items(),
        "grid": {k: diag[k] for k in ("n_radial", "n_phi", "p_max")},
        "metrics": {
            "E_ebits": schmidt.entropy(spec),
            "K": schmidt.schmidt_number(spec),
            "P0": spiral.get(0, 0.0),
            "l_max": spec.l_max,
            "sum_lambda": float(sum(lam for _, _, lam in spec.entries)),
            "tail_mass": spec.tail_mass,
        },
        "correlated_area_fwhm": corr,
        "diagnostics": {k: diag[k] for k in sorted(diag)},
    }
    if cfg.alpha <= 1e-12:
        payload["gaussian_benchmark"] = {
            "gamma_sinc_fit": schmidt.GAMMA_SINC_FIT,
            "gamma_note": ("calibrated so the 20 mm reference crystal gives "
                           "4.2 ebits under the double-Gaussian approximation"),
            "E_ebits": schmidt.gaussian_approx_entropy(cfg),
        }
    return payload


def _spectrum_csv(spec) -> str:
    rows = sorted(((l, n, lam) for n, l, lam in spec.entries),
                  key=lambda r: (r[0], r[1]))
    lines = ["l,n,lambda"]
    lines += [f"{l},{n},{_fmt(lam)}" for l, n, lam in rows]
    return "\n".join(lines) + "\n"


def _spiral_csv(spec) -> str:
    spiral = schmidt.spiral_spectrum(spec)
    lines = ["l,P_l"]
    lines += [f"{l},{_fmt(p)}" for l, p in sorted(spiral.items())]
    return "\n".join(lines) + "\n"


def run_single(req: RunRequest, out_dir: str) -> schmidt.EntanglementReport:
    """Compute one configuration and emit the requested artifact files."""
    try:
        spec, diag = _compute(req.parsed, req.workers, req.converge)
    except (schmidt.AliasingError, schmidt.TailMassError,
            QuadratureConvergenceError) as exc:
        raise RunFailure(str(exc)) from exc
    payload = _report_payload(req.parsed, spec, diag)

    os.makedirs(out_dir, exist_ok=True)
    outputs = req.parsed.outputs
    if "spectrum" in outputs:
        atomic_write(os.path.join(out_dir, "spectrum.csv"), _spectrum_csv(spec))
    if "kernel-heatmap-data" in outputs:
        atomic_write(os.path.join(out_dir, "kernel_heatmap.csv"),
                     _spectrum_csv(spec))
    if "spiral" in outputs:
        atomic_write(os.path.join(out_dir, "spiral.csv"), _spiral_csv(spec))
    if "report" in outputs:
        atomic_write(os.path.join(out_dir, "report.json"),
                     json.dumps(payload, indent=2, sort_keys=True) + "\n")

    corr = payload["correlated_area_fwhm"]
    corr_pair = (corr.get("radial_fwhm_per_um"), corr.get("azimuthal_fwhm_rad"))
    return schmidt.EntanglementReport(
        E=payload["metrics"]["E_ebits"], K=payload["metrics"]["K"],
        spiral=schmidt.spiral_spectrum(spec),
        corr_area=None if corr_pair[0] is None else corr_pair,
        diagnostics=payload["diagnostics"])


def run_sweep(req: SweepRequest, out_dir: str) -> list[dict]:
    """Run the axis sweep and emit sweep.csv; failed points are recorded
    in their row and do not stop the remaining points.

    Returns the row dicts in axis order; any row with converged ==
    'failed' should surface as a nonzero exit status at the CLI.
    """

    def one_point(value: float) -> dict:
        parsed = req.base.parsed
        point = ParsedConfig(
            cfg=_swept_config(parsed.cfg, req.axis, value),
            n_radial=parsed.n_radial, n_phi=parsed.n_phi, p_max=parsed.p_max,
            outputs=parsed.outputs)
        try:
            spec, diag = _compute(point, req.base.workers, req.base.converge)
        except (schmidt.AliasingError, schmidt.TailMassError,
                QuadratureConvergenceError, ValueError) as exc:
            return {"axis_value": value, "error": str(exc)}
        spiral = schmidt.spiral_spectrum(spec)
        return {
            "axis_value": value,
            "E_ebits": schmidt.entropy(spec),
            "K": schmidt.schmidt_number(spec),
            "P0": spiral.get(0, 0.0),
            "l_max": spec.l_max,
            "converged": diag["converged"],
        }

    if req.parallelism > 1:
        with ThreadPoolExecutor(max_workers=req.parallelism) as pool:
            rows = list(pool.map(one_point, req.values))
    else:
        rows = [one_point(v) for v in req.values]

    lines = ["axis_value,E_ebits,K,P0,l_max,converged"]
    for row in rows:
        if "error" in row:
            lines.append(f"{_fmt(row['axis_value'])},nan,nan,nan,-1,failed")
        else:
            conv = {True: "true", False: "false", None: "unchecked"}[row["converged"]]
            lines.append(
                f"{_fmt(row['axis_value'])},{_fmt(row['E_ebits'])},"
                f"{_fmt(row['K'])},{_fmt(row['P0'])},{row['l_max']},{conv}")
    os.makedirs(out_dir, exist_ok=True)
    atomic_write(os.path.join(out_dir, "sweep.csv"), "\n".join(lines) + "\n")
    return rows
