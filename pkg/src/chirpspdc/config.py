"""Line-oriented `key = value` configuration parsing.

Keys are dotted and carry unit suffixes so a value can never be
interpreted in the wrong unit silently.  The grating chirp is given
either directly (grating.alpha_per_um2) or through the two end-face
periods (grating.period_in_um / grating.period_out_um); mixing the two
parameterizations is a parse error.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import CrystalPumpConfig, GratingSpec, chirp_from_periods

__all__ = ["ConfigError", "ParsedConfig", "parse_config", "parse_config_file",
           "KNOWN_KEYS", "OUTPUT_KINDS"]

OUTPUT_KINDS = ("spectrum", "spiral", "report", "kernel-heatmap-data")

KNOWN_KEYS = {
    "crystal.length_um",
    "pump.wavelength_um",
    "pump.waist_um",
    "pump.refractive_index",
    "grating.alpha_per_um2",
    "grating.period_in_um",
    "grating.period_out_um",
    "grid.n_radial",
    "grid.n_phi",
    "grid.p_max_per_um",
    "outputs",
}

_FLOAT_KEYS = {
    "crystal.length_um", "pump.wavelength_um", "pump.waist_um",
    "pump.refractive_index", "grating.alpha_per_um2",
    "grating.period_in_um", "grating.period_out_um", "grid.p_max_per_um",
}
_INT_KEYS = {"grid.n_radial", "grid.n_phi"}


class ConfigError(ValueError):
    """Malformed, inconsistent, or physically invalid configuration."""


@dataclass(frozen=True)
class ParsedConfig:
    """Fully resolved run configuration."""

    cfg: CrystalPumpConfig
    n_radial: int | None
    n_phi: int | None
    p_max: float | None
    outputs: tuple[str, ...]

    def resolved_items(self) -> dict:
        """All physical parameters materialized, for report embedding."""
        c = self.cfg
        out = {
            "crystal.length_um": c.L,
            "pump.wavelength_um": c.lambda_p,
            "pump.waist_um": c.w0,
            "pump.refractive_index": c.n_e,
            "grating.alpha_per_um2": c.alpha,
            "outputs": ",".join(self.outputs),
        }
        if self.n_radial is not None:
            out["grid.n_radial"] = self.n_radial
        if self.n_phi is not None:
            out["grid.n_phi"] = self.n_phi
        if self.p_max is not None:
            out["grid.p_max_per_um"] = self.p_max
        return out


def _parse_lines(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not val:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        values[key] = val
    return values


def _coerce(key: str, val: str):
    try:
        if key in _INT_KEYS:
            return int(val)
        if key in _FLOAT_KEYS:
            return float(val)
    except ValueError:
        kind = "integer" if key in _INT_KEYS else "number"
        raise ConfigError(f"{key}: {val!r} is not a valid {kind}") from None
    return val


def parse_config(text: str) -> ParsedConfig:
    """Parse and validate a configuration document."""
    raw = _parse_lines(text)
    vals = {k: _coerce(k, v) for k, v in raw.items()}

    has_alpha = "grating.alpha_per_um2" in vals
    has_periods = "grating.period_in_um" in vals or "grating.period_out_um" in vals
    if has_alpha and has_periods:
        raise ConfigError(
            "grating.alpha_per_um2 and grating.period_in_um/period_out_um "
            "are mutually exclusive parameterizations")
    if ("grating.period_in_um" in vals) != ("grating.period_out_um" in vals):
        raise ConfigError(
            "grating periods require both grating.period_in_um and "
            "grating.period_out_um")

    length = vals.get("crystal.length_um", 20000.0)
    if has_periods:
        try:
            spec = GratingSpec(p_i=vals["grating.period_in_um"],
                               p_f=vals["grating.period_out_um"], L=length)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        alpha = chirp_from_periods(spec)
        if alpha < 0:
            raise ConfigError(
                "grating periods imply a negative chirp; swap the end faces")
    else:
        alpha = vals.get("grating.alpha_per_um2", 0.0)

    try:
        cfg = CrystalPumpConfig(
            lambda_p=vals.get("pump.wavelength_um", 0.4),
            n_e=vals.get("pump.refractive_index", 2.27857),
            L=length,
            w0=vals.get("pump.waist_um", 100.0),
            alpha=alpha,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    n_radial = vals.get("grid.n_radial")
    n_phi = vals.get("grid.n_phi")
    p_max = vals.get("grid.p_max_per_um")
    if n_radial is not None and n_radial < 2:
        raise ConfigError("grid.n_radial must be >= 2")
    if n_phi is not None and (n_phi < 4 or n_phi & (n_phi - 1)):
        raise ConfigError("grid.n_phi must be a power of two >= 4")
    if p_max is not None and p_max <= 0:
        raise ConfigError("grid.p_max_per_um must be positive")

    if "outputs" in vals:
        outputs = tuple(s.strip() for s in str(vals["outputs"]).split(","))
        bad = [o for o in outputs if o not in OUTPUT_KINDS]
        if bad:
            raise ConfigError(
                f"unknown outputs {bad}; valid kinds: {', '.join(OUTPUT_KINDS)}")
    else:
        outputs = OUTPUT_KINDS

    return ParsedConfig(cfg=cfg, n_radial=n_radial, n_phi=n_phi, p_max=p_max,
                        outputs=outputs)


def parse_config_file(path: str) -> ParsedConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
