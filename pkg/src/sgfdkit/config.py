"""Flat key=value run configuration.

Grammar: one `section.key=value` pair per line; blank lines and lines
starting with `#` are ignored; whitespace around keys and values is
stripped. Unknown keys fail closed. Required keys:

    grid.nx, grid.nz, grid.h, time.dt, time.nt,
    source.ix, source.iz, source.f0

Everything else has documented defaults (non-balanced scheme, M=7
published weights, 30-cell sponge with decay 0.015, explosive source
with t0 = 1.2/f0, vz receivers). A model is referenced either through
`model.header=<path>` or through homogeneous constants `model.vp`,
`model.vs`, `model.rho`; exactly one of the two forms must be present
for commands that need a model.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

from .coefficients import FitBand, coefficients_for, parse_coefficients
from .errors import ConfigError
from .model import (
    COMPONENTS,
    MECHANISMS,
    SCHEMES,
    GridGeometry,
    SimulationConfig,
    SourceSpec,
    SpongeSpec,
)

_REQUIRED = ("grid.nx", "grid.nz", "grid.h", "time.dt", "time.nt", "source.ix", "source.iz", "source.f0")

_OPTIONAL_DEFAULTS = {
    "scheme": "non_balanced",
    "coeffs.m": "7",
    "coeffs.method": "table1",
    "coeffs.kh_max": "",
    "coeffs.file": "",
    "source.t0": "",
    "source.mechanism": "explosive",
    "source.amplitude": "1.0",
    "receivers.component": "vz",
    "receivers.positions": "",
    "sponge.width": "30",
    "sponge.decay": "0.015",
    "snapshots.steps": "",
    "model.header": "",
    "model.vp": "",
    "model.vs": "",
    "model.rho": "",
}

_COEFF_METHODS = ("table1", "taylor", "space_domain_ls", "balanced_space_ls")


@dataclass(frozen=True)
class ResolvedConfig:
    """Parsed configuration plus the model reference and a stable digest."""

    simulation: SimulationConfig
    model_header: Path | None
    model_constants: tuple[float, float, float] | None
    resolved_items: tuple[tuple[str, str], ...]

    @property
    def digest(self) -> str:
        text = "\n".join(f"{k}={v}" for k, v in sorted(self.resolved_items))
        return hashlib.sha256(text.encode()).hexdigest()


def _to_int(items, key):
    try:
        return int(items[key])
    except ValueError:
        raise ConfigError(f"key {key} must be an integer, got {items[key]!r}")


def _to_float(items, key):
    try:
        return float(items[key])
    except ValueError:
        raise ConfigError(f"key {key} must be a number, got {items[key]!r}")


def _parse_positions(text: str) -> tuple[tuple[int, int], ...]:
    if not text:
        return ()
    out = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 2:
            raise ConfigError(f"receiver position {chunk!r} must look like ix:iz")
        try:
            out.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ConfigError(f"receiver position {chunk!r} must hold integers")
    return tuple(out)


def parse_config_text(text: str, base_dir: Path | None = None) -> ResolvedConfig:
    """Parse configuration text; see module docstring for the grammar."""
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    items: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in items:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        items[key] = value.strip()

    known = set(_REQUIRED) | set(_OPTIONAL_DEFAULTS)
    unknown = sorted(set(items) - known)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    missing = [k for k in _REQUIRED if k not in items]
    if missing:
        raise ConfigError(f"missing required configuration keys: {', '.join(missing)}")
    for key, default in _OPTIONAL_DEFAULTS.items():
        items.setdefault(key, default)

    geometry = GridGeometry(
        nx=_to_int(items, "grid.nx"), nz=_to_int(items, "grid.nz"), h=_to_float(items, "grid.h")
    )
    scheme = items["scheme"]
    if scheme not in SCHEMES:
        raise ConfigError(f"key scheme must be one of {SCHEMES}, got {scheme!r}")

    m = _to_int(items, "coeffs.m")
    if items["coeffs.file"]:
        path = base_dir / items["coeffs.file"]
        if not path.is_file():
            raise ConfigError(f"coefficient file not found: {path}")
        coeffs = parse_coefficients(path.read_text())
        if coeffs.m != m:
            raise ConfigError(
                f"coeffs.m={m} disagrees with the coefficient file's M={coeffs.m}"
            )
    else:
        method = items["coeffs.method"]
        if method not in _COEFF_METHODS:
            raise ConfigError(f"key coeffs.method must be one of {_COEFF_METHODS}, got {method!r}")
        band = None
        if items["coeffs.kh_max"]:
            band = FitBand(kh_max=_to_float(items, "coeffs.kh_max"))
        coeffs = coefficients_for(method, m, band)

    f0 = _to_float(items, "source.f0")
    t0 = _to_float(items, "source.t0") if items["source.t0"] else 1.2 / f0
    items["source.t0"] = f"{t0:.9g}"
    mechanism = items["source.mechanism"]
    if mechanism not in MECHANISMS:
        raise ConfigError(f"key source.mechanism must be one of {MECHANISMS}, got {mechanism!r}")
    source = SourceSpec(
        ix=_to_int(items, "source.ix"),
        iz=_to_int(items, "source.iz"),
        f0=f0,
        t0=t0,
        mechanism=mechanism,
        amplitude=_to_float(items, "source.amplitude"),
    )

    component = items["receivers.component"]
    if component not in COMPONENTS:
        raise ConfigError(f"key receivers.component must be one of {COMPONENTS}, got {component!r}")
    receivers = _parse_positions(items["receivers.positions"])
    sponge = SpongeSpec(width=_to_int(items, "sponge.width"), decay=_to_float(items, "sponge.decay"))
    snapshot_steps = tuple(
        int(s) for s in items["snapshots.steps"].split(",") if s.strip()
    )

    simulation = SimulationConfig(
        geometry=geometry,
        dt=_to_float(items, "time.dt"),
        nt=_to_int(items, "time.nt"),
        scheme=scheme,
        coeffs=coeffs,
        source=source,
        receivers=receivers,
        component=component,
        sponge=sponge,
        snapshot_steps=snapshot_steps,
    )

    header = items["model.header"]
    constants = tuple(items[k] for k in ("model.vp", "model.vs", "model.rho"))
    model_header = None
    model_constants = None
    if header and any(constants):
        raise ConfigError("give either model.header or model.vp/vs/rho constants, not both")
    if header:
        model_header = base_dir / header
    elif any(constants):
        if not all(constants):
            raise ConfigError("homogeneous models need all three of model.vp, model.vs, model.rho")
        model_constants = (
            _to_float(items, "model.vp"),
            _to_float(items, "model.vs"),
            _to_float(items, "model.rho"),
        )

    return ResolvedConfig(
        simulation=simulation,
        model_header=model_header,
        model_constants=model_constants,
        resolved_items=tuple(sorted(items.items())),
    )


def parse_config(path) -> ResolvedConfig:
    """Parse a configuration file; relative paths resolve against its directory."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"configuration file not found: {path}")
    return parse_config_text(path.read_text(), base_dir=path.parent)
