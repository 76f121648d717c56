"""Raw-grid model files and synthetic model generators.

A model on disk is a text header plus three raw binary grids:

    nx=<int>
    nz=<int>
    h=<float>
    vp=<relative path>
    vs=<relative path>
    rho=<relative path>

Each grid is nx*nz little-endian 32-bit floats in C order with x as the
leading index (row i holds all z samples of column x=i). Generators snap
their inputs to float32 before building the model, so write/read
round-trips are bit exact.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ModelError
from .model import ElasticModel, GridGeometry, build_model

_GRID_KEYS = ("vp", "vs", "rho")

#: Miniature layered stand-in used by the fig8/fig9-like reproductions
#: (depth fraction, vp, vs, rho); the published salt grids are not
#: distributable, so a synthetic three-layer model takes their place.
MINIATURE_LAYERS = (
    (0.0, 2000.0, 1150.0, 1800.0),
    (1.0 / 3.0, 3000.0, 1730.0, 2100.0),
    (2.0 / 3.0, 4200.0, 2400.0, 2300.0),
)


def _f32(x: float) -> float:
    return float(np.float32(x))


def homogeneous_model(nx: int, nz: int, vp: float, vs: float, rho: float) -> ElasticModel:
    """Uniform model; inputs are snapped to float32 for lossless file round-trips."""
    shape = (nx, nz)
    return build_model(
        np.full(shape, _f32(vp)), np.full(shape, _f32(vs)), np.full(shape, _f32(rho))
    )


def layered_model(nx: int, nz: int, layers=MINIATURE_LAYERS) -> ElasticModel:
    """Horizontally layered model from (depth_fraction, vp, vs, rho) rows.

    Depth fractions are measured along z; each layer extends from its own
    fraction down to the next one's.
    """
    if not layers:
        raise ModelError("need at least one layer")
    fracs = [f for f, *_ in layers]
    if fracs[0] != 0.0 or any(b <= a for a, b in zip(fracs, fracs[1:])):
        raise ModelError("layer depth fractions must start at 0 and increase")
    vp = np.empty((nx, nz))
    vs = np.empty((nx, nz))
    rho = np.empty((nx, nz))
    bounds = [int(round(f * nz)) for f in fracs] + [nz]
    for (frac, a, b, r), lo, hi in zip(layers, bounds, bounds[1:]):
        vp[:, lo:hi] = _f32(a)
        vs[:, lo:hi] = _f32(b)
        rho[:, lo:hi] = _f32(r)
    return build_model(vp, vs, rho)


def write_model(directory, model: ElasticModel, h: float, prefix: str = "model") -> Path:
    """Write header plus three raw float32 grids; returns the header path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    nx, nz = model.shape
    header = directory / f"{prefix}.hdr"
    lines = [f"nx={nx}", f"nz={nz}", f"h={h:.9g}"]
    for key in _GRID_KEYS:
        rel = f"{prefix}_{key}.f32"
        getattr(model, key).astype("<f4").tofile(directory / rel)
        lines.append(f"{key}={rel}")
    header.write_text("\n".join(lines) + "\n")
    return header


def load_model(header_path) -> tuple[ElasticModel, GridGeometry]:
    """Read a header and its three grids; returns (model, geometry)."""
    header_path = Path(header_path)
    if not header_path.is_file():
        raise ModelError(f"model header not found: {header_path}")
    items: dict[str, str] = {}
    for raw in header_path.read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ModelError(f"malformed header line in {header_path}: {raw!r}")
        key, value = line.split("=", 1)
        items[key.strip()] = value.strip()
    missing = [k for k in ("nx", "nz", "h", *_GRID_KEYS) if k not in items]
    if missing:
        raise ModelError(f"model header {header_path} is missing keys: {', '.join(missing)}")
    try:
        nx, nz, h = int(items["nx"]), int(items["nz"]), float(items["h"])
    except ValueError as exc:
        raise ModelError(f"bad numeric value in model header: {exc}")
    grids = {}
    expected = nx * nz * 4
    for key in _GRID_KEYS:
        path = header_path.parent / items[key]
        if not path.is_file():
            raise ModelError(f"grid file not found: {path}")
        actual = path.stat().st_size
        if actual != expected:
            raise ModelError(
                f"grid file {path} holds {actual} bytes, expected {expected} "
                f"({nx}x{nz} float32)"
            )
        grids[key] = np.fromfile(path, dtype="<f4").astype(np.float64).reshape(nx, nz)
    geometry = GridGeometry(nx=nx, nz=nz, h=h)
    return build_model(grids["vp"], grids["vs"], grids["rho"]), geometry
