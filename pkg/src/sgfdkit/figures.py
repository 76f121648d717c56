"""Reproduction bundles for the published figures, at desk scale.

Each command emits plot-ready data (CSV), never images. The dispersion
figures (fig1-fig3) and the mixed-derivative error surfaces (fig4) are
exact reproductions of the published parameter sets. The seismogram
figures run desk-scale stand-ins: the source/receiver geometry of the
homogeneous experiment is only given pictorially in the original, and
the salt grids are not distributable, so fig6 uses a centered source
with nine receivers on a horizontal line and fig8/fig9 use a synthetic
three-layer miniature. Outputs are labeled accordingly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import dispersion as disp
from .coefficients import (
    default_fit_band,
    solve_balanced_space_domain,
    solve_space_domain,
    table1_coefficients,
    taylor_coefficients,
)
from .errors import ConfigError
from .kernel import run_simulation
from .model import GridGeometry, SimulationConfig, SourceSpec, SpongeSpec
from .modelio import MINIATURE_LAYERS, homogeneous_model, layered_model

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig6", "fig8-like", "fig9-like")

#: Desk-scale homogeneous experiment (stand-in for the pictorial geometry):
#: centered explosive source, nine receivers on a horizontal line.
HOMOGENEOUS_PRESET = {
    "nx": 300, "nz": 300, "h": 10.0, "dt": 1e-3, "nt": 1500,
    "vp": 1732.1, "vs": 1000.0, "rho": 1000.0, "f0": 14.0,
    "source": (150, 150), "receiver_iz": 105,
    "receiver_ix": (60, 82, 105, 128, 150, 172, 195, 218, 240),
}

HOMOGENEOUS_QUICK = {
    "nx": 160, "nz": 160, "h": 10.0, "dt": 1e-3, "nt": 320,
    "vp": 1732.1, "vs": 1000.0, "rho": 1000.0, "f0": 14.0,
    "source": (80, 80), "receiver_iz": 56,
    "receiver_ix": (48, 64, 80, 96, 112),
}

#: Miniature layered experiment standing in for the salt model.
LAYERED_PRESET = {
    "nx": 360, "nz": 240, "h": 10.0, "dt": 1e-3, "nt": 1400, "f0": 18.0,
    "layers": MINIATURE_LAYERS,
    "source": (180, 60), "receiver_iz": 35,
    "receiver_ix": (60, 90, 120, 150, 180, 210, 240, 270, 300),
}

LAYERED_QUICK = {
    "nx": 180, "nz": 120, "h": 10.0, "dt": 1e-3, "nt": 350, "f0": 18.0,
    "layers": MINIATURE_LAYERS,
    "source": (90, 36), "receiver_iz": 34,
    "receiver_ix": (45, 67, 90, 112, 135),
}


def homogeneous_setup(scheme, coeffs, component, quick=False, nt=None, f0=None):
    """(SimulationConfig, ElasticModel) for the homogeneous experiment."""
    p = HOMOGENEOUS_QUICK if quick else HOMOGENEOUS_PRESET
    f0 = p["f0"] if f0 is None else f0
    config = SimulationConfig(
        geometry=GridGeometry(p["nx"], p["nz"], p["h"]),
        dt=p["dt"],
        nt=p["nt"] if nt is None else nt,
        scheme=scheme,
        coeffs=coeffs,
        source=SourceSpec(ix=p["source"][0], iz=p["source"][1], f0=f0, t0=1.2 / f0),
        receivers=tuple((ix, p["receiver_iz"]) for ix in p["receiver_ix"]),
        component=component,
        sponge=SpongeSpec(),
    )
    model = homogeneous_model(p["nx"], p["nz"], p["vp"], p["vs"], p["rho"])
    return config, model


def layered_setup(scheme, coeffs, component, quick=False):
    """(SimulationConfig, ElasticModel) for the miniature layered experiment."""
    p = LAYERED_QUICK if quick else LAYERED_PRESET
    config = SimulationConfig(
        geometry=GridGeometry(p["nx"], p["nz"], p["h"]),
        dt=p["dt"],
        nt=p["nt"],
        scheme=scheme,
        coeffs=coeffs,
        source=SourceSpec(ix=p["source"][0], iz=p["source"][1], f0=p["f0"], t0=1.2 / p["f0"]),
        receivers=tuple((ix, p["receiver_iz"]) for ix in p["receiver_ix"]),
        component=component,
        sponge=SpongeSpec(),
    )
    model = layered_model(p["nx"], p["nz"], p["layers"])
    return config, model


def nonbalanced_coefficients(m: int):
    """Published weights where available, else the space-domain fit."""
    try:
        return table1_coefficients(m)
    except Exception:
        return solve_space_domain(m, default_fit_band(m))


def _write_traces_csv(path, header_note, times, columns):
    """columns: list of (name, 1D array); all trimmed to the shortest length."""
    n = min(len(times), *(len(v) for _, v in columns))
    with open(path, "w") as fh:
        if header_note:
            fh.write(f"# {header_note}\n")
        fh.write("t," + ",".join(name for name, _ in columns) + "\n")
        for i in range(n):
            row = ",".join(f"{v[i]:.9g}" for _, v in columns)
            fh.write(f"{times[i]:.9g},{row}\n")


def _dispersion_figure(which: str):
    """Curve sets for fig1 (Taylor balanced), fig2 (optimized balanced),
    fig3 (optimized non-balanced), both waves, five angles."""
    if which == "fig1":
        scheme, coeffs = "balanced", taylor_coefficients(7)
    elif which == "fig2":
        scheme, coeffs = "balanced", solve_balanced_space_domain(7, default_fit_band(7))
    elif which == "fig3":
        scheme, coeffs = "non_balanced", table1_coefficients(7)
    else:
        raise ConfigError(f"unknown dispersion figure {which!r}")
    p = disp.FIGURE_PARAMS
    kh = disp.default_kh_grid()
    points = []
    for wave, velocity in (("S", p["beta"]), ("P", p["alpha"])):
        r = disp.courant_number(velocity, p["dt"], p["h"])
        points += disp.scan_curves(coeffs, scheme, wave, disp.DEFAULT_ANGLES, kh, r)
    return points


def write_figure(which: str, outdir, quick: bool = False) -> list[Path]:
    """Emit the artifact set for one figure id; returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if which in ("fig1", "fig2", "fig3"):
        path = outdir / f"{which}.csv"
        disp.curves_to_csv(_dispersion_figure(which), path)
        return [path]
    if which == "fig4":
        return _write_fig4(outdir)
    if which == "fig6":
        return _write_fig6(outdir, quick)
    if which in ("fig8-like", "fig9-like"):
        component = "vz" if which == "fig8-like" else "txx"
        return _write_fig_layered(which, component, outdir, quick)
    raise ConfigError(f"unknown figure id {which!r}; expected one of {FIGURE_IDS}")


def _write_fig4(outdir: Path) -> list[Path]:
    # both error surfaces on one (kxh, kzh) grid, each scheme with its
    # own optimized weights
    bal = solve_balanced_space_domain(7, default_fit_band(7))
    nb = table1_coefficients(7)
    axis = np.linspace(np.pi / 128, np.pi, 128)
    kx, kz = np.meshgrid(axis, axis, indexing="ij")
    e_bal = disp.mixed_error_balanced(bal, kx, kz)
    e_nb = disp.mixed_error_nonbalanced(nb, kx, kz)
    path = outdir / "fig4.csv"
    with open(path, "w") as fh:
        fh.write("kxh,kzh,e_balanced,e_nonbalanced\n")
        for i in range(axis.size):
            for j in range(axis.size):
                fh.write(
                    f"{kx[i, j]:.9g},{kz[i, j]:.9g},{e_bal[i, j]:.9g},{e_nb[i, j]:.9g}\n"
                )
    return [path]


def _write_fig6(outdir: Path, quick: bool) -> list[Path]:
    paths = []
    for m in (4, 7):
        bal_c = taylor_coefficients(m)
        nb_c = nonbalanced_coefficients(m)
        for component in ("vz", "vx"):
            cfg_b, model = homogeneous_setup("balanced", bal_c, component, quick=quick)
            cfg_n, _ = homogeneous_setup("non_balanced", nb_c, component, quick=quick)
            res_b = run_simulation(cfg_b, model)
            res_n = run_simulation(cfg_n, model)
            times = res_b.seismograms.times()
            cols = []
            for k, (ix, iz) in enumerate(cfg_b.receivers):
                cols.append((f"balanced_r{k}", res_b.seismograms.data[k]))
                cols.append((f"non_balanced_r{k}", res_n.seismograms.data[k]))
            path = outdir / f"fig6_{component}_M{m}.csv"
            _write_traces_csv(
                path,
                "desk-scale homogeneous experiment (geometry is a documented stand-in)",
                times,
                cols,
            )
            paths.append(path)
    return paths


def _write_fig_layered(which: str, component: str, outdir: Path, quick: bool) -> list[Path]:
    runs = (
        ("balanced_M7", "balanced", taylor_coefficients(7)),
        ("non_balanced_M7", "non_balanced", nonbalanced_coefficients(7)),
        ("balanced_M30", "balanced", taylor_coefficients(30)),
    )
    results = {}
    receivers = None
    times = None
    for label, scheme, coeffs in runs:
        config, model = layered_setup(scheme, coeffs, component, quick=quick)
        res = run_simulation(config, model)
        results[label] = res.seismograms.data
        receivers = config.receivers
        times = res.seismograms.times()
    cols = []
    for k in range(len(receivers)):
        for label, _, _ in runs:
            cols.append((f"{label}_r{k}", results[label][k]))
    path = outdir / f"{which.replace('-', '_')}.csv"
    _write_traces_csv(
        path,
        "synthetic layered miniature; stands in for the unavailable salt grids",
        times,
        cols,
    )
    return [path]
