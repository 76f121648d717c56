"""Command-line front end.

Subcommands: coeffs, dispersion, stability, run, bench, figures, genmodel.
Exit codes: 0 success, 2 configuration error, 3 stability refusal,
4 numerical abort. The --seed flag is reserved (numerics are fully
deterministic) and currently unused.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import dispersion as disp
from .bench import run_benchmark
from .coefficients import FitBand, coefficients_for, default_fit_band, export_coefficients
from .config import ResolvedConfig, parse_config
from .errors import ConfigError, ModelError, NumericsError, SgfdError, StabilityError
from .figures import FIGURE_IDS, write_figure
from .kernel import run_simulation
from .model import SCHEMES, GridGeometry, SimulationConfig, SourceSpec, SpongeSpec
from .modelio import MINIATURE_LAYERS, homogeneous_model, layered_model, load_model, write_model
from .stability import check_config

_COEFF_CHOICES = ("taylor", "table1", "space_domain_ls", "balanced_space_ls", "time_space_ls")


def _args_digest(pairs) -> str:
    text = "\n".join(f"{k}={v}" for k, v in sorted(pairs))
    return hashlib.sha256(text.encode()).hexdigest()


def _write_manifest(outdir: Path, digest: str, outputs, timings=None, counters=None) -> Path:
    manifest = {
        "config_digest": digest,
        "outputs": [{"path": str(p), "kind": kind} for p, kind in outputs],
        "timings": timings or {},
        "counters": counters or {},
    }
    path = outdir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    for p, _ in outputs:
        if not Path(p).exists():
            raise SgfdError(f"declared output missing from disk: {p}")
    return path


def _parse_angles(text: str | None, default=disp.DEFAULT_ANGLES):
    if not text:
        return tuple(default)
    return tuple(math.radians(float(v)) for v in text.split(",") if v.strip())


def _band_from_args(ns, m: int) -> FitBand:
    kwargs = {}
    if ns.courant is not None:
        kwargs["courant"] = ns.courant
    if getattr(ns, "angles", None):
        kwargs["angles"] = _parse_angles(ns.angles)
    elif ns.method == "time_space_ls":
        kwargs["angles"] = tuple(disp.DEFAULT_ANGLES)
    if ns.kh_max is not None:
        return FitBand(kh_max=ns.kh_max, n_samples=ns.n_samples, **kwargs)
    return default_fit_band(m, n_samples=ns.n_samples, **kwargs)


def _load_config_and_model(ns) -> tuple[ResolvedConfig, object]:
    resolved = parse_config(ns.config)
    sim = resolved.simulation
    if resolved.model_header is not None:
        model, geometry = load_model(resolved.model_header)
        if geometry.shape != sim.geometry.shape or geometry.h != sim.geometry.h:
            raise ConfigError(
                f"model header grid {geometry.shape}@h={geometry.h} disagrees with "
                f"configured grid {sim.geometry.shape}@h={sim.geometry.h}"
            )
    elif resolved.model_constants is not None:
        vp, vs, rho = resolved.model_constants
        model = homogeneous_model(sim.geometry.nx, sim.geometry.nz, vp, vs, rho)
    else:
        raise ConfigError("configuration names no model (set model.header or model.vp/vs/rho)")
    if getattr(ns, "override_stability", False):
        resolved = replace(resolved, simulation=replace(sim, allow_unstable=True))
    return resolved, model


def _outdir(ns) -> Path:
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_coeffs(ns) -> int:
    band = _band_from_args(ns, ns.m) if ns.method not in ("taylor", "table1") else None
    coeffs = coefficients_for(ns.method, ns.m, band)
    text = export_coefficients(coeffs)
    if ns.out:
        out = _outdir(ns)
        path = out / f"coeffs_{ns.method}_M{ns.m}.txt"
        path.write_text(text)
        _write_manifest(
            out,
            _args_digest([("cmd", "coeffs"), ("method", ns.method), ("m", ns.m)]),
            [(path, "coefficients")],
        )
    else:
        sys.stdout.write(text)
    return 0


def cmd_dispersion(ns) -> int:
    band = _band_from_args(ns, ns.m) if ns.method not in ("taylor", "table1") else None
    coeffs = coefficients_for(ns.method, ns.m, band)
    velocity = ns.alpha if ns.wave == "P" else ns.beta
    r = disp.courant_number(velocity, ns.dt, ns.h)
    kh = disp.default_kh_grid(ns.kh_points)
    points = disp.scan_curves(coeffs, ns.scheme, ns.wave, _parse_angles(ns.angles), kh, r)
    out = _outdir(ns)
    path = out / "dispersion.csv"
    disp.curves_to_csv(points, path)
    _write_manifest(
        out,
        _args_digest(
            [("cmd", "dispersion"), ("scheme", ns.scheme), ("wave", ns.wave), ("m", ns.m),
             ("method", ns.method), ("alpha", ns.alpha), ("beta", ns.beta), ("h", ns.h),
             ("dt", ns.dt)]
        ),
        [(path, "dispersion_curves")],
    )
    print(f"wrote {path}")
    return 0


def cmd_stability(ns) -> int:
    band = _band_from_args(ns, ns.m) if ns.method not in ("taylor", "table1") else None
    coeffs = coefficients_for(ns.method, ns.m, band)
    # a minimal throwaway setup; only coeffs, scheme, dt, h and max(vp) matter
    n = 4 * ns.m + 8
    geometry = GridGeometry(nx=n, nz=n, h=ns.h)
    config = SimulationConfig(
        geometry=geometry,
        dt=ns.dt,
        nt=1,
        scheme=ns.scheme,
        coeffs=coeffs,
        source=SourceSpec(ix=n // 2, iz=n // 2, f0=10.0, t0=0.12),
        sponge=SpongeSpec(width=0),
    )
    model = homogeneous_model(n, n, ns.alpha, ns.alpha / 2.0, 1000.0)
    report = check_config(config, model)
    sys.stdout.write(report.format())
    if ns.out:
        out = _outdir(ns)
        path = out / "stability.txt"
        path.write_text(report.format())
        _write_manifest(
            out,
            _args_digest([("cmd", "stability"), ("alpha", ns.alpha), ("h", ns.h), ("dt", ns.dt),
                          ("m", ns.m), ("method", ns.method), ("scheme", ns.scheme)]),
            [(path, "stability_report")],
        )
    return 0


def _write_seismograms_csv(path: Path, seis) -> None:
    times = seis.times()
    with open(path, "w") as fh:
        names = ",".join(f"r{k}_{ix}_{iz}" for k, (ix, iz) in enumerate(seis.positions))
        fh.write("t" + ("," + names if names else "") + "\n")
        for n in range(seis.data.shape[1]):
            row = ",".join(f"{seis.data[k, n]:.9g}" for k in range(seis.data.shape[0]))
            fh.write(f"{times[n]:.9g}" + ("," + row if row else "") + "\n")


def _dump_snapshots(outdir: Path, snapshots, sim: SimulationConfig):
    paths = []
    for step, fields in sorted(snapshots.items()):
        for name, arr in fields.items():
            base = outdir / f"snap_{name}_step{step:06d}"
            raw = base.with_suffix(".f32")
            arr.astype("<f4").tofile(raw)
            sidecar = base.with_suffix(".hdr")
            sidecar.write_text(
                f"nx={sim.geometry.nx}\nnz={sim.geometry.nz}\nh={sim.geometry.h:.9g}\n"
                f"dt={sim.dt:.9g}\nstep={step}\nfield={name}\n"
            )
            paths += [(raw, "snapshot"), (sidecar, "snapshot_header")]
    return paths


def cmd_run(ns) -> int:
    resolved, model = _load_config_and_model(ns)
    sim = resolved.simulation
    t0 = time.perf_counter()
    result = run_simulation(sim, model, threads=ns.threads)
    wall = time.perf_counter() - t0
    out = _outdir(ns)
    outputs = []
    seis_path = out / "seismograms.csv"
    _write_seismograms_csv(seis_path, result.seismograms)
    outputs.append((seis_path, "seismograms"))
    if ns.raw:
        raw_path = out / "seismograms.f32"
        result.seismograms.data.astype("<f4").tofile(raw_path)
        outputs.append((raw_path, "seismograms_raw"))
    outputs += _dump_snapshots(out, result.snapshots, sim)
    stats = result.stats
    _write_manifest(
        out,
        resolved.digest,
        outputs,
        timings={"wall_seconds": wall, "kernel_seconds": stats.wall_seconds,
                 "seconds_per_step": stats.wall_seconds / max(stats.steps, 1)},
        counters={"steps": stats.steps, "term_evals": stats.term_evals,
                  "term_evals_per_cell_step": stats.term_evals_per_cell_step,
                  "aborted": stats.aborted, "abort_step": stats.abort_step},
    )
    if stats.aborted:
        print(f"run aborted at step {stats.abort_step} (instability override active)")
    print(f"ran {stats.steps} steps ({sim.scheme}, M={sim.coeffs.m}); outputs in {out}")
    return 0


def cmd_bench(ns) -> int:
    resolved, model = _load_config_and_model(ns)
    report = run_benchmark(resolved.simulation, model, repetitions=ns.repetitions, threads=ns.threads)
    sys.stdout.write(report.format())
    if ns.out:
        out = _outdir(ns)
        path = out / "bench.txt"
        path.write_text(report.format())
        _write_manifest(
            out,
            resolved.digest,
            [(path, "bench_report")],
            timings={"median_s_per_step_balanced": report.seconds_per_step_balanced,
                     "median_s_per_step_non_balanced": report.seconds_per_step_nonbalanced},
            counters={"counter_ratio": report.counter_ratio, "wall_ratio": report.wall_ratio},
        )
    return 0


def cmd_figures(ns) -> int:
    out = _outdir(ns)
    paths = write_figure(ns.which, out, quick=ns.quick)
    _write_manifest(
        out,
        _args_digest([("cmd", "figures"), ("which", ns.which), ("quick", ns.quick)]),
        [(p, "figure_data") for p in paths],
    )
    for p in paths:
        print(f"wrote {p}")
    return 0


def _parse_layers(text: str):
    if not text:
        return MINIATURE_LAYERS
    layers = []
    for chunk in text.split(","):
        parts = chunk.split(":")
        if len(parts) != 4:
            raise ConfigError(f"layer {chunk!r} must look like frac:vp:vs:rho")
        layers.append(tuple(float(v) for v in parts))
    return tuple(layers)


def cmd_genmodel(ns) -> int:
    if ns.kind == "homogeneous":
        if None in (ns.vp, ns.vs, ns.rho):
            raise ConfigError("homogeneous models need --vp, --vs and --rho")
        model = homogeneous_model(ns.nx, ns.nz, ns.vp, ns.vs, ns.rho)
    else:
        model = layered_model(ns.nx, ns.nz, _parse_layers(ns.layers))
    out = _outdir(ns)
    header = write_model(out, model, ns.h, prefix=ns.prefix)
    outputs = [(header, "model_header")]
    outputs += [(header.parent / f"{ns.prefix}_{k}.f32", "model_grid") for k in ("vp", "vs", "rho")]
    _write_manifest(
        out,
        _args_digest([("cmd", "genmodel"), ("kind", ns.kind), ("nx", ns.nx), ("nz", ns.nz),
                      ("h", ns.h), ("prefix", ns.prefix)]),
        outputs,
    )
    print(f"wrote {header}")
    return 0


def _add_coeff_args(p: argparse.ArgumentParser, default_method="table1"):
    p.add_argument("--method", choices=_COEFF_CHOICES, default=default_method)
    p.add_argument("--m", type=int, default=7, help="operator half-length M")
    p.add_argument("--kh-max", dest="kh_max", type=float, default=None,
                   help="fit band upper end in radians (default: calibrated per M)")
    p.add_argument("--n-samples", dest="n_samples", type=int, default=2001)
    p.add_argument("--courant", type=float, default=None, help="r for time-space fits")
    p.add_argument("--angles", default=None, help="comma-separated angles in degrees")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgfd",
        description="2D elastic staggered-grid FD workbench (balanced and non-balanced schemes)",
    )
    parser.add_argument("--seed", type=int, default=None,
                        help="reserved; the numerics are deterministic and ignore it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="solve or export stencil coefficients")
    _add_coeff_args(p)
    p.add_argument("--out", default=None, help="output directory (default: print to stdout)")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("dispersion", help="emit dispersion error curves as CSV")
    _add_coeff_args(p)
    p.add_argument("--scheme", choices=SCHEMES, default="non_balanced")
    p.add_argument("--wave", choices=("P", "S"), default="S")
    p.add_argument("--alpha", type=float, default=disp.FIGURE_PARAMS["alpha"])
    p.add_argument("--beta", type=float, default=disp.FIGURE_PARAMS["beta"])
    p.add_argument("--h", type=float, default=disp.FIGURE_PARAMS["h"])
    p.add_argument("--dt", type=float, default=disp.FIGURE_PARAMS["dt"])
    p.add_argument("--kh-points", dest="kh_points", type=int, default=512)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("stability", help="print the Courant stability report")
    _add_coeff_args(p)
    p.add_argument("--scheme", choices=SCHEMES, default="non_balanced")
    p.add_argument("--alpha", type=float, required=True, help="maximal P velocity (m/s)")
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("run", help="run a simulation from a configuration file")
    p.add_argument("--config", required=True)
    p.add_argument("--override-stability", dest="override_stability", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--raw", action="store_true", help="also dump raw float32 seismograms")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="balanced vs non-balanced timing comparison")
    p.add_argument("--config", required=True)
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("figures", help="emit figure-reproduction data bundles")
    p.add_argument("--which", choices=FIGURE_IDS, required=True)
    p.add_argument("--quick", action="store_true",
                   help="shrink the simulation figures for smoke testing")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("genmodel", help="generate synthetic model grids")
    p.add_argument("--kind", choices=("homogeneous", "layered"), required=True)
    p.add_argument("--nx", type=int, required=True)
    p.add_argument("--nz", type=int, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--vp", type=float, default=None)
    p.add_argument("--vs", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--layers", default=None, help="frac:vp:vs:rho,... (layered models)")
    p.add_argument("--prefix", default="model")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_genmodel)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except (ConfigError, ModelError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except StabilityError as exc:
        print(f"stability refusal: {exc}", file=sys.stderr)
        if exc.report is not None:
            sys.stderr.write(exc.report.format())
        return 3
    except NumericsError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
