"""Velocity-stress leapfrog kernel with balanced or non-balanced operators.

One step advances velocities from the current stresses, then stresses from
the new velocities. Every spatial derivative is an antisymmetric staggered
difference; the two schemes differ only in which derivatives get the full
length-M operator:

    balanced:       all eight derivatives use the length-M operator;
    non-balanced:   d(txx)/dx, d(tzz)/dz, d(vz)/dx, d(vx)/dz use length M,
                    the remaining four use the single-term second-order
                    operator with fixed weight 1.

Both schemes update the same interior box [M, nx-M) x [M, nz-M) so that
M=1 runs coincide bitwise and wall-clock comparisons isolate operator
length. Wavefields are float32; update factors are precomputed float32.

Per cell and step the balanced scheme evaluates 8M weighted-difference
terms and the non-balanced scheme 4M + 4 (the stress updates share
d(vx)/dx and d(vz)/dz), a ratio of (M+1)/(2M). The stepper counts term
evaluations at the call sites so the ratio is observable, not assumed.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericsError, StabilityError
from .model import (
    ElasticModel,
    SimulationConfig,
    SourceSpec,
    StencilCoefficients,
    WaveState,
    allocate_state,
)
from .stability import check_config

_UNIT_WEIGHT = (np.float32(1.0),)


def ricker(t, f0: float, t0: float = 0.0):
    """Ricker wavelet (1 - 2 pi^2 f0^2 (t-t0)^2) exp(-pi^2 f0^2 (t-t0)^2)."""
    if not f0 > 0:
        raise ConfigError(f"Ricker central frequency must be positive, got {f0}")
    tau = np.asarray(t, dtype=np.float64) - t0
    a = (math.pi * f0) ** 2 * tau * tau
    out = (1.0 - 2.0 * a) * np.exp(-a)
    return out if out.ndim else float(out)


def term_count_per_cell(scheme: str, m: int) -> int:
    """Weighted-difference term evaluations per interior cell per step."""
    return 8 * m if scheme == "balanced" else 4 * m + 4


# ---------------------------------------------------------------------------
# staggered difference flavors; a:b are output rows in array coordinates,
# jlo:jhi the output column window. "plus" taps sit at +m-1 / -m, "minus"
# taps at +m / -m+1; the unit-weight plus/minus forms at m=1 are the
# second-order operators of the non-balanced scheme.
# ---------------------------------------------------------------------------

def _diff_plus_x(f, c, a, b, jlo, jhi):
    js = slice(jlo, jhi)
    acc = c[0] * (f[a:b, js] - f[a - 1:b - 1, js])
    for m in range(2, len(c) + 1):
        acc += c[m - 1] * (f[a + m - 1:b + m - 1, js] - f[a - m:b - m, js])
    return acc


def _diff_minus_x(f, c, a, b, jlo, jhi):
    js = slice(jlo, jhi)
    acc = c[0] * (f[a + 1:b + 1, js] - f[a:b, js])
    for m in range(2, len(c) + 1):
        acc += c[m - 1] * (f[a + m:b + m, js] - f[a - m + 1:b - m + 1, js])
    return acc


def _diff_plus_z(f, c, a, b, jlo, jhi):
    rs = slice(a, b)
    acc = c[0] * (f[rs, jlo:jhi] - f[rs, jlo - 1:jhi - 1])
    for m in range(2, len(c) + 1):
        acc += c[m - 1] * (f[rs, jlo + m - 1:jhi + m - 1] - f[rs, jlo - m:jhi - m])
    return acc


def _diff_minus_z(f, c, a, b, jlo, jhi):
    rs = slice(a, b)
    acc = c[0] * (f[rs, jlo + 1:jhi + 1] - f[rs, jlo:jhi])
    for m in range(2, len(c) + 1):
        acc += c[m - 1] * (f[rs, jlo + m:jhi + m] - f[rs, jlo - m + 1:jhi - m + 1])
    return acc


class Stepper:
    """Precomputed update factors plus the block schedule for one run.

    A stepper owns no wavefield; callers pass the WaveState to step().
    Internal data parallelism splits interior rows into a fixed number of
    contiguous blocks with a barrier between the velocity and stress
    phases, so results are bitwise identical for any thread count.
    """

    def __init__(
        self,
        model: ElasticModel,
        coeffs: StencilCoefficients,
        scheme: str,
        dt: float,
        h: float,
        threads: int = 1,
    ):
        if scheme not in ("balanced", "non_balanced"):
            raise ConfigError(f"unknown scheme {scheme!r}")
        nx, nz = model.shape
        m = coeffs.m
        if nx < 2 * m + 2 or nz < 2 * m + 2:
            raise ConfigError(f"model {nx}x{nz} too small for operator half-length {m}")
        self.scheme = scheme
        self.m = m
        self.nx, self.nz = nx, nz
        self.jlo, self.jhi = m, nz - m
        self.ilo, self.ihi = m, nx - m
        self.long = tuple(np.float32(v) for v in coeffs.c)
        self.short = self.long if scheme == "balanced" else _UNIT_WEIGHT
        inner = (slice(self.ilo, self.ihi), slice(self.jlo, self.jhi))
        scale = dt / h
        self.f_b = (scale / model.rho[inner]).astype(np.float32)
        self.f_l2m = ((model.lam[inner] + 2.0 * model.mu[inner]) * scale).astype(np.float32)
        self.f_lam = (model.lam[inner] * scale).astype(np.float32)
        self.f_mu = (model.mu[inner] * scale).astype(np.float32)
        self.interior_cells = (self.ihi - self.ilo) * (self.jhi - self.jlo)
        self.term_evals = 0
        rows = self.ihi - self.ilo
        nblocks = max(1, min(int(threads), rows))
        bounds = np.linspace(self.ilo, self.ihi, nblocks + 1).astype(int)
        self._blocks = [(int(bounds[k]), int(bounds[k + 1])) for k in range(nblocks)]
        self._pool = ThreadPoolExecutor(max_workers=nblocks) if nblocks > 1 else None

    def close(self):
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _count(self, taps: int, a: int, b: int) -> None:
        self.term_evals += taps * (b - a) * (self.jhi - self.jlo)

    def _velocity_block(self, state, a, b):
        jlo, jhi = self.jlo, self.jhi
        fa, fb = a - self.ilo, b - self.ilo
        bfac = self.f_b[fa:fb]
        d_txx = _diff_plus_x(state.txx, self.long, a, b, jlo, jhi)
        self._count(len(self.long), a, b)
        d_txz_z = _diff_plus_z(state.txz, self.short, a, b, jlo, jhi)
        self._count(len(self.short), a, b)
        state.vx[a:b, jlo:jhi] += bfac * (d_txx + d_txz_z)
        d_txz_x = _diff_minus_x(state.txz, self.short, a, b, jlo, jhi)
        self._count(len(self.short), a, b)
        d_tzz = _diff_minus_z(state.tzz, self.long, a, b, jlo, jhi)
        self._count(len(self.long), a, b)
        state.vz[a:b, jlo:jhi] += bfac * (d_txz_x + d_tzz)

    def _stress_block(self, state, a, b):
        jlo, jhi = self.jlo, self.jhi
        fa, fb = a - self.ilo, b - self.ilo
        d_vx = _diff_minus_x(state.vx, self.short, a, b, jlo, jhi)
        self._count(len(self.short), a, b)
        d_vz = _diff_plus_z(state.vz, self.short, a, b, jlo, jhi)
        self._count(len(self.short), a, b)
        state.txx[a:b, jlo:jhi] += self.f_l2m[fa:fb] * d_vx + self.f_lam[fa:fb] * d_vz
        state.tzz[a:b, jlo:jhi] += self.f_lam[fa:fb] * d_vx + self.f_l2m[fa:fb] * d_vz
        d_vz_x = _diff_plus_x(state.vz, self.long, a, b, jlo, jhi)
        self._count(len(self.long), a, b)
        d_vx_z = _diff_minus_z(state.vx, self.long, a, b, jlo, jhi)
        self._count(len(self.long), a, b)
        state.txz[a:b, jlo:jhi] += self.f_mu[fa:fb] * (d_vz_x + d_vx_z)

    def _run_phase(self, fn, state):
        if self._pool is None:
            for a, b in self._blocks:
                fn(state, a, b)
        else:
            list(self._pool.map(lambda blk: fn(state, blk[0], blk[1]), self._blocks))

    def step(self, state: WaveState) -> WaveState:
        """One leapfrog step in place; increments time_index."""
        self._run_phase(self._velocity_block, state)
        self._run_phase(self._stress_block, state)
        state.time_index += 1
        return state


def step_balanced(state, model, coeffs, dt, h) -> WaveState:
    """One balanced step (uniform length-M operators). Convenience wrapper;
    loops should build one Stepper and reuse it."""
    with Stepper(model, coeffs, "balanced", dt, h) as s:
        return s.step(state)


def step_nonbalanced(state, model, coeffs, dt, h) -> WaveState:
    """One non-balanced step (mixed-length operators)."""
    with Stepper(model, coeffs, "non_balanced", dt, h) as s:
        return s.step(state)


def inject_source(state: WaveState, spec: SourceSpec, t: float, dt: float) -> WaveState:
    """Add the wavelet sample at time t into the state.

    Explosive sources add ricker(t)*amplitude*dt to txx and tzz at the
    (ix+1/2, iz) node; vertical forces add the same to vz at the nearest
    vz node. The dt scaling keeps traces step-size invariant to leading
    order.
    """
    nx, nz = state.vx.shape
    if not (0 <= spec.ix < nx and 0 <= spec.iz < nz):
        raise ConfigError(f"source position ({spec.ix}, {spec.iz}) outside the {nx}x{nz} grid")
    a = np.float32(ricker(t, spec.f0, spec.t0) * spec.amplitude * dt)
    if spec.mechanism == "explosive":
        state.txx[spec.ix, spec.iz] += a
        state.tzz[spec.ix, spec.iz] += a
    else:
        state.vz[spec.ix, spec.iz] += a
    return state


def _taper_profile(n: int, width: int, decay: float):
    """1D Cerjan taper: exp(-(decay*(width-d))^2) for edge distance d < width."""
    g = np.ones(n, dtype=np.float32)
    for d in range(width):
        v = np.float32(math.exp(-((decay * (width - d)) ** 2)))
        g[d] = v
        g[n - 1 - d] = v
    return g


class SpongeTaper:
    """Separable multiplicative edge taper applied to all five fields.

    Only the edge strips are touched, so interior values stay bitwise
    unchanged. Applying the x strips over all columns and then the z
    strips over all rows realizes the product gx(i)*gz(j).
    """

    def __init__(self, nx: int, nz: int, width: int, decay: float):
        if width < 0:
            raise ConfigError(f"sponge width must be >= 0, got {width}")
        if width > 0 and not (0 < decay <= 1):
            raise ConfigError(f"sponge decay must be in (0, 1], got {decay}")
        if width >= min(nx, nz) // 2:
            raise ConfigError(f"sponge width {width} too large for a {nx}x{nz} grid")
        self.width = width
        self.gx = _taper_profile(nx, width, decay)
        self.gz = _taper_profile(nz, width, decay)

    def apply(self, state: WaveState) -> None:
        w = self.width
        if w == 0:
            return
        lo_x = self.gx[:w, None]
        hi_x = self.gx[-w:, None]
        lo_z = self.gz[None, :w]
        hi_z = self.gz[None, -w:]
        for _, f in state.fields():
            f[:w, :] *= lo_x
            f[-w:, :] *= hi_x
            f[:, :w] *= lo_z
            f[:, -w:] *= hi_z


def apply_sponge(state: WaveState, width: int, decay: float) -> WaveState:
    """Apply the Cerjan edge taper once; width 0 is the identity."""
    nx, nz = state.vx.shape
    SpongeTaper(nx, nz, width, decay).apply(state)
    return state


@dataclass
class SeismogramSet:
    """Per-receiver time series of one recorded field component."""

    component: str
    positions: tuple[tuple[int, int], ...]
    data: np.ndarray  # (n_receivers, nt) float32
    dt: float

    def times(self):
        """Sample times; sample n is recorded after step n+1 completes."""
        return (np.arange(self.data.shape[1]) + 1) * self.dt


@dataclass
class RunStats:
    """Cost counters and health flags for one simulation run."""

    scheme: str
    m: int
    steps: int
    interior_cells: int
    term_evals: int
    wall_seconds: float
    aborted: bool = False
    abort_step: int | None = None
    max_field_history: np.ndarray | None = None

    @property
    def term_evals_per_cell_step(self) -> float:
        if self.steps == 0 or self.interior_cells == 0:
            return 0.0
        return self.term_evals / (self.interior_cells * self.steps)


@dataclass
class SimulationResult:
    seismograms: SeismogramSet
    stats: RunStats
    snapshots: dict[int, dict[str, np.ndarray]] = field(default_factory=dict)


def run_simulation(
    config: SimulationConfig,
    model: ElasticModel,
    *,
    threads: int = 1,
    record_history: bool = False,
    blowup_factor: float | None = 1e9,
) -> SimulationResult:
    """Run nt steps with source injection, sponge, and receiver recording.

    Refuses configurations that fail the stability check unless
    config.allow_unstable is set. Non-finite fields abort the run with a
    NumericsError carrying the step index; with the override set the run
    instead returns early with stats.aborted and the max-field history
    (norm tracking). record_history additionally stores max(|vx|, |vz|)
    per step; with the override set, growth beyond blowup_factor times
    the early peak also stops the run (set blowup_factor=None to disable).
    """
    if model.shape != config.geometry.shape:
        raise ConfigError(
            f"model grid {model.shape} does not match configured geometry {config.geometry.shape}"
        )
    report = check_config(config, model)
    if report.verdict != "stable" and not config.allow_unstable:
        raise StabilityError(
            f"configuration is unstable: r_actual={report.r_actual:.6g} exceeds "
            f"bound {report.bound_s:.6g}; rerun with the stability override to force it",
            report=report,
        )
    geom = config.geometry
    state = allocate_state(geom, config.coeffs.m)
    taper = SpongeTaper(geom.nx, geom.nz, config.sponge.width, config.sponge.decay)
    track = record_history or config.allow_unstable
    history = np.zeros(config.nt) if track else None
    n_rec = len(config.receivers)
    data = np.zeros((n_rec, config.nt), dtype=np.float32)
    rec_ix = np.array([p[0] for p in config.receivers], dtype=np.intp)
    rec_iz = np.array([p[1] for p in config.receivers], dtype=np.intp)
    snap_at = set(config.snapshot_steps)
    snapshots: dict[int, dict[str, np.ndarray]] = {}
    aborted = False
    abort_step = None
    steps_done = 0
    warmup = max(1, min(300, config.nt // 4)) if config.nt else 1

    t_start = time.perf_counter()
    with Stepper(
        model, config.coeffs, config.scheme, config.dt, geom.h, threads=threads
    ) as stepper:
        comp = getattr(state, config.component)
        for n in range(config.nt):
            stepper.step(state)
            inject_source(state, config.source, t=state.time_index * config.dt, dt=config.dt)
            taper.apply(state)
            if n_rec:
                data[:, n] = comp[rec_ix, rec_iz]
            if state.time_index in snap_at:
                snapshots[state.time_index] = {name: f.copy() for name, f in state.fields()}
            steps_done = n + 1
            peak = max(
                float(state.vx.max()), -float(state.vx.min()),
                float(state.vz.max()), -float(state.vz.min()),
            )
            if track:
                history[n] = peak
            if not math.isfinite(peak):
                if not config.allow_unstable:
                    raise NumericsError(
                        f"non-finite field values after step {steps_done}", step=steps_done
                    )
                aborted = True
                abort_step = steps_done
                break
            if (
                blowup_factor is not None
                and config.allow_unstable
                and n >= warmup
                and history is not None
            ):
                early = history[:warmup].max()
                if early > 0 and peak > blowup_factor * early:
                    aborted = True
                    abort_step = steps_done
                    break
        wall = time.perf_counter() - t_start
        stats = RunStats(
            scheme=config.scheme,
            m=config.coeffs.m,
            steps=steps_done,
            interior_cells=stepper.interior_cells,
            term_evals=stepper.term_evals,
            wall_seconds=wall,
            aborted=aborted,
            abort_step=abort_step,
            max_field_history=history[:steps_done] if history is not None else None,
        )
    if not aborted and steps_done and not state.all_finite():
        if not config.allow_unstable:
            raise NumericsError(f"non-finite field values after step {steps_done}", step=steps_done)
        stats.aborted = True
        stats.abort_step = steps_done
    seis = SeismogramSet(
        component=config.component,
        positions=tuple(config.receivers),
        data=data[:, :steps_done],
        dt=config.dt,
    )
    return SimulationResult(seismograms=seis, stats=stats, snapshots=snapshots)
