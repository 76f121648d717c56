"""Staggered-grid data model: grid geometry, material model, wavefields.

Staggering convention (fixed by documentation, all arrays stored full-size
nx-by-nz, axis 0 = x, axis 1 = z):

    vx  [i, j] lives at (i,     j    )
    vz  [i, j] lives at (i+1/2, j+1/2)
    txx [i, j] lives at (i+1/2, j    )
    tzz [i, j] lives at (i+1/2, j    )
    txz [i, j] lives at (i,     j+1/2)

Material parameters are sampled at their nominal node without averaging
at staggered locations (staircase interfaces). Wavefields are float32;
material and analysis math is float64.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import CoefficientError, ConfigError, ModelError

WAVEFIELD_DTYPE = np.float32

SCHEMES = ("balanced", "non_balanced")
PROVENANCES = ("taylor", "space_domain_ls", "time_space_ls", "balanced_space_ls", "table1", "user")
MECHANISMS = ("explosive", "vertical_force")
COMPONENTS = ("vx", "vz", "txx", "tzz", "txz")


@dataclass(frozen=True)
class GridGeometry:
    """Uniform 2D grid: nx cells in x, nz cells in z, spacing h meters."""

    nx: int
    nz: int
    h: float

    def __post_init__(self):
        if self.nx < 4 or self.nz < 4:
            raise ModelError(f"grid too small: nx={self.nx}, nz={self.nz} (need at least 4x4)")
        if not self.h > 0:
            raise ModelError(f"grid spacing must be positive, got h={self.h}")

    def require_operator(self, m: int) -> None:
        """Check that a half-length-m stencil fits: nx, nz >= 2m + 2."""
        need = 2 * m + 2
        if self.nx < need or self.nz < need:
            raise ModelError(
                f"grid {self.nx}x{self.nz} too small for operator half-length M={m} "
                f"(need at least {need} cells per axis)"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.nz)


class ElasticModel:
    """Gridded isotropic elastic material: vp, vs, rho plus derived Lame fields.

    Use :func:`build_model` to construct from velocity/density grids; the
    constructor trusts its inputs.
    """

    __slots__ = ("vp", "vs", "rho", "lam", "mu")

    def __init__(self, vp, vs, rho, lam, mu):
        self.vp = vp
        self.vs = vs
        self.rho = rho
        self.lam = lam
        self.mu = mu

    @property
    def shape(self) -> tuple[int, int]:
        return self.vp.shape

    @property
    def has_acoustic_regions(self) -> bool:
        """True where vs == 0 somewhere (degenerate acoustic cells)."""
        return bool((self.vs == 0.0).any())

    def alpha(self):
        """P velocity recomputed from the Lame fields, sqrt((lam+2mu)/rho)."""
        return np.sqrt((self.lam + 2.0 * self.mu) / self.rho)

    def beta(self):
        """S velocity recomputed from the Lame fields, sqrt(mu/rho)."""
        return np.sqrt(self.mu / self.rho)

    def max_vp(self) -> float:
        return float(self.vp.max())


def build_model(vp, vs, rho) -> ElasticModel:
    """Build an ElasticModel from P velocity, S velocity and density grids.

    lam = rho*(vp^2 - 2 vs^2) and mu = rho*vs^2. Requires rho > 0, vp > 0
    and 0 <= vs < vp pointwise; vs == 0 cells are accepted (acoustic
    degenerate case) with a warning.
    """
    vp = np.asarray(vp, dtype=np.float64)
    vs = np.asarray(vs, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    if not (vp.shape == vs.shape == rho.shape) or vp.ndim != 2:
        raise ModelError(
            f"material grids must share one 2D shape, got vp{vp.shape} vs{vs.shape} rho{rho.shape}"
        )
    if not (rho > 0).all():
        raise ModelError("density must be positive everywhere")
    if not (vp > 0).all():
        raise ModelError("P velocity must be positive everywhere")
    if (vs < 0).any():
        raise ModelError("S velocity must be non-negative")
    if (vs >= vp).any():
        bad = int((vs >= vp).sum())
        raise ModelError(f"S velocity must stay below P velocity everywhere ({bad} violating cells)")
    if (vs == 0).any():
        warnings.warn("model contains vs=0 cells; treating them as acoustic regions", stacklevel=2)
    lam = rho * (vp * vp - 2.0 * vs * vs)
    mu = rho * vs * vs
    return ElasticModel(vp=vp, vs=vs, rho=rho, lam=lam, mu=mu)


class WaveState:
    """The five staggered wavefields at one time level, all nx-by-nz float32."""

    __slots__ = ("vx", "vz", "txx", "tzz", "txz", "time_index")

    def __init__(self, vx, vz, txx, tzz, txz, time_index: int = 0):
        self.vx = vx
        self.vz = vz
        self.txx = txx
        self.tzz = tzz
        self.txz = txz
        self.time_index = time_index

    def fields(self):
        """Yield (name, array) for the five wavefields."""
        for name in COMPONENTS:
            yield name, getattr(self, name)

    def max_abs(self) -> float:
        return max(float(np.abs(f).max()) for _, f in self.fields())

    def all_finite(self) -> bool:
        return all(np.isfinite(f).all() for _, f in self.fields())

    def copy(self) -> "WaveState":
        return WaveState(
            self.vx.copy(), self.vz.copy(), self.txx.copy(), self.tzz.copy(), self.txz.copy(),
            self.time_index,
        )


def allocate_state(geometry: GridGeometry, m: int) -> WaveState:
    """Zero-initialized WaveState; rejects grids too small for half-length m."""
    geometry.require_operator(m)
    shape = geometry.shape
    return WaveState(*(np.zeros(shape, WAVEFIELD_DTYPE) for _ in range(5)), time_index=0)


@dataclass(frozen=True)
class StencilCoefficients:
    """Antisymmetric staggered first-derivative weights c_1..c_M.

    The operator is (1/h)*sum_m c_m (f[+m-1/2] - f[-m+1/2]). kh_max records
    the fit band for least-squares provenances (None for taylor/table1/user).
    """

    m: int
    c: tuple[float, ...]
    provenance: str
    kh_max: float | None = None

    def __post_init__(self):
        if self.m < 1:
            raise CoefficientError(f"operator half-length must be >= 1, got m={self.m}")
        if len(self.c) != self.m:
            raise CoefficientError(f"expected {self.m} weights, got {len(self.c)}")
        if self.provenance not in PROVENANCES:
            raise CoefficientError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))
        if not self.c[0] > 0:
            raise CoefficientError(f"leading weight must be positive, got c_1={self.c[0]}")
        self._check_alternating()
        self._check_consistency()

    def _check_alternating(self):
        # built-in and Taylor-derived sets must alternate sign; user sets only warn
        ok = all(v == 0.0 or (v > 0) == (k % 2 == 0) for k, v in enumerate(self.c))
        if ok:
            return
        if self.provenance in ("taylor", "table1"):
            raise CoefficientError(
                f"{self.provenance} weights must alternate in sign: {self.c}"
            )
        warnings.warn(
            f"{self.provenance} weights do not alternate in sign; "
            "stability and dispersion guarantees may not hold",
            stacklevel=3,
        )

    def _check_consistency(self):
        # long-wavelength consistency, checked at kh = 1e-3 and 1e-4: the
        # residual |2*sum c_m sin((m-1/2)kh) - kh| must be small and must keep
        # shrinking with kh. Optimized sets carry a first-moment offset
        # (sum c_m(2m-1) != 1), so their residual decays only linearly and can
        # reach ~16% relative for wide-band M=1 fits; the bounds below admit
        # that while rejecting sign errors and garbage weights.
        res3 = abs(self.residual_vs_kh(1e-3))
        res4 = abs(self.residual_vs_kh(1e-4))
        if res3 > 0.25e-3 or res4 > 0.25e-4 or res4 > max(0.15 * res3, 1e-15):
            msg = (
                f"weights are inconsistent at long wavelengths: residuals "
                f"{res3:.3e} at kh=1e-3, {res4:.3e} at kh=1e-4"
            )
            if self.provenance == "user":
                warnings.warn(msg, stacklevel=3)
                return
            raise CoefficientError(msg)

    def residual_vs_kh(self, kh: float) -> float:
        """Symbol consistency residual 2*sum c_m sin((m-1/2)kh) - kh."""
        orders = np.arange(1, self.m + 1) - 0.5
        return float(2.0 * np.sin(orders * kh) @ np.asarray(self.c) - kh)

    def as_array(self):
        return np.asarray(self.c, dtype=np.float64)

    def first_moment(self) -> float:
        """sum c_m (2m-1); equals 1 exactly for Taylor weights."""
        return float(np.arange(1, 2 * self.m, 2) @ np.asarray(self.c))


@dataclass(frozen=True)
class SourceSpec:
    """Ricker point source: grid position, central frequency, delay, mechanism."""

    ix: int
    iz: int
    f0: float
    t0: float
    mechanism: str = "explosive"
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.f0 > 0:
            raise ConfigError(f"source central frequency must be positive, got f0={self.f0}")
        if self.t0 < 0:
            raise ConfigError(f"source delay must be non-negative, got t0={self.t0}")
        if self.mechanism not in MECHANISMS:
            raise ConfigError(f"unknown source mechanism {self.mechanism!r}")
        if not np.isfinite(self.amplitude):
            raise ConfigError("source amplitude must be finite")
        if self.t0 < 1.0 / self.f0:
            warnings.warn(
                f"source delay t0={self.t0} is below 1/f0={1.0 / self.f0:.4g}; "
                "the wavelet will be truncated at t=0",
                stacklevel=3,
            )


@dataclass(frozen=True)
class SpongeSpec:
    """Cerjan-style absorbing edge taper: width in cells and decay factor."""

    width: int = 30
    decay: float = 0.015

    def __post_init__(self):
        if self.width < 0:
            raise ConfigError(f"sponge width must be >= 0, got {self.width}")
        if self.width > 0 and not (0 < self.decay <= 1):
            raise ConfigError(f"sponge decay must be in (0, 1], got {self.decay}")


@dataclass(frozen=True)
class SimulationConfig:
    """Fully resolved simulation setup passed to the kernel."""

    geometry: GridGeometry
    dt: float
    nt: int
    scheme: str
    coeffs: StencilCoefficients
    source: SourceSpec
    receivers: tuple[tuple[int, int], ...] = ()
    component: str = "vz"
    sponge: SpongeSpec = field(default_factory=SpongeSpec)
    allow_unstable: bool = False
    snapshot_steps: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"time step must be positive, got dt={self.dt}")
        if self.nt < 0:
            raise ConfigError(f"step count must be >= 0, got nt={self.nt}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r} (expected one of {SCHEMES})")
        if self.component not in COMPONENTS:
            raise ConfigError(f"unknown recorded component {self.component!r}")
        self.geometry.require_operator(self.coeffs.m)
        if self.sponge.width >= min(self.geometry.nx, self.geometry.nz) // 2:
            raise ConfigError(
                f"sponge width {self.sponge.width} must stay below half the grid "
                f"({self.geometry.nx}x{self.geometry.nz})"
            )
        margin = max(self.sponge.width, self.coeffs.m)
        self._require_inside("source", self.source.ix, self.source.iz, margin)
        for k, (ix, iz) in enumerate(self.receivers):
            self._require_inside(f"receiver {k}", ix, iz, margin)

    def _require_inside(self, what: str, ix: int, iz: int, margin: int) -> None:
        nx, nz = self.geometry.nx, self.geometry.nz
        if not (margin < ix < nx - 1 - margin and margin < iz < nz - 1 - margin):
            raise ConfigError(
                f"{what} at ({ix}, {iz}) is not strictly inside the non-sponge interior "
                f"(margin {margin} cells on a {nx}x{nz} grid)"
            )
