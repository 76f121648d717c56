"""Stencil weight computation for balanced and non-balanced operators.

The non-balanced scheme pairs one length-M operator with unit-weight
second-order operators, so its weights are fitted to the product form

    sin(kh/2) * sum_m c_m sin((m-1/2) kh)  ~  (kh)^2 / 4

over a wavenumber band (space-domain fit), or to the two-dimensional
time-space dispersion relation with the Courant number folded in. The
balanced scheme fits the plain symbol 2*sum c_m sin((m-1/2) kh) ~ kh.

All fits are linear least squares over uniform samples on (0, kh_max],
solved through the normal equations (SPD solve) up to M=10 and by QR
beyond. Published reference weights for M in {3, 5, 7} are built in,
together with per-M fit bands calibrated to reproduce them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from .errors import CoefficientError
from .model import StencilCoefficients

#: Published non-balanced space-domain weights (half-lengths 3, 5, 7).
TABLE1_WEIGHTS = {
    3: (1.40887, -0.16472, 0.0172717),
    5: (1.53147, -0.252544, 0.0607465, -0.0135055, 0.00199132),
    7: (1.59906, -0.310692, 0.10345, -0.0398274, 0.0150857, -0.00487876, 0.00104241),
}

#: Fit bands (as fractions of pi) recovering the published weights to
#: better than 2e-3 per weight; found by calibrate_fit_band's sweep.
CALIBRATED_BAND_FRACTION = {3: 0.390, 5: 0.580, 7: 0.785}

DEFAULT_N_SAMPLES = 2001


@dataclass(frozen=True)
class FitBand:
    """Sampling band for least-squares fits.

    kh_max bounds the dimensionless wavenumber range (0, kh_max]; angles
    and courant are consumed only by the time-space fit.
    """

    kh_max: float
    n_samples: int = DEFAULT_N_SAMPLES
    angles: tuple[float, ...] = ()
    courant: float | None = None

    def __post_init__(self):
        if not 0 < self.kh_max <= math.pi:
            raise CoefficientError(f"kh_max must lie in (0, pi], got {self.kh_max}")
        if self.courant is not None and not 0 < self.courant < 1:
            raise CoefficientError(f"Courant number must lie in (0, 1), got {self.courant}")

    def validate_for(self, m: int) -> None:
        if self.n_samples < 4 * m:
            raise CoefficientError(
                f"need at least 4*M={4 * m} samples for a length-{m} fit, got {self.n_samples}"
            )

    def kh_samples(self):
        """Uniform samples on (0, kh_max]."""
        return np.linspace(self.kh_max / self.n_samples, self.kh_max, self.n_samples)


def stencil_symbol(c, kh):
    """Operator symbol sum_m c_m sin((m-1/2) kh); c is a weight sequence."""
    c = np.asarray(c, dtype=np.float64)
    orders = np.arange(1, len(c) + 1) - 0.5
    kh = np.asarray(kh, dtype=np.float64)
    return np.sin(kh[..., None] * orders) @ c


def default_fit_band(m: int, n_samples: int = DEFAULT_N_SAMPLES, **kwargs) -> FitBand:
    """Per-M default band: calibrated for M in {3,5,7}, interpolated elsewhere."""
    if m in CALIBRATED_BAND_FRACTION:
        frac = CALIBRATED_BAND_FRACTION[m]
    else:
        ms = sorted(CALIBRATED_BAND_FRACTION)
        frac = float(np.interp(m, ms, [CALIBRATED_BAND_FRACTION[k] for k in ms]))
        frac = min(max(frac, 0.30), 0.90)
    return FitBand(kh_max=frac * math.pi, n_samples=n_samples, **kwargs)


def taylor_coefficients(m: int) -> StencilCoefficients:
    """Classical staggered first-derivative Taylor weights of half-length m.

    Solves the odd-moment system sum_j c_j (2j-1)^(2p-1) = delta_{p,1},
    p = 1..m, in exact rational arithmetic, then rounds once to float.
    Exactness makes the solve safe at any m (no conditioning hazard), so
    the long reference operators (e.g. M=30) come out correct.
    """
    if m < 1:
        raise CoefficientError(f"operator half-length must be >= 1, got m={m}")
    rows = [
        [Fraction((2 * j - 1) ** (2 * p - 1)) for j in range(1, m + 1)] + [Fraction(int(p == 1))]
        for p in range(1, m + 1)
    ]
    for col in range(m):
        piv = max(range(col, m), key=lambda r: abs(rows[r][col]))
        rows[col], rows[piv] = rows[piv], rows[col]
        for r in range(m):
            if r != col and rows[r][col]:
                f = rows[r][col] / rows[col][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    c = tuple(float(rows[i][m] / rows[i][i]) for i in range(m))
    return StencilCoefficients(m=m, c=c, provenance="taylor")


def table1_coefficients(m: int) -> StencilCoefficients:
    """The built-in published non-balanced weights; m must be 3, 5 or 7."""
    if m not in TABLE1_WEIGHTS:
        raise CoefficientError(
            f"no published weights for M={m}; available: {sorted(TABLE1_WEIGHTS)}"
        )
    return StencilCoefficients(m=m, c=TABLE1_WEIGHTS[m], provenance="table1")


def _solve_least_squares(a, b, m: int):
    """Deterministic LS solve.

    Normal equations with an SPD factorization for m <= 10 (tiny systems,
    benign conditioning on ordinary bands); orthogonal factorization above,
    and also as a fallback when the normal equations turn ill-conditioned
    (they square the condition number, which bites on very narrow bands).
    """
    if m <= 10:
        ata = a.T @ a
        atb = a.T @ b
        cond = float(np.linalg.cond(ata))
        if np.isfinite(cond) and cond <= 1e10:
            try:
                return scipy.linalg.solve(ata, atb, assume_a="pos")
            except np.linalg.LinAlgError:
                pass
    sol, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < m:
        cond = float(np.linalg.cond(a))
        raise CoefficientError(
            f"design matrix is rank deficient: rank {rank} below parameter "
            f"count {m} (cond ~ {cond:.3e})"
        )
    return sol


def solve_space_domain(m: int, band: FitBand) -> StencilCoefficients:
    """Non-balanced space-domain weights (velocity independent).

    Minimizes sum over sampled kh of
        [sin(kh/2) * sum_j c_j sin((j-1/2) kh) - (kh)^2/4]^2.
    """
    if m < 1:
        raise CoefficientError(f"operator half-length must be >= 1, got m={m}")
    band.validate_for(m)
    kh = band.kh_samples()
    orders = np.arange(1, m + 1) - 0.5
    a = np.sin(0.5 * kh)[:, None] * np.sin(kh[:, None] * orders)
    b = 0.25 * kh * kh
    c = _solve_least_squares(a, b, m)
    return StencilCoefficients(m=m, c=tuple(c), provenance="space_domain_ls", kh_max=band.kh_max)


def solve_balanced_space_domain(m: int, band: FitBand) -> StencilCoefficients:
    """Balanced space-domain weights: fit 2*sum c_j sin((j-1/2) kh) ~ kh."""
    if m < 1:
        raise CoefficientError(f"operator half-length must be >= 1, got m={m}")
    band.validate_for(m)
    kh = band.kh_samples()
    orders = np.arange(1, m + 1) - 0.5
    a = 2.0 * np.sin(kh[:, None] * orders)
    c = _solve_least_squares(a, kh, m)
    return StencilCoefficients(m=m, c=tuple(c), provenance="balanced_space_ls", kh_max=band.kh_max)


def solve_time_space_domain(m: int, band: FitBand) -> StencilCoefficients:
    """Non-balanced time-space weights for a given Courant number r.

    Minimizes, over sampled (kh, theta) with kxh = kh cos(theta) and
    kzh = kh sin(theta),

        [sin(kxh/2) sum_j c_j sin((j-1/2) kxh)
         + sin(kzh/2) sum_j c_j sin((j-1/2) kzh)
         - (1 - cos(kh r)) / (2 r^2)]^2.

    The result depends on r (hence on the wave speed the caller built r
    from); taking r -> 0 with a single direction recovers the space fit.
    """
    if m < 1:
        raise CoefficientError(f"operator half-length must be >= 1, got m={m}")
    band.validate_for(m)
    if band.courant is None:
        raise CoefficientError("time-space fit needs band.courant (r = beta*dt/h)")
    if not band.angles:
        raise CoefficientError("time-space fit needs a non-empty angle set")
    r = band.courant
    kh = band.kh_samples()
    orders = np.arange(1, m + 1) - 0.5
    blocks_a, blocks_b = [], []
    target = (1.0 - np.cos(kh * r)) / (2.0 * r * r)
    for theta in band.angles:
        kxh = kh * math.cos(theta)
        kzh = kh * math.sin(theta)
        a = (
            np.sin(0.5 * kxh)[:, None] * np.sin(kxh[:, None] * orders)
            + np.sin(0.5 * kzh)[:, None] * np.sin(kzh[:, None] * orders)
        )
        blocks_a.append(a)
        blocks_b.append(target)
    c = _solve_least_squares(np.vstack(blocks_a), np.concatenate(blocks_b), m)
    coeffs = StencilCoefficients(
        m=m, c=tuple(c), provenance="time_space_ls", kh_max=band.kh_max
    )
    # the fit is meaningless for configurations the scheme cannot run
    from .stability import bound_nonbalanced

    bound = bound_nonbalanced(coeffs)
    if r >= bound:
        raise CoefficientError(
            f"requested Courant number r={r} meets or exceeds the stability bound "
            f"{bound:.4f} of the fitted weights"
        )
    return coeffs


def calibrate_fit_band(
    m: int,
    reference=None,
    fractions=None,
    n_samples: int = DEFAULT_N_SAMPLES,
) -> tuple[FitBand, float]:
    """Sweep kh_max and pick the band whose space-domain fit best matches
    the reference weights (max-abs deviation); returns (band, deviation).

    The sweep covers kh_max/pi in [0.30, 0.95] at 0.005 resolution; the
    published M=3 weights sit near 0.39*pi, below coarser sweeps' reach.
    """
    if reference is None:
        if m not in TABLE1_WEIGHTS:
            raise CoefficientError(f"no built-in reference weights for M={m}")
        reference = TABLE1_WEIGHTS[m]
    reference = np.asarray(reference, dtype=np.float64)
    if fractions is None:
        fractions = np.arange(0.30, 0.9501, 0.005)
    best_band, best_dev = None, math.inf
    for frac in fractions:
        band = FitBand(kh_max=float(frac) * math.pi, n_samples=n_samples)
        try:
            c = solve_space_domain(m, band)
        except CoefficientError:
            continue
        dev = float(np.abs(c.as_array() - reference).max())
        if dev < best_dev:
            best_band, best_dev = band, dev
    if best_band is None:
        raise CoefficientError(f"calibration sweep found no solvable band for M={m}")
    return best_band, best_dev


def export_coefficients(coeffs: StencilCoefficients) -> str:
    """Plain-text export: one header line, then one weight per line (9 sig digits)."""
    kh_max = "none" if coeffs.kh_max is None else f"{coeffs.kh_max:.9g}"
    lines = [f"M={coeffs.m} provenance={coeffs.provenance} kh_max={kh_max}"]
    lines += [f"{w:.9g}" for w in coeffs.c]
    return "\n".join(lines) + "\n"


def parse_coefficients(text: str, provenance: str = "user") -> StencilCoefficients:
    """Inverse of export_coefficients; foreign files load with provenance 'user'."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("M="):
        raise CoefficientError("coefficient text must start with an 'M=... provenance=... kh_max=...' line")
    header = dict(part.split("=", 1) for part in lines[0].split())
    try:
        m = int(header["M"])
    except (KeyError, ValueError):
        raise CoefficientError(f"malformed coefficient header: {lines[0]!r}")
    kh_max = header.get("kh_max", "none")
    weights = []
    for ln in lines[1:]:
        try:
            weights.append(float(ln))
        except ValueError:
            raise CoefficientError(f"malformed weight line: {ln!r}")
    if len(weights) != m:
        raise CoefficientError(f"header announces M={m} but {len(weights)} weights follow")
    return StencilCoefficients(
        m=m,
        c=tuple(weights),
        provenance=provenance,
        kh_max=None if kh_max == "none" else float(kh_max),
    )


def coefficients_for(method: str, m: int, band: FitBand | None = None) -> StencilCoefficients:
    """Dispatch helper used by the CLI and config layer."""
    if method == "taylor":
        return taylor_coefficients(m)
    if method == "table1":
        return table1_coefficients(m)
    if method == "space_domain_ls":
        return solve_space_domain(m, band or default_fit_band(m))
    if method == "balanced_space_ls":
        return solve_balanced_space_domain(m, band or default_fit_band(m))
    if method == "time_space_ls":
        if band is None:
            raise CoefficientError("time_space_ls needs an explicit band with courant and angles")
        return solve_time_space_domain(m, band)
    raise CoefficientError(f"unknown coefficient method {method!r}")
