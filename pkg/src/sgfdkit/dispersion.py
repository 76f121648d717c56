"""Grid-dispersion error curves and mixed-derivative error surfaces.

The phase-velocity error ratio delta = v_FD / v of a plane wave with
dimensionless wavenumber kh propagating at angle theta is

    delta = (2 / (r kh)) * asin(r * sqrt(q)),

where r = v*dt/h is the Courant number of the wave under study (built
from alpha for P, beta for S; the q symbols below are wave independent)
and

    balanced:      q1 = G(kh cos t)^2 + G(kh sin t)^2
    non-balanced:  q2 = sin(kh cos t / 2) G(kh cos t)
                      + sin(kh sin t / 2) G(kh sin t)

with G(x) = sum_m c_m sin((m-1/2) x). Samples where r*sqrt(q) leaves the
arcsine domain, or where q2 < 0, are not evaluable; scan_curves keeps
them as flagged rows so curve plots show gaps honestly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import stencil_symbol
from .errors import DispersionSampleError
from .model import StencilCoefficients

WAVES = ("P", "S")

#: Angle set used for figure reproduction.
DEFAULT_ANGLES = (0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2)

#: Homogeneous-model parameters behind the published error-curve figures.
FIGURE_PARAMS = {"alpha": 2598.0, "beta": 1500.0, "h": 20.0, "dt": 1e-3}

FLAG_OK = ""
FLAG_ARCSINE = "unstable_sample"
FLAG_NEGATIVE_SYMBOL = "negative_symbol"


@dataclass(frozen=True)
class DispersionPoint:
    """One sampled point of a dispersion curve; delta is NaN when flagged."""

    kh: float
    theta: float
    delta: float
    wave: str
    scheme: str
    flag: str = FLAG_OK


def courant_number(velocity: float, dt: float, h: float) -> float:
    """r = v*dt/h for the wave whose speed is `velocity`."""
    return velocity * dt / h


def default_kh_grid(n: int = 512):
    """n uniform samples on (0, pi]."""
    return np.linspace(math.pi / n, math.pi, n)


def q_balanced(coeffs: StencilCoefficients, kh, theta: float):
    """Balanced squared symbol q1; wave independent."""
    kh = np.asarray(kh, dtype=np.float64)
    c = coeffs.as_array()
    gx = stencil_symbol(c, kh * math.cos(theta))
    gz = stencil_symbol(c, kh * math.sin(theta))
    return gx * gx + gz * gz


def q_nonbalanced(coeffs: StencilCoefficients, kh, theta: float):
    """Non-balanced product symbol q2; wave independent, may be negative."""
    kh = np.asarray(kh, dtype=np.float64)
    c = coeffs.as_array()
    kxh = kh * math.cos(theta)
    kzh = kh * math.sin(theta)
    return np.sin(0.5 * kxh) * stencil_symbol(c, kxh) + np.sin(0.5 * kzh) * stencil_symbol(c, kzh)


def _delta_from_q(q, kh, r: float):
    """Vectorized delta with flags; q < 0 and arcsine violations flagged."""
    q = np.atleast_1d(np.asarray(q, dtype=np.float64))
    kh = np.atleast_1d(np.asarray(kh, dtype=np.float64))
    flags = np.full(q.shape, FLAG_OK, dtype=object)
    flags[q < 0] = FLAG_NEGATIVE_SYMBOL
    arg = r * np.sqrt(np.clip(q, 0.0, None))
    bad = (arg > 1.0) & (flags == FLAG_OK)
    flags[bad] = FLAG_ARCSINE
    ok = flags == FLAG_OK
    delta = np.full(q.shape, np.nan)
    delta[ok] = 2.0 / (r * kh[ok]) * np.arcsin(arg[ok])
    return delta, flags


def delta_balanced(coeffs: StencilCoefficients, kh: float, theta: float, r: float) -> float:
    """Pointwise balanced error ratio; raises on non-evaluable samples."""
    _require_point(kh, r)
    q = q_balanced(coeffs, kh, theta)
    delta, flags = _delta_from_q(q, kh, r)
    if flags[0] == FLAG_ARCSINE:
        raise DispersionSampleError(
            f"unstable sample: r*sqrt(q1) = {r * math.sqrt(float(q[0])):.6g} > 1 "
            f"at kh={kh}, theta={theta} (q1={float(q[0]):.6g})"
        )
    return float(delta[0])


def delta_nonbalanced(coeffs: StencilCoefficients, kh: float, theta: float, r: float) -> float:
    """Pointwise non-balanced error ratio; raises on non-evaluable samples."""
    _require_point(kh, r)
    q = q_nonbalanced(coeffs, kh, theta)
    delta, flags = _delta_from_q(q, kh, r)
    if flags[0] == FLAG_NEGATIVE_SYMBOL:
        raise DispersionSampleError(
            f"non-balanced symbol negative: q2 = {float(q[0]):.6g} at kh={kh}, theta={theta}; "
            "weights unusable at this sample"
        )
    if flags[0] == FLAG_ARCSINE:
        raise DispersionSampleError(
            f"unstable sample: r*sqrt(q2) = {r * math.sqrt(float(q[0])):.6g} > 1 "
            f"at kh={kh}, theta={theta} (q2={float(q[0]):.6g})"
        )
    return float(delta[0])


def _require_point(kh: float, r: float) -> None:
    if not kh > 0:
        raise DispersionSampleError(f"kh must be positive, got {kh}")
    if not 0 < r < 1:
        raise DispersionSampleError(f"Courant number must lie in (0, 1), got {r}")


def mixed_error_balanced(coeffs: StencilCoefficients, kxh, kzh):
    """Mixed-derivative error (kxh kzh)^2 - [2 G(kxh)]^2 [2 G(kzh)]^2."""
    kxh = np.asarray(kxh, dtype=np.float64)
    kzh = np.asarray(kzh, dtype=np.float64)
    c = coeffs.as_array()
    prod = (2.0 * stencil_symbol(c, kxh)) ** 2 * (2.0 * stencil_symbol(c, kzh)) ** 2
    out = (kxh * kzh) ** 2 - prod
    return out if out.ndim else float(out)


def mixed_error_nonbalanced(coeffs: StencilCoefficients, kxh, kzh):
    """Mixed-derivative error with the product form
    (kxh kzh)^2 - 16 sin(kxh/2) sin(kzh/2) G(kxh) G(kzh)."""
    kxh = np.asarray(kxh, dtype=np.float64)
    kzh = np.asarray(kzh, dtype=np.float64)
    c = coeffs.as_array()
    prod = (
        16.0
        * np.sin(0.5 * kxh)
        * np.sin(0.5 * kzh)
        * stencil_symbol(c, kxh)
        * stencil_symbol(c, kzh)
    )
    out = (kxh * kzh) ** 2 - prod
    return out if out.ndim else float(out)


def scan_curves(
    coeffs: StencilCoefficients,
    scheme: str,
    wave: str,
    angles,
    kh_grid,
    r: float,
) -> list[DispersionPoint]:
    """Dense curve table, one row per (theta, kh), failures flagged not dropped."""
    if scheme not in ("balanced", "non_balanced"):
        raise DispersionSampleError(f"unknown scheme {scheme!r}")
    if wave not in WAVES:
        raise DispersionSampleError(f"unknown wave {wave!r}")
    _require_point(float(np.min(kh_grid)) if len(kh_grid) else 1.0, r)
    qfun = q_balanced if scheme == "balanced" else q_nonbalanced
    points: list[DispersionPoint] = []
    for theta in angles:
        q = qfun(coeffs, kh_grid, theta)
        if scheme == "balanced":
            # q1 >= 0 by construction; negative flags cannot occur
            q = np.maximum(q, 0.0)
        delta, flags = _delta_from_q(q, kh_grid, r)
        for i, kh in enumerate(kh_grid):
            points.append(
                DispersionPoint(
                    kh=float(kh),
                    theta=float(theta),
                    delta=float(delta[i]),
                    wave=wave,
                    scheme=scheme,
                    flag=str(flags[i]),
                )
            )
    return points


def qualifying_fraction(
    coeffs: StencilCoefficients,
    scheme: str,
    theta: float,
    r: float,
    kh_grid=None,
    tol: float = 0.005,
) -> float:
    """Fraction of the kh grid where |delta - 1| < tol; flagged samples fail."""
    if kh_grid is None:
        kh_grid = default_kh_grid()
    qfun = q_balanced if scheme == "balanced" else q_nonbalanced
    q = qfun(coeffs, kh_grid, theta)
    delta, flags = _delta_from_q(q, kh_grid, r)
    good = (flags == FLAG_OK) & (np.abs(delta - 1.0) < tol)
    return float(np.mean(good))


def curves_to_csv(points, path) -> None:
    """CSV emission: header scheme,wave,theta,kh,delta,flag; 9 sig digits."""
    with open(path, "w") as fh:
        fh.write("scheme,wave,theta,kh,delta,flag\n")
        for p in points:
            fh.write(
                f"{p.scheme},{p.wave},{p.theta:.9g},{p.kh:.9g},{p.delta:.9g},{p.flag}\n"
            )
