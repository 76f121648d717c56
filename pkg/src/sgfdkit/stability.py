"""Courant stability bounds for the balanced and non-balanced schemes.

Both amplification symbols are separable in (kxh, kzh), so the 2D maximum
is twice the per-axis maximum of

    balanced:      X^2  = [sum_m c_m sin((m-1/2) kh)]^2
    non-balanced:  X'^2 = sin(kh/2) * sum_m c_m sin((m-1/2) kh)

over kh in [0, pi], and the bound is s = 1/sqrt(max(X^2 + Z^2)). For
alternating-sign weights every term peaks coherently at kh = pi, which
yields the closed forms 1/(sqrt(2) * sum|c_m|) (balanced) and
1/sqrt(2 * sum|c_m|) (non-balanced). The published worked example (0.491
for the M=7 weights) matches the latter; the numeric maximization is the
ground truth here and the closed form is asserted against it whenever the
signs alternate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import stencil_symbol
from .errors import CoefficientError
from .model import ElasticModel, SimulationConfig, StencilCoefficients

_SCAN_SAMPLES = 4096
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class StabilityReport:
    """Verdict of a configuration against its scheme's Courant bound."""

    bound_s: float
    r_actual: float
    margin: float
    verdict: str
    extremizer: tuple[float, float]

    def format(self) -> str:
        """key=value lines, one per field."""
        return (
            f"bound={self.bound_s:.9g}\n"
            f"r_actual={self.r_actual:.9g}\n"
            f"margin={self.margin:.9g}\n"
            f"verdict={self.verdict}\n"
            f"extremizer_kxh={self.extremizer[0]:.9g}\n"
            f"extremizer_kzh={self.extremizer[1]:.9g}\n"
        )


def _refine_max(f, lo: float, hi: float, iterations: int = 60):
    """Golden-section maximization of f on [lo, hi]."""
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iterations):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    x = 0.5 * (a + b)
    return f(x), x

def _axis_max(f):
    """Dense scan of f over [0, pi] refined around the best sample."""
    kh = np.linspace(0.0, math.pi, _SCAN_SAMPLES + 1)
    vals = f(kh)
    i = int(np.argmax(vals))
    best, arg = float(vals[i]), float(kh[i])
    lo = kh[max(i - 1, 0)]
    hi = kh[min(i + 1, _SCAN_SAMPLES)]
    refined, x = _refine_max(lambda s: float(f(np.array([s]))[0]), float(lo), float(hi))
    if refined > best:
        best, arg = refined, x
    return best, arg


def _is_alternating(c) -> bool:
    return all(v == 0.0 or (v > 0) == (k % 2 == 0) for k, v in enumerate(c))


def closed_form_balanced(coeffs: StencilCoefficients) -> float:
    """1/(sqrt(2) * sum|c_m|); exact bound for alternating-sign weights."""
    return 1.0 / (math.sqrt(2.0) * float(np.abs(coeffs.as_array()).sum()))


def closed_form_nonbalanced(coeffs: StencilCoefficients) -> float:
    """1/sqrt(2 * sum|c_m|); exact bound for alternating-sign weights."""
    return 1.0 / math.sqrt(2.0 * float(np.abs(coeffs.as_array()).sum()))


def _bound_balanced(coeffs: StencilCoefficients):
    c = coeffs.as_array()
    best, arg = _axis_max(lambda kh: stencil_symbol(c, kh) ** 2)
    bound = 1.0 / math.sqrt(2.0 * best)
    if _is_alternating(c):
        closed = closed_form_balanced(coeffs)
        if not math.isclose(bound, closed, rel_tol=1e-9):
            raise AssertionError(
                f"numeric balanced bound {bound!r} disagrees with closed form {closed!r}"
            )
    return bound, arg


def _bound_nonbalanced(coeffs: StencilCoefficients):
    c = coeffs.as_array()

    def symbol(kh):
        return np.sin(0.5 * kh) * stencil_symbol(c, kh)

    kh = np.linspace(0.0, math.pi, _SCAN_SAMPLES + 1)
    vals = symbol(kh)
    if vals.min() < -1e-12 * max(1.0, float(np.abs(c).sum())):
        bad = float(kh[int(np.argmin(vals))])
        raise CoefficientError(
            f"non-balanced symbol sin(kh/2)*sum c_m sin((m-1/2)kh) is negative at "
            f"kh={bad:.6f}; these weights cannot run the non-balanced scheme"
        )
    best, arg = _axis_max(symbol)
    bound = 1.0 / math.sqrt(2.0 * best)
    if _is_alternating(c):
        closed = closed_form_nonbalanced(coeffs)
        if not math.isclose(bound, closed, rel_tol=1e-9):
            raise AssertionError(
                f"numeric non-balanced bound {bound!r} disagrees with closed form {closed!r}"
            )
    return bound, arg


def bound_balanced(coeffs: StencilCoefficients) -> float:
    """Maximal Courant number alpha*dt/h for the balanced scheme."""
    return _bound_balanced(coeffs)[0]


def bound_nonbalanced(coeffs: StencilCoefficients) -> float:
    """Maximal Courant number alpha*dt/h for the non-balanced scheme."""
    return _bound_nonbalanced(coeffs)[0]


def check_config(config: SimulationConfig, model: ElasticModel) -> StabilityReport:
    """Verdict for a concrete configuration.

    The P velocity governs: r_actual = max(vp)*dt/h over the whole model
    (conservative for heterogeneous models). The instability-override flag
    affects only the kernel, never this report.
    """
    if config.scheme == "balanced":
        bound, arg = _bound_balanced(config.coeffs)
    else:
        bound, arg = _bound_nonbalanced(config.coeffs)
    r_actual = model.max_vp() * config.dt / config.geometry.h
    margin = bound - r_actual
    return StabilityReport(
        bound_s=bound,
        r_actual=r_actual,
        margin=margin,
        verdict="stable" if margin > 0 else "unstable",
        extremizer=(arg, arg),
    )
