"""
Numeric kernels: the exponential-type integrals behind mu(P) and Var(P),
and the standard normal CDF in linear and log scale.

All logarithms are natural.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from pdfade.config import QUAD_ABS_TOL, QUAD_REL_TOL, QUAD_MAX_SUBDIVISIONS
from pdfade.errors import DomainError, NumericConsistencyError


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances handed to the adaptive Gauss-Kronrod solver"""

    abs_tol: float = QUAD_ABS_TOL
    rel_tol: float = QUAD_REL_TOL
    max_subdivisions: int = QUAD_MAX_SUBDIVISIONS

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be > 0, got {self.abs_tol}")
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be > 0, got {self.rel_tol}")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise DomainError(
                f"max_subdivisions must be an integer >= 1, got {self.max_subdivisions}"
            )


DEFAULT_QUADRATURE = QuadratureSettings()


def _check_power(P):
    if P is None or not math.isfinite(P) or P <= 0:
        raise DomainError(f"average SNR P must be finite and > 0, got {P}")


def _quad(func, lo, hi, quad):
    """Run scipy's QUADPACK driver and turn non-convergence into an error"""
    if hi <= lo:
        return 0.0
    result = integrate.quad(
        func, lo, hi,
        epsabs=quad.abs_tol,
        epsrel=quad.rel_tol,
        limit=int(quad.max_subdivisions),
        full_output=1,
    )
    if len(result) > 3:
        raise NumericConsistencyError(f"quadrature on [{lo}, {hi}] failed: {result[3]}")
    return result[0]


def _tail_integral(log_piece, linear_piece, lower, quad):
    """
    Integrate over [lower, inf) as two pieces.

    Below t = 1 the substitution t = e^s removes the 1/t pole
    (log_piece is the integrand in s). Above t = 1 the range is cut where
    the e^{-t} envelope, measured from the start of the piece, drops under
    abs_tol * 1e-3.
    """
    total = 0.0
    if lower < 1.0:
        total += _quad(log_piece, math.log(lower), 0.0, quad)
    start = max(lower, 1.0)
    stop = start - math.log(quad.abs_tol * 1e-3)
    total += _quad(linear_piece, start, stop, quad)
    return total


def alpha(P, quad=DEFAULT_QUADRATURE):
    """
    alpha(P) = int_{1/P}^inf e^{-t}/t dt, i.e. the exponential integral E1(1/P).

    Args:
        P: average SNR, linear scale, > 0
        quad: QuadratureSettings

    Returns:
        float
    """
    _check_power(P)
    return _tail_integral(
        lambda s: math.exp(-math.exp(s)),
        lambda t: math.exp(-t) / t,
        1.0 / P,
        quad,
    )


def beta(P, quad=DEFAULT_QUADRATURE):
    """
    beta(P) = int_{1/P}^inf log(t) e^{-t}/t dt.

    The integrand is negative below t = 1 and positive above it; the two
    pieces are integrated separately.
    """
    _check_power(P)
    return _tail_integral(
        lambda s: s * math.exp(-math.exp(s)),
        lambda t: math.log(t) * math.exp(-t) / t,
        1.0 / P,
        quad,
    )


def scaled_alpha_beta(P, quad=DEFAULT_QUADRATURE):
    """
    (e^{1/P} alpha(P), e^{1/P} beta(P)).

    The e^{1/P} factor is folded into the integrands so small P neither
    overflows the factor nor underflows the integrals.
    """
    _check_power(P)
    x = 1.0 / P
    a = _tail_integral(
        lambda s: math.exp(x - math.exp(s)),
        lambda t: math.exp(x - t) / t,
        x,
        quad,
    )
    b = _tail_integral(
        lambda s: s * math.exp(x - math.exp(s)),
        lambda t: math.log(t) * math.exp(x - t) / t,
        x,
        quad,
    )
    return a, b


def _as_checked_array(x):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError("normal CDF argument is NaN")
    return arr


def normal_cdf(x):
    """Phi(x) for a scalar or array; +-inf map to the limits 1 and 0"""
    arr = _as_checked_array(x)
    out = special.ndtr(arr)
    return float(out) if out.ndim == 0 else out


def log_normal_cdf(x):
    """
    log Phi(x) for a scalar or array.

    scipy's log_ndtr switches to the asymptotic tail series far below zero,
    where Phi itself underflows.
    """
    arr = _as_checked_array(x)
    out = special.log_ndtr(arr)
    return float(out) if out.ndim == 0 else out
