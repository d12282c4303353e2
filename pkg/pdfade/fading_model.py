"""
PD block-Rayleigh fading: system parameters, rate splits, fade counting,
SNR sampling and the per-fade moments of log(1 + gamma).

The SNR of a fade is gamma ~ Exponential with mean P. A packet of k nats
sent at rate R_C spans k / (R_C l_f) fades; the last one is only partially
used when that ratio is not an integer.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from pdfade.config import EPSILON, FADE_LENGTH_WARN_FRACTION, INTEGER_SNAP_RTOL, log
from pdfade.errors import ConstraintError, DomainError, NumericConsistencyError
from pdfade.special_fns import DEFAULT_QUADRATURE, scaled_alpha_beta


def db_to_linear(p_db):
    return 10.0 ** (p_db / 10.0)


def linear_to_db(P):
    return 10.0 * math.log10(P)


def snap_to_integer(x, rtol=INTEGER_SNAP_RTOL):
    """Return round(x) if x is within rtol of it, else None"""
    nearest = round(x)
    if abs(x - nearest) <= rtol * max(1.0, abs(x)):
        return int(nearest)
    return None


# ============================================================================
# DOMAIN TYPES
# ============================================================================

@dataclass(frozen=True)
class SystemParams:
    """
    Fixed inputs of the rate-split problem.

    m, m_hat: message packets / packets the erasure decoder needs
    k: nats per packet
    l_f: channel uses per fade
    T: total channel uses
    P: average SNR (linear)
    epsilon: decoding margin
    """

    m: int
    m_hat: int
    k: float
    l_f: float
    T: float
    P: float
    epsilon: float = EPSILON

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ConstraintError(f"m must be an integer >= 1, got {self.m}")
        if int(self.m_hat) != self.m_hat or self.m_hat < self.m:
            raise ConstraintError(f"m_hat must be an integer >= m ({self.m}), got {self.m_hat}")
        if not self.k > 0:
            raise DomainError(f"k must be > 0, got {self.k}")
        if not self.l_f >= 1:
            raise DomainError(f"l_f must be >= 1, got {self.l_f}")
        if not self.T > 0:
            raise DomainError(f"T must be > 0, got {self.T}")
        if not (math.isfinite(self.P) and self.P > 0):
            raise DomainError(f"P must be finite and > 0, got {self.P}")
        if not self.epsilon >= 0:
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.m_hat * self.l_f > self.T:
            raise ConstraintError(
                f"input parameters must satisfy m_hat <= T / l_f "
                f"(m_hat={self.m_hat}, l_f={self.l_f}, T={self.T})"
            )
        if self.l_f > FADE_LENGTH_WARN_FRACTION * self.T:
            log(f"⚠️  l_f={self.l_f} is not small against T={self.T} (l_f << T assumed)")

    @classmethod
    def from_db(cls, m, m_hat, k, l_f, T, P_dB, epsilon=EPSILON):
        return cls(m=m, m_hat=m_hat, k=k, l_f=l_f, T=T, P=db_to_linear(P_dB), epsilon=epsilon)

    @property
    def c(self):
        """c = 2(1 + epsilon), the threshold factor on unhalved logs"""
        return 2.0 * (1.0 + self.epsilon)

    @property
    def P_dB(self):
        return linear_to_db(self.P)

    @property
    def overall_rate(self):
        """m k / T in nats per channel use"""
        return self.m * self.k / self.T

    @property
    def rc_min(self):
        return self.k * self.m_hat / self.T

    @property
    def rc_max(self):
        return self.k / self.l_f

    @property
    def n_max(self):
        """Largest packet count that keeps at least one full fade per packet"""
        return int(math.floor(self.T / self.l_f * (1.0 + INTEGER_SNAP_RTOL)))

    def with_T(self, T):
        return replace(self, T=T)

    def with_power_db(self, P_dB):
        return replace(self, P=db_to_linear(P_dB))

    def scaled(self, factor):
        """Scale k, l_f and T together; the optimization problem is unchanged"""
        if not factor > 0:
            raise DomainError(f"scale factor must be > 0, got {factor}")
        return replace(self, k=self.k * factor, l_f=self.l_f * factor, T=self.T * factor)


@dataclass(frozen=True)
class RateSplit:
    """Operating point: channel rate rc, erasure rate re and packet count n"""

    rc: float
    re: float
    n: int

    @classmethod
    def from_packets(cls, params, n):
        return cls(rc=n * params.k / params.T, re=params.m / n, n=n)


@dataclass(frozen=True)
class FadingStats:
    """Mean and variance of log(1 + gamma), in nats and nats^2"""

    mu: float
    var: float
    P: float

    @property
    def std(self):
        return math.sqrt(self.var)


@dataclass(frozen=True)
class FadeProfile:
    full_fades: int
    total_fades: int
    fractional_weight: float

    @property
    def ratio(self):
        """k / (R_C l_f)"""
        return self.full_fades + self.fractional_weight

    @classmethod
    def from_ratio(cls, ratio):
        snapped = snap_to_integer(ratio)
        if snapped is not None:
            return cls(full_fades=snapped, total_fades=snapped, fractional_weight=0.0)
        full = int(math.floor(ratio))
        return cls(full_fades=full, total_fades=full + 1, fractional_weight=ratio - full)


# ============================================================================
# RATE BOUNDS
# ============================================================================

def check_rate(params, rc):
    """Raise ConstraintError unless k m_hat / T <= rc <= k / l_f"""
    slack = INTEGER_SNAP_RTOL
    if not (math.isfinite(rc) and rc > 0):
        raise ConstraintError(f"R_C must be finite and > 0, got {rc}")
    if rc < params.rc_min * (1.0 - slack) or rc > params.rc_max * (1.0 + slack):
        raise ConstraintError(
            f"R_C={rc} outside [k m_hat / T, k / l_f] = [{params.rc_min}, {params.rc_max}]"
        )


def fade_ratio(params, rc):
    check_rate(params, rc)
    return params.k / (rc * params.l_f)


def packet_count(params, rc):
    """n = R_C T / k, which has to be a positive integer"""
    check_rate(params, rc)
    n = snap_to_integer(rc * params.T / params.k)
    if n is None:
        raise ConstraintError(
            f"R_C={rc} gives a non-integer packet count R_C T / k = {rc * params.T / params.k}"
        )
    return n


def rate_split(params, rc):
    return RateSplit.from_packets(params, packet_count(params, rc))


def fade_ratios_for_packets(params, n):
    """k / (R_C l_f) = T / (n l_f) for an array of packet counts"""
    return params.T / (np.asarray(n, dtype=float) * params.l_f)


# ============================================================================
# OPERATIONS
# ============================================================================

def fading_stats(P, quad=DEFAULT_QUADRATURE):
    """
    mu(P) = e^{1/P} alpha(P)
    Var(P) = 2 e^{1/P} beta(P) + 2 e^{1/P} log(P) alpha(P) - e^{2/P} alpha(P)^2
    """
    if P is None or not math.isfinite(P) or P <= 0:
        raise DomainError(f"average SNR P must be finite and > 0, got {P}")
    a, b = scaled_alpha_beta(P, quad)
    mu = a
    var = 2.0 * b + 2.0 * math.log(P) * a - a * a
    if not var > 0:
        raise NumericConsistencyError(
            f"Var(P) evaluated to {var} at P={P}; quadrature tolerances too loose?"
        )
    return FadingStats(mu=mu, var=var, P=P)


def mutual_info(gamma):
    """C(gamma) = 0.5 log(1 + gamma), nats per channel use"""
    arr = np.asarray(gamma, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError("SNR gamma must be >= 0")
    out = 0.5 * np.log1p(arr)
    return float(out) if out.ndim == 0 else out


def fade_profile(params, rc):
    return FadeProfile.from_ratio(fade_ratio(params, rc))


def make_rng(seed, *key):
    """Generator for the stream identified by (seed, key...), e.g. (seed, point, block)"""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def sample_snrs(P, rng, size):
    """gamma = -P log(u) with u uniform on (0, 1]"""
    u = 1.0 - rng.random(size)
    return -P * np.log(u)


def fade_weights(profile):
    """1 for each full fade, fractional_weight for a partial last fade"""
    w = np.ones(profile.total_fades)
    if profile.total_fades > profile.full_fades:
        w[-1] = profile.fractional_weight
    return w


def weighted_avg_mi(snrs, profile):
    """W over the last axis of snrs, which holds total_fades draws"""
    mi = 0.5 * np.log1p(snrs)
    return (mi @ fade_weights(profile)) / profile.ratio


def sample_weighted_avg_mi(params, rc, rng, size=None):
    """
    Draw W for one packet (size=None) or for `size` independent packets.
    """
    profile = fade_profile(params, rc)
    shape = (profile.total_fades,) if size is None else (size, profile.total_fades)
    w = weighted_avg_mi(sample_snrs(params.P, rng, shape), profile)
    return float(w) if size is None else w


def sample_block_fading_avg_mi(P, fades, rng, size=None):
    """Plain block-fading average (1/F) sum C(gamma_i) over F fades"""
    if int(fades) != fades or fades < 1:
        raise ConstraintError(f"fade count must be a positive integer, got {fades}")
    shape = (int(fades),) if size is None else (size, int(fades))
    w = 0.5 * np.log1p(sample_snrs(P, rng, shape)).mean(axis=-1)
    return float(w) if size is None else w
