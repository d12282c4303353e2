"""
Message-error probability q: the receiver gets n packets, each erased
independently with probability p_e, and needs at least m_hat of them.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special

from pdfade.config import MC_SEED, MC_TRIALS, MC_WORKERS
from pdfade.errors import ConstraintError, DomainError
from pdfade.fading_model import fade_profile, packet_count, sample_snrs
from pdfade.outage import packet_erasures, run_trial_blocks
from pdfade.special_fns import log_normal_cdf, normal_cdf

LN10 = math.log(10.0)


class MessageErrorMethod(str, Enum):
    BINOMIAL_EXACT = "BinomialExact"
    GAUSSIAN_CLT = "GaussianCLT"
    FULL_MONTE_CARLO = "FullMonteCarlo"


@dataclass(frozen=True)
class MessageErrorResult:
    q: float
    log10_q: float
    method: MessageErrorMethod
    n: int
    p_e_used: float = None
    phi_argument: float = None
    mc_trials: int = 0
    mc_std_err: float = 0.0


def _check_counts(n, m_hat):
    if int(m_hat) != m_hat or m_hat < 1:
        raise ConstraintError(f"m_hat must be an integer >= 1, got {m_hat}")
    if n < m_hat:
        raise ConstraintError(f"packet count n={n} is below m_hat={m_hat}")


def _check_probability(p_e):
    if p_e is None or math.isnan(p_e) or p_e < 0 or p_e > 1:
        raise DomainError(f"p_e must lie in [0, 1], got {p_e}")


def _logs(p_e, log_p_e, log_q_e):
    with np.errstate(divide="ignore"):
        lp = float(np.log(p_e)) if log_p_e is None else log_p_e
        lq = float(np.log1p(-p_e)) if log_q_e is None else log_q_e
    return lp, lq


def log_q_binomial(n, m_hat, log_p_e, log_q_e):
    """
    Natural log of sum_{i<m_hat} C(n, i) (1-p_e)^i p_e^{n-i}, from log p_e and log(1 - p_e).

    Vectorized over n and the logs (n may be non-integer on refined grids).
    """
    n = np.atleast_1d(np.asarray(n, dtype=float))[:, None]
    lp = np.atleast_1d(np.asarray(log_p_e, dtype=float))[:, None]
    lq = np.atleast_1d(np.asarray(log_q_e, dtype=float))[:, None]
    i = np.arange(int(m_hat), dtype=float)[None, :]
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        log_terms = (
            special.gammaln(n + 1.0) - special.gammaln(i + 1.0) - special.gammaln(n - i + 1.0)
            + np.where(i == 0.0, 0.0, i * lq) + (n - i) * lp
        )
        out = special.logsumexp(log_terms, axis=1)
    out = np.where(lp[:, 0] == -np.inf, -np.inf, out)
    out = np.where(lq[:, 0] == -np.inf, 0.0, out)
    return np.minimum(out, 0.0)


def q_binomial(n, m_hat, p_e, log_p_e=None, log_q_e=None):
    """
    q = sum_{i=0}^{m_hat-1} C(n, i) (1-p_e)^i p_e^{n-i}, summed in log domain.

    log_p_e / log_q_e (log of p_e and of 1 - p_e) may be passed when p_e
    itself has underflowed.
    """
    _check_counts(n, m_hat)
    if int(n) != n:
        raise ConstraintError(f"packet count n must be an integer, got {n}")
    n, m_hat = int(n), int(m_hat)
    _check_probability(p_e)
    lp, lq = _logs(p_e, log_p_e, log_q_e)

    if lp == -np.inf:
        return MessageErrorResult(0.0, -np.inf, MessageErrorMethod.BINOMIAL_EXACT, n, p_e)
    if lq == -np.inf:
        return MessageErrorResult(1.0, 0.0, MessageErrorMethod.BINOMIAL_EXACT, n, p_e)

    log_q = float(log_q_binomial(n, m_hat, lp, lq)[0])
    return MessageErrorResult(
        q=math.exp(log_q),
        log10_q=log_q / LN10,
        method=MessageErrorMethod.BINOMIAL_EXACT,
        n=n,
        p_e_used=p_e,
    )


def phi_objective(n, m_hat, log_p_e, log_q_e):
    """
    ((m_hat - 1) - n (1 - p_e)) / sqrt(n p_e (1 - p_e)), from logs of p_e and 1 - p_e.

    Vectorized. p_e = 0 gives -inf and p_e = 1 gives +inf.
    """
    n = np.asarray(n, dtype=float)
    log_p_e = np.asarray(log_p_e, dtype=float)
    log_q_e = np.asarray(log_q_e, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        num = (m_hat - 1.0) - n * np.exp(log_q_e)
        log_den = 0.5 * (np.log(n) + log_p_e + log_q_e)
        z = num * np.exp(-log_den)
    z = np.where(num == 0.0, 0.0, z)
    z = np.where(log_p_e == -np.inf, -np.inf, z)
    z = np.where(log_q_e == -np.inf, np.inf, z)
    return z


def q_gaussian(n, m_hat, p_e, log_p_e=None, log_q_e=None):
    """
    CLT approximation q = Phi[((m_hat - 1) - n (1 - p_e)) / sqrt(n p_e (1 - p_e))].

    The Phi argument is returned as phi_argument; p_e in {0, 1} yields the
    exact limits.
    """
    _check_counts(n, m_hat)
    _check_probability(p_e)
    lp, lq = _logs(p_e, log_p_e, log_q_e)
    z = float(phi_objective(n, m_hat, lp, lq))
    return MessageErrorResult(
        q=normal_cdf(z),
        log10_q=log_normal_cdf(z) / LN10,
        method=MessageErrorMethod.GAUSSIAN_CLT,
        n=int(n) if int(n) == n else n,
        p_e_used=p_e,
        phi_argument=z,
    )


def q_full_monte_carlo(params, rc, trials=MC_TRIALS, seed=MC_SEED, point_index=0,
                       workers=MC_WORKERS):
    """
    Simulate whole messages: n packets per trial, each decoded iff its
    weighted average mutual information beats (1 + eps) R_C; the message
    fails when fewer than m_hat packets decode.
    """
    n = packet_count(params, rc)
    profile = fade_profile(params, rc)

    def block(rng, size):
        snrs = sample_snrs(params.P, rng, (size, n, profile.total_fades))
        decoded = n - np.count_nonzero(packet_erasures(params, profile, snrs), axis=1)
        return np.count_nonzero(decoded < params.m_hat)

    failures = run_trial_blocks(trials, n * profile.total_fades, seed, point_index, block, workers)
    trials = int(trials)
    q = failures / trials
    return MessageErrorResult(
        q=q,
        log10_q=math.log10(q) if q > 0 else -np.inf,
        method=MessageErrorMethod.FULL_MONTE_CARLO,
        n=n,
        mc_trials=trials,
        mc_std_err=math.sqrt(q * (1.0 - q) / trials),
    )
