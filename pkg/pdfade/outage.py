"""
Packet-erasure (outage) probability p_e.

Four Gaussian approximations of

    p_e = P[ sum_{i<=floor} W_i + frac * W_last < c k / l_f ],  W_i = log(1 + gamma_i)

and a Monte Carlo estimate of the exact event.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from pdfade.config import INTEGER_SNAP_RTOL, MC_BLOCK_DRAWS, MC_SEED, MC_TRIALS, MC_WORKERS
from pdfade.errors import ConstraintError, DomainError
from pdfade.fading_model import (
    fade_profile,
    fade_ratio,
    fade_weights,
    make_rng,
    sample_snrs,
    snap_to_integer,
)
from pdfade.special_fns import log_normal_cdf, normal_cdf


class ApproxMethod(str, Enum):
    APPROX1 = "Approx1"
    APPROX2 = "Approx2"
    APPROX3 = "Approx3"
    APPROX4 = "Approx4"
    MONTE_CARLO = "MonteCarlo"

    @classmethod
    def parse(cls, name):
        """Case-insensitive lookup by tag ("approx4", "MonteCarlo", ...)"""
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "").replace("_", "")
        for method in cls:
            if method.value.lower() == key:
                return method
        choices = ", ".join(m.value for m in cls)
        raise DomainError(f"unknown method '{name}', expected one of: {choices}")

    @property
    def is_closed_form(self):
        return self is not ApproxMethod.MONTE_CARLO


@dataclass(frozen=True)
class OutageEstimate:
    """
    p_e together with log p_e and log(1 - p_e).

    phi_argument is the Phi argument of the closed forms (None for Monte Carlo).
    """

    p_e: float
    method: ApproxMethod
    mc_trials: int = 0
    mc_std_err: float = 0.0
    log_p_e: float = 0.0
    log_q_e: float = 0.0
    phi_argument: float = None

    @classmethod
    def from_phi_argument(cls, z, method):
        return cls(
            p_e=normal_cdf(z),
            method=method,
            log_p_e=log_normal_cdf(z),
            log_q_e=log_normal_cdf(-z),
            phi_argument=float(z),
        )

    @classmethod
    def from_counts(cls, failures, trials, method=ApproxMethod.MONTE_CARLO):
        p = failures / trials
        with np.errstate(divide="ignore"):
            log_p = float(np.log(p))
            log_q = float(np.log1p(-p))
        return cls(
            p_e=p,
            method=method,
            mc_trials=trials,
            mc_std_err=math.sqrt(p * (1.0 - p) / trials),
            log_p_e=log_p,
            log_q_e=log_q,
        )


# ============================================================================
# CLOSED FORMS (vectorized over fade ratios)
# ============================================================================

def split_ratio(ratio):
    """floor and fractional part of k / (R_C l_f), snapping near-integers"""
    ratio = np.asarray(ratio, dtype=float)
    nearest = np.rint(ratio)
    exact = np.abs(ratio - nearest) <= INTEGER_SNAP_RTOL * np.maximum(1.0, ratio)
    full = np.where(exact, nearest, np.floor(ratio))
    frac = np.where(exact, 0.0, ratio - full)
    return full, frac


def phi_arguments(method, params, ratio, stats):
    """
    Phi argument of p_e for each fade ratio k / (R_C l_f).

    Approx1/3: sqrt(k/(R_C l_f)) (c R_C - mu) / sigma
    Approx2:   (c k/l_f - floor mu) / sqrt(floor Var)
    Approx4:   (c k/l_f - ratio mu) / sqrt(Var (floor + frac^2))
    """
    ratio = np.asarray(ratio, dtype=float)
    threshold = params.c * params.k / params.l_f
    full, frac = split_ratio(ratio)

    if method in (ApproxMethod.APPROX1, ApproxMethod.APPROX3):
        rc = params.k / (ratio * params.l_f)
        return np.sqrt(ratio) * (params.c * rc - stats.mu) / math.sqrt(stats.var)
    if method is ApproxMethod.APPROX2:
        return (threshold - full * stats.mu) / np.sqrt(full * stats.var)
    if method is ApproxMethod.APPROX4:
        var_w = stats.var * (full + frac ** 2)
        return (threshold - ratio * stats.mu) / np.sqrt(var_w)
    raise DomainError(f"{method} has no closed form")


def _closed_form(method, params, rc, stats):
    z = phi_arguments(method, params, fade_ratio(params, rc), stats)
    return OutageEstimate.from_phi_argument(float(z), method)


def pe_approx1(params, rc, stats):
    """Approx1: floor dropped and W_last ignored"""
    return _closed_form(ApproxMethod.APPROX1, params, rc, stats)


def pe_approx2(params, rc, stats):
    """Approx2: Gaussian over the floor(k/(R_C l_f)) full fades only"""
    return _closed_form(ApproxMethod.APPROX2, params, rc, stats)


def pe_approx3(params, rc, stats):
    """Approx3: Approx1 restricted to integer fade counts"""
    ratio = fade_ratio(params, rc)
    if snap_to_integer(ratio) is None:
        raise ConstraintError(
            f"Approx3 needs an integer fade count, R_C={rc} gives k/(R_C l_f)={ratio}"
        )
    return _closed_form(ApproxMethod.APPROX3, params, rc, stats)


def pe_approx4(params, rc, stats):
    """Approx4: both the full fades and the weighted last fade as Gaussians"""
    return _closed_form(ApproxMethod.APPROX4, params, rc, stats)


def pe_closed_form(method, params, rc, stats):
    method = ApproxMethod.parse(method)
    if not method.is_closed_form:
        raise DomainError(f"{method.value} has no closed form; use pe_monte_carlo")
    return {
        ApproxMethod.APPROX1: pe_approx1,
        ApproxMethod.APPROX2: pe_approx2,
        ApproxMethod.APPROX3: pe_approx3,
        ApproxMethod.APPROX4: pe_approx4,
    }[method](params, rc, stats)


# ============================================================================
# MONTE CARLO
# ============================================================================

def run_trial_blocks(trials, draws_per_trial, seed, point_index, block_fn, workers=MC_WORKERS):
    """
    Split `trials` into blocks of about MC_BLOCK_DRAWS random draws and sum
    block_fn(rng, block_trials) over them.

    Block b always uses the stream (seed, point_index, b), so the total does
    not depend on how many workers run the blocks.
    """
    if int(trials) != trials or trials < 1:
        raise DomainError(f"trials must be an integer >= 1, got {trials}")
    trials = int(trials)
    per_block = max(1, MC_BLOCK_DRAWS // max(1, draws_per_trial))
    sizes = [per_block] * (trials // per_block)
    if trials % per_block:
        sizes.append(trials % per_block)

    def job(b):
        return int(block_fn(make_rng(seed, point_index, b), sizes[b]))

    if workers <= 1 or len(sizes) == 1:
        return sum(job(b) for b in range(len(sizes)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(job, range(len(sizes))))


def packet_erasures(params, profile, snrs):
    """
    Erasure indicator per packet from its fade SNRs (last axis):
    sum W_i + frac * W_last < c k / l_f
    """
    total = np.log1p(snrs) @ fade_weights(profile)
    return total < params.c * params.k / params.l_f


def pe_monte_carlo(params, rc, trials=MC_TRIALS, seed=MC_SEED, point_index=0, workers=MC_WORKERS):
    """Empirical frequency of the erasure event over `trials` packets"""
    profile = fade_profile(params, rc)

    def block(rng, size):
        snrs = sample_snrs(params.P, rng, (size, profile.total_fades))
        return np.count_nonzero(packet_erasures(params, profile, snrs))

    failures = run_trial_blocks(trials, profile.total_fades, seed, point_index, block, workers)
    return OutageEstimate.from_counts(failures, int(trials))


def pe_block_fading_monte_carlo(params, rc, trials=MC_TRIALS, seed=MC_SEED, point_index=0,
                                workers=MC_WORKERS):
    """
    Outage of the plain block-fading event (1/F) sum C(gamma_i) < (1 + eps) R_C,
    for rates where F = k / (R_C l_f) is an integer.
    """
    fades = snap_to_integer(fade_ratio(params, rc))
    if fades is None:
        raise ConstraintError(f"block-fading reference needs an integer fade count at R_C={rc}")
    limit = (1.0 + params.epsilon) * rc

    def block(rng, size):
        snrs = sample_snrs(params.P, rng, (size, fades))
        return np.count_nonzero(0.5 * np.log1p(snrs).mean(axis=1) < limit)

    failures = run_trial_blocks(trials, fades, seed, point_index, block, workers)
    return OutageEstimate.from_counts(failures, int(trials))
