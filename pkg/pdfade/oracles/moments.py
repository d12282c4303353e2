import math
from dataclasses import dataclass

import numpy as np

from pdfade.errors import DomainError
from pdfade.fading_model import make_rng, sample_snrs

MIN_SAMPLES = 100_000


@dataclass(frozen=True)
class MomentsOracle:
    """Sample mean / variance of log(1 + gamma) with their standard errors"""

    mean: float
    var: float
    mean_se: float
    var_se: float
    samples: int


def oracle_moments(P, samples, seed, rng=None):
    """
    Empirical moments of log(1 + gamma), gamma ~ Exponential(mean P).

    Args:
        P: average SNR (linear)
        samples: number of draws, >= 100000
        seed: stream seed (ignored when rng is given)
        rng: optional generator-like object with .random(size)

    Returns:
        MomentsOracle
    """
    if int(samples) != samples or samples < MIN_SAMPLES:
        raise DomainError(f"oracle_moments needs at least {MIN_SAMPLES} samples, got {samples}")
    samples = int(samples)
    rng = rng if rng is not None else make_rng(seed, 0, 0)
    w = np.log1p(sample_snrs(P, rng, samples))

    mean = float(w.mean())
    centered = w - mean
    var = float(np.mean(centered ** 2) * samples / (samples - 1))
    m4 = float(np.mean(centered ** 4))
    return MomentsOracle(
        mean=mean,
        var=var,
        mean_se=math.sqrt(var / samples),
        var_se=math.sqrt(max(m4 - var * var, 0.0) / samples),
        samples=samples,
    )
