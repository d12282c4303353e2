"""
Rate-split optimizer.

For fixed m, m_hat, k, l_f, T and P, every admissible packet count n
(m_hat <= n <= T / l_f) fixes R_C = n k / T and R_E = m / n. The optimizer
evaluates p_e at each point, then the CLT Phi argument of q, and keeps the
smallest argument. Ties go to the larger R_C.

Sweeps repeat this over T (overall rate m k / T) and over power; the
fixed-R_E trajectories model a simple incremental-redundancy scheme.
Sweep and trajectory rows report the exact log-domain binomial q at their
packet count, so rows stay comparable deep in the tail where the CLT value
is no longer a probability estimate. ideal_q_curve is the per-T minimum of
that exact q and is the reference the trajectories are measured against.
"""

from dataclasses import dataclass, replace

import numpy as np

from pdfade.config import (
    MC_OPTIMIZER_MIN_TRIALS,
    MC_SEED,
    MC_TRIALS,
    MC_WORKERS,
    SWEEP_POINTS,
    SWEEP_RATE_MIN,
    log,
)
from pdfade.errors import ConstraintError, DomainError, PdFadeError
from pdfade.fading_model import (
    RateSplit,
    fade_ratios_for_packets,
    fading_stats,
    snap_to_integer,
)
from pdfade.message_error import (
    LN10,
    MessageErrorMethod,
    MessageErrorResult,
    log_q_binomial,
    phi_objective,
)
from pdfade.outage import ApproxMethod, OutageEstimate, pe_monte_carlo, phi_arguments, split_ratio
from pdfade.special_fns import DEFAULT_QUADRATURE, log_normal_cdf, normal_cdf


# ============================================================================
# DOMAIN TYPES
# ============================================================================

@dataclass(frozen=True)
class MonteCarloSettings:
    trials: int = MC_TRIALS
    seed: int = MC_SEED
    workers: int = MC_WORKERS
    # Monte Carlo as an optimizer method has to be asked for explicitly
    allow_in_optimizer: bool = False

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be an integer >= 1, got {self.trials}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise DomainError(f"seed must be a non-negative integer, got {self.seed}")


@dataclass(frozen=True)
class GridPoint:
    split: RateSplit
    p_e: OutageEstimate
    q: MessageErrorResult
    phi_argument: float


@dataclass(frozen=True)
class OptimizationResult:
    best: GridPoint
    grid: list
    method: ApproxMethod


@dataclass(frozen=True)
class SweepRow:
    overall_rate: float
    T: float
    P_dB: float
    rc_star: float
    re_star: float
    n_star: float
    p_e_star: float
    log10_q_star: float
    method: ApproxMethod


@dataclass
class _GridArrays:
    """Column view of an evaluated grid"""

    n: np.ndarray
    p_e: np.ndarray
    log_p_e: np.ndarray
    log_q_e: np.ndarray
    pe_phi: np.ndarray
    std_err: np.ndarray
    objective: np.ndarray
    log_q_exact: np.ndarray
    mc_trials: int = 0


# ============================================================================
# GRID
# ============================================================================

def packet_counts(params, method, refine=1, rc_limit=None):
    """
    Admissible packet counts, ascending.

    refine > 1 adds the interpolated counts m_hat + j / refine (diagnostic
    only; those points have no physical packet count).
    """
    method = ApproxMethod.parse(method)
    if int(refine) != refine or refine < 1:
        raise DomainError(f"refine must be an integer >= 1, got {refine}")
    n_max = params.n_max
    if n_max < params.m_hat:
        raise ConstraintError(
            f"empty grid: input parameters must satisfy m_hat <= T / l_f "
            f"(m_hat={params.m_hat}, T / l_f={params.T / params.l_f})"
        )
    steps = int(refine) * (n_max - params.m_hat) + 1
    ns = params.m_hat + np.arange(steps, dtype=float) / int(refine)

    if rc_limit is not None:
        ns = ns[ns * params.k / params.T <= rc_limit * (1.0 + 1e-12)]
    if method is ApproxMethod.APPROX3:
        _, frac = split_ratio(fade_ratios_for_packets(params, ns))
        ns = ns[frac == 0.0]
    if ns.size == 0:
        raise ConstraintError(f"no admissible rate split for {method.value} with these parameters")
    return ns


def admissible_grid(params, method, refine=1, rc_limit=None):
    """
    All rate splits with an integer packet count n, m_hat <= n <= T / l_f,
    R_C = n k / T and R_E = m / n. Approx3 keeps only integer fade counts.
    """
    ns = packet_counts(params, method, refine, rc_limit)
    return [RateSplit.from_packets(params, int(n) if n == int(n) else float(n)) for n in ns]


def _evaluate(params, method, ns, stats, mc, point_offset=0):
    if method.is_closed_form:
        z = phi_arguments(method, params, fade_ratios_for_packets(params, ns), stats)
        p = normal_cdf(z)
        log_p = log_normal_cdf(z)
        log_q = log_normal_cdf(-z)
        std_err = np.zeros_like(p)
        trials = 0
    else:
        estimates = [
            pe_monte_carlo(params, n * params.k / params.T, mc.trials, mc.seed,
                           point_index=point_offset + i, workers=mc.workers)
            for i, n in enumerate(ns)
        ]
        p = np.array([e.p_e for e in estimates])
        log_p = np.array([e.log_p_e for e in estimates])
        log_q = np.array([e.log_q_e for e in estimates])
        std_err = np.array([e.mc_std_err for e in estimates])
        z = np.full_like(p, np.nan)
        trials = mc.trials
    objective = phi_objective(ns, params.m_hat, log_p, log_q)
    log_q_exact = log_q_binomial(ns, params.m_hat, log_p, log_q)
    return _GridArrays(ns, np.atleast_1d(p), log_p, log_q, z, std_err, objective, log_q_exact, trials)


def _argmin_larger_rc(objective):
    """Index of the smallest objective; the last one (largest R_C) on ties"""
    return int(np.flatnonzero(objective == objective.min())[-1])


def _check_method(method, mc):
    method = ApproxMethod.parse(method)
    if method is ApproxMethod.MONTE_CARLO:
        if mc is None or not mc.allow_in_optimizer:
            raise ConstraintError(
                "MonteCarlo as an optimizer method needs MonteCarloSettings(allow_in_optimizer=True)"
            )
        if mc.trials < MC_OPTIMIZER_MIN_TRIALS:
            raise ConstraintError(
                f"MonteCarlo optimizer runs need >= {MC_OPTIMIZER_MIN_TRIALS} trials per point, "
                f"got {mc.trials}"
            )
    return method


def _grid_point(params, arrays, i, method):
    n = arrays.n[i]
    n = int(n) if n == int(n) else float(n)
    if method.is_closed_form:
        p_e = OutageEstimate(
            p_e=float(arrays.p_e[i]), method=method,
            log_p_e=float(arrays.log_p_e[i]), log_q_e=float(arrays.log_q_e[i]),
            phi_argument=float(arrays.pe_phi[i]),
        )
    else:
        p_e = OutageEstimate(
            p_e=float(arrays.p_e[i]), method=method, mc_trials=arrays.mc_trials,
            mc_std_err=float(arrays.std_err[i]),
            log_p_e=float(arrays.log_p_e[i]), log_q_e=float(arrays.log_q_e[i]),
        )
    z = float(arrays.objective[i])
    q = MessageErrorResult(
        q=normal_cdf(z),
        log10_q=log_normal_cdf(z) / LN10,
        method=MessageErrorMethod.GAUSSIAN_CLT,
        n=n,
        p_e_used=p_e.p_e,
        phi_argument=z,
    )
    return GridPoint(split=RateSplit.from_packets(params, n), p_e=p_e, q=q, phi_argument=z)


# ============================================================================
# OPTIMIZATION
# ============================================================================

def optimize(params, method, mc=None, quad=DEFAULT_QUADRATURE, stats=None, refine=1, rc_limit=None):
    """
    Exhaustive search of the admissible grid.

    Args:
        params: SystemParams
        method: ApproxMethod (or its tag)
        mc: MonteCarloSettings, required for MonteCarlo
        stats: precomputed FadingStats at params.P (optional)
        refine: grid refinement factor, diagnostic
        rc_limit: drop points with R_C above this value

    Returns:
        OptimizationResult with the whole grid in ascending R_C
    """
    method = _check_method(method, mc)
    stats = stats or fading_stats(params.P, quad)
    ns = packet_counts(params, method, refine, rc_limit)
    arrays = _evaluate(params, method, ns, stats, mc)
    grid = [_grid_point(params, arrays, i, method) for i in range(ns.size)]
    best = grid[_argmin_larger_rc(arrays.objective)]
    return OptimizationResult(best=best, grid=grid, method=method)


def _row(params, arrays, i, method):
    n = float(arrays.n[i])
    return SweepRow(
        overall_rate=params.overall_rate,
        T=params.T,
        P_dB=params.P_dB,
        rc_star=n * params.k / params.T,
        re_star=params.m / n,
        n_star=n,
        p_e_star=float(arrays.p_e[i]),
        log10_q_star=float(arrays.log_q_exact[i] / LN10),
        method=method,
    )


def geometric_t_values(params, rate_max=None, rate_min=SWEEP_RATE_MIN, points=SWEEP_POINTS):
    """
    Channel-use counts T whose overall rates m k / T run geometrically from
    rate_max (default: the m_hat l_f boundary) down to rate_min.
    """
    boundary = params.m * params.k / (params.m_hat * params.l_f)
    rate_max = boundary if rate_max is None else min(rate_max, boundary)
    if not 0 < rate_min <= rate_max:
        raise DomainError(f"need 0 < rate_min <= rate_max, got {rate_min}, {rate_max}")
    if int(points) != points or points < 1:
        raise DomainError(f"points must be an integer >= 1, got {points}")
    t_min = params.m_hat * params.l_f
    values = []
    for rate in np.geomspace(rate_max, rate_min, int(points)):
        T = max(t_min, int(round(params.m * params.k / rate)))
        if T not in values:
            values.append(T)
    return values


def _ordered_params(params_template, T_values, errors):
    """SystemParams per T, by decreasing overall rate; bad T values go to errors"""
    out = []
    for T in sorted(T_values):
        try:
            out.append(params_template.with_T(T))
        except PdFadeError as e:
            log(f"⚠️  Skipping T={T}: {e}")
            if errors is not None:
                errors.append((T, str(e)))
    return out


def _sweep(params_template, T_values, method, mc, quad, stats, errors, key):
    method = _check_method(method, mc)
    stats = stats or fading_stats(params_template.P, quad)
    rows = []
    point_offset = 0
    for params in _ordered_params(params_template, T_values, errors):
        try:
            ns = packet_counts(params, method)
        except ConstraintError as e:
            log(f"⚠️  Skipping T={params.T}: {e}")
            if errors is not None:
                errors.append((params.T, str(e)))
            continue
        arrays = _evaluate(params, method, ns, stats, mc, point_offset)
        point_offset += ns.size
        rows.append(_row(params, arrays, _argmin_larger_rc(key(arrays)), method))
        log(f"   row {len(rows)}: T={params.T:g} rate={params.overall_rate:.4g} "
            f"rc*={rows[-1].rc_star:.4g} re*={rows[-1].re_star:.4g}")
    return rows


def sweep_overall_rate(params_template, T_values, method, mc=None, quad=DEFAULT_QUADRATURE,
                       stats=None, errors=None):
    """
    Optimal split per T, rows ordered by decreasing overall rate.

    Per-T constraint errors are appended to `errors` as (T, message) and
    the sweep goes on.
    """
    return _sweep(params_template, T_values, method, mc, quad, stats, errors,
                  key=lambda arrays: arrays.objective)


def ideal_q_curve(params_template, T_values, method, mc=None, quad=DEFAULT_QUADRATURE,
                  stats=None, errors=None):
    """
    Per-T grid minimum of the exact binomial q, in sweep_overall_rate's row format.

    Every fixed-R_E trajectory point is a grid point of the same T, so its
    log10 q is never below this curve.
    """
    return _sweep(params_template, T_values, method, mc, quad, stats, errors,
                  key=lambda arrays: arrays.log_q_exact)


def sweep_power(params_template, T_values, P_dB_values, method, mc=None, quad=DEFAULT_QUADRATURE,
                errors=None):
    """sweep_overall_rate at each power in P_dB_values; rows concatenated in that order"""
    rows = []
    for p_db in P_dB_values:
        log(f"📊 Sweeping overall rate at P = {p_db:g} dB")
        params = params_template.with_power_db(p_db)
        rows.extend(sweep_overall_rate(params, T_values, method, mc, quad, errors=errors))
    return rows


# ============================================================================
# INCREMENTAL REDUNDANCY
# ============================================================================

def fixed_re_trajectory(params_template, re_fixed, T_values, method=ApproxMethod.APPROX4,
                        mc=None, quad=DEFAULT_QUADRATURE, stats=None, errors=None):
    """
    Keep R_E fixed (n = m / R_E packets) and let R_C = n k / T fall as T grows.

    T values where n no longer fits (n > T / l_f) are reported in `errors`.
    """
    method = ApproxMethod.parse(method)
    if not 0 < re_fixed <= 1:
        raise ConstraintError(f"re_fixed must lie in (0, 1], got {re_fixed}")
    n = snap_to_integer(params_template.m / re_fixed)
    if n is None:
        raise ConstraintError(
            f"m / R_E = {params_template.m / re_fixed} is not an integer packet count"
        )
    if n < params_template.m_hat:
        raise ConstraintError(f"R_E={re_fixed} gives n={n} packets, below m_hat={params_template.m_hat}")
    if method is ApproxMethod.MONTE_CARLO and mc is None:
        mc = MonteCarloSettings()
    stats = stats or fading_stats(params_template.P, quad)

    rows = []
    for index, params in enumerate(_ordered_params(params_template, T_values, errors)):
        if n > params.n_max:
            msg = f"n={n} packets need T >= {n * params.l_f}, got T={params.T}"
            log(f"⚠️  Skipping T={params.T}: {msg}")
            if errors is not None:
                errors.append((params.T, msg))
            continue
        ns = np.array([float(n)])
        if method is ApproxMethod.APPROX3:
            _, frac = split_ratio(fade_ratios_for_packets(params, ns))
            if frac[0] != 0.0:
                if errors is not None:
                    errors.append((params.T, "non-integer fade count for Approx3"))
                continue
        arrays = _evaluate(params, method, ns, stats, mc, point_offset=index)
        row = _row(params, arrays, 0, method)
        rows.append(replace(row, re_star=re_fixed))
    return rows


def trajectory_gap(ideal_rows, trajectory_rows):
    """
    log10 q(trajectory) - log10 q(ideal) for every T present in both, keyed by T.

    ideal_rows normally come from ideal_q_curve.
    """
    ideal = {row.T: row.log10_q_star for row in ideal_rows}
    gaps = {}
    for row in trajectory_rows:
        if row.T not in ideal:
            continue
        a, b = row.log10_q_star, ideal[row.T]
        gaps[row.T] = 0.0 if a == b else a - b
    return gaps
