import numpy as np
import pytest

from pdfade.config import POWER_DB_VALUES
from pdfade.errors import ConstraintError, DomainError
from pdfade.fading_model import SystemParams, fading_stats
from pdfade.optimizer import (
    MonteCarloSettings,
    _argmin_larger_rc,
    admissible_grid,
    fixed_re_trajectory,
    geometric_t_values,
    ideal_q_curve,
    optimize,
    packet_counts,
    sweep_overall_rate,
    sweep_power,
    trajectory_gap,
)
from pdfade.message_error import q_binomial
from pdfade.outage import ApproxMethod, pe_approx4


def system(T=3300.0, P_dB=5.0):
    return SystemParams.from_db(m=50, m_hat=50, k=20.0, l_f=10.0, T=T, P_dB=P_dB, epsilon=0.05)


@pytest.fixture(scope="module")
def baseline():
    return system()


@pytest.fixture(scope="module")
def sweep_T(baseline):
    return geometric_t_values(baseline)


# ============================================================================
# GRID
# ============================================================================

def test_grid_covers_every_packet_count(baseline):
    grid = admissible_grid(baseline, ApproxMethod.APPROX4)
    assert [s.n for s in grid] == list(range(50, 331))
    assert grid[0].rc == pytest.approx(baseline.rc_min)
    assert grid[-1].rc == pytest.approx(2.0)
    assert grid[0].re == 1.0


def test_approx3_has_three_points_below_rc_08(baseline):
    grid = admissible_grid(baseline, ApproxMethod.APPROX3, rc_limit=0.8)
    assert [s.n for s in grid] == [55, 66, 110]
    np.testing.assert_allclose([s.rc for s in grid], [1 / 3, 0.4, 2 / 3])


def test_empty_grid_is_an_error():
    params = system(T=500.0)
    assert len(admissible_grid(params, ApproxMethod.APPROX4)) == 1
    with pytest.raises(ConstraintError):
        admissible_grid(params, ApproxMethod.APPROX4, rc_limit=0.1)


def test_refined_grid():
    ns = packet_counts(system(), ApproxMethod.APPROX4, refine=4)
    assert ns[1] == pytest.approx(50.25)
    assert ns[-1] == 330
    with pytest.raises(DomainError):
        packet_counts(system(), ApproxMethod.APPROX4, refine=0)


def test_ties_go_to_larger_rc():
    assert _argmin_larger_rc(np.array([1.0, 0.0, 0.0])) == 2
    assert _argmin_larger_rc(np.array([-np.inf, -np.inf, 3.0])) == 1
    assert _argmin_larger_rc(np.array([2.0, -1.0, 0.5])) == 1


# ============================================================================
# OPTIMIZATION
# ============================================================================

def test_optimum_is_grid_minimum(baseline):
    result = optimize(baseline, ApproxMethod.APPROX4)
    objectives = np.array([g.phi_argument for g in result.grid])
    assert result.best.phi_argument == objectives.min()
    assert result.best.q.log10_q == min(g.q.log10_q for g in result.grid)
    assert result.method is ApproxMethod.APPROX4
    # redundancy helps at this rate
    assert result.best.split.re < 1.0


def test_approx1_and_approx4_agree_within_one_grid_step(baseline):
    n1 = optimize(baseline, "Approx1").best.split.n
    n4 = optimize(baseline, "Approx4").best.split.n
    assert abs(n1 - n4) <= 1


def test_refinement_moves_rc_star_less_than_one_step(baseline):
    coarse = optimize(baseline, ApproxMethod.APPROX4)
    fine = optimize(baseline, ApproxMethod.APPROX4, refine=4)
    assert fine.best.phi_argument <= coarse.best.phi_argument
    assert abs(fine.best.split.rc - coarse.best.split.rc) < baseline.k / baseline.T


def test_scaling_k_lf_T_leaves_the_problem_unchanged(baseline):
    base = optimize(baseline, ApproxMethod.APPROX4)
    scaled = optimize(baseline.scaled(10.0), ApproxMethod.APPROX4)
    assert scaled.best.split.n == base.best.split.n
    assert scaled.best.split.rc == pytest.approx(base.best.split.rc)
    assert scaled.best.phi_argument == pytest.approx(base.best.phi_argument, rel=1e-9)


def test_monte_carlo_optimizer_is_opt_in(baseline):
    with pytest.raises(ConstraintError):
        optimize(baseline, ApproxMethod.MONTE_CARLO)
    with pytest.raises(ConstraintError):
        optimize(baseline, ApproxMethod.MONTE_CARLO, mc=MonteCarloSettings(trials=100_000))
    with pytest.raises(ConstraintError):
        optimize(baseline, ApproxMethod.MONTE_CARLO,
                 mc=MonteCarloSettings(trials=1000, allow_in_optimizer=True))


def test_monte_carlo_optimizer_on_a_small_grid():
    params = SystemParams.from_db(m=5, m_hat=5, k=20.0, l_f=10.0, T=120.0, P_dB=5.0)
    mc = MonteCarloSettings(trials=100_000, seed=4, allow_in_optimizer=True)
    result = optimize(params, ApproxMethod.MONTE_CARLO, mc=mc)
    assert [g.split.n for g in result.grid] == list(range(5, 13))
    assert all(g.p_e.mc_trials == 100_000 for g in result.grid)
    assert optimize(params, ApproxMethod.MONTE_CARLO, mc=mc).best == result.best


def test_monte_carlo_settings_validated():
    with pytest.raises(DomainError):
        MonteCarloSettings(trials=0)
    with pytest.raises(DomainError):
        MonteCarloSettings(seed=-1)


# ============================================================================
# SWEEPS
# ============================================================================

def test_geometric_t_values(baseline, sweep_T):
    assert sweep_T[0] == 500
    assert sweep_T[-1] == 100_000
    assert sweep_T == sorted(sweep_T)
    assert len(set(sweep_T)) == len(sweep_T) <= 30
    with pytest.raises(DomainError):
        geometric_t_values(baseline, rate_min=0.0)


def test_sweep_skips_bad_T_values(baseline):
    errors = []
    rows = sweep_overall_rate(baseline, [400, 500, 1000, 2000], ApproxMethod.APPROX4, errors=errors)
    assert [r.T for r in rows] == [500, 1000, 2000]
    assert [T for T, _ in errors] == [400]
    assert rows[0].overall_rate > rows[1].overall_rate > rows[2].overall_rate


def test_rate_sweep_trend_at_every_power(baseline, sweep_T):
    """
    re* starts at 1 (no room for redundancy), dips below 1, and is back
    near 1 at the lowest rate, where rc* keeps falling.
    """
    for p_db in POWER_DB_VALUES:
        params = baseline.with_power_db(p_db)
        stats = fading_stats(params.P)
        rows = sweep_overall_rate(params, sweep_T, ApproxMethod.APPROX4, stats=stats)
        assert len(rows) == len(sweep_T)
        re = [r.re_star for r in rows]
        rc = [r.rc_star for r in rows]
        assert re[0] == 1.0
        assert min(re) < 1.0
        assert re[-1] >= 0.95
        dip = re.index(min(re))
        assert all(a >= b for a, b in zip(rc[dip:], rc[dip + 1:])), p_db


@pytest.mark.parametrize("T", [1000.0, 3300.0, 20000.0])
def test_more_power_never_raises_q_star(T):
    log10_q = [
        optimize(system(T=T, P_dB=p_db), ApproxMethod.APPROX4).best.q.log10_q
        for p_db in POWER_DB_VALUES
    ]
    assert all(a >= b for a, b in zip(log10_q, log10_q[1:]))


def test_power_sweep_concatenates_levels(baseline):
    rows = sweep_power(baseline, [1000, 3300], [1.0, 5.0, 10.0], ApproxMethod.APPROX4)
    assert [r.P_dB for r in rows] == pytest.approx([1.0, 1.0, 5.0, 5.0, 10.0, 10.0])
    assert [r.T for r in rows] == [1000, 3300] * 3


# ============================================================================
# FIXED R_E TRAJECTORIES
# ============================================================================

def test_fixed_re_trajectories_never_beat_the_optimum(baseline, sweep_T):
    ideal = ideal_q_curve(baseline, sweep_T, ApproxMethod.APPROX4)
    assert [r.T for r in ideal] == sweep_T
    worst = {}
    for re_fixed in (1.0, 50 / 60, 50 / 75, 50 / 100):
        errors = []
        rows = fixed_re_trajectory(baseline, re_fixed, sweep_T, errors=errors)
        assert rows
        assert all(r.re_star == re_fixed for r in rows)
        assert all(r.re_star * r.rc_star == pytest.approx(r.overall_rate, abs=1e-12) for r in rows)
        gaps = trajectory_gap(ideal, rows)
        assert len(gaps) == len(rows)
        assert min(gaps.values()) >= -1e-9
        worst[re_fixed] = max(gaps.values())
        n = round(50 / re_fixed)
        assert all(n * 10 > T for T, _ in errors)
    assert worst[1.0] > 0
    # no erasure coding ends up furthest from the optimized system
    assert worst[1.0] > min(worst[re] for re in worst if re < 1.0)


def test_rows_report_exact_binomial_q(baseline):
    rows = sweep_overall_rate(baseline, [3300, 100_000], ApproxMethod.APPROX4)
    stats = fading_stats(baseline.P)
    for row in rows:
        params = baseline.with_T(row.T)
        p_e = pe_approx4(params, row.rc_star, stats)
        exact = q_binomial(int(row.n_star), params.m_hat, p_e.p_e, p_e.log_p_e, p_e.log_q_e)
        assert row.log10_q_star == pytest.approx(exact.log10_q, rel=1e-9)
    # deep in the tail the value is still a finite log-probability
    assert -1e6 < rows[-1].log10_q_star < -50


def test_ideal_curve_is_the_grid_minimum_of_exact_q(baseline):
    row = ideal_q_curve(baseline, [3300], ApproxMethod.APPROX4)[0]
    stats = fading_stats(baseline.P)
    exact = []
    for split in admissible_grid(baseline, ApproxMethod.APPROX4):
        p = pe_approx4(baseline, split.rc, stats)
        exact.append(q_binomial(split.n, baseline.m_hat, p.p_e, p.log_p_e, p.log_q_e).log10_q)
    assert row.log10_q_star == pytest.approx(min(exact), rel=1e-9)
    assert row.n_star == admissible_grid(baseline, ApproxMethod.APPROX4)[int(np.argmin(exact))].n


def test_trajectory_touches_the_optimum_at_its_own_rate(baseline):
    ideal = ideal_q_curve(baseline, [3300], ApproxMethod.APPROX4)
    re_star = ideal[0].re_star
    rows = fixed_re_trajectory(baseline, re_star, [2000, 3300, 6000])
    gaps = trajectory_gap(ideal, rows)
    assert gaps[3300] == pytest.approx(0.0, abs=1e-12)


def test_fixed_re_rejects_bad_values(baseline):
    with pytest.raises(ConstraintError):
        fixed_re_trajectory(baseline, 1.5, [3300])
    with pytest.raises(ConstraintError):
        fixed_re_trajectory(baseline, 50 / 60.5, [3300])


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
