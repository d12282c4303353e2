import numpy as np
import pytest

import pdfade.outage as outage
from pdfade.config import MC_TOLERANCE
from pdfade.errors import ConstraintError, DomainError
from pdfade.fading_model import (
    SystemParams,
    fade_profile,
    fading_stats,
    make_rng,
    sample_snrs,
    weighted_avg_mi,
)
from pdfade.optimizer import admissible_grid
from pdfade.outage import (
    ApproxMethod,
    OutageEstimate,
    packet_erasures,
    pe_approx1,
    pe_approx2,
    pe_approx3,
    pe_approx4,
    pe_block_fading_monte_carlo,
    pe_closed_form,
    pe_monte_carlo,
    split_ratio,
)

# rc with k / (rc l_f) an integer in the m = m_hat = 50, k = 20, l_f = 10 system
INTEGER_FADE_RATES = (1.0 / 3.0, 0.4, 0.5, 2.0 / 3.0, 1.0, 2.0)


@pytest.fixture(scope="module")
def params():
    return SystemParams.from_db(m=50, m_hat=50, k=20.0, l_f=10.0, T=3300.0, P_dB=5.0, epsilon=0.05)


@pytest.fixture(scope="module")
def stats(params):
    return fading_stats(params.P)


def test_method_parsing():
    assert ApproxMethod.parse("approx4") is ApproxMethod.APPROX4
    assert ApproxMethod.parse("Monte_Carlo") is ApproxMethod.MONTE_CARLO
    assert ApproxMethod.parse(ApproxMethod.APPROX2) is ApproxMethod.APPROX2
    assert not ApproxMethod.MONTE_CARLO.is_closed_form
    with pytest.raises(DomainError):
        ApproxMethod.parse("Approx5")


def test_split_ratio_snaps():
    full, frac = split_ratio(np.array([6.000000000000001, 4.25, 3.0]))
    np.testing.assert_array_equal(full, [6.0, 4.0, 3.0])
    np.testing.assert_allclose(frac, [0.0, 0.25, 0.0])


def test_approximations_agree_on_integer_fade_counts(params, stats):
    """With no partial fade, Approx1 = Approx2 = Approx3 = Approx4"""
    for rc in INTEGER_FADE_RATES:
        p1 = pe_approx1(params, rc, stats).p_e
        assert pe_approx2(params, rc, stats).p_e == pytest.approx(p1, abs=1e-12)
        assert pe_approx3(params, rc, stats).p_e == pytest.approx(p1, abs=1e-12)
        assert pe_approx4(params, rc, stats).p_e == pytest.approx(p1, abs=1e-12)


def test_approx2_is_piecewise_constant(params, stats):
    """Between fade breakpoints only floor(k / (rc l_f)) matters"""
    a = pe_approx2(params, 0.41, stats).p_e
    b = pe_approx2(params, 0.45, stats).p_e
    c = pe_approx2(params, 0.49, stats).p_e
    assert a == b == c
    assert pe_approx2(params, 0.4, stats).p_e != a


def test_approx3_needs_integer_fade_count(params, stats):
    with pytest.raises(ConstraintError):
        pe_approx3(params, 0.45, stats)


def test_rate_bounds_enforced(params, stats):
    with pytest.raises(ConstraintError):
        pe_approx4(params, 0.2, stats)
    with pytest.raises(ConstraintError):
        pe_approx4(params, 2.5, stats)


def test_closed_form_dispatch(params, stats):
    est = pe_closed_form("Approx4", params, 0.45, stats)
    assert est.method is ApproxMethod.APPROX4
    assert est == pe_approx4(params, 0.45, stats)
    assert est.log_p_e == pytest.approx(np.log(est.p_e))
    assert est.log_q_e == pytest.approx(np.log1p(-est.p_e))
    with pytest.raises(DomainError):
        pe_closed_form(ApproxMethod.MONTE_CARLO, params, 0.45, stats)


def test_extreme_rates_keep_finite_logs(params, stats):
    low = pe_approx4(params, params.rc_min, stats)
    high = pe_approx4(params, params.rc_max, stats)
    assert np.isfinite(low.log_p_e)
    assert low.p_e < high.p_e
    assert high.p_e > 0.99


def test_closed_forms_nondecreasing_in_rate(params, stats):
    grid = admissible_grid(params, ApproxMethod.APPROX4)
    for method in (ApproxMethod.APPROX1, ApproxMethod.APPROX2, ApproxMethod.APPROX4):
        z = np.array([pe_closed_form(method, params, s.rc, stats).phi_argument for s in grid])
        assert np.all(np.diff(z) >= -1e-12), method


def test_outage_falls_with_power(params):
    p = [pe_approx4(params.with_power_db(d), 0.5, fading_stats(10 ** (d / 10))).p_e for d in (1, 5, 10)]
    assert p[0] >= p[1] >= p[2]

    strong = params.with_power_db(60.0)
    assert pe_monte_carlo(strong, 0.5, trials=20_000).p_e == 0.0


def test_rearranged_event_matches_weighted_average(params):
    """sum W_i + frac W_last < c k / l_f  is the event  W < (1 + eps) rc, draw for draw"""
    rc = 0.6
    profile = fade_profile(params, rc)
    snrs = sample_snrs(params.P, make_rng(17), (100_000, profile.total_fades))
    by_average = weighted_avg_mi(snrs, profile) < (1.0 + params.epsilon) * rc
    np.testing.assert_array_equal(packet_erasures(params, profile, snrs), by_average)


def test_monte_carlo_matches_approx4_over_grid(params, stats):
    """|Approx4 - MC| <= 3 SE + tolerance at every admissible rate, 10^6 trials each"""
    for index, split in enumerate(admissible_grid(params, ApproxMethod.APPROX4)):
        approx = pe_approx4(params, split.rc, stats)
        mc = pe_monte_carlo(params, split.rc, trials=1_000_000, point_index=index)
        assert abs(approx.p_e - mc.p_e) <= 3 * mc.mc_std_err + MC_TOLERANCE, split


def test_monte_carlo_is_deterministic_across_workers(params, monkeypatch):
    monkeypatch.setattr(outage, "MC_BLOCK_DRAWS", 1000)
    serial = pe_monte_carlo(params, 0.6, trials=20_000, seed=11, workers=1)
    parallel = pe_monte_carlo(params, 0.6, trials=20_000, seed=11, workers=4)
    assert serial == parallel
    assert serial.mc_trials == 20_000
    assert pe_monte_carlo(params, 0.6, trials=20_000, seed=12, workers=1) != serial


def test_monte_carlo_standard_error(params):
    est = pe_monte_carlo(params, 0.6, trials=40_000, seed=3)
    assert 0 < est.p_e < 1
    assert est.mc_std_err == pytest.approx(np.sqrt(est.p_e * (1 - est.p_e) / 40_000))


def test_monte_carlo_rejects_bad_trials(params):
    with pytest.raises(DomainError):
        pe_monte_carlo(params, 0.6, trials=0)
    with pytest.raises(DomainError):
        pe_monte_carlo(params, 0.6, trials=10.5)


def test_block_fading_reference_matches_pd_event(params):
    """With an integer fade count the PD event is the plain block-fading outage"""
    for index, rc in enumerate((0.4, 0.5, 2.0 / 3.0)):
        pd = pe_monte_carlo(params, rc, trials=30_000, point_index=index)
        block = pe_block_fading_monte_carlo(params, rc, trials=30_000, point_index=index)
        assert block.p_e == pytest.approx(pd.p_e, abs=1e-3)

    with pytest.raises(ConstraintError):
        pe_block_fading_monte_carlo(params, 0.45, trials=1000)


def test_estimate_from_counts():
    est = OutageEstimate.from_counts(0, 1000)
    assert est.p_e == 0.0
    assert est.log_p_e == float("-inf")
    assert est.log_q_e == 0.0
    assert est.mc_std_err == 0.0


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
