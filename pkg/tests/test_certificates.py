import numpy as np # type: ignore
import pytest # type: ignore

from services.certificates import (
    RecurrenceSearch,
    check_drift_upper,
    check_growth_bound,
    check_minimum,
    check_region_containment,
    check_wonham_hypotheses,
    judge,
    lift_witness,
    search_recurrence_params,
    select_kappa0,
    sphere_candidates,
    sphere_extremum,
    transience_ladder_start,
)
from services.exceptions import ConstructionError, ParameterError
from services.lyapunov import (
    CutoffProfiles,
    ShiftedEnergyField,
    V1Field,
    VField,
    field_H,
    field_H_tilde,
    nonexplosion_constants,
    solve_transience_constants,
)
from services.regions import region_R1, region_ball_exterior, region_box, sphere_directions

POINTS = np.zeros((3, 3))


def test_judge_flags_violations_and_nonfinite_values():
    report = judge("box", "upper", POINTS, np.array([1.0, -1.0, np.nan]), np.ones(3), 0.0, 1.0)
    assert not report.passed
    assert report.n_nonfinite == 1
    assert report.worst_margin == 1.0
    assert report.witnesses[0].value is None or report.witnesses[0].value == 1.0


def test_judge_tolerates_a_small_unresolved_share():
    values = np.full(2000, -1.0)
    values[0] = 1e-17
    report = judge("box", "upper", np.zeros((2000, 3)), values, np.ones(2000), 0.0, 1.0)
    assert report.passed
    assert report.n_unresolved == 1
    assert report.n_violating == 0
    assert report.worst_margin == -1.0


def test_judge_fails_without_resolved_samples():
    report = judge("box", "upper", POINTS[:1], np.array([1e-17]), np.array([1.0]), 0.0, 1.0)
    assert not report.passed
    assert report.n_unresolved == 1
    assert report.n_violating == 0
    assert report.worst_margin is None


def test_judge_fails_when_too_many_samples_are_unresolved():
    values = np.full(100, -1.0)
    values[:5] = 1e-17
    report = judge("box", "upper", np.zeros((100, 3)), values, np.ones(100), 0.0, 1.0)
    assert not report.passed
    assert report.n_unresolved == 5
    assert report.n_violating == 0


def test_judge_counts_violations():
    report = judge("box", "lower", POINTS, np.array([2.0, -1.0, -2.0]), np.ones(3), 0.0, 1.0)
    assert not report.passed
    assert report.n_violating == 2
    assert report.worst_margin == -2.0


def test_judge_orders_witnesses_by_gap():
    report = judge("box", "upper", POINTS, np.array([0.5, -3.0, 2.0]), np.ones(3), 1.0, 1.0)
    assert not report.passed
    assert [w.value for w in report.witnesses] == [2.0, 0.5, -3.0]


def test_judge_lower_uses_slack():
    report = judge("box", "lower", POINTS[:2], np.array([1.0, 2.0]), np.ones(2), 1.0)
    assert report.threshold == pytest.approx(0.99)
    assert report.passed
    assert report.worst_margin == 1.0
    dumped = report.model_dump(by_alias=True)
    assert dumped["pass"] is True
    assert "numerical certificate" in dumped["label"]


def test_growth_bound_for_shifted_energy(reversed_params):
    c, d, _ = nonexplosion_constants(reversed_params)
    report = check_growth_bound(reversed_params, ShiftedEnergyField(reversed_params), region_box(100.0).with_samples(2000), c, d)
    assert report.passed
    assert report.kind == "growth"
    assert report.params["c"] == c


def test_energy_decays_far_out_for_damped_params(classic_params):
    region = region_ball_exterior(200.0, k_max=4).with_samples(500)
    report = check_drift_upper(classic_params, field_H(classic_params), region, -1.0)
    assert report.passed
    assert report.n_samples > 0
    assert report.worst_margin < -0.99


def test_minimum_of_shifted_energy(undamped_params):
    field = field_H_tilde(undamped_params, undamped_params.sigma**2 + 1.0)
    report = check_minimum(field, region_box(60.0).with_samples(1000), 1.0)
    assert report.passed
    assert report.worst_margin >= 1.0


def test_cylinder_containment(small_rp):
    report = check_region_containment(small_rp, rho=28.0, samples_per_shell=200, k_max=5)
    assert report.passed
    assert report.region == "cylinder⊆R1∪R2"
    assert report.n_samples > 0


def test_search_preconditions(classic_params, vertical_noise_params):
    with pytest.raises(ParameterError):
        search_recurrence_params(classic_params)
    with pytest.raises(ConstructionError):
        RecurrenceSearch(vertical_noise_params)


def test_search_respects_initial_radii(undamped_params):
    search = RecurrenceSearch(undamped_params, initial={"R0": 16.0, "R2": 2.0, "R3": None})
    assert search.rp.R0 == 16.0
    assert search.rp.R2 == 16.0
    assert search.rp.R3 == 1.0
    assert search.rp.kappa2 == pytest.approx(16.0 * undamped_params.gamma_bar)


def test_sphere_extremum_of_energy(classic_params):
    h = field_H(classic_params)
    s = classic_params.sigma + classic_params.rho
    directions = sphere_directions(500, seed=1)
    top, where = sphere_extremum(h, 10.0, directions, maximize=True)
    low, _ = sphere_extremum(h, 10.0, directions, maximize=False)
    assert top == pytest.approx(100.0 + 20.0 * s, rel=1e-5)
    assert low == pytest.approx(100.0 - 20.0 * s, rel=1e-5)
    assert np.linalg.norm(where) == pytest.approx(10.0)


def test_ladder_start(reversed_params):
    tp = solve_transience_constants(reversed_params)
    S0 = transience_ladder_start(reversed_params, tp)
    assert S0 >= 2.0 * (reversed_params.sigma + reversed_params.rho) + 10.0
    assert S0 >= tp.R


def test_wonham_requires_negative_beta(undamped_params):
    with pytest.raises(ParameterError):
        check_wonham_hypotheses(undamped_params)



def test_sphere_extremum_finds_the_axis_cap_of_V1(reversed_params):
    tp = solve_transience_constants(reversed_params)
    v1 = V1Field(reversed_params, tp)
    S = 1e10
    on_axis = float(v1(np.array([0.0, 0.0, S])))
    assert on_axis > 0.0
    top, where = sphere_extremum(v1, S, sphere_candidates(200, seed=0), maximize=True)
    assert top == pytest.approx(on_axis, rel=1e-12)
    np.testing.assert_allclose(where, [0.0, 0.0, S], atol=1e-3 * S)
    # the positive cap is too thin for quasi-uniform directions alone
    missed, _ = sphere_extremum(v1, S, sphere_directions(200, seed=0), maximize=True)
    assert missed < on_axis


def test_sphere_candidates_lead_with_the_axis():
    candidates = sphere_candidates(10, seed=3)
    assert candidates.shape == (11, 3)
    np.testing.assert_array_equal(candidates[0], [0.0, 0.0, 1.0])


def test_lifted_witness_keeps_radius_and_band():
    rho = 28.0
    point = np.array([1.5, -0.7, rho + 40.0])
    lifted = lift_witness(point, rho, factor=64.0)
    assert lifted[0] ** 2 + lifted[1] ** 2 == pytest.approx(1.5**2 + 0.7**2, rel=1e-12)
    assert abs(lifted[0]) * np.cbrt(lifted[2] - rho) == pytest.approx(1.5 * np.cbrt(40.0), rel=1e-12)
    assert lifted[2] - rho == pytest.approx(64.0 * 40.0)
    assert lifted[1] < 0.0


def test_stage_owner_grows_weights_before_radii(undamped_params):
    search = RecurrenceSearch(undamped_params)
    profiles = CutoffProfiles.sample()
    assert search.stage_owner(search.rp) == "kappa1"
    while (owner := search.stage_owner(search.rp)) is not None:
        search._double(owner)
    rp, gbar = search.rp, undamped_params.gamma_bar
    assert rp.kappa1 >= 4.0 * gbar + 2.0 * rp.kappa2 * profiles.band2_max
    assert rp.R2 >= 2.0 * rp.R0
    assert undamped_params.gamma1 * rp.kappa1 * np.sqrt(2.0 * rp.R0) * profiles.band1_max <= gbar * rp.R1**3
    assert search.spent < search.budget
    assert search.doublings["R3"] == 0


def test_cutoff_profiles_are_bounded():
    profiles = CutoffProfiles.sample()
    assert 0.0 < profiles.band2_max < 20.0
    assert 2.0 < profiles.band1_max < 200.0
    assert np.all(profiles.radial1 >= 0.0)
    assert profiles.radial1[0] == pytest.approx(0.0, abs=1e-12)
    assert profiles.radial1[-1] == pytest.approx(0.0, abs=1e-12)


def test_search_gives_up_on_a_tiny_budget(x_noise_origin_params):
    result = search_recurrence_params(x_noise_origin_params, budget=3, search_samples=16, verify_samples=32)
    assert not result.found
    assert "budget of 3 doublings exhausted" in result.message
    assert sum(result.doublings.values()) == 3


def test_kappa0_selection_lifts_the_sampled_minimum(undamped_params, small_rp):
    kappa0 = select_kappa0(undamped_params, small_rp, 300, seed=4, k_max=5)
    rp = small_rp.updated(kappa0=kappa0)
    v = VField(undamped_params, rp)
    region = region_R1(rp, undamped_params.rho, k_max=5).with_samples(300).with_seed(4)
    assert np.min(v(region.sample())) >= 1.0


@pytest.mark.slow
def test_wonham_hypotheses_reversed_damping(reversed_params):
    report = check_wonham_hypotheses(reversed_params, n_directions=200, samples_per_shell=500)
    assert report.p1
    assert report.p2
    assert report.p3
    assert report.p4
    assert report.argmax_near_axis
    assert report.reports[0].kind == "lower"
    assert report.reports[0].passed
    assert report.reports[1].passed
    assert report.passed
    assert all(b.S == 2 * a.S for a, b in zip(report.ladder, report.ladder[1:]))


@pytest.mark.slow
def test_recurrence_search_finds_a_certificate(found_certificate, x_noise_origin_params):
    result = found_certificate
    assert result.found, result.message
    assert result.message == "certificate found"
    assert sum(result.doublings.values()) <= 200
    assert result.min_V >= 1.0
    assert result.c == pytest.approx(0.99 * x_noise_origin_params.gamma_bar)
    assert result.d >= 0.0
    assert all(r.passed for r in result.reports)
    assert all(r.n_unresolved == 0 for r in result.reports)
    assert all(r.n_samples > 0 for r in result.reports)
    assert {"R1", "R0", "psi1", "R2", "psi2", "K"} <= {r.region for r in result.reports}
