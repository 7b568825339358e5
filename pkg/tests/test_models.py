import math

import numpy as np # type: ignore
import pytest # type: ignore
from pydantic import ValidationError # type: ignore

from models.params import ModelParams, Point3, RecurrenceParams, TransienceParams, Trajectory
from models.reports import CertificateReport, HittingTimeStats


def test_all_zero_noise_is_rejected():
    with pytest.raises(ValidationError):
        ModelParams(sigma=10.0, rho=28.0, beta=0.0)


@pytest.mark.parametrize("field, value", [("sigma", 0.0), ("rho", -1.0), ("gamma1", -0.1)])
def test_parameter_ranges(field, value):
    kwargs = dict(sigma=10.0, rho=28.0, beta=0.0, gamma1=1.0)
    kwargs[field] = value
    with pytest.raises(ValidationError):
        ModelParams(**kwargs)


def test_non_finite_values_are_rejected():
    with pytest.raises(ValidationError):
        ModelParams(sigma=math.inf, gamma1=1.0)
    with pytest.raises(ValidationError):
        Point3(x=math.nan, y=0.0, z=0.0)


def test_unknown_keys_are_rejected():
    with pytest.raises(ValidationError):
        ModelParams(sigma=1.0, gamma1=1.0, gamma4=1.0)


def test_gamma_bar_is_twice_the_noise_sum(undamped_params):
    assert undamped_params.gamma == (1.0, 1.0, 0.0)
    assert undamped_params.gamma_bar == 4.0


def test_recurrence_params_require_R2_at_least_R0(small_rp):
    with pytest.raises(ValidationError):
        small_rp.updated(R2=2.0)
    assert small_rp.updated(R0=8.0).R0 == 8.0


def test_transience_params_accept_lambda_alias():
    tp = TransienceParams(A=4.0, m=2.0, B=2.5, c0=1.0, c1=2.0, c2=0.0, **{"lambda": 0.5}, K=1.0, kappa0=3.0, R=5.0)
    assert tp.lam == 0.5
    with pytest.raises(ValidationError):
        TransienceParams(A=4.0, m=2.0, B=2.5, c0=1.0, c1=-2.0, c2=0.0, lam=0.5, K=1.0, kappa0=3.0, R=5.0)


def test_trajectory_arrays_are_read_only():
    traj = Trajectory(times=np.array([0.0, 0.1]), states=np.zeros((2, 3)), seed=0, step=0.1)
    assert len(traj) == 2
    with pytest.raises(ValueError):
        traj.states[0, 0] = 1.0


def test_certificate_report_serialises_pass_alias():
    report = CertificateReport(
        region="R0", n_samples=1, bound=-1.0, threshold=-0.99, worst_margin=-2.0, passed=True,
    )
    dumped = report.model_dump(by_alias=True)
    assert dumped["pass"] is True
    assert dumped["label"] == "numerical certificate (truncated)"


def test_hitting_stats_summaries(origin):
    stats = HittingTimeStats(
        start=origin, R=1.0, n_traj=4, n_hit=2, censored_at=10.0, dt=0.1,
        first_entry=[1.0, None, 3.0, None],
    )
    assert stats.hit_times == [1.0, 3.0]
    assert stats.mean == pytest.approx(2.0)
    assert stats.survival_fraction == pytest.approx(0.5)
    assert stats.censored_mean == pytest.approx(6.0)
