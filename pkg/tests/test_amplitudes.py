import csv
import math
import warnings

import numpy as np
import pytest

from reldecay import amplitudes as amp
from reldecay import massdist as md
from reldecay import quadrature as Q
from reldecay.errors import ConvergenceError, DomainError, ParameterError
from reldecay.kinematics import PhaseModel


@pytest.fixture(scope="module")
def bw():
    return md.breit_wigner(1.0, 1e-3, 0.0)


def test_time_grid_validation():
    g = amp.TimeGrid.linear(10.0, 5, 6)
    assert np.allclose(g.t_over_tau, [0, 1, 2, 3, 4, 5])
    lg = amp.TimeGrid.log(10.0, 100, 10, extra=(1.0,))
    assert lg.t[0] == 0.0 and np.all(np.diff(lg.t) > 0) and np.any(np.isclose(lg.t_over_tau, 1.0))
    with pytest.raises(ParameterError):
        amp.TimeGrid(1.0, (0.0, 2.0, 1.0))
    with pytest.raises(ParameterError):
        amp.TimeGrid(1.0, (0.0, 2e5))
    with pytest.raises(ParameterError):
        amp.TimeGrid.linear(1.0, 5, 1)
    with pytest.raises(ParameterError):
        amp.TimeGrid(1.0, (-1.0, 1.0))


def test_smearing_rule_normalized():
    s = amp.MomentumSmearing(0.3, 0.02)
    p, w = s.nodes(64)
    assert abs(w.sum() - 1.0) < 1e-8
    assert np.dot(w, p) == pytest.approx(0.3, rel=1e-12)
    assert math.sqrt(np.dot(w, (p - 0.3) ** 2)) == pytest.approx(0.02, rel=1e-10)
    with pytest.raises(ParameterError):
        amp.MomentumSmearing(0.0, 0.0)


def test_x_rule_parse():
    assert amp.XRule.parse("comoving").position(0.5, 4.0) == 2.0
    r = amp.XRule.parse("fixed:2.5")
    assert not r.comoving and r.position(0.5, 4.0) == 2.5
    assert str(r) == "fixed:2.5" and str(amp.COMOVING) == "comoving"
    assert amp.XRule.parse("fixed").x == 0.0
    with pytest.raises(ParameterError):
        amp.XRule.parse("somewhere")


def test_rest_starts_at_one(bw):
    s = amp.survival_rest(bw, amp.TimeGrid.linear(bw.tau, 5, 11))
    assert abs(s.probabilities[0] - 1.0) <= s.error_bounds[0] + 1e-9
    assert np.all(s.probabilities <= 1 + s.error_bounds)
    assert np.max(np.abs(s.probabilities - np.abs(s.amplitudes) ** 2)) < 1e-14


def test_untruncated_pole_at_two_tau():
    d = md.breit_wigner(1.0, 0.01, -math.inf)
    s = amp.survival_rest(d, amp.TimeGrid(d.tau, (2 * d.tau,)))
    assert s.probabilities[0] == pytest.approx(math.exp(-2), abs=1e-9)
    assert s.probabilities[0] == pytest.approx(0.1353, abs=1e-4)


def test_exponential_regime(bw):
    g = amp.TimeGrid.linear(bw.tau, 5, 51)
    s = amp.survival_rest(bw, g)
    ref = np.exp(-g.t_over_tau)
    assert np.max(np.abs(s.probabilities - ref) / ref) < 1e-2


def test_zero_momentum_is_rest_path(bw):
    g = amp.TimeGrid.log(bw.tau, 50, 20)
    a = amp.survival_rest(bw, g)
    b = amp.survival_momentum(bw, 0.0, g)
    assert np.array_equal(a.amplitudes, b.amplitudes)
    assert np.array_equal(a.error_bounds, b.error_bounds)


def test_momentum_dilation(bw):
    g = amp.TimeGrid.linear(bw.tau, 5, 21)
    s = amp.survival_momentum(bw, math.sqrt(3), g)
    ref = amp.rest_provider(bw)(g.t / 2)
    assert abs(s.probabilities[0] - 1) < 1e-9
    assert np.max(np.abs(s.probabilities - ref)) < 0.02
    with pytest.raises(DomainError):
        amp.survival_momentum(bw, -1.0, g)


def test_pointwise_refinement(bw):
    coarse = amp.TimeGrid.linear(bw.tau, 10, 6)
    fine = amp.TimeGrid.linear(bw.tau, 10, 11)
    a = amp.survival_momentum(bw, 0.4, coarse)
    b = amp.survival_momentum(bw, 0.4, fine)
    assert np.array_equal(a.amplitudes, b.amplitudes[::2])


def test_thread_count_does_not_change_results(bw):
    g = amp.TimeGrid.log(bw.tau, 100, 30)
    a = amp.survival_momentum(bw, 1.0, g, threads=1)
    b = amp.survival_momentum(bw, 1.0, g, threads=4)
    assert np.array_equal(a.amplitudes, b.amplitudes)


def test_velocity_frame_at_rest_reduces_to_rest():
    d = md.breit_wigner(1.0, 1e-4, 0.0)
    g = amp.TimeGrid.linear(d.tau, 5, 11)
    s = amp.survival_velocity_frame(d, amp.MomentumSmearing(0.0, 1e-2), 0.0, "comoving",
                                    PhaseModel.CORRECTED_APPROX, g)
    r = amp.survival_rest(d, g)
    assert np.max(np.abs(s.amplitudes - r.amplitudes)) < 1e-8


def test_velocity_frame_laws():
    d = md.breit_wigner(1.0, 1e-4, 0.0)
    sm = amp.MomentumSmearing(0.0, 1e-2)
    v = math.sqrt(3) / 2
    g = amp.TimeGrid.linear(d.tau, 5, 11)
    prov = amp.rest_provider(d)
    carlo = amp.survival_velocity_frame(d, sm, v, "comoving", PhaseModel.CARLO_APPROX, g)
    corr = amp.survival_velocity_frame(d, sm, v, "fixed:0", PhaseModel.CORRECTED_APPROX, g)
    assert np.max(np.abs(carlo.probabilities - prov(g.t / 2))) < 0.02
    assert np.max(np.abs(corr.probabilities - prov(2 * g.t))) < 0.02


def test_exact_model_velocity_frame_small_grid():
    d = md.breit_wigner(1.0, 1e-2, 0.0)
    sm = amp.MomentumSmearing(0.0, 0.1)
    g = amp.TimeGrid.linear(d.tau, 2, 3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", amp.RegimeWarning)
        s = amp.survival_velocity_frame(d, sm, 0.6, "comoving", PhaseModel.EXACT, g)
    assert abs(s.probabilities[0] - 1) < 1e-8
    assert np.all(np.isfinite(s.amplitudes))


def test_regime_warning_and_domain():
    d = md.breit_wigner(1.0, 1e-4, 0.0)
    g = amp.TimeGrid.linear(d.tau, 1, 2)
    with pytest.warns(amp.RegimeWarning, match="sigma_p <= M/10"):
        amp.survival_velocity_frame(d, amp.MomentumSmearing(0, 0.5), 0.3, "comoving",
                                    PhaseModel.CORRECTED_APPROX, g)
    with pytest.raises(DomainError):
        amp.survival_velocity_frame(d, amp.MomentumSmearing(0, 1e-2), 1.0, grid=g)
    flags = amp.regime_flags(d, amp.MomentumSmearing(0, 1e-2))
    assert flags == {"gamma_below_sigma": True, "sigma_below_mass": True}


def test_failures_annotate_points(bw, monkeypatch):
    real = Q.fourier_transform_fast

    def flaky(fi, t, *a, **k):
        if t > 2 * bw.tau:
            raise ConvergenceError("forced", estimate=0.5 + 0j, error_bound=1e-3)
        return real(fi, t, *a, **k)

    monkeypatch.setattr(Q, "fourier_transform_fast", flaky)
    s = amp.survival_rest(bw, amp.TimeGrid.linear(bw.tau, 4, 5))
    assert sorted(s.notes) == [3, 4]
    assert s.amplitudes[4] == 0.5
    assert s.error_bounds[4] == pytest.approx(2 * 0.5 * 1e-3 + 1e-6)
    assert not s.wholly_failed


def test_oracle_engine_small_case():
    d = md.breit_wigner(1.0, 0.2, 0.0)
    g = amp.TimeGrid.linear(d.tau, 2, 3)
    f = amp.survival_momentum(d, 0.5, g, eps=1e-3)
    o = amp.survival_momentum(d, 0.5, g, eps=1e-3, engine="oracle")
    assert np.max(np.abs(f.amplitudes - o.amplitudes)) < 1e-6
    with pytest.raises(ParameterError):
        amp.survival_rest(d, g, engine="magic")


def test_series_csv(tmp_path, bw):
    s = amp.survival_rest(bw, amp.TimeGrid.linear(bw.tau, 1, 3))
    p = tmp_path / "s.csv"
    s.to_csv(p)
    rows = list(csv.reader(p.open()))
    assert tuple(rows[0]) == amp.SERIES_COLUMNS
    assert len(rows) == 4
    assert float(rows[2][1]) == pytest.approx(0.5)
    assert float(rows[1][4]) == s.probabilities[0]
    assert rows[1][6] == "rest"
