from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bcsresp import observables as ob
from bcsresp.equilibrium import SystemParams, coupling_for
from bcsresp.errors import NoRootBelowContinuum
from bcsresp.kinematics import FourMomentum
from bcsresp.response import assemble_response_matrix, pair_breaking_edge


def nr_state(kf_over_m: float, gap_fraction: float = 0.1) -> SystemParams:
    mu = math.sqrt(1.0 + kf_over_m ** 2)
    return coupling_for(SystemParams(1.0, mu, gap_fraction * (mu - 1.0), None, 10.0, 0.0))


@pytest.mark.parametrize("mu", [0.8, 1.2, 3.0])
@pytest.mark.parametrize("q", [0.0, 0.3, 1.3, 2.0, 5.0])
def test_continuum_edge_matches_grid_search(mu, q):
    p = SystemParams(1.0, mu, 0.1, None, 10.0)
    assert ob.continuum_edge(p, q) == pytest.approx(pair_breaking_edge(p, q), rel=1e-6)


def test_continuum_edge_and_estimate(cold_state):
    assert ob.continuum_edge(cold_state, 0.1) == 2 * cold_state.delta
    kf = math.sqrt(cold_state.mu ** 2 - 1.0)
    assert ob.continuum_edge(cold_state, 3 * kf) > 2 * cold_state.delta
    assert ob.sound_speed_estimate(cold_state) == pytest.approx(kf / cold_state.mu / math.sqrt(3))


@given(st.floats(0.1, 3.0), st.floats(-1e-3, 1e-3))
def test_fit_through_origin_recovers_slope(c, noise):
    pts = [ob.DispersionPoint(q, c * q + noise * q * q, 0.0, 1.0) for q in (0.01, 0.02, 0.03, 0.5)]
    fit = ob.fit_sound_speed(pts)
    assert fit.speed == pytest.approx(c, abs=1e-4)
    assert abs(fit.intercept) < 1e-5
    assert len(fit.points) == 3


def test_real_axis_search_refuses_finite_temperature(hot_state):
    with pytest.raises(ValueError):
        ob.goldstone_dispersion(hot_state, [0.01])


def test_no_mode_above_continuum(cold_state):
    # far outside the linear regime the phase mode has merged into the continuum
    with pytest.raises(NoRootBelowContinuum):
        ob.goldstone_dispersion(cold_state, [5.0])


def test_mode_speed_grows_with_fermi_momentum():
    speeds = []
    for x in (0.1, 1.0, 10.0):
        p = nr_state(x, 0.01) if x < 5 else coupling_for(
            SystemParams(1.0, math.sqrt(1 + x * x), 0.01 * math.sqrt(1 + x * x), None, 3 * x, 0.0))
        q = ob.default_mode_momenta(p, (0.01,))
        speeds.append(ob.goldstone_dispersion(p, q)[0].omega / q[0])
    assert speeds[0] < speeds[1] < speeds[2] < 1 / math.sqrt(3)


def test_goldstone_gap_closed(cold_state, hot_state):
    assert ob.goldstone_gap(cold_state) < 1e-8
    assert ob.goldstone_gap(hot_state) < 1e-8


def test_static_sums_match_response_entries(cold_state):
    R = assemble_response_matrix(cold_state, FourMomentum(0.0, (0.0, 0.0, 0.0)))
    disp = ob.static_sums(cold_state).displays(cold_state.delta)
    assert R.q33[0, 0].real == pytest.approx(disp["q33_00"], rel=1e-8)
    assert R.q13[0].real == pytest.approx(disp["q13_0"], rel=1e-8)
    assert R.q_tilde11.real == pytest.approx(disp["q_tilde11"], rel=1e-8)


def test_compressibility_needs_the_amplitude_channel(cold_state):
    rep = ob.compressibility_report(cold_state)
    assert rep.rel_diff < 1e-8
    assert abs(rep.dn_dmu_bare - rep.dn_dmu_eos) > 0.5 * rep.dn_dmu_eos
    assert rep.kappa == pytest.approx(rep.dn_dmu_response / rep.density ** 2)


def test_compressibility_routes_reject_bad_input(hot_state):
    with pytest.raises(ValueError):
        ob.compressibility_eos(hot_state)
    with pytest.raises(ValueError):
        ob.compressibility_finite_difference(hot_state.with_(g=None))
    with pytest.raises(ValueError):
        ob.static_sums(hot_state.with_(delta=0.0))


def test_superfluid_density_and_transverse_kernel():
    p = nr_state(0.1)
    rep = ob.meissner_kernel(p)
    assert rep.n_s == pytest.approx(rep.n_nr, rel=1e-12)
    # the antiparticle branch and relativistic coherence factors shift the total slightly
    assert rep.n_total == pytest.approx(2 * rep.n_nr, rel=5e-3)
    # relativistic transverse kernel against the London normalization 2 n / m
    assert rep.k_t == pytest.approx(2 * rep.n_nr / p.m, rel=0.02)
    assert rep.delta_kt_ratio < 1e-8


def test_thermal_depletion_positive():
    p = nr_state(0.1)
    warm = p.with_(temperature=0.3 * p.delta)
    assert ob.thermal_depletion(p) == 0.0
    assert ob.thermal_depletion(warm) > 0.0


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_london_current_linear(a, b):
    p = nr_state(0.1)
    rep = ob.MeissnerReport(0.0, 0.0, 3.0, 0.0, 3.0, 6.0, float("nan"))
    x, y = np.array([1.0, 0.0, 0.5]), np.array([0.0, 2.0, -1.0])
    lhs = ob.london_current(p, a * x + b * y, rep)
    rhs = a * ob.london_current(p, x, rep) + b * ob.london_current(p, y, rep)
    assert np.allclose(lhs, rhs, atol=1e-12)
    assert np.allclose(ob.london_current(p, x, rep), -6.0 * x)


def test_london_current_warns_outside_nonrelativistic_regime(cold_state):
    rep = ob.MeissnerReport(0.0, 0.0, 1.0, 0.0, 1.0, 2.0, float("nan"))
    with pytest.warns(UserWarning):
        ob.london_current(cold_state, [1.0, 0.0, 0.0], rep)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ob.london_current(nr_state(0.1), [1.0, 0.0, 0.0], rep)
