from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcsresp import dirac_nambu as dn
from bcsresp.equilibrium import SystemParams
from bcsresp.errors import PoleProximity

vec3 = st.lists(st.floats(-4, 4), min_size=3, max_size=3).map(np.array)
params_st = st.builds(
    lambda mu, d: SystemParams(1.0, mu, d, None, 10.0),
    st.floats(-2.5, 2.5),
    st.floats(0.01, 0.8),
)


def test_algebra_identities_hold():
    res = dn.algebra_residuals()
    assert max(res.values()) < 1e-14
    assert {"clifford", "gamma5_product", "c_conjugation"} <= set(res)


def test_vertex_set_hermitian_after_gamma0():
    # gamma0_hat Sigma_i is hermitian for every generalized vertex
    for v in dn.VERTICES:
        w = dn.GAMMA0_HAT @ v
        assert np.abs(w - w.conj().T).max() < 1e-15


@settings(max_examples=60, deadline=None)
@given(params_st, vec3, st.floats(0.05, 5.0))
def test_closed_form_propagator_matches_inverse(params, p, w):
    z = 1j * w
    closed = dn.propagator_closed_form(params, p, z)
    numeric = dn.propagator_numeric(params, p, z)
    assert np.abs(closed - numeric).max() < 1e-10 * max(1.0, np.abs(numeric).max())


@settings(max_examples=60, deadline=None)
@given(params_st, vec3)
def test_spectral_operators_complete_and_diagonalize(params, p):
    ops = dn.spectral_operators(params, p)
    total = sum(op for _, op, _ in ops.items())
    assert np.abs(total - dn.I8).max() < 1e-12
    e_hat = dn.energy_operator(params, p)
    for _, op, e in ops.items():
        assert np.abs(e_hat @ op - e * op).max() < 1e-11 * (1 + abs(e))
        assert np.abs(op @ op - op).max() < 1e-11


@settings(max_examples=40, deadline=None)
@given(params_st, vec3, st.floats(0.05, 5.0))
def test_normal_and_anomalous_blocks(params, p, w):
    # G and F fill the particle-particle and particle-hole Nambu blocks
    g, f = dn.normal_and_anomalous(params, p, 1j * w)
    full = dn.propagator_closed_form(params, p, 1j * w)
    assert np.abs(full[:4, :4] - g).max() < 1e-10 * max(1.0, np.abs(g).max())
    assert np.abs(full[:4, 4:] - f).max() < 1e-10 * max(1.0, np.abs(f).max())


def test_pole_proximity_raises():
    params = SystemParams(1.0, 1.2, 0.1, None, 10.0)
    p = np.array([0.0, 0.0, 0.4])
    e = dn.spectral_operators(params, p).e_minus
    with pytest.raises(PoleProximity):
        dn.propagator_closed_form(params, p, complex(e))


def test_matsubara_oracle_needs_temperature():
    with pytest.raises(ValueError):
        dn.response_integrand_oracle(SystemParams(1.0, 1.2, 0.1, None, 10.0), [0, 0, 0.5], [0, 0, 0.1], 0.0)


def test_fermion_frequencies_symmetric():
    wn = dn.fermion_frequencies(0.1, 5)
    assert len(wn) == 12
    assert wn[0] == pytest.approx(-11 * np.pi * 0.1)
    assert np.allclose(wn + wn[::-1], 0.0)
