from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcsresp import dirac_nambu as dn
from bcsresp._groupings import DISPLAY_ERRATA, displayed_groupings
from bcsresp.equilibrium import SystemParams
from bcsresp.kinematics import FourMomentum
from bcsresp.response import (
    CHANNELS,
    FREQUENCY_PARITY,
    INDEX_PARITY,
    OPERATORS,
    SPATIAL_PARITY,
    assemble_response_matrix,
    coherence_coefficients,
    coherence_set,
    qij,
    response_integrand,
)
from bcsresp.selftest import grouping_from_entries

STATE = SystemParams(1.0, 1.2, 0.1, None, 10.0, 0.02)
vec3 = st.lists(st.floats(-3, 3), min_size=3, max_size=3).map(np.array)
small_q = st.lists(st.floats(-0.8, 0.8), min_size=3, max_size=3).map(np.array)


def test_coherence_coefficients_match_explicit_traces():
    rng = np.random.default_rng(7)
    p = rng.normal(size=(100, 3)) * 1.5
    q = np.array([0.2, -0.4, 0.3])
    coef = coherence_coefficients(STATE, p, q)
    ops_k = {k: v for k, v, _ in dn.spectral_operators(STATE, p + q).items()}
    ops_p = {k: v for k, v, _ in dn.spectral_operators(STATE, p).items()}
    worst = 0.0
    for x, nx in enumerate(OPERATORS):
        for y, ny in enumerate(OPERATORS):
            for i in range(6):
                for j in range(6):
                    ref = dn.coherence_trace(ops_k[nx], ops_p[ny], i, j)
                    worst = max(worst, float(np.abs(coef[x, y, i, j] - ref).max()))
    assert worst < 1e-10


def _mismatched_groupings(p, q, corrected):
    bad = set()
    for ch in CHANNELS:
        entries = coherence_set(STATE, p, q, ch).entries
        for label, value in displayed_groupings(STATE, p, q, ch, corrected=corrected).items():
            ref = np.asarray(grouping_from_entries(entries, label))
            value = np.asarray(value)
            mask = ~np.isnan(value)
            if np.abs(value[mask] - np.broadcast_to(ref, value.shape)[mask]).max() > 1e-10:
                bad.add((ch, label))
    return bad


@pytest.mark.parametrize("seed", range(5))
def test_displayed_groupings_disagree_only_at_listed_errata(seed):
    rng = np.random.default_rng(seed)
    p, q = rng.normal(size=3), rng.normal(size=3) * 0.5
    assert _mismatched_groupings(p, q, corrected=False) == set(DISPLAY_ERRATA)
    assert _mismatched_groupings(p, q, corrected=True) == set()


def test_pairing_mixing_coefficients_are_imaginary():
    rng = np.random.default_rng(3)
    coef = coherence_coefficients(STATE, rng.normal(size=(50, 3)), np.array([0.1, 0.3, -0.2]))
    assert np.abs(coef[:, :, 0, 1].real).max() < 1e-14
    assert np.abs(coef[:, :, 0, 1].imag).max() > 1e-3


@given(vec3)
def test_amplitude_coherence_at_zero_transfer(p):
    cs = coherence_set(STATE, p, np.zeros(3), "11")
    eps = np.sqrt(p @ p + 1.0)
    e2 = (eps - STATE.mu) ** 2 + STATE.delta ** 2
    assert complex(cs.entries["u-u-"]) == pytest.approx(2 * STATE.delta ** 2 / e2, abs=1e-12)


def _rel(a, b):
    return np.abs(a - b).max() / max(np.abs(a).max(), 1e-12)


@settings(max_examples=40, deadline=None)
@given(vec3, small_q, st.integers(-4, 4))
def test_integrand_four_momentum_odevity(p, q, l):
    Q = FourMomentum.matsubara_point(l, STATE.temperature, tuple(q))
    a = response_integrand(STATE, p.reshape(1, 3), Q)[0]
    # shifting the loop momentum by q swaps the two propagators
    shifted = response_integrand(STATE, (p + q).reshape(1, 3), Q.negated())[0]
    assert _rel(a, INDEX_PARITY * shifted) < 1e-9
    assert _rel(a, shifted.T) < 1e-9
    inverted = response_integrand(STATE, (-p).reshape(1, 3), Q.negated())[0]
    assert _rel(a, INDEX_PARITY * inverted) < 1e-9


@settings(max_examples=40, deadline=None)
@given(vec3, small_q, st.integers(-4, 4))
def test_integrand_loop_reflection(p, q, l):
    Q = FourMomentum.matsubara_point(l, STATE.temperature, tuple(q))
    a = response_integrand(STATE, p.reshape(1, 3), Q)[0]
    b = response_integrand(STATE, (-p - q).reshape(1, 3), Q)[0]
    assert _rel(a, b) < 1e-9


@settings(max_examples=40, deadline=None)
@given(vec3, small_q, st.integers(-4, 4))
def test_integrand_spatial_odevity(p, q, l):
    Q = FourMomentum.matsubara_point(l, STATE.temperature, tuple(q))
    a = response_integrand(STATE, p.reshape(1, 3), Q)[0]
    b = response_integrand(STATE, (-p).reshape(1, 3), Q.reflected())[0]
    assert _rel(a, SPATIAL_PARITY * b) < 1e-9


@settings(max_examples=30, deadline=None)
@given(vec3, small_q)
def test_pair_current_mixing_vanishes_without_gap(p, q):
    normal = SystemParams(1.0, 1.2, 0.0, None, 10.0, 0.02)
    Q = FourMomentum.matsubara_point(1, normal.temperature, tuple(q))
    mat = response_integrand(normal, p.reshape(1, 3), Q)[0]
    assert np.abs(mat[:2, 2:]).max() < 1e-12 * max(np.abs(mat).max(), 1.0)


def test_frequency_odd_entries_vanish_at_zero_frequency(hot_state):
    Q = FourMomentum.matsubara_point(0, hot_state.temperature, (0.1, 0.2, -0.15))
    mat = assemble_response_matrix(hot_state, Q).matrix
    odd = FREQUENCY_PARITY < 0
    assert np.abs(mat[odd]).max() < 1e-9 * np.abs(mat).max()
    assert abs(mat[0, 1]) < 1e-9 * np.abs(mat).max()


def test_symmetry_fill_equals_direct_integration(sample_matrix, hot_state):
    direct = assemble_response_matrix(hot_state, sample_matrix.Q, fill="direct").matrix
    assert np.abs(direct - sample_matrix.matrix).max() < 1e-9 * np.abs(direct).max()


def test_channel_accessor_shapes(hot_state):
    Q = FourMomentum.matsubara_point(1, hot_state.temperature, (0.0, 0.0, 0.2))
    assert isinstance(qij(hot_state, Q, "12"), complex)
    assert qij(hot_state, Q, "13").shape == (4,)
    assert qij(hot_state, Q, "33").shape == (4, 4)
    with pytest.raises(ValueError):
        qij(hot_state, Q, "44")


def test_assemble_rejects_unknown_fill(hot_state, gwi_points):
    with pytest.raises(ValueError):
        assemble_response_matrix(hot_state, gwi_points[0], fill="guess")
