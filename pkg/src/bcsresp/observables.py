"""Physical outputs: Goldstone dispersion, compressibility and the Meissner kernel."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._parallel import pmap
from .equilibrium import (
    SystemParams,
    fermi,
    fermi_derivative,
    fermi_surface,
    inverse_coupling,
    number_density,
    quasiparticle_frame,
    radial_integral,
    solve_gap,
)
from .errors import NoRootBelowContinuum
from .gauge import full_kernel, reduced_pairing_stiffness
from .kinematics import FourMomentum
from .response import QUAD_RTOL, assemble_response_matrix

ROOT_RTOL = 1e-10
EDGE_FRACTION = 0.999
FD_STEP = 1e-4
NR_WARN_KF = 0.3

# ---------------------------------------------------------------------------
# Goldstone mode


@dataclass(frozen=True)
class DispersionPoint:
    q: float
    omega: float
    residual: float
    edge: float


@dataclass(frozen=True)
class SoundSpeedFit:
    """Least-squares slope through the origin plus a free-intercept check."""

    speed: float
    intercept: float
    points: tuple[DispersionPoint, ...]


def continuum_edge(params: SystemParams, q: float) -> float:
    """Lowest pair-breaking energy min_p (E-_{p+q} + E-_p).

    When both momenta can sit on the Fermi surface (q <= 2 k_F) this is 2 Delta;
    otherwise the symmetric placement |p| = |p+q| = q/2 minimizes the sum.
    """
    kf = fermi_surface(params)
    if kf is not None and params.mu > 0 and q <= 2.0 * kf:
        return 2.0 * params.delta
    fr = quasiparticle_frame(params, np.array([0.5 * q]))
    return 2.0 * float(min(fr.e_minus[0], fr.e_plus[0]))


def sound_speed_estimate(params: SystemParams) -> float:
    """Weak-coupling guess v_F / sqrt(3) with the relativistic v_F = k_F / mu."""
    kf = fermi_surface(params)
    if kf is None:
        return 1.0 / math.sqrt(3.0)
    return kf / abs(params.mu) / math.sqrt(3.0)


def pairing_stiffness(params: SystemParams, omega: float, q: float, rtol: float = QUAD_RTOL) -> complex:
    """Q~'22 at real frequency omega (zero broadening) and momentum q along z."""
    R = assemble_response_matrix(params, FourMomentum.real_axis(omega, (0.0, 0.0, q), 0.0), rtol=rtol)
    return reduced_pairing_stiffness(R)


def _mode_root(params: SystemParams, q: float, guess: float, rtol: float) -> DispersionPoint:
    edge = continuum_edge(params, q)
    top = EDGE_FRACTION * edge

    def h(w: float) -> float:
        return pairing_stiffness(params, w, q, rtol).real

    # walk outward from the weak-coupling guess, then fall back to a scan up to the edge
    trial = [f * guess * q for f in (0.8, 1.2)]
    grid = [0.0] + [w for w in trial if w < top] + list(np.linspace(0.0, top, 9)[1:])
    grid = sorted(set(grid))
    values: dict[float, float] = {}

    def val(w: float) -> float:
        if w not in values:
            values[w] = h(w)
        return values[w]

    lo_hi = None
    if len(trial) == 2 and trial[1] < top:
        a, b = trial
        if val(a) * val(b) < 0:
            lo_hi = (a, b)
    if lo_hi is None:
        prev = grid[0]
        for w in grid[1:]:
            if val(prev) * val(w) < 0:
                lo_hi = (prev, w)
                break
            prev = w
    if lo_hi is None:
        raise NoRootBelowContinuum(f"Q~'22 keeps one sign on [0, {top:.6g}] at q={q:.6g}")
    w = brentq(h, *lo_hi, xtol=ROOT_RTOL * lo_hi[1], rtol=4 * np.finfo(float).eps)
    return DispersionPoint(q, float(w), abs(pairing_stiffness(params, w, q, rtol)), edge)


def goldstone_dispersion(
    params: SystemParams, q_list, rtol: float = QUAD_RTOL, guess: float | None = None
) -> list[DispersionPoint]:
    """Sub-continuum zeros of Re Q~'22(omega, q), one per q."""
    if params.temperature > 0:
        raise ValueError("the real-axis root search needs T = 0 (no Landau damping at zero broadening)")
    c0 = sound_speed_estimate(params) if guess is None else guess
    return pmap(lambda q: _mode_root(params, float(q), c0, rtol), q_list)


def fit_sound_speed(points, n_smallest: int = 3) -> SoundSpeedFit:
    """c_s from a fit through the origin over the smallest momenta.

    The intercept comes from a separate two-parameter fit and measures how
    close omega(q -> 0) is to zero.
    """
    pts = sorted(points, key=lambda p: p.q)[:n_smallest]
    q = np.array([p.q for p in pts])
    w = np.array([p.omega for p in pts])
    speed = float(q @ w / (q @ q))
    intercept = float(np.polyfit(q, w, 1)[1]) if len(pts) >= 2 else float("nan")
    return SoundSpeedFit(speed, intercept, tuple(pts))


def default_mode_momenta(params: SystemParams, fractions=(0.01, 0.02, 0.03)) -> list[float]:
    """Momenta well inside the linear regime: q = f * Delta / c_est."""
    c0 = sound_speed_estimate(params)
    return [f * params.delta / c0 for f in fractions]


def goldstone_gap(params: SystemParams, rtol: float = QUAD_RTOL) -> float:
    """|Q~'22(0, 0)| relative to the 2/g it cancels against."""
    R = assemble_response_matrix(params, FourMomentum(0.0, (0.0, 0.0, 0.0)), rtol=rtol)
    return abs(reduced_pairing_stiffness(R)) / abs(2.0 * inverse_coupling(params))


# ---------------------------------------------------------------------------
# compressibility


@dataclass(frozen=True)
class CompressibilityReport:
    dn_dmu_eos: float
    dn_dmu_response: float
    dn_dmu_bare: float
    density: float
    kappa: float
    rel_diff: float


@dataclass(frozen=True)
class StaticSums:
    """S3 = sum(1/E-^3 + 1/E+^3) and X = sum(xi-/E-^3 - xi+/E+^3)."""

    s3: float
    x: float

    def displays(self, delta: float) -> dict[str, float]:
        """Static q -> 0 limits of Q00_33, Q0_13 and Q~11 written through S3 and X."""
        return {"q33_00": -2.0 * delta ** 2 * self.s3, "q13_0": -2.0 * delta * self.x,
                "q_tilde11": 2.0 * delta ** 2 * self.s3}


def static_sums(params: SystemParams) -> StaticSums:
    if params.delta <= 0:
        raise ValueError("the static sums need delta > 0")

    def integrand(fr):
        return np.stack(
            [fr.e_minus ** -3 + fr.e_plus ** -3, fr.xi_minus / fr.e_minus ** 3 - fr.xi_plus / fr.e_plus ** 3],
            axis=-1,
        )

    val, _ = radial_integral(params, integrand)
    return StaticSums(float(val[0]), float(val[1]))


def _require_zero_temperature(params: SystemParams) -> None:
    if params.temperature != 0:
        raise ValueError("the closed-form compressibility holds at T = 0")


def compressibility_eos(params: SystemParams) -> float:
    """dn/dmu at fixed coupling from the differentiated number and gap equations."""
    _require_zero_temperature(params)
    s = static_sums(params)
    return 2.0 * params.delta ** 2 * s.s3 + 2.0 * s.x ** 2 / s.s3


def compressibility_finite_difference(params: SystemParams, h: float = FD_STEP) -> float:
    """(n(mu+h) - n(mu-h)) / 2h with the gap re-solved at fixed g on both sides."""
    if params.g is None:
        raise ValueError("the finite-difference route needs a fixed coupling g")
    h = h * params.m
    dens = []
    for mu in (params.mu + h, params.mu - h):
        state = solve_gap(params.m, mu, params.g, params.lambda_cut, params.temperature)
        dens.append(number_density(state))
    return (dens[0] - dens[1]) / (2.0 * h)


def static_density_kernel(params: SystemParams, collective: bool = True, rtol: float = QUAD_RTOL) -> float:
    """K00(0, q -> 0) = Q00_33 - Q0_13 Q0_31 / Q~11 from the response machinery at q = 0.

    The amplitude channel carries the whole collective correction because
    Q0_23 and Q12 vanish at zero frequency.
    """
    R = assemble_response_matrix(params, FourMomentum(0.0, (0.0, 0.0, 0.0)), rtol=rtol)
    k00 = R.q33[0, 0]
    if collective:
        k00 = k00 - R.q13[0] * R.q31[0] / R.q_tilde11
    return float(k00.real)


def compressibility_response(params: SystemParams, collective: bool = True) -> float:
    """dn/dmu = -K00(0, q -> 0)."""
    _require_zero_temperature(params)
    return -static_density_kernel(params, collective)


def compressibility_report(params: SystemParams) -> CompressibilityReport:
    eos = compressibility_eos(params)
    resp = compressibility_response(params)
    bare = compressibility_response(params, collective=False)
    n = number_density(params)
    return CompressibilityReport(eos, resp, bare, n, resp / n ** 2, abs(resp - eos) / abs(eos))


# ---------------------------------------------------------------------------
# Meissner kernel and superfluid density


@dataclass(frozen=True)
class MeissnerReport:
    """Angular-averaged q -> 0 static kernel pieces, each multiplying delta^ij.

    ``k_l`` and ``k_t`` are the p^i p^j and (delta^ij - p^i p^j) structures
    after vacuum subtraction; ``n_s`` uses the nonrelativistic London form and
    ``n_s_kernel`` = (m/2)(k_l + k_t) keeps all relativistic corrections.
    """

    k_l: float
    k_t: float
    n_s: float
    n_s_kernel: float
    n_nr: float
    n_total: float
    delta_kt_ratio: float


def _difference_quotient(e1, e2, temperature: float):
    """(f(E1) - f(E2)) / (E1 - E2) with the f'(E) limit for degenerate energies."""
    diff = e1 - e2
    close = np.abs(diff) <= 1e-12 * np.maximum(np.abs(e1), 1e-300)
    safe = np.where(close, 1.0, diff)
    mid = 0.5 * (e1 + e2)
    return np.where(close, fermi_derivative(mid, temperature), (fermi(e1, temperature) - fermi(e2, temperature)) / safe)


def _transverse_bracket(params: SystemParams, fr) -> np.ndarray:
    T = params.temperature
    em, ep = fr.e_minus, fr.e_plus
    coh = (fr.xi_plus * fr.xi_minus - params.delta ** 2) / (ep * em)
    inter = (1.0 + coh) * (fermi(em, T) + fermi(ep, T) - 1.0) / (em + ep)
    intra = (1.0 - coh) * _difference_quotient(em, ep, T)
    return inter + intra


def meissner_pieces(params: SystemParams) -> tuple[float, float]:
    """(k_l, k_t) before vacuum subtraction, angular averaged."""
    T = params.temperature

    def integrand(fr):
        phat2 = fr.p ** 2 / fr.eps ** 2 / 3.0
        kl = 4.0 * phat2 * (fermi_derivative(fr.e_minus, T) + fermi_derivative(fr.e_plus, T))
        kt = 4.0 * (1.0 - phat2) * _transverse_bracket(params, fr)
        return np.stack([kl, kt], axis=-1)

    val, _ = radial_integral(params, integrand, rtol=1e-10, atol=1e-300)
    return float(val[0]), float(val[1])


def vacuum_state(params: SystemParams) -> SystemParams:
    """The subtraction point T = Delta = 0, mu = m with the same cutoff."""
    return params.with_(temperature=0.0, delta=0.0, mu=params.m, g=None)


def nonrelativistic_density(params: SystemParams) -> float:
    """n^NR = 2 sum_p [u-^2 f(E-) + v-^2 f(-E-)]."""
    T = params.temperature

    def integrand(fr):
        return 2.0 * (fr.u2_minus * fermi(fr.e_minus, T) + fr.v2_minus * fermi(-fr.e_minus, T))

    return float(radial_integral(params, integrand, rtol=1e-10, atol=1e-300)[0])


def thermal_depletion(params: SystemParams) -> float:
    """(1 / 3 pi^2 m) int dp p^4 (-df/dE-), which vanishes at T = 0."""
    T = params.temperature
    if T == 0:
        return 0.0

    def integrand(fr):
        # radial_integral supplies p^2 / 2 pi^2
        return 2.0 * fr.p ** 2 * (-fermi_derivative(fr.e_minus, T)) / (3.0 * params.m)

    return float(radial_integral(params, integrand, rtol=1e-10, atol=1e-300)[0])


def transverse_collective_ratio(params: SystemParams, q: float | None = None, rtol: float = QUAD_RTOL) -> float:
    """|delta K_T| / |K_T| from the full static kernel at small q along z."""
    if q is None:
        kf = fermi_surface(params)
        q = 1e-2 * (params.delta / (kf / params.mu) if kf else params.m)
    R = assemble_response_matrix(params, FourMomentum(0.0, (0.0, 0.0, q)), rtol=rtol)
    K = full_kernel(R)
    dk_t = 0.5 * (K.dk[1, 1] + K.dk[2, 2])
    k_t = 0.5 * (K.k[1, 1] + K.k[2, 2])
    return float(abs(dk_t) / abs(k_t))


def meissner_kernel(params: SystemParams, with_collective_check: bool = True) -> MeissnerReport:
    kl, kt = meissner_pieces(params)
    kl0, kt0 = meissner_pieces(vacuum_state(params))
    kl, kt = kl - kl0, kt - kt0
    n_nr = nonrelativistic_density(params)
    n_s = n_nr - thermal_depletion(params)
    ratio = transverse_collective_ratio(params) if with_collective_check else float("nan")
    return MeissnerReport(kl, kt, n_s, 0.5 * params.m * (kl + kt), n_nr, number_density(params), ratio)


def london_current(params: SystemParams, A, report: MeissnerReport | None = None) -> np.ndarray:
    """J = -(2/m) n_s A for a transverse vector potential."""
    kf = fermi_surface(params)
    if kf is None or kf / params.m > NR_WARN_KF:
        warnings.warn("London form assumes the nonrelativistic regime (k_F/m < 0.3)", stacklevel=2)
    if report is None:
        report = meissner_kernel(params, with_collective_check=False)
    return -(2.0 / params.m) * report.n_s * np.asarray(A, dtype=float)
