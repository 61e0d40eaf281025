"""Mean-field equilibrium of the relativistic BCS superfluid.

Momentum sums use the convention sum_p -> int d^3p/(2 pi)^3 restricted to
|p| < lambda_cut, so a radial integral carries the prefactor 1/(2 pi^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from .errors import BracketFailure, SingularIntegrand
from .quadrature import adaptive_integrate, graded_breaks

QUAD_RTOL = 1e-12
DELTA_MIN = 1e-12
BISECTION_STEPS = 60
GAP_RTOL = 1e-8
BRACKET_RTOL = 1e-6


@dataclass(frozen=True)
class SystemParams:
    m: float
    mu: float
    delta: float
    g: float | None
    lambda_cut: float
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if not self.m > 0:
            raise ValueError("m must be positive")
        if not self.lambda_cut > 0:
            raise ValueError("lambda_cut must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.delta < 0:
            raise ValueError("delta must be non-negative")

    def with_(self, **kw) -> "SystemParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class QuasiparticleFrame:
    p: np.ndarray
    eps: np.ndarray
    xi_minus: np.ndarray
    xi_plus: np.ndarray
    e_minus: np.ndarray
    e_plus: np.ndarray
    u2_minus: np.ndarray
    v2_minus: np.ndarray
    u2_plus: np.ndarray
    v2_plus: np.ndarray


def _u2(xi: np.ndarray, e: np.ndarray) -> np.ndarray:
    # at delta = 0 and xi = 0 the ratio is 0/0; theta(xi) with theta(0) = 1/2
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(e > 0, xi / np.where(e > 0, e, 1.0), 0.0)
    return 0.5 * (1.0 + r)


def quasiparticle_frame(params: SystemParams, p, offset=None) -> QuasiparticleFrame:
    """Quasiparticle data at momenta ``p``.

    ``offset`` optionally supplies p - k_F exactly, which keeps xi accurate
    when the gap is many orders of magnitude below the Fermi energy.
    """
    p = np.asarray(p, dtype=float)
    eps = np.sqrt(p * p + params.m ** 2)
    kf = fermi_surface(params)
    if kf is not None and offset is None:
        offset = p - kf
    if kf is not None and params.mu > 0:
        # eps - mu near the Fermi surface without cancellation
        xm = offset * (p + kf) / (eps + params.mu)
    else:
        xm = eps - params.mu
    if kf is not None and params.mu < 0:
        xp = offset * (p + kf) / (eps - params.mu)
    else:
        xp = eps + params.mu
    d2 = params.delta ** 2
    em = np.sqrt(xm * xm + d2)
    ep = np.sqrt(xp * xp + d2)
    u2m = _u2(xm, em)
    u2p = _u2(xp, ep)
    return QuasiparticleFrame(p, eps, xm, xp, em, ep, u2m, 1.0 - u2m, u2p, 1.0 - u2p)


def fermi(e, temperature: float):
    """Fermi-Dirac occupation; exact step with f(0) = 1/2 at T = 0."""
    e = np.asarray(e, dtype=float)
    if temperature == 0:
        return np.where(e < 0, 1.0, np.where(e > 0, 0.0, 0.5))
    return expit(-e / temperature)


def fermi_derivative(e, temperature: float):
    """df/dE; identically zero at T = 0 away from E = 0."""
    e = np.asarray(e, dtype=float)
    if temperature == 0:
        return np.zeros_like(e)
    f = expit(-e / temperature)
    return -f * (1.0 - f) / temperature


def one_minus_2f(e, temperature: float):
    """1 - 2 f(E) = tanh(E / 2T), evaluated without cancellation."""
    e = np.asarray(e, dtype=float)
    if temperature == 0:
        return np.sign(e)
    return np.tanh(e / (2.0 * temperature))


def fermi_surface(params: SystemParams) -> float | None:
    """Momentum where a branch crosses zero energy (|mu| > m), else None."""
    if abs(params.mu) <= params.m:
        return None
    return math.sqrt(params.mu ** 2 - params.m ** 2)


def radial_breaks(params: SystemParams, extra: tuple[float, ...] = (), shift: float = 0.0) -> np.ndarray:
    """Panel boundaries on [0, lambda_cut] resolving the Fermi-surface kink.

    With ``shift`` the boundaries are returned as p - shift, built directly in
    the shifted variable so that the grading around k_F keeps full precision.
    """
    lo, hi = -shift, params.lambda_cut - shift
    kf = fermi_surface(params)
    pts = [np.array([lo, hi])]
    if kf is not None:
        vf = kf / abs(params.mu)
        width = max(params.delta, params.temperature, 1e-14 * params.m) / vf
        center = 0.0 if shift == kf else kf - shift
        pts.append(graded_breaks(center, width, lo, hi))
    for x in extra:
        if lo < x - shift < hi:
            pts.append(np.array([x - shift]))
    # coarse uniform panels keep the vacuum region well sampled
    pts.append(np.linspace(lo, hi, 9))
    return np.unique(np.concatenate(pts))


def radial_integral(params: SystemParams, integrand, rtol: float = QUAD_RTOL, atol: float = 0.0):
    """(1/2 pi^2) int_0^Lambda dp p^2 integrand(frame); returns (value, error)."""

    # integrate in t = p - k_F so that nodes near the Fermi surface are exact
    kf = fermi_surface(params) or 0.0

    def f(t):
        p = t + kf
        fr = quasiparticle_frame(params, p, offset=t if kf else None)
        val = np.asarray(integrand(fr))
        w = p * p / (2.0 * math.pi ** 2)
        return val * w.reshape(w.shape + (1,) * (val.ndim - 1))

    return adaptive_integrate(f, radial_breaks(params, shift=kf), rtol=rtol, atol=atol)


def _occupation(u2, v2, e, temperature):
    return u2 * fermi(e, temperature) + v2 * fermi(-e, temperature)


def number_density_with_error(params: SystemParams, rtol: float = QUAD_RTOL) -> tuple[float, float]:
    T = params.temperature

    def integrand(fr: QuasiparticleFrame):
        return 4.0 * (
            _occupation(fr.u2_minus, fr.v2_minus, fr.e_minus, T)
            - _occupation(fr.u2_plus, fr.v2_plus, fr.e_plus, T)
        )

    val, err = radial_integral(params, integrand, rtol=rtol, atol=1e-16 * params.lambda_cut ** 3)
    return float(val), err


def number_density(params: SystemParams) -> float:
    """Net fermion-minus-antifermion density."""
    return number_density_with_error(params)[0]


def gap_rhs(params: SystemParams, rtol: float = QUAD_RTOL) -> float:
    """Right-hand side of the gap equation, i.e. the self-consistent 1/g."""
    T = params.temperature
    if params.delta == 0 and T == 0:
        kf = fermi_surface(params)
        if kf is not None and kf < params.lambda_cut:
            raise SingularIntegrand("gap equation diverges logarithmically at delta=0 with a Fermi surface")

    def integrand(fr: QuasiparticleFrame):
        out = np.zeros_like(fr.p)
        for xi, e in ((fr.xi_minus, fr.e_minus), (fr.xi_plus, fr.e_plus)):
            safe = np.where(e > 0, e, 1.0)
            term = np.where(e > 0, one_minus_2f(e, T) / safe, 0.0)
            out = out + term
        return out

    val, _ = radial_integral(params, integrand, rtol=rtol)
    return float(val)


def inverse_coupling(params: SystemParams) -> float:
    """1/g, taken from params.g when given, otherwise from the gap equation."""
    if params.g is not None:
        return 1.0 / params.g
    return gap_rhs(params)


def solve_gap(m: float, mu: float, g: float, lambda_cut: float, temperature: float = 0.0) -> SystemParams:
    """Self-consistent gap at fixed coupling; returns delta=0 for the normal state."""
    if not g > 0:
        raise BracketFailure("coupling g must be positive")
    base = SystemParams(m=m, mu=mu, delta=0.0, g=g, lambda_cut=lambda_cut, temperature=temperature)
    target = 1.0 / g

    def rhs(log_d, rtol=QUAD_RTOL):
        return gap_rhs(base.with_(delta=math.exp(log_d)), rtol=rtol)

    lo = math.log(DELTA_MIN * m)
    hi = math.log(10.0 * lambda_cut)
    # the bracket ends only need the sign of rhs - 1/g
    if rhs(lo, BRACKET_RTOL) < target:
        return base
    if rhs(hi, BRACKET_RTOL) > target:
        raise BracketFailure("gap exceeds 10*lambda_cut; coupling too strong for the bracket")
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if rhs(mid) > target:
            lo = mid
        else:
            hi = mid
    return base.with_(delta=math.exp(0.5 * (lo + hi)))


def gap_residual(params: SystemParams) -> float:
    """|g * gap_rhs - 1|."""
    return abs(params.g * gap_rhs(params) - 1.0)


def coupling_for(params: SystemParams) -> SystemParams:
    """Return params with g fixed by the gap equation at the given delta."""
    return params.with_(g=1.0 / gap_rhs(params))


def solve_mu(m: float, delta: float, g: float, lambda_cut: float, temperature: float = 0.0) -> SystemParams:
    """Chemical potential that makes (delta, g) self-consistent, searched on mu >= 0."""
    from scipy.optimize import brentq

    base = SystemParams(m=m, mu=0.0, delta=delta, g=g, lambda_cut=lambda_cut, temperature=temperature)
    target = 1.0 / g

    def h(mu):
        return gap_rhs(base.with_(mu=mu)) - target

    top = math.sqrt(lambda_cut ** 2 + m ** 2)
    grid = np.linspace(0.0, top, 65)
    vals = [h(x) for x in grid]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0:
            return base.with_(mu=float(a))
        if fa * fb < 0:
            return base.with_(mu=brentq(h, a, b, xtol=1e-14, rtol=1e-14))
    raise BracketFailure("no chemical potential in [0, sqrt(lambda^2+m^2)] satisfies the gap equation")


def fermi_momentum(params: SystemParams, n: float | None = None) -> tuple[float, float]:
    """(k_F, eps_F) from n = 2 k_F^3 / (3 pi^2)."""
    if n is None:
        n = number_density(params)
    if n < 0:
        raise ValueError("density must be non-negative")
    kf = (1.5 * math.pi ** 2 * n) ** (1.0 / 3.0)
    return kf, math.sqrt(kf * kf + params.m ** 2)
