"""Generalized Ward identities, induced gap fluctuations and the gauge-invariant kernel.

Index conventions follow the response matrix: rows and columns run over
(D1, D2, A^0, A^1, A^2, A^3), so the electromagnetic blocks carry upper
Lorentz indices and are contracted with the covariant q_mu = (z, -q).

With a hard momentum cutoff the loop integrals are not invariant under a
shift of the loop momentum, so each identity picks up a surface term.
:func:`cutoff_surface_terms` evaluates those terms exactly from
one-dimensional shell integrals; ``gwi_residuals(..., subtract_surface=True)``
removes them, which isolates the quadrature error of the response matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibrium import SystemParams, one_minus_2f, quasiparticle_frame
from .errors import CollectiveModePole
from .kinematics import FourMomentum
from .quadrature import adaptive_integrate
from .response import ResponseMatrix, _routing_shell

POLE_RTOL = 1e-12
# columns whose terms all vanish by symmetry are judged against the matrix scale
SCALE_FLOOR = 1e-10


@dataclass(frozen=True)
class GeneralizedMomentum:
    """q-hat = (0, 2i Delta, q_mu) acting on the (D1, D2, A_mu) rows."""

    components: np.ndarray

    @classmethod
    def build(cls, Q: FourMomentum, delta: float) -> "GeneralizedMomentum":
        c = np.zeros(6, dtype=complex)
        c[1] = 2j * delta
        c[2:] = Q.covariant()
        return cls(c)

    def contract(self, column: np.ndarray) -> complex:
        return complex(self.components @ column)


# ---------------------------------------------------------------------------
# cutoff surface terms


def _current_tadpole_radial(params: SystemParams, r: np.ndarray) -> np.ndarray:
    """g(r) with t^i(p) = p^i g(|p|), the equal-time expectation of the sigma_3 gamma^i vertex."""
    fr = quasiparticle_frame(params, r)
    T = params.temperature
    inner = np.zeros_like(fr.eps)
    for xi, e in ((fr.xi_minus, fr.e_minus), (fr.xi_plus, fr.e_plus)):
        safe = np.where(e > 0, e, 1.0)
        inner = inner + np.where(e > 0, one_minus_2f(e, T) * xi / safe, 0.0)
    return -2.0 * inner / fr.eps


def _shifted_ball_current(params: SystemParams, c: float) -> float:
    """z-component of sum_p t(p) over the ball |p - c z| < Lambda.

    Whole spheres cancel by oddness; only the shell Lambda-|c| < r < Lambda+|c|
    contributes, weighted by the z-moment of the spherical cap inside the ball.
    """
    if c == 0:
        return 0.0
    lam = params.lambda_cut
    lo, hi = max(lam - abs(c), 0.0), lam + abs(c)

    def f(r):
        x0 = np.clip((r * r + c * c - lam * lam) / (2.0 * r * c), -1.0, 1.0)
        ang = math.pi * (1.0 - x0 * x0) if c > 0 else math.pi * (x0 * x0 - 1.0)
        return r ** 3 * _current_tadpole_radial(params, r) * ang / (2.0 * math.pi) ** 3

    val, _ = adaptive_integrate(f, np.array([lo, lam, hi]), rtol=1e-12, atol=1e-300)
    return float(val)


def cutoff_surface_terms(params: SystemParams, Q: FourMomentum) -> np.ndarray:
    """Exact values of q-hat . column for the hard-cutoff response matrix.

    Entry 0 and 1 belong to the first and second identities, entries 2..5 to
    the third identity for nu = 0..3. In a shift-invariant regularization all
    six vanish. Here the loop runs over |p + q/2| < Lambda while the gap
    equation integrates over |p| < Lambda, which leaves

    * second identity: -4 i Delta times the gap-summand difference between the two balls;
    * third identity: twice the current tadpole summed over the shifted ball, along q.
    """
    out = np.zeros(6, dtype=complex)
    qa = Q.qabs
    if qa == 0:
        return out
    out[1] = -4j * params.delta * _routing_shell(params, qa)
    along = 2.0 * _shifted_ball_current(params, -0.5 * qa)
    out[3:] = along * np.asarray(Q.q) / qa
    return out


# ---------------------------------------------------------------------------
# Ward identity residuals


@dataclass(frozen=True)
class GwiReport:
    """Normalized residuals of the three identities.

    ``raw`` holds q-hat . column for the six columns of the tilde matrix and
    ``scale`` the largest single term entering each of them.
    """

    first: float
    second: float
    third: float
    raw: np.ndarray
    scale: np.ndarray
    surface_subtracted: bool

    def as_tuple(self) -> tuple[float, float, float]:
        return self.first, self.second, self.third

    @property
    def worst(self) -> float:
        return max(self.as_tuple())


def gwi_residuals(
    R: ResponseMatrix,
    Q: FourMomentum | None = None,
    delta: float | None = None,
    subtract_surface: bool = False,
) -> GwiReport:
    """Residuals of q_mu Q_3j^mu + 2i Delta Q_2j (with Q-tilde_22 for j = 2)."""
    Q = R.Q if Q is None else Q
    delta = R.params.delta if delta is None else delta
    qhat = GeneralizedMomentum.build(Q, delta).components
    terms = qhat[:, None] * R.tilde()
    raw = terms.sum(axis=0)
    floor = SCALE_FLOOR * np.abs(qhat).max() * np.abs(R.tilde()).max()
    scale = np.maximum(np.abs(terms).max(axis=0), floor)
    if subtract_surface:
        raw = raw - cutoff_surface_terms(R.params.with_(delta=delta), Q)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(scale > 0, np.abs(raw) / np.where(scale > 0, scale, 1.0), np.abs(raw))
    return GwiReport(float(rel[0]), float(rel[1]), float(rel[2:].max()), raw, scale, subtract_surface)


# ---------------------------------------------------------------------------
# induced fluctuations and kernels


def fluctuation_determinant(R: ResponseMatrix) -> complex:
    """D = Q~11 Q~22 - Q12 Q21; raises CollectiveModePole when |D| is negligible."""
    d = R.q_tilde11 * R.q_tilde22 - R.q12 * R.q21
    scale = max(abs(R.q_tilde11), abs(R.q_tilde22), abs(R.q12), abs(R.q21)) ** 2
    threshold = POLE_RTOL * scale
    if not abs(d) > threshold:
        raise CollectiveModePole(abs(d), threshold)
    return d


def induced_fluctuations(R: ResponseMatrix, A) -> tuple[complex, complex]:
    """Gap fluctuations (D1, D2) driven by the covariant potential A_nu."""
    A = np.asarray(A, dtype=complex)
    d = fluctuation_determinant(R)
    a13 = R.q13 @ A
    a23 = R.q23 @ A
    d1 = -(a13 * R.q_tilde22 - a23 * R.q12) / d
    d2 = -(a23 * R.q_tilde11 - a13 * R.q21) / d
    return complex(d1), complex(d2)


def gauge_shift(A, Q: FourMomentum, chi: complex) -> np.ndarray:
    """A_nu -> A_nu - i q_nu chi."""
    return np.asarray(A, dtype=complex) - 1j * Q.covariant() * chi


@dataclass(frozen=True)
class KernelTensor:
    """Electromagnetic kernel K = K0 + dK with K0 = Q33 (upper indices)."""

    k0: np.ndarray
    dk: np.ndarray
    k: np.ndarray
    Q: FourMomentum
    k0_prime: np.ndarray
    dk_prime: np.ndarray

    @property
    def construction_gap(self) -> float:
        """Largest entrywise difference between the two constructions, relative to max |K|."""
        alt = self.k0_prime + self.dk_prime
        return float(np.abs(alt - self.k).max() / max(np.abs(self.k).max(), 1e-300))

    def current(self, A) -> np.ndarray:
        """J^mu = K^{mu nu} A_nu."""
        return self.k @ np.asarray(A, dtype=complex)


def full_kernel(R: ResponseMatrix) -> KernelTensor:
    d = fluctuation_determinant(R)
    t11, t22 = R.q_tilde11, R.q_tilde22
    q12, q21 = R.q12, R.q21
    q31, q32, q13, q23 = R.q31, R.q32, R.q13, R.q23
    num = (
        t11 * np.outer(q32, q23)
        + t22 * np.outer(q31, q13)
        - q12 * np.outer(q31, q23)
        - q21 * np.outer(q32, q13)
    )
    k0 = R.q33.copy()
    dk = -num / d
    # two-step elimination: D1 first, then D2
    k0p = k0 - np.outer(q31, q13) / t11
    q32p = q32 - q12 / t11 * q31
    q23p = q23 - q21 / t11 * q13
    t22p = t22 - q12 * q21 / t11
    dkp = -np.outer(q32p, q23p) / t22p
    return KernelTensor(k0, dk, k0 + dk, R.Q, k0p, dkp)


def reduced_pairing_stiffness(R: ResponseMatrix) -> complex:
    """Q~'22 = Q~22 - Q12 Q21 / Q~11, whose zeros are the collective mode."""
    return complex(R.q_tilde22 - R.q12 * R.q21 / R.q_tilde11)


def kernel_denominator(R: ResponseMatrix) -> tuple[complex, complex]:
    """(q_mu K'0^{mu nu} q_nu, 4 Delta^2 Q~'22); equal when the identities hold."""
    qc = R.Q.covariant()
    k0p = R.q33 - np.outer(R.q31, R.q13) / R.q_tilde11
    return complex(qc @ k0p @ qc), complex(4.0 * R.params.delta ** 2 * reduced_pairing_stiffness(R))


def conservation_residual(K: KernelTensor) -> float:
    """max over both slots of |q_mu K^{mu nu}| / max_mu |q_mu K^{mu nu}|-terms."""
    qc = K.Q.covariant()
    floor = SCALE_FLOOR * np.abs(qc).max() * np.abs(K.k).max()
    worst = 0.0
    for mat in (K.k, K.k.T):
        terms = qc[:, None] * mat
        res = np.abs(terms.sum(axis=0))
        scale = np.maximum(np.abs(terms).max(axis=0), floor)
        ok = scale > 0
        if ok.any():
            worst = max(worst, float((res[ok] / scale[ok]).max()))
    return worst


@dataclass(frozen=True)
class VertexReport:
    """Coefficients of Gamma'^mu = gamma-hat^mu - Pi1^mu s1 i g5 - Pi2^mu s2 i g5.

    ``pi1_residual`` is |q.Pi1| and ``pi2_residual`` is |q.Pi2 + 2i Delta|,
    each normalized by its largest term.
    """

    pi1: np.ndarray
    pi2: np.ndarray
    pi1_residual: float
    pi2_residual: float
    kernel: np.ndarray
    kernel_gap: float


def _contraction_residual(qc: np.ndarray, v: np.ndarray, target: complex) -> float:
    terms = np.append(qc * v, -target)
    floor = SCALE_FLOOR * float(np.abs(qc).max() * np.abs(v).max())
    scale = max(float(np.abs(terms).max()), floor)
    return float(abs(terms.sum()) / scale) if scale > 0 else 0.0


def invariant_vertex(R: ResponseMatrix, Q: FourMomentum | None = None) -> VertexReport:
    """Determinant-ratio vertex and the kernel it generates through the Q blocks."""
    Q = R.Q if Q is None else Q
    d = fluctuation_determinant(R)
    pi1 = (R.q13 * R.q_tilde22 - R.q23 * R.q12) / d
    pi2 = (R.q13 * R.q21 - R.q23 * R.q_tilde11) / d
    qc = Q.covariant()
    r1 = _contraction_residual(qc, pi1, 0.0)
    r2 = _contraction_residual(qc, pi2, -2j * R.params.delta)
    # the left vertex Gamma'^mu traced against gamma-hat^nu picks Q_33, Q_13, Q_23
    kv = R.q33 - np.outer(pi1, R.q13) - np.outer(pi2, R.q23)
    kd = full_kernel(R).k
    gap = float(np.abs(kv - kd).max() / max(np.abs(kd).max(), 1e-300))
    return VertexReport(pi1, pi2, r1, r2, kv, gap)
