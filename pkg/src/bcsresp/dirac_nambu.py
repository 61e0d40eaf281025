"""Explicit 8x8 Nambu x Dirac algebra and brute-force oracles.

Matrices act on the product space Nambu (outer, particle/hole) x Dirac
(inner, 4-spinor): index = 4 * nambu + dirac. Everything here is built from
dense matrices on purpose; it is the reference against which the closed
forms in ``response`` are checked.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .equilibrium import SystemParams
from .errors import PoleProximity, TruncationWarning

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
I8 = np.eye(8, dtype=complex)

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
SIGMA1, SIGMA2, SIGMA3 = PAULI
SIGMA_PLUS = 0.5 * (SIGMA1 + 1j * SIGMA2)
SIGMA_MINUS = 0.5 * (SIGMA1 - 1j * SIGMA2)
SIGMA_BAR_PLUS = 0.5 * (I2 + SIGMA3)
SIGMA_BAR_MINUS = 0.5 * (I2 - SIGMA3)

_Z2 = np.zeros((2, 2), dtype=complex)


def _block(a, b, c, d):
    return np.block([[a, b], [c, d]])


# Weyl (chiral) representation
GAMMA0 = _block(_Z2, I2, I2, _Z2)
GAMMA = (GAMMA0,) + tuple(_block(_Z2, s, -s, _Z2) for s in PAULI)
GAMMA5 = _block(-I2, _Z2, _Z2, I2)
CHARGE_CONJ = 1j * GAMMA0 @ GAMMA[2]
METRIC = np.diag([1.0, -1.0, -1.0, -1.0])


def nambu(sigma: np.ndarray, dirac: np.ndarray) -> np.ndarray:
    """Nambu (outer) x Dirac (inner) product."""
    return np.kron(sigma, dirac)


# generalized vertex set over {Delta_1, Delta_2, A_0, A_1, A_2, A_3}
VERTICES = (
    nambu(SIGMA1, 1j * GAMMA5),
    nambu(SIGMA2, 1j * GAMMA5),
) + tuple(nambu(SIGMA3, GAMMA[mu]) for mu in range(4))

GAMMA0_HAT = nambu(I2, GAMMA0)


def algebra_residuals() -> dict[str, float]:
    """Largest deviation from each defining identity of the constant set."""
    res = {}
    anti = 0.0
    for mu in range(4):
        for nu in range(4):
            lhs = GAMMA[mu] @ GAMMA[nu] + GAMMA[nu] @ GAMMA[mu]
            anti = max(anti, np.abs(lhs - 2.0 * METRIC[mu, nu] * I4).max())
    res["clifford"] = anti
    res["gamma0_squared"] = np.abs(GAMMA0 @ GAMMA0 - I4).max()
    res["gamma5_squared"] = np.abs(GAMMA5 @ GAMMA5 - I4).max()
    g5 = 1j * GAMMA[0] @ GAMMA[1] @ GAMMA[2] @ GAMMA[3]
    res["gamma5_product"] = np.abs(g5 - GAMMA5).max()
    res["gamma5_anticommutes"] = max(np.abs(GAMMA5 @ g + g @ GAMMA5).max() for g in GAMMA)
    res["c_squared"] = np.abs(CHARGE_CONJ @ CHARGE_CONJ + I4).max()
    res["c_gamma5_commute"] = np.abs(CHARGE_CONJ @ GAMMA5 - GAMMA5 @ CHARGE_CONJ).max()
    res["c_transpose"] = np.abs(CHARGE_CONJ.T + CHARGE_CONJ).max()
    res["c_conjugation"] = max(
        np.abs(CHARGE_CONJ @ g.T @ CHARGE_CONJ - g).max() for g in GAMMA
    )
    res["sigma_plus"] = np.abs(SIGMA_PLUS - np.array([[0, 1], [0, 0]])).max()
    res["sigma_bar_sum"] = np.abs(SIGMA_BAR_PLUS + SIGMA_BAR_MINUS - I2).max()
    return {k: float(v) for k, v in res.items()}


def _check_algebra() -> None:
    bad = {k: v for k, v in algebra_residuals().items() if v > 1e-14}
    if bad:
        raise RuntimeError(f"gamma/Pauli constants violate their identities: {bad}")


_check_algebra()


def _as_momenta(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != 3:
        raise ValueError("momenta must have a trailing axis of length 3")
    return p


def dirac_hamiltonian(p, m: float) -> np.ndarray:
    """gamma^0 (gamma.p + m), shape (..., 4, 4)."""
    p = _as_momenta(p)
    gp = np.einsum("...i,ijk->...jk", p.astype(complex), np.stack(GAMMA[1:]))
    return GAMMA0 @ (gp + m * I4)


def energy_projectors(p, m: float) -> tuple[np.ndarray, np.ndarray]:
    """(Lambda_+, Lambda_-) = (1 +/- gamma^0(gamma.p + m)/eps) / 2."""
    p = _as_momenta(p)
    eps = np.sqrt(np.sum(p * p, axis=-1) + m * m)[..., None, None]
    h = dirac_hamiltonian(p, m) / eps
    return 0.5 * (I4 + h), 0.5 * (I4 - h)


def lifted_projectors(p, m: float) -> tuple[np.ndarray, np.ndarray]:
    """Nambu projectors diag(Lambda_+, Lambda_-) and diag(Lambda_-, Lambda_+)."""
    lp, lm = energy_projectors(p, m)
    z = np.zeros_like(lp)
    hat_p = np.concatenate([np.concatenate([lp, z], -1), np.concatenate([z, lm], -1)], -2)
    hat_m = np.concatenate([np.concatenate([lm, z], -1), np.concatenate([z, lp], -1)], -2)
    return hat_p, hat_m


def energy_operator(params: SystemParams, p) -> np.ndarray:
    """E_hat = gamma^0(gamma.p + m) - mu sigma_3 - Delta gamma^0 i gamma_5 sigma_1."""
    h = dirac_hamiltonian(p, params.m)
    out = nambu_blockdiag(h, h) - params.mu * nambu(SIGMA3, I4) - params.delta * nambu(SIGMA1, GAMMA0 @ (1j * GAMMA5))
    return out


def nambu_blockdiag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    z = np.zeros_like(a)
    return np.concatenate([np.concatenate([a, z], -1), np.concatenate([z, b], -1)], -2)


def inverse_propagator(params: SystemParams, p, z: complex) -> np.ndarray:
    """G_hat^{-1} = (z + mu sigma_3) gamma^0 - gamma.p - m + Delta i gamma_5 sigma_1.

    ``z`` is the complex fermion frequency (i omega_n on the Matsubara axis).
    """
    p = _as_momenta(p)
    gp = np.einsum("...i,ijk->...jk", p.astype(complex), np.stack(GAMMA[1:]))
    z = np.asarray(z, dtype=complex)[..., None, None]
    out = z * GAMMA0_HAT + params.mu * nambu(SIGMA3, GAMMA0)
    out = out - nambu_blockdiag(gp + params.m * I4, gp + params.m * I4)
    return out + params.delta * nambu(SIGMA1, 1j * GAMMA5)


def invert_with_condition(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inverse and 2-norm condition number of a (stack of) square matrices."""
    return np.linalg.inv(mat), np.linalg.cond(mat)


def propagator_numeric(params: SystemParams, p, z: complex) -> np.ndarray:
    return np.linalg.inv(inverse_propagator(params, p, z))


@dataclass(frozen=True)
class SpectralOperators:
    """Nambu projectors onto the four quasiparticle levels at one momentum.

    ``energies`` lists the eigenvalue of E_hat carried by each operator:
    u- -> +E-, v- -> -E-, u+ -> -E+, v+ -> +E+.
    """

    u_minus: np.ndarray
    v_minus: np.ndarray
    u_plus: np.ndarray
    v_plus: np.ndarray
    e_minus: np.ndarray
    e_plus: np.ndarray

    def items(self):
        yield "u-", self.u_minus, self.e_minus
        yield "v-", self.v_minus, -self.e_minus
        yield "u+", self.u_plus, -self.e_plus
        yield "v+", self.v_plus, self.e_plus


def spectral_operators(params: SystemParams, p) -> SpectralOperators:
    """u_hat, v_hat from (E -/+ E_hat) Lambda_hat / 2E."""
    p = _as_momenta(p)
    m, mu, d = params.m, params.mu, params.delta
    eps = np.sqrt(np.sum(p * p, axis=-1) + m * m)
    em = np.sqrt((eps - mu) ** 2 + d * d)[..., None, None]
    ep = np.sqrt((eps + mu) ** 2 + d * d)[..., None, None]
    e_hat = energy_operator(params, p)
    lam_p, lam_m = lifted_projectors(p, m)
    return SpectralOperators(
        u_minus=(em * I8 + e_hat) @ lam_p / (2 * em),
        v_minus=(em * I8 - e_hat) @ lam_p / (2 * em),
        u_plus=(ep * I8 - e_hat) @ lam_m / (2 * ep),
        v_plus=(ep * I8 + e_hat) @ lam_m / (2 * ep),
        e_minus=em[..., 0, 0],
        e_plus=ep[..., 0, 0],
    )


def propagator_closed_form(params: SystemParams, p, z: complex, pole_tol: float = 1e-9) -> np.ndarray:
    """G_hat(z, p) = sum_X X / (z - e_X) gamma^0 over the four spectral operators."""
    ops = spectral_operators(params, p)
    z = np.asarray(z, dtype=complex)
    total = 0
    for name, op, e in ops.items():
        gap = np.abs(z - e)
        if np.any(gap < pole_tol * params.m):
            raise PoleProximity(f"frequency within {pole_tol}*m of the {name} pole")
        total = total + op / (z - e)[..., None, None]
    return total @ GAMMA0_HAT


def normal_and_anomalous(params: SystemParams, p, z: complex, mu: float | None = None):
    """Single-species G(P, mu) and F(P, mu) as 4x4 matrices, assembled term by term."""
    mu = params.mu if mu is None else mu
    p = _as_momenta(p)
    m, d = params.m, params.delta
    eps = np.sqrt(np.sum(p * p, axis=-1) + m * m)
    xm, xp = eps - mu, eps + mu
    em, ep = np.sqrt(xm * xm + d * d), np.sqrt(xp * xp + d * d)
    u2m, u2p = 0.5 * (1 + xm / em), 0.5 * (1 + xp / ep)
    v2m, v2p = 1 - u2m, 1 - u2p
    uvm, uvp = d / (2 * em), d / (2 * ep)
    lp, lm = energy_projectors(p, m)
    z = np.asarray(z, dtype=complex)

    def s(x):
        return np.asarray(x)[..., None, None]

    g = (s(u2m / (z - em) + v2m / (z + em)) * lp + s(u2p / (z + ep) + v2p / (z - ep)) * lm) @ GAMMA0
    f = (s(uvm / (z - em) - uvm / (z + em)) * lp + s(uvp / (z - ep) - uvp / (z + ep)) * lm) @ (1j * GAMMA5)
    return g, f


# ---------------------------------------------------------------------------
# response-function oracle


def fermion_frequencies(temperature: float, n_matsubara: int) -> np.ndarray:
    """omega_n = (2n+1) pi T for n = -N-1 .. N (symmetric set of 2N+2 values)."""
    n = np.arange(-n_matsubara - 1, n_matsubara + 1)
    return (2 * n + 1) * math.pi * temperature


def _tail_sum(temperature: float, wn: np.ndarray, big_omega: float) -> complex:
    """Full minus partial T sum of 1/(i w (i w + i W)) over the given frequencies."""
    full = -1.0 / (4.0 * temperature) if big_omega == 0 else 0.0
    partial = temperature * np.sum(1.0 / ((1j * wn) * (1j * wn + 1j * big_omega)))
    return full - partial


def response_integrand_oracle(
    params: SystemParams,
    p,
    q,
    big_omega: float,
    n_matsubara: int = 4096,
    warn_rtol: float = 1e-6,
) -> np.ndarray:
    """6x6 matrix T sum_n Tr[Sigma_i G(P+Q) Sigma_j G(P)] at one momentum p.

    ``big_omega`` is the real bosonic Matsubara frequency Omega_l (so that the
    external frequency is i*Omega_l). The truncated sum is completed with the
    analytic tail of the leading 1/omega^2 asymptotics; the change between
    N/2 and N terms after tail completion, scaled by the observed N^-3
    convergence, estimates the remaining error.
    """
    T = params.temperature
    if not T > 0:
        raise ValueError("the Matsubara oracle needs a positive temperature")
    p = _as_momenta(p)
    k = p + np.asarray(q, dtype=float)
    wn = fermion_frequencies(T, n_matsubara)
    g_p = np.linalg.inv(inverse_propagator(params, np.broadcast_to(p, wn.shape + (3,)), 1j * wn))
    g_k = np.linalg.inv(inverse_propagator(params, np.broadcast_to(k, wn.shape + (3,)), 1j * (wn + big_omega)))
    V = np.stack(VERTICES)
    # a[n, i] = Sigma_i G(P+Q), b[n, j] = Sigma_j G(P)
    a = np.einsum("iab,nbc->inac", V, g_k)
    b = np.einsum("jab,nbc->jnac", V, g_p)
    terms = np.einsum("inac,jnca->nij", a, b)

    lead = np.einsum("iab,bc,jcd,da->ij", V, GAMMA0_HAT, V, GAMMA0_HAT)
    half = n_matsubara // 2
    inner = slice(n_matsubara + 1 - half - 1, n_matsubara + 1 + half)
    full = T * terms.sum(axis=0) + lead * _tail_sum(T, wn, big_omega)
    coarse = T * terms[inner].sum(axis=0) + lead * _tail_sum(T, wn[inner], big_omega)
    # after tail completion the error falls off as N^-3, so the N/2 -> N
    # change overestimates the remaining error by a factor of about 7
    err = np.abs(full - coarse).max() / 7.0
    scale = np.abs(full).max()
    if err > warn_rtol * scale:
        warnings.warn(
            f"Matsubara truncation error {err:.2e} exceeds {warn_rtol:g} of the sum ({scale:.2e})",
            TruncationWarning,
            stacklevel=2,
        )
    return full


def qij_integrand_oracle(params: SystemParams, p, Q, i: int, j: int, n_matsubara: int = 4096) -> complex:
    """Single entry of ``response_integrand_oracle``; ``Q`` is a FourMomentum on the Matsubara axis.

    Channel indices run over {0: Delta_1, 1: Delta_2, 2..5: A_0..A_3}.
    """
    if not Q.matsubara:
        raise ValueError("the Matsubara oracle needs Q on the imaginary axis")
    mat = response_integrand_oracle(params, p, Q.q, Q.omega.imag, n_matsubara)
    return complex(mat[i, j])


def coherence_trace(op_k: np.ndarray, op_p: np.ndarray, i: int, j: int) -> np.ndarray:
    """Tr[Sigma_i X(p+q) gamma^0 Sigma_j Y(p) gamma^0] for stacks of 8x8 operators."""
    chain = VERTICES[i] @ op_k @ GAMMA0_HAT @ VERTICES[j] @ op_p @ GAMMA0_HAT
    return np.trace(chain, axis1=-2, axis2=-1)
