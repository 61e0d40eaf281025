"""Closed-form response functions of the paired Dirac gas.

The per-momentum integrand is the sixteen-pole spectral expression

    Q_ij = sum_p sum_{X,Y} C_ij[X, Y] (f(e_X(p+q)) - f(e_Y(p))) / (e_X(p+q) - e_Y(p) - z)

where X, Y run over the quasiparticle operators (u-, v-, u+, v+) with
energies (+E-, -E-, -E+, +E+) and C_ij[X, Y] = Tr[S_i X(p+q) g0 S_j Y(p) g0].
The traces are evaluated in closed form: every spectral operator is a 2x2
Nambu block of scalar coherence factors times a Dirac energy projector,
optionally followed by W = g0 i g5, and the remaining Dirac traces reduce to
dot products of p, p+q and m.

Momentum integrals use bipolar coordinates r1 = |p|, r2 = |p+q| with q along
+z. The loop momentum is cut off symmetrically, |p + q/2| < lambda_cut, which
keeps the domain invariant under p -> -p - q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .equilibrium import (
    QuasiparticleFrame,
    SystemParams,
    fermi,
    fermi_derivative,
    fermi_surface,
    gap_rhs,
    inverse_coupling,
    one_minus_2f,
    quasiparticle_frame,
)
from .errors import PolePinching
from .kinematics import FourMomentum, kinematic_factors
from .quadrature import adaptive_integrate, gauss_legendre

__all__ = [
    "CHANNELS",
    "CoherencePairSet",
    "FourMomentum",
    "ResponseMatrix",
    "assemble_response_matrix",
    "coherence_coefficients",
    "coherence_set",
    "kinematic_factors",
    "qij",
    "response_integrand",
]

OPERATORS = ("u-", "v-", "u+", "v+")
CHANNEL_LABELS = ("D1", "D2", "A0", "A1", "A2", "A3")
# independent channels; the rest follows from the index symmetry
CHANNELS = ("11", "22", "12", "13", "23", "33")
QUAD_RTOL = 1e-10
INNER_ORDER = 16
DEGENERATE_RTOL = 1e-7

# ---------------------------------------------------------------------------
# static trace tables

_PAULI = (
    {(0, 1): 1.0, (1, 0): 1.0},
    {(0, 1): -1j, (1, 0): 1j},
    {(0, 0): 1.0, (1, 1): -1.0},
)
_VERTEX_PAULI = (0, 1, 2, 2, 2, 2)
_VERTEX_W = (1, 1, 0, 0, 0, 0)
_VERTEX_MU = (0, 0, 0, 1, 2, 3)
_BRANCH_SIGN = (1, 1, -1, -1)


def _row_sign(b: int) -> int:
    return 1 if b == 0 else -1


def _build_combos():
    """Enumerate the Nambu index paths contributing to every (i, j).

    Each row lists (i, j, b, c, d, a, amplitude, w_total, w_right, mu, nu).
    The Dirac trace for a path is Tr[W^w A^mu L_s'(k) A^nu L_t(p)] with the
    W carried by the right vertex commuted to the left.
    """
    rows = []
    for i in range(6):
        for j in range(6):
            for (a, b), si in _PAULI[_VERTEX_PAULI[i]].items():
                for (c, d), sj in _PAULI[_VERTEX_PAULI[j]].items():
                    mu, nu = _VERTEX_MU[i], _VERTEX_MU[j]
                    w_left = (int(d != a) + _VERTEX_W[i]) % 2
                    w_right = (int(b != c) + _VERTEX_W[j]) % 2
                    amp = si * sj * (-1) ** (w_right * int(mu > 0))
                    rows.append((i, j, b, c, d, a, amp, (w_left + w_right) % 2, w_right, mu, nu))
    return rows


_COMBOS = _build_combos()
_N_PATHS = 4  # paths per (i, j)
_C_I = np.array([r[0] for r in _COMBOS])
_C_J = np.array([r[1] for r in _COMBOS])
_C_B = np.array([r[2] for r in _COMBOS])
_C_C = np.array([r[3] for r in _COMBOS])
_C_D = np.array([r[4] for r in _COMBOS])
_C_A = np.array([r[5] for r in _COMBOS])
_C_AMP = np.array([r[6] for r in _COMBOS], dtype=complex)
_C_W = np.array([r[7] for r in _COMBOS])
_C_WR = np.array([r[8] for r in _COMBOS])
_C_MU = np.array([r[9] for r in _COMBOS])
_C_NU = np.array([r[10] for r in _COMBOS])

_LEVI = np.zeros((3, 3, 3))
for _a, _b, _c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _LEVI[_a, _b, _c] = 1.0
    _LEVI[_b, _a, _c] = -1.0


@dataclass(frozen=True)
class _PairGeometry:
    """Momentum data entering the Dirac traces, possibly azimuthally averaged.

    ``p_vec``/``k_vec`` are <p> and <p+q>; ``kp_outer`` is <(p+q)_i p_j>;
    ``kp`` the scalar (p+q).p, which never depends on the azimuth.
    """

    p_abs: np.ndarray
    k_abs: np.ndarray
    p_vec: np.ndarray
    k_vec: np.ndarray
    kp_outer: np.ndarray
    kp: np.ndarray
    q_vec: np.ndarray

    @classmethod
    def from_vectors(cls, p, q) -> "_PairGeometry":
        p = np.atleast_2d(np.asarray(p, dtype=float))
        q = np.asarray(q, dtype=float)
        k = p + q
        return cls(
            p_abs=np.linalg.norm(p, axis=-1),
            k_abs=np.linalg.norm(k, axis=-1),
            p_vec=p,
            k_vec=k,
            kp_outer=np.einsum("ni,nj->nij", k, p),
            kp=np.einsum("ni,ni->n", k, p),
            q_vec=np.broadcast_to(q, p.shape),
        )

    @classmethod
    def bipolar(cls, r1, r2, q: float) -> "_PairGeometry":
        """Azimuthal average at fixed |p| = r1, |p+q| = r2 with q = q z."""
        r1 = np.asarray(r1, dtype=float)
        r2 = np.asarray(r2, dtype=float)
        pz = (r2 * r2 - r1 * r1 - q * q) / (2.0 * q)
        rho2 = np.maximum(r1 * r1 - pz * pz, 0.0)
        n = r1.shape[0]
        p_vec = np.zeros((n, 3))
        p_vec[:, 2] = pz
        k_vec = p_vec.copy()
        k_vec[:, 2] = pz + q
        outer = np.zeros((n, 3, 3))
        outer[:, 0, 0] = outer[:, 1, 1] = 0.5 * rho2
        outer[:, 2, 2] = pz * (pz + q)
        kp = r1 * r1 + q * pz
        qv = np.zeros((n, 3))
        qv[:, 2] = q
        return cls(r1, r2, p_vec, k_vec, outer, kp, qv)

    @classmethod
    def isotropic(cls, r) -> "_PairGeometry":
        """Angular average at q = 0."""
        r = np.asarray(r, dtype=float)
        n = r.shape[0]
        z3 = np.zeros((n, 3))
        outer = np.einsum("n,ij->nij", r * r / 3.0, np.eye(3))
        return cls(r, r, z3, z3, outer, r * r, z3)


def _dirac_traces(geo: _PairGeometry, m: float) -> np.ndarray:
    """D[w, s', t, mu, nu] = Tr[W^w A^mu L_s'(p+q) A^nu L_t(p)], shape (2,2,2,4,4,N).

    A^0 = 1, A^i = alpha_i, W = g0 i g5, L_s = (1 + s h/eps)/2.
    """
    n = geo.p_abs.shape[0]
    eps_p = np.sqrt(geo.p_abs ** 2 + m * m)
    eps_k = np.sqrt(geo.k_abs ** 2 + m * m)
    t0 = np.zeros((4, 4, n))
    t0[np.arange(4), np.arange(4)] = 4.0
    t1p = np.zeros((4, 4, n))
    t1k = np.zeros((4, 4, n))
    t1p[0, 1:] = t1p[1:, 0] = 4.0 * geo.p_vec.T
    t1k[0, 1:] = t1k[1:, 0] = 4.0 * geo.k_vec.T
    mass = geo.kp + m * m
    t2 = np.zeros((4, 4, n))
    t2[0, 0] = 4.0 * mass
    sym = geo.kp_outer + np.swapaxes(geo.kp_outer, 1, 2)
    t2[1:, 1:] = 4.0 * np.transpose(sym - np.einsum("n,ij->nij", mass, np.eye(3)), (1, 2, 0))
    t2w = np.zeros((4, 4, n))
    t2w[1:, 1:] = 4.0 * m * np.einsum("ijl,nl->ijn", _LEVI, geo.q_vec)

    out = np.zeros((2, 2, 2, 4, 4, n))
    for si, s in enumerate((1.0, -1.0)):
        for ti, t in enumerate((1.0, -1.0)):
            out[0, si, ti] = 0.25 * (t0 + (t / eps_p) * t1p + (s / eps_k) * t1k + (s * t / (eps_k * eps_p)) * t2)
            out[1, si, ti] = 0.25 * (s * t / (eps_k * eps_p)) * t2w
    return out


def _nambu_factors(fr: QuasiparticleFrame, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Scalar Nambu blocks of (u-, v-, u+, v+), shape (4, 2, 2, N), and their energies (4, N)."""
    uvm = np.where(fr.e_minus > 0, 0.5 * delta / np.where(fr.e_minus > 0, fr.e_minus, 1.0), 0.0)
    uvp = np.where(fr.e_plus > 0, 0.5 * delta / np.where(fr.e_plus > 0, fr.e_plus, 1.0), 0.0)
    coef = np.array([
        [[fr.u2_minus, -uvm], [-uvm, fr.v2_minus]],
        [[fr.v2_minus, uvm], [uvm, fr.u2_minus]],
        [[fr.u2_plus, uvp], [uvp, fr.v2_plus]],
        [[fr.v2_plus, -uvp], [-uvp, fr.u2_plus]],
    ])
    energy = np.array([fr.e_minus, -fr.e_minus, -fr.e_plus, fr.e_plus])
    return coef, energy


def _contract(pair: np.ndarray, signs_x, signs_y, dirac: np.ndarray) -> np.ndarray:
    """out[x, y, i, j] = sum over Nambu paths of pair[x, y, b, c, d, a] * Dirac trace.

    ``pair`` has shape (nx, ny, 2, 2, 2, 2, N); signs_* give the branch sign
    of each x (projector on the particle row) and y.
    """
    nx, ny = pair.shape[:2]
    n = pair.shape[-1]
    out = np.zeros((nx, ny, 36, n), dtype=complex)
    flip = 1 - 2 * _C_WR
    for x in range(nx):
        s_prime = signs_x[x] * np.where(_C_B == 0, 1, -1) * flip
        s_idx = (s_prime < 0).astype(int)
        for y in range(ny):
            t_idx = (signs_y[y] * np.where(_C_D == 0, 1, -1) < 0).astype(int)
            d = dirac[_C_W, s_idx, t_idx, _C_MU, _C_NU]
            k = pair[x, y, _C_B, _C_C, _C_D, _C_A]
            out[x, y] = (_C_AMP[:, None] * k * d).reshape(36, _N_PATHS, n).sum(axis=1)
    return out.reshape(nx, ny, 6, 6, n)


def _frames(params: SystemParams, geo: _PairGeometry):
    fk = quasiparticle_frame(params, geo.k_abs)
    fp = quasiparticle_frame(params, geo.p_abs)
    return fk, fp


def coherence_coefficients(params: SystemParams, p, q) -> np.ndarray:
    """All sixteen traced coherence coefficients C[X, Y, i, j] at explicit momenta.

    ``p`` has shape (N, 3) or (3,); the result has shape (4, 4, 6, 6, N) with
    X indexing the operator at p+q and Y the one at p, both ordered
    (u-, v-, u+, v+).
    """
    geo = _PairGeometry.from_vectors(p, q)
    return _coherence_from_geometry(params, geo)


def _coherence_from_geometry(params: SystemParams, geo: _PairGeometry) -> np.ndarray:
    fk, fp = _frames(params, geo)
    ck, _ = _nambu_factors(fk, params.delta)
    cp, _ = _nambu_factors(fp, params.delta)
    pair = np.einsum("xbcn,ydan->xybcdan", ck, cp)
    return _contract(pair, _BRANCH_SIGN, _BRANCH_SIGN, _dirac_traces(geo, params.m))


def pole_weights(params: SystemParams, ek: np.ndarray, ep: np.ndarray, z: complex) -> np.ndarray:
    """(f(e_X(k)) - f(e_Y(p))) / (e_X(k) - e_Y(p) - z) for all 16 pairs, shape (4, 4, N).

    At z = 0 and degenerate energies the ratio is replaced by its limit f'(e).
    """
    T = params.temperature
    a = ek[:, None, :]
    b = ep[None, :, :]
    num = fermi(a, T) - fermi(b, T)
    den = a - b - z
    if z == 0:
        close = np.abs(a - b) <= DEGENERATE_RTOL * max(T, 1e-300) if T > 0 else (a == b)
        safe = np.where(close, 1.0, den)
        limit = fermi_derivative(0.5 * (a + b), T) if T > 0 else np.zeros_like(a)
        return np.where(close, limit, num / safe)
    # equal occupations give an exact zero even if the denominator vanishes
    return np.where(num == 0, 0.0, num / np.where(den == 0, 1.0, den))


def _gap_summand(params: SystemParams, fr: QuasiparticleFrame) -> np.ndarray:
    T = params.temperature
    out = np.zeros_like(fr.e_minus)
    for e in (fr.e_minus, fr.e_plus):
        safe = np.where(e > 0, e, 1.0)
        out = out + np.where(e > 0, one_minus_2f(e, T) / safe, 0.0)
    return out


def _integrand_from_geometry(params: SystemParams, geo: _PairGeometry, z: complex) -> np.ndarray:
    """Sixteen-pole integrand, shape (N, 38): 36 entries of Q_ij, then the two
    pairing diagonals with the gap-equation summand added at p and p+q."""
    fk, fp = _frames(params, geo)
    ck, ek = _nambu_factors(fk, params.delta)
    cp, ep = _nambu_factors(fp, params.delta)
    w = pole_weights(params, ek, ep, z)
    dirac = _dirac_traces(geo, params.m)
    # fold the pole weights into the Nambu products branch by branch
    pair = np.zeros((2, 2, 2, 2, 2, 2, geo.p_abs.shape[0]), dtype=complex)
    for gx in range(2):
        for gy in range(2):
            xs = slice(2 * gx, 2 * gx + 2)
            ys = slice(2 * gy, 2 * gy + 2)
            pair[gx, gy] = np.einsum("xyn,xbcn,ydan->bcdan", w[xs, ys], ck[xs], cp[ys])
    mat = _contract(pair, (1, -1), (1, -1), dirac).sum(axis=(0, 1))
    n = geo.p_abs.shape[0]
    flat = np.moveaxis(mat, -1, 0).reshape(n, 36)
    tadpole = _gap_summand(params, fk) + _gap_summand(params, fp)
    extra = np.stack([flat[:, 0] + tadpole, flat[:, 7] + tadpole], axis=1)
    return np.concatenate([flat, extra], axis=1)


def response_integrand(params: SystemParams, p, Q: FourMomentum) -> np.ndarray:
    """6x6 per-momentum integrand at explicit loop momenta, shape (N, 6, 6)."""
    geo = _PairGeometry.from_vectors(p, Q.q)
    out = _integrand_from_geometry(params, geo, Q.omega)
    return out[:, :36].reshape(-1, 6, 6)


# ---------------------------------------------------------------------------
# coherence sets with the displayed sum/difference groupings


@dataclass(frozen=True)
class CoherencePairSet:
    """Traced coherence coefficients of one channel at one (p, q).

    ``entries`` maps labels such as "u-v+" (operator at p+q first) to a
    scalar, 4-vector or 4x4 tensor depending on the channel. ``groupings``
    holds the closed-form sums and differences, keyed like "u-u- + v-v-",
    each mapping to an array over the Lorentz components it is defined for
    (NaN elsewhere).
    """

    channel: str
    entries: dict[str, np.ndarray]
    groupings: dict[str, np.ndarray] = field(default_factory=dict)


def _channel_slice(channel: str):
    if channel not in CHANNELS:
        raise ValueError(f"channel must be one of {CHANNELS}")
    i, j = int(channel[0]), int(channel[1])
    rows = slice(2, 6) if i == 3 else slice(i - 1, i)
    cols = slice(2, 6) if j == 3 else slice(j - 1, j)
    return rows, cols


def coherence_set(params: SystemParams, p, q, channel: str) -> CoherencePairSet:
    """Coherence coefficients of ``channel`` at a single loop momentum ``p``."""
    p = np.asarray(p, dtype=float).reshape(1, 3)
    q = np.asarray(q, dtype=float)
    coef = coherence_coefficients(params, p, q)[..., 0]
    rows, cols = _channel_slice(channel)
    entries = {}
    for x, nx in enumerate(OPERATORS):
        for y, ny in enumerate(OPERATORS):
            block = coef[x, y, rows, cols]
            entries[nx + ny] = block.reshape(()) if block.size == 1 else (block.ravel() if block.shape[0] == 1 or block.shape[1] == 1 else block)
    groups = _displayed_groupings(params, p[0], q, channel)
    return CoherencePairSet(channel, entries, groups)


def _displayed_groupings(params: SystemParams, p, q, channel: str) -> dict[str, np.ndarray]:
    """Closed-form sums/differences of coherence coefficients per channel, errata applied."""
    from ._groupings import displayed_groupings

    return displayed_groupings(params, p, q, channel, corrected=True)


# ---------------------------------------------------------------------------
# momentum integration


def _gl_unit(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = gauss_legendre(order)
    return 0.5 * (x + 1.0), 0.5 * w


def _graded_panels(center: float, width: float, lo: float, hi: float) -> np.ndarray:
    """Panel boundaries on [lo, hi] refined geometrically toward ``center``.

    The centre may lie outside the interval; the first step is a quarter of
    max(width, distance to the interval) and steps grow by 4.
    """
    c = min(max(center, lo), hi)
    dist = abs(center - c)
    step = 0.25 * max(width, dist)
    pts = [lo, hi, c]
    s = step
    while c - s > lo or c + s < hi:
        pts.extend((c - s, c + s))
        s *= 4.0
    pts = np.asarray(pts)
    return np.unique(pts[(pts >= lo) & (pts <= hi)])


def feature_width(params: SystemParams) -> float:
    """Momentum scale of the Fermi-surface structure."""
    kf = fermi_surface(params)
    if kf is None:
        return params.m
    vf = kf / abs(params.mu)
    return max(params.delta, params.temperature, 1e-12 * params.m) / vf


def _outer_breaks(params: SystemParams, q: float, top: float, switch: float) -> np.ndarray:
    kf = fermi_surface(params)
    w = feature_width(params)
    pts = [np.array([0.0, top, min(q, top), min(switch, top)]), np.linspace(0.0, top, 9)]
    if kf is not None:
        for c in (kf - q, kf, kf + q):
            if 0.0 < c < top:
                pts.append(_graded_panels(c, w, 0.0, top))
    b = np.unique(np.concatenate(pts))
    return b[(b >= 0.0) & (b <= top)]


def _bipolar_integrand(params: SystemParams, q: float, z: complex, inner_order: int):
    """Return F(r1) = (1/4 pi^2 q) int dr2 r1 r2 <integrand>_phi on the routed domain."""
    lam = params.lambda_cut
    r_sq = 2.0 * lam * lam + 0.5 * q * q
    kf = fermi_surface(params)
    w = feature_width(params)
    xg, wg = _gl_unit(inner_order)

    def f(r1: np.ndarray) -> np.ndarray:
        nodes, weights, owner = [], [], []
        for idx, a in enumerate(r1):
            lo = abs(a - q)
            hi = min(a + q, math.sqrt(max(r_sq - a * a, 0.0)))
            if hi <= lo:
                continue
            b = _graded_panels(kf, w, lo, hi) if kf is not None else np.array([lo, hi])
            h = np.diff(b)
            nd = (b[:-1, None] + h[:, None] * xg[None, :]).ravel()
            nodes.append(nd)
            weights.append((h[:, None] * wg[None, :]).ravel())
            owner.append(np.full(nd.shape, idx))
        out = np.zeros((len(r1), 38), dtype=complex)
        if not nodes:
            return out
        r2 = np.concatenate(nodes)
        wt = np.concatenate(weights)
        own = np.concatenate(owner)
        r1n = r1[own]
        geo = _PairGeometry.bipolar(r1n, r2, q)
        vals = _integrand_from_geometry(params, geo, z)
        vals *= (wt * r1n * r2 / (4.0 * math.pi ** 2 * q))[:, None]
        np.add.at(out, own, vals)
        return out

    top = lam + 0.5 * q
    switch = 0.5 * (-q + math.sqrt(max(2.0 * r_sq - q * q, 0.0)))
    return f, _outer_breaks(params, q, top, switch)


def _isotropic_integrand(params: SystemParams, z: complex):
    def f(r: np.ndarray) -> np.ndarray:
        geo = _PairGeometry.isotropic(r)
        vals = _integrand_from_geometry(params, geo, z)
        return vals * (r * r / (2.0 * math.pi ** 2))[:, None]

    kf = fermi_surface(params)
    pts = [np.array([0.0, params.lambda_cut]), np.linspace(0.0, params.lambda_cut, 9)]
    if kf is not None and kf < params.lambda_cut:
        pts.append(_graded_panels(kf, feature_width(params), 0.0, params.lambda_cut))
    return f, np.unique(np.concatenate(pts))


def _routing_shell(params: SystemParams, q: float) -> float:
    """sum over |p + q/2| < Lambda minus sum over |p| < Lambda of the gap summand."""
    if q == 0:
        return 0.0
    lam = params.lambda_cut
    c = 0.5 * q
    lo, hi = max(lam - c, 0.0), lam + c

    def f(r):
        fr = quasiparticle_frame(params, r)
        frac = np.clip((lam * lam - (r - c) ** 2) / (4.0 * r * c), 0.0, 1.0)
        inside = (r < lam).astype(float)
        return _gap_summand(params, fr) * (frac - inside) * r * r / (2.0 * math.pi ** 2)

    val, _ = adaptive_integrate(f, np.array([lo, lam, hi]), rtol=1e-10, atol=1e-16 * lam * lam)
    return float(val)


def pair_breaking_edge(params: SystemParams, q: float, n_grid: int = 4001) -> float:
    """min over the loop of E-_p + E-_{p+q}, found on a radial grid.

    For |p| = a the partner momentum |p + q| ranges over [|q - a|, q + a],
    so the partner takes the lowest E- on that interval.
    """
    kf = fermi_surface(params)
    r = np.linspace(0.0, params.lambda_cut, n_grid)
    if kf is not None and kf < params.lambda_cut:
        r = np.union1d(r, [kf])
    n_grid = len(r)
    e = quasiparticle_frame(params, r).e_minus
    # running minima of E- from the left and right support interval queries
    idx_lo = np.searchsorted(r, np.abs(q - r), side="left")
    idx_hi = np.searchsorted(r, np.minimum(q + r, r[-1]), side="right") - 1
    kf_idx = None if kf is None or kf >= params.lambda_cut else int(np.searchsorted(r, kf))
    best = np.inf
    for a, lo, hi in zip(range(n_grid), idx_lo, idx_hi):
        lo = min(lo, n_grid - 1)
        if kf_idx is not None and lo <= kf_idx <= hi:
            partner = e.min()
        else:
            # E- is monotone on either side of k_F
            partner = min(e[lo], e[max(hi, lo)])
        best = min(best, e[a] + partner)
    return float(best)


def _check_pinching(params: SystemParams, Q: FourMomentum) -> None:
    if Q.matsubara or Q.delta_broadening > 0 or Q.omega.real == 0:
        return
    w = abs(Q.omega.real)
    qa = Q.qabs
    r = np.linspace(0.0, params.lambda_cut, 4001)
    fr = quasiparticle_frame(params, r)
    edge = pair_breaking_edge(params, qa)
    if w >= edge:
        raise PolePinching(f"omega={w:g} reaches the pair-breaking continuum (edge {edge:g}) with zero broadening")
    if params.temperature > 0 and qa > 0:
        frk = quasiparticle_frame(params, r + qa)
        landau = float(np.max(np.abs(frk.e_minus - fr.e_minus)))
        if w <= landau:
            raise PolePinching(f"omega={w:g} lies inside the thermal particle-hole continuum with zero broadening")


@dataclass(frozen=True)
class ResponseMatrix:
    """6x6 response matrix over (D1, D2, A0, A1, A2, A3) at one four-momentum."""

    matrix: np.ndarray
    q_tilde11: complex
    q_tilde22: complex
    Q: FourMomentum
    params: SystemParams
    error: float = 0.0

    def __getitem__(self, key):
        return self.matrix[key]

    @property
    def q11(self) -> complex:
        return self.matrix[0, 0]

    @property
    def q22(self) -> complex:
        return self.matrix[1, 1]

    @property
    def q12(self) -> complex:
        return self.matrix[0, 1]

    @property
    def q21(self) -> complex:
        return self.matrix[1, 0]

    @property
    def q13(self) -> np.ndarray:
        return self.matrix[0, 2:]

    @property
    def q23(self) -> np.ndarray:
        return self.matrix[1, 2:]

    @property
    def q31(self) -> np.ndarray:
        return self.matrix[2:, 0]

    @property
    def q32(self) -> np.ndarray:
        return self.matrix[2:, 1]

    @property
    def q33(self) -> np.ndarray:
        return self.matrix[2:, 2:]

    def tilde(self) -> np.ndarray:
        """Matrix with the pairing diagonals replaced by Q-tilde."""
        out = self.matrix.copy()
        out[0, 0] = self.q_tilde11
        out[1, 1] = self.q_tilde22
        return out


def _integrate(params: SystemParams, Q: FourMomentum, rtol: float, inner_order: int):
    qa = Q.qabs
    if qa == 0:
        f, breaks = _isotropic_integrand(params, Q.omega)
    else:
        f, breaks = _bipolar_integrand(params, qa, Q.omega, inner_order)
    val, err = adaptive_integrate(f, breaks, rtol=rtol, atol=1e-300)
    return np.asarray(val), err


def _rotate_from_z(mat: np.ndarray, q) -> np.ndarray:
    """Rotate Lorentz components computed with q along +z into the frame of ``q``."""
    q = np.asarray(q, dtype=float)
    qa = np.linalg.norm(q)
    if qa == 0 or (q[0] == 0 and q[1] == 0 and q[2] > 0):
        return mat
    zhat = q / qa
    ref = np.array([1.0, 0.0, 0.0]) if abs(zhat[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    xhat = ref - zhat * (ref @ zhat)
    xhat /= np.linalg.norm(xhat)
    yhat = np.cross(zhat, xhat)
    rot = np.eye(6)
    rot[3:, 3:] = np.stack([xhat, yhat, zhat], axis=1)
    return rot @ mat @ rot.T


def assemble_response_matrix(
    params: SystemParams,
    Q: FourMomentum,
    rtol: float = QUAD_RTOL,
    fill: str = "symmetry",
    inner_order: int = INNER_ORDER,
) -> ResponseMatrix:
    """Integrate the sixteen-pole expression and assemble the 6x6 response matrix.

    With ``fill="symmetry"`` the lower triangle is taken from the upper one
    through Q_ji = (-1)^(d_2i + d_2j) Q_ij; ``fill="direct"`` keeps every
    integrated entry, which is what the symmetry checks compare against.
    """
    if fill not in ("symmetry", "direct"):
        raise ValueError("fill must be 'symmetry' or 'direct'")
    _check_pinching(params, Q)
    val, err = _integrate(params, Q, rtol, inner_order)
    mat = val[:36].reshape(6, 6).copy()
    inv_g = inverse_coupling(params)
    anchor = 2.0 * inv_g - 2.0 * gap_rhs(params) - 2.0 * _routing_shell(params, Q.qabs)
    qt11 = anchor + val[36]
    qt22 = anchor + val[37]
    mat[0, 0] = qt11 - 2.0 * inv_g
    mat[1, 1] = qt22 - 2.0 * inv_g
    if fill == "symmetry":
        sign = np.ones(6)
        sign[1] = -1.0
        parity = np.outer(sign, sign)
        upper = np.triu(np.ones((6, 6), dtype=bool), 1)
        mat = np.where(upper.T, (parity * mat).T, mat)
    mat = _rotate_from_z(mat, Q.q)
    return ResponseMatrix(mat, complex(qt11), complex(qt22), Q, params, float(err))


def qij(params: SystemParams, Q: FourMomentum, channel: str, rtol: float = QUAD_RTOL):
    """Integrated response of one channel: scalar, 4-vector or 4x4 tensor."""
    rows, cols = _channel_slice(channel)
    block = assemble_response_matrix(params, Q, rtol=rtol).matrix[rows, cols]
    if block.size == 1:
        return complex(block.reshape(()))
    if block.shape[0] == 1 or block.shape[1] == 1:
        return block.ravel()
    return block


# ---------------------------------------------------------------------------
# odevity relations

_S_INDEX = np.array([1.0, -1.0, 1.0, 1.0, 1.0, 1.0])
_S_SPACE = np.array([1.0, 1.0, 1.0, -1.0, -1.0, -1.0])
INDEX_PARITY = np.outer(_S_INDEX, _S_INDEX)
SPATIAL_PARITY = np.outer(_S_SPACE, _S_SPACE)
# frequency parity follows from the other two: even/odd table of every block
FREQUENCY_PARITY = INDEX_PARITY * SPATIAL_PARITY


def symmetry_residuals(params: SystemParams, Q: FourMomentum, rtol: float = QUAD_RTOL) -> dict[str, float]:
    """Largest violation of each odevity relation, relative to max |Q_ij|.

    * four_momentum: Q_ij(Q) = (-1)^(d2i+d2j) Q_ij(-Q)
    * index: Q_ji(Q) = (-1)^(d2i+d2j) Q_ij(Q)
    * spatial: Q_ij(z, q) = s_i s_j Q_ij(z, -q) with s = -1 on spatial Lorentz slots
    * frequency: the even/odd table in z at fixed q
    """
    if not Q.matsubara:
        raise ValueError("the odevity relations are stated on the Matsubara axis")
    base = assemble_response_matrix(params, Q, rtol=rtol, fill="direct").matrix
    neg = assemble_response_matrix(params, Q.negated(), rtol=rtol, fill="direct").matrix
    refl = assemble_response_matrix(params, Q.reflected(), rtol=rtol, fill="direct").matrix
    flip = FourMomentum(-Q.omega, Q.q, 0.0, True)
    freq = assemble_response_matrix(params, flip, rtol=rtol, fill="direct").matrix
    scale = float(np.abs(base).max())

    def rel(a: np.ndarray) -> float:
        return float(np.abs(a).max() / scale)

    return {
        "four_momentum": rel(base - INDEX_PARITY * neg),
        "index": rel(base.T - INDEX_PARITY * base),
        "spatial": rel(base - SPATIAL_PARITY * refl),
        "frequency": rel(base - FREQUENCY_PARITY * freq),
    }
