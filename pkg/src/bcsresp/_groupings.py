"""Closed-form coherence-coefficient groupings, transcribed as displayed.

Each entry is either a single coefficient ("u-v+") or an even/odd
combination ("u-u- + v-v-", "u-u- - v-v-"), always with the operator at p+q
written first. Scalars are returned for the pairing channels, 4-vectors for
13/23 and 4x4 tensors for 33, with NaN in the Lorentz components the display
does not cover. Nothing here is derived: the formulas are copied verbatim so
that the trace-based coefficients can audit them (see the ledger for the
entries that do not match).
"""

from __future__ import annotations

import numpy as np

from .equilibrium import SystemParams, quasiparticle_frame

_NAN = float("nan")


class _Pair:
    """Quantities of one (branch at p+q, branch at p) combination."""

    def __init__(self, params: SystemParams, p: np.ndarray, q: np.ndarray, bk: str, bp: str):
        k = p + q
        fk = quasiparticle_frame(params, np.array([np.linalg.norm(k)]))
        fp = quasiparticle_frame(params, np.array([np.linalg.norm(p)]))
        self.d = params.delta
        self.xk = float(fk.xi_minus[0] if bk == "-" else fk.xi_plus[0])
        self.xp = float(fp.xi_minus[0] if bp == "-" else fp.xi_plus[0])
        self.ek = float(fk.e_minus[0] if bk == "-" else fk.e_plus[0])
        self.ep = float(fp.e_minus[0] if bp == "-" else fp.e_plus[0])
        epsk, epsp = float(fk.eps[0]), float(fp.eps[0])
        norm = epsk * epsp
        pq = float(p @ q)
        self.a = (epsk * epsp - epsp ** 2 - pq) / norm
        self.b = (epsk * epsp + epsp ** 2 + pq) / norm
        self.s = (epsk * p + epsp * k) / norm
        self.dv = (k * epsp - p * epsk) / norm
        outer = np.outer(k, p) + np.outer(p, k)
        self.tb = (outer + np.eye(3) * (epsk * epsp - epsp ** 2 - pq)) / norm
        self.ta = (outer - np.eye(3) * (epsk * epsp + epsp ** 2 + pq)) / norm

    def ratio(self, sign: float) -> float:
        """(xi_k xi_p + sign Delta^2) / (E_k E_p)."""
        return (self.xk * self.xp + sign * self.d ** 2) / (self.ek * self.ep)


def _tensor(t00=None, tij=None, t0i=None) -> np.ndarray:
    out = np.full((4, 4), _NAN, dtype=complex)
    if t00 is not None:
        out[0, 0] = t00
    if tij is not None:
        out[1:, 1:] = tij
    if t0i is not None:
        out[0, 1:] = t0i
        out[1:, 0] = t0i
    return out


def _vector(v0=None, vi=None) -> np.ndarray:
    out = np.full(4, _NAN, dtype=complex)
    if v0 is not None:
        out[0] = v0
    if vi is not None:
        out[1:] = vi
    return out


def _same_branch(x: _Pair, b: str) -> dict[str, dict[str, object]]:
    """Displays for (u u) / (v v) and (u v) / (v u) within one branch."""
    d = x.d
    ik, ip = 1.0 / x.ek, 1.0 / x.ep
    rk, rp = x.xk / x.ek, x.xp / x.ep
    uu, vv, uv, vu = f"u{b}u{b}", f"v{b}v{b}", f"u{b}v{b}", f"v{b}u{b}"
    out: dict[str, dict[str, object]] = {"11": {}, "22": {}, "12": {}, "13": {}, "23": {}, "33": {}}
    for lbl in (uu, vv):
        out["11"][lbl] = 0.5 * (1.0 - x.ratio(-1)) * x.b
        out["22"][lbl] = 0.5 * (1.0 - x.ratio(+1)) * x.b
    for lbl in (uv, vu):
        out["11"][lbl] = 0.5 * (1.0 + x.ratio(-1)) * x.b
        out["22"][lbl] = 0.5 * (1.0 + x.ratio(+1)) * x.b
    out["33"][f"{uu} + {vv}"] = _tensor((1.0 + x.ratio(-1)) * x.b, (1.0 + x.ratio(+1)) * x.tb)
    out["33"][f"{uv} + {vu}"] = _tensor((1.0 - x.ratio(-1)) * x.b, (1.0 - x.ratio(+1)) * x.tb)
    if b == "-":
        out["33"][f"{uu} - {vv}"] = _tensor(t0i=np.full(3, 0.5j * (rp - rk) * x.b))
        out["33"][f"{uv} - {vu}"] = _tensor(t0i=(rk - rp) * x.s)
        out["12"][uv] = -0.5j * (rp + rk) * x.b
        out["12"][vu] = -out["12"][uv]
        out["13"][f"{uu} + {vv}"] = _vector(v0=-d * (x.xp + x.xk) * ip * ik * x.b)
        out["13"][f"{uu} - {vv}"] = _vector(vi=-d * (ik + ip) * x.s)
        out["13"][f"{uv} + {vu}"] = _vector(v0=d * (x.xp + x.xk) * ip * ik * x.b)
        out["13"][f"{uv} - {vu}"] = _vector(vi=-d * (ik - ip) * x.s)
        out["23"][f"{uu} - {vv}"] = _vector(v0=1j * d * (ik - ip) * x.b)
        out["23"][f"{uu} + {vv}"] = _vector(vi=1j * d * (x.xp - x.xk) * ip * ik * x.s)
        out["23"][f"{uv} - {vu}"] = _vector(v0=1j * d * (ik + ip) * x.b)
        out["23"][f"{uv} + {vu}"] = _vector(vi=-1j * d * (x.xp - x.xk) * ip * ik * x.s)
    else:
        # displayed under the label "mu = nu = 0 or mu = i, nu = j"; only a
        # time-space reading is dimensionally possible for a vector formula
        out["33"][f"{uu} - {vv}"] = _tensor(t0i=-(rk + rp) * x.s)
        out["33"][f"{uv} - {vu}"] = _tensor(t0i=-(rk - rp) * x.s)
        out["12"][uu] = 0.5j * (rp - rk) * x.b
        out["12"][vv] = -out["12"][uu]
        out["12"][uv] = -0.5j * (rp + rk) * x.b
        out["12"][vu] = -out["12"][uv]
        out["13"][f"{uu} + {vv}"] = _vector(v0=d * (x.xp + x.xk) * ip * ik * x.b)
        out["13"][f"{uu} - {vv}"] = _vector(vi=-d * (ik + ip) * x.s)
        out["13"][f"{uv} + {vu}"] = _vector(v0=d * (x.xp + x.xk) * ip * ik * x.b)
        out["13"][f"{uv} - {vu}"] = _vector(vi=-d * (ik - ip) * x.s)
        out["23"][f"{uu} - {vv}"] = _vector(v0=-1j * d * (ik - ip) * x.b)
        out["23"][f"{uu} + {vv}"] = _vector(vi=1j * d * (x.xp - x.xk) * ip * ik * x.s)
        out["23"][f"{uv} - {vu}"] = _vector(v0=-1j * d * (ik + ip) * x.b)
        out["23"][f"{uv} + {vu}"] = _vector(vi=-1j * d * (x.xp - x.xk) * ip * ik * x.s)
    # (u- u-)_12 and (v- v-)_12 are not displayed
    return out


def _mixed(x: _Pair, bk: str, bp: str) -> dict[str, dict[str, object]]:
    """Displays for the branch-mixing pairs (bk at p+q, bp at p)."""
    d = x.d
    ik, ip = 1.0 / x.ek, 1.0 / x.ep
    rk, rp = x.xk / x.ek, x.xp / x.ep
    uu, vv, uv, vu = f"u{bk}u{bp}", f"v{bk}v{bp}", f"u{bk}v{bp}", f"v{bk}u{bp}"
    lead = 1.0 if bk == "-" else -1.0  # the displays flip these signs between the two orders
    out: dict[str, dict[str, object]] = {"11": {}, "22": {}, "12": {}, "13": {}, "23": {}, "33": {}}
    for lbl in (uu, vv):
        out["11"][lbl] = 0.5 * (1.0 - x.ratio(+1)) * x.a
        out["22"][lbl] = 0.5 * (1.0 - x.ratio(-1)) * x.a
    for lbl in (uv, vu):
        out["11"][lbl] = 0.5 * (1.0 + x.ratio(+1)) * x.a
        out["22"][lbl] = 0.5 * (1.0 + x.ratio(-1)) * x.a
    out["33"][f"{uu} + {vv}"] = _tensor((1.0 + x.ratio(+1)) * x.a, -(1.0 + x.ratio(-1)) * x.ta)
    out["33"][f"{uv} + {vu}"] = _tensor((1.0 - x.ratio(+1)) * x.a, -(1.0 - x.ratio(-1)) * x.ta)
    out["33"][f"{uu} - {vv}"] = _tensor(t0i=lead * (rk + rp) * x.dv)
    out["33"][f"{uv} - {vu}"] = _tensor(t0i=lead * (rk - rp) * x.dv)
    out["12"][uu] = 0.5j * (rp - rk) * x.a
    out["12"][vv] = -out["12"][uu]
    out["12"][uv] = -0.5j * (rp + rk) * x.a
    out["12"][vu] = -out["12"][uv]
    if bk == "-":
        out["13"][f"{uu} + {vv}"] = _vector(v0=d * (x.xk - x.xp) * ik * ip * x.a)
        out["13"][f"{uv} + {vu}"] = _vector(v0=d * (x.xp - x.xk) * ik * ip * x.a)
    else:
        out["13"][f"{uu} + {vv}"] = _vector(v0=d * (x.xp - x.xk) * ik * ip * x.a)
        out["13"][f"{uv} + {vu}"] = _vector(v0=d * (x.xk - x.xp) * ik * ip * x.a)
    out["13"][f"{uu} - {vv}"] = _vector(vi=-d * (ik - ip) * x.dv)
    out["13"][f"{uv} - {vu}"] = _vector(vi=-d * (ik + ip) * x.dv)
    out["23"][f"{uu} - {vv}"] = _vector(v0=lead * 1j * d * (ik + ip) * x.a)
    out["23"][f"{uv} - {vu}"] = _vector(v0=lead * 1j * d * (ik - ip) * x.a)
    out["23"][f"{uu} + {vv}"] = _vector(vi=1j * d * (x.xk + x.xp) * ik * ip * x.dv)
    out["23"][f"{uv} + {vu}"] = _vector(vi=-1j * d * (x.xk + x.xp) * ik * ip * x.dv)
    return out


# (channel, label) pairs whose displayed form disagrees with the trace
DISPLAY_ERRATA: dict[tuple[str, str], str] = {
    ("33", "u-u- - v-v-"): "displayed as a scalar; the time-space entries are (xi_k/E_k + xi_p/E_p) S^i",
    ("13", "u+v+ + v+u+"): "overall sign reversed",
}


def _corrections(x: _Pair, bk: str, bp: str, channel: str) -> dict[str, np.ndarray]:
    if bk != bp:
        return {}
    if channel == "33" and bk == "-":
        return {"u-u- - v-v-": _tensor(t0i=(x.xk / x.ek + x.xp / x.ep) * x.s)}
    if channel == "13" and bk == "+":
        return {"u+v+ + v+u+": _vector(v0=-x.d * (x.xp + x.xk) / (x.ek * x.ep) * x.b)}
    return {}


def displayed_groupings(
    params: SystemParams, p, q, channel: str, corrected: bool = False
) -> dict[str, np.ndarray]:
    """All displayed closed forms for ``channel`` at loop momentum p and transfer q.

    With ``corrected=True`` the entries listed in :data:`DISPLAY_ERRATA` are
    replaced by the forms that agree with the traced coefficients.
    """
    p = np.asarray(p, dtype=float).reshape(3)
    q = np.asarray(q, dtype=float).reshape(3)
    out: dict[str, np.ndarray] = {}
    for bk in "-+":
        for bp in "-+":
            x = _Pair(params, p, q, bk, bp)
            table = _same_branch(x, bk) if bk == bp else _mixed(x, bk, bp)
            for label, value in table[channel].items():
                out[label] = np.asarray(value)
            if corrected:
                out.update(_corrections(x, bk, bp, channel))
    return out
