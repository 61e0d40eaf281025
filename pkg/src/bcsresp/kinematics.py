"""External boson four-momentum and the scalar kinematic factors built from it."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class FourMomentum:
    """Boson momentum Q = (z, q).

    ``omega`` is the complex frequency entering every energy denominator:
    i*Omega_l on the Matsubara axis or w + i*delta after continuation.
    ``q`` is the spatial momentum; the response integrals take it along +z.
    """

    omega: complex
    q: tuple[float, float, float]
    delta_broadening: float = 0.0
    matsubara: bool = field(default=True)

    def __post_init__(self) -> None:
        object.__setattr__(self, "omega", complex(self.omega))
        object.__setattr__(self, "q", tuple(float(x) for x in self.q))
        if len(self.q) != 3:
            raise ValueError("q must be a 3-vector")
        if self.delta_broadening < 0:
            raise ValueError("delta_broadening must be non-negative")
        if self.matsubara:
            if self.omega.real != 0.0:
                raise ValueError("Matsubara frequencies are purely imaginary")
        elif self.omega.imag != self.delta_broadening:
            raise ValueError("real-axis frequency must carry Im(omega) = delta_broadening")

    @classmethod
    def matsubara_point(cls, l: int, temperature: float, q) -> "FourMomentum":
        """Q = (i 2 pi l T, q)."""
        return cls(omega=1j * 2.0 * math.pi * l * temperature, q=q, matsubara=True)

    @classmethod
    def real_axis(cls, w: float, q, delta: float = 1e-4) -> "FourMomentum":
        return cls(omega=complex(w, delta), q=q, delta_broadening=delta, matsubara=False)

    @property
    def qabs(self) -> float:
        return float(np.linalg.norm(self.q))

    def negated(self) -> "FourMomentum":
        """-Q; on the real axis the broadening is kept on the retarded side."""
        if self.matsubara:
            return FourMomentum(-self.omega, tuple(-x for x in self.q), 0.0, True)
        return FourMomentum(complex(-self.omega.real, self.delta_broadening), tuple(-x for x in self.q),
                            self.delta_broadening, False)

    def reflected(self) -> "FourMomentum":
        """(z, -q)."""
        return FourMomentum(self.omega, tuple(-x for x in self.q), self.delta_broadening, self.matsubara)

    def covariant(self) -> np.ndarray:
        """q_mu with lower index: (z, -q)."""
        return np.array([self.omega, -self.q[0], -self.q[1], -self.q[2]], dtype=complex)


def kinematic_factors(p, q, m: float) -> tuple[np.ndarray, np.ndarray]:
    """Normalized (A, B) = (A(p,q), B(p,q)) / (eps_{p+q} eps_p).

    A = eps_{p+q} eps_p - eps_p^2 - p.q and B = eps_{p+q} eps_p + eps_p^2 + p.q,
    so the normalized pair always sums to 2.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    k = p + q
    ek = np.sqrt(np.sum(k * k, axis=-1) + m * m)
    ep = np.sqrt(np.sum(p * p, axis=-1) + m * m)
    pq = np.sum(p * q, axis=-1)
    a = (ek * ep - ep * ep - pq) / (ek * ep)
    return a, 2.0 - a
