"""Gauge-invariant linear response of relativistic BCS superfluids."""

from .equilibrium import (
    QuasiparticleFrame,
    SystemParams,
    coupling_for,
    fermi,
    fermi_momentum,
    gap_rhs,
    number_density,
    quasiparticle_frame,
    solve_gap,
    solve_mu,
)
from .gauge import (
    cutoff_surface_terms,
    full_kernel,
    gauge_shift,
    gwi_residuals,
    induced_fluctuations,
    invariant_vertex,
)
from .kinematics import FourMomentum
from .observables import (
    compressibility_report,
    fit_sound_speed,
    goldstone_dispersion,
    goldstone_gap,
    london_current,
    meissner_kernel,
)
from .response import ResponseMatrix, assemble_response_matrix, qij, symmetry_residuals

__all__ = [
    "FourMomentum",
    "QuasiparticleFrame",
    "ResponseMatrix",
    "SystemParams",
    "assemble_response_matrix",
    "compressibility_report",
    "coupling_for",
    "cutoff_surface_terms",
    "fermi",
    "fermi_momentum",
    "fit_sound_speed",
    "full_kernel",
    "gap_rhs",
    "gauge_shift",
    "goldstone_dispersion",
    "goldstone_gap",
    "gwi_residuals",
    "induced_fluctuations",
    "invariant_vertex",
    "london_current",
    "meissner_kernel",
    "number_density",
    "qij",
    "quasiparticle_frame",
    "solve_gap",
    "solve_mu",
    "symmetry_residuals",
]
