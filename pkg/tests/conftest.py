from __future__ import annotations

import time

import numpy as np
import pytest

from bcsresp.equilibrium import SystemParams, coupling_for
from bcsresp.kinematics import FourMomentum
from bcsresp.response import assemble_response_matrix

# reference state shared by the Ward identity and oracle checks
REF = dict(m=1.0, mu=1.2, delta=0.1, lambda_cut=10.0)
HOT_T = 0.02
GWI_SEED = 20240611
N_GWI = 20

# lines collected by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def random_matsubara_points(n: int, temperature: float, seed: int, l_max: int = 5,
                            q_lo: float = 0.05, q_hi: float = 1.0) -> list[FourMomentum]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        l = int(rng.integers(1, l_max + 1)) * int(rng.choice([-1, 1]))
        d = rng.normal(size=3)
        q = d / np.linalg.norm(d) * rng.uniform(q_lo, q_hi)
        out.append(FourMomentum.matsubara_point(l, temperature, tuple(q)))
    return out


@pytest.fixture(scope="session")
def hot_state() -> SystemParams:
    return coupling_for(SystemParams(g=None, temperature=HOT_T, **REF))


@pytest.fixture(scope="session")
def cold_state() -> SystemParams:
    return coupling_for(SystemParams(g=None, temperature=0.0, **REF))


@pytest.fixture(scope="session")
def gwi_points() -> list[FourMomentum]:
    return random_matsubara_points(N_GWI, HOT_T, GWI_SEED)


@pytest.fixture(scope="session")
def gwi_run(hot_state, gwi_points):
    """Response matrices at the random Ward identity points and the wall time they took."""
    start = time.perf_counter()
    mats = [assemble_response_matrix(hot_state, Q) for Q in gwi_points]
    return mats, time.perf_counter() - start


@pytest.fixture(scope="session")
def gwi_matrices(gwi_run):
    return gwi_run[0]


@pytest.fixture(scope="session")
def sample_matrix(gwi_matrices):
    return gwi_matrices[0]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
