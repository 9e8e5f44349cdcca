import numpy as np
import pytest

from threelines import solver, surface, trinoid
from threelines.verify import symmetric_config


@pytest.fixture(scope="session")
def sym_cfg():
    return symmetric_config()


@pytest.fixture(scope="session")
def sym_solutions(sym_cfg):
    ends, _, _, eps = solver.prepare(sym_cfg)
    return solver.solve_pqr(ends, eps)


@pytest.fixture(scope="session")
def sym_ev(sym_cfg):
    return surface.WeierstrassEvaluator(solver.construct(sym_cfg))


@pytest.fixture(scope="session")
def sym_mesh(sym_ev):
    return surface.normalize_translation(surface.generate_mesh(sym_ev, 48))


@pytest.fixture(scope="session")
def spec06():
    return trinoid.TrinoidSpec(0.6, 0.6, 0.6)


@pytest.fixture(scope="session")
def trinoid06(spec06):
    return trinoid.trinoid_mesh(spec06, 24)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
