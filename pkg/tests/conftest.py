import math

import pytest

from casimir_lateral.materials import Plasma
from casimir_lateral.polarizability import ParticleModel

GOLD_OMEGA_P = 1.385e16


@pytest.fixture
def gold():
    return Plasma(GOLD_OMEGA_P)


@pytest.fixture
def gold_particle(gold):
    return ParticleModel(2.0, 1e-24, gold, math.pi / 2, 0.0)
