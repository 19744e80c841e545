import numpy as np
import pytest

from ejof import (
    Perturbation,
    ThreeLevelParams,
    random_structured_instance,
    repetition_code_recovery,
    three_level_system,
)


@pytest.fixture
def three_level():
    """Detuned three-level system with its weak-decay perturbation."""
    return three_level_system(ThreeLevelParams(delta=1.0, Gamma=2.0, gamma=0.04))


@pytest.fixture
def repetition():
    """Repetition-code recovery channel and its continuous-recovery generator."""
    return repetition_code_recovery()


@pytest.fixture
def generic_instance():
    """One random structured instance with a full-corner perturbation."""
    return random_structured_instance(2, 3, 2, seed=11)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def random_density(rng, dim):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def density_factory(rng):
    return lambda dim: random_density(rng, dim)
