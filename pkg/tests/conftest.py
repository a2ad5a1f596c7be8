import numpy as np
import pytest

from tpslab.hamiltonians import RandomSpec, build_random_gue, haar_vector, philox_generator
from tpslab.qla import eig_hermitian
from tpslab.tps import tps1_from_spectrum, tps2_from_spectrum


def random_state(seed, dim, stream=0):
    return haar_vector(philox_generator(seed, stream), dim)


def random_density(seed, dim, rank=None):
    rng = philox_generator(seed, 7)
    rank = rank or dim
    z = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = z @ z.conj().T
    return rho / np.trace(rho).real


@pytest.fixture(scope="session")
def gue12():
    return eig_hermitian(build_random_gue(RandomSpec(d=12, seed=7)))


@pytest.fixture(scope="session")
def gue16():
    return eig_hermitian(build_random_gue(RandomSpec(d=16, seed=11)))


@pytest.fixture(scope="session")
def tps1_12(gue12):
    return tps1_from_spectrum(gue12, 3, 4)


@pytest.fixture(scope="session")
def tps2_12(gue12):
    return tps2_from_spectrum(gue12, 3, 4)
