import numpy as np
import pytest

from plantflow import PlantChain, Weibull
from plantflow.io import bundled_species

N_RANDOM_CHAINS = 100


def random_weibull(rng) -> Weibull:
    return Weibull(rng.uniform(0.1, 50.0), rng.uniform(0.5, 6.0), rng.uniform(1.0, 12.0))


def random_chains(n_segments: int, count: int = N_RANDOM_CHAINS, seed: int = 20240611):
    rng = np.random.default_rng(seed + n_segments)
    chains = []
    for _ in range(count):
        curves = [random_weibull(rng) for _ in range(n_segments)]
        chains.append(PlantChain.from_curves(rng.uniform(0.0, 0.5), curves))
    return chains


@pytest.fixture(scope="session")
def species_chains():
    return {rec.key: rec.chain for rec in bundled_species()}


@pytest.fixture(scope="session")
def a_rubrum(species_chains):
    return species_chains["a_rubrum"]
