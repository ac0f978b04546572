import math

import numpy as np
import pytest

from secsource.probability import Pmf, SourceModel, StochasticMatrix, bsc, build_joint


def h2(p: float) -> float:
    """Binary entropy in bits (independent oracle for the tests)."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def star(a: float, b: float) -> float:
    """Crossover of two composed binary symmetric channels."""
    return a * (1.0 - b) + (1.0 - a) * b


def entropy_oracle(table) -> float:
    """Plain-loop Shannon entropy in bits, independent of the library path."""
    total = 0.0
    for p in np.asarray(table, dtype=float).ravel():
        if p > 0.0:
            total -= p * math.log2(p)
    return total


def mi_oracle(joint_2d) -> float:
    """Plain-loop mutual information of a 2-D joint table."""
    j = np.asarray(joint_2d, dtype=float)
    pa = j.sum(axis=1)
    pb = j.sum(axis=0)
    total = 0.0
    for a in range(j.shape[0]):
        for b in range(j.shape[1]):
            if j[a, b] > 0.0:
                total += j[a, b] * math.log2(j[a, b] / (pa[a] * pb[b]))
    return total


def random_model(rng: np.random.Generator, nx=2, nxt=2, ny=2, nz=2) -> SourceModel:
    """Random source model with Y, Z conditionally independent given X."""
    return SourceModel.from_channels(
        Pmf(rng.dirichlet(np.ones(nx))),
        StochasticMatrix(rng.dirichlet(np.ones(nxt), size=nx)),
        StochasticMatrix(rng.dirichlet(np.ones(ny), size=nx)),
        StochasticMatrix(rng.dirichlet(np.ones(nz), size=nx)),
    )


@pytest.fixture(scope="session")
def binary_model() -> SourceModel:
    """The running binary instance: X uniform, Xt via BSC(0.1), Y via BSC(0.2),
    Z via BSC(0.3), with Y and Z independent given X."""
    return SourceModel.from_channels(Pmf.uniform(2), bsc(0.1), bsc(0.2), bsc(0.3))


@pytest.fixture(scope="session")
def binary_joint(binary_model):
    return build_joint(binary_model)
