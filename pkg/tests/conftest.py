import math

import numpy as np
import pytest

from biasdens import BiasSpec, corner_density

# independent brute-force quadrature; never routed through biasdens
ORACLE_NODES = 100_001


def trapezoid_oracle(fn, a=0.0, b=1.0, nodes=ORACLE_NODES):
    x = np.linspace(a, b, nodes)
    return float(np.trapezoid(fn(x), x))


def truncated_gauss(mean, sd):
    """Truncated normal on [0, 1] normalized by brute-force quadrature."""

    def raw(x):
        return np.exp(-0.5 * ((x - mean) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))

    z = trapezoid_oracle(raw)
    return lambda x: raw(x) / z


# the four reference (density, bias) settings
REFERENCE_CONFIGS = {
    "normal-direct": ("normal", "const"),
    "normal-linear": ("normal", "linear:0.1,0.9"),
    "monotone-direct": ("monotone", "const"),
    "monotone-linear": ("monotone", "linear:1,-0.95"),
}


@pytest.fixture
def normal():
    return corner_density("normal")


@pytest.fixture
def monotone():
    return corner_density("monotone")


@pytest.fixture
def uniform():
    return corner_density("uniform")


@pytest.fixture
def length_bias():
    return BiasSpec.linear(0.1, 0.9)


@pytest.fixture
def decreasing_bias():
    return BiasSpec.linear(1.0, -0.95)
