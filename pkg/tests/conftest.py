import numpy as np
import pytest

from malthus import (BetaFragmentation, ConstantHazard, FirstJumpLaw,
                     KernelAssembler, SizeGrid, UniformFragmentation,
                     make_adder, solve_malthus)


@pytest.fixture(scope="session")
def adder():
    """Reference model: unit elongation, constant hazard, Beta(5,5) splits."""
    return make_adder(1.0, ConstantHazard(1.0), BetaFragmentation(5, 5))


@pytest.fixture(scope="session")
def adder_d0():
    return make_adder(1.0, ConstantHazard(1.0), BetaFragmentation(5, 5), d0=0.2)


@pytest.fixture(scope="session")
def adder_uniform():
    return make_adder(1.0, ConstantHazard(1.0), UniformFragmentation())


@pytest.fixture(scope="session")
def law(adder):
    return FirstJumpLaw(adder)


@pytest.fixture(scope="session")
def assembler_r8(adder, law):
    return KernelAssembler(adder, SizeGrid.uniform(8.0, 256), law)


@pytest.fixture(scope="session")
def eigen_r8(assembler_r8):
    return solve_malthus(assembler_r8)
