"""
Pytest configuration and fixtures
"""
import numpy as np
import pytest

from states import LabeledState, named_state, random_state, tensor_states
from tensor import SystemDims


def _state(mat, **dims) -> LabeledState:
    return LabeledState(np.asarray(mat, dtype=np.complex128), SystemDims.of(**dims))


@pytest.fixture
def qubit_zero():
    """|0⟩⟨0| on A"""
    return _state([[1, 0], [0, 0]], A=2)


@pytest.fixture
def qubit_plus():
    """|+⟩⟨+| on A"""
    return _state([[0.5, 0.5], [0.5, 0.5]], A=2)


@pytest.fixture
def ghz3():
    return named_state("ghz3")


@pytest.fixture
def product_state():
    return named_state("product")


@pytest.fixture
def cq_markov():
    return named_state("cq_markov")


@pytest.fixture
def max_entangled():
    return named_state("max_entangled")


@pytest.fixture
def tripartite():
    """Factory for seeded random states on A ⊗ B ⊗ C"""

    def make(seed, rank=2, dims=(2, 2, 2)):
        d_a, d_b, d_c = dims
        return random_state(SystemDims.of(A=d_a, B=d_b, C=d_c), rank, seed=seed)

    return make


@pytest.fixture
def recoverable_pair():
    """Factory for (ρ_A ⊗ ρ_B, ρ_A ⊗ σ_C), whose fidelity of recovery is 1"""

    def make(seed, sigma_rank=2):
        rho_a = random_state(SystemDims.of(A=2), 2, seed=seed)
        rho_b = random_state(SystemDims.of(B=2), 2, seed=seed + 1)
        sigma_c = random_state(SystemDims.of(C=2), sigma_rank, seed=seed + 2)
        return tensor_states(rho_a, rho_b), tensor_states(rho_a, sigma_c)

    return make


@pytest.fixture
def report_dir(tmp_path):
    """Temporary directory for sweep reports"""
    path = tmp_path / "reports"
    path.mkdir()
    return path
