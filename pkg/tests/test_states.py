"""
Tests for states, purification and generators
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import config
from states import (
    NAMED_STATES,
    LabeledState,
    PureState,
    RandomMeasure,
    StateError,
    haar_unitary,
    instance_seed,
    make_rng,
    named_state,
    project_to_state,
    purify,
    random_pure_state,
    random_state,
    schmidt,
    tensor_states,
)
from tensor import SystemDims


class TestLabeledState:
    """Test LabeledState validation and views"""

    def test_trace_must_be_one(self):
        with pytest.raises(StateError, match="trace"):
            LabeledState(np.eye(2), SystemDims.of(A=2))

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(StateError, match="negative eigenvalue"):
            LabeledState(np.diag([1.2, -0.2]), SystemDims.of(A=2))

    def test_non_hermitian_rejected(self):
        with pytest.raises(StateError, match="Invalid state"):
            LabeledState(np.array([[0.5, 0.5], [0.0, 0.5]]), SystemDims.of(A=2))

    def test_matrix_is_read_only(self, qubit_zero):
        """Test states are immutable"""
        with pytest.raises(ValueError):
            qubit_zero.mat[0, 0] = 0.5

    def test_marginal_of_ghz(self, ghz3):
        """Test every single-qubit marginal of GHZ is maximally mixed"""
        for label in ("A", "B", "C"):
            assert np.allclose(ghz3.marginal([label]).mat, np.eye(2) / 2)

    def test_marginal_keeps_factor_order(self, product_state):
        assert product_state.marginal(["C", "A"]).labels == ("A", "C")

    def test_permuted_and_relabeled(self, product_state):
        """Test reorder and rename keep the operator consistent"""
        moved = product_state.permuted(["C", "B", "A"])
        assert moved.labels == ("C", "B", "A")
        assert np.allclose(moved.marginal(["A"]).mat, product_state.marginal(["A"]).mat)
        renamed = product_state.relabeled({"C": "E"})
        assert renamed.labels == ("A", "B", "E")

    def test_purity_and_rank(self, ghz3, product_state):
        assert ghz3.purity == pytest.approx(1.0)
        assert ghz3.rank == 1
        assert product_state.rank == 8


class TestPureState:
    """Test PureState"""

    def test_norm_checked(self):
        with pytest.raises(StateError, match="norm"):
            PureState(np.array([1.0, 1.0]), SystemDims.of(A=2))

    def test_length_checked(self):
        with pytest.raises(StateError, match="length"):
            PureState(np.array([1.0, 0.0, 0.0]), SystemDims.of(A=2))

    def test_marginal_matches_density(self):
        """Test the vector marginal equals the density-matrix marginal"""
        psi = random_pure_state(SystemDims.of(A=2, B=3, C=2), seed=3)
        direct = psi.marginal(["C", "A"])
        via_density = psi.density().marginal(["A", "C"])
        assert direct.labels == ("A", "C")
        assert np.allclose(direct.mat, via_density.mat)


class TestPurification:
    """Test purify and schmidt"""

    def test_purify_dimension_is_rank(self):
        """Test the purifying factor has dimension rank(s)"""
        s = random_state(SystemDims.of(A=2, B=2), 3, seed=5)
        psi = purify(s, "D")
        assert psi.dims.dim_of("D") == 3
        assert np.allclose(psi.marginal(["A", "B"]).mat, s.mat)

    def test_purify_pure_state(self, ghz3):
        psi = purify(ghz3, "D")
        assert psi.dims.dim_of("D") == 1

    def test_purify_label_collision(self, qubit_zero):
        with pytest.raises(StateError, match="already used"):
            purify(qubit_zero, "A")

    def test_schmidt_of_product(self):
        """Test a product vector has a single Schmidt coefficient"""
        vec = np.kron([1.0, 0.0], [0.6, 0.8])
        decomposition = schmidt(PureState(vec, SystemDims.of(A=2, B=2)), (["A"], ["B"]))
        assert decomposition.coefficients.size == 1
        assert np.allclose(decomposition.reconstruct(), vec)

    def test_schmidt_of_max_entangled(self):
        """Test d equal coefficients for the maximally entangled state"""
        vec = np.eye(3).reshape(-1) / np.sqrt(3)
        decomposition = schmidt(PureState(vec, SystemDims.of(A=3, B=3)), (["A"], ["B"]))
        assert np.allclose(decomposition.coefficients, np.full(3, 1 / np.sqrt(3)))

    def test_schmidt_reordered_cut(self):
        """Test a cut that reorders factors reconstructs the permuted vector"""
        psi = random_pure_state(SystemDims.of(A=2, B=2, C=2), seed=9)
        decomposition = schmidt(psi, (["B"], ["C", "A"]))
        assert decomposition.left_dims.labels == ("B",)
        assert decomposition.right_dims.labels == ("C", "A")
        assert np.isclose(np.sum(decomposition.coefficients ** 2), 1.0)

    def test_schmidt_invalid_cut(self, ghz3):
        psi = purify(ghz3, "D")
        with pytest.raises(StateError, match="partition"):
            schmidt(psi, (["A"], ["B"]))
        with pytest.raises(StateError, match="nonempty"):
            schmidt(psi, ([], ["A", "B", "C", "D"]))


class TestGenerators:
    """Test seeded random states"""

    def test_deterministic_in_seed(self):
        dims = SystemDims.of(A=2, B=2)
        assert np.array_equal(random_state(dims, 2, seed=11).mat, random_state(dims, 2, seed=11).mat)
        assert not np.allclose(random_state(dims, 2, seed=11).mat, random_state(dims, 2, seed=12).mat)

    @pytest.mark.parametrize("measure", list(RandomMeasure))
    def test_measures_give_valid_states(self, measure):
        rank = 1 if measure is RandomMeasure.HAAR_PURE else 3
        s = random_state(SystemDims.of(A=2, B=2), rank, measure=measure, seed=4)
        assert s.rank == rank
        assert s.trace == pytest.approx(1.0)

    def test_rank_out_of_range(self):
        with pytest.raises(StateError, match="Rank"):
            random_state(SystemDims.of(A=2), 3, seed=1)

    def test_haar_pure_needs_rank_one(self):
        with pytest.raises(StateError, match="rank-1"):
            random_state(SystemDims.of(A=2), 2, measure="haar_pure", seed=1)

    def test_philox_generator(self):
        assert isinstance(make_rng(config.DEFAULT_SEED).bit_generator, np.random.Philox)

    def test_haar_unitary_is_unitary(self):
        u = haar_unitary(4, make_rng(2))
        assert np.allclose(u @ u.conj().T, np.eye(4))

    def test_instance_seeds(self):
        """Test per-instance seeds are stable and distinct"""
        assert instance_seed(7, 3) == instance_seed(7, 3)
        assert len({instance_seed(7, i) for i in range(50)}) == 50

    def test_project_to_state(self):
        """Test negative eigenvalues are clipped and the trace restored"""
        s = project_to_state(np.diag([0.6, -0.1, 0.5]), SystemDims.of(A=3))
        assert np.allclose(s.mat, np.diag([0.6, 0.0, 0.5]) / 1.1)

    def test_project_to_state_without_positive_part(self):
        with pytest.raises(StateError):
            project_to_state(-np.eye(2), SystemDims.of(A=2))

    def test_tensor_states(self, qubit_zero, qubit_plus):
        with pytest.raises(StateError, match="collision"):
            tensor_states(qubit_zero, qubit_plus)
        joint = tensor_states(qubit_zero, qubit_plus.relabeled({"A": "B"}))
        assert joint.labels == ("A", "B")

    @given(seed=st.integers(min_value=0, max_value=2**63 - 1), rank=st.integers(min_value=1, max_value=6))
    @settings(max_examples=30, deadline=None)
    def test_random_states_are_valid(self, seed, rank):
        s = random_state(SystemDims.of(A=2, B=3), rank, seed=seed)
        assert s.rank == rank
        assert np.linalg.eigvalsh(s.mat)[0] >= -1e-12


class TestNamedStates:
    """Test the fixture states"""

    def test_all_names_resolve(self):
        for name in NAMED_STATES:
            assert named_state(name).trace == pytest.approx(1.0)

    def test_max_entangled_dimension(self):
        s = named_state("max_entangled(3)")
        assert s.dims.to_list() == [["A", 3], ["B", 3]]
        assert np.allclose(s.marginal(["A"]).mat, np.eye(3) / 3)
        assert named_state("max_entangled", d=4).dims.total == 16

    def test_unknown_name(self):
        with pytest.raises(StateError, match="Unknown named state"):
            named_state("werner")

    def test_product_with_custom_factors(self):
        factors = (np.eye(2) / 2, np.diag([1.0, 0.0]), np.eye(3) / 3)
        s = named_state("product", factors=factors)
        assert s.dims.to_list() == [["A", 2], ["B", 2], ["C", 3]]
        assert np.allclose(s.marginal(["B"]).mat, np.diag([1.0, 0.0]))

    def test_cq_markov_classical_c(self, cq_markov):
        """Test C is classical with weights (0.35, 0.65)"""
        rho_c = cq_markov.marginal(["C"]).mat
        assert np.allclose(rho_c, np.diag([0.35, 0.65]))
