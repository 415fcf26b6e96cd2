"""
Tests for labeled tensor algebra
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from states import random_state
from tensor import (
    DimensionError,
    MatrixFunction,
    SystemDims,
    as_matrix,
    hermitize,
    kron,
    mat_fn,
    min_eigenvalue,
    norms,
    partial_trace,
    permute_factors,
    rank,
    support,
)

RHO = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
SIGMA = np.array([[0.6, 0.25j], [-0.25j, 0.4]])
OMEGA = np.diag([0.2, 0.5, 0.3])


class TestSystemDims:
    """Test SystemDims"""

    def test_keyword_order_is_kept(self):
        """Test SystemDims.of keeps factor order"""
        dims = SystemDims.of(B=3, A=2)
        assert dims.labels == ("B", "A")
        assert dims.dims == (3, 2)
        assert dims.total == 6

    def test_empty_has_total_one(self):
        """Test the empty product space is one-dimensional"""
        assert SystemDims().total == 1
        assert len(SystemDims()) == 0

    def test_duplicate_labels_rejected(self):
        """Test duplicate labels raise"""
        with pytest.raises(DimensionError, match="Duplicate"):
            SystemDims((("A", 2), ("A", 3)))

    def test_non_positive_dimension_rejected(self):
        """Test zero dimensions raise"""
        with pytest.raises(DimensionError):
            SystemDims.of(A=0)

    def test_unknown_label(self):
        """Test unknown labels raise DimensionError"""
        with pytest.raises(DimensionError, match="Unknown label"):
            SystemDims.of(A=2).dim_of("Z")

    def test_subset_keeps_original_order(self):
        """Test subset ignores the order of the request"""
        dims = SystemDims.of(A=2, B=3, C=4)
        assert dims.subset(["C", "A"]).labels == ("A", "C")

    def test_without(self):
        """Test dropping factors"""
        assert SystemDims.of(A=2, B=3, C=4).without(["B"]).to_list() == [["A", 2], ["C", 4]]

    def test_reordered(self):
        """Test reordering to a permutation"""
        dims = SystemDims.of(A=2, B=3)
        assert dims.reordered(["B", "A"]).dims == (3, 2)
        with pytest.raises(DimensionError, match="permutation"):
            dims.reordered(["A"])

    def test_renamed_and_concat(self):
        """Test renaming and concatenation"""
        dims = SystemDims.of(A=2).renamed({"A": "A'"}).concat(SystemDims.of(B=3))
        assert dims.labels == ("A'", "B")
        assert "A'" in dims


class TestMatrices:
    """Test matrix coercion and factor manipulation"""

    def test_scalar_becomes_matrix(self):
        """Test a scalar is a 1×1 matrix"""
        assert as_matrix(2.0).shape == (1, 1)

    def test_non_finite_rejected(self):
        """Test NaN entries raise"""
        with pytest.raises(DimensionError, match="non-finite"):
            as_matrix([[np.nan]])

    def test_shape_checked_against_dims(self):
        """Test the shape must match the factor dimensions"""
        with pytest.raises(DimensionError, match="does not match"):
            as_matrix(np.eye(3), SystemDims.of(A=2))

    def test_partial_trace_of_product(self):
        """Test tracing either factor of a product"""
        dims = SystemDims.of(A=2, B=3)
        m = kron(RHO, OMEGA)
        assert np.allclose(partial_trace(m, dims, ["B"]), RHO)
        assert np.allclose(partial_trace(m, dims, ["A"]), OMEGA)

    def test_partial_trace_middle_factor(self):
        """Test tracing the middle of three factors"""
        dims = SystemDims.of(A=2, B=3, C=2)
        m = np.kron(np.kron(RHO, OMEGA), SIGMA)
        assert np.allclose(partial_trace(m, dims, ["B"]), np.kron(RHO, SIGMA))

    def test_partial_trace_everything(self):
        """Test tracing all factors leaves the trace"""
        dims = SystemDims.of(A=2, B=3)
        assert np.allclose(partial_trace(kron(RHO, OMEGA), dims, ["A", "B"]), [[1.0]])

    def test_permute_factors_swaps_kron(self):
        """Test reordering factors of a product"""
        dims = SystemDims.of(A=2, B=3)
        assert np.allclose(permute_factors(kron(RHO, OMEGA), dims, ["B", "A"]), kron(OMEGA, RHO))

    def test_permute_factors_on_vectors(self):
        """Test reordering factors of a state vector"""
        a, b = np.array([1.0, 2.0]), np.array([3.0, 4.0, 5.0])
        dims = SystemDims.of(A=2, B=3)
        assert np.allclose(permute_factors(np.kron(a, b), dims, ["B", "A"]), np.kron(b, a))

    def test_hermitize(self):
        """Test near-Hermitian input is symmetrized and the rest rejected"""
        m = np.array([[1.0, 1e-12], [0.0, 1.0]])
        assert np.allclose(hermitize(m), hermitize(m).conj().T)
        with pytest.raises(DimensionError, match="not Hermitian"):
            hermitize(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_support_drops_tiny_eigenvalues(self):
        """Test rank uses a relative threshold"""
        m = np.diag([1.0, 0.0, 1e-14])
        evals, vecs = support(m)
        assert evals.size == 1 and vecs.shape == (3, 1)
        assert rank(np.diag([1.0, 0.5, 1e-3])) == 3


class TestMatrixFunctions:
    """Test spectral functions"""

    def test_sqrt(self):
        assert np.allclose(mat_fn(np.diag([4.0, 9.0]), MatrixFunction.SQRT), np.diag([2.0, 3.0]))

    def test_pinv_on_support(self):
        """Test pseudo-inverse leaves the kernel at zero"""
        assert np.allclose(mat_fn(np.diag([2.0, 0.0]), "pinv"), np.diag([0.5, 0.0]))

    def test_pinv_sqrt(self):
        assert np.allclose(mat_fn(np.diag([4.0, 0.0]), MatrixFunction.PINV_SQRT), np.diag([0.5, 0.0]))

    def test_log2_zero_on_kernel(self):
        assert np.allclose(mat_fn(np.diag([4.0, 0.0]), MatrixFunction.LOG2), np.diag([2.0, 0.0]))

    def test_negative_eigenvalue_rejected(self):
        """Test clearly indefinite input raises"""
        with pytest.raises(DimensionError, match="negative eigenvalue"):
            mat_fn(np.diag([1.0, -0.1]), MatrixFunction.SQRT)

    def test_small_negative_eigenvalue_clipped(self):
        """Test rounding-level negatives are clipped"""
        root = mat_fn(np.diag([1.0, -1e-13]), MatrixFunction.SQRT)
        assert np.allclose(root, np.diag([1.0, 0.0]))

    def test_unknown_function(self):
        with pytest.raises(ValueError):
            mat_fn(np.eye(2), "exp")

    def test_sqrt_of_rotated_matrix(self):
        """Test sqrt squares back to its argument"""
        root = mat_fn(RHO, MatrixFunction.SQRT)
        assert np.allclose(root @ root, RHO)

    def test_norms(self):
        """Test trace and operator norms"""
        assert norms(np.diag([3.0, -4.0])) == pytest.approx((7.0, 4.0))
        assert min_eigenvalue(np.diag([3.0, -4.0])) == pytest.approx(-4.0)


class TestProperties:
    """Property checks over seeded random states"""

    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_partial_trace_preserves_trace(self, seed):
        """Test tr_B keeps the trace and positivity"""
        s = random_state(SystemDims.of(A=2, B=3), 3, seed=seed)
        reduced = partial_trace(s.mat, s.dims, ["B"])
        assert np.trace(reduced).real == pytest.approx(1.0)
        assert min_eigenvalue(reduced) >= -1e-12

    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_permutation_commutes_with_partial_trace(self, seed):
        """Test tracing after a reorder equals tracing before"""
        s = random_state(SystemDims.of(A=2, B=2, C=3), 4, seed=seed)
        order = ["C", "A", "B"]
        moved = permute_factors(s.mat, s.dims, order)
        left = partial_trace(moved, s.dims.reordered(order), ["B"])
        right = permute_factors(partial_trace(s.mat, s.dims, ["B"]), SystemDims.of(A=2, C=3), ["C", "A"])
        assert np.allclose(left, right)
