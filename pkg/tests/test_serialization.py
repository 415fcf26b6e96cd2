"""
Tests for the JSON codecs
"""
import json

import numpy as np
import pytest

from channels import choi_of_identity, is_cptp
from recovery import for_conditional
from serialization import (
    InputError,
    choi_from_dict,
    choi_to_dict,
    dumps,
    load_state,
    loads,
    matrix_from_dict,
    result_to_dict,
    state_from_dict,
    state_to_dict,
    write_json,
)
from tensor import SystemDims


class TestStateCodec:
    """Test state serialization"""

    def test_round_trip(self, product_state):
        data = json.loads(dumps(state_to_dict(product_state)))
        assert data["kind"] == "state"
        assert data["dims"] == [["A", 2], ["B", 2], ["C", 2]]
        restored = state_from_dict(data)
        assert restored.dims == product_state.dims
        assert np.allclose(restored.mat, product_state.mat)

    def test_imaginary_part_optional(self):
        mat, dims = matrix_from_dict({"dims": [["A", 2]], "re": [[0.5, 0], [0, 0.5]]})
        assert dims == SystemDims.of(A=2)
        assert np.allclose(mat, np.eye(2) / 2)

    def test_missing_field(self):
        with pytest.raises(InputError) as info:
            state_from_dict({"re": [[1]]})
        assert info.value.field == "dims"

    def test_bad_dims_entry(self):
        with pytest.raises(InputError) as info:
            state_from_dict({"dims": [["A", "two"]], "re": [[1]]})
        assert info.value.field == "dims[0]"

    def test_non_numeric_entry(self):
        with pytest.raises(InputError) as info:
            state_from_dict({"dims": [["A", 2]], "re": [[0.5, "x"], [0, 0.5]]})
        assert info.value.field == "re[0][1]"
        assert "re[0][1]" in str(info.value)

    def test_wrong_row_count(self):
        with pytest.raises(InputError) as info:
            state_from_dict({"dims": [["A", 2]], "re": [[1.0, 0.0]]})
        assert info.value.field == "re"

    def test_invalid_state(self):
        with pytest.raises(InputError, match="trace") as info:
            state_from_dict({"dims": [["A", 2]], "re": [[1.0, 0.0], [0.0, 1.0]]})
        assert info.value.field == "re"

    def test_wrong_kind(self):
        with pytest.raises(InputError) as info:
            state_from_dict({"kind": "choi", "dims": [["A", 1]], "re": [[1]]})
        assert info.value.field == "kind"

    def test_duplicate_labels(self):
        with pytest.raises(InputError) as info:
            state_from_dict({"dims": [["A", 1], ["A", 1]], "re": [[1]]})
        assert info.value.field == "dims"


class TestChoiCodec:
    """Test Choi serialization"""

    def test_round_trip(self):
        j = choi_of_identity(2, "C")
        restored = choi_from_dict(json.loads(dumps(choi_to_dict(j))))
        assert restored.in_dims == j.in_dims
        assert np.allclose(restored.mat, j.mat)
        assert is_cptp(restored).ok

    def test_requires_kind(self):
        with pytest.raises(InputError):
            choi_from_dict({"in_dims": [["C", 1]], "out_dims": [["B", 1]], "re": [[1]], "im": [[0]]})


class TestDocuments:
    """Test parsing and writing files"""

    def test_syntax_error_location(self):
        with pytest.raises(InputError) as info:
            loads('{\n  "dims": [\n}')
        assert info.value.line == 3
        assert info.value.column is not None
        assert "line 3" in str(info.value)

    def test_load_state_from_file(self, tmp_path, cq_markov):
        path = write_json(state_to_dict(cq_markov), tmp_path / "nested" / "state.json")
        assert path.exists()
        assert np.allclose(load_state(path).mat, cq_markov.mat)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError, match="Cannot read"):
            load_state(tmp_path / "absent.json")

    def test_dumps_rejects_nan(self):
        with pytest.raises(ValueError):
            dumps({"value": float("nan")})

    def test_result_carries_witnesses(self, cq_markov):
        """Test a serialized result holds the channel, the dual pair and the certificate"""
        data = json.loads(dumps(result_to_dict(for_conditional(cq_markov))))
        assert data["kind"] == "recovery_result"
        assert data["shared"] == ["B"]
        assert data["primal_lb"] <= data["dual_ub"]
        assert set(data["certificate"]) == {"ok", "primal_feas_residual", "dual_feas_residual", "gap"}
        channel = choi_from_dict(data["recovery_channel"])
        assert is_cptp(channel, tol=1e-7).ok
        assert set(data["alberti_pair"]) == {"d_a", "d_b", "d_d", "r", "q", "sigma_ad"}
