"""
JSON codecs for matrices, states, Choi matrices and recovery results

Matrix format: {"dims": [["A", 2], ["B", 2]], "re": [[...]], "im": [[...]]}
with row-major real and imaginary parts; states add "kind": "state" and
Choi matrices use "kind": "choi" with "in_dims" and "out_dims".
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from channels import ChannelError, ChoiMatrix
from states import LabeledState, StateError
from tensor import DimensionError, SystemDims

logger = logging.getLogger(__name__)


class InputError(ValueError):
    """Malformed input, located by line/column (syntax) or field path (schema)"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None,
                 field: Optional[str] = None):
        self.line = line
        self.column = column
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if field:
            where.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


def _dims_from(obj: Any, field: str) -> SystemDims:
    if not isinstance(obj, list):
        raise InputError("Expected a list of [label, dim] pairs", field=field)
    factors = []
    for i, item in enumerate(obj):
        if not (isinstance(item, list) and len(item) == 2 and isinstance(item[0], str)
                and isinstance(item[1], int) and not isinstance(item[1], bool)):
            raise InputError("Expected [label, dim]", field=f"{field}[{i}]")
        factors.append((item[0], item[1]))
    try:
        return SystemDims(tuple(factors))
    except DimensionError as e:
        raise InputError(str(e), field=field) from e


def _grid(obj: Any, size: int, field: str) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != size:
        raise InputError(f"Expected {size} rows", field=field)
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != size:
            raise InputError(f"Expected {size} entries", field=f"{field}[{i}]")
        for j, entry in enumerate(row):
            if isinstance(entry, bool) or not isinstance(entry, (int, float)):
                raise InputError("Expected a number", field=f"{field}[{i}][{j}]")
    arr = np.array(obj, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InputError("Entries must be finite", field=field)
    return arr


def _require(obj: Dict[str, Any], key: str, prefix: str = "") -> Any:
    if key not in obj:
        raise InputError("Missing field", field=prefix + key)
    return obj[key]


def matrix_to_dict(m: np.ndarray, dims: SystemDims, kind: Optional[str] = None) -> Dict[str, Any]:
    m = np.asarray(m, dtype=np.complex128)
    data = {"dims": dims.to_list(), "re": m.real.tolist(), "im": m.imag.tolist()}
    if kind:
        data["kind"] = kind
    return data


def matrix_from_dict(obj: Any, prefix: str = "") -> Tuple[np.ndarray, SystemDims]:
    if not isinstance(obj, dict):
        raise InputError("Expected a JSON object", field=prefix or None)
    dims = _dims_from(_require(obj, "dims", prefix), prefix + "dims")
    re = _grid(_require(obj, "re", prefix), dims.total, prefix + "re")
    im = _grid(obj["im"], dims.total, prefix + "im") if "im" in obj else np.zeros_like(re)
    return re + 1j * im, dims


def state_to_dict(s: LabeledState) -> Dict[str, Any]:
    return matrix_to_dict(s.mat, s.dims, kind="state")


def state_from_dict(obj: Any) -> LabeledState:
    if isinstance(obj, dict) and obj.get("kind", "state") != "state":
        raise InputError(f"Expected kind 'state', got {obj.get('kind')!r}", field="kind")
    mat, dims = matrix_from_dict(obj)
    try:
        return LabeledState(mat, dims)
    except StateError as e:
        raise InputError(str(e), field="re") from e


def choi_to_dict(j: ChoiMatrix) -> Dict[str, Any]:
    return {
        "kind": "choi",
        "in_dims": j.in_dims.to_list(),
        "out_dims": j.out_dims.to_list(),
        "re": j.mat.real.tolist(),
        "im": j.mat.imag.tolist(),
    }


def choi_from_dict(obj: Any) -> ChoiMatrix:
    if not isinstance(obj, dict) or obj.get("kind") != "choi":
        raise InputError("Expected an object with kind 'choi'", field="kind")
    in_dims = _dims_from(_require(obj, "in_dims"), "in_dims")
    out_dims = _dims_from(_require(obj, "out_dims"), "out_dims")
    size = in_dims.total * out_dims.total
    re = _grid(_require(obj, "re"), size, "re")
    im = _grid(_require(obj, "im"), size, "im")
    try:
        return ChoiMatrix(re + 1j * im, in_dims, out_dims)
    except ChannelError as e:
        raise InputError(str(e), field="re") from e


def _plain(m: np.ndarray) -> Dict[str, Any]:
    m = np.asarray(m)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def result_to_dict(result) -> Dict[str, Any]:
    """RecoveryResult with enough data to re-verify the channel and the witness offline"""
    pair = result.alberti_pair
    return {
        "kind": "recovery_result",
        "value": result.value,
        "primal_lb": result.primal_lb,
        "dual_ub": result.dual_ub,
        "gap": result.gap,
        "achieved_fidelity": result.achieved_fidelity,
        "iterations": result.iterations,
        "shared": list(result.shared),
        "certificate": result.certificate._asdict(),
        "recovery_channel": choi_to_dict(result.recovery_channel),
        "alberti_pair": {
            "d_a": pair.d_a,
            "d_b": pair.d_b,
            "d_d": pair.d_d,
            "r": _plain(pair.r),
            "q": _plain(pair.q),
            "sigma_ad": _plain(pair.sigma_ad),
        },
    }


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(e.msg, line=e.lineno, column=e.colno) from e


def load_state(path: Union[str, Path]) -> LabeledState:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise InputError(f"Cannot read {path}: {e.strerror}") from e
    state = state_from_dict(loads(text))
    logger.debug(f"Loaded state on {list(state.labels)} from {path}")
    return state


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, allow_nan=False)


def write_json(obj: Any, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj) + "\n")
    return path
