"""Reading problem data and writing JSON-safe reports.

Matrices are read from Matrix Market files (array or coordinate, detected by
the ``%%MatrixMarket`` banner) or from headerless comma-separated text.
Vectors are plain text with one value per line; a Matrix Market file holding
a single column is accepted as well.
"""

import dataclasses
import json
import math
import warnings

import numpy as np
import scipy.io

from .errors import MtlsError

__all__ = ["InputFormatError", "read_matrix", "read_vector", "write_matrix", "write_vector", "jsonable", "dumps"]


class InputFormatError(MtlsError, ValueError):
    """A data file is missing, unreadable or malformed."""


def _is_matrix_market(path):
    with open(path) as fh:
        return fh.readline().lstrip().lower().startswith("%%matrixmarket")


def _finite(M, path):
    if M.size == 0:
        raise InputFormatError(f"{path}: no data")
    if not np.all(np.isfinite(M)):
        raise InputFormatError(f"{path}: non-finite entries")
    return M


def read_matrix(path):
    """Dense float matrix from a Matrix Market or headerless CSV file."""
    try:
        if _is_matrix_market(path):
            M = scipy.io.mmread(path)
            M = M.toarray() if hasattr(M, "toarray") else np.asarray(M)
            if np.iscomplexobj(M):
                raise InputFormatError(f"{path}: complex matrices are not supported")
            M = np.asarray(M, dtype=float)
        else:
            with warnings.catch_warnings():
                # empty input is rejected below with a clearer message
                warnings.simplefilter("ignore", UserWarning)
                M = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    except InputFormatError:
        raise
    except (OSError, ValueError) as exc:
        raise InputFormatError(f"cannot read matrix {path}: {exc}") from exc
    return _finite(M, path)


def read_vector(path):
    """Float vector, one value per line (or a one-column Matrix Market file)."""
    try:
        if _is_matrix_market(path):
            v = read_matrix(path)
            if v.ndim != 2 or 1 not in v.shape:
                raise InputFormatError(f"{path}: expected a single row or column, got shape {v.shape}")
            return v.reshape(-1)
        v = np.loadtxt(path, dtype=float, ndmin=1)
    except InputFormatError:
        raise
    except (OSError, ValueError) as exc:
        raise InputFormatError(f"cannot read vector {path}: {exc}") from exc
    if v.ndim != 1:
        raise InputFormatError(f"{path}: expected one value per line")
    return _finite(v, path)


def write_matrix(M, path):
    """Write ``M`` as a Matrix Market array file."""
    scipy.io.mmwrite(path, np.asarray(M, dtype=float))


def write_vector(v, path):
    np.savetxt(path, np.asarray(v, dtype=float).reshape(-1), fmt="%.17g")


def jsonable(obj):
    """Convert reports to plain JSON types.

    Dataclasses go through ``to_dict`` when they define one. Non-finite
    floats become ``None``; callers carry infinity in explicit flags.
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = obj.to_dict() if hasattr(obj, "to_dict") else dataclasses.asdict(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def dumps(obj, **kwargs):
    """``json.dumps`` of :func:`jsonable` output; refuses NaN and infinity."""
    return json.dumps(jsonable(obj), allow_nan=False, **kwargs)
