"""Text document helpers shared by the matrix and factor-tree formats.

Documents are JSON. The writer is hand-rolled for one reason: every float
must carry at least 17 significant digits, and the stdlib encoder emits
shortest-repr floats ("1.0"), which round-trip exactly but violate that
requirement for round values. Reading uses json.loads unchanged.
"""

from __future__ import annotations

import json
from typing import Tuple

import numpy as np

from .errors import ParseError

__all__ = ["dump_json", "parse_json", "matrix_to_document", "matrix_from_document"]


def _fmt_float(x: float) -> str:
    if not np.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    return format(float(x), ".16e")


def dump_json(obj, indent: int = 0) -> str:
    """Serializes nested dict/list/str/bool/int/float/None to JSON text.

    Floats are written as %.16e (17 significant digits, full round trip).
    """
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f"{inner}{json.dumps(str(k))}: {dump_json(v, indent + 1)}"
            for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [dump_json(v, indent + 1) for v in obj]
        if all(len(p) < 48 and "\n" not in p for p in parts) and len(parts) <= 8:
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(inner + p for p in parts) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def parse_json(text: str):
    """json.loads wrapped to raise ParseError with a line:column location."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, location=f"line {exc.lineno}, column {exc.colno}")


def complex_entries(matrix: np.ndarray) -> list:
    """Row-major [re, im] pair list for a complex matrix."""
    flat = np.asarray(matrix, dtype=complex).ravel()
    return [[float(z.real), float(z.imag)] for z in flat]


def entries_to_matrix(entries, dim: int, location: str) -> np.ndarray:
    """Parses a row-major [re, im] pair list back into a dim x dim matrix."""
    if not isinstance(entries, list) or len(entries) != dim * dim:
        raise ParseError(
            f"expected {dim * dim} [re, im] entries, got "
            f"{len(entries) if isinstance(entries, list) else type(entries).__name__}",
            location,
        )
    flat = np.empty(dim * dim, dtype=complex)
    for idx, pair in enumerate(entries):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(p, (int, float)) for p in pair)
        ):
            raise ParseError("entry is not an [re, im] pair", f"{location}[{idx}]")
        flat[idx] = complex(pair[0], pair[1])
    return flat.reshape(dim, dim)


def matrix_to_document(matrix: np.ndarray) -> str:
    """Renders a 2^n x 2^n matrix as the matrix file format.

    The document is a JSON object with fields `n` (qubit count) and
    `entries` (row-major [re, im] pairs, length 4^n).
    """
    matrix = np.asarray(matrix, dtype=complex)
    dim = matrix.shape[0]
    n = int(round(np.log2(dim)))
    if matrix.shape != (dim, dim) or 2**n != dim:
        raise ValueError(f"matrix shape {matrix.shape} is not 2^n x 2^n")
    return dump_json({"n": n, "entries": complex_entries(matrix)}) + "\n"


def matrix_from_document(text: str) -> Tuple[int, np.ndarray]:
    """Parses a matrix file document into (n, matrix).

    Raises:
        ParseError: malformed JSON, missing fields, or wrong entry count.
    """
    doc = parse_json(text)
    if not isinstance(doc, dict):
        raise ParseError("matrix document must be an object", "top level")
    if "n" not in doc or "entries" not in doc:
        raise ParseError("matrix document needs fields 'n' and 'entries'", "top level")
    n = doc["n"]
    if not isinstance(n, int) or n < 1:
        raise ParseError(f"'n' must be a positive integer, got {n!r}", "n")
    matrix = entries_to_matrix(doc["entries"], 2**n, "entries")
    return n, matrix
