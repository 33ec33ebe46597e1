"""Delimited-file plumbing: complex matrix CSV format and atomic writes.

Matrix files are plain CSV with a two-line preamble:

    rows,cols
    3,4
    re,im,re,im,...      (one matrix row per line, re/im pairs)

Floats are written with repr so every value round-trips exactly.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

from . import matcore
from .exceptions import SchemaMismatchError

MATRIX_HEADER = "rows,cols"


def atomic_write_text(path: str, text: str) -> None:
    """Write text to ``path`` via a temp file in the same directory plus rename.

    A reader never observes a partially written file; on failure the
    original (if any) is left untouched.
    """
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_matrix_csv(matrix) -> str:
    """Render a complex matrix in the re/im pair CSV format."""
    a = matcore.as_complex_matrix(matrix)
    rows, cols = a.shape
    lines = [MATRIX_HEADER, f"{rows},{cols}"]
    for r in range(rows):
        parts = []
        for c in range(cols):
            z = a[r, c]
            parts.append(repr(float(z.real)))
            parts.append(repr(float(z.imag)))
        lines.append(",".join(parts))
    return "\n".join(lines) + "\n"


def write_matrix_csv(path: str, matrix) -> None:
    atomic_write_text(path, format_matrix_csv(matrix))


def parse_matrix_csv(text: str) -> np.ndarray:
    """Inverse of format_matrix_csv.

    Raises SchemaMismatchError on a wrong preamble, a dimension line
    that does not parse, or a row with the wrong number of fields.
    """
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    if not lines or lines[0].strip() != MATRIX_HEADER:
        raise SchemaMismatchError(
            f"matrix file must start with '{MATRIX_HEADER}' header"
        )
    if len(lines) < 2:
        raise SchemaMismatchError("matrix file missing dimension line")
    try:
        rows, cols = (int(tok) for tok in lines[1].split(","))
    except ValueError as exc:
        raise SchemaMismatchError(f"bad dimension line {lines[1]!r}") from exc
    if rows < 1 or cols < 1:
        raise SchemaMismatchError(f"dimensions must be positive, got {rows},{cols}")
    if len(lines) != 2 + rows:
        raise SchemaMismatchError(
            f"expected {rows} matrix rows, found {len(lines) - 2}"
        )
    out = np.zeros((rows, cols), dtype=np.complex128)
    for r in range(rows):
        fields = lines[2 + r].split(",")
        if len(fields) != 2 * cols:
            raise SchemaMismatchError(
                f"row {r}: expected {2 * cols} fields, found {len(fields)}"
            )
        try:
            vals = [float(tok) for tok in fields]
        except ValueError as exc:
            raise SchemaMismatchError(f"row {r}: non-numeric field") from exc
        out[r] = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    return out


def read_matrix_csv(path: str) -> np.ndarray:
    with open(path, "r", newline="") as fh:
        return parse_matrix_csv(fh.read())
