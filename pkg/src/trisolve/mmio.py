"""Reader and writer for the NIST Matrix Market exchange format.

Coordinate files become sparse CSR matrices with symmetric or skew-symmetric
entries expanded to general storage; array files become dense row-major
matrices.  Pattern entries read as ``1.0``.  Parse failures raise
:class:`MatrixMarketError` naming the offending line.  Writing uses the
shortest decimal rendering that round-trips to the same float64, so
``read(write(A))`` reproduces every value bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sparse

BANNER = "%%MatrixMarket"

_FORMATS = ("coordinate", "array")
_FIELDS = ("real", "integer", "pattern")
_SYMMETRIES = ("general", "symmetric", "skew-symmetric")


class MatrixMarketError(ValueError):
    """Malformed Matrix Market content; message carries the 1-based line number."""


@dataclass
class MmInfo:
    """Header facts plus bookkeeping from one read."""

    format: str
    field: str
    symmetry: str
    rows: int
    cols: int
    entries: int          # entries as stated in the size line
    duplicates: int = 0   # coordinate entries that were summed into others


def _fail(lineno: int, message: str):
    raise MatrixMarketError(f"line {lineno}: {message}")


def _parse_float(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        _fail(lineno, f"non-numeric token {token!r}")
    if not math.isfinite(value):
        _fail(lineno, f"non-finite value {token!r}")
    return value


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        _fail(lineno, f"expected an integer, got {token!r}")


def _open_lines(source):
    # utf-8-sig tolerates a byte-order mark ahead of the banner
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8-sig") as fh:
            return fh.read().splitlines()
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    return data.lstrip("﻿").splitlines()


def _parse_header(line: str) -> tuple[str, str, str]:
    parts = line.strip().split()
    if not parts or parts[0] != BANNER:
        _fail(1, f"header must begin with {BANNER!r}")
    if len(parts) != 5:
        _fail(1, "header needs 5 tokens: banner, object, format, field, symmetry")
    _, obj, fmt, field, symmetry = (p.lower() for p in parts)
    if obj != "matrix":
        _fail(1, f"unsupported object {obj!r}, only 'matrix' is handled")
    if fmt not in _FORMATS:
        _fail(1, f"unknown format {fmt!r}")
    if field == "complex":
        _fail(1, "complex matrices are not supported")
    if field not in _FIELDS:
        _fail(1, f"unknown field {field!r}")
    if symmetry == "hermitian":
        _fail(1, "hermitian implies complex data, which is not supported")
    if symmetry not in _SYMMETRIES:
        _fail(1, f"unknown symmetry {symmetry!r}")
    if fmt == "array" and field == "pattern":
        _fail(1, "array format cannot carry a pattern field")
    return fmt, field, symmetry


def read_matrix_market_with_info(source):
    """Parse ``source`` (path or file-like); return ``(matrix, MmInfo)``."""
    lines = _open_lines(source)
    if not lines:
        raise MatrixMarketError("line 1: empty input")
    fmt, field, symmetry = _parse_header(lines[0])

    # Comments and blank lines are skipped everywhere after the banner.
    body = [
        (i + 1, ln.strip())
        for i, ln in enumerate(lines)
        if i > 0 and ln.strip() and not ln.lstrip().startswith("%")
    ]
    if not body:
        raise MatrixMarketError("line 1: missing size line")
    size_lineno, size_line = body[0]
    tokens = size_line.split()

    if fmt == "coordinate":
        if len(tokens) != 3:
            _fail(size_lineno, "coordinate size line needs 'rows cols nnz'")
        m, n, nnz = (_parse_int(t, size_lineno) for t in tokens)
        if m <= 0 or n <= 0 or nnz < 0:
            _fail(size_lineno, "matrix dimensions must be positive")
        matrix, dups = _read_coordinate(body[1:], m, n, nnz, field, symmetry)
        return matrix, MmInfo(fmt, field, symmetry, m, n, nnz, dups)

    if len(tokens) != 2:
        _fail(size_lineno, "array size line needs 'rows cols'")
    m, n = (_parse_int(t, size_lineno) for t in tokens)
    if m <= 0 or n <= 0:
        _fail(size_lineno, "matrix dimensions must be positive")
    matrix = _read_array(body[1:], m, n, symmetry)
    return matrix, MmInfo(fmt, field, symmetry, m, n, m * n)


def read_matrix_market(source):
    """Parse ``source`` and return the matrix (sparse CSR for coordinate
    files, dense ndarray for array files)."""
    return read_matrix_market_with_info(source)[0]


def _read_coordinate(entry_lines, m, n, nnz, field, symmetry):
    want = 2 if field == "pattern" else 3
    if len(entry_lines) != nnz:
        where = entry_lines[nnz][0] if len(entry_lines) > nnz else "end of file"
        raise MatrixMarketError(
            f"line {where}: expected {nnz} entries, found {len(entry_lines)}"
        )
    rows = np.empty(2 * nnz, dtype=np.int64)
    cols = np.empty(2 * nnz, dtype=np.int64)
    vals = np.empty(2 * nnz, dtype=np.float64)
    count = 0
    for lineno, line in entry_lines:
        tokens = line.split()
        if len(tokens) != want:
            _fail(lineno, f"entry needs {want} tokens, got {len(tokens)}")
        i = _parse_int(tokens[0], lineno)
        j = _parse_int(tokens[1], lineno)
        if not (1 <= i <= m) or not (1 <= j <= n):
            _fail(lineno, f"index ({i}, {j}) outside 1..{m} x 1..{n}")
        value = 1.0 if field == "pattern" else _parse_float(tokens[2], lineno)
        if symmetry in ("symmetric", "skew-symmetric"):
            if i < j:
                _fail(lineno, f"{symmetry} files store only the lower triangle")
            if symmetry == "skew-symmetric" and i == j:
                _fail(lineno, "skew-symmetric files cannot carry diagonal entries")
        rows[count], cols[count], vals[count] = i - 1, j - 1, value
        count += 1
        if symmetry != "general" and i != j:
            mirrored = -value if symmetry == "skew-symmetric" else value
            rows[count], cols[count], vals[count] = j - 1, i - 1, mirrored
            count += 1
    coo = sparse.coo_array(
        (vals[:count], (rows[:count], cols[:count])), shape=(m, n)
    )
    csr = sparse.csr_array(coo)  # conversion sums duplicate coordinates
    return csr, count - csr.nnz


def _read_array(entry_lines, m, n, symmetry):
    if symmetry == "general":
        expected = m * n
    else:
        if m != n:
            raise MatrixMarketError("line 2: symmetric array files must be square")
        expected = m * (m + 1) // 2 if symmetry == "symmetric" else m * (m - 1) // 2
    if len(entry_lines) != expected:
        where = entry_lines[expected][0] if len(entry_lines) > expected else "end of file"
        raise MatrixMarketError(
            f"line {where}: expected {expected} values, found {len(entry_lines)}"
        )
    values = np.empty(expected)
    for k, (lineno, line) in enumerate(entry_lines):
        tokens = line.split()
        if len(tokens) != 1:
            _fail(lineno, f"array entry needs 1 value, got {len(tokens)}")
        values[k] = _parse_float(tokens[0], lineno)
    a = np.zeros((m, n))
    k = 0
    for j in range(n):  # column-major per the exchange format
        if symmetry == "general":
            i_start = 0
        elif symmetry == "symmetric":
            i_start = j
        else:
            i_start = j + 1
        for i in range(i_start, m):
            a[i, j] = values[k]
            if symmetry == "symmetric" and i != j:
                a[j, i] = values[k]
            elif symmetry == "skew-symmetric":
                a[j, i] = -values[k]
            k += 1
    return a


def _render(value: float) -> str:
    # repr() is the shortest decimal string that parses back to the same
    # float64, which is what makes round-trips bit-exact.
    return repr(float(value))


def write_matrix_market(a, target) -> None:
    """Write ``a`` as coordinate/general (sparse input) or array/general
    (dense input)."""
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            _write(a, fh)
    else:
        _write(a, target)


def _write(a, fh) -> None:
    if sparse.issparse(a):
        coo = sparse.coo_array(a)
        m, n = coo.shape
        fh.write(f"{BANNER} matrix coordinate real general\n")
        fh.write(f"{m} {n} {coo.nnz}\n")
        order = np.lexsort((coo.coords[1], coo.coords[0]))
        for k in order:
            i, j = coo.coords[0][k], coo.coords[1][k]
            fh.write(f"{i + 1} {j + 1} {_render(coo.data[k])}\n")
    else:
        arr = np.asarray(a, dtype=np.float64)
        m, n = arr.shape
        fh.write(f"{BANNER} matrix array real general\n")
        fh.write(f"{m} {n}\n")
        for j in range(n):
            for i in range(m):
                fh.write(f"{_render(arr[i, j])}\n")
