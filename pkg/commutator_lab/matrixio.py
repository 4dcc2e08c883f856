"""Matrix and value-list file formats.

JSON matrices are ``{"n": n, "data": [[re, im], ...]}`` with ``n*n``
entries in row-major order. CSV matrices have ``n`` rows of ``2n`` reals,
real and imaginary parts interleaved. Floats are written with ``repr`` so a
parse of a serialized matrix reproduces it bit for bit.

Value lists (for rearrangement) are a JSON array of ``[re, im]`` pairs or a
CSV file with one ``re,im`` row per value.
"""

import csv
import io
import json
import math
from enum import Enum
from pathlib import Path
from typing import IO

import numpy as np
import numpy.typing as npt

from commutator_lab.exceptions import MatrixFormatError
from commutator_lab.matcore import ComplexMatrix


class MatrixFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


def infer_format(path: str | Path) -> MatrixFormat:
    """Format from the file extension (``.json`` or ``.csv``)."""
    suffix = Path(path).suffix.lower().lstrip(".")
    try:
        return MatrixFormat(suffix)
    except ValueError:
        raise MatrixFormatError(f"cannot infer matrix format from extension of {str(path)!r}") from None


def _reject_constant(name: str) -> float:
    raise ValueError(f"non-finite value {name}")


def _real(value: object, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MatrixFormatError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _load_json(text: str) -> object:
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as err:
        raise MatrixFormatError(f"invalid JSON: {err.msg}", err.lineno, err.colno) from None
    except ValueError as err:
        raise MatrixFormatError(f"invalid JSON: {err}") from None


def _pair(entry: object, where: str) -> complex:
    if not isinstance(entry, list) or len(entry) != 2:
        raise MatrixFormatError(f"{where}: expected an [re, im] pair, got {entry!r}")
    return complex(_real(entry[0], where), _real(entry[1], where))


def _parse_json(text: str) -> ComplexMatrix:
    document = _load_json(text)
    if not isinstance(document, dict) or "n" not in document or "data" not in document:
        raise MatrixFormatError('expected an object with keys "n" and "data"')
    n = document["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise MatrixFormatError(f'"n" must be a positive integer, got {n!r}')
    data = document["data"]
    if not isinstance(data, list):
        raise MatrixFormatError('"data" must be a list of [re, im] pairs')
    if len(data) != n * n:
        missing = n * n - len(data)
        detail = f"missing {missing} entries" if missing > 0 else f"{-missing} extra entries"
        raise MatrixFormatError(f"expected {n * n} entries for n={n}, found {len(data)} ({detail})")
    entries = [_pair(entry, f"entry {k}") for k, entry in enumerate(data)]
    return np.array(entries, dtype=np.complex128).reshape(n, n)


def _parse_csv(text: str) -> ComplexMatrix:
    rows = [(line, row) for line, row in enumerate(csv.reader(io.StringIO(text)), start=1) if row]
    if not rows:
        raise MatrixFormatError("empty CSV matrix")
    first_line, first = rows[0]
    if len(first) % 2:
        raise MatrixFormatError(f"row has {len(first)} fields; expected an even count", first_line)
    n = len(first) // 2
    matrix = np.zeros((n, n), dtype=np.complex128)
    for r, (line, row) in enumerate(rows):
        if r >= n:
            raise MatrixFormatError(f"more than {n} rows for a {n}x{n} matrix", line)
        if len(row) != 2 * n:
            raise MatrixFormatError(f"expected {2 * n} fields, found {len(row)}", line, len(row) + 1)
        reals = []
        for column, field in enumerate(row, start=1):
            try:
                value = float(field)
            except ValueError:
                raise MatrixFormatError(f"not a number: {field.strip()!r}", line, column) from None
            if not math.isfinite(value):
                raise MatrixFormatError(f"non-finite value {field.strip()!r}", line, column)
            reals.append(value)
        # Assign parts separately so signed zeros survive
        matrix.real[r] = reals[0::2]
        matrix.imag[r] = reals[1::2]
    if len(rows) < n:
        missing = (n - len(rows)) * n
        raise MatrixFormatError(f"expected {n} rows for a {n}x{n} matrix, found {len(rows)} (missing {missing} entries)")
    return matrix


def loads_matrix(text: str, format: MatrixFormat | str) -> ComplexMatrix:
    """Parse a matrix from text.

    Raises:
        MatrixFormatError: Malformed, non-square or non-finite data; the
            message carries the line and column when known.
    """
    format = MatrixFormat(format)
    matrix = _parse_json(text) if format is MatrixFormat.JSON else _parse_csv(text)
    if not np.all(np.isfinite(matrix)):
        raise MatrixFormatError("matrix has non-finite entries")
    return matrix


def parse_matrix(source: str | Path | IO[str], format: MatrixFormat | str | None = None) -> ComplexMatrix:
    """Read a matrix from a path or an open text stream.

    The format is inferred from the file extension when not given.
    """
    if isinstance(source, (str, Path)):
        format = infer_format(source) if format is None else format
        return loads_matrix(Path(source).read_text(encoding="utf-8"), format)
    if format is None:
        raise MatrixFormatError("format is required when reading from a stream")
    return loads_matrix(source.read(), format)


def _pairs(m: npt.ArrayLike) -> ComplexMatrix:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise MatrixFormatError(f"only square matrices can be serialized, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise MatrixFormatError("matrix has non-finite entries")
    return arr


def dumps_matrix(m: npt.ArrayLike, format: MatrixFormat | str) -> str:
    arr = _pairs(m)
    if MatrixFormat(format) is MatrixFormat.JSON:
        data = [[float(z.real), float(z.imag)] for z in arr.ravel()]
        return json.dumps({"n": arr.shape[0], "data": data}) + "\n"
    lines = []
    for row in arr:
        lines.append(",".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
    return "\n".join(lines) + "\n"


def serialize_matrix(m: npt.ArrayLike, format: MatrixFormat | str) -> bytes:
    """Serialize a matrix to UTF-8 bytes."""
    return dumps_matrix(m, format).encode("utf-8")


def write_matrix(m: npt.ArrayLike, path: str | Path, format: MatrixFormat | str | None = None) -> None:
    format = infer_format(path) if format is None else format
    Path(path).write_bytes(serialize_matrix(m, format))


def loads_values(text: str, format: MatrixFormat | str) -> npt.NDArray[np.complex128]:
    """Parse a list of complex values."""
    if MatrixFormat(format) is MatrixFormat.JSON:
        document = _load_json(text)
        if not isinstance(document, list):
            raise MatrixFormatError("expected a JSON array of [re, im] pairs")
        return np.array([_pair(entry, f"value {k}") for k, entry in enumerate(document)], dtype=np.complex128)
    values = []
    for line, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row:
            continue
        if len(row) != 2:
            raise MatrixFormatError(f"expected 2 fields (re,im), found {len(row)}", line)
        try:
            re, im = float(row[0]), float(row[1])
        except ValueError:
            raise MatrixFormatError(f"not a number in {','.join(row)!r}", line) from None
        if not (math.isfinite(re) and math.isfinite(im)):
            raise MatrixFormatError("non-finite value", line)
        values.append(complex(re, im))
    return np.array(values, dtype=np.complex128)


def parse_values(path: str | Path, format: MatrixFormat | str | None = None) -> npt.NDArray[np.complex128]:
    format = infer_format(path) if format is None else format
    return loads_values(Path(path).read_text(encoding="utf-8"), format)
