"""Matrix Market reader and writer for dense complex matrices.

Reads ``array`` and ``coordinate`` files with ``real``, ``integer``,
``complex`` or ``pattern`` fields and ``general``, ``symmetric``,
``skew-symmetric`` or ``hermitian`` symmetry. Values are written with
``repr`` (shortest round-trip form) so a write/read cycle is bit-identical.
"""

import math

import numpy as np

from .errors import ParseError, SymmetryViolation
from .matcore import HERMITIAN_TOL, fro

FORMATS = ("array", "coordinate")
FIELDS = ("real", "integer", "complex", "pattern")
SYMMETRIES = ("general", "symmetric", "skew-symmetric", "hermitian")


def _parse_header(line, lineno):
    tokens = line.split()
    if len(tokens) != 5 or tokens[0].lower() != "%%matrixmarket" or tokens[1].lower() != "matrix":
        raise ParseError("expected '%%MatrixMarket matrix <format> <field> <symmetry>'", lineno)
    fmt, fld, sym = (t.lower() for t in tokens[2:])
    if fmt not in FORMATS:
        raise ParseError(f"unknown format {fmt!r}", lineno)
    if fld not in FIELDS:
        raise ParseError(f"unknown field {fld!r}", lineno)
    if sym not in SYMMETRIES:
        raise ParseError(f"unknown symmetry {sym!r}", lineno)
    if fld == "pattern" and fmt == "array":
        raise ParseError("pattern field requires coordinate format", lineno)
    if sym == "hermitian" and fld != "complex":
        raise ParseError("hermitian symmetry requires complex field", lineno)
    return fmt, fld, sym


def _ints(tokens, count, lineno, what):
    if len(tokens) != count:
        raise ParseError(f"{what}: expected {count} integers, got {len(tokens)} fields", lineno)
    try:
        values = [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"{what}: non-integer field", lineno) from None
    if any(v < 0 for v in values):
        raise ParseError(f"{what}: negative value", lineno)
    return values


def _value(tokens, fld, lineno):
    want = {"real": 1, "integer": 1, "complex": 2, "pattern": 0}[fld]
    if len(tokens) != want:
        raise ParseError(f"expected {want} value field(s) for {fld}, got {len(tokens)}", lineno)
    try:
        if fld == "pattern":
            return 1.0
        if fld == "integer":
            return float(int(tokens[0]))
        if fld == "real":
            v = float(tokens[0])
        else:
            v = complex(float(tokens[0]), float(tokens[1]))
    except ValueError:
        raise ParseError(f"malformed number in {' '.join(tokens)!r}", lineno) from None
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        raise ParseError("non-finite value", lineno)
    return v


def _data_lines(lines, start):
    for lineno, line in enumerate(lines[start:], start=start + 1):
        s = line.strip()
        if s and not s.startswith("%"):
            yield lineno, s.split()


def parse_matrix_text(text):
    """Parse Matrix Market ``text`` into a complex128 array."""
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file", 1)
    fmt, fld, sym = _parse_header(lines[0], 1)
    data = _data_lines(lines, 1)
    try:
        lineno, tokens = next(data)
    except StopIteration:
        raise ParseError("missing size line", len(lines)) from None
    if fmt == "coordinate":
        m, n, nnz = _ints(tokens, 3, lineno, "size line")
    else:
        m, n = _ints(tokens, 2, lineno, "size line")
    if m < 1 or n < 1:
        raise ParseError("matrix dimensions must be positive", lineno)
    if sym != "general" and m != n:
        raise ParseError(f"{sym} matrix must be square", lineno)

    M = np.zeros((m, n), dtype=np.complex128)
    stored = np.zeros((m, n), dtype=bool)
    if fmt == "array":
        if sym == "general":
            slots = [(i, j) for j in range(n) for i in range(m)]
        elif sym == "skew-symmetric":
            slots = [(i, j) for j in range(n) for i in range(j + 1, m)]
        else:
            slots = [(i, j) for j in range(n) for i in range(j, m)]
        for i, j in slots:
            try:
                lineno, tokens = next(data)
            except StopIteration:
                raise ParseError(f"expected {len(slots)} values, file ends early", len(lines)) from None
            M[i, j] = _value(tokens, fld, lineno)
            stored[i, j] = True
    else:
        for _ in range(nnz):
            try:
                lineno, tokens = next(data)
            except StopIteration:
                raise ParseError(f"expected {nnz} entries, file ends early", len(lines)) from None
            want = 3 if fld in ("real", "integer") else 4 if fld == "complex" else 2
            if len(tokens) != want:
                raise ParseError(f"expected {want} fields per entry, got {len(tokens)}", lineno)
            i, j = _ints(tokens[:2], 2, lineno, "entry index")
            if not (1 <= i <= m and 1 <= j <= n):
                raise ParseError(f"index ({i}, {j}) outside {m} x {n}", lineno)
            if stored[i - 1, j - 1]:
                raise ParseError(f"duplicate entry ({i}, {j})", lineno)
            M[i - 1, j - 1] = _value(tokens[2:], fld, lineno)
            stored[i - 1, j - 1] = True
    extra = next(data, None)
    if extra is not None:
        raise ParseError("unexpected data after the last entry", extra[0])
    return _expand(M, stored, sym)


def _expand(M, stored, sym):
    if sym == "general":
        return M
    mirror = {"symmetric": lambda v: v, "skew-symmetric": lambda v: -v,
              "hermitian": np.conj}[sym]
    for i, j in zip(*np.nonzero(stored)):
        if i != j and not stored[j, i]:
            M[j, i] = mirror(M[i, j])
    if sym == "hermitian":
        if fro(M - M.conj().T) > HERMITIAN_TOL * fro(M):
            raise SymmetryViolation("matrix declared hermitian is not Hermitian")
    else:
        target = M.T if sym == "symmetric" else -M.T
        if fro(M - target) > HERMITIAN_TOL * fro(M):
            raise SymmetryViolation(f"matrix declared {sym} violates its symmetry")
    return M


def read_matrix(path):
    """Read a Matrix Market file into a dense complex128 array."""
    with open(path, encoding="ascii", errors="replace") as fh:
        return parse_matrix_text(fh.read())


def _fmt(x):
    return repr(float(x))


def format_matrix(M, fmt="array", symmetry="general", field=None):
    """Matrix Market text for ``M``.

    ``field`` defaults to ``complex`` when ``M`` has a complex dtype and
    ``real`` otherwise. Symmetric kinds store the lower triangle.
    """
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError("need a 2-D array")
    if fmt not in FORMATS or symmetry not in SYMMETRIES:
        raise ValueError(f"unsupported format/symmetry {fmt!r}/{symmetry!r}")
    if field is None:
        field = "complex" if np.iscomplexobj(M) else "real"
    if field not in ("real", "complex", "integer"):
        raise ValueError(f"cannot write field {field!r}")
    if field != "complex" and np.iscomplexobj(M) and np.any(M.imag != 0):
        raise ValueError("matrix has imaginary parts; use field='complex'")
    m, n = M.shape

    def value(v):
        if field == "complex":
            v = complex(v)
            return f"{_fmt(v.real)} {_fmt(v.imag)}"
        if field == "integer":
            return str(int(np.real(v)))
        return _fmt(np.real(v))

    if symmetry == "general":
        slots = [(i, j) for j in range(n) for i in range(m)]
    elif symmetry == "skew-symmetric":
        slots = [(i, j) for j in range(n) for i in range(j + 1, m)]
    else:
        slots = [(i, j) for j in range(n) for i in range(j, m)]
    out = [f"%%MatrixMarket matrix {fmt} {field} {symmetry}"]
    if fmt == "array":
        out.append(f"{m} {n}")
        out.extend(value(M[i, j]) for i, j in slots)
    else:
        nz = [(i, j) for i, j in slots if M[i, j] != 0]
        out.append(f"{m} {n} {len(nz)}")
        out.extend(f"{i + 1} {j + 1} {value(M[i, j])}" for i, j in nz)
    return "\n".join(out) + "\n"


def write_matrix(path, M, fmt="array", symmetry="general", field=None):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_matrix(M, fmt, symmetry, field))
