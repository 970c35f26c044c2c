"""Exact rational arithmetic and small dense linear algebra.

All scheme algebra in this package is carried out over arbitrary-precision
rationals so that order conditions and eigenstructure checks are decided by
exact equality, never by floating-point tolerance.  The stdlib
:class:`fractions.Fraction` already provides a canonical rational (positive
denominator, reduced terms, exact arithmetic), so it is used directly as the
Rational type; this module adds the vector/matrix layer on top of it.

Rank and linear solves use fraction-free (Bareiss) elimination on an integer
rescaling of the rows, which keeps intermediate entries as single big
integers instead of fractions with multiplied-out denominators.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

Rational = Fraction
ExactVector = tuple[Fraction, ...]
ExactMatrix = tuple[tuple[Fraction, ...], ...]


def rat_normalize(num: int, den: int) -> Fraction:
    """Build the canonical rational num/den (positive denominator, reduced)."""
    if den == 0:
        raise ZeroDivisionError("division by zero")
    return Fraction(num, den)


def rat_str(x: Fraction) -> str:
    """Serialize a rational as 'p/q', or just 'p' for integers."""
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def as_vector(entries) -> ExactVector:
    """Coerce an iterable of rational-like values to an ExactVector."""
    v = tuple(Fraction(x) for x in entries)
    if not v:
        raise ValueError("empty vector")
    return v


def as_matrix(rows) -> ExactMatrix:
    """Coerce nested iterables to a rectangular ExactMatrix."""
    m = tuple(tuple(Fraction(x) for x in row) for row in rows)
    if not m or not m[0]:
        raise ValueError("empty matrix")
    if any(len(row) != len(m[0]) for row in m):
        raise ValueError("ragged matrix")
    return m


def matvec(M: ExactMatrix, v: ExactVector) -> ExactVector:
    """Exact matrix-vector product."""
    if any(len(row) != len(v) for row in M):
        raise ValueError(
            f"dimension mismatch: matrix has {len(M[0])} columns, vector has {len(v)}"
        )
    return tuple(sum((row[j] * v[j] for j in range(len(v))), Fraction(0)) for row in M)


def _integer_rows(M, extra=None):
    # Scale each row by the lcm of its denominators; rank and solution sets
    # are unchanged.  `extra` appends a right-hand-side column first.
    rows = []
    for i, row in enumerate(M):
        full = list(row) + ([extra[i]] if extra is not None else [])
        scale = lcm(*(f.denominator for f in full))
        rows.append([int(f * scale) for f in full])
    return rows


def rank(M: ExactMatrix) -> int:
    """Exact rank via fraction-free Gaussian elimination."""
    rows = _integer_rows(M)
    nr, nc = len(rows), len(rows[0])
    r = 0
    prev = 1
    for col in range(nc):
        piv = next((i for i in range(r, nr) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(r + 1, nr):
            for j in range(col + 1, nc):
                # Bareiss step: exact division by the previous pivot.
                rows[i][j] = (rows[r][col] * rows[i][j] - rows[i][col] * rows[r][j]) // prev
            rows[i][col] = 0
        prev = rows[r][col]
        r += 1
        if r == nr:
            break
    return r


def solve_linear(M: ExactMatrix, rhs: ExactVector) -> ExactVector:
    """Solve the square system M x = rhs exactly.

    Raises ValueError("singular system") when M has no unique solution.
    """
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValueError("dimension mismatch: matrix not square")
    if len(rhs) != n:
        raise ValueError(f"dimension mismatch: matrix is {n}x{n}, rhs has {len(rhs)}")
    rows = _integer_rows(M, extra=rhs)
    prev = 1
    for col in range(n):
        piv = next((i for i in range(col, n) if rows[i][col] != 0), None)
        if piv is None:
            raise ValueError("singular system")
        rows[col], rows[piv] = rows[piv], rows[col]
        for i in range(col + 1, n):
            for j in range(col + 1, n + 1):
                rows[i][j] = (rows[col][col] * rows[i][j] - rows[i][col] * rows[col][j]) // prev
            rows[i][col] = 0
        prev = rows[col][col]
    # Back substitution in rationals on the integer triangle.
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        acc = Fraction(rows[i][n])
        for j in range(i + 1, n):
            acc -= rows[i][j] * x[j]
        x[i] = acc / rows[i][i]
    return tuple(x)


def identity(n: int) -> ExactMatrix:
    return tuple(
        tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n)
    )
