"""Truncation-residual analysis, error-inhibiting condition checks, stability.

The one-step residual of a smooth solution u under a block scheme expands as

    U_{n+1} - A U_n - dt * B * U'_n  =  sum_p d_p dt^p u^(p)(t_n)

with exact rational coefficient vectors

    d_p = c_out^p / p!  -  A c_in^p / p!  -  B c_in^(p-1) / (p-1)!

(elementwise powers).  The truncation order q is the largest k with d_p = 0
for all p <= k; the normalized local truncation error is then
tau_n = d_{q+1} dt^q u^(q+1) + O(dt^{q+1}).

A scheme is error inhibiting when the leading residual vector d_{q+1} lies in
the zero-eigenspace of A.  The checkable conditions are:

    C1  rank(A) = 1
    C2  A 1 = 1          (eigenvalue 1 with the all-ones eigenvector)
    C3  A diagonalizable  (follows from C1 and C2: A = 1 a^T with trace 1)
    C4  a^T d_{q+1} = 0   (leading residual annihilated by A)

Under C1-C2 every row of A equals the same vector a^T, so
A d_{q+1} = (a^T d_{q+1}) 1 and C4 is exactly the leading-order annihilation
statement.  Global error then converges one order beyond q.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import NamedTuple

import numpy as np

from .exact import ExactVector, matvec, rank
from .scheme import Scheme

_ZCUBE = cmath.exp(2j * cmath.pi / 3)


def residual_vector(scheme: Scheme, p: int) -> ExactVector:
    """Exact residual coefficient vector d_p (p >= 0).

    d_0 = 1 - A 1 is the consistency-of-constants residual; it vanishes
    exactly when C2 holds.
    """
    if p < 0:
        raise ValueError("p must be nonnegative")
    ones = tuple(Fraction(1) for _ in range(scheme.s))
    if p == 0:
        Aones = matvec(scheme.A, ones)
        return tuple(1 - x for x in Aones)
    fp = factorial(p)
    fq = factorial(p - 1)
    cin_p = tuple(c**p / fp for c in scheme.c_in)
    cin_q = tuple(c ** (p - 1) / fq for c in scheme.c_in)
    Acin = matvec(scheme.A, cin_p)
    Bcin = matvec(scheme.B, cin_q)
    return tuple(
        scheme.c_out[i] ** p / fp - Acin[i] - Bcin[i] for i in range(scheme.s)
    )


def residual_table(scheme: Scheme, p_max: int) -> dict[int, ExactVector]:
    """Residual vectors d_1 .. d_{p_max} keyed by order."""
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    return {p: residual_vector(scheme, p) for p in range(1, p_max + 1)}


class TruncationOrder(NamedTuple):
    q: int
    leading: ExactVector
    saturated: bool  # q hit p_max; raise p_max to resolve


def truncation_order(scheme: Scheme, p_max: int = 8) -> TruncationOrder:
    """Largest q with d_p = 0 for all p <= q, plus the leading vector d_{q+1}.

    When every order up to p_max vanishes the result is flagged saturated and
    the caller should retry with a larger p_max.
    """
    if p_max < 2:
        raise ValueError("p_max must be >= 2")
    zero = tuple(Fraction(0) for _ in range(scheme.s))
    q = 0
    for p in range(1, p_max + 1):
        if residual_vector(scheme, p) != zero:
            return TruncationOrder(p - 1, residual_vector(scheme, p), False)
        q = p
    return TruncationOrder(q, residual_vector(scheme, q + 1), True)


@dataclass(frozen=True)
class ConditionRecord:
    """Outcome of one condition check.

    passed is None when the condition could not be evaluated (C3 and C4
    require the rank-1 row structure established by C1 and C2).
    """

    passed: bool | None
    witness: object

    @property
    def status(self) -> str:
        if self.passed is None:
            return "NOT EVALUATED"
        return "PASS" if self.passed else "FAIL"


@dataclass(frozen=True)
class VerificationReport:
    scheme_name: str
    conditions: dict[str, ConditionRecord]
    q: int
    leading: ExactVector
    a: ExactVector | None
    eis_residual: Fraction | None
    saturated: bool

    @property
    def all_pass(self) -> bool:
        return all(rec.passed for rec in self.conditions.values())


def _rank1_row(scheme: Scheme) -> ExactVector | None:
    # Under C1+C2 all rows of A coincide; return that common row.
    first = scheme.A[0]
    if all(row == first for row in scheme.A[1:]):
        return first
    return None


def verify_conditions(scheme: Scheme, p_max: int = 8) -> VerificationReport:
    """Check C1-C4 exactly and report witnesses.

    The truncation order search starts at p_max and doubles while saturated,
    up to a hard bound, so callers normally never see a saturated report.
    """
    bound = p_max
    while True:
        order = truncation_order(scheme, bound)
        if not order.saturated or bound >= 40:
            break
        bound *= 2
    if order.saturated:
        raise ValueError("truncation order exceeds search bound 40")

    r = rank(scheme.A)
    c1 = ConditionRecord(r == 1, r)
    ones = tuple(Fraction(1) for _ in range(scheme.s))
    row_sums = matvec(scheme.A, ones)
    c2 = ConditionRecord(all(x == 1 for x in row_sums), row_sums)

    a = _rank1_row(scheme) if (c1.passed and c2.passed) else None
    if a is None:
        c3 = ConditionRecord(None, None)
        c4 = ConditionRecord(None, None)
        eis = None
    else:
        # trace(A) = a^T 1 = 1 != 0, so the rank-1 A has eigenvalues
        # {1, 0, ..., 0} with independent eigenvectors: diagonalizable.
        trace = sum((a[i] for i in range(scheme.s)), Fraction(0))
        c3 = ConditionRecord(trace != 0, trace)
        eis = sum(
            (a[i] * order.leading[i] for i in range(scheme.s)), Fraction(0)
        )
        c4 = ConditionRecord(eis == 0, eis)

    return VerificationReport(
        scheme_name=scheme.name,
        conditions={"C1": c1, "C2": c2, "C3": c3, "C4": c4},
        q=order.q,
        leading=order.leading,
        a=a,
        eis_residual=eis,
        saturated=order.saturated,
    )


# ----- linear stability diagnostics ---------------------------------------


def _quadratic_roots(tr: complex, det: complex) -> list[complex]:
    sq = cmath.sqrt(tr * tr - 4 * det)
    return [(tr + sq) / 2, (tr - sq) / 2]


def _cubic_roots(a: complex, b: complex, c: complex) -> list[complex]:
    # Roots of y^3 + a y^2 + b y + c via Cardano in complex arithmetic.
    p = b - a * a / 3
    q = 2 * a**3 / 27 - a * b / 3 + c
    w = cmath.sqrt(q * q / 4 + p**3 / 27)
    s1, s2 = -q / 2 + w, -q / 2 - w
    t = s1 if abs(s1) >= abs(s2) else s2
    if t == 0:
        return [-a / 3] * 3
    u = t ** (1.0 / 3.0)
    v = -p / (3 * u)
    return [
        u + v - a / 3,
        u * _ZCUBE + v / _ZCUBE - a / 3,
        u / _ZCUBE + v * _ZCUBE - a / 3,
    ]


def _char_roots(Q: np.ndarray) -> list[complex]:
    s = Q.shape[0]
    if s == 1:
        return [complex(Q[0, 0])]
    if s == 2:
        tr = Q[0, 0] + Q[1, 1]
        det = Q[0, 0] * Q[1, 1] - Q[0, 1] * Q[1, 0]
        roots = _quadratic_roots(complex(tr), complex(det))
        coeffs = [complex(-tr), complex(det)]
    elif s == 3:
        tr = Q[0, 0] + Q[1, 1] + Q[2, 2]
        m2 = (
            Q[1, 1] * Q[2, 2] - Q[1, 2] * Q[2, 1]
            + Q[0, 0] * Q[2, 2] - Q[0, 2] * Q[2, 0]
            + Q[0, 0] * Q[1, 1] - Q[0, 1] * Q[1, 0]
        )
        det = complex(np.linalg.det(Q))
        roots = _cubic_roots(complex(-tr), complex(m2), complex(-det))
        coeffs = [complex(-tr), complex(m2), complex(-det)]
    else:
        raise ValueError("stability diagnostics support s <= 3")

    # Newton polish against the monic characteristic polynomial; the closed
    # forms are already accurate, this just shaves rounding.
    def poly(x):
        acc = x**s
        for k, ck in enumerate(coeffs):
            acc += ck * x ** (s - 1 - k)
        return acc

    def dpoly(x):
        acc = s * x ** (s - 1)
        for k, ck in enumerate(coeffs):
            deg = s - 1 - k
            if deg:
                acc += ck * deg * x ** (deg - 1)
        return acc

    polished = []
    for lam in roots:
        tol = 1e-12 * max(1.0, abs(lam)) ** s
        for _ in range(20):
            if abs(poly(lam)) <= tol:
                break
            d = dpoly(lam)
            if d == 0:
                break
            lam = lam - poly(lam) / d
        polished.append(lam)
    return polished


def amplification(scheme: Scheme, z: complex) -> np.ndarray:
    """Q(z) = A + z B in double precision (z = lambda * dt)."""
    A = np.array([[float(x) for x in row] for row in scheme.A])
    B = np.array([[float(x) for x in row] for row in scheme.B])
    return A.astype(complex) + complex(z) * B


def spectral_radius(scheme: Scheme, z: complex) -> float:
    """rho(A + z B) via closed-form characteristic roots (s <= 3)."""
    return max(abs(lam) for lam in _char_roots(amplification(scheme, z)))


def stability_scan(scheme, re_range, im_range, grid_n):
    """Spectral radius of Q(z) on a grid_n x grid_n grid of z values.

    Returns (re_vals, im_vals, rho) with rho[i][j] the radius at
    z = re_vals[j] + 1j * im_vals[i].
    """
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    re_vals = np.linspace(re_range[0], re_range[1], grid_n)
    im_vals = np.linspace(im_range[0], im_range[1], grid_n)
    A = np.array([[float(x) for x in row] for row in scheme.A], dtype=complex)
    B = np.array([[float(x) for x in row] for row in scheme.B], dtype=complex)
    rho = np.empty((grid_n, grid_n))
    for i, y in enumerate(im_vals):
        for j, x in enumerate(re_vals):
            Q = A + complex(x, y) * B
            rho[i, j] = max(abs(lam) for lam in _char_roots(Q))
    return re_vals, im_vals, rho
