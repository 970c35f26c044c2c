"""Construction of new error-inhibiting scheme candidates.

Fixing the rank-1 row a (so A = 1 a^T with a^T 1 = 1) and the abscissae
determines B uniquely from the order conditions d_p = 0, p = 1..s: each row
b_i of B solves the transposed Vandermonde system

    sum_j b_ij c_in[j]^(p-1)  =  (c_out[i]^p - a^T c_in^p) / p ,   p = 1..s.

What remains is the error-inhibiting constraint a^T d_{s+1}(a) = 0, a scalar
polynomial equation over the (s-1)-parameter family of admissible a.  The
searches here walk 1-D slices of that family.  On any slice preserving
a^T 1 = 1 the constraint is actually affine in the slice parameter (every
would-be quadratic contribution carries a factor sum(a) = 1 that freezes one
power), so real searches land in the linear branch below; the quadratic and
bisection branches still cover general fitted polynomials.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from . import analysis
from .exact import ExactMatrix, ExactVector, as_vector, solve_linear
from .scheme import Scheme, make_scheme

S3_C_IN = (Fraction(2, 3), Fraction(1, 3), Fraction(0))


def _normalize(a, c_in, c_out):
    a = as_vector(a)
    c_in = as_vector(c_in)
    c_out = tuple(c + 1 for c in c_in) if c_out is None else as_vector(c_out)
    s = len(c_in)
    if len(a) != s or len(c_out) != s:
        raise ValueError("dimension mismatch: a, c_in, c_out must share length")
    if len(set(c_in)) != s:
        raise ValueError("singular moment matrix")
    if sum(a) != 1:
        raise ValueError("row sum violation")
    return a, c_in, c_out


def solve_B(a, c_in, c_out=None) -> ExactMatrix:
    """The unique B with d_p = 0 for p = 1..s, given A = 1 a^T."""
    a, c_in, c_out = _normalize(a, c_in, c_out)
    s = len(a)
    V = tuple(tuple(c ** (p - 1) for c in c_in) for p in range(1, s + 1))
    rows = []
    for i in range(s):
        rhs = tuple(
            (c_out[i] ** p - sum(a[j] * c_in[j] ** p for j in range(s))) / p
            for p in range(1, s + 1)
        )
        rows.append(solve_linear(V, rhs))
    return tuple(rows)


def assemble(a, c_in, c_out=None, name: str = "derived") -> Scheme:
    """Scheme with A = 1 a^T and B from solve_B."""
    a, c_in, c_out = _normalize(a, c_in, c_out)
    B = solve_B(a, c_in, c_out)
    return make_scheme(name, c_in, c_out, [a] * len(a), B)


def eis_constraint(a, c_in, c_out=None) -> Fraction:
    """The scalar a^T d_{s+1} for the scheme assembled from a."""
    sch = assemble(a, c_in, c_out)
    d = analysis.residual_vector(sch, sch.s + 1)
    return sum((sch.A[0][i] * d[i] for i in range(sch.s)), Fraction(0))


@dataclass(frozen=True)
class DerivationResult:
    a: ExactVector
    B: ExactMatrix
    achieved_order: int
    eis_residual: Fraction


def derive_scheme(a, c_in, c_out=None) -> DerivationResult:
    """Solve for B and classify the assembled scheme.

    achieved_order re-detects the truncation order rather than assuming s;
    special choices of a can exceed it.
    """
    sch = assemble(a, c_in, c_out)
    report = analysis.verify_conditions(sch)
    return DerivationResult(
        a=sch.A[0], B=sch.B, achieved_order=report.q, eis_residual=report.eis_residual
    )


# ----- 1-D root searches ---------------------------------------------------


@dataclass(frozen=True)
class SearchRoot:
    """A root of the EIS constraint along a search slice.

    exact marks rational roots found in closed form; bisected roots carry a
    rational enclosure midpoint within 1e-14 of the true root.
    """

    param: Fraction
    a: ExactVector
    exact: bool


def _fit_poly(g):
    # g is a polynomial of degree <= 2 in its argument; recover it exactly
    # from evaluations and verify the degree bound at a fourth point.
    g0, g1, gm1 = g(Fraction(0)), g(Fraction(1)), g(Fraction(-1))
    gamma = g0
    beta = (g1 - gm1) / 2
    alpha = (g1 + gm1) / 2 - g0
    if g(Fraction(2)) != 4 * alpha + 2 * beta + gamma:
        raise ArithmeticError("constraint is not quadratic in the slice parameter")
    return alpha, beta, gamma


def _rational_sqrt(x: Fraction):
    if x < 0:
        return None
    rn, rd = isqrt(x.numerator), isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    return None


def _bisect_roots(g, lo: Fraction, hi: Fraction, samples: int) -> list[Fraction]:
    xs = [lo + (hi - lo) * Fraction(k, samples - 1) for k in range(samples)]
    vals = [g(x) for x in xs]
    roots = []
    for k in range(samples - 1):
        va, vb = vals[k], vals[k + 1]
        if va == 0:
            roots.append(xs[k])
            continue
        if va * vb < 0:
            a, b, fa = xs[k], xs[k + 1], va
            while float(b - a) > 1e-14:
                m = (a + b) / 2
                fm = g(m)
                if fm == 0:
                    a = b = m
                    break
                if (fa < 0) == (fm < 0):
                    a, fa = m, fm
                else:
                    b = m
            roots.append((a + b) / 2)
    if vals[-1] == 0:
        roots.append(xs[-1])
    return roots


def _slice_roots(g, lo: Fraction, hi: Fraction, samples: int):
    """Roots of g in [lo, hi] as (param, exact) pairs.

    Rational roots (linear case, or perfect-square discriminant) are
    returned exactly; irrational ones are bracketed by sampling and bisected
    to 1e-14.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    if lo > hi:
        raise ValueError("empty search range")
    alpha, beta, gamma = _fit_poly(g)
    if alpha == 0 and beta == 0:
        return []
    if alpha == 0:
        r = -gamma / beta
        return [(r, True)] if lo <= r <= hi else []
    disc = beta * beta - 4 * alpha * gamma
    if disc < 0:
        return []
    sq = _rational_sqrt(disc)
    if sq is not None:
        roots = sorted({(-beta + sq) / (2 * alpha), (-beta - sq) / (2 * alpha)})
        return [(r, True) for r in roots if lo <= r <= hi]
    if lo == hi:
        return [(lo, False)] if g(lo) == 0 else []
    return [(r, False) for r in _bisect_roots(g, lo, hi, samples)]


def search_s2(c_in, c_out=None, a1_range=(-2, 2), samples: int = 33) -> list[SearchRoot]:
    """Roots of a1 -> eis_constraint((a1, 1 - a1)) within a1_range."""
    lo, hi = Fraction(a1_range[0]), Fraction(a1_range[1])

    def g(t):
        return eis_constraint((t, 1 - t), c_in, c_out)

    return [
        SearchRoot(param=r, a=(r, 1 - r), exact=e)
        for r, e in _slice_roots(g, lo, hi, samples)
    ]


def search_s3_slice(
    fixed_index: int,
    fixed_value,
    t_range=(-2, 2),
    samples: int = 33,
    c_in=S3_C_IN,
    c_out=None,
) -> list[SearchRoot]:
    """Roots along a 1-D slice of the two-parameter s=3 family.

    Component fixed_index is pinned to fixed_value; of the two free
    components the lower-indexed one is the slice parameter t and the other
    takes 1 - fixed_value - t, keeping a^T 1 = 1.
    """
    c_in = as_vector(c_in)
    if len(c_in) != 3:
        raise ValueError("s=3 slice search requires three abscissae")
    if fixed_index not in (0, 1, 2):
        raise ValueError("fixed_index must be 0, 1, or 2")
    v = Fraction(fixed_value)
    i, j = (k for k in range(3) if k != fixed_index)
    lo, hi = Fraction(t_range[0]), Fraction(t_range[1])

    def a_of(t):
        a = [Fraction(0)] * 3
        a[fixed_index] = v
        a[i] = t
        a[j] = 1 - v - t
        return tuple(a)

    def g(t):
        return eis_constraint(a_of(t), c_in, c_out)

    return [
        SearchRoot(param=r, a=a_of(r), exact=e)
        for r, e in _slice_roots(g, lo, hi, samples)
    ]
