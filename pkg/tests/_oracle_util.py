"""Shared independent oracles for the test suite.

Everything here avoids the package's own residual formula so that tests
compare two genuinely different routes: schemes applied to exact polynomial
data versus the package's Taylor-coefficient vectors.
"""

from fractions import Fraction as F

from blockstep.scheme import Scheme, make_scheme


def poly_eval(coeffs, x):
    """Horner evaluation of sum_k coeffs[k] * x**k."""
    acc = F(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_deriv(coeffs):
    return [k * c for k, c in enumerate(coeffs)][1:] or [F(0)]


def random_rational(rng, num=8, den=6):
    return F(rng.randint(-num, num), rng.randint(1, den))


def random_abscissae(rng, s=2):
    # strictly descending c_in ending at 0; c_out descending and ahead of
    # c_in componentwise
    steps = [F(rng.randint(1, 4), rng.randint(1, 4)) for _ in range(s - 1)]
    c_in = [F(0)]
    for st in steps:
        c_in.append(c_in[-1] + st)
    c_in = list(reversed(c_in))
    shift = F(rng.randint(1, 3), rng.randint(1, 2))
    c_out = [c + shift for c in c_in]
    return c_in, c_out


def random_scheme(rng, s=2, name="random") -> Scheme:
    c_in, c_out = random_abscissae(rng, s)
    A = [[random_rational(rng) for _ in range(s)] for _ in range(s)]
    B = [[random_rational(rng) for _ in range(s)] for _ in range(s)]
    return make_scheme(name, c_in, c_out, A, B)


def scheme_residual_on_polynomial(scheme: Scheme, u_coeffs, t, dt):
    """U_{n+1} - A U_n - dt B U'_n for an exact polynomial solution u.

    Evaluated entirely by applying the scheme to u at rational times; no
    Taylor expansion involved.
    """
    du = poly_deriv(u_coeffs)
    s = scheme.s
    out = []
    for i in range(s):
        acc = poly_eval(u_coeffs, t + scheme.c_out[i] * dt)
        for j in range(s):
            acc -= scheme.A[i][j] * poly_eval(u_coeffs, t + scheme.c_in[j] * dt)
            acc -= dt * scheme.B[i][j] * poly_eval(du, t + scheme.c_in[j] * dt)
        out.append(acc)
    return tuple(out)


def taylor_residual_on_polynomial(scheme: Scheme, residual_vector, u_coeffs, t, dt):
    """sum_p d_p dt^p u^(p)(t) using the package's residual vectors."""
    s = scheme.s
    out = [F(0)] * s
    coeffs = list(u_coeffs)
    p = 0
    while any(c != 0 for c in coeffs) or p == 0:
        d_p = residual_vector(scheme, p)
        up = poly_eval(coeffs, t)
        for i in range(s):
            out[i] += d_p[i] * dt**p * up
        coeffs = poly_deriv(coeffs)
        p += 1
        if p > len(u_coeffs) + 1:
            break
    return tuple(out)
