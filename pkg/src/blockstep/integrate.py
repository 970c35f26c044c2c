"""Floating-point time stepping for block one-step schemes.

A block state holds s solution rows, row j approximating u at
t_n + c_in[j] * dt.  One step maps the block to

    V_{n+1} = A V_n + dt * B * F(V_n)

where F applies the right-hand side rowwise at each row's own time.  The
exact rational matrices are rendered to double precision once per scheme
(nearest-even) and reused, so runs are bitwise reproducible.

Also here: the built-in test problems P1-P4, starting-value bootstrap
(exact solution when available, otherwise a fine classical RK4 sweep), a
doubling-verified RK4 reference oracle, and measurement of the local
truncation error of the exact solution under a scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .scheme import Scheme


@dataclass(frozen=True, eq=False)
class Problem:
    """An ODE initial-value problem u' = rhs(t, u), u(t0) = u0."""

    name: str
    dim: int
    rhs: Callable[[float, np.ndarray], np.ndarray]
    exact: Optional[Callable[[float], np.ndarray]]
    u0: np.ndarray
    t0: float = 0.0


def make_problem(name, dim, rhs, exact, u0, t0=0.0) -> Problem:
    u0 = np.array(u0, dtype=float).reshape(dim)
    u0.setflags(write=False)
    if exact is not None:
        err = float(np.max(np.abs(np.asarray(exact(t0), dtype=float) - u0)))
        if err > 1e-14:
            raise ValueError(f"exact(t0) does not match u0 (difference {err:g})")
    return Problem(name=name, dim=dim, rhs=rhs, exact=exact, u0=u0, t0=float(t0))


def make_p1() -> Problem:
    """u' = -u^2, u(0) = 1, exact solution 1/(1+t)."""
    return make_problem(
        "P1",
        1,
        lambda t, u: -u * u,
        lambda t: np.array([1.0 / (1.0 + t)]),
        [1.0],
    )


def make_vdp(mu: float = 0.1) -> Problem:
    """Van der Pol oscillator; no closed-form solution."""

    def rhs(t, u):
        return np.array([u[1], mu * (1.0 - u[0] * u[0]) * u[1] - u[0]])

    return make_problem("P2", 2, rhs, None, [2.0, 0.0])


def make_dahlquist(lam: float = -1.0) -> Problem:
    """u' = lam * u, exact exp(lam t) u0."""
    return make_problem(
        "P3",
        1,
        lambda t, u: lam * u,
        lambda t: np.array([math.exp(lam * t)]),
        [1.0],
    )


def make_p4() -> Problem:
    """u' = cos(t) u, exact exp(sin t); a variable-coefficient linear test."""
    return make_problem(
        "P4",
        1,
        lambda t, u: math.cos(t) * u,
        lambda t: np.array([math.exp(math.sin(t))]),
        [1.0],
    )


_PROBLEM_BUILDERS = {"P1": make_p1, "P2": make_vdp, "P3": make_dahlquist, "P4": make_p4}
PROBLEM_NAMES = tuple(_PROBLEM_BUILDERS)


def problem(name: str) -> Problem:
    try:
        return _PROBLEM_BUILDERS[name]()
    except KeyError:
        raise ValueError(f"unknown problem: {name!r}") from None


@dataclass
class BlockState:
    n: int
    t: float
    values: np.ndarray  # shape (s, dim), row j at time t + c_in[j] * dt


@dataclass
class Trajectory:
    dt: float
    blocks: list[BlockState]

    @property
    def final(self) -> BlockState:
        return self.blocks[-1]


@lru_cache(maxsize=None)
def _float_tables(scheme: Scheme):
    A = np.array([[float(x) for x in row] for row in scheme.A])
    B = np.array([[float(x) for x in row] for row in scheme.B])
    c_in = np.array([float(x) for x in scheme.c_in])
    c_out = np.array([float(x) for x in scheme.c_out])
    for arr in (A, B, c_in, c_out):
        arr.setflags(write=False)
    return A, B, c_in, c_out


def step(scheme: Scheme, prob: Problem, state: BlockState, dt: float) -> BlockState:
    """Advance one block step of size dt."""
    A, B, c_in, _ = _float_tables(scheme)
    F = np.empty_like(state.values)
    for j in range(scheme.s):
        F[j] = prob.rhs(state.t + c_in[j] * dt, state.values[j])
    if not np.isfinite(F).all():
        raise ValueError(f"non-finite state at step {state.n + 1}")
    values = A @ state.values + dt * (B @ F)
    if not np.isfinite(values).all():
        raise ValueError(f"non-finite state at step {state.n + 1}")
    return BlockState(n=state.n + 1, t=state.t + dt, values=values)


def _rk4_step(rhs, t, u, h):
    k1 = np.asarray(rhs(t, u), dtype=float)
    k2 = np.asarray(rhs(t + h / 2, u + (h / 2) * k1), dtype=float)
    k3 = np.asarray(rhs(t + h / 2, u + (h / 2) * k2), dtype=float)
    k4 = np.asarray(rhs(t + h, u + h * k3), dtype=float)
    return u + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def bootstrap(scheme: Scheme, prob: Problem, dt: float, n_sub: int = 1000) -> BlockState:
    """Starting block at t0.

    Rows come from the exact solution when the problem has one; otherwise a
    classical RK4 sweep with n_sub substeps per abscissa interval fills them,
    keeping the starter error far below any order visible at these step
    sizes.
    """
    if dt <= 0:
        raise ValueError("non-positive step")
    s, m = scheme.s, prob.dim
    values = np.empty((s, m))
    if prob.exact is not None:
        for j in range(s):
            tj = prob.t0 + float(scheme.c_in[j]) * dt
            values[j] = np.asarray(prob.exact(tj), dtype=float)
    else:
        u = prob.u0.copy()
        values[s - 1] = u
        c_prev = 0.0
        for j in range(s - 2, -1, -1):
            c_next = float(scheme.c_in[j])
            t_start = prob.t0 + c_prev * dt
            h = (c_next - c_prev) * dt / n_sub
            for k in range(n_sub):
                u = _rk4_step(prob.rhs, t_start + k * h, u, h)
            values[j] = u
            c_prev = c_next
    if not np.isfinite(values).all():
        raise ValueError("non-finite state at step 0")
    return BlockState(n=0, t=prob.t0, values=values)


def _step_count(prob: Problem, dt, T: float) -> int:
    # Accept dt when (T - t0)/dt is an integer exactly in rational arithmetic
    # or within half an ulp in floating point; the caller adjusts dt otherwise.
    if float(dt) <= 0:
        raise ValueError("non-positive step")
    span = Fraction(float(T)) - Fraction(prob.t0)
    ratio = span / Fraction(dt)
    if ratio.denominator == 1 and ratio >= 0:
        return int(ratio)
    x = (float(T) - prob.t0) / float(dt)
    n = round(x)
    if n >= 0 and abs(x - n) <= 0.5 * math.ulp(max(1.0, abs(x))):
        return n
    raise ValueError("T not reachable with this dt")


def integrate(
    scheme: Scheme,
    prob: Problem,
    dt,
    T: float,
    final_only: bool = False,
    n_sub: int = 1000,
) -> Trajectory:
    """March the block from t0 until the abscissa-0 row sits at time T.

    dt may be a float or an exact Fraction; stepping always uses its double
    rendering.  Marching requires c_out = c_in + 1 (each step advances the
    whole block by one dt), which all builtin schemes satisfy.
    """
    if any(scheme.c_out[i] - scheme.c_in[i] != 1 for i in range(scheme.s)):
        raise ValueError("scheme does not march: c_out must equal c_in + 1")
    n_steps = _step_count(prob, dt, T)
    dtf = float(dt)
    state = bootstrap(scheme, prob, dtf, n_sub=n_sub)
    blocks = [state]
    for _ in range(n_steps):
        state = step(scheme, prob, state, dtf)
        if final_only:
            blocks[0] = state
        else:
            blocks.append(state)
    return Trajectory(dt=dtf, blocks=blocks)


def rk4_reference(prob: Problem, T: float, n_steps: int) -> np.ndarray:
    """Classical RK4 solution at T, verified by step doubling.

    Runs n_steps and 2*n_steps; if the two disagree by 1e-12 or more the
    reference is rejected so the caller can raise n_steps.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")

    def run(n):
        h = (float(T) - prob.t0) / n
        u = prob.u0.copy()
        for k in range(n):
            u = _rk4_step(prob.rhs, prob.t0 + k * h, u, h)
        return u

    coarse = run(n_steps)
    fine = run(2 * n_steps)
    if float(np.max(np.abs(coarse - fine))) >= 1e-12:
        raise ValueError("reference not converged")
    return fine


def measure_lte(scheme: Scheme, prob: Problem, dt, T: float) -> np.ndarray:
    """Max |tau_n| per block component over all steps to T.

    tau_n = (U_{n+1} - A U_n - dt B F(U_n)) / dt with both blocks built from
    the exact solution; requires the problem to have one.
    """
    if prob.exact is None:
        raise ValueError("missing exact solution")
    n_steps = _step_count(prob, dt, T)
    dtf = float(dt)
    A, B, c_in, c_out = _float_tables(scheme)
    s, m = scheme.s, prob.dim
    worst = np.zeros(s)
    for n in range(n_steps):
        tn = prob.t0 + n * dtf
        U = np.array([np.asarray(prob.exact(tn + c * dtf), dtype=float) for c in c_in])
        U1 = np.array([np.asarray(prob.exact(tn + c * dtf), dtype=float) for c in c_out])
        F = np.empty((s, m))
        for j in range(s):
            F[j] = prob.rhs(tn + c_in[j] * dtf, U[j])
        tau = (U1 - A @ U - dtf * (B @ F)) / dtf
        worst = np.maximum(worst, np.abs(tau).max(axis=1))
    return worst
