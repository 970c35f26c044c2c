"""Convergence studies over a dt ladder.

For each step size the scheme is run to the horizon T and the final block is
compared per component against the exact solution (or a doubling-verified
RK4 reference when no closed form exists); when an exact solution is present
the local truncation error is measured as well.  Log-log slopes quantify the
orders: an error-inhibiting scheme shows a global slope one above its LTE
slope, a plain scheme shows equal slopes.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import analysis
from .integrate import Problem, measure_lte, rk4_reference
from .integrate import integrate as run_integration
from .scheme import Scheme

STANDARD_DTS = (
    0.125,
    0.0625,
    0.03125,
    0.015625,
    0.0078125,
)  # 1/8 .. 1/128: integer step counts at T = 1, errors well above rounding

_REF_START = 2048
_REF_LIMIT = 2**22


@dataclass
class ConvergenceReport:
    scheme_name: str
    problem_name: str
    q: int  # truncation order (LTE order) of the scheme
    dts: list[float]  # strictly decreasing
    global_err: list[np.ndarray]  # per dt, per block component
    lte: Optional[list[np.ndarray]]  # per dt, per component; None without exact
    global_slopes: np.ndarray  # per component
    lte_slopes: Optional[np.ndarray]
    maxnorm_global_slope: float  # slope of max-over-components error
    maxnorm_lte_slope: Optional[float]
    reference: str  # provenance: "exact" or the rk4 escalation summary


def fit_slope(points) -> float:
    """Least-squares slope of log2(err) against log2(dt).

    Nonpositive error values cannot enter the log fit; they are dropped with
    a warning, and fewer than three surviving points is an error.
    """
    pts = list(points)
    kept = [(d, e) for d, e in pts if e > 0]
    if len(kept) < len(pts):
        warnings.warn(
            f"fit_slope: excluded {len(pts) - len(kept)} nonpositive error value(s)",
            stacklevel=2,
        )
    if len(kept) < 3:
        raise ValueError("need >=3 dt values")
    x = np.log2([d for d, _ in kept])
    y = np.log2([e for _, e in kept])
    dx = x - x.mean()
    dy = y - y.mean()
    return float(dx @ dy / (dx @ dx))


def _reference_at(prob, t, cache):
    """RK4 reference value at time t, escalating n_steps until the doubling
    check passes.  cache maps (problem name, t) -> (n_steps, value)."""
    key = (prob.name, float(t))
    if cache is not None and key in cache:
        return cache[key]
    n = _REF_START
    while True:
        try:
            val = rk4_reference(prob, t, n)
            break
        except ValueError:
            n *= 2
            if n > _REF_LIMIT:
                raise
    if cache is not None:
        cache[key] = (n, val)
    return n, val


def converge(
    scheme: Scheme,
    prob: Problem,
    dts=STANDARD_DTS,
    T: float = 1.0,
    ref_cache: Optional[dict] = None,
) -> ConvergenceReport:
    """Run the dt ladder and fit per-component global and LTE slopes.

    ref_cache, when supplied, is shared across calls so repeated studies of
    the same problem reuse their RK4 reference values.
    """
    dt_list = sorted((float(d) for d in dts), reverse=True)
    if len(set(dt_list)) != len(dt_list):
        raise ValueError("duplicate dt values")
    c_in = [float(c) for c in scheme.c_in]

    global_err: list[np.ndarray] = []
    lte: Optional[list[np.ndarray]] = [] if prob.exact is not None else None
    max_ref_n = 0
    for dt in dt_list:
        traj = run_integration(scheme, prob, dt, T, final_only=True)
        final = traj.final.values
        err = np.empty(scheme.s)
        for j in range(scheme.s):
            tj = float(T) + c_in[j] * dt
            if prob.exact is not None:
                ref = np.asarray(prob.exact(tj), dtype=float)
            else:
                n_used, ref = _reference_at(prob, tj, ref_cache)
                max_ref_n = max(max_ref_n, n_used)
            err[j] = float(np.max(np.abs(final[j] - ref)))
        global_err.append(err)
        if lte is not None:
            lte.append(measure_lte(scheme, prob, dt, T))

    global_slopes = np.array(
        [
            fit_slope([(d, e[j]) for d, e in zip(dt_list, global_err)])
            for j in range(scheme.s)
        ]
    )
    maxnorm_global = fit_slope(
        [(d, float(np.max(e))) for d, e in zip(dt_list, global_err)]
    )
    lte_slopes = None
    maxnorm_lte = None
    if lte is not None:
        lte_slopes = np.array(
            [
                fit_slope([(d, v[j]) for d, v in zip(dt_list, lte)])
                for j in range(scheme.s)
            ]
        )
        maxnorm_lte = fit_slope([(d, float(np.max(v))) for d, v in zip(dt_list, lte)])

    order = analysis.truncation_order(scheme)
    reference = (
        "exact"
        if prob.exact is not None
        else f"rk4 (doubling-verified, n_steps up to {max_ref_n})"
    )
    return ConvergenceReport(
        scheme_name=scheme.name,
        problem_name=prob.name,
        q=order.q,
        dts=dt_list,
        global_err=global_err,
        lte=lte,
        global_slopes=global_slopes,
        lte_slopes=lte_slopes,
        maxnorm_global_slope=maxnorm_global,
        maxnorm_lte_slope=maxnorm_lte,
        reference=reference,
    )


def _g(x: float) -> str:
    return format(float(x), ".17g")


def emit_csv(report: ConvergenceReport, path) -> None:
    """Write the per-dt table; LTE columns appear only when measured."""
    s = len(report.global_err[0])
    cols = ["dt"] + [f"global_err_comp_{j}" for j in range(s)]
    if report.lte is not None:
        cols += [f"lte_comp_{j}" for j in range(s)]
    lines = [",".join(cols)]
    for i, dt in enumerate(report.dts):
        row = [_g(dt)] + [_g(e) for e in report.global_err[i]]
        if report.lte is not None:
            row += [_g(v) for v in report.lte[i]]
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_plot_script(report: ConvergenceReport, path) -> None:
    """Write a standalone gnuplot script (data inlined) for the log-log plot.

    Guide lines with slopes q and q+1 are anchored at the coarsest dt so the
    measured curves can be read against the expected orders.
    """
    s = len(report.global_err[0])
    q = report.q
    stem = os.path.splitext(os.path.basename(str(path)))[0]

    dt0 = report.dts[0]
    e0 = float(np.max(report.global_err[0]))
    cq = e0 / dt0**q
    cq1 = e0 / dt0 ** (q + 1)

    lines = [
        f"# convergence of {report.scheme_name} on {report.problem_name}",
        f"# reference: {report.reference}",
        "set terminal pngcairo size 900,700",
        f"set output '{stem}.png'",
        "set logscale xy",
        "set format y '10^{%T}'",
        "set xlabel 'dt'",
        "set ylabel 'error at T'",
        "set key bottom right",
        f"set title '{report.scheme_name} on {report.problem_name}'",
        "$DATA << EOD",
    ]
    for i, dt in enumerate(report.dts):
        row = [_g(dt)] + [_g(e) for e in report.global_err[i]]
        if report.lte is not None:
            row += [_g(v) for v in report.lte[i]]
        lines.append(" ".join(row))
    lines.append("EOD")
    lines.append(f"guide_q(x) = {cq:.6g} * x**{q}")
    lines.append(f"guide_q1(x) = {cq1:.6g} * x**{q + 1}")
    plots = [
        f"$DATA using 1:{2 + j} with linespoints title 'global comp {j}'"
        for j in range(s)
    ]
    if report.lte is not None:
        plots += [
            f"$DATA using 1:{2 + s + j} with linespoints dashtype 2 title 'LTE comp {j}'"
            for j in range(s)
        ]
    plots.append(f"guide_q(x) with lines dashtype 3 title 'slope {q}'")
    plots.append(f"guide_q1(x) with lines dashtype 3 title 'slope {q + 1}'")
    lines.append("plot \\")
    lines.append(", \\\n".join("    " + p for p in plots))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
