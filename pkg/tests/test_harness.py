import shutil
import subprocess
from fractions import Fraction as F

import numpy as np
import pytest

from blockstep.harness import (
    STANDARD_DTS,
    converge,
    emit_csv,
    emit_plot_script,
    fit_slope,
)
from blockstep.integrate import problem
from blockstep.scheme import builtin


def test_standard_ladder():
    assert STANDARD_DTS == (0.125, 0.0625, 0.03125, 0.015625, 0.0078125)


def test_fit_slope_recovers_exact_powers():
    pts = [(2.0**-k, (2.0**-k) ** 3) for k in (3, 4, 5, 6)]
    assert fit_slope(pts) == pytest.approx(3.0, abs=1e-12)
    pts = [(2.0**-k, 7.0) for k in (3, 4, 5)]
    assert fit_slope(pts) == pytest.approx(0.0, abs=1e-12)


def test_fit_slope_mixed_orders_lands_between():
    pts = [(2.0**-k, (2.0**-k) ** 2 + (2.0**-k) ** 3) for k in (3, 4, 5, 6)]
    s = fit_slope(pts)
    assert 2.0 < s < 3.0


def test_fit_slope_needs_three_points():
    with pytest.raises(ValueError, match="need >=3 dt values"):
        fit_slope([(0.1, 1e-3), (0.05, 1e-4)])


def test_fit_slope_drops_nonpositive_with_warning():
    pts = [(0.125, 1e-3), (0.0625, 1e-4), (0.03125, 1e-5), (0.015625, 0.0)]
    with pytest.warns(UserWarning, match="excluded 1 nonpositive"):
        s = fit_slope(pts)
    assert s == pytest.approx(fit_slope(pts[:3]), abs=1e-12)
    with pytest.warns(UserWarning, match="nonpositive"):
        with pytest.raises(ValueError, match="need >=3 dt values"):
            fit_slope([(0.1, 1e-3), (0.05, 1e-4), (0.025, -1.0)])


def test_converge_error_inhibiting_scheme_gains_an_order():
    rep = converge(builtin("S2"), problem("P1"))
    assert rep.q == 2
    assert rep.reference == "exact"
    assert rep.dts == sorted(rep.dts, reverse=True)
    for slope in rep.global_slopes:
        assert 2.8 <= slope <= 3.2
    for slope in rep.lte_slopes:
        assert 1.8 <= slope <= 2.2
    assert 2.8 <= rep.maxnorm_global_slope <= 3.2
    # the global orders sit one above the local truncation orders
    for gap in rep.global_slopes - rep.lte_slopes:
        assert 0.8 <= gap <= 1.2


def test_converge_plain_scheme_shows_no_gain():
    rep = converge(builtin("BUTCHER2"), problem("P1"))
    for slope in rep.global_slopes:
        assert 1.8 <= slope <= 2.2
    for gap in rep.global_slopes - rep.lte_slopes:
        assert -0.2 <= gap <= 0.2


def test_converge_gap_holds_on_other_exact_problems():
    for pname in ("P3", "P4"):
        rep = converge(builtin("S2"), problem(pname))
        assert 2.8 <= rep.maxnorm_global_slope <= 3.2, pname
        assert 0.8 <= rep.maxnorm_global_slope - rep.maxnorm_lte_slope <= 1.2, pname


def test_converge_without_exact_uses_verified_reference():
    cache = {}
    rep = converge(
        builtin("S3A"),
        problem("P2"),
        dts=(F(1, 8), F(1, 16), F(1, 32)),
        ref_cache=cache,
    )
    assert rep.lte is None and rep.lte_slopes is None
    assert rep.maxnorm_lte_slope is None
    assert rep.reference.startswith("rk4 (doubling-verified")
    assert 3.75 <= rep.maxnorm_global_slope <= 4.25
    assert cache  # reference values were recorded for reuse
    again = converge(
        builtin("S3A"), problem("P2"), dts=(F(1, 8), F(1, 16), F(1, 32)), ref_cache=cache
    )
    assert again.maxnorm_global_slope == rep.maxnorm_global_slope


def test_converge_rejects_duplicate_dts():
    with pytest.raises(ValueError, match="duplicate dt values"):
        converge(builtin("S2"), problem("P1"), dts=(0.125, 0.125, 0.0625))


def test_converge_slope_is_stable_under_refinement():
    base = converge(builtin("S2"), problem("P1"))
    refined = converge(
        builtin("S2"), problem("P1"), dts=STANDARD_DTS + (0.00390625,)
    )
    assert abs(refined.maxnorm_global_slope - base.maxnorm_global_slope) <= 0.1


def test_emit_csv_round_trips(tmp_path):
    rep = converge(builtin("S2"), problem("P1"), dts=(0.125, 0.0625, 0.03125))
    path = tmp_path / "conv.csv"
    emit_csv(rep, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "dt,global_err_comp_0,global_err_comp_1,lte_comp_0,lte_comp_1"
    assert len(lines) == 4
    for i, line in enumerate(lines[1:]):
        cells = line.split(",")
        assert float(cells[0]) == rep.dts[i]
        for j in range(2):
            assert float(cells[1 + j]) == rep.global_err[i][j]
            assert float(cells[3 + j]) == rep.lte[i][j]


def test_emit_csv_omits_lte_without_exact(tmp_path):
    cache = {}
    rep = converge(
        builtin("S2"), problem("P2"), dts=(0.125, 0.0625, 0.03125), ref_cache=cache
    )
    path = tmp_path / "p2.csv"
    emit_csv(rep, path)
    header = path.read_text().split("\n", 1)[0]
    assert header == "dt,global_err_comp_0,global_err_comp_1"


def test_emit_plot_script_structure(tmp_path):
    rep = converge(builtin("S2"), problem("P1"), dts=(0.125, 0.0625, 0.03125))
    path = tmp_path / "conv.gp"
    emit_plot_script(rep, path)
    text = path.read_text()
    assert "$DATA << EOD" in text
    assert "\nEOD\n" in text
    assert "set logscale xy" in text
    assert "set terminal pngcairo" in text
    assert "guide_q(x)" in text and "x**2" in text
    assert "guide_q1(x)" in text and "x**3" in text
    assert "linespoints" in text
    assert "set output 'conv.png'" in text


def test_emit_plot_script_renders_if_gnuplot_present(tmp_path):
    if shutil.which("gnuplot") is None:
        pytest.skip("gnuplot not installed")
    rep = converge(builtin("S2"), problem("P1"), dts=(0.125, 0.0625, 0.03125))
    path = tmp_path / "conv.gp"
    emit_plot_script(rep, path)
    subprocess.run(["gnuplot", "conv.gp"], cwd=tmp_path, check=True, timeout=60)
    assert (tmp_path / "conv.png").stat().st_size > 0
