import math

import numpy as np
import pytest

from photonsource import closed_form as cf
from photonsource.exceptions import RootNotFoundError
from photonsource.optimize import (
    golden_section_max,
    maximize_global,
    maximize_on_resonance,
    maximize_over_t,
    maximize_raf,
    resonant_omega,
    solve_p1_extremum,
    t_grid,
)


def test_golden_section_brackets_peak():
    x, fx, (lo, hi), it = golden_section_max(lambda t: -(t - 1.234) ** 2, 0.0, 5.0, xtol=1e-8)
    assert x == pytest.approx(1.234, abs=1e-8)
    assert hi - lo <= 1e-8 and lo <= 1.234 <= hi
    assert it > 10


def test_golden_section_boundary_maximum():
    x, _, _, _ = golden_section_max(lambda t: t, 0.0, 2.0)
    assert x == 2.0


def test_grid_resolves_rabi_period():
    omega = 50.0
    grid = t_grid(omega, 0.0, 30.0)
    spacing = np.max(np.diff(grid))
    assert spacing <= 2 * math.pi / omega / 20 * 1.0001
    assert grid[0] == 0.0 and grid[-1] == pytest.approx(30.0)
    assert len(t_grid(0.1, 0.0, 50.0)) >= 400


def test_single_photon_best_at_half():
    res = maximize_over_t("p1", 0.5)
    assert res.value == pytest.approx(0.56, abs=0.01)
    assert res.argmax["T"] == pytest.approx(6.75, abs=0.1)
    assert res.certified
    lo, hi = res.bracket["T"]
    assert hi - lo <= 1e-6


def test_strong_field_value_near_asymptote():
    res = maximize_over_t("p1", 100.0, (0.0, 5.0))
    assert res.value == pytest.approx(float(cf.p1max_strong_asymptote(100.0)), rel=0.005)
    assert res.argmax["T"] == pytest.approx(math.pi / 100.0, rel=0.05)


def test_semiclassical_two_photon_maximum():
    res = maximize_over_t("p2", 0.05, (0.0, 2000.0))
    assert res.value == pytest.approx(2 * math.exp(-2), rel=0.02)


def test_ties_prefer_shortest_pulse():
    # P_0 = 1 without drive for every T: all grid points tie.
    res = maximize_over_t("p1", 0.0, (1.0, 3.0))
    assert res.argmax["T"] == 1.0


def test_degenerate_range_returns_point():
    res = maximize_over_t("p2", 1.0, (2.5, 2.5))
    assert res.argmax["T"] == 2.5
    assert res.value == pytest.approx(cf.cf_pn(1.0, 2.5, 2))


def test_unknown_objective():
    with pytest.raises(ValueError):
        maximize_over_t("p3", 1.0)


def test_global_two_photon_maximum():
    res = maximize_global("p2", (0.05, 20.0), (0.0, 50.0))
    assert res.value == pytest.approx(0.56, abs=0.01)
    assert res.argmax["omega"] == pytest.approx(1.25, abs=0.05)
    assert res.argmax["T"] == pytest.approx(4.86, abs=0.1)
    assert res.certified
    for lo, hi in res.bracket.values():
        assert hi - lo <= 1e-6


def test_global_single_photon_heads_to_strong_field():
    res = maximize_global("p1", (0.05, 20.0), (0.0, 50.0))
    assert res.argmax["omega"] == pytest.approx(20.0)
    assert res.value > 0.97


def test_two_pi_family():
    res = maximize_on_resonance("p2", 50.0)
    assert res.argmax["T"] == pytest.approx(cf.T_P2_STRONG, abs=0.02)
    assert res.value == pytest.approx(0.41, abs=0.01)
    area = res.argmax["omega"] * res.argmax["T"]
    assert area / (2 * math.pi) == pytest.approx(round(area / (2 * math.pi)), abs=1e-9)
    assert resonant_omega(50.0, 2 * math.pi / 50.0) == pytest.approx(50.0)


def test_pmax_trends():
    omegas = np.geomspace(0.05, 20.0, 20)
    results = [maximize_over_t("p1", float(o), (0.0, 2000.0)) for o in omegas]
    values = [r.value for r in results]
    times = [r.argmax["T"] for r in results]
    assert all(b >= a - 1e-6 for a, b in zip(values, values[1:]))
    assert all(b <= a + 1e-6 for a, b in zip(times, times[1:]))
    assert values[0] == pytest.approx(math.exp(-1), rel=0.02)
    p2_small = maximize_over_t("p2", 0.05, (0.0, 2000.0)).value
    p2_large = maximize_on_resonance("p2", 200.0).value
    assert p2_small == pytest.approx(2 * math.exp(-2), rel=0.02)
    assert p2_large == pytest.approx(0.41, rel=0.02)


@pytest.mark.parametrize("omega", [5.0, 10.0, 20.0, 100.0])
def test_extremum_root(omega):
    t = solve_p1_extremum(omega)
    assert t == pytest.approx(math.pi / omega, rel=0.05)
    assert abs(cf.p1_extremum_residual(omega, t)) < 1e-9
    grid = np.linspace(t / 2, 1.5 * t, 20001)
    dense = cf.p1_extremum_residual(omega, grid)
    assert np.any(np.diff(np.sign(dense)) != 0)


def test_extremum_root_is_local_maximum():
    omega = 10.0
    t = solve_p1_extremum(omega)
    here = cf.strong_field_pn(omega, t, 1)
    for dt in (-0.01, 0.01):
        assert here >= cf.strong_field_pn(omega, t + dt, 1)
        assert cf.cf_pn(omega, t, 1) >= cf.cf_pn(omega, t + dt, 1)


def test_higher_roots():
    t2 = solve_p1_extremum(10.0, 2)
    t3 = solve_p1_extremum(10.0, 3)
    assert t2 == pytest.approx(2 * math.pi / 10, rel=0.05)
    assert t3 == pytest.approx(3 * math.pi / 10, rel=0.05)


def test_root_not_found():
    with pytest.raises(RootNotFoundError) as info:
        solve_p1_extremum(0.05, 2)
    assert info.value.bracket[0] == pytest.approx(math.pi / 0.05)
    assert info.value.samples
    with pytest.raises(ValueError):
        solve_p1_extremum(10.0, 0)


def test_raf_fixed_omega_scan():
    res = maximize_raf("p1", (3.2, 3.2), (20.0, 300.0), 0.15)
    assert res.value == pytest.approx(0.69, abs=0.01)
    assert res.argmax["delta_rf"] == pytest.approx(100.0, abs=15.0)
    assert res.certified


@pytest.mark.slow
def test_raf_global_maximum():
    res = maximize_raf("p1", (0.5, 20.0), (10.0, 600.0), 0.15)
    assert res.value == pytest.approx(0.82, abs=0.015)
    assert res.certified


def test_raf_bad_ranges():
    with pytest.raises(ValueError):
        maximize_raf("p1", (3.0, 1.0), (0.0, 10.0), 0.15)
