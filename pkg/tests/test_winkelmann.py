import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brodylab.errors import PreconditionError
from brodylab.winkelmann import (
    GOLDEN,
    LineDiscScenario,
    brody_locus_report,
    default_resolution,
    equidistribution_report,
    lift_deriv_norm,
    line_disc,
    near_miss_seeds,
    torus_box_cells,
)


def real_plane_masses(n, k, lam=GOLDEN, q=(0.0, 0.0), m=2_000_001):
    # (Re z1, Re z2) depends on Re z only, so the uniform disc measure
    # projects to the semicircle density 2 sqrt(1 - x^2) / pi on [-1, 1]
    x = -1 + (np.arange(m) + 0.5) * (2 / m)
    w = 2 * np.sqrt(1 - x * x) / np.pi * (2 / m)
    a = np.floor(((q[0] + n * x) % 1) * k).astype(int)
    b = np.floor(((q[1] + lam * n * x) % 1) * k).astype(int)
    out = np.zeros((k, k))
    np.add.at(out, (a, b), w)
    return out / out.sum()


def test_rational_slopes_rejected():
    for lam in (1 / 3, 89 / 144, 0.5, 0.0, float("nan")):
        with pytest.raises(PreconditionError):
            LineDiscScenario(1, lam)
    LineDiscScenario(1, math.sqrt(2) - 1)


def test_scenario_validation():
    with pytest.raises(PreconditionError):
        LineDiscScenario(0)
    with pytest.raises(PreconditionError):
        LineDiscScenario(1, chart_radius=0.6)


def test_line_disc_examples():
    s = LineDiscScenario(1)
    X, d = line_disc(s, 0)
    np.testing.assert_array_equal(X, [0, 0, 0, 0])
    assert d == 0
    X, _ = line_disc(s, 1)
    np.testing.assert_allclose(X, [0, 0, GOLDEN, 0], atol=1e-15)
    assert s.flat_area == pytest.approx(math.pi * (1 + GOLDEN**2))


def test_flat_speed_is_constant():
    s = LineDiscScenario(7, fs_enabled=False)
    rng = np.random.default_rng(0)
    z = rng.random(500) ** 0.5 * np.exp(2j * np.pi * rng.random(500))
    v = lift_deriv_norm(s, z)
    assert v.max() / v.min() == 1.0
    assert v[0] == pytest.approx(7 * math.sqrt(1 + GOLDEN**2), rel=1e-15)


def test_disc_through_p_has_no_fs_term_near_p():
    s = LineDiscScenario(7)
    z = 0.02 * np.exp(2j * np.pi * np.arange(32) / 32)
    np.testing.assert_allclose(lift_deriv_norm(s, z), s.flat_speed, rtol=1e-15)
    assert lift_deriv_norm(s, 0.0) == pytest.approx(s.flat_speed)


@pytest.mark.parametrize("d", [0.005, 0.002])
def test_near_miss_blows_up_the_lift(d):
    n = 20
    # the line through (0, d sqrt(1 + lambda^2)) misses p by exactly d
    s = LineDiscScenario(n, offset=(0, d * math.sqrt(1 + GOLDEN**2)))
    seeds = near_miss_seeds(s)
    z0 = seeds[0][0]
    assert abs(z0 + d * GOLDEN / (n * math.sqrt(1 + GOLDEN**2))) < 1e-12
    _, dist = line_disc(s, z0)
    assert dist == pytest.approx(d, rel=1e-9)
    assert lift_deriv_norm(s, z0) > 10 * n
    # chart formula: fs = n |offset| / |zeta|^2 at the closest point
    assert lift_deriv_norm(s, z0) == pytest.approx(math.hypot(s.flat_speed, n * math.sqrt(1 + GOLDEN**2) / d))


def test_far_from_p_is_flat():
    # the closest approach to a translate of p is 0.162, outside a chart of radius 0.1
    s = LineDiscScenario(1, offset=(0.5, 0.5), chart_radius=0.1)
    z = np.linspace(-1, 1, 2001)
    assert line_disc(s, z)[1].min() > 0.16
    np.testing.assert_array_equal(lift_deriv_norm(s, z), s.flat_speed)
    assert near_miss_seeds(s) == []
    assert near_miss_seeds(LineDiscScenario(1, offset=(0.5, 0.5)))[0][1] == pytest.approx(0.1624598, rel=1e-6)


def test_torus_box_cells_partition():
    rng = np.random.default_rng(1)
    X = rng.random((4, 1000))
    cells = torus_box_cells(3, plane=(1, 3))
    hits = sum(c.contains(X).astype(int) for c in cells)
    assert np.all(hits == 1)


def test_default_resolution_coprime():
    for n in (1, 10, 64, 200):
        m = default_resolution(n)
        assert math.gcd(m, n) == 1 and m >= 8 * n


def test_box_masses_match_semicircle_oracle():
    for n in (3, 10):
        rep = equidistribution_report(LineDiscScenario(n), k=4)
        np.testing.assert_allclose(rep.masses, real_plane_masses(n, 4), atol=1e-5)


def test_mixed_plane_matches_monte_carlo():
    # (Re z1, Im z2) mixes both parameter directions: uniform disc samples as oracle
    s = LineDiscScenario(2, offset=(0.3 + 0.1j, 0.6 + 0.2j))
    rep = equidistribution_report(s, k=2, plane=(0, 3))
    rng = np.random.default_rng(9)
    z = np.sqrt(rng.random(1_000_000)) * np.exp(2j * np.pi * rng.random(1_000_000))
    X, _ = line_disc(s, z)
    a, b = np.floor(X[0] * 2).astype(int), np.floor(X[3] * 2).astype(int)
    mc = np.bincount(2 * a + b, minlength=4).reshape(2, 2) / len(z)
    np.testing.assert_allclose(rep.masses, mc, atol=3e-3)


@pytest.mark.parametrize("plane", [(0, 2), (1, 3), (0, 1), (2, 1), (0, 3), (3, 2)])
def test_exact_and_grid_methods_agree(plane):
    s = LineDiscScenario(3, offset=(0.2 + 0.1j, 0.7 + 0.3j))
    exact = equidistribution_report(s, k=3, plane=plane).masses
    grid = equidistribution_report(s, k=3, plane=plane, method="grid", per_unit=400).masses
    np.testing.assert_allclose(exact, grid, atol=3e-3)


def test_masses_normalized_with_empty_complement():
    rep = equidistribution_report(LineDiscScenario(10), k=3, plane=(1, 3))
    rep.current.check(1e-9)
    assert rep.current.masses[-1] == 0
    assert rep.masses.shape == (3, 3)


def test_equidistribution_improves_with_n():
    devs = [equidistribution_report(LineDiscScenario(n)).max_relative_deviation for n in (1, 10, 50)]
    assert devs[0] > 1
    assert devs[0] > devs[1] > devs[2]


def test_equidistribution_preconditions():
    with pytest.raises(PreconditionError):
        equidistribution_report(LineDiscScenario(1), k=1)
    with pytest.raises(PreconditionError):
        equidistribution_report(LineDiscScenario(1), plane=(0, 0))
    with pytest.raises(PreconditionError):
        equidistribution_report(LineDiscScenario(1), method="spline")


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 40), st.floats(0, 1), st.floats(0, 1))
def test_report_masses_sum_to_one(n, a, b):
    for method in ("exact", "grid"):
        rep = equidistribution_report(LineDiscScenario(n, offset=(a, b * 1j)), k=2, plane=(0, 3),
                                      method=method, per_unit=64)
        assert rep.masses.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(rep.masses >= 0)
        rep.current.check(1e-9)


def test_locus_through_p_small_n_stays_at_center():
    rep = brody_locus_report([1, 2], offset=(0, 0))
    assert abs(rep.rows[0].argmax) < 1e-6
    assert rep.rows[0].dist_to_p < 1e-6


def test_locus_migrates_and_control_does_not():
    rep = brody_locus_report([10, 20, 40, 80])
    rm = rep.running_min
    assert all(b <= a for a, b in zip(rm, rm[1:]))
    assert rm[-1] < rep.control_distances[-1]
    assert all(abs(c - rep.control_distances[0]) < 1e-9 for c in rep.control_distances)
    for row in rep.rows:
        assert row.lift_norm >= LineDiscScenario(row.n).flat_speed


def test_locus_ladder_must_increase():
    with pytest.raises(PreconditionError):
        brody_locus_report([20, 10])
