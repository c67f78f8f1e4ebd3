import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brodylab.complexgeom import ProjPoint
from brodylab.errors import DegeneracyError, NumericalError, PreconditionError
from brodylab.sexticdeform import (
    HomPoly,
    PlaneConfig6,
    SexticSurface,
    build_incidence,
    deformation_step,
    fermat_sextic,
    incidence_check_sigma,
    off_surface_residual,
    other_indices,
    random_config,
    random_sextic,
    sextic_general_position_check,
    standard_config,
    trace_roots_on_line,
)


def kernel_vector(rows, rng):
    # solve rows v = 0 with one extra random normalization row, no SVD involved
    A = np.vstack([rows, rng.standard_normal(4)])
    b = np.zeros(len(A), dtype=complex)
    b[-1] = 1
    return np.linalg.solve(A, b)


def product_of_planes(config):
    p = config.plane(0)
    for i in range(1, 6):
        p = p * config.plane(i)
    return p


def test_hompoly_validation_and_degree():
    with pytest.raises(PreconditionError):
        HomPoly({(1, 0, 0, 0): 1, (2, 0, 0, 0): 1})
    with pytest.raises(PreconditionError):
        HomPoly({(1, 0, 0): 1})
    with pytest.raises(PreconditionError):
        HomPoly({(-1, 2, 0, 0): 1})
    assert fermat_sextic().degree == 6
    assert HomPoly({}).degree == -1
    assert (HomPoly.linear([1, 0, 0, 0]) * HomPoly.linear([0, 1, 0, 0])).terms == {(1, 1, 0, 0): 1}


def test_hompoly_arithmetic_matches_pointwise():
    rng = np.random.default_rng(0)
    s, t = random_sextic(rng), random_sextic(rng)
    Q = rng.standard_normal((10, 4)) + 1j * rng.standard_normal((10, 4))
    np.testing.assert_allclose((s + t.scaled(2j))(Q), s(Q) + 2j * t(Q), rtol=1e-12)
    lin = HomPoly.linear([1, 2, 3, 4])
    np.testing.assert_allclose((lin * lin)(Q), (Q @ [1, 2, 3, 4]) ** 2, rtol=1e-12)


def test_restrict_to_line_matches_evaluation():
    rng = np.random.default_rng(1)
    s = random_sextic(rng)
    A, B = rng.standard_normal(4) + 1j * rng.standard_normal(4), rng.standard_normal(4)
    c = s.restrict_to_line(A, B)
    for t in (0.0, 0.7, -1.3 + 0.2j):
        assert np.polyval(c[::-1], t) == pytest.approx(s(A + t * B), rel=1e-11)


def test_hompoly_json_round_trip():
    s = random_sextic(np.random.default_rng(2))
    assert HomPoly.from_json(s.to_json()).terms == s.terms


def test_fermat_scale():
    assert fermat_sextic().scale == 4.0
    assert fermat_sextic()(np.array([1, 0, 0, 0])) == 1


def test_standard_incidence_counts():
    inc = build_incidence(standard_config())
    assert len(inc.lines) == 15 and len(inc.points) == 20
    assert all(len(D.triple_points) == 4 for D in inc.lines.values())
    # every triple point lies on exactly three double lines
    for t in inc.points:
        assert sum(t in D.triple_points for D in inc.lines.values()) == 3


def test_points_on_first_double_line():
    inc = build_incidence(standard_config())
    keys = inc.points_on((1, 0))
    assert keys == [(0, 1, 2), (0, 1, 3), (0, 1, 4), (0, 1, 5)]
    expected = [[0, 0, 0, 1], [0, 0, 1, 0], [0, 0, 1, -1], [0, 0, 4, -3]]
    for k, e in zip(keys, expected):
        assert ProjPoint(inc.points[k]) == ProjPoint(e)


def test_triple_points_match_direct_solve():
    cfg = standard_config()
    inc = build_incidence(cfg)
    rng = np.random.default_rng(3)
    for t, v in inc.points.items():
        assert ProjPoint(v) == ProjPoint(kernel_vector(cfg.forms[list(t)], rng))


def test_line_basis_spans_the_intersection():
    cfg = standard_config()
    for pair, D in build_incidence(cfg).lines.items():
        assert np.abs(cfg.forms[list(pair)] @ D.basis.T).max() < 1e-12
        np.testing.assert_allclose(D.basis @ D.basis.conj().T, np.eye(2), atol=1e-12)


def test_general_position_enforced():
    with pytest.raises(DegeneracyError):
        PlaneConfig6([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 1, 1, 1], [1, 1, 1, 1]])
    with pytest.raises(DegeneracyError):
        PlaneConfig6([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 1, 1, 1], [1, 1, 0, 0]])
    with pytest.raises(PreconditionError):
        PlaneConfig6(np.eye(4))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_configs_have_the_incidence_invariants(seed):
    inc = build_incidence(random_config(np.random.default_rng(seed)))
    assert len(inc.lines) == 15 and len(inc.points) == 20
    assert sorted(len(D.triple_points) for D in inc.lines.values()) == [4] * 15


def test_sigma_containment_identity():
    rng = np.random.default_rng(4)
    for _ in range(3):
        cfg = random_config(rng)
        S = SexticSurface(random_sextic(rng), 0.3 - 0.1j)
        assert incidence_check_sigma(cfg, S, rng=rng) <= 1e-10
        assert off_surface_residual(cfg, S, rng=rng) > 1e-6


def test_sigma_containment_standard_config_fermat():
    S = SexticSurface(fermat_sextic(), 1.0)
    assert incidence_check_sigma(standard_config(), S) <= 1e-10


def test_sigma_requires_nonzero_eps_and_sextic():
    with pytest.raises(PreconditionError):
        incidence_check_sigma(standard_config(), SexticSurface(fermat_sextic(), 0))
    with pytest.raises(PreconditionError):
        SexticSurface(HomPoly.linear([1, 0, 0, 0]), 1.0)


def test_sigma_equation_vanishes_on_constructed_points():
    cfg = standard_config()
    S = SexticSurface(fermat_sextic(), 0.5)
    F = S.equation(cfg)
    q = np.array([0.0, 1.0, 2.0, 0.0])  # on P_0 and P_3: both sides vanish iff s(q) = 0
    assert F(q) == pytest.approx(-0.5 * fermat_sextic()(q))


def test_sextic_general_position_examples():
    cfg = standard_config()
    inc = build_incidence(cfg)
    rng = np.random.default_rng(5)
    Q = [kernel_vector(cfg.forms[list(t)], rng) for t in itertools.combinations(range(6), 3)]
    oracle = min(abs(fermat_sextic()(q / np.linalg.norm(q))) for q in Q)
    assert sextic_general_position_check(cfg, fermat_sextic(), inc) == pytest.approx(oracle, rel=1e-12)
    assert oracle == pytest.approx(0.25)
    assert sextic_general_position_check(cfg, product_of_planes(cfg), inc) < 1e-15
    w6 = HomPoly({(0, 0, 0, 6): 1.0})
    assert sextic_general_position_check(cfg, w6, inc) < 1e-15


def test_deformation_step_formula():
    cfg = standard_config()
    s0 = fermat_sextic()
    res = deformation_step(cfg, s0, (0, 1), 0.01)
    assert res.s_next.degree == 6
    rng = np.random.default_rng(6)
    Q = rng.standard_normal((20, 4)) + 1j * rng.standard_normal((20, 4))
    L = Q @ cfg.forms.T
    expected = L[:, 2] * L[:, 3] * L[:, 4] ** 2 * L[:, 5] ** 2 - 0.01 * s0(Q)
    np.testing.assert_allclose(res.s_next(Q), expected, rtol=1e-10)
    assert res.previous_line_residual == 0.0


def test_deformation_step_custom_indices():
    cfg = standard_config()
    res = deformation_step(cfg, fermat_sextic(), (0, 1), 0.1, indices=(5, 4, 3, 2))
    q = np.array([1.0, 0.3, 0.2, 0.1])
    L = cfg.forms @ q
    assert res.s_next(q) == pytest.approx(L[5] * L[4] * L[3] ** 2 * L[2] ** 2 - 0.1 * fermat_sextic()(q))


def test_deformation_keeps_earlier_lines():
    cfg = standard_config()
    rng = np.random.default_rng(7)
    s = random_sextic(rng)
    done = []
    for line, eps in [((0, 1), 1e-2), ((2, 3), 1e-3), ((4, 5), 1e-4)]:
        res = deformation_step(cfg, s, line, eps, previous_lines=done, rng=rng)
        assert res.previous_line_residual <= 1e-9
        assert sextic_general_position_check(cfg, res.s_next) > 0
        s = res.s_next
        done.append(line)


def test_deformation_step_errors():
    cfg = standard_config()
    with pytest.raises(PreconditionError):
        deformation_step(cfg, fermat_sextic(), (0, 1), 0)
    with pytest.raises(PreconditionError):
        deformation_step(cfg, fermat_sextic(), (0, 1), 0.1, indices=(0, 2, 3, 4))
    with pytest.raises(PreconditionError):
        deformation_step(cfg, HomPoly.linear([1, 0, 0, 0]), (0, 1), 0.1)
    with pytest.raises(PreconditionError):
        deformation_step(cfg, fermat_sextic(), (0, 1), 0.1, previous_lines=[(1, 0)])


def test_other_indices():
    assert other_indices((0, 1)) == (2, 3, 4, 5)
    assert other_indices((2, 4)) == (0, 1, 3, 5)


def test_root_ladder_fermat_standard():
    track = trace_roots_on_line(standard_config(), (0, 1), fermat_sextic())
    md = track.max_distances
    assert all(b < a for a, b in zip(md, md[1:]))
    assert track.cluster_pattern() == (1, 1, 2, 2)
    assert all(np.isfinite(track.match_moves))
    assert all(len(r) == 6 for r in track.roots)


def test_root_ladder_eps_zero_limit():
    track = trace_roots_on_line(standard_config(), (0, 1), fermat_sextic(), ladder=[0.0])
    assert track.cluster_pattern() == (1, 1, 2, 2)
    # a double root computed in floating point splits by about sqrt(machine eps)
    assert track.max_distances[0] < 1e-6


def test_squared_factor_roots_shrink_like_square_root():
    track = trace_roots_on_line(standard_config(), (0, 1), fermat_sextic())
    md = np.array(track.max_distances)
    slopes = np.diff(np.log10(md))
    np.testing.assert_allclose(slopes[-3:], -0.5, atol=0.05)


@pytest.mark.parametrize("seed", range(3))
def test_root_ladder_random_sextic(seed):
    rng = np.random.default_rng(seed)
    cfg = random_config(rng)
    track = trace_roots_on_line(cfg, (2, 4), random_sextic(rng))
    assert all(b < a for a, b in zip(track.max_distances, track.max_distances[1:]))
    assert track.cluster_pattern() == (1, 1, 2, 2)


def test_root_ladder_reports_offending_eps():
    cfg = standard_config()
    mono = deformation_step(cfg, fermat_sextic(), (0, 1), 1.0).s_next + fermat_sextic()
    with pytest.raises(NumericalError, match="eps=1.0"):
        trace_roots_on_line(cfg, (0, 1), mono, ladder=[0.1, 1.0])
