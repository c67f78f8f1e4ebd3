"""The eleven acceptance criteria, one test each, at their stated tolerances."""

import math
import time

import numpy as np

from brodylab import cli
from brodylab.brody import brody_step
from brodylab.errors import InvariantViolation
from brodylab.greenpoly import (
    LineConfig5,
    embed_array,
    epsilon_for_config,
    face_decomposition,
    membership_array,
    polyhedron_membership,
    power_preimage_identity_check,
    random_p4_points,
)
from brodylab.greenpoly import standard_config as five_lines
from brodylab.holomap import PolyMap, exp_map
from brodylab.lelong import BallCurve, check_monotone, lelong_bound_check, monotonicity_profile
from brodylab.lengtharea import (
    PolyOneForm,
    chart_box_partition,
    closedness_defect,
    empirical_current,
    hemisphere_partition,
    length_area_inequality_check,
    radial_profile,
    select_ahlfors_radii,
    total_area_estimate,
)
from brodylab.sexticdeform import (
    SexticSurface,
    build_incidence,
    fermat_sextic,
    incidence_check_sigma,
    random_config,
    random_sextic,
    trace_roots_on_line,
)
from brodylab.sexticdeform import standard_config as six_planes
from brodylab.winkelmann import GOLDEN, LineDiscScenario, brody_locus_report, equidistribution_report


def nz(n, radius=1.0):
    return PolyMap(([1.0], [0.0, float(n)]), radius)


def random_maps(count, seed=2024, max_degree=5):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        d = int(rng.integers(1, max_degree + 1))
        c = rng.standard_normal((2, d + 1)) + 1j * rng.standard_normal((2, d + 1))
        out.append(PolyMap(tuple(c)))
    return out


def profile_corpus():
    maps = [nz(n) for n in (1, 2, 4, 8, 16, 32, 64)]
    maps += [exp_map(n) for n in (1, 2, 4, 8)]
    maps += [PolyMap(([1.0], [0.0, 1.0, 1.0])), PolyMap(([1.0], [0.0, 0.0, 1.0]))]
    maps += random_maps(20)
    return maps


def test_criterion_01_brody_bounds(acceptance):
    t0 = time.perf_counter()
    corpus = [nz(n) for n in range(1, 65)]
    corpus += [exp_map(n) for n in range(1, 9)]
    corpus += [PolyMap(([1.0], [0.0, 1.0, 1.0]))]
    corpus += random_maps(12)
    worst_d0, worst_sup = 0.0, 0.0
    nz_ok = True
    for i, f in enumerate(corpus):
        g, rep = brody_step(f)
        worst_d0 = max(worst_d0, abs(rep.deriv_at_zero - 1))
        worst_sup = max(worst_sup, rep.sup_deriv_on_rescaled)
        if i < 64:
            n = i + 1
            coef_err = np.abs(g.coeffs - np.array([[1, 0], [0, 1]])).max()
            nz_ok &= coef_err <= 1e-10 and rep.rescaled_domain_radius == n / 2
    dt = time.perf_counter() - t0
    ok = worst_d0 <= 1e-6 and worst_sup <= 2 + 1e-6 and nz_ok and dt < 10
    acceptance(1, ok, f"max|g'(0)-1|={worst_d0:.2e} max sup={worst_sup:.6f} nz exact={nz_ok} "
                      f"maps={len(corpus)} t={dt:.1f}s")


def test_criterion_02_cauchy_schwarz(acceptance):
    t0 = time.perf_counter()
    worst = max(length_area_inequality_check(radial_profile(f)) for f in profile_corpus())
    eq = 0.0
    for f in (nz(1), PolyMap(([1.0], [0.0, 0.0, 1.0]))):
        p = radial_profile(f)
        lhs, rhs = p.l_of_r**2, 2 * math.pi * p.radii * p.a_prime
        eq = max(eq, float(np.max(np.abs(lhs - rhs) / lhs)))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-4 and eq <= 1e-6 and dt < 30
    acceptance(2, ok, f"max violation={worst:.2e} equality gap={eq:.2e} t={dt:.1f}s")


def test_criterion_03_ahlfors(acceptance):
    cases = [(exp_map(1, radius=8.0), 8.0), (exp_map(2, radius=8.0), 8.0), (nz(1), 100.0), (nz(3), 16.0),
             (PolyMap(([1.0], [0.0, 0.0, 1.0])), 16.0), (PolyMap(([1.0], [0.0, 1.0, 1.0])), 16.0)]
    worst, decreasing = 0.0, True
    for f, rho in cases:
        sel = select_ahlfors_radii(f, rho, 3)
        worst = max(worst, sel.integral / sel.bound)
        decreasing &= bool(np.all(np.diff(sel.ratios) < 0))
    ok = worst <= 1.001 and decreasing
    acceptance(3, ok, f"max integral*a(1)={worst:.6f} strictly decreasing={decreasing}")


def test_criterion_04_area_quantization(acceptance):
    errs = []
    for d in range(1, 6):
        # z + z^d, or z itself for d = 1
        f = PolyMap(([1.0], [0.0, 1.0] + [0.0] * (d - 2) + [1.0] if d > 1 else [0.0, 1.0]))
        t = total_area_estimate(f)
        assert t.degree == d
        errs.append(abs(t.estimate - d * math.pi) / (d * math.pi))
    ok = max(errs) < 0.02
    acceptance(4, ok, "relative errors " + " ".join(f"d{d}={e:.4f}" for d, e in zip(range(1, 6), errs)))


def test_criterion_05_lelong(acceptance):
    line = lelong_bound_check(BallCurve(([0, 1], [0])))
    par = lelong_bound_check(BallCurve(([0, 1], [0, 0, 1])))
    rng = np.random.default_rng(5)
    curves = [BallCurve(([0, 1], [0]), 1.0), BallCurve(([0, 1], [0, 0, 1])), BallCurve(([0, 1], [0, 0, 0, 1]))]
    for _ in range(2):
        C = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        C[:, 0] = 0
        curves.append(BallCurve(tuple(C)))
    monotone = True
    for c in curves:
        prof = monotonicity_profile(c, np.linspace(0.1, 1.0, 6), ntheta=256)
        try:
            check_monotone(prof, 1e-4)
        except InvariantViolation:
            monotone = False
    ok = abs(line - 1) <= 1e-6 and abs(par - 1.382) <= 0.01 and monotone
    acceptance(5, ok, f"line ratio={line:.8f} parabola ratio={par:.6f} monotone={monotone}")


def test_criterion_06_green_polyhedron(acceptance):
    rng = np.random.default_rng(6)
    pts = random_p4_points(10_000, rng)
    bad = sum(power_preimage_identity_check(e, n, pts) for e in (0.1, 0.25, 0.5) for n in (1, 2, 3, 5))
    # sample with many points on X_1: a random number of coordinates set to modulus one
    V = random_p4_points(10_000, rng, decades=1.0) * 0.999
    for i, k in enumerate(rng.integers(1, 6, size=len(V))):
        idx = rng.permutation(5)[:k]
        V[i, idx] = np.exp(2j * np.pi * rng.random(k))
    members, faceless = 0, 0
    for v in V:
        if polyhedron_membership(1.0, v, tol=1e-9).member:
            members += 1
            faceless += not face_decomposition(v, tol=1e-9)
    outside = 0
    configs = [five_lines(), LineConfig5(rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3)))]
    for cfg in configs:
        est = epsilon_for_config(cfg)
        outside += int(np.sum(~membership_array(est.epsilon, embed_array(cfg, est.samples))))
    ok = bad == 0 and members > 0 and faceless == 0 and outside == 0
    acceptance(6, ok, f"preimage discrepancies={bad} X1 members={members} without face={faceless} "
                      f"embedded outside X_eps={outside}")


def test_criterion_07_sextic_combinatorics(acceptance):
    rng = np.random.default_rng(7)
    counts_ok, worst = True, 0.0
    for _ in range(20):
        cfg = random_config(rng)
        inc = build_incidence(cfg)
        counts_ok &= len(inc.lines) == 15 and len(inc.points) == 20
        counts_ok &= all(len(D.triple_points) == 4 for D in inc.lines.values())
        S = SexticSurface(random_sextic(rng), complex(rng.standard_normal(), rng.standard_normal()))
        worst = max(worst, incidence_check_sigma(cfg, S, samples=100, rng=rng))
    ok = counts_ok and worst <= 1e-10
    acceptance(7, ok, f"counts 15/20/4 on 20 configs={counts_ok} max containment residual={worst:.2e}")


def test_criterion_08_root_migration(acceptance):
    t0 = time.perf_counter()
    track = trace_roots_on_line(six_planes(), (0, 1), fermat_sextic(), [10.0**-k for k in range(1, 7)])
    md = track.max_distances
    dt = time.perf_counter() - t0
    decreasing = all(b < a for a, b in zip(md, md[1:]))
    ok = decreasing and track.cluster_pattern() == (1, 1, 2, 2) and dt < 20
    acceptance(8, ok, "max distances " + " ".join(f"{d:.2e}" for d in md)
               + f" pattern={track.cluster_pattern()} t={dt:.2f}s")


def test_criterion_09_winkelmann(acceptance):
    dev = equidistribution_report(LineDiscScenario(200, GOLDEN), k=4).max_relative_deviation
    rep = brody_locus_report([10 * 2**k for k in range(6)])
    final = rep.running_min[-1]
    control = min(rep.control_distances)
    ok = dev < 0.05 and final < 0.02 and control > 0.2
    acceptance(9, ok, f"box deviation={dev:.2e} running min={final:.2e} min control distance={control:.3f}")


def test_criterion_10_currents(acceptance):
    worst_mass, negative = 0.0, False
    for f in profile_corpus()[:12] + random_maps(5, seed=10):
        for cells in (hemisphere_partition(), chart_box_partition(3, 2.0)):
            cur = empirical_current(f, cells, nr=128, ntheta=128)
            worst_mass = max(worst_mass, abs(cur.masses.sum() - 1))
            negative |= bool(np.any(cur.masses < 0))
    for n in (10, 50):
        cur = equidistribution_report(LineDiscScenario(n), k=4, plane=(0, 1)).current
        worst_mass = max(worst_mass, abs(cur.masses.sum() - 1))
        negative |= bool(np.any(cur.masses < 0))
    rng = np.random.default_rng(10)
    stokes = closedness_defect(nz(1), PolyOneForm(({}, {(1, 0): 1.0}))).stokes_residual
    sphere = PolyOneForm(({}, {(1, 0, 0): 1.0}, {}), chart="sphere")
    for f in random_maps(4, seed=11):
        forms = tuple({e: float(rng.standard_normal()) for e in [(0, 0, 0), (1, 0, 0), (0, 1, 1)]} for _ in range(3))
        stokes = max(stokes, closedness_defect(f, PolyOneForm(forms, chart="sphere")).stokes_residual)
    ladder = [closedness_defect(nz(n), sphere) for n in (1, 2, 4, 8, 16, 32, 64)]
    stokes = max(stokes, max(r.stokes_residual for r in ladder))
    defects = [r.normalized_defect for r in ladder]
    decreasing = all(b < a for a, b in zip(defects, defects[1:]))
    ok = worst_mass <= 1e-9 and not negative and stokes <= 1e-6 and decreasing
    acceptance(10, ok, f"max |mass-1|={worst_mass:.1e} negative={negative} max Stokes residual={stokes:.1e} "
                       f"defects decreasing={decreasing}")


GOLDEN_RUNS = [
    ["brody", "--family", "nz", "--n", "1,2,4,8"],
    ["ahlfors"],
    ["current", "--partition", "chart", "--nr", "128"],
    ["lelong", "--nradii", "8", "--ntheta", "128"],
    ["green", "--check", "preimage", "--samples", "1000", "--seed", "3"],
    ["sextic"],
    ["winkelmann"],
]


def test_criterion_11_determinism(acceptance, tmp_path):
    mismatched = []
    for args in GOLDEN_RUNS:
        outs = []
        for rep in ("a", "b"):
            d = tmp_path / args[0] / rep
            assert cli.main([*args, "--out", str(d)]) == 0
            outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
        if outs[0] != outs[1] or not outs[0]:
            mismatched.append(args[0])
    ok = not mismatched
    acceptance(11, ok, f"{len(GOLDEN_RUNS)} subcommands run twice, mismatched={mismatched}")
