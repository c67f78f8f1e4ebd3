"""Command-line harness: one subcommand per experiment, CSV + JSON summary out.

Exit status 0 on success, 2 on bad input, 3 on numerical failure, 4 when a
checked invariant fails.  Outputs depend only on the arguments and the seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import brody, greenpoly, lelong, lengtharea, sexticdeform, winkelmann
from .errors import BrodyLabError, InvariantViolation, PreconditionError
from .holomap import PolyMap, exp_map

SUBCOMMANDS = ("brody", "ahlfors", "current", "lelong", "green", "sextic", "winkelmann")
COMMON_KEYS = {"out", "seed", "tol", "nr", "ntheta"}

# subcommand -> {option: default}; config files may set exactly these keys (plus COMMON_KEYS)
DEFAULTS: dict[str, dict] = {
    "brody": {"family": "nz", "n": "1,2,4,8", "components": None},
    "ahlfors": {"family": "exp", "n": "1,2", "rho_max": 8.0, "k": 3, "components": None},
    "current": {"family": "nz", "n": "1,4,16", "partition": "hemisphere", "boxes": 4, "extent": 2.0,
                "components": None},
    "lelong": {"curve": "parabola", "eps": 1.0, "nradii": 20, "components": None},
    "green": {"check": "preimage", "eps": 0.25, "n": 2, "samples": 1000, "forms": None},
    "sextic": {"forms": None, "s": None, "lines": None, "ladder": None, "step_eps": 1e-2},
    "winkelmann": {"ladder": "10,20,40,80,160,320", "k": 4, "n_equi": 200, "slope": winkelmann.GOLDEN,
                   "offset": None},
}
HARD_DEFAULTS = {"out": ".", "seed": 0, "tol": None, "nr": None, "ntheta": None}


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v) if math.isfinite(v) else str(float(v))
    return v


def write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")


# --- input parsing ------------------------------------------------------------------------


def _int_list(text, where: str) -> list[int]:
    if isinstance(text, (list, tuple)):
        vals = list(text)
    else:
        vals = [t for t in str(text).split(",") if t.strip()]
    try:
        out = [int(v) for v in vals]
    except (TypeError, ValueError):
        raise PreconditionError(where, f"expected a comma-separated integer list, got {text!r}") from None
    if not out:
        raise PreconditionError(where, "empty list")
    return out


def _complex(pair, where: str) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
        raise PreconditionError(where, f"complex numbers are [re, im] pairs, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def _complex_matrix(rows, shape: tuple[int, int], where: str) -> np.ndarray:
    M = np.array([[_complex(c, where) for c in row] for row in rows], dtype=complex)
    if M.shape != shape:
        raise PreconditionError(where, f"expected {shape[0]}x{shape[1]} coefficients, got {M.shape}")
    return M


def _family_map(family: str, n: int, components, where: str, radius: float = 1.0) -> PolyMap:
    if family == "nz":
        return PolyMap(([1.0], [0.0, float(n)]))
    if family == "power":
        return PolyMap(([1.0], [0.0] * n + [1.0]))
    if family == "exp":
        return exp_map(n, radius=radius)
    if family == "poly":
        if components is None:
            raise PreconditionError(where, "family 'poly' needs 'components' in the config")
        return PolyMap.from_dict({"components": components, "domain_radius": 1.0})
    raise PreconditionError(where, f"unknown family {family!r}")


def _maps(opt, where: str, radius: float = 1.0) -> list[tuple[int, PolyMap]]:
    """Family members; exp truncations are accurate up to ``radius``."""
    if opt["family"] == "poly":
        return [(0, _family_map("poly", 0, opt["components"], where))]
    return [(n, _family_map(opt["family"], n, None, where, radius)) for n in _int_list(opt["n"], where)]


# --- subcommands ----------------------------------------------------------------------------


def run_brody(opt, out: Path) -> dict:
    where = "cli.brody"
    tol = opt["tol"] or 1e-6
    items = _maps(opt, where)
    seq = brody.brody_sequence([f for _, f in items])
    rows = []
    for i, ((n, _), rep) in enumerate(zip(items, seq.reports)):
        rep.check(tol)
        cd = seq.cauchy_defects[i] if i < len(seq.cauchy_defects) else ""
        rows.append([n, rep.basepoint.real, rep.basepoint.imag, rep.scale, rep.rescaled_domain_radius,
                     rep.deriv_at_zero, rep.sup_deriv_on_rescaled, cd])
    # cauchy_defect compares row k with row k + 1; empty on the last row
    write_csv(out / "brody.csv", ["n", "a_re", "a_im", "scale", "R", "deriv_at_zero", "sup_deriv",
                                  "cauchy_defect"], rows)
    return {"maps": len(rows), "cauchy_defects": seq.cauchy_defects}


def run_ahlfors(opt, out: Path) -> dict:
    where = "cli.ahlfors"
    tol = opt["tol"] or lengtharea.CS_TOL
    ntheta = opt["ntheta"] or lengtharea.DEFAULT_NTHETA
    rows, summary = [], {}
    for n, f in _maps(opt, where, float(opt["rho_max"])):
        sel = lengtharea.select_ahlfors_radii(f, float(opt["rho_max"]), int(opt["k"]), ntheta=ntheta)
        sel.profile.check(tol)
        if sel.integral > 1.001 * sel.bound:
            raise InvariantViolation(where, f"n={n}: integral {sel.integral!r} exceeds 1.001/a(1)")
        p = sel.profile
        for r, ratio in zip(sel.radii, sel.ratios):
            i = int(np.argmin(np.abs(p.radii - r)))
            l2 = p.l_of_r[i] ** 2
            cs = (l2 - 2 * np.pi * r * p.a_prime[i]) / max(l2, np.finfo(float).eps)
            rows.append([n, r, p.l_of_r[i], p.a_of_r[i], ratio, cs])
        summary[str(n)] = {"integral": sel.integral, "bound": sel.bound,
                           "cs_violation": lengtharea.length_area_inequality_check(p)}
    write_csv(out / "ahlfors.csv", ["n", "r", "l", "a", "ratio", "cs_violation"], rows)
    return summary


def run_current(opt, out: Path) -> dict:
    where = "cli.current"
    tol = opt["tol"] or 1e-9
    part = opt["partition"]
    if part == "hemisphere":
        cells = lengtharea.hemisphere_partition()
    elif part == "whole":
        cells = lengtharea.whole_space()
    elif part == "chart":
        cells = lengtharea.chart_box_partition(int(opt["boxes"]), float(opt["extent"]))
    else:
        raise PreconditionError(where, f"unknown partition {part!r}")
    rows, summary = [], {}
    for n, f in _maps(opt, where):
        cur = lengtharea.empirical_current(f, cells, nr=opt["nr"] or 512,
                                           ntheta=opt["ntheta"] or lengtharea.DEFAULT_NTHETA)
        cur.check(tol)
        rows.extend([n, name, m, cur.a_n, cur.l_n, cur.ratio] for name, m in zip(cur.names, cur.masses))
        summary[str(n)] = {"area": cur.a_n, "length": cur.l_n, "ratio": cur.ratio}
    write_csv(out / "current.csv", ["n", "cell_id", "mass", "a_n", "l_n", "ratio"], rows)
    return summary


NAMED_CURVES = {
    "line": ([0, 1], [0]),
    "parabola": ([0, 1], [0, 0, 1]),
    "cubic": ([0, 1], [0, 0, 0, 1]),
}


def run_lelong(opt, out: Path) -> dict:
    where = "cli.lelong"
    tol = opt["tol"] or lelong.MONOTONE_RTOL
    ntheta = opt["ntheta"] or lelong.DEFAULT_NTHETA
    if opt["components"] is not None:
        comps = tuple([_complex(c, where) for c in comp] for comp in opt["components"])
    elif opt["curve"] in NAMED_CURVES:
        comps = NAMED_CURVES[opt["curve"]]
    else:
        raise PreconditionError(where, f"unknown curve {opt['curve']!r}")
    c = lelong.BallCurve(comps, ball_radius=float(opt["eps"]))
    nr = int(opt["nradii"])
    if nr < 2:
        raise PreconditionError(where, "nradii must be >= 2")
    radii = c.ball_radius * np.arange(1, nr + 1) / nr
    prof = lelong.monotonicity_profile(c, radii, ntheta)
    lelong.check_monotone(prof, tol)
    ratio = prof[-1] / math.pi
    if ratio < 1 - 1e-3:
        raise InvariantViolation(where, f"area ratio {ratio!r} below 1")
    write_csv(out / "lelong.csv", ["r", "a", "a_over_r2"], [[r, p * r * r, p] for r, p in zip(radii, prof)])
    return {"ratio": ratio, "param_radius": c.param_radius}


def _faces_text(v) -> str:
    try:
        return ";".join("".join(str(i) for i in t) for t in greenpoly.face_decomposition(v))
    except PreconditionError:
        return ""


def _x1_samples(rng: np.random.Generator, n: int) -> np.ndarray:
    """Points with a random number of unit-modulus coordinates; members of X_1 need at least three."""
    V = greenpoly.random_p4_points(n, rng, decades=1.0) * 0.999
    k = rng.integers(1, 6, size=n)
    for i in range(n):
        idx = rng.permutation(5)[: k[i]]
        V[i, idx] = np.exp(2j * np.pi * rng.random(k[i]))
    return V


def run_green(opt, out: Path) -> dict:
    where = "cli.green"
    rng = np.random.default_rng(opt["seed"])
    config = (greenpoly.LineConfig5(_complex_matrix(opt["forms"], (5, 3), where))
              if opt["forms"] is not None else greenpoly.standard_config())
    check = opt["check"]
    rows = []
    if check == "preimage":
        eps, n = float(opt["eps"]), int(opt["n"])
        P = greenpoly.random_p4_points(int(opt["samples"]), rng)
        bad = greenpoly.power_preimage_identity_check(eps, n, P)
        for i, v in enumerate(P):
            m = greenpoly.polyhedron_membership(eps, v**n)
            rows.append([i, m.margin, _faces_text(v)])
        if bad:
            raise InvariantViolation(where, f"{bad} preimage discrepancies")
        summary = {"discrepancies": bad, "eps": eps, "n": n}
    elif check == "faces":
        P = _x1_samples(rng, int(opt["samples"]))
        members = 0
        for i, v in enumerate(P):
            m = greenpoly.polyhedron_membership(1.0, v, tol=greenpoly.FACE_TOL)
            faces = _faces_text(v)
            if m.member:
                members += 1
                if not faces:
                    raise InvariantViolation(where, f"member {i} of X_1 lies on no face")
            rows.append([i, m.margin, faces])
        summary = {"members": members}
    elif check == "epsilon":
        est = greenpoly.epsilon_for_config(config, budget=int(opt["samples"]), seed=opt["seed"])
        V = greenpoly.embed_array(config, est.samples)
        for i, v in enumerate(V):
            m = greenpoly.polyhedron_membership(est.epsilon, v)
            if not m.member:
                raise InvariantViolation(where, f"sample {i} outside X_eps_est")
            rows.append([i, m.margin, ""])
        summary = {"epsilon": est.epsilon}
    else:
        raise PreconditionError(where, f"unknown check {check!r}")
    write_csv(out / "green.csv", ["point_id", "margin", "faces"], rows)
    return summary


def run_sextic(opt, out: Path) -> dict:
    where = "cli.sextic"
    config = (sexticdeform.PlaneConfig6(_complex_matrix(opt["forms"], (6, 4), where))
              if opt["forms"] is not None else sexticdeform.standard_config())
    s = sexticdeform.HomPoly.from_json(opt["s"]) if opt["s"] is not None else sexticdeform.fermat_sextic()
    lines = [tuple(sorted(int(i) for i in pair)) for pair in (opt["lines"] or [[0, 1]])]
    ladder = [float(e) for e in (opt["ladder"] or [10.0**-k for k in range(1, 7)])]
    inc = sexticdeform.build_incidence(config)
    rows, summary = [], {"lines": [], "general_position": [], "previous_line_residual": []}
    for k, line in enumerate(lines):
        if line not in inc.lines:
            raise PreconditionError(where, f"{line} is not a double line")
        tr = sexticdeform.trace_roots_on_line(config, line, s, ladder)
        line_id = f"{line[0]}-{line[1]}"
        for eps, near, dist in zip(tr.ladder, tr.nearest, tr.distances):
            for r, (c, d) in enumerate(zip(near, dist)):
                rows.append([line_id, eps, r, d, tr.indices[c]])
        md = tr.max_distances
        if any(b >= a for a, b in zip(md, md[1:])):
            raise InvariantViolation(where, f"line {line_id}: max distance not decreasing {md}")
        if tr.cluster_pattern() != (1, 1, 2, 2):
            raise InvariantViolation(where, f"line {line_id}: cluster pattern {tr.cluster_pattern()}")
        summary["lines"].append({"line": line_id, "max_distances": md, "pattern": tr.cluster_pattern()})
        step = sexticdeform.deformation_step(config, s, line, float(opt["step_eps"]), previous_lines=lines[:k],
                                             rng=np.random.default_rng(opt["seed"]))
        s = step.s_next
        summary["previous_line_residual"].append(step.previous_line_residual)
        summary["general_position"].append(sexticdeform.sextic_general_position_check(config, s, inc) / s.scale)
    write_csv(out / "sextic.csv", ["line_id", "epsilon", "root_id", "dist_to_nearest_triple", "cluster_id"], rows)
    return summary


def run_winkelmann(opt, out: Path) -> dict:
    where = "cli.winkelmann"
    slope = float(opt["slope"])
    offset = opt["offset"]
    offset = (tuple(_complex(c, where) for c in offset) if offset is not None else (0.5 + 0.25j, 0.25 + 0.5j))
    rep = winkelmann.brody_locus_report(_int_list(opt["ladder"], where), slope, offset)
    write_csv(out / "winkelmann.csv", ["n", "argmax_re", "argmax_im", "dist_to_p", "lift_norm", "control_dist"],
              [[r.n, r.argmax.real, r.argmax.imag, r.dist_to_p, r.lift_norm, r.control_dist] for r in rep.rows])
    k = int(opt["k"])
    eq = winkelmann.equidistribution_report(winkelmann.LineDiscScenario(int(opt["n_equi"]), slope), k=k)
    eq.current.check()
    write_csv(out / "winkelmann_boxes.csv", ["n", "box_i", "box_j", "mass"],
              [[eq.n, i, j, eq.masses[i, j]] for i in range(k) for j in range(k)])
    return {"running_min": rep.running_min, "control": rep.control_distances,
            "max_relative_deviation": eq.max_relative_deviation}


RUNNERS: dict[str, Callable] = {
    "brody": run_brody, "ahlfors": run_ahlfors, "current": run_current, "lelong": run_lelong,
    "green": run_green, "sextic": run_sextic, "winkelmann": run_winkelmann,
}


# --- self tests -----------------------------------------------------------------------------


def _selftests(name: str) -> list[tuple[str, Callable[[], bool]]]:
    from .complexgeom import ProjPoint

    if name == "brody":
        def nz_radius():
            _, rep = brody.brody_step(PolyMap(([1.0], [0.0, 4.0])))
            return rep.rescaled_domain_radius == 2.0 and rep.basepoint == 0
        return [("(1, 4z) has R = 2 at a = 0", nz_radius)]
    if name == "ahlfors":
        return [("(1, z) satisfies Cauchy-Schwarz with equality",
                 lambda: abs(lengtharea.length_area_inequality_check(
                     lengtharea.radial_profile(PolyMap(([1.0], [0.0, 1.0]))))) < 1e-6)]
    if name == "current":
        return [("whole-space cell has mass 1",
                 lambda: abs(lengtharea.empirical_current(PolyMap(([1.0], [0.0, 1.0])),
                                                          lengtharea.whole_space(), nr=64).masses[0] - 1) < 1e-12)]
    if name == "lelong":
        return [("line ratio is 1", lambda: abs(lelong.lelong_bound_check(lelong.BallCurve(NAMED_CURVES["line"]))
                                                - 1) < 1e-6)]
    if name == "green":
        return [
            ("F_1 is the identity", lambda: greenpoly.power_map(1, ProjPoint([1, 2, 3, 4, 5])) == ProjPoint([1, 2, 3, 4, 5])),
            ("i^2 = -1", lambda: greenpoly.power_map(2, ProjPoint([1, 1j, 0, 0, 0])) == ProjPoint([1, -1, 0, 0, 0])),
            ("small eps accepts points off the coordinate lines",
             lambda: greenpoly.polyhedron_membership(1e-15, ProjPoint([1, 1e-9, 1e-12, 0, 0])).member),
            ("symmetric point lies on all faces", lambda: len(greenpoly.face_decomposition(ProjPoint([1] * 5))) == 10),
        ]
    if name == "sextic":
        def repeated_form():
            try:
                sexticdeform.PlaneConfig6(np.vstack([np.eye(4), [[1, 1, 1, 1], [1, 1, 1, 1]]]))
            except BrodyLabError:
                return True
            return False

        def product_vanishes():
            c = sexticdeform.standard_config()
            p = c.plane(0)
            for i in range(1, 6):
                p = p * c.plane(i)
            return sexticdeform.sextic_general_position_check(c, p) == 0

        return [("repeated form rejected", repeated_form), ("prod p_i vanishes at triple points", product_vanishes)]
    if name == "winkelmann":
        s = winkelmann.LineDiscScenario(7)
        return [
            ("strict transform through p has no chart term",
             lambda: np.all(winkelmann.lift_deriv_norm(s, np.linspace(-0.02, 0.02, 101)) == s.flat_speed)),
            ("f(0) = p", lambda: winkelmann.line_disc(s, 0)[1] == 0),
        ]
    raise PreconditionError("cli.selftest", f"no self tests for {name!r}")


def run_selftest(name: str) -> int:
    ok = True
    for label, fn in _selftests(name):
        try:
            passed = bool(fn())
        except BrodyLabError as exc:
            passed, label = False, f"{label} ({exc})"
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} {name}: {label}")
    return 0 if ok else 4


# --- entry point ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (default .)")
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("--tol", type=float, help="override the checked tolerance")
    common.add_argument("--nr", type=int, help="radial quadrature size")
    common.add_argument("--ntheta", type=int, help="angular quadrature size")
    common.add_argument("--config", help="JSON file with option values and coefficient blocks")
    common.add_argument("--selftest", action="store_true", help="run the built-in sanity examples")

    parser = argparse.ArgumentParser(prog="brodylab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("brody", parents=[common], help="Brody rescaling of map families")
    p.add_argument("--family", choices=["nz", "power", "exp", "poly"])
    p.add_argument("--n", help="comma-separated family parameters")
    p = sub.add_parser("ahlfors", parents=[common], help="length-area profiles and Ahlfors radii")
    p.add_argument("--family", choices=["nz", "power", "exp", "poly"])
    p.add_argument("--n")
    p.add_argument("--rho-max", dest="rho_max", type=float)
    p.add_argument("--k", type=int)
    p = sub.add_parser("current", parents=[common], help="empirical currents of discs in P^1")
    p.add_argument("--family", choices=["nz", "power", "exp", "poly"])
    p.add_argument("--n")
    p.add_argument("--partition", choices=["hemisphere", "whole", "chart"])
    p.add_argument("--boxes", type=int)
    p.add_argument("--extent", type=float)
    p = sub.add_parser("lelong", parents=[common], help="area of curves in a ball")
    p.add_argument("--curve", choices=sorted(NAMED_CURVES))
    p.add_argument("--eps", type=float)
    p.add_argument("--nradii", type=int)
    p = sub.add_parser("green", parents=[common], help="five-line polyhedra")
    p.add_argument("--check", choices=["preimage", "faces", "epsilon"])
    p.add_argument("--eps", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--samples", type=int)
    p = sub.add_parser("sextic", parents=[common], help="sextic root migration")
    p.add_argument("--step-eps", dest="step_eps", type=float)
    p = sub.add_parser("winkelmann", parents=[common], help="discs on a dense torus line")
    p.add_argument("--ladder")
    p.add_argument("--k", type=int)
    p.add_argument("--n-equi", dest="n_equi", type=int)
    p.add_argument("--slope", type=float)
    return parser


def resolve_options(args: argparse.Namespace) -> dict:
    """Merge command line, config file and defaults; the command line wins."""
    name = args.command
    allowed = set(DEFAULTS[name]) | COMMON_KEYS
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise PreconditionError("cli.config", f"cannot read {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise PreconditionError("cli.config", "config must be a JSON object")
        unknown = sorted(set(cfg) - allowed)
        if unknown:
            raise PreconditionError("cli.config", f"unknown keys for {name}: {unknown}")
    opt = {}
    for key, default in {**HARD_DEFAULTS, **DEFAULTS[name]}.items():
        val = getattr(args, key, None)
        if val is None:
            val = cfg.get(key, default)
        opt[key] = val
    if opt["tol"] is not None and not opt["tol"] > 0:
        raise PreconditionError("cli.config", f"tolerance must be positive, got {opt['tol']}")
    for key in ("nr", "ntheta"):
        if opt[key] is not None and int(opt[key]) < 1:
            raise PreconditionError("cli.config", f"{key} must be positive")
    opt["seed"] = int(opt["seed"])
    return opt


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.selftest:
            return run_selftest(args.command)
        opt = resolve_options(args)
        out = Path(opt["out"])
        out.mkdir(parents=True, exist_ok=True)
        summary = RUNNERS[args.command](opt, out)
        write_json(out / f"{args.command}_summary.json", {"command": args.command, "seed": opt["seed"],
                                                           "results": summary})
    except BrodyLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
