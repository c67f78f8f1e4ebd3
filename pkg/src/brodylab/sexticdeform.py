"""Six planes in general position in P^3 and sextic surfaces built from them.

The configuration has 15 double lines P_i & P_j and 20 triple points
P_i & P_j & P_k, four on every double line.  Sigma_eps = (prod p_i = eps s)
meets each plane P_i inside (s = 0).  One deformation step replaces the
defining equation by p_a p_b p_c^2 p_d^2 - eps s, whose trace on the double
line D = P_i & P_j has its six zeros pushed toward the four triple points of
D as eps -> 0, in clusters of sizes 1, 1, 2, 2.

Plane indices are 0-based throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .complexgeom import fs_distance_arrays
from .errors import DegeneracyError, NumericalError, PreconditionError
from .holomap import companion_roots

GENERAL_POSITION_TOL = 1e-9
INCIDENCE_TOL = 1e-9
PP = np.polynomial.polynomial


# --- homogeneous polynomials on C^4 -----------------------------------------


@dataclass(frozen=True, eq=False)
class HomPoly:
    """Homogeneous polynomial on C^4 as {exponent 4-tuple: coefficient}."""

    terms: Mapping[tuple, complex]

    def __post_init__(self):
        clean = {}
        for e, c in dict(self.terms).items():
            e = tuple(int(k) for k in e)
            if len(e) != 4 or min(e) < 0:
                raise PreconditionError("sexticdeform.HomPoly", f"bad exponent {e}")
            if c != 0:
                clean[e] = clean.get(e, 0) + complex(c)
        degs = {sum(e) for e in clean}
        if len(degs) > 1:
            raise PreconditionError("sexticdeform.HomPoly", f"mixed degrees {sorted(degs)}")
        object.__setattr__(self, "terms", clean)

    @classmethod
    def linear(cls, a) -> "HomPoly":
        return cls({tuple(int(i == k) for i in range(4)): a[k] for k in range(4)})

    @property
    def degree(self) -> int:
        return sum(next(iter(self.terms))) if self.terms else -1

    @property
    def scale(self) -> float:
        """Sum of coefficient moduli; bounds |s| on the unit sphere."""
        return float(sum(abs(c) for c in self.terms.values()))

    def __mul__(self, other: "HomPoly") -> "HomPoly":
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return HomPoly(out)

    def __add__(self, other: "HomPoly") -> "HomPoly":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return HomPoly(out)

    def scaled(self, a: complex) -> "HomPoly":
        return HomPoly({e: a * c for e, c in self.terms.items()})

    def __call__(self, Q) -> np.ndarray:
        """Evaluate at points stored in the last axis of Q."""
        Q = np.asarray(Q, dtype=complex)
        out = np.zeros(Q.shape[:-1], dtype=complex)
        for e, c in self.terms.items():
            out = out + c * np.prod(Q ** np.array(e), axis=-1)
        return out

    def restrict_to_line(self, A, B) -> np.ndarray:
        """Coefficients, in increasing powers of t, of s(A + t B)."""
        d = max(self.degree, 0)
        out = np.zeros(d + 1, dtype=complex)
        for e, c in self.terms.items():
            p = np.array([1.0 + 0j])
            for k in range(4):
                if e[k]:
                    p = PP.polymul(p, PP.polypow([A[k], B[k]], e[k]))
            out[: len(p)] += c * p
        return out

    def to_json(self) -> list:
        return [[list(e), [c.real, c.imag]] for e, c in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, data) -> "HomPoly":
        return cls({tuple(e): complex(c[0], c[1]) for e, c in data})


def fermat_sextic() -> HomPoly:
    return HomPoly({tuple(6 * int(i == k) for i in range(4)): 1.0 for k in range(4)})


def random_sextic(rng: np.random.Generator) -> HomPoly:
    exps = [e for e in itertools.product(range(7), repeat=4) if sum(e) == 6]
    c = rng.standard_normal(len(exps)) + 1j * rng.standard_normal(len(exps))
    return HomPoly(dict(zip(exps, c)))


# --- configurations ----------------------------------------------------------


def _null_space(M: np.ndarray, dim: int, where: str) -> np.ndarray:
    """Orthonormal basis (rows) of the kernel of M, which must have the given dimension."""
    _, sv, Vh = np.linalg.svd(M / np.linalg.norm(M, axis=1, keepdims=True))
    rank = 4 - dim
    if sv[rank - 1] <= GENERAL_POSITION_TOL:
        raise DegeneracyError(where, f"rank deficient system (singular value {sv[rank - 1]:.3g})")
    return Vh[rank:].conj()


@dataclass(frozen=True, eq=False)
class PlaneConfig6:
    """Six linear forms on C^4 with no four planes through a common point."""

    forms: np.ndarray
    _dets: dict = field(init=False, repr=False)

    def __post_init__(self):
        where = "sexticdeform.PlaneConfig6"
        A = np.array(self.forms, dtype=complex)
        if A.shape != (6, 4):
            raise PreconditionError(where, f"expected 6x4 coefficients, got shape {A.shape}")
        if np.any(np.linalg.norm(A, axis=1) == 0):
            raise PreconditionError(where, "a form is identically zero")
        An = A / np.linalg.norm(A, axis=1, keepdims=True)
        dets = {q: float(abs(np.linalg.det(An[list(q)]))) for q in itertools.combinations(range(6), 4)}
        bad = [q for q, d in dets.items() if d <= GENERAL_POSITION_TOL]
        if bad:
            raise DegeneracyError(where, f"quadruple point: planes {bad[0]} are concurrent")
        A.flags.writeable = False
        object.__setattr__(self, "forms", A)
        object.__setattr__(self, "_dets", dets)

    @property
    def min_determinant(self) -> float:
        return min(self._dets.values())

    def plane(self, i: int) -> HomPoly:
        return HomPoly.linear(self.forms[i])


def standard_config() -> PlaneConfig6:
    return PlaneConfig6(np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1],
                                  [1, 1, 1, 1], [1, 2, 3, 4]]))


def random_config(rng: np.random.Generator) -> PlaneConfig6:
    return PlaneConfig6(rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4)))


@dataclass(frozen=True)
class DoubleLine:
    planes: tuple[int, int]
    basis: np.ndarray  # 2x4, orthonormal rows spanning the line
    triple_points: tuple[tuple[int, ...], ...]  # keys into Incidence.points


@dataclass(frozen=True)
class Incidence:
    lines: dict  # (i, j) -> DoubleLine
    points: dict  # (i, j, k) -> unit vector of C^4

    def points_on(self, line: tuple[int, int]) -> list[tuple[int, int, int]]:
        return list(self.lines[tuple(sorted(line))].triple_points)


def build_incidence(config: PlaneConfig6) -> Incidence:
    """Enumerate double lines and triple points and test which points lie on which lines."""
    where = "sexticdeform.build_incidence"
    A = config.forms
    An = A / np.linalg.norm(A, axis=1, keepdims=True)
    points = {}
    for t in itertools.combinations(range(6), 3):
        v = _null_space(A[list(t)], 1, where)[0]
        points[t] = v / np.linalg.norm(v)
    lines = {}
    for pair in itertools.combinations(range(6), 2):
        basis = _null_space(A[list(pair)], 2, where)
        on = tuple(t for t, v in points.items() if np.all(np.abs(An[list(pair)] @ v) <= INCIDENCE_TOL))
        if len(on) != 4:
            raise DegeneracyError(where, f"line {pair} carries {len(on)} triple points, expected 4")
        lines[pair] = DoubleLine(pair, basis, on)
    if len(lines) != 15 or len(points) != 20:
        raise DegeneracyError(where, "wrong incidence counts")
    return Incidence(lines, points)


@dataclass(frozen=True, eq=False)
class SexticSurface:
    """Sigma_eps = (prod p_i = eps s) for a degree-6 form s."""

    s: HomPoly
    epsilon: complex

    def __post_init__(self):
        if self.s.degree != 6:
            raise PreconditionError("sexticdeform.SexticSurface", f"s has degree {self.s.degree}, expected 6")

    def equation(self, config: PlaneConfig6) -> HomPoly:
        prod = config.plane(0)
        for i in range(1, 6):
            prod = prod * config.plane(i)
        return prod + self.s.scaled(-self.epsilon)


def _binary_roots(c: np.ndarray, where: str) -> np.ndarray:
    """Zeros [a:b] of sum c_k a^(d-k) b^k as unit vectors (a, b), using the charts b/a and a/b."""
    d = len(c) - 1
    if not np.any(np.abs(c) > 0):
        raise NumericalError(where, "form vanishes identically on the line")
    out = []
    for t in companion_roots(c):
        if abs(t) <= 1:
            out.append((1.0, t))
    for u in companion_roots(c[::-1]):
        if abs(u) < 1:
            out.append((u, 1.0))
    if len(out) != d:
        raise NumericalError(where, f"found {len(out)} roots of a degree-{d} binary form")
    ab = np.array(out, dtype=complex)
    return ab / np.linalg.norm(ab, axis=1, keepdims=True)


def _line_roots(F: HomPoly, basis: np.ndarray, where: str) -> np.ndarray:
    """Zeros of F on the line spanned by two vectors, as unit vectors of C^4."""
    ab = _binary_roots(F.restrict_to_line(basis[0], basis[1]), where)
    Q = ab @ basis
    return Q / np.linalg.norm(Q, axis=1, keepdims=True)


def incidence_check_sigma(
    config: PlaneConfig6, S: SexticSurface, samples: int = 100, rng: np.random.Generator | None = None
) -> float:
    """Max of |s(q)| / scale(s) over constructed unit-norm points q of Sigma_eps & P_i.

    Points come from zeros of the full equation restricted to random lines of
    each plane P_i in turn, until ``samples`` points are collected.
    """
    where = "sexticdeform.incidence_check_sigma"
    if S.epsilon == 0:
        raise PreconditionError(where, "epsilon must be nonzero")
    rng = rng or np.random.default_rng(0)
    F = S.equation(config)
    pts = []
    i = 0
    while len(pts) < samples:
        N = _null_space(config.forms[[i % 6]], 3, where)
        G = (rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))) @ N
        basis = np.linalg.qr(G.T)[0].T
        pts.extend(_line_roots(F, basis, where))
        i += 1
    Q = np.array(pts[:samples])
    return float(np.max(np.abs(S.s(Q)))) / S.s.scale


def off_surface_residual(config: PlaneConfig6, S: SexticSurface, samples: int = 100,
                         rng: np.random.Generator | None = None) -> float:
    """Control: min of |s(q)| / scale(s) over random unit-norm points of the planes."""
    rng = rng or np.random.default_rng(1)
    vals = []
    for k in range(samples):
        N = _null_space(config.forms[[k % 6]], 3, "sexticdeform.off_surface_residual")
        q = (rng.standard_normal(3) + 1j * rng.standard_normal(3)) @ N
        vals.append(abs(S.s(q / np.linalg.norm(q))))
    return float(min(vals)) / S.s.scale


def sextic_general_position_check(config: PlaneConfig6, s: HomPoly, incidence: Incidence | None = None) -> float:
    """min over the 20 triple points (unit-norm lifts) of |s|."""
    inc = incidence or build_incidence(config)
    Q = np.array(list(inc.points.values()))
    return float(np.min(np.abs(s(Q))))


def _monomial(config: PlaneConfig6, idx: Sequence[int]) -> HomPoly:
    a, b, c, d = idx
    p = config.plane
    return p(a) * p(b) * p(c) * p(c) * p(d) * p(d)


def _check_indices(line: tuple[int, int], idx: Sequence[int], where: str) -> tuple[int, ...]:
    idx = tuple(int(i) for i in idx)
    if len(idx) != 4 or sorted(set(idx) | set(line)) != list(range(6)) or len(set(idx)) != 4:
        raise PreconditionError(where, f"indices {idx} must be the four planes other than {tuple(line)}")
    return idx


def other_indices(line: tuple[int, int]) -> tuple[int, int, int, int]:
    return tuple(k for k in range(6) if k not in line)


@dataclass
class DeformationResult:
    s_next: HomPoly
    previous_line_residual: float  # max |s_{k+1} + eps s_k| / scale on earlier lines


def deformation_step(
    config: PlaneConfig6,
    s_k: HomPoly,
    line: tuple[int, int],
    eps: complex,
    previous_lines: Sequence[tuple[int, int]] = (),
    indices: Sequence[int] | None = None,
    samples: int = 50,
    rng: np.random.Generator | None = None,
) -> DeformationResult:
    """s_{k+1} = p_a p_b p_c^2 p_d^2 - eps s_k for the double line D = P_i & P_j.

    On any other double line the monomial vanishes, so s_{k+1} = -eps s_k
    there and both surfaces cut the earlier lines in the same points; this is
    measured at ``samples`` points of each line in ``previous_lines``.
    """
    where = "sexticdeform.deformation_step"
    if eps == 0:
        raise PreconditionError(where, "eps_k must be nonzero")
    line = tuple(sorted(line))
    idx = _check_indices(line, indices if indices is not None else other_indices(line), where)
    if s_k.degree != 6:
        raise PreconditionError(where, f"s_k has degree {s_k.degree}, expected 6")
    mono = _monomial(config, idx)
    s_next = mono + s_k.scaled(-eps)
    if s_next.degree != 6:
        raise PreconditionError(where, f"construction produced degree {s_next.degree}")
    rng = rng or np.random.default_rng(0)
    resid = 0.0
    scale = s_next.scale
    for prev in previous_lines:
        prev = tuple(sorted(prev))
        if prev == line:
            raise PreconditionError(where, f"line {prev} is the line being processed")
        basis = _null_space(config.forms[list(prev)], 2, where)
        ab = rng.standard_normal((samples, 2)) + 1j * rng.standard_normal((samples, 2))
        Q = ab @ basis
        Q /= np.linalg.norm(Q, axis=1, keepdims=True)
        resid = max(resid, float(np.max(np.abs(s_next(Q) + eps * s_k(Q)))) / scale)
    return DeformationResult(s_next, resid)


@dataclass
class RootTrack:
    line: tuple[int, int]
    indices: tuple[int, int, int, int]
    ladder: list[float]
    roots: list[np.ndarray]  # per eps: 6 unit vectors of C^4, matched along the ladder
    nearest: list[np.ndarray]  # per eps: index (0..3, in the order of ``indices``) of nearest triple point
    distances: list[np.ndarray]  # per eps: FS distance to that triple point
    match_moves: list[float]  # max FS displacement of matched roots between consecutive eps

    @property
    def max_distances(self) -> list[float]:
        return [float(np.max(d)) for d in self.distances]

    def cluster_pattern(self, step: int = -1) -> tuple[int, ...]:
        """Number of roots nearest to the triple point on each of P_a, P_b, P_c, P_d."""
        return tuple(int(np.sum(self.nearest[step] == k)) for k in range(4))


def trace_roots_on_line(
    config: PlaneConfig6,
    line: tuple[int, int],
    s: HomPoly,
    ladder: Sequence[float] = tuple(10.0**-k for k in range(1, 7)),
    indices: Sequence[int] | None = None,
) -> RootTrack:
    """Zeros of (p_a p_b p_c^2 p_d^2 - eps s) on D = P_i & P_j along a ladder of eps."""
    where = "sexticdeform.trace_roots_on_line"
    line = tuple(sorted(line))
    idx = _check_indices(line, indices if indices is not None else other_indices(line), where)
    inc = build_incidence(config)
    D = inc.lines[line]
    targets = np.array([inc.points[tuple(sorted(line + (k,)))] for k in idx])
    mono = _monomial(config, idx)
    roots, nearest, dists, moves = [], [], [], []
    for eps in ladder:
        try:
            Q = _line_roots(mono + s.scaled(-eps), D.basis, where)
        except NumericalError as exc:
            raise NumericalError(where, f"eps={eps!r}: {exc.message}") from exc
        if roots:
            prev = roots[-1]
            d = fs_distance_arrays(prev.T[:, :, None], Q.T[:, None, :])
            order = np.empty(len(Q), dtype=int)
            free = set(range(len(Q)))
            for i in np.argsort(d.min(axis=1)):
                j = min(free, key=lambda j: d[i, j])
                order[i] = j
                free.remove(j)
            Q = Q[order]
            moves.append(float(np.max(d[np.arange(len(Q)), order])))
        dd = fs_distance_arrays(Q.T[:, :, None], targets.T[:, None, :])
        roots.append(Q)
        nearest.append(np.argmin(dd, axis=1))
        dists.append(dd.min(axis=1))
    return RootTrack(line, idx, [float(e) for e in ladder], roots, nearest, dists, moves)
