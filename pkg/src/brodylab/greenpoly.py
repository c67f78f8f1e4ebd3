"""Five lines in general position in P^2, the embedding into P^4 given by
their equations, the power maps F_n and the polyhedra

    X_eps = { z in P^4 : max(|z_i|, |z_j|, |z_k|) >= eps * max_l |z_l|  for every triple }.

The minimum over triples of the triple maximum is the third largest modulus,
so membership reduces to comparing one order statistic with eps.  Triples are
0-based index tuples.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm, qmc

from .complexgeom import ProjPoint, normalize_projective
from .errors import DegeneracyError, PreconditionError

TRIPLES = tuple(itertools.combinations(range(5), 3))
GENERAL_POSITION_TOL = 1e-9
FACE_TOL = 1e-9
EPS_FLOOR = 1e-9
EPS_WARN = 1e-3


def _normalized_det(rows: np.ndarray) -> float:
    r = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    return float(abs(np.linalg.det(r)))


@dataclass(frozen=True, eq=False)
class LineConfig5:
    """Five linear forms on C^3, one row of coefficients per form."""

    forms: np.ndarray
    _dets: dict = field(init=False, repr=False)

    def __post_init__(self):
        where = "greenpoly.LineConfig5"
        A = np.array(self.forms, dtype=complex)
        if A.shape != (5, 3):
            raise PreconditionError(where, f"expected 5x3 coefficients, got shape {A.shape}")
        if np.any(np.linalg.norm(A, axis=1) == 0):
            raise PreconditionError(where, "a form is identically zero")
        A.flags.writeable = False
        dets = {t: _normalized_det(A[list(t)]) for t in TRIPLES}
        bad = [t for t, d in dets.items() if d <= GENERAL_POSITION_TOL]
        if bad:
            raise DegeneracyError(where, f"triple point: forms {bad[0]} are concurrent (|det| <= {GENERAL_POSITION_TOL})")
        object.__setattr__(self, "forms", A)
        object.__setattr__(self, "_dets", dets)

    @property
    def min_determinant(self) -> float:
        return min(self._dets.values())

    def double_points(self) -> dict[tuple[int, int], np.ndarray]:
        """The ten points l_i = l_j = 0, as unit vectors of C^3."""
        out = {}
        for i, j in itertools.combinations(range(5), 2):
            v = np.cross(self.forms[i], self.forms[j])
            out[(i, j)] = v / np.linalg.norm(v)
        return out


def standard_config() -> LineConfig5:
    return LineConfig5(np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1], [1, 2, 3]]))


def embed_array(config: LineConfig5, Z: np.ndarray) -> np.ndarray:
    """Vectorized embedding: rows of Z in C^3 to unnormalized rows in C^5."""
    return np.asarray(Z, dtype=complex) @ config.forms.T


def embed(config: LineConfig5, z) -> ProjPoint:
    """z -> [l_1(z): ... : l_5(z)]."""
    zc = z.coords if isinstance(z, ProjPoint) else np.asarray(z, dtype=complex)
    v = config.forms @ (zc / np.linalg.norm(zc))
    if np.sort(np.abs(v))[-3] <= GENERAL_POSITION_TOL * np.abs(v).max(initial=0.0):
        raise DegeneracyError("greenpoly.embed", "three forms vanish at the point: general position fails")
    return ProjPoint(v)


def power_map(n: int, z: ProjPoint) -> ProjPoint:
    """F_n(z) = [z_1^n : ... : z_5^n]."""
    if n < 1:
        raise PreconditionError("greenpoly.power_map", f"n must be >= 1, got {n}")
    return ProjPoint(z.coords**n)


def third_ratio(V: np.ndarray) -> np.ndarray:
    """(third largest |v_i|) / (largest |v_i|) along the last axis."""
    M = np.sort(np.abs(V), axis=-1)
    return M[..., -3] / M[..., -1]


@dataclass(frozen=True)
class Membership:
    member: bool
    worst_triple: tuple[int, int, int]
    margin: float


def polyhedron_membership(eps: float, z, tol: float = 0.0) -> Membership:
    """Test z in X_eps with the norm max |z_i|; margin is min over triples of max_triple - eps*norm."""
    if not 0 < eps <= 1:
        raise PreconditionError("greenpoly.polyhedron_membership", f"eps must be in (0, 1], got {eps}")
    c = z.coords if isinstance(z, ProjPoint) else normalize_projective(z, "greenpoly.polyhedron_membership")
    m = np.abs(c)
    top = m.max()
    margins = [max(m[i], m[j], m[k]) - eps * top for i, j, k in TRIPLES]
    w = int(np.argmin(margins))
    return Membership(bool(margins[w] >= -tol), TRIPLES[w], float(margins[w]))


def membership_array(eps: float, V: np.ndarray) -> np.ndarray:
    """Vectorized membership for rows of V (same predicate as polyhedron_membership)."""
    M = np.abs(V)
    return np.sort(M, axis=-1)[..., -3] - eps * M.max(axis=-1) >= 0


def face_decomposition(z, tol: float = FACE_TOL) -> list[tuple[int, int, int]]:
    """All triples (i, j, k) with |z_i| = |z_j| = |z_k| = ||z|| within tol; z must lie in X_1."""
    c = z.coords if isinstance(z, ProjPoint) else normalize_projective(z, "greenpoly.face_decomposition")
    m = np.abs(c) / np.abs(c).max()
    top = {i for i in range(5) if m[i] >= 1 - tol}
    if len(top) < 3:
        raise PreconditionError(
            "greenpoly.face_decomposition", f"point not in X_1: only {len(top)} coordinates reach the norm"
        )
    return [t for t in TRIPLES if set(t) <= top]


def _halton_sphere(n: int, dim: int, seed: int) -> np.ndarray:
    """Quasi-uniform points on the unit sphere of C^(dim/2) from a scrambled Halton sequence."""
    u = qmc.Halton(d=dim, scramble=True, seed=seed).random(n)
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g[:, 0::2] + 1j * g[:, 1::2]


@dataclass
class EpsilonEstimate:
    epsilon: float
    argmin: np.ndarray
    samples: np.ndarray = field(repr=False)
    sample_ratios: np.ndarray = field(repr=False)


def epsilon_for_config(config: LineConfig5, budget: int = 4096, seed: int = 0, refine: bool = True) -> EpsilonEstimate:
    """Sampled lower estimate of min over P^2 of third-largest / largest |l_i(z)|.

    Halton samples of S^5 cover P^2; local Nelder-Mead searches start from
    the ten double points, where the ratio is smallest.  The returned value
    is the minimum seen, so every sampled embedded point lies in X_eps.
    """
    where = "greenpoly.epsilon_for_config"
    if budget < 1:
        raise PreconditionError(where, "budget must be >= 1")
    Z = _halton_sphere(budget, 6, seed)
    starts = [v for v in config.double_points().values()]
    if refine:
        refined = []
        for z0 in starts:
            basis = np.linalg.svd(z0.conj()[None, :])[2][1:].conj()

            def obj(x, z0=z0, basis=basis):
                z = z0 + (x[0] + 1j * x[1]) * basis[0] + (x[2] + 1j * x[3]) * basis[1]
                return float(third_ratio(config.forms @ z))

            res = minimize(obj, np.zeros(4), method="Nelder-Mead",
                           options={"initial_simplex": 1e-2 * np.vstack([np.zeros(4), np.eye(4)]),
                                    "xatol": 1e-12, "fatol": 1e-15, "maxiter": 2000})
            x = res.x
            z = z0 + (x[0] + 1j * x[1]) * basis[0] + (x[2] + 1j * x[3]) * basis[1]
            refined.append(z / np.linalg.norm(z))
        starts = refined
    Z = np.vstack([Z, np.array(starts)])
    ratios = third_ratio(embed_array(config, Z))
    k = int(np.argmin(ratios))
    eps = float(ratios[k])
    if eps < EPS_FLOOR:
        raise DegeneracyError(where, f"estimate {eps:.3g} below {EPS_FLOOR}: configuration nearly has a triple point")
    if eps < EPS_WARN:
        warnings.warn(f"{where}: small estimate {eps:.3g}, configuration is close to a triple point", stacklevel=2)
    return EpsilonEstimate(eps, Z[k], Z, ratios)


def random_p4_points(n: int, rng: np.random.Generator, decades: float = 2.0) -> np.ndarray:
    """Points with log-uniform moduli over ``decades`` decades and uniform phases."""
    mod = 10.0 ** rng.uniform(-decades, 0.0, size=(n, 5))
    return mod * np.exp(2j * np.pi * rng.random((n, 5)))


def power_preimage_identity_check(eps: float, n: int, points: np.ndarray) -> int:
    """Count points where F_n(z) in X_eps disagrees with z in X_{eps^(1/n)}."""
    if not 0 < eps < 1:
        raise PreconditionError("greenpoly.power_preimage_identity_check", f"eps must be in (0, 1), got {eps}")
    if n < 1:
        raise PreconditionError("greenpoly.power_preimage_identity_check", f"n must be >= 1, got {n}")
    V = np.asarray(points, dtype=complex)
    V = V / np.abs(V).max(axis=1, keepdims=True)
    lhs = membership_array(eps, V**n)
    rhs = membership_array(eps ** (1.0 / n), V)
    return int(np.sum(lhs != rhs))
