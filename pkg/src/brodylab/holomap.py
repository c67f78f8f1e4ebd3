"""Polynomial holomorphic maps from a disc to projective space.

A :class:`PolyMap` is a lift z -> (p_0(z), ..., p_n(z)) with exact complex
coefficients (low degree first) and a domain radius.  Everything here works
at the coefficient level: derivatives, affine precomposition and the
univariate polynomials h(f(z)) used for intersection tracking.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .complexgeom import ProjPoint, fs_deriv_norm, normalize_projective
from .errors import DegeneracyError, DomainError, PreconditionError

MAX_DEGREE = 128
DEGENERACY_GRID = 64
_RADIUS_SLACK = 1e-12


def _as_coeffs(c) -> np.ndarray:
    a = np.atleast_1d(np.asarray(c, dtype=complex)).copy()
    if a.ndim != 1 or a.size == 0:
        raise PreconditionError("holomap.PolyMap", "component must be a nonempty coefficient list")
    return a


def polar_grid(radius: float, nr: int, ntheta: int, include_origin: bool = True) -> np.ndarray:
    """Points r e^{i theta} with r uniform on [0, radius] (or (0, radius]) and theta on [0, 2pi)."""
    if include_origin:
        r = np.linspace(0.0, radius, nr)
    else:
        r = radius * np.arange(1, nr + 1) / nr
    theta = 2 * np.pi * np.arange(ntheta) / ntheta
    return r[:, None] * np.exp(1j * theta)[None, :]


@dataclass(frozen=True, eq=False)
class PolyMap:
    """Lift D_rho -> C^{n+1} of a holomorphic map into P^n.

    Components never vanish simultaneously; this is checked at construction
    on a 64x64 polar grid of the closed domain disc.
    """

    components: tuple
    domain_radius: float = 1.0
    max_degree: int = MAX_DEGREE
    _coeffs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        where = "holomap.PolyMap"
        comps = tuple(_as_coeffs(c) for c in self.components)
        if len(comps) < 2:
            raise PreconditionError(where, "need at least two homogeneous components")
        if not (self.domain_radius > 0 and math.isfinite(self.domain_radius)):
            raise PreconditionError(where, f"domain radius must be positive, got {self.domain_radius}")
        deg = max(len(c) for c in comps) - 1
        if deg > self.max_degree:
            raise PreconditionError(where, f"degree {deg} exceeds maximum {self.max_degree}")
        C = np.zeros((len(comps), deg + 1), dtype=complex)
        for k, c in enumerate(comps):
            C[k, : len(c)] = c
            c.flags.writeable = False
        C.flags.writeable = False
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "domain_radius", float(self.domain_radius))
        object.__setattr__(self, "_coeffs", C)
        self._check_nondegenerate()

    def _check_nondegenerate(self):
        z = polar_grid(self.domain_radius, DEGENERACY_GRID, DEGENERACY_GRID)
        norms = np.sqrt(np.sum(np.abs(self.values(z)) ** 2, axis=0))
        bound = np.sum(_horner(np.abs(self._coeffs), np.abs(z)).real, axis=0)
        bad = norms <= 1e-13 * bound
        if np.any(bad):
            z0 = z[bad][0]
            raise DegeneracyError("holomap.PolyMap", f"all components vanish near z={z0:.6g}")

    # -- basic data ---------------------------------------------------------

    @property
    def coeffs(self) -> np.ndarray:
        """Dense (n+1, degree+1) coefficient matrix, low degree first."""
        return self._coeffs

    @property
    def degree(self) -> int:
        return self._coeffs.shape[1] - 1

    @property
    def target_dim(self) -> int:
        return self._coeffs.shape[0] - 1

    def with_radius(self, radius: float) -> "PolyMap":
        return PolyMap(self.components, radius, self.max_degree)

    def derivative_coeffs(self) -> np.ndarray:
        C = self._coeffs
        if C.shape[1] == 1:
            return np.zeros_like(C)
        return C[:, 1:] * np.arange(1, C.shape[1])

    # -- evaluation ---------------------------------------------------------

    def values(self, z) -> np.ndarray:
        """Horner evaluation of every component; result has shape (n+1, *z.shape)."""
        return _horner(self._coeffs, z)

    def derivative_values(self, z) -> np.ndarray:
        return _horner(self.derivative_coeffs(), z)

    def deriv_norm(self, z) -> np.ndarray:
        """Vectorized Fubini-Study derivative norm (no domain check)."""
        return fs_deriv_norm(self.values(z), self.derivative_values(z))

    def check_domain(self, z, where: str) -> None:
        zmax = float(np.max(np.abs(z))) if np.size(z) else 0.0
        if zmax > self.domain_radius * (1 + _RADIUS_SLACK):
            raise DomainError(where, f"|z|={zmax:.6g} outside domain radius {self.domain_radius:.6g}")

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "components": [[[float(c.real), float(c.imag)] for c in comp] for comp in self.components],
            "domain_radius": self.domain_radius,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "PolyMap":
        unknown = set(data) - {"components", "domain_radius"}
        if unknown:
            raise PreconditionError("holomap.PolyMap.from_dict", f"unknown keys {sorted(unknown)}")
        comps = [[complex(re, im) for re, im in comp] for comp in data["components"]]
        return cls(tuple(comps), float(data.get("domain_radius", 1.0)))

    @classmethod
    def from_json(cls, text: str) -> "PolyMap":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"PolyMap(n={self.target_dim}, degree={self.degree}, radius={self.domain_radius:g})"


def _horner(C: np.ndarray, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    Ct = C.T.reshape(C.shape[::-1] + (1,) * z.ndim)
    out = np.empty((C.shape[0],) + z.shape, dtype=complex)
    out[...] = Ct[-1]
    for k in range(C.shape[1] - 2, -1, -1):
        out *= z
        out += Ct[k]
    return out


def truncated_exp(n: float, degree: int) -> np.ndarray:
    """Taylor coefficients of exp(n z) up to ``degree``."""
    c = np.empty(degree + 1, dtype=complex)
    c[0] = 1.0
    for k in range(1, degree + 1):
        c[k] = c[k - 1] * n / k
    return c


def exp_truncation_bound(n: float, degree: int, radius: float) -> float:
    """Bound on |exp(nz) - truncation| for |z| <= radius.

    The tail sum_{k>d} x^k/k! with x = |n| radius is dominated by the
    geometric series started at its first term once d + 2 > x.
    """
    x = abs(n) * radius
    d = degree
    if d + 2 <= x:
        return math.inf
    first = math.exp((d + 1) * math.log(x) - math.lgamma(d + 2)) if x > 0 else 0.0
    return first / (1 - x / (d + 2))


def exp_map(n: float, degree: int | None = None, radius: float = 1.0) -> PolyMap:
    """The map z -> [1 : exp(nz)] with exp replaced by its Taylor polynomial.

    The default degree keeps the truncation error below 1e-16 relative to
    min |exp(nz)| = exp(-|n| radius) on the domain.
    """
    if degree is None:
        degree = 8
        target = 1e-16 * math.exp(-abs(n) * radius)
        while exp_truncation_bound(n, degree, radius) > target:
            degree += 1
    return PolyMap(([1.0], truncated_exp(n, degree)), radius)


# --- reparametrization ------------------------------------------------------

@dataclass(frozen=True)
class AffineReparam:
    """r(z) = center + scale * z with real positive scale."""

    center: complex = 0j
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise PreconditionError("holomap.AffineReparam", f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "scale", float(self.scale))

    def __call__(self, z):
        return self.center + self.scale * np.asarray(z)

    def then(self, inner: "AffineReparam") -> "AffineReparam":
        """The composition self o inner."""
        return AffineReparam(self.center + self.scale * inner.center, self.scale * inner.scale)


def _taylor_shift(c: np.ndarray, a: complex, rho: complex) -> np.ndarray:
    """Coefficients of p(a + rho z) from those of p, by binomial expansion."""
    d = len(c) - 1
    out = np.zeros(d + 1, dtype=complex)
    apow = np.array([a**m for m in range(d + 1)], dtype=complex)
    for k in range(d + 1):
        s = 0j
        for j in range(k, d + 1):
            s += c[j] * math.comb(j, k) * apow[j - k]
        out[k] = s * rho**k
    return out


def reparametrize(f: PolyMap, r: AffineReparam, new_radius: float) -> PolyMap:
    """Exact coefficient-level composition f o r on the disc of radius ``new_radius``."""
    reach = abs(r.center) + r.scale * new_radius
    if reach > f.domain_radius * (1 + _RADIUS_SLACK):
        raise DomainError(
            "holomap.reparametrize",
            f"new radius {new_radius:.6g} maps to |z| up to {reach:.6g} > {f.domain_radius:.6g}",
        )
    comps = tuple(_taylor_shift(c, r.center, r.scale) for c in f.components)
    return PolyMap(comps, new_radius, f.max_degree)


def rotate(f: PolyMap, theta: float) -> PolyMap:
    """Precompose with z -> e^{i theta} z."""
    u = np.exp(1j * theta)
    comps = tuple(c * u ** np.arange(len(c)) for c in f.components)
    return PolyMap(comps, f.domain_radius, f.max_degree)


# --- pointwise operations -----------------------------------------------------

def eval_map(f: PolyMap, z: complex) -> ProjPoint:
    where = "holomap.eval"
    f.check_domain(z, where)
    v = f.values(complex(z))
    return ProjPoint(normalize_projective(v, where))


def deriv_norm_at(f: PolyMap, z: complex) -> float:
    where = "holomap.deriv_norm_at"
    f.check_domain(z, where)
    v = f.values(complex(z))
    if np.all(v == 0):
        raise DegeneracyError(where, f"all components vanish at z={z}")
    return float(fs_deriv_norm(v, f.derivative_values(complex(z))))


# --- homogeneous polynomials and intersections ---------------------------------

def compose_homogeneous(h: dict, f: PolyMap) -> np.ndarray:
    """Coefficients (low degree first) of z -> h(f(z)).

    ``h`` maps exponent tuples (one entry per homogeneous coordinate) to
    complex coefficients.
    """
    P = np.polynomial.polynomial
    n1 = f.target_dim + 1
    out = np.zeros(1, dtype=complex)
    powers: dict[tuple[int, int], np.ndarray] = {}

    def comp_pow(k, e):
        if (k, e) not in powers:
            powers[(k, e)] = np.array([1.0 + 0j]) if e == 0 else P.polymul(comp_pow(k, e - 1), f.coeffs[k])
        return powers[(k, e)]

    for expo, coef in h.items():
        if len(expo) != n1:
            raise PreconditionError("holomap.compose_homogeneous", f"exponent {expo} has wrong length")
        term = np.array([complex(coef)])
        for k, e in enumerate(expo):
            if e:
                term = P.polymul(term, comp_pow(k, e))
        out = P.polyadd(out, term)
    return np.atleast_1d(out)


def companion_roots(coeffs, rtol: float = 1e-14) -> np.ndarray:
    """Roots of a polynomial (low degree first) as companion-matrix eigenvalues.

    Leading coefficients below ``rtol`` times the largest one are dropped;
    exact zero roots are split off before forming the matrix.
    """
    c = np.asarray(coeffs, dtype=complex)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0:
        raise PreconditionError("holomap.companion_roots", "polynomial vanishes identically")
    top = len(c) - 1
    while top > 0 and abs(c[top]) <= rtol * scale:
        top -= 1
    c = c[: top + 1]
    nz = 0
    while nz < len(c) - 1 and c[nz] == 0:
        nz += 1
    c = c[nz:]
    d = len(c) - 1
    if d == 0:
        return np.zeros(nz, dtype=complex)
    M = np.zeros((d, d), dtype=complex)
    M[1:, :-1] = np.eye(d - 1)
    M[:, -1] = -c[:-1] / c[-1]
    roots = np.linalg.eigvals(M)
    return np.concatenate([np.zeros(nz, dtype=complex), roots])


@dataclass
class IntersectionReport:
    limit_roots: np.ndarray
    distances: np.ndarray  # (len(f_seq), len(limit_roots))

    @property
    def max_distance(self) -> np.ndarray:
        if self.distances.size == 0:
            return np.zeros(self.distances.shape[0])
        return self.distances.max(axis=1)


def _distinct(roots: np.ndarray, tol: float) -> np.ndarray:
    kept: list[complex] = []
    for z in roots:
        if all(abs(z - k) > tol for k in kept):
            kept.append(z)
    return np.array(kept, dtype=complex)


def intersection_stability(f_seq, f_limit: PolyMap, h: dict, cluster_tol: float = 1e-6) -> IntersectionReport:
    """Distances from each zero of h o f_limit in the open domain disc to the
    nearest zero of h o f_n, for every f_n in the sequence."""
    where = "holomap.intersection_stability"
    c = compose_homogeneous(h, f_limit)
    if np.max(np.abs(c)) <= 1e-14 * max(1.0, np.sum(np.abs(f_limit.coeffs))):
        raise PreconditionError(where, "h o f vanishes identically: the curve lies in the hypersurface")
    limit = companion_roots(c)
    limit = _distinct(limit[np.abs(limit) < f_limit.domain_radius], cluster_tol)
    dist = np.zeros((len(f_seq), len(limit)))
    for i, fn in enumerate(f_seq):
        cn = compose_homogeneous(h, fn)
        if not np.any(cn):
            continue
        rn = companion_roots(cn)
        if rn.size == 0:
            dist[i, :] = np.inf
            continue
        dist[i] = np.min(np.abs(limit[:, None] - rn[None, :]), axis=1)
    return IntersectionReport(limit, dist)
