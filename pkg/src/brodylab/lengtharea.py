"""Length-area analysis of holomorphic discs.

With lambda = ||f'|| the pull-back density of the Fubini-Study metric, in
polar coordinates

    l(r)  = int_0^{2pi} lambda(r, t) r dt          (length of f(|z| = r))
    a'(r) = int_0^{2pi} lambda(r, t)^2 r dt        (derivative of the area)

and Cauchy-Schwarz gives l(r)^2 <= 2 pi r a'(r).  This module evaluates
those curves, extracts radii along which l/a decreases, estimates total
areas of entire curves of finite area, and discretizes the normalized
currents of integration [f(D)]/a over a partition of the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .errors import InvariantViolation, PreconditionError
from .holomap import PolyMap, companion_roots

DEFAULT_NR = 256
DEFAULT_NTHETA = 256
CS_TOL = 1e-4
_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class RadialProfile:
    radii: np.ndarray  # r_1 < ... < r_nr = rho, r_1 > 0
    thetas: np.ndarray
    lam: np.ndarray  # (nr, ntheta)
    l_of_r: np.ndarray
    a_prime: np.ndarray
    a_of_r: np.ndarray

    def check(self, tol: float = CS_TOL) -> None:
        where = "lengtharea.RadialProfile"
        for name in ("lam", "l_of_r", "a_of_r"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvariantViolation(where, f"{name} contains NaN or Inf")
        if np.any(self.lam < 0) or np.any(self.l_of_r < 0):
            raise InvariantViolation(where, "negative density or length")
        if np.any(np.diff(self.a_of_r) < -1e-12 * max(1.0, self.a_of_r[-1])):
            raise InvariantViolation(where, "area is not nondecreasing")
        v = length_area_inequality_check(self)
        if v > tol:
            raise InvariantViolation(where, f"Cauchy-Schwarz violated by {v:.3g} > {tol:g}")


def _circle_data(f: PolyMap, radii: np.ndarray, ntheta: int):
    thetas = 2 * np.pi * np.arange(ntheta) / ntheta
    z = radii[:, None] * np.exp(1j * thetas)[None, :]
    lam = f.deriv_norm(z)
    dtheta = 2 * np.pi / ntheta
    l = lam.sum(axis=1) * radii * dtheta
    ap = (lam**2).sum(axis=1) * radii * dtheta
    return thetas, lam, l, ap


def radial_profile(f: PolyMap, nr: int = DEFAULT_NR, ntheta: int = DEFAULT_NTHETA,
                   radius: float | None = None) -> RadialProfile:
    """Sample lambda on a polar grid and integrate length and area curves.

    Radii are r_i = rho i / nr.  Lengths use the periodic trapezoid rule in
    theta; areas integrate a'(r) by cumulative Simpson from r = 0.
    """
    where = "lengtharea.radial_profile"
    if nr < 16 or ntheta < 32:
        raise PreconditionError(where, f"need nr >= 16 and ntheta >= 32, got {nr}, {ntheta}")
    rho = f.domain_radius if radius is None else float(radius)
    f.check_domain(rho, where)
    radii = rho * np.arange(1, nr + 1) / nr
    thetas, lam, l, ap = _circle_data(f, radii, ntheta)
    x = np.concatenate([[0.0], radii])
    a = cumulative_simpson(np.concatenate([[0.0], ap]), x=x, initial=0.0)[1:]
    return RadialProfile(radii, thetas, lam, l, ap, a)


def length_area_inequality_check(p: RadialProfile) -> float:
    """Largest relative excess of l^2 over 2 pi r a'(r) at interior radii (<= 0 when it holds)."""
    l2 = p.l_of_r[:-1] ** 2
    rhs = 2 * np.pi * p.radii[:-1] * p.a_prime[:-1]
    return float(np.max((l2 - rhs) / np.maximum(l2, _EPS)))


# --- Ahlfors radii ---------------------------------------------------------------

@dataclass(frozen=True)
class AhlforsSelection:
    radii: np.ndarray
    ratios: np.ndarray  # l/a at the selected radii, strictly decreasing
    integral: float  # int_1^rho_max (l/a)^2 dr / (2 pi r)
    bound: float  # 1 / a(1)
    profile: RadialProfile = field(repr=False)


def select_ahlfors_radii(f: PolyMap, rho_max: float, k: int, per_unit: int = 64,
                         ntheta: int = DEFAULT_NTHETA) -> AhlforsSelection:
    """Radii r_1 < ... < r_k with strictly decreasing l(r)/a(r).

    Candidates are minimizers of l/a on the dyadic windows [2^j, 2^{j+1}]
    (clipped to rho_max); a window whose minimizer fails to improve on the
    last accepted ratio is skipped.
    """
    where = "lengtharea.select_ahlfors_radii"
    if rho_max <= 1:
        raise PreconditionError(where, f"rho_max must exceed 1, got {rho_max}")
    # grid step 1/per_unit, so r = 1 is a grid point; rho_max is rounded up
    nr = max(16, int(math.ceil(rho_max * per_unit - 1e-9)))
    p = radial_profile(f.with_radius(nr / per_unit), nr=nr, ntheta=ntheta)
    i1 = per_unit - 1
    a1 = p.a_of_r[i1]
    if not a1 > 0:
        raise PreconditionError(where, "a(1) = 0: the map is constant on the unit disc")
    r, l, a = p.radii[i1:], p.l_of_r[i1:], p.a_of_r[i1:]
    integral = float(simpson(l**2 / a**2 / (2 * np.pi * r), x=r))

    ratio = l / a
    chosen: list[int] = []
    lo = 1.0
    while lo < r[-1] - 1e-12 and len(chosen) < k:
        hi = min(2 * lo, r[-1])
        mask = (r >= lo) & (r <= hi + 1e-12) if lo == 1.0 else (r > lo) & (r <= hi + 1e-12)
        idx = np.flatnonzero(mask)
        if idx.size:
            j = int(idx[np.argmin(ratio[idx])])
            if not chosen or ratio[j] < ratio[chosen[-1]]:
                chosen.append(j)
        lo = hi
    if len(chosen) < k:
        raise PreconditionError(
            where, f"only {len(chosen)} decreasing windows below rho_max={rho_max}; increase rho_max"
        )
    return AhlforsSelection(r[chosen], ratio[chosen], integral, 1.0 / a1, p)


def isoperimetric_ratio(f: PolyMap, nr: int = DEFAULT_NR, ntheta: int = DEFAULT_NTHETA) -> float:
    """a(rho) / l(rho); +inf when the boundary has zero length but the disc has area."""
    p = radial_profile(f, nr, ntheta)
    a, l = p.a_of_r[-1], p.l_of_r[-1]
    if l > 0:
        return float(a / l)
    if a > 0:
        return math.inf
    raise PreconditionError("lengtharea.isoperimetric_ratio", "constant map: zero length and area")


@dataclass(frozen=True)
class TotalArea:
    ladder: np.ndarray
    areas: np.ndarray
    degree: int

    @property
    def estimate(self) -> float:
        return float(self.areas[-1])

    @property
    def relative_error(self) -> float:
        """Distance of the estimate from degree * pi (the area of a degree-d rational curve)."""
        return abs(self.estimate - self.degree * np.pi) / (self.degree * np.pi)


def total_area_estimate(f: PolyMap, ladder: Sequence[float] = (1, 2, 4, 8, 16, 32, 64),
                        per_unit: int = 64, ntheta: int = DEFAULT_NTHETA) -> TotalArea:
    """a(rho) along an increasing ladder of radii for a map into P^1.

    ``per_unit`` grid points per unit radius; every ladder radius must be a
    multiple of 1/per_unit so it falls on the Simpson grid.
    """
    where = "lengtharea.total_area_estimate"
    if f.target_dim != 1:
        raise PreconditionError(where, "total area is estimated for maps into P^1 only")
    ladder = np.asarray(sorted(ladder), dtype=float)
    rho = ladder[-1]
    g = f.with_radius(rho)
    nr = int(round(rho * per_unit))
    p = radial_profile(g, nr=nr, ntheta=ntheta)
    idx = np.rint(ladder * per_unit).astype(int) - 1
    if np.any(np.abs(p.radii[idx] - ladder) > 1e-9 * rho):
        raise PreconditionError(where, "ladder radii must lie on the grid (multiples of 1/per_unit)")
    areas = p.a_of_r[idx]
    if np.any(np.diff(areas) < 0):
        raise InvariantViolation(where, "area along the ladder decreased")
    degree = _effective_degree(f)
    if degree == 0:
        raise PreconditionError(where, "constant map")
    return TotalArea(ladder, areas, degree)


def _effective_degree(f: PolyMap, tol: float = 1e-14) -> int:
    scale = np.max(np.abs(f.coeffs))
    d = f.degree
    while d > 0 and np.all(np.abs(f.coeffs[:, d]) <= tol * scale):
        d -= 1
    return d


# --- empirical currents ------------------------------------------------------------

@dataclass(frozen=True)
class Cell:
    """A region of the target given by a vectorized membership predicate."""

    name: str
    contains: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)


def whole_space() -> list[Cell]:
    return [Cell("all", lambda P: np.ones(P.shape[1:], dtype=bool))]


def hemisphere_partition(i: int = 0, j: int = 1) -> list[Cell]:
    """Split P^n by |z_j| <= |z_i| versus |z_j| > |z_i|."""
    return [
        Cell(f"|z{j}|<=|z{i}|", lambda P: np.abs(P[j]) <= np.abs(P[i])),
        Cell(f"|z{j}|>|z{i}|", lambda P: np.abs(P[j]) > np.abs(P[i])),
    ]


def chart_box_partition(k: int, extent: float, i: int = 0, j: int = 1) -> list[Cell]:
    """k x k boxes covering [-extent, extent]^2 in the chart w = z_j / z_i."""
    edges = np.linspace(-extent, extent, k + 1)
    cells = []
    for a in range(k):
        for b in range(k):
            def pred(P, a=a, b=b):
                safe = np.abs(P[i]) > 0
                w = np.where(safe, P[j] / np.where(safe, P[i], 1), np.inf)
                return (safe & (w.real >= edges[a]) & (w.real < edges[a + 1])
                        & (w.imag >= edges[b]) & (w.imag < edges[b + 1]))
            cells.append(Cell(f"box{a}_{b}", pred))
    return cells


@dataclass(frozen=True, eq=False)
class EmpiricalCurrent:
    names: list[str]  # the last entry is the complement cell
    masses: np.ndarray
    a_n: float
    l_n: float

    @property
    def ratio(self) -> float:
        return self.l_n / self.a_n if self.a_n > 0 else math.inf

    def check(self, tol: float = 1e-9) -> None:
        where = "lengtharea.EmpiricalCurrent"
        if np.any(self.masses < 0):
            raise InvariantViolation(where, "negative cell mass")
        total = float(np.sum(self.masses))
        if abs(total - 1) > tol:
            raise InvariantViolation(where, f"total mass {total!r} differs from 1")

    def mass(self, name: str) -> float:
        return float(self.masses[self.names.index(name)])


def current_from_samples(points: np.ndarray, weights: np.ndarray, cells: Sequence[Cell],
                         a_n: float, l_n: float) -> EmpiricalCurrent:
    """Normalized weight per cell; each sample goes to the first cell containing it.

    ``points`` carries coordinates along axis 0 in whatever form the cell
    predicates expect (projective lifts, torus reals).  Samples in no cell
    feed the trailing complement cell.
    """
    where = "lengtharea.empirical_current"
    if len(cells) == 0:
        raise PreconditionError(where, "empty partition")
    w = np.asarray(weights, dtype=float).ravel()
    total = w.sum()
    if not total > 0:
        raise PreconditionError(where, "disc has zero area; masses undefined")
    P = points.reshape(points.shape[0], -1)
    free = np.ones(w.shape, dtype=bool)
    masses = []
    for c in cells:
        inside = free & np.asarray(c.contains(P), dtype=bool).ravel()
        masses.append(w[inside].sum())
        free &= ~inside
    masses.append(w[free].sum())
    masses = np.array(masses) / total
    return EmpiricalCurrent([c.name for c in cells] + ["complement"], masses, float(a_n), float(l_n))


def disc_midpoints(radius: float, nr: int, ntheta: int):
    """Polar midpoint samples of the disc and their area weights."""
    h = radius / nr
    r = (np.arange(nr) + 0.5) * h
    t = 2 * np.pi * (np.arange(ntheta) + 0.5) / ntheta
    z = r[:, None] * np.exp(1j * t)[None, :]
    w = np.broadcast_to(r[:, None] * h * (2 * np.pi / ntheta), z.shape)
    return z, w


def empirical_current(f: PolyMap, cells: Sequence[Cell], nr: int = 512,
                      ntheta: int = DEFAULT_NTHETA) -> EmpiricalCurrent:
    """Discretized [f(D)]/a: cell masses area(f(D) within U)/area(f(D))."""
    z, w = disc_midpoints(f.domain_radius, nr, ntheta)
    lam = f.deriv_norm(z)
    weights = lam**2 * w
    rim = f.domain_radius * np.exp(2j * np.pi * np.arange(ntheta) / ntheta)
    l_n = float(f.deriv_norm(rim).sum() * f.domain_radius * 2 * np.pi / ntheta)
    return current_from_samples(f.values(z), weights, cells, float(weights.sum()), l_n)


# --- closedness ---------------------------------------------------------------------

def _peval(poly: dict, X: np.ndarray) -> np.ndarray:
    out = np.zeros(X.shape[1:])
    for expo, c in poly.items():
        term = np.full(X.shape[1:], float(c))
        for m, e in enumerate(expo):
            if e:
                term = term * X[m] ** e
        out = out + term
    return out


def _pderiv(poly: dict, m: int) -> dict:
    out: dict = {}
    for expo, c in poly.items():
        if expo[m]:
            e = list(expo)
            e[m] -= 1
            out[tuple(e)] = out.get(tuple(e), 0.0) + c * expo[m]
    return out


@dataclass(frozen=True)
class PolyOneForm:
    """beta = sum_m P_m dX_m with real polynomial coefficients P_m.

    ``chart="affine"``: X = (Re w, Im w) for w = z_j / z_i.
    ``chart="sphere"``: X = (X, Y, Z) on the unit sphere, the image of
    [z_i : z_j] under X + iY = 2 conj(z_i) z_j / N, Z = (|z_j|^2 - |z_i|^2) / N,
    N = |z_i|^2 + |z_j|^2.  These forms are smooth on all of P^1.
    """

    coeffs: tuple  # one dict {exponents: coefficient} per chart coordinate
    chart: str = "affine"
    index: tuple = (0, 1)

    def __post_init__(self):
        m = {"affine": 2, "sphere": 3}.get(self.chart)
        if m is None:
            raise PreconditionError("lengtharea.PolyOneForm", f"unknown chart {self.chart!r}")
        if len(self.coeffs) != m or any(len(e) != m for P in self.coeffs for e in P):
            raise PreconditionError("lengtharea.PolyOneForm", f"{self.chart} chart has {m} coordinates")

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def coords_and_differentials(self, F, Fp, directions):
        """Chart coordinates X (m, ...) and dX evaluated on each parameter direction."""
        i, j = self.index
        Fi, Fj = F[i], F[j]
        if self.chart == "affine":
            w = Fj / Fi
            dw = (Fp[j] * Fi - Fj * Fp[i]) / Fi**2
            X = np.stack([w.real, w.imag])
            dX = [np.stack([(dw * d).real, (dw * d).imag]) for d in directions]
            return X, dX
        N = np.abs(Fi) ** 2 + np.abs(Fj) ** 2
        c = np.conj(Fi) * Fj
        D = np.abs(Fj) ** 2 - np.abs(Fi) ** 2
        X = np.stack([2 * c.real / N, 2 * c.imag / N, D / N])
        dX = []
        for d in directions:
            dFi, dFj = Fp[i] * d, Fp[j] * d
            dc = np.conj(dFi) * Fj + np.conj(Fi) * dFj
            dN = 2 * (np.conj(Fi) * dFi + np.conj(Fj) * dFj).real
            dD = 2 * (np.conj(Fj) * dFj).real - 2 * (np.conj(Fi) * dFi).real
            dxy = 2 * dc / N - 2 * c * dN / N**2
            dX.append(np.stack([dxy.real, dxy.imag, dD / N - D * dN / N**2]))
        return X, dX

    def pair(self, X, dX) -> np.ndarray:
        """beta evaluated on one tangent vector."""
        return sum(_peval(P, X) * dX[m] for m, P in enumerate(self.coeffs))

    def exterior_derivative_pair(self, X, dXa, dXb) -> np.ndarray:
        """d beta evaluated on the tangent pair (a, b)."""
        out = np.zeros(X.shape[1:])
        for m in range(self.dim):
            for k in range(m + 1, self.dim):
                curl = _peval(_pderiv(self.coeffs[k], m), X) - _peval(_pderiv(self.coeffs[m], k), X)
                out = out + curl * (dXa[m] * dXb[k] - dXa[k] * dXb[m])
        return out


@dataclass(frozen=True)
class ClosednessReport:
    area_integral: float  # int_D f*(d beta)
    boundary_integral: float  # int_{dD} f*beta
    area: float
    length: float

    @property
    def stokes_residual(self) -> float:
        return abs(self.area_integral - self.boundary_integral)

    @property
    def normalized_defect(self) -> float:
        return abs(self.area_integral) / self.area


def _radial_nodes(rho: float, order: int = 32):
    """Composite Gauss-Legendre on geometrically graded panels of [0, rho]."""
    x, w = np.polynomial.legendre.leggauss(order)
    breaks = rho * np.array([0.0, 1 / 256, 1 / 64, 1 / 16, 1 / 4, 1 / 2, 1.0])
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def closedness_defect(f: PolyMap, beta: PolyOneForm, ntheta: int = 512, order: int = 32) -> ClosednessReport:
    """Both sides of Stokes' formula for f*beta on the domain disc, plus the
    normalized defect |int f*(d beta)| / area(f(D))."""
    where = "lengtharea.closedness_defect"
    rho = f.domain_radius
    r, wr = _radial_nodes(rho, order)
    t = 2 * np.pi * np.arange(ntheta) / ntheta
    z = r[:, None] * np.exp(1j * t)[None, :]
    F, Fp = f.values(z), f.derivative_values(z)
    if beta.chart == "affine":
        i = beta.index[0]
        ci = f.coeffs[i]
        if not np.any(ci) or np.any(np.abs(companion_roots(ci)) <= rho * (1 + 1e-12)):
            raise PreconditionError(where, f"image leaves the chart z{i} != 0")
    elif f.target_dim != 1:
        raise PreconditionError(where, "the sphere chart is defined on P^1 only")
    X, (dx, dy) = beta.coords_and_differentials(F, Fp, (1.0, 1j))
    dA = wr[:, None] * r[:, None] * (2 * np.pi / ntheta)
    area_integral = float(np.sum(beta.exterior_derivative_pair(X, dx, dy) * dA))
    area = float(np.sum(f.deriv_norm(z) ** 2 * dA))

    zb = rho * np.exp(1j * t)
    Fb, Fpb = f.values(zb), f.derivative_values(zb)
    if beta.chart == "affine" and np.any(np.abs(Fb[beta.index[0]]) <= 1e-8 * np.sqrt(np.sum(np.abs(Fb) ** 2, axis=0))):
        raise PreconditionError(where, "boundary image leaves the chart")
    Xb, (dXb,) = beta.coords_and_differentials(Fb, Fpb, (1j * zb,))
    boundary_integral = float(np.sum(beta.pair(Xb, dXb)) * 2 * np.pi / ntheta)
    length = float(np.sum(f.deriv_norm(zb)) * rho * 2 * np.pi / ntheta)
    return ClosednessReport(area_integral, boundary_integral, area, length)
