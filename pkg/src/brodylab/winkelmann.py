"""Discs f_n(z) = q + (nz, lambda n z) on a dense line of the torus C^2/(Z+iZ)^2.

The torus is blown up at p = [0].  Near p the blow-up is modelled by a chart
of radius r0 in which the metric is the flat one plus the Fubini-Study
pullback of the direction w = zeta_2 / zeta_1, zeta being the displacement
from the nearest lattice point.  Along the disc zeta' = n (1, lambda), so

    |w'| / (1 + |w|^2) = n |lambda zeta_1 - zeta_2| / |zeta|^2,

and the numerator is a constant offset per lattice translate.  Discs that
narrowly miss p get a large lifted derivative there, which pulls the Brody
basepoint toward the exceptional divisor as n grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .brody import maximize_on_disc
from .complexgeom import torus_reals, torus_reduce_arrays
from .errors import PreconditionError
from .lengtharea import Cell, EmpiricalCurrent, current_from_samples

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
CHART_RADIUS = 0.2
MAX_DENOMINATOR = 10**6
IRRATIONAL_TOL = 64 * np.finfo(float).eps
N_SEEDS = 8


def _is_rational(x: float) -> bool:
    fr = Fraction(x).limit_denominator(MAX_DENOMINATOR)
    return abs(x - fr.numerator / fr.denominator) <= IRRATIONAL_TOL * max(1.0, abs(x))


def _gauss_round(v):
    return np.floor(np.real(v) + 0.5) + 1j * np.floor(np.imag(v) + 0.5)


@dataclass(frozen=True)
class LineDiscScenario:
    n: int
    slope: float = GOLDEN
    offset: tuple[complex, complex] = (0j, 0j)
    chart_radius: float = CHART_RADIUS
    fs_enabled: bool = True

    def __post_init__(self):
        where = "winkelmann.LineDiscScenario"
        if int(self.n) != self.n or self.n < 1:
            raise PreconditionError(where, f"n must be a positive integer, got {self.n}")
        if not math.isfinite(self.slope) or _is_rational(self.slope):
            raise PreconditionError(where, f"slope {self.slope!r} is rational to working precision")
        if not 0 < self.chart_radius < 0.5:
            raise PreconditionError(where, "chart radius must lie in (0, 0.5)")
        object.__setattr__(self, "offset", (complex(self.offset[0]), complex(self.offset[1])))

    @property
    def flat_speed(self) -> float:
        return self.n * math.sqrt(1 + self.slope**2)

    @property
    def flat_area(self) -> float:
        return math.pi * self.flat_speed**2

    def ambient(self, z):
        """Unreduced point (q1 + nz, q2 + lambda n z) of C^2."""
        z = np.asarray(z, dtype=complex)
        return self.offset[0] + self.n * z, self.offset[1] + (self.slope * self.n) * z


def line_disc(s: LineDiscScenario, z) -> tuple[np.ndarray, np.ndarray]:
    """Torus image of z: fundamental-domain reals (4, ...) and flat distance to p."""
    return torus_reduce_arrays(*s.ambient(z))


def lift_deriv_norm(s: LineDiscScenario, z) -> np.ndarray | float:
    """Derivative norm of the lifted disc: sqrt(flat^2 + fs^2), fs = 0 outside the chart."""
    z = np.asarray(z, dtype=complex)
    flat = s.flat_speed
    if not s.fs_enabled:
        out = np.full(z.shape, flat)
        return float(out) if out.ndim == 0 else out
    a1, a2 = s.ambient(z)
    m1, m2 = _gauss_round(a1), _gauss_round(a2)
    zeta1, zeta2 = a1 - m1, a2 - m2
    r2 = np.abs(zeta1) ** 2 + np.abs(zeta2) ** 2
    # constant along the disc for a fixed translate; exactly 0 when the disc passes through p
    off = np.abs(s.slope * (s.offset[0] - m1) - (s.offset[1] - m2))
    inside = (r2 < s.chart_radius**2) & (off > 0)
    fs = np.zeros(z.shape)
    fs[inside] = s.n * off[inside] / r2[inside]
    out = np.sqrt(flat**2 + fs**2)
    return float(out) if out.ndim == 0 else out


# --- equidistribution -------------------------------------------------------------

PLANE_NAMES = ("Re z1", "Im z1", "Re z2", "Im z2")


def torus_box_cells(k: int, plane: tuple[int, int] = (0, 2)) -> list[Cell]:
    """k x k boxes of [0,1)^2 in two of the four real torus coordinates."""
    i, j = plane
    cells = []
    for a in range(k):
        for b in range(k):
            def pred(X, a=a, b=b):
                return (np.floor(X[i] * k) == a) & (np.floor(X[j] * k) == b)
            cells.append(Cell(f"box{a}_{b}", pred))
    return cells


@dataclass
class EquidistributionReport:
    n: int
    k: int
    plane: tuple[int, int]
    current: EmpiricalCurrent = field(repr=False)
    masses: np.ndarray  # k x k

    @property
    def max_relative_deviation(self) -> float:
        u = 1.0 / self.k**2
        return float(np.max(np.abs(self.masses - u)) / u)


def default_resolution(n: int) -> int:
    """Grid points per unit of the parameter: at least 8 per torus period, coprime to n."""
    m = 8 * n + 1
    while math.gcd(m, n) != 1:
        m += 1
    return max(m, 64)


def _half_disc_area(t):
    """Integral of sqrt(1 - x^2) over [-1, t]."""
    t = np.clip(t, -1.0, 1.0)
    return 0.5 * (t * np.sqrt(1 - t * t) + np.arcsin(t) + 0.5 * math.pi)


def _lower_left_area(X, Y):
    """Area of the unit disc within x <= X, y <= Y (broadcasting)."""
    X, Y = np.clip(X, -1.0, 1.0), np.clip(Y, -1.0, 1.0)

    def upper(X, Y):  # Y >= 0: all of x <= X minus the cap above Y
        c = np.sqrt(1 - Y * Y)
        u = np.clip(X, -c, c)
        return 2 * _half_disc_area(X) - (_half_disc_area(u) - _half_disc_area(-c) - Y * (u + c))

    return np.where(Y >= 0, upper(X, np.abs(Y)), 2 * _half_disc_area(X) - upper(X, np.abs(Y)))


def _coordinate(s: LineDiscScenario, c: int) -> tuple[int, float, float]:
    """Torus coordinate c as b + a u with u = Re z (var 0) or Im z (var 1)."""
    q = s.offset[c // 2]
    b = q.real if c % 2 == 0 else q.imag
    a = s.n * (1.0 if c < 2 else s.slope)
    return c % 2, a, b


def _box_pieces(a: float, b: float, k: int, extra=()) -> tuple[np.ndarray, np.ndarray]:
    """Edges in [-1, 1] where floor(k frac(b + a u)) changes, and the box index on each piece."""
    lo, hi = sorted((b - a, b + a))
    m = np.arange(math.floor(k * lo) + 1, math.ceil(k * hi))
    cuts = np.concatenate([(m / k - b) / a, np.asarray(extra, dtype=float)])
    edges = np.unique(np.concatenate([[-1.0], cuts[(cuts > -1) & (cuts < 1)], [1.0]]))
    mid = 0.5 * (edges[:-1] + edges[1:])
    return edges, np.floor(((b + a * mid) % 1.0) * k).astype(int) % k


def _exact_box_masses(s: LineDiscScenario, k: int, plane: tuple[int, int]) -> np.ndarray:
    """Box masses in closed form.

    Every torus coordinate is affine in Re z or in Im z alone.  If both
    coordinates of the plane use the same variable the masses are chord
    integrals of the disc; otherwise they are areas of disc-rectangle
    intersections.
    """
    (vi, ai, bi), (vj, aj, bj) = _coordinate(s, plane[0]), _coordinate(s, plane[1])
    out = np.zeros((k, k))
    if vi == vj:
        ei, _ = _box_pieces(ai, bi, k)
        edges, box_j = _box_pieces(aj, bj, k, extra=ei)
        mid = 0.5 * (edges[:-1] + edges[1:])
        box_i = np.floor(((bi + ai * mid) % 1.0) * k).astype(int) % k
        w = 2 * np.diff(_half_disc_area(edges))
        np.add.at(out, (box_i, box_j), w)
    else:
        ei, box_i = _box_pieces(ai, bi, k)
        ej, box_j = _box_pieces(aj, bj, k)
        ex, ey = (ei, ej) if vi == 0 else (ej, ei)
        F = _lower_left_area(ex[:, None], ey[None, :])
        rect = F[1:, 1:] - F[:-1, 1:] - F[1:, :-1] + F[:-1, :-1]
        if vi != 0:
            rect = rect.T
        np.add.at(out, (box_i[:, None], box_j[None, :]), np.maximum(rect, 0.0))
    return out / out.sum()


def equidistribution_report(s: LineDiscScenario, k: int = 4, plane: tuple[int, int] = (0, 2),
                            method: str = "exact", per_unit: int | None = None,
                            chunk_rows: int = 256) -> EquidistributionReport:
    """Normalized flat area of f_n(D) in each of k x k torus boxes.

    ``method="exact"`` integrates the box indicators in closed form;
    ``method="grid"`` sums a midpoint rule on a square parameter grid with
    ``per_unit`` points per unit length through lengtharea's current builder.
    """
    where = "winkelmann.equidistribution_report"
    if k < 2:
        raise PreconditionError(where, f"k must be >= 2, got {k}")
    if len(set(plane)) != 2 or not set(plane) <= {0, 1, 2, 3}:
        raise PreconditionError(where, f"bad plane {plane}")
    cells = torus_box_cells(k, plane)
    names = [c.name for c in cells] + ["complement"]
    l_n = 2 * math.pi * s.flat_speed
    if method == "exact":
        masses = _exact_box_masses(s, k, tuple(plane))
        current = EmpiricalCurrent(names, np.append(masses.ravel(), 0.0), s.flat_area, l_n)
        return EquidistributionReport(s.n, k, tuple(plane), current, masses)
    if method != "grid":
        raise PreconditionError(where, f"unknown method {method!r}")
    m = per_unit or default_resolution(s.n)
    h = 1.0 / m
    x = (np.arange(-m, m) + 0.5) * h
    acc = np.zeros(k * k + 1)
    total = 0.0
    w_cell = s.flat_speed**2 * h * h
    for start in range(0, len(x), chunk_rows):
        y = x[start:start + chunk_rows]
        Z = x[None, :] + 1j * y[:, None]
        Z = Z[np.abs(Z) < 1]
        if Z.size == 0:
            continue
        X = torus_reals(*s.ambient(Z))
        X = X - np.floor(X)
        w = np.full(Z.shape, w_cell)
        cur = current_from_samples(X, w, cells, w.sum(), 0.0)
        acc += cur.masses * w.sum()
        total += w.sum()
    current = EmpiricalCurrent(names, acc / total, total, l_n)
    return EquidistributionReport(s.n, k, tuple(plane), current, current.masses[:-1].reshape(k, k))


# --- Brody basepoint migration ---------------------------------------------------------


def near_miss_seeds(s: LineDiscScenario, count: int = N_SEEDS) -> list[tuple[complex, float]]:
    """Closest approaches of the disc to lattice translates of p, best first.

    For a translate m the displacement is A + nz(1, lambda) with A = q - m;
    its modulus is smallest at z* = -(A1 + lambda A2) / (n (1 + lambda^2)),
    where it equals |lambda A1 - A2| / sqrt(1 + lambda^2).
    """
    lam, n = s.slope, s.n
    reach = n * (1 + lam**2) + 2
    q1, q2 = s.offset
    R = int(math.ceil(reach))
    g = np.arange(-R, R + 1)
    M1 = (g[:, None] + 1j * g[None, :]).ravel() + _gauss_round(q1)
    A1 = q1 - M1
    keep = np.abs(A1) <= reach
    A1 = A1[keep]
    A2 = q2 - _gauss_round(q2 - lam * A1)
    zstar = -(A1 + lam * A2) / (n * (1 + lam**2))
    off = np.abs(lam * A1 - A2)
    dist = off / math.sqrt(1 + lam**2)
    ok = (np.abs(zstar) < 1) & (dist < s.chart_radius) & (off > 0)
    if not np.any(ok):
        return []
    zstar, off, dist = zstar[ok], off[ok], dist[ok]
    score = (1 - np.abs(zstar)) * n * off / dist**2
    best = np.argsort(-score)[:count]
    return [(complex(zstar[i]), float(max(dist[i] / n, 1e-12))) for i in best]


@dataclass(frozen=True)
class LocusRow:
    n: int
    argmax: complex
    dist_to_p: float
    lift_norm: float
    control_dist: float


@dataclass
class BrodyLocusReport:
    rows: list[LocusRow]

    @property
    def distances(self) -> list[float]:
        return [r.dist_to_p for r in self.rows]

    @property
    def running_min(self) -> list[float]:
        return list(np.minimum.accumulate(self.distances))

    @property
    def control_distances(self) -> list[float]:
        return [r.control_dist for r in self.rows]


def brody_locus_report(ladder: Sequence[int], slope: float = GOLDEN,
                       offset: tuple[complex, complex] = (0.5 + 0.25j, 0.25 + 0.5j),
                       chart_radius: float = CHART_RADIUS) -> BrodyLocusReport:
    """Maximize delta(z) * lifted derivative for each n and locate the maximizer on the torus.

    The control run uses the same disc with the chart term switched off.
    """
    ladder = [int(n) for n in ladder]
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise PreconditionError("winkelmann.brody_locus_report", "n ladder must increase")
    rows = []
    for n in ladder:
        s = LineDiscScenario(n, slope, offset, chart_radius, True)
        ctl = LineDiscScenario(n, slope, offset, chart_radius, False)
        m = maximize_on_disc(lambda z, s=s: lift_deriv_norm(s, z), 1.0, seeds=near_miss_seeds(s))
        mc = maximize_on_disc(lambda z, s=ctl: lift_deriv_norm(s, z), 1.0)
        _, d = line_disc(s, m.point)
        _, dc = line_disc(ctl, mc.point)
        rows.append(LocusRow(n, m.point, float(d), float(lift_deriv_norm(s, m.point)), float(dc)))
    return BrodyLocusReport(rows)
