"""Brody reparametrization of disc maps.

For f on the disc of radius rho the objective (rho - |z|) ||f'(z)|| vanishes
on the boundary, so it has an interior maximum a.  Rescaling by
r(z) = a + z / ||f'(a)|| on the disc of radius R = delta(a) ||f'(a)|| / 2
gives a map with unit derivative at 0 and derivative at most 2 on its whole
domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .complexgeom import fs_distance_arrays
from .errors import InvariantViolation, PreconditionError
from .holomap import AffineReparam, PolyMap, deriv_norm_at, polar_grid, reparametrize

COARSE_GRID = 64
REFINE_ROUNDS = 40
SHRINK = 1.0 / 3.0
STEP_RTOL = 1e-14
TIE_RTOL = 1e-10
POS_TOL = 1e-6
N_CANDIDATES = 8
SUP_GRID = (128, 64)
CAUCHY_GRID = (33, 64)

_STENCIL = np.array([dx + 1j * dy for dy in (-1, 0, 1) for dx in (-1, 0, 1)])


@dataclass(frozen=True)
class Maximum:
    point: complex
    value: float


def _objective(norm: Callable, radius: float, z: np.ndarray) -> np.ndarray:
    delta = radius - np.abs(z)
    out = np.full(z.shape, -np.inf)
    inside = delta >= 0
    if np.any(inside):
        out[inside] = delta[inside] * norm(z[inside])
    return out


def _angle(z: complex) -> float:
    t = float(np.angle(z)) % (2 * np.pi)
    return 0.0 if t > 2 * np.pi - POS_TOL else t


def _better(v, z, best_v, best_z, radius) -> bool:
    """Strictly larger value; near-ties go to smaller |z|, then smaller arg z."""
    if v > best_v * (1 + TIE_RTOL):
        return True
    if v < best_v * (1 - TIE_RTOL):
        return False
    dr = abs(z) - abs(best_z)
    if abs(dr) > POS_TOL * radius:
        return dr < 0
    return _angle(z) < _angle(best_z) - POS_TOL


def _refine(norm, radius, z, v, h):
    """Shrinking 9-point stencil search, run for all starting points at once."""
    z, v, h = z.copy(), v.copy(), h.copy()
    for _ in range(REFINE_ROUNDS):
        pts = z[:, None] + h[:, None] * _STENCIL[None, :]
        vals = _objective(norm, radius, pts)
        k = np.argmax(vals, axis=1)
        cand = vals[np.arange(len(z)), k]
        move = cand > v * (1 + STEP_RTOL)
        z[move] = pts[move, k[move]]
        v[move] = cand[move]
        h *= SHRINK
    return z, v


def maximize_on_disc(
    norm: Callable[[np.ndarray], np.ndarray],
    radius: float = 1.0,
    seeds: Iterable[tuple[complex, float]] = (),
    n_candidates: int = N_CANDIDATES,
) -> Maximum:
    """Maximize delta(z) * norm(z) over the disc |z| < radius.

    ``norm`` must accept an array of points.  A 64x64 polar grid supplies
    candidates; the best few (plus any ``(point, step)`` seeds) are refined
    by a shrinking 9-point stencil.
    """
    grid = polar_grid(radius, COARSE_GRID, COARSE_GRID, include_origin=False)
    grid = np.concatenate([[0j], grid[:-1].ravel()])  # drop the boundary circle
    vals = _objective(norm, radius, grid)
    top = np.max(vals)
    level = np.round(vals / top / TIE_RTOL) if top > 0 else vals
    order = np.lexsort((np.angle(grid) % (2 * np.pi), np.abs(grid), -level))[:n_candidates]
    dr = radius / COARSE_GRID
    starts = [
        (complex(grid[k]), float(vals[k]), max(dr, abs(grid[k]) * 2 * np.pi / COARSE_GRID))
        for k in order
    ]
    for z, h in seeds:
        starts.append((complex(z), float(_objective(norm, radius, np.array([z]))[0]), float(h)))
    starts = [st for st in starts if np.isfinite(st[1])]
    z0, v0, h0 = (np.array(col) for col in zip(*starts))
    zs, vs = _refine(norm, radius, z0.astype(complex), v0.astype(float), h0.astype(float))

    best_z, best_v = complex(grid[order[0]]), float(vals[order[0]])
    for z, v in zip(zs, vs):
        if _better(v, z, best_v, best_z, radius):
            best_z, best_v = complex(z), float(v)
    return Maximum(best_z, best_v)


def extremal_point(f: PolyMap) -> tuple[complex, float]:
    """Interior maximizer a of delta(z) ||f'(z)|| and the maximal value."""
    m = maximize_on_disc(f.deriv_norm, f.domain_radius)
    if not m.value > 0:
        raise PreconditionError("brody.extremal_point", "derivative vanishes identically: constant map")
    return m.point, m.value


@dataclass(frozen=True)
class BrodyReport:
    basepoint: complex
    scale: float
    rescaled_domain_radius: float
    sup_deriv_on_rescaled: float
    deriv_at_zero: float

    def check(self, tol: float = 1e-6) -> None:
        if abs(self.deriv_at_zero - 1) > tol:
            raise InvariantViolation("brody.brody_step", f"||g'(0)|| = {self.deriv_at_zero!r} != 1")
        if self.sup_deriv_on_rescaled > 2 + tol:
            raise InvariantViolation("brody.brody_step", f"sup ||g'|| = {self.sup_deriv_on_rescaled!r} > 2")


def brody_step(f: PolyMap) -> tuple[PolyMap, BrodyReport]:
    a, value = extremal_point(f)
    speed = deriv_norm_at(f, a)
    delta = f.domain_radius - abs(a)
    R = delta * speed / 2
    g = reparametrize(f, AffineReparam(a, 1.0 / speed), R)
    sup = float(np.max(g.deriv_norm(polar_grid(R, *SUP_GRID))))
    return g, BrodyReport(a, 1.0 / speed, R, sup, deriv_norm_at(g, 0))


@dataclass
class BrodySequence:
    reports: list[BrodyReport]
    maps: list[PolyMap] = field(repr=False)
    cauchy_defects: list[float]  # entry k compares g_k with g_{k+1}
    cauchy_radii: list[float]


def cauchy_defect(g: PolyMap, h: PolyMap, radius: float = 1.0) -> float:
    """sup over a polar grid of |z| <= radius of the FS distance between g(z) and h(z)."""
    z = polar_grid(radius, *CAUCHY_GRID)
    return float(np.max(fs_distance_arrays(g.values(z), h.values(z))))


def brody_sequence(f_seq: Sequence[PolyMap]) -> BrodySequence:
    """Rescale every map and measure the Cauchy defect between consecutive rescalings.

    The comparison grid is |z| <= 1, shrunk to the smaller rescaled domain
    when one of the pair has R < 1.
    """
    reports, maps = [], []
    for i, f in enumerate(f_seq):
        try:
            g, rep = brody_step(f)
        except PreconditionError as exc:
            raise PreconditionError("brody.brody_sequence", f"member {i}: {exc}") from exc
        reports.append(rep)
        maps.append(g)
    defects, radii = [], []
    for g, h, rg, rh in zip(maps, maps[1:], reports, reports[1:]):
        rad = min(1.0, rg.rescaled_domain_radius, rh.rescaled_domain_radius)
        defects.append(cauchy_defect(g, h, rad))
        radii.append(rad)
    return BrodySequence(reports, maps, defects, radii)
