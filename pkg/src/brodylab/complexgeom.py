"""Target geometries: projective space with the Fubini-Study metric, the
square torus C^2/(Z+iZ)^2, and a chart model of its blow-up at the origin.

The Fubini-Study metric is normalized so that a projective line has area pi,
i.e. on the affine chart w of P^1 it reads |dw| / (1 + |w|^2).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegeneracyError

_ZERO_TOL = 1e-300


def normalize_projective(coords, where: str = "complexgeom.normalize") -> np.ndarray:
    """Divide by the coordinate of largest modulus (lowest index on ties)."""
    v = np.asarray(coords, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    if abs(v[k]) <= _ZERO_TOL:
        raise DegeneracyError(where, "all homogeneous coordinates vanish")
    out = v / v[k]
    out[k] = 1.0
    return out


@dataclass(frozen=True, eq=False)
class ProjPoint:
    """A point of P^n stored in normalized homogeneous coordinates."""

    coords: np.ndarray

    def __post_init__(self):
        c = normalize_projective(self.coords, "complexgeom.ProjPoint")
        c.flags.writeable = False
        object.__setattr__(self, "coords", c)

    @property
    def dim(self) -> int:
        return len(self.coords) - 1

    def __len__(self):
        return len(self.coords)

    def __eq__(self, other):
        if not isinstance(other, ProjPoint):
            return NotImplemented
        return len(self) == len(other) and fs_distance(self, other) < 1e-12

    def __hash__(self):
        return hash(tuple(np.round(self.coords, 12)))

    def __repr__(self):
        body = ":".join(f"{c:.6g}" for c in self.coords)
        return f"ProjPoint([{body}])"


@lru_cache(maxsize=None)
def _pairs(n: int):
    return np.triu_indices(n, k=1)


def _wedge_sq(F: np.ndarray, G: np.ndarray) -> np.ndarray:
    """|F ^ G|^2 summed over coordinate pairs (Lagrange identity, no cancellation)."""
    i, j = _pairs(F.shape[0])
    w = F[i] * G[j] - F[j] * G[i]
    return np.sum(w.real**2 + w.imag**2, axis=0)


def fs_deriv_norm(F, Fp) -> np.ndarray | float:
    """Fubini-Study norm of the derivative of the projectivized lift.

    ``F`` and ``Fp`` hold the lift and its derivative along axis 0; any
    trailing axes are broadcast, so a whole grid can be evaluated at once.
    Computes |F ^ F'| / |F|^2, which equals the square root of
    (|F|^2 |F'|^2 - |<F, F'>|^2) / |F|^4.
    """
    F = np.asarray(F, dtype=complex)
    Fp = np.asarray(Fp, dtype=complex)
    n2 = np.sum(F.real**2 + F.imag**2, axis=0)
    if np.any(n2 <= _ZERO_TOL):
        raise DegeneracyError("complexgeom.fs_deriv_norm", "zero lift vector")
    out = np.sqrt(_wedge_sq(F, Fp)) / n2
    return float(out) if np.ndim(out) == 0 else out


def fs_distance(p: ProjPoint, q: ProjPoint) -> float:
    """Geodesic distance arccos(|<P,Q>| / |P||Q|), evaluated via atan2 for accuracy near 0."""
    P = np.asarray(p.coords if isinstance(p, ProjPoint) else p, dtype=complex)
    Q = np.asarray(q.coords if isinstance(q, ProjPoint) else q, dtype=complex)
    return float(fs_distance_arrays(P, Q))


def fs_distance_arrays(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Vectorized distance between lifts stored along axis 0."""
    P = np.asarray(P, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    inner = np.abs(np.sum(np.conj(P) * Q, axis=0))
    sin = np.sqrt(_wedge_sq(P, Q))
    return np.arctan2(sin, inner)


# --- torus ----------------------------------------------------------------

_TRANSLATES = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=4)))


def _frac(x: np.ndarray) -> np.ndarray:
    r = x - np.floor(x)
    return np.where(r >= 1.0, 0.0, r)


@dataclass(frozen=True)
class TorusPoint:
    """Representative in [0,1)^2 + i[0,1)^2 of a point of C^2/(Z+iZ)^2."""

    z1: complex
    z2: complex

    @property
    def reals(self) -> tuple[float, float, float, float]:
        return (self.z1.real, self.z1.imag, self.z2.real, self.z2.imag)


def torus_reals(z1, z2) -> np.ndarray:
    """Stack (Re z1, Im z1, Re z2, Im z2) along a new leading axis."""
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    return np.stack([z1.real, z1.imag, z2.real, z2.imag])


def torus_reduce_arrays(z1, z2) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized reduction: fundamental-domain reals (4, ...) and flat distance to 0."""
    x = _frac(torus_reals(z1, z2))
    shape = x.shape[1:]
    flat = x.reshape(4, -1)
    best = np.full(flat.shape[1], np.inf)
    for t in _TRANSLATES:
        d2 = np.sum((flat - t[:, None]) ** 2, axis=0)
        np.minimum(best, d2, out=best)
    return x, np.sqrt(best).reshape(shape)


def torus_reduce(z) -> tuple[TorusPoint, float]:
    """Reduce a point of C^2 to the fundamental domain.

    Returns the representative and the flat distance from its class to the
    class of the origin, scanning the 81 nearest lattice translates.
    """
    z1, z2 = z
    x, d = torus_reduce_arrays(z1, z2)
    rep = TorusPoint(complex(x[0], x[1]), complex(x[2], x[3]))
    return rep, float(d)


def nearest_translate(z1, z2) -> tuple[np.ndarray, np.ndarray]:
    """Displacement (zeta1, zeta2) from the nearest lattice point to (z1, z2).

    This is the coordinate system centered at the blown-up point p = [0].
    """
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)

    def _center(v):
        return v - (np.floor(v.real + 0.5) + 1j * np.floor(v.imag + 0.5))

    return _center(z1), _center(z2)


@dataclass(frozen=True)
class BlowupChartPoint:
    """Point (u, w) of the blow-up chart; it sits over (u, u*w) in C^2.

    Points with u = 0 lie on the exceptional divisor, w being the direction.
    """

    u: complex
    w: complex

    @property
    def on_exceptional_divisor(self) -> bool:
        return self.u == 0

    def embedded(self) -> tuple[complex, complex]:
        return (self.u, self.u * self.w)

    @classmethod
    def from_displacement(cls, zeta1: complex, zeta2: complex, direction: complex | None = None):
        """Lift a displacement from p. At p itself a direction must be supplied."""
        if zeta1 != 0:
            return cls(zeta1, zeta2 / zeta1)
        if zeta2 != 0:
            raise DegeneracyError(
                "complexgeom.BlowupChartPoint", "direction is vertical; outside this chart"
            )
        if direction is None:
            raise DegeneracyError("complexgeom.BlowupChartPoint", "point p needs a direction")
        return cls(0j, complex(direction))
