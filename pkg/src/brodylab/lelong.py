"""Areas of parametrized curves inside Euclidean balls of C^n.

For gamma a polynomial map C -> C^n through the origin, a(r) is the area of
gamma(z) over the parameter set {|gamma(z)| <= r} counted with parametrized
multiplicity.  a(r)/r^2 is nondecreasing and tends to at least pi, so the
part of the curve in B(0, eps) has area at least pi eps^2.

Quadrature is exact in the radial parameter: along each ray z = s e^{it},
|gamma|^2 - r^2 is a real polynomial in s, its real roots cut the ray into
the intervals inside the ball, and the density sum_k |gamma_k'|^2 s is a
polynomial in s integrated by Gauss-Legendre of sufficient order.  Only the
angular integral (periodic, smooth) is approximated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvariantViolation, PreconditionError

P = np.polynomial.polynomial
DEFAULT_NTHETA = 512
MONOTONE_RTOL = 1e-4


@dataclass(frozen=True, eq=False)
class BallCurve:
    """Polynomial curve gamma: C -> C^n with the ball B(0, eps) it is studied in.

    ``param_radius`` bounds the parameter disc; |gamma| must exceed eps on its
    boundary circle, the desk-scale stand-in for properness.  When omitted it
    is found by doubling from 1.
    """

    components: tuple
    ball_radius: float = 1.0
    through_origin: bool = True
    param_radius: float | None = None
    _C: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        where = "lelong.BallCurve"
        comps = [np.atleast_1d(np.asarray(c, dtype=complex)) for c in self.components]
        if not comps:
            raise PreconditionError(where, "need at least one component")
        d = max(len(c) for c in comps)
        C = np.zeros((len(comps), d), dtype=complex)
        for k, c in enumerate(comps):
            C[k, : len(c)] = c
        if not self.ball_radius > 0:
            raise PreconditionError(where, f"ball radius must be positive, got {self.ball_radius}")
        if self.through_origin and np.any(np.abs(C[:, 0]) > 1e-14 * max(1.0, np.abs(C).max())):
            raise PreconditionError(where, "gamma(0) != 0 although the curve is flagged through the origin")
        if np.all(np.abs(C[:, 1:]) == 0):
            raise PreconditionError(where, "constant curve")
        object.__setattr__(self, "_C", C)
        object.__setattr__(self, "components", tuple(comps))
        rho = self.param_radius
        if rho is None:
            rho = 1.0
            while self._boundary_min(rho) <= self.ball_radius:
                rho *= 2
                if rho > 2**30:
                    raise PreconditionError(where, "curve does not leave the ball")
        elif self._boundary_min(rho) <= self.ball_radius:
            raise PreconditionError(where, f"|gamma| <= eps somewhere on |z| = {rho}; not proper there")
        object.__setattr__(self, "param_radius", float(rho))

    def _boundary_min(self, rho: float, n: int = 1024) -> float:
        z = rho * np.exp(2j * np.pi * np.arange(n) / n)
        return float(np.min(np.sqrt(np.sum(np.abs(self(z)) ** 2, axis=0))))

    @property
    def coeffs(self) -> np.ndarray:
        return self._C

    @property
    def degree(self) -> int:
        return self._C.shape[1] - 1

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros((self._C.shape[0],) + z.shape, dtype=complex)
        for k in range(self._C.shape[1] - 1, -1, -1):
            out = out * z + self._C[:, k].reshape((-1,) + (1,) * z.ndim)
        return out

    def transformed(self, U: np.ndarray) -> "BallCurve":
        """Image under a linear map of C^n (used with unitary U)."""
        return BallCurve(tuple(U @ self._C), self.ball_radius, self.through_origin, self.param_radius)


def _ray_polys(C: np.ndarray, theta: float):
    """|gamma(s e^{it})|^2 and the area density along the ray, as real polynomials in s."""
    rot = np.exp(1j * theta * np.arange(C.shape[1]))
    Ct = C * rot
    Dt = Ct[:, 1:] * np.arange(1, C.shape[1])
    mod2 = np.zeros(1)
    dens = np.zeros(1)
    for row in Ct:
        mod2 = P.polyadd(mod2, P.polyadd(P.polymul(row.real, row.real), P.polymul(row.imag, row.imag)))
    for row in Dt:
        dens = P.polyadd(dens, P.polyadd(P.polymul(row.real, row.real), P.polymul(row.imag, row.imag)))
    return mod2, P.polymul(dens, [0.0, 1.0])


def _inside_intervals(mod2: np.ndarray, r: float, smax: float) -> list[tuple[float, float]]:
    q = mod2.copy()
    q[0] -= r * r
    roots = P.polyroots(q) if len(np.trim_zeros(q, "b")) > 1 else np.array([])
    scale = max(1.0, smax)
    real = np.sort([x.real for x in roots if abs(x.imag) <= 1e-9 * scale and 0 < x.real < smax])
    cuts = np.concatenate([[0.0], real, [smax]])
    out = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 0:
            continue
        if P.polyval(0.5 * (a + b), q) <= 0:
            out.append((a, b))
    return out


def area_in_ball(c: BallCurve, r: float, ntheta: int = DEFAULT_NTHETA) -> float:
    """Euclidean area of gamma over the parameter set where |gamma| <= r."""
    if not 0 < r <= c.ball_radius * (1 + 1e-12):
        raise PreconditionError("lelong.area_in_ball", f"r={r} outside (0, {c.ball_radius}]")
    order = c.degree + 2
    x, w = np.polynomial.legendre.leggauss(order)
    total = 0.0
    for t in 2 * np.pi * np.arange(ntheta) / ntheta:
        mod2, dens = _ray_polys(c.coeffs, t)
        for a, b in _inside_intervals(mod2, r, c.param_radius):
            s = 0.5 * (b - a) * x + 0.5 * (a + b)
            total += 0.5 * (b - a) * float(np.dot(w, P.polyval(s, dens)))
    return total * 2 * np.pi / ntheta


def monotonicity_profile(c: BallCurve, radii: Sequence[float], ntheta: int = DEFAULT_NTHETA) -> np.ndarray:
    """a(r)/r^2 on an increasing grid of radii in (0, eps]."""
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0):
        raise PreconditionError("lelong.monotonicity_profile", "radii must increase")
    return np.array([area_in_ball(c, r, ntheta) / r**2 for r in radii])


def check_monotone(profile: np.ndarray, rtol: float = MONOTONE_RTOL) -> None:
    drops = profile[:-1] - profile[1:]
    worst = float(np.max(drops / profile[:-1])) if len(profile) > 1 else 0.0
    if worst > rtol:
        raise InvariantViolation("lelong.monotonicity_profile", f"a(r)/r^2 drops by {worst:.3g} relative")


def lelong_bound_check(c: BallCurve, ntheta: int = DEFAULT_NTHETA) -> float:
    """area(C within B(0, eps)) / (pi eps^2); at least 1 for curves through 0."""
    if not c.through_origin:
        raise PreconditionError("lelong.lelong_bound_check", "curve is not flagged as passing through 0")
    eps = c.ball_radius
    return area_in_ball(c, eps, ntheta) / (np.pi * eps**2)
