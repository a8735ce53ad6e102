"""Iteration of equivariant maps: 2-cycles, the edge anchor Z, and the pentagon-hexagon edge.

All iteration happens on normalized homogeneous pairs; the affine chart is used
only for one-dimensional work on the real axis and for curve geometry.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.optimize import brentq

from .equivariants import EquivariantMap
from .group import ProjectivePoint, antipode_array, chordal, normalize

TOL = 1e-12
SNAP = 1e-6
MAX_ITER = 400


class NotFound(RuntimeError):
    pass


class Inconclusive(RuntimeError):
    pass


@dataclass(frozen=True)
class TwoCycle:
    p: ProjectivePoint
    q: ProjectivePoint

    def points(self) -> np.ndarray:
        return np.array([self.p.coords, self.q.coords])


@dataclass
class TrajectoryResult:
    limit: TwoCycle | None
    iterations: int
    history: list | None = None
    cycle: int = -1
    status: str = "converged"          # converged | stalled | maxiter


def iterate(m: EquivariantMap, p, n: int):
    """Apply m n times, renormalizing after each step."""
    single = isinstance(p, ProjectivePoint)
    P = p.coords if single else normalize(p)
    for _ in range(n):
        P = m.apply(P)
    return ProjectivePoint(*P) if single else P


def orbit_trace(m: EquivariantMap, p, n: int) -> np.ndarray:
    P = p.coords if isinstance(p, ProjectivePoint) else normalize(p)
    out = [P]
    for _ in range(n):
        P = m.apply(P)
        out.append(P)
    return np.array(out)


class CycleSet:
    """Known 2-cycles, stored as an array (n, 2, 2) of [p, m(p)]."""

    def __init__(self, cycles):
        self.cycles = normalize(np.asarray(cycles))
        self.points = self.cycles.reshape(-1, 2)

    def __len__(self):
        return len(self.cycles)

    @classmethod
    def antipodal(cls, orbit_points) -> CycleSet:
        """Pair each point of an antipodally closed set with its antipode."""
        P = normalize(orbit_points)
        partner = chordal(antipode_array(P)[:, None, :], P[None, :, :]).argmin(axis=1)
        seen, out = set(), []
        for k, j in enumerate(partner):
            if k not in seen:
                seen.update((k, int(j)))
                out.append([P[k], P[j]])
        return cls(np.array(out))

    def nearest(self, P):
        """(cycle index, distance) of the nearest cycle point to each row of P."""
        k, d = self.nearest_point(P)
        return k // 2, d

    def nearest_point(self, P):
        """(index into ``points``, distance) of the nearest cycle point."""
        d = chordal(np.asarray(P)[..., None, :], self.points)
        k = d.argmin(axis=-1)
        return k, np.take_along_axis(d, k[..., None], -1)[..., 0]

    def two_cycle(self, k: int) -> TwoCycle:
        return TwoCycle(ProjectivePoint(*self.cycles[k, 0]), ProjectivePoint(*self.cycles[k, 1]))


def converge_many(m: EquivariantMap, P0, cycles: CycleSet, max_iter: int = MAX_ITER,
                  tol: float = TOL, snap: float = SNAP, return_points: bool = False):
    """Vectorized cycle detection.

    Every second step a point is checked: within ``tol`` of a known cycle point
    it is done; if it moved less than ``tol`` since the previous check it has
    stalled on some 2-cycle, which is accepted only when a known cycle lies
    within ``snap``.  Returns (cycle index or -1, iterations, status codes) with
    status 0 converged, 1 stalled on an unknown cycle, 2 out of iterations; with
    ``return_points`` also the index of the cycle point reached at the last check.
    """
    P = normalize(P0).reshape(-1, 2)
    n = len(P)
    cyc = np.full(n, -1)
    pts = np.full(n, -1)
    iters = np.full(n, max_iter)
    status = np.full(n, 2)
    active = np.arange(n)
    prev = None
    for k in range(0, max_iter + 1, 2):
        pidx, dist = cycles.nearest_point(P)
        idx = pidx // 2
        hit = dist < tol
        if prev is not None:
            still = chordal(P, prev) < tol
            unknown = still & ~hit & (dist >= snap)
            hit = hit | (still & (dist < snap))
            status[active[unknown]] = 1
            iters[active[unknown]] = k
        cyc[active[hit]] = idx[hit]
        pts[active[hit]] = pidx[hit]
        iters[active[hit]] = k
        status[active[hit]] = 0
        keep = ~hit & (status[active] == 2)
        active, P = active[keep], P[keep]
        if active.size == 0 or k == max_iter:
            break
        prev = P
        P = m.apply(m.apply(P))
    if return_points:
        return cyc, iters, status, pts
    return cyc, iters, status


def converge_to_cycle(m: EquivariantMap, p0, cycles: CycleSet, max_iter: int = MAX_ITER,
                      tol: float = TOL, snap: float = SNAP,
                      record: bool = False) -> TrajectoryResult:
    P = p0.coords if isinstance(p0, ProjectivePoint) else np.asarray(p0)
    cyc, it, st = converge_many(m, P[None, :], cycles, max_iter, tol, snap)
    history = None
    if record:
        history = [ProjectivePoint(*q) for q in orbit_trace(m, P, int(it[0]))]
    status = ("converged", "stalled", "maxiter")[int(st[0])]
    limit = cycles.two_cycle(int(cyc[0])) if cyc[0] >= 0 else None
    return TrajectoryResult(limit, int(it[0]), history, int(cyc[0]), status)


# -- the edge anchor -------------------------------------------------------------------

def _real_map(m: EquivariantMap, t: float) -> float:
    return float(np.real(m.affine(t)))


def _multiplier(m: EquivariantMap, z) -> complex:
    w = complex(m.affine(z))
    return complex(m.affine_derivative(w) * m.affine_derivative(z))


@dataclass
class EdgeAnchor:
    value: float
    multiplier: float
    image: float
    residual: float
    bracket: tuple


def pentagon_radius(orbit_points) -> float:
    """Chart distance from vertex 0 to the nearest orbit point."""
    P = normalize(orbit_points)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.abs(P[:, 0] / P[:, 1])
    return float(np.nanmin(z))


def find_edge_anchor(g: EquivariantMap, orbit_points, bracket=None) -> EdgeAnchor:
    """Repelling real fixed point of g^2 between two adjacent pentagon vertices.

    The pentagon around vertex 0 has circumradius c and an edge crossing the
    positive real axis; the search interval is [c/2, c].
    """
    if bracket is None:
        c = pentagon_radius(orbit_points)
        bracket = (0.5 * c, c)

    def f(t):
        return _real_map(g, _real_map(g, t)) - t

    lo, hi = bracket
    if f(lo) * f(hi) > 0:
        raise NotFound(f"g^2 - id has no sign change on [{lo:.6g}, {hi:.6g}]")
    Z = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return EdgeAnchor(Z, _multiplier(g, Z).real, _real_map(g, Z), abs(f(Z)), (lo, hi))


# -- segment trajectories and the pentagon-hexagon edge -------------------------------

def segment_samples(Z: float, half_length: float, n: int = 600, depth: float = 12.0):
    """Vertical segment through Z, sampled geometrically toward Z from both ends."""
    t = half_length * 10.0 ** (-depth * np.linspace(0, 1, n))
    t = np.concatenate([-t, [0.0], t[::-1]])
    return Z + 1j * t


def affine(P) -> np.ndarray:
    P = normalize(P)
    with np.errstate(divide="ignore", invalid="ignore"):
        return P[:, 0] / P[:, 1]


@dataclass
class SegmentTrajectory:
    Z: float
    half_length: float
    polylines: list                 # affine images of the segment under g^0 .. g^k
    endpoint_limits: dict = field(default_factory=dict)

    @property
    def final(self) -> np.ndarray:
        return self.polylines[-1]


def segment_trajectory(g: EquivariantMap, Z: float, half_length: float, k: int,
                       n: int = 600) -> SegmentTrajectory:
    z = segment_samples(Z, half_length, n)
    P = normalize(np.stack([z, np.ones_like(z)], axis=-1))
    lines = [affine(P)]
    for _ in range(k):
        P = g.apply(P)
        lines.append(affine(P))
    return SegmentTrajectory(Z, half_length, lines)


def endpoint_limits(g: EquivariantMap, Z: float, half_length: float, cycles: CycleSet,
                    max_even: int = 100) -> dict:
    """Where the two ends Z +- i*half_length go under g^2."""
    out = {}
    for sign, key in ((1, "upper"), (-1, "lower")):
        p = np.array([Z + sign * 1j * half_length, 1])
        r = converge_to_cycle(g, p, cycles, 2 * max_even)
        out[key] = None if r.limit is None else complex(r.limit.p.z), r.iterations
    return out


def circle_through(a: complex, b: complex, c: complex):
    """Center and radius of the circle through three chart points."""
    ax, ay, bx, by, cx, cy = a.real, a.imag, b.real, b.imag, c.real, c.imag
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax ** 2 + ay ** 2) * (by - cy) + (bx ** 2 + by ** 2) * (cy - ay)
          + (cx ** 2 + cy ** 2) * (ay - by)) / d
    uy = ((ax ** 2 + ay ** 2) * (cx - bx) + (bx ** 2 + by ** 2) * (ax - cx)
          + (cx ** 2 + cy ** 2) * (bx - ax)) / d
    center = complex(ux, uy)
    return center, abs(a - center)


def arc_points(X: complex, Z: complex, Y: complex, n: int = 2000) -> np.ndarray:
    """The arc from X through Z to Y of the circle through the three points."""
    c, r = circle_through(X, Z, Y)
    tx, tz, ty = (cmath.phase(w - c) for w in (X, Z, Y))
    # pick the direction from X to Y that passes Z
    span = (ty - tx) % (2 * math.pi)
    if (tz - tx) % (2 * math.pi) > span:
        span -= 2 * math.pi
    t = tx + span * np.linspace(0, 1, n)
    return c + r * np.exp(1j * t)


def _point_to_polyline(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Distance from each point of A to the polyline through B."""
    a, b = B[:-1], B[1:]
    ab = b - a
    L = np.abs(ab) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.clip(((A[:, None] - a[None, :]) * np.conj(ab)[None, :]).real / L, 0, 1)
    t = np.where(L > 0, t, 0)
    return np.abs(A[:, None] - (a[None, :] + t * ab[None, :])).min(axis=1)


def hausdorff(A: np.ndarray, B: np.ndarray) -> float:
    """Hausdorff distance between two polylines in the chart."""
    A = A[np.isfinite(A)]
    B = B[np.isfinite(B)]
    return float(max(_point_to_polyline(A, B).max(), _point_to_polyline(B, A).max()))


def _settle_steps(g, Z, X, Y, half_length, max_even, settle) -> int:
    ends = np.array([[Z + 1j * half_length, 1], [Z - 1j * half_length, 1]])
    for k in range(1, max_even + 1):
        ends = g.apply(g.apply(ends))
        w = affine(ends)
        if all(min(abs(v - X), abs(v - Y)) < settle for v in w):
            return k
    raise NotFound(f"segment ends did not settle on X, Y within {max_even} even steps")


def edge_curve(g: EquivariantMap, Z: float, X: complex, Y: complex, half_length: float,
               max_even: int = 100, settle: float = 1e-12, ratio: float = 1.01,
               margin: float = 4.0) -> np.ndarray:
    """Approximant of the pentagon-hexagon edge: g^(2k) of the vertical segment through Z,
    with k the number of even steps the segment ends need to settle on X and Y.

    The segment is sampled geometrically toward Z, deep enough that after the
    expansion by |multiplier|^k the innermost samples still sit within
    10^-margin of Z, with successive samples differing by ``ratio``.
    """
    k = _settle_steps(g, Z, X, Y, half_length, max_even, settle)
    lam = abs(_multiplier(g, Z))
    depth = k * math.log10(lam) + margin
    n = int(math.ceil(depth / math.log10(ratio)))
    z = segment_samples(Z, half_length, n, depth)
    P = normalize(np.stack([z, np.ones_like(z)], axis=-1))
    for _ in range(k):
        P = g.apply(g.apply(P))
    return affine(P)


def edge_arc_distance(g, Z, X, Y, half_length, **kw) -> float:
    """Hausdorff distance between the edge approximant and the arc through X, Z, Y."""
    return hausdorff(edge_curve(g, Z, X, Y, half_length, **kw), arc_points(X, Z, Y))


def edge_tangent(curve: np.ndarray, end: complex, window=(1e-4, 1e-2)) -> complex:
    """Unit direction in which the curve leaves ``end``, from points at chart distance
    within ``window`` (scaled by the local size |end| + 1)."""
    d = np.abs(curve - end)
    s = abs(end) + 1
    sel = (d > window[0] * s) & (d < window[1] * s)
    if not sel.any():
        raise Inconclusive("no curve points in the tangent window")
    v = (curve[sel] - end) / d[sel]
    u = v.mean()
    return u / abs(u)


def vertex_angles(g: EquivariantMap, Z: float, X: complex, Y: complex, p: complex,
                  half_length: float = 1e-3) -> list[float]:
    """Gaps between the three edge directions at the orbit point p on the negative real axis.

    One edge runs along the real-axis mirror away from vertex 0; the other two are
    rotations by fifth-turns about 0 of the edge from Y through Z to X.
    """
    curve = edge_curve(g, Z, X, Y, half_length)
    tX, tY = edge_tangent(curve, X), edge_tangent(curve, Y)
    zeta = cmath.exp(2j * math.pi / 5)
    dirs = [cmath.phase(p / abs(p))]
    for end, t in ((X, tX), (Y, tY)):
        j = min(range(5), key=lambda j: abs(zeta ** j * end - p))
        dirs.append(cmath.phase(zeta ** j * t))
    dirs.sort()
    return [dirs[1] - dirs[0], dirs[2] - dirs[1], 2 * math.pi - (dirs[2] - dirs[0])]


# -- local degree -------------------------------------------------------------------

def _mp_apply(m: EquivariantMap, x, y):
    u, v = m.evaluate(x, y)
    s = u if abs(u) >= abs(v) else v
    return u / s, v / s


def _mp_chordal(p, q):
    num = abs(p[0] * q[1] - p[1] * q[0])
    den = mpmath.sqrt((abs(p[0]) ** 2 + abs(p[1]) ** 2) * (abs(q[0]) ** 2 + abs(q[1]) ** 2))
    return num / den


def local_degree(m: EquivariantMap, p, period: int = 1, radii=None, dps: int = 60,
                 angles: int = 3, fit_tol: float = 0.05) -> int:
    """Local degree of m^period at p, from the log-log slope of image distance
    against displacement over shrinking circles around p."""
    P = p.coords if isinstance(p, ProjectivePoint) else normalize(np.asarray(p))
    radii = np.logspace(-3, -6, 7) if radii is None else np.asarray(radii)
    while True:
        with mpmath.workdps(dps):
            x0, y0 = mpmath.mpc(complex(P[0])), mpmath.mpc(complex(P[1]))
            base = (x0, y0)
            for _ in range(period):
                base = _mp_apply(m, *base)
            logs, floor = [], mpmath.mpf(10) ** (-(dps - 10))
            too_small = False
            for a in range(angles):
                rot = mpmath.expj(2 * mpmath.pi * (a + 0.25) / angles)
                row = []
                for r in radii:
                    # displace in the chart where p is finite
                    if abs(y0) >= abs(x0):
                        q = (x0 + r * rot * y0, y0)
                    else:
                        q = (x0, y0 + r * rot * x0)
                    for _ in range(period):
                        q = _mp_apply(m, *q)
                    d = _mp_chordal(q, base)
                    too_small |= d < floor
                    row.append(float(mpmath.log10(d)) if d > 0 else -np.inf)
                logs.append(row)
        if too_small:
            if dps > 2000:
                raise Inconclusive("image distances underflow the working precision")
            dps *= 3
            continue
        break
    lr = np.log10(radii)
    slopes = []
    for row in logs:
        coef = np.polyfit(lr, row, 1)
        resid = np.abs(np.polyval(coef, lr) - row).max()
        if resid > fit_tol:
            raise Inconclusive(f"log-log fit residual {resid:.3f} exceeds {fit_tol}")
        slopes.append(coef[0])
    s = float(np.mean(slopes))
    k = round(s)
    if abs(s - k) > 0.1 or k < 1:
        raise Inconclusive(f"slope {s:.3f} is not near an integer")
    return k


def critical_multiplicity(m: EquivariantMap, p, **kw) -> int:
    return local_degree(m, p, 1, **kw) - 1


def spherical_derivative(m: EquivariantMap, z) -> np.ndarray:
    """|m'(z)| (1 + |z|^2) / (1 + |m(z)|^2)."""
    z = np.asarray(z, dtype=np.complex128)
    w = m.affine(z)
    return np.abs(m.affine_derivative(z)) * (1 + np.abs(z) ** 2) / (1 + np.abs(w) ** 2)
