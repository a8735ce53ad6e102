"""The icosahedral action on the Riemann sphere.

Coordinates follow the invariant F = xy(x^10 - 11 x^5 y^5 - y^10): vertices at
0 and infinity, the real axis a mirror, and the antipode of z equal to -1/conj(z)
(standard stereographic model).  Points are homogeneous pairs; infinity is
(1, 0) and is never special-cased.
"""

from __future__ import annotations

import cmath
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .forms import BivariateForm, canonical

DEFAULT_TOL = 1e-10


class ClosureOverflow(RuntimeError):
    pass


class RootFindingFailure(RuntimeError):
    pass


# -- points -----------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectivePoint:
    """Point of CP^1; the larger-modulus coordinate is scaled to exactly 1."""

    x: complex
    y: complex

    def __post_init__(self):
        x, y = complex(self.x), complex(self.y)
        if x == 0 and y == 0:
            raise ValueError("(0, 0) is not a projective point")
        if abs(x) >= abs(y):
            x, y = 1 + 0j, y / x
        else:
            x, y = x / y, 1 + 0j
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_z(cls, z) -> ProjectivePoint:
        if z is None or (isinstance(z, (float, complex)) and cmath.isinf(z)):
            return cls(1, 0)
        return cls(complex(z), 1)

    @classmethod
    def from_sphere(cls, v) -> ProjectivePoint:
        return cls(*sphere_to_homogeneous(np.asarray(v, dtype=float)))

    @property
    def coords(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=np.complex128)

    @property
    def z(self) -> complex:
        """Affine coordinate x/y (complex infinity for the point at infinity)."""
        return complex("inf") if self.y == 0 else self.x / self.y

    @property
    def is_infinite(self) -> bool:
        return self.y == 0

    def sphere(self) -> np.ndarray:
        return homogeneous_to_sphere(self.coords)

    def distance(self, other: ProjectivePoint) -> float:
        return float(chordal(self.coords, other.coords))


def normalize(P: np.ndarray) -> np.ndarray:
    """Scale each row (x, y) so its larger-modulus entry becomes exactly 1."""
    P = np.asarray(P, dtype=np.complex128)
    x, y = P[..., 0], P[..., 1]
    first = np.abs(x) >= np.abs(y)
    big = np.where(first, x, y)
    out = P / big[..., None]
    out[..., 0] = np.where(first, 1, out[..., 0])
    out[..., 1] = np.where(first, out[..., 1], 1)
    return out


def chordal(p, q):
    """|det(p, q)| / (|p| |q|): sine of half the spherical angle between p and q."""
    p = np.asarray(p)
    q = np.asarray(q)
    num = np.abs(p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0])
    den = np.sqrt((np.abs(p) ** 2).sum(-1) * (np.abs(q) ** 2).sum(-1))
    return num / den


def homogeneous_to_sphere(P) -> np.ndarray:
    """Inverse stereographic projection of z = x/y onto the unit sphere."""
    P = np.asarray(P, dtype=np.complex128)
    x, y = P[..., 0], P[..., 1]
    ax, ay = np.abs(x) ** 2, np.abs(y) ** 2
    n = ax + ay
    w = x * np.conj(y)
    return np.stack([2 * w.real / n, 2 * w.imag / n, (ax - ay) / n], axis=-1)


def sphere_to_homogeneous(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    X, Y, Z = v[..., 0], v[..., 1], v[..., 2]
    south = Z < 0
    x = np.where(south, X + 1j * Y, 1 + Z)
    y = np.where(south, 1 - Z, X - 1j * Y)
    return normalize(np.stack([x, y], axis=-1))


def antipode_array(P) -> np.ndarray:
    P = np.asarray(P, dtype=np.complex128)
    return normalize(np.stack([np.conj(P[..., 1]), -np.conj(P[..., 0])], axis=-1))


def antipode(p: ProjectivePoint) -> ProjectivePoint:
    """(x, y) -> (conj y, -conj x), i.e. z -> -1/conj(z)."""
    return ProjectivePoint(p.y.conjugate(), -p.x.conjugate())


def random_sphere_points(n: int, rng: np.random.Generator) -> np.ndarray:
    """n points uniform on the sphere, as normalized homogeneous rows."""
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return sphere_to_homogeneous(v)


def dedupe(P: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Drop rows within chordal ``tol`` of an earlier row (first seen wins)."""
    P = normalize(P)
    keep = []
    for k in range(len(P)):
        if not keep or chordal(P[keep], P[k]).min() >= tol:
            keep.append(k)
    return P[keep]


# -- group elements ---------------------------------------------------------------------

def projectively_equal(M, N, tol=1e-9) -> bool:
    ip = abs(np.vdot(M, N)) ** 2
    nm = np.vdot(M, M).real * np.vdot(N, N).real
    return abs(nm - ip) <= tol * nm


@dataclass(frozen=True, eq=False)
class GroupElement:
    matrix: np.ndarray

    @cached_property
    def determinant(self) -> complex:
        return complex(np.linalg.det(self.matrix))

    def apply(self, P) -> np.ndarray:
        """Act on homogeneous rows (..., 2)."""
        return normalize(np.asarray(P, dtype=np.complex128) @ self.matrix.T)

    def __call__(self, p: ProjectivePoint) -> ProjectivePoint:
        return ProjectivePoint(*(self.matrix @ p.coords))

    def mobius(self, z):
        a, b, c, d = self.matrix.ravel()
        return (a * z + b) / (c * z + d)

    def fixed_points(self) -> np.ndarray:
        _, vecs = np.linalg.eig(self.matrix)
        return normalize(vecs.T)

    def __matmul__(self, other: GroupElement) -> GroupElement:
        return GroupElement(self.matrix @ other.matrix)


def _half_turn(p: complex) -> np.ndarray:
    """Determinant-1 matrix of the rotation by pi about the axis through p."""
    q = -1 / np.conj(p)
    C = np.array([[1, -p], [1, -q]], dtype=np.complex128)
    A = np.linalg.inv(C) @ np.diag([-1, 1]).astype(np.complex128) @ C
    return A / np.sqrt(np.linalg.det(A))


def _spherical_midpoint(z1: complex, z2: complex) -> complex:
    m = homogeneous_to_sphere(np.array([z1, 1])) + homogeneous_to_sphere(np.array([z2, 1]))
    return complex(ProjectivePoint.from_sphere(m / np.linalg.norm(m)).z)


def generators() -> tuple[np.ndarray, np.ndarray]:
    zeta = cmath.exp(2j * math.pi / 5)
    fifth_turn = np.diag([zeta ** 3, zeta ** 2]).astype(np.complex128)
    golden = (1 + math.sqrt(5)) / 2
    # edge from vertex 0 to its real neighbour -1/golden
    half = _half_turn(_spherical_midpoint(0, -1 / golden))
    return fifth_turn, half


@dataclass(frozen=True)
class Mirror:
    """Great circle fixed by the reflection alpha o A for a half-turn A."""

    normal: np.ndarray          # unit normal of the plane of the circle
    axis: np.ndarray            # the two antipodal fixed points of A (rows)
    element: int                # index of A in the group

    @property
    def center(self):
        """Center of the circle in the affine chart, or None for a line."""
        nx, ny, nz = self.normal
        if abs(nz) < 1e-12:
            return None
        return complex(-nx, -ny) / nz

    @property
    def radius(self):
        c = self.center
        return None if c is None else math.sqrt(1 + abs(c) ** 2)

    @property
    def direction(self):
        """Unit direction of the line through 0 when the circle is a line."""
        nx, ny, _ = self.normal
        return complex(-ny, nx) / math.hypot(nx, ny)

    def distance(self, P) -> np.ndarray:
        """Spherical angle from points to the circle."""
        v = homogeneous_to_sphere(P)
        return np.arcsin(np.clip(np.abs(v @ self.normal), 0, 1))

    def sample(self, n: int = 64) -> np.ndarray:
        n0 = self.normal
        a = np.cross(n0, [1.0, 0, 0] if abs(n0[0]) < 0.9 else [0, 1.0, 0])
        a /= np.linalg.norm(a)
        b = np.cross(n0, a)
        t = np.linspace(0, 2 * np.pi, n, endpoint=False)
        return sphere_to_homogeneous(np.outer(np.cos(t), a) + np.outer(np.sin(t), b))


class IcosaGroup:
    """60 determinant-1 lifts, one per rotation of the icosahedron."""

    def __init__(self, matrices):
        self.elements = [GroupElement(m) for m in matrices]
        self.matrices = np.array(matrices)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, k) -> GroupElement:
        return self.elements[k]

    def index(self, M, tol=1e-9) -> int:
        for k, E in enumerate(self.matrices):
            if projectively_equal(M, E, tol):
                return k
        return -1

    @cached_property
    def table(self) -> np.ndarray:
        """Cayley table: table[i, j] = index of elements[i] @ elements[j]."""
        n = len(self)
        out = np.empty((n, n), dtype=int)
        for i in range(n):
            for j in range(n):
                out[i, j] = self.index(self.matrices[i] @ self.matrices[j])
        if (out < 0).any():
            raise ClosureOverflow("products leave the element list")
        return out

    @cached_property
    def inverse(self) -> np.ndarray:
        return np.array([int(np.nonzero(row == 0)[0][0]) for row in self.table])

    @cached_property
    def orders(self) -> list[int]:
        out = []
        for i in range(len(self)):
            k, j = 1, i
            while j != 0:
                j = self.table[i, j]
                k += 1
            out.append(k)
        return out

    def order_census(self) -> dict[int, int]:
        return dict(sorted(Counter(self.orders).items()))

    def apply_all(self, P) -> np.ndarray:
        """Images of points under every element, shape (60, ..., 2)."""
        P = np.asarray(P, dtype=np.complex128)
        return normalize(np.einsum("gab,...b->g...a", self.matrices, P))

    @cached_property
    def mirrors(self) -> list[Mirror]:
        out = []
        for k, g in enumerate(self.elements):
            if self.orders[k] != 2:
                continue
            fp = g.fixed_points()
            out.append(Mirror(normal=homogeneous_to_sphere(fp[0]), axis=fp, element=k))
        return out

    def mirror_containing(self, p, tol: float = 1e-8):
        P = p.coords if isinstance(p, ProjectivePoint) else np.asarray(p)
        best = min(self.mirrors, key=lambda m: float(m.distance(P)))
        return best if float(best.distance(P)) < tol else None

    def real_mirror(self) -> Mirror:
        return min(self.mirrors, key=lambda m: abs(abs(m.normal[1]) - 1))

    @cached_property
    def real_axis_stabilizer(self) -> list[int]:
        """Elements mapping the real axis onto itself."""
        real = self.real_mirror()
        pts = np.array([[t, 1] for t in (-2.0, -0.3, 0.7, 1.9)], dtype=np.complex128)
        return [k for k, g in enumerate(self.elements)
                if float(real.distance(g.apply(pts)).max()) < 1e-9]

    def permutation(self, k: int, P, tol: float = 1e-8) -> np.ndarray:
        """Permutation of the rows of P induced by element k."""
        img = self.elements[k].apply(P)
        d = chordal(img[:, None, :], np.asarray(P)[None, :, :])
        perm = d.argmin(axis=1)
        if d[np.arange(len(P)), perm].max() > tol:
            raise ValueError("point set is not invariant under the element")
        return perm


def build_group(max_elements: int = 120) -> IcosaGroup:
    """Close the fifth-turn about 0 and an edge half-turn under multiplication."""
    gens = generators()
    mats = [np.eye(2, dtype=np.complex128)]
    frontier = list(mats)
    while frontier:
        new = []
        for E in frontier:
            for G in gens:
                N = G @ E
                if not any(projectively_equal(N, M) for M in mats):
                    mats.append(N)
                    new.append(N)
                    if len(mats) > max_elements:
                        raise ClosureOverflow(f"closure exceeded {max_elements} elements")
        frontier = new
    # det-1 lifts; sign fixed so the lift is canonical
    out = []
    for M in mats:
        M = M / np.sqrt(np.linalg.det(M))
        lead = M.ravel()[np.argmax(np.abs(M.ravel()) > 1e-9)]
        if lead.real < 0 or (lead.real == 0 and lead.imag < 0):
            M = -M
        out.append(M)
    return IcosaGroup(out)


@lru_cache(maxsize=None)
def icosahedral_group() -> IcosaGroup:
    return build_group()


# -- orbits -----------------------------------------------------------------------

ORBIT_LABELS = {12: "vertex", 20: "face", 30: "edge", 60: "generic"}


@dataclass
class Orbit:
    points: np.ndarray
    label: str = field(default="")

    def __post_init__(self):
        self.points = normalize(self.points)
        if not self.label:
            self.label = ORBIT_LABELS.get(len(self.points), "unknown")

    @property
    def size(self) -> int:
        return len(self.points)

    def __len__(self):
        return self.size

    def affine(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.points[:, 1] == 0, np.inf,
                            self.points[:, 0] / self.points[:, 1])

    def contains(self, P, tol: float = 1e-8) -> np.ndarray:
        return self.distances(P) < tol

    def distances(self, P) -> np.ndarray:
        P = np.asarray(P)
        return chordal(P[..., None, :], self.points).min(axis=-1)

    def nearest(self, P) -> np.ndarray:
        P = np.asarray(P)
        return chordal(P[..., None, :], self.points).argmin(axis=-1)

    def to_json(self) -> dict:
        pts = []
        for x, y in self.points:
            if y == 0:
                pts.append([0.0, 0.0, True])
            else:
                z = x / y
                pts.append([float(z.real), float(z.imag), False])
        return {"label": self.label, "size": self.size, "points": pts}

    @classmethod
    def from_json(cls, data) -> Orbit:
        if isinstance(data, str):
            data = json.loads(data)
        rows = [[1, 0] if inf else [complex(re, im), 1] for re, im, inf in data["points"]]
        return cls(np.array(rows, dtype=np.complex128), data.get("label", ""))


def orbit_of(p, group: IcosaGroup | None = None, tol: float = 1e-9) -> Orbit:
    group = group or icosahedral_group()
    P = p.coords if isinstance(p, ProjectivePoint) else np.asarray(p, dtype=np.complex128)
    return Orbit(dedupe(group.apply_all(P), tol))


def form_roots(form: BivariateForm, tol: float = 1e-9) -> np.ndarray:
    """Projective roots of a form (with multiplicity), as homogeneous rows."""
    coeffs = [complex(c) for c in form.affine_coefficients()]
    deg = max((k for k, c in enumerate(coeffs) if c != 0), default=0)
    roots = np.roots(coeffs[: deg + 1][::-1]) if deg else np.array([])
    poly = np.polynomial.Polynomial(coeffs[: deg + 1])
    dpoly = poly.deriv()
    for _ in range(3):
        with np.errstate(divide="ignore", invalid="ignore"):
            step = poly(roots) / dpoly(roots)
        roots = roots - np.where(np.isfinite(step), step, 0)
    rows = [[r, 1] for r in roots] + [[1, 0]] * (form.degree - deg)
    P = normalize(np.array(rows, dtype=np.complex128).reshape(-1, 2))
    scale = form.abs_eval_array(P[:, 0], P[:, 1])
    resid = np.abs(form.eval_array(P[:, 0], P[:, 1])) / np.where(scale > 0, scale, 1)
    if len(P) and resid.max() > tol:
        raise RootFindingFailure(f"root residual {resid.max():.2e} above {tol:.0e}")
    return P


@lru_cache(maxsize=None)
def special_orbits() -> tuple[Orbit, Orbit, Orbit]:
    """Vertices {F=0}, face-centers {H=0}, edge-midpoints {T=0}."""
    group = icosahedral_group()
    out = []
    for form, label in zip(canonical(), ("vertex", "face", "edge")):
        roots = form_roots(form)
        orb = orbit_of(roots[0], group)
        if orb.size != form.degree or orb.distances(roots).max() > 1e-8:
            raise RootFindingFailure(f"{label} roots do not form a single orbit")
        out.append(Orbit(roots, label))
    return tuple(out)


def printed_vertices() -> list[complex]:
    """The ten finite vertices as given by the closed-form list, all sign choices."""
    s5 = math.sqrt(5)
    out = [(1 + s5) / 2, (1 - s5) / 2]
    for den in (1, -1):
        for num in (1, -1):
            out.append((-5 + s5 + num * 1j * math.sqrt(10 * (5 + s5))) / (2 * (den * s5 - 5)))
    for den in (1, -1):
        for num in (1, -1):
            out.append((2 * (5 + s5) + num * 1j * (5 - s5) * math.sqrt(2 * (5 + s5)))
                       / (4 * (5 + den * s5)))
    return out
