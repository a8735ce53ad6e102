"""Equivariant maps built from the invariants, and the degree-31 family a*H*phi + b*F*eta."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .forms import BivariateForm, canonical, jacobian_det
from .group import (ProjectivePoint, antipode_array, chordal, icosahedral_group, normalize,
                    special_orbits)


@dataclass(frozen=True)
class MapFamilyCoefficients:
    a: complex
    b: complex

    def __post_init__(self):
        if self.a == 0 and self.b == 0:
            raise ValueError("(a, b) = (0, 0) does not define a map")

    def normalized(self) -> MapFamilyCoefficients:
        """Scale so that a = 1 (the map is unchanged projectively)."""
        return MapFamilyCoefficients(1, self.b / self.a)

    @property
    def ratio(self):
        return self.b / self.a


class EquivariantMap:
    """A pair of forms of one degree, acting on C^2 and hence on the sphere."""

    def __init__(self, first: BivariateForm, second: BivariateForm, name: str = ""):
        if first.degree != second.degree:
            raise ValueError("components must share one degree")
        self.first = first
        self.second = second
        self.name = name

    @property
    def degree(self) -> int:
        return self.first.degree

    @property
    def components(self):
        return self.first, self.second

    def __repr__(self):
        return f"EquivariantMap({self.name or 'degree ' + str(self.degree)})"

    def __eq__(self, other):
        return (isinstance(other, EquivariantMap) and self.first == other.first
                and self.second == other.second)

    def __hash__(self):
        return hash((self.first, self.second))

    # arithmetic on maps of equal degree, and multiplication by a form or scalar
    def __add__(self, other: EquivariantMap) -> EquivariantMap:
        return EquivariantMap(self.first + other.first, self.second + other.second)

    def __sub__(self, other: EquivariantMap) -> EquivariantMap:
        return EquivariantMap(self.first - other.first, self.second - other.second)

    def __neg__(self):
        return EquivariantMap(-self.first, -self.second, self.name)

    def __mul__(self, other):
        return EquivariantMap(self.first * other, self.second * other)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.first.is_zero() and self.second.is_zero()

    def scaled_monic(self) -> EquivariantMap:
        """Divide by the x^d coefficient of the first component."""
        lead = self.first.coefficient(self.degree, 0)
        if lead == 0:
            raise ValueError("first component has no x^d term")
        inv = 1 / lead
        return EquivariantMap(self.first * inv, self.second * inv, self.name)

    # -- evaluation ---------------------------------------------------------------

    def raw(self, P) -> np.ndarray:
        """Unnormalized image of homogeneous rows (..., 2)."""
        P = np.asarray(P, dtype=np.complex128)
        cache = {}
        x, y = P[..., 0], P[..., 1]
        return np.stack([self.first.eval_array(x, y, cache),
                         self.second.eval_array(x, y, cache)], axis=-1)

    def apply(self, P) -> np.ndarray:
        return normalize(self.raw(P))

    def __call__(self, p):
        if isinstance(p, ProjectivePoint):
            return ProjectivePoint(*self.raw(p.coords))
        return self.apply(p)

    def evaluate(self, x, y):
        """Generic (exact, mpmath, ...) evaluation of both components."""
        return self.first(x, y), self.second(x, y)

    @cached_property
    def partials(self):
        return (self.first.dx(), self.first.dy(), self.second.dx(), self.second.dy())

    def affine(self, z):
        """The map in the chart z = x/y."""
        return self.first.eval_array(z, 1) / self.second.eval_array(z, 1)

    def affine_derivative(self, z):
        z = np.asarray(z, dtype=np.complex128)
        c = {}
        f1, f2 = self.first.eval_array(z, 1, c), self.second.eval_array(z, 1, c)
        d1, _, d2, _ = self.partials
        return (d1.eval_array(z, 1, c) * f2 - f1 * d2.eval_array(z, 1, c)) / f2 ** 2


def cross(G: BivariateForm) -> EquivariantMap:
    """(G_y, -G_x): a relative equivariant of degree d - 1."""
    if G.degree < 1:
        raise ValueError("cross needs degree >= 1")
    return EquivariantMap(G.dy(), -G.dx())


def identity_map() -> EquivariantMap:
    return EquivariantMap(BivariateForm.monomial(1, 0), BivariateForm.monomial(0, 1), "epsilon")


@lru_cache(maxsize=None)
def basic_equivariants() -> tuple[EquivariantMap, EquivariantMap, EquivariantMap]:
    """(phi, eta, epsilon) with phi = (-F_y, F_x) and eta = (-H_y, H_x)."""
    c = canonical()
    phi = -cross(c.F)
    eta = -cross(c.H)
    phi.name, eta.name = "phi", "eta"
    return phi, eta, identity_map()


def phi() -> EquivariantMap:
    return basic_equivariants()[0]


def eta() -> EquivariantMap:
    return basic_equivariants()[1]


def epsilon() -> EquivariantMap:
    return basic_equivariants()[2]


@lru_cache(maxsize=None)
def family_parts() -> tuple[EquivariantMap, EquivariantMap]:
    """The two degree-31 building blocks H*phi and F*eta."""
    c = canonical()
    ph, et, _ = basic_equivariants()
    return ph * c.H, et * c.F


def family_map(a, b=None) -> EquivariantMap:
    """a*H*phi + b*F*eta; accepts MapFamilyCoefficients or two numbers."""
    if isinstance(a, MapFamilyCoefficients):
        a, b = a.a, a.b
    MapFamilyCoefficients(a, b)
    Hphi, Feta = family_parts()
    return Hphi * a + Feta * b


def module_relation(coeffs=(5, 5, -3)) -> EquivariantMap:
    c1, c2, c3 = coeffs
    c = canonical()
    ph, et, eps = basic_equivariants()
    return eps * c.T * c1 + ph * c.H * c2 + et * c.F * c3


def verify_module_relation(coeffs=(5, 5, -3)) -> bool:
    """Exact check of c1*T*eps + c2*H*phi + c3*F*eta = (0, 0)."""
    return module_relation(coeffs).is_zero()


def critical_form(m: EquivariantMap) -> BivariateForm:
    """Jacobian determinant of the two components; vanishes on the critical set."""
    return jacobian_det(m.first, m.second)


# -- numeric checks -------------------------------------------------------------------

def projective_mismatch(P, Q) -> np.ndarray:
    """Normalized determinant |det(P, Q)| / (|P| |Q|); zero iff P and Q agree projectively."""
    return chordal(P, Q)


def equivariance_defect(m: EquivariantMap, points, group=None) -> float:
    """Largest projective mismatch of m(A p) against A m(p) over the group."""
    group = group or icosahedral_group()
    P = normalize(points)
    mP = m.raw(P)
    worst = 0.0
    for g in group:
        lhs = m.raw(g.apply(P))
        rhs = mP @ g.matrix.T
        worst = max(worst, float(projective_mismatch(lhs, rhs).max()))
    return worst


def check_table1(tol: float = 1e-9) -> dict:
    """How phi and eta act on the special orbits: 'fixed' or 'antipode' per orbit."""
    V, Fc, E = special_orbits()
    out = {}
    for m in basic_equivariants()[:2]:
        row = {}
        for orb in (V, Fc, E):
            img = m.apply(orb.points)
            fixed = float(projective_mismatch(img, orb.points).max())
            swapped = float(projective_mismatch(img, antipode_array(orb.points)).max())
            if fixed < tol:
                row[orb.label] = ("fixed", fixed)
            elif swapped < tol:
                row[orb.label] = ("antipode", swapped)
            else:
                row[orb.label] = ("other", min(fixed, swapped))
        out[m.name] = row
    return out


TABLE1_EXPECTED = {
    "phi": {"vertex": "fixed", "face": "antipode", "edge": "antipode"},
    "eta": {"vertex": "antipode", "face": "fixed", "edge": "antipode"},
}


def table1_passes(report: dict | None = None) -> bool:
    report = report or check_table1()
    return all(report[m][k][0] == v for m, row in TABLE1_EXPECTED.items() for k, v in row.items())
