"""Tetrahedral subgroups, the quintic resolvent and the five tetrahedral icosahedra.

The 20 face-centers split, for each of the five order-12 subgroups, into two
4-point orbits (a chiral pair of tetrahedra) and one 12-point orbit.  One
tetrahedron per subgroup is chosen consistently, giving the forms
T_a = prod (x - t_ak y) and the quintic P_5(s) = prod (s - T_a).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import linear_sum_assignment

from .dynamics import CycleSet, converge_many
from .forms import BivariateForm, canonical
from .group import IcosaGroup, Orbit, antipode_array, chordal, icosahedral_group, special_orbits


class PartitionFailure(RuntimeError):
    pass


class NonConvergence(RuntimeError):
    pass


def _closure(table: np.ndarray, gens) -> frozenset:
    seen = {0, *gens}
    frontier = list(seen)
    while frontier:
        new = []
        for a in frontier:
            for b in gens:
                c = int(table[a, b])
                if c not in seen:
                    seen.add(c)
                    new.append(c)
        frontier = new
    return frozenset(seen)


def tetrahedral_subgroups(group: IcosaGroup | None = None) -> list[frozenset]:
    """The order-12 subgroups, from closures of an order-3 and an order-2 element."""
    group = group or icosahedral_group()
    found = set()
    for r in (k for k, o in enumerate(group.orders) if o == 3):
        for s in (k for k, o in enumerate(group.orders) if o == 2):
            sub = _closure(group.table, (r, s))
            if len(sub) == 12:
                found.add(sub)
    return sorted(found, key=sorted)


def _orbits(perms: list[np.ndarray], n: int) -> list[tuple]:
    seen, out = set(), []
    for start in range(n):
        if start in seen:
            continue
        orb = {int(p[start]) for p in perms}
        seen |= orb
        out.append(tuple(sorted(orb)))
    return out


def linear_form(t: complex) -> BivariateForm:
    return BivariateForm(1, {(1, 0): 1, (0, 1): -complex(t)})


def canonical_face_order(points: np.ndarray) -> np.ndarray:
    """Ranks of the face-centers sorted by principal argument, then modulus."""
    z = points[:, 0] / points[:, 1]
    key = sorted(range(len(z)), key=lambda k: (round(float(np.angle(z[k])), 12),
                                                round(float(abs(z[k])), 12)))
    rank = np.empty(len(z), dtype=int)
    rank[key] = np.arange(len(z))
    return rank


@dataclass
class TetrahedralSystem:
    subgroups: list                  # element-index sets, ordered by label a = 1..5
    tetrahedra: list                 # face-center index 4-tuples, one per subgroup
    points: np.ndarray               # the 20 face-centers (homogeneous rows)
    forms: list                      # T_a as degree-4 forms with complex coefficients
    flipped: bool = False
    half_turns: list = field(default_factory=list)

    def tetrahedron_points(self, a: int) -> np.ndarray:
        """Points of tetrahedron a (1-based)."""
        return self.points[list(self.tetrahedra[a - 1])]

    def label_of_element(self, k: int) -> int:
        for a, sub in enumerate(self.subgroups, 1):
            if k in sub and k != 0:
                return a
        return 0

    def subgroup_permutation(self, group: IcosaGroup, k: int) -> tuple:
        """Where conjugation by element k sends each subgroup (1-based labels)."""
        inv = group.inverse[k]
        out = []
        for sub in self.subgroups:
            conj = frozenset(int(group.table[group.table[k, s], inv]) for s in sub)
            out.append(self.subgroups.index(conj) + 1)
        return tuple(out)


def build_tetrahedral_system(flip: bool = False, group: IcosaGroup | None = None
                             ) -> TetrahedralSystem:
    """Five tetrahedra inside the 20 face-centers, one for each order-12 subgroup.

    Every face-center lies in two tetrahedra, one of each chiral system.  The
    system is fixed by the tetrahedron through the face-center of smallest
    principal argument whose other points come first in the canonical order;
    ``flip`` selects the other system.
    """
    group = group or icosahedral_group()
    _, Fc, _ = special_orbits()
    P = Fc.points
    perms = [group.permutation(k, P) for k in range(len(group))]
    subs = tetrahedral_subgroups(group)
    if len(subs) != 5:
        raise PartitionFailure(f"found {len(subs)} order-12 subgroups")
    quads = {}
    for sub in subs:
        orbs = _orbits([perms[k] for k in sub], len(P))
        sizes = sorted(len(o) for o in orbs)
        if sizes != [4, 4, 12]:
            raise PartitionFailure(f"subgroup orbits on face-centers have sizes {sizes}")
        quads[sub] = [o for o in orbs if len(o) == 4]
    rank = canonical_face_order(P)
    start = int(np.argmin(rank))
    through = [q for qs in quads.values() for q in qs if start in q]
    through.sort(key=lambda q: sorted(rank[list(q)]))
    seed = through[1 if flip else 0]
    system = {tuple(sorted(int(perms[k][i]) for i in seed)) for k in range(len(group))}
    if len(system) != 5:
        raise PartitionFailure(f"tetrahedron orbit has {len(system)} members")
    covered = sorted(i for q in system for i in q)
    if covered != list(range(len(P))):
        raise PartitionFailure("the tetrahedra do not partition the face-centers")
    owner = {}
    for sub, qs in quads.items():
        for q in qs:
            if q in system:
                owner[q] = sub
    ordered = sorted(system, key=lambda q: (start not in q, min(rank[list(q)])))
    forms = []
    for q in ordered:
        f = BivariateForm(0, {(0, 0): 1})
        for i in q:
            f = f * linear_form(P[i, 0] / P[i, 1])
        forms.append(f)
    subgroups = [owner[q] for q in ordered]
    half_turns = [sorted(k for k in sub if group.orders[k] == 2) for sub in subgroups]
    return TetrahedralSystem(subgroups, ordered, P, forms, flip, half_turns)


@lru_cache(maxsize=None)
def tetrahedral_system(flip: bool = False) -> TetrahedralSystem:
    return build_tetrahedral_system(flip)


def tetrahedron_permutations(ts: TetrahedralSystem, group: IcosaGroup | None = None) -> set:
    """The permutations of the five tetrahedra induced by the group (as tuples)."""
    group = group or icosahedral_group()
    perms = set()
    for k in range(len(group)):
        p = group.permutation(k, ts.points)
        image = []
        for q in ts.tetrahedra:
            moved = tuple(sorted(int(p[i]) for i in q))
            if moved not in ts.tetrahedra:
                raise PartitionFailure("the group does not permute the tetrahedra")
            image.append(ts.tetrahedra.index(moved) + 1)
        perms.add(tuple(image))
    return perms


def is_even(perm) -> bool:
    perm = [p - 1 for p in perm]
    seen, parity = set(), 0
    for i in range(len(perm)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        parity += length - 1
    return parity % 2 == 0


# -- the resolvent -----------------------------------------------------------------

def icosa_parameter(z) -> complex:
    """The icosahedral function F^5 / H^3 (not to be confused with the edge anchor)."""
    c = canonical()
    return complex(c.F(z, 1)) ** 5 / complex(c.H(z, 1)) ** 3


@dataclass
class ResolventData:
    z: complex
    values: np.ndarray               # T_a(z, 1)
    coefficients: np.ndarray         # a_0 .. a_5 of prod (s - T_a)
    F: complex
    H: complex

    @property
    def parameter(self) -> complex:
        return self.F ** 5 / self.H ** 3

    def relative(self, k: int) -> float:
        """|a_k| relative to max |T_a|^k."""
        return float(abs(self.coefficients[k]) / np.abs(self.values).max() ** k)

    @property
    def ratio3(self) -> complex:
        return complex(self.coefficients[3] / self.F)

    @property
    def ratio5(self) -> complex:
        return complex(self.coefficients[5] / self.H)


def resolvent_at(z, ts: TetrahedralSystem | None = None) -> ResolventData:
    ts = ts or tetrahedral_system()
    z = complex(z)
    vals = np.array([f.eval_array(z, 1) for f in ts.forms], dtype=np.complex128)
    coeffs = np.poly(vals)
    c = canonical()
    return ResolventData(z, vals, coeffs, complex(c.F(z, 1)), complex(c.H(z, 1)))


@dataclass
class ResolventFit:
    b: complex
    c: complex
    spread_b: float
    spread_c: float
    vanishing: dict                  # k -> worst relative |a_k| over the samples
    samples: int

    @property
    def passes(self) -> dict:
        return {"a1": self.vanishing[1] < 1e-8, "a2": self.vanishing[2] < 1e-8,
                "a4": self.vanishing[4] < 1e-8, "a3/F": self.spread_b < 1e-8,
                "a5/H": self.spread_c < 1e-8}


def random_points(n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def fit_resolvent(zs=None, ts: TetrahedralSystem | None = None) -> ResolventFit:
    zs = random_points(50) if zs is None else zs
    data = [resolvent_at(z, ts) for z in zs]
    r3 = np.array([d.ratio3 for d in data])
    r5 = np.array([d.ratio5 for d in data])
    b, c = r3.mean(), r5.mean()
    spread = lambda r, m: float(np.abs(r - m).max() / abs(m)) if m != 0 else math.inf
    vanish = {k: max(d.relative(k) for d in data) for k in (1, 2, 4)}
    return ResolventFit(complex(b), complex(c), spread(r3, b), spread(r5, c), vanish, len(zs))


def reduced_quintic_mismatch(z, b, c, ts: TetrahedralSystem | None = None) -> float:
    """Distance between the roots of s^5 + b Z^2 s^2 + c Z^3 and (F^3/H^2) T_a(z),
    relative to the largest root."""
    d = resolvent_at(z, ts)
    Z = d.parameter
    roots = np.roots([1, 0, 0, b * Z ** 2, 0, c * Z ** 3])
    target = d.values * d.F ** 3 / d.H ** 2
    cost = np.abs(roots[:, None] - target[None, :])
    i, j = linear_sum_assignment(cost)
    return float(cost[i, j].max() / np.abs(target).max())


def tetrahedral_characters(ts: TetrahedralSystem | None = None, samples: int = 5,
                           seed: int = 1) -> dict:
    """Why the five T_a cannot satisfy a_1 = 0: their linear span and how each
    subgroup acts on its own form.

    rank: dimension of the span of the five quartics (5 means independent, so
    a_1 = -sum T_a is not identically zero).  characters: for each a, the
    distinct values of T_a(A p) / T_a(p) over determinant-1 lifts A in the subgroup.
    """
    ts = ts or tetrahedral_system()
    group = icosahedral_group()
    M = np.array([[complex(f.coefficient(4 - j, j)) for j in range(5)] for f in ts.forms])
    rank = int(np.linalg.matrix_rank(M, tol=1e-9 * np.abs(M).max()))
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(samples, 2)) + 1j * rng.normal(size=(samples, 2))
    chars = []
    for f, sub in zip(ts.forms, ts.subgroups):
        vals = set()
        for k in sorted(sub):
            Q = P @ group[k].matrix.T
            ratio = f.eval_array(Q[:, 0], Q[:, 1]) / f.eval_array(P[:, 0], P[:, 1])
            if np.ptp(ratio.real) + np.ptp(ratio.imag) > 1e-8:
                raise ArithmeticError("T_a is not a relative invariant of its subgroup")
            vals.add((round(float(ratio[0].real), 9), round(float(ratio[0].imag), 9)))
        chars.append(sorted(vals))
    return {"rank": rank, "characters": chars}


# -- tetrahedral icosahedra --------------------------------------------------------

def tau_labels(orbit: Orbit, ts: TetrahedralSystem | None = None, tol: float = 1e-8
               ) -> np.ndarray:
    """Label a = 1..5 for each point w of a 60-point orbit on a mirror: the subgroup
    containing the half-turn that sends w to its antipode."""
    ts = ts or tetrahedral_system()
    group = icosahedral_group()
    if orbit.size != 60:
        raise PartitionFailure("tau labels need a 60-point orbit")
    P = orbit.points
    anti = antipode_array(P)
    labels = np.zeros(len(P), dtype=int)
    for a, turns in enumerate(ts.half_turns, 1):
        for k in turns:
            hit = chordal(group[k].apply(P), anti) < tol
            if (labels[hit] != 0).any():
                raise PartitionFailure("a point is exchanged with its antipode by two half-turns")
            labels[hit] = a
    if (labels == 0).any():
        raise PartitionFailure("some orbit points are not exchanged with their antipodes")
    return labels


def tau_decomposition(orbit: Orbit, ts: TetrahedralSystem | None = None) -> dict:
    """The five 12-point tetrahedral icosahedra of a 60-point orbit, checked as
    orbits of their subgroups."""
    ts = ts or tetrahedral_system()
    group = icosahedral_group()
    labels = tau_labels(orbit, ts)
    P = orbit.points
    parts = {}
    for a, sub in enumerate(ts.subgroups, 1):
        members = P[labels == a]
        if len(members) != 12:
            raise PartitionFailure(f"tau_{a} has {len(members)} points")
        image = np.concatenate([group[k].apply(members[:1]) for k in sorted(sub)])
        d = chordal(image[:, None, :], members[None, :, :])
        if d.min(axis=1).max() > 1e-8 or d.min(axis=0).max() > 1e-8:
            raise PartitionFailure(f"tau_{a} is not an orbit of subgroup {a}")
        parts[a] = members
    return {"labels": labels, "parts": parts}


def label_permutations(orbit: Orbit, labels: np.ndarray, tol: float = 1e-8) -> set:
    """Permutations of the labels induced by the group acting on the orbit."""
    group = icosahedral_group()
    P = orbit.points
    out = set()
    for g in group:
        img = g.apply(P)
        j = chordal(img[:, None, :], P[None, :, :]).argmin(axis=1)
        perm = {}
        for src, dst in zip(labels, labels[j]):
            if perm.setdefault(int(src), int(dst)) != int(dst):
                raise PartitionFailure("the group does not permute the tau labels")
        out.add(tuple(perm[a] for a in range(1, 6)))
    return out


@dataclass
class DemoReport:
    seeds: int
    converged: int
    same_label: int
    counts: dict
    first: dict | None = None

    @property
    def same_label_fraction(self) -> float:
        return self.same_label / self.converged if self.converged else 0.0

    def as_dict(self) -> dict:
        return {"seeds": self.seeds, "converged": self.converged,
                "same_label": self.same_label,
                "same_label_fraction": self.same_label_fraction,
                "label_counts": self.counts, "first": self.first}


def symmetry_breaking_demo(g_solution, seeds, ts: TetrahedralSystem | None = None,
                           max_iter: int = 400) -> DemoReport:
    """Iterate g from each seed to a 2-cycle and read off the tau label of the limit.

    ``seeds`` are homogeneous rows (n, 2).  A single seed that fails to converge
    raises NonConvergence; in a batch such seeds are only counted.
    """
    ts = ts or tetrahedral_system()
    orbit = g_solution.orbit
    labels = tau_labels(orbit, ts)
    cycles = CycleSet.antipodal(orbit.points)
    idx = chordal(cycles.points[:, None, :], orbit.points[None, :, :]).argmin(axis=1)
    point_label = labels[idx]
    seeds = np.atleast_2d(seeds)
    cyc, _, _, pts = converge_many(g_solution.map, seeds, cycles, max_iter,
                                   return_points=True)
    ok = cyc >= 0
    if len(seeds) == 1 and not ok[0]:
        raise NonConvergence("seed did not reach a 2-cycle of g")
    w_label = point_label[pts[ok]]
    partner = point_label[pts[ok] ^ 1]
    counts = {a: int((w_label == a).sum()) for a in range(1, 6)}
    first = None
    if ok.any():
        k = int(pts[ok][0])
        a = int(point_label[k])
        w = cycles.points[k]
        first = {"w_inf": [float((w[0] / w[1]).real), float((w[0] / w[1]).imag)]
                 if w[1] != 0 else None,
                 "label": a, "partner_label": int(point_label[k ^ 1]),
                 "tau_orbit_size": int((labels == a).sum())}
    return DemoReport(len(seeds), int(ok.sum()), int((w_label == partner).sum()), counts, first)
