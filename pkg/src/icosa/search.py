"""Search for degree-31 maps whose critical set is a 60-point orbit of 2-periodic points.

A point p = (z, 1) is required to be critical for f = a*H*phi + b*F*eta and to be
sent to its antipode (1, -conj z).  The antipodal condition fixes (a, b) as
rational functions of z and w = conj z; clearing denominators in the Jacobian
condition and removing the factors F, H, T leaves the residual polynomial M(z, w).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .equivariants import EquivariantMap, MapFamilyCoefficients, critical_form, family_parts
from .forms import canonical, divide_exact, evaluate, jacobian_det
from .group import (Orbit, antipode_array, chordal, icosahedral_group, normalize, orbit_of,
                    special_orbits)


class SingularSystem(ArithmeticError):
    pass


class DivisionNearZero(ArithmeticError):
    pass


class RootCountMismatch(RuntimeError):
    pass


class OrbitSizeError(RuntimeError):
    pass


class Unclassifiable(ValueError):
    pass


# As printed (terms z^i w^j with w = conj z).  Kept for cross-checking only; the
# computed residual is authoritative.
PRINTED_M = {
    (60, 1): 1, (56, 2): -285, (55, 1): 2820, (54, 0): 3410, (51, 2): 3800, (50, 1): -37794,
    (49, 0): 83700, (46, 2): -3799050, (45, 1): 7302980, (44, 0): 12227175,
    (41, 2): -15405600, (40, 1): 23401665, (39, 0): 15580600, (36, 2): -143079850,
    (35, 1): 80976024, (34, 0): 168348600, (31, 2): 203866260, (29, 0): -203866260,
    (26, 2): 168348600, (25, 1): 80976024, (24, 0): -143079850, (21, 2): -15580600,
    (20, 1): -23401665, (19, 0): 15405600, (16, 2): 12227175, (15, 1): 7302980,
    (14, 0): -3799050, (11, 2): -83700, (10, 1): 37794, (9, 0): -3800, (6, 2): 3410,
    (5, 1): 2820, (4, 0): -285, (0, 1): -1, (0, 0): 1,
}

_P48 = [1, 0, 14, -280, 161, -1039, 364, -666, 621, 27291, -32823, 394034, -241717, 557621,
        -499383, 392493, 478383, -854138, 1147057, -3389037, 3865560, 1191562, 5421980,
        744833, 10215020, -744833, 5421980, -1191562, 3865560, 3389037, 1147057, 854138,
        478383, -392493, -499383, -557621, -241717, -394034, -32823, -27291, 621, 666, 364,
        1039, 161, 280, 14, 0, 1]

# Printed factorization of M(z, z), each factor in descending powers.
PRINTED_REAL_FACTORS = [[1, 0], [1, 0, 1], [1, -1, -1], [1, -2, -6, 2, 1], [1, 3, -1, -3, 1],
                        _P48]

# Printed decimal expansions of g and h: (i, j) -> coefficient string.
PRINTED_G = {
    "first": {(31, 0): "1", (26, 5): "1980.7608", (21, 10): "-26690.072",
              (16, 15): "-129309.31", (11, 20): "61784.718", (6, 25): "7547.2935",
              (1, 30): "-42.908084"},
    "second": {(30, 1): "-42.908084", (25, 6): "-7547.2935", (20, 11): "61784.718",
               (15, 16): "129309.31", (10, 21): "-26690.072", (5, 26): "-1980.7608",
               (0, 31): "1"},
}
PRINTED_H = {
    "first": {(31, 0): "1", (26, 5): "194.02245", (21, 10): "-14778.483",
              (16, 15): "-36994.493", (11, 20): "10533.539", (6, 25): "2531.8876",
              (1, 30): "-11.561797"},
    "second": {(30, 1): "-11.561797", (25, 6): "-2531.8876", (20, 11): "10533.539",
               (15, 16): "36994.493", (10, 21): "-14778.483", (5, 26): "-194.02245",
               (0, 31): "1"},
}
PRINTED_B = {"soccer": "1.5954", "dualSoccer": ".0280899"}


# -- the linear solve for (a, b) ----------------------------------------------------------

def _blocks():
    Hphi, Feta = family_parts()
    return Hphi.first, Hphi.second, Feta.first, Feta.second


def _system(z, zbar):
    A0, A1, B0, B1 = (evaluate(f, (z, 1)) for f in _blocks())
    delta = A0 * B1 - A1 * B0
    return A0, A1, B0, B1, delta


def solve_coefficients(z, zbar=None, tol: float = 1e-12) -> MapFamilyCoefficients:
    """(a, b) with a*H*phi(z, 1) + b*F*eta(z, 1) = (1, -zbar) exactly in C^2.

    ``zbar`` defaults to conj(z) and is otherwise an independent variable.
    Works for complex and mpmath inputs.
    """
    if zbar is None:
        zbar = z.conjugate()
    A0, A1, B0, B1, delta = _system(z, zbar)
    scale = math.hypot(abs(A0), abs(A1)) * math.hypot(abs(B0), abs(B1))
    if scale == 0 or abs(delta) <= tol * scale:
        raise SingularSystem(f"determinant {complex(delta):.3e} vanishes at z = {complex(z)}")
    a = (B1 + zbar * B0) / delta
    b = -(A1 + zbar * A0) / delta
    return MapFamilyCoefficients(a, b)


def cleared_jacobian(z, zbar):
    """J_f(z, 1) * delta^2 for the (a, b) of ``solve_coefficients``: a polynomial in z, zbar."""
    A0, A1, B0, B1, delta = _system(z, zbar)
    an = B1 + zbar * B0
    bn = -(A1 + zbar * A0)
    d = [evaluate(f, (z, 1)) for blk in _blocks() for f in (blk.dx(), blk.dy())]
    A0x, A0y, A1x, A1y, B0x, B0y, B1x, B1y = d
    f1x, f1y = an * A0x + bn * B0x, an * A0y + bn * B0y
    f2x, f2y = an * A1x + bn * B1x, an * A1y + bn * B1y
    return f1x * f2y - f1y * f2x


def critical_residual(z, zbar, dps: int | None = None, tol: float = 1e-10):
    """J * delta^2 / (F H T) at (z, 1), computed without reference to M.

    With ``dps`` the evaluation runs in mpmath at that many digits.
    """
    if dps is not None:
        with mpmath.workdps(dps):
            return critical_residual(mpmath.mpc(z), mpmath.mpc(zbar), None, tol)
    c = canonical()
    fht = 1
    for form in c:
        v = evaluate(form, (z, 1))
        scale = float(form.abs_eval_array(complex(z), 1))
        if abs(v) <= tol * scale:
            raise DivisionNearZero(f"z = {complex(z)} is within {tol} of a zero of a degree "
                                   f"{form.degree} invariant")
        fht = fht * v
    return cleared_jacobian(z, zbar) / fht


# -- the residual polynomial --------------------------------------------------------------

def _poly_eval(coeffs_desc, z):
    return np.polyval(coeffs_desc, z)


@dataclass
class ResidualPolynomial:
    """M(z, w) = sum c_ij z^i w^j with exact integer coefficients."""

    terms: dict
    scalar: int = 1                  # cleared numerator / (F H T) = scalar * M

    @property
    def degree_z(self) -> int:
        return max(i for i, _ in self.terms)

    @property
    def degree_w(self) -> int:
        return max(j for _, j in self.terms)

    def __len__(self):
        return len(self.terms)

    def evaluate(self, z, w):
        if isinstance(z, np.ndarray) or isinstance(w, np.ndarray):
            return self._eval_array(np.asarray(z, dtype=np.complex128),
                                    np.asarray(w, dtype=np.complex128))
        return sum(c * z ** i * w ** j for (i, j), c in self.terms.items())

    __call__ = evaluate

    def _w_slices(self):
        dz = self.degree_z
        out = []
        for j in range(self.degree_w + 1):
            row = [0.0] * (dz + 1)
            for (i, jj), c in self.terms.items():
                if jj == j:
                    row[dz - i] = float(c)
            out.append(np.array(row))
        return out

    def _eval_array(self, z, w):
        total = np.zeros(np.broadcast(z, w).shape, dtype=np.complex128)
        for j, row in enumerate(self._w_slices()):
            total = total + _poly_eval(row, z) * w ** j
        return total

    def eval_with_partials(self, z, w):
        """(M, M_z, M_w) on arrays."""
        z = np.asarray(z, dtype=np.complex128)
        w = np.asarray(w, dtype=np.complex128)
        M = np.zeros_like(z)
        Mz = np.zeros_like(z)
        Mw = np.zeros_like(z)
        for j, row in enumerate(self._w_slices()):
            p = _poly_eval(row, z)
            dp = _poly_eval(np.polyder(row), z)
            wj = w ** j
            M += p * wj
            Mz += dp * wj
            if j:
                Mw += j * p * w ** (j - 1)
        return M, Mz, Mw

    def restrict_real(self) -> list[int]:
        """Coefficients of M(z, z), descending."""
        deg = max(i + j for i, j in self.terms)
        out = [0] * (deg + 1)
        for (i, j), c in self.terms.items():
            out[deg - i - j] += c
        while out and out[0] == 0:
            out.pop(0)
        return out

    def real_imag_parts(self) -> tuple[dict, dict]:
        """R, S with M(u + iv, u - iv) = R(u, v) + i S(u, v); keys (p, q) for u^p v^q."""
        R, S = {}, {}
        for (i, j), c in self.terms.items():
            for k1 in range(i + 1):
                c1 = math.comb(i, k1) * _ipow(k1)
                for k2 in range(j + 1):
                    c2 = math.comb(j, k2) * _ipow(k2) * (-1) ** k2
                    val = c * c1 * c2
                    key = (i + j - k1 - k2, k1 + k2)
                    R[key] = R.get(key, 0) + int(val.real)
                    S[key] = S.get(key, 0) + int(val.imag)
        return ({k: v for k, v in R.items() if v}, {k: v for k, v in S.items() if v})

    def differences(self, other: dict) -> dict:
        """Terms where this polynomial and ``other`` disagree: key -> (ours, theirs)."""
        keys = set(self.terms) | set(other)
        return {k: (self.terms.get(k, 0), other.get(k, 0)) for k in sorted(keys)
                if self.terms.get(k, 0) != other.get(k, 0)}


def _ipow(k: int) -> complex:
    return (1, 1j, -1, -1j)[k % 4]


@lru_cache(maxsize=None)
def residual_polynomial() -> ResidualPolynomial:
    """M from the construction: clear denominators in J_f, divide by F H T, make primitive.

    The overall scalar is fixed by making the z^60 w coefficient 1 and is recorded.
    """
    c = canonical()
    A0, A1, B0, B1 = _blocks()
    JAA = jacobian_det(A0, A1)
    JBB = jacobian_det(B0, B1)
    K = jacobian_det(A0, B1) + jacobian_det(B0, A1)
    by_w = [
        B1 * B1 * JAA - B1 * A1 * K + A1 * A1 * JBB,
        (B0 * B1 * JAA) * 2 - (B1 * A0 + B0 * A1) * K + (A0 * A1 * JBB) * 2,
        B0 * B0 * JAA - B0 * A0 * K + A0 * A0 * JBB,
    ]
    fht = c.F * c.H * c.T
    quotients = [divide_exact(n, fht) for n in by_w]
    terms = {}
    for j, q in enumerate(quotients):
        for (i, _), coef in q.terms.items():
            terms[(i, j)] = coef
    scalar = terms[(60, 1)]
    if any(v % scalar for v in terms.values()):
        raise ArithmeticError("residual is not an integer multiple of its leading term")
    return ResidualPolynomial({k: v // scalar for k, v in terms.items()}, int(scalar))


def printed_residual() -> ResidualPolynomial:
    return ResidualPolynomial(dict(PRINTED_M))


def printed_real_restriction() -> list[int]:
    out = [1]
    for f in PRINTED_REAL_FACTORS:
        out = np.polymul(np.array(out, dtype=object), np.array(f, dtype=object)).tolist()
    return [int(v) for v in out]


def fit_oracle_scalar(samples: int = 100, seed: int = 0, poly: ResidualPolynomial | None = None):
    """Compare the oracle J*delta^2/(FHT) with M at random points.

    Returns (fitted scalar, worst relative deviation from oracle = scalar * M).
    """
    poly = poly or residual_polynomial()
    rng = np.random.default_rng(seed)
    ratios = []
    oracle_vals, m_vals = [], []
    while len(ratios) < samples:
        z = complex(*rng.uniform(-1.5, 1.5, 2))
        try:
            r = critical_residual(z, z.conjugate())
        except DivisionNearZero:
            continue
        m = poly(z, z.conjugate())
        oracle_vals.append(r)
        m_vals.append(m)
        ratios.append(r / m)
    ratios = np.array(ratios)
    lam = np.median(ratios.real) + 1j * np.median(ratios.imag)
    o, m = np.array(oracle_vals), np.array(m_vals)
    dev = np.abs(o - lam * m) / np.abs(o)
    return lam, float(dev.max())


# -- the real restriction -----------------------------------------------------------------

@dataclass
class RealRoot:
    value: object                     # mpmath mpf / mpc at the polishing precision
    kind: str                         # vertex | face | edge | new | complex

    @property
    def is_real(self) -> bool:
        return self.kind != "complex"

    def __complex__(self):
        return complex(self.value)

    def __float__(self):
        return float(mpmath.re(self.value))


def _polish(coeffs, z0, dps: int, steps: int = 200):
    with mpmath.workdps(dps):
        z = mpmath.mpc(z0)
        eps = mpmath.mpf(10) ** (-(dps - 5))
        for _ in range(steps):
            p, dp = mpmath.polyval(coeffs, z, derivative=True)
            if dp == 0:
                return None
            step = p / dp
            z -= step
            if abs(step) <= eps * max(1, abs(z)):
                return z
    return None


def polynomial_roots(coeffs_desc, dps: int = 50) -> list:
    """All roots of an integer polynomial, polished in mpmath to ``dps`` digits."""
    deg = len(coeffs_desc) - 1
    approx = np.roots(np.array(coeffs_desc, dtype=float))
    roots = []
    for z0 in approx:
        r = _polish(coeffs_desc, complex(z0), dps)
        if r is None:
            break
        roots.append(r)
    with mpmath.workdps(dps):
        distinct = len(roots) == deg and all(
            abs(roots[i] - roots[j]) > mpmath.mpf(10) ** (-dps // 2) * max(1, abs(roots[i]))
            for i in range(deg) for j in range(i))
        if not distinct:
            roots = list(mpmath.polyroots(coeffs_desc, maxsteps=500, extraprec=4 * dps))
    return roots


def classify_point(z, tol: float = 1e-8) -> str:
    V, Fc, E = special_orbits()
    P = np.array([complex(z), 1])
    for orb in (V, Fc, E):
        if float(orb.distances(P)) < tol:
            return orb.label
    return "new"


@dataclass
class RootCensus:
    roots: list
    coefficients: list
    matches_printed: bool

    @property
    def real(self) -> list[RealRoot]:
        return [r for r in self.roots if r.is_real]

    def count(self, kind: str) -> int:
        return sum(r.kind == kind for r in self.roots)

    def summary(self) -> dict:
        return {"total": len(self.roots), "real": len(self.real),
                **{k: self.count(k) for k in ("vertex", "face", "edge", "new")},
                "matches_printed_factorization": self.matches_printed}


def real_restriction_roots(poly: ResidualPolynomial | None = None, dps: int = 50,
                           expected=(61, 19)) -> RootCensus:
    poly = poly or residual_polynomial()
    coeffs = poly.restrict_real()
    roots = polynomial_roots(coeffs, dps)
    out = []
    with mpmath.workdps(dps):
        for r in roots:
            if abs(mpmath.im(r)) < mpmath.mpf("1e-20"):
                r = mpmath.re(r)
                out.append(RealRoot(r, classify_point(float(r))))
            else:
                out.append(RealRoot(r, "complex"))
    out.sort(key=lambda r: (r.kind == "complex", float(mpmath.re(r.value)),
                            float(mpmath.im(r.value))))
    census = RootCensus(out, coeffs, coeffs == printed_real_restriction())
    if expected and (len(out), len(census.real)) != tuple(expected):
        raise RootCountMismatch(f"found {len(out)} roots, {len(census.real)} real; "
                                f"expected {expected[0]}, {expected[1]}")
    return census


# -- the special maps -----------------------------------------------------------------------

@dataclass
class SpecialMapSolution:
    orbit: Orbit
    coefficients: MapFamilyCoefficients
    map: EquivariantMap
    label: str
    seed: object = None               # real root (mpmath) that produced the orbit
    slice: list = field(default_factory=list)

    @property
    def B(self) -> float:
        return float(mpmath.re(self.coefficients.ratio))

    def cycles(self) -> np.ndarray:
        """The 30 two-cycles as an array (30, 2, 2): [p, antipode(p)]."""
        P = self.orbit.points
        Q = antipode_array(P)
        partner = chordal(Q[:, None, :], P[None, :, :]).argmin(axis=1)
        seen, out = set(), []
        for k, j in enumerate(partner):
            if k in seen:
                continue
            seen.update((k, int(j)))
            out.append([P[k], P[j]])
        return np.array(out)


def real_axis_slices(values, tol: float = 1e-9) -> list[list[float]]:
    """Group real points into orbits of the stabilizer of the real axis."""
    G = icosahedral_group()
    stab = [G[k] for k in G.real_axis_stabilizer]
    remaining = sorted(float(v) for v in values)
    out = []
    while remaining:
        z = remaining[0]
        imgs = [complex(g.mobius(z)) for g in stab]
        grp = [v for v in remaining
               if any(abs(v - w) < tol * max(1, abs(w)) for w in imgs if math.isfinite(abs(w)))]
        out.append(grp)
        remaining = [v for v in remaining if v not in grp]
    return out


def special_coefficients(z, dps: int = 50) -> MapFamilyCoefficients:
    with mpmath.workdps(dps):
        z = mpmath.mpf(z) if not isinstance(z, mpmath.mpc) else z
        return solve_coefficients(z, mpmath.conj(z)).normalized()


def map_from_ratio(B) -> EquivariantMap:
    """The monic-in-x member of the family with (a, b) = (1, B), with float coefficients."""
    if isinstance(B, complex) and B.imag == 0:
        B = B.real
    Hphi, Feta = family_parts()
    first = Hphi.first + Feta.first * B
    second = Hphi.second + Feta.second * B
    lead = first.coefficient(31, 0)
    cast = complex if isinstance(B, complex) else float
    return EquivariantMap(first.map_coefficients(lambda c: cast(c / lead)),
                          second.map_coefficients(lambda c: cast(c / lead)))


def classify_polyhedron(orbit: Orbit, tol: float = 1e-8) -> str:
    """'soccer' if the points cluster in pentagons around the 12 vertices,
    'dualSoccer' if in triangles around the 20 face-centers."""
    if orbit.size != 60:
        raise ValueError("polyhedron classification needs a 60-point orbit")
    V, Fc, _ = special_orbits()
    P = orbit.points
    for centers, k, label in ((V, 5, "soccer"), (Fc, 3, "dualSoccer")):
        other = Fc if centers is V else V
        d = chordal(P[:, None, :], centers.points[None, :, :])
        nearest = d.argmin(axis=1)
        r = d.min(axis=1)
        if np.ptp(r) > tol or not (r < other.distances(P) - tol).all():
            continue
        counts = np.bincount(nearest, minlength=centers.size)
        if (counts == k).all():
            return label
    raise Unclassifiable("orbit clusters neither around vertices nor around face-centers")


def build_special_maps(census: RootCensus | None = None, dps: int = 50):
    """(g, h): the soccer-ball and dual-soccer-ball maps found from the new real roots."""
    census = census or real_restriction_roots(dps=dps)
    new = [r for r in census.real if r.kind == "new"]
    slices = real_axis_slices([float(r) for r in new])
    four = [s for s in slices if len(s) == 4]
    if len(four) != 2 or len(slices) != 2:
        raise RootCountMismatch(f"expected two 4-point real slices, got sizes "
                                f"{[len(s) for s in slices]}")
    out = []
    for s in four:
        seed = min((r.value for r in new if float(r) in s), key=lambda v: abs(v))
        orbit = orbit_of(np.array([float(seed), 1.0]))
        if orbit.size != 60:
            raise OrbitSizeError(f"orbit of {float(seed)} has {orbit.size} points")
        coeffs = special_coefficients(seed, dps)
        B = float(mpmath.re(coeffs.ratio))
        label = classify_polyhedron(orbit)
        m = map_from_ratio(B)
        m.name = "g" if label == "soccer" else "h"
        out.append(SpecialMapSolution(orbit, coeffs, m, label, seed, sorted(s)))
    out.sort(key=lambda s: s.label != "soccer")
    return tuple(out)


@lru_cache(maxsize=None)
def special_maps():
    return build_special_maps()


def printed_precision_report(sol: SpecialMapSolution) -> list[dict]:
    """Each printed coefficient against the computed one, rounded to the printed decimals."""
    printed = PRINTED_G if sol.label == "soccer" else PRINTED_H
    rows = []
    for comp, form in (("first", sol.map.first), ("second", sol.map.second)):
        for key, text in printed[comp].items():
            decimals = len(text.split(".")[1]) if "." in text else 0
            value = float(form.coefficient(*key).real if isinstance(form.coefficient(*key),
                                                                    complex)
                          else form.coefficient(*key))
            rows.append({"component": comp, "monomial": key, "printed": text,
                         "computed": value,
                         "match": round(value, decimals) == float(text)})
    return rows


def critical_defect(sol: SpecialMapSolution) -> float:
    """Largest |J_f| / (sum of |terms|) over the orbit."""
    J = critical_form(sol.map)
    P = sol.orbit.points
    return float((np.abs(J.eval_array(P[:, 0], P[:, 1]))
                  / J.abs_eval_array(P[:, 0], P[:, 1])).max())


def chart_distance(P, Q) -> np.ndarray:
    """|z - w| in the affine chart (inf if either point is infinity)."""
    P, Q = normalize(P), normalize(Q)
    with np.errstate(divide="ignore", invalid="ignore"):
        zp = P[..., 0] / P[..., 1]
        zq = Q[..., 0] / Q[..., 1]
    return np.abs(zp - zq)


def cycle_defects(sol: SpecialMapSolution) -> dict:
    m, P = sol.map, sol.orbit.points
    once = m.apply(P)
    twice = m.apply(once)
    return {"antipode_chart": float(chart_distance(once, antipode_array(P)).max()),
            "period2_chart": float(chart_distance(twice, P).max()),
            "antipode_chordal": float(chordal(once, antipode_array(P)).max()),
            "period2_chordal": float(chordal(twice, P).max())}


# -- Newton basins on the fundamental triangle ---------------------------------------------

NEWTON_CLASSES = ("vertex", "face", "edge", "O1", "O2")


def fundamental_triangle() -> np.ndarray:
    """Homogeneous corners: vertex 0, its real neighbour -1/golden, and the shared
    face-center with positive imaginary part."""
    golden = (1 + math.sqrt(5)) / 2
    v0 = np.array([0, 1], dtype=np.complex128)
    v1 = normalize(np.array([-1 / golden, 1], dtype=np.complex128))
    _, Fc, _ = special_orbits()
    P = Fc.points
    score = chordal(P, v0) + chordal(P, v1)
    z = P[:, 0] / P[:, 1]
    score = np.where(z.imag > 0, score, np.inf)
    return np.array([v0, v1, P[int(score.argmin())]])


def triangle_cells(rows: int, corners: np.ndarray | None = None) -> np.ndarray:
    """Centers of the C(rows, 2) upward cells of a triangular subdivision, as affine z.

    Barycentric centers are pushed to the sphere by normalizing the combination of
    the corner unit vectors.
    """
    from .group import homogeneous_to_sphere, sphere_to_homogeneous
    corners = fundamental_triangle() if corners is None else corners
    V = homogeneous_to_sphere(corners)
    m = rows - 1
    bary = []
    for i in range(m):
        for j in range(m - i):
            k = m - 1 - i - j
            bary.append((i + 1 / 3, j + 1 / 3, k + 1 / 3))
    B = np.array(bary) / m
    v = B @ V
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    P = sphere_to_homogeneous(v)
    return P[:, 0] / P[:, 1]


@dataclass
class NewtonBasinResult:
    centers: np.ndarray
    labels: np.ndarray           # index into NEWTON_CLASSES, -1 if not converged
    iterations: np.ndarray

    @property
    def converged_fraction(self) -> float:
        return float((self.labels >= 0).mean())

    def class_counts(self) -> dict:
        out = {name: int((self.labels == k).sum()) for k, name in enumerate(NEWTON_CLASSES)}
        out["none"] = int((self.labels < 0).sum())
        return out


def _known_solution_orbits():
    V, Fc, E = special_orbits()
    g, h = special_maps()
    return [V, Fc, E, g.orbit, h.orbit]


def newton_step(poly: ResidualPolynomial, z):
    """One Newton step for (R, S) = (Re M, Im M) at z = u + iv; returns (z_new, step)."""
    M, Mz, Mw = poly.eval_with_partials(z, np.conj(z))
    Ru_Su = Mz + Mw
    Rv_Sv = 1j * (Mz - Mw)
    Ru, Su = Ru_Su.real, Ru_Su.imag
    Rv, Sv = Rv_Sv.real, Rv_Sv.imag
    R, S = M.real, M.imag
    det = Ru * Sv - Rv * Su
    with np.errstate(divide="ignore", invalid="ignore"):
        du = (R * Sv - Rv * S) / det
        dv = (Ru * S - Su * R) / det
    step = du + 1j * dv
    return z - step, step


def newton_iterate(z0, max_iter: int = 200, poly: ResidualPolynomial | None = None,
                   step_tol: float = 1e-13, escape: float = 1e4):
    """Vectorized Newton iteration; returns (final z, iterations used, converged mask)."""
    poly = poly or residual_polynomial()
    z = np.array(z0, dtype=np.complex128).ravel()
    iters = np.zeros(z.shape, dtype=int)
    done = np.zeros(z.shape, dtype=bool)
    failed = np.zeros(z.shape, dtype=bool)
    active = np.arange(z.size)
    for k in range(1, max_iter + 1):
        if active.size == 0:
            break
        with np.errstate(all="ignore"):
            znew, step = newton_step(poly, z[active])
        bad = ~np.isfinite(znew) | (np.abs(znew) > escape)
        small = np.abs(step) <= step_tol * (1 + np.abs(znew))
        z[active] = np.where(bad, z[active], znew)
        iters[active] = k
        failed[active[bad]] = True
        done[active[small & ~bad]] = True
        active = active[~(bad | small)]
    return z, iters, done


def classify_limits(z, orbits, tol: float = 1e-6) -> np.ndarray:
    P = np.stack([z, np.ones_like(z)], axis=-1)
    labels = np.full(z.shape, -1)
    for k, orb in enumerate(orbits):
        hit = (orb.distances(P) < tol) & (labels < 0)
        labels[hit] = k
    return labels


def newton_basins(rows: int = 300, max_iter: int = 200, threads: int = 1,
                  chunk: int = 4096) -> NewtonBasinResult:
    poly = residual_polynomial()
    orbits = _known_solution_orbits()
    centers = triangle_cells(rows)

    def work(lo):
        zc = centers[lo:lo + chunk]
        z, it, done = newton_iterate(zc, max_iter, poly)
        lab = classify_limits(z, orbits)
        lab[~done] = -1
        return lab, it

    starts = range(0, centers.size, chunk)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    labels = np.concatenate([p[0] for p in parts]) if parts else np.array([], dtype=int)
    iters = np.concatenate([p[1] for p in parts]) if parts else np.array([], dtype=int)
    return NewtonBasinResult(centers, labels, iters)
