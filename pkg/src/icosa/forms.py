"""Homogeneous bivariate forms with exact coefficients.

A form of degree d is a polynomial sum c_ij x^i y^j with i + j = d.  Coefficients
are kept sparse (all icosahedral forms are 5-fold lacunary) and may be any
number type: ``int``/``Fraction`` for the exact identities, ``complex`` or
mpmath numbers for the numerical maps built on top of them.
"""

from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache
from numbers import Number, Rational

import numpy as np


class NotProportional(ValueError):
    """Raised when one form is not an exact scalar multiple of another."""


class NotDivisible(ValueError):
    """Raised when exact division of forms leaves a remainder."""


def _is_zero(c) -> bool:
    return c == 0


class BivariateForm:
    """Immutable homogeneous polynomial in (x, y)."""

    __slots__ = ("degree", "_terms", "_compiled")

    def __init__(self, degree: int, terms=None):
        if degree < 0:
            raise ValueError("degree must be non-negative")
        clean = {}
        for (i, j), c in dict(terms or {}).items():
            if i < 0 or j < 0 or i + j != degree:
                raise ValueError(f"monomial x^{i} y^{j} does not have degree {degree}")
            if not _is_zero(c):
                clean[(int(i), int(j))] = c
        object.__setattr__(self, "degree", int(degree))
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "_compiled", None)

    def __setattr__(self, name, value):
        raise AttributeError("BivariateForm is immutable")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zero(cls, degree: int) -> BivariateForm:
        return cls(degree, {})

    @classmethod
    def monomial(cls, i: int, j: int, c=1) -> BivariateForm:
        return cls(i + j, {(i, j): c})

    @classmethod
    def from_affine(cls, coeffs, degree: int | None = None) -> BivariateForm:
        """Homogenize sum coeffs[k] z^k (ascending order) with z = x/y."""
        n = len(coeffs) - 1
        d = n if degree is None else degree
        if d < n:
            raise ValueError("degree too small for the affine polynomial")
        return cls(d, {(k, d - k): c for k, c in enumerate(coeffs)})

    # -- accessors ------------------------------------------------------------

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items(), key=lambda t: (-t[0][0], t[0][1]))

    def coefficient(self, i: int, j: int):
        return self._terms.get((i, j), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_exact(self) -> bool:
        return all(isinstance(c, Rational) for c in self._terms.values())

    def __len__(self):
        return len(self._terms)

    def __repr__(self):
        if not self._terms:
            return f"BivariateForm({self.degree}, 0)"
        parts = []
        for (i, j), c in self.items():
            mono = "*".join(
                s for s in (f"x^{i}" if i > 1 else "x" if i else "",
                            f"y^{j}" if j > 1 else "y" if j else "") if s)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return f"BivariateForm({self.degree}, {' + '.join(parts)})"

    def __eq__(self, other):
        if not isinstance(other, BivariateForm):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and self._terms == other._terms

    def __hash__(self):
        return hash((self.degree, frozenset(self._terms.items())))

    # -- arithmetic -----------------------------------------------------------

    def _check_degree(self, other: BivariateForm):
        if self.degree != other.degree and not (self.is_zero() or other.is_zero()):
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other):
        if not isinstance(other, BivariateForm):
            return NotImplemented
        self._check_degree(other)
        deg = self.degree if not self.is_zero() else other.degree
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return BivariateForm(deg, out)

    def __neg__(self):
        return BivariateForm(self.degree, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, BivariateForm):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, BivariateForm):
            out = {}
            for (i1, j1), c1 in self._terms.items():
                for (i2, j2), c2 in other._terms.items():
                    k = (i1 + i2, j1 + j2)
                    out[k] = out.get(k, 0) + c1 * c2
            return BivariateForm(self.degree + other.degree, out)
        if isinstance(other, Number) or np.isscalar(other) or hasattr(other, "_mpf_") \
                or hasattr(other, "_mpc_"):
            return BivariateForm(self.degree, {k: c * other for k, c in self._terms.items()})
        return NotImplemented

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = BivariateForm(0, {(0, 0): 1})
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def map_coefficients(self, fn) -> BivariateForm:
        return BivariateForm(self.degree, {k: fn(c) for k, c in self._terms.items()})

    # -- calculus -------------------------------------------------------------

    def dx(self) -> BivariateForm:
        if self.degree == 0:
            return BivariateForm.zero(0)
        return BivariateForm(self.degree - 1,
                             {(i - 1, j): i * c for (i, j), c in self._terms.items() if i})

    def dy(self) -> BivariateForm:
        if self.degree == 0:
            return BivariateForm.zero(0)
        return BivariateForm(self.degree - 1,
                             {(i, j - 1): j * c for (i, j), c in self._terms.items() if j})

    # -- evaluation -----------------------------------------------------------

    def __call__(self, x, y):
        return evaluate(self, (x, y))

    def _compile(self):
        if self._compiled is None:
            ex = np.array([k[0] for k in self._terms], dtype=np.int64)
            ey = np.array([k[1] for k in self._terms], dtype=np.int64)
            cs = np.array([complex(c) for c in self._terms.values()], dtype=np.complex128)
            object.__setattr__(self, "_compiled", (ex, ey, cs))
        return self._compiled

    def eval_array(self, x, y, cache=None):
        """Vectorized complex128 evaluation; ``cache`` shares powers between forms."""
        x = np.asarray(x, dtype=np.complex128)
        y = np.asarray(y, dtype=np.complex128)
        ex, ey, cs = self._compile()
        if cache is None:
            cache = {}
        out = np.zeros(np.broadcast(x, y).shape, dtype=np.complex128)
        for i, j, c in zip(ex.tolist(), ey.tolist(), cs.tolist()):
            xi = cache.get(("x", i))
            if xi is None:
                xi = cache[("x", i)] = x ** i
            yj = cache.get(("y", j))
            if yj is None:
                yj = cache[("y", j)] = y ** j
            out += c * (xi * yj)
        return out

    def abs_eval_array(self, x, y):
        """Sum of |c| |x|^i |y|^j: the scale used for relative vanishing tests."""
        ax = np.abs(np.asarray(x, dtype=np.complex128))
        ay = np.abs(np.asarray(y, dtype=np.complex128))
        ex, ey, cs = self._compile()
        out = np.zeros(np.broadcast(ax, ay).shape)
        for i, j, c in zip(ex.tolist(), ey.tolist(), cs.tolist()):
            out += abs(c) * ax ** i * ay ** j
        return out

    def affine_coefficients(self) -> list:
        """Coefficients of f(z, 1) in ascending powers of z."""
        out = [0] * (self.degree + 1)
        for (i, _), c in self._terms.items():
            out[i] = c
        return out

    # -- serialization --------------------------------------------------------

    def to_json(self) -> dict:
        terms = []
        for (i, j), c in self.items():
            if not isinstance(c, Rational):
                raise TypeError("only exact rational forms are serializable")
            c = Fraction(c)
            terms.append([i, j, c.numerator, c.denominator])
        return {"degree": self.degree, "terms": terms}

    @classmethod
    def from_json(cls, data) -> BivariateForm:
        if isinstance(data, str):
            data = json.loads(data)
        terms = {}
        for i, j, num, den in data["terms"]:
            c = Fraction(num, den)
            terms[(i, j)] = c.numerator if c.denominator == 1 else c
        return cls(data["degree"], terms)


def evaluate(form: BivariateForm, point):
    """Value of ``form`` at the coordinate pair ``point``.

    Exact for int/Fraction inputs on exact forms; otherwise follows the number
    type of the inputs (complex, mpmath, numpy arrays).
    """
    x, y = point
    if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
        return form.eval_array(x, y)
    total = 0
    for (i, j), c in form._terms.items():
        total += c * x ** i * y ** j
    return total


def hessian_det(form: BivariateForm) -> BivariateForm:
    """f_xx f_yy - f_xy^2, not normalized."""
    if form.degree < 2:
        raise ValueError("Hessian needs degree >= 2")
    fxx = form.dx().dx()
    fyy = form.dy().dy()
    fxy = form.dx().dy()
    return _fix_degree(fxx * fyy - fxy * fxy, 2 * (form.degree - 2))


def jacobian_det(f: BivariateForm, g: BivariateForm) -> BivariateForm:
    """f_x g_y - f_y g_x, not normalized."""
    if f.degree < 1 or g.degree < 1:
        raise ValueError("Jacobian needs degrees >= 1")
    return _fix_degree(f.dx() * g.dy() - f.dy() * g.dx(), f.degree + g.degree - 2)


def _fix_degree(form: BivariateForm, degree: int) -> BivariateForm:
    return form if form.degree == degree else BivariateForm(degree, form.terms)


def normalize_to_match(candidate: BivariateForm, target: BivariateForm):
    """Return the exact scalar lam with candidate == lam * target."""
    if target.is_zero():
        raise ValueError("target form is zero")
    if candidate.degree != target.degree:
        raise NotProportional("degrees differ")
    (key, tc), = target.items()[:1]
    lam = candidate.coefficient(*key)
    if isinstance(lam, Rational) and isinstance(tc, Rational):
        lam = Fraction(lam) / Fraction(tc)
        if lam.denominator == 1:
            lam = lam.numerator
    else:
        lam = lam / tc
    if candidate - lam * target != BivariateForm.zero(candidate.degree):
        raise NotProportional("exact division leaves a remainder")
    return lam


def divide_exact(f: BivariateForm, d: BivariateForm) -> BivariateForm:
    """Quotient q with f == q * d, by long division in x over Q[y]."""
    if d.is_zero():
        raise ZeroDivisionError("division by the zero form")
    if f.is_zero():
        return BivariateForm.zero(max(f.degree - d.degree, 0))
    if f.degree < d.degree:
        raise NotDivisible("divisor has larger degree")
    (a, b), lead = d.items()[0]
    exact = f.is_exact() and d.is_exact()
    rem = dict(f._terms)
    quot = {}
    while True:
        keys = [k for k, c in rem.items() if not _is_zero(c) and k[0] >= a]
        if not keys:
            break
        i, j = max(keys)
        if j < b:
            raise NotDivisible("leading term not divisible")
        c = rem[(i, j)]
        q = Fraction(c) / Fraction(lead) if exact else c / lead
        if exact and q.denominator == 1:
            q = q.numerator
        qk = (i - a, j - b)
        quot[qk] = q
        for (di, dj), dc in d._terms.items():
            k = (qk[0] + di, qk[1] + dj)
            rem[k] = rem.get(k, 0) - q * dc
        rem = {k: c for k, c in rem.items() if not _is_zero(c)}
    if rem:
        raise NotDivisible("nonzero remainder")
    return BivariateForm(f.degree - d.degree, quot)


# -- the canonical icosahedral invariants ---------------------------------------

F_TERMS = {(11, 1): 1, (6, 6): -11, (1, 11): -1}
H_TERMS = {(20, 0): 1, (15, 5): 228, (10, 10): 494, (5, 15): -228, (0, 20): 1}
T_TERMS = {(30, 0): 1, (25, 5): -522, (20, 10): -10005, (10, 20): -10005,
           (5, 25): 522, (0, 30): 1}


class CanonicalInvariants:
    """F, H, T as printed, plus the scalars tying H, T to the raw covariants."""

    def __init__(self):
        self.F = BivariateForm(12, F_TERMS)
        self.H = BivariateForm(20, H_TERMS)
        self.T = BivariateForm(30, T_TERMS)
        self.hessian_scalar = normalize_to_match(hessian_det(self.F), self.H)
        self.jacobian_scalar = normalize_to_match(jacobian_det(self.F, self.H), self.T)

    def __iter__(self):
        return iter((self.F, self.H, self.T))


@lru_cache(maxsize=None)
def canonical() -> CanonicalInvariants:
    return CanonicalInvariants()


def syzygy_form(F: BivariateForm, H: BivariateForm, T: BivariateForm) -> BivariateForm:
    return 1728 * F ** 5 - H ** 3 + T ** 2


def verify_syzygy(F=None, H=None, T=None) -> bool:
    """True iff 1728 F^5 - H^3 + T^2 vanishes coefficient by coefficient."""
    inv = canonical()
    F = inv.F if F is None else F
    H = inv.H if H is None else H
    T = inv.T if T is None else T
    if not (F.is_exact() and H.is_exact() and T.is_exact()):
        raise TypeError("syzygy check requires exact forms")
    return syzygy_form(F, H, T).is_zero()
