"""Exact form arithmetic, checked against sympy as an independent oracle."""

from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from icosa.forms import (BivariateForm, NotDivisible, NotProportional, canonical,
                         divide_exact, evaluate, hessian_det, jacobian_det,
                         normalize_to_match, syzygy_form, verify_syzygy)

x, y = sp.symbols("x y")


def to_sympy(f: BivariateForm):
    return sp.expand(sum(sp.Rational(Fraction(c).numerator, Fraction(c).denominator)
                         * x ** i * y ** j for (i, j), c in f.items()))


def from_sympy(expr, degree):
    poly = sp.Poly(sp.expand(expr), x, y)
    terms = {}
    for (i, j), c in poly.terms():
        if c == 0:
            continue
        c = Fraction(int(c.p), int(c.q))
        terms[(i, j)] = c.numerator if c.denominator == 1 else c
    return BivariateForm(degree, terms)


def test_printed_F():
    F = canonical().F
    assert to_sympy(F) == sp.expand(x * y * (x ** 10 - 11 * x ** 5 * y ** 5 - y ** 10))


def test_hessian_matches_sympy():
    F = canonical().F
    Fs = to_sympy(F)
    oracle = sp.expand(sp.diff(Fs, x, 2) * sp.diff(Fs, y, 2) - sp.diff(Fs, x, y) ** 2)
    assert to_sympy(hessian_det(F)) == oracle


def test_jacobian_matches_sympy():
    c = canonical()
    Fs, Hs = to_sympy(c.F), to_sympy(c.H)
    oracle = sp.expand(sp.diff(Fs, x) * sp.diff(Hs, y) - sp.diff(Fs, y) * sp.diff(Hs, x))
    assert to_sympy(jacobian_det(c.F, c.H)) == oracle


def test_syzygy_in_sympy():
    c = canonical()
    F, H, T = (to_sympy(f) for f in c)
    assert sp.expand(1728 * F ** 5 - H ** 3 + T ** 2) == 0


def test_normalization_scalars():
    c = canonical()
    assert normalize_to_match(hessian_det(c.F), c.H) == -121
    assert normalize_to_match(jacobian_det(c.F, c.H), c.T) == -20
    assert c.hessian_scalar == -121 and c.jacobian_scalar == -20


def test_normalize_examples():
    F = canonical().F
    assert normalize_to_match(F * 2, F) == 2
    with pytest.raises(NotProportional):
        normalize_to_match(BivariateForm.monomial(2, 0), BivariateForm.monomial(0, 2))


def test_small_covariants():
    xy = BivariateForm.monomial(1, 1)
    assert hessian_det(xy) == BivariateForm(0, {(0, 0): -1})
    circle = BivariateForm(2, {(2, 0): 1, (0, 2): 1})
    assert hessian_det(circle) == BivariateForm(0, {(0, 0): 4})
    X, Y = BivariateForm.monomial(1, 0), BivariateForm.monomial(0, 1)
    assert jacobian_det(X, Y) == BivariateForm(0, {(0, 0): 1})
    F = canonical().F
    assert jacobian_det(F, F).is_zero()


def test_evaluate_examples():
    c = canonical()
    assert evaluate(c.F, (0, 1)) == 0
    assert evaluate(c.F, (1, 1)) == -11
    assert evaluate(c.H, (1, 1)) == 496
    assert evaluate(c.T, (1, 1)) == -20008
    assert 1728 * (-11) ** 5 - 496 ** 3 + (-20008) ** 2 == 0


def test_syzygy_exact_and_perturbed():
    c = canonical()
    assert verify_syzygy()
    assert syzygy_form(c.F, c.H, c.T).is_zero()
    assert not verify_syzygy(c.F, c.H, c.T + BivariateForm.monomial(30, 0))


def test_invariant_storage():
    for f in canonical():
        assert all(i + j == f.degree for (i, j), _ in f.items())
        assert all(v != 0 for _, v in f.items())
        assert f.is_exact()
    c = canonical()
    assert c.H.coefficient(20, 0) == 1 and c.T.coefficient(30, 0) == 1
    with pytest.raises(ValueError):
        BivariateForm(3, {(1, 1): 1})


def test_divide_exact():
    c = canonical()
    assert divide_exact(c.F * c.H, c.H) == c.F
    with pytest.raises(NotDivisible):
        divide_exact(c.H, c.F)


def test_json_round_trip():
    for f in canonical():
        assert BivariateForm.from_json(f.to_json()) == f
    half = BivariateForm(2, {(2, 0): Fraction(1, 2), (0, 2): -3})
    data = half.to_json()
    assert sorted(data["terms"]) == [[0, 2, -3, 1], [2, 0, 1, 2]]
    assert BivariateForm.from_json(data) == half


coeff = st.integers(-20, 20)


@st.composite
def forms(draw, degree):
    cs = draw(st.lists(coeff, min_size=degree + 1, max_size=degree + 1))
    return BivariateForm(degree, {(degree - k, k): c for k, c in enumerate(cs) if c})


@settings(max_examples=40, deadline=None)
@given(forms(4), st.integers(-7, 7).filter(bool))
def test_hessian_scales_quadratically(f, k):
    assert hessian_det(f * k) == hessian_det(f) * (k * k)


@settings(max_examples=40, deadline=None)
@given(forms(3), forms(2))
def test_product_matches_sympy(f, g):
    assert to_sympy(f * g) == sp.expand(to_sympy(f) * to_sympy(g))
    assert from_sympy(to_sympy(f) * to_sympy(g), 5) == f * g
