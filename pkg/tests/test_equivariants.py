import numpy as np
import pytest

from icosa.equivariants import (MapFamilyCoefficients, TABLE1_EXPECTED, basic_equivariants,
                                check_table1, critical_form, cross, epsilon,
                                equivariance_defect, eta, family_map, module_relation, phi,
                                table1_passes, verify_module_relation)
from icosa.forms import BivariateForm, canonical, divide_exact, normalize_to_match
from icosa.group import antipode_array, chordal, random_sphere_points


def test_cross_of_xy():
    m = cross(BivariateForm.monomial(1, 1))
    assert m.first == BivariateForm.monomial(1, 0)
    assert m.second == BivariateForm.monomial(0, 1) * -1


def test_phi_printed():
    p = phi()
    assert p.first == BivariateForm(11, {(11, 0): -1, (6, 5): 66, (1, 10): 11})
    assert p.second == BivariateForm(11, {(10, 1): 11, (5, 6): -66, (0, 11): -1})
    # phi is the negative of cross(F); projectively the same map
    assert (-cross(canonical().F)) == p


def test_eta_degree_and_sign():
    assert eta().degree == 19
    assert eta() == -cross(canonical().H)


def test_family_degree_and_members():
    c = canonical()
    ph, et, _ = basic_equivariants()
    assert family_map(1, 0) == ph * c.H
    assert family_map(0, 1) == et * c.F
    assert family_map(MapFamilyCoefficients(2, 3)).degree == 31
    with pytest.raises(ValueError):
        MapFamilyCoefficients(0, 0)


def test_module_relation():
    assert verify_module_relation()
    assert not verify_module_relation((5, 5, 3))
    m = module_relation()
    assert m.evaluate(1, 2) == (0, 0)


def test_family_5_minus3_is_identity(rng):
    m = family_map(5, -3)
    c = canonical()
    assert m == epsilon() * c.T * -5
    P = random_sphere_points(20, rng)
    assert chordal(m.apply(P), P).max() < 1e-12


def test_equivariance(rng):
    P = random_sphere_points(20, rng)
    for m in (phi(), eta(), family_map(1, 0.37), family_map(1.0, -2.5 + 1j)):
        assert equivariance_defect(m, P) < 1e-8


def test_critical_forms():
    c = canonical()
    assert normalize_to_match(critical_form(phi()), c.H) == -121
    assert normalize_to_match(critical_form(eta()), c.F ** 3) == 1732800
    assert critical_form(epsilon()).degree == 0 and not critical_form(epsilon()).is_zero()
    assert critical_form(family_map(1, 0)).degree == 60
    normalize_to_match(critical_form(family_map(1, 0)), c.H ** 3)
    normalize_to_match(critical_form(family_map(0, 1)), c.F ** 5)
    normalize_to_match(critical_form(family_map(5, -3)), c.T ** 2)


def test_generic_critical_form_not_divisible():
    from icosa.forms import NotDivisible
    c = canonical()
    J = critical_form(family_map(1, 3))
    assert J.degree == 60
    for f in c:
        with pytest.raises(NotDivisible):
            divide_exact(J, f)


def test_table1():
    report = check_table1()
    assert table1_passes(report)
    for m, row in TABLE1_EXPECTED.items():
        for orbit, kind in row.items():
            assert report[m][orbit][0] == kind


def test_table1_examples(orbits):
    inf = np.array([[1, 0]], dtype=complex)
    assert chordal(phi().apply(inf), inf).max() < 1e-15
    assert chordal(eta().apply(inf), np.array([[0, 1]])).max() < 1e-15
    Fc = orbits[1].points
    assert chordal(phi().apply(Fc), antipode_array(Fc)).max() < 1e-9
