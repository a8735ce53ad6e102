"""Tetrahedral system, quintic resolvent and tau labels.

The vanishing of a1, a2, a4, the constancy of a3/F and the reduced quintic do
not hold for the resolvent built from the five tetrahedral quartics (the quartics
are linearly independent, so a1 = -sum T_a cannot vanish).  Those tests are kept
as stated and fail.
"""

import numpy as np
import pytest

from icosa.group import antipode_array, chordal, orbit_of
from icosa.resolvent import (NonConvergence, fit_resolvent, icosa_parameter, is_even,
                             label_permutations, random_points, reduced_quintic_mismatch,
                             resolvent_at, symmetry_breaking_demo, tau_decomposition,
                             tau_labels, tetrahedral_characters, tetrahedral_subgroups,
                             tetrahedral_system, tetrahedron_permutations)


@pytest.fixture(scope="module")
def ts():
    return tetrahedral_system()


@pytest.fixture(scope="module")
def fit(ts):
    return fit_resolvent(ts=ts)


def test_five_subgroups_of_order_12(group):
    subs = tetrahedral_subgroups(group)
    assert len(subs) == 5 and all(len(s) == 12 for s in subs)
    assert sorted(sum(group.orders[k] == 3 for k in s) for s in subs) == [8] * 5


def test_tetrahedra_partition_faces(ts, orbits):
    pts = sorted(i for q in ts.tetrahedra for i in q)
    assert pts == list(range(20))
    for a in range(1, 6):
        T = ts.tetrahedron_points(a)
        assert orbits[1].distances(T).max() < 1e-12


def test_each_tetrahedron_is_a_subgroup_orbit(ts, group):
    for a, (sub, quad) in enumerate(zip(ts.subgroups, ts.tetrahedra), 1):
        T = ts.tetrahedron_points(a)
        img = np.concatenate([group[k].apply(T[:1]) for k in sub])
        assert chordal(img[:, None, :], T[None, :, :]).min(axis=1).max() < 1e-10
        # the opposite tetrahedron (the antipodes) belongs to the other chiral system
        anti = antipode_array(T)
        assert chordal(anti[:, None, :], T[None, :, :]).min(axis=1).min() > 0.1


def test_alt5_action_on_tetrahedra(ts):
    perms = tetrahedron_permutations(ts)
    assert len(perms) == 60 and all(is_even(p) for p in perms)


def test_flip_selects_other_system(ts):
    other = tetrahedral_system(True)
    assert other.flipped and not set(other.tetrahedra) & set(ts.tetrahedra)


def test_half_turn_labels(ts, group):
    for sub, turns in zip(ts.subgroups, ts.half_turns):
        assert len(turns) == 3 and set(turns) <= sub
    assert sorted(k for t in ts.half_turns for k in t) == sorted(
        k for k in range(60) if group.orders[k] == 2)


def test_a5_over_H_constant(fit):
    assert fit.spread_c < 1e-8
    assert abs(fit.c + 1) < 1e-12


def test_a1_a2_a4_vanish(fit):
    for k in (1, 2, 4):
        assert fit.vanishing[k] < 1e-8, f"|a{k}| relative {fit.vanishing[k]:.3g}"


def test_a3_over_F_constant(fit):
    assert fit.spread_b < 1e-8, f"relative spread {fit.spread_b:.3g}"


def test_reduced_quintic_roots(fit, ts):
    worst = max(reduced_quintic_mismatch(z, fit.b, fit.c, ts) for z in random_points(10))
    assert worst < 1e-8, f"root mismatch {worst:.3g}"


def test_obstruction_measured(ts):
    """Why a1 cannot vanish: the quartics are independent relative invariants."""
    info = tetrahedral_characters(ts)
    assert info["rank"] == 5
    for chars in info["characters"]:
        assert len(chars) == 3          # all three cube roots of unity occur


def test_resolvent_degrees(ts):
    d = resolvent_at(0.3 + 0.4j, ts)
    assert len(d.coefficients) == 6 and d.coefficients[0] == 1
    assert np.allclose(np.prod(d.values), d.H)


def test_icosa_parameter_invariant(rng):
    p = np.array([complex(*rng.normal(size=2)), 1])
    o = orbit_of(p)
    vals = np.array([icosa_parameter(z) for z in o.affine() if np.isfinite(z)])
    assert np.ptp(np.abs(vals)) / np.abs(vals).mean() < 1e-8
    assert np.abs(vals - vals[0]).max() / abs(vals[0]) < 1e-8


@pytest.mark.parametrize("which", [0, 1])
def test_tau_decomposition(maps, ts, which):
    sol = maps[which]
    dec = tau_decomposition(sol.orbit, ts)
    assert np.bincount(dec["labels"])[1:].tolist() == [12] * 5
    perms = label_permutations(sol.orbit, dec["labels"])
    assert len(perms) == 60 and all(is_even(p) for p in perms)


def test_antipodes_share_label(g, ts):
    labels = tau_labels(g.orbit, ts)
    P = g.orbit.points
    j = chordal(antipode_array(P)[:, None, :], P[None, :, :]).argmin(axis=1)
    assert np.array_equal(labels, labels[j])


def test_symmetry_breaking_demo(g, ts):
    from icosa.group import random_sphere_points
    seeds = random_sphere_points(1000, np.random.default_rng(2024))
    rep = symmetry_breaking_demo(g, seeds, ts)
    assert rep.converged >= 990
    assert rep.same_label_fraction == 1.0
    for a in range(1, 6):
        assert abs(rep.counts[a] / rep.converged - 0.2) < 0.05
    assert rep.first["tau_orbit_size"] == 12


def test_demo_seed_on_orbit(g, ts):
    rep = symmetry_breaking_demo(g, g.orbit.points[:1], ts)
    assert rep.converged == 1 and rep.same_label == 1


def test_demo_single_seed_failure(g, ts):
    from icosa.dynamics import find_edge_anchor
    Z = find_edge_anchor(g.map, g.orbit.points).value
    with pytest.raises(NonConvergence):
        symmetry_breaking_demo(g, np.array([[Z, 1]]), ts)
