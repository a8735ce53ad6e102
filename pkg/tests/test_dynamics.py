import cmath
import math

import numpy as np
import pytest

from icosa.dynamics import (CycleSet, NotFound, converge_many, converge_to_cycle,
                            edge_arc_distance, endpoint_limits, find_edge_anchor, iterate,
                            local_degree, pentagon_radius, segment_trajectory,
                            spherical_derivative, vertex_angles)
from icosa.equivariants import eta, family_map, phi
from icosa.group import ProjectivePoint, antipode_array, chordal, random_sphere_points


@pytest.fixture(scope="module")
def cycles(g):
    return CycleSet.antipodal(g.orbit.points)


@pytest.fixture(scope="module")
def anchor(g):
    return find_edge_anchor(g.map, g.orbit.points)


@pytest.fixture(scope="module")
def XY(g):
    c = pentagon_radius(g.orbit.points)
    X = c * cmath.exp(1j * math.pi / 5)
    return X, X.conjugate()


def test_iterate_examples(g, orbits, rng):
    p = ProjectivePoint(*g.orbit.points[7])
    assert iterate(g.map, p, 2).distance(p) < 1e-12
    P = random_sphere_points(10, rng)
    assert chordal(iterate(family_map(5, -3), P, 1), P).max() < 1e-12
    v = orbits[0].points[4]
    assert chordal(iterate(phi(), v, 5), v) < 1e-10


def test_cycle_set(cycles, g):
    assert len(cycles) == 30
    P = cycles.cycles
    assert chordal(P[:, 1], antipode_array(P[:, 0])).max() < 1e-12
    assert chordal(g.map.apply(P[:, 0]), P[:, 1]).max() < 1e-8


def test_full_measure_proxy(g, cycles):
    P = random_sphere_points(10_000, np.random.default_rng(7))
    cyc, iters, status = converge_many(g.map, P, cycles, max_iter=400)
    assert (cyc >= 0).mean() >= 0.99
    assert len(set(cyc[cyc >= 0].tolist())) == 30


def test_orbit_point_converges_immediately(g, cycles):
    r = converge_to_cycle(g.map, g.orbit.points[11], cycles)
    assert r.limit is not None and r.iterations == 0


def test_record_history(g, cycles):
    r = converge_to_cycle(g.map, np.array([0.3 + 0.2j, 1]), cycles, record=True)
    assert r.status == "converged"
    assert len(r.history) == r.iterations + 1
    last = r.history[-1].coords
    assert chordal(last, r.limit.points()).min() < 1e-12


def test_edge_anchor(g, anchor):
    assert abs(anchor.value - 0.143827) < 1e-5
    assert abs(anchor.multiplier) > 1
    assert abs(anchor.image - (-1 / anchor.value)) < 1e-9
    assert anchor.residual < 1e-12


def test_edge_anchor_bad_bracket(g):
    with pytest.raises(NotFound):
        find_edge_anchor(g.map, g.orbit.points, bracket=(0.15, 0.16))


def test_anchor_not_attracted(g, cycles, anchor):
    r = converge_to_cycle(g.map, np.array([anchor.value, 1]), cycles)
    assert r.limit is None


def test_segment_endpoints(g, cycles, anchor, XY):
    X, Y = XY
    assert np.abs(g.orbit.affine() - X).min() < 1e-12
    ends = endpoint_limits(g.map, anchor.value, 1e-3, cycles)
    (up, n_up), (down, n_down) = ends["upper"], ends["lower"]
    assert abs(up - X) < 1e-8 and abs(down - Y) < 1e-8
    assert max(n_up, n_down) <= 200


def test_segment_trajectory_keeps_Z(g, anchor):
    tr = segment_trajectory(g.map, anchor.value, 1e-3, 6, n=50)
    mid = len(tr.polylines[0]) // 2
    for k in range(0, 7, 2):
        assert abs(tr.polylines[k][mid] - anchor.value) < 1e-9


def test_edge_near_arc_monotone(g, anchor, XY):
    X, Y = XY
    ds = [edge_arc_distance(g.map, anchor.value, X, Y, hl) for hl in (1e-2, 1e-3, 1e-4)]
    assert ds[0] > ds[1] > ds[2]
    assert ds[-1] < 1e-5


def test_vertex_trisection(g, anchor, XY):
    X, Y = XY
    c = pentagon_radius(g.orbit.points)
    gaps = vertex_angles(g.map, anchor.value, X, Y, -c)
    assert abs(sum(gaps) - 2 * math.pi) < 1e-12
    assert all(abs(a - 2 * math.pi / 3) < 0.01 for a in gaps)


def test_local_degree_generic(g):
    assert local_degree(g.map, np.array([0.3 + 0.2j, 1])) == 1


def test_local_degree_critical_orbit(g):
    """O1 points are simple critical points of g; g^2 passes two of them."""
    c = pentagon_radius(g.orbit.points)
    p = np.array([-c, 1])
    assert local_degree(g.map, p) == 2
    assert local_degree(g.map, p, period=2) == 4


def test_local_degree_eta_vertex():
    """Vertices are critical of multiplicity three for eta (local degree 4)."""
    v = np.array([0, 1])
    assert local_degree(eta(), v) == 4
    assert local_degree(eta(), v, period=2) == 16


def test_superattracting(g):
    z = g.orbit.affine()
    z = z[np.isfinite(z)]
    assert spherical_derivative(g.map, z).max() < 1e-10


def test_dynamics_equivariant(g, cycles, group, rng):
    from icosa.render import cycle_permutation
    P = random_sphere_points(20, rng)
    base, _, _ = converge_many(g.map, P, cycles)
    for k in rng.choice(60, 10, replace=False):
        A = group[k]
        moved, _, _ = converge_many(g.map, A.apply(P), cycles)
        perm = cycle_permutation(A, cycles)
        ok = base >= 0
        assert np.array_equal(moved[ok], perm[base[ok]])


def test_real_mirror_invariant(g):
    t = np.linspace(-5, 5, 50)
    w = g.map.affine(t + 0j)
    assert np.abs(w.imag).max() < 1e-9 * (1 + np.abs(w)).max()
