import cmath
import math

import numpy as np
import pytest

from icosa.group import (ClosureOverflow, Orbit, ProjectivePoint, antipode, antipode_array,
                         build_group, chordal, homogeneous_to_sphere, normalize, orbit_of,
                         printed_vertices, random_sphere_points)


def test_order_census(group):
    assert len(group) == 60
    assert group.order_census() == {1: 1, 2: 15, 3: 20, 5: 24}


def test_determinant_one(group):
    for g in group:
        assert abs(g.determinant - 1) < 1e-12


def test_closed_under_composition(group):
    T = group.table
    assert T.shape == (60, 60)
    # every row and column is a permutation (Latin square)
    assert all(len(set(row)) == 60 for row in T)
    assert all(len(set(col)) == 60 for col in T.T)
    for k in range(60):
        assert T[k, group.inverse[k]] == 0


def test_closure_overflow_guard():
    with pytest.raises(ClosureOverflow):
        build_group(max_elements=30)


def test_vertices_permuted(group, orbits):
    V = orbits[0].points
    for g in group:
        d = chordal(g.apply(V)[:, None, :], V[None, :, :]).min(axis=1)
        assert d.max() < 1e-10


def test_special_orbit_sizes(orbits):
    assert [o.size for o in orbits] == [12, 20, 30]
    assert [o.label for o in orbits] == ["vertex", "face", "edge"]
    V = orbits[0]
    # 0 and infinity are vertices, and so are the roots of z^2 - z - 1
    for z in (0, None, (1 + math.sqrt(5)) / 2, (1 - math.sqrt(5)) / 2):
        assert V.contains(ProjectivePoint.from_z(z).coords)


def test_orbit_of_examples(group, orbits, rng):
    assert orbit_of(np.array([0, 1])).size == 12
    assert orbit_of(random_sphere_points(1, rng)[0]).size == 60
    E = orbits[2]
    real_mid = min((p for p in E.points if abs(p[1]) > 0 and abs((p[0] / p[1]).imag) < 1e-12),
                   key=lambda p: abs(p[0] / p[1]))
    assert orbit_of(real_mid).size == 30
    face = orbits[1].points[3]
    o = orbit_of(face)
    assert o.size == 20 and orbits[1].distances(o.points).max() < 1e-9


def test_printed_vertex_list(orbits):
    """Six printed values are vertices; the other four are vertices after z -> -z."""
    V = orbits[0]
    zs = printed_vertices()
    assert len(zs) == 10
    P = np.array([[z, 1] for z in zs])
    on = V.distances(P) < 1e-10
    assert on.sum() == 6
    flipped = np.array([[-z, 1] for z in np.array(zs)[~on]])
    assert (V.distances(flipped) < 1e-10).all()


def test_antipode_examples(rng):
    assert antipode(ProjectivePoint(0, 1)) == ProjectivePoint(1, 0)
    p = antipode(ProjectivePoint.from_z(1 + 1j))
    assert abs(p.z - (-1 / (1 - 1j))) < 1e-15
    P = random_sphere_points(100, rng)
    assert np.allclose(antipode_array(antipode_array(P)), P)
    v = homogeneous_to_sphere(P)
    assert np.allclose(homogeneous_to_sphere(antipode_array(P)), -v)


def test_projective_point_normalization():
    p = ProjectivePoint(3 + 4j, 1)
    assert p.x == 1 and ProjectivePoint(p.x, p.y) == p
    with pytest.raises(ValueError):
        ProjectivePoint(0, 0)
    assert ProjectivePoint.from_z(complex("inf")).is_infinite


def test_mirrors(group, rng):
    assert len(group.mirrors) == 15
    real = group.mirror_containing(np.array([0.37, 1]))
    assert real is not None and real is group.real_mirror()
    for t in (-3.0, 0.5, 12.0):
        assert group.mirror_containing(np.array([t, 1])) is real
    assert group.mirror_containing(random_sphere_points(1, rng)[0]) is None


def test_real_axis_stabilizer_is_klein_four(group):
    stab = group.real_axis_stabilizer
    assert len(stab) == 4
    assert sorted(group.orders[k] for k in stab) == [1, 2, 2, 2]
    assert all(group.table[a, b] in stab for a in stab for b in stab)


def test_special_points_on_two_mirrors(group, orbits):
    for orb in orbits:
        for p in orb.points:
            n = sum(float(m.distance(p)) < 1e-9 for m in group.mirrors)
            assert n >= 2


def test_half_turn_axes_and_mirrors(group, orbits):
    E = orbits[2]
    for m in group.mirrors:
        A = group[m.element]
        # fixed points are antipodal edge-midpoints
        assert chordal(m.axis[1], antipode_array(m.axis[0])) < 1e-10
        assert E.distances(m.axis).max() < 1e-10
        # A sends each point of its mirror circle to the antipode
        S = m.sample(16)
        assert chordal(A.apply(S), antipode_array(S)).max() < 1e-10


def test_orbit_json_round_trip(orbits):
    for orb in orbits:
        data = orb.to_json()
        back = Orbit.from_json(data)
        assert back.size == orb.size and orb.distances(back.points).max() < 1e-12
    infinite = [p for p in orbits[0].to_json()["points"] if p[2]]
    assert len(infinite) == 1


def test_normalize_idempotent(rng):
    P = rng.normal(size=(20, 2)) + 1j * rng.normal(size=(20, 2))
    N = normalize(P)
    assert np.array_equal(normalize(N), N)
    assert np.allclose(np.abs(N).max(axis=1), 1)


def test_generators_fifth_turn(group):
    zeta = cmath.exp(2j * math.pi / 5)
    ks = [k for k in range(60) if abs(group[k].mobius(1.0) - zeta) < 1e-12]
    assert len(ks) == 1 and group.orders[ks[0]] == 5
