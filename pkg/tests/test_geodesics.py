import math

import numpy as np
import pytest

from meshfab.errors import DisconnectedEndpoints
from meshfab.geodesics import (
    GeodesicSolver,
    SurfacePoint,
    geodesic_distance,
    ring_lengths,
    surface_point_near,
)
from meshfab.mesh_io import Mesh

from helpers import make_cube, make_cylinder, make_plate, make_subdivided_cube

# opposite corners of a unit cube: unfolding two adjacent faces into a plane
# gives the exact geodesic sqrt(1^2 + 2^2)
CUBE_GEODESIC = math.sqrt(5.0)


def corner_point(mesh, corner_xyz):
    """SurfacePoint pinned at an existing mesh vertex."""
    corner = np.asarray(corner_xyz, dtype=float)
    vid = int(np.argmin(np.linalg.norm(mesh.vertices - corner, axis=1)))
    assert np.linalg.norm(mesh.vertices[vid] - corner) < 1e-9
    for f, tri in enumerate(mesh.faces):
        if vid in tri:
            bary = [0.0, 0.0, 0.0]
            bary[list(tri).index(vid)] = 1.0
            return SurfacePoint(face=f, bary=tuple(bary))
    raise AssertionError("vertex not used by any face")


def test_same_triangle_straight_segment():
    m = make_cube()
    a = SurfacePoint(face=0, bary=(0.6, 0.2, 0.2))
    b = SurfacePoint(face=0, bary=(0.1, 0.3, 0.6))
    path = geodesic_distance(m, a, b)
    expected = float(np.linalg.norm(a.position(m) - b.position(m)))
    assert math.isclose(path.length, expected, rel_tol=1e-12)
    assert math.isclose(path.lower_bound, expected, rel_tol=1e-12)
    assert len(path.points) == 2


def test_same_point_twice_zero_length():
    m = make_cube()
    a = SurfacePoint(face=3, bary=(0.25, 0.5, 0.25))
    path = geodesic_distance(m, a, a)
    assert path.length == 0.0
    assert len(path.points) == 1


def test_cube_corner_to_corner_plain():
    m = make_cube()
    a = corner_point(m, (0, 0, 0))
    b = corner_point(m, (1, 1, 1))
    path = geodesic_distance(m, a, b, refine=True)
    assert path.length <= CUBE_GEODESIC * 1.02
    assert path.length >= math.sqrt(3.0) - 1e-6
    assert math.isclose(path.lower_bound, math.sqrt(3.0), rel_tol=1e-12)


def test_cube_corner_to_corner_subdivided():
    m = make_subdivided_cube(9)  # 972 faces
    a = corner_point(m, (0, 0, 0))
    b = corner_point(m, (1, 1, 1))
    refined = geodesic_distance(m, a, b, refine=True)
    assert refined.length <= CUBE_GEODESIC * 1.02
    assert refined.length >= math.sqrt(3.0) - 1e-6


def test_refined_never_longer_than_graph_path():
    m = make_subdivided_cube(5)
    solver = GeodesicSolver(m)
    a = corner_point(m, (0, 0, 0))
    b = corner_point(m, (1, 1, 1))
    rough = geodesic_distance(m, a, b, refine=False, solver=solver)
    refined = geodesic_distance(m, a, b, refine=True, solver=solver)
    assert refined.length <= rough.length + 1e-9


def test_path_points_stay_on_surface():
    from meshfab.surface import MeshSurfaceIndex

    m = make_subdivided_cube(4)
    a = corner_point(m, (0, 0, 0))
    b = corner_point(m, (1, 1, 1))
    path = geodesic_distance(m, a, b)
    index = MeshSurfaceIndex(m)
    _, dist, _ = index.query(path.points)
    assert dist.max() < 1e-6


def test_disconnected_endpoints():
    verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0],
                      [5, 0, 0], [6, 0, 0], [5, 1, 0]], dtype=float)
    faces = np.array([[0, 1, 2], [3, 4, 5]])
    m = Mesh(vertices=verts, faces=faces)
    a = SurfacePoint(face=0, bary=(1, 0, 0))
    b = SurfacePoint(face=1, bary=(1, 0, 0))
    with pytest.raises(DisconnectedEndpoints) as e:
        geodesic_distance(m, a, b)
    assert e.value.component_a != e.value.component_b


def test_symmetry_property():
    m = make_subdivided_cube(4)
    solver = GeodesicSolver(m)
    rng = np.random.default_rng(13)
    for _ in range(8):
        fa, fb = rng.integers(0, m.face_count, 2)
        ba = rng.dirichlet([1, 1, 1])
        bb = rng.dirichlet([1, 1, 1])
        a = SurfacePoint(face=int(fa), bary=tuple(ba / ba.sum()))
        b = SurfacePoint(face=int(fb), bary=tuple(bb / bb.sum()))
        d_ab = geodesic_distance(m, a, b, solver=solver).length
        d_ba = geodesic_distance(m, b, a, solver=solver).length
        assert abs(d_ab - d_ba) < 1e-6


def test_triangle_inequality_property():
    m = make_subdivided_cube(3)
    solver = GeodesicSolver(m)
    rng = np.random.default_rng(29)
    for _ in range(6):
        pts = []
        for _ in range(3):
            f = int(rng.integers(0, m.face_count))
            w = rng.dirichlet([1, 1, 1])
            pts.append(SurfacePoint(face=f, bary=tuple(w / w.sum())))
        a, b, c = pts
        d_ac = geodesic_distance(m, a, c, solver=solver).length
        d_ab = geodesic_distance(m, a, b, solver=solver).length
        d_bc = geodesic_distance(m, b, c, solver=solver).length
        assert d_ac <= d_ab + d_bc + 1e-6


def test_lower_bound_always_holds():
    m = make_subdivided_cube(4)
    solver = GeodesicSolver(m)
    rng = np.random.default_rng(31)
    for _ in range(10):
        fa, fb = rng.integers(0, m.face_count, 2)
        wa = rng.dirichlet([1, 1, 1])
        wb = rng.dirichlet([1, 1, 1])
        a = SurfacePoint(face=int(fa), bary=tuple(wa / wa.sum()))
        b = SurfacePoint(face=int(fb), bary=tuple(wb / wb.sum()))
        path = geodesic_distance(m, a, b, solver=solver)
        assert path.length >= path.lower_bound - 1e-9


def test_surface_point_schema():
    with pytest.raises(ValueError):
        SurfacePoint(face=0, bary=(0.5, 0.2, 0.2))
    with pytest.raises(ValueError):
        SurfacePoint(face=0, bary=(1.2, -0.2, 0.0))
    p = SurfacePoint(face=0, bary=(0.5, 0.25, 0.25))
    assert math.isclose(sum(p.bary), 1.0, abs_tol=1e-12)


def test_surface_point_near_cube_face():
    m = make_cube()
    p = surface_point_near(m, (2.0, 0.5, 0.5))
    pos = p.position(m)
    assert np.allclose(pos, [1.0, 0.5, 0.5], atol=1e-9)
    assert math.isclose(sum(p.bary), 1.0, abs_tol=1e-9)


# ring sections ---------------------------------------------------------------

def test_cylinder_ring_circumference():
    radius, height, segments = 100.0, 400.0, 64
    m = make_cylinder(radius, height, segments)
    rings = ring_lengths(m, (0, 0, 1), 100.0)
    stations = sorted({r.station for r in rings})
    assert stations == [100.0, 200.0, 300.0]
    expected = 2 * math.pi * radius
    for r in rings:
        assert r.closed
        assert abs(r.circumference - expected) / expected < 0.01


def test_cube_mid_section_perimeter():
    m = make_cube()
    rings = ring_lengths(m, (0, 0, 1), 0.5)
    assert len(rings) == 1
    assert rings[0].station == 0.5
    assert math.isclose(rings[0].circumference, 4.0, abs_tol=1e-9)
    assert rings[0].closed


def test_station_outside_mesh_skipped():
    m = make_cube()
    assert ring_lengths(m, (0, 0, 1), 10.0) == []


def test_open_section_flagged():
    m = make_plate(10.0, 6.0, nx=4, ny=3)  # flat open sheet in z=0
    rings = ring_lengths(m, (1, 0, 0), 2.5)
    assert rings
    for r in rings:
        assert not r.closed
        assert math.isclose(r.circumference, 6.0, abs_tol=1e-9)


def test_two_loop_section_sorted_descending():
    # two nested-ish cylinders side by side: section crosses both, two loops
    big = make_cylinder(50.0, 100.0, 32)
    small = make_cylinder(20.0, 100.0, 32)
    shifted = small.transformed(small.vertices + np.array([200.0, 0.0, 0.0]))
    verts = np.vstack([big.vertices, shifted.vertices])
    faces = np.vstack([big.faces, shifted.faces + big.vertex_count])
    m = Mesh(vertices=verts, faces=faces)
    rings = ring_lengths(m, (0, 0, 1), 50.0)
    at_50 = [r for r in rings if r.station == 50.0]
    assert len(at_50) == 2
    assert at_50[0].circumference > at_50[1].circumference
