import math

import numpy as np
import pytest

from meshfab.errors import EmptyMesh, MalformedFile, UnsupportedFormat
from meshfab.mesh_io import (
    Mesh,
    detect_format,
    export_mesh_json,
    export_mesh_obj,
    import_mesh_json,
    mesh_stats,
    parse_mesh,
)

from helpers import make_cube, random_rotation

ONE_TRIANGLE_STL = b"""solid tri
facet normal 0 0 1
  outer loop
    vertex 0 0 0
    vertex 1 0 0
    vertex 0 1 0
  endloop
endfacet
endsolid tri
"""

# hand-written cube, 8 vertices / 12 triangular faces
CUBE_OBJ = b"""# cube
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 3 2
f 1 4 3
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 3 4 8
f 3 8 7
f 2 3 7
f 2 7 6
f 4 1 5
f 4 5 8
"""

TWO_TRIANGLE_PLY = b"""ply
format ascii 1.0
comment disjoint pair
element vertex 6
property float x
property float y
property float z
element face 2
property list uchar int vertex_indices
end_header
0 0 0
1 0 0
0 1 0
5 0 0
6 0 0
5 1 0
3 0 1 2
3 3 4 5
"""


def edge_pairing_is_closed(mesh):
    """Independent closedness oracle: brute-force edge pairing."""
    count = {}
    for a, b, c in mesh.faces:
        for u, v in ((a, b), (b, c), (c, a)):
            count[frozenset((int(u), int(v)))] = count.get(frozenset((int(u), int(v))), 0) + 1
    return all(n == 2 for n in count.values())


def test_parse_one_triangle_ascii_stl():
    m = parse_mesh(ONE_TRIANGLE_STL, "stl_ascii")
    assert m.vertex_count == 3
    assert m.face_count == 1
    assert m.name == "tri"


def test_parse_obj_cube_closed():
    m = parse_mesh(CUBE_OBJ, "obj")
    assert m.vertex_count == 8
    assert m.face_count == 12
    stats = mesh_stats(m)
    assert stats.is_closed
    assert edge_pairing_is_closed(m)


def test_face_index_out_of_range_is_malformed():
    bad = CUBE_OBJ + b"f 1 2 10\n"
    with pytest.raises(MalformedFile):
        parse_mesh(bad, "obj")


def test_parse_ply_two_components():
    m = parse_mesh(TWO_TRIANGLE_PLY, "ply_ascii")
    stats = mesh_stats(m)
    assert stats.connected_components == 2
    assert not stats.is_closed


def test_binary_stl_roundtrip_welds_duplicates():
    import struct

    m = make_cube()
    records = []
    for tri in m.triangle_points():
        normal = np.cross(tri[1] - tri[0], tri[2] - tri[0])
        normal = normal / np.linalg.norm(normal)
        rec = struct.pack("<12f", *normal, *tri[0], *tri[1], *tri[2])
        records.append(rec + b"\x00\x00")
    blob = b"\x00" * 80 + struct.pack("<I", len(records)) + b"".join(records)
    parsed = parse_mesh(blob, "auto")
    assert parsed.vertex_count == 8  # welded back to shared vertices
    assert parsed.face_count == 12
    assert math.isclose(mesh_stats(parsed).surface_area, 6.0, rel_tol=1e-6)


def test_cube_surface_area_and_bbox():
    stats = mesh_stats(make_cube())
    assert math.isclose(stats.surface_area, 6.0, rel_tol=1e-12)
    assert stats.bbox_min == (0.0, 0.0, 0.0)
    assert stats.bbox_max == (1.0, 1.0, 1.0)


def test_single_triangle_not_closed():
    m = parse_mesh(ONE_TRIANGLE_STL, "stl_ascii")
    assert not mesh_stats(m).is_closed


def test_surface_area_rigid_invariant():
    rng = np.random.default_rng(7)
    m = make_cube()
    base = mesh_stats(m).surface_area
    for _ in range(5):
        q = random_rotation(rng)
        t = rng.uniform(-50, 50, 3)
        moved = m.transformed(m.vertices @ q.T + t)
        assert math.isclose(mesh_stats(moved).surface_area, base, rel_tol=1e-6)


def test_json_export_roundtrip():
    m = make_cube(size=1.0)
    blob = export_mesh_json(m)
    back = import_mesh_json(blob)
    assert np.abs(back.vertices - m.vertices).max() < 1e-5
    assert np.array_equal(back.faces, m.faces)
    assert back.unit_scale == m.unit_scale
    assert b'"faces"' in blob


def test_json_export_empty_name_kept():
    m = Mesh(vertices=np.eye(3), faces=np.array([[0, 1, 2]]), name="")
    blob = export_mesh_json(m)
    assert b'"name": ""' in blob


def test_json_export_cube_face_count():
    blob = export_mesh_json(make_cube())
    faces_field = blob.split(b'"faces": [')[1].split(b"]")[0]
    assert len(faces_field.split(b",")) == 36  # 12 faces * 3 indices


def test_json_export_deterministic():
    m = make_cube()
    assert export_mesh_json(m) == export_mesh_json(m)


def test_obj_export_roundtrip():
    m = make_cube()
    back = parse_mesh(export_mesh_obj(m), "obj")
    assert np.abs(back.vertices - m.vertices).max() < 1e-9
    assert np.array_equal(back.faces, m.faces)


def test_unit_scale_applied_at_parse():
    m = parse_mesh(CUBE_OBJ, "obj", unit_scale=25.4)  # model in inches
    assert math.isclose(mesh_stats(m).surface_area, 6.0 * 25.4**2, rel_tol=1e-12)
    assert m.unit_scale == 25.4
    back = import_mesh_json(export_mesh_json(m))
    assert np.abs(back.vertices - m.vertices).max() < 1e-3  # 6 sig digits at 25.4 mm


def test_roundtrip_random_meshes_property():
    rng = np.random.default_rng(42)
    for _ in range(20):
        nv = rng.integers(3, 12)
        verts = rng.uniform(0.0, 1.0, (nv, 3))
        faces = []
        for _ in range(rng.integers(1, 8)):
            f = rng.choice(nv, 3, replace=False)
            faces.append(f)
        m = Mesh(vertices=verts, faces=np.array(faces), name="rand")
        back = import_mesh_json(export_mesh_json(m))
        assert np.abs(back.vertices - m.vertices).max() < 1e-5
        back_obj = parse_mesh(export_mesh_obj(m), "obj")
        assert np.abs(back_obj.vertices - m.vertices).max() < 1e-6


def test_truncated_prefixes_never_crash():
    from meshfab.errors import DomainError

    for blob in (ONE_TRIANGLE_STL, CUBE_OBJ, TWO_TRIANGLE_PLY):
        for cut in range(0, len(blob), 7):
            try:
                parse_mesh(blob[:cut], "auto")
            except DomainError:
                pass  # error is the expected outcome; crash is the bug


def test_truncated_binary_stl_reports_offset():
    import struct

    blob = b"\x00" * 80 + struct.pack("<I", 5) + b"\x00" * 10
    with pytest.raises(MalformedFile):
        parse_mesh(blob, "stl_binary")


def test_detect_format():
    assert detect_format(ONE_TRIANGLE_STL) == "stl_ascii"
    assert detect_format(CUBE_OBJ) == "obj"
    assert detect_format(TWO_TRIANGLE_PLY) == "ply_ascii"
    with pytest.raises(UnsupportedFormat):
        detect_format(b"\x89PNG\r\n\x1a\n garbage")


def test_binary_ply_rejected():
    blob = TWO_TRIANGLE_PLY.replace(b"format ascii 1.0", b"format binary_little_endian 1.0")
    with pytest.raises(UnsupportedFormat):
        parse_mesh(blob, "auto")


def test_empty_inputs():
    with pytest.raises(EmptyMesh):
        parse_mesh(b"", "auto")
    with pytest.raises(EmptyMesh):
        parse_mesh(b"v 0 0 0\nv 1 0 0\nv 0 1 0\n", "obj")  # zero faces


def test_degenerate_face_rejected():
    with pytest.raises(MalformedFile):
        parse_mesh(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 1 2\n", "obj")


def test_mesh_invariants_enforced():
    with pytest.raises(ValueError):
        Mesh(vertices=np.eye(3), faces=np.array([[0, 1, 3]]))
    with pytest.raises(ValueError):
        Mesh(vertices=np.eye(3), faces=np.array([[0, 1, 2]]), unit_scale=0.0)


def test_mesh_is_immutable():
    m = make_cube()
    with pytest.raises(ValueError):
        m.vertices[0, 0] = 99.0
