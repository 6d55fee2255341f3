"""Shared geometry builders for the test suite."""

import numpy as np

from meshfab.mesh_io import Mesh

# 8 corners, 12 triangles, outward-facing
_CUBE_VERTS = np.array(
    [
        [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
        [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
    ],
    dtype=float,
)
_CUBE_FACES = np.array(
    [
        [0, 2, 1], [0, 3, 2],  # z = 0
        [4, 5, 6], [4, 6, 7],  # z = 1
        [0, 1, 5], [0, 5, 4],  # y = 0
        [2, 3, 7], [2, 7, 6],  # y = 1
        [1, 2, 6], [1, 6, 5],  # x = 1
        [3, 0, 4], [3, 4, 7],  # x = 0
    ],
    dtype=int,
)


def make_cube(size=1.0, name="cube"):
    return Mesh(vertices=_CUBE_VERTS * size, faces=_CUBE_FACES, name=name)


def make_box(sx, sy, sz, center=(0.0, 0.0, 0.0), name="box"):
    v = (_CUBE_VERTS - 0.5) * np.array([sx, sy, sz]) + np.asarray(center, dtype=float)
    return Mesh(vertices=v, faces=_CUBE_FACES, name=name)


def make_subdivided_cube(n, size=1.0, name="cube"):
    """Cube [0,size]^3 with an n x n quad grid (2 triangles each) per side."""
    verts = []
    faces = []
    index = {}

    def vid(p):
        key = (round(p[0], 9), round(p[1], 9), round(p[2], 9))
        if key not in index:
            index[key] = len(verts)
            verts.append(key)
        return index[key]

    # each side: origin + u*s + v*t for s,t in [0,1]
    sides = [
        ((0, 0, 0), (0, 1, 0), (1, 0, 0)),  # z=0, normal -z
        ((0, 0, 1), (1, 0, 0), (0, 1, 0)),  # z=1, normal +z
        ((0, 0, 0), (1, 0, 0), (0, 0, 1)),  # y=0, normal -y
        ((0, 1, 0), (0, 0, 1), (1, 0, 0)),  # y=1, normal +y
        ((0, 0, 0), (0, 0, 1), (0, 1, 0)),  # x=0, normal -x
        ((1, 0, 0), (0, 1, 0), (0, 0, 1)),  # x=1, normal +x
    ]
    for origin, u, v in sides:
        origin = np.array(origin, float) * size
        u = np.array(u, float) * size
        v = np.array(v, float) * size
        for i in range(n):
            for j in range(n):
                p00 = vid(origin + u * (i / n) + v * (j / n))
                p10 = vid(origin + u * ((i + 1) / n) + v * (j / n))
                p01 = vid(origin + u * (i / n) + v * ((j + 1) / n))
                p11 = vid(origin + u * ((i + 1) / n) + v * ((j + 1) / n))
                faces.append((p00, p10, p11))
                faces.append((p00, p11, p01))
    return Mesh(vertices=np.array(verts, float), faces=np.array(faces, int), name=name)


def make_cylinder(radius, height, segments=64, name="cylinder"):
    """Open-ended cylinder along +z from z=0 to z=height."""
    ang = 2 * np.pi * np.arange(segments) / segments
    bottom = np.stack([radius * np.cos(ang), radius * np.sin(ang), np.zeros(segments)], axis=1)
    top = bottom + np.array([0.0, 0.0, height])
    verts = np.vstack([bottom, top])
    faces = []
    for k in range(segments):
        a, b = k, (k + 1) % segments
        faces.append((a, b, segments + b))
        faces.append((a, segments + b, segments + k))
    return Mesh(vertices=verts, faces=np.array(faces, int), name=name)


def make_plate(width, depth, nx=8, ny=8, z=0.0, name="plate"):
    """Flat rectangular plate in the z=const plane, triangulated grid."""
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, depth, ny + 1)
    verts = np.array([(x, y, z) for y in ys for x in xs])
    faces = []
    for j in range(ny):
        for i in range(nx):
            a = j * (nx + 1) + i
            b = a + 1
            c = a + nx + 1
            d = c + 1
            faces.append((a, b, d))
            faces.append((a, d, c))
    return Mesh(vertices=verts, faces=np.array(faces, int), name=name)


def random_rotation(rng):
    """Uniform-ish random rotation via QR of a gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def rotation_about_axis(axis, degrees):
    axis = np.asarray(axis, float)
    axis = axis / np.linalg.norm(axis)
    t = np.radians(degrees)
    c, s = np.cos(t), np.sin(t)
    x, y, z = axis
    k = np.array([[0, -z, y], [z, 0, -x], [-y, x, 0]])
    return np.eye(3) * c + np.outer(axis, axis) * (1 - c) + k * s
