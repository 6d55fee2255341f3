"""Triangle mesh parsing, validation, statistics and serialization.

Single entry point for every geometry source the toolkit handles: parametric
design exports, public-domain meshes and photogrammetry scans all become the
same indexed triangle ``Mesh``. Internal coordinates are always millimetres;
``unit_scale`` (mm per model unit) is applied once, at parse time.

Supported formats: Wavefront OBJ (v/f records; vn/vt ignored), ASCII and
binary STL (duplicate vertices welded), ASCII PLY, plus the toolkit's own
JSON interchange used by the viewer service.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyMesh, MalformedFile, UnsupportedFormat

# STL files duplicate every shared vertex by design; weld within this
# tolerance (in model units, before unit_scale is applied).
STL_WELD_TOLERANCE = 1e-6

# Fixed float formatting for deterministic JSON export.
_JSON_FLOAT_FMT = "%.6g"


@dataclass(frozen=True)
class Mesh:
    """Indexed triangle mesh in millimetres.

    Immutable after construction (vertex/face arrays are locked), so
    instances are safe to share across threads.
    """

    vertices: np.ndarray  # (n, 3) float64, millimetres
    faces: np.ndarray     # (m, 3) int64 vertex indices
    name: str = ""
    unit_scale: float = 1.0  # millimetres per model unit, as parsed

    def __post_init__(self):
        vertices = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        faces = np.ascontiguousarray(np.asarray(self.faces, dtype=np.int64))
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise ValueError("vertices must be an (n, 3) array")
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise ValueError("faces must be an (m, 3) array")
        if self.unit_scale <= 0:
            raise ValueError("unit_scale must be positive")
        if faces.size:
            if faces.min() < 0 or faces.max() >= len(vertices):
                raise ValueError("face index out of range")
            degenerate = (
                (faces[:, 0] == faces[:, 1])
                | (faces[:, 1] == faces[:, 2])
                | (faces[:, 2] == faces[:, 0])
            )
            if degenerate.any():
                raise ValueError(
                    f"face {int(np.nonzero(degenerate)[0][0])} repeats a vertex index"
                )
        vertices.setflags(write=False)
        faces.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "faces", faces)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    def triangle_points(self) -> np.ndarray:
        """(m, 3, 3) corner coordinates per face."""
        return self.vertices[self.faces]

    def face_normals(self) -> np.ndarray:
        """(m, 3) unit normals; zero vector for geometrically degenerate faces."""
        tri = self.triangle_points()
        n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        length = np.linalg.norm(n, axis=1, keepdims=True)
        return np.divide(n, length, out=np.zeros_like(n), where=length > 0)

    def face_areas(self) -> np.ndarray:
        tri = self.triangle_points()
        n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        return 0.5 * np.linalg.norm(n, axis=1)

    def transformed(self, vertices: np.ndarray, name: str | None = None) -> "Mesh":
        """Same topology with replaced vertex positions."""
        return Mesh(vertices=vertices, faces=self.faces,
                    name=self.name if name is None else name,
                    unit_scale=self.unit_scale)


@dataclass(frozen=True)
class MeshStats:
    vertex_count: int
    face_count: int
    bbox_min: tuple[float, float, float]
    bbox_max: tuple[float, float, float]
    surface_area: float          # mm^2
    is_closed: bool
    connected_components: int

    def as_dict(self) -> dict:
        return {
            "vertex_count": self.vertex_count,
            "face_count": self.face_count,
            "bbox_min_mm": list(self.bbox_min),
            "bbox_max_mm": list(self.bbox_max),
            "surface_area_mm2": self.surface_area,
            "is_closed": self.is_closed,
            "connected_components": self.connected_components,
        }


def parse_mesh(data: bytes, format_hint: str = "auto", name: str = "",
               unit_scale: float = 1.0) -> Mesh:
    """Parse raw file bytes into a validated Mesh.

    format_hint is one of obj, stl_ascii, stl_binary, ply_ascii, auto.
    With auto the format is detected from file magic. ``unit_scale``
    converts model units to millimetres (vertices are multiplied by it).
    """
    if not data or not data.strip():
        raise EmptyMesh("file is empty")
    if format_hint == "auto":
        format_hint = detect_format(data)
    parsers = {
        "obj": _parse_obj,
        "stl_ascii": _parse_stl_ascii,
        "stl_binary": _parse_stl_binary,
        "ply_ascii": _parse_ply_ascii,
    }
    if format_hint not in parsers:
        raise UnsupportedFormat(f"unknown format {format_hint!r}")
    vertices, faces, parsed_name = parsers[format_hint](data)
    if len(faces) == 0:
        raise EmptyMesh("mesh has zero faces")
    try:
        return Mesh(
            vertices=np.asarray(vertices, dtype=np.float64) * unit_scale,
            faces=np.asarray(faces, dtype=np.int64),
            name=name or parsed_name,
            unit_scale=unit_scale,
        )
    except ValueError as exc:
        raise MalformedFile(str(exc)) from exc


def detect_format(data: bytes) -> str:
    """Best-effort format detection from magic bytes and structure."""
    head = data.lstrip()[:512]
    if head.startswith(b"ply"):
        if b"format ascii" in head:
            return "ply_ascii"
        raise UnsupportedFormat("binary PLY is not supported")
    # A binary STL is exactly 84 + 50*n bytes; check this before trusting a
    # leading "solid", which sloppy binary exporters also emit.
    if len(data) >= 84:
        (count,) = struct.unpack_from("<I", data, 80)
        if len(data) == 84 + 50 * count:
            return "stl_binary"
    if head.startswith(b"solid"):
        return "stl_ascii"
    try:
        text = data.decode("utf-8", errors="strict")
    except UnicodeDecodeError:
        raise UnsupportedFormat("unrecognized binary format")
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith(("v ", "f ", "vn ", "vt ")):
            return "obj"
    raise UnsupportedFormat("could not detect mesh format")


def _decode_text(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedFile(f"not valid UTF-8 text: {exc}", offset=exc.start) from exc


def _parse_obj(data: bytes) -> tuple[list, list, str]:
    text = _decode_text(data)
    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    name = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        record = fields[0]
        if record == "v":
            if len(fields) < 4:
                raise MalformedFile("v record needs 3 coordinates", line=lineno)
            try:
                vertices.append((float(fields[1]), float(fields[2]), float(fields[3])))
            except ValueError:
                raise MalformedFile("non-numeric vertex coordinate", line=lineno)
        elif record == "f":
            if len(fields) < 4:
                raise MalformedFile("f record needs at least 3 indices", line=lineno)
            idx = []
            for token in fields[1:]:
                head = token.split("/")[0]
                try:
                    value = int(head)
                except ValueError:
                    raise MalformedFile(f"bad face index {token!r}", line=lineno)
                if value > 0:
                    value -= 1
                elif value < 0:
                    value += len(vertices)
                else:
                    raise MalformedFile("face index 0 is not valid OBJ", line=lineno)
                if value < 0 or value >= len(vertices):
                    raise MalformedFile(
                        f"face index {token} out of range for {len(vertices)} vertices",
                        line=lineno,
                    )
                idx.append(value)
            # fan-triangulate polygons
            for a, b in zip(idx[1:-1], idx[2:]):
                if len({idx[0], a, b}) < 3:
                    raise MalformedFile("face repeats a vertex index", line=lineno)
                faces.append((idx[0], a, b))
        elif record in ("o", "g") and len(fields) > 1 and not name:
            name = fields[1]
        # vn, vt, s, usemtl, mtllib and anything else: ignored
    return vertices, faces, name


def _parse_stl_ascii(data: bytes) -> tuple[list, list, str]:
    text = _decode_text(data)
    raw_vertices: list[tuple[float, float, float]] = []
    name = ""
    in_facet = False
    facet_vertices = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        fields = raw.split()
        if not fields:
            continue
        keyword = fields[0].lower()
        if keyword == "solid":
            name = fields[1] if len(fields) > 1 else ""
        elif keyword == "facet":
            if in_facet:
                raise MalformedFile("nested facet", line=lineno)
            in_facet = True
            facet_vertices = 0
        elif keyword == "vertex":
            if not in_facet:
                raise MalformedFile("vertex outside facet", line=lineno)
            if len(fields) < 4:
                raise MalformedFile("vertex record needs 3 coordinates", line=lineno)
            try:
                raw_vertices.append(
                    (float(fields[1]), float(fields[2]), float(fields[3]))
                )
            except ValueError:
                raise MalformedFile("non-numeric vertex coordinate", line=lineno)
            facet_vertices += 1
        elif keyword == "endfacet":
            if not in_facet:
                raise MalformedFile("endfacet without facet", line=lineno)
            if facet_vertices != 3:
                raise MalformedFile(
                    f"facet has {facet_vertices} vertices, expected 3", line=lineno
                )
            in_facet = False
        elif keyword in ("outer", "endloop", "endsolid"):
            continue
        else:
            raise MalformedFile(f"unexpected token {fields[0]!r}", line=lineno)
    if in_facet:
        raise MalformedFile("unterminated facet at end of file")
    if len(raw_vertices) % 3 != 0:
        raise MalformedFile("vertex count is not a multiple of 3")
    return _weld_soup(raw_vertices, name)


def _parse_stl_binary(data: bytes) -> tuple[list, list, str]:
    if len(data) < 84:
        raise MalformedFile("binary STL shorter than 84-byte header", offset=len(data))
    (count,) = struct.unpack_from("<I", data, 80)
    expected = 84 + 50 * count
    if len(data) < expected:
        raise MalformedFile(
            f"binary STL truncated: header promises {count} facets "
            f"({expected} bytes), file has {len(data)}",
            offset=len(data),
        )
    raw_vertices = []
    for k in range(count):
        base = 84 + 50 * k
        record = struct.unpack_from("<12f", data, base)
        # record[0:3] is the facet normal; recomputed from geometry when needed
        raw_vertices.append(tuple(record[3:6]))
        raw_vertices.append(tuple(record[6:9]))
        raw_vertices.append(tuple(record[9:12]))
    return _weld_soup(raw_vertices, "")


def _weld_soup(raw_vertices: list, name: str) -> tuple[list, list, str]:
    """Merge duplicated triangle-soup vertices within STL_WELD_TOLERANCE."""
    index_of: dict[tuple, int] = {}
    vertices: list[tuple[float, float, float]] = []
    remap: list[int] = []
    for v in raw_vertices:
        key = (
            round(v[0] / STL_WELD_TOLERANCE),
            round(v[1] / STL_WELD_TOLERANCE),
            round(v[2] / STL_WELD_TOLERANCE),
        )
        pos = index_of.get(key)
        if pos is None:
            pos = len(vertices)
            index_of[key] = pos
            vertices.append(v)
        remap.append(pos)
    faces = []
    for k in range(0, len(remap), 3):
        tri = (remap[k], remap[k + 1], remap[k + 2])
        if len(set(tri)) < 3:
            # facet collapsed by welding; geometrically negligible
            continue
        faces.append(tri)
    return vertices, faces, name


def _parse_ply_ascii(data: bytes) -> tuple[list, list, str]:
    text = _decode_text(data)
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise MalformedFile("missing 'ply' magic", line=1)

    vertex_count = face_count = 0
    vertex_props: list[str] = []
    elements: list[tuple[str, int]] = []
    current_element = None
    body_start = None
    for lineno, raw in enumerate(lines[1:], start=2):
        fields = raw.split()
        if not fields or fields[0] == "comment":
            continue
        keyword = fields[0]
        if keyword == "format":
            if len(fields) < 2 or fields[1] != "ascii":
                raise UnsupportedFormat("only ASCII PLY is supported")
        elif keyword == "element":
            if len(fields) < 3:
                raise MalformedFile("element record needs name and count", line=lineno)
            try:
                n = int(fields[2])
            except ValueError:
                raise MalformedFile("non-integer element count", line=lineno)
            current_element = fields[1]
            elements.append((current_element, n))
            if current_element == "vertex":
                vertex_count = n
            elif current_element == "face":
                face_count = n
        elif keyword == "property":
            if current_element == "vertex" and fields[1] != "list":
                vertex_props.append(fields[-1])
        elif keyword == "end_header":
            body_start = lineno
            break
        else:
            raise MalformedFile(f"unexpected header keyword {keyword!r}", line=lineno)
    if body_start is None:
        raise MalformedFile("missing end_header")
    for axis in ("x", "y", "z"):
        if axis not in vertex_props:
            raise MalformedFile(f"vertex element lacks property {axis!r}")
    ix, iy, iz = (vertex_props.index(a) for a in ("x", "y", "z"))

    body = lines[body_start:]
    cursor = 0
    vertices = []
    faces = []
    for element, count in elements:
        for k in range(count):
            # skip blank lines inside the body
            while cursor < len(body) and not body[cursor].split():
                cursor += 1
            if cursor >= len(body):
                raise MalformedFile(
                    f"file ends before all {element} records", line=body_start + cursor
                )
            fields = body[cursor].split()
            lineno = body_start + cursor + 1
            cursor += 1
            if element == "vertex":
                if len(fields) < len(vertex_props):
                    raise MalformedFile("short vertex record", line=lineno)
                try:
                    vertices.append(
                        (float(fields[ix]), float(fields[iy]), float(fields[iz]))
                    )
                except ValueError:
                    raise MalformedFile("non-numeric vertex coordinate", line=lineno)
            elif element == "face":
                try:
                    n = int(fields[0])
                    idx = [int(t) for t in fields[1 : 1 + n]]
                except (ValueError, IndexError):
                    raise MalformedFile("bad face record", line=lineno)
                if len(idx) != n or n < 3:
                    raise MalformedFile("bad face record", line=lineno)
                for i in idx:
                    if i < 0 or i >= vertex_count:
                        raise MalformedFile(
                            f"face index {i} out of range for {vertex_count} vertices",
                            line=lineno,
                        )
                for a, b in zip(idx[1:-1], idx[2:]):
                    if len({idx[0], a, b}) < 3:
                        raise MalformedFile("face repeats a vertex index", line=lineno)
                    faces.append((idx[0], a, b))
            # other elements: consume and ignore
    return vertices, faces, ""


def mesh_stats(m: Mesh) -> MeshStats:
    """Vertex/face counts, bbox, area, closedness and component count."""
    edge_use: dict[tuple[int, int], int] = {}
    for a, b, c in m.faces:
        for u, v in ((a, b), (b, c), (c, a)):
            key = (int(u), int(v)) if u < v else (int(v), int(u))
            edge_use[key] = edge_use.get(key, 0) + 1
    is_closed = bool(edge_use) and all(n == 2 for n in edge_use.values())

    parent = list(range(m.vertex_count))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, c in m.faces:
        ra = find(int(a))
        parent[find(int(b))] = ra
        parent[find(int(c))] = ra
    used = np.zeros(m.vertex_count, dtype=bool)
    used[m.faces.ravel()] = True
    components = len({find(i) for i in range(m.vertex_count) if used[i]})

    lo = m.vertices.min(axis=0)
    hi = m.vertices.max(axis=0)
    return MeshStats(
        vertex_count=m.vertex_count,
        face_count=m.face_count,
        bbox_min=tuple(float(x) for x in lo),
        bbox_max=tuple(float(x) for x in hi),
        surface_area=float(m.face_areas().sum()),
        is_closed=is_closed,
        connected_components=components,
    )


def vertex_components(m: Mesh) -> np.ndarray:
    """Connected-component id per vertex (vertices shared by faces connect)."""
    parent = list(range(m.vertex_count))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, c in m.faces:
        ra = find(int(a))
        parent[find(int(b))] = ra
        parent[find(int(c))] = ra
    roots = {}
    labels = np.empty(m.vertex_count, dtype=np.int64)
    for i in range(m.vertex_count):
        r = find(i)
        labels[i] = roots.setdefault(r, len(roots))
    return labels


def _fmt_floats(values) -> str:
    return ", ".join(_JSON_FLOAT_FMT % v for v in values)


def export_mesh_json(m: Mesh) -> bytes:
    """Deterministic JSON export (schema: docs in README).

    Vertices are written in model units (millimetres divided by unit_scale)
    so that a parse round-trip reproduces both coordinates and unit_scale.
    """
    raw = m.vertices / m.unit_scale
    parts = [
        "{",
        f'  "name": {json.dumps(m.name)},',
        '  "unit_scale": %s,' % (_JSON_FLOAT_FMT % m.unit_scale),
        '  "vertices": [%s],' % _fmt_floats(raw.ravel()),
        '  "faces": [%s]' % ", ".join(str(int(i)) for i in m.faces.ravel()),
        "}",
    ]
    return ("\n".join(parts) + "\n").encode("utf-8")


def import_mesh_json(data: bytes) -> Mesh:
    """Inverse of export_mesh_json."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedFile(f"bad JSON mesh: {exc}") from exc
    for key in ("unit_scale", "vertices", "faces"):
        if key not in doc:
            raise MalformedFile(f"JSON mesh missing field {key!r}")
    vertices = np.asarray(doc["vertices"], dtype=np.float64)
    faces = np.asarray(doc["faces"], dtype=np.int64)
    if vertices.size % 3 or faces.size % 3:
        raise MalformedFile("vertex/face arrays must have length divisible by 3")
    if faces.size == 0:
        raise EmptyMesh("mesh has zero faces")
    unit_scale = float(doc["unit_scale"])
    try:
        return Mesh(
            vertices=vertices.reshape(-1, 3) * unit_scale,
            faces=faces.reshape(-1, 3),
            name=str(doc.get("name", "")),
            unit_scale=unit_scale,
        )
    except ValueError as exc:
        raise MalformedFile(str(exc)) from exc


def export_mesh_obj(m: Mesh) -> bytes:
    """Deterministic OBJ export, vertices in model units."""
    raw = m.vertices / m.unit_scale
    lines = [f"o {m.name}" if m.name else "o mesh"]
    for v in raw:
        lines.append("v %.9g %.9g %.9g" % (v[0], v[1], v[2]))
    for f in m.faces:
        lines.append("f %d %d %d" % (f[0] + 1, f[1] + 1, f[2] + 1))
    return ("\n".join(lines) + "\n").encode("utf-8")


_EXTENSION_HINTS = {
    ".obj": "obj",
    ".stl": "auto",   # ascii vs binary resolved by magic
    ".ply": "ply_ascii",
}


def load_mesh_file(path: str | Path, unit_scale: float = 1.0) -> Mesh:
    """Load a mesh from disk, dispatching on extension (.obj/.stl/.ply/.json)."""
    path = Path(path)
    data = path.read_bytes()
    if path.suffix.lower() == ".json":
        return import_mesh_json(data)
    hint = _EXTENSION_HINTS.get(path.suffix.lower(), "auto")
    return parse_mesh(data, format_hint=hint, name=path.stem, unit_scale=unit_scale)
