"""Geodesic distances and paths along mesh surfaces.

Used to estimate material stock (cane, wire) for wireframe parts: the
length that matters is along the surface, not through space.

Algorithm: Dijkstra on a graph of mesh vertices plus edge midpoints (the
midpoints roughly halve the overestimate of a plain vertex graph on coarse
meshes), followed by iterative path straightening. Each interior path point
is constrained to its mesh edge; unfolding the two incident faces into a
plane turns the local two-segment shortening into a closed-form slide along
the edge, which never increases length, so the iteration converges.

Exact geodesics (MMP, heat method) are out of scope; the straightened path
is an upper bound on the true geodesic and is validated against analytic
unfoldings in the tests.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedEndpoints
from .mesh_io import Mesh, vertex_components
from .surface import MeshSurfaceIndex, barycentric_coordinates

REFINE_MAX_PASSES = 100
REFINE_MIN_IMPROVEMENT = 1e-7  # mm per pass


@dataclass(frozen=True)
class SurfacePoint:
    """A point on the mesh surface: face index + barycentric coordinates."""

    face: int
    bary: tuple[float, float, float]

    def __post_init__(self):
        b = np.asarray(self.bary, dtype=np.float64)
        if b.shape != (3,):
            raise ValueError("bary must have 3 components")
        if abs(b.sum() - 1.0) > 1e-9:
            raise ValueError(f"barycentric coordinates sum to {b.sum()}, not 1")
        if (b < -1e-12).any():
            raise ValueError("barycentric coordinates must be non-negative")
        object.__setattr__(self, "bary", (float(b[0]), float(b[1]), float(b[2])))

    def position(self, mesh: Mesh) -> np.ndarray:
        tri = mesh.vertices[mesh.faces[self.face]]
        return np.asarray(self.bary) @ tri

    def as_dict(self) -> dict:
        return {"face": self.face, "bary": list(self.bary)}


@dataclass(frozen=True)
class GeodesicPath:
    points: np.ndarray        # (k, 3) polyline on the surface, mm
    length: float             # mm
    lower_bound: float        # straight-line distance between endpoints, mm

    def as_dict(self) -> dict:
        return {
            "length_mm": self.length,
            "lower_bound_mm": self.lower_bound,
            "polyline": [[float(c) for c in p] for p in self.points],
        }


def surface_point_near(mesh: Mesh, xyz, index: MeshSurfaceIndex | None = None) -> SurfacePoint:
    """Snap an arbitrary 3D point to the nearest point on the surface."""
    index = index or MeshSurfaceIndex(mesh)
    closest, _, faces = index.query(np.asarray(xyz, dtype=np.float64))
    face = int(faces[0])
    bary = barycentric_coordinates(closest[0], index.triangles[face])
    return SurfacePoint(face=face, bary=tuple(bary))


class GeodesicSolver:
    """Shared immutable adjacency structure; build once, query many times."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        nv = mesh.vertex_count
        edge_ids: dict[tuple[int, int], int] = {}
        for tri in mesh.faces:
            for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = (int(u), int(v)) if u < v else (int(v), int(u))
                edge_ids.setdefault(key, len(edge_ids))
        self.edge_ids = edge_ids
        self.edges = [None] * len(edge_ids)
        for key, eid in edge_ids.items():
            self.edges[eid] = key
        midpoints = np.array(
            [0.5 * (mesh.vertices[u] + mesh.vertices[v]) for u, v in self.edges]
        ).reshape(-1, 3)
        self.node_xyz = np.vstack([mesh.vertices, midpoints]) if len(midpoints) else mesh.vertices
        # nodes of each face: 3 corners + 3 edge midpoints
        self.face_nodes = []
        for tri in mesh.faces:
            corners = [int(tri[0]), int(tri[1]), int(tri[2])]
            mids = []
            for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = (int(u), int(v)) if u < v else (int(v), int(u))
                mids.append(nv + edge_ids[key])
            self.face_nodes.append(corners + mids)
        # adjacency over all within-face node pairs
        adjacency: list[dict[int, float]] = [dict() for _ in range(len(self.node_xyz))]
        for nodes in self.face_nodes:
            for i in range(6):
                for j in range(i + 1, 6):
                    a, b = nodes[i], nodes[j]
                    d = float(np.linalg.norm(self.node_xyz[a] - self.node_xyz[b]))
                    adjacency[a][b] = d
                    adjacency[b][a] = d
        self.adjacency = [sorted(nbrs.items()) for nbrs in adjacency]
        self.components = vertex_components(mesh)
        # supports[node] = faces incident to the node, for path conversion
        faces_of_vertex: list[set[int]] = [set() for _ in range(nv)]
        faces_of_edge: list[set[int]] = [set() for _ in range(len(self.edges))]
        for f, tri in enumerate(mesh.faces):
            for u in tri:
                faces_of_vertex[int(u)].add(f)
            for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = (int(u), int(v)) if u < v else (int(v), int(u))
                faces_of_edge[edge_ids[key]].add(f)
        self.faces_of_vertex = faces_of_vertex
        self.faces_of_edge = faces_of_edge

    def node_faces(self, node: int) -> set[int]:
        nv = self.mesh.vertex_count
        if node < nv:
            return self.faces_of_vertex[node]
        return self.faces_of_edge[node - nv]

    def shortest_node_path(self, a_pos, a_face, b_pos, b_face):
        """Dijkstra from endpoint a to endpoint b through the midpoint graph.

        Virtual endpoint nodes connect to the six nodes of their containing
        face. Returns (node id list without endpoints, graph length).
        """
        start, goal = -1, -2
        start_links = {n: float(np.linalg.norm(self.node_xyz[n] - a_pos))
                       for n in self.face_nodes[a_face]}
        goal_links = {n: float(np.linalg.norm(self.node_xyz[n] - b_pos))
                      for n in self.face_nodes[b_face]}
        direct = float(np.linalg.norm(a_pos - b_pos)) if a_face == b_face else None

        dist = {start: 0.0}
        prev: dict[int, int] = {}
        heap = [(0.0, start)]
        seen = set()
        while heap:
            d, node = heapq.heappop(heap)
            if node in seen:
                continue
            seen.add(node)
            if node == goal:
                break
            if node == start:
                neighbors = list(start_links.items())
                if direct is not None:
                    neighbors.append((goal, direct))
            else:
                neighbors = list(self.adjacency[node])
                if node in goal_links:
                    neighbors.append((goal, goal_links[node]))
            for nbr, w in neighbors:
                nd = d + w
                if nd < dist.get(nbr, math.inf):
                    dist[nbr] = nd
                    prev[nbr] = node
                    heapq.heappush(heap, (nd, nbr))
        if goal not in seen:
            raise DisconnectedEndpoints(-1, -2)  # callers pre-check components
        path = []
        node = goal
        while node != start:
            path.append(node)
            node = prev[node]
        path.reverse()
        return path[:-1], dist[goal]  # drop the goal marker


def geodesic_distance(mesh: Mesh, a: SurfacePoint, b: SurfacePoint,
                      refine: bool = True,
                      solver: GeodesicSolver | None = None) -> GeodesicPath:
    """Shortest surface path between two surface points.

    Without ``refine`` this is the midpoint-graph Dijkstra path; with it the
    path is straightened by sliding interior points along their mesh edges
    (see module docstring). Raises DisconnectedEndpoints when the points lie
    on different connected components.
    """
    solver = solver or GeodesicSolver(mesh)
    _validate_surface_point(mesh, a)
    _validate_surface_point(mesh, b)
    comp_a = int(solver.components[mesh.faces[a.face][0]])
    comp_b = int(solver.components[mesh.faces[b.face][0]])
    if comp_a != comp_b:
        raise DisconnectedEndpoints(comp_a, comp_b)

    # canonical endpoint order: a query and its reverse run the identical
    # computation, so distance(a, b) == distance(b, a) exactly
    flipped = (b.face, b.bary) < (a.face, a.bary)
    if flipped:
        a, b = b, a

    pa, pb = a.position(mesh), b.position(mesh)
    lower = float(np.linalg.norm(pb - pa))
    if lower < 1e-12:
        return GeodesicPath(points=pa[None, :], length=0.0, lower_bound=0.0)

    node_path, graph_length = solver.shortest_node_path(pa, a.face, pb, b.face)
    anchors = _build_anchors(solver, pa, pb, node_path)
    if refine:
        _straighten(solver, anchors)
    points = _anchor_polyline(anchors)
    if flipped:
        points = points[::-1].copy()
    length = float(np.linalg.norm(np.diff(points, axis=0), axis=1).sum())
    if refine and length > graph_length + 1e-9:  # pragma: no cover - safety net
        length = graph_length
    return GeodesicPath(points=points, length=length, lower_bound=lower)


def _validate_surface_point(mesh: Mesh, p: SurfacePoint):
    if not (0 <= p.face < mesh.face_count):
        raise ValueError(f"face index {p.face} out of range")


class _Anchor:
    __slots__ = ("point", "edge")

    def __init__(self, point, edge=None):
        self.point = np.asarray(point, dtype=np.float64)
        self.edge = edge  # (u, v) vertex ids when the anchor may slide


def _build_anchors(solver: GeodesicSolver, pa, pb, node_path):
    nv = solver.mesh.vertex_count
    anchors = [_Anchor(pa)]
    for node in node_path:
        if node < nv:
            anchors.append(_Anchor(solver.node_xyz[node]))  # pinned at a vertex
        else:
            anchors.append(_Anchor(solver.node_xyz[node], edge=solver.edges[node - nv]))
    anchors.append(_Anchor(pb))
    # drop zero-length hops (endpoint coinciding with a graph node)
    cleaned = [anchors[0]]
    for anc in anchors[1:]:
        if np.linalg.norm(anc.point - cleaned[-1].point) > 1e-12:
            cleaned.append(anc)
    return cleaned


def _polyline_length(anchors) -> float:
    return float(
        sum(np.linalg.norm(anchors[i + 1].point - anchors[i].point)
            for i in range(len(anchors) - 1))
    )


def _straighten(solver: GeodesicSolver, anchors):
    """Slide edge-borne anchors to locally shorten the path, to convergence."""
    verts = solver.mesh.vertices
    length = _polyline_length(anchors)
    for _ in range(REFINE_MAX_PASSES):
        for i in range(1, len(anchors) - 1):
            edge = anchors[i].edge
            if edge is None:
                continue
            pu, pv = verts[edge[0]], verts[edge[1]]
            seg = pv - pu
            seg_len = np.linalg.norm(seg)
            if seg_len < 1e-12:
                continue
            u_hat = seg / seg_len
            a = anchors[i - 1].point
            b = anchors[i + 1].point
            ax = float((a - pu) @ u_hat)
            bx = float((b - pu) @ u_hat)
            da = float(np.linalg.norm((a - pu) - ax * u_hat))
            db = float(np.linalg.norm((b - pu) - bx * u_hat))
            if da + db < 1e-12:
                x = 0.5 * (ax + bx)   # both neighbors on the edge line
            else:
                # unfold both faces about the edge: the straight line between
                # the unfolded neighbors crosses the edge at this parameter
                x = ax + (bx - ax) * da / (da + db)
            t = min(1.0, max(0.0, x / seg_len))
            anchors[i].point = pu + t * seg
        new_length = _polyline_length(anchors)
        if length - new_length < REFINE_MIN_IMPROVEMENT:
            break
        length = new_length


def _anchor_polyline(anchors) -> np.ndarray:
    pts = [anchors[0].point]
    for anc in anchors[1:]:
        if np.linalg.norm(anc.point - pts[-1]) > 1e-12:
            pts.append(anc.point)
    return np.asarray(pts)


@dataclass(frozen=True)
class RingSection:
    """One closed (or open) cross-section loop at a station along an axis."""

    station: float        # height along the section normal, mm
    circumference: float  # loop perimeter, mm
    closed: bool


def ring_lengths(mesh: Mesh, plane_normal, station_spacing: float) -> list[RingSection]:
    """Cross-section perimeters at regular stations along ``plane_normal``.

    Stations sit at integer multiples of the spacing strictly inside the
    mesh's extent along the normal; stations outside it are skipped. Loops at
    one station are reported separately, longest first; loops that fail to
    close (open boundary) are flagged.
    """
    if station_spacing <= 0:
        raise ValueError("station_spacing must be positive")
    n = np.asarray(plane_normal, dtype=np.float64)
    norm = np.linalg.norm(n)
    if norm < 1e-12:
        raise ValueError("plane_normal must be non-zero")
    n = n / norm
    heights = mesh.vertices @ n
    h_min, h_max = float(heights.min()), float(heights.max())
    pad = max(1e-9, 1e-9 * (h_max - h_min))
    k_lo = math.ceil((h_min + pad) / station_spacing)
    k_hi = math.floor((h_max - pad) / station_spacing)
    sections: list[RingSection] = []
    tri_heights = heights[mesh.faces]
    tri_points = mesh.triangle_points()
    for k in range(k_lo, k_hi + 1):
        station = k * station_spacing
        sections.extend(_section_at(tri_points, tri_heights, station))
    return sections


def _section_at(tri_points, tri_heights, station) -> list[RingSection]:
    d = tri_heights - station
    # symbolic perturbation: vertices exactly on the plane count as above it,
    # so every crossing triangle contributes exactly 0 or 2 edge intersections
    d = np.where(d == 0, 1e-30, d)
    crossing = (d.min(axis=1) < 0) & (d.max(axis=1) > 0)
    segments = []
    for f in np.nonzero(crossing)[0]:
        pts = []
        for i, j in ((0, 1), (1, 2), (2, 0)):
            di, dj = d[f, i], d[f, j]
            if (di < 0) == (dj < 0):
                continue
            t = di / (di - dj)
            pts.append(tri_points[f, i] + t * (tri_points[f, j] - tri_points[f, i]))
        if len(pts) == 2 and np.linalg.norm(pts[1] - pts[0]) > 1e-12:
            segments.append((pts[0], pts[1]))
    if not segments:
        return []

    def key(p):
        return (round(float(p[0]), 7), round(float(p[1]), 7), round(float(p[2]), 7))

    # chain segments into loops by matching endpoints
    endpoint_map: dict[tuple, list[int]] = {}
    for idx, (p, q) in enumerate(segments):
        endpoint_map.setdefault(key(p), []).append(idx)
        endpoint_map.setdefault(key(q), []).append(idx)
    used = [False] * len(segments)
    loops = []
    for start in range(len(segments)):
        if used[start]:
            continue
        used[start] = True
        chain = [segments[start][0], segments[start][1]]
        closed = False
        for head in (1, 0):  # extend forward, then backward from the seed
            while True:
                tip = chain[-1] if head else chain[0]
                candidates = [i for i in endpoint_map.get(key(tip), []) if not used[i]]
                if not candidates:
                    break
                idx = candidates[0]
                used[idx] = True
                p, q = segments[idx]
                nxt = q if key(p) == key(tip) else p
                if head:
                    chain.append(nxt)
                else:
                    chain.insert(0, nxt)
                if key(chain[0]) == key(chain[-1]) and len(chain) > 2:
                    closed = True
                    break
            if closed:
                break
        perimeter = float(
            sum(np.linalg.norm(chain[i + 1] - chain[i]) for i in range(len(chain) - 1))
        )
        loops.append(RingSection(station=float(station), circumference=perimeter,
                                 closed=closed))
    loops.sort(key=lambda s: -s.circumference)
    return loops
