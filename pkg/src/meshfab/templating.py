"""Metrically accurate 2D orthographic templates, tiled for 1:1 printing.

A TemplateSheet is the full-size drawing of one view: silhouette (boundary
of the union of projected triangles), sharp feature edges and a metric
grid, all in true drawing millimetres. tile_pages splits the sheet across
physical paper pages with overlap and registration marks; render_svg emits
one deterministic SVG per page whose document units are millimetres, so a
100%-scale print is dimensionally true.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from shapely.geometry import MultiPolygon, Polygon
from shapely.geometry.polygon import orient
from shapely.ops import unary_union

from .errors import DegenerateView, PageTooSmall
from .mesh_io import Mesh

SNAP_MM = 1e-7               # coordinate snapping before polygon overlay
FEATURE_ANGLE_DEG = 40.0     # dihedral threshold for feature edges
DEFAULT_GRID_MM = 50.0
GRID_LABEL_EVERY = 5         # label every 5th grid line

# width, height in mm; the 914 roll is cut to 2 m, the longest part dimension
PAGE_PRESETS = {
    "A0": (841.0, 1189.0),
    "A1": (594.0, 841.0),
    "A3": (297.0, 420.0),
    "A4": (210.0, 297.0),
    "roll914": (914.0, 2000.0),
}
DEFAULT_MARGIN_MM = 10.0
DEFAULT_OVERLAP_MM = 20.0

# looking-along direction and page-up vector per named view
VIEW_PRESETS = {
    "front": ((0.0, 1.0, 0.0), (0.0, 0.0, 1.0)),
    "back": ((0.0, -1.0, 0.0), (0.0, 0.0, 1.0)),
    "right": ((-1.0, 0.0, 0.0), (0.0, 0.0, 1.0)),
    "left": ((1.0, 0.0, 0.0), (0.0, 0.0, 1.0)),
    "side": ((-1.0, 0.0, 0.0), (0.0, 0.0, 1.0)),
    "top": ((0.0, 0.0, -1.0), (0.0, 1.0, 0.0)),
    "bottom": ((0.0, 0.0, 1.0), (0.0, 1.0, 0.0)),
}


@dataclass(frozen=True)
class GridLine:
    axis: str            # "x": vertical line at x=coordinate; "y": horizontal
    coordinate: float    # mm in sheet coordinates
    start: tuple[float, float]
    end: tuple[float, float]
    label: str | None = None


@dataclass(frozen=True)
class TemplateSheet:
    outline: list              # feature-edge polylines, each (k, 2) mm
    silhouette: list           # closed boundary polygons, each (k, 2), first==last
    view_direction: np.ndarray
    view_up: np.ndarray
    grid_spacing: float = DEFAULT_GRID_MM
    source_mesh: str = ""
    scale: float = 1.0         # drawing mm per object mm
    grid_lines: list = field(default_factory=list)

    def __post_init__(self):
        d = np.asarray(self.view_direction, dtype=np.float64)
        u = np.asarray(self.view_up, dtype=np.float64)
        if abs(float(d @ u)) > 1e-9:
            raise ValueError("view_direction and view_up must be orthogonal")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.grid_spacing <= 0:
            raise ValueError("grid_spacing must be positive")
        for poly in self.silhouette:
            if not np.allclose(poly[0], poly[-1]):
                raise ValueError("silhouette polygons must be closed")
        object.__setattr__(self, "view_direction", d)
        object.__setattr__(self, "view_up", u)

    def bounds(self) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) over silhouette and outline, mm."""
        pts = [np.asarray(p).reshape(-1, 2) for p in self.silhouette]
        pts += [np.asarray(p).reshape(-1, 2) for p in self.outline]
        if not pts:
            raise ValueError("empty sheet has no bounds")
        allpts = np.vstack(pts)
        lo = allpts.min(axis=0)
        hi = allpts.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def as_dict(self) -> dict:
        return {
            "source_mesh": self.source_mesh,
            "scale": self.scale,
            "view_direction": self.view_direction.tolist(),
            "view_up": self.view_up.tolist(),
            "grid_spacing_mm": self.grid_spacing,
            "silhouette": [np.asarray(p).tolist() for p in self.silhouette],
            "outline": [np.asarray(p).tolist() for p in self.outline],
        }


@dataclass(frozen=True)
class TemplatePage:
    page_width: float
    page_height: float
    printable_margin: float
    overlap: float
    row: int
    col: int
    offset: tuple[float, float]   # sheet coords of the printable-area origin
    registration_marks: list      # 4 printable-corner cross centers, sheet coords

    def __post_init__(self):
        if self.printable_width <= 0 or self.printable_height <= 0:
            raise ValueError("printable area must be positive")
        if self.overlap >= self.printable_width or self.overlap >= self.printable_height:
            raise ValueError("overlap must be smaller than the printable area")

    @property
    def printable_width(self) -> float:
        return self.page_width - 2 * self.printable_margin

    @property
    def printable_height(self) -> float:
        return self.page_height - 2 * self.printable_margin

    @property
    def label(self) -> str:
        return f"R{self.row}C{self.col}"

    def contains(self, x: float, y: float) -> bool:
        ox, oy = self.offset
        return (ox <= x <= ox + self.printable_width
                and oy <= y <= oy + self.printable_height)

    def to_local(self, x: float, y: float) -> tuple[float, float]:
        """Sheet point -> page-local printable coordinates."""
        return (x - self.offset[0], y - self.offset[1])


def view_basis(view_direction, view_up):
    """Orthonormal (right, up, direction), re-orthogonalizing the inputs."""
    d = np.asarray(view_direction, dtype=np.float64)
    nd = np.linalg.norm(d)
    if nd < 1e-12:
        raise ValueError("view_direction must be non-zero")
    d = d / nd
    u = np.asarray(view_up, dtype=np.float64)
    u = u - (u @ d) * d
    nu = np.linalg.norm(u)
    if nu < 1e-6:
        raise ValueError("view_up is parallel to view_direction")
    u = u / nu
    r = np.cross(d, u)
    return r, u, d


def project_orthographic(m: Mesh, view_direction, view_up, scale: float = 1.0,
                         feature_angle_deg: float = FEATURE_ANGLE_DEG) -> TemplateSheet:
    """Project the mesh onto the view plane at true scale.

    The silhouette is the outer boundary (with holes) of the union of all
    projected triangles — robust for open scan meshes, no hidden-line
    removal. The outline carries projected feature edges: boundary edges and
    edges whose dihedral angle exceeds ``feature_angle_deg``.
    """
    right, up, direction = view_basis(view_direction, view_up)
    pts2 = np.stack([m.vertices @ right, m.vertices @ up], axis=1) * scale
    snapped = np.round(pts2 / SNAP_MM) * SNAP_MM

    polys = []
    for tri in m.faces:
        corners = snapped[tri]
        area2 = abs(
            (corners[1, 0] - corners[0, 0]) * (corners[2, 1] - corners[0, 1])
            - (corners[2, 0] - corners[0, 0]) * (corners[1, 1] - corners[0, 1])
        )
        if area2 < SNAP_MM:
            continue
        polys.append(Polygon(corners))
    union = unary_union(polys) if polys else None
    if union is None or union.is_empty or union.area < 1e-9:
        raise DegenerateView("mesh projects to zero area in this view")

    if isinstance(union, Polygon):
        regions = [union]
    elif isinstance(union, MultiPolygon):
        regions = list(union.geoms)
    else:  # GeometryCollection from touching geometry
        regions = [g for g in union.geoms if isinstance(g, Polygon)]
        if not regions:
            raise DegenerateView("mesh projects to zero area in this view")
    silhouette = []
    for region in sorted(regions, key=lambda g: -g.area):
        region = orient(region)  # CCW exterior, CW holes: deterministic
        silhouette.append(np.asarray(region.exterior.coords, dtype=np.float64))
        for ring in region.interiors:
            silhouette.append(np.asarray(ring.coords, dtype=np.float64))

    outline = _feature_edges(m, snapped, feature_angle_deg)
    return TemplateSheet(
        outline=outline,
        silhouette=silhouette,
        view_direction=direction,
        view_up=up,
        source_mesh=m.name,
        scale=scale,
    )


def _feature_edges(m: Mesh, pts2: np.ndarray, angle_deg: float) -> list:
    normals = m.face_normals()
    edge_faces: dict[tuple[int, int], list[int]] = {}
    for f, tri in enumerate(m.faces):
        for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (int(u), int(v)) if u < v else (int(v), int(u))
            edge_faces.setdefault(key, []).append(f)
    cos_thresh = math.cos(math.radians(angle_deg))
    segments = []
    for (u, v), faces in sorted(edge_faces.items()):
        if len(faces) == 1:
            sharp = True  # open boundary is always drawn
        elif len(faces) == 2:
            c = float(np.clip(normals[faces[0]] @ normals[faces[1]], -1.0, 1.0))
            sharp = c < cos_thresh
        else:
            sharp = True  # non-manifold edge: draw it
        if not sharp:
            continue
        seg = np.stack([pts2[u], pts2[v]])
        if np.linalg.norm(seg[1] - seg[0]) > SNAP_MM:
            segments.append(seg)
    return segments


def overlay_grid(sheet: TemplateSheet, spacing: float) -> TemplateSheet:
    """Metric grid at integer multiples of ``spacing`` over the sheet bounds.

    Every GRID_LABEL_EVERY-th line (coordinates divisible by 5*spacing)
    carries its millimetre coordinate as a label.
    """
    if spacing <= 0:
        raise ValueError("grid spacing must be positive")
    xmin, ymin, xmax, ymax = sheet.bounds()
    lines: list[GridLine] = []

    def build(axis, lo, hi, other_lo, other_hi):
        for k in range(math.ceil(lo / spacing - 1e-9), math.floor(hi / spacing + 1e-9) + 1):
            coord = k * spacing
            labeled = k % GRID_LABEL_EVERY == 0
            if axis == "x":
                start, end = (coord, other_lo), (coord, other_hi)
            else:
                start, end = (other_lo, coord), (other_hi, coord)
            lines.append(GridLine(
                axis=axis, coordinate=coord, start=start, end=end,
                label=f"{coord:g} mm" if labeled else None,
            ))

    build("x", xmin, xmax, ymin, ymax)
    build("y", ymin, ymax, xmin, xmax)
    return replace(sheet, grid_spacing=spacing, grid_lines=lines)


def tile_pages(sheet: TemplateSheet, page_width: float, page_height: float,
               margin: float = DEFAULT_MARGIN_MM,
               overlap: float = DEFAULT_OVERLAP_MM) -> list[TemplatePage]:
    """Split the sheet across paper pages.

    Adjacent pages share exactly ``overlap`` mm of printed content, so the
    stack can be glued by aligning the corner registration marks. Page count
    per axis is ceil((extent - overlap) / (printable - overlap)), with a
    single page when the extent already fits.
    """
    printable_w = page_width - 2 * margin
    printable_h = page_height - 2 * margin
    if printable_w <= overlap or printable_h <= overlap:
        raise PageTooSmall(
            f"printable area {printable_w:g}x{printable_h:g} mm must exceed "
            f"the {overlap:g} mm overlap"
        )
    xmin, ymin, xmax, ymax = sheet.bounds()
    width = xmax - xmin
    height = ymax - ymin
    cols = 1 if width <= printable_w else math.ceil((width - overlap) / (printable_w - overlap))
    rows = 1 if height <= printable_h else math.ceil((height - overlap) / (printable_h - overlap))

    pages = []
    for row in range(rows):
        for col in range(cols):
            ox = xmin + col * (printable_w - overlap)
            oy = ymin + row * (printable_h - overlap)
            marks = [
                (ox, oy),
                (ox + printable_w, oy),
                (ox + printable_w, oy + printable_h),
                (ox, oy + printable_h),
            ]
            pages.append(TemplatePage(
                page_width=page_width, page_height=page_height,
                printable_margin=margin, overlap=overlap,
                row=row, col=col, offset=(ox, oy),
                registration_marks=marks,
            ))
    return pages


# SVG rendering ---------------------------------------------------------------

_F = "%.4f"


def _fmt(x: float) -> str:
    s = _F % x
    return "0.0000" if s == "-0.0000" else s


def render_svg(pages: list[TemplatePage], sheet: TemplateSheet) -> list[bytes]:
    """One deterministic SVG document per page, page units = millimetres."""
    return [_render_page(page, sheet) for page in pages]


def _render_page(page: TemplatePage, sheet: TemplateSheet) -> bytes:
    w, h = page.page_width, page.page_height
    margin = page.printable_margin

    def to_page(x, y):
        # flip y: sheet +y is up, SVG +y is down
        px = x - page.offset[0] + margin
        py = h - margin - (y - page.offset[1])
        return px, py

    def path_d(points) -> str:
        cmds = []
        for i, (x, y) in enumerate(points):
            px, py = to_page(x, y)
            cmds.append(("M" if i == 0 else "L") + f" {_fmt(px)} {_fmt(py)}")
        return " ".join(cmds)

    out = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{w:g}mm" height="{h:g}mm" viewBox="0 0 {w:g} {h:g}">'
    )
    out.append(
        f'<desc>sheet={sheet.source_mesh} view={_fmt3(sheet.view_direction)} '
        f'up={_fmt3(sheet.view_up)} scale={sheet.scale:g} page={page.label}</desc>'
    )
    pw, ph = page.printable_width, page.printable_height
    out.append(
        f'<clipPath id="printable"><rect x="{_fmt(margin)}" y="{_fmt(margin)}" '
        f'width="{_fmt(pw)}" height="{_fmt(ph)}"/></clipPath>'
    )
    out.append(f'<rect x="{_fmt(margin)}" y="{_fmt(margin)}" width="{_fmt(pw)}" '
               f'height="{_fmt(ph)}" fill="none" stroke="#bbbbbb" stroke-width="0.1"/>')
    out.append('<g clip-path="url(#printable)">')
    # grid under the geometry
    for line in sheet.grid_lines:
        (x1, y1), (x2, y2) = line.start, line.end
        p1, p2 = to_page(x1, y1), to_page(x2, y2)
        stroke = "0.15" if line.label else "0.07"
        out.append(
            f'<line x1="{_fmt(p1[0])}" y1="{_fmt(p1[1])}" x2="{_fmt(p2[0])}" '
            f'y2="{_fmt(p2[1])}" stroke="#88aacc" stroke-width="{stroke}"/>'
        )
        if line.label:
            lx, ly = to_page(*line.start)
            out.append(
                f'<text x="{_fmt(lx + 0.8)}" y="{_fmt(ly - 0.8)}" font-size="3" '
                f'fill="#557799">{line.label}</text>'
            )
    for poly in sheet.silhouette:
        out.append(f'<path d="{path_d(poly)}" fill="none" stroke="#000000" '
                   f'stroke-width="0.35"/>')
    for seg in sheet.outline:
        out.append(f'<path d="{path_d(seg)}" fill="none" stroke="#444444" '
                   f'stroke-width="0.18"/>')
    out.append("</g>")
    # registration crosses on the printable corners (drawn unclipped)
    for cx, cy in page.registration_marks:
        px, py = to_page(cx, cy)
        out.append(
            f'<path d="M {_fmt(px - 4)} {_fmt(py)} L {_fmt(px + 4)} {_fmt(py)} '
            f'M {_fmt(px)} {_fmt(py - 4)} L {_fmt(px)} {_fmt(py + 4)}" '
            f'stroke="#cc0000" stroke-width="0.2" fill="none"/>'
        )
    # 100 mm calibration bar with end ticks, for checking the print scale
    bar_y = h - margin / 2
    out.append(
        f'<path d="M {_fmt(margin)} {_fmt(bar_y)} L {_fmt(margin + 100.0)} {_fmt(bar_y)} '
        f'M {_fmt(margin)} {_fmt(bar_y - 1.5)} L {_fmt(margin)} {_fmt(bar_y + 1.5)} '
        f'M {_fmt(margin + 100.0)} {_fmt(bar_y - 1.5)} L {_fmt(margin + 100.0)} '
        f'{_fmt(bar_y + 1.5)}" stroke="#000000" stroke-width="0.3" fill="none" '
        f'id="calibration-bar"/>'
    )
    out.append(f'<text x="{_fmt(margin + 102)}" y="{_fmt(bar_y + 1)}" font-size="3" '
               f'fill="#000000">100 mm calibration</text>')
    out.append(f'<text x="{_fmt(w / 2 - 5)}" y="{_fmt(h - margin / 2 + 1)}" '
               f'font-size="4" fill="#000000">{page.label}</text>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def _fmt3(v) -> str:
    return "(%g,%g,%g)" % (v[0], v[1], v[2])


def page_filename(sheet: TemplateSheet, view_name: str, page: TemplatePage) -> str:
    mesh = sheet.source_mesh or "mesh"
    return f"{mesh}_{view_name}_{page.label}.svg"


def sheet_from_dict(doc: dict) -> TemplateSheet:
    """Rebuild a sheet from its as_dict() form (grid lines are recomputed)."""
    return TemplateSheet(
        outline=[np.asarray(p, dtype=np.float64) for p in doc["outline"]],
        silhouette=[np.asarray(p, dtype=np.float64) for p in doc["silhouette"]],
        view_direction=np.asarray(doc["view_direction"], dtype=np.float64),
        view_up=np.asarray(doc["view_up"], dtype=np.float64),
        grid_spacing=float(doc.get("grid_spacing_mm", DEFAULT_GRID_MM)),
        source_mesh=str(doc.get("source_mesh", "")),
        scale=float(doc.get("scale", 1.0)),
    )
