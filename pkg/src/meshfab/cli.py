"""Command-line entry point.

Every subcommand is deterministic file-in/file-out: no timestamps, fixed
float formatting, stable ordering. Commands that write files also drop a
run_manifest.json beside them (input hashes, parameter snapshot, tool
version, output list). Exit codes: 0 success, 1 domain error (structured
JSON on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError
from .geodesics import GeodesicSolver, SurfacePoint, geodesic_distance, surface_point_near
from .mesh_io import export_mesh_json, export_mesh_obj, load_mesh_file, mesh_stats
from .orientation import Pose, canonicalize, euler_angles, principal_frame
from .packing import items_from_csv, pack_exact, pack_ffd
from .registration import deviation_report, estimate_scale, register_icp
from .structural import (
    anchor_distribution,
    climb_dynamic_case,
    climb_static_case,
    compliance_markdown,
    compliance_report,
    enumerate_footholds,
    foothold_stability,
    parse_truss_file,
    regular_hexagon,
    solve_truss,
    truss_from_json,
)
from .templating import (
    DEFAULT_GRID_MM,
    DEFAULT_MARGIN_MM,
    DEFAULT_OVERLAP_MM,
    PAGE_PRESETS,
    VIEW_PRESETS,
    overlay_grid,
    page_filename,
    project_orthographic,
    render_svg,
    sheet_from_dict,
    tile_pages,
)

PAGE_ENV_VAR = "MESHFAB_PAGE"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        sys.stderr.write(json.dumps(exc.payload(), sort_keys=True) + "\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def _emit(args, payload: dict) -> None:
    if getattr(args, "json", False):
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(outdir: Path, subcommand: str, inputs: list, params: dict,
                    outputs: list) -> Path:
    manifest = {
        "subcommand": subcommand,
        "tool_version": __version__,
        "inputs": {str(p): _sha256(Path(p)) for p in sorted(str(x) for x in inputs)},
        "parameters": params,
        "outputs": sorted(str(o) for o in outputs),
    }
    path = outdir / "run_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _parse_page(token: str) -> tuple[float, float]:
    if token in PAGE_PRESETS:
        return PAGE_PRESETS[token]
    if "x" in token:
        w, h = token.split("x", 1)
        return float(w), float(h)
    raise ValueError(f"unknown page {token!r}; presets: {', '.join(PAGE_PRESETS)}")


def _parse_xyz(token: str) -> np.ndarray:
    parts = token.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected x,y,z: {token!r}")
    return np.array([float(p) for p in parts])


def _parse_surface_point(mesh, near: str | None, face: str | None, solver_index=None):
    if (near is None) == (face is None):
        raise ValueError("give exactly one of a nearest-XYZ point or face:b0,b1,b2")
    if near is not None:
        return surface_point_near(mesh, _parse_xyz(near), solver_index)
    head, bary = face.split(":", 1)
    b = [float(x) for x in bary.split(",")]
    if len(b) != 3:
        raise ValueError("face point needs face:b0,b1,b2")
    return SurfacePoint(face=int(head), bary=tuple(b))


# subcommands -----------------------------------------------------------------

def cmd_inspect(args) -> int:
    mesh = load_mesh_file(args.mesh, unit_scale=args.unit_scale)
    _emit(args, mesh_stats(mesh).as_dict())
    return 0


def cmd_orient(args) -> int:
    mesh = load_mesh_file(args.mesh, unit_scale=args.unit_scale)
    frame = principal_frame(mesh, args.weighting)
    _, pose = canonicalize(mesh, frame)
    angles = euler_angles(pose)
    payload = frame.as_dict()
    payload["euler_deg"] = {
        "roll": angles.roll, "pitch": angles.pitch, "yaw": angles.yaw,
        "gimbal_lock": angles.gimbal_lock,
    }
    _emit(args, payload)
    return 0


def _resolve_view(args, mesh):
    if args.view in VIEW_PRESETS:
        direction, up = VIEW_PRESETS[args.view]
        return np.asarray(direction, float), np.asarray(up, float), args.view
    if args.view == "custom":
        if args.view_dir is None or args.view_up is None:
            raise ValueError("--view custom needs --view-dir and --view-up")
        return _parse_xyz(args.view_dir), _parse_xyz(args.view_up), "custom"
    raise ValueError(f"unknown view {args.view!r}")


def cmd_project(args) -> int:
    mesh = load_mesh_file(args.mesh, unit_scale=args.unit_scale)
    if args.canonical:
        mesh, _ = canonicalize(mesh, principal_frame(mesh, "area"))
    direction, up, view_name = _resolve_view(args, mesh)
    sheet = project_orthographic(mesh, direction, up, scale=args.scale)
    sheet = overlay_grid(sheet, args.grid)
    page_w, page_h = _parse_page(args.page)
    pages = tile_pages(sheet, page_w, page_h, margin=args.margin,
                       overlap=args.overlap)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for page, blob in zip(pages, render_svg(pages, sheet)):
        path = outdir / page_filename(sheet, view_name, page)
        path.write_bytes(blob)
        outputs.append(path)
    sidecar = outdir / f"{sheet.source_mesh or 'mesh'}_{view_name}_sheet.json"
    sidecar_doc = {
        "sheet": sheet.as_dict(),
        "pages": [
            {"row": p.row, "col": p.col, "offset": list(p.offset),
             "page_width": p.page_width, "page_height": p.page_height,
             "margin": p.printable_margin, "overlap": p.overlap,
             "label": p.label}
            for p in pages
        ],
        "files": sorted(p.name for p in outputs),
    }
    sidecar.write_text(json.dumps(sidecar_doc, indent=2, sort_keys=True) + "\n")
    outputs.append(sidecar)
    _write_manifest(outdir, "project", [args.mesh], {
        "view": view_name, "scale": args.scale, "page": args.page,
        "margin": args.margin, "overlap": args.overlap, "grid": args.grid,
        "canonical": args.canonical, "unit_scale": args.unit_scale,
    }, outputs)
    for path in outputs:
        sys.stdout.write(f"{path}\n")
    return 0


def cmd_tile(args) -> int:
    doc = json.loads(Path(args.sheet).read_text())
    sheet = sheet_from_dict(doc["sheet"] if "sheet" in doc else doc)
    sheet = overlay_grid(sheet, sheet.grid_spacing)
    page_w, page_h = _parse_page(args.page)
    pages = tile_pages(sheet, page_w, page_h, margin=args.margin,
                       overlap=args.overlap)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for page, blob in zip(pages, render_svg(pages, sheet)):
        path = outdir / page_filename(sheet, "tiled", page)
        path.write_bytes(blob)
        outputs.append(path)
    _write_manifest(outdir, "tile", [args.sheet], {
        "page": args.page, "margin": args.margin, "overlap": args.overlap,
    }, outputs)
    for path in outputs:
        sys.stdout.write(f"{path}\n")
    return 0


def cmd_geodesic(args) -> int:
    mesh = load_mesh_file(args.mesh, unit_scale=args.unit_scale)
    solver = GeodesicSolver(mesh)
    a = _parse_surface_point(mesh, args.from_xyz, args.from_face)
    b = _parse_surface_point(mesh, args.to_xyz, args.to_face)
    path = geodesic_distance(mesh, a, b, refine=not args.no_refine, solver=solver)
    payload = path.as_dict()
    payload["a"] = a.as_dict()
    payload["b"] = b.as_dict()
    _emit(args, payload)
    return 0


def cmd_register(args) -> int:
    scan = load_mesh_file(args.scan, unit_scale=args.unit_scale)
    design = load_mesh_file(args.design)
    initial = None
    scale_info = None
    if args.pairs:
        doc = json.loads(Path(args.pairs).read_text())
        pairs = [((np.asarray(p["scan"][0], float), np.asarray(p["scan"][1], float)),
                  float(p["true_mm"])) for p in doc]
        est = estimate_scale(pairs)
        scale_info = est.as_dict()
        initial = Pose(rotation=np.eye(3), translation=np.zeros(3), scale=est.scale)
    result = register_icp(scan, design, initial=initial,
                          max_iterations=args.max_iterations,
                          inlier_distance=args.inlier_distance)
    payload = result.as_dict()
    if scale_info is not None:
        payload["scale_estimate"] = scale_info
    if args.deviation:
        payload["deviation"] = deviation_report(
            scan, design, result.pose, threshold=args.threshold).as_dict()
    outputs = []
    if args.out_mesh:
        out_path = Path(args.out_mesh)
        moved = scan.transformed(result.pose.apply(scan.vertices))
        out_path.write_bytes(export_mesh_obj(moved))
        outputs.append(out_path)
        _write_manifest(out_path.parent, "register",
                        [args.scan, args.design] + ([args.pairs] if args.pairs else []),
                        {"max_iterations": args.max_iterations,
                         "inlier_distance": args.inlier_distance,
                         "unit_scale": args.unit_scale}, outputs)
    _emit(args, payload)
    return 0


def cmd_loads(args) -> int:
    truss_path = Path(args.truss)
    if truss_path.suffix.lower() == ".json":
        model, cases = truss_from_json(json.loads(truss_path.read_text()))
    else:
        model, cases = parse_truss_file(truss_path.read_text())
    if args.case:
        cases = [c for c in cases if c.name in set(args.case)]
        if not cases:
            raise ValueError("no matching load case")
    if args.climb_static is not None:
        cases.append(climb_static_case(args.climb_static))
    if args.climb_dynamic is not None:
        cases.append(climb_dynamic_case(args.climb_dynamic))
    solutions = {c.name: solve_truss(model, c) for c in cases}
    anchors = None
    if args.anchors:
        doc = json.loads(Path(args.anchors).read_text())
        anchors = anchor_distribution(
            np.asarray(doc["positions_mm"], float),
            tuple(doc.get("base_load_n", (0.0, 0.0, 0.0))),
            tuple(doc.get("overturning_moment_nmm", (0.0, 0.0))),
        )
    base_ids = [int(x) for x in args.base_members.split(",")] if args.base_members else ()
    report = compliance_report(model, solutions, base_member_ids=base_ids,
                               anchors=anchors)
    if args.members:
        report["member_reports"] = {
            name: solutions[name].as_dict() for name in sorted(solutions)
        }
    if args.markdown:
        sys.stdout.write(compliance_markdown(report))
    else:
        _emit(args, report)
    return 0


def cmd_stability(args) -> int:
    if args.hexagon is not None:
        base = regular_hexagon(args.hexagon)
    elif args.base_vertices:
        base = np.asarray(json.loads(Path(args.base_vertices).read_text()), float)
    else:
        raise ValueError("give --hexagon RADIUS or --base-vertices FILE")
    com = _parse_xyz(args.com)
    if args.choose:
        chosen = tuple(int(i) for i in args.choose.split(","))
        config = foothold_stability(base, chosen, com)
        _emit(args, config.as_dict())
    else:
        configs = enumerate_footholds(base, args.enumerate, com)
        _emit(args, {
            "count": len(configs),
            "stable_count": sum(1 for c in configs if c.stable),
            "configs": [c.as_dict() for c in configs],
        })
    return 0


def cmd_pack(args) -> int:
    items = items_from_csv(Path(args.items).read_bytes())
    packer = pack_exact if args.exact else pack_ffd
    manifest = packer(items, args.mass_cap, args.volume_cap)
    payload = manifest.as_dict()
    payload["crate_count"] = manifest.crate_count
    if args.out:
        out = Path(args.out)
        out.write_bytes(manifest.to_json())
        _write_manifest(out.parent, "pack", [args.items],
                        {"mass_cap": args.mass_cap, "volume_cap": args.volume_cap,
                         "exact": args.exact}, [out])
    _emit(args, payload)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import build_catalog, create_app

    catalog = build_catalog(args.directory)
    app = create_app(catalog, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_mesh_export(args) -> int:
    mesh = load_mesh_file(args.mesh, unit_scale=args.unit_scale)
    out = Path(args.out)
    if out.suffix.lower() == ".json":
        out.write_bytes(export_mesh_json(mesh))
    else:
        out.write_bytes(export_mesh_obj(mesh))
    _write_manifest(out.parent, "convert", [args.mesh],
                    {"unit_scale": args.unit_scale}, [out])
    sys.stdout.write(f"{out}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meshfab",
        description="mesh-to-fabrication toolkit: templates, geodesics, "
                    "registration, structural checks, packing",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_mesh_arg(p):
        p.add_argument("mesh", help="mesh file (.obj/.stl/.ply/.json)")
        p.add_argument("--unit-scale", type=float, default=1.0,
                       help="millimetres per model unit (default 1)")

    p = sub.add_parser("inspect", help="mesh statistics")
    add_mesh_arg(p)
    p.add_argument("--json", action="store_true", help="compact machine output")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("orient", help="principal frame and euler angles")
    add_mesh_arg(p)
    p.add_argument("--weighting", choices=("vertex", "area"), default="vertex")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_orient)

    p = sub.add_parser("project", help="orthographic template pages (SVG)")
    add_mesh_arg(p)
    p.add_argument("--view", default="front",
                   help=f"{'|'.join(VIEW_PRESETS)}|custom")
    p.add_argument("--view-dir", help="x,y,z for --view custom")
    p.add_argument("--view-up", help="x,y,z for --view custom")
    p.add_argument("--canonical", action="store_true",
                   help="canonicalize pose before projecting")
    p.add_argument("--scale", type=float, default=1.0,
                   help="drawing mm per object mm (default 1:1)")
    p.add_argument("--page", default=os.environ.get(PAGE_ENV_VAR, "A1"),
                   help=f"preset ({', '.join(PAGE_PRESETS)}) or WxH mm; "
                        f"${PAGE_ENV_VAR} overrides the default")
    p.add_argument("--margin", type=float, default=DEFAULT_MARGIN_MM)
    p.add_argument("--overlap", type=float, default=DEFAULT_OVERLAP_MM)
    p.add_argument("--grid", type=float, default=DEFAULT_GRID_MM)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("tile", help="re-tile a sheet sidecar JSON onto pages")
    p.add_argument("sheet", help="sheet JSON from `project`")
    p.add_argument("--page", default=os.environ.get(PAGE_ENV_VAR, "A1"))
    p.add_argument("--margin", type=float, default=DEFAULT_MARGIN_MM)
    p.add_argument("--overlap", type=float, default=DEFAULT_OVERLAP_MM)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_tile)

    p = sub.add_parser("geodesic", help="surface distance between two points")
    add_mesh_arg(p)
    p.add_argument("--from", dest="from_xyz", help="x,y,z snapped to the surface")
    p.add_argument("--to", dest="to_xyz", help="x,y,z snapped to the surface")
    p.add_argument("--from-face", help="face:b0,b1,b2 barycentric point")
    p.add_argument("--to-face", help="face:b0,b1,b2 barycentric point")
    p.add_argument("--no-refine", action="store_true",
                   help="skip path straightening (graph path only)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_geodesic)

    p = sub.add_parser("register", help="align a scan mesh onto a design mesh")
    p.add_argument("scan")
    p.add_argument("design")
    p.add_argument("--unit-scale", type=float, default=1.0,
                   help="millimetres per scan model unit")
    p.add_argument("--pairs", help="reference pair JSON for scale recovery")
    p.add_argument("--max-iterations", type=int, default=50)
    p.add_argument("--inlier-distance", type=float, default=25.0)
    p.add_argument("--deviation", action="store_true",
                   help="append a deviation report")
    p.add_argument("--threshold", type=float, default=5.0,
                   help="deviation flag threshold, mm")
    p.add_argument("--out-mesh", help="write the transformed scan as OBJ")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("loads", help="truss solve + compliance report")
    p.add_argument("truss", help="truss + load-case text file")
    p.add_argument("--case", action="append", help="restrict to named case(s)")
    p.add_argument("--climb-static", type=int, metavar="JOINT",
                   help="add the 250 lbf climb preset at JOINT")
    p.add_argument("--climb-dynamic", type=int, metavar="JOINT",
                   help="add the 400 lbf dynamic climb preset at JOINT")
    p.add_argument("--base-members", help="comma-separated base member indices")
    p.add_argument("--anchors", help="anchor layout JSON")
    p.add_argument("--members", action="store_true",
                   help="include per-member force reports")
    p.add_argument("--markdown", action="store_true", help="markdown report")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_loads)

    p = sub.add_parser("stability", help="foothold stability on the base")
    p.add_argument("--hexagon", type=float, metavar="RADIUS_MM",
                   help="regular hexagonal base circumradius")
    p.add_argument("--base-vertices", help="JSON file with (n,2) ground points")
    p.add_argument("--com", required=True, help="center of mass x,y,z")
    p.add_argument("--choose", help="comma-separated foothold indices")
    p.add_argument("--enumerate", type=int, default=2, metavar="K",
                   help="enumerate all K-subsets (default pairs)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("pack", help="crate packing from an item CSV")
    p.add_argument("items", help="CSV: name,mass_kg,volume_m3,fragile")
    p.add_argument("--mass-cap", type=float, required=True)
    p.add_argument("--volume-cap", type=float, required=True)
    p.add_argument("--exact", action="store_true",
                   help="provably minimal crate count (<= 12 items)")
    p.add_argument("--out", help="write manifest JSON here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("convert", help="convert a mesh to OBJ or toolkit JSON")
    add_mesh_arg(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mesh_export)

    p = sub.add_parser("serve", help="read-only HTTP service for the viewer")
    p.add_argument("directory", help="directory of mesh files")
    p.add_argument("--host", default="127.0.0.1",
                   help="bind address (loopback by default)")
    p.add_argument("--port", type=int, default=8075)
    p.add_argument("--static", help="serve this directory at / (viewer bundle)")
    p.set_defaults(func=cmd_serve)

    return parser


if __name__ == "__main__":
    sys.exit(main())
