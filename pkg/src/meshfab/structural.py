"""Static verification at desk scale.

Pin-jointed axial-only truss equilibrium (no bending), wind drag loads,
anchor load distribution with spacing/capacity checks, hexagonal-base
foothold stability and the factor-of-safety gate. Equilibrium is solved by
linear least squares on the joint equilibrium system; a mechanism is
reported when the applied load cannot be equilibrated, together with the
unresisted motion from the left null space.

Compliance constants (design wind gust, climb loads, FOS gates, anchor
limits) live here as named presets so reports can cite them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from . import units
from .errors import CollinearAnchors, MalformedFile, MechanismDetected

# site compliance constants
DESIGN_WIND_MPH = 75.0
DESIGN_WIND_MPS = DESIGN_WIND_MPH * units.MPS_PER_MPH   # 33.528 exactly
CLIMB_STATIC_LBF = 250.0     # per foothold
CLIMB_DYNAMIC_LBF = 400.0    # dynamic at panel joints
FOS_MIN_BASE = 5.0
FOS_MIN_SKELETON = 3.0
ANCHOR_MIN_SPACING_MM = 3.0 * units.MM_PER_FT           # 914.4
ANCHOR_MAX_TENSION_N = 3000.0 * units.N_PER_LBF         # 3000 lbf helical rating
AIR_DENSITY_DEFAULT = 1.225  # kg/m^3, sea level (conservative for the playa)
DRAG_COEFFICIENT_DEFAULT = 1.2  # bluff body

_EQUILIBRIUM_RTOL = 1e-6


@dataclass(frozen=True)
class Joint:
    position: tuple[float, float, float]  # mm
    pinned: bool = False
    name: str = ""


@dataclass(frozen=True)
class Member:
    joint_a: int
    joint_b: int
    area_mm2: float
    yield_mpa: float
    name: str = ""
    group: str = "skeleton"            # "base" or "skeleton", for the FOS gate
    tension_capacity_n: float | None = None     # default: yield * area
    compression_capacity_n: float | None = None
    linear_density_kg_m: float = 0.0   # for gravity load cases

    def capacity(self, tension: bool) -> float:
        explicit = self.tension_capacity_n if tension else self.compression_capacity_n
        if explicit is not None:
            return explicit
        return self.yield_mpa * self.area_mm2  # MPa * mm^2 = N


@dataclass(frozen=True)
class TrussModel:
    joints: list
    members: list

    def __post_init__(self):
        for m in self.members:
            if not (0 <= m.joint_a < len(self.joints)) or not (0 <= m.joint_b < len(self.joints)):
                raise ValueError(f"member {m.name!r} references a missing joint")
            if m.joint_a == m.joint_b:
                raise ValueError(f"member {m.name!r} connects a joint to itself")
            if self.member_length(m) <= 0:
                raise ValueError(f"member {m.name!r} has zero length")

    def member_length(self, m: Member) -> float:
        a = np.asarray(self.joints[m.joint_a].position)
        b = np.asarray(self.joints[m.joint_b].position)
        return float(np.linalg.norm(b - a))


@dataclass(frozen=True)
class WindSpec:
    speed_mps: float
    drag_coefficient: float = DRAG_COEFFICIENT_DEFAULT
    air_density: float = AIR_DENSITY_DEFAULT
    direction: tuple[float, float, float] = (1.0, 0.0, 0.0)
    exposure_m2: dict = field(default_factory=dict)  # joint index -> projected area


@dataclass(frozen=True)
class LoadCase:
    name: str
    point_loads: list = field(default_factory=list)  # (joint index, (fx, fy, fz) N)
    wind: WindSpec | None = None
    gravity: bool = False

    def joint_forces(self, model: TrussModel) -> np.ndarray:
        """Assembled (n_joints, 3) applied force array in N."""
        f = np.zeros((len(model.joints), 3))
        for j, vec in self.point_loads:
            f[j] += np.asarray(vec, dtype=np.float64)
        if self.wind is not None:
            w = self.wind
            d = np.asarray(w.direction, dtype=np.float64)
            norm = np.linalg.norm(d)
            if norm < 1e-12:
                raise ValueError("wind direction must be non-zero")
            d = d / norm
            for j, area in w.exposure_m2.items():
                drag = wind_drag_force(w.speed_mps, w.drag_coefficient, area,
                                       w.air_density)
                f[j] += drag * d
        if self.gravity:
            for m in model.members:
                length_m = model.member_length(m) / 1000.0
                weight = m.linear_density_kg_m * length_m * units.GRAVITY_MPS2
                f[m.joint_a, 2] -= weight / 2.0
                f[m.joint_b, 2] -= weight / 2.0
        return f


def wind_drag_force(speed_mps: float, drag_coefficient: float,
                    projected_area_m2: float,
                    air_density: float = AIR_DENSITY_DEFAULT) -> float:
    """Drag force in N: 0.5 * rho * C_d * A * v^2."""
    if min(speed_mps, drag_coefficient, projected_area_m2, air_density) < 0:
        raise ValueError("drag inputs must be non-negative")
    return 0.5 * air_density * drag_coefficient * projected_area_m2 * speed_mps**2


@dataclass(frozen=True)
class MemberReport:
    member: int
    name: str
    group: str
    force_n: float        # positive = tension
    utilization: float    # |force| / capacity
    factor_of_safety: float  # capacity / |force|, inf for zero force

    def as_dict(self) -> dict:
        return {
            "member": self.member,
            "name": self.name,
            "group": self.group,
            "force_n": self.force_n,
            "utilization": self.utilization,
            "factor_of_safety": self.factor_of_safety,
        }


@dataclass(frozen=True)
class TrussSolution:
    member_reports: list
    reactions: dict               # joint index -> (3,) N
    residual: float               # equilibrium residual, relative

    def as_dict(self) -> dict:
        return {
            "members": [r.as_dict() for r in self.member_reports],
            "reactions": {str(j): list(map(float, r)) for j, r in self.reactions.items()},
            "residual": self.residual,
        }


def solve_truss(model: TrussModel, load: LoadCase) -> TrussSolution:
    """Joint-equilibrium solution for member axial forces and reactions.

    Unknowns are member forces plus 3 reaction components per pinned joint;
    equations are force balance at every joint. Determinate systems solve
    exactly; over-constrained ones get the least-squares (minimum-norm)
    force distribution. If the loads cannot be equilibrated the truss is a
    mechanism and the unresisted motion is reported.
    """
    n_joints = len(model.joints)
    n_members = len(model.members)
    pinned = [i for i, j in enumerate(model.joints) if j.pinned]
    if not pinned:
        raise MechanismDetected("no pinned joints: rigid-body motion is unresisted")
    n_unknowns = n_members + 3 * len(pinned)

    a = np.zeros((3 * n_joints, n_unknowns))
    positions = np.asarray([j.position for j in model.joints], dtype=np.float64)
    for k, m in enumerate(model.members):
        e = positions[m.joint_b] - positions[m.joint_a]
        e = e / np.linalg.norm(e)
        a[3 * m.joint_a:3 * m.joint_a + 3, k] = e     # tension pulls a toward b
        a[3 * m.joint_b:3 * m.joint_b + 3, k] = -e
    for r, j in enumerate(pinned):
        for axis in range(3):
            a[3 * j + axis, n_members + 3 * r + axis] = 1.0

    applied = load.joint_forces(model)
    b = -applied.ravel()
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    load_norm = float(np.linalg.norm(b))
    residual = float(np.linalg.norm(a @ x - b)) / max(load_norm, 1e-30)
    if load_norm > 0 and residual > _EQUILIBRIUM_RTOL:
        raise MechanismDetected(
            f"equilibrium unattainable (residual {residual:.3g}): "
            "insufficient bracing for this load",
            motion=_mechanism_motion(a, model),
        )

    reports = []
    for k, m in enumerate(model.members):
        force = float(x[k])
        cap = m.capacity(tension=force >= 0)
        magnitude = abs(force)
        reports.append(MemberReport(
            member=k,
            name=m.name or f"m{k}",
            group=m.group,
            force_n=force,
            utilization=magnitude / cap if cap > 0 else math.inf,
            factor_of_safety=cap / magnitude if magnitude > 0 else math.inf,
        ))
    reactions = {}
    for r, j in enumerate(pinned):
        reactions[j] = np.array(x[n_members + 3 * r: n_members + 3 * r + 3])
    return TrussSolution(member_reports=reports, reactions=reactions, residual=residual)


def _mechanism_motion(a: np.ndarray, model: TrussModel) -> list:
    """Left-null-space direction of the equilibrium matrix = free joint motion."""
    u, _, _ = np.linalg.svd(a)
    null = u[:, -1]  # weakest-resisted direction of joint motion
    motion = []
    per_joint = null.reshape(-1, 3)
    worst = np.linalg.norm(per_joint, axis=1)
    for j in np.argsort(-worst)[:4]:
        if worst[j] > 1e-6:
            motion.append((int(j), *[float(v) for v in per_joint[j]]))
    return motion


# anchors ----------------------------------------------------------------------

@dataclass(frozen=True)
class AnchorLoads:
    tensions_n: np.ndarray          # vertical load per anchor, + = uplift/tension
    spacing_violations: list        # (i, j, distance_mm) pairs closer than 3 ft
    overloaded: list                # (i, tension_n) above the helical rating
    shear_per_anchor_n: tuple       # in-plane shear split equally

    def as_dict(self) -> dict:
        return {
            "tensions_n": [float(t) for t in self.tensions_n],
            "spacing_violations": [
                {"a": i, "b": j, "distance_mm": d} for i, j, d in self.spacing_violations
            ],
            "overloaded": [{"anchor": i, "tension_n": t} for i, t in self.overloaded],
            "shear_per_anchor_n": list(self.shear_per_anchor_n),
        }


def anchor_distribution(anchor_positions, base_load_n, overturning_moment_nmm=(0.0, 0.0)) -> AnchorLoads:
    """Rigid-plate distribution of uplift + overturning across anchors.

    anchor_positions: (n, 2) mm in the ground plane. base_load_n: (fx, fy, fz)
    with +z = uplift. overturning_moment_nmm: (Mx, My) about the ground axes.
    The three equilibrium equations are solved by minimum-norm least squares,
    which reproduces the classic linear (planar) tension distribution.
    """
    pos = np.asarray(anchor_positions, dtype=np.float64)
    if pos.ndim != 2 or pos.shape[1] != 2 or len(pos) < 3:
        raise CollinearAnchors("need at least 3 anchor positions (n, 2)")
    spread = pos - pos.mean(axis=0)
    if np.linalg.matrix_rank(spread, tol=1e-9) < 2:
        raise CollinearAnchors("anchor positions are collinear")
    fx, fy, fz = (float(v) for v in base_load_n)
    mx, my = (float(v) for v in overturning_moment_nmm)
    # rows: sum t = fz; sum y*t = Mx; sum -x*t = My
    a = np.vstack([np.ones(len(pos)), pos[:, 1], -pos[:, 0]])
    b = np.array([fz, mx, my])
    tensions, *_ = np.linalg.lstsq(a, b, rcond=None)

    violations = []
    for i, j in combinations(range(len(pos)), 2):
        d = float(np.linalg.norm(pos[i] - pos[j]))
        if d < ANCHOR_MIN_SPACING_MM:
            violations.append((i, j, d))
    overloaded = [(int(i), float(t)) for i, t in enumerate(tensions)
                  if t > ANCHOR_MAX_TENSION_N]
    return AnchorLoads(
        tensions_n=tensions,
        spacing_violations=violations,
        overloaded=overloaded,
        shear_per_anchor_n=(fx / len(pos), fy / len(pos)),
    )


# footholds ---------------------------------------------------------------------

@dataclass(frozen=True)
class FootholdConfig:
    chosen: tuple                 # indices into the base vertex ring
    support_polygon: np.ndarray   # (k, 2) convex hull, ground plane mm
    stable: bool
    margin: float                 # distance from COM projection to the boundary;
                                  # negative when outside (or for zero-width pairs)

    def as_dict(self) -> dict:
        return {
            "chosen": list(self.chosen),
            "support_polygon": self.support_polygon.tolist(),
            "stable": self.stable,
            "margin_mm": self.margin,
        }


def foothold_stability(base_vertices, chosen, com) -> FootholdConfig:
    """Static stability of a foothold choice on the hexagonal base.

    Stable iff the vertical projection of the center of mass lies strictly
    inside the support polygon of the chosen ground points. A pair of
    footholds spans a zero-width polygon, so it can never be stable on its
    own; its margin is reported as <= 0.
    """
    base = np.asarray(base_vertices, dtype=np.float64)[:, :2]
    chosen = tuple(int(i) for i in chosen)
    if len(set(chosen)) != len(chosen):
        raise ValueError("chosen indices must be distinct")
    for i in chosen:
        if not (0 <= i < len(base)):
            raise ValueError(f"choice {i} out of range")
    pts = base[list(chosen)]
    com_xy = np.asarray(com, dtype=np.float64)[:2]

    hull = _convex_hull(pts)
    if len(hull) < 3:
        # segment (or point): margin is minus the distance to it
        margin = -_distance_to_segment_chain(com_xy, hull)
        return FootholdConfig(chosen=chosen, support_polygon=hull,
                              stable=False, margin=float(margin))
    margin = _signed_inset(com_xy, hull)
    return FootholdConfig(chosen=chosen, support_polygon=hull,
                          stable=bool(margin > 0), margin=float(margin))


def enumerate_footholds(base_vertices, k, com) -> list:
    """All C(n, k) foothold configurations, in deterministic index order."""
    base = np.asarray(base_vertices, dtype=np.float64)
    return [foothold_stability(base, c, com)
            for c in combinations(range(len(base)), k)]


def _cross2(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _convex_hull(pts: np.ndarray) -> np.ndarray:
    pts = np.unique(np.round(pts, 12), axis=0)
    if len(pts) <= 2:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def half(points):
        out = []
        for p in points:
            while len(out) >= 2 and _cross2(out[-1] - out[-2], p - out[-2]) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    return hull if len(hull) >= 3 else pts


def _signed_inset(p: np.ndarray, hull: np.ndarray) -> float:
    """Distance to the hull boundary: positive inside, negative outside."""
    inside = True
    min_edge = math.inf
    n = len(hull)
    for i in range(n):
        a, b = hull[i], hull[(i + 1) % n]
        edge = b - a
        if _cross2(edge, p - a) < 0:
            inside = False
        min_edge = min(min_edge, _point_segment_distance(p, a, b))
    return min_edge if inside else -min_edge


def _point_segment_distance(p, a, b) -> float:
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0 else max(0.0, min(1.0, float((p - a) @ ab) / denom))
    return float(np.linalg.norm(a + t * ab - p))


def _distance_to_segment_chain(p, chain) -> float:
    if len(chain) == 1:
        return float(np.linalg.norm(chain[0] - p))
    return min(_point_segment_distance(p, chain[i], chain[i + 1])
               for i in range(len(chain) - 1))


def regular_hexagon(circumradius_mm: float) -> np.ndarray:
    """Vertices of the hexagonal base ring, (6, 2) mm, CCW from +x."""
    ang = np.radians(60.0 * np.arange(6))
    return np.stack([circumradius_mm * np.cos(ang),
                     circumradius_mm * np.sin(ang)], axis=1)


# FOS gate -----------------------------------------------------------------------

@dataclass(frozen=True)
class FosSummary:
    min_fos_base: float
    min_fos_skeleton: float
    passed: bool
    offenders: list   # member names failing their gate

    def as_dict(self) -> dict:
        return {
            "min_fos_base": self.min_fos_base,
            "min_fos_skeleton": self.min_fos_skeleton,
            "pass": self.passed,
            "offenders": self.offenders,
        }


def fos_summary(reports, base_member_ids=()) -> FosSummary:
    """Gate: base members need FOS > 5, everything else FOS > 3.

    Zero-force members carry FOS = inf and never drive the minimum.
    """
    if not reports:
        raise ValueError("no member reports")
    base_ids = set(base_member_ids)
    min_base = math.inf
    min_skeleton = math.inf
    offenders = []
    for r in reports:
        is_base = r.member in base_ids or r.group == "base"
        if is_base:
            min_base = min(min_base, r.factor_of_safety)
            if r.factor_of_safety <= FOS_MIN_BASE:
                offenders.append(r.name)
        else:
            min_skeleton = min(min_skeleton, r.factor_of_safety)
            if r.factor_of_safety <= FOS_MIN_SKELETON:
                offenders.append(r.name)
    passed = min_base > FOS_MIN_BASE and min_skeleton > FOS_MIN_SKELETON
    return FosSummary(min_fos_base=min_base, min_fos_skeleton=min_skeleton,
                      passed=passed, offenders=offenders)


# load-case presets ----------------------------------------------------------------

def climb_static_case(joint: int) -> LoadCase:
    """Design climb load: 250 lbf down at one foothold."""
    return LoadCase(name="climb_static_250lbf",
                    point_loads=[(joint, (0.0, 0.0, -units.lbf_to_n(CLIMB_STATIC_LBF)))])


def climb_dynamic_case(joint: int) -> LoadCase:
    """Dynamic climb load: 400 lbf down at a panel joint."""
    return LoadCase(name="climb_dynamic_400lbf",
                    point_loads=[(joint, (0.0, 0.0, -units.lbf_to_n(CLIMB_DYNAMIC_LBF)))])


def design_wind_case(exposure_m2: dict, direction=(1.0, 0.0, 0.0),
                     drag_coefficient: float = DRAG_COEFFICIENT_DEFAULT,
                     air_density: float = AIR_DENSITY_DEFAULT) -> LoadCase:
    """Design gust: 75 mph on the given per-joint projected areas."""
    return LoadCase(name="wind_75mph",
                    wind=WindSpec(speed_mps=DESIGN_WIND_MPS,
                                  drag_coefficient=drag_coefficient,
                                  air_density=air_density,
                                  direction=tuple(direction),
                                  exposure_m2=dict(exposure_m2)))


LOAD_CASE_PRESETS = {
    "climb_static_250lbf": climb_static_case,
    "climb_dynamic_400lbf": climb_dynamic_case,
    "wind_75mph": design_wind_case,
}


# text format ----------------------------------------------------------------------

def parse_truss_file(text: str) -> tuple[TrussModel, list]:
    """Line-oriented truss + load-case grammar (see README for the format).

    Records: joint / member / support / case / load / wind / exposure /
    gravity / density. '#' starts a comment.
    """
    joints: list[Joint] = []
    members: list[Member] = []
    joint_ids: dict[str, int] = {}
    member_ids: dict[str, int] = {}
    pinned: set[int] = set()
    cases: list[dict] = []

    def current_case(lineno) -> dict:
        if not cases:
            cases.append({"name": "default", "loads": [], "wind": None,
                          "gravity": False})
        return cases[-1]

    def want(fields, n, lineno, what):
        if len(fields) < n:
            raise MalformedFile(f"{what}: expected {n - 1} values", line=lineno)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        record = fields[0].lower()
        try:
            if record == "joint":
                want(fields, 5, lineno, "joint")
                name = fields[1]
                if name in joint_ids:
                    raise MalformedFile(f"duplicate joint {name!r}", line=lineno)
                joint_ids[name] = len(joints)
                joints.append(Joint(position=(float(fields[2]), float(fields[3]),
                                              float(fields[4])), name=name))
            elif record == "member":
                want(fields, 6, lineno, "member")
                name = fields[1]
                if name in member_ids:
                    raise MalformedFile(f"duplicate member {name!r}", line=lineno)
                extra = dict(kv.split("=", 1) for kv in fields[6:] if "=" in kv)
                member_ids[name] = len(members)
                members.append(Member(
                    joint_a=_joint_ref(joint_ids, fields[2], lineno),
                    joint_b=_joint_ref(joint_ids, fields[3], lineno),
                    area_mm2=float(fields[4]),
                    yield_mpa=float(fields[5]),
                    name=name,
                    group=extra.get("group", "skeleton"),
                    tension_capacity_n=_opt_float(extra.get("tension")),
                    compression_capacity_n=_opt_float(extra.get("compression")),
                    linear_density_kg_m=float(extra.get("density", 0.0)),
                ))
            elif record == "support":
                want(fields, 3, lineno, "support")
                if fields[2].lower() != "pinned":
                    raise MalformedFile(f"unknown support type {fields[2]!r}",
                                        line=lineno)
                pinned.add(_joint_ref(joint_ids, fields[1], lineno))
            elif record == "case":
                want(fields, 2, lineno, "case")
                cases.append({"name": fields[1], "loads": [], "wind": None,
                              "gravity": False})
            elif record == "load":
                want(fields, 5, lineno, "load")
                case = current_case(lineno)
                case["loads"].append((
                    _joint_ref(joint_ids, fields[1], lineno),
                    (float(fields[2]), float(fields[3]), float(fields[4])),
                ))
            elif record == "wind":
                want(fields, 2, lineno, "wind")
                extra = dict(kv.split("=", 1) for kv in fields[2:] if "=" in kv)
                case = current_case(lineno)
                direction = (1.0, 0.0, 0.0)
                if "dir" in extra:
                    parts = extra["dir"].split(",")
                    direction = (float(parts[0]), float(parts[1]), float(parts[2]))
                case["wind"] = {
                    "speed": float(fields[1]),
                    "cd": float(extra.get("cd", DRAG_COEFFICIENT_DEFAULT)),
                    "rho": float(extra.get("rho", AIR_DENSITY_DEFAULT)),
                    "direction": direction,
                    "exposure": {},
                }
            elif record == "exposure":
                want(fields, 3, lineno, "exposure")
                case = current_case(lineno)
                if case["wind"] is None:
                    raise MalformedFile("exposure before wind record", line=lineno)
                case["wind"]["exposure"][_joint_ref(joint_ids, fields[1], lineno)] = \
                    float(fields[2])
            elif record == "gravity":
                want(fields, 2, lineno, "gravity")
                current_case(lineno)["gravity"] = fields[1].lower() == "on"
            elif record == "density":
                want(fields, 3, lineno, "density")
                idx = member_ids.get(fields[1])
                if idx is None:
                    raise MalformedFile(f"unknown member {fields[1]!r}", line=lineno)
                members[idx] = replace(members[idx],
                                       linear_density_kg_m=float(fields[2]))
            else:
                raise MalformedFile(f"unknown record {record!r}", line=lineno)
        except ValueError as exc:
            raise MalformedFile(f"bad value: {exc}", line=lineno) from exc

    joints = [Joint(position=j.position, pinned=(i in pinned), name=j.name)
              for i, j in enumerate(joints)]
    model = TrussModel(joints=joints, members=members)
    load_cases = []
    for c in cases:
        wind = None
        if c["wind"] is not None:
            w = c["wind"]
            wind = WindSpec(speed_mps=w["speed"], drag_coefficient=w["cd"],
                            air_density=w["rho"], direction=w["direction"],
                            exposure_m2=w["exposure"])
        load_cases.append(LoadCase(name=c["name"], point_loads=c["loads"],
                                   wind=wind, gravity=c["gravity"]))
    return model, load_cases


def truss_from_json(doc: dict) -> tuple[TrussModel, list]:
    """JSON twin of the text format (see README for the schema)."""
    joint_ids = {}
    joints = []
    for j in doc.get("joints", []):
        joint_ids[j["name"]] = len(joints)
        joints.append(Joint(position=tuple(float(v) for v in j["position"]),
                            pinned=bool(j.get("pinned", False)), name=j["name"]))
    members = []
    for m in doc.get("members", []):
        a, b = m["joints"]
        members.append(Member(
            joint_a=joint_ids[a], joint_b=joint_ids[b],
            area_mm2=float(m["area_mm2"]), yield_mpa=float(m["yield_mpa"]),
            name=m.get("name", ""), group=m.get("group", "skeleton"),
            tension_capacity_n=_opt_float(m.get("tension_capacity_n")),
            compression_capacity_n=_opt_float(m.get("compression_capacity_n")),
            linear_density_kg_m=float(m.get("linear_density_kg_m", 0.0)),
        ))
    model = TrussModel(joints=joints, members=members)
    cases = []
    for c in doc.get("cases", []):
        wind = None
        if c.get("wind"):
            w = c["wind"]
            wind = WindSpec(
                speed_mps=float(w["speed_mps"]),
                drag_coefficient=float(w.get("drag_coefficient",
                                             DRAG_COEFFICIENT_DEFAULT)),
                air_density=float(w.get("air_density", AIR_DENSITY_DEFAULT)),
                direction=tuple(w.get("direction", (1.0, 0.0, 0.0))),
                exposure_m2={joint_ids[k]: float(v)
                             for k, v in w.get("exposure_m2", {}).items()},
            )
        cases.append(LoadCase(
            name=c.get("name", "default"),
            point_loads=[(joint_ids[p["joint"]], tuple(float(v) for v in p["force_n"]))
                         for p in c.get("point_loads", [])],
            wind=wind,
            gravity=bool(c.get("gravity", False)),
        ))
    return model, cases


def _joint_ref(joint_ids: dict, token: str, lineno: int) -> int:
    if token not in joint_ids:
        raise MalformedFile(f"unknown joint {token!r}", line=lineno)
    return joint_ids[token]


def _opt_float(v):
    return None if v is None else float(v)


# compliance report ---------------------------------------------------------------

def compliance_report(model: TrussModel, solutions: dict,
                      base_member_ids=(), anchors: AnchorLoads | None = None) -> dict:
    """Machine-readable compliance summary across solved load cases.

    ``solutions`` maps case name to TrussSolution. Mirrors the site
    requirement sheet: design gust, climb presets, FOS gates, anchor checks.
    """
    rows = []
    worst_gate = True
    for case_name in sorted(solutions):
        summary = fos_summary(solutions[case_name].member_reports, base_member_ids)
        worst_gate = worst_gate and summary.passed
        rows.append({
            "case": case_name,
            "min_fos_base": summary.min_fos_base,
            "min_fos_skeleton": summary.min_fos_skeleton,
            "pass": summary.passed,
            "offenders": summary.offenders,
        })
    report = {
        "requirements": {
            "wind_gust_design_mph": DESIGN_WIND_MPH,
            "wind_gust_design_mps": DESIGN_WIND_MPS,
            "climb_load_static_lbf": CLIMB_STATIC_LBF,
            "climb_load_dynamic_lbf": CLIMB_DYNAMIC_LBF,
            "fos_min_base": FOS_MIN_BASE,
            "fos_min_skeleton": FOS_MIN_SKELETON,
            "anchor_min_spacing_mm": ANCHOR_MIN_SPACING_MM,
            "anchor_max_tension_n": ANCHOR_MAX_TENSION_N,
        },
        "cases": rows,
        "pass": worst_gate,
    }
    if anchors is not None:
        anchor_ok = not anchors.spacing_violations and not anchors.overloaded
        report["anchors"] = anchors.as_dict()
        report["anchors"]["pass"] = anchor_ok
        report["pass"] = report["pass"] and anchor_ok
    return report


def compliance_markdown(report: dict) -> str:
    """Human-readable companion to compliance_report."""
    req = report["requirements"]
    lines = [
        "# Structural compliance report",
        "",
        "| Requirement | Protocol |",
        "|---|---|",
        f"| Wind gust design | {req['wind_gust_design_mph']:g} mph "
        f"({req['wind_gust_design_mps']:g} m/s) |",
        f"| Climb load | {req['climb_load_static_lbf']:g} lbs/pt, dynamic "
        f"{req['climb_load_dynamic_lbf']:g} lbs |",
        f"| Factor of safety | > {req['fos_min_base']:g} base, "
        f"> {req['fos_min_skeleton']:g} skeleton |",
        f"| Anchor spacing | >= {req['anchor_min_spacing_mm']:g} mm |",
        f"| Anchor tension | <= {req['anchor_max_tension_n']:g} N |",
        "",
        "| Case | min FOS base | min FOS skeleton | Pass |",
        "|---|---|---|---|",
    ]
    for row in report["cases"]:
        lines.append(
            f"| {row['case']} | {row['min_fos_base']:g} | "
            f"{row['min_fos_skeleton']:g} | {'yes' if row['pass'] else 'NO'} |"
        )
    if "anchors" in report:
        a = report["anchors"]
        lines.append("")
        lines.append(f"Anchors: {len(a['tensions_n'])} positions, "
                     f"{len(a['spacing_violations'])} spacing violations, "
                     f"{len(a['overloaded'])} overloaded "
                     f"({'pass' if a['pass'] else 'FAIL'})")
    lines.append("")
    lines.append(f"Overall: {'PASS' if report['pass'] else 'FAIL'}")
    return "\n".join(lines) + "\n"
