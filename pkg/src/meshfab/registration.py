"""Rigid scan-to-design registration and deviation reporting.

Photogrammetry scans come back scale-free, so scale is recovered first from
reference pairs (tape-measured distances on the physical part), never
inside ICP: joint scale+pose estimation is ill-conditioned on partial
scans. The ICP itself is point-to-plane over area-stratified scan samples
against the design surface, with a monotone rmse trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoCorrespondences, NoPairs, ZeroMeasuredDistance
from .mesh_io import Mesh
from .orientation import Pose, principal_frame
from .surface import MeshSurfaceIndex

DEFAULT_SAMPLE_CAP = 5000
CONVERGENCE_IMPROVEMENT_MM = 1e-4
DEFAULT_INLIER_MM = 25.0
DEFAULT_DEVIATION_THRESHOLD_MM = 5.0

# R2 low-discrepancy sequence constants (plastic number)
_R2_G = 1.32471795724474602596
_R2_A1 = 1.0 / _R2_G
_R2_A2 = 1.0 / (_R2_G * _R2_G)


@dataclass(frozen=True)
class ScaleEstimate:
    scale: float          # mm per scan unit
    residual_mm: float    # rms mismatch of the pair distances after scaling
    pair_count: int

    def as_dict(self) -> dict:
        return {"scale": self.scale, "residual_mm": self.residual_mm,
                "pair_count": self.pair_count}


def estimate_scale(pairs) -> ScaleEstimate:
    """Least-squares uniform scale from ((p0, p1), true_distance_mm) pairs."""
    if not pairs:
        raise NoPairs("at least one reference pair is required")
    measured = []
    true = []
    for (p0, p1), true_mm in pairs:
        d = float(np.linalg.norm(np.asarray(p1, float) - np.asarray(p0, float)))
        if d <= 0:
            raise ZeroMeasuredDistance("reference pair has zero measured distance")
        measured.append(d)
        true.append(float(true_mm))
    measured = np.asarray(measured)
    true = np.asarray(true)
    scale = float((true * measured).sum() / (measured * measured).sum())
    residual = float(np.sqrt(np.mean((true - scale * measured) ** 2)))
    return ScaleEstimate(scale=scale, residual_mm=residual, pair_count=len(measured))


@dataclass(frozen=True)
class RegistrationResult:
    pose: Pose                 # maps scan coordinates into the design frame
    rmse: float                # mm, point-to-plane
    inlier_fraction: float
    iterations: int
    converged: bool
    rmse_trace: tuple = ()

    def as_dict(self) -> dict:
        return {
            "pose": self.pose.as_dict(),
            "rmse_mm": self.rmse,
            "inlier_fraction": self.inlier_fraction,
            "iterations": self.iterations,
            "converged": self.converged,
            "rmse_trace_mm": list(self.rmse_trace),
        }


def surface_samples(mesh: Mesh, count: int) -> np.ndarray:
    """Deterministic area-stratified surface samples.

    Triangles are picked by systematic sampling of the cumulative area;
    within each pick the barycentric location follows the R2 low-discrepancy
    sequence. No RNG: identical input gives identical samples.
    """
    areas = mesh.face_areas()
    total = areas.sum()
    if total <= 0:
        return mesh.vertices[:count].copy()
    cum = np.cumsum(areas)
    targets = (np.arange(count) + 0.5) * (total / count)
    tri_idx = np.searchsorted(cum, targets)
    tri_idx = np.clip(tri_idx, 0, mesh.face_count - 1)
    k = np.arange(count)
    u = np.mod(0.5 + _R2_A1 * k, 1.0)
    v = np.mod(0.5 + _R2_A2 * k, 1.0)
    flip = u + v > 1.0
    u[flip] = 1.0 - u[flip]
    v[flip] = 1.0 - v[flip]
    tri = mesh.triangle_points()[tri_idx]
    return (tri[:, 0]
            + u[:, None] * (tri[:, 1] - tri[:, 0])
            + v[:, None] * (tri[:, 2] - tri[:, 0]))


def _rodrigues(omega: np.ndarray) -> np.ndarray:
    theta = float(np.linalg.norm(omega))
    if theta < 1e-15:
        return np.eye(3)
    k = omega / theta
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(theta) * kx + (1.0 - math.cos(theta)) * (kx @ kx)


def register_icp(scan: Mesh, design: Mesh, initial: Pose | None = None,
                 max_iterations: int = 50,
                 inlier_distance: float = DEFAULT_INLIER_MM,
                 sample_count: int | None = None) -> RegistrationResult:
    """Point-to-plane ICP aligning ``scan`` onto ``design``.

    With no initial pose, principal frames of both meshes seed the search
    (all four sign combinations, best final rmse wins). Raises
    NoCorrespondences when no scan sample lies within ``inlier_distance`` of
    the design surface at the initial pose.
    """
    if initial is None:
        seeds = _principal_frame_seeds(scan, design)
        best = None
        for seed in seeds:
            try:
                result = register_icp(scan, design, initial=seed,
                                      max_iterations=max_iterations,
                                      inlier_distance=inlier_distance,
                                      sample_count=sample_count)
            except NoCorrespondences:
                continue
            if best is None or result.rmse < best.rmse:
                best = result
        if best is None:
            raise NoCorrespondences(
                "no principal-frame seed produced correspondences within "
                f"{inlier_distance} mm"
            )
        return best

    count = sample_count or min(DEFAULT_SAMPLE_CAP, scan.vertex_count)
    samples = surface_samples(scan, count)
    index = MeshSurfaceIndex(design)

    pose = initial
    prev_pose = pose
    prev_rmse = None
    trace: list[float] = []
    converged = False
    for iteration in range(max_iterations):
        moved = pose.apply(samples)
        closest, dist, faces = index.query(moved)
        inliers = dist <= inlier_distance
        if not inliers.any():
            if iteration == 0:
                raise NoCorrespondences(
                    f"no scan sample within {inlier_distance} mm of the design "
                    "at the initial pose; seed via principal-frame pre-alignment"
                )
            pose = prev_pose  # pragma: no cover - lost track mid-run
            break
        normals = index.normals[faces]
        residuals = ((moved - closest) * normals).sum(axis=1)
        rmse = float(np.sqrt(np.mean(residuals[inliers] ** 2)))
        if prev_rmse is not None and rmse > prev_rmse:
            pose = prev_pose  # linearization overshot; keep the better pose
            converged = True
            break
        trace.append(rmse)
        if prev_rmse is not None and prev_rmse - rmse < CONVERGENCE_IMPROVEMENT_MM:
            converged = True
            break
        # linearized point-to-plane update: rows [ (p x n)^T  n^T ] dx = -r
        p = moved[inliers]
        n = normals[inliers]
        a = np.hstack([np.cross(p, n), n])
        b = -residuals[inliers]
        dx, *_ = np.linalg.lstsq(a, b, rcond=None)
        d_rot = _rodrigues(dx[:3])
        prev_pose = pose
        prev_rmse = rmse
        pose = Pose(
            rotation=d_rot @ pose.rotation,
            translation=d_rot @ pose.translation + dx[3:],
            scale=pose.scale,
        )

    final_moved = pose.apply(samples)
    _, final_dist, _ = index.query(final_moved)
    inlier_fraction = float(np.mean(final_dist <= inlier_distance))
    return RegistrationResult(
        pose=pose,
        rmse=trace[-1] if trace else float("nan"),
        inlier_fraction=inlier_fraction,
        iterations=len(trace),
        converged=converged,
        rmse_trace=tuple(trace),
    )


def _principal_frame_seeds(scan: Mesh, design: Mesh) -> list[Pose]:
    fs = principal_frame(scan, "area")
    fd = principal_frame(design, "area")
    seeds = []
    for flips in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
        rot = fd.axes.T @ np.diag(flips).astype(float) @ fs.axes
        seeds.append(Pose(rotation=rot,
                          translation=fd.centroid - rot @ fs.centroid))
    return seeds


@dataclass(frozen=True)
class DeviationReport:
    distances: np.ndarray        # signed mm per sample (+ = outside the surface)
    mean: float
    max: float                   # max |distance|
    p95: float                   # 95th percentile of |distance|
    threshold: float
    threshold_exceeded: tuple    # sample indices, worst first

    def as_dict(self) -> dict:
        return {
            "summary": {"mean_mm": self.mean, "max_mm": self.max, "p95_mm": self.p95},
            "threshold_mm": self.threshold,
            "threshold_exceeded": list(self.threshold_exceeded),
            "sample_count": int(len(self.distances)),
        }


def deviation_report(scan: Mesh, design: Mesh, pose: Pose,
                     sample_count: int = 2000,
                     threshold: float = DEFAULT_DEVIATION_THRESHOLD_MM) -> DeviationReport:
    """Signed distances from posed scan samples to the design surface."""
    samples = surface_samples(scan, sample_count)
    moved = pose.apply(samples)
    index = MeshSurfaceIndex(design)
    signed, _, _ = index.signed_distances(moved)
    magnitude = np.abs(signed)
    exceeded = [int(i) for i in np.argsort(-magnitude) if magnitude[i] > threshold]
    return DeviationReport(
        distances=signed,
        mean=float(signed.mean()),
        max=float(magnitude.max()),
        p95=float(np.percentile(magnitude, 95.0)),
        threshold=threshold,
        threshold_exceeded=tuple(exceeded),
    )
