"""Principal axes and canonical poses.

Sculpture parts arrive in arbitrary world orientations (legs carry both a
roll and a pitch), so projections need a meaningful frame first. This module
computes a PCA frame of the surface, a canonical pose that puts the part at
the origin with its principal axes on x/y/z, and fabricator-friendly Euler
angles.

Axis signs are disambiguated deterministically: each axis is flipped so the
skew (normalized third moment) of the samples along it is non-negative; ties
fall back to making the largest-magnitude component positive. The last axis
may then be flipped once more to keep the frame right-handed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry
from .mesh_io import Mesh

_SKEW_TIE = 1e-12
_EIGENVALUE_GAP = 1e-6  # relative gap under which axes are treated as degenerate


@dataclass(frozen=True)
class Pose:
    """Rigid transform (plus optional uniform scale) mapping local to world."""

    rotation: np.ndarray              # (3, 3) right-handed orthonormal
    translation: np.ndarray           # (3,) mm
    scale: float = 1.0

    def __post_init__(self):
        r = np.ascontiguousarray(np.asarray(self.rotation, dtype=np.float64))
        t = np.ascontiguousarray(np.asarray(self.translation, dtype=np.float64).reshape(3))
        if r.shape != (3, 3):
            raise ValueError("rotation must be 3x3")
        if np.abs(r.T @ r - np.eye(3)).max() > 1e-9:
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise ValueError("rotation must have determinant +1")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(rotation=np.eye(3), translation=np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return self.scale * (pts @ self.rotation.T) + self.translation

    def compose(self, inner: "Pose") -> "Pose":
        """self ∘ inner: apply ``inner`` first, then ``self``."""
        return Pose(
            rotation=self.rotation @ inner.rotation,
            translation=self.scale * (self.rotation @ inner.translation) + self.translation,
            scale=self.scale * inner.scale,
        )

    def inverse(self) -> "Pose":
        rt = self.rotation.T
        return Pose(rotation=rt, translation=-(rt @ self.translation) / self.scale,
                    scale=1.0 / self.scale)

    def as_dict(self) -> dict:
        return {
            "rotation": self.rotation.tolist(),
            "translation": self.translation.tolist(),
            "scale": self.scale,
        }


@dataclass(frozen=True)
class PrincipalFrame:
    centroid: np.ndarray       # (3,) mm
    axes: np.ndarray           # (3, 3), rows ordered by descending variance
    variances: np.ndarray      # (3,) mm^2, descending
    degenerate_axes: bool = False  # near-equal variances; axes picked by convention

    def as_dict(self) -> dict:
        return {
            "centroid": self.centroid.tolist(),
            "axes": self.axes.tolist(),
            "variances": self.variances.tolist(),
            "degenerate_axes": self.degenerate_axes,
        }


def principal_frame(m: Mesh, weighting: str = "vertex") -> PrincipalFrame:
    """Weighted PCA frame of the mesh surface.

    ``vertex`` weighting treats each vertex as one sample. ``area``
    weighting integrates over the surface itself (exact per-triangle second
    moments), which is robust against the wildly non-uniform vertex density
    of photogrammetry meshes and against triangulation choices.

    Raises DegenerateGeometry when the samples have rank < 2 (collinear).
    """
    if weighting == "vertex":
        points, weights = m.vertices, np.ones(m.vertex_count)
        total = weights.sum()
        if total <= 0 or len(points) < 3:
            raise DegenerateGeometry("not enough samples for a frame", rank=0)
        centroid = (points * weights[:, None]).sum(axis=0) / total
        centered = points - centroid
        cov = (centered * weights[:, None]).T @ centered / total
    elif weighting == "area":
        tri = m.triangle_points()
        areas = m.face_areas()
        total = areas.sum()
        if total <= 0:
            raise DegenerateGeometry("zero surface area", rank=0)
        centroids = tri.mean(axis=1)
        centroid = (centroids * areas[:, None]).sum(axis=0) / total
        # covariance of a uniform triangle about its own centroid is
        # (1/12) sum_i (v_i - g)(v_i - g)^T; shift each to the global centroid
        d = tri - centroids[:, None, :]
        within = np.einsum("fiv,fiw->fvw", d, d) / 12.0
        shift = centroids - centroid
        between = np.einsum("fv,fw->fvw", shift, shift)
        cov = np.einsum("f,fvw->vw", areas, within + between) / total
        # sign disambiguation below samples triangle centroids, area-weighted
        weights, centered = areas, shift
    else:
        raise ValueError(f"unknown weighting {weighting!r}")

    eigvals, eigvecs = np.linalg.eigh(cov)       # ascending
    order = np.argsort(eigvals)[::-1]
    variances = np.maximum(eigvals[order], 0.0)
    axes = eigvecs[:, order].T                   # rows = axes

    scale = variances[0]
    if scale <= 0:
        raise DegenerateGeometry("all samples coincide", rank=0)
    rank = int(np.sum(variances > 1e-9 * scale))
    if rank < 2:
        raise DegenerateGeometry(f"sample rank {rank} < 2 (collinear points)", rank=rank)

    axes, degenerate = _stabilize_degenerate_axes(axes, variances)
    axes = _fix_axis_signs(axes, centered, weights)
    return PrincipalFrame(centroid=centroid, axes=axes, variances=variances,
                          degenerate_axes=degenerate)


def _stabilize_degenerate_axes(axes: np.ndarray, variances: np.ndarray) -> tuple:
    """Re-pick axes inside near-equal eigenvalue subspaces.

    Within a degenerate subspace any orthonormal basis is an eigenbasis, so
    numerical noise would otherwise pick an arbitrary, run-dependent one.
    Gram-Schmidt of the world axes projected into the subspace is stable.
    """
    top = max(variances[0], 1e-300)
    groups = []
    start = 0
    for i in range(1, 3):
        if (variances[i - 1] - variances[i]) / top >= _EIGENVALUE_GAP:
            groups.append(range(start, i))
            start = i
    groups.append(range(start, 3))

    degenerate = any(len(g) > 1 for g in groups)
    if not degenerate:
        return axes, False

    world = np.eye(3)
    new_axes = axes.copy()
    for g in groups:
        if len(g) == 1:
            continue
        basis = axes[list(g)]                    # (k, 3) spanning the subspace
        projector = basis.T @ basis
        chosen = []
        for w in world:
            cand = projector @ w
            for c in chosen:
                cand = cand - (cand @ c) * c
            norm = np.linalg.norm(cand)
            if norm > 1e-9:
                chosen.append(cand / norm)
            if len(chosen) == len(g):
                break
        for row, axis in zip(g, chosen):
            new_axes[row] = axis
    return new_axes, True


def _fix_axis_signs(axes: np.ndarray, centered: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Deterministic sign choice per axis, then enforce right-handedness."""
    total = weights.sum()
    confidence = np.zeros(3)
    fixed = axes.copy()
    for i in range(3):
        coords = centered @ fixed[i]
        m2 = float((weights * coords**2).sum() / total)
        m3 = float((weights * coords**3).sum() / total)
        skew = m3 / (m2**1.5 + 1e-300)
        if abs(skew) > _SKEW_TIE:
            if skew < 0:
                fixed[i] = -fixed[i]
            confidence[i] = abs(skew)
        else:
            j = int(np.argmax(np.abs(fixed[i])))
            if fixed[i][j] < 0:
                fixed[i] = -fixed[i]
            confidence[i] = 0.0
    if np.linalg.det(fixed) < 0:
        # flip the axis whose sign decision was weakest
        fixed[int(np.argmin(confidence))] *= -1.0
    return fixed


def canonicalize(m: Mesh, frame: PrincipalFrame) -> tuple[Mesh, Pose]:
    """Move the mesh to its canonical pose (centroid at origin, axes on xyz).

    Returns the canonical mesh and the Pose that maps canonical coordinates
    back to the original world coordinates.
    """
    canonical = (m.vertices - frame.centroid) @ frame.axes.T
    pose = Pose(rotation=frame.axes.T, translation=frame.centroid.copy())
    return m.transformed(canonical), pose


@dataclass(frozen=True)
class EulerAngles:
    """Roll-pitch-yaw about world x, y, z, in degrees."""

    roll: float
    pitch: float
    yaw: float
    gimbal_lock: bool = False

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.roll, self.pitch, self.yaw)


def euler_angles(p: Pose) -> EulerAngles:
    """Decompose p.rotation as Rz(yaw) @ Ry(pitch) @ Rx(roll).

    At gimbal lock (|pitch| = 90 deg) yaw is set to 0 by convention and the
    flag is raised; the angles still reconstruct the rotation.
    """
    r = p.rotation
    sin_pitch = float(-r[2, 0])
    sin_pitch = min(1.0, max(-1.0, sin_pitch))
    pitch = math.asin(sin_pitch)
    locked = abs(abs(sin_pitch) - 1.0) < 1e-6
    if locked:
        yaw = 0.0
        # with yaw pinned to 0: R[0,1] = ±sin(roll), R[1,1] = cos(roll)
        if sin_pitch > 0:
            roll = math.atan2(r[0, 1], r[1, 1])
        else:
            roll = math.atan2(-r[0, 1], r[1, 1])
    else:
        roll = math.atan2(r[2, 1], r[2, 2])
        yaw = math.atan2(r[1, 0], r[0, 0])
    return EulerAngles(
        roll=math.degrees(roll),
        pitch=math.degrees(pitch),
        yaw=math.degrees(yaw),
        gimbal_lock=locked,
    )


def rotation_from_euler(roll_deg: float, pitch_deg: float, yaw_deg: float) -> np.ndarray:
    """Rz(yaw) @ Ry(pitch) @ Rx(roll), angles in degrees."""
    rx, ry, rz = (math.radians(a) for a in (roll_deg, pitch_deg, yaw_deg))
    cr, sr = math.cos(rx), math.sin(rx)
    cp, sp = math.cos(ry), math.sin(ry)
    cy, sy = math.cos(rz), math.sin(rz)
    mx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    my = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    mz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return mz @ my @ mx
