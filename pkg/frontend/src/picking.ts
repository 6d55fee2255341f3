import { MeshGeometry, faceCorners } from './geometry.js'
import { SurfacePoint, Vec3 } from './types.js'

// Ray-triangle picking (Moller-Trumbore) over the raw mesh arrays. The hit
// is returned as face index + barycentric coordinates in the exact
// convention the service expects: position = b0*v0 + b1*v1 + b2*v2.

export type Ray = { origin: Vec3; direction: Vec3 }

const EPS = 1e-12

function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ]
}

function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

type Hit = { face: number; t: number; u: number; v: number }

function intersectTriangle(ray: Ray, corners: [Vec3, Vec3, Vec3], face: number): Hit | null {
  const [v0, v1, v2] = corners
  const e1 = sub(v1, v0)
  const e2 = sub(v2, v0)
  const p = cross(ray.direction, e2)
  const det = dot(e1, p)
  if (Math.abs(det) < EPS) return null // ray parallel to the triangle
  const inv = 1 / det
  const s = sub(ray.origin, v0)
  const u = dot(s, p) * inv
  if (u < -1e-9 || u > 1 + 1e-9) return null
  const q = cross(s, e1)
  const v = dot(ray.direction, q) * inv
  if (v < -1e-9 || u + v > 1 + 1e-9) return null
  const t = dot(e2, q) * inv
  if (t <= EPS) return null // behind the camera
  return { face, t, u, v }
}

/** Nearest front-facing-or-back-facing hit along the ray, or null. */
export function pickSurfacePoint(mesh: MeshGeometry, ray: Ray): SurfacePoint | null {
  let best: Hit | null = null
  for (let f = 0; f < mesh.faceCount; f++) {
    const hit = intersectTriangle(ray, faceCorners(mesh, f), f)
    if (hit && (best === null || hit.t < best.t)) best = hit
  }
  if (best === null) return null
  // clamp tiny negatives from the intersection tolerance, then renormalize
  let b0 = Math.max(0, 1 - best.u - best.v)
  let b1 = Math.max(0, best.u)
  let b2 = Math.max(0, best.v)
  const total = b0 + b1 + b2
  b0 /= total
  b1 /= total
  b2 /= total
  return { face: best.face, bary: [b0, b1, b2] }
}

/** World position of a surface point, for overlay rendering. */
export function surfacePointPosition(mesh: MeshGeometry, point: SurfacePoint): Vec3 {
  const [v0, v1, v2] = faceCorners(mesh, point.face)
  const [b0, b1, b2] = point.bary
  return [
    b0 * v0[0] + b1 * v1[0] + b2 * v2[0],
    b0 * v0[1] + b1 * v1[1] + b2 * v2[1],
    b0 * v0[2] + b1 * v1[2] + b2 * v2[2],
  ]
}
