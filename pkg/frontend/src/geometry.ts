import { MeshDocument, Vec3 } from './types.js'

// In-memory mesh: flat typed arrays in millimetres (unit_scale applied once,
// matching the toolkit's parse behavior).

export type MeshGeometry = {
  name: string
  vertices: Float64Array // 3 * vertexCount, mm
  faces: Uint32Array // 3 * faceCount
  vertexCount: number
  faceCount: number
}

export function meshFromDocument(doc: MeshDocument): MeshGeometry {
  if (doc.vertices.length % 3 !== 0 || doc.faces.length % 3 !== 0) {
    throw new Error('vertex/face arrays must have length divisible by 3')
  }
  const vertices = new Float64Array(doc.vertices.length)
  for (let i = 0; i < doc.vertices.length; i++) {
    vertices[i] = doc.vertices[i] * doc.unit_scale
  }
  const faces = new Uint32Array(doc.faces)
  const vertexCount = vertices.length / 3
  for (const idx of faces) {
    if (idx >= vertexCount) throw new Error(`face index ${idx} out of range`)
  }
  return {
    name: doc.name,
    vertices,
    faces,
    vertexCount,
    faceCount: faces.length / 3,
  }
}

export function vertexAt(mesh: MeshGeometry, index: number): Vec3 {
  return [
    mesh.vertices[3 * index],
    mesh.vertices[3 * index + 1],
    mesh.vertices[3 * index + 2],
  ]
}

export function faceCorners(mesh: MeshGeometry, face: number): [Vec3, Vec3, Vec3] {
  return [
    vertexAt(mesh, mesh.faces[3 * face]),
    vertexAt(mesh, mesh.faces[3 * face + 1]),
    vertexAt(mesh, mesh.faces[3 * face + 2]),
  ]
}

export function boundingBox(mesh: MeshGeometry): { min: Vec3; max: Vec3 } {
  const min: Vec3 = [Infinity, Infinity, Infinity]
  const max: Vec3 = [-Infinity, -Infinity, -Infinity]
  for (let i = 0; i < mesh.vertexCount; i++) {
    for (let k = 0; k < 3; k++) {
      const v = mesh.vertices[3 * i + k]
      if (v < min[k]) min[k] = v
      if (v > max[k]) max[k] = v
    }
  }
  return { min, max }
}
