import { z } from 'zod'

// Schemas mirror the service's /v1 wire formats exactly. All lengths are
// millimetres; barycentric coordinates must sum to 1 within 1e-9 to be
// accepted on either side of the wire.

export const surfacePointSchema = z
  .object({
    face: z.number().int().nonnegative(),
    bary: z.tuple([z.number(), z.number(), z.number()]),
  })
  .refine((p) => Math.abs(p.bary[0] + p.bary[1] + p.bary[2] - 1) <= 1e-9, {
    message: 'barycentric coordinates must sum to 1',
  })
  .refine((p) => p.bary.every((b) => b >= -1e-12), {
    message: 'barycentric coordinates must be non-negative',
  })

export type SurfacePoint = z.infer<typeof surfacePointSchema>

export const geodesicResponseSchema = z.object({
  length_mm: z.number().nonnegative(),
  lower_bound_mm: z.number().nonnegative(),
  polyline: z.array(z.tuple([z.number(), z.number(), z.number()])),
})

export type GeodesicResponse = z.infer<typeof geodesicResponseSchema>

export const meshDocumentSchema = z.object({
  name: z.string(),
  unit_scale: z.number().positive(),
  vertices: z.array(z.number()),
  faces: z.array(z.number().int().nonnegative()),
})

export type MeshDocument = z.infer<typeof meshDocumentSchema>

export const meshListSchema = z.object({
  meshes: z.array(
    z.object({
      id: z.string(),
      vertex_count: z.number().int(),
      face_count: z.number().int(),
      bbox_min_mm: z.array(z.number()).length(3),
      bbox_max_mm: z.array(z.number()).length(3),
      surface_area_mm2: z.number(),
      is_closed: z.boolean(),
      connected_components: z.number().int(),
    })
  ),
})

export type MeshList = z.infer<typeof meshListSchema>

export const serviceErrorSchema = z.object({
  code: z.string(),
  message: z.string(),
})

export type Vec3 = [number, number, number]
