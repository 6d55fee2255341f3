import {
  GeodesicResponse,
  MeshDocument,
  MeshList,
  SurfacePoint,
  geodesicResponseSchema,
  meshDocumentSchema,
  meshListSchema,
  serviceErrorSchema,
} from './types.js'

// Thin typed client for the read-only service. The viewer never mutates
// server state: GET for catalog/meshes, POST only for measurement queries.

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>

export class ServiceError extends Error {
  readonly code: string
  readonly status: number

  constructor(code: string, message: string, status: number) {
    super(message)
    this.code = code
    this.status = status
  }
}

async function raiseServiceError(response: Response): Promise<never> {
  let code = `HTTP${response.status}`
  let message = response.statusText
  try {
    const parsed = serviceErrorSchema.safeParse(await response.json())
    if (parsed.success) {
      code = parsed.data.code
      message = parsed.data.message
    }
  } catch {
    // non-JSON error body: keep the HTTP status text
  }
  throw new ServiceError(code, message, response.status)
}

export type ServiceClient = {
  listMeshes: () => Promise<MeshList>
  getMesh: (id: string) => Promise<MeshDocument>
  measureGeodesic: (id: string, a: SurfacePoint, b: SurfacePoint) => Promise<GeodesicResponse>
}

export function createServiceClient(
  baseUrl: string,
  fetchImpl: FetchLike = (url, init) => fetch(url, init)
): ServiceClient {
  const base = baseUrl.replace(/\/$/, '')

  async function getJson(path: string): Promise<unknown> {
    const response = await fetchImpl(`${base}${path}`)
    if (!response.ok) await raiseServiceError(response)
    return response.json()
  }

  return {
    async listMeshes() {
      return meshListSchema.parse(await getJson('/v1/meshes'))
    },

    async getMesh(id: string) {
      return meshDocumentSchema.parse(await getJson(`/v1/mesh/${encodeURIComponent(id)}`))
    },

    async measureGeodesic(id: string, a: SurfacePoint, b: SurfacePoint) {
      const response = await fetchImpl(`${base}/v1/geodesic`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ id, a, b }),
      })
      if (!response.ok) await raiseServiceError(response)
      // all displayed lengths come from this response; the viewer does no
      // geodesic math of its own
      return geodesicResponseSchema.parse(await response.json())
    },
  }
}
