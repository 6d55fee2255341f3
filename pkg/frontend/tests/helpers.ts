import { FetchLike } from '../src/api.js'
import { MeshGeometry } from '../src/geometry.js'

/** 100 x 100 mm flat plate at z=0: two triangles, corners CCW. */
export function flatPlate(): MeshGeometry {
  const vertices = new Float64Array([
    0, 0, 0,
    100, 0, 0,
    100, 100, 0,
    0, 100, 0,
  ])
  const faces = new Uint32Array([0, 1, 2, 0, 2, 3])
  return { name: 'plate', vertices, faces, vertexCount: 4, faceCount: 2 }
}

type Route = (body: unknown) => { status?: number; json: unknown }

/** Tiny fetch stub: path -> handler of the parsed request body. */
export function mockFetch(routes: Record<string, Route>): FetchLike {
  return async (url: string, init?: RequestInit) => {
    const path = url.replace(/^https?:\/\/[^/]+/, '')
    const handler = routes[path]
    if (!handler) {
      return new Response(JSON.stringify({ code: 'NotFound', message: path }), {
        status: 404,
        headers: { 'Content-Type': 'application/json' },
      })
    }
    const body = init?.body ? JSON.parse(init.body as string) : undefined
    const result = handler(body)
    return new Response(JSON.stringify(result.json), {
      status: result.status ?? 200,
      headers: { 'Content-Type': 'application/json' },
    })
  }
}
