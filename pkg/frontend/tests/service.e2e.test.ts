import { spawn, spawnSync, ChildProcess } from 'node:child_process'
import { mkdtempSync, writeFileSync } from 'node:fs'
import { tmpdir } from 'node:os'
import { join } from 'node:path'

import { afterAll, beforeAll, describe, expect, it } from 'vitest'

import { createServiceClient } from '../src/api.js'
import { meshFromDocument } from '../src/geometry.js'
import { pickSurfacePoint } from '../src/picking.js'
import { createSession } from '../src/session.js'

// End-to-end against the real service: spawn `meshfab serve` on a flat
// plate, pick two points with the raycaster, measure through the session
// and check the displayed value is the service's. Skipped when the Python
// toolkit is not installed on this machine.

const PORT = 8799
const BASE = `http://127.0.0.1:${PORT}`

const PLATE_OBJ = `o plate
v 0 0 0
v 100 0 0
v 100 100 0
v 0 100 0
f 1 2 3
f 1 3 4
`

function pythonAvailable(): boolean {
  const probe = spawnSync('python3', ['-c', 'import meshfab'], { timeout: 20000 })
  return probe.status === 0
}

const available = pythonAvailable()
const suite = available ? describe : describe.skip

suite('live service round-trip', () => {
  let server: ChildProcess

  beforeAll(async () => {
    const dir = mkdtempSync(join(tmpdir(), 'meshfab-viewer-'))
    writeFileSync(join(dir, 'plate.obj'), PLATE_OBJ)
    server = spawn('python3', [
      '-m', 'meshfab.cli', 'serve', dir, '--host', '127.0.0.1', '--port', String(PORT),
    ])
    const deadline = Date.now() + 30000
    while (Date.now() < deadline) {
      try {
        const r = await fetch(`${BASE}/v1/health`)
        if (r.ok) return
      } catch {
        // not up yet
      }
      await new Promise((resolve) => setTimeout(resolve, 250))
    }
    throw new Error('service did not come up')
  }, 40000)

  afterAll(() => {
    server?.kill()
  })

  it('flat-plate pick-pick-measure displays the service geodesic', async () => {
    const client = createServiceClient(BASE)
    const listing = await client.listMeshes()
    expect(listing.meshes.map((m) => m.id)).toContain('plate')

    const mesh = meshFromDocument(await client.getMesh('plate'))
    const a = pickSurfacePoint(mesh, { origin: [10, 10, 50], direction: [0, 0, -1] })
    const b = pickSurfacePoint(mesh, { origin: [90, 70, 50], direction: [0, 0, -1] })
    expect(a).not.toBeNull()
    expect(b).not.toBeNull()

    const session = createSession(client)
    session.selectMesh('plate')
    session.addPick(a!)
    session.addPick(b!)
    await session.measure()

    const m = session.state.measurement
    expect(m).not.toBeNull()
    // on a flat plate the surface path is the straight segment, and the
    // session must display exactly what the service computed
    const direct = await client.measureGeodesic('plate', a!, b!)
    expect(m!.lengthMm).toBe(direct.length_mm)
    expect(Math.abs(m!.lengthMm - m!.lowerBoundMm)).toBeLessThanOrEqual(1e-9)
  }, 30000)

  it('split endpoints surface the 422 error code', async () => {
    const client = createServiceClient(BASE)
    const session = createSession(client)
    session.selectMesh('plate')
    session.addPick({ face: 0, bary: [2, -0.5, -0.5] }) // invalid barycentrics
    session.addPick({ face: 1, bary: [1, 0, 0] })
    await session.measure()
    expect(session.state.error).not.toBeNull()
    expect(session.state.measurement).toBeNull()
  })
})
