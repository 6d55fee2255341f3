import { createServiceClient } from './api.js'
import { meshFromDocument, MeshGeometry } from './geometry.js'
import { formatLength, toggleUnit, DisplayUnit } from './format.js'
import { pickSurfacePoint, surfacePointPosition } from './picking.js'
import { createSession } from './session.js'
import { createViewer } from './viewer.js'

// Single-page wiring: mesh selector, orbit view, click-to-pick measurement.
// Clicks that drag the camera are ignored via a small movement threshold.

const serviceBase = (window as { MESHFAB_SERVICE?: string }).MESHFAB_SERVICE ?? ''
const client = createServiceClient(serviceBase)
const session = createSession(client)

const container = document.getElementById('viewport') as HTMLElement
const meshSelect = document.getElementById('mesh-select') as HTMLSelectElement
const statusEl = document.getElementById('status') as HTMLElement
const lengthEl = document.getElementById('length') as HTMLElement
const lowerEl = document.getElementById('lower-bound') as HTMLElement
const errorEl = document.getElementById('error') as HTMLElement
const unitButton = document.getElementById('unit-toggle') as HTMLButtonElement
const clearButton = document.getElementById('clear-picks') as HTMLButtonElement

const viewer = createViewer(container)
let currentMesh: MeshGeometry | null = null
let unit: DisplayUnit = 'mm'

function render() {
  const s = session.state
  viewer.setPickMarkers(currentMesh, s.picked)
  if (s.measurement) {
    // numbers straight from the service response; only formatted here
    lengthEl.textContent = formatLength(s.measurement.lengthMm, unit)
    lowerEl.textContent = `straight-line ${formatLength(s.measurement.lowerBoundMm, unit)}`
    viewer.setMeasurePolyline(s.measurement.polyline)
  } else {
    lengthEl.textContent = s.pending ? 'measuring…' : '—'
    lowerEl.textContent = ''
    viewer.setMeasurePolyline(
      currentMesh && s.picked.length === 2
        ? s.picked.map((p) => surfacePointPosition(currentMesh!, p))
        : null
    )
  }
  errorEl.textContent = s.error ?? ''
  errorEl.style.display = s.error ? 'block' : 'none'
  statusEl.textContent =
    s.picked.length === 0
      ? 'click the mesh to pick the first point'
      : s.picked.length === 1
        ? 'pick the second point'
        : 'geodesic between the two picks'
}

session.onChange(render)

async function loadCatalog() {
  const listing = await client.listMeshes()
  meshSelect.innerHTML = ''
  for (const entry of listing.meshes) {
    const option = document.createElement('option')
    option.value = entry.id
    option.textContent = `${entry.id} (${entry.face_count} faces)`
    meshSelect.appendChild(option)
  }
  if (listing.meshes.length > 0) {
    await selectMesh(listing.meshes[0].id)
  }
}

async function selectMesh(id: string) {
  const doc = await client.getMesh(id)
  currentMesh = meshFromDocument(doc)
  viewer.loadMesh(currentMesh)
  session.selectMesh(id)
}

meshSelect.addEventListener('change', () => {
  void selectMesh(meshSelect.value)
})

unitButton.addEventListener('click', () => {
  unit = toggleUnit(unit)
  unitButton.textContent = unit === 'mm' ? 'mm' : 'inch'
  render()
})

clearButton.addEventListener('click', () => session.clearPicks())

let downAt: { x: number; y: number } | null = null
container.addEventListener('pointerdown', (ev) => {
  downAt = { x: ev.clientX, y: ev.clientY }
})
container.addEventListener('pointerup', (ev) => {
  if (!downAt || !currentMesh) return
  const moved = Math.abs(ev.clientX - downAt.x) + Math.abs(ev.clientY - downAt.y)
  downAt = null
  if (moved > 6) return // orbit drag, not a pick
  const ray = viewer.rayFromScreen(ev.clientX, ev.clientY)
  if (!ray) return
  const point = pickSurfacePoint(currentMesh, ray)
  if (!point) {
    statusEl.textContent = 'no surface under the cursor'
    return // background click: state unchanged
  }
  session.addPick(point)
  if (session.state.picked.length === 2) {
    void session.measure()
  }
})

window.addEventListener('resize', () => viewer.resize())

loadCatalog().catch((err) => {
  errorEl.textContent = `cannot reach the meshfab service: ${err}`
  errorEl.style.display = 'block'
})
