import { ServiceClient, ServiceError } from './api.js'
import { GeodesicResponse, SurfacePoint } from './types.js'

// Viewer session state machine. Rules, enforced here and tested headless:
//   - at most 2 picked points; a third pick replaces the oldest (FIFO)
//   - a measurement is shown only when 2 points are picked and the service
//     has replied; the displayed numbers are the service's, verbatim
//   - at most one in-flight request; stale replies are discarded by
//     sequence number
//   - a service error keeps the picks and surfaces the message

export type Measurement = {
  lengthMm: number
  lowerBoundMm: number
  polyline: [number, number, number][]
}

export type SessionState = {
  meshId: string | null
  picked: SurfacePoint[]
  measurement: Measurement | null
  error: string | null
  pending: boolean
}

export type Session = {
  readonly state: SessionState
  selectMesh: (id: string) => void
  addPick: (point: SurfacePoint) => void
  clearPicks: () => void
  /** POST /v1/geodesic when two points are picked; resolves when settled. */
  measure: () => Promise<void>
  onChange: (listener: (state: SessionState) => void) => void
}

function fromResponse(response: GeodesicResponse): Measurement {
  return {
    lengthMm: response.length_mm,
    lowerBoundMm: response.lower_bound_mm,
    polyline: response.polyline,
  }
}

export function createSession(client: ServiceClient): Session {
  const state: SessionState = {
    meshId: null,
    picked: [],
    measurement: null,
    error: null,
    pending: false,
  }
  let sequence = 0
  const listeners: ((s: SessionState) => void)[] = []

  function notify() {
    for (const listener of listeners) listener(state)
  }

  return {
    state,

    selectMesh(id: string) {
      state.meshId = id
      state.picked = []
      state.measurement = null
      state.error = null
      sequence++ // any in-flight reply for the old mesh is now stale
      notify()
    },

    addPick(point: SurfacePoint) {
      if (state.picked.length < 2) {
        state.picked = [...state.picked, point]
      } else {
        state.picked = [state.picked[1], point] // drop the oldest pick
      }
      state.measurement = null
      state.error = null
      notify()
    },

    clearPicks() {
      state.picked = []
      state.measurement = null
      state.error = null
      sequence++
      notify()
    },

    async measure() {
      if (state.meshId === null || state.picked.length !== 2) return
      const requestSeq = ++sequence
      state.pending = true
      state.error = null
      notify()
      try {
        const response = await client.measureGeodesic(
          state.meshId,
          state.picked[0],
          state.picked[1]
        )
        if (requestSeq !== sequence) return // superseded; drop the reply
        state.measurement = fromResponse(response)
      } catch (err) {
        if (requestSeq !== sequence) return
        state.measurement = null
        state.error =
          err instanceof ServiceError
            ? `${err.code}: ${err.message}`
            : 'service unreachable'
        // picks are retained so the user can retry or re-pick one point
      } finally {
        if (requestSeq === sequence) {
          state.pending = false
          notify()
        }
      }
    },

    onChange(listener) {
      listeners.push(listener)
    },
  }
}
