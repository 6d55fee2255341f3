import * as THREE from 'three'
import { OrbitControls } from 'three/addons/controls/OrbitControls.js'

import { MeshGeometry, boundingBox } from './geometry.js'
import { Ray, surfacePointPosition } from './picking.js'
import { SurfacePoint, Vec3 } from './types.js'

// three.js glue: scene, orbit camera, mesh display, pick markers and the
// measured polyline overlay. All geometry math that feeds the service
// (picking, barycentrics) lives in picking.ts, not here.

export type Viewer = {
  loadMesh: (mesh: MeshGeometry) => void
  clear: () => void
  rayFromScreen: (clientX: number, clientY: number) => Ray | null
  setPickMarkers: (mesh: MeshGeometry | null, points: SurfacePoint[]) => void
  setMeasurePolyline: (points: Vec3[] | null) => void
  resize: () => void
  dispose: () => void
}

export function createViewer(container: HTMLElement): Viewer {
  const renderer = new THREE.WebGLRenderer({ antialias: true })
  renderer.setPixelRatio(Math.min(window.devicePixelRatio, 2))
  renderer.setSize(container.clientWidth, container.clientHeight)
  renderer.setClearColor(0x14171c)
  container.appendChild(renderer.domElement)

  const scene = new THREE.Scene()
  const camera = new THREE.PerspectiveCamera(
    45,
    container.clientWidth / Math.max(1, container.clientHeight),
    0.1,
    1e6
  )
  camera.position.set(400, 300, 400)

  const controls = new OrbitControls(camera, renderer.domElement)
  controls.enableDamping = true
  controls.dampingFactor = 0.1

  scene.add(new THREE.HemisphereLight(0xffffff, 0x334455, 1.0))
  const sun = new THREE.DirectionalLight(0xffffff, 1.2)
  sun.position.set(500, 800, 600)
  scene.add(sun)

  let meshObject: THREE.Object3D | null = null
  let markerGroup = new THREE.Group()
  let polylineObject: THREE.Line | null = null
  scene.add(markerGroup)
  let markerScale = 1

  function animate() {
    controls.update()
    renderer.render(scene, camera)
    requestAnimationFrame(animate)
  }
  animate()

  function removeMesh() {
    if (meshObject) {
      scene.remove(meshObject)
      meshObject = null
    }
  }

  return {
    loadMesh(mesh: MeshGeometry) {
      removeMesh()
      const geometry = new THREE.BufferGeometry()
      geometry.setAttribute(
        'position',
        new THREE.Float32BufferAttribute(Float32Array.from(mesh.vertices), 3)
      )
      geometry.setIndex(new THREE.Uint32BufferAttribute(mesh.faces, 1))
      geometry.computeVertexNormals()
      const material = new THREE.MeshStandardMaterial({
        color: 0xb8a97a,
        metalness: 0.1,
        roughness: 0.75,
        side: THREE.DoubleSide,
      })
      const solid = new THREE.Mesh(geometry, material)
      const wire = new THREE.LineSegments(
        new THREE.WireframeGeometry(geometry),
        new THREE.LineBasicMaterial({ color: 0x3a4250, transparent: true, opacity: 0.35 })
      )
      const group = new THREE.Group()
      group.add(solid)
      group.add(wire)
      scene.add(group)
      meshObject = group

      const { min, max } = boundingBox(mesh)
      const center = new THREE.Vector3(
        (min[0] + max[0]) / 2,
        (min[1] + max[1]) / 2,
        (min[2] + max[2]) / 2
      )
      const span = Math.max(max[0] - min[0], max[1] - min[1], max[2] - min[2], 1)
      markerScale = span / 120
      controls.target.copy(center)
      camera.position.copy(center.clone().add(new THREE.Vector3(span, span * 0.8, span)))
      camera.near = span / 1000
      camera.far = span * 100
      camera.updateProjectionMatrix()
    },

    clear() {
      removeMesh()
      this.setPickMarkers(null, [])
      this.setMeasurePolyline(null)
    },

    rayFromScreen(clientX: number, clientY: number): Ray | null {
      if (!meshObject) return null
      const rect = renderer.domElement.getBoundingClientRect()
      const ndc = new THREE.Vector2(
        ((clientX - rect.left) / rect.width) * 2 - 1,
        -((clientY - rect.top) / rect.height) * 2 + 1
      )
      const caster = new THREE.Raycaster()
      caster.setFromCamera(ndc, camera)
      const o = caster.ray.origin
      const d = caster.ray.direction
      return { origin: [o.x, o.y, o.z], direction: [d.x, d.y, d.z] }
    },

    setPickMarkers(mesh: MeshGeometry | null, points: SurfacePoint[]) {
      scene.remove(markerGroup)
      markerGroup = new THREE.Group()
      if (mesh) {
        for (const point of points) {
          const [x, y, z] = surfacePointPosition(mesh, point)
          const marker = new THREE.Mesh(
            new THREE.SphereGeometry(2.2 * markerScale, 16, 12),
            new THREE.MeshBasicMaterial({ color: 0xff5533 })
          )
          marker.position.set(x, y, z)
          markerGroup.add(marker)
        }
      }
      scene.add(markerGroup)
    },

    setMeasurePolyline(points: Vec3[] | null) {
      if (polylineObject) {
        scene.remove(polylineObject)
        polylineObject = null
      }
      if (!points || points.length < 2) return
      const geometry = new THREE.BufferGeometry().setFromPoints(
        points.map((p) => new THREE.Vector3(p[0], p[1], p[2]))
      )
      polylineObject = new THREE.Line(
        geometry,
        new THREE.LineBasicMaterial({ color: 0x44ddff, linewidth: 2 })
      )
      scene.add(polylineObject)
    },

    resize() {
      camera.aspect = container.clientWidth / Math.max(1, container.clientHeight)
      camera.updateProjectionMatrix()
      renderer.setSize(container.clientWidth, container.clientHeight)
    },

    dispose() {
      renderer.dispose()
      controls.dispose()
    },
  }
}
