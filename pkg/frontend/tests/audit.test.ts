import { readFileSync } from 'node:fs'
import { dirname, join } from 'node:path'
import { fileURLToPath } from 'node:url'

import { describe, expect, it } from 'vitest'

// Code-audit criterion: displayed lengths come from service responses only.
// The measurement/display path (session, format, api, main) must contain no
// distance computation; geometric math is confined to picking.ts (point
// selection) and viewer.ts (rendering), which never produce displayed
// lengths.

const src = join(dirname(fileURLToPath(import.meta.url)), '..', 'src')

const DISPLAY_PATH_FILES = ['session.ts', 'format.ts', 'api.ts', 'main.ts']
const LENGTH_MATH = [/Math\.sqrt/, /Math\.hypot/, /Math\.pow/, /\*\*\s*2/, /distanceTo/]

describe('no client-side length computation', () => {
  for (const file of DISPLAY_PATH_FILES) {
    it(`${file} contains no distance math`, () => {
      const text = readFileSync(join(src, file), 'utf-8')
      for (const pattern of LENGTH_MATH) {
        expect(text).not.toMatch(pattern)
      }
    })
  }

  it('session stores the service response fields verbatim', () => {
    const text = readFileSync(join(src, 'session.ts'), 'utf-8')
    expect(text).toMatch(/lengthMm:\s*response\.length_mm/)
    expect(text).toMatch(/lowerBoundMm:\s*response\.lower_bound_mm/)
  })

  it('main displays session measurement values only', () => {
    const text = readFileSync(join(src, 'main.ts'), 'utf-8')
    expect(text).toMatch(/formatLength\(s\.measurement\.lengthMm,\s*unit\)/)
    expect(text).toMatch(/formatLength\(s\.measurement\.lowerBoundMm,\s*unit\)/)
  })
})
