// Display formatting only. Every length shown in the UI arrives from the
// service response; this module never computes one.

export type DisplayUnit = 'mm' | 'in'

const MM_PER_INCH = 25.4

/** Millimetre display with 0.1 mm rounding; inches for fabricators. */
export function formatLength(mm: number, unit: DisplayUnit): string {
  if (unit === 'mm') {
    return `${(Math.round(mm * 10) / 10).toFixed(1)} mm`
  }
  return `${(mm / MM_PER_INCH).toFixed(2)} in`
}

export function toggleUnit(unit: DisplayUnit): DisplayUnit {
  return unit === 'mm' ? 'in' : 'mm'
}
