/**
 * Feature interchange formats shared with the classifier.
 *
 * Binary (magic `GCFV`): version byte 0x01, u32 LE n_rows, u32 LE n_cols,
 * u8 has_labels, then n_rows*n_cols binary32 LE features in row-major
 * order, then (iff has_labels) n_rows u16 LE labels.
 *
 * CSV: header `id,f0,...,f{d-1}[,label]`; ids are opaque strings, labels
 * non-negative integers.
 */

import * as fs from 'fs'

export const FEATURE_MAGIC = 'GCFV'
export const FEATURE_VERSION = 1
const HEADER_BYTES = 14

export interface FeatureFile {
  features: Float32Array[] // n rows of d values
  labels: number[] | null
}

export function writeBinaryFeatures(
  path: string,
  rows: Float32Array[],
  labels: number[] | null,
): void {
  const n = rows.length
  if (n === 0) throw new Error('refusing to write a feature file with no rows')
  const d = rows[0].length
  for (const [i, row] of rows.entries()) {
    if (row.length !== d) {
      throw new Error(`row ${i + 1}: expected ${d} values, got ${row.length}`)
    }
  }
  if (labels && labels.length !== n) {
    throw new Error(`got ${labels.length} labels for ${n} rows`)
  }
  const total = HEADER_BYTES + 4 * n * d + (labels ? 2 * n : 0)
  const buf = Buffer.alloc(total)
  buf.write(FEATURE_MAGIC, 0, 'ascii')
  buf.writeUInt8(FEATURE_VERSION, 4)
  buf.writeUInt32LE(n, 5)
  buf.writeUInt32LE(d, 9)
  buf.writeUInt8(labels ? 1 : 0, 13)
  let off = HEADER_BYTES
  for (const row of rows) {
    for (const v of row) {
      if (!Number.isFinite(v)) throw new Error('non-finite feature value')
      buf.writeFloatLE(v, off)
      off += 4
    }
  }
  if (labels) {
    for (const lab of labels) {
      if (!Number.isInteger(lab) || lab < 0 || lab > 0xffff) {
        throw new Error(`label ${lab} outside u16 range`)
      }
      buf.writeUInt16LE(lab, off)
      off += 2
    }
  }
  fs.writeFileSync(path, buf)
}

export function writeCsvFeatures(
  path: string,
  ids: string[],
  rows: Float32Array[],
  labels: number[] | null,
): void {
  const n = rows.length
  if (n === 0) throw new Error('refusing to write a feature file with no rows')
  const d = rows[0].length
  const header = ['id']
  for (let i = 0; i < d; i++) header.push(`f${i}`)
  if (labels) header.push('label')
  const lines = [header.join(',')]
  for (let i = 0; i < n; i++) {
    const parts = [ids[i]]
    for (const v of rows[i]) parts.push(String(v))
    if (labels) parts.push(String(labels[i]))
    lines.push(parts.join(','))
  }
  fs.writeFileSync(path, lines.join('\n') + '\n')
}

export function readBinaryFeatures(path: string): FeatureFile {
  const buf = fs.readFileSync(path)
  if (buf.length < HEADER_BYTES) throw new Error(`truncated header in ${path}`)
  if (buf.toString('ascii', 0, 4) !== FEATURE_MAGIC) {
    throw new Error(`bad magic bytes in ${path}`)
  }
  if (buf.readUInt8(4) !== FEATURE_VERSION) {
    throw new Error(`unsupported feature-file version in ${path}`)
  }
  const n = buf.readUInt32LE(5)
  const d = buf.readUInt32LE(9)
  const hasLabels = buf.readUInt8(13)
  const expected = HEADER_BYTES + 4 * n * d + (hasLabels ? 2 * n : 0)
  if (buf.length !== expected) {
    throw new Error(`feature payload size mismatch in ${path}`)
  }
  const features: Float32Array[] = []
  let off = HEADER_BYTES
  for (let i = 0; i < n; i++) {
    const row = new Float32Array(d)
    for (let j = 0; j < d; j++) {
      row[j] = buf.readFloatLE(off)
      off += 4
    }
    features.push(row)
  }
  let labels: number[] | null = null
  if (hasLabels) {
    labels = []
    for (let i = 0; i < n; i++) {
      labels.push(buf.readUInt16LE(off))
      off += 2
    }
  }
  return { features, labels }
}
