/**
 * Sanity report over an emitted feature file: expected width, finiteness,
 * constant columns, and (when labels exist) the cosine separation between
 * per-class mean vectors versus within-class similarity.
 */

import * as path from 'path'

import { FeatureFile, readBinaryFeatures } from './gcfv'
import * as fs from 'fs'

export const EXPECTED_WIDTH = 2048

export interface VerifyReport {
  nRows: number
  nCols: number
  nonFiniteValues: number
  constantColumns: number
  widthWarning: string | null
  interClassCosine: number | null
  intraClassCosine: number | null
  warnings: string[]
}

function readCsvFeatures(filePath: string): FeatureFile {
  const lines = fs.readFileSync(filePath, 'utf-8').trim().split(/\r?\n/)
  const header = lines[0].split(',')
  const hasLabels = header[header.length - 1] === 'label'
  const d = header.length - 1 - (hasLabels ? 1 : 0)
  const features: Float32Array[] = []
  const labels: number[] = []
  for (const line of lines.slice(1)) {
    const parts = line.split(',')
    const row = new Float32Array(d)
    for (let j = 0; j < d; j++) row[j] = Number(parts[1 + j])
    features.push(row)
    if (hasLabels) labels.push(Number(parts[parts.length - 1]))
  }
  return { features, labels: hasLabels ? labels : null }
}

export function readFeatureFile(filePath: string): FeatureFile {
  const head = Buffer.alloc(4)
  const fd = fs.openSync(filePath, 'r')
  fs.readSync(fd, head, 0, 4, 0)
  fs.closeSync(fd)
  return head.toString('ascii') === 'GCFV'
    ? readBinaryFeatures(filePath)
    : readCsvFeatures(filePath)
}

function cosine(a: Float64Array, b: Float64Array): number {
  let dot = 0
  let na = 0
  let nb = 0
  for (let i = 0; i < a.length; i++) {
    dot += a[i] * b[i]
    na += a[i] * a[i]
    nb += b[i] * b[i]
  }
  const denom = Math.sqrt(na) * Math.sqrt(nb)
  return denom === 0 ? 0 : dot / denom
}

export function verifyFeatures(filePath: string): VerifyReport {
  const { features, labels } = readFeatureFile(filePath)
  const n = features.length
  const d = features[0]?.length ?? 0
  const warnings: string[] = []

  let nonFinite = 0
  for (const row of features) {
    for (const v of row) if (!Number.isFinite(v)) nonFinite++
  }
  if (nonFinite > 0) warnings.push(`${nonFinite} non-finite values`)

  let constantColumns = 0
  for (let j = 0; j < d; j++) {
    const first = features[0][j]
    let constant = true
    for (let i = 1; i < n; i++) {
      if (features[i][j] !== first) {
        constant = false
        break
      }
    }
    if (constant) constantColumns++
  }
  if (constantColumns === d) warnings.push('all columns constant')

  let widthWarning: string | null = null
  if (d !== EXPECTED_WIDTH) {
    widthWarning = `width ${d} differs from the backbone's ${EXPECTED_WIDTH}`
    warnings.push(widthWarning)
  }

  let interClassCosine: number | null = null
  let intraClassCosine: number | null = null
  if (labels && labels.length === n) {
    const classes = [...new Set(labels)].sort((a, b) => a - b)
    const centroids = new Map<number, Float64Array>()
    for (const c of classes) {
      const centroid = new Float64Array(d)
      let count = 0
      for (let i = 0; i < n; i++) {
        if (labels[i] !== c) continue
        for (let j = 0; j < d; j++) centroid[j] += features[i][j]
        count++
      }
      for (let j = 0; j < d; j++) centroid[j] /= count
      centroids.set(c, centroid)
    }
    if (classes.length >= 2) {
      let interSum = 0
      let pairs = 0
      for (let a = 0; a < classes.length; a++) {
        for (let b = a + 1; b < classes.length; b++) {
          interSum += cosine(centroids.get(classes[a])!, centroids.get(classes[b])!)
          pairs++
        }
      }
      interClassCosine = interSum / pairs
      let intraSum = 0
      for (let i = 0; i < n; i++) {
        const row = new Float64Array(features[i])
        intraSum += cosine(row, centroids.get(labels[i])!)
      }
      intraClassCosine = intraSum / n
    }
  }

  return {
    nRows: n,
    nCols: d,
    nonFiniteValues: nonFinite,
    constantColumns,
    widthWarning,
    interClassCosine,
    intraClassCosine,
    warnings,
  }
}

export function formatReport(filePath: string, report: VerifyReport): string {
  const lines = [
    `feature file: ${path.resolve(filePath)}`,
    `rows: ${report.nRows}, columns: ${report.nCols}`,
    `non-finite values: ${report.nonFiniteValues}`,
    `constant columns: ${report.constantColumns}`,
  ]
  if (report.interClassCosine !== null) {
    lines.push(
      `inter-class centroid cosine: ${report.interClassCosine.toFixed(6)}`,
      `intra-class mean cosine:     ${report.intraClassCosine!.toFixed(6)}`,
    )
  }
  for (const w of report.warnings) lines.push(`warning: ${w}`)
  return lines.join('\n')
}
