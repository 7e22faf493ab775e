/**
 * Directory-of-images -> interchange feature file.
 *
 * The manifest maps image ids (file names without extension, sorted) to
 * paths and optional class labels. Extraction batches images through the
 * backbone and writes one pooled feature vector per image, in manifest
 * order, as CSV or binary. A JSON sidecar records the model identifier,
 * the exact preprocessing constants, the label mapping, and any skipped
 * images, so every run is reproducible and auditable.
 */

import * as tf from '@tensorflow/tfjs'
import * as fs from 'fs'
import * as path from 'path'

import { Backbone } from './backbone'
import { writeBinaryFeatures, writeCsvFeatures } from './gcfv'
import {
  SUPPORTED_EXTENSIONS,
  decodeImage,
  preprocess,
  preprocessingRecord,
} from './image'

export interface ManifestEntry {
  id: string
  path: string
  label?: string
}

export interface Manifest {
  entries: ManifestEntry[]
  /** dense label codes 0..K-1 in manifest order, iff labels were given */
  labelCodes: number[] | null
  /** original label value per dense code */
  labelMapping: string[] | null
}

export function buildManifest(imagesDir: string, labelsCsv?: string): Manifest {
  if (!fs.existsSync(imagesDir) || !fs.statSync(imagesDir).isDirectory()) {
    throw new Error(`image directory not found: ${imagesDir}`)
  }
  const files = fs
    .readdirSync(imagesDir)
    .filter((f) => SUPPORTED_EXTENSIONS.includes(path.extname(f).toLowerCase()))
    .sort()
  if (files.length === 0) {
    throw new Error(`no decodable images (${SUPPORTED_EXTENSIONS.join(', ')}) in ${imagesDir}`)
  }
  const entries: ManifestEntry[] = files.map((f) => ({
    id: f.slice(0, f.length - path.extname(f).length),
    path: path.join(imagesDir, f),
  }))

  let labelCodes: number[] | null = null
  let labelMapping: string[] | null = null
  if (labelsCsv) {
    const byId = readLabelsCsv(labelsCsv)
    for (const e of entries) {
      const label = byId.get(e.id)
      if (label === undefined) {
        throw new Error(`labels file ${labelsCsv} has no entry for image id '${e.id}'`)
      }
      e.label = label
    }
    labelMapping = [...new Set(entries.map((e) => e.label!))].sort()
    const code = new Map(labelMapping.map((v, i) => [v, i]))
    labelCodes = entries.map((e) => code.get(e.label!)!)
  }
  return { entries, labelCodes, labelMapping }
}

function readLabelsCsv(labelsCsv: string): Map<string, string> {
  if (!fs.existsSync(labelsCsv)) {
    throw new Error(`labels file not found: ${labelsCsv}`)
  }
  const lines = fs.readFileSync(labelsCsv, 'utf-8').trim().split(/\r?\n/)
  if (lines.length < 2) throw new Error(`labels file ${labelsCsv} has no data rows`)
  const header = lines[0].split(',')
  if (header[0] !== 'id' || header[1] !== 'label') {
    throw new Error(`labels file ${labelsCsv} must have header 'id,label'`)
  }
  const byId = new Map<string, string>()
  for (const line of lines.slice(1)) {
    const [id, label] = line.split(',')
    byId.set(id, label)
  }
  return byId
}

export interface ExtractOptions {
  format: 'csv' | 'binary'
  batchSize: number
  /** skip undecodable images with a warning instead of aborting */
  skipUndecodable: boolean
  log?: (msg: string) => void
}

export interface ExtractResult {
  outPath: string
  sidecarPath: string
  nRows: number
  nCols: number
  skipped: string[]
}

export async function extractFeatures(
  manifest: Manifest,
  backbone: Backbone,
  outPath: string,
  options: ExtractOptions,
): Promise<ExtractResult> {
  const log = options.log ?? (() => {})
  if (options.batchSize < 1) throw new Error('batch size must be at least 1')

  const kept: ManifestEntry[] = []
  const keptCodes: number[] = []
  const skipped: string[] = []
  const tensors: tf.Tensor3D[] = []
  for (const [i, entry] of manifest.entries.entries()) {
    try {
      const decoded = decodeImage(fs.readFileSync(entry.path), entry.path)
      tensors.push(preprocess(decoded))
    } catch (err) {
      if (!options.skipUndecodable) {
        for (const t of tensors) t.dispose()
        throw new Error(`cannot decode ${entry.path}: ${(err as Error).message}`)
      }
      log(`warning: skipping undecodable image ${entry.path}`)
      skipped.push(entry.id)
      continue
    }
    kept.push(entry)
    if (manifest.labelCodes) keptCodes.push(manifest.labelCodes[i])
  }
  if (kept.length === 0) throw new Error('no images left to extract after skipping')

  const rows: Float32Array[] = []
  for (let start = 0; start < tensors.length; start += options.batchSize) {
    const slice = tensors.slice(start, start + options.batchSize)
    const batch = tf.stack(slice) as tf.Tensor4D
    const features = backbone.run(batch)
    const data = (await features.data()) as Float32Array
    const [, dim] = features.shape
    for (let r = 0; r < slice.length; r++) {
      rows.push(data.slice(r * dim, (r + 1) * dim))
    }
    batch.dispose()
    features.dispose()
    log(`extracted ${Math.min(start + options.batchSize, tensors.length)}/${tensors.length}`)
  }
  for (const t of tensors) t.dispose()

  const labels = manifest.labelCodes ? keptCodes : null
  if (options.format === 'binary') {
    writeBinaryFeatures(outPath, rows, labels)
  } else {
    writeCsvFeatures(outPath, kept.map((e) => e.id), rows, labels)
  }

  const sidecarPath = outPath + '.manifest.json'
  const sidecar = {
    model: backbone.identifier,
    feature_dim: backbone.featureDim,
    preprocessing: preprocessingRecord(),
    images: Object.fromEntries(kept.map((e) => [e.id, e.path])),
    labels: manifest.labelCodes
      ? Object.fromEntries(kept.map((e, i) => [e.id, keptCodes[i]]))
      : null,
    label_mapping: manifest.labelMapping,
    skipped,
  }
  fs.writeFileSync(sidecarPath, JSON.stringify(sidecar, null, 2) + '\n')

  return {
    outPath,
    sidecarPath,
    nRows: rows.length,
    nCols: rows[0].length,
    skipped,
  }
}
