import { execFileSync } from 'child_process'
import * as fs from 'fs'
import * as os from 'os'
import * as path from 'path'
import { afterAll, beforeAll, describe, expect, it } from 'vitest'

import { Backbone, loadBackbone } from '../src/backbone'
import { buildManifest, extractFeatures } from '../src/extract'
import { readBinaryFeatures, writeBinaryFeatures } from '../src/gcfv'
import { verifyFeatures } from '../src/verify'
import {
  maxAbsDiff,
  maxIndex,
  noisyColor,
  saveTinyBackbone,
  solidColor,
  writeJpeg,
  writePng,
} from './helpers'

let dir: string
let weightsDir: string
let imagesDir: string
let backbone: Backbone

beforeAll(async () => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), 'extract-'))
  weightsDir = path.join(dir, 'weights')
  await saveTinyBackbone(weightsDir)

  imagesDir = path.join(dir, 'images')
  fs.mkdirSync(imagesDir)
  writePng(path.join(imagesDir, 'dark_a.png'), 30, 20, noisyColor(40, 10, 15, 7))
  writePng(path.join(imagesDir, 'dark_b.png'), 24, 24, noisyColor(35, 12, 18, 8))
  writeJpeg(path.join(imagesDir, 'light_a.jpg'), 28, 28, noisyColor(220, 200, 190, 9))
  writePng(path.join(imagesDir, 'light_b.png'), 20, 30, noisyColor(210, 205, 185, 10))
  // two ids with byte-identical content
  writePng(path.join(imagesDir, 'twin_1.png'), 16, 16, solidColor(90, 140, 60))
  fs.copyFileSync(path.join(imagesDir, 'twin_1.png'), path.join(imagesDir, 'twin_2.png'))

  fs.writeFileSync(
    path.join(dir, 'labels.csv'),
    'id,label\ndark_a,shadow\ndark_b,shadow\nlight_a,bright\nlight_b,bright\ntwin_1,bright\ntwin_2,bright\n',
  )
  backbone = await loadBackbone(weightsDir)
}, 120_000)

afterAll(() => {
  backbone?.dispose()
  fs.rmSync(dir, { recursive: true, force: true })
})

function manifest(labels = false) {
  return buildManifest(imagesDir, labels ? path.join(dir, 'labels.csv') : undefined)
}

describe('manifest', () => {
  it('collects decodable images sorted by id', () => {
    const m = manifest()
    expect(m.entries.map((e) => e.id)).toEqual([
      'dark_a', 'dark_b', 'light_a', 'light_b', 'twin_1', 'twin_2',
    ])
    expect(m.labelCodes).toBeNull()
  })

  it('maps labels onto dense contiguous codes', () => {
    const m = manifest(true)
    expect(m.labelMapping).toEqual(['bright', 'shadow'])
    expect(m.labelCodes).toEqual([1, 1, 0, 0, 0, 0])
  })

  it('rejects a labels file missing an image id', () => {
    const bad = path.join(dir, 'bad_labels.csv')
    fs.writeFileSync(bad, 'id,label\ndark_a,shadow\n')
    expect(() => buildManifest(imagesDir, bad)).toThrow(/no entry for image id/)
  })

  it('rejects an empty or missing directory', () => {
    const empty = path.join(dir, 'empty')
    fs.mkdirSync(empty, { recursive: true })
    expect(() => buildManifest(empty)).toThrow(/no decodable images/)
    expect(() => buildManifest(path.join(dir, 'nope'))).toThrow(/not found/)
  })
})

describe('extractFeatures', () => {
  it('emits one 2048-wide row per image with a full sidecar', async () => {
    const out = path.join(dir, 'all.gcfv')
    const result = await extractFeatures(manifest(true), backbone, out, {
      format: 'binary',
      batchSize: 4,
      skipUndecodable: false,
    })
    expect(result.nRows).toBe(6)
    expect(result.nCols).toBe(2048)

    const file = readBinaryFeatures(out)
    expect(file.features.length).toBe(6)
    expect(file.labels).toEqual([1, 1, 0, 0, 0, 0])

    const sidecar = JSON.parse(fs.readFileSync(result.sidecarPath, 'utf-8'))
    expect(sidecar.feature_dim).toBe(2048)
    expect(sidecar.preprocessing.resize).toEqual({ width: 224, height: 224, method: 'bilinear' })
    expect(sidecar.label_mapping).toEqual(['bright', 'shadow'])
    expect(Object.keys(sidecar.images)).toHaveLength(6)
    expect(sidecar.skipped).toEqual([])
    expect(sidecar.model).toContain('weights')
  }, 120_000)

  it('gives identical rows for byte-identical images', async () => {
    const out = path.join(dir, 'twin.gcfv')
    await extractFeatures(manifest(), backbone, out, {
      format: 'binary',
      batchSize: 3,
      skipUndecodable: false,
    })
    const { features } = readBinaryFeatures(out)
    const twin1 = features[4]
    const twin2 = features[5]
    expect(maxAbsDiff(twin1, twin2)).toBeLessThanOrEqual(1e-4)
    expect(maxIndex(twin1)).toBe(maxIndex(twin2))
  }, 120_000)

  it('is batch-size invariant within tolerance', async () => {
    const a = path.join(dir, 'b1.gcfv')
    const b = path.join(dir, 'b5.gcfv')
    await extractFeatures(manifest(), backbone, a, {
      format: 'binary', batchSize: 1, skipUndecodable: false,
    })
    await extractFeatures(manifest(), backbone, b, {
      format: 'binary', batchSize: 5, skipUndecodable: false,
    })
    const fa = readBinaryFeatures(a).features
    const fb = readBinaryFeatures(b).features
    for (let i = 0; i < fa.length; i++) {
      expect(maxAbsDiff(fa[i], fb[i])).toBeLessThanOrEqual(1e-4)
      expect(maxIndex(fa[i])).toBe(maxIndex(fb[i]))
    }
  }, 120_000)

  it('reproduces vectors across runs with the same weights', async () => {
    const a = path.join(dir, 'r1.gcfv')
    const b = path.join(dir, 'r2.gcfv')
    const fresh = await loadBackbone(weightsDir)
    try {
      await extractFeatures(manifest(), backbone, a, {
        format: 'binary', batchSize: 2, skipUndecodable: false,
      })
      await extractFeatures(manifest(), fresh, b, {
        format: 'binary', batchSize: 2, skipUndecodable: false,
      })
    } finally {
      fresh.dispose()
    }
    const fa = readBinaryFeatures(a).features
    const fb = readBinaryFeatures(b).features
    for (let i = 0; i < fa.length; i++) {
      expect(maxAbsDiff(fa[i], fb[i])).toBeLessThanOrEqual(1e-4)
      expect(maxIndex(fa[i])).toBe(maxIndex(fb[i]))
    }
  }, 120_000)

  it('aborts on undecodable images by default, skips with a flag', async () => {
    const brokenDir = path.join(dir, 'broken_images')
    fs.mkdirSync(brokenDir, { recursive: true })
    writePng(path.join(brokenDir, 'ok.png'), 8, 8, solidColor(1, 2, 3))
    fs.writeFileSync(path.join(brokenDir, 'broken.png'), 'not a png at all')

    const out = path.join(dir, 'broken.gcfv')
    await expect(
      extractFeatures(buildManifest(brokenDir), backbone, out, {
        format: 'binary', batchSize: 2, skipUndecodable: false,
      }),
    ).rejects.toThrow(/cannot decode/)

    const warnings: string[] = []
    const result = await extractFeatures(buildManifest(brokenDir), backbone, out, {
      format: 'binary', batchSize: 2, skipUndecodable: true,
      log: (m) => warnings.push(m),
    })
    expect(result.nRows).toBe(1)
    expect(result.skipped).toEqual(['broken'])
    expect(warnings.some((w) => w.includes('skipping'))).toBe(true)
    const sidecar = JSON.parse(fs.readFileSync(result.sidecarPath, 'utf-8'))
    expect(sidecar.skipped).toEqual(['broken'])
  }, 120_000)

  it('writes csv the classifier header convention', async () => {
    const out = path.join(dir, 'all.csv')
    await extractFeatures(manifest(true), backbone, out, {
      format: 'csv', batchSize: 6, skipUndecodable: false,
    })
    const header = fs.readFileSync(out, 'utf-8').split('\n')[0]
    expect(header.startsWith('id,f0,f1,')).toBe(true)
    expect(header.endsWith(',label')).toBe(true)
    expect(header.split(',').length).toBe(2048 + 2)
  }, 120_000)

  it('aborts when weights are missing', async () => {
    await expect(loadBackbone(path.join(dir, 'no_weights_here'))).rejects.toThrow(/not found/)
  })
})

describe('compatibility with the classifier CLI', () => {
  it('emitted binary loads in the classifier with zero validation errors', async () => {
    const out = path.join(dir, 'compat.gcfv')
    await extractFeatures(manifest(true), backbone, out, {
      format: 'binary', batchSize: 4, skipUndecodable: false,
    })
    const roundtrip = path.join(dir, 'compat.csv')
    execFileSync('python3', [
      '-m', 'cascadeforest.cli', 'convert',
      '--features', out, '--out', roundtrip, '--to', 'csv',
    ])
    const header = fs.readFileSync(roundtrip, 'utf-8').split('\n')[0]
    expect(header.split(',').length).toBe(2048 + 2)
  }, 120_000)
})

describe('verifyFeatures', () => {
  it('reports shape, finiteness, and class separation', async () => {
    const out = path.join(dir, 'verify.gcfv')
    await extractFeatures(manifest(true), backbone, out, {
      format: 'binary', batchSize: 4, skipUndecodable: false,
    })
    const report = verifyFeatures(out)
    expect(report.nRows).toBe(6)
    expect(report.nCols).toBe(2048)
    expect(report.nonFiniteValues).toBe(0)
    expect(report.widthWarning).toBeNull()
    // visually distinct classes: centroids farther apart than rows are
    // from their own centroid
    expect(report.interClassCosine).not.toBeNull()
    expect(report.interClassCosine!).toBeLessThan(report.intraClassCosine!)
  }, 120_000)

  it('warns on all-constant columns and unexpected width', () => {
    const zeros = path.join(dir, 'zeros.gcfv')
    writeBinaryFeatures(zeros, [new Float32Array(16), new Float32Array(16)], null)
    const report = verifyFeatures(zeros)
    expect(report.constantColumns).toBe(16)
    expect(report.warnings.some((w: string) => w.includes('constant'))).toBe(true)
    expect(report.widthWarning).toContain('2048')
  })
})
