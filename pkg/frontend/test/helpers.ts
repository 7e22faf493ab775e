/** Test fixtures: a tiny saved backbone and synthetic images. */

import * as tf from '@tensorflow/tfjs'
import * as fs from 'fs'
import * as path from 'path'
import { PNG } from 'pngjs'
import * as jpeg from 'jpeg-js'

import { fileIOHandler } from '../src/backbone'

/**
 * Build and save a miniature backbone with the same interface contract as
 * the production network: [n,224,224,3] in, rank-4 activations out (the
 * extractor global-average-pools them to 2048 features). Seeded
 * initializers make the saved weights reproducible.
 */
export async function saveTinyBackbone(dir: string, featureDim = 2048): Promise<string> {
  const model = tf.sequential({
    name: 'tiny_residualish_backbone',
    layers: [
      tf.layers.averagePooling2d({
        inputShape: [224, 224, 3],
        poolSize: 32,
        strides: 32,
      }),
      tf.layers.conv2d({
        filters: featureDim,
        kernelSize: 1,
        activation: 'relu',
        kernelInitializer: tf.initializers.glorotUniform({ seed: 42 }),
        biasInitializer: tf.initializers.randomUniform({ minval: -0.1, maxval: 0.1, seed: 43 }),
      }),
    ],
  })
  fs.mkdirSync(dir, { recursive: true })
  await model.save(fileIOHandler(path.join(dir, 'model.json')))
  model.dispose()
  return dir
}

export type Painter = (x: number, y: number) => [number, number, number]

export function writePng(filePath: string, width: number, height: number, paint: Painter): void {
  const png = new PNG({ width, height })
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const [r, g, b] = paint(x, y)
      const i = (y * width + x) * 4
      png.data[i] = r
      png.data[i + 1] = g
      png.data[i + 2] = b
      png.data[i + 3] = 255
    }
  }
  fs.writeFileSync(filePath, PNG.sync.write(png))
}

export function writeJpeg(filePath: string, width: number, height: number, paint: Painter): void {
  const data = Buffer.alloc(width * height * 4)
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const [r, g, b] = paint(x, y)
      const i = (y * width + x) * 4
      data[i] = r
      data[i + 1] = g
      data[i + 2] = b
      data[i + 3] = 255
    }
  }
  fs.writeFileSync(filePath, jpeg.encode({ data, width, height }, 95).data)
}

export function solidColor(r: number, g: number, b: number): Painter {
  return () => [r, g, b]
}

export function noisyColor(r: number, g: number, b: number, seed: number): Painter {
  let state = seed >>> 0 || 1
  const next = () => {
    // xorshift32: deterministic pixel noise without a RNG dependency
    state ^= state << 13
    state ^= state >>> 17
    state ^= state << 5
    state >>>= 0
    return (state % 41) - 20
  }
  const clamp = (v: number) => Math.max(0, Math.min(255, v))
  return () => [clamp(r + next()), clamp(g + next()), clamp(b + next())]
}

export function maxIndex(row: Float32Array): number {
  let best = 0
  for (let i = 1; i < row.length; i++) if (row[i] > row[best]) best = i
  return best
}

export function maxAbsDiff(a: Float32Array, b: Float32Array): number {
  let worst = 0
  for (let i = 0; i < a.length; i++) worst = Math.max(worst, Math.abs(a[i] - b[i]))
  return worst
}
