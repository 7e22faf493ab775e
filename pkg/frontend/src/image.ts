/**
 * Image decoding and preprocessing.
 *
 * Every image is decoded to RGB, bilinearly resized to exactly 224x224
 * (aspect ratio not preserved), scaled to [0, 1], and normalized per
 * channel with the backbone's published constants. The exact record of
 * these steps is written next to every feature file so runs are auditable.
 */

import * as tf from '@tensorflow/tfjs'
import * as path from 'path'
import { PNG } from 'pngjs'
import * as jpeg from 'jpeg-js'

export const INPUT_SIZE = 224
export const CHANNEL_MEAN = [0.485, 0.456, 0.406]
export const CHANNEL_STD = [0.229, 0.224, 0.225]

export interface DecodedImage {
  width: number
  height: number
  rgb: Uint8Array // height * width * 3
}

export const SUPPORTED_EXTENSIONS = ['.png', '.jpg', '.jpeg']

export function preprocessingRecord() {
  return {
    resize: { width: INPUT_SIZE, height: INPUT_SIZE, method: 'bilinear' },
    scale: '1/255',
    channel_mean: CHANNEL_MEAN,
    channel_std: CHANNEL_STD,
  }
}

function rgbaToRgb(data: Uint8Array | Buffer, pixels: number): Uint8Array {
  const rgb = new Uint8Array(pixels * 3)
  for (let p = 0; p < pixels; p++) {
    rgb[p * 3] = data[p * 4]
    rgb[p * 3 + 1] = data[p * 4 + 1]
    rgb[p * 3 + 2] = data[p * 4 + 2]
  }
  return rgb
}

export function decodeImage(buffer: Buffer, filePath: string): DecodedImage {
  const ext = path.extname(filePath).toLowerCase()
  if (ext === '.png') {
    const png = PNG.sync.read(buffer)
    return {
      width: png.width,
      height: png.height,
      rgb: rgbaToRgb(png.data, png.width * png.height),
    }
  }
  if (ext === '.jpg' || ext === '.jpeg') {
    const img = jpeg.decode(buffer, { useTArray: true, maxMemoryUsageInMB: 512 })
    return {
      width: img.width,
      height: img.height,
      rgb: rgbaToRgb(img.data, img.width * img.height),
    }
  }
  throw new Error(`unsupported image extension ${ext} (${filePath})`)
}

/** Decoded image -> normalized [224, 224, 3] float32 tensor. */
export function preprocess(image: DecodedImage): tf.Tensor3D {
  return tf.tidy(() => {
    const raw = tf.tensor3d(image.rgb, [image.height, image.width, 3], 'int32')
    const resized = tf.image.resizeBilinear(raw.toFloat(), [INPUT_SIZE, INPUT_SIZE])
    const scaled = resized.div(255.0)
    return scaled.sub(tf.tensor1d(CHANNEL_MEAN)).div(tf.tensor1d(CHANNEL_STD))
  }) as tf.Tensor3D
}
