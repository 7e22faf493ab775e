/**
 * The fixed pretrained backbone.
 *
 * The extractor runs a 50-layer residual network pretrained on the
 * large-scale natural-image corpus, with its final fully connected layer
 * removed: features are the global-average-pooled penultimate activations
 * (2048 values). Weights are never fine-tuned here; the model directory
 * must contain a tfjs `model.json` (layers or graph format) plus its
 * weight shards, and extraction aborts when it is missing.
 *
 * Inference is evaluation-mode only, batched; the batch size must not
 * change emitted values beyond floating-point backend tolerance.
 */

import * as tf from '@tensorflow/tfjs'
import * as fs from 'fs'
import * as path from 'path'

export interface Backbone {
  /** Human-readable identifier recorded in the output manifest. */
  identifier: string
  featureDim: number
  /** [n, 224, 224, 3] -> [n, featureDim] pooled activations. */
  run(batch: tf.Tensor4D): tf.Tensor2D
  dispose(): void
}

/** Minimal filesystem IOHandler: pure @tensorflow/tfjs has none for Node. */
export function fileIOHandler(modelJsonPath: string): tf.io.IOHandler {
  const dir = path.dirname(modelJsonPath)
  return {
    load: async () => {
      const modelJson = JSON.parse(fs.readFileSync(modelJsonPath, 'utf-8'))
      const manifest = modelJson.weightsManifest as Array<{
        paths: string[]
        weights: tf.io.WeightsManifestEntry[]
      }>
      const specs: tf.io.WeightsManifestEntry[] = []
      const shards: Buffer[] = []
      for (const group of manifest) {
        specs.push(...group.weights)
        for (const rel of group.paths) {
          shards.push(fs.readFileSync(path.join(dir, rel)))
        }
      }
      const weightData = concatBuffers(shards)
      return {
        modelTopology: modelJson.modelTopology,
        format: modelJson.format,
        generatedBy: modelJson.generatedBy,
        convertedBy: modelJson.convertedBy,
        weightSpecs: specs,
        weightData,
        trainingConfig: modelJson.trainingConfig,
        userDefinedMetadata: modelJson.userDefinedMetadata,
      }
    },
    save: async (artifacts: tf.io.ModelArtifacts) => {
      fs.mkdirSync(dir, { recursive: true })
      const weightData = artifacts.weightData as ArrayBuffer
      const shardName = 'weights.bin'
      fs.writeFileSync(path.join(dir, shardName), Buffer.from(weightData))
      const modelJson = {
        modelTopology: artifacts.modelTopology,
        format: artifacts.format,
        generatedBy: artifacts.generatedBy,
        convertedBy: artifacts.convertedBy,
        weightsManifest: [
          { paths: [shardName], weights: artifacts.weightSpecs },
        ],
        trainingConfig: artifacts.trainingConfig,
        userDefinedMetadata: artifacts.userDefinedMetadata,
      }
      fs.writeFileSync(modelJsonPath, JSON.stringify(modelJson))
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: 'JSON' as const,
        },
      }
    },
  }
}

function concatBuffers(buffers: Buffer[]): ArrayBuffer {
  const total = buffers.reduce((s, b) => s + b.length, 0)
  const out = new Uint8Array(total)
  let off = 0
  for (const b of buffers) {
    out.set(b, off)
    off += b.length
  }
  return out.buffer
}

function pooled(output: tf.Tensor): tf.Tensor2D {
  if (output.rank === 4) {
    // spatial activations: global average pool over height and width
    return tf.mean(output as tf.Tensor4D, [1, 2]) as tf.Tensor2D
  }
  if (output.rank === 2) return output as tf.Tensor2D
  throw new Error(`backbone output has unsupported rank ${output.rank}`)
}

export async function loadBackbone(weightsDir: string): Promise<Backbone> {
  const modelJsonPath = path.join(weightsDir, 'model.json')
  if (!fs.existsSync(modelJsonPath)) {
    throw new Error(
      `backbone weights not found: ${modelJsonPath} is missing ` +
        '(a tfjs model.json plus weight shards is required)',
    )
  }
  const raw = JSON.parse(fs.readFileSync(modelJsonPath, 'utf-8'))
  const format = raw.format ?? 'layers-model'
  const handler = fileIOHandler(modelJsonPath)

  let model: tf.LayersModel | tf.GraphModel
  if (format === 'graph-model') {
    model = await tf.loadGraphModel(handler)
  } else {
    model = await tf.loadLayersModel(handler)
  }
  const name = (model as tf.LayersModel).name ?? path.basename(weightsDir)
  const identifier = `${path.basename(weightsDir)}:${name}`

  const probeDim = () =>
    tf.tidy(() => {
      const probe = tf.zeros([1, 224, 224, 3]) as tf.Tensor4D
      const out = pooled(model.predict(probe) as tf.Tensor)
      return out.shape[1]
    })

  return {
    identifier,
    featureDim: probeDim(),
    run: (batch: tf.Tensor4D) =>
      tf.tidy(() => pooled(model.predict(batch) as tf.Tensor)),
    dispose: () => model.dispose(),
  }
}
