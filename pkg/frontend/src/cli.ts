#!/usr/bin/env node
/**
 * Extractor command line.
 *
 *   extract --images DIR --weights DIR [--labels CSV] --out PATH
 *           [--format csv|binary] [--batch-size N] [--on-undecodable skip|abort]
 *   verify  --features PATH
 */

import { parseArgs } from 'util'

import { loadBackbone } from './backbone'
import { buildManifest, extractFeatures } from './extract'
import { formatReport, verifyFeatures } from './verify'

const USAGE = `usage:
  cascadeforest-extract extract --images DIR --weights DIR --out PATH
      [--labels CSV] [--format csv|binary] [--batch-size N]
      [--on-undecodable skip|abort]
  cascadeforest-extract verify --features PATH`

async function cmdExtract(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      images: { type: 'string' },
      labels: { type: 'string' },
      weights: { type: 'string' },
      out: { type: 'string' },
      format: { type: 'string', default: 'binary' },
      'batch-size': { type: 'string', default: '16' },
      'on-undecodable': { type: 'string', default: 'abort' },
    },
  })
  if (!values.images || !values.out || !values.weights) {
    throw new Error('extract requires --images, --weights, and --out\n' + USAGE)
  }
  if (values.format !== 'csv' && values.format !== 'binary') {
    throw new Error(`--format must be csv or binary, got ${values.format}`)
  }
  if (values['on-undecodable'] !== 'skip' && values['on-undecodable'] !== 'abort') {
    throw new Error(`--on-undecodable must be skip or abort, got ${values['on-undecodable']}`)
  }
  const batchSize = Number(values['batch-size'])
  if (!Number.isInteger(batchSize) || batchSize < 1) {
    throw new Error(`--batch-size must be a positive integer, got ${values['batch-size']}`)
  }

  const manifest = buildManifest(values.images, values.labels)
  const backbone = await loadBackbone(values.weights)
  try {
    const result = await extractFeatures(manifest, backbone, values.out, {
      format: values.format,
      batchSize,
      skipUndecodable: values['on-undecodable'] === 'skip',
      log: (msg) => console.error(msg),
    })
    console.log(
      `wrote ${result.nRows} x ${result.nCols} features to ${result.outPath} ` +
        `(manifest: ${result.sidecarPath}` +
        (result.skipped.length ? `, skipped ${result.skipped.length}` : '') +
        ')',
    )
  } finally {
    backbone.dispose()
  }
  return 0
}

function cmdVerify(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: { features: { type: 'string' } },
  })
  if (!values.features) throw new Error('verify requires --features\n' + USAGE)
  const report = verifyFeatures(values.features)
  console.log(formatReport(values.features, report))
  return 0
}

export async function main(argv: string[]): Promise<number> {
  const [command, ...rest] = argv
  try {
    if (command === 'extract') return await cmdExtract(rest)
    if (command === 'verify') return cmdVerify(rest)
    throw new Error(`unknown command ${command ?? '(none)'}\n${USAGE}`)
  } catch (err) {
    console.error(`error: ${(err as Error).message}`)
    return 1
  }
}

if (require.main === module) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code
  })
}
