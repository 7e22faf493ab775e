export { Backbone, fileIOHandler, loadBackbone } from './backbone'
export { buildManifest, extractFeatures } from './extract'
export type { ExtractOptions, ExtractResult, Manifest, ManifestEntry } from './extract'
export {
  FEATURE_MAGIC,
  FEATURE_VERSION,
  readBinaryFeatures,
  writeBinaryFeatures,
  writeCsvFeatures,
} from './gcfv'
export type { FeatureFile } from './gcfv'
export {
  CHANNEL_MEAN,
  CHANNEL_STD,
  INPUT_SIZE,
  decodeImage,
  preprocess,
  preprocessingRecord,
} from './image'
export { EXPECTED_WIDTH, formatReport, readFeatureFile, verifyFeatures } from './verify'
export type { VerifyReport } from './verify'
