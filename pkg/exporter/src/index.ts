export {
  CONTAINER_VERSION,
  Dataset,
  Embeddings,
  FormatError,
  ValidationError,
  encodeDataset,
  encodeEmbeddings,
  readDataset,
  readEmbeddings,
  validateEmbeddings,
  writeDataset,
  writeEmbeddings,
} from './format.js';
export { CheckpointError, FeatureLayer, featureModel, loadCheckpoint, saveCheckpoint } from './model.js';
export { identityModel, constantModel, resnet18 } from './stubs.js';
export { ExportConfig, ExportSummary, exportEmbeddings } from './export.js';
