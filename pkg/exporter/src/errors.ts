/** Error taxonomy for the exporter. */

export class ExportError extends Error {}

/** Model weights cannot be obtained (bad path, unknown name, fetch failure). */
export class ModelUnavailableError extends ExportError {}

/** The requested layer does not exist in the loaded model. */
export class LayerNotFoundError extends ExportError {}

/** The export spec itself is malformed. */
export class BadSpecError extends ExportError {}

/** A descriptor file violates the binary format. */
export class FormatError extends ExportError {}
