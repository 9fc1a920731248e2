/** Domain errors; the CLI maps any ExtractorError to exit code 1. */

export class ExtractorError extends Error {
  constructor(message: string) {
    super(message);
    this.name = new.target.name;
  }
}

export class ModelLoadFailure extends ExtractorError {}

export class AudioDecodeFailure extends ExtractorError {}

export class SpanResolutionFailure extends ExtractorError {}

export class ConfigError extends ExtractorError {}

export class MissingScore extends ExtractorError {}

export class DuplicateCheckpoint extends ExtractorError {}

export class ShapeMismatch extends ExtractorError {}

export class ValidationFailure extends ExtractorError {}
