"""Package exception types."""


class ConfigurationError(ValueError):
    """A shape, dimension, or configuration value is inconsistent."""


class TrainingError(RuntimeError):
    """Numeric failure during training (non-finite gradients etc.)."""
