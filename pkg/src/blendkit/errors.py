"""Exception types shared across the toolkit."""


class BlendkitError(Exception):
    """Base class for all toolkit errors."""


class RegistryError(BlendkitError):
    """Malformed or invalid registry configuration."""


class UnknownModelError(BlendkitError):
    """A model name not present in the registry."""


class DatasetError(BlendkitError):
    """Malformed dataset file or record."""


class SelectionError(BlendkitError):
    """Invalid selector inputs (bad epsilon, empty candidate list, ...)."""


class InfeasibleBudgetError(BlendkitError):
    """No model fits within the query budget and policy forbids fallback."""


class DimensionError(BlendkitError):
    """Shape mismatch between head, embedding, or registry."""


class FusionError(BlendkitError):
    """No usable responses to fuse."""


class TrainingError(BlendkitError):
    """Training aborted (empty dataset, non-finite loss, ...)."""
