class KernelGuardError(Exception):
    """Base class for every error the pipeline raises on bad input or state."""


class ConfigError(KernelGuardError):
    pass
