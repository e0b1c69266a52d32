"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid parameters or configuration, detected before any work starts."""


class CapExceeded(RuntimeError):
    """A configured size cap would be exceeded."""
