class ResourceLimitError(RuntimeError):
    """A computation was refused because it would exceed a configured limit."""


class NotFunctionalError(ValueError):
    """A grammar assumed to be functional derives inconsistent operation sets."""
