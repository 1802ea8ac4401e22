"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class NonAbsorbingError(DomainError):
    """Raised for ``p = 1``: the full collection is never reached."""

    def __init__(self, msg="p = 1: the chain never reaches the full collection "
                           "(expected hitting time is infinite)"):
        super().__init__(msg)
