"""Exception types raised by the library."""


class CayleyIsingError(ValueError):
    """Base class for all library errors."""


class InvalidGeneratorError(CayleyIsingError):
    pass


class InvalidSubgroupError(CayleyIsingError):
    pass


class InvalidBallError(CayleyIsingError):
    pass


class InvalidClassError(CayleyIsingError):
    pass


class UnsupportedError(CayleyIsingError):
    """Requested operation is outside the region the theory covers."""


class IncompleteBoundaryError(CayleyIsingError):
    pass


class PreconditionError(CayleyIsingError):
    pass


class InvalidCollectionError(CayleyIsingError):
    pass


class ResourceError(CayleyIsingError):
    """An enumeration would exceed its configured cap."""

    def __init__(self, message, cap=None):
        super().__init__(message)
        self.cap = cap


class DomainError(CayleyIsingError):
    pass
