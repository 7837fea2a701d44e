"""Exception types shared across the package."""


class IdealMomentsError(Exception):
    pass


class ConfigError(IdealMomentsError, ValueError):
    """Bad field descriptor, grid specification or config file."""


class ResourceLimitError(IdealMomentsError):
    """A request would exceed the configured table / enumeration caps."""


class FieldMismatchError(IdealMomentsError, ValueError):
    pass


class PoleError(IdealMomentsError, ValueError):
    """Evaluation requested at (or numerically too close to) a pole."""


class TableCoverageError(IdealMomentsError, ValueError):
    pass


class DegenerateInputError(IdealMomentsError, ValueError):
    pass


class CacheError(IdealMomentsError):
    """Cache file has a bad header or checksum."""
