"""Exception hierarchy. Every error the library raises deliberately derives
from MihashError so the CLI can turn it into a one-line diagnostic."""


class MihashError(Exception):
    pass


class ShapeError(MihashError):
    """Dimension or shape disagreement between operands."""


class ConfigError(MihashError):
    """Invalid or unknown configuration key/value."""


class FormatError(MihashError):
    """Corrupt, truncated, or mislabeled data file."""


class TrainingError(MihashError):
    """Training aborted (e.g. non-finite loss)."""
