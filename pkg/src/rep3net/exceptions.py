"""Exception hierarchy shared across the toolkit."""


class Rep3NetError(Exception):
    """Base class for all toolkit errors."""


class SmilesSyntaxError(Rep3NetError):
    """Malformed SMILES input: unbalanced rings, brackets, parentheses, bad tokens."""


class ValenceError(Rep3NetError):
    """An atom exceeds its allowed valence after hydrogen assignment."""


class UnsupportedFeatureError(Rep3NetError):
    """SMILES feature outside the supported subset (wildcards, quadruple bonds, ...)."""


class DataError(Rep3NetError):
    """Invalid input data: missing CSV columns, empty splits, bad values."""


class FormatError(Rep3NetError):
    """Corrupt or incompatible binary file (embedding store, checkpoint)."""


class NumericError(Rep3NetError):
    """A numerical operation produced NaN/Inf or was called on degenerate input."""


class NotFittedError(Rep3NetError):
    """An estimator was used before calling fit."""
