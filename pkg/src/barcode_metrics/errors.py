"""Exception hierarchy shared by the engines, the experiment harness and the CLI.

Every error carries a ``category`` (the machine-parseable prefix printed by the
CLI) and the process exit code the CLI maps it to.
"""


class BarcodeError(Exception):
    category = "internal"
    exit_code = 1


class FormatError(BarcodeError):
    """Malformed input file (bad npy header, ragged csv, unparseable cell)."""

    category = "format"
    exit_code = 65


class DataError(BarcodeError):
    """Well-formed input whose values violate an invariant (NaN, too few rows)."""

    category = "data"
    exit_code = 65


class ShapeError(BarcodeError):
    """Dimension mismatch between embedding sets, or non-2-D input."""

    category = "shape"
    exit_code = 66


class ParameterError(BarcodeError):
    """Out-of-range user parameter (k, outlier probability, swap counts...)."""

    category = "parameter"
    exit_code = 64


class CapacityError(BarcodeError):
    """Operation needs exact distance storage beyond the configured pair limit."""

    category = "capacity"
    exit_code = 69


class NumericalError(BarcodeError):
    """Linear-algebra failure (eigendecomposition/SVD did not converge)."""

    category = "numerical"
    exit_code = 70


class ConfigError(BarcodeError):
    """Invalid experiment spec file; message names the offending key."""

    category = "config"
    exit_code = 65


class IoError(BarcodeError):
    category = "io"
    exit_code = 74
