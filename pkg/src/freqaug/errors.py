"""Exception hierarchy shared by the library, the service, and the CLI.

Exit-code / HTTP mapping convention:
  ConfigError  -> CLI exit 1, HTTP 400  (bad flags, bad parameter ranges)
  DataError    -> CLI exit 2, HTTP 422  (invalid images, shape mismatches)
  OSError      -> CLI exit 3, HTTP 500  (filesystem trouble)
"""


class FreqAugError(Exception):
    """Base class for all library errors."""


class ConfigError(FreqAugError):
    """A parameter or configuration value is outside its allowed range."""


class DataError(FreqAugError):
    """Input data violates a precondition (shape, range, pairing)."""


class HomologyError(DataError):
    """Blending was attempted across samples with different parent images."""


EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_IO = 3


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, DataError):
        return EXIT_DATA
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_CONFIG
