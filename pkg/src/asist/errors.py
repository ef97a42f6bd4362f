"""Exception hierarchy; each class carries the CLI exit code it maps to."""


class AsistError(Exception):
    exit_code = 1
    code = "E_INTERNAL"


class ParameterError(AsistError, ValueError):
    """A parameter set violates one of its invariants."""

    exit_code = 2
    code = "E_ARG"


class InvalidInputError(AsistError, ValueError):
    exit_code = 2
    code = "E_INPUT"


class FormatError(AsistError, ValueError):
    """A file on disk does not follow the expected layout."""

    exit_code = 3
    code = "E_FORMAT"


class MalformedTrackTableError(FormatError):
    code = "E_TRACKS"


class IncompatibleInputsError(InvalidInputError):
    """Two inputs that must agree in shape or frame count do not."""

    exit_code = 4
    code = "E_INCOMPATIBLE"
