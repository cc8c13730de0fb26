class ExportError(Exception):
    """Base class; InputError subclasses map to CLI exit code 2."""


class InputError(ExportError):
    pass


class MissingWeights(InputError):
    """No weights file and no explicit random-weights test mode."""


class InferenceFailure(ExportError):
    """One clip failed; its keys are reported as gaps, the job continues."""
