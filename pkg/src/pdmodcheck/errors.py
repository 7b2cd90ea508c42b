"""Exception hierarchy shared by all stages of the checker."""


class CheckError(Exception):
    """Base class. ``stage`` names the pipeline step that failed, if known."""

    exit_code = 2

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class InputError(CheckError):
    """Malformed system file or formula."""


class FormulaSyntaxError(InputError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message, stage="parse")
        self.position = position


class UnknownAgent(InputError):
    pass


class UnknownProposition(InputError):
    pass


class NotOpen(InputError):
    """A (state, top symbol) pair is neither environment- nor system-controlled."""


class NotAtl(InputError):
    pass


class FragmentError(InputError):
    pass


class ResourceError(CheckError):
    """A configured size or count limit was hit. Never a verdict."""

    exit_code = 3

    def __init__(self, message, measured=None, stage=None):
        super().__init__(message, stage=stage)
        self.measured = measured


class ExplosionGuard(ResourceError):
    pass


class BudgetExceeded(ResourceError):
    pass


class SizeGuard(ResourceError):
    pass


class ResourceGuard(ResourceError):
    pass
