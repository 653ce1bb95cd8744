"""Exception hierarchy shared by every module of the toolkit."""

import json


class SeqCvxError(Exception):
    """Base class for all toolkit errors."""


class InputError(SeqCvxError, ValueError):
    """Malformed arguments: wrong dimension, bad index, invalid option."""


class OracleError(SeqCvxError, ArithmeticError):
    """An oracle returned a non-finite value.

    Parameters
    ----------
    oracle : str
        Name of the offending oracle (``"f"``, ``"g[1]"``, ...).
    """

    def __init__(self, oracle, message):
        self.oracle = oracle
        super().__init__(f"oracle {oracle!r}: {message}")


class NonconvergenceError(SeqCvxError, RuntimeError):
    """An iterative solver hit its iteration cap.

    ``diagnostics`` holds the best residuals seen and, for subproblem
    solves, a JSON-serialisable dump of the subproblem (see :meth:`dump`).
    ``trace`` is filled in by outer drivers with the partial trace.
    """

    def __init__(self, message, diagnostics=None, trace=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
        self.trace = trace

    def dump(self, path):
        with open(path, "w") as fh:
            json.dump(self.diagnostics, fh, indent=2, default=_jsonable)


class SubproblemInfeasibleError(NonconvergenceError):
    """The convex model set looks empty: multipliers blew past their cap."""


def _jsonable(obj):
    try:
        return obj.tolist()
    except AttributeError:
        return repr(obj)
