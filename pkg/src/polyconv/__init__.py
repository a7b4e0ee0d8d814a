"""Convergence analysis of switched linear systems over matrix polytopes.

Submodules are imported lazily so that the command-line entry point can
cap the BLAS thread pools before numpy first loads.
"""

from .errors import InputError, NumericalError

__version__ = "0.1.0"

_SUBMODULES = ("linalg", "feasibility", "family", "lti", "inclusion",
               "lasalle", "sim", "examples", "cli")

__all__ = ["InputError", "NumericalError", "__version__", *_SUBMODULES]


def __getattr__(name):
    if name in _SUBMODULES:
        import importlib
        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(__all__)
