"""Error taxonomy shared by the library and the CLI.

InputError covers anything wrong with what the caller handed us (shapes,
parse failures, out-of-range parameters, capability caps); NumericalError
covers breakdowns of otherwise well-posed computations (non-finite values,
factorization failures, iteration caps in exact-arithmetic-safe routines).
The CLI maps InputError to exit code 1 and NumericalError to exit code 2.
"""


class InputError(ValueError):
    """Caller-supplied data is invalid or outside supported limits."""


class CapabilityError(InputError):
    """Problem exceeds an implementation cap (e.g. SDP unknown count)."""


class NumericalError(RuntimeError):
    """A numerical routine failed on well-formed input."""
