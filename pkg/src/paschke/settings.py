"""Numerical tolerances.

All rank, positivity and equality decisions go through :func:`tau`, which
scales the absolute tolerance by the size of the object being judged.
Overrides are scoped with :func:`tolerances` and are safe across threads.
"""
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    tau: float = 1e-9
    gap: float = 1e-6
    max_attempts: int = 10


_current = ContextVar("paschke_tolerances", default=Tolerances())


def current():
    return _current.get()


def tau(scale=1.0):
    """Tolerance for a decision about an object of spectral norm ``scale``."""
    return _current.get().tau * max(1.0, float(scale))


@contextmanager
def tolerances(**overrides):
    """Temporarily override tolerance fields, e.g. ``with tolerances(tau=1e-7)``."""
    token = _current.set(replace(_current.get(), **overrides))
    try:
        yield _current.get()
    finally:
        _current.reset(token)
