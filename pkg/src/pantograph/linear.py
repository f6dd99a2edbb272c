"""Series solution of the linear equation ``x' = lam x(q t), x(0) = x0``.

The fundamental solution ``phi`` (``phi(0) = 1``) has Taylor coefficients
``phi^(n)(0) = lam**n q**(n(n-1)/2)`` and its series converges for every
real ``t``.  It is kept independent of the stepper and used as its oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError

__all__ = ["LinearProblem", "phi_taylor_coefficient", "phi_series", "linear_solution"]

SERIES_TOL = 1e-15
MAX_TERMS = 500


@dataclass(frozen=True)
class LinearProblem:
    lam: float
    q: float
    x0: float

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValidationError(f"q must satisfy 0 < q < 1, got {self.q!r}")


def phi_taylor_coefficient(lam: float, q: float, n: int) -> float:
    """n-th derivative of ``phi`` at 0."""
    if n < 0:
        raise ValidationError("n must be nonnegative")
    return lam ** n * q ** (n * (n - 1) / 2)


def phi_series(lam: float, q: float, t: float, tol: float = SERIES_TOL) -> float:
    """Sum the series for ``phi(t)``.

    Terms follow ``term[n+1] = term[n] * q**n * lam * t / (n + 1)`` so nothing
    overflows or underflows prematurely.  Summation stops after two
    consecutive terms fall below ``tol * max(1, |partial sum|)``, or after
    500 terms.
    """
    if not tol > 0:
        raise ValidationError(f"tol must be positive, got {tol!r}")
    if not 0.0 < q < 1.0:
        raise ValidationError(f"q must satisfy 0 < q < 1, got {q!r}")
    z = lam * t
    terms = [1.0]
    term, q_pow, partial = 1.0, 1.0, 1.0
    small_run = 0
    for n in range(MAX_TERMS - 1):
        term = term * q_pow * z / (n + 1)
        q_pow *= q
        terms.append(term)
        partial += term
        if abs(term) <= tol * max(1.0, abs(partial)):
            small_run += 1
            if small_run == 2:
                break
        else:
            small_run = 0
    return math.fsum(terms)


def linear_solution(lp: LinearProblem, t: float, tol: float = SERIES_TOL) -> float:
    return lp.x0 * phi_series(lp.lam, lp.q, t, tol)
