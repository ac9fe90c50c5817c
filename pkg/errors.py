"""
Exception hierarchy for orthopersist.

Every failure carries an exit code and a human-readable detail, the same way a
route handler raises ``HTTPException(status_code=..., detail=...)``. The CLI
maps ``exit_code`` straight to the process status.
"""
from typing import Optional


class OrthoPersistError(Exception):
    exit_code: int = 1

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


# ── Domain errors (exit 2) ────────────────────────────────────────────────
class DomainError(OrthoPersistError, ValueError):
    exit_code = 2


class NonSquare(DomainError):
    pass


# ── Numerical failures (exit 3) ───────────────────────────────────────────
class NumericalError(OrthoPersistError, ArithmeticError):
    exit_code = 3


class NotPositiveDefinite(NumericalError):
    pass


class SpectralRadiusExceeded(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class PatternViolation(NumericalError):
    pass


class AccuracyBudget(NumericalError):
    pass


class BandwidthTooSmall(NumericalError):
    pass


class DegenerateLeadingCoefficient(NumericalError):
    pass


class DegenerateAbscissae(NumericalError):
    pass


# ── Usage (exit 64, EX_USAGE) ─────────────────────────────────────────────
class UsageError(OrthoPersistError):
    exit_code = 64
