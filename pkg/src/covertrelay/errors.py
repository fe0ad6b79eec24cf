"""Error types and the shared numeric clamping policy."""

from __future__ import annotations

__all__ = ["NumericError", "InfeasibleError", "clamp_unit_interval", "CLAMP_SLACK"]

# Closed-form probabilities may drift out of [0, 1] by float noise; anything
# beyond this slack signals a formula or precision bug, not rounding.
CLAMP_SLACK = 1e-9


class NumericError(ArithmeticError):
    """A numeric procedure failed to deliver its accuracy contract."""


class InfeasibleError(RuntimeError):
    """The constrained optimization problem has an empty feasible region."""

    def __init__(self, message: str, tightest_constraint: str | None = None):
        super().__init__(message)
        self.tightest_constraint = tightest_constraint


def clamp_unit_interval(value: float, what: str) -> float:
    """Clamp a probability-valued formula result to [0, 1].

    Values outside [-CLAMP_SLACK, 1 + CLAMP_SLACK] raise NumericError with
    the offending value so formula bugs are not silently absorbed.
    """
    if not (value == value):  # NaN
        raise NumericError(f"{what} evaluated to NaN")
    if value < -CLAMP_SLACK or value > 1.0 + CLAMP_SLACK:
        raise NumericError(f"{what} = {value!r} leaves [0, 1] by more than {CLAMP_SLACK}")
    return min(1.0, max(0.0, value))
