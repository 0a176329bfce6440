"""Task score functions: sub-goal progress ratio and preference-modified variants."""

from __future__ import annotations


def progress_score(subgoals_done: int, subgoals_total: int) -> float:
    """Fraction of completed sub-goals, in [0, 1]."""
    if subgoals_total <= 0:
        raise ValueError("subgoals_total must be positive")
    if subgoals_done < 0 or subgoals_done > subgoals_total:
        raise ValueError("subgoals_done must be in [0, subgoals_total]")
    return subgoals_done / subgoals_total


def modified_score(base: float, factor_value: float, ratio: float, mode: str) -> float:
    """Penalize a user-chosen factor (e.g. step count, collisions).

    subtractive: base - ratio * factor_value (may go below 0, not clamped)
    divisive:    base / (1 + ratio * factor_value)
    """
    if mode == "subtractive":
        return base - ratio * factor_value
    if mode == "divisive":
        return base / (1.0 + ratio * factor_value)
    raise ValueError(f"unknown mode: {mode!r}")
