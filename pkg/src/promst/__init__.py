"""Beam-search prompt optimization for LLM agents on multi-step tasks."""

from .ledger import PromptLedger
from .optimizer import PromptOptimizer, RunReport, optimize
from .surrogate import SurrogateEnsemble, TextScoreRegressor
from .types import FeedbackItem, Prompt, PromptRecord, RunConfig

__all__ = [
    "FeedbackItem",
    "Prompt",
    "PromptLedger",
    "PromptOptimizer",
    "PromptRecord",
    "RunConfig",
    "RunReport",
    "SurrogateEnsemble",
    "TextScoreRegressor",
    "optimize",
]

__version__ = "0.1.0"
