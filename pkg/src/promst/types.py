"""Shared domain types: prompts, records, run configuration."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Optional

SCORE_MODES = ("progress", "modified_subtractive", "modified_divisive")
PREFERENCE_FACTORS = ("step_count", "collision_count")


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass(frozen=True)
class Prompt:
    """A task prompt plus its position in the search tree."""

    id: str
    text: str
    parent_id: Optional[str] = None
    level: int = 0

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("prompt text must be non-empty")
        if self.level < 0:
            raise ValueError("prompt level must be non-negative")


@dataclass
class FeedbackItem:
    """One classified error rendered through a feedback template."""

    error_type: str
    rendered_text: str
    source_trial: object = None


@dataclass
class PromptRecord:
    """A prompt together with its evaluation results and lineage."""

    prompt: Prompt
    mean_score: float
    per_trial_scores: list[float]
    feedback: list[FeedbackItem] = field(default_factory=list)
    ancestors: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.per_trial_scores:
            mean = sum(self.per_trial_scores) / len(self.per_trial_scores)
            if abs(self.mean_score - mean) > 1e-9:
                raise ValueError(
                    f"mean_score {self.mean_score} != mean(per_trial_scores) {mean}"
                )

    def to_json_dict(self) -> dict:
        return {
            "id": self.prompt.id,
            "parent_id": self.prompt.parent_id,
            "level": self.prompt.level,
            "text": self.prompt.text,
            "per_trial_scores": list(self.per_trial_scores),
            "mean_score": self.mean_score,
            "feedback": [
                {"type": f.error_type, "text": f.rendered_text} for f in self.feedback
            ],
            "ancestors": list(self.ancestors),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "PromptRecord":
        return cls(
            prompt=Prompt(
                id=d["id"],
                text=d["text"],
                parent_id=d.get("parent_id"),
                level=d["level"],
            ),
            mean_score=d["mean_score"],
            per_trial_scores=list(d["per_trial_scores"]),
            feedback=[
                FeedbackItem(error_type=f["type"], rendered_text=f["text"])
                for f in d.get("feedback", [])
            ],
            ancestors=list(d.get("ancestors", [])),
        )


@dataclass
class RunConfig:
    """Hyperparameters of one optimization run.

    Defaults follow the standard setup: beam width 5, 20 candidates per
    parent at the first level then 8, surrogate filtering from level 4,
    conservativeness 0.8, stop after 3 flat levels.
    """

    beam_width: int = 5
    expansion_first: int = 20
    expansion_rest: int = 8
    surrogate_start: int = 4
    hyper_m: float = 0.8
    max_depth: int = 10
    stagnation_patience: int = 3
    trials_per_prompt: int = 10
    max_rounds_per_trial: int = 30
    history_window: int = 8
    rng_seed: int = 0
    score_mode: str = "progress"
    preference_ratio: float = 0.0
    preference_factor: str = "step_count"

    def __post_init__(self):
        for name in (
            "beam_width",
            "expansion_first",
            "expansion_rest",
            "surrogate_start",
            "max_depth",
            "stagnation_patience",
            "trials_per_prompt",
            "max_rounds_per_trial",
            "history_window",
        ):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {value!r}")
        if self.score_mode not in SCORE_MODES:
            raise ConfigError(f"score_mode must be one of {SCORE_MODES}")
        if self.preference_factor not in PREFERENCE_FACTORS:
            raise ConfigError(f"preference_factor must be one of {PREFERENCE_FACTORS}")
        if self.preference_ratio < 0:
            raise ConfigError("preference_ratio must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)
