"""Beam search over prompts with a learned filter gating evaluations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .generator import propose_one
from .ledger import PromptLedger
from .surrogate import InsufficientDataError, SurrogateEnsemble
from .trials import evaluate_prompt, seeded_rng
from .types import Prompt, RunConfig

IMPROVEMENT_EPS = 1e-9
CAP_MULTIPLIER = 3  # at most 3n filter checks per parent per level


@dataclass
class RunReport:
    best_prompt: str
    best_score: float
    per_level_max: list[float]
    prompts_evaluated: int
    calls_by_backend: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "best_prompt": self.best_prompt,
            "best_score": self.best_score,
            "per_level_max": self.per_level_max,
            "prompts_evaluated": self.prompts_evaluated,
            "calls_by_backend": self.calls_by_backend,
        }

    def render_table(self) -> str:
        lines = ["level  best_so_far", "-----  -----------"]
        for level, score in enumerate(self.per_level_max):
            lines.append(f"{level:>5}  {score:.4f}")
        lines.append(f"best score: {self.best_score:.4f}")
        return "\n".join(lines)


def _stagnated(per_level_max, patience: int) -> bool:
    """True once the cumulative best has been flat for `patience` levels."""
    if len(per_level_max) <= patience:
        return False
    recent = per_level_max[-(patience + 1):]
    return all(b - a <= IMPROVEMENT_EPS for a, b in zip(recent, recent[1:]))


def optimize(
    seed_prompt_text: str,
    instances,
    task_backend,
    prompt_backend,
    config: RunConfig,
    templates,
    sum_meta: str,
    gen_meta: str,
    ledger: Optional[PromptLedger] = None,
    member_factory=None,
) -> RunReport:
    """Level-wise beam search; appends every evaluated prompt to the ledger.

    With a non-empty ledger, levels already present are treated as complete
    and the search resumes at the next level.
    """
    if ledger is None:
        ledger = PromptLedger()
    ensemble_kwargs = {} if member_factory is None else {"member_factory": member_factory}
    ensemble = SurrogateEnsemble(**ensemble_kwargs)
    evaluated = 0

    if len(ledger) == 0:
        seed = Prompt(id=ledger.next_id(), text=seed_prompt_text, level=0)
        record = evaluate_prompt(seed, instances, task_backend, config, templates)
        ledger.record(record)
        evaluated += 1

    level = ledger.max_level() + 1
    while level < config.max_depth:
        per_level = ledger.per_level_max()
        if _stagnated(per_level, config.stagnation_patience):
            break
        n = config.expansion_first if level == 1 else config.expansion_rest
        use_filter = level >= config.surrogate_start and len(ledger) >= 10
        if use_filter:
            try:
                ensemble.fit(ledger.score_pairs(), seeded_rng(config, "ensemble", level))
            except InsufficientDataError:
                use_filter = False
        parents = ledger.top_k(config.beam_width)
        best_score = ledger.max_score()
        seen = ledger.texts()
        rng = seeded_rng(config, "propose", level)
        for parent in parents:
            accepted = 0
            attempts = 0
            while accepted < n and attempts < CAP_MULTIPLIER * n:
                text = propose_one(parent, prompt_backend, rng, sum_meta, gen_meta, seen)
                if text is None:
                    break
                attempts += 1
                if use_filter and not ensemble.accept(text, best_score, config.hyper_m):
                    continue
                prompt = Prompt(
                    id=ledger.next_id(),
                    text=text,
                    parent_id=parent.prompt.id,
                    level=level,
                )
                record = evaluate_prompt(
                    prompt, instances, task_backend, config, templates,
                    ancestors=list(parent.ancestors) + [parent.prompt.text],
                )
                ledger.record(record)
                evaluated += 1
                accepted += 1
        level += 1

    best = ledger.top_k(1)[0]
    return RunReport(
        best_prompt=best.prompt.text,
        best_score=best.mean_score,
        per_level_max=ledger.per_level_max(),
        prompts_evaluated=evaluated,
        calls_by_backend={
            "task": getattr(task_backend, "calls", 0),
            "prompt": getattr(prompt_backend, "calls", 0),
        },
    )


class PromptOptimizer:
    """Estimator-style wrapper: configure once, then fit on a seed prompt."""

    def __init__(self, config: Optional[RunConfig] = None, member_factory=None):
        self.config = config or RunConfig()
        self.member_factory = member_factory

    def fit(
        self,
        seed_prompt_text: str,
        instances,
        task_backend,
        prompt_backend,
        templates,
        sum_meta: str,
        gen_meta: str,
        ledger: Optional[PromptLedger] = None,
    ):
        self.ledger_ = ledger if ledger is not None else PromptLedger()
        self.report_ = optimize(
            seed_prompt_text,
            instances,
            task_backend,
            prompt_backend,
            self.config,
            templates,
            sum_meta,
            gen_meta,
            ledger=self.ledger_,
            member_factory=self.member_factory,
        )
        self.best_prompt_ = self.report_.best_prompt
        self.best_score_ = self.report_.best_score
        return self
