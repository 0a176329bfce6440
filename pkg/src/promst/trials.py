"""Trial runner: roll a prompt through environment episodes and score it."""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .envs import EnvInstance, make_env
from .feedback import render_feedback
from .gateway import Backend, ChatRequest, TransportError, truncate_history
from .scoring import modified_score, progress_score
from .types import FeedbackItem, Prompt, PromptRecord, RunConfig

LOOP_REPEAT_LIMIT = 3  # same (state, action) pair seen this many times
STALL_LIMIT = 6  # consecutive steps with no state change


@dataclass
class TrialResult:
    """One episode of one prompt on one instance."""

    transcript: list = field(default_factory=list)  # (role, content) tuples
    final_score: float = 0.0
    steps_taken: int = 0
    terminal_error: Optional[str] = None
    collision_count: int = 0
    step_count: int = 0
    feedback: Optional[FeedbackItem] = None


def _factor_value(result: TrialResult, config: RunConfig) -> float:
    if config.preference_factor == "collision_count":
        return float(result.collision_count)
    return float(result.step_count)


def _score(result: TrialResult, outcome, config: RunConfig) -> float:
    base = progress_score(outcome.subgoals_done, outcome.subgoals_total)
    if config.score_mode == "progress":
        return base
    mode = "subtractive" if config.score_mode == "modified_subtractive" else "divisive"
    return modified_score(base, _factor_value(result, config), config.preference_ratio, mode)


def run_trial(
    prompt: Prompt,
    instance: EnvInstance,
    backend: Backend,
    config: RunConfig,
    templates,
    trial_index: int = 0,
) -> TrialResult:
    """Run one episode. Environment errors become data, never exceptions."""
    env = make_env(instance)
    outcome = env.reset()
    result = TrialResult()
    history: list = []
    seen_pairs: Counter = Counter()
    stalled = 0
    last_response = ""
    result.transcript.append(("user", outcome.observation))
    history.append(("user", outcome.observation))

    while True:
        if outcome.step_index >= config.max_rounds_per_trial:
            result.terminal_error = "query_limit"
            result.feedback = render_feedback(
                templates, instance.env_kind, "query_limit",
                response=last_response, state=outcome.env_feedback,
                limit=config.max_rounds_per_trial, source_trial=trial_index,
            )
            break
        request = ChatRequest(
            system=prompt.text,
            history=truncate_history(history, config.history_window),
            temperature=0.0,
        )
        reply = backend.complete(request)
        last_response = reply
        result.transcript.append(("assistant", reply))
        history.append(("assistant", reply))

        pre_hash = env.state_hash()
        outcome = env.step(reply)
        result.steps_taken = outcome.step_index
        result.step_count = outcome.step_index
        message = outcome.env_feedback or outcome.observation
        result.transcript.append(("user", message))
        history.append(("user", message))

        if outcome.error is not None:
            if outcome.error == "collision":
                result.collision_count += 1
            result.terminal_error = outcome.error
            result.feedback = render_feedback(
                templates, instance.env_kind, outcome.error,
                response=reply, action=reply, state=outcome.env_feedback,
                source_trial=trial_index,
            )
            break
        if outcome.done:
            break

        post_hash = env.state_hash()
        seen_pairs[(pre_hash, reply)] += 1
        stalled = stalled + 1 if post_hash == pre_hash else 0
        if seen_pairs[(pre_hash, reply)] >= LOOP_REPEAT_LIMIT or stalled >= STALL_LIMIT:
            result.terminal_error = "stuck_in_loop"
            result.feedback = render_feedback(
                templates, instance.env_kind, "stuck_in_loop",
                response=reply, action=reply, state=outcome.env_feedback,
                source_trial=trial_index,
            )
            break

    result.final_score = _score(result, outcome, config)
    return result


def evaluate_prompt(
    prompt: Prompt,
    instances,
    backend: Backend,
    config: RunConfig,
    templates,
    ancestors=(),
) -> PromptRecord:
    """Run `trials_per_prompt` episodes and fold them into a ledger record.

    Transport errors get two retries per trial before propagating.
    """
    scores = []
    feedback = []
    for i in range(config.trials_per_prompt):
        instance = instances[i % len(instances)]
        for attempt in range(3):
            try:
                result = run_trial(prompt, instance, backend, config, templates, trial_index=i)
                break
            except TransportError:
                if attempt == 2:
                    raise
        scores.append(result.final_score)
        if result.feedback is not None:
            feedback.append(result.feedback)
    mean = sum(scores) / len(scores)
    return PromptRecord(
        prompt=prompt,
        mean_score=mean,
        per_trial_scores=scores,
        feedback=feedback,
        ancestors=list(ancestors),
    )


def seeded_rng(config: RunConfig, *salt) -> random.Random:
    """Derive a deterministic RNG stream from the run seed plus a salt."""
    return random.Random("|".join(str(s) for s in (config.rng_seed,) + salt))
