"""Candidate prompt generation: sample feedback, summarize per error type, rewrite."""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Optional

from .feedback import group_by_type, sample_feedback
from .gateway import Backend, ChatRequest


def load_meta_prompt(name: str, path=None) -> str:
    """Load a meta-prompt; `name` is 'sum_meta' or 'gen_meta'."""
    if path is not None:
        return Path(path).read_text()
    return resources.files("promst").joinpath(f"data/{name}.txt").read_text()


def load_seed_prompt(env_kind: str, path=None) -> str:
    if path is not None:
        return Path(path).read_text()
    return resources.files("promst").joinpath(f"data/seed_prompts/{env_kind}.txt").read_text()


def _ask(backend: Backend, text: str) -> str:
    request = ChatRequest(system="", history=(("user", text),), temperature=0.0)
    return backend.complete(request).strip()


def _strip_wrapping(text: str) -> str:
    text = text.strip()
    if text.startswith("```") and text.endswith("```"):
        body = text[3:-3]
        # drop a language tag on the opening fence
        first, _, rest = body.partition("\n")
        text = rest.strip() if rest and len(first.split()) <= 1 else body.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        text = text[1:-1].strip()
    return text


def summarize_group(backend: Backend, sum_meta: str, current_prompt: str, items) -> str:
    """Summarize one error-type group of feedback; one retry on an empty reply."""
    rendered = "\n".join(item.rendered_text for item in items)
    query = sum_meta.format(current_prompt=current_prompt, feedback_type=rendered)
    for _ in range(2):
        reply = _ask(backend, query)
        if reply:
            return reply
    return ""


def generate_candidate(
    backend: Backend,
    gen_meta: str,
    parent_text: str,
    error_feedback: str,
    trajectory_prompts,
) -> str:
    trajectory = "\n".join(f"{i}. {t}" for i, t in enumerate(trajectory_prompts))
    query = gen_meta.format(
        prompt_task_explain=parent_text,
        error_feedback=error_feedback,
        trajectory_prompts=trajectory,
    )
    return _strip_wrapping(_ask(backend, query))


def propose_one(
    parent_record,
    backend: Backend,
    rng,
    sum_meta: str,
    gen_meta: str,
    seen: set,
) -> Optional[str]:
    """One generation pass: sample feedback, summarize per type, rewrite.

    Returns a new candidate text, with up to 3 inner retries against empty
    or already-seen generations; None if all retries fail.
    """
    parent_text = parent_record.prompt.text
    trajectory = list(parent_record.ancestors) + [parent_text]
    for _attempt in range(3):
        picked = sample_feedback(parent_record.feedback, rng)
        groups = group_by_type(picked)
        summaries = [
            summarize_group(backend, sum_meta, parent_text, items)
            for items in groups.values()
        ]
        error_feedback = "\n\n".join(s for s in summaries if s)
        text = generate_candidate(
            backend, gen_meta, parent_text, error_feedback, trajectory
        )
        if text and text not in seen:
            seen.add(text)
            return text
    return None


def propose(
    parent_record,
    n: int,
    backend: Backend,
    rng,
    sum_meta: str,
    gen_meta: str,
) -> list[str]:
    """Draw up to n distinct candidate texts from one parent record."""
    seen = {parent_record.prompt.text}
    candidates = []
    for _ in range(n):
        text = propose_one(parent_record, backend, rng, sum_meta, gen_meta, seen)
        if text is not None:
            candidates.append(text)
    return candidates
