"""Human-designed feedback templates: loading, validation, rendering, sampling."""

from __future__ import annotations

import json
import random
import string
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .envs import ENV_ERROR_VOCABULARY
from .types import FeedbackItem

RUNNER_ERRORS = ("stuck_in_loop", "query_limit")
ALLOWED_FIELDS = {"response", "action", "state", "limit"}


class TemplateError(ValueError):
    """Malformed or incomplete feedback template set."""


@dataclass(frozen=True)
class FeedbackTemplate:
    env_kind: str  # specific kind or "*" wildcard
    error_type: str
    template: str


def _template_fields(template: str) -> set:
    fields = set()
    for _, name, _, _ in string.Formatter().parse(template):
        if name is not None:
            fields.add(name)
    return fields


def load_templates(path=None) -> list[FeedbackTemplate]:
    """Load and validate a template set; defaults to the packaged one.

    Validation: every (env_kind, error_type) pair an environment or the trial
    runner can emit resolves to exactly one template, and every template
    mentions {response}.
    """
    if path is None:
        raw = resources.files("promst").joinpath("data/feedback_templates.json").read_text()
    else:
        raw = Path(path).read_text()
    try:
        entries = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise TemplateError(f"template file is not valid JSON: {exc}") from exc
    templates = []
    for i, entry in enumerate(entries):
        missing = {"env_kind", "error_type", "template"} - set(entry)
        if missing:
            raise TemplateError(f"template #{i} is missing fields: {sorted(missing)}")
        fields = _template_fields(entry["template"])
        if "response" not in fields:
            raise TemplateError(
                f"template #{i} ({entry['env_kind']}/{entry['error_type']}) "
                "does not mention {response}"
            )
        unknown = fields - ALLOWED_FIELDS
        if unknown:
            raise TemplateError(
                f"template #{i} uses unknown placeholders: {sorted(unknown)}"
            )
        templates.append(FeedbackTemplate(entry["env_kind"], entry["error_type"], entry["template"]))

    required = [
        (kind, err)
        for kind, errors in ENV_ERROR_VOCABULARY.items()
        for err in tuple(errors) + RUNNER_ERRORS
    ]
    for kind, err in required:
        hits = [
            t for t in templates
            if t.error_type == err and t.env_kind in (kind, "*")
        ]
        specific = [t for t in hits if t.env_kind == kind]
        if specific:
            hits = specific
        if not hits:
            raise TemplateError(f"no template covers ({kind}, {err})")
        if len(hits) > 1:
            raise TemplateError(f"multiple templates cover ({kind}, {err})")
    return templates


def find_template(templates, env_kind: str, error_type: str) -> FeedbackTemplate:
    specific = [
        t for t in templates if t.env_kind == env_kind and t.error_type == error_type
    ]
    if specific:
        return specific[0]
    generic = [
        t for t in templates if t.env_kind == "*" and t.error_type == error_type
    ]
    if generic:
        return generic[0]
    raise TemplateError(f"no template for ({env_kind}, {error_type})")


def render_feedback(
    templates,
    env_kind: str,
    error_type: str,
    response: str,
    action: str = "",
    state: str = "",
    limit: Optional[int] = None,
    source_trial: int = 0,
) -> FeedbackItem:
    template = find_template(templates, env_kind, error_type)
    text = template.template.format(
        response=response, action=action, state=state,
        limit="" if limit is None else limit,
    )
    return FeedbackItem(error_type=error_type, rendered_text=text, source_trial=source_trial)


def sample_feedback(items, rng: random.Random) -> list:
    """Draw min(10, len) items without replacement, preserving rng determinism."""
    if not items:
        return []
    return rng.sample(list(items), min(10, len(items)))


def group_by_type(items) -> dict:
    """Group feedback items by error type, in first-appearance order."""
    groups: dict[str, list] = {}
    for item in items:
        groups.setdefault(item.error_type, []).append(item)
    return groups
