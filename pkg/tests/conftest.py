"""Shared test fixtures: a scripted mock environment and rule backends.

The mock environment lets beam-search tests control scores exactly: the task
backend echoes the score token embedded in the system prompt, and the mock
environment sets its sub-goal progress from that token. Episodes never finish
(below score 1.0), so every trial ends in stuck_in_loop after three repeats,
which also exercises the feedback pipeline.
"""

import hashlib
import re

import pytest

from promst.envs.base import Environment, StepOutcome, register_env
from promst.gateway import RuleBackend

SCORE_RE = re.compile(r"score:(\d+(?:\.\d+)?)")
TOKEN_RE = re.compile(r"mock instance (\d+)")


def generate_mock(rng, params):
    return {"token": rng.randrange(2**31)}


class MockEnv(Environment):
    kind = "mockenv"

    def _reset_state(self):
        self.value = 0.0
        self.counter = 0

    def _observe(self):
        return f"mock instance {self.instance.initial_state['token']}"

    def _apply(self, action_text):
        m = SCORE_RE.search(action_text)
        if m:
            self.value = min(float(m.group(1)), 0.99)
        self.counter += 1
        return StepOutcome(
            observation="",
            env_feedback=(
                f"mock instance {self.instance.initial_state['token']} "
                f"step {self.counter}"
            ),
        )

    def subgoals_done(self):
        return int(round(self.value * 100))

    def subgoals_total(self):
        return 100

    def state_hash(self):
        return "mock-state"


register_env("mockenv", MockEnv, generate_mock)


def make_task_backend():
    """Replies with the system prompt's score token plus the instance token."""

    def rule(request):
        m = SCORE_RE.search(request.system)
        score = m.group(1) if m else "0.0"
        first_user = next((c for r, c in request.history if r == "user"), "")
        t = TOKEN_RE.search(first_user)
        token = t.group(1) if t else "?"
        return f"score:{score} #inst{token}"

    return RuleBackend(rule)


def make_prompt_backend(cap=0.3):
    """Summaries are canned; rewrites bump the score token by 0.1 up to `cap`."""

    def rule(request):
        query = request.history[0][1]
        if "based on the human feedback" in query:
            return "summary " + hashlib.sha1(query.encode()).hexdigest()[:10]
        m = SCORE_RE.search(query)
        parent = float(m.group(1)) if m else 0.0
        new = min(parent + 0.1, cap)
        tag = hashlib.sha1(query.encode()).hexdigest()[:10]
        return f"Mock task prompt. score:{new:.2f} tag:{tag}"

    return RuleBackend(rule)


class AcceptAllMember:
    """Stub ensemble member whose predictions always clear the gate."""

    def __init__(self):
        self.test_error = 0.0

    def fit_split(self, pairs, seed):
        return self

    def predict(self, texts):
        return [1.0] * len(texts)


class RejectAllMember:
    """Stub ensemble member whose predictions never clear the gate."""

    def __init__(self):
        self.test_error = 0.0

    def fit_split(self, pairs, seed):
        return self

    def predict(self, texts):
        return [0.0] * len(texts)


@pytest.fixture
def mock_instances():
    from promst.envs import generate_instances

    return generate_instances("mockenv", 0, 10)
