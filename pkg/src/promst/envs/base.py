"""Environment base types: instances, step outcomes, registry."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Optional

ERROR_TAGS = (
    "syntactic",
    "invalid_action",
    "collision",
    "out_of_grid",
    "wrong_order",
)

# Error vocabulary each environment can emit from a single step. The trial
# runner adds stuck_in_loop and query_limit on top of these.
ENV_ERROR_VOCABULARY = {
    "gridworld1": ("syntactic", "collision", "out_of_grid"),
    "gridworld2": ("syntactic", "collision", "out_of_grid", "wrong_order"),
    "blocksworld": ("syntactic", "invalid_action"),
    "logistics": ("syntactic", "invalid_action"),
    "boxlift": ("syntactic",),
    "boxnet1": ("syntactic",),
    "boxnet2": ("syntactic", "collision"),
    "warehouse": ("syntactic", "collision"),
}

ENV_KINDS = tuple(ENV_ERROR_VOCABULARY)


class InstanceError(ValueError):
    """Malformed or infeasible environment instance."""


@dataclass(frozen=True)
class EnvInstance:
    """A seeded, serializable initial state of one environment."""

    env_kind: str
    seed: int
    size_params: dict
    initial_state: dict

    def to_json_dict(self) -> dict:
        return {
            "env_kind": self.env_kind,
            "seed": self.seed,
            "size_params": self.size_params,
            "initial_state": self.initial_state,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "EnvInstance":
        return cls(d["env_kind"], d["seed"], d["size_params"], d["initial_state"])


@dataclass
class StepOutcome:
    observation: str
    env_feedback: str = ""
    error: Optional[str] = None
    done: bool = False
    subgoals_done: int = 0
    subgoals_total: int = 1
    step_index: int = 0


class Environment:
    """One seeded episode. Subclasses implement reset/step over text actions."""

    kind: str = ""

    def __init__(self, instance: EnvInstance):
        if instance.env_kind != self.kind:
            raise InstanceError(
                f"instance kind {instance.env_kind!r} does not match {self.kind!r}"
            )
        self.instance = instance
        self.step_index = 0
        self.done = False

    # -- subclass API -------------------------------------------------
    def _reset_state(self):
        raise NotImplementedError

    def _observe(self) -> str:
        raise NotImplementedError

    def _apply(self, action_text: str) -> StepOutcome:
        raise NotImplementedError

    def subgoals_done(self) -> int:
        raise NotImplementedError

    def subgoals_total(self) -> int:
        raise NotImplementedError

    def state_hash(self) -> str:
        """Stable digest of the mutable state, for loop detection."""
        raise NotImplementedError

    # -- shared driver ------------------------------------------------
    def reset(self) -> StepOutcome:
        self._reset_state()
        self.step_index = 0
        self.done = False
        return StepOutcome(
            observation=self._observe(),
            subgoals_done=self.subgoals_done(),
            subgoals_total=self.subgoals_total(),
            step_index=0,
        )

    def step(self, action_text: str) -> StepOutcome:
        if self.done:
            raise RuntimeError("episode is done; no further steps accepted")
        outcome = self._apply(action_text)
        self.step_index += 1
        outcome.step_index = self.step_index
        outcome.subgoals_done = self.subgoals_done()
        outcome.subgoals_total = self.subgoals_total()
        if outcome.subgoals_done >= outcome.subgoals_total:
            outcome.done = True
        if outcome.error is None and not outcome.done:
            outcome.observation = self._observe()
        self.done = outcome.done or outcome.error is not None
        return outcome


_REGISTRY: dict[str, tuple[type, Callable]] = {}


def register_env(kind: str, env_cls: type, generator: Callable):
    """generator(rng, size_params) -> initial_state dict; raises InstanceError."""
    _REGISTRY[kind] = (env_cls, generator)


def env_kinds() -> list[str]:
    return sorted(_REGISTRY)


def make_env(instance: EnvInstance) -> Environment:
    if instance.env_kind not in _REGISTRY:
        raise InstanceError(f"unknown env_kind: {instance.env_kind!r}")
    env_cls, _ = _REGISTRY[instance.env_kind]
    return env_cls(instance)


def generate_instance(env_kind: str, seed: int, size_params: Optional[dict] = None) -> EnvInstance:
    if env_kind not in _REGISTRY:
        raise InstanceError(f"unknown env_kind: {env_kind!r}")
    _, generator = _REGISTRY[env_kind]
    rng = random.Random(seed)
    params = dict(size_params or {})
    state = generator(rng, params)
    return EnvInstance(env_kind=env_kind, seed=seed, size_params=params, initial_state=state)


def generate_instances(
    env_kind: str, seed: int, count: int, size_params: Optional[dict] = None
) -> list[EnvInstance]:
    """Deterministic instance suite: same inputs give identical instances."""
    if count < 1:
        raise ValueError("count must be >= 1")
    root = random.Random(seed)
    sub_seeds = [root.randrange(2**31) for _ in range(count)]
    return [generate_instance(env_kind, s, size_params) for s in sub_seeds]
