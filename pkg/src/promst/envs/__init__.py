"""Simulated multi-step environments and their instance generators."""

from . import blocksworld, boxlift, boxnet, gridworld, logistics, warehouse  # noqa: F401
from .base import (
    ENV_ERROR_VOCABULARY,
    ENV_KINDS,
    Environment,
    EnvInstance,
    InstanceError,
    StepOutcome,
    generate_instance,
    generate_instances,
    make_env,
    register_env,
)

__all__ = [
    "ENV_ERROR_VOCABULARY",
    "ENV_KINDS",
    "Environment",
    "EnvInstance",
    "InstanceError",
    "StepOutcome",
    "generate_instance",
    "generate_instances",
    "make_env",
    "register_env",
]
