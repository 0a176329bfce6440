"""Cooperative lifting: group agents so their capacity covers each box's weight."""

from __future__ import annotations

import hashlib
import re

from .base import Environment, InstanceError, StepOutcome, register_env

TOKEN_RE = re.compile(r"box\[(\d+(?:\.\d+)?)V\]|agent\[(\d+(?:\.\d+)?)W\]")


def generate_boxlift(rng, params):
    n_boxes = params.setdefault("n_boxes", 6)
    n_agents = params.setdefault("n_agents", 4)
    if n_boxes < 1 or n_agents < 1:
        raise InstanceError("n_boxes and n_agents must be >= 1")
    volumes = rng.sample([round(0.5 * i, 1) for i in range(2, 41)], n_boxes)
    # Hidden weight is volume times a bounded random factor; observations
    # expose only the volume.
    weights = [round(v * (1.0 + rng.uniform(-0.3, 0.3)), 3) for v in volumes]
    capacities = rng.sample([round(0.5 * i, 1) for i in range(1, 41)], n_agents)
    # Keep every box liftable by the full team.
    heaviest = max(weights)
    if sum(capacities) < heaviest:
        capacities[-1] = round(capacities[-1] + heaviest - sum(capacities) + 1.0, 1)
        while capacities[-1] in capacities[:-1]:
            capacities[-1] = round(capacities[-1] + 0.1, 1)
    return {
        "volumes": volumes,
        "weights": weights,
        "capacities": sorted(capacities),
    }


class BoxLift(Environment):
    kind = "boxlift"

    def _reset_state(self):
        state = self.instance.initial_state
        self.volumes = list(state["volumes"])
        self.weights = dict(zip(self.volumes, state["weights"]))
        self.capacities = list(state["capacities"])
        self.lifted: set[float] = set()

    def subgoals_done(self) -> int:
        return len(self.lifted)

    def subgoals_total(self) -> int:
        return len(self.volumes)

    def state_hash(self) -> str:
        return hashlib.sha1(str(sorted(self.lifted)).encode()).hexdigest()

    def _observe(self) -> str:
        left = [v for v in self.volumes if v not in self.lifted]
        return (
            "Boxes left to lift: "
            + ", ".join(f"box[{v}V]" for v in sorted(left))
            + ".\nLifting agents: "
            + ", ".join(f"agent[{c}W]" for c in self.capacities)
            + ".\nBox weights are hidden; they are roughly proportional to volume."
        )

    def _parse_plan(self, text: str):
        """box volume -> list of agent capacities, in order of appearance."""
        plan: dict[float, list[float]] = {}
        current = None
        found_box = False
        for match in TOKEN_RE.finditer(text):
            if match.group(1) is not None:
                current = float(match.group(1))
                plan.setdefault(current, [])
                found_box = True
            elif current is not None:
                plan[current].append(float(match.group(2)))
        if not found_box or not any(plan.values()):
            return None
        return plan

    def _apply(self, action_text: str) -> StepOutcome:
        plan = self._parse_plan(action_text)
        if plan is None:
            return StepOutcome(
                observation=self._observe(),
                env_feedback=(
                    "Could not find a lifting plan in the reply. Expected pairs "
                    "like 'box[3.0V]': 'agent[1.5W], agent[2.5W]'."
                ),
                error="syntactic",
            )
        feedback = []
        used: list[float] = []
        valid = True
        for vol, agents in plan.items():
            if vol not in self.volumes:
                feedback.append(f"box[{vol}V] does not exist.")
                valid = False
            elif vol in self.lifted:
                feedback.append(f"box[{vol}V] is already lifted.")
                valid = False
            for cap in agents:
                if cap not in self.capacities:
                    feedback.append(f"agent[{cap}W] does not exist.")
                    valid = False
                elif cap in used:
                    feedback.append(
                        f"agent[{cap}W] is assigned to more than one box in this step."
                    )
                    valid = False
                used.append(cap)
        if not valid:
            feedback.append("The whole plan was rejected; the state is unchanged.")
            return StepOutcome(
                observation=self._observe(), env_feedback=" ".join(feedback)
            )
        for vol, agents in plan.items():
            if not agents:
                continue
            total = sum(agents)
            if total >= self.weights[vol]:
                self.lifted.add(vol)
                feedback.append(f"box[{vol}V] was lifted.")
            else:
                feedback.append(
                    f"box[{vol}V] was NOT lifted; the assigned agents are too weak."
                )
        return StepOutcome(observation="", env_feedback=" ".join(feedback))


register_env("boxlift", BoxLift, generate_boxlift)
