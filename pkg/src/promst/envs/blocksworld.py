"""Block stacking: reach a goal configuration of on-top relations."""

from __future__ import annotations

import hashlib
import re

from .base import Environment, InstanceError, StepOutcome, register_env

BLOCK_NAMES = ["red", "blue", "green", "yellow", "orange", "purple", "cyan", "white"]

ACTION_RE = re.compile(
    r"(?:"
    r"unstack the (?P<u_b>\w+) block from on top of the (?P<u_t>\w+) block"
    r"|stack the (?P<s_b>\w+) block on top of the (?P<s_t>\w+) block"
    r"|pick up the (?P<p_b>\w+) block"
    r"|put down the (?P<d_b>\w+) block"
    r")",
    re.IGNORECASE,
)


def _random_stacks(rng, blocks):
    """Partition blocks into random stacks (bottom first)."""
    pool = list(blocks)
    rng.shuffle(pool)
    stacks = []
    while pool:
        height = rng.randint(1, len(pool))
        stacks.append(pool[:height])
        pool = pool[height:]
    return stacks


def _relations(stacks):
    rel = set()
    for stack in stacks:
        for below, above in zip(stack, stack[1:]):
            rel.add((above, below))
    return rel


def generate_blocksworld(rng, params):
    n_blocks = params.setdefault("n_blocks", 4)
    if n_blocks < 2 or n_blocks > len(BLOCK_NAMES):
        raise InstanceError(f"n_blocks must be in [2, {len(BLOCK_NAMES)}]")
    blocks = BLOCK_NAMES[:n_blocks]
    for _ in range(200):
        goal = _random_stacks(rng, blocks)
        if _relations(goal):
            break
    else:
        raise InstanceError("could not draw a goal with at least one stacking relation")
    for _ in range(200):
        initial = _random_stacks(rng, blocks)
        if not _relations(goal) <= _relations(initial):
            break
    else:
        raise InstanceError("could not draw an initial state distinct from the goal")
    return {
        "blocks": blocks,
        "initial_stacks": initial,
        "goal_stacks": goal,
    }


class Blocksworld(Environment):
    kind = "blocksworld"

    def _reset_state(self):
        state = self.instance.initial_state
        self.blocks = list(state["blocks"])
        self.stacks = [list(s) for s in state["initial_stacks"]]
        self.goal_relations = sorted(_relations(state["goal_stacks"]))
        self.holding = None

    def subgoals_done(self) -> int:
        current = _relations(self.stacks)
        return sum(1 for rel in self.goal_relations if rel in current)

    def subgoals_total(self) -> int:
        return len(self.goal_relations)

    def state_hash(self) -> str:
        key = f"{sorted(map(tuple, self.stacks))}|{self.holding}"
        return hashlib.sha1(key.encode()).hexdigest()

    def _clear(self, block) -> bool:
        return any(stack and stack[-1] == block for stack in self.stacks)

    def _on_table(self, block) -> bool:
        return any(stack and stack[0] == block for stack in self.stacks)

    def _observe(self) -> str:
        parts = []
        for stack in sorted(self.stacks):
            if len(stack) == 1:
                parts.append(f"the {stack[0]} block is on the table and clear")
            else:
                desc = f"the {stack[0]} block is on the table"
                for below, above in zip(stack, stack[1:]):
                    desc += f", the {above} block is on top of the {below} block"
                desc += f", the {stack[-1]} block is clear"
                parts.append(desc)
        hand = (
            f"You are holding the {self.holding} block."
            if self.holding
            else "Your hand is empty."
        )
        goal = "; ".join(
            f"the {above} block on top of the {below} block"
            for above, below in self.goal_relations
        )
        return (
            "Current state: " + "; ".join(parts) + f". {hand}\n"
            f"Goal: {goal}."
        )

    def _invalid(self, reason: str) -> StepOutcome:
        return StepOutcome(
            observation=self._observe(), env_feedback=reason, error="invalid_action"
        )

    def _pop(self, block):
        for stack in self.stacks:
            if stack and stack[-1] == block:
                stack.pop()
                if not stack:
                    self.stacks.remove(stack)
                return

    def _apply(self, action_text: str) -> StepOutcome:
        match = ACTION_RE.search(action_text)
        if not match:
            return StepOutcome(
                observation=self._observe(),
                env_feedback=(
                    "Could not find a valid block action in the reply. Expected one "
                    "of: pick up the <color> block, put down the <color> block, "
                    "stack the <color> block on top of the <color> block, unstack "
                    "the <color> block from on top of the <color> block."
                ),
                error="syntactic",
            )
        groups = {k: (v.lower() if v else None) for k, v in match.groupdict().items()}
        for name in [g for g in groups.values() if g]:
            if name not in self.blocks:
                return self._invalid(f"there is no {name} block in this task")

        if groups["p_b"]:
            block = groups["p_b"]
            if self.holding:
                return self._invalid(f"cannot pick up: already holding the {self.holding} block")
            if not self._clear(block):
                return self._invalid(f"the {block} block is not clear")
            if not self._on_table(block) or not any(
                s == [block] for s in self.stacks
            ):
                return self._invalid(
                    f"the {block} block is not alone on the table; unstack it instead"
                )
            self._pop(block)
            self.holding = block
            done_msg = f"You picked up the {block} block."
        elif groups["d_b"]:
            block = groups["d_b"]
            if self.holding != block:
                return self._invalid(f"you are not holding the {block} block")
            self.stacks.append([block])
            self.holding = None
            done_msg = f"You put down the {block} block."
        elif groups["s_b"]:
            block, target = groups["s_b"], groups["s_t"]
            if self.holding != block:
                return self._invalid(f"you are not holding the {block} block")
            if not self._clear(target):
                return self._invalid(f"the {target} block is not clear")
            for stack in self.stacks:
                if stack and stack[-1] == target:
                    stack.append(block)
                    break
            self.holding = None
            done_msg = f"You stacked the {block} block on top of the {target} block."
        else:
            block, target = groups["u_b"], groups["u_t"]
            if self.holding:
                return self._invalid(f"cannot unstack: already holding the {self.holding} block")
            on_target = any(
                stack[-1] == block and len(stack) >= 2 and stack[-2] == target
                for stack in self.stacks
                if stack
            )
            if not on_target:
                return self._invalid(
                    f"the {block} block is not on top of the {target} block"
                )
            if not self._clear(block):
                return self._invalid(f"the {block} block is not clear")
            self._pop(block)
            self.holding = block
            done_msg = f"You unstacked the {block} block from the {target} block."
        return StepOutcome(observation="", env_feedback=done_msg)


register_env("blocksworld", Blocksworld, generate_blocksworld)
