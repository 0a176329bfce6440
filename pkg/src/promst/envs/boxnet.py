"""Cell-bound arms move colored boxes to matching targets.

Variant 1: boxes sit inside cells and hop to neighboring cells.
Variant 2: boxes sit on cell corners; a corner holds at most one box.
"""

from __future__ import annotations

import hashlib
import re

from .base import Environment, InstanceError, StepOutcome, register_env

COLORS = ["red", "blue", "yellow", "green", "purple", "orange"]

ACTION_RE = re.compile(
    r"Agent\[(?P<ax>\d+(?:\.\d+)?),\s*(?P<ay>\d+(?:\.\d+)?)\][^:]{0,10}:\s*['\"]?\s*"
    r"move\(\s*box_(?P<color>\w+)\s*,\s*"
    r"(?:target_(?P<tcolor>\w+)"
    r"|(?:square|position)\[(?P<dx>\d+(?:\.\d+)?),\s*(?P<dy>\d+(?:\.\d+)?)\])\s*\)",
    re.IGNORECASE,
)


def _cell_centers(rows, cols):
    return [(c + 0.5, r + 0.5) for r in range(rows) for c in range(cols)]


def generate_boxnet1(rng, params):
    rows = params.setdefault("rows", 2)
    cols = params.setdefault("cols", 3)
    n_boxes = params.setdefault("n_boxes", 3)
    if n_boxes > len(COLORS):
        raise InstanceError(f"at most {len(COLORS)} boxes supported")
    if rows < 1 or cols < 1 or n_boxes < 1:
        raise InstanceError("rows, cols, n_boxes must be >= 1")
    centers = _cell_centers(rows, cols)
    colors = COLORS[:n_boxes]
    return {
        "rows": rows,
        "cols": cols,
        "boxes": {c: list(rng.choice(centers)) for c in colors},
        "targets": {c: list(rng.choice(centers)) for c in colors},
    }


def generate_boxnet2(rng, params):
    rows = params.setdefault("rows", 2)
    cols = params.setdefault("cols", 3)
    n_boxes = params.setdefault("n_boxes", 3)
    if n_boxes > len(COLORS):
        raise InstanceError(f"at most {len(COLORS)} boxes supported")
    if rows < 1 or cols < 1 or n_boxes < 1:
        raise InstanceError("rows, cols, n_boxes must be >= 1")
    corners = [(float(x), float(y)) for x in range(cols + 1) for y in range(rows + 1)]
    if n_boxes > len(corners):
        raise InstanceError("more boxes than corners")
    picked = rng.sample(corners, n_boxes)
    colors = COLORS[:n_boxes]
    centers = _cell_centers(rows, cols)
    return {
        "rows": rows,
        "cols": cols,
        "boxes": {c: list(p) for c, p in zip(colors, picked)},
        "targets": {c: list(rng.choice(centers)) for c in colors},
    }


class _BoxNetBase(Environment):
    def _reset_state(self):
        state = self.instance.initial_state
        self.rows = state["rows"]
        self.cols = state["cols"]
        # color -> position, or None once delivered to its target.
        self.boxes = {c: tuple(p) for c, p in state["boxes"].items()}
        self.targets = {c: tuple(p) for c, p in state["targets"].items()}
        self.delivered: set[str] = set()

    def subgoals_done(self) -> int:
        return len(self.delivered)

    def subgoals_total(self) -> int:
        return len(self.targets)

    def state_hash(self) -> str:
        key = str(sorted((c, p) for c, p in self.boxes.items() if c not in self.delivered))
        return hashlib.sha1(key.encode()).hexdigest()

    def _agents(self):
        return _cell_centers(self.rows, self.cols)

    def _syntactic(self) -> StepOutcome:
        return StepOutcome(
            observation=self._observe(),
            env_feedback=(
                "Could not find any action of the form 'Agent[x, y]': "
                "'move(box_color, destination)' in the reply."
            ),
            error="syntactic",
        )


class BoxNet1(_BoxNetBase):
    kind = "boxnet1"

    def _observe(self) -> str:
        lines = [
            f"Grid of {self.rows}x{self.cols} cells; one arm per cell, named by the "
            "cell center, e.g. Agent[0.5, 0.5]. Arms only reach objects in their cell.",
        ]
        for color in sorted(self.boxes):
            if color in self.delivered:
                lines.append(f"box_{color}: delivered.")
            else:
                lines.append(
                    f"box_{color} in square{list(self.boxes[color])}; "
                    f"target_{color} in square{list(self.targets[color])}."
                )
        return "\n".join(lines)

    def _apply(self, action_text: str) -> StepOutcome:
        matches = list(ACTION_RE.finditer(action_text))
        if not matches:
            return self._syntactic()
        feedback = []
        agents_used = set()
        for m in matches:
            agent = (float(m.group("ax")), float(m.group("ay")))
            color = m.group("color").lower()
            label = f"Agent[{agent[0]}, {agent[1]}]"
            if agent not in self._agents():
                feedback.append(f"{label} does not exist; action skipped.")
                continue
            if agent in agents_used:
                feedback.append(f"{label} was already given an action; extra action skipped.")
                continue
            agents_used.add(agent)
            if color not in self.boxes or color in self.delivered:
                feedback.append(f"{label}: box_{color} is not available; action skipped.")
                continue
            if self.boxes[color] != agent:
                feedback.append(
                    f"{label}: box_{color} is not in this agent's cell; action skipped."
                )
                continue
            if m.group("tcolor") is not None:
                tcolor = m.group("tcolor").lower()
                if tcolor != color:
                    feedback.append(
                        f"{label}: box_{color} cannot go to target_{tcolor}; colors differ."
                    )
                    continue
                if self.targets[color] != agent:
                    feedback.append(
                        f"{label}: target_{color} is not in this agent's cell; action skipped."
                    )
                    continue
                self.delivered.add(color)
                feedback.append(f"{label}: box_{color} placed on target_{color}.")
            else:
                dest = (float(m.group("dx")), float(m.group("dy")))
                if dest not in self._agents():
                    feedback.append(f"{label}: square{list(dest)} does not exist; skipped.")
                    continue
                if abs(dest[0] - agent[0]) + abs(dest[1] - agent[1]) != 1.0:
                    feedback.append(
                        f"{label}: square{list(dest)} is not adjacent to this cell; skipped."
                    )
                    continue
                self.boxes[color] = dest
                feedback.append(f"{label}: box_{color} moved to square{list(dest)}.")
        return StepOutcome(observation="", env_feedback=" ".join(feedback))


class BoxNet2(_BoxNetBase):
    kind = "boxnet2"

    def _cell_corners(self, agent):
        cx, cy = agent
        return {
            (cx - 0.5, cy - 0.5),
            (cx + 0.5, cy - 0.5),
            (cx - 0.5, cy + 0.5),
            (cx + 0.5, cy + 0.5),
        }

    def _occupied_corners(self) -> set:
        return {
            p for c, p in self.boxes.items() if c not in self.delivered
        }

    def _observe(self) -> str:
        lines = [
            f"Grid of {self.rows}x{self.cols} cells; one arm per cell, named by the "
            "cell center, e.g. Agent[0.5, 0.5]. Boxes sit on cell corners; each "
            "corner holds at most one box.",
        ]
        for color in sorted(self.boxes):
            if color in self.delivered:
                lines.append(f"box_{color}: delivered.")
            else:
                lines.append(
                    f"box_{color} at position{list(self.boxes[color])}; "
                    f"target_{color} in square{list(self.targets[color])}."
                )
        return "\n".join(lines)

    def _collision(self, message: str) -> StepOutcome:
        return StepOutcome(
            observation=self._observe(), env_feedback=message, error="collision"
        )

    def _apply(self, action_text: str) -> StepOutcome:
        matches = list(ACTION_RE.finditer(action_text))
        if not matches:
            return self._syntactic()
        feedback = []
        agents_used = set()
        claimed: set = set()
        moves = []  # validated (color, dest|None) actions, applied atomically
        for m in matches:
            agent = (float(m.group("ax")), float(m.group("ay")))
            color = m.group("color").lower()
            label = f"Agent[{agent[0]}, {agent[1]}]"
            if agent not in self._agents() or agent in agents_used:
                feedback.append(f"{label}: invalid or duplicate agent; action skipped.")
                continue
            agents_used.add(agent)
            if color not in self.boxes or color in self.delivered:
                feedback.append(f"{label}: box_{color} is not available; action skipped.")
                continue
            if self.boxes[color] not in self._cell_corners(agent):
                feedback.append(
                    f"{label}: box_{color} is not on a corner of this agent's cell; skipped."
                )
                continue
            if m.group("tcolor") is not None:
                tcolor = m.group("tcolor").lower()
                if tcolor != color or self.targets[color] != agent:
                    feedback.append(
                        f"{label}: target_{tcolor} is not this box's target in this cell; skipped."
                    )
                    continue
                moves.append((color, None))
                feedback.append(f"{label}: box_{color} placed on target_{color}.")
            else:
                dest = (float(m.group("dx")), float(m.group("dy")))
                if dest not in self._cell_corners(agent):
                    feedback.append(
                        f"{label}: position{list(dest)} is not a corner of this cell; skipped."
                    )
                    continue
                moving = {c for c, _ in moves}
                occupied = {
                    p
                    for c, p in self.boxes.items()
                    if c not in self.delivered and c not in moving and c != color
                }
                if dest in claimed:
                    return self._collision(
                        f"{label}: two boxes were sent to corner {list(dest)} in one step."
                    )
                if dest in occupied:
                    return self._collision(
                        f"{label}: corner {list(dest)} already holds a box."
                    )
                claimed.add(dest)
                moves.append((color, dest))
                feedback.append(f"{label}: box_{color} moved to position{list(dest)}.")
        for color, dest in moves:
            if dest is None:
                self.delivered.add(color)
            else:
                self.boxes[color] = dest
        return StepOutcome(observation="", env_feedback=" ".join(feedback))


register_env("boxnet1", BoxNet1, generate_boxnet1)
register_env("boxnet2", BoxNet2, generate_boxnet2)
