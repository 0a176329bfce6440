"""Grid navigation tasks: visit all goals (any order, or numbered order)."""

from __future__ import annotations

import hashlib
import re
from collections import deque

from .base import Environment, InstanceError, StepOutcome, register_env

ACTION_RE = re.compile(r"\{([^{}]+)\}")
MOVES = {
    "move up": (-1, 0),
    "move down": (1, 0),
    "move left": (0, -1),
    "move right": (0, 1),
}


def _bfs_reachable(rows, cols, obstacles, start):
    seen = {start}
    queue = deque([start])
    while queue:
        r, c = queue.popleft()
        for dr, dc in MOVES.values():
            nxt = (r + dr, c + dc)
            if (
                0 <= nxt[0] < rows
                and 0 <= nxt[1] < cols
                and nxt not in obstacles
                and nxt not in seen
            ):
                seen.add(nxt)
                queue.append(nxt)
    return seen


def generate_gridworld(rng, params):
    rows = params.setdefault("rows", 5)
    cols = params.setdefault("cols", 5)
    n_goals = params.setdefault("n_goals", 3)
    n_obstacles = params.setdefault("n_obstacles", 4)
    cells = [(r, c) for r in range(rows) for c in range(cols)]
    if n_goals + n_obstacles + 1 > len(cells):
        raise InstanceError(
            f"{rows}x{cols} grid cannot hold {n_goals} goals, "
            f"{n_obstacles} obstacles and the robot"
        )
    for _ in range(200):
        picked = rng.sample(cells, n_goals + n_obstacles + 1)
        robot = picked[0]
        goals = picked[1 : 1 + n_goals]
        obstacles = picked[1 + n_goals :]
        reachable = _bfs_reachable(rows, cols, set(obstacles), robot)
        if all(g in reachable for g in goals):
            return {
                "rows": rows,
                "cols": cols,
                "robot": list(robot),
                "goals": [list(g) for g in goals],
                "obstacles": sorted([list(o) for o in obstacles]),
            }
    raise InstanceError("could not place all goals reachably")


class Gridworld(Environment):
    """Visit every goal; obstacles and the grid edge are forbidden."""

    kind = "gridworld1"
    ordered = False

    def _reset_state(self):
        state = self.instance.initial_state
        self.rows = state["rows"]
        self.cols = state["cols"]
        self.robot = tuple(state["robot"])
        self.goals = {i: tuple(g) for i, g in enumerate(state["goals"])}
        self.obstacles = {tuple(o) for o in state["obstacles"]}
        self.picked: set[int] = set()

    def subgoals_done(self) -> int:
        return len(self.picked)

    def subgoals_total(self) -> int:
        return len(self.goals)

    def state_hash(self) -> str:
        key = f"{self.robot}|{sorted(self.picked)}"
        return hashlib.sha1(key.encode()).hexdigest()

    def _remaining(self) -> dict:
        return {i: p for i, p in self.goals.items() if i not in self.picked}

    def _observe(self) -> str:
        lines = [
            f"Grid of {self.rows} rows x {self.cols} columns. "
            "Coordinates are [row, column] with origin at the top left.",
            f"You are at {list(self.robot)}.",
        ]
        if self.ordered:
            goals = ", ".join(
                f"goal_{i} at {list(p)}" for i, p in sorted(self._remaining().items())
            )
            lines.append(f"Remaining goals (pick in index order): {goals}.")
            nxt = min(self._remaining())
            lines.append(f"The next goal to pick is goal_{nxt}.")
        else:
            goals = ", ".join(f"goal at {list(p)}" for _, p in sorted(self._remaining().items()))
            lines.append(f"Remaining goals: {goals}.")
        lines.append(
            "Obstacles at: " + ", ".join(str(list(o)) for o in sorted(self.obstacles)) + "."
        )
        return "\n".join(lines)

    def _apply(self, action_text: str) -> StepOutcome:
        match = ACTION_RE.search(action_text)
        action = match.group(1).strip().lower() if match else None
        if action in MOVES:
            dr, dc = MOVES[action]
            nxt = (self.robot[0] + dr, self.robot[1] + dc)
            if not (0 <= nxt[0] < self.rows and 0 <= nxt[1] < self.cols):
                return StepOutcome(
                    observation=self._observe(),
                    env_feedback=f"{action} from {list(self.robot)} leaves the grid.",
                    error="out_of_grid",
                )
            if nxt in self.obstacles:
                return StepOutcome(
                    observation=self._observe(),
                    env_feedback=f"{action} from {list(self.robot)} hits the obstacle at {list(nxt)}.",
                    error="collision",
                )
            self.robot = nxt
            return StepOutcome(
                observation="", env_feedback=f"You moved to {list(nxt)}."
            )
        if action == "pick goal":
            here = [i for i, p in self._remaining().items() if p == self.robot]
            if not here:
                return StepOutcome(
                    observation=self._observe(),
                    env_feedback=f"There is no remaining goal at {list(self.robot)}.",
                )
            goal_idx = here[0]
            if self.ordered and goal_idx != min(self._remaining()):
                return StepOutcome(
                    observation=self._observe(),
                    env_feedback=(
                        f"goal_{goal_idx} is not next in order; "
                        f"goal_{min(self._remaining())} must be picked first."
                    ),
                    error="wrong_order",
                )
            self.picked.add(goal_idx)
            return StepOutcome(
                observation="", env_feedback=f"Picked goal at {list(self.robot)}."
            )
        return StepOutcome(
            observation=self._observe(),
            env_feedback=(
                "Could not find a valid action in the reply. Use {} around exactly "
                "one of: Move up, Move down, Move left, Move right, Pick goal."
            ),
            error="syntactic",
        )


class OrderedGridworld(Gridworld):
    """Gridworld variant where goals must be picked in index order."""

    kind = "gridworld2"
    ordered = True


register_env("gridworld1", Gridworld, generate_gridworld)
register_env("gridworld2", OrderedGridworld, generate_gridworld)
