"""Scripted optimal policies: BFS-derived action tapes for selected tasks.

Used as ground truth in tests: replaying a tape through the environment must
reach progress score 1.0 with no errors.
"""

from __future__ import annotations

from collections import deque

from .base import EnvInstance
from .blocksworld import _relations
from .gridworld import MOVES

_MOVE_NAMES = {
    (-1, 0): "Move up",
    (1, 0): "Move down",
    (0, -1): "Move left",
    (0, 1): "Move right",
}


def _shortest_path(rows, cols, obstacles, start, goal):
    """BFS move list from start to goal, or None if unreachable."""
    if start == goal:
        return []
    parents = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for dr, dc in MOVES.values():
            nxt = (cur[0] + dr, cur[1] + dc)
            if (
                0 <= nxt[0] < rows
                and 0 <= nxt[1] < cols
                and nxt not in obstacles
                and nxt not in parents
            ):
                parents[nxt] = cur
                if nxt == goal:
                    moves = []
                    while parents[nxt] is not None:
                        prev = parents[nxt]
                        moves.append(_MOVE_NAMES[(nxt[0] - prev[0], nxt[1] - prev[1])])
                        nxt = prev
                    return list(reversed(moves))
                queue.append(nxt)
    return None


def solve_gridworld(instance: EnvInstance) -> list[str]:
    """Action tape visiting every goal; index order for gridworld2."""
    state = instance.initial_state
    rows, cols = state["rows"], state["cols"]
    obstacles = {tuple(o) for o in state["obstacles"]}
    robot = tuple(state["robot"])
    goals = [tuple(g) for g in state["goals"]]
    if instance.env_kind == "gridworld1":
        # Nearest-first is fine: the score only needs every goal picked.
        order = []
        remaining = list(enumerate(goals))
        pos = robot
        while remaining:
            remaining.sort(key=lambda ig: abs(ig[1][0] - pos[0]) + abs(ig[1][1] - pos[1]))
            idx, g = remaining.pop(0)
            order.append((idx, g))
            pos = g
    else:
        order = list(enumerate(goals))
    tape = []
    pos = robot
    for _, goal in order:
        moves = _shortest_path(rows, cols, obstacles, pos, goal)
        if moves is None:
            raise ValueError(f"goal {goal} unreachable from {pos}")
        tape.extend("{%s}" % m for m in moves)
        tape.append("{Pick goal}")
        pos = goal
    return tape


def _bw_successors(stacks, holding):
    """Yield (action_text, new_stacks, new_holding) from a blocksworld state."""
    stacks = [list(s) for s in stacks]
    if holding is None:
        for i, stack in enumerate(stacks):
            top = stack[-1]
            rest = [tuple(s) for j, s in enumerate(stacks) if j != i]
            if len(stack) == 1:
                yield (f"pick up the {top} block", frozenset_stacks(rest), top)
            else:
                below = stack[-2]
                new = rest + [tuple(stack[:-1])]
                yield (
                    f"unstack the {top} block from on top of the {below} block",
                    frozenset_stacks(new),
                    top,
                )
    else:
        yield (
            f"put down the {holding} block",
            frozenset_stacks([tuple(s) for s in stacks] + [(holding,)]),
            None,
        )
        for i, stack in enumerate(stacks):
            target = stack[-1]
            new = [tuple(s) for j, s in enumerate(stacks) if j != i]
            new.append(tuple(stack) + (holding,))
            yield (
                f"stack the {holding} block on top of the {target} block",
                frozenset_stacks(new),
                None,
            )


def frozenset_stacks(stacks) -> frozenset:
    # Stacks are multisets in principle, but blocks are unique so a frozenset
    # of tuples is a faithful canonical form.
    return frozenset(tuple(s) for s in stacks)


def solve_blocksworld(instance: EnvInstance) -> list[str]:
    """Shortest action tape reaching all goal stacking relations."""
    state = instance.initial_state
    goal_relations = _relations(state["goal_stacks"])
    start = (frozenset_stacks(map(tuple, state["initial_stacks"])), None)

    def satisfied(stacks):
        return goal_relations <= _relations([list(s) for s in stacks])

    if satisfied(start[0]):
        return []
    parents = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for action, stacks, holding in _bw_successors(cur[0], cur[1]):
            nxt = (stacks, holding)
            if nxt in parents:
                continue
            parents[nxt] = (cur, action)
            if holding is None and satisfied(stacks):
                tape = []
                node = nxt
                while parents[node] is not None:
                    node, act = parents[node]
                    tape.append(act)
                return list(reversed(tape))
            queue.append(nxt)
    raise ValueError("no plan found")


def solve(instance: EnvInstance) -> list[str]:
    if instance.env_kind in ("gridworld1", "gridworld2"):
        return solve_gridworld(instance)
    if instance.env_kind == "blocksworld":
        return solve_blocksworld(instance)
    raise ValueError(f"no oracle for env_kind {instance.env_kind!r}")
