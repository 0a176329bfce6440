"""Multi-robot warehouse: agents ride tracks, pick boxes, pour them at targets.

Tracks are numbered rows 1..n_tracks; each track has columns 0..n_cols-1.
Column 0 of every track touches the shared target area. Boxes hang between
tracks at half-row coordinates (track +/- 0.5) and whole columns. Two agents
may never occupy the same (track, column) cell: that is a collision.
"""

from __future__ import annotations

import hashlib
import re

from .base import Environment, InstanceError, StepOutcome, register_env

ACTION_RE = re.compile(
    r"['\"]?(?P<agent>agent\d+)['\"]?\s*:\s*['\"]?\s*"
    r"(?P<cmd>move\s+left|move\s+right|move\s+to\s+target|move\s+to\s+track_\d+|"
    r"pick\s+box_\d+(?:\.\d+)?_\d+(?:\.\d+)?)",
    re.IGNORECASE,
)
BOX_RE = re.compile(r"box_(\d+(?:\.\d+)?)_(\d+(?:\.\d+)?)", re.IGNORECASE)
TRACK_RE = re.compile(r"track_(\d+)", re.IGNORECASE)


def generate_warehouse(rng, params):
    n_tracks = params.setdefault("n_tracks", 3)
    n_cols = params.setdefault("n_cols", 4)
    n_boxes = params.setdefault("n_boxes", 4)
    n_agents = params.setdefault("n_agents", 2)
    if n_tracks < 1 or n_cols < 2:
        raise InstanceError("need at least 1 track and 2 columns")
    if n_agents < 1 or n_agents > n_tracks:
        raise InstanceError("need 1..n_tracks agents")
    # Boxes sit between tracks (row t + 0.5 for t in 0..n_tracks) at columns >= 1.
    slots = [
        (t + 0.5, float(c)) for t in range(n_tracks + 1) for c in range(1, n_cols)
    ]
    if n_boxes > len(slots):
        raise InstanceError("more boxes than box slots")
    boxes = rng.sample(slots, n_boxes)
    agent_tracks = rng.sample(range(1, n_tracks + 1), n_agents)
    return {
        "n_tracks": n_tracks,
        "n_cols": n_cols,
        "boxes": [list(b) for b in boxes],
        "agents": {
            f"agent{i}": [t, n_cols - 1] for i, t in enumerate(sorted(agent_tracks))
        },
    }


class Warehouse(Environment):
    kind = "warehouse"

    def _reset_state(self):
        state = self.instance.initial_state
        self.n_tracks = state["n_tracks"]
        self.n_cols = state["n_cols"]
        self.boxes = {(r, c) for r, c in state["boxes"]}
        # name -> [track, col] with track 0 meaning "at the target area".
        self.agents = {a: tuple(p) for a, p in state["agents"].items()}
        self.carrying: dict[str, bool] = {a: False for a in self.agents}
        self.total_boxes = len(self.boxes)
        self.poured = 0

    def subgoals_done(self) -> int:
        return self.poured

    def subgoals_total(self) -> int:
        return self.total_boxes

    def state_hash(self) -> str:
        key = str((sorted(self.boxes), sorted(self.agents.items()),
                   sorted(self.carrying.items())))
        return hashlib.sha1(key.encode()).hexdigest()

    def _observe(self) -> str:
        lines = [
            f"Warehouse with tracks 1..{self.n_tracks}, columns 0..{self.n_cols - 1}. "
            "Column 0 of each track touches the target area.",
            "Remaining boxes (box_row_column, rows are halfway between tracks):",
        ]
        if self.boxes:
            lines.extend(
                f"  box_{r}_{c}" for r, c in sorted(self.boxes)
            )
        else:
            lines.append("  none")
        for name in sorted(self.agents):
            t, c = self.agents[name]
            where = "at the target area" if t == 0 else f"on track {t}, column {int(c)}"
            load = "carrying a box" if self.carrying[name] else "empty-handed"
            lines.append(f"{name}: {where}, {load}.")
        lines.append(f"Boxes poured so far: {self.poured}/{self.total_boxes}.")
        return "\n".join(lines)

    def _collision(self, message: str) -> StepOutcome:
        return StepOutcome(
            observation=self._observe(), env_feedback=message, error="collision"
        )

    def _reachable(self, track, col):
        """Box rows an agent at (track, col) can pick from."""
        return {(track - 0.5, float(col)), (track + 0.5, float(col))}

    def _apply(self, action_text: str) -> StepOutcome:
        matches = list(ACTION_RE.finditer(action_text))
        if not matches:
            return StepOutcome(
                observation=self._observe(),
                env_feedback=(
                    "Could not find any action of the form 'agentN': 'move left' / "
                    "'move right' / 'pick box_R_C' / 'move to target' / "
                    "'move to track_N' in the reply."
                ),
                error="syntactic",
            )
        feedback = []
        acted = set()
        for m in matches:
            name = m.group("agent").lower()
            cmd = re.sub(r"\s+", " ", m.group("cmd").lower())
            if name not in self.agents:
                feedback.append(f"{name} does not exist; action skipped.")
                continue
            if name in acted:
                feedback.append(f"{name} already acted this step; extra action skipped.")
                continue
            acted.add(name)
            track, col = self.agents[name]
            others = {p for a, p in self.agents.items() if a != name}
            if cmd in ("move left", "move right"):
                if track == 0:
                    feedback.append(f"{name} is at the target area and cannot {cmd}.")
                    continue
                new_col = col - 1 if cmd == "move left" else col + 1
                if not 0 <= new_col < self.n_cols:
                    feedback.append(f"{name} cannot {cmd}: end of track.")
                    continue
                if (track, new_col) in others:
                    return self._collision(
                        f"{name} moved into track {track}, column {new_col}, which is "
                        "occupied by another agent."
                    )
                self.agents[name] = (track, new_col)
                feedback.append(f"{name} moved to track {track}, column {new_col}.")
            elif cmd.startswith("pick"):
                bm = BOX_RE.search(cmd)
                r, c = float(bm.group(1)), float(bm.group(2))
                if track == 0:
                    feedback.append(f"{name} is at the target area and cannot pick.")
                    continue
                if self.carrying[name]:
                    feedback.append(f"{name} is already carrying a box.")
                    continue
                if (r, c) not in self.boxes:
                    feedback.append(f"box_{r}_{c} is not in the warehouse.")
                    continue
                if (r, c) not in self._reachable(track, col):
                    feedback.append(
                        f"{name} cannot reach box_{r}_{c} from track {track}, "
                        f"column {int(col)}."
                    )
                    continue
                self.boxes.discard((r, c))
                self.carrying[name] = True
                feedback.append(f"{name} picked box_{r}_{c}.")
            elif cmd == "move to target":
                if track == 0:
                    feedback.append(f"{name} is already at the target area.")
                    continue
                if col != 0:
                    feedback.append(
                        f"{name} must be at column 0 to move to the target "
                        f"(currently column {int(col)})."
                    )
                    continue
                self.agents[name] = (0, 0)
                if self.carrying[name]:
                    self.carrying[name] = False
                    self.poured += 1
                    feedback.append(f"{name} poured its box at the target area.")
                else:
                    feedback.append(f"{name} moved to the target area empty-handed.")
            elif cmd.startswith("move to track_"):
                n = int(TRACK_RE.search(cmd).group(1))
                if track != 0:
                    feedback.append(
                        f"{name} must be at the target area to move onto a track."
                    )
                    continue
                if not 1 <= n <= self.n_tracks:
                    feedback.append(f"track_{n} does not exist.")
                    continue
                if (n, 0) in others:
                    return self._collision(
                        f"{name} moved onto track {n}, column 0, which is occupied "
                        "by another agent."
                    )
                self.agents[name] = (n, 0)
                feedback.append(f"{name} moved to track {n}, column 0.")
        return StepOutcome(observation="", env_feedback=" ".join(feedback))


register_env("warehouse", Warehouse, generate_warehouse)
