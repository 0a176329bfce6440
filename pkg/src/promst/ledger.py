"""Append-only JSONL ledger of all explored prompts."""

from __future__ import annotations

import json
import os
from typing import Optional

from .types import PromptRecord


class DuplicatePromptError(ValueError):
    """A record with this prompt id already exists."""


class EmptyLedgerError(LookupError):
    """Query on an empty ledger."""


class LedgerParseError(ValueError):
    """A ledger line could not be parsed."""

    def __init__(self, path: str, line_number: int, reason: str):
        super().__init__(f"{path}:{line_number}: {reason}")
        self.line_number = line_number


class PromptLedger:
    """All prompt trials of a run, optionally persisted as one JSON object per line.

    Mutation is single-writer: records are committed sequentially through
    :meth:`record`. With a path, every commit is flushed to disk so an
    interrupted run can be resumed by reloading the file.
    """

    def __init__(self, path: Optional[str] = None):
        self.path = path
        self._records: dict[str, PromptRecord] = {}
        self._order: list[str] = []
        if path and os.path.exists(path):
            self._load(path)

    def _load(self, path: str):
        with open(path, encoding="utf-8") as fh:
            for i, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = PromptRecord.from_json_dict(json.loads(line))
                except (json.JSONDecodeError, KeyError, ValueError) as exc:
                    raise LedgerParseError(path, i, str(exc)) from exc
                self._commit(record, persist=False)

    def _commit(self, record: PromptRecord, persist: bool):
        pid = record.prompt.id
        if pid in self._records:
            raise DuplicatePromptError(f"prompt id already recorded: {pid}")
        self._records[pid] = record
        self._order.append(pid)
        if persist and self.path:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record.to_json_dict(), ensure_ascii=False) + "\n")
                fh.flush()

    def record(self, record: PromptRecord):
        self._commit(record, persist=True)

    def get(self, prompt_id: str) -> PromptRecord:
        return self._records[prompt_id]

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, prompt_id: str) -> bool:
        return prompt_id in self._records

    def records(self) -> list[PromptRecord]:
        return [self._records[pid] for pid in self._order]

    def texts(self) -> set[str]:
        return {r.prompt.text for r in self._records.values()}

    def top_k(self, k: int) -> list[PromptRecord]:
        """The k highest-scoring records, ties broken by ascending prompt id."""
        if not self._records:
            raise EmptyLedgerError("ledger is empty")
        ranked = sorted(
            self._records.values(), key=lambda r: (-r.mean_score, r.prompt.id)
        )
        return ranked[:k]

    def max_score(self) -> float:
        if not self._records:
            raise EmptyLedgerError("ledger is empty")
        return max(r.mean_score for r in self._records.values())

    def score_pairs(self) -> list[tuple[str, float]]:
        """(prompt text, mean score) dataset for surrogate training."""
        return [(r.prompt.text, r.mean_score) for r in self.records()]

    def max_level(self) -> int:
        if not self._records:
            raise EmptyLedgerError("ledger is empty")
        return max(r.prompt.level for r in self._records.values())

    def per_level_max(self) -> list[float]:
        """Cumulative best score after each level, index = level."""
        if not self._records:
            return []
        by_level: dict[int, float] = {}
        for r in self._records.values():
            lvl = r.prompt.level
            by_level[lvl] = max(by_level.get(lvl, 0.0), r.mean_score)
        out = []
        best = float("-inf")
        for lvl in range(max(by_level) + 1):
            if lvl in by_level:
                best = max(best, by_level[lvl])
            out.append(best)
        return out

    def next_id(self) -> str:
        return f"p{len(self._records):05d}"
