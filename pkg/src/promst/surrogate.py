"""Learned score filter: an ensemble of text regressors gates costly evaluations."""

from __future__ import annotations

import json
import random
import subprocess
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.feature_extraction.text import HashingVectorizer
from sklearn.linear_model import Ridge

ENSEMBLE_SIZE = 5
MIN_PAIRS = 10
TRAIN_FRACTION = 0.8


class InsufficientDataError(ValueError):
    """Fewer than MIN_PAIRS (prompt, score) pairs available."""


class PredictorError(RuntimeError):
    """An external predictor process misbehaved."""


class TextScoreRegressor(BaseEstimator, RegressorMixin):
    """Hashed word n-gram features with ridge regression; predictions clamped to [0, 1]."""

    def __init__(self, n_features: int = 2**16, alpha: float = 0.01):
        self.n_features = n_features
        self.alpha = alpha

    def fit(self, X, y):
        self.vectorizer_ = HashingVectorizer(
            n_features=self.n_features,
            ngram_range=(1, 2),
            norm="l1",
            alternate_sign=False,
        )
        self.model_ = Ridge(alpha=self.alpha)
        self.model_.fit(self.vectorizer_.transform(X), np.asarray(y, dtype=float))
        return self

    def predict(self, X):
        raw = self.model_.predict(self.vectorizer_.transform(X))
        return np.clip(raw, 0.0, 1.0)


def split_pairs(pairs, seed: int):
    """Deterministic 4:1 shuffle split; the test side always gets >= 1 pair."""
    order = list(range(len(pairs)))
    random.Random(seed).shuffle(order)
    n_train = min(len(pairs) - 1, max(1, int(round(len(pairs) * TRAIN_FRACTION))))
    train = [pairs[i] for i in order[:n_train]]
    test = [pairs[i] for i in order[n_train:]]
    return train, test


class BuiltinMember:
    """One ensemble member backed by the in-process regressor."""

    def __init__(self):
        self.model = TextScoreRegressor()
        self.test_error: Optional[float] = None

    def fit_split(self, pairs, seed: int):
        train, test = split_pairs(pairs, seed)
        self.model.fit([t for t, _ in train], [s for _, s in train])
        predictions = self.model.predict([t for t, _ in test])
        actual = np.asarray([s for _, s in test], dtype=float)
        self.test_error = float(np.mean(np.abs(predictions - actual)))
        return self

    def predict(self, texts):
        return np.clip(self.model.predict(list(texts)), 0.0, 1.0)


class ExternalMember:
    """Ensemble member backed by a child process speaking newline JSON on stdio.

    Requests: {"op": "fit", "pairs": [[text, score], ...], "seed": int}
              {"op": "predict", "texts": [...]}
              {"op": "test_error"}
    Responses: {"ok": true, "values": [...]} or {"ok": false, "error": "..."}
    """

    FIT_TIMEOUT = 300.0
    PREDICT_TIMEOUT = 30.0

    def __init__(self, command):
        self.command = list(command)
        self.process = None
        self.test_error: Optional[float] = None

    def _ensure_process(self):
        if self.process is None or self.process.poll() is not None:
            self.process = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
            )

    def _call(self, request: dict, timeout: float) -> dict:
        import threading

        self._ensure_process()
        self.process.stdin.write(json.dumps(request) + "\n")
        self.process.stdin.flush()
        holder = {}

        def _read():
            holder["line"] = self.process.stdout.readline()

        reader = threading.Thread(target=_read, daemon=True)
        reader.start()
        reader.join(timeout)
        if reader.is_alive():
            self.process.kill()
            self.process = None
            raise PredictorError(f"external predictor timed out on {request['op']!r}")
        line = holder.get("line", "")
        if not line:
            raise PredictorError("external predictor closed its stdout")
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise PredictorError(f"bad response line: {line!r}") from exc
        if not response.get("ok"):
            raise PredictorError(str(response.get("error", "unknown predictor error")))
        return response

    def fit_split(self, pairs, seed: int):
        response = self._call(
            {"op": "fit", "pairs": [[t, s] for t, s in pairs], "seed": seed},
            self.FIT_TIMEOUT,
        )
        values = response.get("values") or []
        self.test_error = float(values[0]) if values else float(
            self._call({"op": "test_error"}, self.PREDICT_TIMEOUT)["values"][0]
        )
        return self

    def predict(self, texts):
        response = self._call({"op": "predict", "texts": list(texts)}, self.PREDICT_TIMEOUT)
        return np.clip(np.asarray(response["values"], dtype=float), 0.0, 1.0)

    def close(self):
        if self.process is not None and self.process.poll() is None:
            self.process.stdin.close()
            self.process.terminate()
        self.process = None


@dataclass
class PredictionStats:
    mean: float
    variance: float  # population variance across members
    mean_test_error: float


class SurrogateEnsemble:
    """Five regressors on random splits; gates candidates before evaluation.

    A candidate is kept when mean + variance + mean heldout error clears
    `hyper_m` times the best score seen so far, so an uncertain or sloppy
    ensemble filters less aggressively.
    """

    def __init__(self, member_factory=BuiltinMember, size: int = ENSEMBLE_SIZE):
        self.member_factory = member_factory
        self.size = size
        self.members: list = []

    @property
    def is_fitted(self) -> bool:
        return bool(self.members)

    def fit(self, pairs, rng: random.Random):
        if len(pairs) < MIN_PAIRS:
            raise InsufficientDataError(
                f"need at least {MIN_PAIRS} pairs, got {len(pairs)}"
            )
        self.members = []
        for _ in range(self.size):
            member = self.member_factory()
            member.fit_split(list(pairs), rng.randrange(2**31))
            self.members.append(member)
        return self

    def predict_stats(self, text: str) -> PredictionStats:
        if not self.is_fitted:
            raise RuntimeError("ensemble is not fitted")
        predictions = np.array([float(m.predict([text])[0]) for m in self.members])
        predictions = np.clip(predictions, 0.0, 1.0)
        return PredictionStats(
            mean=float(predictions.mean()),
            variance=float(predictions.var()),
            mean_test_error=float(np.mean([m.test_error for m in self.members])),
        )

    def accept(self, text: str, best_score: float, hyper_m: float) -> bool:
        stats = self.predict_stats(text)
        return stats.mean + stats.variance + stats.mean_test_error >= hyper_m * best_score

    def close(self):
        for member in self.members:
            close = getattr(member, "close", None)
            if close:
                close()
