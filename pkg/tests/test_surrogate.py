import random

import numpy as np
import pytest

from promst.surrogate import (
    BuiltinMember,
    InsufficientDataError,
    PredictorError,
    SurrogateEnsemble,
    split_pairs,
)


def synthetic_pairs(n, seed=0):
    rng = random.Random(seed)
    vocab = ["plan", "move", "grid", "robot", "task", "step", "goal", "check"]
    pairs = []
    for _ in range(n):
        n_key = rng.randint(0, 20)
        words = ["careful"] * n_key + [rng.choice(vocab) for _ in range(40 - n_key)]
        rng.shuffle(words)
        pairs.append((" ".join(words), min(1.0, n_key / 20)))
    return pairs


def test_split_is_deterministic_and_four_to_one():
    pairs = synthetic_pairs(50)
    train_a, test_a = split_pairs(pairs, 7)
    train_b, test_b = split_pairs(pairs, 7)
    assert train_a == train_b and test_a == test_b
    assert len(train_a) == 40 and len(test_a) == 10
    train_c, _ = split_pairs(pairs, 8)
    assert train_c != train_a  # different seed, different split


def test_split_keeps_a_test_pair():
    pairs = synthetic_pairs(10)
    train, test = split_pairs(pairs, 0)
    assert len(test) >= 1


def test_member_records_heldout_error():
    member = BuiltinMember().fit_split(synthetic_pairs(100), 0)
    assert member.test_error is not None
    assert 0.0 <= member.test_error < 0.1


def test_predictions_clamped():
    member = BuiltinMember().fit_split(synthetic_pairs(100), 0)
    preds = member.predict(["careful " * 200, "plan move grid"])
    assert np.all(preds >= 0.0) and np.all(preds <= 1.0)


def test_ensemble_needs_ten_pairs():
    with pytest.raises(InsufficientDataError):
        SurrogateEnsemble().fit(synthetic_pairs(9), random.Random(0))
    SurrogateEnsemble().fit(synthetic_pairs(10), random.Random(0))


def test_ensemble_has_five_members():
    ensemble = SurrogateEnsemble().fit(synthetic_pairs(60), random.Random(0))
    assert len(ensemble.members) == 5


def test_predict_stats_population_variance():
    class Fixed:
        def __init__(self, value):
            self.value = value
            self.test_error = 0.05

        def fit_split(self, pairs, seed):
            return self

        def predict(self, texts):
            return [self.value] * len(texts)

    values = [0.2, 0.4, 0.6, 0.8, 1.0]
    ensemble = SurrogateEnsemble()
    ensemble.members = [Fixed(v) for v in values]
    stats = ensemble.predict_stats("anything")
    assert stats.mean == pytest.approx(np.mean(values))
    assert stats.variance == pytest.approx(np.var(values))  # population, not sample
    assert stats.mean_test_error == pytest.approx(0.05)


def test_accept_threshold_boundary():
    class Fixed:
        test_error = 0.0

        def fit_split(self, pairs, seed):
            return self

        def predict(self, texts):
            return [0.4] * len(texts)

    ensemble = SurrogateEnsemble()
    ensemble.members = [Fixed() for _ in range(5)]
    # mean 0.4, var 0, err 0: accepted exactly at 0.4 >= hyper_m * best
    assert ensemble.accept("t", best_score=0.5, hyper_m=0.8)
    assert not ensemble.accept("t", best_score=0.5001, hyper_m=0.8)


def test_external_member_round_trip(tmp_path):
    import sys
    import textwrap

    script = tmp_path / "predictor.py"
    script.write_text(textwrap.dedent("""
        import json, sys
        mean = 0.0
        for line in sys.stdin:
            req = json.loads(line)
            if req["op"] == "fit":
                scores = [s for _, s in req["pairs"]]
                mean = sum(scores) / len(scores)
                print(json.dumps({"ok": True, "values": [0.25]}))
            elif req["op"] == "predict":
                print(json.dumps({"ok": True, "values": [mean] * len(req["texts"])}))
            else:
                print(json.dumps({"ok": True, "values": [0.25]}))
            sys.stdout.flush()
    """))
    from promst.surrogate import ExternalMember

    member = ExternalMember([sys.executable, str(script)])
    member.fit_split([("a", 0.2), ("b", 0.4)], seed=1)
    assert member.test_error == 0.25
    preds = member.predict(["x", "y"])
    assert list(preds) == [pytest.approx(0.3), pytest.approx(0.3)]
    member.close()


def test_external_member_error_response(tmp_path):
    import sys
    import textwrap

    script = tmp_path / "predictor.py"
    script.write_text(textwrap.dedent("""
        import json, sys
        for line in sys.stdin:
            print(json.dumps({"ok": False, "error": "boom"}))
            sys.stdout.flush()
    """))
    from promst.surrogate import ExternalMember

    member = ExternalMember([sys.executable, str(script)])
    with pytest.raises(PredictorError):
        member.fit_split([("a", 0.2)], seed=0)
    member.close()
