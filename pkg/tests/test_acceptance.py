"""Acceptance suite: one test per top-level criterion, each printing a
[PASS]/[FAIL] line with its name and time budget."""

import json
import os
import random
import time
from contextlib import contextmanager

import numpy as np
import pytest

from promst.envs import ENV_KINDS, generate_instance, generate_instances, make_env
from promst.envs.base import ENV_ERROR_VOCABULARY
from promst.envs.oracles import solve
from promst.feedback import load_templates
from promst.gateway import ScriptedBackend
from promst.generator import load_meta_prompt
from promst.ledger import PromptLedger
from promst.optimizer import optimize
from promst.scoring import modified_score, progress_score
from promst.surrogate import BuiltinMember, SurrogateEnsemble
from promst.trials import run_trial
from promst.types import Prompt, RunConfig

from conftest import (
    AcceptAllMember,
    RejectAllMember,
    make_prompt_backend,
    make_task_backend,
)

TEMPLATES = load_templates()
SUM_META = load_meta_prompt("sum_meta")
GEN_META = load_meta_prompt("gen_meta")


@contextmanager
def criterion(name, budget_seconds):
    start = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    elapsed = time.monotonic() - start
    if elapsed > budget_seconds:
        print(f"[FAIL] {name} (exceeded {budget_seconds}s: {elapsed:.1f}s)")
        raise AssertionError(f"{name} took {elapsed:.1f}s > {budget_seconds}s")
    print(f"[PASS] {name} ({elapsed:.1f}s)")


# ---------------------------------------------------------------- criterion 1

BLOCK_COLORS = ["red", "blue", "green", "yellow", "brown"]


def random_action(kind, rng, instance):
    garbage = ["", "hello there", "{}", "action: none", "move(box, nowhere)"]
    if rng.random() < 0.2:
        return rng.choice(garbage)
    if kind in ("gridworld1", "gridworld2"):
        return "{%s}" % rng.choice(
            ["Move up", "Move down", "Move left", "Move right", "Pick goal", "Jump"]
        )
    if kind == "blocksworld":
        a, b = rng.choice(BLOCK_COLORS), rng.choice(BLOCK_COLORS)
        return rng.choice([
            f"pick up the {a} block",
            f"put down the {a} block",
            f"stack the {a} block on top of the {b} block",
            f"unstack the {a} block from on top of the {b} block",
        ])
    if kind == "logistics":
        pkg = f"package{rng.randrange(4)}"
        veh = rng.choice(["truck0", "truck1", "airplane0", "bus9"])
        loc = f"city{rng.randrange(3)}_loc{rng.randrange(3)}"
        loc2 = f"city{rng.randrange(3)}_loc{rng.randrange(3)}"
        return rng.choice([
            f"load {pkg} into {veh} at {loc}",
            f"unload {pkg} from {veh} at {loc}",
            f"drive {veh} from {loc} to {loc2} in city{rng.randrange(3)}",
            f"fly airplane0 from {loc} to {loc2}",
        ])
    if kind == "boxlift":
        volumes = instance.initial_state["volumes"]
        caps = instance.initial_state["capacities"]
        n = rng.randint(1, 3)
        parts = []
        for _ in range(n):
            v = rng.choice(volumes + [99.5])
            agents = ", ".join(
                f"agent[{c}W]" for c in rng.sample(caps, rng.randint(1, len(caps)))
            )
            parts.append(f"'box[{v}V]':'{agents}'")
        return "{" + ", ".join(parts) + "}"
    if kind in ("boxnet1", "boxnet2"):
        rows = instance.initial_state["rows"]
        cols = instance.initial_state["cols"]
        color = rng.choice(list(instance.initial_state["boxes"]) + ["pink"])
        ax = rng.randrange(cols) + 0.5
        ay = rng.randrange(rows) + 0.5
        if rng.random() < 0.4:
            dest = f"target_{rng.choice(list(instance.initial_state['boxes']))}"
        elif kind == "boxnet1":
            dest = f"square[{rng.randrange(cols) + 0.5}, {rng.randrange(rows) + 0.5}]"
        else:
            dest = f"position[{float(rng.randrange(cols + 1))}, {float(rng.randrange(rows + 1))}]"
        return f"{{'Agent[{ax}, {ay}]':'move(box_{color}, {dest})'}}"
    # warehouse
    state = instance.initial_state
    agent = f"agent{rng.randrange(len(state['agents']) + 1)}"
    box = rng.choice(state["boxes"] + [[9.5, 9.0]])
    cmd = rng.choice([
        "move left", "move right", "move to target",
        f"move to track_{rng.randrange(4)}", f"pick box_{box[0]}_{box[1]}",
    ])
    return f"{{'{agent}':'{cmd}'}}"


def check_invariants(kind, env, outcome):
    assert 0 <= outcome.subgoals_done <= outcome.subgoals_total
    assert outcome.error is None or outcome.error in ENV_ERROR_VOCABULARY[kind]
    if outcome.error is not None:
        assert env.done
    if kind in ("gridworld1", "gridworld2"):
        r, c = env.robot
        assert 0 <= r < env.rows and 0 <= c < env.cols
        assert (r, c) not in env.obstacles
    elif kind == "blocksworld":
        placed = [b for stack in env.stacks for b in stack]
        if env.holding:
            placed.append(env.holding)
        assert sorted(placed) == sorted(env.blocks)
    elif kind == "logistics":
        for pkg, at in env.packages.items():
            assert at.startswith("in:") or at.startswith("city")
        for truck, loc in env.trucks.items():
            assert loc.startswith("city" + truck[len("truck"):] + "_")
    elif kind == "boxlift":
        assert env.lifted <= set(env.volumes)
    elif kind == "boxnet2":
        corners = [p for c, p in env.boxes.items() if c not in env.delivered]
        assert len(corners) == len(set(corners)), "two boxes share a corner"
    elif kind == "warehouse":
        cells = list(env.agents.values())
        on_track = [p for p in cells if p[0] != 0]
        assert len(on_track) == len(set(on_track)), "two agents share a cell"


def test_criterion_1_environment_legality():
    with criterion("environment legality: 10^4 randomized steps, zero violations", 60):
        rng = random.Random(2024)
        checks = 0
        episode = 0
        while checks < 10_000:
            for kind in ENV_KINDS:
                instance = generate_instance(kind, rng.randrange(2**31))
                env = make_env(instance)
                env.reset()
                for _ in range(10):
                    outcome = env.step(random_action(kind, rng, instance))
                    check_invariants(kind, env, outcome)
                    checks += 1
                    if env.done:
                        break
            episode += 1
        assert checks >= 10_000


# ---------------------------------------------------------------- criterion 2

def test_criterion_2_oracle_agents_reach_full_score():
    with criterion("oracle agents score 1.0 on gridworld1/2 and blocksworld", 10):
        config = RunConfig(max_rounds_per_trial=200)
        for kind in ("gridworld1", "gridworld2", "blocksworld"):
            for seed in range(5):
                instance = generate_instance(kind, seed)
                tape = solve(instance)
                result = run_trial(
                    Prompt(id="p00000", text="oracle"), instance,
                    ScriptedBackend(tape), config, TEMPLATES,
                )
                assert result.final_score == 1.0, (kind, seed, result.terminal_error)
                assert result.terminal_error is None


# ---------------------------------------------------------------- criterion 3

class _StubMember:
    def __init__(self, prediction, test_error):
        self.prediction = prediction
        self.test_error = test_error

    def fit_split(self, pairs, seed):
        return self

    def predict(self, texts):
        return [self.prediction] * len(texts)


def _oracle_accept(raw_predictions, test_errors, best_score, hyper_m):
    clamped = [min(max(p, 0.0), 1.0) for p in raw_predictions]
    mean = sum(clamped) / len(clamped)
    var = sum((p - mean) ** 2 for p in clamped) / len(clamped)
    err = sum(test_errors) / len(test_errors)
    return mean + var + err >= hyper_m * best_score


def test_criterion_3_filter_rule_matches_oracle():
    with criterion("filter acceptance rule: 1000 random ensembles match oracle", 5):
        rng = random.Random(99)
        for _ in range(1000):
            preds = [rng.uniform(-0.5, 1.5) for _ in range(5)]
            errs = [rng.uniform(0.0, 0.3) for _ in range(5)]
            best = rng.uniform(0.0, 1.0)
            hyper = rng.uniform(0.0, 1.0)
            ensemble = SurrogateEnsemble()
            ensemble.members = [_StubMember(p, e) for p, e in zip(preds, errs)]
            got = ensemble.accept("text", best, hyper)
            assert got == _oracle_accept(preds, errs, best, hyper)
            # monotone: a laxer threshold never rejects an accepted candidate
            if got:
                assert ensemble.accept("text", best, hyper * 0.5)
            # conservative: more ensemble disagreement or error never hurts
            if got:
                worse = SurrogateEnsemble()
                worse.members = [_StubMember(p, e + 0.1) for p, e in zip(preds, errs)]
                assert worse.accept("text", best, hyper)


# ---------------------------------------------------------------- criterion 4

SEED_TEXT = "Mock task prompt. score:0.0 tag:seed"


def _run_mock(config, ledger, cap, member_factory):
    instances = generate_instances("mockenv", config.rng_seed, config.trials_per_prompt)
    task = make_task_backend()
    prompt = make_prompt_backend(cap=cap)
    report = optimize(
        SEED_TEXT, instances, task, prompt, config, TEMPLATES, SUM_META, GEN_META,
        ledger=ledger, member_factory=member_factory,
    )
    return report, task, prompt


def test_criterion_4_beam_search_hand_trace():
    with criterion("beam search trace: expansions, top-k, filter boundary, cap, stagnation", 30):
        class CountingAcceptAll:
            instantiated = 0

            def __call__(self):
                CountingAcceptAll.instantiated += 1
                return AcceptAllMember()

        # defaults: k=5, first expansion 20 then 8, filter from level 4,
        # stop after 3 flat levels
        config = RunConfig()
        ledger = PromptLedger()
        _run_mock(config, ledger, cap=0.3, member_factory=CountingAcceptAll())

        by_level = {}
        for record in ledger.records():
            by_level.setdefault(record.prompt.level, []).append(record)
        # 20 first-level expansions, then 8 per parent x 5 parents
        assert len(by_level[0]) == 1
        assert len(by_level[1]) == 20
        for level in (2, 3, 4, 5, 6):
            assert len(by_level[level]) == 40
        # scores climb by 0.1 per level and cap at 0.3 from level 3 on
        best = ledger.per_level_max()
        assert best == pytest.approx([0.0, 0.1, 0.2, 0.3, 0.3, 0.3, 0.3])
        # stagnation: exactly 3 flat levels after the cap, then stop
        assert ledger.max_level() == 6

        # parents of each level are the global top-5 of everything before it
        for level in range(2, 7):
            earlier = [r for r in ledger.records() if r.prompt.level < level]
            expected = [
                r.prompt.id
                for r in sorted(earlier, key=lambda r: (-r.mean_score, r.prompt.id))[:5]
            ]
            used = {r.prompt.parent_id for r in by_level[level]}
            assert used == set(expected)

        # the ensemble is only built at levels >= surrogate_start (4, 5, 6)
        assert CountingAcceptAll.instantiated == 3 * 5

        # filter veto: candidates are generated up to the 3n cap but never run
        config_short = RunConfig(max_depth=4)
        ledger_a = PromptLedger()
        _, _, prompt_a = _run_mock(config_short, ledger_a, 0.9, RejectAllMember)
        config_long = RunConfig(max_depth=6)
        ledger_b = PromptLedger()
        _, _, prompt_b = _run_mock(config_long, ledger_b, 0.9, RejectAllMember)
        assert ledger_b.max_level() == 3  # nothing evaluated at levels 4, 5
        assert len(ledger_b) == len(ledger_a) == 1 + 20 + 40 + 40
        # levels 4 and 5: 5 parents x (3 x 8) capped attempts x 2 calls each
        assert prompt_b.calls - prompt_a.calls == 2 * 5 * 24 * 2


# ---------------------------------------------------------------- criterion 5

def test_criterion_5_determinism_and_resume(tmp_path):
    with criterion("determinism: byte-identical ledgers; resume equals uninterrupted", 60):
        config6 = RunConfig(max_depth=6)

        path_a = tmp_path / "a.jsonl"
        path_b = tmp_path / "b.jsonl"
        _run_mock(config6, PromptLedger(str(path_a)), 0.9, AcceptAllMember)
        _run_mock(config6, PromptLedger(str(path_b)), 0.9, AcceptAllMember)
        assert path_a.read_bytes() == path_b.read_bytes()

        # interrupt after level 3, then resume with the full budget
        path_c = tmp_path / "c.jsonl"
        _run_mock(RunConfig(max_depth=4), PromptLedger(str(path_c)), 0.9, AcceptAllMember)
        assert path_c.read_bytes() != path_a.read_bytes()
        _run_mock(config6, PromptLedger(str(path_c)), 0.9, AcceptAllMember)
        assert path_c.read_bytes() == path_a.read_bytes()


# ---------------------------------------------------------------- criterion 6

def synthetic_pairs(n, seed):
    rng = random.Random(seed)
    vocab = ["plan", "move", "grid", "robot", "task", "step", "goal",
             "action", "format", "check", "avoid", "verify"]
    pairs = []
    for _ in range(n):
        n_key = rng.randint(0, 20)
        words = ["careful"] * n_key + [rng.choice(vocab) for _ in range(40 - n_key)]
        rng.shuffle(words)
        pairs.append((" ".join(words), min(1.0, n_key / 20)))
    return pairs


def test_criterion_6_builtin_surrogate_learns():
    with criterion("built-in predictor: heldout MAE < 0.1 and beats constant baseline", 30):
        pairs = synthetic_pairs(150, seed=5)
        ensemble = SurrogateEnsemble(member_factory=BuiltinMember)
        ensemble.fit(pairs, random.Random(1))
        errors = [m.test_error for m in ensemble.members]
        scores = [s for _, s in pairs]
        baseline = float(np.mean(np.abs(np.asarray(scores) - np.mean(scores))))
        for err in errors:
            assert err < 0.1, errors
        assert float(np.mean(errors)) < baseline


# ---------------------------------------------------------------- criterion 7

def test_criterion_7_score_functions_exact():
    with criterion("score functions exact to 1e-12 on 1000 random inputs", 5):
        rng = random.Random(7)
        for _ in range(1000):
            total = rng.randint(1, 50)
            done = rng.randint(0, total)
            assert abs(progress_score(done, total) - done / total) <= 1e-12
        for _ in range(1000):
            base = rng.uniform(0.0, 1.0)
            factor = rng.uniform(0.0, 50.0)
            ratio = rng.uniform(0.0, 1.0)
            sub = modified_score(base, factor, ratio, "subtractive")
            div = modified_score(base, factor, ratio, "divisive")
            assert abs(sub - (base - factor * ratio)) <= 1e-12
            assert abs(div - base / (1.0 + factor * ratio)) <= 1e-12
            # zero preference weight leaves the base score untouched
            assert modified_score(base, factor, 0.0, "subtractive") == base
            assert modified_score(base, factor, 0.0, "divisive") == base


# ------------------------------------------------------- optional live check

LIVE_VARS = ("PROMST_API_KEY", "PROMST_LIVE_BASE_URL", "PROMST_LIVE_MODEL")


@pytest.mark.skipif(
    not all(os.environ.get(v) for v in LIVE_VARS),
    reason="live check needs " + ", ".join(LIVE_VARS),
)
def test_criterion_8_live_boxlift_improvement(tmp_path):
    """Optional: with real credentials, one short optimization on boxlift
    must not end below the seed prompt's score."""
    from promst.gateway import LiveBackend
    from promst.generator import load_seed_prompt

    backend = LiveBackend(
        base_url=os.environ["PROMST_LIVE_BASE_URL"],
        model=os.environ["PROMST_LIVE_MODEL"],
    )
    config = RunConfig(
        expansion_first=6, expansion_rest=3,
        max_depth=3, trials_per_prompt=5,
    )
    instances = generate_instances("boxlift", 0, config.trials_per_prompt)
    ledger = PromptLedger(str(tmp_path / "live.jsonl"))
    report = optimize(
        load_seed_prompt("boxlift"), instances, backend, backend,
        config, TEMPLATES, SUM_META, GEN_META, ledger=ledger,
    )
    seed_score = ledger.records()[0].mean_score
    print(f"[INFO] live boxlift: seed {seed_score:.3f} -> best {report.best_score:.3f}")
    assert report.best_score > seed_score
