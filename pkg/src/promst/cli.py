"""Command line entry points: optimize, evaluate, report."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .envs import ENV_KINDS, InstanceError, generate_instances
from .feedback import TemplateError, load_templates
from .gateway import BackendSpec, TransportError
from .generator import load_meta_prompt, load_seed_prompt
from .ledger import PromptLedger
from .optimizer import RunReport, optimize
from .trials import evaluate_prompt
from .types import ConfigError, Prompt, RunConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_TRANSPORT = 3
EXIT_INTERNAL = 4


class _UsageError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="promst", description="Beam-search prompt optimization for agent tasks."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--env", required=True, choices=sorted(ENV_KINDS))
        p.add_argument("--config", help="JSON file of run configuration overrides")
        p.add_argument("--seed-prompt", help="file with the starting prompt text")
        p.add_argument("--templates", help="feedback template JSON file")
        p.add_argument("--backend", help="backend for both roles, kind:spec")
        p.add_argument("--task-backend", help="task execution backend, kind:spec")
        p.add_argument("--trials", type=int, help="trials per prompt")
        p.add_argument("--seed", type=int, help="run seed")
        p.add_argument("--jobs", type=int, default=1, help="reserved; must stay 1 for determinism")
        p.add_argument("--score-mode", choices=["progress", "modified_subtractive", "modified_divisive"])
        p.add_argument("--ratio", type=float, help="preference ratio for modified scores")
        p.add_argument("--factor", choices=["step_count", "collision_count"])
        p.add_argument("--dump-transcripts", help="NDJSON tape of every backend call")

    p_opt = sub.add_parser("optimize", help="run the beam search")
    add_common(p_opt)
    p_opt.add_argument("--ledger", required=True, help="append-only ledger path")
    p_opt.add_argument("--prompt-backend", help="prompt rewriting backend, kind:spec")
    p_opt.add_argument("--sum-meta", help="feedback summarization meta-prompt file")
    p_opt.add_argument("--gen-meta", help="prompt rewriting meta-prompt file")

    p_eval = sub.add_parser("evaluate", help="score one prompt, no search")
    add_common(p_eval)
    p_eval.add_argument("--ledger", help="optional ledger to append the record to")

    p_rep = sub.add_parser("report", help="summarize a ledger")
    p_rep.add_argument("--ledger", required=True)
    p_rep.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    return parser


def _load_config(args) -> RunConfig:
    overrides = {}
    if args.config:
        try:
            overrides = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise _UsageError(f"cannot read config {args.config}: {exc}") from exc
    if args.trials is not None:
        overrides["trials_per_prompt"] = args.trials
    if args.seed is not None:
        overrides["rng_seed"] = args.seed
    if args.score_mode:
        overrides["score_mode"] = args.score_mode
    if args.ratio is not None:
        overrides["preference_ratio"] = args.ratio
    if args.factor:
        overrides["preference_factor"] = args.factor
    base = RunConfig().to_dict()
    base.update(overrides)
    return RunConfig.from_dict(base)


def _build_backend(args, role: str):
    spec_text = getattr(args, f"{role}_backend", None) or args.backend
    if not spec_text:
        raise _UsageError(f"no --{role.replace('_', '-')}-backend or --backend given")
    try:
        backend = BackendSpec.parse(spec_text).build()
    except (ValueError, OSError) as exc:
        raise _UsageError(str(exc)) from exc
    if args.dump_transcripts:
        from .gateway import RecordingBackend

        backend = RecordingBackend(backend, args.dump_transcripts)
    return backend


def _seed_text(args) -> str:
    if args.seed_prompt:
        return Path(args.seed_prompt).read_text()
    return load_seed_prompt(args.env)


def _run_optimize(args) -> int:
    config = _load_config(args)
    if args.jobs != 1:
        raise _UsageError("--jobs must be 1; parallel execution is not supported")
    templates = load_templates(args.templates)
    sum_meta = load_meta_prompt("sum_meta", args.sum_meta)
    gen_meta = load_meta_prompt("gen_meta", args.gen_meta)
    task_backend = _build_backend(args, "task")
    prompt_backend = (
        _build_backend(args, "prompt")
        if (args.prompt_backend or args.backend)
        else None
    )
    if prompt_backend is None:
        raise _UsageError("no prompt backend given")
    instances = generate_instances(args.env, config.rng_seed, config.trials_per_prompt)
    ledger = PromptLedger(args.ledger)
    report = optimize(
        _seed_text(args), instances, task_backend, prompt_backend,
        config, templates, sum_meta, gen_meta, ledger=ledger,
    )
    print(report.render_table())
    return EXIT_OK


def _run_evaluate(args) -> int:
    config = _load_config(args)
    templates = load_templates(args.templates)
    backend = _build_backend(args, "task")
    instances = generate_instances(args.env, config.rng_seed, config.trials_per_prompt)
    ledger = PromptLedger(args.ledger) if args.ledger else PromptLedger()
    prompt = Prompt(id=ledger.next_id(), text=_seed_text(args), level=0)
    record = evaluate_prompt(prompt, instances, backend, config, templates)
    if args.ledger:
        ledger.record(record)
    print(json.dumps({
        "mean_score": record.mean_score,
        "per_trial_scores": record.per_trial_scores,
        "errors": [f.error_type for f in record.feedback],
    }))
    return EXIT_OK


def _run_report(args) -> int:
    ledger = PromptLedger(args.ledger)
    if len(ledger) == 0:
        raise _UsageError(f"ledger {args.ledger} is empty")
    best = ledger.top_k(1)[0]
    report = RunReport(
        best_prompt=best.prompt.text,
        best_score=best.mean_score,
        per_level_max=ledger.per_level_max(),
        prompts_evaluated=len(ledger),
    )
    print(json.dumps(report.to_json_dict()) if args.json else report.render_table())
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "optimize":
            return _run_optimize(args)
        if args.command == "evaluate":
            return _run_evaluate(args)
        return _run_report(args)
    except (_UsageError, ConfigError, TemplateError, InstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TransportError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except Exception as exc:  # noqa: BLE001 - last-resort exit code mapping
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
