"""Command-line entry point: run, iterate, oracle, train, report, synth."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import config as C
from .data import load_dataset, write_dataset
from .errors import TriagentError
from .oracle import build_keyword_oracle, render_editor_facing, render_training
from .pipeline import RunConfig, run_batch
from .report import ReportSource, make_report, render_text, write_report
from .types import Scenario

log = logging.getLogger("triagent")

GROUP_BREAK = "---"


def _run_config(cfg: dict, args: argparse.Namespace, iterations: int, stop_on_noop: bool) -> RunConfig:
    run = cfg.get("run", {})
    return RunConfig(
        instructor=C.build_instructor(cfg),
        editor=C.build_editor(cfg),
        scorer=C.build_scorer(cfg),
        output_dir=args.output_dir or C._path(cfg, run.get("output_dir", "runs/latest")),
        concurrency=args.concurrency or int(run.get("concurrency", 4)),
        resume=run.get("resume", True) if args.resume is None else args.resume,
        iterations=iterations,
        stop_on_noop=stop_on_noop,
        generator=C.build_generator(cfg),
        label=run.get("label", "Edit" if iterations > 1 else "Edited"),
    )


def cmd_run(args: argparse.Namespace, iterations: int = 1, stop_on_noop: bool = True) -> int:
    cfg = C.load_config(args.config)
    records = C.load_records(cfg, args.dataset)
    rc = _run_config(cfg, args, iterations, stop_on_noop)
    report = run_batch(records, rc)
    paths = write_report(report, rc.output_dir, figures=not args.no_figures)
    sys.stdout.write(render_text(report))
    log.info("%d records, %d errors; wrote %s", report.n_records, report.n_errors, ", ".join(map(str, paths)))
    return 0 if report.n_errors == 0 else 2


def cmd_iterate(args: argparse.Namespace) -> int:
    return cmd_run(args, iterations=args.k, stop_on_noop=not args.fixed_k)


def cmd_oracle(args: argparse.Namespace) -> int:
    field_map = json.loads(args.field_map) if args.field_map else None
    records = load_dataset(args.dataset, args.scenario, field_map)
    out = open(args.out, "w", encoding="utf-8") if args.out != "-" else sys.stdout
    try:
        for r in records:
            ops = build_keyword_oracle(r.initial, r.reference, r.document)
            row = {
                "id": r.id,
                "instruction": render_training(ops),
                "editor_instruction": render_editor_facing(ops, r.scenario),
                **ops.to_dict(),
            }
            out.write(json.dumps(row, ensure_ascii=False) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    from .plotting import plot_rl_curve, plot_supervised_loss
    from .trainer import (
        RL_RECORD_CAP,
        KeywordPolicy,
        eval_policy,
        load_policy,
        oracle_examples,
        reinforce_train,
        save_policy,
        supervised_fit,
        write_steps,
    )

    cfg = C.load_config(args.config)
    train_cfg = cfg.get("train", {})
    records = C.load_records(cfg, args.dataset)
    scorer = C.build_scorer(cfg)
    out_dir = Path(args.output_dir or C._path(cfg, train_cfg.get("output_dir", "runs/train")))
    out_dir.mkdir(parents=True, exist_ok=True)
    policy = load_policy(args.resume) if args.resume else KeywordPolicy.zeros(float(train_cfg.get("temperature", 1.0)))
    seed = args.seed if args.seed is not None else int(train_cfg.get("seed", 0))

    if args.phase == "supervised":
        lr = args.lr if args.lr is not None else float(train_cfg.get("lr", 1.0))
        epochs = args.epochs or int(train_cfg.get("epochs", 50))
        policy, curve = supervised_fit(policy, oracle_examples(records), epochs=epochs, lr=lr)
        (out_dir / "supervised_loss.json").write_text(json.dumps(curve) + "\n", encoding="utf-8")
        plot_supervised_loss(curve, out_dir / "supervised_loss.png")
        log.info("supervised loss %.4f -> %.4f over %d epochs", curve[0], curve[-1], epochs)
    else:
        lr = args.lr if args.lr is not None else float(train_cfg.get("lr", 0.5))
        episodes = args.episodes or int(train_cfg.get("episodes", 2000))
        editor = C.build_editor(cfg, override="llm" if args.editor == "http" else "mock")
        policy, steps = reinforce_train(
            policy, records, editor, scorer, episodes=episodes, lr=lr, seed=seed,
            baseline_window=int(train_cfg.get("baseline_window", 100)),
            max_records=int(train_cfg.get("max_records", RL_RECORD_CAP)),
            start_episode=args.start_episode,
        )
        write_steps(steps, out_dir / "rl_steps.jsonl", append=args.start_episode > 1)
        if steps:
            plot_rl_curve(steps, out_dir / "rl_reward.png")
        log.info("%d RL episodes, mean reward %.4f", len(steps), sum(s.reward for s in steps) / max(len(steps), 1))

    ckpt = Path(args.out) if args.out else out_dir / f"policy_{args.phase}.json"
    save_policy(policy, ckpt)
    report = eval_policy(policy, records, C.build_editor(cfg, override="mock"), scorer, label=f"Policy ({args.phase})")
    write_report(report, out_dir, stem=f"eval_{args.phase}", figures=not args.no_figures)
    sys.stdout.write(render_text(report))
    log.info("checkpoint written to %s", ckpt)
    return 0


def _sources(specs: list[str]) -> list[ReportSource]:
    sources, group = [], 1
    for spec in specs:
        if spec == GROUP_BREAK:
            group += 1
            continue
        label, sep, path = spec.partition("=")
        if not sep:
            label, path = "Edited", spec
        sources.append(ReportSource(label, path, group))
    return sources


def cmd_report(args: argparse.Namespace) -> int:
    report = make_report(_sources(args.trace), first_column=args.first_column)
    write_report(report, args.out, stem=args.stem, figures=not args.no_figures)
    sys.stdout.write(render_text(report))
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    from .synthetic import make_corpus

    write_dataset(args.out, make_corpus(args.n, seed=args.seed, ungrounded_prob=args.ungrounded))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="triagent", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def run_args(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", required=True)
        sp.add_argument("--dataset", help="override dataset.path")
        sp.add_argument("--output-dir")
        sp.add_argument("--concurrency", type=int)
        sp.add_argument("--resume", dest="resume", action="store_true", default=None)
        sp.add_argument("--no-resume", dest="resume", action="store_false")
        sp.add_argument("--no-figures", action="store_true")

    sp = sub.add_parser("run", help="single-pass batch pipeline")
    run_args(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("iterate", help="k-step iterative editing")
    run_args(sp)
    sp.add_argument("-k", type=int, default=3)
    sp.add_argument("--fixed-k", action="store_true", help="do not stop early on a no-op instruction")
    sp.set_defaults(func=cmd_iterate)

    sp = sub.add_parser("oracle", help="emit oracle keyword instructions as JSON lines")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--scenario", choices=[s.value for s in Scenario], default="cnndm")
    sp.add_argument("--field-map", help="JSON object mapping source field names to canonical ones")
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("train", help="train the keyword instructor policy")
    sp.add_argument("--config", required=True)
    sp.add_argument("--dataset")
    sp.add_argument("--phase", choices=["supervised", "rl"], required=True)
    sp.add_argument("--episodes", type=int)
    sp.add_argument("--epochs", type=int)
    sp.add_argument("--lr", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--editor", choices=["mock", "http"], default="mock")
    sp.add_argument("--resume", metavar="CHECKPOINT")
    sp.add_argument("--start-episode", type=int, default=1)
    sp.add_argument("--out", help="checkpoint path")
    sp.add_argument("--output-dir")
    sp.add_argument("--no-figures", action="store_true")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("report", help="render tables and figures from trace files")
    sp.add_argument("--trace", action="append", required=True, metavar="LABEL=PATH",
                    help="repeatable; rows from later --group flags render below a rule")
    sp.add_argument("--group", dest="trace", action="append_const", const=GROUP_BREAK,
                    help="start a new row group")
    sp.add_argument("--out", default=".")
    sp.add_argument("--stem", default="report")
    sp.add_argument("--first-column", default="Instructor")
    sp.add_argument("--no-figures", action="store_true")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("synth", help="write a synthetic coverage-editing corpus")
    sp.add_argument("--n", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--ungrounded", type=float, default=0.0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_synth)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except TriagentError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
