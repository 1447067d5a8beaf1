"""Command-line interface: train, run, sweep, theory, report.

Every subcommand is a thin wrapper over library calls; all policy lives in
the modules it belongs to. Exit codes are a stable contract: 0 success, 1
validation problem, 2 environmental or internal failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor

from .config import ResolvedRun, load_config, materialize
from .engine import run_workload
from .errors import EXIT_OK, EXIT_RUNTIME, ConfigError, SpecLabError
from .ngram import save_model, train_ngram
from .report import REPORT_SCHEMA_VERSION, SUMMARY_COLUMNS, render_report, summary_row
from .svg import render_curves
from .theory import DRAFTER_AR, DRAFTER_BLOCK, best_gamma, speedup_curve
from .tokenizers import tokenize

OUTPUT_DIR_ENV = "SPECLAB_OUTPUT_DIR"


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "-", text).strip("-") or "run"


def _default_out(name: str) -> str:
    return os.path.join(os.environ.get(OUTPUT_DIR_ENV, "runs"), _slug(name))


def _resolve_out(flag: str | None, run: ResolvedRun, base_dir: str) -> str:
    if flag:
        return flag
    if run.output_dir:
        return os.path.join(base_dir, run.output_dir)
    return _default_out(run.label)


def _apply_overrides(config: dict, args: argparse.Namespace) -> None:
    if args.max_tokens is not None:
        config["max_tokens"] = args.max_tokens
    if args.seed is not None:
        config["seed"] = args.seed
    if getattr(args, "verifier", None) is not None:
        config["verifier"] = args.verifier


def _save_transcripts(transcripts, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for i, t in enumerate(transcripts):
        t.save(os.path.join(out_dir, f"transcript_{i:04d}.json"))


def cmd_train(args: argparse.Namespace) -> int:
    from .config import read_corpus  # local import keeps module load light

    docs = [tokenize(d, args.tokenizer) for d in read_corpus(args.corpus)]
    target = train_ngram(docs, order=args.order, smoothing=args.smoothing)
    drafter = train_ngram(
        docs,
        order=args.drafter_order,
        smoothing=args.drafter_smoothing,
        vocabulary=target.vocabulary,
    )
    stem = os.path.splitext(os.path.basename(args.corpus))[0]
    out = args.out or os.path.dirname(args.corpus) or "."
    os.makedirs(out, exist_ok=True)
    target_path = os.path.join(out, f"{stem}.target.json")
    drafter_path = os.path.join(out, f"{stem}.drafter.json")
    save_model(target, target_path)
    save_model(drafter, drafter_path)
    print(f"vocabulary: {len(target.vocabulary)} tokens")
    print(f"target:  order={target.order} contexts={len(target.counts)} -> {target_path}")
    print(f"drafter: order={drafter.order} contexts={len(drafter.counts)} -> {drafter_path}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    _apply_overrides(config, args)
    base_dir = os.path.dirname(os.path.abspath(args.config))
    runs = materialize(config, base_dir)
    if len(runs) != 1:
        raise ConfigError(
            f"config expands to {len(runs)} cases; use the sweep subcommand for grids"
        )
    run = runs[0]
    out_dir = _resolve_out(args.out, run, base_dir)
    transcripts = run_workload(run.case, run.prompts)
    _save_transcripts(transcripts, out_dir)
    paths = render_report(out_dir)
    print(f"{run.label}: {len(transcripts)} transcripts -> {out_dir}")
    print(f"report: {paths['summary.csv']}")
    return EXIT_OK


def _run_one(pair: tuple[ResolvedRun, int]) -> list:
    run, _ = pair
    return run_workload(run.case, run.prompts)


def cmd_sweep(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    _apply_overrides(config, args)
    base_dir = os.path.dirname(os.path.abspath(args.config))
    runs = materialize(config, base_dir)
    out_base = args.out or _default_out(os.path.splitext(os.path.basename(args.config))[0])
    pairs = [(run, i) for i, run in enumerate(runs)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, pairs))
    else:
        results = [_run_one(p) for p in pairs]

    rows = []
    for i, (run, transcripts) in enumerate(zip(runs, results)):
        case_dir = os.path.join(out_base, f"{i:02d}_{_slug(run.label)}")
        _save_transcripts(transcripts, case_dir)
        row = summary_row(run.label, transcripts)
        row["_kind"] = str(run.case.config_snapshot["policy"]["kind"])
        rows.append(row)

    best_by_kind: dict[str, float] = {}
    for row in rows:
        kind = row["_kind"]
        best_by_kind[kind] = max(best_by_kind.get(kind, 0.0), float(row["speedup"]))
    sweep_path = os.path.join(out_base, "sweep.csv")
    with open(sweep_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# schema_version={REPORT_SCHEMA_VERSION}\n")
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS + ("best",), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            kind = row.pop("_kind")
            row["best"] = "*" if float(row["speedup"]) == best_by_kind[kind] else ""
            writer.writerow(row)
    print(f"{len(rows)} cases -> {sweep_path}")
    return EXIT_OK


def cmd_theory(args: argparse.Namespace) -> int:
    gammas = list(range(1, args.gamma_max + 1))
    out = args.out or _default_out("theory")
    os.makedirs(out, exist_ok=True)
    csv_path = os.path.join(out, "theory.csv")
    series = []
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# schema_version={REPORT_SCHEMA_VERSION}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["alpha", "drafter", "gamma", "speedup", "best"])
        for alpha in args.alpha:
            for kind in (DRAFTER_AR, DRAFTER_BLOCK):
                curve = speedup_curve(alpha, gammas, args.cost_ratio, kind, args.block_size)
                star, peak = best_gamma(alpha, gammas, args.cost_ratio, kind, args.block_size)
                for g, s in zip(gammas, curve):
                    writer.writerow(
                        [alpha, kind, g, f"{s:.6f}", "*" if g == star else ""]
                    )
                series.append((f"{kind} a={alpha}", [(float(g), s) for g, s in zip(gammas, curve)]))
                print(f"alpha={alpha} {kind}: best gamma={star} speedup={peak:.4f}")
    svg_path = os.path.join(out, "theory.svg")
    with open(svg_path, "w", encoding="utf-8") as fh:
        fh.write(render_curves(series, "speculation length", "speedup", "theoretical speedup"))
    print(f"theory -> {csv_path}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    paths = render_report(args.run_dir, args.out)
    print(f"report -> {os.path.dirname(paths['summary.csv'])}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speclab",
        description="Speculative-decoding laboratory: simulate, sweep, and report.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train and persist target + drafter models")
    p_train.add_argument("corpus")
    p_train.add_argument("--order", type=int, default=5)
    p_train.add_argument("--drafter-order", type=int, default=4)
    p_train.add_argument("--smoothing", type=float, default=0.1)
    p_train.add_argument("--drafter-smoothing", type=float, default=0.1)
    p_train.add_argument("--tokenizer", default="char")
    p_train.add_argument("--out")
    p_train.set_defaults(func=cmd_train)

    for name, fn, help_text in (
        ("run", cmd_run, "run one configured workload and render its report"),
        ("sweep", cmd_sweep, "expand config grids and run every case"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config")
        p.add_argument("--out")
        p.add_argument("--max-tokens", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--verifier", choices=["greedy", "stochastic"])
        if name == "sweep":
            p.add_argument("--jobs", type=int, default=1)
        p.set_defaults(func=fn)

    p_theory = sub.add_parser("theory", help="closed-form speedup curves and maximizers")
    p_theory.add_argument("--alpha", type=float, nargs="+", default=[0.8])
    p_theory.add_argument("--gamma-max", type=int, default=40)
    p_theory.add_argument("--cost-ratio", type=float, default=0.05)
    p_theory.add_argument("--block-size", type=int, default=8)
    p_theory.add_argument("--out")
    p_theory.set_defaults(func=cmd_theory)

    p_report = sub.add_parser("report", help="rebuild the report bundle from transcripts")
    p_report.add_argument("run_dir")
    p_report.add_argument("--out")
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpecLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:  # unreadable/unwritable paths outside our wrappers
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
