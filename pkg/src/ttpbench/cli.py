"""``ttpbench`` command line: ingest, run, report.

Exit codes: 0 success, 1 usage or validation error, 2 some grid cells failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .annotations import ConlluError, group_by_doc, read_conllu
from .attack_ingest import (
    IngestError, SkipReport, filter_min_support, load_attack_bundle,
    write_corpus_csv,
)
from .config import ConfigError, GridConfig
from .evaluation.grid import read_results, run_grid
from .features.matrix import MethodTag
from .report import render_table4, render_table5, write_boxplot_data

log = logging.getLogger("ttpbench")

EXIT_OK, EXIT_USAGE, EXIT_PARTIAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_corpus(bundle, min_support: int, collapse: bool = True, skip_report=None):
    records, techniques = load_attack_bundle(bundle, collapse_subtechniques=collapse,
                                             skip_report=skip_report)
    if not records:
        raise IngestError(f"{bundle}: no procedure descriptions found")
    return records, techniques, filter_min_support(records, min_support)


def cmd_ingest(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = SkipReport()
    records, techniques, corpus = _load_corpus(args.bundle, args.min_support,
                                               not args.keep_subtechniques, report)
    n_all = len({r.technique_id for r in records})
    write_corpus_csv(corpus.records, out / "corpus.csv")
    report.write(out / "skip_report.txt")
    kept = set(corpus.label_set)
    with open(out / "techniques.json", "w", encoding="utf-8") as fh:
        json.dump([{"technique_id": t.technique_id, "name": t.name, "description": t.description,
                    "tactic_ids": list(t.tactic_ids)} for t in techniques], fh, indent=1)
    # doc_id<TAB>text lines for the offline dependency parser
    with open(out / "parser_input.tsv", "w", encoding="utf-8") as fh:
        for r in corpus.records:
            fh.write(f"{r.doc_id}\t{' '.join(r.text.split())}\n")
        for t in techniques:
            if t.technique_id in kept:
                fh.write(f"{t.technique_id}\t{' '.join(t.description.split())}\n")
    print(f"{len(records)} procedure records / {n_all} techniques (before filtering)")
    print(f"{len(corpus)} descriptions / {len(corpus.label_set)} techniques (min_support={args.min_support})")
    return EXIT_OK


def _resolve(base: Path, value):
    if value is None:
        return None
    p = Path(value)
    return p if p.is_absolute() else base / p


def _load_config(args) -> tuple[GridConfig, Path]:
    path = Path(args.config)
    if not path.exists():
        raise UsageError(f"config file {path} does not exist")
    grid = GridConfig.load(path)
    if args.seed is not None:
        grid = replace(grid, seed=args.seed)
    base = path.parent
    out = Path(args.out) if args.out else _resolve(base, grid.out_dir)
    grid = replace(grid, bundle_path=str(_resolve(base, grid.bundle_path)),
                   conllu_path=None if grid.conllu_path is None else str(_resolve(base, grid.conllu_path)),
                   out_dir=str(out))
    return grid, out


def cmd_run(args) -> int:
    grid, out = _load_config(args)
    if not Path(grid.bundle_path).exists():
        raise UsageError(f"bundle {grid.bundle_path} does not exist")
    need = grid.needs_annotations()
    annotations = None
    if need:
        if grid.conllu_path is None or not Path(grid.conllu_path).exists():
            names = ", ".join(need)
            raise UsageError(f"method(s) {names} need CoNLL-U annotations (conllu_path missing or not found)")
        annotations = group_by_doc(read_conllu(grid.conllu_path))
    _, techniques, corpus = _load_corpus(grid.bundle_path, grid.min_support, grid.collapse_subtechniques)
    if max(grid.n_list) > len(corpus.label_set):
        raise UsageError(f"n_list asks for {max(grid.n_list)} classes; corpus has {len(corpus.label_set)}")
    if annotations is not None:
        top = corpus.records[: sum(corpus.class_counts()[t] for t in corpus.label_set[: max(grid.n_list)])]
        missing = [r.doc_id for r in top if r.doc_id not in annotations]
        if MethodTag.BM25.value in need:
            missing += [t for t in corpus.label_set[: max(grid.n_list)] if t not in annotations]
        if missing:
            raise UsageError(f"method(s) {', '.join(need)}: {len(missing)} document(s) lack annotations, "
                             f"first {missing[0]!r}")
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(grid.to_json(), encoding="utf-8")
    run = run_grid(corpus, grid, {t.technique_id: t for t in techniques}, annotations, out)
    print(f"{len(run.new)} new cells, {run.skipped} already present, {len(run.failures)} failed "
          f"-> {out / 'results.csv'}")
    return EXIT_PARTIAL if run.failures else EXIT_OK


def cmd_report(args) -> int:
    path = Path(args.results)
    if not path.exists():
        raise UsageError(f"{path} does not exist")
    results = read_results(path)
    if not results:
        raise UsageError(f"{path}: no results")
    if args.mode == "table4":
        text = render_table4(results, args.oversampled)
    elif args.mode == "table5":
        text = render_table5(results, args.with_mode)
    else:
        out = Path(args.out) if args.out else path.parent
        for p in write_boxplot_data(results, out):
            print(p)
        return EXIT_OK
    sys.stdout.write(text)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ttpbench", description="ATT&CK technique classification benchmark")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ing = sub.add_parser("ingest", help="build the labeled corpus from a STIX bundle")
    ing.add_argument("bundle")
    ing.add_argument("--out", default=".")
    ing.add_argument("--min-support", type=int, default=30)
    ing.add_argument("--keep-subtechniques", action="store_true",
                     help="label with sub-technique ids instead of their parents")
    ing.set_defaults(func=cmd_ingest)

    run = sub.add_parser("run", help="run (or resume) the experiment grid")
    run.add_argument("--config", required=True)
    run.add_argument("--out", help="output directory (overrides out_dir)")
    run.add_argument("--seed", type=int, help="overrides the config seed")
    run.set_defaults(func=cmd_run)

    rep = sub.add_parser("report", help="render tables or box-plot data from results.csv")
    rep.add_argument("results")
    rep.add_argument("--mode", choices=["table4", "table5", "boxplot-data"], default="table4")
    rep.add_argument("--out", help="file for tables, directory for boxplot-data")
    rep.add_argument("--oversampled", default="none", help="mode shown by table4")
    rep.add_argument("--with-mode", default="full_dataset", help="oversampling mode compared by table5")
    rep.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, IngestError, ConlluError, ValueError, KeyError) as exc:
        print(f"ttpbench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
