"""Batch command line: entlink --config config.json --input doc.txt [...]

Documents are processed independently: one output line per document, errors
reported per document without aborting the run. Exit codes: 0 all good,
1 at least one document failed, 2 configuration problem.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import evaluation, output
from .errors import EntlinkError
from .loaders import detect_format
from .pipeline import Pipeline, build_pipeline
from .types import Document, StageTiming

EXIT_OK = 0
EXIT_DOC_ERRORS = 1
EXIT_CONFIG = 2


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entlink",
        description="Link entity mentions in documents to a user-supplied knowledge base.",
    )
    parser.add_argument("--config", required=True, help="pipeline config JSON file")
    parser.add_argument(
        "--input", required=True, nargs="+",
        help="input files or directories (directories expand non-recursively)",
    )
    parser.add_argument("--output", default="-", help="output JSONL path (default: stdout)")
    parser.add_argument("--gold", help="gold annotations JSONL; prints an eval report to stderr")
    parser.add_argument("--cache-dir", help="directory for the inference response cache")
    parser.add_argument("--jobs", type=int, default=1, help="documents processed in parallel")
    parser.add_argument("--quiet", action="store_true", help="suppress progress lines")
    parser.add_argument(
        "--no-timings", action="store_true",
        help="omit timings_ms from output (e.g. for byte-stable diffs)",
    )
    return parser


def expand_inputs(paths: list[str]) -> list[tuple[str, Exception | None]]:
    """Flatten files and directories into (path, error) pairs.

    Directory entries with unsupported extensions become error records rather
    than being silently skipped.
    """
    out: list[tuple[str, Exception | None]] = []
    for path in paths:
        if os.path.isdir(path):
            for entry in sorted(os.listdir(path)):
                full = os.path.join(path, entry)
                if not os.path.isfile(full):
                    continue
                try:
                    detect_format(full)
                    out.append((full, None))
                except EntlinkError as e:
                    out.append((full, e))
        else:
            out.append((path, None))
    return out


def _load_documents(pipeline: Pipeline, inputs) -> list[tuple[Document | None, str, Exception | None, float]]:
    """Returns (document, doc_id, error, load_ms) per document or failed file."""
    loaded = []
    for path, err in inputs:
        doc_id = os.path.splitext(os.path.basename(path))[0]
        if err is not None:
            loaded.append((None, doc_id, err, 0.0))
            continue
        t0 = time.perf_counter()
        try:
            docs = pipeline.loader.load_path(path)
        except (EntlinkError, OSError) as e:
            loaded.append((None, doc_id, e, 0.0))
            continue
        load_ms = (time.perf_counter() - t0) * 1000.0
        for doc in docs:
            loaded.append((doc, doc.doc_id, None, load_ms))
    return loaded


def run_batch(pipeline: Pipeline, inputs, sink, jobs: int = 1, quiet: bool = False,
              include_timings: bool = True, gold_path: str | None = None) -> int:
    loaded = _load_documents(pipeline, inputs)
    total = len(loaded)
    failures = 0
    annotated_by_id: dict[str, object] = {}

    def process(item):
        doc, doc_id, err, load_ms = item
        if err is not None:
            return doc_id, None, err
        try:
            annotated = pipeline.run(doc)
            annotated.timings.insert(0, StageTiming("load", load_ms))
            return doc_id, annotated, None
        except EntlinkError as e:
            return doc_id, None, e

    if jobs > 1:
        pool = ThreadPoolExecutor(max_workers=jobs)
        outcomes = pool.map(process, loaded)  # yields in input order as docs finish
    else:
        pool = None
        outcomes = map(process, loaded)

    try:
        for done, (doc_id, annotated, err) in enumerate(outcomes, start=1):
            if not quiet:
                print(f"doc {done}/{total}", file=sys.stderr)
            if err is not None:
                failures += 1
                print(f"error in {doc_id}: {err}", file=sys.stderr)
                output.write_line(output.error_record(doc_id, err), sink)
            else:
                output.write_line(
                    output.annotated_to_dict(annotated, include_timings=include_timings), sink
                )
                annotated_by_id[doc_id] = annotated
    finally:
        if pool is not None:
            pool.shutdown()

    if gold_path:
        _report_eval(annotated_by_id, gold_path)

    return EXIT_DOC_ERRORS if failures else EXIT_OK


def _report_eval(annotated_by_id: dict, gold_path: str):
    gold = evaluation.load_gold(gold_path)
    per_doc: dict[str, evaluation.EvalReport] = {}
    for doc_id, annotated in annotated_by_id.items():
        if doc_id not in gold:
            continue
        per_doc[doc_id] = evaluation.score_inkb(
            annotated.results, gold[doc_id], text_length=len(annotated.document.text)
        )
    if not per_doc:
        print("eval: no documents matched the gold file", file=sys.stderr)
        return
    micro = evaluation.aggregate(per_doc, "micro")
    macro = evaluation.aggregate(per_doc, "macro")
    micro.ci95 = evaluation.bootstrap_ci(list(per_doc.values()))
    table = dict(per_doc)
    table["micro"] = micro
    table["macro"] = macro
    print(evaluation.format_table(table), file=sys.stderr)
    print(json.dumps({
        "micro": evaluation.report_to_dict(micro),
        "macro": evaluation.report_to_dict(macro),
    }), file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_CONFIG

    try:
        with open(args.config, encoding="utf-8") as f:
            config = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        print(f"cannot read config {args.config}: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        pipeline = build_pipeline(config, cache_dir=args.cache_dir)
    except EntlinkError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    inputs = expand_inputs(args.input)
    if not inputs:
        print("no input files found", file=sys.stderr)
        return EXIT_CONFIG

    if args.output == "-":
        return run_batch(
            pipeline, inputs, sys.stdout, jobs=args.jobs, quiet=args.quiet,
            include_timings=not args.no_timings, gold_path=args.gold,
        )
    try:
        with open(args.output, "w", encoding="utf-8") as sink:
            return run_batch(
                pipeline, inputs, sink, jobs=args.jobs, quiet=args.quiet,
                include_timings=not args.no_timings, gold_path=args.gold,
            )
    except OSError as e:
        print(f"cannot write {args.output}: {e}", file=sys.stderr)
        return EXIT_DOC_ERRORS


if __name__ == "__main__":
    sys.exit(main())
