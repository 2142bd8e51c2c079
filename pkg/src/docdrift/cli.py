"""Command-line interface.

Subcommands: extract, detect, report, eval, ablate. Option values resolve in
precedence order: command line, then DOCDRIFT_* environment variables, then a
JSON config file given with --config, then built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import jsonl
from .analysis import DetectionResult, VERDICT_INCONSISTENT
from .errors import ConfigError, CorpusError, DocdriftError
from .evaluation import (
    ablate,
    compute_function_metrics,
    compute_inconsistency_metrics,
    load_finding_labels,
    load_pair_labels,
    write_ablation,
)
from .extraction import (
    CodeDocPair,
    FilterConfig,
    ScanDiagnostics,
    SourceLanguage,
    scan_corpus,
)
from .llm_client import TransportMode
from .pipeline import run_detection
from .prompting import ProjectMeta, PromptVariant
from .reporting import render_report, write_summary

_DEFAULTS = {
    "variant": "dp",
    "language": "python",
    "project_kind": "library",
    "model": "gpt-4",
    "transport": "live",
    "min_tokens": 7,
    "dedupe": True,
    "sample": None,
    "seed": None,
    "concurrency": 4,
    "temperature": 0.0,
    "project_name": None,
}

_CONFIG_KEYS = set(_DEFAULTS)

_EXIT_CODE_HELP = """\
exit codes:
  0  success
  1  unexpected failure
  2  configuration problem (bad flag, config file, or endpoint setup)
  3  corpus problem (unreadable root or invalid pairs file)
  4  transport failure after retries
  5  fixture store problem (missing or conflicting fixtures)
  6  label problem (missing, duplicate, or invalid labels)
  7  report problem (results reference unknown pairs)

environment:
  DOCDRIFT_API_BASE / DOCDRIFT_API_KEY  chat endpoint (OPENAI_BASE_URL /
  OPENAI_API_KEY are honored as fallbacks); most options also read
  DOCDRIFT_<OPTION>, e.g. DOCDRIFT_MODEL, DOCDRIFT_VARIANT.
"""


def _cast_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(data) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return data


class _Options:
    """Resolves option values through the precedence chain."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = _load_config_file(getattr(args, "config", None))

    def get(self, name: str, cast=str):
        cli = getattr(self.args, name, None)
        if cli is not None:
            return cli
        env_name = "DOCDRIFT_" + name.upper()
        env = os.environ.get(env_name)
        if env is not None:
            try:
                return cast(env)
            except ValueError as exc:
                raise ConfigError(f"invalid {env_name}: {exc}") from exc
        if name in self.config:
            try:
                return cast(self.config[name])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid config value for {name}: {exc}") from exc
        return _DEFAULTS.get(name)

    def dedupe(self) -> bool:
        if getattr(self.args, "no_dedupe", False):
            return False
        return self.get("dedupe", _cast_bool)

    def filters(self) -> FilterConfig:
        return FilterConfig(
            min_tokens=self.get("min_tokens", int),
            dedupe=self.dedupe(),
            sample_size=self.get("sample", int),
            sample_seed=self.get("seed", int),
        )

    def language(self) -> SourceLanguage:
        return SourceLanguage.parse(self.get("language"))

    def variant(self) -> PromptVariant:
        return PromptVariant.parse(self.get("variant"))

    def transport(self) -> TransportMode:
        return TransportMode.parse(self.get("transport"))


def _load_pairs_file(path: str) -> list[CodeDocPair]:
    try:
        rows = list(jsonl.read_records(path))
    except OSError as exc:
        raise CorpusError(f"cannot read pairs file {path}: {exc}") from exc
    try:
        return [CodeDocPair.from_dict(row) for row in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusError(f"invalid pairs file {path}: {exc}") from exc


def _load_results_file(path: str) -> list[DetectionResult]:
    try:
        rows = list(jsonl.read_records(path))
    except OSError as exc:
        raise DocdriftError(f"cannot read results file {path}: {exc}") from exc
    try:
        return [DetectionResult.from_dict(row) for row in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise DocdriftError(f"invalid results file {path}: {exc}") from exc


def _gather_pairs(args, opts: _Options) -> list[CodeDocPair]:
    """Pairs from a corpus root or a pre-extracted pairs file."""
    if getattr(args, "pairs", None):
        return _load_pairs_file(args.pairs)
    if not getattr(args, "root", None):
        raise ConfigError("give a corpus root or --pairs FILE")
    diag = ScanDiagnostics()
    pairs = scan_corpus(
        args.root,
        opts.language(),
        opts.filters(),
        project=opts.get("project_name"),
        diagnostics=diag,
    )
    _print_diagnostics(diag)
    return pairs


def _print_diagnostics(diag: ScanDiagnostics):
    print(
        f"scanned {diag.files_scanned} files ({diag.files_skipped} skipped); "
        f"{diag.functions_extracted} documented functions, "
        f"{diag.pairs_after_filters} after filters, {diag.pairs_sampled} selected",
        file=sys.stderr,
    )
    for path, reason in diag.skipped_files:
        print(f"  skipped {path}: {reason}", file=sys.stderr)


def _project_meta(opts: _Options, pairs: list[CodeDocPair]) -> ProjectMeta:
    name = opts.get("project_name")
    if not name:
        name = pairs[0].project if pairs else "corpus"
    return ProjectMeta(name=name, kind=opts.get("project_kind"))


def _progress(done: int, total: int, pair_id: str):
    print(f"[{done}/{total}] {pair_id}", file=sys.stderr)


def _fmt2(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.2f}"


# ---------------------------------------------------------------------------
# Subcommands


def cmd_extract(args) -> int:
    opts = _Options(args)
    diag = ScanDiagnostics()
    pairs = scan_corpus(
        args.root,
        opts.language(),
        opts.filters(),
        project=opts.get("project_name"),
        diagnostics=diag,
    )
    _print_diagnostics(diag)
    records = [p.to_dict() for p in pairs]
    if args.out == "-":
        for record in records:
            print(jsonl.dump_line(record))
    else:
        jsonl.write_records(args.out, records)
        print(f"wrote {len(records)} pairs to {args.out}", file=sys.stderr)
    return 0


def cmd_detect(args) -> int:
    opts = _Options(args)
    pairs = _gather_pairs(args, opts)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    jsonl.write_records(out_dir / "pairs.jsonl", [p.to_dict() for p in pairs])

    model = opts.get("model")
    results = run_detection(
        pairs,
        opts.variant(),
        _project_meta(opts, pairs),
        model,
        opts.transport(),
        fixture_dir=out_dir / "fixtures",
        concurrency=opts.get("concurrency", int),
        temperature=opts.get("temperature", float),
        on_progress=_progress,
    )
    jsonl.write_records(out_dir / "results.jsonl", [r.to_dict() for r in results])
    (out_dir / "report.html").write_text(
        render_report(results, pairs, model=model), encoding="utf-8"
    )
    write_summary(out_dir / "summary.json", results, pairs, model=model)

    flagged = sum(1 for r in results if r.verdict == VERDICT_INCONSISTENT)
    print(f"flagged {flagged} of {len(results)} pairs")
    print(f"run directory: {out_dir}")
    return 0


def cmd_report(args) -> int:
    pairs = _load_pairs_file(args.pairs)
    results = _load_results_file(args.results)
    document = render_report(results, pairs, model=args.model or "")
    if args.out == "-":
        print(document)
    else:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(document, encoding="utf-8")
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    results = _load_results_file(args.results)
    labels = load_pair_labels(args.labels)
    metrics = compute_function_metrics(results, labels)

    print(
        f"pairs evaluated: {metrics.evaluated} "
        f"(excluded unlabeled: {metrics.excluded_unlabeled})"
    )
    print(f"tp={metrics.tp} fp={metrics.fp} tn={metrics.tn} fn={metrics.fn}")
    print(
        f"precision={_fmt2(metrics.precision)} recall={_fmt2(metrics.recall)} "
        f"f1={_fmt2(metrics.f1)} accuracy={_fmt2(metrics.accuracy)} "
        f"flag_rate={_fmt2(metrics.flag_rate)}"
    )

    payload = {"function": metrics.to_dict()}
    if args.finding_labels:
        finding_metrics = compute_inconsistency_metrics(
            results, load_finding_labels(args.finding_labels)
        )
        payload["inconsistency"] = finding_metrics.to_dict()
        print(
            f"findings={finding_metrics.findings} "
            f"finding_tp={finding_metrics.tp} finding_fp={finding_metrics.fp}"
        )
        print(
            f"finding_precision={_fmt2(finding_metrics.precision)} "
            f"under_promise_rate={_fmt2(finding_metrics.under_promise_rate)}"
        )
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(
            json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
    return 0


def cmd_ablate(args) -> int:
    opts = _Options(args)
    pairs = _gather_pairs(args, opts)
    variant_names = [s.strip() for s in args.variants.split(",") if s.strip()]
    variants = [PromptVariant.parse(name) for name in variant_names]
    labels = load_pair_labels(args.labels) if args.labels else None
    finding_labels = (
        load_finding_labels(args.finding_labels) if args.finding_labels else None
    )

    report = ablate(
        pairs,
        variants,
        opts.transport(),
        project=_project_meta(opts, pairs),
        model=opts.get("model"),
        fixture_dir=args.fixtures or (Path(args.out) / "fixtures"),
        labels=labels,
        finding_labels=finding_labels,
        concurrency=opts.get("concurrency", int),
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_ablation(out_dir / "ablation.json", out_dir / "ablation.txt", report)
    print(report.to_text())
    return 0


# ---------------------------------------------------------------------------
# Parser


def _add_common(sub: argparse.ArgumentParser):
    sub.add_argument("--config", help="JSON config file with option defaults")


def _add_corpus_options(sub: argparse.ArgumentParser):
    sub.add_argument("--language", help="source language: python, typescript, cpp, java")
    sub.add_argument("--project-name", dest="project_name",
                     help="project name used in prompts (default: corpus root name)")
    sub.add_argument("--min-tokens", dest="min_tokens", type=int,
                     help="keep pairs whose doc and code each exceed this many tokens")
    sub.add_argument("--no-dedupe", dest="no_dedupe", action="store_true",
                     help="keep exact duplicate pairs")
    sub.add_argument("--sample", type=int, help="uniformly sample this many pairs")
    sub.add_argument("--seed", type=int, help="seed for --sample")


def _add_detect_options(sub: argparse.ArgumentParser):
    sub.add_argument("--variant", help="prompt variant: dp, v1, v2, v3, v4, v6, v7")
    sub.add_argument("--project-kind", dest="project_kind",
                     help='what the project is, e.g. "library" (used in prompts)')
    sub.add_argument("--model", help="model name sent to the endpoint")
    sub.add_argument("--transport", help="live, record, or replay")
    sub.add_argument("--concurrency", type=int, help="max in-flight requests")
    sub.add_argument("--pairs", help="pre-extracted pairs file instead of a corpus root")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docdrift",
        description="Detect function-level code-documentation inconsistencies "
                    "with an LLM.",
        epilog=_EXIT_CODE_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser(
        "extract", help="extract documented functions from a source tree"
    )
    p.add_argument("root", help="corpus root directory")
    p.add_argument("--out", default="-", help="pairs file to write ('-' for stdout)")
    _add_corpus_options(p)
    _add_common(p)
    p.set_defaults(func=cmd_extract)

    p = subparsers.add_parser(
        "detect", help="run inconsistency detection over a corpus"
    )
    p.add_argument("root", nargs="?", help="corpus root directory")
    p.add_argument("--out", default="docdrift-run",
                   help="run directory for pairs, results, report, and fixtures")
    _add_corpus_options(p)
    _add_detect_options(p)
    _add_common(p)
    p.set_defaults(func=cmd_detect)

    p = subparsers.add_parser(
        "report", help="render the HTML report from saved pairs and results"
    )
    p.add_argument("--pairs", required=True, help="pairs file from a detect run")
    p.add_argument("--results", required=True, help="results file from a detect run")
    p.add_argument("--out", default="report.html", help="output file ('-' for stdout)")
    p.add_argument("--model", help="model name shown in the report header")
    _add_common(p)
    p.set_defaults(func=cmd_report)

    p = subparsers.add_parser(
        "eval", help="score saved results against human labels"
    )
    p.add_argument("--results", required=True, help="results file from a detect run")
    p.add_argument("--labels", required=True, help="pair labels file")
    p.add_argument("--finding-labels", dest="finding_labels",
                   help="finding labels file for inconsistency-level metrics")
    p.add_argument("--out", help="write metrics JSON here")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = subparsers.add_parser(
        "ablate", help="run several prompt variants and tabulate metrics"
    )
    p.add_argument("root", nargs="?", help="corpus root directory")
    p.add_argument("--variants", default="v1,v2,v3,v4,v6,v7,dp",
                   help="comma-separated variant list")
    p.add_argument("--labels", help="pair labels file")
    p.add_argument("--finding-labels", dest="finding_labels",
                   help="finding labels file")
    p.add_argument("--fixtures", help="fixture directory (default: OUT/fixtures)")
    p.add_argument("--out", default="docdrift-ablation",
                   help="output directory for the ablation table")
    _add_corpus_options(p)
    _add_detect_options(p)
    _add_common(p)
    p.set_defaults(func=cmd_ablate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DocdriftError as exc:
        print(f"docdrift: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
