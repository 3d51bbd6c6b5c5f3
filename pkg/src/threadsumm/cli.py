"""Command-line entry point.

Subcommands: build-corpus, stats, summarize, evaluate, upper-bound,
train-classifier. Exit status is 0 on success, 1 on usage errors and 2 on
data errors; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from functools import partial
from pathlib import Path
from typing import Sequence

from ._parallel import ordered_map
from .corpus import (
    CorpusFormatError,
    FilterConfig,
    SummaryInstance,
    build_corpus,
    corpus_stats,
    jsonl_sink,
    read_corpus,
)
from .evaluation import evaluate_corpus, greedy_upper_bound
from .opinio import (
    FactOpinionModel,
    OpinioConfig,
    SentimentLexicon,
    default_lexicon,
    default_model,
    opiniosumm,
    read_labeled,
    train_fact_opinion,
)
from .summarize import BASELINES, Summary, SummarizationError, SummaryConfig, candidate_sentences
from .textcore import split_sentences

log = logging.getLogger("threadsumm")

ALGORITHMS = (*BASELINES, "opiniosumm")
UPPER_BOUND = "upper-bound"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ------------------------------------------------------------------ config

@dataclasses.dataclass(frozen=True)
class ClassifierParams:
    classifier_dim: int = 1 << 18
    classifier_epochs: int = 20
    classifier_learning_rate: float = 0.5
    classifier_l2: float = 1e-4


@dataclasses.dataclass(frozen=True)
class RunConfig:
    filter: FilterConfig = FilterConfig()
    summary: SummaryConfig = SummaryConfig()
    window: int = 20
    boundary_k: float = 0.5
    coherence_min: float = 0.2
    classifier: ClassifierParams = ClassifierParams()
    seed: int = 0

    @property
    def opinio(self) -> OpinioConfig:
        return OpinioConfig(self.window, self.boundary_k, self.coherence_min, self.summary)


def _field_types() -> dict[str, tuple[str, type]]:
    """Flat key -> (section, type) for every overridable setting."""
    keys = {}
    for section, cls in (("filter", FilterConfig), ("summary", SummaryConfig),
                         ("classifier", ClassifierParams)):
        for f in dataclasses.fields(cls):
            keys[f.name] = (section, type(getattr(cls(), f.name)))
    for name in ("window", "boundary_k", "coherence_min", "seed"):
        keys[name] = ("", type(getattr(RunConfig(), name)))
    return keys


def parse_config_lines(lines: Sequence[str], source: str) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{source}:{lineno}: expected key=value")
        out[key.strip()] = value.strip()
    return out


def make_config(overrides: dict[str, str]) -> RunConfig:
    types = _field_types()
    sections: dict[str, dict] = {"filter": {}, "summary": {}, "classifier": {}, "": {}}
    for key, raw in overrides.items():
        if key not in types:
            raise UsageError(f"unknown config key {key!r}")
        section, typ = types[key]
        try:
            sections[section][key] = typ(raw)
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {raw!r}") from exc
    try:
        return RunConfig(
            filter=FilterConfig(**sections["filter"]),
            summary=SummaryConfig(**sections["summary"]),
            classifier=ClassifierParams(**sections["classifier"]),
            **sections[""],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def config_items(config: RunConfig) -> list[tuple[str, str]]:
    flat = {}
    for section in (config.filter, config.summary, config.classifier):
        flat.update(dataclasses.asdict(section))
    for name in ("window", "boundary_k", "coherence_min", "seed"):
        flat[name] = getattr(config, name)
    return sorted((k, repr(v) if isinstance(v, float) else str(v)) for k, v in flat.items())


def echo_config(config: RunConfig, artifact: str | Path, extra: dict[str, str] | None = None) -> None:
    """Write the effective config beside ``artifact`` as ``<artifact>.config``."""
    lines = [f"# effective configuration for {Path(artifact).name}"]
    lines += [f"# {k}: {v}" for k, v in sorted((extra or {}).items())]
    lines += [f"{k}={v}" for k, v in config_items(config)]
    Path(f"{artifact}.config").write_text("\n".join(lines) + "\n", encoding="utf-8")


# ------------------------------------------------------------- subcommands

def summary_record(sid: str, algorithm: str, summary: Summary) -> str:
    record = {
        "id": sid,
        "algorithm": algorithm,
        "summary": summary.text,
        "picks": [list(p) for p in summary.picks],
    }
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def read_summaries(path: str | Path) -> list[tuple[str, str, str]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out.append((str(rec["id"]), rec["algorithm"], rec["summary"]))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad summary record ({exc})") from exc
    return out


def load_corpus(path: str | Path) -> list[SummaryInstance]:
    with open(path, encoding="utf-8") as fh:
        return read_corpus(fh)


def summarize_instance(
    instance: SummaryInstance,
    algorithm: str,
    config: RunConfig,
    model: FactOpinionModel | None = None,
    lexicon: SentimentLexicon | None = None,
) -> Summary:
    try:
        if algorithm == "opiniosumm":
            return opiniosumm(instance, model, lexicon, config.opinio)
        return BASELINES[algorithm](candidate_sentences(instance.candidates), config.summary)
    except SummarizationError:
        return Summary((), "", 0)


def upper_bound_instance(instance: SummaryInstance, config: RunConfig) -> Summary:
    sentences = [s for d, doc in enumerate(instance.candidates)
                 for s in split_sentences(doc, doc_index=d)]
    summary, _ = greedy_upper_bound(sentences, instance.reference, config.summary.budget_words)
    return summary


def cmd_build_corpus(args, config: RunConfig) -> None:
    with open(args.input, "rb") as src, open(args.output, "w", encoding="utf-8", newline="\n") as dst:
        stats = build_corpus(src, config.filter, jsonl_sink(dst), jobs=args.jobs)
    echo_config(config, args.output)
    report = stats.report()
    if args.stats:
        Path(args.stats).write_text(report, encoding="utf-8")
    log.info("accepted %d of %d records", stats.threads, stats.records)
    sys.stderr.write(report)


def cmd_stats(args, config: RunConfig) -> None:
    report = corpus_stats(load_corpus(args.corpus)).report()
    if args.output:
        Path(args.output).write_text(report, encoding="utf-8")
    else:
        sys.stdout.write(report)


def cmd_summarize(args, config: RunConfig) -> None:
    corpus = load_corpus(args.input)
    model = lexicon = None
    if args.algo == "opiniosumm":
        model = FactOpinionModel.load(args.model) if args.model else default_model(config.seed)
        lexicon = SentimentLexicon.load(args.lexicon) if args.lexicon else default_lexicon()
    fn = partial(summarize_instance, algorithm=args.algo, config=config, model=model, lexicon=lexicon)
    with open(args.output, "w", encoding="utf-8", newline="\n") as dst:
        for inst, summary in zip(corpus, ordered_map(fn, corpus, args.jobs)):
            dst.write(summary_record(inst.id, args.algo, summary) + "\n")
    extra = {"algorithm": args.algo, "model": args.model or "bundled", "lexicon": args.lexicon or "bundled"}
    echo_config(config, args.output, extra)


def cmd_upper_bound(args, config: RunConfig) -> None:
    corpus = load_corpus(args.input)
    fn = partial(upper_bound_instance, config=config)
    with open(args.output, "w", encoding="utf-8", newline="\n") as dst:
        for inst, summary in zip(corpus, ordered_map(fn, corpus, args.jobs)):
            dst.write(summary_record(inst.id, UPPER_BOUND, summary) + "\n")
    echo_config(config, args.output)


def cmd_evaluate(args, config: RunConfig) -> None:
    corpus = load_corpus(args.corpus)
    summaries = [row for path in args.summaries for row in read_summaries(path)]
    report = evaluate_corpus(corpus, summaries)
    Path(args.report).write_text(report.to_tsv(), encoding="utf-8", newline="\n")
    echo_config(config, args.report)
    if not args.no_figures:
        from .figures import render_report_figures

        for path in render_report_figures(report, args.report):
            log.info("wrote %s", path)


def cmd_train_classifier(args, config: RunConfig) -> None:
    with open(args.input, encoding="utf-8") as fh:
        examples = read_labeled(fh)
    c = config.classifier
    model = train_fact_opinion(
        examples, dim=c.classifier_dim, seed=config.seed, epochs=c.classifier_epochs,
        learning_rate=c.classifier_learning_rate, l2=c.classifier_l2,
    )
    model.save(args.output)
    echo_config(config, args.output)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key=value file merged over the defaults")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable, wins over --config)")
    common.add_argument("--seed", type=int, help="global seed (same as --set seed=N)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="threadsumm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build-corpus", parents=[common], help="filter an L6 XML dump into a corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--stats", help="also write the statistics report here")
    p.set_defaults(func=cmd_build_corpus)

    p = sub.add_parser("stats", parents=[common], help="corpus statistics report")
    p.add_argument("--corpus", "--input", dest="corpus", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("summarize", parents=[common], help="summarize every corpus instance")
    p.add_argument("--algo", required=True, choices=ALGORITHMS)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--model", help="fact/opinion model (default: trained on the bundled seed set)")
    p.add_argument("--lexicon", help="sentiment lexicon TSV (default: bundled)")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("evaluate", parents=[common], help="ROUGE report for summary files")
    p.add_argument("--corpus", required=True)
    p.add_argument("--summaries", required=True, nargs="+")
    p.add_argument("--report", required=True)
    p.add_argument("--no-figures", action="store_true", help="skip the PNG figures")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser(UPPER_BOUND, parents=[common], help="greedy extractive ROUGE-1 upper bound")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_upper_bound)

    p = sub.add_parser("train-classifier", parents=[common], help="train the fact/opinion model")
    p.add_argument("--input", required=True, help="fact|opinion<TAB>text lines")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_train_classifier)
    return parser


def resolve_config(args) -> RunConfig:
    overrides: dict[str, str] = {}
    if args.config:
        try:
            lines = Path(args.config).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        overrides.update(parse_config_lines(lines, args.config))
    overrides.update(parse_config_lines(args.set, "--set"))
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    return make_config(overrides)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        config = resolve_config(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        args.func(args, config)
    except (CorpusFormatError, ValueError, KeyError, OSError) as exc:
        print(f"threadsumm {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
