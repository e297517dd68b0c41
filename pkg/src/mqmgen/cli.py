"""Command-line pipeline: composable subcommands over files.

Stage boundaries are files (segments JSONL -> response ledger -> outcome
JSONL -> annotation JSONL -> reports/CSV) so the expensive annotation stage
stays re-entrant and auditable. Every subcommand except a live ``annotate``
is deterministic: identical inputs give byte-identical outputs.

Configuration comes from an INI file plus flag overrides (flags win);
exit codes: 0 success, 2 configuration error, 3 data error, 4 provider error.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from . import annotation_parser, data_io, eval_metrics, llm_gateway, prompting, scoring
from .core import SeverityScheme, parse_lang_pair, parse_scheme
from .errors import ConfigError, ContractError, DataError, DegenerateInput, EmptyInput, ProviderError

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_PROVIDER = 4

log = logging.getLogger("mqmgen")


def _load_config(path: Optional[str]) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser()
    if path:
        if not Path(path).exists():
            raise ConfigError(f"config file {path!r} not found")
        cfg.read(path, encoding="utf-8")
    return cfg


def _setting(args_value, cfg: configparser.ConfigParser, section: str, key: str, default=None):
    if args_value is not None:
        return args_value
    if cfg.has_option(section, key):
        return cfg.get(section, key)
    return default


def _require(value, what: str):
    if value is None:
        raise ConfigError(f"missing required setting: {what}")
    return value


def _provider_config(args, cfg) -> llm_gateway.ProviderConfig:
    return llm_gateway.ProviderConfig(
        kind=_setting(getattr(args, "provider", None), cfg, "provider", "kind", "mock"),
        endpoint=_setting(None, cfg, "provider", "endpoint", ""),
        model=_setting(None, cfg, "provider", "model", "mock-model"),
        temperature=float(_setting(None, cfg, "provider", "temperature", "0")),
        timeout=float(_setting(None, cfg, "provider", "timeout", "60")),
        max_retries=int(_setting(None, cfg, "provider", "max_retries", "2")),
        max_in_flight=int(_setting(getattr(args, "concurrency", None), cfg, "provider", "max_in_flight", "4")),
        credential_var=_setting(None, cfg, "provider", "credential_var", ""),
        mock_replies_path=_setting(getattr(args, "mock_replies", None), cfg, "provider", "mock_replies", ""),
        backoff_base=float(_setting(None, cfg, "provider", "backoff_base", "0.5")),
    )


def _lang_pair(args, cfg) -> tuple[str, str]:
    raw = _require(_setting(args.lang_pair, cfg, "run", "lang_pair"), "--lang-pair")
    try:
        return parse_lang_pair(raw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _scheme(args, cfg, default: Optional[str] = None) -> SeverityScheme:
    raw = _setting(getattr(args, "scheme", None), cfg, "run", "scheme", default)
    try:
        return parse_scheme(_require(raw, "--scheme"))
    except ValueError as exc:
        raise ConfigError(f"unknown scheme {raw!r} (use binary, m13, or m3)") from exc


def _divisor(args, cfg) -> float:
    return float(_setting(getattr(args, "divisor", None), cfg, "run", "divisor", "25.0"))


def _write_text(out: Optional[str], text: str) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit(out: Optional[str], fmt: str, tsv_text: str, json_value) -> None:
    if fmt == "json":
        _write_text(out, json.dumps(json_value, ensure_ascii=False, indent=2) + "\n")
    else:
        _write_text(out, tsv_text)


# ---------------------------------------------------------------------------
# Subcommands

def cmd_quiz(args, cfg) -> int:
    pair = _lang_pair(args, cfg)
    prompts = prompting.quiz_prompts(pair)
    _write_text(args.out, json.dumps(prompts, ensure_ascii=False, indent=2) + "\n")
    return 0


def _build_prompts(args, cfg, segments):
    pair = _lang_pair(args, cfg)
    mode = _require(_setting(args.mode, cfg, "run", "mode", "zero"), "--mode")
    if mode not in ("zero", "few"):
        raise ConfigError(f"unknown mode {mode!r} (use zero or few)")
    variant = _setting(getattr(args, "variant", None), cfg, "run", "variant", "standard")
    scheme = _scheme(args, cfg, default="binary" if mode == "zero" else "m3")
    if mode == "zero":
        if scheme is not SeverityScheme.BINARY_LABELS:
            raise ConfigError("zero-shot mode pairs only with the binary scheme")
        prompts = [prompting.build_zero_shot(pair, s, variant=variant) for s in segments]
    else:
        examples_path = _setting(getattr(args, "examples", None), cfg, "paths", "examples")
        if examples_path:
            examples = prompting.load_examples_jsonl(examples_path)
        else:
            examples = prompting.DEFAULT_FEW_SHOT_EXAMPLES_ZH_EN
            if pair != ("zh", "en"):
                log.warning(
                    "no examples file configured for %s-%s; reusing the shipped zh-en examples",
                    *pair,
                )
        prompts = [prompting.build_few_shot(pair, s, examples, scheme=scheme) for s in segments]
    return prompts, scheme


def cmd_annotate(args, cfg) -> int:
    segments_path = _require(_setting(args.segments, cfg, "paths", "segments"), "--segments")
    ledger_path = _require(_setting(args.out, cfg, "paths", "ledger"), "--out (ledger path)")
    segments = data_io.read_segments_jsonl(segments_path)
    if not segments:
        raise DataError(f"{segments_path}: no segments")
    prompts, _ = _build_prompts(args, cfg, segments)
    provider_cfg = _provider_config(args, cfg)
    try:
        responses = llm_gateway.annotate_batch(provider_cfg, prompts, ledger_path=ledger_path)
    except ConfigError:
        raise
    except OSError as exc:
        raise ProviderError(str(exc)) from exc
    ok = sum(1 for r in responses if r.status is llm_gateway.ResponseStatus.OK)
    print(f"responses\t{len(responses)}\tok\t{ok}")
    return 0


def cmd_parse(args, cfg) -> int:
    ledger_path = _require(_setting(args.ledger, cfg, "paths", "ledger"), "--ledger")
    segments_path = _require(_setting(args.segments, cfg, "paths", "segments"), "--segments")
    out_path = _require(_setting(args.out, cfg, "paths", "outcomes"), "--out")
    scheme = _scheme(args, cfg, default="binary")
    divisor = _divisor(args, cfg)
    responses = llm_gateway.read_ledger(ledger_path)
    if not responses:
        raise DataError(f"{ledger_path}: empty ledger")
    segments = {s.id: s for s in data_io.read_segments_jsonl(segments_path)}
    outcomes = annotation_parser.parse_batch(responses, segments, scheme, divisor=divisor)
    annotation_parser.write_outcomes_jsonl(out_path, outcomes)
    parsed = [o.status is annotation_parser.ParseStatus.PARSED for o in outcomes]
    rate = llm_gateway.parse_rate(responses, parsed)
    print(f"parse_rate\t{rate!r}\t{sum(parsed)}/{len(parsed)}")
    return 0


def cmd_score(args, cfg) -> int:
    in_path = _require(_setting(args.infile, cfg, "paths", "outcomes"), "--in")
    out_path = _require(_setting(args.out, cfg, "paths", "annotations"), "--out")
    divisor = _divisor(args, cfg)
    annotations = _read_annotations_any(in_path)
    rescored = []
    for a in annotations:
        pen = scoring.penalty(a.errors)
        rescored.append(dataclasses.replace(
            a, penalty=pen, quality=scoring.quality(pen, divisor=divisor),
        ))
    data_io.write_annotations_jsonl(out_path, rescored)
    print(f"annotations\t{len(rescored)}")
    return 0


def _read_annotations_any(path: str):
    """Accept either outcome JSONL (parsed entries only) or annotation JSONL."""
    with open(path, encoding="utf-8") as fh:
        first = ""
        for line in fh:
            if line.strip():
                first = line
                break
    if first and "\"status\"" in first:
        outcomes = annotation_parser.read_outcomes_jsonl(path)
        return [o.annotation for o in outcomes if o.annotation is not None]
    return data_io.read_annotations_jsonl(path)


def _read_quality_pairs(args) -> list[tuple[float, float]]:
    if getattr(args, "pairs", None):
        pairs = []
        with open(args.pairs, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                cells = line.split("\t")
                if lineno == 1 and not _is_float(cells[0]):
                    continue  # header row
                if len(cells) < 2 or not (_is_float(cells[0]) and _is_float(cells[1])):
                    raise DataError(f"{args.pairs}:{lineno}: expected two numeric columns")
                pairs.append((float(cells[0]), float(cells[1])))
        if not pairs:
            raise DataError(f"{args.pairs}: no score pairs")
        return pairs
    if not (args.pred and args.gold):
        raise ConfigError("need either --pairs or both --pred and --gold")
    pred = _read_annotations_any(args.pred)
    gold = _read_annotations_any(args.gold)
    agg = getattr(args, "gold_agg", None) or "average"
    gold_scores = data_io.segment_quality(gold, agg)
    pred_scores = data_io.segment_quality(pred, "average")
    shared = sorted(set(gold_scores) & set(pred_scores))
    if not shared:
        raise DataError("predictions and gold share no segment ids")
    return [(gold_scores[s], pred_scores[s]) for s in shared]


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def cmd_eval_spans(args, cfg) -> int:
    pred = {a.segment_id: a for a in _read_annotations_any(args.pred)}
    gold = _read_annotations_any(args.gold)
    segments = {s.id: s for s in data_io.read_segments_jsonl(args.segments)}
    from .tokenizer import tokenize

    items = []
    for g in gold:
        p = pred.get(g.segment_id)
        if p is None:
            continue
        seg = segments.get(g.segment_id)
        if seg is None:
            raise ContractError(f"no segment {g.segment_id!r} for span evaluation")
        n_tgt = len(tokenize(seg.target, seg.lang_pair[1]))
        n_src = len(tokenize(seg.source, seg.lang_pair[0]))
        items.append((p, g, n_tgt, n_src))
    if not items:
        raise DataError("no overlapping segments between predictions and gold")
    scores = eval_metrics.corpus_span_scores(items)
    _emit(args.out, args.format, eval_metrics.span_scores_to_tsv(scores),
          dict(eval_metrics.span_scores_to_json(scores), segments=len(items)))
    return 0


def cmd_eval_corr(args, cfg) -> int:
    pairs = _read_quality_pairs(args)
    golds = [g for g, _ in pairs]
    preds = [p for _, p in pairs]
    try:
        pe = eval_metrics.pearson(golds, preds)
        sp = eval_metrics.spearman(golds, preds)
        ke = eval_metrics.kendall(golds, preds)
    except DegenerateInput as exc:
        raise DataError(f"degenerate score vectors: {exc}") from exc
    _emit(args.out, args.format, eval_metrics.correlations_to_tsv(pe, sp, ke),
          eval_metrics.correlations_to_json(pe, sp, ke))
    return 0


def cmd_buckets(args, cfg) -> int:
    pairs = _read_quality_pairs(args)
    boundaries = tuple(float(b) for b in args.boundaries.split(",")) if args.boundaries else (0.8, 0.9)
    report = eval_metrics.bucket_analysis(pairs, boundaries)
    _emit(args.out, args.format, eval_metrics.bucket_report_to_tsv(report),
          eval_metrics.bucket_report_to_json(report))
    return 0


def cmd_agreement(args, cfg) -> int:
    gold = _read_annotations_any(args.gold)
    rows = eval_metrics.annotator_agreement(
        (a.segment_id, a.annotator, a.quality) for a in gold
    )
    _emit(args.out, args.format, eval_metrics.agreement_to_tsv(rows),
          eval_metrics.agreement_to_json(rows))
    return 0


def cmd_stats(args, cfg) -> int:
    annotations = _read_annotations_any(args.infile)
    stats = scoring.error_stats(annotations)
    _emit(args.out, args.format, scoring.stats_to_tsv(stats), scoring.stats_to_json(stats))
    return 0


def cmd_ingest(args, cfg) -> int:
    pair = _lang_pair(args, cfg)
    loaded = data_io.load_gold_tsv(args.tsv, pair)
    seen = set()
    segments = []
    for seg, _ in loaded:
        if seg.id not in seen:
            seen.add(seg.id)
            segments.append(seg)
    data_io.write_segments_jsonl(args.out_segments, segments)
    data_io.write_annotations_jsonl(args.out_annotations, (a for _, a in loaded))
    print(f"segments\t{len(segments)}\tannotations\t{len(loaded)}")
    return 0


def cmd_export_qe(args, cfg) -> int:
    annotations = _read_annotations_any(args.annotations)
    segments = data_io.read_segments_jsonl(args.segments)
    count = data_io.export_qe_csv(annotations, segments, args.out, mode=args.agg)
    print(f"rows\t{count}")
    return 0


# ---------------------------------------------------------------------------
# Argument wiring

def build_arg_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", default=argparse.SUPPRESS,
        help="INI config file; flags override its values",
    )
    parser = argparse.ArgumentParser(prog="mqmgen", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_, parents=[common])
        p.set_defaults(fn=fn)
        return p

    p = add("quiz", cmd_quiz, "emit the five MQM knowledge-test prompts")
    p.add_argument("--lang-pair")
    p.add_argument("--out")

    p = add("annotate", cmd_annotate, "send annotation prompts, append the raw-response ledger")
    p.add_argument("--segments")
    p.add_argument("--lang-pair")
    p.add_argument("--mode", choices=["zero", "few"])
    p.add_argument("--scheme", choices=["binary", "m13", "m3"])
    p.add_argument("--provider", choices=["remote", "mock"])
    p.add_argument("--variant", choices=["standard", "basic"])
    p.add_argument("--examples")
    p.add_argument("--mock-replies")
    p.add_argument("--concurrency", type=int)
    p.add_argument("--out", help="ledger JSONL path (appended)")

    p = add("parse", cmd_parse, "parse the response ledger into outcome JSONL")
    p.add_argument("--ledger")
    p.add_argument("--segments")
    p.add_argument("--scheme", choices=["binary", "m13", "m3"])
    p.add_argument("--divisor", type=float)
    p.add_argument("--out")

    p = add("score", cmd_score, "recompute penalties/qualities into annotation JSONL")
    p.add_argument("--in", dest="infile")
    p.add_argument("--divisor", type=float)
    p.add_argument("--out")

    p = add("eval-spans", cmd_eval_spans, "corpus span/severity/type F1 against gold")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--segments", required=True)
    p.add_argument("--format", choices=["tsv", "json"], default="tsv")
    p.add_argument("--out")

    p = add("eval-corr", cmd_eval_corr, "Pearson/Spearman/Kendall on quality scores")
    p.add_argument("--pairs", help="TSV of gold<TAB>pred scores (optional header)")
    p.add_argument("--pred")
    p.add_argument("--gold")
    p.add_argument("--gold-agg", choices=["average", "first"])
    p.add_argument("--format", choices=["tsv", "json"], default="tsv")
    p.add_argument("--out")

    p = add("buckets", cmd_buckets, "correlations per gold-quality bucket")
    p.add_argument("--pairs")
    p.add_argument("--pred")
    p.add_argument("--gold")
    p.add_argument("--gold-agg", choices=["average", "first"])
    p.add_argument("--boundaries", help="comma-separated bucket boundaries, default 0.8,0.9")
    p.add_argument("--format", choices=["tsv", "json"], default="tsv")
    p.add_argument("--out")

    p = add("agreement", cmd_agreement, "inter-annotator correlations on shared segments")
    p.add_argument("--gold", required=True)
    p.add_argument("--format", choices=["tsv", "json"], default="tsv")
    p.add_argument("--out")

    p = add("stats", cmd_stats, "per-annotator error counts and ratios")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--format", choices=["tsv", "json"], default="tsv")
    p.add_argument("--out")

    p = add("ingest", cmd_ingest, "ingest WMT gold TSV into segments + annotations JSONL")
    p.add_argument("--tsv", required=True)
    p.add_argument("--lang-pair")
    p.add_argument("--out-segments", required=True)
    p.add_argument("--out-annotations", required=True)

    p = add("export-qe", cmd_export_qe, "export src,mt,score training CSV")
    p.add_argument("--annotations", required=True)
    p.add_argument("--segments", required=True)
    p.add_argument("--agg", choices=["average", "first"], default="average")
    p.add_argument("--out", required=True)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(getattr(args, "config", None))
        return args.fn(args, cfg)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except ProviderError as exc:
        log.error("provider error: %s", exc)
        return EXIT_PROVIDER
    except (DataError, ContractError, EmptyInput, ValueError) as exc:
        log.error("data error: %s", exc)
        return EXIT_DATA
    except OSError as exc:
        log.error("i/o error: %s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
