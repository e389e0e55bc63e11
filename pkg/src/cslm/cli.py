"""Command-line front end.

One binary with subcommands; config files are INI-style key=value sections
and command-line flags win over config values.  Exit codes: 0 success,
1 usage or config error, 2 data or parse error, 3 numerical failure.
All outputs are written atomically (temp file + rename) and are
byte-reproducible for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import augment, demo, evaluate, neural, ngram
from .corpus import (
    Corpus,
    CorpusError,
    Lang,
    build_vocab,
    corpus_to_lines,
    cs_stats,
    parse_corpus,
    stats_report,
    stats_tsv,
    word_tag_map,
    write_corpus,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class ConfigError(Exception):
    """One or more configuration problems; message lists all of them."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_bytes(path, writer) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


_LANG_CHOICES = {"fy": Lang.L1, "nl": Lang.L2, "mix": Lang.MIXED, "none": Lang.UNTAGGED}


def _read_corpus(path, default_lang: str = "none", source_label: str = "orig") -> Corpus:
    return parse_corpus(path, _LANG_CHOICES[default_lang], source_label)


# ---------------------------------------------------------------------------
# Config files


def load_config(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with path.open("r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parser


def _recipe_from_section(cfg, section: str) -> augment.MixRecipe:
    components = []
    for label, value in cfg.items(section):
        parts = value.split()
        if len(parts) != 2:
            raise ConfigError(f"[{section}] {label}: expected '<max_tokens|all> <repeat>', got {value!r}")
        max_tokens = None if parts[0] == "all" else int(parts[0])
        components.append(augment.MixComponent(label, max_tokens, int(parts[1])))
    return augment.MixRecipe(components)


def _config_paths(cfg, base: Path) -> dict[str, Path]:
    if not cfg.has_section("paths"):
        raise ConfigError("config lacks a [paths] section")
    return {label: (base / value).resolve() for label, value in cfg.items("paths")}


def validate_ladder_config(cfg, base: Path) -> list[str]:
    """Collect every problem instead of stopping at the first."""
    problems = []
    try:
        paths = _config_paths(cfg, base)
    except ConfigError as exc:
        return [str(exc)]
    for label, path in paths.items():
        if not path.exists():
            problems.append(f"[paths] {label}: file not found: {path}")
    for required in ("dev", "test"):
        if required not in paths:
            problems.append(f"[paths] lacks required entry {required!r}")
    if not cfg.has_section("ladder") or not cfg.has_option("ladder", "configs"):
        problems.append("[ladder] section with a 'configs' option is required")
        return problems
    names = [n.strip() for n in cfg.get("ladder", "configs").split(",") if n.strip()]
    if not names:
        problems.append("[ladder] configs lists no names")
    for name in names:
        section = f"mix.{name}"
        if not cfg.has_section(section):
            problems.append(f"missing [{section}] section for ladder config {name!r}")
            continue
        try:
            recipe = _recipe_from_section(cfg, section)
        except (ConfigError, ValueError, augment.AugmentError) as exc:
            problems.append(f"[{section}]: {exc}")
            continue
        for comp in recipe.components:
            if comp.label in ("dev", "test"):
                problems.append(f"[{section}] may not mix the held-out corpus {comp.label!r}")
            elif comp.label not in paths:
                problems.append(f"[{section}] references unknown corpus label {comp.label!r}")
    if cfg.has_option("ngram", "order"):
        try:
            order = cfg.getint("ngram", "order")
            if order < 1:
                problems.append("[ngram] order must be >= 1")
        except ValueError:
            problems.append(f"[ngram] order is not an integer: {cfg.get('ngram', 'order')!r}")
    if cfg.has_option("run", "seed"):
        try:
            cfg.getint("run", "seed")
        except ValueError:
            problems.append(f"[run] seed is not an integer: {cfg.get('run', 'seed')!r}")
    return problems


# ---------------------------------------------------------------------------
# Subcommands


def cmd_stats(args) -> int:
    corpus = _read_corpus(args.corpus, args.default_lang)
    stats = cs_stats(corpus)
    if args.tsv:
        sys.stdout.write(stats_tsv(stats))
    else:
        sys.stdout.write(stats_report(stats))
    return EXIT_OK


def cmd_train_ngram(args) -> int:
    corpus = _read_corpus(args.text, args.default_lang)
    vocab = build_vocab([corpus], min_count=args.min_count, max_size=args.max_size)
    lm = ngram.train_ngram_lm(corpus, vocab, args.order, prune_min_count=args.prune_min_count)
    _atomic_write(args.out, ngram.render_arpa(lm))
    counts = " ".join(f"{k + 1}-grams={n}" for k, n in enumerate(lm.ngram_counts()))
    print(f"wrote {args.out} (order {args.order}, vocab {vocab.size}, {counts})")
    return EXIT_OK


def cmd_ppl(args) -> int:
    lm = ngram.read_arpa(args.lm)
    corpus = _read_corpus(args.text, args.default_lang)
    result = ngram.perplexity(lm, corpus)
    sys.stdout.write(result.report())
    if args.report:
        _atomic_write(args.report, result.report())
    return EXIT_OK


def cmd_train_nn(args) -> int:
    corpus = _read_corpus(args.text, args.default_lang)
    vocab = build_vocab([corpus], min_count=args.min_count, max_size=args.max_size)
    params = neural.init_params(vocab.size, args.embed_dim, args.hidden_dim, args.layers, args.seed)
    config = neural.TrainConfig(
        bptt_len=args.bptt,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        lr_decay=args.lr_decay,
        grad_clip_norm=args.clip,
        epochs=args.epochs,
        seed=args.seed,
        dropout_keep=args.dropout_keep,
    )
    valid = _read_corpus(args.valid, args.default_lang) if args.valid else None
    result = neural.train(params, corpus, vocab, config, valid_corpus=valid)
    _atomic_write_bytes(
        args.out,
        lambda tmp: neural.save_params(tmp, result.params, vocab, seed=args.seed, epoch=args.epochs),
    )
    if args.trace:
        _atomic_write(args.trace, neural.trace_tsv(result.trace))
    last = result.trace[-1] if result.trace else None
    if last:
        print(
            f"wrote {args.out} (V={vocab.size}, {params.param_count()} params, "
            f"final valid ppl {last.valid_ppl:.2f})"
        )
    else:
        print(f"wrote {args.out} (V={vocab.size}, untrained)")
    return EXIT_OK


def cmd_generate(args) -> int:
    params, vocab, _ = neural.load_params(args.model)
    tag_map = None
    if args.tag_from:
        tag_map = word_tag_map(_read_corpus(args.tag_from, args.default_lang))
    config = neural.SampleConfig(
        temperature=args.temperature,
        max_tokens=args.tokens,
        seed=args.seed,
        forbid_unk=not args.allow_unk,
        greedy=args.greedy,
    )
    corpus = augment.generate_corpus(
        params,
        vocab,
        args.tokens,
        config,
        tag_map=tag_map,
        max_utterance_tokens=args.max_utterance_tokens,
        source_label=args.label,
    )
    _atomic_write(args.out, "".join(line + "\n" for line in corpus_to_lines(corpus)))
    print(f"wrote {args.out} ({corpus.token_count()} tokens, {len(corpus)} utterances)")
    return EXIT_OK


def cmd_translate(args) -> int:
    corpus = _read_corpus(args.text, args.default_lang)
    lexicon = augment.load_lexicon(
        args.lexicon, _LANG_CHOICES[args.source_lang], _LANG_CHOICES[args.target_lang]
    )
    result = augment.dict_translate(corpus, lexicon)
    _atomic_write(args.out, "".join(line + "\n" for line in corpus_to_lines(result.corpus)))
    report = result.report
    summary = (
        f"substituted={report.substituted}\n"
        f"passthrough={report.passthrough}\n"
        f"capitalized_passthrough={report.capitalized_passthrough}\n"
    )
    sys.stdout.write(summary)
    if args.report:
        _atomic_write(args.report, summary)
    return EXIT_OK


def cmd_ingest(args) -> int:
    result = augment.ingest_transcriptions(args.files, args.label)
    _atomic_write(args.out, "".join(line + "\n" for line in corpus_to_lines(result.corpus)))
    print(
        f"wrote {args.out} ({result.corpus.token_count()} tokens, "
        f"duplicate_rate={result.duplicate_rate:.4f})"
    )
    return EXIT_OK


def cmd_mix(args) -> int:
    cfg = load_config(args.config)
    base = Path(args.config).resolve().parent
    paths = _config_paths(cfg, base)
    section = f"mix.{args.recipe}"
    if not cfg.has_section(section):
        raise ConfigError(f"no [{section}] section in {args.config}")
    recipe = _recipe_from_section(cfg, section)
    corpora = []
    for comp in recipe.components:
        if comp.label not in paths:
            raise ConfigError(f"[{section}] references unknown corpus label {comp.label!r}")
        corpora.append(_read_corpus(paths[comp.label], source_label=comp.label))
    seed = args.seed if args.seed is not None else cfg.getint("run", "seed", fallback=0)
    result = augment.mix_corpora(corpora, recipe, seed, shuffle=args.shuffle)
    _atomic_write(args.out, "".join(line + "\n" for line in corpus_to_lines(result.corpus)))
    print(f"wrote {args.out} ({result.composition()})")
    return EXIT_OK


def cmd_rescore(args) -> int:
    entries = evaluate.read_nbest(args.nbest)
    lm = ngram.read_arpa(args.lm) if args.lm else None
    scorer = None
    if args.model:
        params, vocab, _ = neural.load_params(args.model)
        scorer = neural.NeuralScorer(params, vocab)
    chosen = evaluate.rescore_nbest(
        entries, lm, scorer, lm_weight=args.lm_weight, acoustic_weight=args.acoustic_weight
    )
    corpus = evaluate.selection_to_corpus(chosen)
    _atomic_write(args.out, "".join(line + "\n" for line in corpus_to_lines(corpus, with_ids=True)))
    flips = sum(1 for entry in chosen.values() if entry.rank != 1)
    print(f"wrote {args.out} ({len(chosen)} utterances, {flips} selections differ from rank 1)")
    return EXIT_OK


def cmd_wer(args) -> int:
    reference = _read_corpus(args.ref, args.default_lang)
    hypothesis = _read_corpus(args.hyp, args.default_lang)
    conditions = evaluate.read_condition_map(args.conditions) if args.conditions else None
    if args.jobs > 1:
        # Per-utterance alignments are independent; order-preserving map keeps
        # the reduction deterministic at any job count.
        ref_by_id = {u.id: u for u in reference}
        hyp_by_id = {u.id: u for u in hypothesis}
        if set(ref_by_id) != set(hyp_by_id):
            raise evaluate.EvalError("utterance ids do not match between ref and hyp")
        ids = sorted(ref_by_id)

        def render(utt):
            return [t.surface for t in utt.tokens] if not args.keep_tags else [t.render() for t in utt.tokens]

        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            counts = list(
                pool.map(
                    lambda i: evaluate.align_counts(render(ref_by_id[i]), render(hyp_by_id[i])), ids
                )
            )
        result = evaluate.WerResult()
        for utt_id, c in zip(ids, counts):
            result.add(c)
            if conditions and utt_id in conditions:
                result.by_condition.setdefault(conditions[utt_id], evaluate.WerCounts()).add(c)
    else:
        result = evaluate.wer(reference, hypothesis, strip_tags=not args.keep_tags, condition_map=conditions)
    sys.stdout.write(result.report())
    if args.report:
        _atomic_write(args.report, result.report())
    return EXIT_OK


def cmd_ladder(args) -> int:
    cfg = load_config(args.config)
    base = Path(args.config).resolve().parent
    problems = validate_ladder_config(cfg, base)
    if problems:
        raise ConfigError("invalid ladder config:\n  " + "\n  ".join(problems))
    paths = _config_paths(cfg, base)
    order = args.order if args.order is not None else cfg.getint("ngram", "order", fallback=3)
    seed = args.seed if args.seed is not None else cfg.getint("run", "seed", fallback=0)
    min_count = cfg.getint("vocab", "min_count", fallback=1)
    max_size = cfg.getint("vocab", "max_size", fallback=0) or None
    names = [n.strip() for n in cfg.get("ladder", "configs").split(",") if n.strip()]
    configs = [(name, _recipe_from_section(cfg, f"mix.{name}"), order) for name in names]
    needed = sorted({comp.label for _, recipe, _ in configs for comp in recipe.components})
    components = [_read_corpus(paths[label], source_label=label) for label in needed]
    dev = _read_corpus(paths["dev"], source_label="dev")
    test = _read_corpus(paths["test"], source_label="test")
    vocab = build_vocab(components, min_count=min_count, max_size=max_size)

    if args.jobs > 1:
        # Configs are independent given the fixed vocabulary; report order
        # stays the input order.
        def one(config):
            return evaluate.run_ladder([config], components, dev, test, vocab=vocab, seed=seed).rows[0]

        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(one, configs))
        report = evaluate.LadderReport(rows)
    else:
        report = evaluate.run_ladder(configs, components, dev, test, vocab=vocab, seed=seed)
    _atomic_write(args.out, report.to_tsv())
    sys.stdout.write(report.to_table())
    selected = report.selected()
    print(f"selected on dev: {selected.name} (dev {selected.dev_ppl:.1f}, test {selected.test_ppl:.1f})")
    return EXIT_OK


def cmd_demo(args) -> int:
    data = demo.build_demo(
        seed=args.seed,
        orig_tokens=args.orig_tokens,
        dev_tokens=args.dev_tokens,
        test_tokens=args.test_tokens,
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def write_plain(name, corpus):
        _atomic_write(out / name, "".join(line + "\n" for line in corpus_to_lines(corpus)))

    write_plain("orig.txt", data.orig)
    write_plain("dev.txt", data.dev)
    write_plain("test.txt", data.test)
    write_plain("aa_mono.txt", data.aa_mono)
    write_plain("aa_biling.txt", data.aa_biling)
    write_plain("mt_source.txt", data.mt_source)
    lex_lines = [f"{src}\t{tgt}" for src, tgt in sorted(data.lexicon.entries.items())]
    _atomic_write(out / "lexicon.tsv", "".join(line + "\n" for line in lex_lines))
    nbest_lines = [
        f"{e.utterance_id}\t{e.rank}\t{e.acoustic_score:.6f}\t{e.lm_score:.6f}\t{e.render_hypothesis()}"
        for e in data.nbest
    ]
    _atomic_write(out / "nbest.tsv", "".join(line + "\n" for line in nbest_lines))
    ref_ids = {e.utterance_id for e in data.nbest}
    ref = Corpus([u for u in data.dev if u.id in ref_ids], "ref")
    _atomic_write(out / "ref.txt", "".join(line + "\n" for line in corpus_to_lines(ref, with_ids=True)))
    cond_lines = [f"{utt_id}\t{label}" for utt_id, label in sorted(data.conditions.items())]
    _atomic_write(out / "conditions.tsv", "".join(line + "\n" for line in cond_lines))
    _atomic_write(out / "demo.cfg", _DEMO_CONFIG)
    print(f"wrote demo dataset to {out} ({data.orig.token_count()} orig tokens)")
    return EXIT_OK


_DEMO_CONFIG = """\
# Desk-scale experiment config. Build gen.txt first:
#   cslm train-nn --text orig.txt --out lstm.bin --valid dev.txt \\
#       --epochs 3 --lr 5.0 --batch-size 8 --bptt 16
#   cslm generate --model lstm.bin --tokens 50000 --tag-from orig.txt --out gen.txt
#   cslm translate --text mt_source.txt --lexicon lexicon.tsv --out mt.txt
[paths]
orig = orig.txt
gen = gen.txt
aa-mono = aa_mono.txt
aa-biling = aa_biling.txt
mt = mt.txt
dev = dev.txt
test = test.txt

[vocab]
min_count = 1
max_size = 0

[ngram]
order = 3

[run]
seed = 0

[mix.baseline]
orig = all 1

[mix.gen50k]
orig = all 1
gen = 50000 1

[mix.gen_aa]
orig = all 1
gen = 50000 1
aa-mono = all 1
aa-biling = all 1

[mix.gen_aa_mt]
orig = all 1
gen = 50000 1
aa-mono = all 1
aa-biling = all 1
mt = all 1

[ladder]
configs = baseline, gen50k, gen_aa, gen_aa_mt
"""


def build_parser() -> _Parser:
    parser = _Parser(prog="cslm", description="Code-switching language modeling toolkit")
    sub = parser.add_subparsers(
        dest="command", required=True, metavar="COMMAND", parser_class=_Parser
    )

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(fn=fn)
        p.add_argument("--default-lang", choices=sorted(_LANG_CHOICES), default="none",
                       help="language assigned to untagged tokens (default: none)")
        return p

    p = add("stats", cmd_stats, "code-switching statistics of a tagged corpus")
    p.add_argument("corpus", help="corpus file")
    p.add_argument("--tsv", action="store_true", help="tab-separated output")

    p = add("train-ngram", cmd_train_ngram, "estimate a Kneser-Ney n-gram model, write ARPA")
    p.add_argument("--text", required=True, help="training corpus")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--min-count", type=int, default=1, help="vocabulary count threshold")
    p.add_argument("--max-size", type=int, default=None, help="vocabulary size cap")
    p.add_argument("--prune-min-count", type=int, default=None,
                   help="drop higher-order n-grams below this count (default: no pruning)")
    p.add_argument("--out", required=True, help="output ARPA file")

    p = add("ppl", cmd_ppl, "perplexity of a corpus under an ARPA model")
    p.add_argument("--lm", required=True, help="ARPA file")
    p.add_argument("--text", required=True, help="evaluation corpus")
    p.add_argument("--report", help="also write the key=value report here")

    p = add("train-nn", cmd_train_nn, "train the tied LSTM language model")
    p.add_argument("--text", required=True, help="training corpus")
    p.add_argument("--valid", help="validation corpus (default: 10%% carved from --text)")
    p.add_argument("--out", required=True, help="output checkpoint")
    p.add_argument("--trace", help="write the per-epoch trace TSV here")
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--max-size", type=int, default=None)
    p.add_argument("--embed-dim", type=int, default=128)
    p.add_argument("--hidden-dim", type=int, default=128)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=1.0)
    p.add_argument("--lr-decay", type=float, default=0.5)
    p.add_argument("--clip", type=float, default=5.0)
    p.add_argument("--bptt", type=int, default=35)
    p.add_argument("--batch-size", type=int, default=20)
    p.add_argument("--dropout-keep", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)

    p = add("generate", cmd_generate, "sample text from a trained LSTM checkpoint")
    p.add_argument("--model", required=True, help="checkpoint from train-nn")
    p.add_argument("--tokens", type=int, required=True, help="target token count")
    p.add_argument("--out", required=True)
    p.add_argument("--tag-from", help="corpus whose majority tags label the generated words")
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--greedy", action="store_true", help="argmax decoding")
    p.add_argument("--allow-unk", action="store_true")
    p.add_argument("--max-utterance-tokens", type=int, default=None)
    p.add_argument("--label", default="gen")

    p = add("translate", cmd_translate, "word-by-word pseudo-translation through a lexicon")
    p.add_argument("--text", required=True)
    p.add_argument("--lexicon", required=True, help="tab-separated source/target pairs")
    p.add_argument("--source-lang", choices=sorted(_LANG_CHOICES), default="nl")
    p.add_argument("--target-lang", choices=sorted(_LANG_CHOICES), default="fy")
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="write the substitution report here")

    p = add("ingest", cmd_ingest, "merge hypothesis-transcription files into one corpus")
    p.add_argument("files", nargs="+", help="corpus-format hypothesis files")
    p.add_argument("--label", required=True, help="source label, e.g. aa-both")
    p.add_argument("--out", required=True)

    p = add("mix", cmd_mix, "assemble a training corpus from a mix recipe")
    p.add_argument("--config", required=True)
    p.add_argument("--recipe", required=True, help="name of the [mix.<name>] section")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--shuffle", action="store_true")
    p.add_argument("--out", required=True)

    p = add("rescore", cmd_rescore, "pick the best n-best hypothesis per utterance")
    p.add_argument("--nbest", required=True, help="utt_id/rank/acoustic/lm/hypothesis TSV")
    p.add_argument("--lm", help="ARPA model (required unless --lm-weight 1)")
    p.add_argument("--model", help="LSTM checkpoint (required unless --lm-weight 0)")
    p.add_argument("--lm-weight", type=float, default=0.5,
                   help="neural weight within the LM score (0=ngram only, 1=neural only)")
    p.add_argument("--acoustic-weight", type=float, default=1.0)
    p.add_argument("--out", required=True, help="selected hypotheses, id<TAB>tokens per line")

    p = add("wer", cmd_wer, "word error rate between reference and hypothesis corpora")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--keep-tags", action="store_true",
                   help="compare tagged forms instead of stripping language tags")
    p.add_argument("--conditions", help="utt_id<TAB>label map for subset breakdowns")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--report", help="write the report here")

    p = add("ladder", cmd_ladder, "train and evaluate every configured mix")
    p.add_argument("--config", required=True)
    p.add_argument("--order", type=int, default=None, help="override [ngram] order")
    p.add_argument("--seed", type=int, default=None, help="override [run] seed")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="report TSV")

    p = add("demo", cmd_demo, "write the bundled synthetic desk-scale dataset")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--orig-tokens", type=int, default=150_000)
    p.add_argument("--dev-tokens", type=int, default=8_000)
    p.add_argument("--test-tokens", type=int, default=8_000)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"cslm: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CorpusError, ngram.NGramError, augment.AugmentError, evaluate.EvalError,
            neural.NeuralLMError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"cslm: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (neural.NumericalError, neural.SamplingError) as exc:
        print(f"cslm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
