"""Synthetic training-text sources and corpus mixing.

Three enrichment routes: sampling text from a trained neural LM, pseudo-
translation through a word lexicon (untranslatable words pass through and
create code-switch points), and ingestion of externally produced hypothesis
transcriptions.  A mix recipe assembles the final training corpus.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import (
    Corpus,
    CorpusError,
    Lang,
    TaggedToken,
    Utterance,
    parse_corpus,
)
from . import neural


class AugmentError(ValueError):
    """Invalid augmentation inputs."""


@dataclass
class TranslationLexicon:
    entries: dict[str, str]
    source_lang: Lang = Lang.L2
    target_lang: Lang = Lang.L1

    def __post_init__(self):
        for src, tgt in self.entries.items():
            if not src or not tgt:
                raise AugmentError(f"lexicon entry with empty side: {src!r} -> {tgt!r}")
            if any(ch.isspace() for ch in src + tgt) or "|" in src + tgt:
                raise AugmentError(f"lexicon entries must be single plain tokens: {src!r} -> {tgt!r}")

    def __len__(self) -> int:
        return len(self.entries)


def load_lexicon(path, source_lang: Lang = Lang.L2, target_lang: Lang = Lang.L1) -> TranslationLexicon:
    """Read a tab-separated "source<TAB>target" file; '#' starts a comment line."""
    entries: dict[str, str] = {}
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise AugmentError(f"{path}:{line_no}: expected 'source<TAB>target', got {line!r}")
            src, tgt = parts[0].strip(), parts[1].strip()
            if src in entries:
                raise AugmentError(f"{path}:{line_no}: duplicate source word {src!r}")
            entries[src] = tgt
    return TranslationLexicon(entries, source_lang, target_lang)


def write_lexicon(lexicon: TranslationLexicon, path) -> None:
    lines = [f"{src}\t{tgt}" for src, tgt in sorted(lexicon.entries.items())]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


@dataclass
class MixComponent:
    label: str
    max_tokens: int | None = None  # None = unlimited
    repeat: int = 1

    def __post_init__(self):
        if self.repeat < 1:
            raise AugmentError(f"repeat factor must be >= 1, got {self.repeat}")
        if self.max_tokens is not None and self.max_tokens < 0:
            raise AugmentError("max_tokens must be >= 0")


@dataclass
class MixRecipe:
    components: list[MixComponent]

    def __post_init__(self):
        labels = [c.label for c in self.components]
        dupes = [l for l, n in Counter(labels).items() if n > 1]
        if dupes:
            raise AugmentError(f"duplicate labels in mix recipe: {dupes}")


@dataclass
class MixResult:
    corpus: Corpus
    tokens_per_component: dict[str, int]

    def composition(self) -> str:
        return " + ".join(f"{label}({count})" for label, count in self.tokens_per_component.items())


@dataclass
class TranslationReport:
    substituted: int
    passthrough: int
    capitalized_passthrough: int


@dataclass
class DictTranslateResult:
    corpus: Corpus
    report: TranslationReport


@dataclass
class IngestResult:
    corpus: Corpus
    line_count: int
    duplicate_lines: int

    @property
    def duplicate_rate(self) -> float:
        return self.duplicate_lines / self.line_count if self.line_count else 0.0


def generate_corpus(
    params,
    vocab,
    target_tokens: int,
    sample_config: neural.SampleConfig,
    tag_map: dict[str, Lang] | None = None,
    max_utterance_tokens: int | None = None,
    source_label: str = "gen",
) -> Corpus:
    """Sample utterances until target_tokens is reached, then trim whole
    utterances from the end so the total never exceeds the target."""
    if target_tokens < 1:
        raise AugmentError("target_tokens must be >= 1")
    cfg = neural.SampleConfig(
        temperature=sample_config.temperature,
        max_tokens=target_tokens,
        seed=sample_config.seed,
        forbid_unk=sample_config.forbid_unk,
        greedy=sample_config.greedy,
    )
    sampled = neural.sample(
        params,
        vocab,
        cfg,
        tag_map=tag_map,
        source_label=source_label,
        max_utterance_tokens=max_utterance_tokens,
    )
    kept: list[Utterance] = []
    total = 0
    for utt in sampled:
        if total + len(utt) > target_tokens:
            break
        kept.append(utt)
        total += len(utt)
    if not kept:
        raise AugmentError(
            "sampled utterances are longer than target_tokens; nothing fits the budget"
        )
    return Corpus(kept, source_label)


def dict_translate(
    corpus: Corpus, lexicon: TranslationLexicon, source_label: str = "mt"
) -> DictTranslateResult:
    """Replace every token found in the lexicon, retagging it target_lang.

    Tokens absent from the lexicon pass through with their original tag, so
    any passthrough next to a substitution creates a code-switch boundary.
    Token and utterance counts are preserved exactly.
    """
    substituted = 0
    passthrough = 0
    capitalized = 0
    utterances = []
    for utt in corpus:
        tokens = []
        for tok in utt.tokens:
            target = lexicon.entries.get(tok.surface)
            if target is not None:
                tokens.append(TaggedToken(target, lexicon.target_lang))
                substituted += 1
            else:
                tokens.append(tok)
                passthrough += 1
                if tok.surface[0].isupper():
                    capitalized += 1
        utterances.append(Utterance(utt.id, tokens))
    report = TranslationReport(substituted, passthrough, capitalized)
    return DictTranslateResult(Corpus(utterances, source_label), report)


def ingest_transcriptions(paths, label: str, default_lang: Lang = Lang.UNTAGGED) -> IngestResult:
    """Parse hypothesis-text files into one corpus; duplicates are kept.

    Utterance ids are prefixed with the file index so merged corpora keep
    unique ids.  The duplicate-line rate over rendered utterances is reported.
    """
    utterances: list[Utterance] = []
    seen: Counter[str] = Counter()
    for file_idx, path in enumerate(paths, start=1):
        part = parse_corpus(path, default_lang, source_label=label)
        for utt in part:
            utterances.append(Utterance(f"{label}-{file_idx}-{utt.id}", utt.tokens))
            seen[utt.render()] += 1
    duplicates = sum(n - 1 for n in seen.values())
    corpus = Corpus(utterances, label)
    corpus.validate_unique_ids()
    return IngestResult(corpus, len(utterances), duplicates)


def _truncate_on_boundary(corpus: Corpus, max_tokens: int | None) -> list[Utterance]:
    if max_tokens is None:
        return list(corpus.utterances)
    kept = []
    total = 0
    for utt in corpus:
        if total + len(utt) > max_tokens:
            break
        kept.append(utt)
        total += len(utt)
    return kept


def mix_corpora(
    corpora: list[Corpus], recipe: MixRecipe, seed: int = 0, shuffle: bool = False
) -> MixResult:
    """Assemble a training corpus: per component truncate on an utterance
    boundary, repeat, concatenate, then optionally shuffle by seed.

    Output utterance ids are reassigned ("mix-<n>") because repeats and
    cross-corpus merges would otherwise collide.
    """
    by_label = {}
    for corpus in corpora:
        if corpus.source_label in by_label:
            raise AugmentError(f"duplicate corpus label {corpus.source_label!r}")
        by_label[corpus.source_label] = corpus
    assembled: list[Utterance] = []
    accounting: dict[str, int] = {}
    for comp in recipe.components:
        corpus = by_label.get(comp.label)
        if corpus is None:
            raise AugmentError(
                f"mix recipe component {comp.label!r} matches no corpus "
                f"(have {sorted(by_label)})"
            )
        part = _truncate_on_boundary(corpus, comp.max_tokens)
        part_tokens = sum(len(u) for u in part)
        for _ in range(comp.repeat):
            assembled.extend(part)
        accounting[comp.label] = part_tokens * comp.repeat
    if shuffle:
        random.Random(seed).shuffle(assembled)
    utterances = [Utterance(f"mix-{i + 1}", utt.tokens) for i, utt in enumerate(assembled)]
    return MixResult(Corpus(utterances, "mix"), accounting)
