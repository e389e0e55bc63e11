"""Language-tagged bilingual corpora.

The on-disk format is plain UTF-8 text, one utterance per line, tokens
separated by whitespace.  A token may carry a language tag as a suffix:
``wurd|fy``, ``woord|nl`` or ``tsjil|mix``.  Bare tokens get the parser's
default language.  An optional utterance id may precede the tokens,
separated from them by a TAB; without it, ids are ``line-<n>`` with the
physical 1-based line number.
"""

from __future__ import annotations

import enum
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path


class Lang(enum.Enum):
    """Word-level language labels. L1 is Frisian-style ("fy"), L2 Dutch-style ("nl")."""

    L1 = "fy"
    L2 = "nl"
    MIXED = "mix"
    UNTAGGED = ""


_TAG_TO_LANG = {lang.value: lang for lang in Lang if lang is not Lang.UNTAGGED}

#: Reserved vocabulary surfaces.
UNK_WORD = "<unk>"
BOS_WORD = "<s>"
EOS_WORD = "</s>"
RESERVED_WORDS = (UNK_WORD, BOS_WORD, EOS_WORD)

#: Tie-break priority for dominant-language decisions (highest first).
_LANG_PRIORITY = {Lang.L1: 3, Lang.L2: 2, Lang.MIXED: 1}


class CorpusError(ValueError):
    """Invalid corpus content or arguments."""


class CorpusParseError(CorpusError):
    """Malformed corpus text; message carries the source location."""

    def __init__(self, source: str, line_no: int, message: str):
        super().__init__(f"{source}:{line_no}: {message}")
        self.source = source
        self.line_no = line_no


@dataclass(frozen=True, slots=True)
class TaggedToken:
    surface: str
    lang: Lang = Lang.UNTAGGED

    def __post_init__(self):
        if not self.surface:
            raise CorpusError("token surface must be non-empty")
        if "|" in self.surface:
            raise CorpusError(f"token surface may not contain '|': {self.surface!r}")
        if any(ch.isspace() for ch in self.surface):
            raise CorpusError(f"token surface may not contain whitespace: {self.surface!r}")

    def render(self) -> str:
        if self.lang is Lang.UNTAGGED:
            return self.surface
        return f"{self.surface}|{self.lang.value}"


@dataclass(slots=True)
class Utterance:
    id: str
    tokens: list[TaggedToken]

    def __len__(self) -> int:
        return len(self.tokens)

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def render(self) -> str:
        return " ".join(t.render() for t in self.tokens)


@dataclass(slots=True)
class Corpus:
    utterances: list[Utterance] = field(default_factory=list)
    source_label: str = "orig"

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self):
        return iter(self.utterances)

    def token_count(self) -> int:
        return sum(len(u) for u in self.utterances)

    def validate_unique_ids(self) -> None:
        seen = set()
        for utt in self.utterances:
            if utt.id in seen:
                raise CorpusError(f"duplicate utterance id {utt.id!r} in corpus {self.source_label!r}")
            seen.add(utt.id)


@dataclass(slots=True)
class CorpusStats:
    words_per_lang: dict[Lang, int]
    utterance_count: int
    intra_sentential_switches: int
    inter_sentential_switches: int
    mixed_word_count: int

    @property
    def token_count(self) -> int:
        return sum(self.words_per_lang.values())


class Vocabulary:
    """Dense word<->id map with reserved unk/bos/eos entries.

    ids are 0..V-1; unk, bos and eos always occupy ids 0, 1 and 2.
    """

    def __init__(self, words: list[str]):
        if list(words[:3]) != list(RESERVED_WORDS):
            raise CorpusError("vocabulary must start with the reserved tokens <unk>, <s>, </s>")
        self.id_to_word: list[str] = list(words)
        self.word_to_id: dict[str, int] = {w: i for i, w in enumerate(words)}
        if len(self.word_to_id) != len(self.id_to_word):
            dupes = [w for w, n in Counter(words).items() if n > 1]
            raise CorpusError(f"duplicate vocabulary entries: {dupes}")
        self.unk_id = self.word_to_id[UNK_WORD]
        self.bos_id = self.word_to_id[BOS_WORD]
        self.eos_id = self.word_to_id[EOS_WORD]

    @property
    def size(self) -> int:
        return len(self.id_to_word)

    def __len__(self) -> int:
        return len(self.id_to_word)

    def __contains__(self, word: str) -> bool:
        return word in self.word_to_id

    def id_or_unk(self, word: str) -> int:
        return self.word_to_id.get(word, self.unk_id)

    def word(self, word_id: int) -> str:
        return self.id_to_word[word_id]

    def same_words(self, other: "Vocabulary") -> bool:
        return self.id_to_word == other.id_to_word


def _parse_token(raw: str, default_lang: Lang, source: str, line_no: int) -> TaggedToken:
    parts = raw.split("|")
    if len(parts) == 1:
        surface, lang = raw, default_lang
    elif len(parts) == 2:
        surface, tag = parts
        lang = _TAG_TO_LANG.get(tag)
        if lang is None:
            raise CorpusParseError(source, line_no, f"unknown language tag {tag!r} in token {raw!r}")
    else:
        raise CorpusParseError(source, line_no, f"token {raw!r} contains more than one '|'")
    try:
        return TaggedToken(surface, lang)
    except CorpusError as exc:
        raise CorpusParseError(source, line_no, str(exc)) from exc


def parse_lines(
    lines,
    default_lang: Lang = Lang.UNTAGGED,
    source_label: str = "orig",
    source: str = "<string>",
) -> Corpus:
    """Parse corpus text lines. Blank lines are skipped, not an error."""
    utterances = []
    for line_no, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if "\t" in line:
            utt_id, _, rest = line.partition("\t")
            if not utt_id:
                raise CorpusParseError(source, line_no, "empty utterance id before TAB")
        else:
            utt_id, rest = f"line-{line_no}", line
        raw_tokens = rest.split()
        if not raw_tokens:
            continue
        tokens = [_parse_token(raw, default_lang, source, line_no) for raw in raw_tokens]
        utterances.append(Utterance(utt_id, tokens))
    corpus = Corpus(utterances, source_label)
    corpus.validate_unique_ids()
    return corpus


def parse_corpus(path, default_lang: Lang = Lang.UNTAGGED, source_label: str = "orig") -> Corpus:
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        return parse_lines(handle, default_lang, source_label, source=str(path))


def corpus_to_lines(corpus: Corpus, with_ids: bool = False) -> list[str]:
    if with_ids:
        return [f"{u.id}\t{u.render()}" for u in corpus.utterances]
    return [u.render() for u in corpus.utterances]


def write_corpus(corpus: Corpus, path, with_ids: bool = False) -> None:
    path = Path(path)
    text = "".join(line + "\n" for line in corpus_to_lines(corpus, with_ids))
    path.write_text(text, encoding="utf-8")


def build_vocab(corpora, min_count: int = 1, max_size: int | None = None) -> Vocabulary:
    """Count surfaces over the corpora and keep words with count >= min_count.

    At most max_size non-reserved words are kept, preferring higher counts and
    breaking ties lexicographically.  Reserved surfaces appearing in the text
    are not duplicated.
    """
    corpora = list(corpora)
    if not corpora:
        raise CorpusError("build_vocab requires at least one corpus")
    if min_count < 1:
        raise CorpusError("min_count must be >= 1")
    counts: Counter[str] = Counter()
    for corpus in corpora:
        for utt in corpus:
            counts.update(t.surface for t in utt.tokens)
    for word in RESERVED_WORDS:
        counts.pop(word, None)
    kept = sorted(
        (w for w, c in counts.items() if c >= min_count),
        key=lambda w: (-counts[w], w),
    )
    if max_size is not None:
        kept = kept[:max_size]
    return Vocabulary(list(RESERVED_WORDS) + kept)


def dominant_lang(utterance: Utterance) -> Lang:
    """Majority tag among non-UNTAGGED tokens; ties resolve toward L1."""
    tallies = Counter(t.lang for t in utterance.tokens if t.lang is not Lang.UNTAGGED)
    if not tallies:
        return Lang.UNTAGGED
    return max(tallies, key=lambda lang: (tallies[lang], _LANG_PRIORITY[lang]))


def cs_stats(corpus: Corpus) -> CorpusStats:
    words_per_lang = {lang: 0 for lang in Lang}
    intra = 0
    for utt in corpus:
        for tok in utt.tokens:
            words_per_lang[tok.lang] += 1
        for prev, cur in zip(utt.tokens, utt.tokens[1:]):
            if (
                prev.lang is not Lang.UNTAGGED
                and cur.lang is not Lang.UNTAGGED
                and prev.lang is not cur.lang
            ):
                intra += 1
    inter = 0
    dominants = [dominant_lang(u) for u in corpus]
    for prev, cur in zip(dominants, dominants[1:]):
        if prev is not Lang.UNTAGGED and cur is not Lang.UNTAGGED and prev is not cur:
            inter += 1
    return CorpusStats(
        words_per_lang=words_per_lang,
        utterance_count=len(corpus),
        intra_sentential_switches=intra,
        inter_sentential_switches=inter,
        mixed_word_count=words_per_lang[Lang.MIXED],
    )


def stats_report(stats: CorpusStats) -> str:
    """Flat key=value report."""
    lines = [
        f"utterances={stats.utterance_count}",
        f"tokens={stats.token_count}",
    ]
    for lang in Lang:
        key = lang.value if lang is not Lang.UNTAGGED else "untagged"
        lines.append(f"words_{key}={stats.words_per_lang[lang]}")
    lines += [
        f"mixed_word_count={stats.mixed_word_count}",
        f"intra_sentential_switches={stats.intra_sentential_switches}",
        f"inter_sentential_switches={stats.inter_sentential_switches}",
    ]
    return "\n".join(lines) + "\n"


def stats_tsv(stats: CorpusStats) -> str:
    """The same report as tab-separated key/value rows."""
    report = stats_report(stats).strip().splitlines()
    return "".join(line.replace("=", "\t", 1) + "\n" for line in report)


def split_corpus(corpus: Corpus, fractions, seed: int) -> list[Corpus]:
    """Shuffle utterances deterministically by seed, then partition contiguously."""
    fractions = list(fractions)
    if not fractions or any(f <= 0 for f in fractions):
        raise CorpusError("fractions must be positive")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise CorpusError(f"fractions must sum to 1, got {sum(fractions)}")
    order = list(range(len(corpus)))
    random.Random(seed).shuffle(order)
    shuffled = [corpus.utterances[i] for i in order]
    n = len(shuffled)
    bounds = [0]
    running = 0.0
    for frac in fractions:
        running += frac
        bounds.append(round(running * n))
    bounds[-1] = n
    parts = []
    for i in range(len(fractions)):
        part = shuffled[bounds[i] : bounds[i + 1]]
        parts.append(Corpus(part, corpus.source_label))
    return parts


def word_tag_map(corpus: Corpus) -> dict[str, Lang]:
    """Map each surface to its majority non-UNTAGGED tag in the corpus."""
    tallies: dict[str, Counter] = {}
    for utt in corpus:
        for tok in utt.tokens:
            if tok.lang is Lang.UNTAGGED:
                continue
            tallies.setdefault(tok.surface, Counter())[tok.lang] += 1
    return {
        surface: max(counter, key=lambda lang: (counter[lang], _LANG_PRIORITY[lang]))
        for surface, counter in tallies.items()
    }
