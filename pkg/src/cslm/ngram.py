"""Backoff n-gram language models with modified interpolated Kneser-Ney smoothing.

Probabilities and backoff weights are stored as log10 values, matching the
ARPA text format.  Lower-order distributions are estimated from continuation
counts (number of distinct left extensions); the unigram distribution is
interpolated with a uniform 1/V floor so every vocabulary word has positive
probability under every history.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import islice
from pathlib import Path

from .corpus import Corpus, Vocabulary

#: Lower bound on interpolation mass so stored backoff logs stay finite.
_MIN_BACKOFF = 1e-12

_LOG10 = math.log(10.0)


class NGramError(ValueError):
    """Invalid n-gram model arguments or state."""


class ArpaError(NGramError):
    """Malformed ARPA text; message carries the source location."""

    def __init__(self, source: str, line_no: int, message: str):
        super().__init__(f"{source}:{line_no}: {message}")
        self.source = source
        self.line_no = line_no


@dataclass
class NGramCounts:
    """Raw and continuation counts per order, over vocabulary ids.

    ngrams[k-1] maps k-gram id tuples to occurrence counts.  continuations[k-1]
    (defined for k < order) maps a k-gram to the number of distinct words that
    precede it, derived from the (k+1)-gram table.
    """

    order: int
    vocab: Vocabulary
    ngrams: list[dict[tuple[int, ...], int]]
    continuations: list[dict[tuple[int, ...], int]]

    def adjusted(self, k: int) -> dict[tuple[int, ...], int]:
        """Counts used for estimation at order k: continuation counts below the
        top order, raw counts at the top."""
        if k == self.order:
            return self.ngrams[k - 1]
        return self.continuations[k - 1]


@dataclass
class Discounts:
    """Per-order modified Kneser-Ney discounts for counts 1, 2 and >=3."""

    per_order: list[tuple[float, float, float]]
    fallbacks: list[str] = field(default_factory=list)

    def for_count(self, k: int, count: int) -> float:
        d1, d2, d3plus = self.per_order[k - 1]
        if count == 1:
            return d1
        if count == 2:
            return d2
        return d3plus

    @classmethod
    def fixed(cls, order: int, value: float = 0.5) -> "Discounts":
        """Single discount applied at every order and count level (for tests
        and pedagogical runs)."""
        return cls([(value, value, value)] * order)


@dataclass
class PerplexityResult:
    ppl: float
    logprob_sum: float  # log10
    token_count: int  # scored events: words plus one eos per utterance
    word_count: int
    oov_count: int
    utterance_count: int

    @property
    def oov_rate(self) -> float:
        return self.oov_count / self.word_count if self.word_count else 0.0

    def report(self) -> str:
        return (
            f"ppl={self.ppl:.6f}\n"
            f"logprob_sum={self.logprob_sum:.6f}\n"
            f"tokens={self.token_count}\n"
            f"words={self.word_count}\n"
            f"oov_count={self.oov_count}\n"
            f"oov_rate={self.oov_rate:.6f}\n"
            f"utterances={self.utterance_count}\n"
        )


def count_ngrams(corpus: Corpus, vocab: Vocabulary, order: int) -> NGramCounts:
    """Count 1..order-grams with order-1 bos padding and one eos terminator.

    bos is never counted as a predicted word; it appears only inside histories.
    OOV surfaces map to unk before counting.
    """
    if order < 1:
        raise NGramError(f"order must be >= 1, got {order}")
    bos, eos = vocab.bos_id, vocab.eos_id
    tables: list[Counter] = [Counter() for _ in range(order)]
    pad = [bos] * (order - 1)
    get_id = vocab.word_to_id.get
    unk = vocab.unk_id
    for utt in corpus:
        ids = pad + [get_id(t.surface, unk) for t in utt.tokens] + [eos]
        # windows whose final (predicted) position is a real token, i.e. not
        # inside the bos padding
        tables[0].update((w,) for w in ids[order - 1 :])
        for k in range(2, order + 1):
            shifted = [ids[d:] for d in range(k)]
            tables[k - 1].update(islice(zip(*shifted), order - k, None))
    continuations: list[dict[tuple[int, ...], int]] = []
    for k in range(1, order):
        cont: dict[tuple[int, ...], int] = defaultdict(int)
        for gram in tables[k]:
            cont[gram[1:]] += 1
        continuations.append(dict(cont))
    return NGramCounts(order, vocab, [dict(t) for t in tables], continuations)


def merge_counts(parts: list[NGramCounts]) -> NGramCounts:
    """Merge shard counts by summation and rebuild continuation counts."""
    if not parts:
        raise NGramError("nothing to merge")
    order, vocab = parts[0].order, parts[0].vocab
    if any(p.order != order or p.vocab is not vocab for p in parts):
        raise NGramError("shards must share order and vocabulary")
    tables: list[dict[tuple[int, ...], int]] = [defaultdict(int) for _ in range(order)]
    for part in parts:
        for k in range(order):
            for gram, c in part.ngrams[k].items():
                tables[k][gram] += c
    continuations: list[dict[tuple[int, ...], int]] = []
    for k in range(1, order):
        cont: dict[tuple[int, ...], int] = defaultdict(int)
        for gram in tables[k]:
            cont[gram[1:]] += 1
        continuations.append(dict(cont))
    return NGramCounts(order, vocab, [dict(t) for t in tables], continuations)


def prune_counts(counts: NGramCounts, min_count: int) -> NGramCounts:
    """Drop k-grams (k >= 2) with raw count below min_count; unigrams are kept.

    Continuation counts are rebuilt from the pruned tables.
    """
    if min_count <= 1:
        return counts
    tables = [dict(counts.ngrams[0])]
    for k in range(1, counts.order):
        tables.append({g: c for g, c in counts.ngrams[k].items() if c >= min_count})
    continuations = []
    for k in range(1, counts.order):
        cont: dict[tuple[int, ...], int] = defaultdict(int)
        for gram in tables[k]:
            cont[gram[1:]] += 1
        continuations.append(dict(cont))
    return NGramCounts(counts.order, counts.vocab, tables, continuations)


def estimate_discounts(counts: NGramCounts) -> Discounts:
    """Count-of-counts discount estimation.

    With n_i the number of k-grams of adjusted count exactly i and
    Y = n1/(n1 + 2*n2):  D1 = 1 - 2*Y*n2/n1,  D2 = 2 - 3*Y*n3/n2,
    D3+ = 3 - 4*Y*n4/n3.  Undefined or out-of-range values fall back to 0.5
    and are recorded in Discounts.fallbacks.
    """
    per_order = []
    fallbacks: list[str] = []
    for k in range(1, counts.order + 1):
        adjusted = counts.adjusted(k)
        if not adjusted:
            raise NGramError(f"no counts at order {k}; cannot estimate discounts")
        n = Counter(adjusted.values())
        n1, n2, n3, n4 = n[1], n[2], n[3], n[4]
        y = n1 / (n1 + 2 * n2) if n1 > 0 else None
        values = []
        for name, raw in (
            ("D1", None if y is None or n1 == 0 else 1.0 - 2.0 * y * n2 / n1),
            ("D2", None if y is None or n2 == 0 else 2.0 - 3.0 * y * n3 / n2),
            ("D3+", None if y is None or n3 == 0 else 3.0 - 4.0 * y * n4 / n3),
        ):
            if raw is None or not (0.0 <= raw < 1.0):
                shown = "undefined" if raw is None else f"{raw:.4f}"
                fallbacks.append(f"order {k}: {name} fell back to 0.5 (estimate {shown})")
                raw = 0.5
            values.append(raw)
        per_order.append(tuple(values))
    return Discounts(per_order, fallbacks)


class BackoffLM:
    """ARPA-style backoff model: per-order tables of (log10 p, log10 bow)."""

    def __init__(
        self,
        order: int,
        vocab: Vocabulary,
        tables: list[dict[tuple[int, ...], tuple[float, float | None]]],
    ):
        self.order = order
        self.vocab = vocab
        self.tables = tables

    def logprob(self, history, word: int) -> float:
        """log10 p(word | history); backs off through shorter histories."""
        if not 0 <= word < self.vocab.size:
            raise NGramError(f"word id {word} outside vocabulary of size {self.vocab.size}")
        h = tuple(history[-(self.order - 1) :]) if self.order > 1 else ()
        total = 0.0
        while True:
            entry = self.tables[len(h)].get(h + (word,))
            if entry is not None:
                return total + entry[0]
            if not h:
                raise NGramError(f"no unigram entry for word id {word}")
            hist_entry = self.tables[len(h) - 1].get(h)
            if hist_entry is not None and hist_entry[1] is not None:
                total += hist_entry[1]
            h = h[1:]

    def ngram_counts(self) -> list[int]:
        return [len(t) for t in self.tables]


def estimate_kn(counts: NGramCounts, discounts: Discounts) -> BackoffLM:
    """Build the interpolated model from counts and discounts.

    At each order the discounted adjusted counts are interpolated with the
    next lower order; the leftover discount mass per history becomes its
    backoff weight, so every history's distribution sums to one over the
    full vocabulary.
    """
    vocab = counts.vocab
    order = counts.order
    v_size = vocab.size
    bos = vocab.bos_id

    probs: list[dict[tuple[int, ...], float]] = []
    lambdas: list[dict[tuple[int, ...], float]] = []

    # Unigrams: every vocabulary word gets an entry; the uniform floor carries
    # the interpolation mass.
    adj1 = counts.adjusted(1)
    total1 = sum(adj1.values())
    if total1 == 0:
        raise NGramError("empty counts: no unigram mass")
    lam1 = sum(discounts.for_count(1, c) for c in adj1.values()) / total1
    lam1 = max(lam1, _MIN_BACKOFF)
    floor = lam1 / v_size
    uni: dict[tuple[int, ...], float] = {}
    for w in range(v_size):
        c = adj1.get((w,), 0)
        disc = max(c - discounts.for_count(1, c), 0.0) if c else 0.0
        uni[(w,)] = disc / total1 + floor
    probs.append(uni)
    lambdas.append({(): lam1})

    for k in range(2, order + 1):
        adjusted = counts.adjusted(k)
        totals: dict[tuple[int, ...], int] = defaultdict(int)
        discount_mass: dict[tuple[int, ...], float] = defaultdict(float)
        for gram, c in adjusted.items():
            hist = gram[:-1]
            totals[hist] += c
            discount_mass[hist] += discounts.for_count(k, c)
        lam_k = {
            hist: max(discount_mass[hist] / totals[hist], _MIN_BACKOFF) for hist in totals
        }
        lower = probs[-1]
        table: dict[tuple[int, ...], float] = {}
        for gram, c in adjusted.items():
            hist = gram[:-1]
            disc = max(c - discounts.for_count(k, c), 0.0)
            table[gram] = disc / totals[hist] + lam_k[hist] * lower[gram[1:]]
        # Context-only entries: the all-bos n-gram is a history of real
        # entries but is never itself a predicted n-gram.
        if k < order:
            bos_run = (bos,) * k
            if bos_run not in table and bos_run[:-1] in lam_k:
                table[bos_run] = lam_k[bos_run[:-1]] * lower[bos_run[1:]]
        probs.append(table)
        lambdas.append(lam_k)

    tables: list[dict[tuple[int, ...], tuple[float, float | None]]] = []
    for k in range(1, order + 1):
        bows = lambdas[k] if k < order else {}
        table = {}
        for gram, p in probs[k - 1].items():
            bow = bows.get(gram)
            table[gram] = (math.log10(p), math.log10(bow) if bow is not None else None)
        tables.append(table)
    return BackoffLM(order, vocab, tables)


def train_ngram_lm(
    corpus: Corpus,
    vocab: Vocabulary,
    order: int,
    prune_min_count: int | None = None,
    discounts: Discounts | None = None,
) -> BackoffLM:
    """Count, estimate discounts and build the model in one call."""
    counts = count_ngrams(corpus, vocab, order)
    if prune_min_count is not None:
        counts = prune_counts(counts, prune_min_count)
    if discounts is None:
        discounts = estimate_discounts(counts)
    return estimate_kn(counts, discounts)


def perplexity(lm, corpus: Corpus) -> PerplexityResult:
    """10^(-sum(log10 p)/N) over all tokens plus one eos per utterance.

    OOV words score as unk and are tallied separately.  Works for any model
    exposing .logprob(history_ids, word_id), .order and .vocab.
    """
    if len(corpus) == 0:
        raise NGramError("cannot compute perplexity of an empty corpus")
    vocab = lm.vocab
    bos, eos = vocab.bos_id, vocab.eos_id
    hist_len = max(lm.order - 1, 0)
    total = 0.0
    scored = 0
    words = 0
    oov = 0
    for utt in corpus:
        ids = [bos] * hist_len
        for tok in utt.tokens:
            words += 1
            wid = vocab.id_or_unk(tok.surface)
            if tok.surface not in vocab:
                oov += 1
            ids.append(wid)
        ids.append(eos)
        for i in range(hist_len, len(ids)):
            total += lm.logprob(ids[i - hist_len : i], ids[i])
            scored += 1
    ppl = 10.0 ** (-total / scored)
    return PerplexityResult(ppl, total, scored, words, oov, len(corpus))


class InterpolatedLM:
    """Query-time linear mixture of backoff models over a shared vocabulary."""

    def __init__(self, lms, weights):
        lms = list(lms)
        weights = [float(w) for w in weights]
        if not lms or len(lms) != len(weights):
            raise NGramError("need one weight per model")
        if any(w <= 0 for w in weights):
            raise NGramError("mixture weights must be positive")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise NGramError(f"mixture weights must sum to 1, got {sum(weights)}")
        base = lms[0].vocab
        if any(not lm.vocab.same_words(base) for lm in lms[1:]):
            raise NGramError("mixture components must share a vocabulary")
        self.lms = lms
        self.weights = weights
        self.vocab = base
        self.order = max(lm.order for lm in lms)

    def logprob(self, history, word: int) -> float:
        p = 0.0
        for lm, w in zip(self.lms, self.weights):
            p += w * 10.0 ** lm.logprob(history, word)
        return math.log10(p)


def interpolate_lms(lms, weights) -> InterpolatedLM:
    return InterpolatedLM(lms, weights)


def write_arpa(lm: BackoffLM, path) -> None:
    path = Path(path)
    path.write_text(render_arpa(lm), encoding="utf-8")


def render_arpa(lm: BackoffLM) -> str:
    """Canonical ARPA text: sections in order, rows sorted by word strings."""
    id_to_word = lm.vocab.id_to_word
    out = ["\\data\\"]
    for k in range(1, lm.order + 1):
        out.append(f"ngram {k}={len(lm.tables[k - 1])}")
    out.append("")
    for k in range(1, lm.order + 1):
        out.append(f"\\{k}-grams:")
        table = lm.tables[k - 1]
        rows = sorted(table.items(), key=lambda kv: tuple(id_to_word[i] for i in kv[0]))
        for gram, (logp, bow) in rows:
            words = " ".join(id_to_word[i] for i in gram)
            if bow is None:
                out.append(f"{logp:.7f}\t{words}")
            else:
                out.append(f"{logp:.7f}\t{words}\t{bow:.7f}")
        out.append("")
    out.append("\\end\\")
    return "\n".join(out) + "\n"


def read_arpa(path, vocab: Vocabulary | None = None) -> BackoffLM:
    """Parse an ARPA file.

    When vocab is None it is rebuilt from the unigram section, which must
    contain the reserved <unk>, <s> and </s> entries.
    """
    path = Path(path)
    source = str(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    pos = 0

    def current() -> str | None:
        return lines[pos] if pos < len(lines) else None

    while current() is not None and not current().strip():
        pos += 1
    if current() is None or current().strip() != "\\data\\":
        raise ArpaError(source, pos + 1, "expected \\data\\ header")
    pos += 1
    declared: list[int] = []
    while current() is not None and current().strip():
        line = current().strip()
        if not line.startswith("ngram "):
            raise ArpaError(source, pos + 1, f"expected 'ngram k=N' line, got {line!r}")
        try:
            k_text, n_text = line[len("ngram ") :].split("=")
            k, n = int(k_text), int(n_text)
        except ValueError as exc:
            raise ArpaError(source, pos + 1, f"malformed ngram count line {line!r}") from exc
        if k != len(declared) + 1:
            raise ArpaError(source, pos + 1, f"ngram orders out of sequence at {line!r}")
        declared.append(n)
        pos += 1
    if not declared:
        raise ArpaError(source, pos + 1, "no ngram count declarations")
    order = len(declared)

    raw_tables: list[dict[tuple[str, ...], tuple[float, float | None]]] = []
    for k in range(1, order + 1):
        while current() is not None and not current().strip():
            pos += 1
        header = f"\\{k}-grams:"
        if current() is None or current().strip() != header:
            raise ArpaError(source, pos + 1, f"expected section header {header!r}")
        pos += 1
        table: dict[tuple[str, ...], tuple[float, float | None]] = {}
        while current() is not None and current().strip() and not current().startswith("\\"):
            parts = current().split()
            if len(parts) not in (k + 1, k + 2):
                raise ArpaError(source, pos + 1, f"expected {k}-gram row, got {current()!r}")
            try:
                logp = float(parts[0])
                bow = float(parts[k + 1]) if len(parts) == k + 2 else None
            except ValueError as exc:
                raise ArpaError(source, pos + 1, f"non-numeric field in {current()!r}") from exc
            gram = tuple(parts[1 : k + 1])
            if gram in table:
                raise ArpaError(source, pos + 1, f"duplicate {k}-gram {' '.join(gram)!r}")
            table[gram] = (logp, bow)
            pos += 1
        if len(table) != declared[k - 1]:
            raise ArpaError(
                source,
                pos + 1,
                f"\\{k}-grams section lists {len(table)} rows, header declared {declared[k - 1]}",
            )
        raw_tables.append(table)
    while current() is not None and not current().strip():
        pos += 1
    if current() is None or current().strip() != "\\end\\":
        raise ArpaError(source, pos + 1, "expected \\end\\ terminator")

    if vocab is None:
        words = sorted({w for (w,) in raw_tables[0]})
        from .corpus import RESERVED_WORDS

        missing = [w for w in RESERVED_WORDS if w not in set(words)]
        if missing:
            raise ArpaError(source, 1, f"unigram section lacks reserved tokens {missing}")
        vocab = Vocabulary(list(RESERVED_WORDS) + [w for w in words if w not in RESERVED_WORDS])

    tables: list[dict[tuple[int, ...], tuple[float, float | None]]] = []
    for k, raw in enumerate(raw_tables, start=1):
        table: dict[tuple[int, ...], tuple[float, float | None]] = {}
        for gram, entry in raw.items():
            try:
                ids = tuple(vocab.word_to_id[w] for w in gram)
            except KeyError as exc:
                raise ArpaError(source, 1, f"word {exc.args[0]!r} not in vocabulary") from exc
            table[ids] = entry
        tables.append(table)
    return BackoffLM(order, vocab, tables)
