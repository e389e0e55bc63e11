"""Experiment methodology: perplexity ladders, n-best rescoring, WER scoring.

Rescoring combines log10-domain scores linearly:
    acoustic_weight * acoustic + (1 - lm_weight) * ngram + lm_weight * neural
WER uses a unit-cost Levenshtein alignment whose tie-break prefers
substitutions over insertion/deletion pairs, which makes the counts unique.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import (
    Corpus,
    CorpusParseError,
    Lang,
    TaggedToken,
    Utterance,
    Vocabulary,
    build_vocab,
)
from . import ngram
from .augment import MixRecipe, mix_corpora
from .neural import NeuralScorer


class EvalError(ValueError):
    """Invalid evaluation inputs."""


@dataclass
class NBestEntry:
    utterance_id: str
    rank: int
    hypothesis: list[TaggedToken]
    acoustic_score: float  # log10 domain
    lm_score: float  # log10 domain, as produced by the original decode

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.hypothesis]

    def render_hypothesis(self) -> str:
        return " ".join(t.render() for t in self.hypothesis)


def read_nbest(path) -> list[NBestEntry]:
    """Tab-separated rows: utt_id, rank, acoustic_score, lm_score, hypothesis."""
    from .corpus import _parse_token

    path = Path(path)
    entries: list[NBestEntry] = []
    with path.open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise CorpusParseError(str(path), line_no, f"expected 5 tab-separated fields, got {len(parts)}")
            utt_id, rank_text, ac_text, lm_text, hyp_text = parts
            try:
                rank = int(rank_text)
                acoustic = float(ac_text)
                lm = float(lm_text)
            except ValueError as exc:
                raise CorpusParseError(str(path), line_no, f"non-numeric field: {exc}") from exc
            tokens = [
                _parse_token(raw, Lang.UNTAGGED, str(path), line_no) for raw in hyp_text.split()
            ]
            entries.append(NBestEntry(utt_id, rank, tokens, acoustic, lm))
    return entries


def write_nbest(entries: list[NBestEntry], path) -> None:
    lines = [
        f"{e.utterance_id}\t{e.rank}\t{e.acoustic_score:.6f}\t{e.lm_score:.6f}\t{e.render_hypothesis()}"
        for e in entries
    ]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def _group_nbest(entries: list[NBestEntry]) -> dict[str, list[NBestEntry]]:
    groups: dict[str, list[NBestEntry]] = {}
    for entry in entries:
        groups.setdefault(entry.utterance_id, []).append(entry)
    for utt_id, group in groups.items():
        if not group:
            raise EvalError(f"empty n-best list for utterance {utt_id!r}")
        ranks = [e.rank for e in group]
        if len(set(ranks)) != len(ranks):
            raise EvalError(f"duplicate ranks in n-best list for utterance {utt_id!r}")
        group.sort(key=lambda e: e.rank)
    return groups


def rescore_nbest(
    entries: list[NBestEntry],
    ngram_lm=None,
    neural=None,
    lm_weight: float = 0.5,
    acoustic_weight: float = 1.0,
    expected_ids=None,
) -> dict[str, NBestEntry]:
    """Pick the best hypothesis per utterance under the interpolated score.

    ngram_lm may be omitted when lm_weight is 1, neural when it is 0.  Ties
    go to the lower original rank, making the selection reproducible.  When
    expected_ids is given, an utterance without hypotheses is an error.
    """
    if not 0.0 <= lm_weight <= 1.0:
        raise EvalError(f"lm_weight must be in [0, 1], got {lm_weight}")
    if ngram_lm is None and lm_weight < 1.0:
        raise EvalError("an n-gram model is required when lm_weight < 1")
    if neural is None and lm_weight > 0.0:
        raise EvalError("a neural model is required when lm_weight > 0")
    groups = _group_nbest(entries)
    if expected_ids is not None:
        for utt_id in expected_ids:
            if utt_id not in groups:
                raise EvalError(f"empty n-best list for utterance {utt_id!r}")
    neural_scorer = neural if neural is None or isinstance(neural, NeuralScorer) else None
    if neural is not None and neural_scorer is None:
        raise EvalError("neural must be a NeuralScorer")
    chosen: dict[str, NBestEntry] = {}
    for utt_id in sorted(groups):
        best = None
        best_key = None
        for entry in groups[utt_id]:
            score = acoustic_weight * entry.acoustic_score
            surfaces = entry.surfaces()
            if lm_weight < 1.0:
                score += (1.0 - lm_weight) * _ngram_sequence_logprob(ngram_lm, surfaces)
            if lm_weight > 0.0:
                score += lm_weight * neural_scorer.sequence_logprob(surfaces)
            key = (-score, entry.rank)
            if best_key is None or key < best_key:
                best, best_key = entry, key
        chosen[utt_id] = best
    return chosen


def _ngram_sequence_logprob(lm, surfaces: list[str]) -> float:
    """log10 probability of the word sequence plus eos under a backoff model."""
    vocab = lm.vocab
    hist_len = max(lm.order - 1, 0)
    ids = [vocab.bos_id] * hist_len + [vocab.id_or_unk(w) for w in surfaces] + [vocab.eos_id]
    total = 0.0
    for i in range(hist_len, len(ids)):
        total += lm.logprob(ids[i - hist_len : i], ids[i])
    return total


@dataclass
class WerCounts:
    substitutions: int = 0
    insertions: int = 0
    deletions: int = 0
    hits: int = 0

    @property
    def reference_length(self) -> int:
        return self.substitutions + self.deletions + self.hits

    @property
    def wer(self) -> float:
        errors = self.substitutions + self.deletions + self.insertions
        if self.reference_length == 0:
            return 0.0 if errors == 0 else float("inf")
        return 100.0 * errors / self.reference_length

    def add(self, other: "WerCounts") -> None:
        self.substitutions += other.substitutions
        self.insertions += other.insertions
        self.deletions += other.deletions
        self.hits += other.hits


@dataclass
class WerResult(WerCounts):
    by_condition: dict[str, WerCounts] = field(default_factory=dict)

    def report(self) -> str:
        lines = [
            f"wer={self.wer:.4f}",
            f"substitutions={self.substitutions}",
            f"insertions={self.insertions}",
            f"deletions={self.deletions}",
            f"hits={self.hits}",
        ]
        for label in sorted(self.by_condition):
            lines.append(f"wer[{label}]={self.by_condition[label].wer:.4f}")
        return "\n".join(lines) + "\n"


def align_counts(ref: list[str], hyp: list[str]) -> WerCounts:
    """Unit-cost alignment counts, unique by the (errors, indels) tie-break."""
    n, m = len(ref), len(hyp)
    prev = [(j, j) for j in range(m + 1)]
    for i in range(1, n + 1):
        cur = [(i, i)]
        ref_tok = ref[i - 1]
        for j in range(1, m + 1):
            sub = 0 if ref_tok == hyp[j - 1] else 1
            diag = (prev[j - 1][0] + sub, prev[j - 1][1])
            delete = (prev[j][0] + 1, prev[j][1] + 1)
            insert = (cur[j - 1][0] + 1, cur[j - 1][1] + 1)
            cur.append(min(diag, delete, insert))
        prev = cur
    errors, indels = prev[m]
    delta = n - m  # deletions minus insertions is fixed by the lengths
    insertions = (indels - delta) // 2
    deletions = indels - insertions
    substitutions = errors - indels
    hits = n - substitutions - deletions
    return WerCounts(substitutions, insertions, deletions, hits)


def read_condition_map(path) -> dict[str, str]:
    """Tab-separated "utt_id<TAB>label" rows."""
    path = Path(path)
    mapping: dict[str, str] = {}
    with path.open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise CorpusParseError(str(path), line_no, "expected 'utt_id<TAB>label'")
            mapping[parts[0]] = parts[1]
    return mapping


def wer(
    reference: Corpus,
    hypothesis: Corpus,
    strip_tags: bool = True,
    condition_map: dict[str, str] | None = None,
) -> WerResult:
    """Corpus-level WER from per-utterance alignments matched by id.

    With strip_tags the comparison uses bare surfaces; otherwise the rendered
    "surface|tag" forms must match.  When a condition map is given, counts
    are also accumulated per condition label.
    """
    ref_by_id = {u.id: u for u in reference}
    hyp_by_id = {u.id: u for u in hypothesis}
    only_ref = sorted(set(ref_by_id) - set(hyp_by_id))
    only_hyp = sorted(set(hyp_by_id) - set(ref_by_id))
    if only_ref or only_hyp:
        raise EvalError(
            f"utterance ids do not match: missing from hypothesis {only_ref[:5]}, "
            f"missing from reference {only_hyp[:5]}"
        )

    def render(utt: Utterance) -> list[str]:
        if strip_tags:
            return [t.surface for t in utt.tokens]
        return [t.render() for t in utt.tokens]

    result = WerResult()
    for utt_id in sorted(ref_by_id):
        counts = align_counts(render(ref_by_id[utt_id]), render(hyp_by_id[utt_id]))
        result.add(counts)
        if condition_map and utt_id in condition_map:
            label = condition_map[utt_id]
            result.by_condition.setdefault(label, WerCounts()).add(counts)
    return result


@dataclass
class LadderRow:
    name: str
    composition: str
    dev_ppl: float
    test_ppl: float


@dataclass
class LadderReport:
    rows: list[LadderRow]

    def selected(self) -> LadderRow:
        """The row chosen on the development set (lowest dev perplexity)."""
        return min(self.rows, key=lambda r: (r.dev_ppl, self.rows.index(r)))

    def to_tsv(self) -> str:
        lines = ["name\tcomposition\tdev_ppl\ttest_ppl"]
        for row in self.rows:
            lines.append(f"{row.name}\t{row.composition}\t{row.dev_ppl:.4f}\t{row.test_ppl:.4f}")
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        headers = ("LM", "Training text corpus", "Devel", "Test")
        body = [
            (row.name, row.composition, f"{row.dev_ppl:.1f}", f"{row.test_ppl:.1f}")
            for row in self.rows
        ]
        widths = [max(len(col[i]) for col in [headers] + body) for i in range(4)]
        render = lambda col: "  ".join(text.ljust(w) for text, w in zip(col, widths)).rstrip()
        return "\n".join([render(headers)] + [render(row) for row in body]) + "\n"


class LadderError(RuntimeError):
    """A ladder configuration failed; the message names it."""


def run_ladder(
    configs: list[tuple[str, MixRecipe, int]],
    components: list[Corpus],
    dev: Corpus,
    test: Corpus,
    vocab: Vocabulary | None = None,
    train_fn=None,
    seed: int = 0,
) -> LadderReport:
    """Mix, train and evaluate one model per config, in input order.

    The vocabulary is fixed up front (built from the union of all components
    unless given).  Dev perplexity is intended for selection; test is only
    reported.
    """
    if vocab is None:
        vocab = build_vocab(components)
    if train_fn is None:
        train_fn = lambda corpus, order: ngram.train_ngram_lm(corpus, vocab, order)
    rows = []
    for name, recipe, order in configs:
        try:
            mixed = mix_corpora(components, recipe, seed)
            lm = train_fn(mixed.corpus, order)
            dev_ppl = ngram.perplexity(lm, dev).ppl
            test_ppl = ngram.perplexity(lm, test).ppl
        except Exception as exc:
            raise LadderError(f"ladder config {name!r} failed: {exc}") from exc
        rows.append(LadderRow(name, mixed.composition(), dev_ppl, test_ppl))
    return LadderReport(rows)


def tune_rescore_weight(
    entries: list[NBestEntry],
    reference: Corpus,
    ngram_lm,
    neural: NeuralScorer,
    weights=(0.0, 0.25, 0.5, 0.75, 1.0),
    acoustic_weight: float = 1.0,
    strip_tags: bool = True,
) -> tuple[float, float, list[tuple[float, float]]]:
    """Grid-search lm_weight by WER against the reference; first minimum wins."""
    sweep: list[tuple[float, float]] = []
    best_weight, best_wer = None, None
    for weight in weights:
        chosen = rescore_nbest(entries, ngram_lm, neural, weight, acoustic_weight)
        hyp = selection_to_corpus(chosen)
        score = wer(reference, hyp, strip_tags=strip_tags).wer
        sweep.append((weight, score))
        if best_wer is None or score < best_wer:
            best_weight, best_wer = weight, score
    return best_weight, best_wer, sweep


def selection_to_corpus(chosen: dict[str, NBestEntry], source_label: str = "rescored") -> Corpus:
    """Rescoring output as a corpus keyed by the original utterance ids."""
    utterances = [
        Utterance(utt_id, list(chosen[utt_id].hypothesis)) for utt_id in sorted(chosen)
    ]
    return Corpus(utterances, source_label)


def rank1_baseline(entries: list[NBestEntry]) -> dict[str, NBestEntry]:
    """The decoder's original selection: lowest rank per utterance."""
    groups = _group_nbest(entries)
    return {utt_id: group[0] for utt_id, group in groups.items()}
