"""Bundled desk-scale demo: a synthetic bilingual world with code-switching.

The world emits utterances from a class-structured Markov process over word
concepts.  Each concept has two surfaces, one per language; proper nouns are
capitalized surfaces shared by both languages.  Within an utterance the
active language occasionally flips, producing intra-sentential switches, and
utterances have a dominant language, producing inter-sentential switches.
The same process also yields monolingual text (for pseudo-translation
sources), extra in-domain samples (standing in for automatic transcriptions)
and a corrupted n-best set for rescoring experiments.
"""

from __future__ import annotations

import bisect
import itertools
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus, Lang, TaggedToken, Utterance, cs_stats, dominant_lang
from .augment import TranslationLexicon
from .evaluate import NBestEntry

_FY_ONSETS = ["tsj", "sk", "fr", "gl", "sw", "j", "w", "b", "d", "h"]
_FY_NUCLEI = ["ea", "ie", "oa", "ue", "a", "i", "o"]
_FY_CODAS = ["n", "t", "k", "d", "m", "st", ""]
_NL_ONSETS = ["sch", "vr", "gr", "kl", "z", "v", "p", "m", "t", "r"]
_NL_NUCLEI = ["aa", "ee", "oo", "ui", "e", "o", "u"]
_NL_CODAS = ["g", "r", "l", "s", "ng", "p", ""]


def _word_pool(rng: random.Random, onsets, nuclei, codas, count: int, taken: set[str]) -> list[str]:
    words = []
    while len(words) < count:
        syllables = rng.choice((1, 2, 2))
        word = "".join(
            rng.choice(onsets) + rng.choice(nuclei) + rng.choice(codas)
            for _ in range(syllables)
        )
        if word and word not in taken:
            taken.add(word)
            words.append(word)
    return words


def _zipf_cumulative(count: int, exponent: float = 1.1) -> list[float]:
    weights = [1.0 / (rank + 1) ** exponent for rank in range(count)]
    total = 0.0
    cumulative = []
    for w in weights:
        total += w
        cumulative.append(total)
    return cumulative


def _draw(rng: random.Random, cumulative: list[float]) -> int:
    return bisect.bisect_left(cumulative, rng.random() * cumulative[-1])


class DemoWorld:
    """Deterministic generator of code-switched bilingual text."""

    def __init__(
        self,
        seed: int = 0,
        concepts: int = 800,
        classes: int = 40,
        nouns: int = 30,
        switch_prob: float = 0.06,
        noun_prob: float = 0.05,
        l1_dominance: float = 0.7,
        word_skew: float = 0.2,
    ):
        rng = random.Random(seed ^ 0x5EED)
        taken: set[str] = set()
        self.fy_words = _word_pool(rng, _FY_ONSETS, _FY_NUCLEI, _FY_CODAS, concepts, taken)
        self.nl_words = _word_pool(rng, _NL_ONSETS, _NL_NUCLEI, _NL_CODAS, concepts, taken)
        noun_stems = _word_pool(rng, _NL_ONSETS + _FY_ONSETS, _NL_NUCLEI, _NL_CODAS, nouns, taken)
        self.nouns = [stem.capitalize() for stem in noun_stems]
        self.concepts = concepts
        self.classes = classes
        self.switch_prob = switch_prob
        self.noun_prob = noun_prob
        self.l1_dominance = l1_dominance

        members: list[list[int]] = [[] for _ in range(classes)]
        for concept in range(concepts):
            members[concept % classes].append(concept)
        self.class_members = members
        self.member_cumulative = [_zipf_cumulative(len(m), word_skew) for m in members]
        self.noun_cumulative = _zipf_cumulative(nouns)

        # Sparse-ish class transitions: a few preferred successors per class.
        self.transition_cumulative: list[list[float]] = []
        for source in range(classes):
            weights = [0.04] * classes
            for _ in range(4):
                weights[rng.randrange(classes)] += rng.uniform(1.0, 3.0)
            total = 0.0
            cumulative = []
            for w in weights:
                total += w
                cumulative.append(total)
            self.transition_cumulative.append(cumulative)
        self.initial_cumulative = _zipf_cumulative(classes, exponent=0.5)

    def _emit(self, rng: random.Random, klass: int, lang: Lang) -> TaggedToken:
        if rng.random() < self.noun_prob:
            surface = self.nouns[_draw(rng, self.noun_cumulative)]
        else:
            concept = self.class_members[klass][_draw(rng, self.member_cumulative[klass])]
            surface = self.fy_words[concept] if lang is Lang.L1 else self.nl_words[concept]
        return TaggedToken(surface, lang)

    def sample_utterance(self, rng: random.Random, mode: str = "cs") -> list[TaggedToken]:
        """mode: "cs" (switching, random dominant language), "fy" or "nl"."""
        if mode == "cs":
            dominant = Lang.L1 if rng.random() < self.l1_dominance else Lang.L2
            can_switch = True
        else:
            dominant = Lang.L1 if mode == "fy" else Lang.L2
            can_switch = False
        length = 4 + min(14, int(rng.expovariate(1 / 5.0)))
        klass = _draw(rng, self.initial_cumulative)
        lang = dominant
        tokens = []
        for _ in range(length):
            tokens.append(self._emit(rng, klass, lang))
            klass = _draw(rng, self.transition_cumulative[klass])
            if can_switch:
                if lang is dominant:
                    if rng.random() < self.switch_prob:
                        lang = Lang.L2 if dominant is Lang.L1 else Lang.L1
                elif rng.random() < 0.5:
                    lang = dominant
        return tokens

    def sample_corpus(
        self, target_tokens: int, seed: int, source_label: str, mode: str = "cs"
    ) -> Corpus:
        rng = random.Random(seed)
        utterances = []
        total = 0
        while total < target_tokens:
            tokens = self.sample_utterance(rng, mode)
            utterances.append(Utterance(f"line-{len(utterances) + 1}", tokens))
            total += len(tokens)
        return Corpus(utterances, source_label)

    def lexicon(self, coverage: float = 0.95, seed: int = 7) -> TranslationLexicon:
        """nl->fy concept pairs; proper nouns are deliberately absent."""
        rng = random.Random(seed)
        covered = rng.sample(range(self.concepts), int(self.concepts * coverage))
        entries = {self.nl_words[c]: self.fy_words[c] for c in sorted(covered)}
        return TranslationLexicon(entries, Lang.L2, Lang.L1)

    def corrupt_tokens(self, rng: random.Random, tokens: list[TaggedToken], errors: int) -> list[TaggedToken]:
        """Replace words with same-language words of a random wrong class."""
        out = list(tokens)
        positions = rng.sample(range(len(out)), min(errors, len(out)))
        for pos in positions:
            lang = out[pos].lang
            klass = rng.randrange(self.classes)
            concept = self.class_members[klass][rng.randrange(len(self.class_members[klass]))]
            surface = self.fy_words[concept] if lang is Lang.L1 else self.nl_words[concept]
            out[pos] = TaggedToken(surface, lang)
        return out

    def make_nbest(
        self,
        reference: Corpus,
        seed: int = 11,
        depth: int = 5,
        acoustic_trap_rate: float = 0.4,
    ) -> list[NBestEntry]:
        """Corrupted hypothesis lists with a crude "decoder" score.

        For a fraction of utterances a corrupted hypothesis gets the best
        decoder score (acoustic plus noisy unigram LM proxy), so rank 1 is
        wrong there; a better language model can recover the truth.
        """
        rng = random.Random(seed)
        entries: list[NBestEntry] = []
        for utt in reference:
            candidates = [list(utt.tokens)]
            for _ in range(depth - 1):
                errors = 1 + min(2, int(rng.expovariate(1.2)))
                candidates.append(self.corrupt_tokens(rng, utt.tokens, errors))
            trapped = rng.random() < acoustic_trap_rate
            scored = []
            for idx, hyp in enumerate(candidates):
                acoustic = -0.30 * len(hyp) + rng.gauss(0.0, 0.35)
                if idx == 0:
                    acoustic -= 0.15  # the truth is never acoustically favored for free
                    if trapped:
                        acoustic -= 0.8
                lm_proxy = -1.9 * len(hyp) + rng.gauss(0.0, 0.9)
                scored.append((acoustic + lm_proxy, acoustic, lm_proxy, hyp))
            scored.sort(key=lambda item: -item[0])
            for rank, (_, acoustic, lm_proxy, hyp) in enumerate(scored, start=1):
                entries.append(NBestEntry(utt.id, rank, hyp, acoustic, lm_proxy))
        return entries


def condition_map_for(reference: Corpus) -> dict[str, str]:
    """Label each utterance fy / nl / fy-nl from its tags, mirroring how
    evaluation subsets are usually annotated by hand."""
    labels = {}
    for utt in reference:
        stats = cs_stats(Corpus([utt]))
        if stats.intra_sentential_switches > 0:
            labels[utt.id] = "fy-nl"
        else:
            dom = dominant_lang(utt)
            labels[utt.id] = dom.value if dom is not Lang.UNTAGGED else "fy-nl"
    return labels


@dataclass
class DemoData:
    world: DemoWorld
    orig: Corpus
    dev: Corpus
    test: Corpus
    aa_mono: Corpus
    aa_biling: Corpus
    mt_source: Corpus
    lexicon: TranslationLexicon
    nbest: list[NBestEntry]
    conditions: dict[str, str]


@dataclass
class DeskExperiment:
    """Everything one seed of the desk-scale enrichment experiment produces."""

    data: DemoData
    vocab: object
    lstm_params: object
    tag_map: dict[str, Lang]
    generated: Corpus
    translated: Corpus
    report: object  # LadderReport over baseline -> +gen -> +aa -> +mt

    def dev_perplexities(self) -> list[float]:
        return [row.dev_ppl for row in self.report.rows]

    def test_perplexities(self) -> list[float]:
        return [row.test_ppl for row in self.report.rows]


def build_demo(
    seed: int = 0,
    orig_tokens: int = 150_000,
    dev_tokens: int = 8_000,
    test_tokens: int = 8_000,
    aa_tokens: int = 1_500,
    mt_tokens: int = 8_500,
    nbest_utterances: int = 120,
) -> DemoData:
    """All inputs of the desk-scale experiment, deterministic in the seed."""
    world = DemoWorld(seed)
    orig = world.sample_corpus(orig_tokens, seed * 101 + 1, "orig")
    dev = world.sample_corpus(dev_tokens, seed * 101 + 2, "dev")
    test = world.sample_corpus(test_tokens, seed * 101 + 3, "test")
    aa_mono = world.sample_corpus(aa_tokens, seed * 101 + 4, "aa-mono")
    aa_biling = world.sample_corpus(aa_tokens, seed * 101 + 5, "aa-biling")
    mt_source = world.sample_corpus(mt_tokens, seed * 101 + 6, "mt-src", mode="nl")
    lexicon = world.lexicon(seed=seed * 101 + 7)
    nbest_ref = Corpus(dev.utterances[:nbest_utterances], "dev")
    nbest = world.make_nbest(nbest_ref, seed=seed * 101 + 8)
    conditions = condition_map_for(nbest_ref)
    return DemoData(
        world, orig, dev, test, aa_mono, aa_biling, mt_source, lexicon, nbest, conditions
    )


def enrichment_recipes(generated_tokens: int = 50_000):
    """The four mix recipes of the standard enrichment ladder."""
    from .augment import MixComponent, MixRecipe

    base = [MixComponent("orig")]
    with_gen = base + [MixComponent("gen", generated_tokens)]
    with_aa = with_gen + [MixComponent("aa-mono"), MixComponent("aa-biling")]
    with_mt = with_aa + [MixComponent("mt")]
    return [
        ("baseline", MixRecipe(list(base))),
        ("gen", MixRecipe(list(with_gen))),
        ("gen+aa", MixRecipe(list(with_aa))),
        ("gen+aa+mt", MixRecipe(list(with_mt))),
    ]


def run_desk_experiment(
    seed: int = 0,
    generated_tokens: int = 50_000,
    order: int = 3,
    hidden: int = 64,
    epochs: int = 3,
    learning_rate: float = 5.0,
    data: DemoData | None = None,
) -> DeskExperiment:
    """One full seed of the enrichment experiment.

    Builds the dataset, trains the LSTM on the original corpus, samples
    generated text, pseudo-translates the monolingual source, and evaluates
    the four-step training-text ladder with a fixed vocabulary.
    """
    from .augment import dict_translate, generate_corpus
    from .corpus import build_vocab, word_tag_map
    from .evaluate import run_ladder
    from .neural import SampleConfig, TrainConfig, init_params, train

    if data is None:
        data = build_demo(seed=seed)
    vocab = build_vocab([data.orig])
    params = init_params(vocab.size, hidden, hidden, 1, seed=seed)
    config = TrainConfig(
        bptt_len=16,
        batch_size=8,
        learning_rate=learning_rate,
        lr_decay=0.5,
        epochs=epochs,
        seed=seed,
    )
    valid = Corpus(data.dev.utterances[:300], "valid")
    trained = train(params, data.orig, vocab, config, valid_corpus=valid).params
    tag_map = word_tag_map(data.orig)
    utterance_cap = max(1, round(10 * data.orig.token_count() / len(data.orig)))
    generated = generate_corpus(
        trained,
        vocab,
        generated_tokens,
        SampleConfig(seed=seed),
        tag_map=tag_map,
        max_utterance_tokens=utterance_cap,
    )
    translated = dict_translate(data.mt_source, data.lexicon).corpus
    components = [data.orig, generated, data.aa_mono, data.aa_biling, translated]
    configs = [(name, recipe, order) for name, recipe in enrichment_recipes(generated_tokens)]
    report = run_ladder(configs, components, data.dev, data.test, vocab=vocab, seed=seed)
    return DeskExperiment(data, vocab, trained, tag_map, generated, translated, report)
