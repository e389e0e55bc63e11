"""Bilingual code-switching language modeling toolkit."""

from .corpus import (
    Corpus,
    CorpusError,
    CorpusParseError,
    CorpusStats,
    Lang,
    TaggedToken,
    Utterance,
    Vocabulary,
    build_vocab,
    cs_stats,
    parse_corpus,
    split_corpus,
    word_tag_map,
    write_corpus,
)
from .ngram import (
    ArpaError,
    BackoffLM,
    Discounts,
    NGramCounts,
    NGramError,
    count_ngrams,
    estimate_discounts,
    estimate_kn,
    interpolate_lms,
    perplexity,
    read_arpa,
    train_ngram_lm,
    write_arpa,
)
from .neural import (
    NeuralLMParams,
    NeuralScorer,
    SampleConfig,
    TrainConfig,
    forward,
    init_params,
    load_params,
    loss_and_grads,
    sample,
    save_params,
    score,
    train,
)
from .augment import (
    MixComponent,
    MixRecipe,
    TranslationLexicon,
    dict_translate,
    generate_corpus,
    ingest_transcriptions,
    load_lexicon,
    mix_corpora,
)
from .evaluate import (
    LadderReport,
    NBestEntry,
    WerResult,
    read_nbest,
    rescore_nbest,
    run_ladder,
    tune_rescore_weight,
    wer,
)

__version__ = "0.1.0"
