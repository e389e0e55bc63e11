import pytest

from cslm.augment import (
    AugmentError,
    MixComponent,
    MixRecipe,
    TranslationLexicon,
    dict_translate,
    generate_corpus,
    ingest_transcriptions,
    load_lexicon,
    mix_corpora,
    write_lexicon,
)
from cslm.corpus import Lang, build_vocab, cs_stats, parse_lines, word_tag_map, write_corpus
from cslm.neural import SampleConfig, TrainConfig, init_params, train
from conftest import make_corpus


class TestLexicon:
    def test_load_and_write_roundtrip(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("# comment\nhond\thun\nvan\tfan\n\n", encoding="utf-8")
        lexicon = load_lexicon(path)
        assert lexicon.entries == {"hond": "hun", "van": "fan"}
        out = tmp_path / "back.tsv"
        write_lexicon(lexicon, out)
        assert load_lexicon(out).entries == lexicon.entries

    def test_duplicate_source_rejected(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("a\tb\na\tc\n", encoding="utf-8")
        with pytest.raises(AugmentError):
            load_lexicon(path)

    def test_malformed_row_rejected(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("just-one-field\n", encoding="utf-8")
        with pytest.raises(AugmentError):
            load_lexicon(path)

    def test_empty_target_rejected(self):
        with pytest.raises(AugmentError):
            TranslationLexicon({"a": ""})


class TestDictTranslate:
    def test_substitution_with_proper_noun_passthrough(self):
        corpus = make_corpus(["de|nl hond|nl van|nl Amsterdam|nl"])
        lexicon = TranslationLexicon(
            {"hond": "hun", "van": "fan", "de": "de"}, Lang.L2, Lang.L1
        )
        result = dict_translate(corpus, lexicon)
        rendered = result.corpus.utterances[0].render()
        assert rendered == "de|fy hun|fy fan|fy Amsterdam|nl"
        assert cs_stats(result.corpus).intra_sentential_switches == 1
        assert result.report.substituted == 3
        assert result.report.capitalized_passthrough == 1

    def test_empty_lexicon_is_identity(self):
        corpus = make_corpus(["de|nl hond|nl", "van|nl Amsterdam|nl"])
        result = dict_translate(corpus, TranslationLexicon({}, Lang.L2, Lang.L1))
        assert [u.tokens for u in result.corpus] == [u.tokens for u in corpus]
        assert cs_stats(result.corpus).intra_sentential_switches == 0

    def test_full_coverage_gives_monolingual_output(self):
        corpus = make_corpus(["de|nl hond|nl rent|nl"])
        lexicon = TranslationLexicon(
            {"de": "it", "hond": "hun", "rent": "rint"}, Lang.L2, Lang.L1
        )
        result = dict_translate(corpus, lexicon)
        stats = cs_stats(result.corpus)
        assert stats.words_per_lang[Lang.L1] == 3
        assert stats.intra_sentential_switches == 0

    def test_counts_preserved(self):
        corpus = make_corpus(["a|nl b|nl c|nl", "d|nl e|nl"])
        lexicon = TranslationLexicon({"a": "x", "d": "y"}, Lang.L2, Lang.L1)
        result = dict_translate(corpus, lexicon)
        assert result.corpus.token_count() == corpus.token_count()
        assert len(result.corpus) == len(corpus)

    def test_created_switches_equal_substitution_boundaries(self):
        import random

        rng = random.Random(0)
        words = [f"w{i}" for i in range(40)]
        lexicon = TranslationLexicon(
            {w: w + "x" for w in words[:25]}, Lang.L2, Lang.L1
        )
        lines = [
            " ".join(f"{rng.choice(words)}|nl" for _ in range(rng.randint(1, 12)))
            for _ in range(60)
        ]
        corpus = parse_lines(lines)
        result = dict_translate(corpus, lexicon)
        boundaries = 0
        for utt in corpus:
            for left, right in zip(utt.tokens, utt.tokens[1:]):
                if (left.surface in lexicon.entries) != (right.surface in lexicon.entries):
                    boundaries += 1
        assert cs_stats(result.corpus).intra_sentential_switches == boundaries


class TestIngest:
    def test_merges_files_and_keeps_duplicates(self, tmp_path):
        one = tmp_path / "one.txt"
        two = tmp_path / "two.txt"
        one.write_text("x|fy y|fy\nz|nl\n", encoding="utf-8")
        two.write_text("x|fy y|fy\nq|fy\n", encoding="utf-8")
        result = ingest_transcriptions([one, two], "aa-both")
        assert result.corpus.token_count() == 6
        assert result.corpus.source_label == "aa-both"
        assert result.line_count == 4
        assert result.duplicate_lines == 1
        assert result.duplicate_rate == pytest.approx(0.25)
        result.corpus.validate_unique_ids()

    def test_empty_file_list(self):
        result = ingest_transcriptions([], "aa")
        assert len(result.corpus) == 0 and result.duplicate_rate == 0.0

    def test_token_counts_are_additive(self, tmp_path):
        files = []
        for idx in range(2):
            path = tmp_path / f"part{idx}.txt"
            lines = [" ".join(["tok"] * 5) for _ in range(300)]
            path.write_text("".join(l + "\n" for l in lines), encoding="utf-8")
            files.append(path)
        result = ingest_transcriptions(files, "aa-both")
        assert result.corpus.token_count() == 3000


class TestMix:
    def build(self):
        orig = parse_lines(["a b c", "d e", "f"], source_label="orig")
        gen = parse_lines(["g g", "h h h"], source_label="gen")
        return orig, gen

    def test_identity_recipe(self):
        orig, _ = self.build()
        result = mix_corpora([orig], MixRecipe([MixComponent("orig")]), seed=0)
        assert [u.tokens for u in result.corpus] == [u.tokens for u in orig]
        assert result.tokens_per_component == {"orig": 6}

    def test_additivity(self):
        orig, gen = self.build()
        recipe = MixRecipe([MixComponent("orig"), MixComponent("gen")])
        result = mix_corpora([orig, gen], recipe, seed=0)
        assert result.corpus.token_count() == orig.token_count() + gen.token_count()

    def test_truncation_on_utterance_boundary(self):
        orig, _ = self.build()
        result = mix_corpora([orig], MixRecipe([MixComponent("orig", max_tokens=4)]), seed=0)
        # "a b c" fits; adding "d e" would exceed 4 tokens
        assert result.corpus.token_count() == 3

    def test_repeat_factor(self):
        orig, _ = self.build()
        result = mix_corpora([orig], MixRecipe([MixComponent("orig", repeat=3)]), seed=0)
        assert result.corpus.token_count() == 18
        result.corpus.validate_unique_ids()

    def test_accounting_matches_output(self):
        orig, gen = self.build()
        recipe = MixRecipe(
            [MixComponent("orig", max_tokens=5, repeat=2), MixComponent("gen", max_tokens=2)]
        )
        result = mix_corpora([orig, gen], recipe, seed=0)
        assert sum(result.tokens_per_component.values()) == result.corpus.token_count()
        assert result.tokens_per_component == {"orig": 10, "gen": 2}
        assert result.composition() == "orig(10) + gen(2)"

    def test_unknown_label_is_error(self):
        orig, _ = self.build()
        with pytest.raises(AugmentError) as err:
            mix_corpora([orig], MixRecipe([MixComponent("gen")]), seed=0)
        assert "gen" in str(err.value)

    def test_duplicate_recipe_labels_rejected(self):
        with pytest.raises(AugmentError):
            MixRecipe([MixComponent("orig"), MixComponent("orig")])

    def test_shuffle_is_deterministic(self):
        orig, gen = self.build()
        recipe = MixRecipe([MixComponent("orig"), MixComponent("gen")])
        one = mix_corpora([orig, gen], recipe, seed=7, shuffle=True)
        two = mix_corpora([orig, gen], recipe, seed=7, shuffle=True)
        assert [u.tokens for u in one.corpus] == [u.tokens for u in two.corpus]
        different = mix_corpora([orig, gen], recipe, seed=8, shuffle=True)
        assert [u.tokens for u in one.corpus] != [u.tokens for u in different.corpus]


@pytest.fixture(scope="module")
def generator_model():
    import random

    rng = random.Random(3)
    fy = [f"f{i}" for i in range(12)]
    nl = [f"n{i}" for i in range(12)]
    lines = []
    for _ in range(400):
        lang = rng.random() < 0.6
        words = []
        for _ in range(rng.randint(3, 9)):
            if rng.random() < 0.1:
                lang = not lang
            pool, tag = (fy, "fy") if lang else (nl, "nl")
            words.append(f"{rng.choice(pool)}|{tag}")
        lines.append(" ".join(words))
    corpus = make_corpus(lines)
    vocab = build_vocab([corpus])
    params = init_params(vocab.size, 12, 12, 1, seed=0)
    config = TrainConfig(bptt_len=16, batch_size=4, learning_rate=2.0, epochs=3, seed=0)
    trained = train(params, corpus, vocab, config, valid_corpus=corpus).params
    return trained, vocab, corpus


class TestGenerateCorpus:
    def test_token_budget_respected(self, generator_model):
        params, vocab, corpus = generator_model
        generated = generate_corpus(
            params, vocab, 1000, SampleConfig(seed=0), max_utterance_tokens=100
        )
        assert 900 <= generated.token_count() <= 1000
        assert generated.source_label == "gen"

    def test_output_parses_back(self, generator_model, tmp_path):
        params, vocab, corpus = generator_model
        tags = word_tag_map(corpus)
        generated = generate_corpus(
            params, vocab, 500, SampleConfig(seed=1), tag_map=tags, max_utterance_tokens=100
        )
        path = tmp_path / "gen.txt"
        write_corpus(generated, path)
        reparsed = parse_lines(path.read_text(encoding="utf-8").splitlines())
        assert reparsed.token_count() == generated.token_count()
        assert [u.tokens for u in reparsed] == [u.tokens for u in generated]

    def test_seeds_differ_but_stay_distributionally_close(self, generator_model):
        params, vocab, corpus = generator_model
        tags = word_tag_map(corpus)
        rates = []
        texts = []
        for seed in (1, 2):
            generated = generate_corpus(
                params, vocab, 800, SampleConfig(seed=seed), tag_map=tags,
                max_utterance_tokens=100,
            )
            stats = cs_stats(generated)
            rates.append(stats.intra_sentential_switches / generated.token_count())
            texts.append([u.surfaces() for u in generated])
        assert texts[0] != texts[1]
        assert abs(rates[0] - rates[1]) / max(rates) <= 0.2

    def test_ladder_of_sizes_strictly_increases(self, generator_model):
        params, vocab, corpus = generator_model
        sizes = [200, 400, 600]
        counts = []
        for size in sizes:
            generated = generate_corpus(
                params, vocab, size, SampleConfig(seed=0), max_utterance_tokens=100
            )
            counts.append(generated.token_count())
        assert counts == sorted(counts) and len(set(counts)) == 3

    def test_zero_target_rejected(self, generator_model):
        params, vocab, _ = generator_model
        with pytest.raises(AugmentError):
            generate_corpus(params, vocab, 0, SampleConfig(seed=0))
