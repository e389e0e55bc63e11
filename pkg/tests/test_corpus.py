import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cslm.corpus import (
    Corpus,
    CorpusError,
    CorpusParseError,
    Lang,
    TaggedToken,
    Utterance,
    build_vocab,
    corpus_to_lines,
    cs_stats,
    dominant_lang,
    parse_corpus,
    parse_lines,
    split_corpus,
    stats_report,
    stats_tsv,
    word_tag_map,
    write_corpus,
)
from conftest import make_corpus


class TestTaggedToken:
    def test_render_roundtrip(self):
        assert TaggedToken("wol", Lang.L1).render() == "wol|fy"
        assert TaggedToken("wol").render() == "wol"

    @pytest.mark.parametrize("surface", ["", "a b", "a|b", "a\tb", "a b"])
    def test_invalid_surfaces_rejected(self, surface):
        with pytest.raises(CorpusError):
            TaggedToken(surface, Lang.L1)


class TestParse:
    def test_tag_suffixes(self):
        corpus = make_corpus(["ik|nl wol|fy net|fy"])
        assert len(corpus) == 1
        assert [t.lang for t in corpus.utterances[0].tokens] == [Lang.L2, Lang.L1, Lang.L1]
        assert corpus.utterances[0].surfaces() == ["ik", "wol", "net"]

    def test_default_lang_applied(self):
        corpus = make_corpus(["hallo wereld"], default_lang=Lang.L2)
        assert [t.lang for t in corpus.utterances[0].tokens] == [Lang.L2, Lang.L2]

    def test_untagged_default(self):
        corpus = make_corpus(["hallo wereld"])
        assert all(t.lang is Lang.UNTAGGED for t in corpus.utterances[0].tokens)

    def test_unknown_tag_is_error_with_line(self):
        with pytest.raises(CorpusParseError) as err:
            make_corpus(["foo|xx"])
        assert ":1:" in str(err.value) and "'xx'" in str(err.value)

    def test_double_pipe_is_error(self):
        with pytest.raises(CorpusParseError):
            make_corpus(["a|b|fy"])

    def test_blank_lines_skipped_and_line_numbers_kept(self):
        corpus = make_corpus(["a b", "", "c|fy"])
        assert [u.id for u in corpus] == ["line-1", "line-3"]

    def test_explicit_id_column(self):
        corpus = make_corpus(["utt-7\tfoo|fy bar|nl"])
        assert corpus.utterances[0].id == "utt-7"
        assert corpus.utterances[0].surfaces() == ["foo", "bar"]

    def test_empty_file_gives_empty_corpus(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("", encoding="utf-8")
        assert len(parse_corpus(path)) == 0

    def test_duplicate_explicit_ids_rejected(self):
        with pytest.raises(CorpusError):
            make_corpus(["u1\ta", "u1\tb"])


surfaces = st.text(
    alphabet=st.characters(blacklist_characters="|", blacklist_categories=("Zs", "Zl", "Zp", "Cc", "Cs")),
    min_size=1,
    max_size=6,
).filter(lambda s: not any(ch.isspace() for ch in s))
tokens = st.builds(TaggedToken, surfaces, st.sampled_from(list(Lang)))
utterance_bodies = st.lists(tokens, min_size=1, max_size=8)
corpora = st.builds(
    lambda bodies: Corpus([Utterance(f"line-{i + 1}", b) for i, b in enumerate(bodies)]),
    st.lists(utterance_bodies, min_size=0, max_size=12),
)


class TestRoundTrip:
    @given(corpora)
    @settings(max_examples=150, deadline=None)
    def test_serialize_parse_identity_with_ids(self, corpus):
        reparsed = parse_lines(corpus_to_lines(corpus, with_ids=True), Lang.UNTAGGED)
        assert reparsed.utterances == corpus.utterances

    @given(corpora)
    @settings(max_examples=100, deadline=None)
    def test_serialize_parse_keeps_tokens_without_ids(self, corpus):
        reparsed = parse_lines(corpus_to_lines(corpus), Lang.UNTAGGED)
        assert [u.tokens for u in reparsed] == [u.tokens for u in corpus]

    def test_file_roundtrip(self, tmp_path, tiny_bilingual):
        path = tmp_path / "corpus.txt"
        write_corpus(tiny_bilingual, path, with_ids=True)
        assert parse_corpus(path).utterances == tiny_bilingual.utterances


class TestBuildVocab:
    def test_basic(self):
        vocab = build_vocab([make_corpus(["a a b"])], min_count=1)
        assert vocab.size == 5
        assert set(vocab.id_to_word[3:]) == {"a", "b"}

    def test_min_count(self):
        vocab = build_vocab([make_corpus(["a a b"])], min_count=2)
        assert vocab.size == 4 and "b" not in vocab

    def test_max_size_with_count_then_lexicographic_ties(self):
        vocab = build_vocab(
            [make_corpus(["a b"]), make_corpus(["b c"])], min_count=1, max_size=2
        )
        # b:2 beats a:1; a beats c lexicographically
        assert vocab.id_to_word[3:] == ["b", "a"]

    def test_word_id_word_identity(self):
        vocab = build_vocab([make_corpus(["x y z y"])])
        for word in vocab.id_to_word:
            assert vocab.word(vocab.word_to_id[word]) == word

    def test_reserved_not_duplicated(self):
        vocab = build_vocab([make_corpus(["<unk> a"])])
        assert vocab.id_to_word.count("<unk>") == 1

    def test_empty_input_rejected(self):
        with pytest.raises(CorpusError):
            build_vocab([])


class TestCsStats:
    def test_intra_switch_and_lang_counts(self):
        stats = cs_stats(make_corpus(["ik|nl wol|fy net|fy"]))
        assert stats.intra_sentential_switches == 1
        assert stats.words_per_lang[Lang.L1] == 2
        assert stats.words_per_lang[Lang.L2] == 1

    def test_inter_sentential(self):
        stats = cs_stats(make_corpus(["wol|fy net|fy", "de|nl hond|nl"]))
        assert stats.inter_sentential_switches == 1
        assert stats.intra_sentential_switches == 0

    def test_mixed_counts_as_switch(self):
        stats = cs_stats(make_corpus(["oer|fy it|fy wurd|mix"]))
        assert stats.mixed_word_count == 1
        assert stats.intra_sentential_switches == 1

    def test_untagged_breaks_no_switch(self):
        stats = cs_stats(make_corpus(["wol|fy tusken net|nl"]))
        assert stats.intra_sentential_switches == 0

    def test_dominant_tie_resolves_to_l1(self):
        utt = make_corpus(["wol|fy de|nl"]).utterances[0]
        assert dominant_lang(utt) is Lang.L1

    @given(corpora)
    @settings(max_examples=150, deadline=None)
    def test_totals(self, corpus):
        stats = cs_stats(corpus)
        tagged = sum(
            stats.words_per_lang[lang] for lang in (Lang.L1, Lang.L2, Lang.MIXED)
        )
        assert tagged + stats.words_per_lang[Lang.UNTAGGED] == corpus.token_count()
        assert stats.utterance_count == len(corpus)
        pairs = corpus.token_count() - len(corpus)
        assert 0 <= stats.intra_sentential_switches <= max(pairs, 0)

    def test_report_formats(self, tiny_bilingual):
        stats = cs_stats(tiny_bilingual)
        report = stats_report(stats)
        assert "tokens=13" in report and "intra_sentential_switches=1" in report
        assert stats_tsv(stats).count("\t") == len(report.strip().splitlines())


class TestSplit:
    def test_sizes(self):
        corpus = make_corpus([f"w{i}" for i in range(10)])
        parts = split_corpus(corpus, [0.8, 0.2], seed=1)
        assert [len(p) for p in parts] == [8, 2]

    def test_deterministic(self):
        corpus = make_corpus([f"w{i}" for i in range(20)])
        first = split_corpus(corpus, [0.5, 0.5], seed=9)
        second = split_corpus(corpus, [0.5, 0.5], seed=9)
        assert [u.id for u in first[0]] == [u.id for u in second[0]]

    def test_bad_fractions(self):
        with pytest.raises(CorpusError):
            split_corpus(make_corpus(["a"]), [0.5, 0.4], seed=0)

    @given(st.integers(0, 2**30), st.integers(1, 30))
    @settings(max_examples=60, deadline=None)
    def test_partition_is_exact(self, seed, n):
        corpus = make_corpus([f"w{i} x{i}" for i in range(n)])
        parts = split_corpus(corpus, [0.3, 0.3, 0.4], seed=seed)
        ids = sorted(u.id for p in parts for u in p)
        assert ids == sorted(u.id for u in corpus)


class TestWordTagMap:
    def test_majority_and_tie(self):
        corpus = make_corpus(["wol|fy wol|fy wol|nl", "de|nl de|fy"])
        tags = word_tag_map(corpus)
        assert tags["wol"] is Lang.L1
        assert tags["de"] is Lang.L1  # tie resolves toward L1

    def test_untagged_words_excluded(self):
        assert "plain" not in word_tag_map(make_corpus(["plain wol|fy"]))
