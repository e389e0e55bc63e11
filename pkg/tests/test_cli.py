import shutil
from pathlib import Path

import pytest

from cslm.cli import main, validate_ladder_config, load_config
from cslm.corpus import parse_corpus
from cslm.ngram import perplexity, read_arpa, train_ngram_lm
from cslm.corpus import build_vocab


@pytest.fixture(scope="module")
def demo_dir(tmp_path_factory):
    """A small bundled dataset plus derived artifacts, built once."""
    out = tmp_path_factory.mktemp("demo")
    assert main([
        "demo", "--out-dir", str(out), "--orig-tokens", "12000",
        "--dev-tokens", "1500", "--test-tokens", "1500",
    ]) == 0
    assert main([
        "train-nn", "--text", str(out / "orig.txt"), "--valid", str(out / "dev.txt"),
        "--out", str(out / "lstm.bin"), "--trace", str(out / "trace.tsv"),
        "--embed-dim", "24", "--hidden-dim", "24", "--layers", "1",
        "--epochs", "1", "--lr", "4.0", "--batch-size", "8", "--bptt", "16",
        "--seed", "0",
    ]) == 0
    assert main([
        "generate", "--model", str(out / "lstm.bin"), "--tokens", "3000",
        "--tag-from", str(out / "orig.txt"), "--out", str(out / "gen.txt"),
        "--max-utterance-tokens", "200", "--seed", "0",
    ]) == 0
    assert main([
        "translate", "--text", str(out / "mt_source.txt"),
        "--lexicon", str(out / "lexicon.tsv"), "--out", str(out / "mt.txt"),
    ]) == 0
    assert main([
        "train-ngram", "--text", str(out / "orig.txt"), "--order", "3",
        "--out", str(out / "base.arpa"),
    ]) == 0
    return out


class TestExitCodes:
    def test_missing_file_is_data_error(self, tmp_path, capsys):
        code = main(["stats", str(tmp_path / "nope.txt")])
        assert code == 2
        assert "nope.txt" in capsys.readouterr().err

    def test_empty_file_is_fine(self, tmp_path, capsys):
        path = tmp_path / "empty.txt"
        path.write_text("", encoding="utf-8")
        assert main(["stats", str(path)]) == 0
        assert "tokens=0" in capsys.readouterr().out

    def test_unknown_flag_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["stats", str(tmp_path), "--no-such-flag"])
        assert err.value.code == 1

    def test_parse_error_is_data_error(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("foo|xx\n", encoding="utf-8")
        assert main(["stats", str(path)]) == 2
        assert "xx" in capsys.readouterr().err

    def test_missing_config_is_usage_error(self, tmp_path, capsys):
        assert main(["ladder", "--config", str(tmp_path / "no.cfg"), "--out",
                     str(tmp_path / "r.tsv")]) == 1

    def test_helps_exist_for_every_subcommand(self, capsys):
        from cslm.cli import build_parser

        parser = build_parser()
        for command in ["stats", "train-ngram", "ppl", "train-nn", "generate",
                        "translate", "ingest", "mix", "rescore", "wer", "ladder", "demo"]:
            with pytest.raises(SystemExit) as err:
                parser.parse_args([command, "--help"])
            assert err.value.code == 0


class TestStats:
    def test_report_keys(self, demo_dir, capsys):
        assert main(["stats", str(demo_dir / "orig.txt")]) == 0
        out = capsys.readouterr().out
        for key in ("tokens=", "words_fy=", "words_nl=", "intra_sentential_switches="):
            assert key in out

    def test_tsv_mode(self, demo_dir, capsys):
        assert main(["stats", str(demo_dir / "orig.txt"), "--tsv"]) == 0
        assert "\t" in capsys.readouterr().out


class TestNgramCommands:
    def test_cli_ppl_matches_in_process(self, demo_dir, capsys):
        assert main([
            "ppl", "--lm", str(demo_dir / "base.arpa"), "--text", str(demo_dir / "dev.txt"),
        ]) == 0
        reported = None
        for line in capsys.readouterr().out.splitlines():
            if line.startswith("ppl="):
                reported = float(line.split("=")[1])
        corpus = parse_corpus(demo_dir / "orig.txt")
        vocab = build_vocab([corpus])
        lm = train_ngram_lm(corpus, vocab, 3)
        direct = perplexity(lm, parse_corpus(demo_dir / "dev.txt")).ppl
        assert reported == pytest.approx(direct, rel=1e-6)

    def test_arpa_file_is_readable(self, demo_dir):
        lm = read_arpa(demo_dir / "base.arpa")
        assert lm.order == 3


class TestPipelineCommands:
    def test_ingest(self, demo_dir, tmp_path, capsys):
        out = tmp_path / "aa_both.txt"
        assert main([
            "ingest", str(demo_dir / "aa_mono.txt"), str(demo_dir / "aa_biling.txt"),
            "--label", "aa-both", "--out", str(out),
        ]) == 0
        merged = parse_corpus(out)
        mono = parse_corpus(demo_dir / "aa_mono.txt")
        biling = parse_corpus(demo_dir / "aa_biling.txt")
        assert merged.token_count() == mono.token_count() + biling.token_count()

    def test_mix_and_ladder(self, demo_dir, tmp_path, capsys):
        mixed = tmp_path / "mixed.txt"
        assert main([
            "mix", "--config", str(demo_dir / "demo.cfg"), "--recipe", "gen50k",
            "--out", str(mixed),
        ]) == 0
        report_path = tmp_path / "ladder.tsv"
        assert main([
            "ladder", "--config", str(demo_dir / "demo.cfg"), "--out", str(report_path),
        ]) == 0
        lines = report_path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "name\tcomposition\tdev_ppl\ttest_ppl"
        assert len(lines) == 5
        out = capsys.readouterr().out
        assert "selected on dev" in out

    def test_ladder_jobs_flag_is_deterministic(self, demo_dir, tmp_path):
        one = tmp_path / "r1.tsv"
        two = tmp_path / "r2.tsv"
        assert main(["ladder", "--config", str(demo_dir / "demo.cfg"), "--out", str(one)]) == 0
        assert main(["ladder", "--config", str(demo_dir / "demo.cfg"), "--out", str(two),
                     "--jobs", "3"]) == 0
        assert one.read_bytes() == two.read_bytes()

    def test_rescore_and_wer(self, demo_dir, tmp_path, capsys):
        rescored = tmp_path / "rescored.txt"
        assert main([
            "rescore", "--nbest", str(demo_dir / "nbest.tsv"),
            "--lm", str(demo_dir / "base.arpa"), "--model", str(demo_dir / "lstm.bin"),
            "--lm-weight", "0.5", "--out", str(rescored),
        ]) == 0
        assert main([
            "wer", "--ref", str(demo_dir / "ref.txt"), "--hyp", str(rescored),
            "--conditions", str(demo_dir / "conditions.tsv"),
        ]) == 0
        out = capsys.readouterr().out
        assert "wer=" in out

    def test_wer_jobs_matches_sequential(self, demo_dir, tmp_path, capsys):
        rescored = tmp_path / "rescored.txt"
        main([
            "rescore", "--nbest", str(demo_dir / "nbest.tsv"),
            "--lm", str(demo_dir / "base.arpa"), "--lm-weight", "0", "--out", str(rescored),
        ])
        capsys.readouterr()
        assert main(["wer", "--ref", str(demo_dir / "ref.txt"), "--hyp", str(rescored)]) == 0
        seq = capsys.readouterr().out
        assert main(["wer", "--ref", str(demo_dir / "ref.txt"), "--hyp", str(rescored),
                     "--jobs", "4"]) == 0
        par = capsys.readouterr().out
        assert seq == par


class TestConfigValidation:
    def test_all_problems_listed(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(
            "[paths]\norig = missing_orig.txt\ndev = missing_dev.txt\n"
            "[ngram]\norder = zero\n"
            "[ladder]\nconfigs = baseline, ghost\n"
            "[mix.baseline]\norig = all 1\n",
            encoding="utf-8",
        )
        parsed = load_config(cfg)
        problems = validate_ladder_config(parsed, tmp_path)
        text = "\n".join(problems)
        assert "missing_orig.txt" in text
        assert "missing_dev.txt" in text
        assert "test" in text  # missing [paths] test entry
        assert "ghost" in text
        assert "order" in text
        assert len(problems) >= 5

    def test_cli_reports_config_problems_with_exit_one(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("[ladder]\nconfigs = x\n", encoding="utf-8")
        assert main(["ladder", "--config", str(cfg), "--out", str(tmp_path / "r.tsv")]) == 1
        assert "config error" in capsys.readouterr().err


def _run_twice(argv, outputs, tmp_path):
    digests = []
    for attempt in range(2):
        workdir = tmp_path / f"run{attempt}"
        workdir.mkdir(exist_ok=True)
        mapped = [a.replace("@OUT@", str(workdir)) for a in argv]
        assert main(mapped) == 0
        digests.append([Path(str(workdir) + o).read_bytes() if o.startswith("/") else (workdir / o).read_bytes() for o in outputs])
    assert digests[0] == digests[1]


class TestDeterminism:
    def test_every_command_writes_identical_bytes_on_rerun(self, demo_dir, tmp_path):
        cases = [
            (
                ["train-ngram", "--text", str(demo_dir / "orig.txt"), "--order", "2",
                 "--out", "@OUT@/lm.arpa"],
                ["lm.arpa"],
            ),
            (
                ["train-nn", "--text", str(demo_dir / "orig.txt"), "--valid",
                 str(demo_dir / "dev.txt"), "--out", "@OUT@/m.bin", "--trace", "@OUT@/t.tsv",
                 "--embed-dim", "16", "--hidden-dim", "16", "--layers", "1",
                 "--epochs", "1", "--batch-size", "8", "--bptt", "16", "--seed", "3"],
                ["m.bin", "t.tsv"],
            ),
            (
                ["generate", "--model", str(demo_dir / "lstm.bin"), "--tokens", "400",
                 "--tag-from", str(demo_dir / "orig.txt"), "--seed", "7",
                 "--max-utterance-tokens", "200", "--out", "@OUT@/gen.txt"],
                ["gen.txt"],
            ),
            (
                ["translate", "--text", str(demo_dir / "mt_source.txt"), "--lexicon",
                 str(demo_dir / "lexicon.tsv"), "--out", "@OUT@/mt.txt",
                 "--report", "@OUT@/mt_report.txt"],
                ["mt.txt", "mt_report.txt"],
            ),
            (
                ["ingest", str(demo_dir / "aa_mono.txt"), str(demo_dir / "aa_biling.txt"),
                 "--label", "aa-both", "--out", "@OUT@/aa.txt"],
                ["aa.txt"],
            ),
            (
                ["mix", "--config", str(demo_dir / "demo.cfg"), "--recipe", "gen50k",
                 "--seed", "5", "--shuffle", "--out", "@OUT@/mix.txt"],
                ["mix.txt"],
            ),
            (
                ["rescore", "--nbest", str(demo_dir / "nbest.tsv"), "--lm",
                 str(demo_dir / "base.arpa"), "--lm-weight", "0", "--out", "@OUT@/best.txt"],
                ["best.txt"],
            ),
            (
                ["wer", "--ref", str(demo_dir / "ref.txt"), "--hyp", str(demo_dir / "ref.txt"),
                 "--report", "@OUT@/wer.txt"],
                ["wer.txt"],
            ),
            (
                ["ladder", "--config", str(demo_dir / "demo.cfg"), "--out", "@OUT@/ladder.tsv"],
                ["ladder.tsv"],
            ),
            (
                ["ppl", "--lm", str(demo_dir / "base.arpa"), "--text", str(demo_dir / "dev.txt"),
                 "--report", "@OUT@/ppl.txt"],
                ["ppl.txt"],
            ),
        ]
        for argv, outputs in cases:
            _run_twice(argv, outputs, tmp_path)

    def test_demo_command_is_deterministic(self, tmp_path):
        for name in ("a", "b"):
            assert main(["demo", "--out-dir", str(tmp_path / name), "--orig-tokens", "4000",
                         "--dev-tokens", "800", "--test-tokens", "800"]) == 0
        files_a = sorted((tmp_path / "a").iterdir())
        files_b = sorted((tmp_path / "b").iterdir())
        assert [f.name for f in files_a] == [f.name for f in files_b]
        for fa, fb in zip(files_a, files_b):
            assert fa.read_bytes() == fb.read_bytes()
