import subprocess
import sys

import pytest

from healthlit.cli import PipelineConfig, main
from healthlit.evaluation import SUMMARY_COLUMNS


def cli(*argv):
    with pytest.raises(SystemExit) as exc:
        main([str(a) for a in argv])
    return exc.value.code


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """build-corpus -> make-silver -> split -> train with a tiny model."""
    d = tmp_path_factory.mktemp("pipe")
    assert cli("build-corpus", "--out", d / "snippets.jsonl") == 0
    assert cli("make-silver", "--snippets", d / "snippets.jsonl", "--out", d / "silver", "--seed", 7) == 0
    assert cli("split", "--input", d / "silver", "--out", d / "split", "--seed", 7) == 0
    cfg = d / "tiny.ini"
    cfg.write_text("[model]\nembed_dim = 8\nhidden_dim = 8\n[train]\nsteps = 20\nbatch_size = 8\n", encoding="utf-8")
    assert cli("train", "--config", cfg, "--data", d / "split" / "train", "--out", d / "m.ckpt", "--trace", d / "trace.csv") == 0
    return d


class TestSubcommands:
    def test_validate_lexicon_ok(self, capsys):
        assert cli("validate-lexicon") == 0
        assert "ok: " in capsys.readouterr().err

    def test_validate_lexicon_violation(self, tmp_path, capsys):
        lex = tmp_path / "bad.tsv"
        lex.write_text("risk\tchance\nchance\tluck\n", encoding="utf-8")
        assert cli("validate-lexicon", "--lexicon", lex) == 1
        assert capsys.readouterr().out == "risk\tchance\tchance\n"

    def test_pipeline_outputs(self, pipeline):
        assert (pipeline / "silver" / "meta.jsonl").exists()
        n_train = len((pipeline / "split" / "train" / "src.txt").read_text(encoding="utf-8").splitlines())
        n_valid = len((pipeline / "split" / "valid" / "src.txt").read_text(encoding="utf-8").splitlines())
        n_all = len((pipeline / "silver" / "src.txt").read_text(encoding="utf-8").splitlines())
        assert n_train + n_valid == n_all and n_train == int(0.9 * n_all + 0.5)
        assert (pipeline / "trace.csv").read_text().startswith("step,loss\n1,")

    def test_make_silver_deterministic(self, pipeline, tmp_path):
        assert cli("make-silver", "--snippets", pipeline / "snippets.jsonl", "--out", tmp_path / "again", "--seed", 7) == 0
        for name in ("src.txt", "tgt.txt", "meta.jsonl"):
            assert (tmp_path / "again" / name).read_bytes() == (pipeline / "silver" / name).read_bytes()

    def test_translate_sentence(self, pipeline, capsys):
        assert cli("translate", "--sentence", "Your risk is high.", "--checkpoint", pipeline / "m.ckpt") == 0
        out = capsys.readouterr().out
        assert out.count("\n") == 1

    def test_translate_file_and_evaluate(self, pipeline, tmp_path, capsys):
        valid = pipeline / "split" / "valid"
        hyp = tmp_path / "bilstm.txt"
        assert cli("translate", "--checkpoint", pipeline / "m.ckpt", "--input", valid / "src.txt", "--output", hyp) == 0
        assert len(hyp.read_text(encoding="utf-8").splitlines()) == len((valid / "src.txt").read_text().splitlines())
        capsys.readouterr()
        code = cli("evaluate", "--hyp", valid / "src.txt", "--hyp", hyp, "--ref", valid / "tgt.txt", "--name", "Identity", "--name", "BiLSTM", "--scores-dir", tmp_path / "scores")
        assert code == 0
        out = capsys.readouterr().out.splitlines()
        positions = [out[0].index(c) for c in SUMMARY_COLUMNS]
        assert positions == sorted(positions)
        assert out[2].startswith("Identity") and out[3].startswith("BiLSTM")
        assert out[-1].startswith("paired t-test Identity vs BiLSTM: t=") and ", df=" in out[-1] and ", p=" in out[-1]
        scores = (tmp_path / "scores" / "BiLSTM.scores").read_text().splitlines()
        assert len(scores) == len(hyp.read_text().splitlines())

        assert cli("evaluate", "--scores", tmp_path / "scores" / "Identity.scores", "--scores", tmp_path / "scores" / "BiLSTM.scores", "--format", "csv") == 0
        csv = capsys.readouterr().out.splitlines()
        assert csv[0] == "Model,25th Percentile,50th Percentile,75th Percentile,Mean,Interpretation"

    def test_evaluate_length_mismatch(self, tmp_path):
        (tmp_path / "h.txt").write_text("a\nb\n")
        (tmp_path / "r.txt").write_text("a\n")
        assert cli("evaluate", "--hyp", tmp_path / "h.txt", "--ref", tmp_path / "r.txt") == 1

    def test_hir_report(self, pipeline, capsys):
        train = pipeline / "split" / "train"
        assert cli("hir-report", "--stage", f"Source={train}:src", "--stage", f"Silver={train}:tgt", "--format", "csv") == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "Data Source,Source,Silver"
        assert lines[-1].startswith("Average,")
        _, src, tgt = lines[-1].split(",")
        assert float(src) > float(tgt)

    def test_hir_report_sites_from(self, pipeline, tmp_path, capsys):
        valid = pipeline / "split" / "valid"
        assert cli("hir-report", "--stage", f"Gold={valid / 'tgt.txt'}", "--sites-from", valid) == 0
        out = capsys.readouterr().out
        assert "Other" not in out and "Average" in out

    def test_gradcheck(self, capsys):
        assert cli("gradcheck", "--embed-dim", 2, "--hidden-dim", 2) == 0
        out = capsys.readouterr()
        assert "PASS" in out.err and out.out.count("\n") == 12


class TestUsageAndErrors:
    def test_unknown_subcommand(self, capsys):
        assert cli("frobnicate") == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag(self):
        assert cli("split", "--input", "x", "--out", "y", "--bogus") == 2

    def test_missing_input(self, tmp_path, capsys):
        assert cli("train", "--data", tmp_path / "nope", "--out", tmp_path / "m") == 1
        assert "error" in capsys.readouterr().err

    def test_translate_sources_exclusive(self, tmp_path):
        assert cli("translate", "--checkpoint", "m", "--sentence", "a", "--input", "b") == 2

    def test_help_per_subcommand(self, capsys):
        assert cli("evaluate", "--help") == 0
        assert "--hyp" in capsys.readouterr().out

    def test_console_script(self):
        proc = subprocess.run([sys.executable, "-m", "healthlit.cli", "validate-lexicon"], capture_output=True, text=True)
        assert proc.returncode == 0


class TestConfig:
    def test_defaults_documented(self):
        c = PipelineConfig()
        assert (c.min_words, c.seed, c.train_fraction, c.embed_dim, c.hidden_dim) == (5, 0, 0.9, 32, 64)

    def test_load_and_round_trip(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text(PipelineConfig(seed=11, steps=3).to_ini(), encoding="utf-8")
        c = PipelineConfig.load(path)
        assert c.seed == 11 and c.steps == 3 and c == PipelineConfig(seed=11, steps=3)

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text("[pipeline]\nsede = 3\n", encoding="utf-8")
        assert cli("validate-lexicon", "--config", path) == 1

    def test_bad_value(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text("[train]\nsteps = many\n", encoding="utf-8")
        assert cli("validate-lexicon", "--config", path) == 1

    def test_missing_referenced_path(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text("[pipeline]\nlexicon = /no/such/file.tsv\n", encoding="utf-8")
        assert cli("validate-lexicon", "--config", path) == 1

    def test_flag_overrides_file(self, tmp_path, pipeline):
        path = tmp_path / "c.ini"
        path.write_text("[pipeline]\nseed = 1\n", encoding="utf-8")
        assert cli("make-silver", "--config", path, "--seed", 7, "--snippets", pipeline / "snippets.jsonl", "--out", tmp_path / "s") == 0
        assert (tmp_path / "s" / "tgt.txt").read_bytes() == (pipeline / "silver" / "tgt.txt").read_bytes()
