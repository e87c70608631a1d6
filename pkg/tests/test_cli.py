import numpy as np
import pytest

from crosslex.cli import main
from crosslex.manifest import read_manifest


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture()
def synth_dir(tmp_path):
    code = main(["synth", "--n", "60", "--d", "6", "--noise", "0",
                 "--seed", "3", "--out", str(tmp_path / "inst")])
    assert code == 0
    return tmp_path / "inst"


class TestSynthAlignEval:
    def test_noiseless_pipeline_reports_perfect_p1(self, synth_dir, tmp_path, capsys):
        map_path = tmp_path / "map.txt"
        code, _, _ = run(capsys, "align", "--src", str(synth_dir / "src.vec"),
                         "--tgt", str(synth_dir / "tgt.vec"),
                         "--train-lex", str(synth_dir / "lexicon.txt"),
                         "--method", "procrustes", "--out", str(map_path))
        assert code == 0
        assert map_path.exists() and (tmp_path / "map.txt.manifest").exists()
        code, out, _ = run(capsys, "eval", "--src", str(synth_dir / "src.vec"),
                           "--tgt", str(synth_dir / "tgt.vec"),
                           "--map", str(map_path),
                           "--lexicon", str(synth_dir / "lexicon.txt"),
                           "--method", "csls")
        assert code == 0
        assert out.splitlines()[0] == "P@1 1.0000 P@5 1.0000 P@10 1.0000 queries 60"

    def test_eval_both_prints_nn_and_csls_lines(self, synth_dir, tmp_path, capsys):
        map_path = tmp_path / "map.txt"
        run(capsys, "align", "--src", str(synth_dir / "src.vec"),
            "--tgt", str(synth_dir / "tgt.vec"),
            "--train-lex", str(synth_dir / "lexicon.txt"),
            "--method", "procrustes", "--out", str(map_path))
        code, out, _ = run(capsys, "eval", "--src", str(synth_dir / "src.vec"),
                           "--tgt", str(synth_dir / "tgt.vec"),
                           "--map", str(map_path),
                           "--lexicon", str(synth_dir / "lexicon.txt"),
                           "--method", "both")
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("nn P@1 ")
        assert lines[1].startswith("csls P@1 ")

    def test_eval_out_dir_writes_report_figure_manifest(self, synth_dir, tmp_path, capsys):
        map_path = tmp_path / "map.txt"
        run(capsys, "align", "--src", str(synth_dir / "src.vec"),
            "--tgt", str(synth_dir / "tgt.vec"),
            "--train-lex", str(synth_dir / "lexicon.txt"),
            "--method", "procrustes", "--out", str(map_path))
        out_dir = tmp_path / "report"
        code, _, _ = run(capsys, "eval", "--src", str(synth_dir / "src.vec"),
                         "--tgt", str(synth_dir / "tgt.vec"),
                         "--map", str(map_path),
                         "--lexicon", str(synth_dir / "lexicon.txt"),
                         "--method", "both", "--out-dir", str(out_dir))
        assert code == 0
        assert (out_dir / "report_nn.txt").exists()
        assert (out_dir / "report_csls.txt").exists()
        assert (out_dir / "pk_curve.png").exists()
        manifest = read_manifest(out_dir / "manifest.txt")
        assert manifest["subcommand"] == "eval"
        assert "input.map.sha256" in manifest

    def test_align_rcsls_and_refine(self, synth_dir, tmp_path, capsys):
        map_path = tmp_path / "map_rcsls.txt"
        code, _, _ = run(capsys, "align", "--src", str(synth_dir / "src.vec"),
                         "--tgt", str(synth_dir / "tgt.vec"),
                         "--train-lex", str(synth_dir / "lexicon.txt"),
                         "--method", "rcsls", "--rcsls-epochs", "3",
                         "--rcsls-k", "4", "--refine", "1", "--refine-k", "4",
                         "--out", str(map_path))
        assert code == 0
        code, out, _ = run(capsys, "eval", "--src", str(synth_dir / "src.vec"),
                           "--tgt", str(synth_dir / "tgt.vec"),
                           "--map", str(map_path),
                           "--lexicon", str(synth_dir / "lexicon.txt"),
                           "--method", "nn")
        assert code == 0
        assert out.startswith("P@1 1.0000")

    def test_translate(self, synth_dir, tmp_path, capsys):
        map_path = tmp_path / "map.txt"
        run(capsys, "align", "--src", str(synth_dir / "src.vec"),
            "--tgt", str(synth_dir / "tgt.vec"),
            "--train-lex", str(synth_dir / "lexicon.txt"),
            "--method", "procrustes", "--out", str(map_path))
        code, out, _ = run(capsys, "translate", "--word", "s5",
                           "--src", str(synth_dir / "src.vec"),
                           "--tgt", str(synth_dir / "tgt.vec"),
                           "--map", str(map_path), "--method", "nn", "--top", "3")
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 3
        assert lines[0].split("\t")[0] == "t5"


class TestCleanAndStats:
    def test_clean_writes_sentences_and_manifest(self, tmp_path, capsys):
        raw = tmp_path / "raw.txt"
        raw.write_text("Dem say NA!\ndem say na.\n\nWetin dey?\n", encoding="utf-8")
        out = tmp_path / "clean.txt"
        code, stdout, _ = run(capsys, "clean", "--input", str(raw), "--output", str(out))
        assert code == 0
        assert stdout == ""  # results are the file, stdout stays quiet
        assert out.read_text(encoding="utf-8") == "dem say na\nwetin dey\n"
        manifest = read_manifest(str(out) + ".manifest")
        assert manifest["subcommand"] == "clean"

    def test_clean_no_dedup(self, tmp_path, capsys):
        raw = tmp_path / "raw.txt"
        raw.write_text("a b.\na b.\n", encoding="utf-8")
        out = tmp_path / "clean.txt"
        code, _, _ = run(capsys, "clean", "--input", str(raw),
                         "--output", str(out), "--no-dedup")
        assert code == 0
        assert out.read_text(encoding="utf-8") == "a b\na b\n"

    def test_stats(self, tmp_path, capsys):
        corpus = tmp_path / "c.txt"
        corpus.write_text("a b a\nb c\n", encoding="utf-8")
        code, out, _ = run(capsys, "stats", "--corpus", str(corpus))
        assert code == 0
        assert out == "sentences 2\ntokens 5\nunique_words 3\n"


class TestExitCodes:
    def test_unknown_flag_exits_1(self, capsys):
        code, _, err = run(capsys, "stats", "--corpus", "x", "--bogus")
        assert code == 1
        assert "usage" in err

    def test_unknown_subcommand_exits_1(self, capsys):
        code, _, _ = run(capsys, "frobnicate")
        assert code == 1

    def test_missing_file_exits_2(self, capsys):
        code, _, _ = run(capsys, "stats", "--corpus", "/nonexistent/file.txt")
        assert code == 2

    def test_malformed_embedding_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.vec"
        bad.write_text("a 1 0\nb 0 1 2\n", encoding="utf-8")
        lex = tmp_path / "lex.txt"
        lex.write_text("a\ta\n", encoding="utf-8")
        code, _, _ = run(capsys, "align", "--src", str(bad), "--tgt", str(bad),
                         "--train-lex", str(lex), "--method", "procrustes",
                         "--out", str(tmp_path / "m.txt"))
        assert code == 2

    def test_procrustes_without_lexicon_exits_1(self, synth_dir, tmp_path, capsys):
        code, _, _ = run(capsys, "align", "--src", str(synth_dir / "src.vec"),
                         "--tgt", str(synth_dir / "tgt.vec"),
                         "--method", "procrustes", "--out", str(tmp_path / "m.txt"))
        assert code == 1

    def test_unknown_translate_word_exits_1(self, synth_dir, tmp_path, capsys):
        map_path = tmp_path / "map.txt"
        run(capsys, "align", "--src", str(synth_dir / "src.vec"),
            "--tgt", str(synth_dir / "tgt.vec"),
            "--train-lex", str(synth_dir / "lexicon.txt"),
            "--method", "procrustes", "--out", str(map_path))
        code, _, _ = run(capsys, "translate", "--word", "zzz",
                         "--src", str(synth_dir / "src.vec"),
                         "--tgt", str(synth_dir / "tgt.vec"),
                         "--map", str(map_path))
        assert code == 1


class TestDeterminism:
    def test_synth_twice_bit_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            code, _, _ = run(capsys, "synth", "--n", "40", "--d", "5",
                             "--noise", "0.1", "--seed", "9", "--out", str(out))
            assert code == 0
        for name in ("src.vec", "tgt.vec", "lexicon.txt", "truth_map.txt"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_train_embed_twice_bit_identical(self, tmp_path, capsys):
        corpus = tmp_path / "c.txt"
        corpus.write_text("a b c\nb c d\na d\n" * 20, encoding="utf-8")
        outs = []
        for name in ("e1.vec", "e2.vec"):
            out = tmp_path / name
            code, _, _ = run(capsys, "train-embed", "--corpus", str(corpus),
                             "--out", str(out), "--dim", "8", "--epochs", "2",
                             "--negatives", "3", "--window", "2",
                             "--batch-size", "16", "--seed", "5")
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
