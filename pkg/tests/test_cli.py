import json
import subprocess
import sys
from pathlib import Path

import pytest

from translitkit.align import LexiconEntry, write_lexicon
from translitkit.cli import main
from translitkit.ngram import count_ngrams, read_arpa, train_witten_bell, write_arpa

BENGALI = Path(__file__).parent / "data" / "bengali_eval"


@pytest.fixture
def toy_model(tmp_path):
    path = tmp_path / "toy.arpa"
    write_arpa(train_witten_bell(count_ngrams([["x:a", "y:b"], ["x:a"], ["y:b"]], 2)), path)
    return path


@pytest.fixture
def hindi_pair(tmp_path):
    lex = tmp_path / "lex.tsv"
    write_lexicon(
        [LexiconEntry("कम", "kam", 2), LexiconEntry("जल", "jal", 2), LexiconEntry("कमल", "kamal", 1)], lex
    )
    model = tmp_path / "pair.arpa"
    assert main(["train-pair", "--lexicon", str(lex), "--output", str(model), "--order", "3"]) == 0
    return lex, model


class TestTranslit:
    def test_toy_word(self, toy_model, capsys):
        assert main(["translit", "--model", str(toy_model), "ab"]) == 0
        assert capsys.readouterr().out == "xy\n"

    def test_kbest_lines(self, toy_model, capsys):
        assert main(["translit", "--model", str(toy_model), "--k", "2", "ab"]) == 0
        rows = [line.split("\t") for line in capsys.readouterr().out.splitlines()]
        assert rows[0][:3] == ["ab", "1", "xy"]

    def test_unknown_symbol_fails(self, toy_model, capsys):
        assert main(["translit", "--model", str(toy_model), "q"]) == 1
        assert "q" in capsys.readouterr().err


class TestEval:
    def test_passthrough_bengali_example(self, capsys):
        argv = ["eval", "--protocol", "passthrough", "--ref", str(BENGALI / "original.txt"),
                "--hyp", str(BENGALI / "system_passthrough.txt")]
        assert main(argv) == 0
        assert capsys.readouterr().out.strip() == "15.4"

    def test_whitespace_bengali_example(self, capsys):
        argv = ["eval", "--protocol", "whitespace", "--profile", "bn", "--lexicon", str(BENGALI / "lexicon.tsv"),
                "--ref", str(BENGALI / "original.txt"), "--hyp", str(BENGALI / "system_words.txt")]
        assert main(argv) == 0
        assert capsys.readouterr().out.strip() == "7.7"

    def test_json_report(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        argv = ["eval", "--protocol", "cer", "--ref", str(BENGALI / "original.txt"),
                "--hyp", str(BENGALI / "original.txt"), "--json", str(out)]
        assert main(argv) == 0
        assert capsys.readouterr().out.strip() == "0.0"
        assert json.loads(out.read_text(encoding="utf-8"))["cer"] == 0.0
        assert (tmp_path / "r.json.config.json").exists()

    def test_whitespace_needs_profile(self):
        with pytest.raises(SystemExit) as err:
            main(["eval", "--protocol", "whitespace", "--ref", "a", "--hyp", "b"])
        assert err.value.code == 2


class TestErrors:
    def test_missing_file(self, tmp_path, capsys):
        rc = main(["train-lm", "--input", str(tmp_path / "nope.txt"), "--output", str(tmp_path / "lm.arpa")])
        assert rc == 2
        err = capsys.readouterr().err
        assert err.startswith("translitkit train-lm: error:") and "nope.txt" in err

    def test_unknown_flag(self):
        with pytest.raises(SystemExit) as err:
            main(["translit", "--frobnicate"])
        assert err.value.code == 2

    def test_help_shows_defaults(self, capsys):
        with pytest.raises(SystemExit):
            main(["translit", "--help"])
        out = capsys.readouterr().out
        assert "--max-insertions" in out and "(default: 3)" in out


class TestPipeline:
    def test_filter_corpus(self, tmp_path):
        pages = tmp_path / "pages.jsonl"
        pages.write_text(
            json.dumps({"page_id": "1", "title": "t", "sections": [["", "वह घर गया। राम ने खाना खाया। ab cd."]]}, ensure_ascii=False)
            + "\n",
            encoding="utf-8",
        )
        out, meta = tmp_path / "kept.txt", tmp_path / "meta.json"
        assert main(["filter-corpus", "--profile", "hi", "--input", str(pages), "--output", str(out), "--meta", str(meta)]) == 0
        assert out.read_text(encoding="utf-8") == "वह घर गया।\nराम ने खाना खाया।\n"
        assert json.loads(meta.read_text(encoding="utf-8"))["sentences"][0]["page_id"] == "1"
        cfg = json.loads((tmp_path / "kept.txt.config.json").read_text())
        assert cfg["sent_outside_max"] == 0.1 and cfg["command"] == "filter-corpus"

    def test_sample_and_split_lexicon(self, tmp_path):
        sents = tmp_path / "s.txt"
        sents.write_text("कम है\nकम जल\nजल है\n", encoding="utf-8")
        words = tmp_path / "w.tsv"
        assert main(["sample-lexicon", "--profile", "hi", "--input", str(sents), "--output", str(words)]) == 0
        assert words.read_text(encoding="utf-8").splitlines() == ["कम\t2", "जल\t2", "है\t2"]
        lex = tmp_path / "lex.tsv"
        write_lexicon([LexiconEntry(w, "x") for w in ["कम", "जल", "है", "घर"]], lex)
        assert main(["split-lexicon", "--input", str(lex), "--sizes", "2", "1", "1", "--output-dir", str(tmp_path / "sp")]) == 0
        n = [len((tmp_path / "sp" / f"{s}.tsv").read_text(encoding="utf-8").splitlines()) for s in ("train", "dev", "test")]
        assert n == [2, 1, 1]

    def test_train_lm(self, tmp_path):
        text = tmp_path / "t.txt"
        text.write_text("a b c\na b\n", encoding="utf-8")
        out = tmp_path / "lm.arpa"
        assert main(["train-lm", "--input", str(text), "--output", str(out), "--smoothing", "witten-bell", "--order", "2"]) == 0
        lm = read_arpa(out)
        assert lm.order == 2 and lm.meta["unit"] == "word"

    def test_train_pair_and_decode(self, tmp_path, hindi_pair, capsys):
        _, model = hindi_pair
        assert main(["translit", "--model", str(model), "kamal"]) == 0
        assert capsys.readouterr().out == "कमल\n"
        lm_text = tmp_path / "lm.txt"
        lm_text.write_text("कम जल\nकमल\n", encoding="utf-8")
        lm = tmp_path / "lm.arpa"
        assert main(["train-lm", "--input", str(lm_text), "--output", str(lm)]) == 0
        rom = tmp_path / "rom.txt"
        rom.write_text("kam jal.\nkamal\n", encoding="utf-8")
        out = tmp_path / "dec.txt"
        for jobs in ("1", "2"):
            argv = ["decode-sentences", "--pair-model", str(model), "--lm", str(lm), "--input", str(rom),
                    "--output", str(out), "--jobs", jobs]
            assert main(argv) == 0
            assert out.read_text(encoding="utf-8") == "कम जल.\nकमल\n"

    def test_simulate_is_reproducible(self, tmp_path, hindi_pair):
        lex, model = hindi_pair
        src = tmp_path / "native.txt"
        src.write_text("कम जल।\nकमल, 12\n" * 20, encoding="utf-8")
        outs = []
        for name in ("a", "b"):
            out = tmp_path / f"{name}.txt"
            argv = ["simulate", "--profile", "hi", "--lexicon", str(lex), "--pair-model", str(model),
                    "--input", str(src), "--output", str(out), "--mode", "sampled", "--copies", "3", "--seed", "7"]
            assert main(argv) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
        assert len(outs[0].decode("utf-8").splitlines()) == 120

    def test_simulate_parallel(self, tmp_path, hindi_pair):
        lex, model = hindi_pair
        src = tmp_path / "native.txt"
        src.write_text("कम जल।\n", encoding="utf-8")
        out = tmp_path / "par.tsv"
        argv = ["simulate", "--profile", "hi", "--lexicon", str(lex), "--pair-model", str(model),
                "--input", str(src), "--output", str(out), "--parallel", "full_string", "--k", "1"]
        assert main(argv) == 0
        assert out.read_text(encoding="utf-8") == "kam jal.\tकम जल।\n"


def test_module_entry_point(toy_model):
    res = subprocess.run(
        [sys.executable, "-m", "translitkit", "translit", "--model", str(toy_model), "ba"],
        capture_output=True, text=True, check=True,
    )
    assert res.stdout == "yx\n"
