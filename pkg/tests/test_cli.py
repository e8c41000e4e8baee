import json
import subprocess
import sys

import numpy as np
import pytest

from whittaker.cli import dumps_report, main
from whittaker.liegroup import matrix_to_doc
from whittaker.reduction import make_space, sigma_point
from whittaker.slices import random_slice_point
from whittaker.rootsys import coxeter_word


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def strip_runtime(text):
    doc = json.loads(text)
    doc.pop("runtime_ms", None)
    return doc


class TestInfo:
    @pytest.mark.parametrize(
        "rank, word, line",
        [
            ("2", "1", "dimSigma=1 dimOmega=2 dimC=1 components=2"),
            ("3", "1 2", "dimSigma=2 dimOmega=5 dimC=2 components=3"),
            ("4", "2", "dimSigma=5 dimOmega=10 dimC=1 components=1"),
        ],
    )
    def test_examples(self, capsys, rank, word, line):
        code, out, _ = run(capsys, "info", "--rank", rank, "--weyl", word)
        assert code == 0 and line in out

    def test_report_file(self, capsys, tmp_path):
        path = tmp_path / "info.json"
        code, _, _ = run(capsys, "info", "--rank", "4", "--weyl", "2", "--out", str(path))
        doc = json.loads(path.read_text())
        assert code == 0 and doc["group"] == "A3" and doc["roots"] == {"fixed": 1, "moved": 5, "flipped": 1}

    @pytest.mark.parametrize("argv", [["info", "--rank", "2", "--weyl", "3"], ["info", "--rank", "x"], ["frobnicate"]])
    def test_usage_errors(self, capsys, argv):
        code, _, err = run(capsys, *argv)
        assert code == 2 and err


class TestVerify:
    def test_prop_sharp_example(self, capsys):
        code, out, _ = run(capsys, "verify", "--check", "prop-sharp", "--rank", "2", "--weyl", "1",
                           "--samples", "100", "--seed", "7", "--tol", "1e-8")
        doc = json.loads(out)
        assert code == 0 and doc["pass"] and doc["max_residual"] < 1e-8
        assert doc["group"] == "A1" and doc["samples"] == 100 and doc["findings"] == []

    def test_printed_formula_fails(self, capsys):
        code, out, _ = run(capsys, "verify", "--check", "prop-sharp", "--rank", "2", "--samples", "5",
                           "--formula", "printed")
        assert code == 1 and not json.loads(out)["pass"]

    def test_unknown_check(self, capsys):
        code, _, err = run(capsys, "verify", "--check", "nope")
        assert code == 2 and "nope" in err

    def test_deterministic(self, capsys, tmp_path):
        texts = []
        for k in range(2):
            path = tmp_path / f"r{k}.json"
            code, status, _ = run(capsys, "verify", "--check", "moment-g", "--rank", "3", "--samples", "10",
                                  "--seed", "11", "--out", str(path))
            assert code == 0 and status.startswith("moment-g: pass")
            texts.append(strip_runtime(path.read_text()))
        assert texts[0] == texts[1]

    def test_transversality_failure_exits_one(self, capsys):
        # a tolerance below any attainable round-trip residual drives the failure path
        code, out, _ = run(capsys, "verify", "--check", "transversality", "--rank", "2", "--samples", "3",
                           "--tol", "1e-300")
        assert code == 1 and not json.loads(out)["pass"]

    def test_config_file_and_env(self, capsys, tmp_path, monkeypatch):
        cfg = tmp_path / "c.conf"
        cfg.write_text("# defaults\nsamples = 4\nseed = 3\n")
        code, out, _ = run(capsys, "--config", str(cfg), "verify", "--check", "cocycle", "--rank", "2")
        doc = json.loads(out)
        assert code == 0 and (doc["samples"], doc["seed"]) == (4, 3)
        monkeypatch.setenv("WHITTAKER_CONFIG", str(cfg))
        code, out, _ = run(capsys, "verify", "--check", "cocycle", "--rank", "2", "--samples", "2")
        doc = json.loads(out)
        assert (doc["samples"], doc["seed"]) == (2, 3)
        cfg.write_text("colour = red\n")
        code, _, _ = run(capsys, "--config", str(cfg), "verify", "--check", "cocycle")
        assert code == 2


class TestReduce:
    def test_gself_coxeter_rank_zero(self, capsys):
        code, out, _ = run(capsys, "reduce", "--rank", "2", "--manifold", "g", "--seed", "1")
        doc = json.loads(out)
        assert code == 0 and doc["rank"] == 0 and doc["kernel_dim"] == 0 and doc["tangent_dim"] == 1

    def test_double_rank_four(self, capsys, tmp_path):
        sp = make_space("HeisenbergDouble", 2, coxeter_word(2), validate=False)
        rng = np.random.default_rng(4)
        d1, d2 = sigma_point(sp, random_slice_point(sp.spec, rng), rng)
        doc = {"n": 2, "d1": matrix_to_doc(d1)["entries"], "d2": matrix_to_doc(d2)["entries"]}
        path = tmp_path / "p.json"
        path.write_text(json.dumps(doc))
        code, out, _ = run(capsys, "reduce", "--rank", "2", "--manifold", "double", "--point", str(path))
        rep = json.loads(out)
        assert code == 0 and rep["rank"] == 4 and rep["leaf_intersection_dim"] == 4
        assert np.abs(np.array(rep["casimir_brackets"])).max() < 1e-8

    def test_off_slice_point(self, capsys, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps(matrix_to_doc(np.array([[1.0, 2.0], [-3.0, -5.0]]))))
        code, out, _ = run(capsys, "reduce", "--rank", "2", "--point", str(path))
        assert code == 1 and not json.loads(out)["pass"]

    def test_malformed_point(self, capsys, tmp_path):
        path = tmp_path / "p.json"
        path.write_text("{not json")
        code, _, err = run(capsys, "reduce", "--rank", "2", "--point", str(path))
        assert code == 2 and "point" in err


class TestClassical:
    def test_regular_sl2(self, capsys):
        code, out, _ = run(capsys, "classical", "--partition", "2", "--samples", "50")
        doc = json.loads(out)
        assert code == 0 and doc["pass"]
        assert doc["dims"]["reduced_rank_generic"] == 0

    def test_subregular_sl3(self, capsys):
        code, out, _ = run(capsys, "classical", "--partition", "2,1")
        doc = json.loads(out)
        assert code == 0 and doc["dims"]["reduced_rank_generic"] == 2

    def test_trivial(self, capsys):
        code, out, _ = run(capsys, "classical", "--partition", "1,1")
        assert code == 0 and json.loads(out)["pass"]

    def test_bad_partition(self, capsys):
        assert run(capsys, "classical", "--partition", "0")[0] == 2


def test_serialization_keeps_doubles():
    x = 0.1 + 0.2
    text = dumps_report({"a": x, "b": 0.0, "c": np.float64(3), "d": 1 + 2j})
    doc = json.loads(text)
    assert doc["a"] == x and text.count("0.30000000000000004") == 1
    assert '"b": 0.0' in text and doc["d"] == [1.0, 2.0]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "whittaker", "info", "--rank", "3"], capture_output=True, text=True)
    assert proc.returncode == 0 and "components=3" in proc.stdout
