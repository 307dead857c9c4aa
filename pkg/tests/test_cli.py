import json

import pytest

from holocycles.cli import main


def write(path, obj):
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


LINEAR = {"p": [{"i": 1, "j": 0, "c": [1, 0]}], "q": [{"i": 0, "j": 1, "c": [0.3, 0.7]}],
          "lines": [{"point": [[0, 0], [1, 0]], "direction": [[1, 0], [1, 0]]}]}


class TestAnalyze:
    def test_linear(self, tmp_path):
        assert main(["analyze", write(tmp_path / "f.json", LINEAR), "--out", str(tmp_path / "o")]) == 0
        rep = json.loads((tmp_path / "o" / "analyze.json").read_text())
        assert len(rep["affine_singular_points"]) == 1 and len(rep["infinity_points"]) == 2
        assert rep["tangencies"][0]["affine"] == 1

    def test_malformed(self, tmp_path, capsys):
        assert main(["analyze", write(tmp_path / "f.json", "{not json"), "--out", str(tmp_path)]) == 1
        assert main(["analyze", write(tmp_path / "g.json", {"p": [{"i": 1}], "q": []})]) == 1
        assert "$.p[0]" in capsys.readouterr().err

    def test_dicritical(self, tmp_path, capsys):
        f = {"p": [{"i": 1, "j": 0, "c": [1, 0]}], "q": [{"i": 0, "j": 1, "c": [1, 0]}]}
        assert main(["analyze", write(tmp_path / "f.json", f), "--out", str(tmp_path)]) == 2
        assert "NotInvariantLine" in capsys.readouterr().err


class TestCycles:
    def test_affine_demo(self, tmp_path):
        out = tmp_path / "o"
        assert main(["cycles", "--preset", "affine-demo", "--count", "10", "--out", str(out)]) == 0
        doc = json.loads((out / "cycles.json").read_text())
        cert = json.loads((out / "certificate.json").read_text())
        assert len(doc["cycles"]) == 10 and cert["verdict"] == "certified"
        assert cert["method"] == "multiplier" and cert["disjointness"]["verdict"] == "certified"

    def test_deterministic(self, tmp_path):
        for d in ("a", "b"):
            main(["cycles", "--preset", "moebius-demo", "--count", "3", "--out", str(tmp_path / d)])
        for name in ("cycles.json", "certificate.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_real_lambda(self, tmp_path, capsys):
        inp = {"lambda": [2, 0], "germ": {"kind": "affine", "a": [0.5, 0], "b": [0.2, 0]}}
        assert main(["cycles", write(tmp_path / "in.json", inp), "--out", str(tmp_path)]) == 2
        assert "NotComplexHyperbolic" in capsys.readouterr().err

    def test_zero_count(self, tmp_path):
        assert main(["cycles", "--preset", "affine-demo", "--count", "0", "--out", str(tmp_path)]) == 1

    def test_file_input_and_stage(self, tmp_path, capsys):
        inp = {"lambda": [0, -1], "germ": {"kind": "affine", "a": [0.5, 0], "b": [0.2, 0]}}
        assert main(["cycles", write(tmp_path / "in.json", inp), "--count", "2", "--out", str(tmp_path)]) == 0
        inp["germ"] = {"kind": "affine", "a": [0, 0], "b": [1, 0]}
        assert main(["cycles", write(tmp_path / "v.json", inp), "--out", str(tmp_path)]) == 2
        assert "[shrink_section]" in capsys.readouterr().err

    def test_csv_table(self, tmp_path):
        main(["cycles", "--preset", "affine-demo", "--count", "2", "--format", "csv", "--out", str(tmp_path)])
        assert (tmp_path / "cycles.csv").read_text().startswith("n,re_p")


class TestCertifyAndPlot:
    @pytest.fixture
    def cycles_file(self, tmp_path):
        main(["cycles", "--preset", "affine-demo", "--count", "10", "--out", str(tmp_path)])
        return tmp_path / "cycles.json"

    def test_multiplier(self, cycles_file, tmp_path):
        assert main(["certify", str(cycles_file), "--out", str(tmp_path / "c")]) == 0

    def test_integral(self, cycles_file, tmp_path):
        code = main(["certify", str(cycles_file), "--method", "integral", "--out", str(tmp_path / "c")])
        cert = json.loads((tmp_path / "c" / "certificate.json").read_text())
        assert cert["method"] == "integral" and len(cert["integrals"]) == 10
        assert code == (0 if cert["verdict"] == "certified" else 3)

    def test_plotdata(self, cycles_file, tmp_path):
        out = tmp_path / "plots"
        assert main(["plotdata", str(cycles_file), "--out", str(out)]) == 0
        files = sorted(out.glob("*.csv"))
        assert len(files) == 10
        doc = json.loads(cycles_file.read_text())
        rows = files[0].read_text().splitlines()[1:]
        first = [float(v) for v in rows[0].split(",")]
        c = next(c for c in doc["cycles"] if f"cycle_{c['n']}.csv" == files[0].name)
        assert first == [c["t"][0], *c["curve"][0]]
        assert len(rows) == len(c["curve"])

    def test_plotdata_empty(self, tmp_path):
        assert main(["plotdata", write(tmp_path / "e.json", {"cycles": []}), "--out", str(tmp_path / "p")]) == 0
        assert list((tmp_path / "p").glob("*")) == []

    def test_plotdata_errors(self, tmp_path):
        assert main(["plotdata", str(tmp_path / "missing.json")]) == 1
        assert main(["plotdata", write(tmp_path / "bad.json", "[1,")]) == 1


class TestHolonomy:
    def test_linear_model(self, tmp_path):
        inp = {"model": {"lambda": [0, 1]}, "path": {"kind": "circle", "turns": 1}, "points": [[0.1, 0]]}
        assert main(["holonomy", write(tmp_path / "h.json", inp), "--out", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / "holonomy.json").read_text())
        assert abs(doc["lifts"][0]["end"][0] - 1.8674427317079888e-4) < 1e-13


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
