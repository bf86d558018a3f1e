import json
import math

import pytest

from inhomog import __version__
from inhomog.cli import build_parser, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_dim_sierpinski_report(capsys):
    code, out, _ = run(capsys, "dim", "sierpinski", "--k", "4..8")
    rep = json.loads(out)
    assert code == 0
    assert rep["oracle"] == pytest.approx(math.log(3) / math.log(2))
    assert rep["gap"] == pytest.approx(abs(rep["slope"] - rep["oracle"]))
    assert rep["provenance"]["version"] == __version__
    assert len(rep["counts"]) == 5 and len(rep["per_step"]) == 4


def test_dim_comb_oracle(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["dim", "comb:3", "--k", "4..12", "-o", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["oracle"] == pytest.approx(1.36907, abs=1e-5)
    assert rep["gap"] < 0.07


def test_dim_bernoulli_oracle(capsys):
    code, out, _ = run(capsys, "dim", "bernoulli:sqrt2", "--k", "6..10")
    assert json.loads(out)["oracle"] == pytest.approx(1.5)


def test_dim_csv(capsys):
    code, out, _ = run(capsys, "dim", "sierpinski", "--k", "2..4", "--format", "csv")
    lines = out.strip().split("\n")
    assert lines[0] == "delta,count,method"
    assert lines[1] == "0.25,12,exact-mesh"


def test_dim_errors(capsys):
    code, _, err = run(capsys, "dim", "nothing")
    assert code == 2 and "unknown construction" in err
    with pytest.raises(SystemExit):
        build_parser().parse_args(["dim", "sierpinski", "--k", "5..3"])
    with pytest.raises(SystemExit):
        build_parser().parse_args(["dim", "sierpinski", "--k", "1..30"])


def test_verify_exit_codes(capsys):
    code, out, _ = run(capsys, "verify", "garsia")
    assert code == 0
    assert "XFAIL" in out
    code, out, _ = run(capsys, "verify", "moran")
    assert code == 1
    assert "FAIL" in out


def test_render_and_generate(tmp_path, capsys):
    svg = tmp_path / "comb.svg"
    assert main(["render", "comb:3", "--depth", "3", "-o", str(svg)]) == 0
    assert svg.read_text().count("<line ") == 1 + 3 + 9 + 27
    png = tmp_path / "k.png"
    assert main(["render", "kleinian-ce:20:10", "-o", str(png)]) == 0
    assert png.stat().st_size > 0
    code, out, _ = run(capsys, "generate", "comb:2", "--depth", "2")
    assert out.split("\n")[0] == "word,kind,x0,y0,x1,y1,lip"
    assert len(out.strip().split("\n")) == 1 + 7
    code, out, _ = run(capsys, "generate", "kleinian-ce:2:2", "--format", "json")
    assert len(json.loads(out)) == 10


def test_poincare(capsys):
    code, out, _ = run(capsys, "poincare", "--alpha", "2", "--depth", "200", "--series-depth", "20")
    rep = json.loads(out)
    assert rep["series"]["1.0"] == pytest.approx(1 + 2 * (1 - 2.0 ** -20))
    assert rep["exponent"]["exponent"] <= 0.05


def test_poincare_free_group_uses_shallow_default_depth(capsys):
    assert main(["poincare", "--free", "4"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["depth"] == 8
    assert 0 < report["exponent"]["exponent"] <= 1
