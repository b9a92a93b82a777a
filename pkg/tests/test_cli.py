import json

import pytest

from conftest import EXAMPLE_PERM, EXAMPLE_SEED, EXAMPLE_WORD
from shelf_lab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sample_reproduces_worked_example(capsys):
    code, out, _ = run(capsys, "sample", "--n", "12", "--m", "2", "--seed", str(EXAMPLE_SEED))
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == "1"
    assert doc["samples"] == [{"word": list(EXAMPLE_WORD), "permutation": list(EXAMPLE_PERM)}]


def test_sample_csv(capsys):
    code, out, _ = run(capsys, "sample", "--n", "12", "--m", "2", "--seed", str(EXAMPLE_SEED), "--format", "csv")
    assert out.splitlines() == ["word,permutation", "2 1 3 2 2 4 4 1 2 1 3 3,2 8 10 9 5 4 1 3 11 12 7 6"]


def test_sample_zero_count(capsys):
    code, out, _ = run(capsys, "sample", "--n", "5", "--m", "1", "--samples", "0", "--format", "csv")
    assert (code, out) == (0, "")
    code, out, _ = run(capsys, "sample", "--n", "5", "--m", "1", "--samples", "0")
    assert json.loads(out)["samples"] == []


@pytest.mark.parametrize("argv", [["--m", "0"], ["--n", "0", "--m", "1"], ["--m", "x"]])
def test_usage_errors(capsys, argv):
    if "--n" not in argv:
        argv = ["--n", "4", *argv]
    with pytest.raises(SystemExit) as info:
        main(["sample", *argv])
    assert info.value.code == 2


def test_simulate_requires_samples(capsys):
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--n", "4", "--m", "1", "--samples", "0"])
    assert info.value.code == 2


def test_oracle_two_cards(capsys):
    code, out, _ = run(capsys, "oracle", "--n", "2", "--m", "1")
    doc = json.loads(out)
    assert code == 0
    assert doc["counts"] == {"0": "2", "1": "2"}
    assert (doc["mean"], doc["variance"]) == ("1/2", "1/4")


def test_oracle_three_cards_text(capsys):
    code, out, _ = run(capsys, "oracle", "--n", "3", "--m", "1", "--format", "text")
    assert out.splitlines()[-1] == "total 8  mean 3/2  variance 5/4"


def test_oracle_budget_refusal(capsys):
    code, out, err = run(capsys, "oracle", "--n", "20", "--m", "5")
    assert code == 3
    assert out == ""
    assert "budget" in err


def test_oracle_bias_masses(capsys, tmp_path):
    path = tmp_path / "bias.json"
    path.write_text('["1/3", "2/3"]')
    code, out, _ = run(capsys, "oracle", "--n", "2", "--m", "1", "--bias", str(path), "--statistic", "even_cards")
    doc = json.loads(out)
    assert doc["masses"] == {"0": "1/9", "1": "4/9", "2": "4/9"}


@pytest.mark.parametrize(
    "content,needle",
    [
        ('["1/2"]', "expected 2m = 2"),
        ('["1/2", 0.5]', "entry 2"),
        ('["1/2", "x"]', "entry 2 ('x')"),
        ('["-1/2", "3/2"]', "entry 1"),
        ('["1/2", "1/3"]', "sum to 5/6"),
        ("{", "cannot read"),
    ],
)
def test_bias_diagnostics(capsys, tmp_path, content, needle):
    path = tmp_path / "bias.json"
    path.write_text(content)
    with pytest.raises(SystemExit) as info:
        main(["sample", "--n", "3", "--m", "1", "--bias", str(path)])
    assert info.value.code == 2
    assert needle in capsys.readouterr().err


def test_audit_reports_findings(capsys):
    code, out, _ = run(capsys, "audit", "--n", "2", "3", "--m", "1", "--format", "json")
    assert code == 0
    rows = json.loads(out)["rows"]
    printed = [r for r in rows if (r["n"], r["formula"]) == (2, "var_total_printed")][0]
    assert (printed["oracle"], printed["formula_value"], printed["status"]) == ("1/4", "1/2", "FINDING")
    unimodal = [r for r in rows if (r["n"], r["formula"]) == (3, "unimodal_variance_claimed")][0]
    assert (unimodal["oracle"], unimodal["formula_value"]) == ("5/4", "2/1")


def test_audit_strict_exit(capsys):
    code, _, _ = run(capsys, "audit", "--n", "2", "--m", "1", "--strict")
    assert code == 4


def test_audit_skips_refusals(capsys):
    code, out, err = run(capsys, "audit", "--n", "2", "40", "--m", "1", "--format", "json")
    assert code == 0
    assert json.loads(out)["skipped"][0]["n"] == 40
    assert "skipped" in err


def test_simulate_text_and_json(capsys):
    code, out, _ = run(capsys, "simulate", "--n", "30", "--m", "2", "--samples", "2000", "--format", "text")
    assert "empirical d_K" in out
    code, out, _ = run(capsys, "simulate", "--n", "30", "--m", "2", "--samples", "2000", "--statistic", "descents")
    doc = json.loads(out)
    assert set(doc["limit_variance_residuals"]) == {"coupling_limit", "claimed_limit"}


def test_simulate_byte_identical(capsys, tmp_path):
    outs = []
    for threads in ("1", "3"):
        path = tmp_path / f"r{threads}.json"
        main(["simulate", "--n", "20", "--m", "3", "--samples", "5000", "--chunk-size", "700",
              "--threads", threads, "--seed", "11", "--out", str(path)])
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_clt_rows(capsys):
    code, out, _ = run(capsys, "clt", "--n", "5", "10", "20", "--m", "2", "--samples", "3000")
    lines = out.splitlines()
    assert lines[0] == "n,empirical_kd,bound,bound_kind"
    assert [line.split(",")[0] for line in lines[1:]] == ["5", "10", "20"]
    for line in lines[1:]:
        _, kd, bound, kind = line.split(",")
        assert kind == "kd_bound" and float(kd) <= float(bound)


@pytest.mark.parametrize(
    "argv,first",
    [
        (["mean_inversions", "--n", "12"], "33/1"),
        (["zeta1_sq", "--m", "1"], "1/12"),
        (["kd_bound_constant"], "20594.74264068712"),
    ],
)
def test_formulas(capsys, argv, first):
    code, out, _ = run(capsys, "formulas", *argv)
    assert code == 0
    assert out.splitlines()[0] == first


def test_formulas_listing_and_unknown(capsys):
    code, out, _ = run(capsys, "formulas")
    assert "zeta1_sq" in out
    with pytest.raises(SystemExit) as info:
        main(["formulas", "nope"])
    assert info.value.code == 2


def test_formulas_missing_parameter(capsys):
    with pytest.raises(SystemExit) as info:
        main(["formulas", "mean_inversions"])
    assert info.value.code == 2
