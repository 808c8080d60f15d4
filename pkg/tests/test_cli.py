import csv
import io
import json

import pytest

from wmsets.cli import MIXING_COLUMNS, VDC_COLUMNS, WEYL_COLUMNS, main
from wmsets.counting import ASYMPTOTIC_COLUMNS, CENSUS_COLUMNS
from wmsets.integer_sets import IntegerSet, gen_bernoulli


def run(capsys, *argv):
    rc = main(["-q", *argv])
    out = capsys.readouterr()
    return rc, out.out, out.err


def csv_rows(text, columns):
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == columns
    assert all(len(r) == len(columns) for r in rows[1:])
    return [dict(zip(columns, r)) for r in rows[1:]]


def chi_less(a: dict, b: dict) -> bool:
    ta, tb = max(map(int, a)), max(map(int, b))
    if ta != tb:
        return ta < tb
    for d in range(ta, 0, -1):
        x, y = a.get(str(d), 0), b.get(str(d), 0)
        if x != y:
            return x < y
    return False


def edges(node):
    for child in node.get("children", {}).values():
        yield node, child
        yield from edges(child)


# --- admissibility and reduction trees -------------------------------------------------


def test_check_admissible_uniform_holds(capsys):
    rc, out, _ = run(capsys, "check-admissible", "--family", "(x^3),((N-x)^3)", "--mode", "uniform")
    assert rc == 0
    doc = json.loads(out)
    assert doc["verdict"] == "holds"
    assert doc["literal"]["verdict"] == "fails"


def test_check_admissible_squares_fail(capsys):
    rc, out, _ = run(capsys, "check-admissible", "--family", "x^2, (N-x)^2")
    assert rc == 0
    assert json.loads(out)["witness"]["coefficient"] == "2*N"


def test_check_admissible_modes(capsys):
    rc, out, _ = run(capsys, "check-admissible", "--family", "x^2, x^2+5", "--mode", "sequence")
    assert rc == 0 and json.loads(out)["verdict"] == "fails"
    rc, out, _ = run(capsys, "check-admissible", "--family", "x^3, (N-x)^3", "--mode", "family")
    assert rc == 0 and json.loads(out)["verdict"] == "holds"


def test_pet_trace_quadratic(capsys):
    rc, out, _ = run(capsys, "pet-trace", "--family", "x^2", "--h", "1,2,3")
    assert rc == 0
    doc = json.loads(out)
    assert doc["depth"] == 2
    assert set(doc["root"]["children"]) == {"1", "2", "3"}


def test_pet_trace_cubic_quadratic_fixed_sample_runs_out(capsys):
    rc, _, err = run(capsys, "pet-trace", "--family", "x^3,x^2", "--h", "1,2,3")
    assert rc == 1
    assert "ExceptionalOnlyError" in err


def test_pet_trace_cubic_quadratic_truncated_tree_decreases(capsys):
    rc, out, err = run(capsys, "pet-trace", "--family", "x^3,x^2", "--h", "1,2,3", "--widen", "--truncate")
    # the tree is emitted, but truncated leaves are a consistency failure
    assert rc == 2 and "truncated leaf" in err
    doc = json.loads(out)
    pairs = list(edges(doc["root"]))
    assert pairs
    assert all(chi_less(c["chi"], p["chi"]) for p, c in pairs)


def test_pet_trace_depth_exceeded_exit_2(capsys):
    rc, out, err = run(capsys, "pet-trace", "--family", "x^3,x", "--h", "1", "--max-branch", "1", "--widen")
    assert rc == 2 and "DepthExceededError" in err and out == ""
    rc, out, _ = run(capsys, "pet-trace", "--family", "x^3,x", "--h", "1", "--max-branch", "1", "--widen", "--max-depth", "14")
    assert rc == 0 and json.loads(out)["depth"] == 14


def test_pet_trace_negative_sample(capsys):
    rc, out, _ = run(capsys, "pet-trace", "--family", "x^2", "--h", "-2..2")
    assert rc == 0
    assert set(json.loads(out)["root"]["children"]) == {"-2", "-1", "1", "2"}


def test_verify_pet(capsys):
    rc, out, _ = run(capsys, "verify-pet", "--family", "x^2, x^3", "--h-range", "-3,3")
    assert rc == 0
    doc = json.loads(out)
    assert isinstance(doc, dict) and doc


def test_pet_trace_rejects_n(capsys):
    assert run(capsys, "pet-trace", "--family", "x^2 + N", "--h", "1")[0] == 1


# --- set generation -------------------------------------------------------------------


def test_gen_set_twice_identical(capsys, tmp_path):
    a, b = tmp_path / "a.wmset", tmp_path / "b.wmset"
    for path in (a, b):
        rc, _, _ = run(capsys, "gen-set", "--kind", "bernoulli", "--p", "1/2", "--horizon", "1000000",
                       "--seed", "42", "--out", str(path))
        assert rc == 0
    assert a.read_bytes() == b.read_bytes()
    assert IntegerSet.load(a) == gen_bernoulli("1/2", 10**6, 42)


def test_gen_set_descriptor_matches_flags(capsys, tmp_path):
    run(capsys, "gen-set", "--set", "periodic:modulus=4,residues=1+2,horizon=50", "--out", str(tmp_path / "a"))
    run(capsys, "gen-set", "--kind", "periodic", "--modulus", "4", "--residues", "1,2", "--horizon", "50",
        "--out", str(tmp_path / "b"))
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_gen_set_requires_out(capsys):
    rc, _, err = run(capsys, "gen-set", "--set", "full:horizon=5")
    assert rc == 1 and "--out" in err


# --- counting -----------------------------------------------------------------------------


def test_count_patterns_full_set(capsys):
    rc, out, _ = run(capsys, "count-patterns", "--family", "x^3,(N-x)^3", "--A", "full:horizon=2000", "--N", "10", "--M", "10")
    assert rc == 0
    (row,) = csv_rows(out, ASYMPTOTIC_COLUMNS)
    assert row["count"] == "100" and row["deviation"] == "0"


def test_verify_asymptotic_rows(capsys):
    rc, out, _ = run(capsys, "verify-asymptotic", "--family", "x", "--A", "evens:horizon=3000",
                     "--N", "25,50,100", "--M", "1000")
    assert rc == 0
    rows = csv_rows(out, ASYMPTOTIC_COLUMNS)
    assert [r["N"] for r in rows] == ["25", "50", "100"]


def test_count_patterns_horizon_error(capsys):
    rc, _, err = run(capsys, "count-patterns", "--family", "x^3", "--A", "full:horizon=100", "--N", "10", "--M", "10")
    assert rc == 1
    assert "HorizonError" in err and "exceeds horizon(A)" in err


def test_set_file_input(capsys, tmp_path):
    path = tmp_path / "e.wmset"
    run(capsys, "gen-set", "--set", "evens:horizon=3000", "--out", str(path))
    rc1, out1, _ = run(capsys, "count-patterns", "--family", "x", "--A", str(path), "--N", "20", "--M", "30")
    rc2, out2, _ = run(capsys, "count-patterns", "--family", "x", "--A", "evens:horizon=3000", "--N", "20", "--M", "30")
    assert rc1 == rc2 == 0 and out1 == out2


def test_represent_census(capsys):
    rc, out, _ = run(capsys, "represent", "--A", "evens:horizon=1000", "--p", "x", "--N-range", "2,9", "--M-cap", "100")
    assert rc == 0
    rows = csv_rows(out, CENSUS_COLUMNS)
    assert [r["representable"] for r in rows] == ["false", "false", "true", "false", "true", "false", "true", "false"]
    assert rows[0]["n1"] == ""


# --- dynamics -----------------------------------------------------------------------------


def test_mixing_check_pair(capsys):
    rc, out, _ = run(capsys, "mixing-check", "--A", "evens:horizon=2000", "--N", "1000", "--lag-cap", "100",
                     "--U", "1", "--V", "1")
    assert rc == 0
    (row,) = csv_rows(out, MIXING_COLUMNS)
    assert float(row["W"]) == 0.25


def test_mixing_check_table(capsys):
    rc, out, _ = run(capsys, "mixing-check", "--A", "bernoulli:p=1/2,horizon=3000,seed=1", "--N", "2000",
                     "--lag-cap", "50", "--max-len", "2")
    assert rc == 0
    rows = csv_rows(out, MIXING_COLUMNS)
    assert len(rows) == 36
    assert rows[0]["U"] == "0" and rows[0]["V"] == "0"


def test_vdc_demo(capsys):
    rc, out, _ = run(capsys, "vdc-demo", "--q", "x^2", "--alpha", "sqrt(2)", "--N", "1000,2000", "--H", "10")
    assert rc == 0
    rows = csv_rows(out, VDC_COLUMNS)
    assert len(rows) == 2
    for r in rows:
        assert float(r["lhs_norm_sq"]) <= float(r["vdc_bound"]) + 10 / int(r["N"])


def test_weyl_check(capsys):
    rc, out, _ = run(capsys, "weyl-check", "--a", "t", "--alpha", "1/4", "--delta", "1/10", "--T", "1000")
    assert rc == 0
    (row,) = csv_rows(out, WEYL_COLUMNS)
    assert row["polynomial"] == "t" and row["fraction"] == "0.25" and row["target"] == "0.2"


# --- errors and configs ------------------------------------------------------------------


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        [],
        ["check-admissible", "--family", "x^+"],
        ["check-admissible", "--family", "x", "--mode", "other"],
        ["count-patterns", "--family", "x", "--A", "nope:horizon=3", "--N", "1", "--M", "1"],
        ["weyl-check", "--a", "t", "--alpha", "sqrt(2)", "--delta", "0.7", "--T", "10"],
        ["vdc-demo", "--q", "x", "--alpha", "1/3", "--N", "ten", "--H", "1"],
        ["represent", "--A", "full:horizon=10", "--p", "x^2", "--N-range", "2,5", "--M-cap", "5"],
    ],
)
def test_precondition_and_parse_errors_exit_1(capsys, argv):
    rc, out, _ = run(capsys, *argv)
    assert rc == 1 and out == ""


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "weyl-check", "a": "t^2", "alpha": "sqrt(2)", "delta": "1/10", "T": [100, 1000]}))
    rc, out, _ = run(capsys, "--config", str(cfg))
    assert rc == 0
    assert [r["T"] for r in csv_rows(out, WEYL_COLUMNS)] == ["100", "1000"]
    rc, out, _ = run(capsys, "--config", str(cfg), "weyl-check", "--T", "50")
    assert [r["T"] for r in csv_rows(out, WEYL_COLUMNS)] == ["50"]


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "vdc-demo", "q": "x", "beta": 1}))
    rc, _, err = run(capsys, "--config", str(cfg))
    assert rc == 1 and "beta" in err


def test_config_invalid_json(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("{")
    assert run(capsys, "--config", str(cfg))[0] == 1


DETERMINISM_RUNS = [
    ["check-admissible", "--family", "x^2 + N, x^2 + x + N^2"],
    ["pet-trace", "--family", "x^3 + x", "--h", "1,2", "--widen"],
    ["verify-pet", "--family", "x^2", "--h-range", "-2,2"],
    ["count-patterns", "--family", "x^2", "--A", "bernoulli:p=1/2,horizon=5000,seed=3", "--N", "20", "--M", "100"],
    ["verify-asymptotic", "--family", "x, 2*x", "--A", "normal:horizon=5000", "--N", "5,10", "--M", "100"],
    ["represent", "--A", "bernoulli:p=1/2,horizon=5000,seed=3", "--p", "x^2", "--N-range", "2,30", "--M-cap", "50"],
    ["mixing-check", "--A", "bernoulli:p=1/2,horizon=3000,seed=3", "--N", "1000", "--lag-cap", "20", "--max-len", "2"],
    ["vdc-demo", "--q", "x^3", "--alpha", "sqrt(3)", "--N", "500", "--H", "5"],
    ["weyl-check", "--a", "t^2", "--alpha", "sqrt(2)", "--delta", "1/10", "--T", "100,200"],
]


@pytest.mark.parametrize("argv", DETERMINISM_RUNS, ids=lambda a: a[0])
def test_double_run_byte_identical(capsys, tmp_path, argv):
    outs = []
    for k in range(2):
        path = tmp_path / f"out{k}"
        rc, _, _ = run(capsys, *argv, "--out", str(path))
        assert rc == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] and outs[0]


def test_progress_goes_to_stderr(capsys, tmp_path):
    rc = main(["vdc-demo", "--q", "x", "--alpha", "1/3", "--N", "30", "--H", "2", "--out", str(tmp_path / "v.csv")])
    out = capsys.readouterr()
    assert rc == 0 and out.out == "" and "wrote" in out.err
