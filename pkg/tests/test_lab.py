import csv
import json
import os

import pytest
from hypothesis import given, strategies as st

from symgue.core import InvalidSpecError, SymmetryClass
from symgue.lab import (DEFAULT_THRESHOLDS, EXPERIMENTS, build_config, default_config, emit,
                        format_complex, parse_complex, run_experiment)
from symgue.lab.cli import main
from symgue.lab.config import parse_assignments
from symgue.lab.report import ExperimentReport, dumps, fmt_float

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


@pytest.mark.parametrize("text,z", [("2i", 2j), ("-1+3i", -1 + 3j), ("i", 1j), ("-i", -1j),
                                    ("0.5", 0.5), ("1.5-2.5i", 1.5 - 2.5j), ("3j", 3j)])
def test_parse_complex(text, z):
    assert parse_complex(text) == z


@given(st.complex_numbers(allow_nan=False, allow_infinity=False))
def test_complex_format_roundtrip(z):
    assert parse_complex(format_complex(z)) == z


def test_parse_complex_rejects_garbage():
    with pytest.raises(InvalidSpecError):
        parse_complex("two i")


def test_config_validation():
    with pytest.raises(InvalidSpecError, match="invalid-size"):
        default_config("ncm", sizes=(3,))
    with pytest.raises(InvalidSpecError):
        default_config("ncm", replicates=0)
    with pytest.raises(InvalidSpecError):
        default_config("correlator", probes=(1.0, 2j))
    with pytest.raises(InvalidSpecError):
        default_config("nope")
    with pytest.raises(InvalidSpecError):
        default_config("ncm", thresholds={"made_up": 1})


def test_config_file_and_flag_precedence(tmp_path):
    p = tmp_path / "c.conf"
    p.write_text("# comment\nexperiment = correlator\nclasses = 1, Quarter4\nsizes = 16\n"
                 "probes = 2i, -1+3i\nreplicates = 50\nseed = 0x10\ntol.correlator_rel = 0.3\n")
    cfg = build_config(config_path=p, replicates=60)
    assert cfg.experiment == "correlator"
    assert cfg.classes == (SymmetryClass.FLIP1, SymmetryClass.QUARTER4)
    assert cfg.probes == (2j, -1 + 3j) and cfg.seed == 16 and cfg.replicates == 60
    assert cfg.tol("correlator_rel") == 0.3 and cfg.tol("ks_max") == DEFAULT_THRESHOLDS["ks_max"]
    with pytest.raises(InvalidSpecError):
        parse_assignments(["colour = red"])


@pytest.mark.parametrize("name", EXPERIMENTS)
def test_example_configs_parse(name):
    cfg = build_config(config_path=os.path.join(ROOT, "configs", f"{name}.conf"))
    assert cfg.experiment == name
    assert cfg == default_config(name, output_dir=cfg.output_dir, threads=cfg.threads)


def test_json_numbers_and_timing_separation():
    rep = ExperimentReport("x", {"a": 1})
    rep.add_theory("t", 0.1, "derived-closed-form")
    rep.check("ok", True)
    rep.timing["wall_seconds"] = 1.5
    text = rep.to_json()
    assert "0.10000000000000001" in text
    doc = json.loads(text)
    assert list(doc) == ["experiment", "status", "config", "rng", "theory", "tables",
                         "comparisons", "criteria", "timing"]
    assert "timing" not in json.loads(rep.to_json(include_timing=False))
    with pytest.raises(ValueError):
        rep.add_theory("t", 1, "folklore")


def test_dumps_special_values():
    assert json.loads(dumps({"z": 1 + 2j, "n": float("nan"), "b": True})) == \
        {"z": {"re": 1.0, "im": 2.0}, "n": "nan", "b": True}
    assert fmt_float(1 / 3) == "0.33333333333333331"


def test_status_logic():
    rep = ExperimentReport("x", {})
    rep.check("cmp", False, asserted=False)
    assert rep.status == "pass" and rep.exit_code == 0
    rep.check("undecided", None)
    assert rep.status == "inconclusive" and rep.exit_code == 2
    rep.check("bad", False)
    assert rep.status == "fail" and rep.exit_code == 1


def test_degenerate_ncm():
    rep = run_experiment(default_config("ncm", sizes=(2,), replicates=1, threads=1))
    assert all(0 <= row[-1] <= 1 for row in rep.tables["ncm"].rows)
    assert rep.tables["winner"].rows[0][2] in ("case3", "blocklaw")


def test_emit_headers(tmp_path):
    cfg = default_config("ncm", sizes=(16,), replicates=3, threads=1)
    paths = emit(run_experiment(cfg), tmp_path)
    with open(tmp_path / "ncm_ncm.csv") as fh:
        assert next(csv.reader(fh)) == ["class", "size_2n", "replicates", "law", "ks_distance"]
    cfg = default_config("correlator", sizes=(8,), replicates=20, classes=("Plain",), threads=1)
    emit(run_experiment(cfg), tmp_path)
    with open(tmp_path / "correlator_correlator.csv") as fh:
        assert next(csv.reader(fh)) == ["class", "size_2n", "z1", "z2", "re_est", "im_est",
                                        "stderr", "re_theory", "im_theory", "provenance"]
    assert str(tmp_path / "ncm.json") in map(str, paths)


def test_emit_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError):
        emit(ExperimentReport("x", {}), blocker / "sub")


def test_reports_identical_up_to_timing():
    cfg1 = default_config("variance", sizes=(8, 16, 32), replicates=30, threads=1)
    cfg3 = default_config("variance", sizes=(8, 16, 32), replicates=30, threads=3)
    assert run_experiment(cfg1).to_json(False) == run_experiment(cfg3).to_json(False)


def test_every_theory_number_has_provenance():
    rep = run_experiment(default_config("correlator", sizes=(8,), replicates=20, threads=1))
    provs = {t["provenance"] for t in rep.theory} | {c["provenance"] for c in rep.comparisons}
    assert provs <= {"paper-printed", "derived-closed-form", "derived-oracle"}
    # the case-3 row is compared, never asserted
    assert all(not c.asserted for c in rep.criteria
               if "RowMirror3" in c.name and c.name.endswith("comparison"))


def test_identities_negative_control_and_quarter4():
    rep = run_experiment(default_config("identities", sizes=(8,), replicates=3, threads=1))
    rows = rep.tables["identities"].rows
    neg = [r for r in rows if r[2] == "negative_control"]
    assert neg and neg[0][3] == "expected-fail" and neg[0][4] > 1e-6
    assert not [r for r in rows if r[0] == "Quarter4" and r[2] == "resolvent_symmetry"]
    assert rep.status == "pass"


def test_adjudicate_requires_rowmirror():
    with pytest.raises(InvalidSpecError):
        run_experiment(default_config("adjudicate3", classes=("Plain",)))


def test_adjudicate_small_run_is_inconclusive():
    rep = run_experiment(default_config("adjudicate3", sizes=(32,), replicates=20, threads=1))
    assert rep.status == "inconclusive"
    assert {r[5] for r in rep.tables["adjudication"].rows} == {
        "case3-equation", "blocklaw", "solved", "printed", "printed-edge", "block-edge"}


def test_bench_rejects_small_sizes():
    with pytest.raises(InvalidSpecError):
        run_experiment(default_config("bench", sizes=(64,)))


def test_cli_law_and_sample(tmp_path, capsys):
    assert main(["law", "semicircle", "--grid=-1:1:3"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "lambda,density,cdf,re_stieltjes,im_stieltjes" and len(out) == 4
    target = tmp_path / "w.json"
    assert main(["sample", "--class", "Central2", "--n", "2", "--out", str(target)]) == 0
    doc = json.loads(target.read_text())
    assert len(doc["re"]) == 4 and doc["class"] == "Central2"
    assert main(["spectrum", "--class", "3", "--n", "2", "--method", "householder"]) == 0


def test_cli_experiment_exit_codes(tmp_path):
    out = str(tmp_path / "r")
    assert main(["verify", "--sizes", "8", "--replicates", "2", "--threads", "1",
                 "--out", out]) == 0
    assert os.path.exists(os.path.join(out, "identities.json"))
    assert main(["experiment", "adjudicate3", "--sizes", "16", "--replicates", "10",
                 "--out", out, "--threads", "1"]) == 2
    assert main(["experiment", "ncm", "--sizes", "8", "--replicates", "2", "--out", out,
                 "--set", "tol.ks_max=1e-9", "--threads", "1"]) == 1
    assert main(["experiment", "ncm", "--sizes", "7", "--out", out]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["experiment", "nonsense"])
    assert exc.value.code == 1
