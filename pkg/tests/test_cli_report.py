import json
from fractions import Fraction

import pytest

from sievekit.cli import RunConfig, main, parse_exact, run
from sievekit.errors import DomainError
from sievekit.kuhn import COMPUTED_N, theorem_pipeline
from sievekit.report import emit_report, exit_status, parse_report, to_document
from sievekit.verifier import verify_interval


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def strip_runtime(text):
    doc = json.loads(text)
    doc.pop("runtime_seconds")
    return json.dumps(doc, sort_keys=True)


@pytest.mark.parametrize(
    "text, value",
    [
        ("1.98e28+1", COMPUTED_N + 1),
        ("10**30", 10**30),
        ("10^30", 10**30),
        ("198*10**26", COMPUTED_N),
        ("4e9", 4 * 10**9),
        ("0.07", Fraction(7, 100)),
        ("-(3)", -3),
        ("1e5 - 1", 99999),
    ],
)
def test_parse_exact(text, value):
    assert parse_exact(text) == value


@pytest.mark.parametrize("text", ["abc", "1e", "__import__('os')", "2**(1/2)", "1/0", ""])
def test_parse_exact_rejects(text):
    with pytest.raises(ValueError):
        parse_exact(text)


def test_theorem_command(capsys):
    code, out, _ = invoke(capsys, "theorem", "--N", "1.98e28+1", "--s", "3.3", "--alpha", "0.07")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert doc["inputs"]["N"] == COMPUTED_N + 1
    assert doc["results"]["r4_lower"] > 0
    entry = next(e for e in doc["constants_ledger"] if e["name"] == "4.526")
    assert entry["computed"] == pytest.approx(4.5255, abs=1e-4)
    assert entry["ok"] is True and entry["direction"] == "upper"
    assert doc["counterexamples"] == []


def test_verify_interval_command(capsys):
    code, out, _ = invoke(capsys, "verify-interval", "--n-min", "1", "--n-max", "100", "--k", "4")
    doc = json.loads(out)
    assert code == 0
    assert doc["results"]["witness_count"] == 100
    assert len(doc["results"]["witnesses"]) == 100


def test_repeated_flag_is_usage_error(capsys):
    code, _, err = invoke(capsys, "verify-mertens", "--limit", "100", "--limit", "0")
    assert code == 2
    assert "usage" in err and "more than once" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["theorem"],
        ["theorem", "--N", "abc"],
        ["verify-interval", "--n-min", "1", "--n-max", "10", "--k", "0"],
        ["verify-interval", "--n-min", "1", "--n-max", "10", "--k", "2", "--checkpoint", "x"],
        ["verify-mertens", "--limit", "1e3", "--format", "xml"],
        ["frobnicate"],
        ["theorem", "--N", "10**20"],
        ["verify-mertens", "--limit", "2"],
        ["theorem", "--N", "1.98e28+1", "--alpha", "0.2"],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = invoke(capsys, *argv)
    assert code == 2
    assert "usage" in err


def test_failing_scan_exits_one(capsys):
    code, out, _ = invoke(capsys, "verify-4p", "--n-min", "1", "--n-max", "3")
    doc = json.loads(out)
    assert code == 1 == exit_status(doc)
    assert doc["counterexamples"] == [1, 2]


def test_out_and_formats(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code, stdout, _ = invoke(capsys, "verify-4p", "--n-min", "4", "--n-max", "50", "--format", "csv", "--out", str(out))
    assert code == 0 and stdout == ""
    doc = parse_report(out.read_text(), "csv")
    assert doc["passed"] is True and doc["command"] == "verify-4p"
    code, text, _ = invoke(capsys, "verify-4p", "--n-min", "4", "--n-max", "50", "--format", "text")
    assert text.startswith("verify-4p: PASS")


def test_json_csv_round_trip():
    doc = to_document(theorem_pipeline(COMPUTED_N + 1), "theorem", {"N": COMPUTED_N + 1})
    from_json = parse_report(emit_report(doc, "json"))
    from_csv = parse_report(emit_report(doc, "csv"), "csv")
    assert from_json == doc == from_csv
    # floats survive at full precision
    assert from_json["results"]["r4_lower"] == theorem_pipeline(COMPUTED_N + 1).r4_lower


def test_round_trip_with_nested_lists():
    doc = to_document(verify_interval(1, 30, 2), "verify-interval")
    assert parse_report(emit_report(doc, "csv"), "csv") == doc
    assert doc["counterexamples"] == []


def test_emit_report_unknown_inputs():
    with pytest.raises(TypeError):
        to_document(object(), "theorem")
    with pytest.raises(ValueError):
        emit_report({"passed": True}, "xml")


def test_scan_epsilon_report(capsys):
    code, out, _ = invoke(capsys, "scan-epsilon")
    doc = json.loads(out)
    assert code == 0
    comp, prime = doc["results"]["scans"]
    assert comp["argmax"] == [3298, 3947]
    assert prime["argmax"] == [1423, 3947]


def test_reports_identical_across_worker_counts(capsys, monkeypatch):
    argv = ["verify-interval", "--n-min", "1", "--n-max", "20000", "--k", "3"]
    _, one, _ = invoke(capsys, *argv, "--workers", "1")
    monkeypatch.setenv("SIEVEKIT_WORKERS", "3")
    _, three, _ = invoke(capsys, *argv, "--workers", "1")
    assert strip_runtime(one) == strip_runtime(three)


def test_env_overrides_worker_count(monkeypatch):
    import argparse

    monkeypatch.setenv("SIEVEKIT_WORKERS", "5")
    ns = argparse.Namespace(command="verify-4p", format="json", out=None, workers=1, n_min=4, n_max=9)
    assert RunConfig.from_args(ns).worker_count == 5


def test_run_config_validation():
    with pytest.raises(DomainError):
        RunConfig("theorem", worker_count=0)
    with pytest.raises(DomainError):
        RunConfig("theorem", checkpoint_path="x")
    status, text = run(RunConfig("verify-4p", {"n_min": 4, "n_max": 10}))
    assert status == 0 and json.loads(text)["passed"]


def test_other_commands(capsys):
    code, out, _ = invoke(capsys, "lower-bound", "--N", "10**30")
    assert code == 0 and json.loads(out)["results"]["value"] > 0
    code, out, _ = invoke(capsys, "scan-params", "--N", "1.98e28+1", "--s-min", "3.2", "--s-max", "3.4", "--s-step", "0.1",
                          "--alpha-min", "0.06", "--alpha-max", "0.08", "--alpha-step", "0.01")
    doc = json.loads(out)
    assert code == 0 and len(doc["results"]["surface"]) == 9
    code, out, _ = invoke(capsys, "verify-mertens", "--limit", "10**5")
    assert code == 0 and json.loads(out)["results"]["checked_count"] == 9592


def test_checkpointed_cli_run(tmp_path, capsys):
    ck = tmp_path / "c.ckpt"
    argv = ["verify-mertens", "--limit", "10**6", "--segment-width", "10**5", "--checkpoint", str(ck)]
    code, first, _ = invoke(capsys, *argv)
    assert code == 0 and ck.exists()
    code, second, _ = invoke(capsys, *argv)
    a, b = json.loads(first), json.loads(second)
    assert b["results"]["details"]["resumed_segments"] == 10
    assert a["results"]["checked_count"] == b["results"]["checked_count"]
