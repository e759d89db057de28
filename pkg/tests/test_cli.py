import csv
import io
import json

import pytest

from contracta.cli import main
from contracta.report import format_real, render, to_json


def write(tmp_path, text, name="run.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run_cli(tmp_path, command, text, *extra):
    cfg = write(tmp_path, text)
    out = tmp_path / "out.txt"
    code = main([command, "--config", cfg, "--out", str(out), *extra])
    return code, (out.read_text() if out.exists() else None)


def test_iterate_banach(tmp_path):
    code, text = run_cli(tmp_path, "iterate", "instance: banach_half\n")
    doc = json.loads(text)
    assert code == 0 and doc["schema_version"] == 1
    assert doc["fixed_point"]["status"] == "converged"
    assert doc["fixed_point"]["residual"] <= 1e-9


def test_classify_piecewise(tmp_path):
    code, text = run_cli(tmp_path, "classify", "instance: piecewise_leader\n")
    doc = json.loads(text)
    assert code == 0
    assert doc["classes"]["nonexpansive"]["status"] == "falsified"
    leader = doc["classes"]["leader"]
    assert leader["status"] == "certified_on_samples"
    cert = next(c for c in leader["certificates"] if c["epsilon"] == 0.1)
    assert (cert["r"], cert["delta"]) == (3, 1.25)
    assert '"epsilon": 0.10000000000000001' in text  # 17 significant digits


def test_probe_csv_columns(tmp_path):
    code, text = run_cli(tmp_path, "probe", "instance: banach_half\n", "--format", "csv")
    rows = list(csv.reader(io.StringIO(text)))
    assert code == 0
    assert rows[0][:3] == ["p", "sigma_p", "theta_p"]
    assert "sigma_p_monotone" in rows[0] and "theta_p_monotone" in rows[0]
    assert len(rows) == 32


def test_axioms_and_corpus_csv(tmp_path, capsys):
    code, text = run_cli(tmp_path, "axioms", "instance: square_b\nsampler.count: 41\n", "--format", "csv")
    assert code == 0 and text.splitlines()[0] == "check,status,value,witness"
    assert main(["corpus", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "name,domain,distance,map,s_claimed" and len(out.splitlines()) == 6


def test_iterate_csv(tmp_path):
    code, text = run_cli(tmp_path, "iterate", "instance: banach_half\norbit.length: 3\n", "--format", "csv")
    assert text.splitlines() == ["n,x,step_dist", "0,1,", "1,0.5,0.5", "2,0.25,0.25", "3,0.125,0.125"]


def test_byte_identical_reports(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    cfg = write(tmp_path, "instance: piecewise_leader\nsampler: {strategy: random, seed: 42, count: 101}\n")
    assert main(["classify", "--config", cfg, "--out", str(a)]) == 0
    assert main(["classify", "--config", cfg, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_seed_environment_override(tmp_path, monkeypatch):
    text = "instance: banach_half\nsampler: {strategy: random, seed: 1, count: 5}\n"
    monkeypatch.setenv("CONTRACTA_SEED", "9")
    _, out = run_cli(tmp_path, "axioms", text)
    assert json.loads(out)["sampler"]["seed"] == 9
    monkeypatch.setenv("CONTRACTA_SEED", "nine")
    assert run_cli(tmp_path, "axioms", text)[0] == 2


def test_harmonic_uses_instance_sampler(tmp_path):
    _, out = run_cli(tmp_path, "classify", "instance: harmonic_shift_low\n")
    doc = json.loads(out)
    assert doc["sampler"]["strategy"] == "random" and doc["sampler"]["seed"] == 42
    assert doc["classes"]["leader"]["status"] == "inconclusive"
    assert doc["orbit"]["status"] == "diverging"


def test_expected_certification_failure_exits_1(tmp_path):
    code, text = run_cli(tmp_path, "classify", "instance: banach_half\nchecker.phi: t\n")
    doc = json.loads(text)
    assert code == 1
    assert doc["expected"]["matkowski"]["match"] is False


def test_config_error_exits_2(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "iterate", "instance: banach_half\ntolerances:\n  tau_eq: -1\n")
    assert code == 2
    assert "tolerances.tau_eq" in capsys.readouterr().err


def test_usage_errors_exit_2(tmp_path):
    assert main(["iterate"]) == 2
    assert main(["launch"]) == 2
    assert main(["iterate", "--config", str(tmp_path / "missing.yaml")]) == 2
    assert run_cli(tmp_path, "iterate", "instance: nope\n")[0] == 2


def test_evaluation_error_exits_3(tmp_path, capsys):
    doc = "domain: {kind: interval, lo: 0, hi: 1}\ndistance: abs\nmap: 1/(x - 0.5)\n"
    assert run_cli(tmp_path, "iterate", doc)[0] == 3
    assert "x - 0.5" in capsys.readouterr().err


def test_unwritable_output_exits_3(tmp_path):
    cfg = write(tmp_path, "instance: banach_half\n")
    assert main(["iterate", "--config", cfg, "--out", str(tmp_path / "no" / "such" / "dir.json")]) == 3


def test_inline_config_runs(tmp_path):
    doc = ('domain: {kind: interval, lo: 0, hi: 0.75}\ndistance: "abs(x - y)"\n'
           'map: "piecewise(x <= 1/2 : x/3 ; x/3 + 1/4)"\nx0: 0.75\n')
    code, text = run_cli(tmp_path, "iterate", doc)
    assert code == 0 and json.loads(text)["fixed_point"]["iterations"] == 20


def test_format_real():
    assert format_real(0.1) == "0.10000000000000001"
    assert float(format_real(1 / 3)) == 1 / 3


def test_json_rendering_is_stable():
    result = {"command": "x", "b": [1.5, None, True], "a": {"nan": float("nan")}}
    assert to_json(result) == '{\n  "command": "x",\n  "b": [1.5, null, true],\n  "a": {\n    "nan": null\n  }\n}\n'
    with pytest.raises(Exception):
        render(result, "xml")
