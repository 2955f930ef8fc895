import json
import subprocess
import sys

import numpy as np
import pytest

from loccact import catalog
from loccact import io as fmt
from loccact.cli import main, render_ket
from loccact.measurements import apply_outcome
from loccact.tensor_core import OMEGA


def run(capsys, *argv, env=None):
    code = main(list(argv), env=env or {})
    out = capsys.readouterr()
    return code, out.out, out.err


def test_catalog_list(capsys):
    code, out, _ = run(capsys, "catalog", "list")
    assert code == 0
    assert [line.split()[0] for line in out.splitlines()] == catalog.ids()


def test_catalog_show(capsys):
    code, out, _ = run(capsys, "catalog", "show", "example3")
    assert code == 0 and "ω = exp(2πi/3)" in out and "phi3 = |01⟩ + |23⟩" in out
    code, out, _ = run(capsys, "catalog", "show", "example1")
    assert "psi1 = |0𝟎⟩ + |0𝟐⟩ + |1𝟏⟩ - |1𝟑⟩" in out


def test_unknown_id_is_usage_error(capsys):
    code, _, err = run(capsys, "catalog", "show", "nope")
    assert code == 2 and "unknown catalog id" in err
    assert run(capsys, "classify", "nope")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_verify_redundancy(capsys):
    code, out, _ = run(capsys, "verify", "example1", "--redundancy")
    assert code == 0 and "redundant=false" in out
    code, out, _ = run(capsys, "verify", "intro-redundant", "--redundancy")
    assert code == 0 and "redundant=true (expected" in out and "discard {A',B'}" in out


def test_verify_nonorthogonal_file(capsys, tmp_path):
    doc = {"dims": [2, 2], "parties": ["A", "B"], "states": [
        {"label": "u", "amplitudes": [[1, 0], [0, 0], [0, 0], [0, 0]]},
        {"label": "v", "amplitudes": [[1, 0], [1, 0], [0, 0], [0, 0]]},
    ]}
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", str(p), "--orthogonality")
    assert code == 1 and "witness: <u|v>" in out


def test_classify_branch_file(capsys, tmp_path):
    e = catalog.get("example1")
    br = apply_outcome(e.state_set, e.activating, 0).transformed_set
    p = tmp_path / "branch.json"
    p.write_text(fmt.dumps(fmt.state_set_to_dict(br)))
    code, out, _ = run(capsys, "classify", str(p), "--format", "structured")
    doc = json.loads(out)
    assert code == 0 and doc["status"] == "Indistinguishable"
    assert [c["rule"] for c in doc["certificate"]] == ["R5", "R3"]
    assert doc["certificate"][-1]["params"]["product_count"] == 0


def test_classify_catalog_entry(capsys):
    code, out, _ = run(capsys, "classify", "example1", "--format", "structured")
    doc = json.loads(out)
    assert doc["status"] == "Distinguishable" and doc["protocol"] is not None


def test_activate(capsys):
    assert run(capsys, "activate", "example1")[0] == 0
    code, out, _ = run(capsys, "activate", "example1", "--measurement", "A:0|1")
    assert code == 1 and "activating=false" in out
    code, out, _ = run(capsys, "activate", "example3", "--format", "structured")
    doc = json.loads(out)
    assert doc["activating"] and [b["verdict"]["certificate"][-1]["rule"] for b in doc["branches"]] == ["R3", "R7"]
    assert run(capsys, "activate", "example1", "--measurement", "B:0|1|2|3")[0] == 2


def test_demo_hide(capsys):
    code, out, _ = run(capsys, "demo", "hide", "example1")
    assert code == 0 and "all checks pass" in out
    for tag in ("[1]", "[2]", "[3]", "[4]", "[5]"):
        assert tag in out
    code, out, _ = run(capsys, "demo", "hide", "example3")
    assert code == 0 and "R7" in out
    code, _, err = run(capsys, "demo", "hide", "intro-redundant")
    assert code == 2 and "no activating measurement" in err


def test_env_overrides_and_output(capsys, tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = run(capsys, "catalog", "list", env={"LOCCACT_FORMAT": "structured", "LOCCACT_OUTPUT": str(target)})
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["ids"][0] == "intro-redundant"
    # explicit flags beat the environment
    code, out, _ = run(capsys, "catalog", "list", "--format", "text", env={"LOCCACT_FORMAT": "structured"})
    assert out.startswith("intro-redundant")
    code, out, _ = run(capsys, "classify", "example1", "--format", "structured", env={"LOCCACT_SEED": "4"})
    assert json.loads(out)["seed"] == 4


@pytest.mark.parametrize("argv", [["--tolerance", "0.5"], ["--budget", "0"], ["--tolerance", "-1"]])
def test_bad_config(capsys, argv):
    assert run(capsys, "classify", "example1", *argv)[0] == 2


def test_structured_output_is_deterministic(capsys):
    outs = [run(capsys, "activate", "example4", "--format", "structured", "--seed", "7")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_render_ket_coefficients():
    amps = np.zeros(16, dtype=complex)
    amps[0], amps[5], amps[15] = -1, OMEGA, -(OMEGA**2)
    assert render_ket(amps, (4, 4)) == "-|𝟎𝟎⟩ + ω|𝟏𝟏⟩ - ω²|𝟑𝟑⟩"


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "loccact.cli", "catalog", "list"], capture_output=True, text=True)
    assert out.returncode == 0 and "example4" in out.stdout
