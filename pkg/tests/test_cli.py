import json
import os
import subprocess
import sys

import pytest

from spinorlab import cli
from spinorlab.errors import InvariantViolation

F3 = {"kind": "Fp", "p": 3}
Q4 = json.dumps({"field": F3, "diagonal": [1, 1, 1, 2]})
Q6 = json.dumps({"field": F3, "diagonal": [1, 1, 1, 1, 1, 1]})


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_identity_spinor_norm_is_trivial(capsys):
    code, out, _ = run(capsys, "spinor-norm", "--form", Q4)
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "v1" and doc["command"] == "spinor-norm"
    assert doc["results"][0]["trivial"] is True
    assert "timing" not in doc


def test_spinor_norm_of_reflections(capsys):
    vecs = json.dumps([[1, 0, 0, 0], [0, 0, 0, 1]])
    code, out, _ = run(capsys, "spinor-norm", "--form", Q4, "--vectors", vecs, "--verify")
    doc = json.loads(out)
    assert code == 0
    assert doc["results"][0]["trivial"] is False  # 1 * 2 is a non-square mod 3
    assert doc["verification"] == {"checked": 1, "failed": 0}


def test_alpha_membership(capsys):
    code, out, _ = run(capsys, "spinor-norm", "--form", Q4, "--alpha", "2", "--verify")
    assert code == 0
    assert json.loads(out)["results"][0]["verdict"] == "spinor_norm"


def test_h1_matches_quotient(capsys):
    code, out, _ = run(capsys, "h1", "--form", Q6)
    assert code == 0
    res = json.loads(out)["results"][0]
    assert res["order"] == 4 and res["agree"] is True


def test_hilbert(capsys):
    code, out, _ = run(capsys, "hilbert", "2", "5")
    res = json.loads(out)["results"][0]
    assert code == 0 and res["ramified"] == [2, 5] and res["split"] is False
    code, out, _ = run(capsys, "hilbert", "-1", "-1", "--place", "inf")
    assert json.loads(out)["results"][0]["symbol"] == -1
    code, _, err = run(capsys, "hilbert", "1", "2", "--place", "4")
    assert code == 1 and "not prime" in err


def test_input_errors_exit_1(capsys):
    bad = json.dumps({"field": F3, "diagonal": [1, 0, 1, 1]})
    code, _, err = run(capsys, "spinor-norm", "--form", bad)
    assert code == 1
    assert "diagonal[1]" in json.loads(err)["message"]
    code, _, _ = run(capsys, "np-check", "--form", Q4, "--ext", '{"kind": "finite", "degree": 2}')
    assert code == 1
    code, _, _ = run(capsys, "lift", "--form", Q4, "--seed", "-1")
    assert code == 1
    code, _, _ = run(capsys, "lift", "--form", "{not json")
    assert code == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["no-such-command"])
    assert exc.value.code == 1


def test_invariant_violation_exits_2(capsys, monkeypatch):
    def boom(cfg):
        raise InvariantViolation("forced")

    monkeypatch.setitem(cli.COMMANDS, "h1", boom)
    code, _, err = run(capsys, "h1", "--form", Q6)
    assert code == 2 and "forced" in err


def test_np_check_verify_and_tamper(capsys, tmp_path):
    path = tmp_path / "np.json"
    code, _, _ = run(capsys, "np-check", "--form", Q4, "--ext", '{"kind": "finite", "degree": 3}',
                     "--samples", "3", "--seed", "1", "--out", str(path), "--verify")
    assert code == 0
    doc = json.loads(path.read_text())
    assert doc["verification"] == {"checked": 3, "failed": 0}
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 0 and json.loads(out)["failed"] == 0
    first = doc["results"][0]["outcomes"][0]
    first["theta"] = [1, 1] if first["theta"] != [1, 1] else [2, 0]
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 2 and json.loads(out)["failed"] == 1
    path.write_text(json.dumps({"command": "np-check"}))
    code, _, _ = run(capsys, "verify", str(path))
    assert code == 1


def test_lift_and_obstruction(capsys):
    code, out, _ = run(capsys, "lift", "--form", Q6, "--seed", "4", "--verify")
    assert code == 0 and json.loads(out)["verification"]["failed"] == 0
    code, out, _ = run(capsys, "obstruction", "--form", Q6, "--seed", "4", "--verify")
    doc = json.loads(out)
    assert code == 0 and doc["verification"]["failed"] == 0
    assert doc["results"][0]["special"] == "special"


def test_search_config(capsys, tmp_path):
    cfg = tmp_path / "search.json"
    cfg.write_text(json.dumps({"schema": "v1", "runs": [
        {"form": json.loads(Q4), "ext": {"kind": "finite", "degree": 3}, "samples": 3, "seed": 2}]}))
    code, out, _ = run(capsys, "search", "--config", str(cfg))
    assert code == 0 and json.loads(out)["results"] == []
    cfg.write_text(json.dumps({"schema": "v2", "runs": []}))
    code, _, _ = run(capsys, "search", "--config", str(cfg))
    assert code == 1


@pytest.mark.parametrize("argv", [
    ["np-check", "--form", Q4, "--ext", '{"kind": "finite", "degree": 3}', "--samples", "3", "--seed", "7"],
    ["hilbert", "-3", "10"],
    ["obstruction", "--form", Q6, "--seed", "11"],
])
def test_output_is_byte_identical_across_hash_seeds(argv):
    outputs = []
    for hash_seed in ("0", "12345"):
        env = dict(os.environ, PYTHONHASHSEED=hash_seed)
        proc = subprocess.run([sys.executable, "-m", "spinorlab", *argv], capture_output=True, env=env, check=True)
        outputs.append(proc.stdout)
    assert outputs[0] == outputs[1]
