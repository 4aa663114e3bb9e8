import json
import subprocess
import sys

import pytest

from metabar.cli import main
from metabar.metagroup import cyclic, table_to_json


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_generate_and_verify_file(tmp_path, capsys):
    path = tmp_path / "o16.json"
    code, out, _ = run(capsys, "generate", "cd:3", "-o", str(path))
    assert code == 0 and "16-element" in out
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 0
    assert out.splitlines()[0] == "metagroup; t3 nontrivial; Psi = {e0, -e0}"


def test_verify_group_spec(capsys):
    code, out, _ = run(capsys, "verify", "dihedral:4")
    assert code == 0 and out.startswith("associative; t3 trivial")


def test_corrupted_table_exits_one(tmp_path, capsys):
    obj = json.loads(table_to_json(cyclic(4)))
    obj["table"][1][2] = obj["table"][1][3]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(obj))
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 1 and out.startswith("FAIL A1.")


def test_input_errors_exit_two(tmp_path, capsys):
    assert run(capsys, "generate", "cd:9")[0] == 2
    assert run(capsys, "verify", "nonsense")[0] == 2
    junk = tmp_path / "junk.json"
    junk.write_text("{not json")
    assert run(capsys, "verify", str(junk))[0] == 2
    assert run(capsys, "homology", "cyclic:2", "--ring", "R")[0] == 2
    assert run(capsys, "homology", "cyclic:2", "--max-n", "-1")[0] == 2
    assert run(capsys, "suite", "--criteria", "1,99")[0] == 2
    assert run(capsys, "les", "--ring", "Z")[0] == 2


def test_resource_refusal_exits_three(capsys):
    code, _, err = run(capsys, "homology", "cd:3", "--max-n", "6")
    assert code == 3 and "refused" in err


def test_homology_command(tmp_path, capsys):
    code, out, _ = run(capsys, "homology", "cyclic:4", "--max-n", "3", "--emit", str(tmp_path / "m"))
    assert code == 0
    assert "augmented homology below the top vanishes: yes" in out
    assert (tmp_path / "m" / "d3.json").exists()
    code, out, _ = run(capsys, "homology", "cd:2", "--max-n", "2", "--ring", "Fp:3", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["acyclic"] and rep["homology"]["1"]["text"] == "0"


def test_les_command(capsys):
    code, out, _ = run(capsys, "les", "--seed", "3")
    assert code == 0 and "NOT EXACT" not in out
    code, out, _ = run(capsys, "les", "--seed", "3", "--format", "json")
    assert json.loads(out)["ok"]


def test_suite_subset_is_byte_identical(capsys):
    first = run(capsys, "suite", "--criteria", "8,9,10", "--seed", "5", "--format", "json")
    second = run(capsys, "suite", "--criteria", "8,9,10", "--seed", "5", "--format", "json")
    assert first[0] == 0 and first[1] == second[1]


def test_injected_fault_fails_dd_criterion(capsys):
    code, out, _ = run(capsys, "suite", "--criteria", "3", "--inject-fault")
    assert code == 1
    status, number = out.splitlines()[1].split()[:2]
    assert (status, number) == ("[FAIL]", "3")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "metabar", "verify", "quaternion8"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "associative" in res.stdout
