import json

import pytest

from sidforge.cli import main
from sidforge.fixtures import accepting_derivation, broken_pseudo_derivation, hand_built_encoding, rejecting_machine

from conftest import BTREE


@pytest.fixture
def files(tmp_path, machine):
    def put(name, content):
        path = tmp_path / name
        path.write_text(content if isinstance(content, str) else json.dumps(content))
        return str(path)

    return {
        "sid": put("btree.sid", BTREE + "\nl(x) <= x -> (nil,nil)\n"),
        "bad": put("bad.sid", "p(x) <= \\E y . x -> (y,nil)\n"),
        "wide": put("wide.sid", "p(x) <= x -> (@,@,@,@)\n"),
        "atm": put("m.json", machine.to_json()),
        "rej": put("r.json", rejecting_machine().to_json()),
        "deriv": put("d.json", accepting_derivation().to_json()),
        "broken": put("b.json", broken_pseudo_derivation().to_json()),
        "fig": put("f.json", hand_built_encoding().to_json()),
        "dir": str(tmp_path),
    }


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_check_pce(capsys, files):
    assert run(capsys, "check-pce", files["sid"])[0] == 0
    code, out = run(capsys, "check-pce", files["bad"], "--json")
    assert code == 1 and json.loads(out)["established"] == "No"


def test_expand(capsys, files):
    code, out = run(capsys, "expand", files["wide"])
    assert code == 0 and len(out.strip().splitlines()) == 8
    code, out = run(capsys, "expand", files["wide"], "--emit-after", "tuples")
    assert len(out.strip().splitlines()) == 3


def test_compile(capsys, files):
    out_path = files["dir"] + "/m.sid"
    assert run(capsys, "compile", files["atm"], "--space-exp", "1", "-o", out_path)[0] == 0
    with open(out_path) as fh:
        assert len(fh.read().strip().splitlines()) == 937
    code, out = run(capsys, "compile", files["atm"], "--space-exp", "1", "--surface")
    assert len(out.strip().splitlines()) == 280


def test_entail(capsys, files):
    code, out = run(capsys, "entail", files["sid"], "p(x)", "p(x)", "--max-nodes", "5")
    assert code == 0 and out.startswith("HoldsWithinBound")
    code, out = run(capsys, "entail", files["sid"], "p(x)", "l(x)", "--json")
    assert code == 1 and json.loads(out)["verdict"] == "CounterModel"


def test_atm_verbs(capsys, files):
    assert run(capsys, "atm", "check-derivation", files["atm"], files["deriv"])[0] == 0
    assert run(capsys, "atm", "check-derivation", files["atm"], files["broken"])[0] == 1
    assert run(capsys, "atm", "check-derivation", files["atm"], files["broken"], "--pseudo")[0] == 0
    code, out = run(capsys, "atm", "violations", files["atm"], files["broken"], "--space-exp", "1")
    assert code == 1 and sorted(v["kind"] for v in json.loads(out)) == ["I", "II", "III"]
    code, out = run(capsys, "atm", "search", files["atm"], "--space-exp", "1")
    assert code == 0 and json.loads(out)["state"] == "q0"
    assert run(capsys, "atm", "search", files["rej"], "--space-exp", "1")[0] == 1


def test_encode_decode(capsys, files):
    code, out = run(capsys, "decode", files["atm"], files["fig"])
    assert code == 0
    tree = json.loads(out)
    assert tree["state"] == "q0" and len(tree["children"]) == 2
    pseudo = files["dir"] + "/t.json"
    with open(pseudo, "w") as fh:
        fh.write(out)
    code, out = run(capsys, "encode", files["atm"], pseudo, "--space-exp", "1")
    assert code == 0 and len(json.loads(out)["heap"]) == len(hand_built_encoding().heap)


def test_verify_lemmas(capsys, files):
    code, out = run(capsys, "verify-lemmas", files["atm"], "--space-exp", "1", "--k", "3")
    assert code == 0 and json.loads(out)["pseudo_derivations"] == 9


def test_entail_machine(capsys, files):
    code, out = run(capsys, "entail-machine", files["rej"], "--space-exp", "1", "--max-nodes", "3")
    assert code == 0 and out.startswith("HoldsWithinBound")


def test_errors_exit_with_two(capsys, files):
    assert main(["check-pce", files["dir"] + "/missing.sid"]) == 2
    assert main(["entail", files["sid"], "p(x)", "zz(x)"]) == 2
    with pytest.raises(SystemExit) as e:
        main(["compile"])
    assert e.value.code == 2
