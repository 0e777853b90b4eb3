import json
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finalg.cli import main, run, strip_timing

from conftest import algebras, bare_set, semilattice, write_doc, z2


def test_check_exit_codes(doc_path):
    p = doc_path(z2())
    report, code = run(["check", p, "--property", "abelian", "--oracle"])
    assert code == 0 and report["result"]["oracle"]["agrees"]
    report, code = run(["check", p, "--property", "strongly-abelian"])
    assert code == 1
    assert report["result"]["verdict"]["witness"]["matrix"] == [[1, 0], [0, 1]]
    report, code = run(["check", p, "--property", "affine", "--mode", "term"])
    assert code == 0 and report["result"]["verdict"]["witness"]["term"] == "add(add(x1,x2),x3)"


def test_check_semilattice_affine(doc_path):
    report, code = run(["check", doc_path(semilattice()), "--property", "affine"])
    assert code == 1 and report["result"]["verdict"]["note"] == "abelian sub-check failed"


def test_input_errors(doc_path, tmp_path):
    p = doc_path(z2())
    assert run(["check", p, "--property", "c11"])[1] == 3
    assert run(["check", p, "--property", "nonsense"])[1] == 3
    assert run(["check", str(tmp_path / "missing.json"), "--property", "abelian"])[1] == 3
    bad = tmp_path / "bad.json"
    bad.write_text('{"size": 2,\n "operations": [}')
    report, code = run(["check", str(bad), "--property", "abelian"])
    assert code == 3 and "line 2, column 17" in report["error"]["message"]
    report, code = run(["check", doc_path(semilattice(), "s.json"), "--property", "c11",
                        "--theta", "[[0],[1,0]]"])
    assert code == 3


def test_argparse_errors_exit_3(capsys):
    with pytest.raises(SystemExit) as info:
        run(["check"])
    assert info.value.code == 3


def test_property_and_theta_options(doc_path):
    p = doc_path(semilattice(), zero=0, congruences={"full": [[0, 1]]}, orders={"ge": [[0, 0], [0, 1], [1, 1]]})
    assert run(["check", p, "--property", "property-p"])[1] == 0
    assert run(["check", p, "--property", "rectangular", "--oracle"])[1] == 0
    assert run(["check", p, "--property", "rectangular", "--order", "search"])[1] == 0
    report, code = run(["check", p, "--property", "c11", "--theta", "full", "--oracle"])
    assert code == 0 and report["result"]["oracle"]["agrees"]


def test_construct_and_replay(tmp_path, doc_path):
    src = doc_path(bare_set(2), congruences={"full": [[0, 1]]})
    out = tmp_path / "s.json"
    report, code = run(["construct", "build-s", src, "--theta", "full", "--out", str(out)])
    assert code == 0
    assert report["result"]["summary"]["size"] == 3
    cert = tmp_path / "s.cert.json"
    assert out.exists() and cert.exists()
    report, code = run(["replay", str(cert)])
    assert code == 0 and report["result"]["verified"]

    t_out = tmp_path / "t.json"
    assert run(["construct", "collapse-ordered", str(out), "--out", str(t_out)])[1] == 0
    t2_out = tmp_path / "t2.json"
    report, code = run(["construct", "theorem2", str(t_out), "--out", str(t2_out)])
    assert code == 0 and report["result"]["summary"]["size"] == 2
    assert run(["replay", str(tmp_path / "t2.cert.json")])[1] == 0


def test_replay_detects_tampering(tmp_path, doc_path):
    src = doc_path(bare_set(2), congruences={"full": [[0, 1]]})
    out = tmp_path / "s.json"
    run(["construct", "build-s", src, "--theta", "full", "--out", str(out)])
    cert_path = tmp_path / "s.cert.json"
    bundle = json.loads(cert_path.read_text())
    bundle["certificates"][0]["objects"]["S"]["value"]["size"] = 5
    cert_path.write_text(json.dumps(bundle))
    report, code = run(["replay", str(cert_path)])
    assert code == 1 and not report["result"]["verified"]


def test_construct_precondition_exit(doc_path):
    report, code = run(["construct", "build-s", doc_path(z2()), "--theta", "[[0,1]]"])
    assert code == 1
    assert report["result"]["error"]["hypothesis"] == "theta not strongly abelian"


def test_search_command():
    report, code = run(["search", "--size", "2", "--signature", "2", "--property", "abelian"])
    assert code == 0 and report["result"]["summary"]["matched"] == 8
    report, code = run(["search", "--size", "2", "--signature", "2", "--property", "abelian", "--budget", "3"])
    assert code == 2
    assert run(["search", "--size", "4", "--signature", "2", "--property", "abelian"])[1] == 3
    assert run(["search", "--size", "2", "--signature", "2", "--property", "abelian &"])[1] == 3


def test_congruences_command(doc_path):
    report, code = run(["congruences", doc_path(bare_set(3)), "--oracle"])
    assert code == 0 and report["result"]["count"] == 5 and report["result"]["oracle"]["agrees"]


def test_main_prints_json(doc_path, capsys):
    code = main(["check", doc_path(z2()), "--property", "abelian"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0 and out["exit_code"] == 0 and "timing" in out


def test_module_entry_point(doc_path):
    proc = subprocess.run([sys.executable, "-m", "finalg", "check", doc_path(z2()), "--property",
                           "strongly-abelian"], capture_output=True, text=True)
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["result"]["verdict"]["outcome"] == "fails"


@settings(max_examples=25, deadline=None)
@given(algebras(max_size=3), st.sampled_from(["abelian", "strongly-abelian", "strongly-rectangular",
                                               "affine", "strongly-solvable"]))
def test_reports_are_deterministic(tmp_path_factory, alg, prop):
    p = write_doc(tmp_path_factory.mktemp("d") / "a.json", alg)
    first, c1 = run(["check", p, "--property", prop])
    second, c2 = run(["check", p, "--property", prop])
    assert c1 == c2 and c1 in (0, 1, 2)
    assert strip_timing(first) == strip_timing(second)
    assert json.dumps(strip_timing(first), sort_keys=True) == json.dumps(strip_timing(second), sort_keys=True)
