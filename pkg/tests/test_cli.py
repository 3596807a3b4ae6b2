import json
import shutil
import subprocess

import pytest

from spreadforge.cli import main
from spreadforge.spgraph import from_graph6


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_field_check(capsys):
    code, out, _ = _run(capsys, "field-check", "--q", "4", "9")
    assert code == 0
    assert [r["q"] for r in json.loads(out)["fields"]] == [4, 9]


def test_usage_errors(capsys):
    assert _run(capsys, "ddg", "--family", "7", "--q", "3")[0] == 2
    assert _run(capsys, "graph")[0] == 2
    assert _run(capsys)[0] == 2
    assert _run(capsys, "ddg", "--family", "1")[0] == 2
    assert _run(capsys, "ddg", "--family", "2", "--q", "3", "--assignment", "01")[0] == 2
    assert _run(capsys, "tables", "--q", "9")[0] == 2


def test_certification_failure_exits_one_with_witness(capsys):
    code, out, err = _run(capsys, "ddg", "--family", "2", "--q", "3", "--variant", "partial")
    assert code == 1 and out == ""
    rep = json.loads(err)
    assert rep["status"] == "fail" and rep["error"] == "CertificationError"
    assert rep["witness"] is not None


def test_spread_construct_and_verify(capsys, tmp_path):
    path = tmp_path / "s.json"
    code, out, _ = _run(capsys, "spread", "construct", "--q", "3", "--verify", "--emit", str(path))
    assert code == 0
    rep = json.loads(out)
    assert rep["verification"]["valid"] and rep["construction"]["ovoid_size"] == 10
    code, out, _ = _run(capsys, "spread", "verify", "--file", str(path))
    assert code == 0 and json.loads(out)["verification"]["lines"] == 10
    bad = json.loads(path.read_text())
    bad["pairing"] = bad["pairing"][:-1]
    path.write_text(json.dumps(bad))
    assert _run(capsys, "spread", "verify", "--file", str(path))[0] == 1


def test_ddg_family_one_emits_graph6(capsys, tmp_path):
    path = tmp_path / "g.g6"
    code, out, _ = _run(capsys, "ddg", "--family", "1", "--q", "3", "--emit", str(path))
    assert code == 0
    assert json.loads(out)["params"] == [40, 31, 22, 24, 10, 4]
    g = from_graph6(path.read_text().strip())
    assert g.n == 40 and g.degree(0) == 31


def test_ddg_families_three_and_four(capsys):
    code, out, _ = _run(capsys, "ddg", "--family", "3", "--q", "3", "--e", "2")
    assert code == 0 and json.loads(out)["params"] == [40, 9, 0, 2, 10, 4]
    code, out, _ = _run(capsys, "ddg", "--family", "4", "--q", "3", "--e", "2")
    rep = json.loads(out)
    assert code == 0 and rep["params"] == [40, 17, 8, 6, 2, 20]
    assert [sum(r) for r in rep["equitable_quotient"]] == [17, 17]


def test_tables_q5(capsys):
    code, out, _ = _run(capsys, "tables", "--q", "5")
    assert code == 0
    rows = [ln.split(None, 2) for ln in out.splitlines()[2:]]
    assert [(int(r[1]), json.loads(r[2])) for r in rows] == [(1152, [0, 30, 48]), (1440, [0, 45, 33])]


def test_enumerate_digest_and_checkpoint(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SPREADFORGE_CHECKPOINT_DIR", str(tmp_path))
    code, out, _ = _run(capsys, "enumerate", "--q", "3", "--emit", str(tmp_path / "s.jsonl"))
    assert code == 0
    assert json.loads(out)["count"] == 27
    assert len((tmp_path / "s.jsonl").read_text().splitlines()) == 27


def test_manifest_replay_is_identical(capsys, tmp_path):
    man = tmp_path / "m.json"
    g6 = tmp_path / "g.g6"
    code, _, _ = _run(capsys, "graph", "--q", "3", "--emit", str(g6), "--manifest", str(man))
    assert code == 0
    m = json.loads(man.read_text())
    assert m["q"] == 3 and m["field"]["p"] == 3 and m["seed"] == 20240607
    assert len(m["form_gram"]) == 4
    assert set(m["output_digests"]) == {"stdout", g6.name}
    code, _, err = _run(capsys, "--replay", str(man))
    assert code == 0 and json.loads(err)["identical"]


def test_replay_detects_changed_output(capsys, tmp_path):
    man = tmp_path / "m.json"
    assert _run(capsys, "geometry", "--q", "3", "--manifest", str(man))[0] == 0
    m = json.loads(man.read_text())
    m["output_digests"]["stdout"] = "0" * 64
    man.write_text(json.dumps(m))
    assert _run(capsys, "--replay", str(man))[0] == 1


def test_census_report(capsys):
    code, out, _ = _run(capsys, "census", "--q", "3")
    assert code == 0
    reps = json.loads(out)["reports"]
    assert [r["params"] for r in reps] == [[40, 31, 22, 24, 10, 4], [40, 23, 14, 12, 2, 20]]
    for r in reps:
        g = from_graph6(r["graph6"])
        assert g.n == 40 and r["proper"]


@pytest.mark.skipif(shutil.which("spreadforge") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["spreadforge", "graph", "--q", "3"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["params"] == [40, 12, 2, 4]
