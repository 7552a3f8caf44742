import csv
import io
import json
import math
import subprocess
import sys

import pytest

from concord.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_angle_csv(capsys):
    code, out, _ = run(capsys, "angle", "--corpus", "universal", "--grid", "257", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 257 and float(rows[0]["c_local"]) == 0.0
    for r in rows[1:]:
        assert abs(float(r["c_local"]) - abs(math.cos(float(r["coordinate"])))) < 1e-10


def test_angle_json_has_provenance(capsys):
    code, out, _ = run(capsys, "angle", "--corpus", "universal", "--grid", "65")
    doc = json.loads(out)
    assert code == 0 and doc["global_angle"]["provenance"] == "discordant override"


def test_equivalence_constant_angle(capsys):
    code, out, _ = run(capsys, "equivalence", "--corpus", "constant-angle", "--theta", "1.0472")
    doc = json.loads(out)
    assert code == 0 and doc["consistency"]
    assert [c["holds"] for c in doc["conditions"]] == [True] * 10


def test_equivalence_csv(capsys):
    code, out, _ = run(capsys, "equivalence", "--corpus", "universal", "--grid", "65",
                       "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and {r["holds"] for r in rows} == {"false"}


def test_analyze_strict_discordant(capsys):
    code, out, _ = run(capsys, "analyze", "--corpus", "universal", "--strict")
    doc = json.loads(out)
    assert code == 0
    assert doc["schema"] == 1 and doc["concordance"]["status"] == "discordant"
    assert doc["concordance"]["witness"]["detail"] == "rank 1 vs 0"


def test_analyze_strict_undecided(capsys, tmp_path):
    # three raw samples cannot be refined or coarsened, so the verdict stays open
    path = tmp_path / "short.json"
    main(["corpus", "export", "--corpus", "constant-angle", "--grid", "3", "--out", str(path)])
    doc = json.loads(path.read_text())
    doc.pop("closed_form")
    path.write_text(json.dumps(doc))
    assert run(capsys, "analyze", "--input", str(path), "--strict")[0] == 3
    assert run(capsys, "analyze", "--input", str(path))[0] == 0


def test_analyze_is_deterministic(tmp_path):
    outs = []
    for i in range(2):
        p = tmp_path / f"b{i}.json"
        assert main(["analyze", "--corpus", "random", "--seed", "7", "--out", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_iterate_and_concordance(capsys):
    code, out, _ = run(capsys, "iterate", "--corpus", "constant-angle", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "n,distance" and float(lines[1].split(",")[1]) == pytest.approx(0.25)
    code, out, _ = run(capsys, "concordance", "--corpus", "constant-angle", "--harmonious")
    doc = json.loads(out)
    assert doc["status"] == "concordant" and doc["harmonious"]["harmonious"] is True


def test_refine_flag(capsys):
    code, out, _ = run(capsys, "angle", "--corpus", "constant-angle", "--grid", "5",
                       "--refine", "2", "--format", "csv")
    assert code == 0 and len(out.splitlines()) == 1 + 17


def test_corpus_list(capsys):
    code, out, _ = run(capsys, "corpus", "list")
    names = [e["name"] for e in json.loads(out)["corpus"]]
    assert code == 0 and "universal" in names and "zero-intersection" in names


@pytest.mark.parametrize("argv", [
    ["angle", "--corpus", "nope"],
    ["angle", "--input", "/nonexistent.json"],
    ["angle", "--corpus", "universal", "--a", "-1"],
    ["angle", "--corpus", "constant-angle", "--theta", "0"],
    ["angle", "--corpus", "universal", "--tol-rank", "0.5"],
    ["analyze", "--corpus", "universal", "--format", "csv"],
    ["angle"],
    ["bogus"],
])
def test_input_errors_exit_1(capsys, argv):
    assert main(argv) == 1


def test_unrefinable_input_exits_1(capsys, tmp_path):
    path = tmp_path / "p.json"
    main(["corpus", "export", "--corpus", "universal-finite", "--out", str(path)])
    assert main(["angle", "--input", str(path), "--refine", "1"]) == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "concord", "corpus", "list", "--format", "csv"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.startswith("name,description")
