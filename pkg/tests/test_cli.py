import json

import numpy as np
import pytest

from diraclab import documents as docs
from diraclab.cli import main
from diraclab.dirac import CommutingTuple
from diraclab.samples import random_commuting_tuple


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def tuple_doc(*mats):
    mats = [np.asarray(m, dtype=complex) for m in mats]
    return docs.tuple_to_dict(CommutingTuple(tuple(mats)))


@pytest.fixture
def one_doc(tmp_path):
    return write(tmp_path / "t.json", tuple_doc([[1.0]]))


@pytest.fixture
def diag_doc(tmp_path):
    return write(tmp_path / "diag.json", tuple_doc(np.diag([1.0, 2.0]), np.diag([3.0, 4.0])))


def test_verify_tuple(one_doc, tmp_path, capsys):
    report = tmp_path / "r.json"
    assert main(["verify", one_doc, "--json", str(report)]) == 0
    out = capsys.readouterr().out
    assert out.strip().endswith("PASS")
    rep = json.loads(report.read_text())
    assert rep["passed"] and max(rep["axioms"][k] for k in ("D1", "D2", "D3")) < 1e-11


def test_verify_zero_dirac_document(tmp_path, capsys):
    path = write(tmp_path / "D.json", {"d": 1, "n": 1, "D": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]})
    assert main(["verify", path]) == 0
    out = capsys.readouterr().out
    assert "T_1 = [0+0i]" in out and "PASS" in out


def test_verify_noncommuting_exit_1(tmp_path, capsys):
    doc = {"d": 2, "n": 2, "matrices": [docs.encode_matrix([[0, 1], [0, 0]]),
                                       docs.encode_matrix([[0, 0], [1, 0]])]}
    assert main(["verify", write(tmp_path / "nc.json", doc)]) == 1
    assert "commutator norm 1" in capsys.readouterr().out


def test_input_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", str(bad)]) == 2
    assert main(["verify", str(tmp_path / "missing.json")]) == 2
    assert main(["verify", write(tmp_path / "shape.json", {"d": 1, "n": 2, "matrices": [[[[1, 0]]]]})]) == 2
    nonsa = {"d": 1, "n": 1, "D": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]]}
    assert main(["verify", write(tmp_path / "nsa.json", nonsa)]) == 2


def test_reconstruct(tmp_path, capsys):
    D = [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]
    src = write(tmp_path / "D.json", {"d": 1, "n": 1, "D": D})
    out = tmp_path / "t.json"
    assert main(["reconstruct", src, "--out", str(out)]) == 0
    t = docs.tuple_from_dict(json.loads(out.read_text()))
    assert t.matrices[0][0, 0] == 1
    bad = write(tmp_path / "bad.json", {"d": 1, "n": 1, "D": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]})
    assert main(["reconstruct", bad]) == 1


def test_spectrum_diag_pair(diag_doc, tmp_path, capsys):
    report = tmp_path / "s.json"
    assert main(["spectrum", diag_doc, "--json", str(report)]) == 0
    out = capsys.readouterr().out
    assert "verified: 2" in out
    assert len(json.loads(report.read_text())["verified"]) == 2


def test_index_explains(diag_doc, capsys):
    assert main(["index", diag_doc]) == 0
    out = capsys.readouterr().out
    assert "index = 0" in out and "dim H_+ = dim H_-" in out


def test_betti(tmp_path, capsys):
    path = write(tmp_path / "j.json", tuple_doc([[0.0, 1.0], [0.0, 0.0]]))
    assert main(["betti", path]) == 0
    out = capsys.readouterr().out
    assert "beta: 1 1" in out and "euler number: 0" in out


def test_solve(tmp_path, capsys):
    t = write(tmp_path / "id.json", tuple_doc([[1.0]], [[1.0]]))
    zero = write(tmp_path / "y0.json", [0.0])
    assert main(["solve", t, "--rhs", zero]) == 0
    out = capsys.readouterr().out
    assert "solvable: yes" in out and "x_1 = (0+0i)" in out
    two = write(tmp_path / "y2.json", [2.0])
    report = tmp_path / "s.json"
    assert main(["solve", t, "--rhs", two, "--json", str(report)]) == 0
    rep = json.loads(report.read_text())
    assert rep["perturbation_dim"] == 1
    assert np.allclose([z[0] for xk in rep["x"] for z in xk], [1, 1], atol=1e-12)
    assert main(["solve", t, "--rhs", write(tmp_path / "y3.json", [1, 2])]) == 2


def test_scan_grid(one_doc, tmp_path):
    out = tmp_path / "scan.tsv"
    assert main(["scan", one_doc, "--grid", "0:2:21", "--grid", "-1:1:21", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "# re(l1)\tim(l1)\tsigma_min"
    assert len(lines) == 1 + 21 * 21
    rows = [list(map(float, l.split("\t"))) for l in lines[1:]]
    hit = [r for r in rows if r[0] == 1 and r[1] == 0]
    assert len(hit) == 1 and hit[0][2] < 1e-12


def test_scan_empty_grid(one_doc, tmp_path):
    out = tmp_path / "e.tsv"
    assert main(["scan", one_doc, "--grid", "0:1:0", "--grid", "0:1:3", "--out", str(out)]) == 0
    assert out.read_text() == "# re(l1)\tim(l1)\tsigma_min\n"


def test_scan_d3_needs_points(tmp_path, rng):
    t = write(tmp_path / "t3.json", docs.tuple_to_dict(random_commuting_tuple(rng, 1, 3)))
    out = tmp_path / "o.tsv"
    assert main(["scan", t, "--grid", "0:1:2", "--out", str(out)]) == 2
    pts = write(tmp_path / "p.json", [[0, 0, 0], [[1, 0], 0, [0, 1]]])
    assert main(["scan", t, "--points", pts, "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 3


def test_scan_grid_guard(one_doc, tmp_path):
    out = tmp_path / "o.tsv"
    assert main(["scan", one_doc, "--grid", "0:1:5000", "--grid", "0:1:5000", "--out", str(out)]) == 2
    assert main(["scan", one_doc, "--grid", "0:1", "--grid", "0:1:2", "--out", str(out)]) == 2


def test_graded_free(tmp_path, capsys):
    report = tmp_path / "g.json"
    assert main(["graded", "free", "--d", "2", "--rank", "1", "--max-degree", "6",
                 "--json", str(report)]) == 0
    out = capsys.readouterr().out
    assert "index: 1" in out and "(2, 0): 1" in out
    rep = json.loads(report.read_text())
    assert rep["index"] == 1 and rep["stabilized"] and [2, 0, 1] in rep["beta"]


def test_graded_shift_quotient(tmp_path, capsys):
    report = tmp_path / "g.json"
    assert main(["graded", "shift-quotient", "--d", "2", "--r", "1", "--phi", "1:(1,0)",
                 "--max-degree", "8", "--json", str(report)]) == 0
    out = capsys.readouterr().out
    assert "curvature K = (-1)^d * index = 1" in out and "defect rank: 2" in out
    rep = json.loads(report.read_text())
    assert (rep["curvature"], rep["defect_rank"], rep["chi"]) == (1, 2, 1)


def test_graded_rejections(capsys):
    assert main(["graded", "shift-quotient", "--d", "2", "--phi", "1:(1,0)+1:(0,0)",
                 "--max-degree", "8"]) == 1
    assert "non-homogeneous" in capsys.readouterr().out
    assert main(["graded", "shift-quotient", "--d", "2", "--phi", "1:(1,0,0)",
                 "--max-degree", "8"]) == 2
    assert main(["graded", "shift-quotient", "--d", "2", "--r", "2", "--phi", "1:(1,0)",
                 "--max-degree", "8"]) == 2


def test_unstabilized_flagged(capsys):
    assert main(["graded", "shift-quotient", "--d", "2", "--phi", "1:(2,0)",
                 "--max-degree", "5"]) in (0, 1)
    out = capsys.readouterr().out
    assert "stabilized:" in out


def test_determinism(diag_doc, tmp_path, monkeypatch):
    outs = []
    for i in range(2):
        rep = tmp_path / f"s{i}.json"
        tsv = tmp_path / f"s{i}.tsv"
        main(["spectrum", diag_doc, "--json", str(rep), "--seed", "7"])
        main(["scan", diag_doc, "--grid", "0:2:3", "--grid", "0:0:1", "--grid", "3:4:2",
              "--grid", "0:1:2", "--out", str(tsv), "--workers", str(1 + 3 * i)])
        outs.append((rep.read_bytes(), tsv.read_bytes()))
    assert outs[0] == outs[1]
    monkeypatch.setenv("DIRACLAB_SEED", "7")
    env_rep = tmp_path / "env.json"
    main(["spectrum", diag_doc, "--json", str(env_rep)])
    assert env_rep.read_bytes() == outs[0][0]
    monkeypatch.setenv("DIRACLAB_SEED", "seven")
    assert main(["spectrum", diag_doc]) == 2


def test_document_round_trip_bit_identical(tmp_path, rng):
    t = random_commuting_tuple(rng, 3, 2)
    path = tmp_path / "t.json"
    path.write_text(docs.dumps(docs.tuple_to_dict(t)))
    back = docs.load_document(str(path))
    for a, b in zip(t.matrices, back.matrices):
        assert np.array_equal(a, b)
    assert docs.dumps(docs.tuple_to_dict(back)) == path.read_text()
