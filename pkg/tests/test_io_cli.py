import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from tririg.cli import main, substream_seed
from tririg.composition import octahedron_unit, random_chained_octahedra
from tririg.errors import ParseError, SelfLoop
from tririg.graph import complete_graph, format_edge_list, graph_label, octahedron
from tririg.io import atomic_write, graph_doc, parse_graph_doc, partition_doc, read_graph, write_json
from tririg.partition import exact_cover_partition


def write_doc(path, pf=None, **kw):
    pf = pf or octahedron_unit(0)
    write_json(path, graph_doc(pf.graph, pf.positions, pf.partition, **kw))
    return path


@pytest.fixture
def octa_txt(tmp_path):
    p = tmp_path / "octa.txt"
    p.write_text(format_edge_list(octahedron()))
    return p


# --- file formats ----------------------------------------------------------

def test_graph_doc_round_trip(tmp_path):
    pf = octahedron_unit(1)
    path = write_doc(tmp_path / "g.json", pf)
    g, pos, part = read_graph(path)
    assert g == pf.graph
    np.testing.assert_array_equal(pos, pf.positions)
    assert part.key == pf.partition.key


def test_edge_list_text(octa_txt):
    g, pos, part = read_graph(octa_txt)
    assert g == octahedron() and pos is None and part is None


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_graph_doc({"n": 3})
    with pytest.raises(ParseError):
        parse_graph_doc({"n": 3, "edges": [[0, 1]], "positions": [[0, 0, 0]]})
    with pytest.raises(ParseError):
        parse_graph_doc({"n": 3, "edges": [[0, 1]], "version": 7})
    with pytest.raises(SelfLoop):
        parse_graph_doc({"n": 3, "edges": [[1, 1]]})
    with pytest.raises(ParseError):
        parse_graph_doc({"n": 4, "edges": [[0, 1], [1, 2], [0, 2], [2, 3]], "partition": [[0, 1, 3]]})


def test_partition_doc_sorted():
    g = octahedron()
    parts = exact_cover_partition(g, find_all=True)
    doc = partition_doc(g, parts[::-1])
    assert doc == partition_doc(g, parts)
    assert doc["graph_label"] == graph_label(g) and len(doc["partitions"]) == 2


def test_atomic_write_leaves_no_temp(tmp_path):
    p = atomic_write(tmp_path / "sub" / "x.txt", "hello")
    assert p.read_text() == "hello"
    atomic_write(p, b"bye")
    assert p.read_text() == "bye"
    assert os.listdir(p.parent) == ["x.txt"]


def test_substream_seeds_differ():
    assert substream_seed(0, "embedding") == substream_seed(0, "embedding")
    assert substream_seed(0, "embedding") != substream_seed(0, "chain")
    assert substream_seed(0, "chain", 9, 0) != substream_seed(0, "chain", 9, 1)


# --- partition -------------------------------------------------------------

@pytest.mark.parametrize("method", ["cover", "exhaustive", "end2end"])
def test_cli_partition_octahedron(octa_txt, capsys, method):
    assert main(["partition", str(octa_txt), "--method", method, "--all"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["partitions"]) == 2


@pytest.mark.parametrize("method", ["cover", "exhaustive", "end2end"])
def test_cli_partition_k4(tmp_path, capsys, method):
    p = tmp_path / "k4.txt"
    p.write_text(format_edge_list(complete_graph(4)))
    assert main(["partition", str(p), "--method", method]) == 1
    err = capsys.readouterr().err
    assert "necessary condition failed" in err and "odd" in err


def test_cli_partition_budget_exit(tmp_path, capsys):
    big = random_chained_octahedra(297, seed=0)
    path = write_json(tmp_path / "big.json", graph_doc(big.graph))
    out = tmp_path / "res.json"
    assert main(["partition", str(path), "--method", "exhaustive", "--out", str(out)]) == 2
    assert "BudgetExceeded" in capsys.readouterr().err
    assert not out.exists()
    # the exact-cover solver handles the same file
    assert main(["partition", str(path), "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())["partitions"]) == 1
    manifest = json.loads((tmp_path / "res.json.manifest.json").read_text())
    assert manifest["command"] == "partition" and str(path) in manifest["inputs"]


def test_cli_bad_input(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 1\n")
    assert main(["partition", str(bad)]) == 3
    assert main(["partition", str(tmp_path / "missing.txt")]) == 3
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["partition", str(tmp_path / "bad.json")]) == 3


# --- compose ---------------------------------------------------------------

def test_cli_compose_two_octahedra(tmp_path, capsys):
    a = write_doc(tmp_path / "a.json", octahedron_unit(0))
    b = write_doc(tmp_path / "b.json", octahedron_unit(1))
    tri1 = octahedron_unit(0).partition.key[0]
    tri2 = octahedron_unit(1).partition.key[0]
    args = ["compose", str(a), str(b), "--tri1", ",".join(map(str, tri1)), "--tri2", ",".join(map(str, tri2))]
    assert main(args + ["--affine"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n"] == 9 and len(doc["edges"]) == 21
    assert doc["rigidity"]["rank"] == 21 and doc["rigidity"]["rigid"]
    assert len(doc["partition"]) == 7


def test_cli_compose_not_congruent(tmp_path, capsys):
    pf = octahedron_unit(0)
    a = write_doc(tmp_path / "a.json", pf)
    b = write_doc(tmp_path / "b.json", type(pf)(pf.framework.with_positions(2 * pf.positions), pf.partition))
    tri = ",".join(map(str, pf.partition.key[0]))
    out = tmp_path / "c.json"
    assert main(["compose", str(a), str(b), "--tri1", tri, "--tri2", tri, "--out", str(out)]) == 3
    assert "NotCongruent" in capsys.readouterr().err
    assert not out.exists()


def test_cli_compose_chain_of_four(tmp_path):
    unit = write_doc(tmp_path / "unit.json")
    anchor = ",".join(map(str, octahedron_unit(0).partition.key[0]))
    cur = write_doc(tmp_path / "chain0.json")
    for k in range(1, 4):
        doc = json.loads(cur.read_text())
        tri = ",".join(map(str, doc["partition"][-1]))
        nxt = tmp_path / f"chain{k}.json"
        argv = ["compose", str(cur), str(unit), "--tri1", tri, "--tri2", anchor, "--affine", "--out", str(nxt)]
        assert main(argv) == 0
        cur = nxt
    doc = json.loads(cur.read_text())
    assert doc["n"] == 15 and len(doc["edges"]) == 3 * 15 - 6
    assert doc["rigidity"]["rigid"]
    assert len(doc["partition"]) == 13


# --- embed -----------------------------------------------------------------

def test_cli_embed(octa_txt, tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"e{k}.json"
        assert main(["embed", str(octa_txt), "--trials", "200", "--seed", "7", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["rigidity"]["rigid"] and doc["wcr"] > 0
    assert np.asarray(doc["positions"]).shape == (6, 3)
    other = tmp_path / "e_other.json"
    main(["embed", str(octa_txt), "--trials", "200", "--seed", "8", "--out", str(other)])
    assert other.read_bytes() != outs[0]


# --- enumerate -------------------------------------------------------------

def test_cli_enumerate_deterministic(tmp_path, capsys):
    dirs = [tmp_path / "c1", tmp_path / "c2"]
    for d in dirs:
        assert main(["enumerate", "--n-max", "7", "--trials", "10", "--out", str(d)]) == 0
    files = sorted(p.name for p in dirs[0].iterdir())
    assert files == sorted(p.name for p in dirs[1].iterdir())
    assert "manifest.json" in files and "table1.json" in files
    for name in files:
        if name != "manifest.json":
            assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()
    table = json.loads((dirs[0] / "table1.json").read_text())
    rows = {r["nodes"]: (r["mr_graphs"], r["satisfy_nc"], r["partitions"]) for r in table["rows"]}
    assert rows == {6: (4, 1, 2), 7: (26, 2, 1)}
    assert table["unpartitionable"]["7"] == [259903]
    entry = json.loads((dirs[0] / "454463.json").read_text())
    assert entry["canonical_label"] == 454463 and entry["rigidity"]["rigid"]


def test_cli_enumerate_six(tmp_path, capsys):
    assert main(["enumerate", "--n-max", "6", "--trials", "5", "--out", str(tmp_path / "c")]) == 0
    rows = json.loads((tmp_path / "c" / "table1.json").read_text())["rows"]
    assert rows == [{"nodes": 6, "mr_graphs": 4, "satisfy_nc": 1, "partitions": 2}]


# --- workspace -------------------------------------------------------------

def test_cli_workspace(tmp_path, capsys):
    src = write_doc(tmp_path / "octa.json")
    base = ["workspace", str(src), "--node", "4", "--base", "0,1,3", "--targets", "12", "--dt", "0.02"]
    assert main(base + ["--out", str(tmp_path / "w1")]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["nv"] > 0 and summary["l_max"] == pytest.approx(1.0)
    assert main(base + ["--jobs", "2", "--out", str(tmp_path / "w2")]) == 0
    for name in ("reached.csv", "summary.json", "mesh.obj"):
        assert (tmp_path / "w1" / name).read_bytes() == (tmp_path / "w2" / name).read_bytes()
    with open(tmp_path / "w1" / "reached.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["target_idx", "tx", "ty", "tz", "rx", "ry", "rz", "steps", "reason"]
    assert len(rows) == 12
    obj = (tmp_path / "w1" / "mesh.obj").read_text().splitlines()
    assert sum(line.startswith("v ") for line in obj) == 12
    assert sum(line.startswith("f ") for line in obj) == 20


def test_cli_workspace_bad_base(tmp_path, capsys):
    src = write_doc(tmp_path / "octa.json")
    assert main(["workspace", str(src), "--node", "0", "--base", "0,1,3", "--targets", "4"]) == 3


# --- bench -----------------------------------------------------------------

def test_cli_bench(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    argv = ["bench", "--sizes", "9,18", "--reps", "2", "--methods", "cover,exhaustive,end2end", "--out", str(out)]
    assert main(argv) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 * 2 * 3
    status = {(int(r["size"]), r["method"]): r["status"] for r in rows}
    assert status[(9, "exhaustive")] == "ok" and status[(18, "exhaustive")] == "oom"
    assert status[(18, "cover")] == "ok" and status[(18, "end2end")] == "ok"
    summary = (tmp_path / "bench_summary.csv").read_text().splitlines()
    assert summary[0] == "size,method,median,min,max,ok,timeout,oom"
    assert len(summary) == 1 + 6


def test_cli_bench_range_and_bad_method(capsys):
    from tririg.cli import _sizes

    assert _sizes("9:21:6") == [9, 15, 21]
    with pytest.raises(SystemExit):
        main(["bench", "--methods", "magic"])


def test_console_script(octa_txt):
    res = subprocess.run(
        [sys.executable, "-m", "tririg.cli", "partition", str(octa_txt), "--all"],
        capture_output=True, text=True,
    )
    assert res.returncode == 0
    assert len(json.loads(res.stdout)["partitions"]) == 2
