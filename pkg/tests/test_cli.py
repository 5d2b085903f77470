from __future__ import annotations

import json

import pytest

from shotgun.cli import main
from shotgun.graph_core import prism_graph, read_graph, write_graph


@pytest.fixture
def graph_file(tmp_path):
    p = tmp_path / "g.txt"
    assert main(["sample", "--n", "300", "--d", "3", "--seed", "2", "--out", str(p)]) == 0
    return p


def test_sample_stdout(capsys):
    assert main(["sample", "--n", "10", "--d", "3", "--seed", "1"]) == 0
    assert capsys.readouterr().out.startswith("10 3\n")


def test_invalid_input_exit_code(tmp_path, capsys):
    assert main(["sample", "--n", "5", "--d", "3"]) == 2
    assert main(["explore", "--graph", str(tmp_path / "missing.txt"), "--source", "0",
                 "--radius", "2"]) == 2
    assert "error" in capsys.readouterr().err


def test_explore_and_cyclestruct(graph_file, tmp_path, capsys):
    assert main(["explore", "--graph", str(graph_file), "--source", "0", "--radius", "3"]) == 0
    dag = json.loads(capsys.readouterr().out)
    assert dag["sources"] == [0]
    out = tmp_path / "c.json"
    assert main(["cyclestruct", "--graph", str(graph_file), "--source", "0", "--radius", "4",
                 "--out", str(out)]) == 0
    assert main(["structprob", "--struct", str(out), "--n", "300", "--approx"]) == 0
    approx = json.loads(capsys.readouterr().out)
    assert approx["probability"] > 0


def test_deck_assemble_round_trip(graph_file, tmp_path, capsys):
    assert main(["types-distinct", "--graph", str(graph_file), "--radius", "1"]) == 1
    capsys.readouterr()
    for R in range(2, 12):
        if main(["types-distinct", "--graph", str(graph_file), "--radius", str(R)]) == 0:
            break
    capsys.readouterr()
    deck = tmp_path / "deck.txt"
    assert main(["deck", "--graph", str(graph_file), "--radius", str(R + 1), "--out", str(deck),
                 "--pieces"]) == 0
    out = tmp_path / "g2.txt"
    assert main(["assemble", "--deck", str(deck), "--out", str(out)]) == 0
    assert read_graph(out).edge_multiset() == read_graph(graph_file).edge_multiset()
    assert main(["deck", "--graph", str(graph_file), "--radius", "2", "--out",
                 str(tmp_path / "codes.txt")]) == 0
    assert main(["certify-asym", "--graph", str(graph_file), "--radius", str(R)]) == 0
    assert main(["certify-asym", "--graph", str(graph_file), "--radius", "1"]) == 1


def test_ambiguous_assembly(tmp_path):
    p = tmp_path / "prism.txt"
    write_graph(prism_graph(), p)
    deck = tmp_path / "deck.txt"
    assert main(["deck", "--graph", str(p), "--radius", "3", "--out", str(deck), "--pieces"]) == 0
    assert main(["assemble", "--deck", str(deck), "--out", str(tmp_path / "x.txt")]) == 1


def test_plant_switch_verify(tmp_path, capsys):
    g = tmp_path / "g.txt"
    main(["sample", "--n", "2000", "--d", "3", "--seed", "1", "--out", str(g)])
    G = tmp_path / "G.txt"
    w = tmp_path / "w.json"
    assert main(["plant", "--graph", str(g), "--radius", "4", "--out", str(G),
                 "--witness-out", str(w)]) == 0
    Gp = tmp_path / "Gp.txt"
    assert main(["switch", "--graph", str(G), "--witness", str(w), "--out", str(Gp)]) == 0
    assert main(["verify-deck", "--g", str(G), "--gprime", str(Gp), "--radius", "3"]) == 0
    capsys.readouterr()
    assert main(["verify-deck", "--g", str(G), "--gprime", str(Gp), "--radius", "4"]) == 1
    res = json.loads(capsys.readouterr().out)
    assert not res["equal"] and res["differing"]
    (tmp_path / "bad.json").write_text('{"roots": [0, 1], "u": [0, 5, 6, 7], "v": [1, 2, 3, 4], "radius": 3}')
    assert main(["switch", "--graph", str(G), "--witness", str(tmp_path / "bad.json")]) == 2


def test_certify_noniso(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    main(["sample", "--n", "300", "--d", "3", "--seed", "1", "--out", str(a)])
    main(["sample", "--n", "300", "--d", "3", "--seed", "2", "--out", str(b)])
    assert main(["certify-noniso", "--graph-g", str(a), "--graph-h", str(b), "--radius", "5"]) == 0
    assert main(["certify-noniso", "--graph-g", str(a), "--graph-h", str(a), "--radius", "5"]) == 1


def test_scan_and_collisions(tmp_path):
    out = tmp_path / "scan.csv"
    assert main(["scan", "--n", "200", "--d", "3", "--samples", "2", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 3
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": [300], "d": [3], "r_policy": "plus", "samples": 20,
                               "sources": [1, 2]}))
    out2 = tmp_path / "col.csv"
    assert main(["collisions", "--config", str(cfg), "--radii", "1", "2", "--out", str(out2)]) == 0
    assert len(out2.read_text().splitlines()) == 5
    assert main(["scan", "--n", "201", "--d", "3", "--samples", "1"]) == 2
