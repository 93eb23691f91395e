import json
from pathlib import Path

import distspec.cli as cli


def write_config(tmp_path, **overrides):
    doc = {
        "params": {"r": 2, "W": [[5, 1], [1, 5]], "pi": [0.5, 0.5], "n": 300},
        "ell": 3,
        "seeds": [1, 2],
        "matrix": "distance",
        "gammas": [],
    }
    doc.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path


def read_rows(path):
    lines = Path(path).read_text().splitlines()
    assert lines[0] == cli.CSV_VERSION
    assert lines[1] == cli.CSV_HEADER
    return [ln for ln in lines[2:] if not ln.startswith("#")]


def strip_timings(row):
    return row.split(",")[:-3]


class TestGenerate:
    def test_writes_graph_json(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "g.json"
        assert cli.main(["generate", "--config", str(cfg), "--seed", "1",
                         "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert set(doc) == {"n", "r", "seed", "types", "edges"}
        assert doc["n"] == 300 and doc["seed"] == 1
        assert all(u < v for u, v in doc["edges"])

    def test_byte_identical_per_seed(self, tmp_path):
        cfg = write_config(tmp_path)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        cli.main(["generate", "--config", str(cfg), "--seed", "7", "--out", str(a)])
        cli.main(["generate", "--config", str(cfg), "--seed", "7", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_zero_connectivity(self, tmp_path):
        cfg = write_config(tmp_path, params={"r": 2, "W": [[0, 0], [0, 0]],
                                             "pi": [0.5, 0.5], "n": 40})
        out = tmp_path / "empty.json"
        cli.main(["generate", "--config", str(cfg), "--seed", "3", "--out", str(out)])
        assert json.loads(out.read_text())["edges"] == []


class TestDetect:
    def test_assignment_and_record(self, tmp_path):
        cfg = write_config(tmp_path)
        graph = tmp_path / "g.json"
        cli.main(["generate", "--config", str(cfg), "--seed", "1", "--out", str(graph)])
        out = tmp_path / "assignment.json"
        csv = tmp_path / "rows.csv"
        assert cli.main(["detect", str(graph), "--config", str(cfg),
                         "--out", str(out), "--csv", str(csv)]) == 0
        doc = json.loads(out.read_text())
        assert set(doc) >= {"labels", "overlap", "perm", "K", "lambdas"}
        assert len(doc["labels"]) == 300
        assert len(read_rows(csv)) == 1

    def test_same_seed_identical_rows(self, tmp_path):
        cfg = write_config(tmp_path)
        graph = tmp_path / "g.json"
        cli.main(["generate", "--config", str(cfg), "--seed", "2", "--out", str(graph)])
        rows = []
        for name in ("r1.csv", "r2.csv"):
            csv = tmp_path / name
            cli.main(["detect", str(graph), "--config", str(cfg),
                      "--out", str(tmp_path / "a.json"), "--csv", str(csv)])
            rows.append(strip_timings(read_rows(csv)[0]))
        assert rows[0] == rows[1]


class TestPerturb:
    def test_writes_edit_list(self, tmp_path):
        cfg = write_config(tmp_path)
        graph = tmp_path / "g.json"
        cli.main(["generate", "--config", str(cfg), "--seed", "1", "--out", str(graph)])
        out = tmp_path / "gp.json"
        pout = tmp_path / "p.json"
        assert cli.main(["perturb", str(graph), "--gamma", "4", "--seed", "9",
                         "--out", str(out), "--perturbation-out", str(pout)]) == 0
        pdoc = json.loads(pout.read_text())
        assert pdoc["gamma"] == 4
        gdoc = json.loads(out.read_text())
        base = json.loads(graph.read_text())
        assert len(gdoc["edges"]) == len(base["edges"]) + len(pdoc["add"])


class TestSweep:
    def test_empty_gamma_grid_gives_baseline_rows(self, tmp_path):
        cfg = write_config(tmp_path, gammas=[])
        out = tmp_path / "sweep.csv"
        assert cli.main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
        rows = read_rows(out)
        assert len(rows) == 2  # one per seed
        assert all(row.split(",")[4] == "0" for row in rows)

    def test_grid_row_count_and_order(self, tmp_path):
        cfg = write_config(tmp_path, gammas=[0, 1, 2], seeds=[1, 2])
        out = tmp_path / "sweep.csv"
        cli.main(["sweep", "--config", str(cfg), "--out", str(out)])
        rows = read_rows(out)
        assert len(rows) == 6
        key = [(int(r.split(",")[0]), int(r.split(",")[4])) for r in rows]
        assert key == [(1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)]

    def test_rows_regenerate_identically(self, tmp_path):
        cfg = write_config(tmp_path, gammas=[0, 2], seeds=[3])
        out1, out2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
        cli.main(["sweep", "--config", str(cfg), "--out", str(out1)])
        cli.main(["sweep", "--config", str(cfg), "--out", str(out2)])
        rows1 = [strip_timings(r) for r in read_rows(out1)]
        rows2 = [strip_timings(r) for r in read_rows(out2)]
        assert rows1 == rows2


class TestVerify:
    def test_oracles_suite_passes(self, capsys):
        assert cli.main(["verify", "oracles"]) == 0
        out = capsys.readouterr().out
        assert "PASS oracles.distance_matrix_matches_apsp" in out
        assert "FAIL" not in out

    def test_bounds_suite_passes(self, capsys):
        assert cli.main(["verify", "bounds"]) == 0
        assert "FAIL" not in capsys.readouterr().out


class TestGwCommand:
    def test_writes_records(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "gw.json"
        assert cli.main(["gw", "--config", str(cfg), "--runs", "20000",
                         "--out", str(out)]) == 0
        records = json.loads(out.read_text())
        names = {rec["statistic"] for rec in records}
        assert {"variance_sum", "mean", "cumulant_relation_order2"} <= names
        for rec in records:
            assert set(rec) == {"statistic", "estimate", "stderr",
                                "closed_form", "residual"}
