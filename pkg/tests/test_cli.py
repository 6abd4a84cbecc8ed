import csv
import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

SVG = "{http://www.w3.org/2000/svg}"


def cli(*args, stdin=None):
    return subprocess.run([sys.executable, "-m", "roboost.cli", *map(str, args)], input=stdin,
                          capture_output=True, text=True, timeout=600)


def _strip_elapsed(path):
    with open(path, newline="") as fh:
        return [row[:-1] for row in csv.reader(fh)]


@pytest.fixture(scope="module")
def sc_e1_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run1")
    res = cli("run", "--preset", "sc-e1", "--scale", "desk", "--seed", "42", "--trials", "2", "--out", out)
    assert res.returncode == 0, res.stderr
    return out


def test_run_preset_writes_three_files(sc_e1_run):
    for name in ("records.csv", "summary.csv", "config.resolved.json"):
        assert (sc_e1_run / name).is_file()
    rows = _strip_elapsed(sc_e1_run / "records.csv")
    assert rows[0] == ["experiment", "method", "trial", "cost", "excess_risk"]
    assert len(rows) > 1
    head = (sc_e1_run / "summary.csv").read_text().splitlines()[0]
    assert head == "experiment,method,cost,mean,sd,median,q1,q3,med_elapsed_s"
    cfg = json.loads((sc_e1_run / "config.resolved.json").read_text())
    assert cfg["master_seed"] == 42 and cfg["trials"] == 2


def test_run_is_deterministic(sc_e1_run, tmp_path):
    res = cli("run", "--preset", "sc-e1", "--seed", "42", "--trials", "2", "--out", tmp_path)
    assert res.returncode == 0, res.stderr
    assert _strip_elapsed(tmp_path / "records.csv") == _strip_elapsed(sc_e1_run / "records.csv")


def test_resolved_config_reproduces_records(sc_e1_run, tmp_path):
    res = cli("run", sc_e1_run / "config.resolved.json", "--out", tmp_path)
    assert res.returncode == 0, res.stderr
    assert _strip_elapsed(tmp_path / "records.csv") == _strip_elapsed(sc_e1_run / "records.csv")


def test_unknown_preset_exits_2(tmp_path):
    res = cli("run", "--preset", "nope", "--out", tmp_path)
    assert res.returncode == 2
    assert "nope" in res.stderr


def test_bad_config_names_field(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"methods": ["sgd"], "n": -4}))
    res = cli("run", cfg, "--out", tmp_path / "o")
    assert res.returncode == 2 and "n:" in res.stderr


def test_missing_config_file_exits_3(tmp_path):
    res = cli("run", tmp_path / "absent.json", "--out", tmp_path / "o")
    assert res.returncode == 3


def test_preset_list():
    res = cli("preset-list")
    assert res.returncode == 0
    assert len(res.stdout.splitlines()) == 9 and "sc-e1" in res.stdout


def test_estimate_examples():
    assert cli("estimate", "--method", "mean", stdin="1 2 3").stdout.strip() == "2"
    data = "0.5 3 -2 7.25 1 1 9 -4 0.125 6"
    mean = cli("estimate", "--method", "mean", stdin=data).stdout.strip()
    assert cli("estimate", "--method", "mom", "--k", "1", stdin=data).stdout.strip() == mean
    assert cli("estimate", "--method", "catoni", stdin="3.5 " * 40).stdout.strip() == "3.5"


def test_estimate_prints_twelve_digits():
    out = cli("estimate", "--method", "mean", stdin="1 1 2").stdout.strip()
    assert out == "1.33333333333"


def test_estimate_errors():
    assert cli("estimate", "--method", "mean", stdin="1 two 3").returncode == 2
    assert cli("estimate", stdin="").returncode == 2
    assert cli("estimate", "--method", "mom", "--k", "5", stdin="1 2").returncode == 2


def test_merge_demo():
    pts = "0 0\n0.1 0\n0 0.1\n100 100\n"
    res = cli("merge-demo", "--rule", "median", stdin=pts)
    assert res.returncode == 0
    assert [float(v) for v in res.stdout.split()] == [0.05, 0.05]
    res = cli("merge-demo", "--rule", "smball", stdin=pts)
    assert [float(v) for v in res.stdout.split()] in ([0, 0], [0.1, 0], [0, 0.1])
    assert cli("merge-demo", stdin="1 2\n3\n").returncode == 2


def _write_summary(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["experiment", "method", "cost", "mean", "sd", "median", "q1", "q3", "med_elapsed_s"])
        for r in rows:
            w.writerow(r)


def _polylines(svg_path):
    root = ET.parse(svg_path).getroot()
    assert root.tag == SVG + "svg"
    out = {}
    for el in root.iter(SVG + "polyline"):
        pts = [tuple(map(float, p.split(","))) for p in el.get("points").split()]
        out[el.get("data-label")] = pts
    return out


def test_plot_two_methods(tmp_path):
    rows = [["E", m, c, 10.0 / c * s, 0.1 / c, 0, 0, 0, 0] for m, s in (("sgd", 1), ("dc-sgd", 0.5))
            for c in (10, 100, 1000, 10000)]
    _write_summary(tmp_path / "s.csv", rows)
    res = cli("plot", tmp_path / "s.csv", "--out", tmp_path / "p.svg")
    assert res.returncode == 0, res.stderr
    lines = _polylines(tmp_path / "p.svg")
    assert set(lines) == {"sgd", "dc-sgd"}
    root = ET.parse(tmp_path / "p.svg").getroot()
    assert len(root.findall(SVG + "polygon")) == 2
    for pts in lines.values():
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        assert xs == sorted(xs)
        # decreasing risk moves down the page, which is increasing SVG y
        assert ys == sorted(ys)


def test_plot_real_summary(sc_e1_run, tmp_path):
    res = cli("plot", sc_e1_run / "summary.csv", "--out", tmp_path / "p.svg", "--title", "a & b")
    assert res.returncode == 0, res.stderr
    assert len(_polylines(tmp_path / "p.svg")) == 6


def test_plot_errors(tmp_path):
    _write_summary(tmp_path / "empty.csv", [])
    assert cli("plot", tmp_path / "empty.csv", "--out", tmp_path / "p.svg").returncode == 2
    (tmp_path / "cols.csv").write_text("method,cost\nsgd,1\n")
    res = cli("plot", tmp_path / "cols.csv", "--out", tmp_path / "p.svg")
    assert res.returncode == 2 and "mean" in res.stderr
    assert cli("plot", tmp_path / "absent.csv", "--out", tmp_path / "p.svg").returncode == 3


def test_verify_quick():
    res = cli("verify", "--quick")
    assert res.returncode == 0, res.stdout
    lines = res.stdout.splitlines()
    assert len(lines) == 11 and all(line.startswith("PASS") for line in lines)


def test_in_process_main_reports_exit_codes(tmp_path, capsys):
    from roboost.cli import main
    assert main(["run", "--preset", "nope", "--out", str(tmp_path)]) == 2
    assert "nope" in capsys.readouterr().err
