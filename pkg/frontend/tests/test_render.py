import csv
import json
import subprocess
import sys
from collections import Counter
from pathlib import Path

import pytest

import render_figs

ALL_FIGS = [f"fig{k}" for k in range(1, 9)]

# enough draws for every series without slowing the suite down
SAMPLES = {"fig1": 300, "fig2": 60, "fig3": 40, "fig4": 25,
           "fig5": 150, "fig6": 40, "fig7": 40, "fig8": 25}


@pytest.fixture(scope="session")
def csv_dir(tmp_path_factory) -> Path:
    """Datasets produced through the engine's public CLI, one per experiment."""
    out = tmp_path_factory.mktemp("csvs")
    for fig in ALL_FIGS:
        path = out / f"{fig}.csv"
        cmd = [sys.executable, "-m", "qofc.cli", "fig", fig[3:],
               "--samples", str(SAMPLES[fig]), "--seed", "42", "--out", str(path)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
    return out


def _csv_pairs_by_series(fig: str, path: Path):
    key = render_figs._EXPERIMENTS[fig]["series_key"]
    groups: dict = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            params = json.loads(row["param_json"])
            value = params[key] if key is not None else None
            groups.setdefault(value, []).append((float(row["tau"]), float(row["e2"])))
    return groups


@pytest.mark.parametrize("fig", ALL_FIGS)
def test_render_all_experiments(fig, csv_dir, tmp_path):
    img = tmp_path / f"{fig}.svg"
    code = render_figs.main(["--experiment", fig, "--in", str(csv_dir / f"{fig}.csv"),
                             "--out", str(img)])
    assert code == 0
    assert img.exists() and img.stat().st_size > 0
    sidecar = tmp_path / f"{fig}.points.json"
    assert sidecar.exists()

    doc = json.loads(sidecar.read_text())
    assert doc["experiment"] == fig
    want = _csv_pairs_by_series(fig, csv_dir / f"{fig}.csv")
    assert len(doc["series"]) == len(want)
    for entry in doc["series"]:
        got_pairs = Counter(zip(entry["tau"], entry["e"]))
        want_pairs = Counter(want[entry["value"]])
        assert got_pairs == want_pairs  # exactly the CSV's (tau, E) pairs


@pytest.mark.parametrize("fig", ["fig1", "fig5", "fig7"])
def test_sidecar_byte_identical_across_runs(fig, csv_dir, tmp_path):
    blobs = []
    for run in ("one", "two"):
        img = tmp_path / run / f"{fig}.png"
        img.parent.mkdir()
        assert render_figs.main(["--experiment", fig, "--in",
                                 str(csv_dir / f"{fig}.csv"), "--out", str(img)]) == 0
        blobs.append((tmp_path / run / f"{fig}.points.json").read_bytes())
    assert blobs[0] == blobs[1]


def test_curves_sorted_by_tau(csv_dir, tmp_path):
    img = tmp_path / "fig2.svg"
    render_figs.main(["--experiment", "fig2", "--in", str(csv_dir / "fig2.csv"),
                      "--out", str(img)])
    doc = json.loads((tmp_path / "fig2.points.json").read_text())
    for entry in doc["series"]:
        taus = entry["tau"]
        assert taus == sorted(taus)


def test_empty_csv_renders_empty_axes(tmp_path, capsys):
    path = tmp_path / "empty.csv"
    path.write_text("experiment,sample_index,param_json,e1,e2,tau,tau_method\n")
    img = tmp_path / "empty.svg"
    code = render_figs.main(["--experiment", "fig1", "--in", str(path), "--out", str(img)])
    captured = capsys.readouterr()
    assert code == 0
    assert "no data rows" in captured.err
    assert img.exists()
    doc = json.loads((tmp_path / "empty.points.json").read_text())
    assert doc["series"] == []


def test_missing_column_is_named(tmp_path, capsys):
    path = tmp_path / "broken.csv"
    path.write_text("experiment,sample_index,param_json,e1,tau,tau_method\n")
    code = render_figs.main(["--experiment", "fig1", "--in", str(path),
                             "--out", str(tmp_path / "broken.svg")])
    captured = capsys.readouterr()
    assert code == 1
    assert "'e2'" in captured.err


def test_experiment_mismatch_rejected(csv_dir, tmp_path, capsys):
    code = render_figs.main(["--experiment", "fig2", "--in", str(csv_dir / "fig1.csv"),
                             "--out", str(tmp_path / "x.svg")])
    assert code == 1
    assert "fig1" in capsys.readouterr().err


def test_scatter_downsamples_by_stride(tmp_path):
    path = tmp_path / "big.csv"
    n = 60_001
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(render_figs.REQUIRED_COLUMNS)
        for i in range(n):
            tau = i / n
            writer.writerow(["fig1", i, '{"b_p":0.5,"n_s":0.0,"n_i":0.0}',
                             "0", str(-tau), str(tau), "eigenvalue"])
    img = tmp_path / "big.png"
    assert render_figs.main(["--experiment", "fig1", "--in", str(path),
                             "--out", str(img)]) == 0
    doc = json.loads((tmp_path / "big.points.json").read_text())
    taus = doc["series"][0]["tau"]
    assert len(taus) <= render_figs.MAX_SCATTER_POINTS
    # stride sampling by index: every second row of the 60001
    assert taus[:3] == [0.0, 2 / n, 4 / n]


def test_unknown_experiment(capsys):
    code = render_figs.main(["--experiment", "fig9", "--in", "x.csv", "--out", "x.svg"])
    assert code == 1
    assert "fig9" in capsys.readouterr().err
