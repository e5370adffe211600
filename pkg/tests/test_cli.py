import json
import math

import numpy as np
import pytest

from barcode_metrics import EmbeddingSet, barcode_metrics, save_embeddings
from barcode_metrics.cli import main


@pytest.fixture()
def toy_pair(tmp_path):
    rng = np.random.default_rng(0)
    real = rng.normal(size=(12, 4))
    fake = rng.normal(size=(10, 4)) + 0.25
    real_path = tmp_path / "real.npy"
    fake_path = tmp_path / "fake.npy"
    save_embeddings(EmbeddingSet(real), real_path)
    save_embeddings(EmbeddingSet(fake), fake_path)
    return real, fake, str(real_path), str(fake_path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_compute_json_matches_library(toy_pair, capsys):
    real, fake, real_path, fake_path = toy_pair
    code, out, err = run_cli(capsys, "compute", real_path, fake_path,
                             "--metrics", "barcode,prdc,fid", "--k", "3")
    assert code == 0 and err == ""
    report = json.loads(out)
    direct = barcode_metrics(real, fake)
    assert report["barcode"]["fidelity_pq"] == direct.fidelity_pq
    assert report["barcode"]["relative_diversity"] == direct.relative_diversity
    assert report["prdc"]["k"] == 3
    assert isinstance(report["fid"], float)
    assert report["inputs"]["real"]["rows"] == 12
    assert len(report["inputs"]["real"]["digest"]) == 16


def test_compute_reports_are_deterministic_outside_timing(toy_pair, capsys):
    _, _, real_path, fake_path = toy_pair
    outputs = []
    for _ in range(2):
        code, out, _ = run_cli(capsys, "compute", real_path, fake_path,
                               "--metrics", "barcode", "--seed", "7")
        assert code == 0
        doc = json.loads(out)
        doc.pop("timing")
        outputs.append(json.dumps(doc, sort_keys=True))
    assert outputs[0] == outputs[1]


def test_compute_csv_format(toy_pair, capsys):
    _, _, real_path, fake_path = toy_pair
    code, out, _ = run_cli(capsys, "compute", real_path, fake_path,
                           "--format", "csv")
    assert code == 0
    assert out.startswith("key,value")
    assert "barcode.fidelity_pq," in out


def test_compute_with_projection_full_dimension(toy_pair, capsys):
    _, _, real_path, fake_path = toy_pair
    code, out, _ = run_cli(capsys, "compute", real_path, fake_path, "--dims", "4")
    assert code == 0
    report = json.loads(out)
    assert report["projection"]["dims"] == 4
    assert report["projection"]["explainability"] == 1.0


def test_compute_writes_file(toy_pair, capsys, tmp_path):
    _, _, real_path, fake_path = toy_pair
    out_path = tmp_path / "report.json"
    code, out, _ = run_cli(capsys, "compute", real_path, fake_path,
                           "--out", str(out_path))
    assert code == 0 and out == ""
    assert json.loads(out_path.read_text())["barcode"]["convention"] == "survival"


def test_compute_self_comparison_semantics(toy_pair, capsys):
    real, _, real_path, _ = toy_pair
    code, out, _ = run_cli(capsys, "compute", real_path, real_path)
    assert code == 0
    report = json.loads(out)
    direct = barcode_metrics(real, real)
    assert report["barcode"]["relative_fidelity"] == direct.relative_fidelity
    assert report["barcode"]["fidelity_pq"] > report["barcode"]["fidelity_pp"]


def test_include_self_pairs_flag_plumbs_through(toy_pair, capsys):
    real, fake, real_path, fake_path = toy_pair
    code, out, _ = run_cli(capsys, "compute", real_path, fake_path,
                           "--include-self-pairs")
    assert code == 0
    report = json.loads(out)
    assert report["engine"]["include_self_pairs"] is True
    direct = barcode_metrics(real, fake, include_self_pairs=True)
    assert report["barcode"]["fidelity_pp"] == direct.fidelity_pp


def test_shape_mismatch_exit_66(tmp_path, capsys):
    a = tmp_path / "a.npy"
    b = tmp_path / "b.npy"
    save_embeddings(EmbeddingSet(np.ones((3, 2))), a)
    save_embeddings(EmbeddingSet(np.ones((3, 3))), b)
    code, _, err = run_cli(capsys, "compute", str(a), str(b))
    assert code == 66
    assert err.startswith("error:shape:")


def test_nan_data_exit_65(tmp_path, capsys):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    a.write_text("1,2\n3,nan\n")
    b.write_text("1,2\n3,4\n")
    code, _, err = run_cli(capsys, "compute", str(a), str(b))
    assert code == 65
    assert err.startswith("error:data:")


def test_malformed_npy_exit_65(tmp_path, capsys):
    bad = tmp_path / "bad.npy"
    bad.write_bytes(b"not an npy file")
    ok = tmp_path / "ok.npy"
    save_embeddings(EmbeddingSet(np.ones((2, 2))), ok)
    code, _, err = run_cli(capsys, "compute", str(bad), str(ok))
    assert code == 65
    assert err.startswith("error:format:")


def test_bad_parameter_exit_64(toy_pair, capsys):
    _, _, real_path, fake_path = toy_pair
    code, _, err = run_cli(capsys, "compute", real_path, fake_path,
                           "--metrics", "prdc", "--k", "99")
    assert code == 64
    assert err.startswith("error:parameter:")


@pytest.mark.parametrize("flag", ["", "barcode,entropy"])
def test_bad_metric_lists_exit_64(toy_pair, capsys, flag):
    _, _, real_path, fake_path = toy_pair
    code, _, err = run_cli(capsys, "compute", real_path, fake_path,
                           "--metrics", flag)
    assert code == 64
    assert err.startswith("error:parameter:")


def test_usage_error_exit_64(toy_pair):
    _, _, real_path, fake_path = toy_pair
    with pytest.raises(SystemExit) as exc:
        main(["compute", real_path, fake_path, "--no-such-flag"])
    assert exc.value.code == 64


def test_missing_file_maps_to_io_code(capsys, tmp_path):
    code, _, err = run_cli(capsys, "compute", str(tmp_path / "nope.npy"),
                           str(tmp_path / "nope2.npy"))
    assert code == 74
    assert err.startswith("error:io:")


def test_capacity_exit_69(toy_pair, capsys):
    _, _, real_path, fake_path = toy_pair
    code, _, err = run_cli(capsys, "barcode-plot", real_path, fake_path,
                           "--exact-limit", "4")
    assert code == 69
    assert err.startswith("error:capacity:")


def test_barcode_plot_csv_matches_curve_example(tmp_path, capsys):
    real = tmp_path / "real.csv"
    fake = tmp_path / "fake.csv"
    real.write_text("0,0\n1,0\n")
    fake.write_text("0,1\n")
    out_csv = tmp_path / "curve.csv"
    code, _, _ = run_cli(capsys, "barcode-plot", str(real), str(fake),
                         "--resolution", "3", "--csv", str(out_csv))
    assert code == 0
    lines = out_csv.read_text().strip().splitlines()
    assert lines[0] == "lambda_norm,below_fraction,alive_fraction"
    rows = [tuple(float(c) for c in line.split(",")) for line in lines[1:]]
    assert rows == [(0.0, 0.0, 1.0), (0.5, 0.0, 1.0), (1.0, 1.0, 0.0)]


def test_barcode_plot_svg(toy_pair, capsys, tmp_path):
    _, _, real_path, fake_path = toy_pair
    svg_path = tmp_path / "curve.svg"
    code, _, _ = run_cli(capsys, "barcode-plot", real_path, fake_path,
                         "--svg", str(svg_path), "--curve", "alive")
    assert code == 0
    text = svg_path.read_text()
    assert text.startswith("<svg")
    assert "polyline" in text and "alive" in text


def test_barcode_plot_default_stdout(toy_pair, capsys):
    _, _, real_path, fake_path = toy_pair
    code, out, _ = run_cli(capsys, "barcode-plot", real_path, fake_path,
                           "--resolution", "5")
    assert code == 0
    assert out.startswith("lambda_norm")
    assert len(out.strip().splitlines()) == 6


def test_experiment_end_to_end(tmp_path, capsys):
    spec = tmp_path / "pair.json"
    spec.write_text(json.dumps({
        "kind": "gaussian_pair",
        "seed": 3,
        "parameters": {"n": 24, "d": 6, "metrics": ["barcode", "prdc"], "k": 3},
    }))
    out_dir = tmp_path / "results"
    code, out, _ = run_cli(capsys, "experiment", str(spec), "--out", str(out_dir))
    assert code == 0
    rows = (out_dir / "pair.rows.csv").read_text().strip().splitlines()
    assert rows[0] == "sweep_point,metric,value,rep,seed"
    summary = json.loads((out_dir / "pair.summary.json").read_text())
    assert summary["provenance"]["seed"] == 3
    assert "fidelity_pq" in summary["summary"]["baseline"]


def test_experiment_bad_spec_exit_65(tmp_path, capsys):
    spec = tmp_path / "bad.json"
    spec.write_text('{"kind": "gaussian_pair", "parameters": {"n": 1, "d": 2}}')
    code, _, err = run_cli(capsys, "experiment", str(spec))
    assert code == 65
    assert err.startswith("error:config:")


def test_project_round_trip(tmp_path, capsys):
    rng = np.random.default_rng(5)
    real = rng.normal(size=(10, 3))
    fake = rng.normal(size=(9, 3))
    rp, fp = tmp_path / "r.npy", tmp_path / "f.npy"
    save_embeddings(EmbeddingSet(real), rp)
    save_embeddings(EmbeddingSet(fake), fp)
    out_r, out_f = tmp_path / "r2.npy", tmp_path / "f2.npy"
    code, out, _ = run_cli(capsys, "project", str(rp), str(fp), "--dims", "2",
                           "--out-real", str(out_r), "--out-fake", str(out_f),
                           "--model", str(tmp_path / "model"))
    assert code == 0
    info = json.loads(out)
    assert info["dims"] == 2
    from barcode_metrics import load_embeddings
    assert load_embeddings(out_r).data.shape == (10, 2)
    assert (tmp_path / "model.basis.npy").exists()
    assert (tmp_path / "model.singular_values.npy").exists()