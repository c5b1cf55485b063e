import re

import pytest

from rnnkit.routes.commands import run_cli
from rnnkit.utils.data_loader import write_csv
from rnnkit.utils.pgm import read_pgm, write_pgm
from rnnkit.utils.synthetic import two_gaussians


@pytest.fixture
def gaussian_csv(tmp_path):
    X, labels = two_gaussians(count=200, dims=6, seed=1)
    path = tmp_path / "gauss.csv"
    write_csv(path, X, ["neg" if y == 0 else "pos" for y in labels])
    return path


def _train(tmp_path, csv_path, name, *extra):
    model = tmp_path / name
    code = run_cli(["train", str(csv_path), "--output", str(model), "--hidden", "20,40", *extra])
    return code, model


def test_solve_isolated_network(data_dir, capsys):
    assert run_cli(["solve", str(data_dir / "networks" / "isolated.net")]) == 0
    out = capsys.readouterr().out
    assert out.startswith("neuron  q\n")
    assert "0       0.5000000000" in out
    assert "validation=pass" in out


def test_solve_mutual_inhibition(data_dir, capsys):
    assert run_cli(["solve", str(data_dir / "networks" / "mutual_inhibition.net")]) == 0
    assert "0.3660254038" in capsys.readouterr().out


def test_usage_error_exits_one(capsys):
    assert run_cli(["solve"]) == 1
    assert capsys.readouterr().err.startswith("error[usage]:")
    assert run_cli(["frobnicate"]) == 1


def test_missing_file_exits_two(tmp_path, capsys):
    assert run_cli(["solve", str(tmp_path / "missing.net")]) == 2
    assert capsys.readouterr().err.startswith("error[parse]:")


def test_invalid_network_exits_two(tmp_path, capsys):
    path = tmp_path / "heavy.net"
    path.write_text("L = 1\nr = 1\nLambda_plus = 0.5\n[W_minus]\n2\n", encoding="utf-8")
    assert run_cli(["solve", str(path)]) == 2
    assert "row sum" in capsys.readouterr().err


def test_simulate_prints_agreement(data_dir, capsys):
    code = run_cli(["simulate", str(data_dir / "networks" / "isolated.net"), "--events", "200000", "--seed", "3"])
    assert code == 0
    out = capsys.readouterr().out
    assert "generator=PCG64" in out
    assert "seed=3" in out
    assert "PASS" in out


def test_train_is_reproducible(tmp_path, gaussian_csv, capsys):
    code_a, model_a = _train(tmp_path, gaussian_csv, "a.mlrn", "--seed", "7")
    code_b, model_b = _train(tmp_path, gaussian_csv, "b.mlrn", "--seed", "7")
    assert code_a == code_b == 0
    assert model_a.read_bytes() == model_b.read_bytes()
    out = capsys.readouterr().out
    assert "train_accuracy=" in out
    assert "test_accuracy=" in out


def test_eval_reproduces_training_accuracy(tmp_path, gaussian_csv, capsys):
    code, model = _train(tmp_path, gaussian_csv, "m.mlrn", "--test-fraction", "0")
    assert code == 0
    trained = capsys.readouterr().out
    match = re.search(r"train_accuracy=(\d\.\d{4} \(\d+/200\))", trained)
    assert match is not None
    assert "test_accuracy" not in trained

    assert run_cli(["eval", str(model), str(gaussian_csv)]) == 0
    evaluated = capsys.readouterr().out
    assert evaluated.startswith(f"accuracy={match.group(1)}\n")
    assert "confusion matrix" in evaluated


def test_predict_prints_class_names(tmp_path, gaussian_csv, capsys):
    _, model = _train(tmp_path, gaussian_csv, "m.mlrn")
    capsys.readouterr()
    assert run_cli(["predict", str(model), str(gaussian_csv)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 200
    assert set(lines) <= {"neg", "pos"}


def test_predict_with_wrong_width(tmp_path, gaussian_csv, capsys):
    _, model = _train(tmp_path, gaussian_csv, "m.mlrn")
    other = tmp_path / "narrow.csv"
    write_csv(other, [[0.1, 0.2]], ["neg"])
    assert run_cli(["predict", str(model), str(other)]) == 1
    assert "error[argument]" in capsys.readouterr().err


def test_corrupt_model_exits_two(tmp_path, gaussian_csv, capsys):
    _, model = _train(tmp_path, gaussian_csv, "m.mlrn")
    data = bytearray(model.read_bytes())
    data[20] ^= 0x01
    model.write_bytes(bytes(data))
    assert run_cli(["eval", str(model), str(gaussian_csv)]) == 2
    assert "error[model-file]: checksum" in capsys.readouterr().err


@pytest.mark.parametrize("scheme", ["single", "twin", "cluster", "relu"])
def test_conv_demo_writes_pgm(tmp_path, data_dir, rng, capsys, scheme):
    image = tmp_path / "in.pgm"
    write_pgm(image, rng.random((12, 10)))
    output = tmp_path / f"{scheme}.pgm"
    code = run_cli(
        ["conv-demo", str(image), str(data_dir / "kernels" / "vertical_edge.txt"), "--scheme", scheme, "--output", str(output)]
    )
    assert code == 0
    assert read_pgm(output).shape == (10, 8)
    out = capsys.readouterr().out
    assert f"scheme={scheme}" in out
    assert ("twin_kernel_within_bounds=true" in out) == (scheme == "twin")


def test_train_without_training_rows(tmp_path, gaussian_csv, capsys):
    code, model = _train(tmp_path, gaussian_csv, "m.mlrn", "--test-fraction", "0.999")
    assert code == 1
    assert "error[argument]: no training rows" in capsys.readouterr().err
    assert not model.exists()
