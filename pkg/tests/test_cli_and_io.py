"""Tests covering CLI workflows and the files they exchange.

Each subcommand is driven through :func:`curvmix.scripts.cli.main` with real files in
a temporary directory, and its outputs are read back with the artifact helpers.
"""

from __future__ import annotations

import json
import os
import random
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from curvmix.scripts import cli
from curvmix.scripts.cli import main as curvmix_main
from curvmix.spectrum import EigenSpectrum
from curvmix.trainer import Dataset, make_synthetic_task
from curvmix.utils.artifacts import (
    read_gram,
    read_json,
    read_matrix,
    read_mixing,
    read_workload,
    write_json,
    write_matrix,
)
from tests.conftest import random_psd


@pytest.mark.parametrize(
    ("kind", "T", "expected"),
    (
        ("identity", 3, np.eye(3)),
        ("prefix", 2, np.array([[2.0, 1.0], [1.0, 1.0]])),
    ),
)
def test_cli_workload_baselines(
    tmp_path: Path,
    kind: str,
    T: int,  # noqa: N803
    expected: np.ndarray,
) -> None:
    """Data-independent workloads are written as CSV with a sidecar.

    Args:
        tmp_path: Pytest fixture for temporary directory.
        kind: Workload kind.
        T: Iteration count.
        expected: Known matrix.
    """
    out = tmp_path / "g.csv"
    code = curvmix_main(["workload", "--kind", kind, "--T", str(T), "--out", str(out)])
    assert code == 0
    g = read_workload(out)
    np.testing.assert_array_equal(g.entries, expected)
    assert g.kind == kind


def test_cli_optimize_band_one(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Band one needs no search: the gram matrix is the identity."""
    workload = tmp_path / "g.csv"
    gram = tmp_path / "x.csv"
    assert curvmix_main(["workload", "--kind", "prefix", "--T", "4", "--out", str(workload)]) == 0
    capsys.readouterr()
    code = curvmix_main(
        ["optimize", "--workload", str(workload), "--band", "1", "--out", str(gram)]
    )
    assert code == 0
    np.testing.assert_array_equal(read_gram(gram).entries, np.eye(4))
    report = json.loads(capsys.readouterr().out)
    assert report["converged"] is True
    assert report["objective_value"] == pytest.approx(10.0)


def test_cli_spectrum_to_noise_chain(tmp_path: Path, rng: np.random.Generator) -> None:
    """Spectrum, workload, optimize, factor and noise compose through files."""
    hess = tmp_path / "h.csv"
    write_matrix(hess, random_psd(5, rng))
    spectrum = tmp_path / "s.json"
    workload = tmp_path / "g.csv"
    gram = tmp_path / "x.csv"
    report = tmp_path / "report.json"
    mixing = tmp_path / "c.csv"
    noise = tmp_path / "z.csv"

    assert curvmix_main(["spectrum", "dense", "--matrix", str(hess), "--out", str(spectrum)]) == 0
    assert curvmix_main(["spectrum", "truncate", "--in", str(spectrum), "--out", str(spectrum)]) == 0
    assert (
        curvmix_main(
            [
                "workload",
                "--kind",
                "curvature",
                "--T",
                "6",
                "--spectrum",
                str(spectrum),
                "--eta",
                "0.2",
                "--out",
                str(workload),
            ]
        )
        == 0
    )
    assert (
        curvmix_main(
            [
                "optimize",
                "--workload",
                str(workload),
                "--band",
                "3",
                "--out",
                str(gram),
                "--report",
                str(report),
            ]
        )
        == 0
    )
    assert curvmix_main(["factor", "--gram", str(gram), "--out", str(mixing)]) == 0
    assert (
        curvmix_main(
            ["noise", "--mixing", str(mixing), "--p", "3", "--seed", "4", "--out", str(noise)]
        )
        == 0
    )

    x = read_gram(gram)
    c = read_mixing(mixing)
    assert x.band == c.band == 3
    np.testing.assert_allclose(c.gram(), x.entries, atol=1e-12)
    assert read_json(report)["converged"] is True
    draws, meta = read_matrix(noise)
    assert draws.shape == (6, 3)
    assert meta["seed"] == 4


def test_cli_noise_is_reproducible(tmp_path: Path) -> None:
    """Equal seeds give identical dumps."""
    mixing = tmp_path / "c.csv"
    write_matrix(mixing, np.eye(4), {"band": 1})
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (first, second):
        argv = ["noise", "--mixing", str(mixing), "--p", "5", "--steps", "3"]
        assert curvmix_main([*argv, "--seed", "1", "--out", str(out)]) == 0
    np.testing.assert_array_equal(read_matrix(first)[0], read_matrix(second)[0])


def test_cli_tail_fit_and_extrapolate(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """The tail fit reads a top-k spectrum and extrapolation completes it."""
    index = np.arange(1, 51, dtype=np.float64)
    values = np.exp(1.5 * (np.log(1000) - np.log(index)) ** 1.2 + np.log(1e-4))
    topk = write_json(
        tmp_path / "topk.json",
        EigenSpectrum(values=values, total_dim=2000, k_measured=50).to_dict(),
    )
    fit = tmp_path / "fit.json"
    argv = ["spectrum", "fit", "--topk", str(topk), "--p-plus", "1000", "--mu-pplus", "1e-4"]
    assert curvmix_main([*argv, "--out", str(fit)]) == 0
    assert read_json(fit)["alpha"] == pytest.approx(1.2, abs=1e-8)
    capsys.readouterr()
    argv = ["spectrum", "extrapolate", "--topk", str(topk), "--fit", str(fit), "--p", "2000"]
    assert curvmix_main(argv) == 0
    document = json.loads(capsys.readouterr().out)
    assert document["total_dim"] == 2000
    assert len(document["values"]) == 2000
    assert document["values"][999] == pytest.approx(1e-4)
    assert document["values"][1000] == 0.0


def test_cli_spectrum_lanczos_on_dataset(tmp_path: Path) -> None:
    """Lanczos runs on the Hessian of a model over a CSV dataset."""
    frame = pd.DataFrame({"x0": [1.0, 0.0, 2.0, -1.0], "x1": [0.5, 1.0, 0.0, 1.0]})
    frame["label"] = [1.0, 0.0, 1.0, 0.0]
    dataset = tmp_path / "data.csv"
    frame.to_csv(dataset, index=False)
    out = tmp_path / "s.json"
    argv = ["spectrum", "lanczos", "--dataset", str(dataset), "--model", "linear", "--k", "3"]
    assert curvmix_main([*argv, "--out", str(out)]) == 0
    design = np.column_stack([frame[["x0", "x1"]].to_numpy(), np.ones(4)])
    expected = np.sort(np.linalg.eigvalsh(design.T @ design / 4))[::-1]
    np.testing.assert_allclose(read_json(out)["values"], expected, rtol=1e-8)


@pytest.mark.parametrize(
    ("argv", "expected_code"),
    (
        (["workload", "--kind", "curvature", "--T", "3"], 2),  # missing --out
        (["workload", "--kind", "curvature", "--T", "3", "--out", "{tmp}/g.csv"], 2),
        (["factor", "--gram", "{tmp}/absent.csv", "--out", "{tmp}/c.csv"], 4),
        (["spectrum", "truncate", "--in", "{tmp}/absent.json"], 4),
        (["spectrum", "lanczos", "--k", "2"], 2),  # no operator source
    ),
)
def test_cli_error_exit_codes(
    tmp_path: Path,
    capsys: pytest.CaptureFixture[str],
    argv: list[str],
    expected_code: int,
) -> None:
    """Failures map to their documented exit code and a one-line message.

    Args:
        tmp_path: Pytest fixture for temporary directory.
        capsys: Pytest fixture capturing output.
        argv: Command line, with ``{tmp}`` standing for the temporary directory.
        expected_code: Exit status.
    """
    code = curvmix_main([arg.replace("{tmp}", str(tmp_path)) for arg in argv])
    assert code == expected_code
    assert "curvmix: error:" in capsys.readouterr().err


def test_cli_optimize_rejects_band_above_T(tmp_path: Path) -> None:  # noqa: N802
    """A band wider than the workload is an argument error."""
    workload = tmp_path / "g.csv"
    assert curvmix_main(["workload", "--kind", "identity", "--T", "2", "--out", str(workload)]) == 0
    code = curvmix_main(
        ["optimize", "--workload", str(workload), "--band", "3", "--out", str(tmp_path / "x.csv")]
    )
    assert code == 2


def test_cli_requires_subcommand() -> None:
    """Running without a subcommand is a usage error."""
    with pytest.raises(SystemExit):
        curvmix_main([])


def test_cli_train_without_noise_is_deterministic(tmp_path: Path) -> None:
    """Two noise-free runs with the same seed write identical models."""
    outputs = [tmp_path / "a", tmp_path / "b"]
    for out in outputs:
        code = curvmix_main(
            [
                "train",
                "--n",
                "200",
                "--f",
                "4",
                "--T",
                "12",
                "--band",
                "3",
                "--batch",
                "10",
                "--sigma",
                "0",
                "--seed",
                "5",
                "--out",
                str(out),
            ]
        )
        assert code == 0
    first, second = (read_json(out / "model.json") for out in outputs)
    assert first == second
    assert len(first["weights"]) == 5
    log = pd.read_csv(outputs[0] / "train_log.csv")
    assert list(log.columns) == ["step", "batch_loss", "grad_norm_mean", "clipped_fraction"]
    assert len(log) == 12
    accountant = read_json(outputs[0] / "accountant.json")
    assert accountant == {"q": pytest.approx(10 / 66), "compositions": 40, "sigma": 0.0}
    assert read_mixing(outputs[0] / "mixing.csv").band == 3


def test_cli_train_from_dataset_with_identity_design(tmp_path: Path) -> None:
    """A CSV dataset trains with the independent-noise baseline."""
    rng = np.random.default_rng(0)
    frame = pd.DataFrame(rng.standard_normal((60, 2)), columns=["x0", "x1"])
    frame["label"] = (frame["x0"] > 0).astype(float)
    dataset = tmp_path / "data.csv"
    frame.to_csv(dataset, index=False)
    out = tmp_path / "run"
    argv = ["train", "--dataset", str(dataset), "--T", "6", "--band", "2", "--batch", "5"]
    assert curvmix_main([*argv, "--design", "identity", "--out", str(out)]) == 0
    mixing = read_mixing(out / "mixing.csv")
    np.testing.assert_allclose(mixing.entries, np.eye(6), atol=1e-7)


def test_cli_simulate_and_report(tmp_path: Path) -> None:
    """The sweep covers every band and design, and the report renders it."""
    out = tmp_path / "sim"
    argv = ["simulate", "--p", "2", "--T", "4", "--eta", "0.1", "--bands", "1", "4"]
    assert curvmix_main([*argv, "--trials", "500", "--seed", "2", "--out", str(out)]) == 0
    sweep = pd.read_csv(out / "sweep.csv")
    assert sorted(sweep["band"].unique().tolist()) == [1, 4]
    assert set(sweep["workload"]) == {"curvature", "identity"}
    reports = read_json(out / "simulation.json")
    assert len(reports) == 4
    assert {"closed_form", "mc_mean", "mc_std_error", "trials", "seed", "params"} <= set(
        reports[0]
    )

    html_path = tmp_path / "report.html"
    code = curvmix_main(["report", "--input", str(out / "*.json"), "--output", str(html_path)])
    assert code == 0
    html = html_path.read_text(encoding="utf-8")
    assert "Reports: 4" in html
    assert "simulation.json[0]" in html


def _write_dataset(path: Path, seed: int, rows: int = 60) -> Path:
    rng = np.random.default_rng(seed)
    frame = pd.DataFrame(rng.standard_normal((rows, 3)), columns=["x0", "x1", "x2"])
    frame["label"] = (frame["x0"] + frame["x1"] > 0).astype(float)
    frame.to_csv(path, index=False)
    return path


@pytest.fixture
def hessian_calls(monkeypatch: pytest.MonkeyPatch) -> list[Dataset]:
    """Datasets handed to the CLI's Hessian operator, in call order."""
    calls: list[Dataset] = []
    original = cli.hessian_operator

    def recording(data: Dataset, *args: object, **kwargs: object) -> object:
        calls.append(data)
        return original(data, *args, **kwargs)  # type: ignore[arg-type]

    monkeypatch.setattr(cli, "hessian_operator", recording)
    return calls


TRAIN_ARGS = ["train", "--T", "6", "--band", "2", "--batch", "5", "--seed", "1"]


def test_cli_train_dataset_curvature_needs_public_source(
    tmp_path: Path,
    capsys: pytest.CaptureFixture[str],
    hessian_calls: list[Dataset],
) -> None:
    """A curvature design on a CSV dataset is refused without a public curvature source."""
    private = _write_dataset(tmp_path / "private.csv", 0)
    code = curvmix_main([*TRAIN_ARGS, "--dataset", str(private), "--out", str(tmp_path / "run")])
    assert code == 2
    assert "--public-dataset" in capsys.readouterr().err
    assert hessian_calls == []


def test_cli_train_curvature_from_public_dataset(
    tmp_path: Path,
    hessian_calls: list[Dataset],
) -> None:
    """Only the public dataset reaches the Hessian operator."""
    private = _write_dataset(tmp_path / "private.csv", 0)
    public = _write_dataset(tmp_path / "public.csv", 1, rows=80)
    argv = [*TRAIN_ARGS, "--dataset", str(private), "--public-dataset", str(public)]
    assert curvmix_main([*argv, "--out", str(tmp_path / "run")]) == 0
    assert len(hessian_calls) == 1
    expected = pd.read_csv(public).drop(columns=["label"]).to_numpy()
    np.testing.assert_array_equal(hessian_calls[0].features, expected)
    assert read_mixing(tmp_path / "run" / "mixing.csv").band == 2


def test_cli_train_public_dataset_feature_mismatch(tmp_path: Path) -> None:
    """Public and training data must have the same features."""
    private = _write_dataset(tmp_path / "private.csv", 0)
    public = tmp_path / "public.csv"
    pd.DataFrame({"x0": [1.0, 2.0], "label": [0.0, 1.0]}).to_csv(public, index=False)
    argv = [*TRAIN_ARGS, "--dataset", str(private), "--public-dataset", str(public)]
    assert curvmix_main([*argv, "--out", str(tmp_path / "run")]) == 2


def test_cli_train_curvature_from_spectrum_file(
    tmp_path: Path,
    hessian_calls: list[Dataset],
) -> None:
    """A precomputed spectrum replaces Hessian estimation entirely."""
    private = _write_dataset(tmp_path / "private.csv", 0)
    spectrum = write_json(
        tmp_path / "s.json",
        EigenSpectrum.from_values(np.array([0.9, 0.4, 0.1, 0.05]), source="public").to_dict(),
    )
    argv = [*TRAIN_ARGS, "--dataset", str(private), "--spectrum", str(spectrum)]
    assert curvmix_main([*argv, "--out", str(tmp_path / "run")]) == 0
    assert hessian_calls == []


def test_cli_train_synthetic_uses_public_split(
    tmp_path: Path,
    hessian_calls: list[Dataset],
) -> None:
    """Synthetic runs estimate curvature on a separate public draw."""
    argv = [*TRAIN_ARGS, "--n", "100", "--f", "3", "--public-n", "70"]
    assert curvmix_main([*argv, "--out", str(tmp_path / "run")]) == 0
    train = make_synthetic_task(100, 3, "logistic", 1)
    assert len(hessian_calls) == 1
    assert hessian_calls[0].n == 70
    assert not np.array_equal(hessian_calls[0].features[:70], train.features[:70])


def test_cli_seed_leaves_global_generators_alone(
    tmp_path: Path,
    monkeypatch: pytest.MonkeyPatch,
) -> None:
    """``--seed`` keys the noise streams and never touches process-wide RNG state."""
    monkeypatch.delenv("PYTHONHASHSEED", raising=False)
    mixing = tmp_path / "c.csv"
    write_matrix(mixing, np.eye(3), {"band": 1})
    before_numpy = np.random.get_state()[1].copy()  # noqa: NPY002
    before_stdlib = random.getstate()
    argv = ["noise", "--mixing", str(mixing), "--p", "2", "--seed", "11"]
    assert curvmix_main([*argv, "--out", str(tmp_path / "z.csv")]) == 0
    np.testing.assert_array_equal(np.random.get_state()[1], before_numpy)  # noqa: NPY002
    assert random.getstate() == before_stdlib
    assert "PYTHONHASHSEED" not in os.environ
