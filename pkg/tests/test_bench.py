"""Study harness: shapes, failure handling, and byte-level determinism."""

import os

import numpy as np
import pytest

from plfc.bench import BenchConfig, run_ari_benchmark, run_cp_study
from plfc.errors import InputError


def _tree_bytes(root):
    out = {}
    for name in sorted(os.listdir(root)):
        with open(os.path.join(root, name), "rb") as fh:
            out[name] = fh.read()
    return out


def test_config_validation():
    with pytest.raises(InputError):
        BenchConfig(model=3)
    with pytest.raises(InputError):
        BenchConfig(sigmas=())
    with pytest.raises(InputError):
        BenchConfig(sigmas=(1.0, -0.5))
    with pytest.raises(InputError):
        BenchConfig(replicates=0)
    with pytest.raises(InputError):
        BenchConfig(n_curves=1)
    with pytest.raises(InputError):
        BenchConfig(seed=-1)
    with pytest.raises(InputError):
        BenchConfig(jitter="sometimes")


def test_cp_study_shapes_and_rates():
    config = BenchConfig(model=1, sigmas=(1.0,), replicates=3, k_max=8, seed=82)
    result = run_cp_study(config)
    assert result["failures"] == []
    assert len(result["freq_rows"]) == 51
    assert len(result["recovery_rows"]) == 4
    stats = result["summary"]["sigmas"]["1.0"]
    assert stats["base_positions"] == [100.0, 200.0, 300.0, 400.0]
    assert len(stats["per_truth_recovery"]) == 4
    assert all(0.0 <= r <= 1.0 for r in stats["per_truth_recovery"])
    assert 0.0 <= stats["spurious_replicate_fraction"] <= 1.0
    assert stats["failed_replicates"] == 0
    assert result["summary"]["hit_radius"] == 10.0
    assert result["summary"]["cluster"] == 3
    # frequency mass equals the mean number of estimated knots
    total = sum(f for _s, _p, f in result["freq_rows"])
    assert total == pytest.approx(stats["mean_estimated_count"])


def test_cp_study_rerun_is_byte_identical(tmp_path):
    out1, out2 = tmp_path / "one", tmp_path / "two"
    for out in (out1, out2):
        run_cp_study(
            BenchConfig(model=1, sigmas=(1.0,), replicates=3, k_max=8, seed=82,
                        out_dir=str(out))
        )
    bytes1, bytes2 = _tree_bytes(out1), _tree_bytes(out2)
    assert sorted(bytes1) == [
        "cpfailures.csv", "cpfreq.csv", "cprecovery.csv", "cpspurious.csv",
        "summary.json",
    ]
    assert bytes1 == bytes2


def test_ari_benchmark_rows_and_pairing(tmp_path):
    config = BenchConfig(
        model=1, sigmas=(1.0,), replicates=2, n_curves=12, k_max=8, seed=83,
        out_dir=str(tmp_path / "run"),
    )
    result = run_ari_benchmark(config)
    assert result["failures"] == []
    rows = result["rows"]
    assert len(rows) == 4  # 2 replicates x 2 methods
    assert {r[1] for r in rows} == {"pipeline", "raw"}
    assert all(-1.0 <= r[4] <= 1.0 for r in rows)
    stats = result["summary"]["sigmas"]["1.0"]
    assert stats["pipeline"]["n"] == 2 and stats["raw"]["n"] == 2
    for method in ("pipeline", "raw"):
        q = stats[method]
        assert q["q1"] <= q["median"] <= q["q3"]
    names = sorted(os.listdir(tmp_path / "run"))
    assert names == ["ari.csv", "failures.csv", "summary.json"]


def test_ari_benchmark_rerun_is_byte_identical(tmp_path):
    trees = []
    for name in ("one", "two"):
        out = tmp_path / name
        run_ari_benchmark(
            BenchConfig(model=2, sigmas=(1.0,), replicates=2, n_curves=12,
                        k_max=8, seed=84, out_dir=str(out))
        )
        trees.append(_tree_bytes(out))
    assert trees[0] == trees[1]


def test_replicate_draws_are_paired_across_sigma():
    config = BenchConfig(model=1, sigmas=(1.0, 5.0), replicates=2, k_max=8, seed=85)
    result = run_cp_study(config)
    s1 = result["summary"]["sigmas"]["1.0"]
    s5 = result["summary"]["sigmas"]["5.0"]
    assert s1["base_positions"] == s5["base_positions"]
    assert set(result["summary"]["sigmas"]) == {"1.0", "5.0"}
