import numpy as np
import pytest

from tmda import SynthConfig, generate_synthetic, read_labels, read_matrix
from tmda.cli import main
from tmda.data import write_labels, write_matrix
from tmda.experiments import read_results


SMALL = dict(n_manifolds=2, ambient_dim=12, manifold_dim=3, points_per_manifold=10)


@pytest.fixture
def task_files(tmp_path):
    task = generate_synthetic(SynthConfig(**SMALL, seed=9))
    paths = {
        "sx": tmp_path / "sx.txt",
        "sy": tmp_path / "sy.txt",
        "tx": tmp_path / "tx.txt",
        "ty": tmp_path / "ty.txt",
    }
    write_matrix(paths["sx"], task.source)
    write_labels(paths["sy"], task.source.labels)
    write_matrix(paths["tx"], task.target)
    write_labels(paths["ty"], task.target_labels)
    return task, paths


def small_config_text(tmp_path, methods="nt,m3d:linear", reps=1):
    return "\n".join(
        [
            "synth.n_manifolds = 2",
            "synth.ambient_dim = 12",
            "synth.manifold_dim = 3",
            "synth.points_per_manifold = 10",
            "tmda.subspace_dim = 4",
            "tmda.n_manifolds = 2",
            "tmda.max_outer = 2",
            "tmda.admm.max_iter = 50",
            f"repetitions = {reps}",
            f"methods = {methods}",
            f"out = {tmp_path / 'results.txt'}",
            "seed = 4",
            "",
        ]
    )


def test_generate_writes_task(tmp_path, capsys):
    out = tmp_path / "task"
    code = main(["--seed", "5", "--out", str(out), "generate"])
    assert code == 0
    source = read_matrix(out / "source_x.txt")
    assert source.X.shape == (100, 200)
    labels = read_labels(out / "source_y.txt")
    assert labels.shape == (200,)
    regenerated = generate_synthetic(SynthConfig(seed=5))
    assert np.array_equal(source.X, regenerated.source.X)


def test_fit_transform_evaluate_pipeline(tmp_path, task_files, capsys):
    task, paths = task_files
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(small_config_text(tmp_path))
    model_path = tmp_path / "model.txt"
    code = main(
        [
            "--config",
            str(cfg),
            "--out",
            str(model_path),
            "fit",
            "--source",
            str(paths["sx"]),
            "--source-labels",
            str(paths["sy"]),
            "--target",
            str(paths["tx"]),
        ]
    )
    assert code == 0
    assert model_path.exists()

    embedded = tmp_path / "embedded.txt"
    code = main(
        [
            "--out",
            str(embedded),
            "transform",
            "--model",
            str(model_path),
            "--input",
            str(paths["tx"]),
        ]
    )
    assert code == 0
    emb = read_matrix(embedded)
    assert emb.X.shape == (4, task.target.n)

    emb_train = tmp_path / "emb_train.txt"
    main(
        [
            "--out",
            str(emb_train),
            "transform",
            "--model",
            str(model_path),
            "--input",
            str(paths["sx"]),
        ]
    )
    code = main(
        [
            "evaluate",
            "--train",
            str(emb_train),
            "--train-labels",
            str(paths["sy"]),
            "--test",
            str(embedded),
            "--truth",
            str(paths["ty"]),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "rmse=" in out and "accuracy=" in out and "per_class.1=" in out


def test_mmd_m3d_commands(tmp_path, task_files, capsys):
    task, paths = task_files
    code = main(
        [
            "mmd",
            "--source",
            str(paths["sx"]),
            "--target",
            str(paths["tx"]),
            "--kernel",
            "linear",
        ]
    )
    assert code == 0
    mmd_value = float(capsys.readouterr().out.strip())
    assert mmd_value >= 0

    assignment = tmp_path / "assign.txt"
    write_labels(assignment, np.ones(task.source.n + task.target.n, dtype=int))
    code = main(
        [
            "m3d",
            "--source",
            str(paths["sx"]),
            "--target",
            str(paths["tx"]),
            "--kernel",
            "linear",
            "--assignment",
            str(assignment),
        ]
    )
    assert code == 0
    m3d_value = float(capsys.readouterr().out.strip())
    assert m3d_value == pytest.approx(mmd_value, abs=1e-12)


def test_cluster_command(tmp_path, task_files, capsys):
    task, paths = task_files
    joint = np.hstack([task.source.X, task.target.X])
    joint_path = tmp_path / "joint.txt"
    write_matrix(joint_path, joint)
    out = tmp_path / "assignment.txt"
    code = main(
        [
            "--seed",
            "3",
            "--out",
            str(out),
            "cluster",
            "--input",
            str(joint_path),
            "--n-clusters",
            "2",
        ]
    )
    assert code == 0
    labels = read_labels(out)
    assert labels.shape == (joint.shape[1],)
    assert set(labels) <= {1, 2}


def test_experiment_command_and_determinism(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(small_config_text(tmp_path, reps=2))
    code = main(["--config", str(cfg), "experiment"])
    assert code == 0
    first = (tmp_path / "results.txt").read_bytes()
    code = main(["--config", str(cfg), "experiment"])
    assert code == 0
    assert (tmp_path / "results.txt").read_bytes() == first
    records, summaries = read_results(tmp_path / "results.txt")
    assert len(records) == 4
    assert {r["cell"] for r in records} == {"nt", "m3d:linear"}


def test_experiment_seed_override_changes_results(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(small_config_text(tmp_path))
    main(["--config", str(cfg), "experiment"])
    base = read_results(tmp_path / "results.txt")[0]
    main(["--config", str(cfg), "--seed", "99", "experiment"])
    other = read_results(tmp_path / "results.txt")[0]
    assert base[0]["seed"] != other[0]["seed"]


def test_sweep_n_command(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(small_config_text(tmp_path, methods="m3d:linear"))
    code = main(["--config", str(cfg), "sweep-n", "--n-values", "2,3"])
    assert code == 0
    _, summaries = read_results(tmp_path / "results.txt")
    assert [row["cell"] for row in summaries] == ["N=2", "N=3"]


def test_sweep_ab_command(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(small_config_text(tmp_path, methods="m3d:linear"))
    code = main(
        ["--config", str(cfg), "sweep-ab", "--alpha-values", "0.01", "--beta-values", "10,100"]
    )
    assert code == 0
    _, summaries = read_results(tmp_path / "results.txt")
    assert len(summaries) == 2


def test_ablate_command(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(small_config_text(tmp_path, methods="m3d:linear"))
    code = main(["--config", str(cfg), "ablate"])
    assert code == 0
    _, summaries = read_results(tmp_path / "results.txt")
    assert [row["cell"] for row in summaries] == ["nt", "v1", "v2", "full"]


def test_cli_reports_library_errors(tmp_path, capsys):
    missing = tmp_path / "does_not_exist.txt"
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2\n1 x\n")
    code = main(
        ["mmd", "--source", str(bad), "--target", str(bad), "--kernel", "linear"]
    )
    assert code == 2
    assert "error" in capsys.readouterr().err
