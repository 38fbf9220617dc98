"""Batch experiment driver: benchmark cells, sweeps and ablations.

A comparison cell pairs a method with a feature mapping:

    nt            1-NN from raw source to raw target (no fitting)
    mmd:<map>     projection fitted against the global discrepancy
    m3d:<map>     projection fitted against the per-manifold discrepancy

with <map> one of raw, linear, rbf. Fitted cells embed both domains, normalize
every embedded point to unit length and classify the target by 1-NN from the
source, recording RMSE and accuracy over the held-out target labels.

Result files are line-oriented text: one ``run`` record per executed cell and
repetition (key=value fields, every row carrying the seed, a hash of the
configuration and the library version), then a ``# summary`` block holding a
CSV table of per-cell means and variances. Files contain no timestamps, so a
rerun with the same configuration is byte-identical.
"""
from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import __version__
from .data import (
    Dataset,
    SynthConfig,
    TransferTask,
    generate_synthetic,
    format_value,
    read_labels,
    read_matrix,
)
from .errors import ParseError, ValidationError
from .evaluation import accuracy as accuracy_of
from .evaluation import nn_classify, rmse
from .kernels import KernelSpec
from .manifolds import AdmmConfig
from .solver import TmdaConfig, fit, transform

MAPPINGS = ("raw", "linear", "rbf")
DEFAULT_CELLS = (
    "nt",
    "mmd:raw",
    "mmd:linear",
    "mmd:rbf",
    "m3d:raw",
    "m3d:linear",
    "m3d:rbf",
)
ABLATION_METHODS = ("nt", "v1", "v2", "full")


@dataclass
class ExperimentConfig:
    """Everything one batch run needs; mirrored 1:1 by the config file keys."""

    task: str = "synthetic"  # "synthetic" or "files"
    synth: SynthConfig = field(default_factory=SynthConfig)
    source_x: str | None = None
    source_y: str | None = None
    target_x: str | None = None
    target_y: str | None = None
    tmda: TmdaConfig = field(default_factory=TmdaConfig)
    repetitions: int = 1
    methods: tuple = DEFAULT_CELLS
    normalize_embedding: bool = True
    out: str = "results.txt"
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.task not in ("synthetic", "files"):
            raise ValidationError(f"unknown task source {self.task!r}")
        if self.repetitions < 1:
            raise ValidationError("repetitions must be at least 1")
        if self.threads < 1:
            raise ValidationError("threads must be at least 1")
        for cell in self.methods:
            parse_cell(cell)


def parse_cell(cell: str):
    """Split a cell token like ``m3d:rbf`` into (method, mapping)."""
    if cell == "nt":
        return "nt", None
    if ":" not in cell:
        raise ValidationError(f"bad cell {cell!r}; expected method:mapping")
    method, mapping = cell.split(":", 1)
    if method not in ("mmd", "m3d") or mapping not in MAPPINGS:
        raise ValidationError(f"bad cell {cell!r}")
    return method, mapping


def _kernel_for(mapping: str, bandwidth) -> KernelSpec | None:
    if mapping == "raw":
        return None
    if mapping == "linear":
        return KernelSpec("linear")
    return KernelSpec("rbf", bandwidth)


def unit_columns(M: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(M, axis=0)
    norms[norms == 0] = 1.0
    return M / norms


def classify_target(model, task: TransferTask, normalize_embedding: bool = True):
    """Embed both domains with a fitted model and 1-NN classify the target."""
    src = transform(model, task.source.X).X
    tgt = transform(model, task.target.X).X
    if normalize_embedding:
        src = unit_columns(src)
        tgt = unit_columns(tgt)
    return nn_classify(Dataset(src, task.source.labels), tgt)


def _load_file_task(cfg: ExperimentConfig) -> TransferTask:
    for name in ("source_x", "source_y", "target_x"):
        if getattr(cfg, name) is None:
            raise ValidationError(f"file task needs {name}")
    source = Dataset(read_matrix(cfg.source_x).X, read_labels(cfg.source_y))
    target = read_matrix(cfg.target_x)
    if cfg.target_y is None:
        raise ValidationError("evaluation needs target_y ground-truth labels")
    truth = read_labels(cfg.target_y)
    if truth.shape[0] != target.n:
        raise ValidationError("target label count does not match target matrix")
    return TransferTask(source=source, target=target, target_labels=truth)


def _task_for_rep(cfg: ExperimentConfig, rep: int) -> tuple[TransferTask, int]:
    seed = cfg.seed + rep
    if cfg.task == "synthetic":
        return generate_synthetic(replace(cfg.synth, seed=seed)), seed
    return _load_file_task(cfg), seed


def _fit_cell_config(cfg: ExperimentConfig, method: str, mapping: str, rep: int) -> TmdaConfig:
    mode = "global_mmd" if method == "mmd" else "full"
    return replace(
        cfg.tmda,
        kernel=_kernel_for(mapping, cfg.tmda.kernel.bandwidth if cfg.tmda.kernel else None),
        mode=mode,
        seed=cfg.seed + rep,
    )


def _run_cell(cfg: ExperimentConfig, cell: str, rep: int, tmda_override: TmdaConfig | None = None) -> dict:
    task, seed = _task_for_rep(cfg, rep)
    record = {"cell": cell, "rep": rep, "seed": seed}
    try:
        if cell == "nt":
            pred = nn_classify(task.source, task.target)
        else:
            method, mapping = parse_cell(cell)
            fit_cfg = tmda_override or _fit_cell_config(cfg, method, mapping, rep)
            model = fit(task.source, task.target, fit_cfg)
            pred = classify_target(model, task, cfg.normalize_embedding)
        record["rmse"] = rmse(pred, task.target_labels)
        record["accuracy"] = accuracy_of(pred, task.target_labels)
        record["status"] = "ok"
    except Exception as exc:  # isolate failures per cell
        record["status"] = "error"
        record["error"] = f"{type(exc).__name__}: {exc}"
    return record


def _run_cell_star(args):
    return _run_cell(*args)


def _execute(cfg: ExperimentConfig, jobs: list) -> list:
    """Run (cfg, cell, rep, override) jobs, preserving job order in the output."""
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(_run_cell_star, jobs))
    return [_run_cell_star(job) for job in jobs]


def config_hash(cfg: ExperimentConfig) -> str:
    text = "\n".join(serialize_config(cfg))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def _fmt(value) -> str:
    if isinstance(value, float):
        return format_value(value)
    return str(value)


def _summarize(records: list, keys: tuple = ("cell",)) -> list:
    groups: dict[tuple, list] = {}
    order: list[tuple] = []
    for rec in records:
        key = tuple(rec[k] for k in keys)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec)
    summaries = []
    for key in order:
        grp = groups[key]
        ok = [r for r in grp if r["status"] == "ok"]
        row = dict(zip(keys, key))
        row["runs"] = len(grp)
        row["failures"] = len(grp) - len(ok)
        for metric in ("rmse", "accuracy"):
            vals = np.asarray([r[metric] for r in ok], dtype=float)
            if vals.size:
                row[f"mean_{metric}"] = float(vals.mean())
                row[f"var_{metric}"] = float(vals.var(ddof=1)) if vals.size > 1 else 0.0
            else:
                row[f"mean_{metric}"] = float("nan")
                row[f"var_{metric}"] = float("nan")
        summaries.append(row)
    return summaries


def write_results(path, cfg: ExperimentConfig, records: list, summary_keys=("cell",)) -> list:
    """Write run records plus a CSV summary block; returns the summary rows."""
    summaries = _summarize(records, summary_keys)
    chash = config_hash(cfg)
    with open(path, "w") as fh:
        fh.write("# results-format 1\n")
        fh.write(f"# version={__version__} config_hash={chash}\n")
        for rec in records:
            parts = [f"cell={rec['cell']}", f"rep={rec['rep']}", f"seed={rec['seed']}"]
            for extra in ("n_manifolds", "alpha", "beta"):
                if extra in rec:
                    parts.append(f"{extra}={_fmt(rec[extra])}")
            parts.append(f"cfg={chash}")
            parts.append(f"v={__version__}")
            if rec["status"] == "ok":
                parts.append(f"rmse={_fmt(rec['rmse'])}")
                parts.append(f"accuracy={_fmt(rec['accuracy'])}")
            parts.append(f"status={rec['status']}")
            if rec["status"] != "ok":
                parts.append("error=" + rec["error"].replace(" ", "_"))
            fh.write("run " + " ".join(parts) + "\n")
        fh.write("# summary\n")
        columns = list(summary_keys) + [
            "runs",
            "failures",
            "mean_rmse",
            "var_rmse",
            "mean_accuracy",
            "var_accuracy",
        ]
        fh.write(",".join(columns) + "\n")
        for row in summaries:
            fh.write(",".join(_fmt(row[c]) for c in columns) + "\n")
    return summaries


def read_results(path):
    """Parse a results file back into (records, summary_rows)."""
    records = []
    summaries = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    mode = "records"
    header = None
    for i, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("# results-format") or line.startswith("# version"):
            continue
        if line.startswith("# summary"):
            mode = "summary"
            continue
        if mode == "records":
            if not line.startswith("run "):
                raise ParseError(f"expected a run record, got {line!r}", line=i)
            rec = {}
            for token in line[4:].split():
                key, _, value = token.partition("=")
                rec[key] = value
            for num in ("rmse", "accuracy", "alpha", "beta"):
                if num in rec:
                    rec[num] = float(rec[num])
            for integer in ("rep", "seed", "n_manifolds"):
                if integer in rec:
                    rec[integer] = int(rec[integer])
            records.append(rec)
        else:
            if header is None:
                header = line.split(",")
                continue
            values = line.split(",")
            row = dict(zip(header, values))
            for key, val in row.items():
                try:
                    row[key] = int(val)
                except ValueError:
                    try:
                        row[key] = float(val)
                    except ValueError:
                        pass
            summaries.append(row)
    return records, summaries


def exit_code(records: list) -> int:
    """0 when every cell completed, 2 when all failed, 1 otherwise."""
    failures = sum(r["status"] != "ok" for r in records)
    if failures == 0:
        return 0
    if failures == len(records):
        return 2
    return 1


def run_experiment(cfg: ExperimentConfig):
    """Fit and score every configured cell for every repetition."""
    jobs = [
        (cfg, cell, rep, None)
        for rep in range(cfg.repetitions)
        for cell in cfg.methods
    ]
    records = _execute(cfg, jobs)
    summaries = write_results(cfg.out, cfg, records)
    return records, summaries


def sweep_manifold_count(cfg: ExperimentConfig, n_values):
    """Full-mode fits for each manifold count over the same repeated tasks."""
    mapping = cfg.tmda.kernel.kind if cfg.tmda.kernel else "raw"
    jobs = []
    meta = []
    for n in n_values:
        if n < 1:
            raise ValidationError("manifold counts must be positive")
        for rep in range(cfg.repetitions):
            override = replace(
                cfg.tmda,
                n_manifolds=int(n),
                mode="full",
                seed=cfg.seed + rep,
            )
            jobs.append((cfg, f"m3d:{mapping}", rep, override))
            meta.append(int(n))
    records = _execute(cfg, jobs)
    for rec, n in zip(records, meta):
        rec["n_manifolds"] = n
        rec["cell"] = f"N={n}"
    summaries = write_results(cfg.out, cfg, records, summary_keys=("cell",))
    return records, summaries


def sweep_sensitivity(cfg: ExperimentConfig, alpha_values, beta_values):
    """Grid of (alpha, beta) full-mode runs; one summary row per grid cell."""
    mapping = cfg.tmda.kernel.kind if cfg.tmda.kernel else "raw"
    jobs = []
    meta = []
    for a in alpha_values:
        for b in beta_values:
            for rep in range(cfg.repetitions):
                override = replace(
                    cfg.tmda, alpha=float(a), beta=float(b), mode="full", seed=cfg.seed + rep
                )
                jobs.append((cfg, f"m3d:{mapping}", rep, override))
                meta.append((float(a), float(b)))
    records = _execute(cfg, jobs)
    for rec, (a, b) in zip(records, meta):
        rec["alpha"] = a
        rec["beta"] = b
        rec["cell"] = f"alpha={format_value(a)},beta={format_value(b)}"
    summaries = write_results(cfg.out, cfg, records, summary_keys=("cell",))
    return records, summaries


def run_ablation(cfg: ExperimentConfig):
    """NT plus the three solver modes on the same tasks and seeds."""
    mapping = cfg.tmda.kernel.kind if cfg.tmda.kernel else "raw"
    mode_of = {"v1": "global_mmd", "v2": "decoupled", "full": "full"}
    jobs = []
    names = []
    for rep in range(cfg.repetitions):
        for method in ABLATION_METHODS:
            if method == "nt":
                jobs.append((cfg, "nt", rep, None))
            else:
                override = replace(cfg.tmda, mode=mode_of[method], seed=cfg.seed + rep)
                jobs.append((cfg, f"m3d:{mapping}", rep, override))
            names.append(method)
    records = _execute(cfg, jobs)
    for rec, name in zip(records, names):
        rec["cell"] = name
    summaries = write_results(cfg.out, cfg, records, summary_keys=("cell",))
    return records, summaries


# ---------------------------------------------------------------------------
# config file handling: flat "key = value" lines mirroring the field names

_BOOL_TRUE = ("1", "true", "yes", "on")
_BOOL_FALSE = ("0", "false", "no", "off")


def _parse_bool(value: str, key: str) -> bool:
    low = value.lower()
    if low in _BOOL_TRUE:
        return True
    if low in _BOOL_FALSE:
        return False
    raise ValidationError(f"{key} expects a boolean, got {value!r}")


def _coerce(value: str, target_type, key: str):
    if target_type is bool:
        return _parse_bool(value, key)
    try:
        return target_type(value)
    except ValueError:
        raise ValidationError(f"{key} expects {target_type.__name__}, got {value!r}")


def parse_config(path) -> ExperimentConfig:
    """Read a key = value config file into an ExperimentConfig."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    entries = {}
    for i, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw!r}", line=i)
        key, _, value = line.partition("=")
        entries[key.strip()] = value.strip()
    return config_from_entries(entries)


def config_from_entries(entries: dict) -> ExperimentConfig:
    cfg = ExperimentConfig()
    synth_kwargs = {}
    tmda_kwargs = {}
    admm_kwargs = {}
    top_kwargs = {}
    synth_fields = {f.name: f.type for f in fields(SynthConfig)}
    tmda_simple = {
        "alpha": float,
        "beta": float,
        "n_manifolds": int,
        "subspace_dim": int,
        "max_outer": int,
        "epsilon": float,
        "seed": int,
        "mode": str,
        "normalize_columns": bool,
        "mle_neighbors": int,
    }
    admm_simple = {"mu": float, "rho": float, "max_iter": int, "epsilon": float}
    top_simple = {
        "task": str,
        "source_x": str,
        "source_y": str,
        "target_x": str,
        "target_y": str,
        "repetitions": int,
        "normalize_embedding": bool,
        "out": str,
        "seed": int,
        "threads": int,
    }
    kernel_kind = cfg.tmda.kernel.kind if cfg.tmda.kernel else "raw"
    bandwidth = None
    for key, value in entries.items():
        if key.startswith("synth."):
            name = key[len("synth.") :]
            if name not in synth_fields:
                raise ValidationError(f"unknown config key {key!r}")
            target = {"seed": int}.get(name, float if "mean" in name or "std" in name or "fraction" in name else int)
            synth_kwargs[name] = _coerce(value, target, key)
        elif key == "tmda.kernel":
            if value not in ("raw", "linear", "rbf"):
                raise ValidationError(f"tmda.kernel must be raw/linear/rbf, got {value!r}")
            kernel_kind = value
        elif key == "tmda.bandwidth":
            bandwidth = _coerce(value, float, key) if value else None
        elif key.startswith("tmda.admm."):
            name = key[len("tmda.admm.") :]
            if name not in admm_simple:
                raise ValidationError(f"unknown config key {key!r}")
            admm_kwargs[name] = _coerce(value, admm_simple[name], key)
        elif key.startswith("tmda."):
            name = key[len("tmda.") :]
            if name not in tmda_simple:
                raise ValidationError(f"unknown config key {key!r}")
            tmda_kwargs[name] = _coerce(value, tmda_simple[name], key)
        elif key == "methods":
            top_kwargs["methods"] = tuple(tok.strip() for tok in value.split(",") if tok.strip())
        elif key in top_simple:
            top_kwargs[key] = _coerce(value, top_simple[key], key)
        else:
            raise ValidationError(f"unknown config key {key!r}")

    if kernel_kind == "raw":
        kernel = None
    elif kernel_kind == "linear":
        kernel = KernelSpec("linear")
    else:
        kernel = KernelSpec("rbf", bandwidth)
    tmda_cfg = replace(
        TmdaConfig(kernel=kernel, admm=AdmmConfig(**admm_kwargs)), **tmda_kwargs
    )
    return replace(
        cfg, synth=SynthConfig(**synth_kwargs), tmda=tmda_cfg, **top_kwargs
    )


def serialize_config(cfg: ExperimentConfig) -> list:
    """Canonical key = value lines (used for hashing and round trips)."""
    lines = [f"task = {cfg.task}"]
    for f in fields(SynthConfig):
        lines.append(f"synth.{f.name} = {_fmt(getattr(cfg.synth, f.name))}")
    for name in ("source_x", "source_y", "target_x", "target_y"):
        value = getattr(cfg, name)
        if value is not None:
            lines.append(f"{name} = {value}")
    t = cfg.tmda
    lines.append(f"tmda.kernel = {t.kernel.kind if t.kernel else 'raw'}")
    if t.kernel is not None and t.kernel.bandwidth is not None:
        lines.append(f"tmda.bandwidth = {format_value(t.kernel.bandwidth)}")
    lines.append(f"tmda.alpha = {format_value(t.alpha)}")
    lines.append(f"tmda.beta = {format_value(t.beta)}")
    if t.n_manifolds is not None:
        lines.append(f"tmda.n_manifolds = {t.n_manifolds}")
    if t.subspace_dim is not None:
        lines.append(f"tmda.subspace_dim = {t.subspace_dim}")
    lines.append(f"tmda.max_outer = {t.max_outer}")
    lines.append(f"tmda.epsilon = {format_value(t.epsilon)}")
    lines.append(f"tmda.seed = {t.seed}")
    lines.append(f"tmda.mode = {t.mode}")
    lines.append(f"tmda.normalize_columns = {int(t.normalize_columns)}")
    lines.append(f"tmda.mle_neighbors = {t.mle_neighbors}")
    if t.admm.mu is not None:
        lines.append(f"tmda.admm.mu = {format_value(t.admm.mu)}")
    lines.append(f"tmda.admm.rho = {format_value(t.admm.rho)}")
    lines.append(f"tmda.admm.max_iter = {t.admm.max_iter}")
    lines.append(f"tmda.admm.epsilon = {format_value(t.admm.epsilon)}")
    lines.append(f"repetitions = {cfg.repetitions}")
    lines.append("methods = " + ",".join(cfg.methods))
    lines.append(f"normalize_embedding = {int(cfg.normalize_embedding)}")
    lines.append(f"out = {cfg.out}")
    lines.append(f"seed = {cfg.seed}")
    lines.append(f"threads = {cfg.threads}")
    return lines
