"""Criterion x rounding x beta-grid x replicate experiment runner."""
from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from pcut.evaluation import MetricReport, minvar_trace, rand_index
from pcut.graph import (
    build_affinity,
    centered_kernel,
    laplacian,
    load_dataset,
    sar_laplacian,
    standardize,
)
from pcut.partition import Partition
from pcut.relaxation import (
    eigengap,
    pcut_matrix,
    solve_minvar_relaxation,
    solve_relaxation,
    solve_unconstrained_relaxation,
)
from pcut.rounding import (
    INIT_STRATEGIES,
    procrustean_rounding,
    weighted_kmeans_rounding,
    yu_shi_rounding,
)

log = logging.getLogger(__name__)

CRITERIA = ("ncut", "rcut", "minvar")
ROUNDINGS = ("procrustes", "kmeans", "yushi")

CSV_COLUMNS = [
    "row_type",
    "criterion",
    "rounding",
    "init",
    "operator",
    "beta",
    "replicate",
    "seed",
    "rand_index",
    "pcut",
    "minvar_trace",
    "eigengap",
    "iterations",
    "ri_min",
    "ri_max",
    "ri_std",
    "n_runs",
]


class ConfigError(ValueError):
    pass


class RunFailure(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    input: str | None = None
    label_column: int | None = None
    criterion: str = "ncut"
    rounding: str = "procrustes"
    init: str = "orthogonal"
    betas: list[float] = field(default_factory=lambda: [1.0])
    c: int | None = None
    replicates: int = 1
    seed: int = 0
    output: str | None = None
    fmt: str = "csv"
    max_iter: int = 100
    workers: int = 1

    def validate(self) -> None:
        if self.criterion not in CRITERIA:
            raise ConfigError(f"unknown criterion {self.criterion!r}; choose from {CRITERIA}")
        if self.rounding not in ROUNDINGS:
            raise ConfigError(f"unknown rounding {self.rounding!r}; choose from {ROUNDINGS}")
        if self.init not in INIT_STRATEGIES:
            raise ConfigError(f"unknown init {self.init!r}; choose from {INIT_STRATEGIES}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if not self.betas:
            raise ConfigError("at least one beta is required")
        if any(not (b > 0 and np.isfinite(b)) for b in self.betas):
            raise ConfigError(f"betas must be positive, got {self.betas}")
        if self.replicates < 1:
            raise ConfigError("replicates must be at least 1")
        if self.c is not None and self.c < 2:
            raise ConfigError("class count must be at least 2")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")


@dataclass(frozen=True)
class Run:
    beta_index: int
    beta: float
    replicate: int
    seed: int  # root seed of the experiment

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.seed, spawn_key=(self.beta_index, self.replicate))

    @property
    def run_seed(self) -> int:
        """Provenance integer identifying this run's RNG stream."""
        return int(self.seed_sequence().generate_state(1, dtype=np.uint32)[0])

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed_sequence())


def plan(config: ExperimentConfig) -> list[Run]:
    """Deterministic betas x replicates grid.

    Identity initialization involves no randomness, so it gets a single
    replicate per beta.
    """
    config.validate()
    reps = config.replicates
    if config.init == "identity" and reps > 1:
        log.info("init=identity is deterministic; collapsing %d replicates to 1", reps)
        reps = 1
    return [Run(b, float(beta), r, config.seed) for b, beta in enumerate(config.betas) for r in range(reps)]


@dataclass
class _Prepared:
    operator_kind: str
    pi: np.ndarray
    op: object
    embedding: object
    eigensystem: object
    Z: np.ndarray | None
    pcut_op: object
    pcut_pi: np.ndarray
    kernel: np.ndarray


def _prepare(Xs: np.ndarray, beta: float, config: ExperimentConfig, c: int) -> _Prepared:
    margin = config.rounding == "procrustes"
    G = build_affinity(Xs, beta, zero_diagonal=margin)
    n = G.n
    plain_kernel = centered_kernel(G, "plain").K
    if config.criterion == "ncut":
        op = laplacian(G)
        pi = G.require_no_isolated()
        emb, es = solve_relaxation(op, pi, c)
        kind, sense, pcut_op, pcut_pi = "plain", "min", op, pi
        kernel = plain_kernel
    elif config.criterion == "rcut":
        op = sar_laplacian(G)
        pi = np.ones(n)
        emb, es = solve_relaxation(op, pi, c)
        kind, sense, pcut_op, pcut_pi = "sar", "min", op, pi
        kernel = plain_kernel
    else:
        op = centered_kernel(G, "plus_identity" if margin else "plain")
        pi = np.ones(n)
        emb, es = solve_minvar_relaxation(op, pi, c)
        kind, sense, pcut_op, pcut_pi = "kernel", "max", laplacian(G), pi
        kernel = op.K
    Z = solve_unconstrained_relaxation(op, pi, c, sense) if config.rounding == "yushi" else None
    log.info("beta=%g criterion=%s operator=%s", beta, config.criterion, kind)
    return _Prepared(kind, pi, op, emb, es, Z, pcut_op, pcut_pi, kernel)


def _round(prep: _Prepared, config: ExperimentConfig, c: int, rng):
    if config.rounding == "procrustes":
        return procrustean_rounding(prep.embedding, c, config.init, config.max_iter, rng=rng)
    if config.rounding == "kmeans":
        return weighted_kmeans_rounding(prep.embedding, c, config.init, config.max_iter, rng=rng)
    return yu_shi_rounding(prep.Z, config.init, config.max_iter, rng=rng)


@dataclass
class RunSummary:
    config: dict
    runs: list[dict]
    aggregates: list[dict]

    def to_json(self) -> str:
        return json.dumps({"config": self.config, "runs": self.runs, "aggregates": self.aggregates}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunSummary":
        d = json.loads(text)
        return cls(d["config"], d["runs"], d["aggregates"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.runs + self.aggregates:
            writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in CSV_COLUMNS})
        return buf.getvalue()


def aggregate(runs: list[dict]) -> list[dict]:
    """One summary row per beta, recomputable from the run rows."""
    out = []
    for beta in dict.fromkeys(r["beta"] for r in runs):
        rows = [r for r in runs if r["beta"] == beta]
        ri = [r["rand_index"] for r in rows if r["rand_index"] is not None]
        first = rows[0]
        out.append(
            {
                "row_type": "aggregate",
                "criterion": first["criterion"],
                "rounding": first["rounding"],
                "init": first["init"],
                "operator": first["operator"],
                "beta": beta,
                "replicate": None,
                "seed": None,
                "rand_index": float(np.mean(ri)) if ri else None,
                "pcut": float(np.mean([r["pcut"] for r in rows])),
                "minvar_trace": float(np.mean([r["minvar_trace"] for r in rows])),
                "eigengap": float(np.mean([r["eigengap"] for r in rows])),
                "iterations": float(np.mean([r["iterations"] for r in rows])),
                "ri_min": float(np.min(ri)) if ri else None,
                "ri_max": float(np.max(ri)) if ri else None,
                "ri_std": float(np.std(ri)) if ri else None,
                "n_runs": len(rows),
            }
        )
    return out


def execute(config: ExperimentConfig, X: np.ndarray | None = None, truth: Partition | None = None) -> RunSummary:
    """Run the whole grid. ``X``/``truth`` override loading ``config.input``."""
    runs = plan(config)
    if X is None:
        if config.input is None:
            raise ConfigError("no input dataset given")
        X, truth = load_dataset(config.input, config.label_column)
    c = config.c if config.c is not None else (truth.c if truth is not None else None)
    if c is None:
        raise ConfigError("class count is required when no labels are supplied")
    if truth is not None and truth.n != X.shape[0]:
        raise ConfigError("label count does not match the data")
    Xs = standardize(X)

    def context(run: Run) -> str:
        return (
            f"criterion={config.criterion}, rounding={config.rounding}, "
            f"beta={run.beta:g}, replicate={run.replicate}"
        )

    prepared: dict[int, _Prepared] = {}
    for b, beta in enumerate(config.betas):
        try:
            prepared[b] = _prepare(Xs, float(beta), config, c)
        except Exception as exc:
            raise RunFailure(f"run ({context(Run(b, float(beta), 0, config.seed))}) failed: {exc}") from exc

    def one(run: Run) -> dict:
        prep = prepared[run.beta_index]
        try:
            res = _round(prep, config, c, run.rng())
            P = res.partition
            report = MetricReport(
                rand_index=rand_index(truth, P) if truth is not None else None,
                pcut_value=pcut_matrix(P, prep.pcut_op, prep.pcut_pi),
                minvar_trace=minvar_trace(prep.kernel, P, np.ones(P.n)),
                eigengap=eigengap(prep.eigensystem, c) if c + 1 <= P.n else 0.0,
                iterations=res.iterations,
                replicate_id=run.replicate,
                seed=run.run_seed,
            )
        except Exception as exc:
            raise RunFailure(f"run ({context(run)}) failed: {exc}") from exc
        return {
            "row_type": "run",
            "criterion": config.criterion,
            "rounding": config.rounding,
            "init": config.init,
            "operator": prep.operator_kind,
            "beta": run.beta,
            "replicate": report.replicate_id,
            "seed": report.seed,
            "rand_index": report.rand_index,
            "pcut": report.pcut_value,
            "minvar_trace": report.minvar_trace,
            "eigengap": report.eigengap,
            "iterations": report.iterations,
            "ri_min": None,
            "ri_max": None,
            "ri_std": None,
            "n_runs": None,
        }

    if config.workers > 1 and len(runs) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(one, runs))
    else:
        rows = [one(r) for r in runs]

    cfg = asdict(config)
    cfg["c"] = c
    for key in ("workers", "output", "fmt"):  # must not change the content
        cfg.pop(key)
    return RunSummary(cfg, rows, aggregate(rows))


def emit(summary: RunSummary, path, fmt: str = "csv") -> str:
    """Serialize to ``path`` (``-`` or None returns the text only)."""
    if fmt == "csv":
        text = summary.to_csv()
    elif fmt == "json":
        text = summary.to_json()
    else:
        raise ConfigError(f"unknown format {fmt!r}")
    if path not in (None, "-"):
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise RunFailure(f"cannot write {path}: {exc}") from exc
    return text
