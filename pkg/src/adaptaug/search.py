"""Grid search and transform-subset sweeps over the augmentation policies.

Every (configuration, split) pair is an independent job with a seed derived
by hashing its semantic coordinates from the master seed, so results are
reproducible regardless of execution order or worker count, and identical
configurations reached through different entry points (grid vs sweep) train
identically. The stratified splits themselves depend only on (master seed,
split index), so all configurations compete on the same data splits.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, stratified_split
from .errors import DomainError, NumericError
from .model import ClassifierParams
from .policy import PolicyConfig, PolicyKind
from .rng import RngStream, derive_seed
from .trainer import TrainConfig, TrainReport, evaluate, train
from .transforms import MAGNITUDE_CATALOG_IDS, magnitude_catalog


@dataclass(frozen=True)
class SearchPlan:
    policies: tuple[PolicyKind, ...]
    magnitudes: tuple[int, ...] = (1, 5, 10, 15, 20)
    alphas: tuple[int, ...] = (1, 2)
    n_splits: int = 5
    train_fraction: float = 0.8
    transform_ids: tuple[str, ...] = MAGNITUDE_CATALOG_IDS
    subset_sizes: tuple[int, ...] = ()
    subset_reps: int = 5
    base: TrainConfig | None = None
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "policies", tuple(PolicyKind(p) for p in self.policies))
        object.__setattr__(self, "magnitudes", tuple(int(m) for m in self.magnitudes))
        object.__setattr__(self, "alphas", tuple(int(a) for a in self.alphas))
        if not self.policies:
            raise DomainError("plan needs at least one policy kind")
        if not self.magnitudes or not self.alphas:
            raise DomainError("candidate sets must be nonempty")
        if self.n_splits < 1:
            raise DomainError("need at least one split")
        if self.transform_ids and self.transform_ids[0] != "identity":
            raise DomainError("transform_ids must start with the identity")


@dataclass(frozen=True)
class SearchConfig:
    kind: PolicyKind
    magnitude: int | None
    alpha: int
    transform_ids: tuple[str, ...]

    def describe(self) -> str:
        bits = [self.kind.value]
        if self.magnitude is not None:
            bits.append(f"M={self.magnitude}")
        if self.kind is PolicyKind.TRIMMED:
            bits.append(f"alpha={self.alpha}")
        return " ".join(bits)


@dataclass
class ConfigResult:
    config: SearchConfig
    split_accuracies: list[float]
    reports: list[TrainReport]
    failed: bool = False

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.split_accuracies)) if self.split_accuracies else float("nan")

    @property
    def std_accuracy(self) -> float:
        return float(np.std(self.split_accuracies)) if self.split_accuracies else float("nan")


@dataclass
class SearchResult:
    entries: list[ConfigResult]
    best: SearchConfig | None
    run_count: int

    def summary_rows(self) -> list[tuple[str, float, int | None]]:
        """Per policy kind: (policy, best mean accuracy, its magnitude)."""
        rows = []
        seen = []
        for entry in self.entries:
            if entry.config.kind not in seen:
                seen.append(entry.config.kind)
        for kind in seen:
            candidates = [
                e for e in self.entries if e.config.kind is kind and not e.failed
            ]
            if not candidates:
                continue
            best = min(
                candidates,
                key=lambda e: (-e.mean_accuracy, e.config.magnitude or 0, e.config.alpha),
            )
            rows.append((kind.value, best.mean_accuracy, best.config.magnitude))
        return rows

    def to_dict(self) -> dict:
        return {
            "run_count": self.run_count,
            "best": None if self.best is None else {
                "policy": self.best.kind.value,
                "magnitude": self.best.magnitude,
                "alpha": self.best.alpha,
                "transforms": list(self.best.transform_ids),
            },
            "entries": [
                {
                    "policy": e.config.kind.value,
                    "magnitude": e.config.magnitude,
                    "alpha": e.config.alpha,
                    "transforms": list(e.config.transform_ids),
                    "split_accuracies": e.split_accuracies,
                    "mean_accuracy": e.mean_accuracy,
                    "std_accuracy": e.std_accuracy,
                    "failed": e.failed,
                    "reports": [r.to_dict() for r in e.reports],
                }
                for e in self.entries
            ],
        }

    def comparable_dict(self) -> dict:
        """Deterministic view for reproducibility assertions (no wall clocks)."""
        d = self.to_dict()
        for entry in d["entries"]:
            for r in entry["reports"]:
                r.pop("wall_clock_s", None)
        return d


def _expand_configs(plan: SearchPlan) -> list[SearchConfig]:
    configs = []
    for kind in plan.policies:
        if kind is PolicyKind.NONE:
            configs.append(SearchConfig(kind, None, 0, ()))
        elif kind is PolicyKind.TRIMMED:
            for m in plan.magnitudes:
                for a in plan.alphas:
                    configs.append(SearchConfig(kind, m, a, plan.transform_ids))
        else:
            for m in plan.magnitudes:
                configs.append(SearchConfig(kind, m, 0, plan.transform_ids))
    return configs


def _run_job(
    dataset: Dataset,
    config: SearchConfig,
    split_idx: int,
    base: TrainConfig,
    master_seed: int,
    train_fraction: float,
):
    """Train one (configuration, split) pair; returns (accuracy, report).

    Split seeds depend only on the split index; job seeds hash the full
    semantic coordinates of the configuration.
    """
    split_seed = derive_seed(master_seed, "split", split_idx)
    train_set, val_set = stratified_split(dataset, train_fraction, seed=split_seed)
    job_seed = derive_seed(
        master_seed,
        "job",
        config.kind.value,
        config.magnitude,
        config.alpha,
        config.transform_ids,
        split_idx,
    )
    if config.kind is PolicyKind.NONE:
        pol = PolicyConfig(kind=config.kind)
    else:
        transforms = magnitude_catalog(config.magnitude, config.transform_ids)
        pol = PolicyConfig(
            kind=config.kind,
            transforms=transforms,
            magnitude=config.magnitude,
            alpha=config.alpha,
        )
    cfg = replace(base, policy=pol, seed=job_seed)
    params = ClassifierParams.init(
        dataset.length,
        cfg.hidden_units,
        dataset.n_classes,
        RngStream(derive_seed(job_seed, "init")),
    )
    params, report = train(cfg, train_set, val_set, params)
    accuracy = evaluate(params, val_set).accuracy
    return accuracy, report


def _execute(jobs, workers: int) -> list:
    """Run jobs in submission order; a NumericError becomes the result slot."""
    results: list = []
    if workers <= 1:
        for job in jobs:
            try:
                results.append(_run_job(*job))
            except NumericError as err:
                warnings.warn(f"job failed with numeric error: {err}")
                results.append(err)
        return results
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_job, *job) for job in jobs]
        for future in futures:
            try:
                results.append(future.result())
            except NumericError as err:
                warnings.warn(f"job failed with numeric error: {err}")
                results.append(err)
    return results


def grid_search(plan: SearchPlan, dataset: Dataset) -> SearchResult:
    """Train every configuration on every split; pick the best mean accuracy.

    Ties break toward the smaller magnitude, then plan policy order. A job
    that aborts with a numeric error marks its configuration failed and the
    search continues.
    """
    base = plan.base if plan.base is not None else TrainConfig(policy=PolicyConfig(kind=PolicyKind.NONE))
    configs = _expand_configs(plan)
    jobs = [
        (dataset, config, split, base, plan.master_seed, plan.train_fraction)
        for config in configs
        for split in range(plan.n_splits)
    ]
    results = _execute(jobs, plan.workers)

    entries = []
    for ci, config in enumerate(configs):
        accs: list[float] = []
        reports: list[TrainReport] = []
        failed = False
        for split in range(plan.n_splits):
            res = results[ci * plan.n_splits + split]
            if isinstance(res, NumericError):
                failed = True
                continue
            acc, report = res
            accs.append(float(acc))
            reports.append(report)
        entries.append(ConfigResult(config, accs, reports, failed=failed))

    viable = [
        (i, e) for i, e in enumerate(entries) if not e.failed and e.split_accuracies
    ]
    best = None
    if viable:
        best = min(
            viable,
            key=lambda pair: (
                -pair[1].mean_accuracy,
                pair[1].config.magnitude or 0,
                pair[0],
            ),
        )[1].config
    return SearchResult(entries=entries, best=best, run_count=len(jobs))


@dataclass
class SweepEntry:
    kind: PolicyKind
    size: int
    rep: int
    transform_ids: tuple[str, ...]
    split_accuracies: list[float]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.split_accuracies))


@dataclass
class SweepResult:
    entries: list[SweepEntry]
    run_count: int

    def curve(self, kind: PolicyKind) -> list[tuple[int, float, float]]:
        """(size, mean accuracy, std across subsets) for one policy kind."""
        sizes = sorted({e.size for e in self.entries if e.kind is kind})
        rows = []
        for s in sizes:
            means = [e.mean_accuracy for e in self.entries if e.kind is kind and e.size == s]
            rows.append((s, float(np.mean(means)), float(np.std(means))))
        return rows

    def to_dict(self) -> dict:
        return {
            "run_count": self.run_count,
            "entries": [
                {
                    "policy": e.kind.value,
                    "size": e.size,
                    "rep": e.rep,
                    "transforms": list(e.transform_ids),
                    "split_accuracies": e.split_accuracies,
                    "mean_accuracy": e.mean_accuracy,
                }
                for e in self.entries
            ],
        }


def subset_sweep(
    plan: SearchPlan,
    dataset: Dataset,
    magnitude: int | None = None,
    alpha: int | None = None,
) -> SweepResult:
    """Accuracy as a function of how many transforms the policy may use.

    For each subset size, ``plan.subset_reps`` random subsets of the
    non-identity transforms are drawn (the identity is always included) and
    each is trained over the plan's splits. When a size admits only one
    subset (0 or the full pool) a single rep is run. For the trimming policy
    alpha is capped so at least one loss survives per sample.
    """
    if not plan.subset_sizes:
        raise DomainError("plan.subset_sizes must be nonempty for a sweep")
    magnitude = plan.magnitudes[0] if magnitude is None else magnitude
    alpha = plan.alphas[0] if alpha is None else alpha
    base = plan.base if plan.base is not None else TrainConfig(policy=PolicyConfig(kind=PolicyKind.NONE))
    pool = tuple(t for t in plan.transform_ids if t != "identity")

    entries = []
    run_count = 0
    for kind in plan.policies:
        if kind is PolicyKind.NONE:
            continue
        for size in plan.subset_sizes:
            if size > len(pool):
                raise DomainError(f"subset size {size} exceeds the {len(pool)}-transform pool")
            reps = plan.subset_reps if 0 < size < len(pool) else 1
            for rep in range(reps):
                gen = RngStream(derive_seed(plan.master_seed, "subset", size, rep)).generator()
                chosen = set(gen.choice(len(pool), size=size, replace=False).tolist())
                ids = ("identity",) + tuple(
                    t for i, t in enumerate(pool) if i in chosen
                )
                job_alpha = (
                    min(alpha, (len(ids) - 1) // 2) if kind is PolicyKind.TRIMMED else 0
                )
                config = SearchConfig(kind, magnitude, job_alpha, ids)
                accs = []
                for split in range(plan.n_splits):
                    acc, _ = _run_job(
                        dataset, config, split, base, plan.master_seed, plan.train_fraction
                    )
                    accs.append(float(acc))
                    run_count += 1
                entries.append(SweepEntry(kind, size, rep, ids, accs))
    return SweepResult(entries=entries, run_count=run_count)
