"""Sample-adaptive data augmentation policies for time-series classification.

The package couples a catalog of seeded, length-preserving series transforms
with three training policies (trainable loss weighting, loss-rank trimming,
uniform random picking), a small gradient-checked classifier, dataset
pipelines for labeled archives and daily-returns panels, a long-short
portfolio backtest, and search utilities. See README.md for usage.
"""

__version__ = "0.1.0"

from .backtest import BacktestReport, build_portfolio, metrics, net_returns, run_backtest
from .data import (
    Dataset,
    ReturnsPanel,
    SplitSpec,
    load_returns_csv,
    load_ucr_tsv,
    make_financial_splits,
    stratified_split,
    synth_returns,
    synth_waveforms,
    znormalize_dataset,
    znormalize_per_sample,
)
from .errors import ConfigError, DomainError, FormatError, NumericError, ShapeError
from .model import ClassifierParams, load_params, save_params
from .policy import PolicyConfig, PolicyKind, WeightVector
from .rng import RngStream, derive_seed
from .search import SearchPlan, SearchResult, grid_search, subset_sweep
from .trainer import TrainConfig, TrainReport, evaluate, train
from .transforms import (
    MagnitudeRange,
    TimeSeries,
    TransformSpec,
    apply,
    fixed_catalog,
    interpolate_magnitude,
    magnitude_catalog,
)

__all__ = [
    "__version__",
    "BacktestReport",
    "ClassifierParams",
    "ConfigError",
    "Dataset",
    "DomainError",
    "FormatError",
    "MagnitudeRange",
    "NumericError",
    "PolicyConfig",
    "PolicyKind",
    "ReturnsPanel",
    "RngStream",
    "SearchPlan",
    "SearchResult",
    "ShapeError",
    "SplitSpec",
    "TimeSeries",
    "TrainConfig",
    "TrainReport",
    "TransformSpec",
    "WeightVector",
    "apply",
    "build_portfolio",
    "derive_seed",
    "evaluate",
    "fixed_catalog",
    "grid_search",
    "interpolate_magnitude",
    "load_params",
    "load_returns_csv",
    "load_ucr_tsv",
    "magnitude_catalog",
    "make_financial_splits",
    "metrics",
    "net_returns",
    "run_backtest",
    "save_params",
    "stratified_split",
    "subset_sweep",
    "synth_returns",
    "synth_waveforms",
    "train",
    "znormalize_dataset",
    "znormalize_per_sample",
]
