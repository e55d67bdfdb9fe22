"""Dataset ingestion and preprocessing pipelines.

Two families are supported:

* Label-first TSV classification files (the layout used by the public UCR
  archive): one sample per line, label followed by the values, tab-separated.
* Daily-returns panels for the financial task: long-format CSV
  ``date,ticker,return`` ingested into a dense day x ticker matrix with a
  missing-value mask, then cut into overlapping study periods, windowed into
  fixed-length sequences and labeled against the daily cross-sectional
  median of next-day returns.

Synthetic generators for both families keep the test suite and the examples
self-contained.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FormatError
from .rng import RngStream
from .transforms import TimeSeries


@dataclass(frozen=True)
class Dataset:
    """A collection of equal-length labeled series."""

    samples: tuple[TimeSeries, ...]
    n_classes: int
    name: str = ""

    def __post_init__(self) -> None:
        samples = tuple(self.samples)
        if samples:
            length = samples[0].length
            for ts in samples:
                if ts.length != length:
                    raise DomainError("all samples in a dataset must share one length")
                if ts.label >= self.n_classes:
                    raise DomainError("label outside [0, n_classes)")
        object.__setattr__(self, "samples", samples)

    @property
    def length(self) -> int:
        return self.samples[0].length if self.samples else 0

    def values_matrix(self) -> np.ndarray:
        return np.stack([ts.values for ts in self.samples])

    def labels_array(self) -> np.ndarray:
        return np.asarray([ts.label for ts in self.samples], dtype=np.int64)

    def class_counts(self) -> np.ndarray:
        counts = np.zeros(self.n_classes, dtype=np.int64)
        for ts in self.samples:
            counts[ts.label] += 1
        return counts


def load_ucr_tsv(path, name: str = "") -> Dataset:
    """Load a label-first, tab-separated classification file.

    Labels are remapped to contiguous class indices 0..C-1 in sorted numeric
    order. Ragged rows, non-numeric fields and non-finite values raise
    :class:`FormatError` with the offending line number.
    """
    raw_labels: list[float] = []
    rows: list[np.ndarray] = []
    expected = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) < 3:
                raise FormatError(
                    f"{path}:{lineno}: need a label and at least 2 values"
                )
            try:
                values = np.asarray([float(v) for v in fields], dtype=np.float64)
            except ValueError as err:
                raise FormatError(f"{path}:{lineno}: non-numeric field ({err})") from None
            if not np.isfinite(values).all():
                raise FormatError(f"{path}:{lineno}: non-finite value")
            if expected is None:
                expected = values.shape[0]
            elif values.shape[0] != expected:
                raise FormatError(
                    f"{path}:{lineno}: row has {values.shape[0] - 1} values, "
                    f"expected {expected - 1}"
                )
            raw_labels.append(values[0])
            rows.append(values[1:])
    if not rows:
        raise FormatError(f"{path}: file holds no samples")
    classes = sorted(set(raw_labels))
    class_index = {c: i for i, c in enumerate(classes)}
    samples = tuple(
        TimeSeries(vals, class_index[lab]) for lab, vals in zip(raw_labels, rows)
    )
    return Dataset(samples=samples, n_classes=len(classes), name=name or str(path))


def znormalize_per_sample(ts: TimeSeries) -> TimeSeries:
    """Center and scale one sample to mean 0, population std 1.

    A constant sample has no scale; it maps to all zeros with a warning.
    """
    mu = float(np.mean(ts.values))
    sigma = float(np.std(ts.values))
    if sigma == 0.0:
        warnings.warn("constant sample normalized to all zeros")
        return TimeSeries(np.zeros_like(ts.values), ts.label)
    return TimeSeries((ts.values - mu) / sigma, ts.label)


def znormalize_dataset(dataset: Dataset) -> Dataset:
    return Dataset(
        samples=tuple(znormalize_per_sample(ts) for ts in dataset.samples),
        n_classes=dataset.n_classes,
        name=dataset.name,
    )


def stratified_split(
    dataset: Dataset, fraction: float = 0.8, seed: int = 0
) -> tuple[Dataset, Dataset]:
    """Split into (train, val) preserving per-class proportions within one sample.

    Classes with a single sample go wholly to train with a warning; classes
    with two or more always contribute at least one sample to each side.
    """
    if not dataset.samples:
        raise DomainError("cannot split an empty dataset")
    if not 0.0 < fraction < 1.0:
        raise DomainError("fraction must lie in (0, 1)")
    train_idx: list[int] = []
    val_idx: list[int] = []
    labels = dataset.labels_array()
    for c in range(dataset.n_classes):
        idx = np.flatnonzero(labels == c)
        n_c = idx.shape[0]
        if n_c == 0:
            continue
        if n_c == 1:
            warnings.warn(f"class {c} has a single sample; assigned to train")
            train_idx.extend(idx.tolist())
            continue
        perm = RngStream(seed).child(c).generator().permutation(n_c)
        n_train = min(n_c - 1, max(1, round(fraction * n_c)))
        train_idx.extend(idx[perm[:n_train]].tolist())
        val_idx.extend(idx[perm[n_train:]].tolist())
    train_idx.sort()
    val_idx.sort()
    make = lambda ids, tag: Dataset(
        samples=tuple(dataset.samples[i] for i in ids),
        n_classes=dataset.n_classes,
        name=f"{dataset.name}{tag}" if dataset.name else tag.lstrip("/"),
    )
    return make(train_idx, "/train"), make(val_idx, "/val")


# ---------------------------------------------------------------------------
# Financial returns panels.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReturnsPanel:
    """Dense day x ticker matrix of simple daily returns with a validity mask."""

    dates: tuple[str, ...]
    tickers: tuple[str, ...]
    returns: np.ndarray
    mask: np.ndarray

    def __post_init__(self) -> None:
        returns = np.asarray(self.returns, dtype=np.float64)
        mask = np.asarray(self.mask, dtype=bool)
        shape = (len(self.dates), len(self.tickers))
        if returns.shape != shape or mask.shape != shape:
            raise DomainError("returns/mask must be (len(dates), len(tickers))")
        if any(a >= b for a, b in zip(self.dates, self.dates[1:])):
            raise DomainError("dates must be strictly increasing")
        if not np.isfinite(returns[mask]).all():
            raise DomainError("unmasked returns must be finite")
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "returns", returns)
        object.__setattr__(self, "mask", mask)

    @property
    def n_days(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class SplitSpec:
    """Study-period geometry: overlapping fixed-length periods, each divided
    into a training block and a trailing test year, windowed with stride one."""

    split_length: int = 1000
    stride: int = 250
    train_length: int = 750
    test_length: int = 250
    window: int = 240
    window_stride: int = 1

    def __post_init__(self) -> None:
        if self.train_length + self.test_length != self.split_length:
            raise DomainError("train_length + test_length must equal split_length")
        if not 2 <= self.window <= self.train_length:
            raise DomainError("window must lie in [2, train_length]")
        if self.stride < 1 or self.window_stride < 1:
            raise DomainError("strides must be >= 1")


@dataclass(frozen=True)
class FinancialSplit:
    """One study period: standardized train/test windows plus alignment data.

    ``test_tickers[i]`` and ``test_label_days[i]`` tie test sample ``i`` to
    the panel cell whose next-day return defines its label, which is what the
    portfolio construction needs to join predictions back to returns.
    """

    start: int
    train: Dataset
    test: Dataset
    mu_train: float
    sigma_train: float
    test_tickers: tuple[str, ...]
    test_label_days: tuple[int, ...]


def make_financial_splits(panel: ReturnsPanel, spec: SplitSpec = SplitSpec()) -> list[FinancialSplit]:
    """Cut a panel into overlapping study periods of standardized windows.

    Standardization statistics come from each period's training days only.
    A window ending at day t uses returns up to and including t and is
    labeled 1 iff the stock's day t+1 return is strictly above that day's
    cross-sectional median. Windows touching masked cells are skipped.
    """
    if panel.n_days < spec.split_length:
        raise DomainError(
            f"panel spans {panel.n_days} days; need at least {spec.split_length}"
        )
    splits = []
    for start in range(0, panel.n_days - spec.split_length + 1, spec.stride):
        train_days = slice(start, start + spec.train_length)
        train_vals = panel.returns[train_days][panel.mask[train_days]]
        if train_vals.size == 0:
            raise DomainError(f"split at day {start} has no unmasked training data")
        mu = float(np.mean(train_vals))
        sigma = float(np.std(train_vals))
        if sigma == 0.0:
            raise DomainError(f"split at day {start} has zero training variance")

        # Cross-sectional medians of every label day in this split.
        medians = {}
        for day in range(start + spec.window, start + spec.split_length):
            present = panel.mask[day]
            if present.any():
                medians[day] = float(np.median(panel.returns[day, present]))

        train_samples: list[TimeSeries] = []
        test_samples: list[TimeSeries] = []
        test_tickers: list[str] = []
        test_label_days: list[int] = []
        t_train_lo = start + spec.window - 1
        t_train_hi = start + spec.train_length - 2
        t_test_hi = start + spec.split_length - 2

        for s, ticker in enumerate(panel.tickers):
            col_mask = panel.mask[start : start + spec.split_length, s]
            std_col = np.empty(spec.split_length)
            std_col[col_mask] = (
                panel.returns[start : start + spec.split_length, s][col_mask] - mu
            ) / sigma
            ok = np.cumsum(col_mask)  # running count of valid days

            for t in range(t_train_lo, t_test_hi + 1, spec.window_stride):
                rel = t - start
                # Window plus label day must be fully observed.
                lo = rel - spec.window + 1
                valid = ok[rel + 1] - (ok[lo - 1] if lo > 0 else 0) == spec.window + 1
                if not valid or (t + 1) not in medians:
                    continue
                label = 1 if panel.returns[t + 1, s] > medians[t + 1] else 0
                ts = TimeSeries(std_col[lo : rel + 1], label)
                if t <= t_train_hi:
                    train_samples.append(ts)
                else:
                    test_samples.append(ts)
                    test_tickers.append(ticker)
                    test_label_days.append(t + 1)

        splits.append(
            FinancialSplit(
                start=start,
                train=Dataset(tuple(train_samples), 2, name=f"split{start}/train"),
                test=Dataset(tuple(test_samples), 2, name=f"split{start}/test"),
                mu_train=mu,
                sigma_train=sigma,
                test_tickers=tuple(test_tickers),
                test_label_days=tuple(test_label_days),
            )
        )
    return splits


def synth_returns(
    n_stocks: int,
    n_days: int,
    seed: int,
    market_vol: float = 0.008,
    idio_vol: float = 0.015,
    drift=0.0,
    beta_spread: float = 0.3,
) -> ReturnsPanel:
    """Deterministic factor-model returns panel: drift + beta * market + noise.

    ``drift`` may be a scalar or a per-stock array. Dates are synthetic
    business days starting 2000-01-03.
    """
    if n_stocks < 2:
        raise DomainError("need at least 2 stocks")
    if n_days < 1:
        raise DomainError("need at least 1 day")
    gen = RngStream(seed).generator()
    betas = 1.0 + gen.uniform(-beta_spread, beta_spread, n_stocks)
    drifts = np.broadcast_to(np.asarray(drift, dtype=np.float64), (n_stocks,))
    market = gen.normal(0.0, market_vol, n_days)
    idio = gen.normal(0.0, idio_vol, (n_days, n_stocks)) if idio_vol > 0 else np.zeros((n_days, n_stocks))
    returns = drifts[None, :] + market[:, None] * betas[None, :] + idio
    days = np.busday_offset("2000-01-03", np.arange(n_days), roll="forward")
    dates = tuple(np.datetime_as_string(d) for d in days)
    tickers = tuple(f"S{i:04d}" for i in range(n_stocks))
    return ReturnsPanel(
        dates=dates,
        tickers=tickers,
        returns=returns,
        mask=np.ones((n_days, n_stocks), dtype=bool),
    )


def synth_waveforms(
    n_per_class: int,
    length: int,
    seed: int,
    noise: float = 0.3,
    cycles: float = 2.0,
) -> Dataset:
    """Two-class toy dataset: noisy sine (class 0) vs noisy sawtooth (class 1),
    each sample with a random phase."""
    if n_per_class < 1 or length < 2:
        raise DomainError("need n_per_class >= 1 and length >= 2")
    gen = RngStream(seed).generator()
    t = np.arange(length) / length
    samples = []
    for label in (0, 1):
        for _ in range(n_per_class):
            phase = gen.uniform(0.0, 1.0)
            arg = cycles * t + phase
            if label == 0:
                base = np.sin(2.0 * np.pi * arg)
            else:
                base = 2.0 * np.mod(arg, 1.0) - 1.0
            samples.append(TimeSeries(base + gen.normal(0.0, noise, length), label))
    return Dataset(tuple(samples), 2, name="synth-waveforms")


# ---------------------------------------------------------------------------
# Returns CSV interchange (long format: date,ticker,return).
# ---------------------------------------------------------------------------


def save_returns_csv(path, panel: ReturnsPanel, header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("date,ticker,return\n")
        for d, date in enumerate(panel.dates):
            for s, ticker in enumerate(panel.tickers):
                if panel.mask[d, s]:
                    fh.write(f"{date},{ticker},{float(panel.returns[d, s])!r}\n")


def load_returns_csv(path) -> ReturnsPanel:
    """Read a long-format returns CSV into a dense panel with a mask.

    Missing (date, ticker) pairs are masked out; duplicates and non-finite
    returns are format errors.
    """
    cells: dict[tuple[str, str], float] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lineno = 0
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = None
        for row in reader:
            lineno += 1
            if header is None:
                header = [c.strip().lower() for c in row]
                if header != ["date", "ticker", "return"]:
                    raise FormatError(f"{path}: header must be date,ticker,return")
                continue
            if len(row) != 3:
                raise FormatError(f"{path}:{lineno}: expected 3 columns")
            date, ticker, value = row[0].strip(), row[1].strip(), row[2]
            try:
                ret = float(value)
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric return {value!r}") from None
            if not np.isfinite(ret):
                raise FormatError(f"{path}:{lineno}: non-finite return")
            key = (date, ticker)
            if key in cells:
                raise FormatError(f"{path}:{lineno}: duplicate entry for {key}")
            cells[key] = ret
    if not cells:
        raise FormatError(f"{path}: file holds no returns")
    dates = tuple(sorted({d for d, _ in cells}))
    tickers = tuple(sorted({t for _, t in cells}))
    returns = np.zeros((len(dates), len(tickers)))
    mask = np.zeros((len(dates), len(tickers)), dtype=bool)
    date_ix = {d: i for i, d in enumerate(dates)}
    ticker_ix = {t: i for i, t in enumerate(tickers)}
    for (d, t), ret in cells.items():
        returns[date_ix[d], ticker_ix[t]] = ret
        mask[date_ix[d], ticker_ix[t]] = True
    return ReturnsPanel(dates=dates, tickers=tickers, returns=returns, mask=mask)
