"""Daily long-short portfolio construction and performance metrics.

Stocks are ranked each day by predicted up-probability; the top k are held
long and the bottom k short, equal-weighted, so the book has zero net and
unit gross exposure. Turnover is charged in basis points per unit of traded
notional against the previous day's weights after they have drifted with
realized returns. Reported statistics are annualized with 252 trading days
(geometric compounding for return, sqrt-of-time for volatilities).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, ShapeError

TRADING_DAYS = 252


@dataclass
class BacktestReport:
    daily_returns: tuple[float, ...]
    avg_ret_pct: float
    ann_ret_pct: float
    ann_vol_pct: float
    ir: float
    downside_risk_pct: float
    dir: float
    ir_degenerate: bool
    dir_degenerate: bool
    accuracy: float | None = None
    f1: float | None = None

    def to_dict(self) -> dict:
        def clean(v):
            if isinstance(v, float) and not np.isfinite(v):
                return None
            return v

        return {
            "daily_returns": list(self.daily_returns),
            "avg_ret_pct": clean(self.avg_ret_pct),
            "ann_ret_pct": clean(self.ann_ret_pct),
            "ann_vol_pct": clean(self.ann_vol_pct),
            "ir": clean(self.ir),
            "downside_risk_pct": clean(self.downside_risk_pct),
            "dir": clean(self.dir),
            "ir_degenerate": self.ir_degenerate,
            "dir_degenerate": self.dir_degenerate,
            "accuracy": self.accuracy,
            "f1": self.f1,
        }


def build_portfolio(
    predictions: Sequence[Mapping[str, float]], k: int
) -> list[dict[str, float]]:
    """Per-day weights: +1/(2k) on each of the k highest-probability names,
    -1/(2k) on each of the k lowest.

    One descending ranking per day with ties broken by ticker order; days
    with fewer than 2k names are skipped with a warning (empty weight dict).
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    weights: list[dict[str, float]] = []
    long_w = 1.0 / (2 * k)
    for day, preds in enumerate(predictions):
        for ticker, p in preds.items():
            if not 0.0 <= p <= 1.0:
                raise DomainError(f"day {day}: probability {p} for {ticker} outside [0, 1]")
        if len(preds) < 2 * k:
            warnings.warn(f"day {day}: {len(preds)} names < 2k; day skipped")
            weights.append({})
            continue
        ranked = sorted(preds, key=lambda t: (-preds[t], t))
        w: dict[str, float] = {}
        for t in ranked[:k]:
            w[t] = long_w
        for t in ranked[-k:]:
            w[t] = -long_w
        weights.append(w)
    return weights


def net_returns(
    weights: Sequence[Mapping[str, float]],
    realized: Sequence[Mapping[str, float]],
    cost_bps: float = 5.0,
) -> np.ndarray:
    """Daily portfolio returns net of transaction costs.

    ``realized[d][ticker]`` is the return earned over day d's holding period
    by positions in ``weights[d]``. Costs charge ``cost_bps`` per unit of
    traded notional against the prior weights drifted by realized returns
    and renormalized by portfolio growth; day 0 pays the full entry cost.
    """
    if len(weights) != len(realized):
        raise ShapeError("weights and realized returns must cover the same days")
    rate = cost_bps / 1e4
    out = np.zeros(len(weights))
    drifted: dict[str, float] = {}
    for day, (w, rets) in enumerate(zip(weights, realized)):
        missing = [t for t in w if t not in rets]
        if missing:
            raise ShapeError(f"day {day}: no realized return for {missing}")
        gross = sum(w[t] * rets[t] for t in sorted(w))
        turnover = sum(
            abs(w.get(t, 0.0) - drifted.get(t, 0.0)) for t in sorted(set(w) | set(drifted))
        )
        out[day] = gross - rate * turnover
        growth = 1.0 + gross
        if growth <= 0.0:
            # Book wiped out; drifted weights are undefined past this point.
            drifted = dict(w)
        else:
            drifted = {t: w[t] * (1.0 + rets[t]) / growth for t in w}
    return out


def metrics(
    daily: np.ndarray, accuracy: float | None = None, f1: float | None = None
) -> BacktestReport:
    """Summary statistics over a net daily-return series.

    Zero volatility or an absence of negative days make the corresponding
    ratio undefined; those are flagged degenerate (value NaN), never +/-Inf.
    """
    daily = np.asarray(daily, dtype=np.float64)
    if daily.ndim != 1 or daily.shape[0] < 2:
        raise DomainError("need at least 2 daily returns")
    n = daily.shape[0]
    avg = float(np.mean(daily)) * 100.0
    total = float(np.prod(1.0 + daily))
    if total > 0.0:
        ann_ret = (total ** (TRADING_DAYS / n) - 1.0) * 100.0
    else:
        ann_ret = -100.0
    # A constant series has zero volatility by definition; np.std of one can
    # still return a ~1e-19 residue from mean rounding, so check exactly.
    vol = 0.0 if np.all(daily == daily[0]) else float(np.std(daily))
    ann_vol = vol * np.sqrt(TRADING_DAYS) * 100.0

    ir_degenerate = bool(ann_vol == 0.0)
    ir = float("nan") if ir_degenerate else ann_ret / ann_vol

    negative = daily[daily < 0.0]
    if negative.size == 0 or np.all(negative == negative[0]):
        downside = 0.0
    else:
        downside = float(np.std(negative)) * np.sqrt(TRADING_DAYS) * 100.0
    dir_degenerate = bool(negative.size == 0 or downside == 0.0)
    dir_ratio = float("nan") if dir_degenerate else ann_ret / downside

    return BacktestReport(
        daily_returns=tuple(float(r) for r in daily),
        avg_ret_pct=avg,
        ann_ret_pct=ann_ret,
        ann_vol_pct=ann_vol,
        ir=ir,
        downside_risk_pct=downside,
        dir=dir_ratio,
        ir_degenerate=ir_degenerate,
        dir_degenerate=dir_degenerate,
        accuracy=accuracy,
        f1=f1,
    )


def run_backtest(
    predictions: Sequence[Mapping[str, float]],
    realized: Sequence[Mapping[str, float]],
    k: int,
    cost_bps: float = 5.0,
    accuracy: float | None = None,
    f1: float | None = None,
) -> BacktestReport:
    """Rank, build the book, net out costs and summarize, in one call."""
    weights = build_portfolio(predictions, k)
    daily = net_returns(weights, realized, cost_bps)
    return metrics(daily, accuracy=accuracy, f1=f1)
