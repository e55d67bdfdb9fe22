"""Command-line interface.

Subcommands: augment, train, search, backtest, synth, report. Settings come
from an optional flat ``key = value`` config file plus command-line flags
(flags win). Every artifact carries provenance (config hash, seed, tool
version); partially written artifacts are removed when a run fails.

Exit codes: 0 all artifacts written, 2 configuration/usage errors, 1 runtime
failures.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import warnings

import numpy as np

from . import __version__
from . import backtest as B
from . import data as D
from . import model as M
from . import search as S
from . import trainer as T
from . import transforms as TR
from .errors import ConfigError, DomainError, FormatError, NumericError, ShapeError
from .policy import PolicyConfig, PolicyKind
from .rng import RngStream

_REQUIRED = object()


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_str_list(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(s) for s in _parse_str_list(text))


# key -> (parser, default, help); _REQUIRED defaults must be supplied.
_COMMAND_KEYS: dict[str, dict[str, tuple]] = {
    "augment": {
        "input": (str, _REQUIRED, "label-first TSV file to augment"),
        "out": (str, _REQUIRED, "output CSV path"),
        "catalog": (str, "magnitude", "transform catalog: magnitude | fixed"),
        "magnitude": (int, 10, "distortion magnitude in [1, 20] (magnitude catalog)"),
        "transforms": (_parse_str_list, (), "comma-separated transform ids (default: full catalog)"),
        "seed": (int, 0, "random seed"),
    },
    "train": {
        "data": (str, _REQUIRED, "label-first TSV training file"),
        "out": (str, _REQUIRED, "output directory"),
        "policy": (str, "weighted", "policy: weighted | trimmed | random | none"),
        "catalog": (str, "magnitude", "transform catalog: magnitude | fixed"),
        "magnitude": (int, 10, "distortion magnitude in [1, 20] (magnitude catalog)"),
        "transforms": (_parse_str_list, (), "comma-separated transform ids (default: full catalog)"),
        "alpha": (int, 1, "ranks trimmed from each end (trimmed policy)"),
        "batch_size": (int, 32, "mini-batch size"),
        "learning_rate": (float, 1e-3, "optimizer learning rate"),
        "epochs": (int, 200, "maximum epochs"),
        "early_stop_patience": (int, 10, "epochs without improvement before stopping"),
        "plateau_patience": (int, 50, "epochs without improvement before LR cut"),
        "plateau_factor": (float, 0.5, "LR multiplier on plateau"),
        "hidden_units": (int, 32, "hidden layer width"),
        "val_fraction": (float, 0.2, "fraction held out for validation"),
        "normalize": (_parse_bool, True, "z-normalize each sample"),
        "seed": (int, 0, "random seed"),
    },
    "search": {
        "data": (str, _REQUIRED, "label-first TSV training file"),
        "out": (str, _REQUIRED, "output directory"),
        "mode": (str, "grid", "search mode: grid | subset"),
        "policies": (_parse_str_list, ("weighted", "trimmed", "random"), "policy kinds to sweep"),
        "magnitudes": (_parse_int_list, (1, 5, 10, 15, 20), "candidate magnitudes"),
        "alphas": (_parse_int_list, (1, 2), "candidate trim depths"),
        "splits": (int, 5, "stratified train/val splits per configuration"),
        "subset_sizes": (_parse_int_list, (), "subset sizes (subset mode)"),
        "subset_reps": (int, 5, "random subsets per size (subset mode)"),
        "magnitude": (int, 0, "magnitude used in subset mode (0 = first candidate)"),
        "transforms": (_parse_str_list, (), "transform id pool (default: full catalog)"),
        "batch_size": (int, 32, "mini-batch size"),
        "learning_rate": (float, 1e-3, "optimizer learning rate"),
        "epochs": (int, 50, "maximum epochs per run"),
        "early_stop_patience": (int, 10, "early stopping patience"),
        "plateau_patience": (int, 50, "LR plateau patience"),
        "plateau_factor": (float, 0.5, "LR multiplier on plateau"),
        "hidden_units": (int, 32, "hidden layer width"),
        "normalize": (_parse_bool, True, "z-normalize each sample"),
        "workers": (int, 1, "parallel worker processes"),
        "seed": (int, 0, "master seed"),
    },
    "backtest": {
        "preds": (str, _REQUIRED, "predictions CSV (date,ticker,prob)"),
        "returns": (str, _REQUIRED, "returns CSV (date,ticker,return)"),
        "out": (str, _REQUIRED, "output directory"),
        "k": (int, 10, "names held long and short"),
        "cost_bps": (float, 5.0, "transaction cost in basis points per unit traded"),
        "seed": (int, 0, "recorded in provenance (backtest itself is deterministic)"),
    },
    "synth": {
        "out": (str, _REQUIRED, "output returns CSV path"),
        "stocks": (int, 50, "number of stocks"),
        "days": (int, 2000, "number of trading days"),
        "market_vol": (float, 0.008, "daily market factor volatility"),
        "idio_vol": (float, 0.015, "daily idiosyncratic volatility"),
        "drift": (float, 0.0, "per-stock daily drift"),
        "beta_spread": (float, 0.3, "betas drawn from 1 +/- spread"),
        "seed": (int, 0, "random seed"),
    },
    "report": {
        "artifact": (str, _REQUIRED, "artifact JSON to summarize"),
    },
}


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = stripped.partition("=")
            values[key.strip()] = value.strip()
    return values


def _resolve_settings(command: str, args: argparse.Namespace) -> dict:
    keys = _COMMAND_KEYS[command]
    raw: dict[str, str] = {}
    if args.config:
        raw = _load_config_file(args.config)
        for key in raw:
            if key not in keys:
                raise ConfigError(f"unknown config key {key!r} for '{command}'")
    settings: dict = {}
    for key, (parse, default, _help) in keys.items():
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            settings[key] = cli_value
            continue
        if key in raw:
            try:
                settings[key] = parse(raw[key])
            except ValueError as err:
                raise ConfigError(f"config key {key!r}: {err}") from None
            continue
        if default is _REQUIRED:
            raise ConfigError(f"missing required key {key!r} for '{command}'")
        settings[key] = default
    return settings


def _config_hash(settings: dict) -> str:
    # The output location is not part of an artifact's identity.
    canonical = json.dumps(
        {
            k: list(v) if isinstance(v, tuple) else v
            for k, v in sorted(settings.items())
            if k != "out"
        },
        sort_keys=True,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _provenance(settings: dict) -> dict:
    return {
        "config_hash": _config_hash(settings),
        "seed": settings.get("seed", 0),
        "version": __version__,
    }


def _provenance_comment(settings: dict) -> str:
    p = _provenance(settings)
    return f"config_hash={p['config_hash']} seed={p['seed']} version={p['version']}"


class _Outputs:
    """Registry of files written by one run, for cleanup on failure."""

    def __init__(self) -> None:
        self.paths: list[str] = []

    def register(self, path: str) -> str:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        self.paths.append(path)
        return path

    def discard_all(self) -> None:
        for path in self.paths:
            try:
                os.unlink(path)
            except OSError:
                pass


def _write_json(path: str, payload: dict, settings: dict) -> None:
    payload = dict(payload)
    payload["_provenance"] = _provenance(settings)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, allow_nan=False)
        fh.write("\n")


def _resolve_catalog(settings: dict):
    ids = settings["transforms"] or None
    if settings["catalog"] == "fixed":
        return TR.fixed_catalog(ids)
    if settings["catalog"] == "magnitude":
        return TR.magnitude_catalog(settings["magnitude"], ids)
    raise ConfigError("catalog must be 'magnitude' or 'fixed'")


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------


def _cmd_augment(settings: dict, outputs: _Outputs) -> None:
    dataset = D.load_ucr_tsv(settings["input"])
    specs = _resolve_catalog(settings)
    root = RngStream(settings["seed"])
    path = outputs.register(settings["out"])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {_provenance_comment(settings)}\n")
        length = dataset.length
        header = ",".join(f"v_{i + 1}" for i in range(length))
        fh.write(f"sample_id,transform_id,{header}\n")
        for i, ts in enumerate(dataset.samples):
            normalized = D.znormalize_per_sample(ts)
            for j, spec in enumerate(specs):
                out = TR.apply(spec, normalized, root.child(i, j))
                values = ",".join(repr(float(v)) for v in out.values)
                fh.write(f"{i},{spec.transform_id},{values}\n")
    print(f"wrote {len(dataset.samples) * len(specs)} augmented rows to {path}")


def _build_policy(settings: dict) -> PolicyConfig:
    kind = PolicyKind(settings["policy"])
    if kind is PolicyKind.NONE:
        return PolicyConfig(kind=kind)
    specs = _resolve_catalog(settings)
    magnitude = settings["magnitude"] if settings["catalog"] == "magnitude" else None
    return PolicyConfig(
        kind=kind,
        transforms=specs,
        magnitude=magnitude,
        alpha=settings["alpha"] if kind is PolicyKind.TRIMMED else 0,
    )


def _cmd_train(settings: dict, outputs: _Outputs) -> None:
    dataset = D.load_ucr_tsv(settings["data"])
    if settings["normalize"]:
        dataset = D.znormalize_dataset(dataset)
    train_set, val_set = D.stratified_split(
        dataset, 1.0 - settings["val_fraction"], seed=settings["seed"]
    )
    config = T.TrainConfig(
        policy=_build_policy(settings),
        batch_size=settings["batch_size"],
        learning_rate=settings["learning_rate"],
        max_epochs=settings["epochs"],
        early_stop_patience=settings["early_stop_patience"],
        plateau_patience=settings["plateau_patience"],
        plateau_factor=settings["plateau_factor"],
        hidden_units=settings["hidden_units"],
        seed=settings["seed"],
    )
    params = M.ClassifierParams.init(
        dataset.length,
        settings["hidden_units"],
        dataset.n_classes,
        RngStream(settings["seed"]).child(2**16),
    )
    params, report = T.train(config, train_set, val_set, params)
    result = T.evaluate(params, val_set)

    out_dir = settings["out"]
    _write_json(
        outputs.register(os.path.join(out_dir, "report.json")),
        {
            "val_accuracy": result.accuracy,
            "val_f1": result.f1,
            "report": report.to_dict(),
        },
        settings,
    )
    M.save_params(
        outputs.register(os.path.join(out_dir, "params.ckpt")),
        params,
        provenance=_provenance(settings),
    )
    comment = _provenance_comment(settings)
    if config.policy.kind is PolicyKind.WEIGHTED:
        T.write_weight_trace(
            outputs.register(os.path.join(out_dir, "weight_trace.csv")), report, comment
        )
    if config.policy.kind is PolicyKind.TRIMMED:
        T.write_selection_histogram(
            outputs.register(os.path.join(out_dir, "selection_histogram.csv")), report, comment
        )
    print(
        f"trained {config.policy.kind.value} policy for {report.stopped_epoch + 1} epochs: "
        f"val accuracy {result.accuracy:.4f}, F1 {result.f1:.4f}"
    )


def _search_base(settings: dict) -> T.TrainConfig:
    return T.TrainConfig(
        policy=PolicyConfig(kind=PolicyKind.NONE),
        batch_size=settings["batch_size"],
        learning_rate=settings["learning_rate"],
        max_epochs=settings["epochs"],
        early_stop_patience=settings["early_stop_patience"],
        plateau_patience=settings["plateau_patience"],
        plateau_factor=settings["plateau_factor"],
        hidden_units=settings["hidden_units"],
    )


def _cmd_search(settings: dict, outputs: _Outputs) -> None:
    dataset = D.load_ucr_tsv(settings["data"])
    if settings["normalize"]:
        dataset = D.znormalize_dataset(dataset)
    plan = S.SearchPlan(
        policies=tuple(PolicyKind(p) for p in settings["policies"]),
        magnitudes=settings["magnitudes"],
        alphas=settings["alphas"],
        n_splits=settings["splits"],
        transform_ids=settings["transforms"] or TR.MAGNITUDE_CATALOG_IDS,
        subset_sizes=settings["subset_sizes"],
        subset_reps=settings["subset_reps"],
        base=_search_base(settings),
        master_seed=settings["seed"],
        workers=settings["workers"],
    )
    out_dir = settings["out"]
    if settings["mode"] == "grid":
        result = S.grid_search(plan, dataset)
        _write_json(
            outputs.register(os.path.join(out_dir, "search.json")),
            result.to_dict(),
            settings,
        )
        with open(
            outputs.register(os.path.join(out_dir, "summary.csv")), "w", encoding="utf-8"
        ) as fh:
            fh.write(f"# {_provenance_comment(settings)}\n")
            fh.write("policy,accuracy,magnitude\n")
            for policy, accuracy, magnitude in result.summary_rows():
                fh.write(f"{policy},{accuracy!r},{'' if magnitude is None else magnitude}\n")
        best = result.best.describe() if result.best else "none"
        print(f"ran {result.run_count} training jobs; best configuration: {best}")
    elif settings["mode"] == "subset":
        if not plan.subset_sizes:
            raise ConfigError("missing required key 'subset_sizes' for subset mode")
        magnitude = settings["magnitude"] or None
        result = S.subset_sweep(plan, dataset, magnitude=magnitude)
        _write_json(
            outputs.register(os.path.join(out_dir, "sweep.json")),
            result.to_dict(),
            settings,
        )
        with open(
            outputs.register(os.path.join(out_dir, "sweep_curve.csv")), "w", encoding="utf-8"
        ) as fh:
            fh.write(f"# {_provenance_comment(settings)}\n")
            fh.write("policy,size,mean_accuracy,std_accuracy\n")
            for kind in plan.policies:
                if kind is PolicyKind.NONE:
                    continue
                for size, mean, std in result.curve(kind):
                    fh.write(f"{kind.value},{size},{mean!r},{std!r}\n")
        print(f"ran {result.run_count} training jobs across subset sizes")
    else:
        raise ConfigError("mode must be 'grid' or 'subset'")


def _load_predictions_csv(path: str) -> dict[str, dict[str, float]]:
    import csv as _csv

    by_day: dict[str, dict[str, float]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lineno = 0
        reader = _csv.reader(line for line in fh if not line.startswith("#"))
        header = None
        for row in reader:
            lineno += 1
            if header is None:
                header = [c.strip().lower() for c in row]
                if header != ["date", "ticker", "prob"]:
                    raise FormatError(f"{path}: header must be date,ticker,prob")
                continue
            if len(row) != 3:
                raise FormatError(f"{path}:{lineno}: expected 3 columns")
            date, ticker = row[0].strip(), row[1].strip()
            try:
                prob = float(row[2])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric prob {row[2]!r}") from None
            by_day.setdefault(date, {})
            if ticker in by_day[date]:
                raise FormatError(f"{path}:{lineno}: duplicate entry for {(date, ticker)}")
            by_day[date][ticker] = prob
    if not by_day:
        raise FormatError(f"{path}: file holds no predictions")
    return by_day


def _cmd_backtest(settings: dict, outputs: _Outputs) -> None:
    preds_by_day = _load_predictions_csv(settings["preds"])
    panel = D.load_returns_csv(settings["returns"])
    date_index = {d: i for i, d in enumerate(panel.dates)}

    days: list[str] = []
    predictions: list[dict[str, float]] = []
    realized: list[dict[str, float]] = []
    for date in sorted(preds_by_day):
        if date not in date_index:
            raise FormatError(f"prediction date {date} not present in the returns panel")
        next_ix = date_index[date] + 1
        if next_ix >= panel.n_days:
            warnings.warn(f"prediction date {date} has no next trading day; skipped")
            continue
        day_real = {
            t: float(panel.returns[next_ix, s])
            for s, t in enumerate(panel.tickers)
            if panel.mask[next_ix, s]
        }
        days.append(date)
        predictions.append(preds_by_day[date])
        realized.append(day_real)
    if not days:
        raise DomainError("no tradeable prediction days")

    weights = B.build_portfolio(predictions, settings["k"])
    daily = B.net_returns(weights, realized, settings["cost_bps"])
    report = B.metrics(daily)

    out_dir = settings["out"]
    _write_json(
        outputs.register(os.path.join(out_dir, "backtest.json")),
        report.to_dict(),
        settings,
    )
    with open(
        outputs.register(os.path.join(out_dir, "daily_returns.csv")), "w", encoding="utf-8"
    ) as fh:
        fh.write(f"# {_provenance_comment(settings)}\n")
        fh.write("date,net_return\n")
        for date, r in zip(days, daily):
            fh.write(f"{date},{float(r)!r}\n")
    ir_text = "degenerate" if report.ir_degenerate else f"{report.ir:.3f}"
    print(
        f"backtested {len(days)} days: avg daily {report.avg_ret_pct:.4f}%, "
        f"annualized {report.ann_ret_pct:.2f}%, IR {ir_text}"
    )


def _cmd_synth(settings: dict, outputs: _Outputs) -> None:
    panel = D.synth_returns(
        settings["stocks"],
        settings["days"],
        settings["seed"],
        market_vol=settings["market_vol"],
        idio_vol=settings["idio_vol"],
        drift=settings["drift"],
        beta_spread=settings["beta_spread"],
    )
    path = outputs.register(settings["out"])
    D.save_returns_csv(path, panel, _provenance_comment(settings))
    print(f"wrote {settings['days']} days x {settings['stocks']} stocks to {path}")


def _cmd_report(settings: dict, outputs: _Outputs) -> None:
    with open(settings["artifact"], "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    prov = payload.get("_provenance", {})
    if prov:
        print(
            f"artifact provenance: config_hash={prov.get('config_hash')} "
            f"seed={prov.get('seed')} version={prov.get('version')}"
        )
    if "ann_ret_pct" in payload:
        print("backtest report:")
        for key in ("avg_ret_pct", "ann_ret_pct", "ann_vol_pct", "ir", "downside_risk_pct", "dir"):
            print(f"  {key}: {payload[key]}")
    elif "entries" in payload and "run_count" in payload:
        print(f"search result: {payload['run_count']} runs")
        best = payload.get("best")
        if best:
            print(f"  best: {best}")
        for entry in payload["entries"]:
            label = entry["policy"]
            if entry.get("magnitude") is not None:
                label += f" M={entry['magnitude']}"
            if entry.get("alpha"):
                label += f" alpha={entry['alpha']}"
            if "mean_accuracy" in entry:
                print(f"  {label}: mean accuracy {entry['mean_accuracy']:.4f}")
    elif "report" in payload:
        rep = payload["report"]
        print("training report:")
        print(f"  epochs run: {rep.get('stopped_epoch', -1) + 1}, best epoch: {rep.get('best_epoch')}")
        print(f"  val accuracy: {payload.get('val_accuracy')}, val F1: {payload.get('val_f1')}")
    else:
        print(f"unrecognized artifact with keys: {sorted(payload)}")


_HANDLERS = {
    "augment": _cmd_augment,
    "train": _cmd_train,
    "search": _cmd_search,
    "backtest": _cmd_backtest,
    "synth": _cmd_synth,
    "report": _cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptaug",
        description="Sample-adaptive augmentation policies for time-series classification.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, keys in _COMMAND_KEYS.items():
        p = sub.add_parser(command, help=f"run the {command} step")
        p.add_argument("--config", help="flat key = value config file")
        for key, (parse, default, help_text) in keys.items():
            flag = "--" + key.replace("_", "-")
            suffix = "" if default is _REQUIRED else f" (default: {default})"
            p.add_argument(flag, dest=key, type=parse, default=None, help=help_text + suffix)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    outputs = _Outputs()
    try:
        settings = _resolve_settings(args.command, args)
        _HANDLERS[args.command](settings, outputs)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        outputs.discard_all()
        return 2
    except (DomainError, FormatError, ShapeError, NumericError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        outputs.discard_all()
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
