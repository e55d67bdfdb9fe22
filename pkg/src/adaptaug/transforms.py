"""Seeded, deterministic augmentations for univariate time series.

Fourteen transforms are supported, each preserving series length and label.
Two catalogs are provided: a fixed-parameter catalog (the settings known to
work on daily-returns data) and a magnitude-driven catalog in which a single
integer magnitude in [1, 20] is mapped onto every transform's parameter
range by linear interpolation, so one knob controls the distortion strength
of the whole set.

All randomness comes from an :class:`~adaptaug.rng.RngStream`, making every
application bit-reproducible. Length-changing raw operations (window crops,
warps, zooms) are resampled back to the original length on a uniform grid
so downstream models always see fixed-length input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import kernels as K
from .errors import DomainError
from .rng import RngStream

MAGNITUDE_MIN = 1
MAGNITUDE_MAX = 20

# Rate curves in the time warp are clamped here before integration so the
# warped time axis stays strictly increasing even at large sigma.
_MIN_WARP_RATE = 1e-3

TRANSFORM_IDS = (
    "identity",
    "magnify",
    "convolve",
    "pool",
    "jitter",
    "quantize",
    "time_warp",
    "magnitude_warp",
    "window_warp",
    "window_slice",
    "scaling",
    "reverse",
    "permutation",
    "dropout",
)


@dataclass(frozen=True)
class TimeSeries:
    """One univariate sample: a float sequence plus its class label."""

    values: np.ndarray
    label: int = 0

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] < 2:
            raise DomainError("time series must be 1-d with length >= 2")
        if not np.isfinite(values).all():
            raise DomainError("time series values must be finite")
        if self.label < 0:
            raise DomainError("label must be a non-negative class index")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "label", int(self.label))

    @property
    def length(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class MagnitudeRange:
    """A tunable parameter range: continuous [lo, hi] or an ordered discrete set.

    Continuous ranges may run high-to-low (e.g. a crop ratio that tightens as
    magnitude grows); interpolation preserves the direction.
    """

    lo: float = 0.0
    hi: float = 0.0
    choices: tuple = ()

    @classmethod
    def continuous(cls, lo: float, hi: float) -> "MagnitudeRange":
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise DomainError("continuous range bounds must be finite")
        return cls(lo=float(lo), hi=float(hi))

    @classmethod
    def discrete(cls, *choices) -> "MagnitudeRange":
        if not choices:
            raise DomainError("discrete range needs at least one choice")
        return cls(choices=tuple(choices))

    @property
    def is_discrete(self) -> bool:
        return bool(self.choices)


def interpolate_magnitude(magnitude: int, mrange: MagnitudeRange):
    """Map an integer magnitude in [1, 20] onto a parameter range.

    Continuous: lo + (magnitude - 1) / 19 * (hi - lo), so the endpoints of
    the scale hit the range bounds exactly. Discrete: the element at the
    proportionally rounded index.
    """
    if not MAGNITUDE_MIN <= magnitude <= MAGNITUDE_MAX:
        raise DomainError(
            f"magnitude must lie in [{MAGNITUDE_MIN}, {MAGNITUDE_MAX}], got {magnitude}"
        )
    t = (magnitude - 1) / (MAGNITUDE_MAX - 1)
    if mrange.is_discrete:
        idx = int(round(t * (len(mrange.choices) - 1)))
        return mrange.choices[idx]
    if magnitude == MAGNITUDE_MIN:
        return mrange.lo
    if magnitude == MAGNITUDE_MAX:
        return mrange.hi
    return mrange.lo + t * (mrange.hi - mrange.lo)


# Parameter schema: name -> predicate. Specs are validated at construction.
_PARAM_SCHEMA: dict[str, dict[str, object]] = {
    "identity": {},
    "magnify": {
        "t0_lo": lambda v: isinstance(v, (int, np.integer)) and v >= 0,
        "t0_hi": lambda v: isinstance(v, (int, np.integer)) and v >= 0,
    },
    "convolve": {"size": lambda v: isinstance(v, (int, np.integer)) and v >= 3},
    "pool": {"size": lambda v: isinstance(v, (int, np.integer)) and v >= 1},
    "jitter": {"sigma": lambda v: np.isfinite(v) and v >= 0},
    "quantize": {"levels": lambda v: isinstance(v, (int, np.integer)) and v >= 2},
    "time_warp": {
        "knots": lambda v: isinstance(v, (int, np.integer)) and v >= 1,
        "sigma": lambda v: np.isfinite(v) and v >= 0,
    },
    "magnitude_warp": {
        "knots": lambda v: isinstance(v, (int, np.integer)) and v >= 1,
        "sigma": lambda v: np.isfinite(v) and v >= 0,
    },
    "window_warp": {
        "window_ratio": lambda v: np.isfinite(v) and 0 < v <= 1,
        "scales": lambda v: (
            (np.isscalar(v) and np.isfinite(v) and v > 0)
            or (
                isinstance(v, tuple)
                and len(v) > 0
                and all(np.isfinite(s) and s > 0 for s in v)
            )
        ),
    },
    "window_slice": {"ratio": lambda v: np.isfinite(v) and 0 < v <= 1},
    "scaling": {"sigma": lambda v: np.isfinite(v) and v >= 0},
    "reverse": {},
    "permutation": {
        "max_segments": lambda v: isinstance(v, (int, np.integer)) and v >= 2
    },
    "dropout": {"p": lambda v: np.isfinite(v) and 0 <= v <= 1},
}


@dataclass(frozen=True)
class TransformSpec:
    """A transform identifier with fully resolved parameter values."""

    transform_id: str
    params: Mapping = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.transform_id not in _PARAM_SCHEMA:
            raise DomainError(f"unknown transform {self.transform_id!r}")
        schema = _PARAM_SCHEMA[self.transform_id]
        params = dict(self.params)
        missing = sorted(set(schema) - set(params))
        if missing:
            raise DomainError(
                f"{self.transform_id}: missing parameter(s) {', '.join(missing)}"
            )
        extra = sorted(set(params) - set(schema))
        if extra:
            raise DomainError(
                f"{self.transform_id}: unknown parameter(s) {', '.join(extra)}"
            )
        for name, check in schema.items():
            if not check(params[name]):
                raise DomainError(
                    f"{self.transform_id}: parameter {name}={params[name]!r} out of range"
                )
        if self.transform_id == "magnify" and params["t0_lo"] > params["t0_hi"]:
            raise DomainError("magnify: t0_lo must not exceed t0_hi")
        object.__setattr__(self, "params", params)


# ---------------------------------------------------------------------------
# Per-transform application. Each takes (values, generator, **params) and
# returns a new float64 array of the same length.
# ---------------------------------------------------------------------------


def _identity(v, gen):
    return v.copy()


def _reverse(v, gen):
    return v[::-1].copy()


def _jitter(v, gen, sigma):
    return v + gen.normal(0.0, sigma, v.shape[0])


def _scaling(v, gen, sigma):
    return v * gen.normal(1.0, sigma)


def _spline_curve(gen, knots, sigma, length):
    knot_values = gen.normal(1.0, sigma, knots + 2)
    return K.natural_cubic_curve(knot_values, length)


def _magnitude_warp(v, gen, knots, sigma):
    return v * _spline_curve(gen, knots, sigma, v.shape[0])


def _time_warp(v, gen, knots, sigma):
    length = v.shape[0]
    rate = _spline_curve(gen, knots, sigma, length)
    rate = np.maximum(rate, _MIN_WARP_RATE)
    cum = np.cumsum(rate)
    span = cum[-1] - cum[0]
    warped = (cum - cum[0]) * ((length - 1.0) / span)
    warped[-1] = length - 1.0
    return K.interp_linear(warped, v, np.arange(length, dtype=np.float64))


def _window_warp(v, gen, window_ratio, scales):
    length = v.shape[0]
    wsize = max(2, int(round(window_ratio * length)))
    if wsize > length - 2:
        raise DomainError("window_warp: series too short for the warp window")
    start = int(gen.integers(1, length - wsize))
    if isinstance(scales, tuple):
        scale = float(scales[gen.integers(len(scales))])
    else:
        scale = float(scales)
    new_size = max(2, int(round(wsize * scale)))
    window = K.resample_linear(v[start : start + wsize], new_size)
    combined = np.concatenate([v[:start], window, v[start + wsize :]])
    return K.resample_linear(combined, length)


def _window_slice(v, gen, ratio):
    length = v.shape[0]
    wsize = min(length, max(2, int(round(ratio * length))))
    start = int(gen.integers(0, length - wsize + 1))
    return K.resample_linear(v[start : start + wsize], length)


def _magnify(v, gen, t0_lo, t0_hi):
    length = v.shape[0]
    if t0_hi > length - 2:
        raise DomainError("magnify: start range exceeds series length")
    t0 = int(gen.integers(t0_lo, t0_hi + 1))
    return K.resample_linear(v[t0:], length)


def _permutation(v, gen, max_segments):
    length = v.shape[0]
    if max_segments > length:
        raise DomainError("permutation: more segments than elements")
    n_seg = int(gen.integers(2, max_segments + 1))
    bounds = np.sort(gen.choice(length - 1, size=n_seg - 1, replace=False) + 1)
    segments = np.split(v, bounds)
    order = gen.permutation(n_seg)
    return np.concatenate([segments[i] for i in order])


def _dropout(v, gen, p):
    out = v.copy()
    out[gen.random(v.shape[0]) < p] = 0.0
    return out


def _convolve(v, gen, size):
    if size > v.shape[0]:
        raise DomainError("convolve: kernel exceeds series length")
    kernel = np.hanning(size)
    kernel = kernel / kernel.sum()
    return K.convolve_reflect(v, kernel)


def _pool(v, gen, size):
    if size > v.shape[0]:
        raise DomainError("pool: window exceeds series length")
    return K.pool_average(v, size)


def _quantize(v, gen, levels):
    return K.quantize_uniform(v, levels)


_APPLIERS = {
    "identity": _identity,
    "magnify": _magnify,
    "convolve": _convolve,
    "pool": _pool,
    "jitter": _jitter,
    "quantize": _quantize,
    "time_warp": _time_warp,
    "magnitude_warp": _magnitude_warp,
    "window_warp": _window_warp,
    "window_slice": _window_slice,
    "scaling": _scaling,
    "reverse": _reverse,
    "permutation": _permutation,
    "dropout": _dropout,
}


def apply(spec: TransformSpec, x: TimeSeries, rng: RngStream) -> TimeSeries:
    """Apply one transform to one sample under a dedicated random stream.

    Output length and label always equal the input's; identical
    (spec, x, stream) triples produce bit-identical output.
    """
    gen = rng.generator()
    out = _APPLIERS[spec.transform_id](x.values, gen, **spec.params)
    return TimeSeries(out, x.label)


# ---------------------------------------------------------------------------
# Catalogs.
# ---------------------------------------------------------------------------

# Fixed parameter values that have repeatedly worked on daily-returns series.
# The convolution window shape is Hann; its size is not pinned by the source
# settings, so the customary library default of 7 is used.
FIXED_CATALOG = (
    ("identity", {}),
    ("magnify", {"t0_lo": 50, "t0_hi": 150}),
    ("convolve", {"size": 7}),
    ("pool", {"size": 3}),
    ("jitter", {"sigma": 0.01}),
    ("quantize", {"levels": 25}),
    ("time_warp", {"knots": 4, "sigma": 0.2}),
    ("magnitude_warp", {"knots": 4, "sigma": 0.2}),
    ("window_warp", {"window_ratio": 0.1, "scales": (0.5, 2.0)}),
    ("scaling", {"sigma": 0.1}),
    ("reverse", {}),
)

# Magnitude-driven parameter ranges; one shared magnitude resolves them all.
MAGNITUDE_RANGES: dict[str, dict[str, MagnitudeRange]] = {
    "identity": {},
    "jitter": {"sigma": MagnitudeRange.continuous(0.01, 0.5)},
    "time_warp": {
        "knots": MagnitudeRange.discrete(3, 4, 5),
        "sigma": MagnitudeRange.continuous(0.01, 0.5),
    },
    "window_slice": {"ratio": MagnitudeRange.continuous(0.95, 0.6)},
    "window_warp": {
        "window_ratio": MagnitudeRange.continuous(0.1, 0.1),
        "scales": MagnitudeRange.continuous(0.1, 2.0),
    },
    "scaling": {"sigma": MagnitudeRange.continuous(0.1, 2.0)},
    "magnitude_warp": {
        "knots": MagnitudeRange.discrete(3, 4, 5),
        "sigma": MagnitudeRange.continuous(0.1, 2.0),
    },
    "permutation": {"max_segments": MagnitudeRange.discrete(3, 4, 5, 6)},
    "dropout": {"p": MagnitudeRange.continuous(0.05, 0.5)},
}

MAGNITUDE_CATALOG_IDS = (
    "identity",
    "jitter",
    "time_warp",
    "window_slice",
    "window_warp",
    "scaling",
    "magnitude_warp",
    "permutation",
    "dropout",
)


def fixed_catalog(transform_ids=None) -> tuple[TransformSpec, ...]:
    """Specs for the fixed-parameter catalog, optionally restricted to a subset."""
    by_id = dict(FIXED_CATALOG)
    if transform_ids is None:
        transform_ids = tuple(tid for tid, _ in FIXED_CATALOG)
    specs = []
    for tid in transform_ids:
        if tid not in by_id:
            raise DomainError(f"{tid!r} is not in the fixed-parameter catalog")
        specs.append(TransformSpec(tid, by_id[tid]))
    return tuple(specs)


def magnitude_catalog(magnitude: int, transform_ids=None) -> tuple[TransformSpec, ...]:
    """Specs for the tunable catalog with every range resolved at one magnitude."""
    if transform_ids is None:
        transform_ids = MAGNITUDE_CATALOG_IDS
    specs = []
    for tid in transform_ids:
        if tid not in MAGNITUDE_RANGES:
            raise DomainError(f"{tid!r} is not in the magnitude-driven catalog")
        params = {
            name: interpolate_magnitude(magnitude, mrange)
            for name, mrange in MAGNITUDE_RANGES[tid].items()
        }
        specs.append(TransformSpec(tid, params))
    return tuple(specs)
