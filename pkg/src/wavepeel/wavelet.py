"""Periodized orthogonal DWT (Mallat pyramid) with haar and sym8 filters."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

_SYM8_LOWPASS = (
    -0.0033824159510061256,
    -0.0005421323317911481,
    0.03169508781149298,
    0.007607487324917605,
    -0.1432942383508097,
    -0.061273359067658524,
    0.4813596512583722,
    0.7771857517005235,
    0.3644418948353314,
    -0.05194583810770904,
    -0.027219029917056003,
    0.049137179673607506,
    0.003808752013890615,
    -0.01495225833704823,
    -0.0003029205147213668,
    0.0018899503327594609,
)
_HAAR_LOWPASS = (1 / math.sqrt(2), 1 / math.sqrt(2))


@dataclass(frozen=True)
class FilterPair:
    name: str
    lowpass: np.ndarray
    highpass: np.ndarray = field(init=False)

    def __post_init__(self):
        h = np.asarray(self.lowpass, dtype=float)
        L = h.size
        g = ((-1.0) ** np.arange(L)) * h[::-1]
        object.__setattr__(self, "lowpass", h)
        object.__setattr__(self, "highpass", g)

    def __len__(self):
        return self.lowpass.size


FILTERS = {
    "haar": FilterPair("haar", _HAAR_LOWPASS),
    "sym8": FilterPair("sym8", _SYM8_LOWPASS),
}


def get_filter(name):
    try:
        return FILTERS[name]
    except KeyError:
        raise DomainError(f"unknown wavelet filter {name!r}; have {sorted(FILTERS)}") from None


@dataclass
class WaveletCoeffs:
    approx: np.ndarray
    details: list  # coarsest level first
    original_length: int
    levels: int
    filter_name: str

    def energy(self):
        return math.fsum(np.concatenate([self.approx] + list(self.details)) ** 2)


@dataclass(frozen=True)
class Layout:
    """Block boundaries of a flattened coefficient vector."""

    approx_length: int
    detail_lengths: tuple
    include_approx: bool
    original_length: int
    levels: int
    filter_name: str

    @property
    def flat_length(self):
        return sum(self.detail_lengths) + (self.approx_length if self.include_approx else 0)

    def to_dict(self):
        return {
            "approx_length": self.approx_length,
            "detail_lengths": list(self.detail_lengths),
            "include_approx": self.include_approx,
            "original_length": self.original_length,
            "levels": self.levels,
            "filter_name": self.filter_name,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            approx_length=int(d["approx_length"]),
            detail_lengths=tuple(int(v) for v in d["detail_lengths"]),
            include_approx=bool(d["include_approx"]),
            original_length=int(d["original_length"]),
            levels=int(d["levels"]),
            filter_name=d["filter_name"],
        )


def is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


def max_levels(n, filt):
    # The input to the last level must be at least as long as the filter.
    return int(math.log2(n)) - math.ceil(math.log2(len(filt))) + 1


def default_levels(n):
    """log2(n) - 4, i.e. a coarse approximation block of 16 coefficients."""
    return max(1, int(math.log2(n)) - 4)


def _check_levels(n, filt, levels):
    if not is_power_of_two(n) or n < 2:
        raise DomainError(f"signal length must be a power of two, got {n}")
    top = max_levels(n, filt)
    if not 1 <= levels <= top:
        raise DomainError(
            f"levels={levels} invalid for length {n} with {filt.name} "
            f"(allowed 1..{top})"
        )


def _analysis(x, filt):
    n = x.size
    L = len(filt)
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(L)[None, :]) % n
    win = x[idx]
    return win @ filt.lowpass, win @ filt.highpass


def _synthesis(a, d, filt):
    n = 2 * a.size
    L = len(filt)
    idx = (2 * np.arange(a.size)[:, None] + np.arange(L)[None, :]) % n
    contrib = a[:, None] * filt.lowpass[None, :] + d[:, None] * filt.highpass[None, :]
    out = np.zeros(n)
    np.add.at(out, idx.ravel(), contrib.ravel())
    return out


def dwt(signal, filt, levels):
    if isinstance(filt, str):
        filt = get_filter(filt)
    x = np.asarray(signal, dtype=float).ravel()
    _check_levels(x.size, filt, levels)
    details = []
    a = x
    for _ in range(levels):
        a, d = _analysis(a, filt)
        details.append(d)
    return WaveletCoeffs(
        approx=a,
        details=details[::-1],
        original_length=x.size,
        levels=levels,
        filter_name=filt.name,
    )


def idwt(coeffs, filt=None):
    if filt is None:
        filt = coeffs.filter_name
    if isinstance(filt, str):
        filt = get_filter(filt)
    if filt.name != coeffs.filter_name:
        raise DomainError(f"coefficients are {coeffs.filter_name}, filter is {filt.name}")
    if len(coeffs.details) != coeffs.levels:
        raise DomainError("detail block count differs from levels")
    a = np.asarray(coeffs.approx, dtype=float)
    for d in coeffs.details:
        d = np.asarray(d, dtype=float)
        if d.size != a.size:
            raise DomainError(f"shape mismatch: approx {a.size} vs detail {d.size}")
        a = _synthesis(a, d, filt)
    if a.size != coeffs.original_length:
        raise DomainError("reconstructed length differs from original_length")
    return a


def flatten(coeffs, include_approx=True):
    """Concatenate [approx?, coarsest detail, ..., finest detail]."""
    blocks = ([coeffs.approx] if include_approx else []) + list(coeffs.details)
    layout = Layout(
        approx_length=len(coeffs.approx),
        detail_lengths=tuple(len(d) for d in coeffs.details),
        include_approx=include_approx,
        original_length=coeffs.original_length,
        levels=coeffs.levels,
        filter_name=coeffs.filter_name,
    )
    return np.concatenate(blocks).astype(float), layout


def unflatten(vector, layout, approx=None):
    """Inverse of :func:`flatten`.

    When the layout excludes the approximation block it must be passed in
    ``approx`` (defaults to zeros).
    """
    v = np.asarray(vector, dtype=float).ravel()
    if v.size != layout.flat_length:
        raise DomainError(f"vector length {v.size} != layout length {layout.flat_length}")
    pos = 0
    if layout.include_approx:
        a = v[: layout.approx_length].copy()
        pos = layout.approx_length
    else:
        a = np.zeros(layout.approx_length) if approx is None else np.asarray(approx, float).copy()
    details = []
    for n in layout.detail_lengths:
        details.append(v[pos : pos + n].copy())
        pos += n
    return WaveletCoeffs(a, details, layout.original_length, layout.levels, layout.filter_name)


def coeffs_to_json(coeffs, include_approx=True):
    _, layout = flatten(coeffs, include_approx)
    return json.dumps(
        {
            "approx": coeffs.approx.tolist(),
            "details": [d.tolist() for d in coeffs.details],
            "layout": layout.to_dict(),
        }
    )


def coeffs_from_json(text):
    d = json.loads(text)
    lay = Layout.from_dict(d["layout"])
    return WaveletCoeffs(
        approx=np.asarray(d["approx"], dtype=float),
        details=[np.asarray(v, dtype=float) for v in d["details"]],
        original_length=lay.original_length,
        levels=lay.levels,
        filter_name=lay.filter_name,
    )
