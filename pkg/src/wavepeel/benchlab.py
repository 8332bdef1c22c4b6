"""Benchmark signals, noise protocol, baseline thresholds and Monte Carlo harness.

Denoising replications run in a process pool when ``workers > 1``; every
replication is a pure function of its seed (``base_seed + index``), results
are collected in index order and aggregated with exactly rounded sums, so
reports do not depend on the worker count.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import ggd
from .detmap import (
    ReducedMap,
    Regime,
    classify_regime,
    critical_constant,
    iteration_count,
    subcritical_kappa,
    supercritical_structure,
)
from .errors import ConfigError, DomainError, RegimeError
from .peeling import (
    FixedIterations,
    PeelingConfig,
    THRESHOLD_NAMES,
    apply_threshold,
    run_peeling,
    threshold_catalog,
)
from .wavelet import default_levels, dwt, flatten, idwt, is_power_of_two, unflatten

BENCHMARKS = ("Blocks", "Bumps", "HeaviSine", "Doppler")
BASELINES = ("Universal", "SURE")
METHODS = BASELINES + THRESHOLD_NAMES
# Noise scale fed to Universal / SURE: estimated std of the thresholded vector,
# std of the injected noise, or MAD of the finest detail level / 0.6745.
BASELINE_SIGMAS = ("sigma_z", "oracle", "mad")

_BUMP_POS = np.array([0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81])
_BLOCK_HGT = np.array([4, -5, 3, -4, 5, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2])
_BUMP_HGT = np.array([4, 5, 3, 4, 5, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2])
_BUMP_WTH = np.array([0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005])
HEAVISINE_JUMPS = (0.3, 0.72)
BLOCKS_BREAKPOINTS = tuple(_BUMP_POS)


def db(ratio):
    return 10.0 * math.log10(ratio)


def from_db(value):
    return 10.0 ** (value / 10.0)


def make_benchmark(name, N):
    """Classic wavelet test signal sampled at t = i/N, i = 1..N, with unit power."""
    if not (is_power_of_two(N) and N >= 64):
        raise DomainError(f"N must be a power of two >= 64, got {N}")
    t = np.arange(1, N + 1) / N
    if name == "Blocks":
        x = ((1 + np.sign(t[:, None] - _BUMP_POS)) * _BLOCK_HGT / 2).sum(axis=1)
    elif name == "Bumps":
        x = (_BUMP_HGT / (1 + np.abs((t[:, None] - _BUMP_POS) / _BUMP_WTH)) ** 4).sum(axis=1)
    elif name == "HeaviSine":
        x = 4 * np.sin(4 * np.pi * t) - np.sign(t - 0.3) - np.sign(0.72 - t)
    elif name == "Doppler":
        x = np.sqrt(t * (1 - t)) * np.sin(2 * np.pi * 1.05 / (t + 0.05))
    else:
        raise DomainError(f"unknown benchmark {name!r}; have {BENCHMARKS}")
    return x / math.sqrt(math.fsum(x * x) / N)


def add_noise_to_coeffs(clean_coeffs, u_n, snr, seed):
    """Add GGD(1, u_n) noise rescaled so that energy(clean)/energy(noise) == snr."""
    if not snr > 0:
        raise DomainError(f"snr must be > 0 (linear), got {snr!r}")
    clean = np.asarray(clean_coeffs, dtype=float)
    e_clean = math.fsum(clean * clean)
    if e_clean == 0:
        raise DomainError("clean coefficients have zero energy")
    raw = ggd.sample(ggd.make_params(1.0, u_n), seed, clean.size)
    noise = raw * math.sqrt(e_clean / (snr * math.fsum(raw * raw)))
    return clean + noise, noise


def snr_den(x, xhat):
    """10 log10(sum x^2 / sum (x - xhat)^2) in dB; +inf for a perfect estimate."""
    x = np.asarray(x, dtype=float)
    xhat = np.asarray(xhat, dtype=float)
    if x.shape != xhat.shape:
        raise DomainError(f"length mismatch: {x.shape} vs {xhat.shape}")
    resid = math.fsum((x - xhat) ** 2)
    if resid == 0:
        return math.inf
    return db(math.fsum(x * x) / resid)


def universal_threshold(N, sigma):
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    return sigma * math.sqrt(2.0 * math.log(N))


def mad_sigma(finest_detail):
    """Robust noise scale median(|d|) / 0.6745 from the finest detail level."""
    return float(np.median(np.abs(finest_detail))) / 0.6745


def sure_risk(c, t):
    """Stein risk N - 2 #{|c| <= t} + sum min(c^2, t^2) for unit-variance data."""
    a = np.abs(np.asarray(c, dtype=float))
    return a.size - 2 * np.count_nonzero(a <= t) + math.fsum(np.minimum(a * a, t * t))


def sure_threshold(coeffs, sigma):
    """Minimizer of the Stein risk over t in {0} U {|c_i|}, scaled back by sigma."""
    a = np.sort(np.abs(np.asarray(coeffs, dtype=float).ravel()) / sigma)
    n = a.size
    if n == 0:
        raise DomainError("empty coefficient vector")
    cand = np.concatenate([[0.0], a])
    counts = np.searchsorted(a, cand, side="right")
    sq = a * a
    head = np.concatenate([[0.0], np.cumsum(sq)])
    risk = n - 2 * counts + head[counts] + (n - counts) * cand * cand
    return sigma * float(cand[int(np.argmin(risk))])


def ks_distance(samples, params):
    """Kolmogorov-Smirnov distance between the sample and a fitted GGD."""
    z = np.sort(np.asarray(samples, dtype=float))
    n = z.size
    F = ggd.cdf(params, z)
    hi = np.arange(1, n + 1) / n - F
    lo = F - np.arange(0, n) / n
    return float(max(hi.max(), lo.max()))


def _fsum_mean_std(values):
    vals = [float(v) for v in values]
    n = len(vals)
    mean = math.fsum(vals) / n
    if n < 2:
        return mean, 0.0
    return mean, math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / (n - 1))


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    signal_name: str = "Blocks"
    N: int = 2048
    snr_in: float = 3.0
    snr_in_db: bool = True
    noise_shape: float = 2.0
    replications: int = 100
    base_seed: int = 0
    methods: tuple = ("Universal", "SURE", "T_c05", "T_c15", "T_cm")
    wavelet: str = "sym8"
    levels: Optional[int] = None
    threshold_mode: str = "soft"
    include_approx: bool = True
    center: bool = False
    baseline_sigma: str = "sigma_z"
    log_base: str = "e"
    gof: bool = False

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not is_power_of_two(self.N):
            raise ConfigError(f"N must be a power of two, got {self.N}")
        if not self.noise_shape > 0:
            raise ConfigError("noise_shape must be > 0")
        if self.signal_name not in BENCHMARKS:
            raise ConfigError(f"unknown signal {self.signal_name!r}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; have {METHODS}")
        if self.baseline_sigma not in BASELINE_SIGMAS:
            raise ConfigError(f"baseline_sigma must be one of {BASELINE_SIGMAS}")
        if self.threshold_mode not in ("soft", "hard"):
            raise ConfigError(f"threshold_mode must be soft or hard, got {self.threshold_mode!r}")

    @property
    def snr_linear(self):
        return from_db(self.snr_in) if self.snr_in_db else self.snr_in

    @property
    def n_levels(self):
        return self.levels if self.levels is not None else default_levels(self.N)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["methods"] = list(self.methods)
        return d


@dataclass(frozen=True)
class ConvergenceConfig:
    u: float = 2.0
    F_factor: float = 1.15
    N_grid: tuple = (1024, 4096, 16384)
    alpha: float = 0.25
    eta: float = 0.5
    replications: int = 200
    base_seed: int = 0
    sigma: float = 1.0

    def __post_init__(self):
        if self.F_factor == 1.0:
            raise ConfigError("F_factor = 1 (critical case) is not supported")
        if not 0 < self.alpha < 0.5:
            raise ConfigError("alpha must lie in (0, 1/2)")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["N_grid"] = list(self.N_grid)
        return d


def _coerce(raw, typ, key, lineno):
    text = raw.strip()
    try:
        if typ in ("bool", bool):
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        if typ in ("int", int):
            return int(text)
        if typ in ("float", float):
            return float(text)
        if typ in ("tuple", tuple):
            return tuple(s.strip() for s in text.split(",") if s.strip())
        if typ in ("Optional[int]",):
            return None if text.lower() in ("", "none", "auto") else int(text)
        return text
    except ValueError:
        raise ConfigError(f"bad value {text!r} for {key}", lineno) from None


def parse_config(text, cls=ExperimentConfig):
    """Parse flat ``key = value`` text ('#' comments) into ``cls``."""
    fields = {f.name: f.type for f in dataclasses.fields(cls)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", lineno)
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in fields:
            raise ConfigError(f"unknown key {key!r}", lineno)
        val = _coerce(raw, fields[key], key, lineno)
        if key == "N_grid":
            try:
                val = tuple(int(v) for v in val)
            except ValueError:
                raise ConfigError(f"bad value {raw!r} for N_grid", lineno) from None
        values[key] = val
    return cls(**values)


def format_config(cfg):
    lines = []
    for k, v in cfg.to_dict().items():
        if isinstance(v, list):
            v = ", ".join(str(x) for x in v)
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# denoising experiment


@dataclass
class DenoiseReport:
    config: ExperimentConfig
    mean_snr_den: dict
    std_snr_den: dict
    replications: list = field(default_factory=list)
    estimates: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "config": self.config.to_dict(),
            "mean_snr_den": self.mean_snr_den,
            "std_snr_den": self.std_snr_den,
            "estimates": self.estimates,
            "replications": self.replications,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def csv_rows(self):
        c = self.config
        return [
            {
                "signal": c.signal_name,
                "N": c.N,
                "u_n": c.noise_shape,
                "snr_in_db": round(db(c.snr_linear), 12),
                "method": m,
                "mean_snr_den": self.mean_snr_den[m],
                "std": self.std_snr_den[m],
                "replications": c.replications,
            }
            for m in c.methods
        ]

    def to_csv(self):
        return rows_to_csv(self.csv_rows())


def rows_to_csv(rows, fieldnames=None):
    buf = io.StringIO()
    if fieldnames is None:
        fieldnames = list(rows[0]) if rows else []
    w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def method_thresholds(z, methods, sigma_hat, u_hat, log_base="e"):
    """Threshold for each requested method on coefficient vector ``z``."""
    out = {}
    if "Universal" in methods:
        out["Universal"] = universal_threshold(z.size, sigma_hat)
    if "SURE" in methods:
        out["SURE"] = sure_threshold(z, sigma_hat)
    peel = [m for m in methods if m in THRESHOLD_NAMES]
    if peel:
        needs_data = any(m not in ("T_c05", "T_c15", "T_cm") for m in peel)
        cat = threshold_catalog(sigma_hat, u_hat, z if needs_data else None, z.size, log_base)
        for m in peel:
            out[m] = cat[m]
    return out


def run_replication(config, index):
    """One denoising replication with seed ``base_seed + index``."""
    seed = config.base_seed + index
    signal = make_benchmark(config.signal_name, config.N)
    coeffs = dwt(signal, config.wavelet, config.n_levels)
    clean, layout = flatten(coeffs, include_approx=True)
    noisy, noise = add_noise_to_coeffs(clean, config.noise_shape, config.snr_linear, seed)

    start = 0 if config.include_approx else layout.approx_length
    z = noisy[start:]
    mu_hat = math.fsum(z) / z.size
    zc = z - mu_hat if config.center else z
    est = ggd.estimate_params(zc)
    thresholds = method_thresholds(zc, config.methods, est.sigma, est.u, config.log_base)
    if config.baseline_sigma != "sigma_z":
        if config.baseline_sigma == "oracle":
            base = float(np.std(noise, ddof=1))
        else:
            base = mad_sigma(noisy[-layout.detail_lengths[-1] :])
        thresholds.update(method_thresholds(zc, [m for m in config.methods if m in BASELINES], base, est.u))

    result = {
        "index": index,
        "seed": seed,
        "sigma_hat": est.sigma,
        "u_hat": est.u,
        "mu_hat": mu_hat,
        "input_snr_db": db(math.fsum(clean * clean) / math.fsum(noise * noise)),
        "thresholds": thresholds,
        "snr_den": {},
    }
    if config.gof:
        result["ks_distance"] = ks_distance(zc, est)
    for m in config.methods:
        shrunk = apply_threshold(zc, thresholds[m], config.threshold_mode)
        if config.center:
            shrunk = shrunk + mu_hat
        full = np.concatenate([noisy[:start], shrunk])
        xhat = idwt(unflatten(full, layout))
        result["snr_den"][m] = snr_den(signal, xhat)
    return result


def _run_replication_star(args):
    config, index = args
    try:
        return run_replication(config, index)
    except Exception as exc:
        raise RuntimeError(
            f"replication {index} (seed {config.base_seed + index}) failed: {exc}"
        ) from exc


def _map_ordered(func, jobs, workers):
    if workers <= 1:
        return [func(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def run_denoise_experiment(config, workers=1):
    jobs = [(config, i) for i in range(config.replications)]
    reps = _map_ordered(_run_replication_star, jobs, workers)
    means, stds = {}, {}
    for m in config.methods:
        means[m], stds[m] = _fsum_mean_std(r["snr_den"][m] for r in reps)
    est = {}
    for key in ("sigma_hat", "u_hat", "mu_hat") + (("ks_distance",) if config.gof else ()):
        est[key + "_mean"], est[key + "_std"] = _fsum_mean_std(r[key] for r in reps)
    return DenoiseReport(config, means, stds, reps, est)


# --------------------------------------------------------------------------
# convergence experiment


def _convergence_replication(args):
    u, F, N, n_iter, seed, sigma = args
    z = ggd.sample(ggd.make_params(sigma, u), seed, N)
    return run_peeling(z, PeelingConfig(F, FixedIterations(n_iter))).u_sequence[-1]


def run_convergence_experiment(config, workers=1):
    """Exceedance frequencies of the noisy iteration over ``config.N_grid``.

    Supercritical factors use n = iteration_count(N, g'(x*), alpha, eta) and
    count |U_n - sigma^2 x*| >= sigma^2 N^-alpha. Subcritical factors use
    n = ceil(Q_N) with kappa = sup g(x)/x and count U_n >= N^-alpha.
    """
    u, sigma = config.u, config.sigma
    crit = critical_constant(u)
    F = config.F_factor * crit.F_c
    m = ReducedMap(F, u)
    regime = classify_regime(F, u, crit)
    if regime is Regime.CRITICAL:
        raise RegimeError(f"F_factor={config.F_factor} is critical; only sub/supercritical runs")
    supercritical = regime is Regime.SUPERCRITICAL
    if supercritical:
        s = supercritical_structure(m, crit)
    else:
        kappa = subcritical_kappa(m)
    s2 = sigma * sigma
    rows = []
    for N in config.N_grid:
        if supercritical:
            n_iter = iteration_count(N, s.contraction, config.alpha, config.eta)
        else:
            q = max(1 + (config.alpha * math.log(N) + math.log(2 * m.g_inf)) / math.log(1 / kappa), 1)
            n_iter = math.ceil(q)
        jobs = [(u, F, N, n_iter, config.base_seed + r, sigma) for r in range(config.replications)]
        finals = np.array(_map_ordered(_convergence_replication, jobs, workers))
        band = N ** -config.alpha
        row = {"N": N, "n_iter": n_iter, "band": band, "replications": config.replications}
        if supercritical:
            dev = np.abs(finals - s2 * s.x_star)
            row.update(
                regime="Supercritical",
                x_star=s.x_star,
                contraction=s.contraction,
                exceed_freq=float(np.count_nonzero(dev >= s2 * band)) / len(dev),
                mean_abs_dev=math.fsum(dev) / len(dev),
            )
        else:
            row.update(
                regime="Subcritical",
                kappa=kappa,
                exceed_freq=float(np.count_nonzero(finals >= band)) / len(finals),
                mean_final=math.fsum(finals) / len(finals),
            )
        rows.append(row)
    return rows


def fluctuation_profile(u, F_factor, N, n_iter, replications, base_seed=0, sigma=1.0):
    """|eps_k| = |g_N(U_k) - g(U_k)| per step k, one row per replication."""
    crit = critical_constant(u)
    m = ReducedMap(F_factor * crit.F_c, u)
    p = ggd.make_params(sigma, u)
    out = np.empty((replications, n_iter))
    for r in range(replications):
        tr = run_peeling(
            ggd.sample(p, base_seed + r, N),
            PeelingConfig(m.F, FixedIterations(n_iter)),
            reference=(sigma, m),
        )
        out[r] = np.abs(tr.fluctuations)
    return out

