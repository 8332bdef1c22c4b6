"""Stochastic peeling iteration on a coefficient vector.

Squared coefficients Y = z**2 drive the update

    U_{k+1} = g_N(U_k) = (F^2 / N) * sum_{Y(q) < U_k} Y(q),    U_0 = +inf,

and the final threshold is T_f = sqrt(U_n). Partial sums are exactly rounded
(``math.fsum``) so that results do not depend on summation order and an
exact fixed point U_{k+1} == U_k is detected reliably.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .detmap import (
    ReducedMap,
    critical_constant,
    fm_bound,
    g_value_scaled,
    supercritical_structure,
)
from .errors import DomainError

STOP_FIXED = "fixed_iterations"
STOP_ENERGY = "energy_drop"
STOP_EXACT = "exact_fixed_point"
STOP_COLLAPSED = "collapsed"
STOP_SAFEGUARD = "max_iterations"


@dataclass(frozen=True)
class FixedIterations:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"FixedIterations needs n >= 1, got {self.n}")


@dataclass(frozen=True)
class EnergyDrop:
    eps: float = 0.0

    def __post_init__(self):
        if not self.eps >= 0:
            raise DomainError(f"EnergyDrop needs eps >= 0, got {self.eps}")


@dataclass(frozen=True)
class ExactFixedPoint:
    pass


StopRule = Union[FixedIterations, EnergyDrop, ExactFixedPoint]


@dataclass(frozen=True)
class PeelingConfig:
    F: float
    stop_rule: StopRule = field(default_factory=ExactFixedPoint)
    max_iterations: int = 100_000

    def __post_init__(self):
        if not self.F > 0:
            raise DomainError(f"F must be > 0, got {self.F}")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")


@dataclass
class PeelingTrace:
    u_sequence: list
    t_final: float
    iterations_run: int
    stop_reason: str
    fluctuations: Optional[list] = None

    def to_dict(self):
        return {
            "u": [_json_float(v) for v in self.u_sequence],
            "t_final": self.t_final,
            "iterations": self.iterations_run,
            "stop_reason": self.stop_reason,
            "fluctuations": self.fluctuations,
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        return cls(
            u_sequence=[math.inf if v == "inf" else float(v) for v in d["u"]],
            t_final=float(d["t_final"]),
            iterations_run=int(d["iterations"]),
            stop_reason=d["stop_reason"],
            fluctuations=d.get("fluctuations"),
        )


def _json_float(v):
    return "inf" if math.isinf(v) else v


def _squares(coeffs):
    z = np.asarray(coeffs, dtype=float).ravel()
    if z.size == 0:
        raise DomainError("coefficient vector is empty")
    return z * z


def empirical_g(coeffs, F, x):
    """(F^2/N) * sum of squared coefficients strictly below ``x``."""
    y = _squares(coeffs)
    if not x >= 0:
        raise DomainError(f"x must be >= 0, got {x!r}")
    sel = y if math.isinf(x) else y[y < x]
    return F * F * math.fsum(sel) / y.size


class _EmpiricalMap:
    """g_N with the squares sorted once; memoized on the count below x."""

    def __init__(self, coeffs, F):
        self.y = np.sort(_squares(coeffs))
        self.n = self.y.size
        self.scale = F * F / self.n
        self._cache = {}

    def __call__(self, x):
        k = self.n if math.isinf(x) else int(np.searchsorted(self.y, x, side="left"))
        v = self._cache.get(k)
        if v is None:
            v = self.scale * math.fsum(self.y[:k])
            self._cache[k] = v
        return v


def run_peeling(coeffs, config, reference=None):
    """Iterate the empirical map from U_0 = +inf until the stop rule fires.

    ``reference`` is an optional ``(sigma, ReducedMap)``; when given, the
    fluctuation g_N(U_k) - g_sigma(U_k) is recorded for every step.
    """
    gN = _EmpiricalMap(coeffs, config.F)
    rule = config.stop_rule
    if reference is not None:
        sigma, ref_map = reference
        if not math.isclose(ref_map.F, config.F, rel_tol=1e-12):
            raise DomainError("reference map F differs from the peeling F")
    us = [math.inf]
    fluct = [] if reference is not None else None
    reason = STOP_SAFEGUARD
    target = rule.n if isinstance(rule, FixedIterations) else config.max_iterations
    for k in range(min(target, config.max_iterations)):
        cur = us[-1]
        nxt = gN(cur)
        if fluct is not None:
            fluct.append(nxt - g_value_scaled(sigma, ref_map, cur))
        us.append(nxt)
        if isinstance(rule, FixedIterations):
            if len(us) - 1 == rule.n:
                reason = STOP_FIXED
            continue
        if nxt == 0.0:
            reason = STOP_COLLAPSED
            break
        if isinstance(rule, ExactFixedPoint) and nxt == cur:
            reason = STOP_EXACT
            break
        if isinstance(rule, EnergyDrop) and gN.n * (cur - nxt) / config.F ** 2 <= rule.eps:
            reason = STOP_ENERGY
            break
    return PeelingTrace(
        u_sequence=us,
        t_final=math.sqrt(us[-1]),
        iterations_run=len(us) - 1,
        stop_reason=reason,
        fluctuations=fluct,
    )


def log_iterations(N, base="e"):
    """Iteration budget ceil(log N) for the hatted thresholds."""
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    log = {"e": math.log, "2": math.log2, "10": math.log10}[str(base)]
    return max(1, math.ceil(log(N)))


CATALOG_FACTORS = {"c05": 1.05, "c15": 1.15}
DETERMINISTIC_NAMES = ("T_c05", "T_c15", "T_cm")
ITERATIVE_NAMES = ("That_c05", "That_c15", "That_cm", "T_m")
THRESHOLD_NAMES = DETERMINISTIC_NAMES + ITERATIVE_NAMES


def catalog_factors(u):
    """Peeling factors (F_05, F_15, F_m) for shape ``u``."""
    crit = critical_constant(u)
    fm = fm_bound(u)
    assert fm > crit.F_c, f"F_m={fm} not above F_c={crit.F_c} (u={u})"
    return {"c05": 1.05 * crit.F_c, "c15": 1.15 * crit.F_c, "cm": fm}, crit


def threshold_catalog(sigma, u, coeffs=None, N=None, log_base="e"):
    """The seven thresholds, keyed by ``THRESHOLD_NAMES``.

    Deterministic ones are sigma * sqrt(x*) at F in {1.05 F_c, 1.15 F_c, F_m};
    hatted ones run ceil(log N) peeling steps on ``coeffs`` at the same factors;
    T_m runs to the exact fixed point at F_m. Without ``coeffs`` only the
    deterministic entries are returned.
    """
    factors, crit = catalog_factors(u)
    out = {}
    for key in ("c05", "c15", "cm"):
        s = supercritical_structure(ReducedMap(factors[key], u), crit)
        out[f"T_{key}"] = sigma * math.sqrt(s.x_star)
    if coeffs is None:
        return out
    if N is None:
        N = np.asarray(coeffs).size
    n_iter = log_iterations(N, log_base)
    for key in ("c05", "c15", "cm"):
        tr = run_peeling(coeffs, PeelingConfig(factors[key], FixedIterations(n_iter)))
        out[f"That_{key}"] = tr.t_final
    out["T_m"] = run_peeling(coeffs, PeelingConfig(factors["cm"], ExactFixedPoint())).t_final
    return out


def apply_threshold(coeffs, T, mode="hard"):
    """Hard rule keeps |z| >= T; soft rule returns sign(z) * max(|z| - T, 0)."""
    if not T >= 0:
        raise DomainError(f"threshold must be >= 0, got {T!r}")
    z = np.asarray(coeffs, dtype=float)
    if mode == "hard":
        return np.where(np.abs(z) >= T, z, 0.0)
    if mode == "soft":
        return np.sign(z) * np.maximum(np.abs(z) - T, 0.0)
    raise ValueError(f"unknown thresholding mode {mode!r}")
