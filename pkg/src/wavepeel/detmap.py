"""Deterministic peeling map and its fixed-point structure.

Everything is in reduced form (unit standard deviation):

    g(x) = F^2 * P(3/u, (beta sqrt(x))^u)

is the large-N limit of the empirical update on squared coefficients. A
general sigma enters only through g_sigma(x) = sigma^2 g(x / sigma^2).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

from .errors import ConvergenceError, DomainError, RegimeError
from .ggd import make_params
from .specfun import ln_gamma, reg_lower_inc_gamma

SHAPE_RANGE = (0.05, 20.0)
TANGENCY_RATIO = 1.001
CRITICAL_BAND = 1e-6
X_TOL = 1e-12


class Regime(enum.Enum):
    SUBCRITICAL = "Subcritical"
    CRITICAL = "Critical"
    SUPERCRITICAL = "Supercritical"


@dataclass(frozen=True)
class ReducedMap:
    """The map g for peeling factor ``F`` and shape ``u`` at sigma = 1."""

    F: float
    u: float
    beta: float = field(init=False)
    alpha: float = field(init=False)

    def __post_init__(self):
        if not self.F > 0:
            raise DomainError(f"peeling factor F must be > 0, got {self.F!r}")
        p = make_params(1.0, self.u)
        object.__setattr__(self, "beta", p.beta)
        object.__setattr__(self, "alpha", p.alpha)

    @property
    def g_inf(self):
        return self.F * self.F

    @property
    def inflection(self):
        """Boundary between the convex and concave parts of g."""
        return self.beta ** -2 * self.u ** (-2.0 / self.u)

    def __call__(self, x):
        return g_value(self, x)


@dataclass(frozen=True)
class CriticalSolution:
    u: float
    F_c: float
    x_star_c: float


@dataclass(frozen=True)
class SupercriticalStructure:
    l1: float
    x_star: float
    contraction: float


def _check_x(x):
    x = float(x)
    if not x >= 0:
        raise DomainError(f"x must be >= 0, got {x!r}")
    return x


def g_value(m, x):
    x = _check_x(x)
    if math.isinf(x):
        return m.g_inf
    return m.g_inf * reg_lower_inc_gamma((m.beta * math.sqrt(x)) ** m.u, 3.0 / m.u)


def g_value_scaled(sigma, m, x):
    """g for a coefficient law of standard deviation ``sigma``."""
    if not sigma > 0:
        raise DomainError(f"sigma must be > 0, got {sigma!r}")
    x = _check_x(x)
    s2 = sigma * sigma
    return s2 * g_value(m, x / s2)


def g_derivative(m, x):
    x = float(x)
    if not x > 0:
        raise DomainError(f"g' needs x > 0, got {x!r}")
    if math.isinf(x):
        return 0.0
    s = (m.beta * math.sqrt(x)) ** m.u
    return m.g_inf * m.alpha * math.sqrt(x) * math.exp(-s)


def safeguarded_root(f, lo, hi, fprime=None, xtol=X_TOL, maxiter=500):
    """Root of ``f`` in [lo, hi] with f(lo), f(hi) of opposite signs.

    Newton steps from the current iterate when a derivative is supplied and
    the step lands inside the bracket; bisection otherwise.
    """
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise ConvergenceError(f"no sign change on bracket [{lo!r}, {hi!r}]")
    if f_lo > 0:
        # Orient so that f(lo) < 0 < f(hi).
        f, fprime = (lambda t, f=f: -f(t)), (None if fprime is None else (lambda t, d=fprime: -d(t)))
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        fx = f(x)
        if fx == 0:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        if hi - lo <= xtol * max(1.0, abs(x)):
            return 0.5 * (lo + hi)
        nxt = None
        if fprime is not None:
            d = fprime(x)
            if d != 0 and math.isfinite(d):
                cand = x - fx / d
                if lo < cand < hi:
                    nxt = cand
        if nxt is None:
            nxt = 0.5 * (lo + hi)
        elif abs(nxt - x) <= 0.25 * xtol * max(1.0, abs(x)):
            return nxt
        x = nxt
    raise ConvergenceError(f"root finder exceeded {maxiter} iterations on [{lo!r}, {hi!r}]")


def critical_constant(u):
    """Solve g'(r) = 1, g(r) = r jointly for (F_c, x*_c).

    F^2 is eliminated with the slope equation, F^2 = e^s / (alpha sqrt r) where
    s = (beta sqrt r)^u, leaving a scalar equation in r that is solved in log
    form: ln P(3/u, s) + s - ln alpha - 1.5 ln r = 0.
    """
    u = float(u)
    if not SHAPE_RANGE[0] <= u <= SHAPE_RANGE[1]:
        raise DomainError(f"critical_constant supports u in {SHAPE_RANGE}, got {u}")
    p = make_params(1.0, u)
    beta, alpha = p.beta, p.alpha
    a = 3.0 / u
    ln_alpha = math.log(alpha)
    lg_a = ln_gamma(a)

    def s_of(r):
        return (beta * math.sqrt(r)) ** u

    def h(r):
        s = s_of(r)
        return math.log(reg_lower_inc_gamma(s, a)) + s - ln_alpha - 1.5 * math.log(r)

    def dh(r):
        s = s_of(r)
        ds = 0.5 * u * s / r
        dlogp = math.exp(a * math.log(s) - s - lg_a - math.log(reg_lower_inc_gamma(s, a)))
        return (dlogp / s) * ds + ds - 1.5 / r

    r0 = beta ** -2 * u ** (-2.0 / u)
    if not h(r0) < 0:
        raise ConvergenceError(f"critical equation not negative at inflection r0={r0} (u={u})")
    hi = 2.0 * r0
    while h(hi) <= 0:
        hi *= 2.0
        if hi > 2.0 ** 40 * r0:
            raise ConvergenceError(f"no sign change for critical equation on [{r0}, {hi}] (u={u})")
    r = safeguarded_root(h, r0, hi, dh)
    F_c = math.sqrt(math.exp(s_of(r) - ln_alpha - 0.5 * math.log(r)))
    sol = CriticalSolution(u=u, F_c=F_c, x_star_c=r)
    res_slope, res_fix = critical_residuals(sol)
    if max(abs(res_slope), abs(res_fix)) > 1e-9:
        raise ConvergenceError(
            f"critical system residuals too large for u={u}: {res_slope:.3g}, {res_fix:.3g}"
        )
    return sol


def critical_residuals(sol):
    """(g'(r) - 1, g(r) - r) at F = F_c, r = x*_c."""
    m = ReducedMap(sol.F_c, sol.u)
    return g_derivative(m, sol.x_star_c) - 1.0, g_value(m, sol.x_star_c) - sol.x_star_c


def fm_bound(u):
    """Older sufficient peeling factor sqrt(3 Gamma(1/u)/u * (u e)^(1/u))."""
    u = float(u)
    if not u > 0:
        raise DomainError(f"u must be > 0, got {u!r}")
    log_val = math.log(3.0) + ln_gamma(1.0 / u) - math.log(u) + (math.log(u) + 1.0) / u
    return math.exp(0.5 * log_val)


def supercritical_structure(m, crit=None):
    """Unstable fixed point l1, stable fixed point x* and g'(x*) for F > F_c."""
    if crit is None:
        crit = critical_constant(m.u)
    if not m.F > crit.F_c:
        raise RegimeError(f"F={m.F} is not above F_c={crit.F_c} (u={m.u})")
    if m.F / crit.F_c < TANGENCY_RATIO:
        warnings.warn(
            f"F/F_c = {m.F / crit.F_c:.6f} < {TANGENCY_RATIO}: fixed points near tangency",
            RuntimeWarning,
            stacklevel=2,
        )

    def d(x):
        return g_value(m, x) - x

    def dd(x):
        return g_derivative(m, x) - 1.0

    xc = crit.x_star_c
    lo = xc * 1e-3
    while d(lo) >= 0:
        lo *= 1e-3
        if lo < 1e-300:
            raise ConvergenceError("could not bracket l1 from below")
    l1 = safeguarded_root(d, lo, xc, dd)
    x_star = safeguarded_root(d, xc, m.g_inf, dd)
    return SupercriticalStructure(l1=l1, x_star=x_star, contraction=g_derivative(m, x_star))


def classify_regime(F, u, crit=None):
    if crit is None:
        crit = critical_constant(u)
    ratio = F / crit.F_c
    if abs(ratio - 1.0) <= CRITICAL_BAND:
        return Regime.CRITICAL
    return Regime.SUBCRITICAL if ratio < 1.0 else Regime.SUPERCRITICAL


def iteration_count(N, contraction, alpha, eta):
    """floor(C alpha ln N) + 1 with C = -1/ln(contraction) + eta."""
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    if not 0 < contraction < 1:
        raise DomainError(f"contraction must lie in (0, 1), got {contraction}")
    C = -1.0 / math.log(contraction) + eta
    return int(math.floor(C * alpha * math.log(N))) + 1


def orbit(m, n):
    """x_1 .. x_n of x_{k+1} = g(x_k) started at x_0 = +inf."""
    xs = []
    x = math.inf
    for _ in range(n):
        x = g_value(m, x)
        xs.append(x)
    return xs


def _golden_max(f, a, b, tol=1e-12, maxiter=200):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if abs(b - a) <= tol * (abs(c) + abs(d)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def subcritical_kappa(m, grid_points=10_000):
    """sup_{x>0} g(x)/x, located on a log grid and refined by golden section."""
    r0 = m.inflection
    lo_exp, hi_exp = math.log(r0) - 12.0, math.log(max(m.g_inf, r0)) + 12.0
    step = (hi_exp - lo_exp) / (grid_points - 1)

    def ratio(x):
        return g_value(m, x) / x

    best_i, best = 0, -math.inf
    for i in range(grid_points):
        v = ratio(math.exp(lo_exp + i * step))
        if v > best:
            best_i, best = i, v
    a = math.exp(lo_exp + max(best_i - 1, 0) * step)
    b = math.exp(lo_exp + min(best_i + 1, grid_points - 1) * step)
    _, refined = _golden_max(ratio, a, b)
    return max(best, refined)
