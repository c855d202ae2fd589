"""Curve sampling, peak extraction, regime labels and the critical angle.

All operations are deterministic; curve sampling is a pure loop over the
requested grid (safe to parallelize externally, nothing here mutates shared
state).
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, NoCrossingError, NumericsError
from .quadrature import DEFAULT_SPEC
from .rates import gamma_general, gamma_modified
from .state import InitialState

MODE_EFFECTIVE = "effective"
MODE_MODIFIED = "modified"
MODES = (MODE_EFFECTIVE, MODE_MODIFIED)

ZENO = "zeno"
ANTI_ZENO = "anti-zeno"

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TauGrid:
    """Measurement-interval grid."""

    tau_min: float
    tau_max: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.count < 2:
            raise ConfigError("grid count must be >= 2")
        if self.tau_min <= 0 or self.tau_max <= self.tau_min:
            raise ConfigError("need 0 < tau_min < tau_max")
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"unknown grid spacing {self.spacing!r}")

    def values(self):
        if self.spacing == "log":
            return np.logspace(math.log10(self.tau_min),
                               math.log10(self.tau_max), self.count)
        return np.linspace(self.tau_min, self.tau_max, self.count)


# default grid for critical-angle searches: log spacing resolves the peak
# region of the paper-scale parameter point
THETA_SCAN_GRID = TauGrid(tau_min=0.05, tau_max=5.0, count=200, spacing="log")


@dataclass(frozen=True)
class DecayCurve:
    """Sampled (tau, gamma) series with full parameter provenance."""

    state: InitialState
    params: object  # ModelParams
    mode: str
    taus: tuple
    gammas: tuple
    grid: TauGrid

    def __post_init__(self):
        t = np.asarray(self.taus)
        g = np.asarray(self.gammas)
        if np.any(np.diff(t) <= 0):
            raise ConfigError("curve taus must be strictly increasing")
        if not np.all(np.isfinite(g)):
            raise NumericsError("curve contains non-finite rates")


@dataclass(frozen=True)
class PeakResult:
    tau_star: float
    gamma_max: float
    refined: bool


@dataclass(frozen=True)
class RegimeSegmentation:
    """Alternating (tau_lo, tau_hi, label) intervals covering the grid."""

    intervals: tuple

    def labels(self):
        return tuple(label for _, _, label in self.intervals)


@dataclass(frozen=True)
class CriticalAngleResult:
    theta_c: float
    bracket: tuple
    residual: float
    G_pair: tuple
    peak_g1: PeakResult
    peak_g2: PeakResult


def rate_function(state, params, mode, quadrature=DEFAULT_SPEC):
    """Continuous tau -> gamma evaluator for one configuration."""
    if mode == MODE_EFFECTIVE:
        return lambda tau: gamma_general(tau, state, params,
                                         quadrature=quadrature).gamma
    if mode == MODE_MODIFIED:
        return lambda tau: gamma_modified(tau, state, params,
                                          quadrature=quadrature).gamma
    raise ConfigError(f"unknown mode {mode!r}")


def sample_curve(state, params, mode, grid, quadrature=DEFAULT_SPEC):
    """Evaluate the decay rate on every grid point, order preserved."""
    fn = rate_function(state, params, mode, quadrature)
    taus = grid.values()
    gammas = []
    for tau in taus:
        try:
            gammas.append(fn(float(tau)))
        except NumericsError as exc:
            raise NumericsError(f"rate evaluation failed at tau={tau}: {exc}") \
                from exc
    return DecayCurve(state=state, params=params, mode=mode,
                      taus=tuple(float(t) for t in taus),
                      gammas=tuple(gammas), grid=grid)


def _golden_max(fn, lo, hi, iterations=40):
    """Golden-section search for the maximum of fn on [lo, hi]."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iterations):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    if fc > fd:
        return c, fc
    return d, fd


def find_peak(curve, quadrature=DEFAULT_SPEC, refine=True, fn=None):
    """Locate the curve maximum; golden-section refine interior maxima.

    ``fn`` overrides the continuous evaluator (default: rebuilt from the
    curve's own parameters).
    """
    if len(curve.taus) < 3:
        raise ConfigError("need at least 3 samples to locate a peak")
    g = np.asarray(curve.gammas)
    t = np.asarray(curve.taus)
    i = int(np.argmax(g))
    if i == 0 or i == len(g) - 1 or not refine:
        return PeakResult(tau_star=float(t[i]), gamma_max=float(g[i]),
                          refined=False)
    if fn is None:
        fn = rate_function(curve.state, curve.params, curve.mode, quadrature)
    tau_star, gamma_star = _golden_max(fn, float(t[i - 1]), float(t[i + 1]))
    if gamma_star < g[i]:  # never report less than the best grid sample
        tau_star, gamma_star = float(t[i]), float(g[i])
    return PeakResult(tau_star=tau_star, gamma_max=gamma_star, refined=True)


def classify_regimes(curve):
    """Label inter-sample intervals by slope sign and merge runs.

    A positive slope means shrinking tau shrinks the rate (Zeno); a negative
    slope means shrinking tau raises it (anti-Zeno).
    """
    if len(curve.taus) < 3:
        raise ConfigError("need at least 3 samples to classify regimes")
    t = np.asarray(curve.taus)
    g = np.asarray(curve.gammas)
    slopes = np.diff(g)
    labels = [ZENO if s >= 0 else ANTI_ZENO for s in slopes]
    intervals = []
    start = 0
    for k in range(1, len(labels) + 1):
        if k == len(labels) or labels[k] != labels[start]:
            intervals.append((float(t[start]), float(t[k]), labels[start]))
            start = k
    return RegimeSegmentation(intervals=tuple(intervals))


def _peak_at_theta(theta, G, params, mode, grid, quadrature):
    state = InitialState(theta=theta, phi=0.0)
    p = replace(params, bath=replace(params.bath, G=float(G)))
    curve = sample_curve(state, p, mode, grid, quadrature)
    return find_peak(curve, quadrature)


def critical_angle(G1, G2, params, mode, theta_bracket=(0.0, math.pi / 2),
                   tol=1e-6, grid=THETA_SCAN_GRID, quadrature=DEFAULT_SPEC):
    """Bisection for the angle where the two coupling strengths' peak rates
    coincide.

    The objective is f(theta) = Gamma_max(G2; theta) - Gamma_max(G1; theta);
    at the excited state it is negative (stronger coupling decays slower) and
    at the equal superposition positive, so a sign change exists in between.
    """
    if not params.bath.is_continuum:
        raise ConfigError("critical-angle scan varies the continuum coupling "
                          "strength G")
    if G1 > G2:
        raise ConfigError("need G1 <= G2")
    lo, hi = theta_bracket
    if not 0.0 <= lo < hi <= math.pi:
        raise ConfigError("invalid theta bracket")

    def objective(theta):
        p1 = _peak_at_theta(theta, G1, params, mode, grid, quadrature)
        p2 = _peak_at_theta(theta, G2, params, mode, grid, quadrature)
        return p2.gamma_max - p1.gamma_max, p1, p2

    f_lo, _, _ = objective(lo)
    f_hi, p1_hi, p2_hi = objective(hi)
    if f_lo == 0.0 or f_hi == 0.0 or (f_lo > 0) == (f_hi > 0):
        raise NoCrossingError(
            f"no sign change on bracket [{lo}, {hi}]: f(lo)={f_lo:.6e}, "
            f"f(hi)={f_hi:.6e}", f_lo=f_lo, f_hi=f_hi)
    peak_scale = max(abs(p1_hi.gamma_max), abs(p2_hi.gamma_max))
    f_tol = tol * peak_scale

    mid, f_mid, p1_mid, p2_mid = hi, f_hi, p1_hi, p2_hi
    for _ in range(80):
        if hi - lo <= 1e-6:
            break
        mid = 0.5 * (lo + hi)
        f_mid, p1_mid, p2_mid = objective(mid)
        if abs(f_mid) <= f_tol:
            break
        if (f_mid > 0) == (f_hi > 0):
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    return CriticalAngleResult(theta_c=mid, bracket=(lo, hi),
                               residual=f_mid, G_pair=(float(G1), float(G2)),
                               peak_g1=p1_mid, peak_g2=p2_mid)
