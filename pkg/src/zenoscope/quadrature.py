"""Deterministic quadrature rules for frequency and time-domain integrals.

Three families are provided:

* semi-infinite frequency integrals against an exponential cutoff, done with
  Gauss-Laguerre nodes plus an adaptive fallback,
* 2-D tensor Gauss-Legendre rules over the triangle 0 <= t2 <= t1 <= tau and
  the square [0, tau]^2 (the triangle is mapped to a rectangle with
  t2 = u * t1, u in [0, 1], which keeps the integrand smooth),
* convergence is always assessed by node doubling; rules are cached by node
  count so repeated calls are deterministic and cheap.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate as _sciint
from scipy.special import roots_laguerre

from .errors import ConfigError, IntegrationError

# Gauss-Laguerre node computation loses stability beyond ~300 nodes.
MAX_LAGUERRE_NODES = 300


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts and tolerances for the deterministic integration rules."""

    nodes_1d: int = 200
    nodes_2d: int = 128
    rel_tol: float = 1e-8
    max_refinements: int = 6

    def __post_init__(self):
        if self.nodes_1d < 8 or self.nodes_2d < 8:
            raise ConfigError("quadrature node counts must be >= 8")
        if self.rel_tol <= 0:
            raise ConfigError("rel_tol must be positive")
        if self.max_refinements < 0:
            raise ConfigError("max_refinements must be >= 0")


DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=None)
def gauss_legendre_01(n):
    """Gauss-Legendre nodes/weights on [0, 1], cached by count."""
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


@lru_cache(maxsize=None)
def gauss_laguerre(n):
    """Gauss-Laguerre nodes/weights for weight e^{-x} on [0, inf)."""
    n = min(n, MAX_LAGUERRE_NODES)
    return roots_laguerre(n)


def _complex_quad(f, a, b, **kwargs):
    re, re_err = _sciint.quad(lambda x: f(x).real, a, b, **kwargs)
    im, im_err = _sciint.quad(lambda x: f(x).imag, a, b, **kwargs)
    return re + 1j * im, re_err + im_err


def integrate_semi_infinite(f, spec=None, scale=1.0):
    """Integrate f over (0, inf) assuming decay like exp(-omega/scale).

    Returns (value, error_estimate).  A Gauss-Laguerre rule at ``nodes_1d``
    is refined by node doubling; when the doubling difference stays above
    tolerance after ``max_refinements`` steps, an adaptive (QUADPACK) pass on
    the half-infinite interval is used.  Raises IntegrationError when neither
    path converges.
    """
    spec = spec or DEFAULT_SPEC
    if scale <= 0:
        raise ConfigError("scale must be positive")

    def laguerre_value(n):
        # int_0^inf f = scale * sum_i w_i e^{x_i} f(scale * x_i); the
        # compensation w*e^x is assembled in log space because large-node
        # weights underflow while e^x overflows
        x, w = gauss_laguerre(n)
        coef = np.zeros_like(w)
        pos = w > 0
        coef[pos] = np.exp(np.log(w[pos]) + x[pos])
        return scale * np.sum(coef * np.asarray(f(scale * x)))

    n = min(spec.nodes_1d, MAX_LAGUERRE_NODES // 2)
    prev = laguerre_value(n)
    for _ in range(spec.max_refinements):
        if 2 * n > MAX_LAGUERRE_NODES:
            break
        n *= 2
        cur = laguerre_value(n)
        err = abs(cur - prev)
        if err <= spec.rel_tol * max(1.0, abs(cur)):
            return cur, err
        prev = cur

    # Oscillatory integrands defeat Laguerre nodes; fall back to adaptive rule.
    try:
        val, err = _complex_quad(lambda o: complex(f(o)), 0.0, np.inf,
                                 limit=400, epsabs=1e-13, epsrel=1e-12)
    except Exception as exc:  # pragma: no cover - QUADPACK failure path
        raise IntegrationError(f"semi-infinite integral failed: {exc}") from exc
    if err > max(1e-10, spec.rel_tol * max(1.0, abs(val))):
        raise IntegrationError(
            f"semi-infinite integral did not converge (estimate {err:.3e})",
            estimate=err)
    return val, err


def _tensor_triangle(f, tau, n):
    x1, w1 = gauss_legendre_01(n)
    u, wu = gauss_legendre_01(n)
    t1 = tau * x1
    t1g = t1[:, None]
    t2g = t1g * u[None, :]
    weights = (tau * w1 * t1)[:, None] * wu[None, :]
    return np.sum(weights * np.asarray(f(t1g, t2g)))


def _tensor_square(f, tau, n):
    x, w = gauss_legendre_01(n)
    t = tau * x
    weights = (tau * w)[:, None] * (tau * w)[None, :]
    return np.sum(weights * np.asarray(f(t[:, None], t[None, :])))


def _refine_2d(rule, f, tau, spec):
    if tau <= 0:
        raise ConfigError("tau must be positive")
    n = spec.nodes_2d
    prev = rule(f, tau, n)
    for _ in range(spec.max_refinements):
        n *= 2
        cur = rule(f, tau, n)
        err = abs(cur - prev)
        if err <= spec.rel_tol * max(1.0, abs(cur)):
            return cur, err
        prev = cur
    raise IntegrationError(
        f"2-D quadrature did not converge (last doubling change {err:.3e})",
        estimate=err)


def integrate_triangle(f, tau, spec=None):
    """Integrate f(t1, t2) over 0 <= t2 <= t1 <= tau.  Returns (value, err)."""
    return _refine_2d(_tensor_triangle, f, tau, spec or DEFAULT_SPEC)


def integrate_square(f, tau, spec=None):
    """Integrate f(t1, t2) over [0, tau]^2.  Returns (value, err)."""
    return _refine_2d(_tensor_square, f, tau, spec or DEFAULT_SPEC)


def oscillation_nodes(n_default, eps, tau, per_period=10):
    """Node count keeping at least ``per_period`` nodes per e^{i*eps*t} period."""
    if eps <= 0 or tau <= 0:
        return n_default
    needed = int(np.ceil(per_period * eps * tau / (2.0 * np.pi)))
    return max(n_default, needed)
