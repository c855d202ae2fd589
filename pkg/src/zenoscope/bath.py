"""Environment phase functions, correlation function and four-time factors.

Model conventions
-----------------
A two-level system couples diagonally to bosonic modes; after the
displacement (polaron) transformation the environment enters only through
displacement generators ``chi(t)`` whose Gaussian statistics are captured by
four scalar functions of time::

    phi_R(t)  = 4 * int dw J(w) (1 - cos wt) / w^2 * coth(beta w / 2)
    phi_I(t)  = 4 * int dw J(w) sin(wt) / w^2
    phi_R1(t) = 4 * int dw J(w) cos(wt) / w^2 * coth(beta w / 2)
    phi_R2    = phi_R1(0)

with ``phi_R = phi_R2 - phi_R1``.  The continuum spectral density is
``J(w) = G w^s wc^(1-s) exp(-w/wc)``; a discrete bath replaces the integral
by ``sum_k |g_k|^2 (...)``.

Every bath expectation value of a product of displacement exponentials
``e^{s1*chi(u1)} ... e^{sL*chi(uL)}`` is Gaussian and reduces to::

    exp( -(L/2) phi_R2 - sum_{m<m'} s_m s_m' phi_R1(u_m - u_m')
         + i sum_{m<m'} s_m s_m' phi_I(u_m - u_m') )

(``word_trace`` below).  For s = 2 and zero temperature the closed forms

    phi_R  = G (4 - 4 / (1 + wc^2 t^2))
    phi_I  = 4 G wc t / (1 + wc^2 t^2)
    phi_R1 = 4 G / (1 + wc^2 t^2)
    phi_R2 = 4 G

are used; otherwise integrals are evaluated with Gauss-Laguerre nodes and an
adaptive fallback for strongly oscillatory arguments.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _sciint

from .errors import ConfigError, DivergentIntegralError, IntegrationError
from .quadrature import (QuadratureSpec, DEFAULT_SPEC, MAX_LAGUERRE_NODES,
                         gauss_laguerre, gauss_legendre_01)

# Laguerre doubling differences above this trigger the adaptive fallback.
_LAGUERRE_FALLBACK = 1e-10
# omega*t beyond which the oscillatory (QAWF) fallback is preferred outright.
_OSCILLATORY_WT = 60.0


@dataclass(frozen=True)
class Temperature:
    """Inverse temperature in units of 1/eps; ``beta=None`` means T = 0."""

    beta: float | None = None

    def __post_init__(self):
        if self.beta is not None and self.beta <= 0:
            raise ConfigError("finite temperature requires beta > 0")

    @classmethod
    def zero(cls):
        return cls(beta=None)

    @classmethod
    def finite(cls, beta):
        return cls(beta=float(beta))

    @property
    def is_zero(self):
        return self.beta is None

    def coth_half(self, omega):
        """coth(beta*omega/2); 1 at zero temperature.

        Small arguments use the series 1/x + x/3 to avoid cancellation.
        """
        if self.is_zero:
            return np.ones_like(np.asarray(omega, dtype=float))
        x = 0.5 * self.beta * np.asarray(omega, dtype=float)
        out = np.empty_like(x)
        small = np.abs(x) < 1e-4
        out[small] = 1.0 / x[small] + x[small] / 3.0
        out[~small] = 1.0 / np.tanh(x[~small])
        return out


ZERO_TEMPERATURE = Temperature.zero()


@dataclass(frozen=True)
class SpectralDensity:
    """Continuum (G, s, omega_c) or explicit discrete-mode bath."""

    kind: str
    G: float = 0.0
    s: float = 2.0
    omega_c: float = 1.0
    modes: tuple = ()  # tuple of (omega_k, g_k) pairs, g_k complex

    def __post_init__(self):
        if self.kind == "continuum":
            if self.G < 0:
                raise ConfigError("coupling strength G must be >= 0")
            if self.omega_c <= 0:
                raise ConfigError("cutoff omega_c must be positive")
            if self.s <= 0:
                raise ConfigError("Ohmicity s must be positive")
        elif self.kind == "discrete":
            if not self.modes:
                raise ConfigError("discrete bath needs at least one mode")
            if any(w <= 0 for w, _ in self.modes):
                raise ConfigError("all mode frequencies must be positive")
        else:
            raise ConfigError(f"unknown spectral density kind {self.kind!r}")

    @classmethod
    def continuum(cls, G, s=2.0, omega_c=1.0):
        return cls(kind="continuum", G=float(G), s=float(s),
                   omega_c=float(omega_c))

    @classmethod
    def discrete(cls, modes):
        return cls(kind="discrete",
                   modes=tuple((float(w), complex(g)) for w, g in modes))

    @property
    def is_continuum(self):
        return self.kind == "continuum"

    def j(self, omega):
        """Continuum spectral density J(omega)."""
        if not self.is_continuum:
            raise ConfigError("j(omega) is defined for continuum baths only")
        omega = np.asarray(omega, dtype=float)
        return (self.G * omega ** self.s * self.omega_c ** (1.0 - self.s)
                * np.exp(-omega / self.omega_c))


def discretize(density, n_modes, omega_max=None):
    """Gauss-Legendre discretization of a continuum bath on (0, omega_max].

    Mode couplings satisfy |g_k|^2 = w_k * J(omega_k); errors shrink rapidly
    as the mode count grows for any smooth J.
    """
    if not density.is_continuum:
        raise ConfigError("can only discretize a continuum bath")
    if omega_max is None:
        omega_max = 8.0 * density.omega_c
    x, w = gauss_legendre_01(n_modes)
    omegas = omega_max * x
    weights = omega_max * w
    gs = np.sqrt(weights * density.j(omegas))
    return SpectralDensity.discrete(list(zip(omegas, gs)))


class BathPhases:
    """Evaluator bundle for the phase functions of one bath + temperature.

    Immutable after construction; all evaluators are pure functions of their
    arguments and safe for concurrent use.
    """

    def __init__(self, density, temperature=ZERO_TEMPERATURE,
                 quadrature=DEFAULT_SPEC, use_closed_form=True):
        self.density = density
        self.temperature = temperature
        self.quadrature = quadrature
        self.use_closed_form = use_closed_form
        if density.kind == "discrete":
            self._mode_w = np.array([w for w, _ in density.modes])
            self._mode_g2 = np.array([abs(g) ** 2 for _, g in density.modes])
            self._mode_coth = temperature.coth_half(self._mode_w)

    # -- structural properties -------------------------------------------

    @property
    def has_closed_form(self):
        """Closed forms apply (and are enabled) for s = 2 at T = 0."""
        return (self.use_closed_form and self.density.is_continuum
                and self.density.s == 2.0 and self.temperature.is_zero)

    def _r1_is_finite(self):
        """Whether phi_R1/phi_R2 converge termwise for this bath."""
        if not self.density.is_continuum:
            return True
        if self.temperature.is_zero:
            return self.density.s > 1.0
        return self.density.s > 2.0

    def _check_r1_finite(self):
        if not self._r1_is_finite():
            regime = ("s <= 1 at zero temperature" if self.temperature.is_zero
                      else "s <= 2 at finite temperature")
            raise DivergentIntegralError(
                f"phi_R1/phi_R2 diverge for Ohmicity regime {regime} "
                f"(s = {self.density.s})")

    # -- continuum quadrature helpers --------------------------------------

    def _laguerre_sum(self, kernel, t, n):
        """4G * int x^(s-2) e^{-x} coth(..) kernel(wc*t*x) dx via Laguerre."""
        d = self.density
        x, w = gauss_laguerre(n)
        g = x ** (d.s - 2.0) * self.temperature.coth_half(d.omega_c * x) \
            if kernel in ("cos", "one") else x ** (d.s - 2.0)
        if kernel == "cos":
            g = g * np.cos(d.omega_c * t * x)
        elif kernel == "sin":
            g = g * np.sin(d.omega_c * t * x)
        elif kernel == "omc":  # 1 - cos, with coth
            g = (x ** (d.s - 2.0) * self.temperature.coth_half(d.omega_c * x)
                 * (1.0 - np.cos(d.omega_c * t * x)))
        return 4.0 * d.G * np.sum(w * g)

    def _scipy_fallback(self, kernel, t):
        """Adaptive QUADPACK evaluation in physical frequency units.

        Oscillatory kernels use the finite-interval oscillatory rule with an
        explicit tail cutoff where the exponential weight is below double
        precision; convergence is judged by the returned error estimate.
        """
        d = self.density
        temp = self.temperature
        cutoff = d.omega_c * (45.0 + 12.0 * abs(d.s - 2.0))

        def base(omega):
            # J(omega)/omega^2 written without the removable 0/0 at omega=0
            return (4.0 * d.G * omega ** (d.s - 2.0)
                    * d.omega_c ** (1.0 - d.s) * math.exp(-omega / d.omega_c))

        def base_coth(omega):
            return base(omega) * float(temp.coth_half(omega))

        opts = dict(limit=800, epsabs=1e-13, epsrel=1e-11)
        wopts = dict(limit=800, maxp1=200, epsabs=1e-12, epsrel=1e-11)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", _sciint.IntegrationWarning)
                if kernel == "one":
                    val, err = _sciint.quad(base_coth, 0.0, np.inf, **opts)
                elif kernel == "sin":
                    if t == 0.0:
                        return 0.0, 0.0
                    val, err = _sciint.quad(base, 0.0, cutoff, weight="sin",
                                            wvar=t, **wopts)
                elif kernel == "cos":
                    if t == 0.0:
                        val, err = _sciint.quad(base_coth, 0.0, np.inf,
                                                **opts)
                    else:
                        val, err = _sciint.quad(base_coth, 0.0, cutoff,
                                                weight="cos", wvar=t, **wopts)
                elif kernel == "omc":
                    if self._r1_is_finite():
                        c, e1 = self._scipy_fallback("one", 0.0)
                        s, e2 = self._scipy_fallback("cos", t)
                        val, err = c - s, e1 + e2
                    else:
                        val, err = _sciint.quad(
                            lambda o: base_coth(o) * (1.0 - np.cos(o * t)),
                            0.0, np.inf, **opts)
        except DivergentIntegralError:
            raise
        except Exception as exc:
            raise IntegrationError(
                f"frequency integral ({kernel}, t={t}) failed: {exc}") from exc
        if err > max(1e-10, 1e-8 * abs(val)):
            raise IntegrationError(
                f"frequency integral ({kernel}, t={t}) did not converge "
                f"(estimate {err:.3e})", estimate=err)
        return val, err

    def _continuum_phi(self, kernel, t):
        """Laguerre with node doubling, adaptive fallback past tolerance."""
        d = self.density
        if d.G == 0.0:
            return 0.0
        wt = abs(d.omega_c * t)
        if wt < _OSCILLATORY_WT:
            n = self.quadrature.nodes_1d
            v1 = self._laguerre_sum(kernel, t, n)
            v2 = self._laguerre_sum(kernel, t, 2 * n)
            if abs(v2 - v1) <= _LAGUERRE_FALLBACK * max(1.0, abs(v2)):
                return v2
        val, _ = self._scipy_fallback(kernel, t)
        return val

    # -- scalar phase functions --------------------------------------------

    def phi_R(self, t):
        """Decoherence exponent; even in t, phi_R(0) = 0."""
        t = float(t)
        d = self.density
        if d.kind == "discrete":
            return float(np.sum(4.0 * self._mode_g2 * self._mode_coth
                                * (1.0 - np.cos(self._mode_w * t))
                                / self._mode_w ** 2))
        if self.has_closed_form:
            x2 = (d.omega_c * t) ** 2
            return d.G * (4.0 - 4.0 / (1.0 + x2))
        return self._continuum_phi("omc", t)

    def phi_I(self, t):
        """Phase-shift exponent; odd in t."""
        t = float(t)
        d = self.density
        if d.kind == "discrete":
            return float(np.sum(4.0 * self._mode_g2
                                * np.sin(self._mode_w * t) / self._mode_w ** 2))
        if self.has_closed_form:
            x = d.omega_c * t
            return 4.0 * d.G * x / (1.0 + x * x)
        return self._continuum_phi("sin", t)

    def phi_R1(self, t):
        """Cosine-kernel phase function; diverges for small Ohmicity."""
        t = float(t)
        d = self.density
        if d.kind == "discrete":
            return float(np.sum(4.0 * self._mode_g2 * self._mode_coth
                                * np.cos(self._mode_w * t) / self._mode_w ** 2))
        self._check_r1_finite()
        if self.has_closed_form:
            x2 = (d.omega_c * t) ** 2
            return 4.0 * d.G / (1.0 + x2)
        return self._continuum_phi("cos", t)

    def phi_R2(self):
        """Time-independent constant phi_R1(0)."""
        return self.phi_R1(0.0)

    def correlation(self, t):
        """Environment correlation function exp(-phi_R(t) - i phi_I(t))."""
        return complex(np.exp(-self.phi_R(t) - 1j * self.phi_I(t)))

    # -- vectorized evaluators (used by the rate assembly) ------------------

    def phi_r1_values(self, t):
        """phi_R1 on an array; fixed-node Laguerre for general continua."""
        t = np.asarray(t, dtype=float)
        d = self.density
        if d.kind == "discrete":
            return np.tensordot(
                4.0 * self._mode_g2 * self._mode_coth / self._mode_w ** 2,
                np.cos(np.multiply.outer(self._mode_w, t)), axes=(0, 0))
        self._check_r1_finite()
        if self.has_closed_form:
            return 4.0 * d.G / (1.0 + (d.omega_c * t) ** 2)
        x, w = gauss_laguerre(2 * self.quadrature.nodes_1d)
        coef = w * x ** (d.s - 2.0) * self.temperature.coth_half(d.omega_c * x)
        return 4.0 * d.G * np.tensordot(
            coef, np.cos(np.multiply.outer(x, d.omega_c * t)), axes=(0, 0))

    def phi_i_values(self, t):
        """phi_I on an array."""
        t = np.asarray(t, dtype=float)
        d = self.density
        if d.kind == "discrete":
            return np.tensordot(
                4.0 * self._mode_g2 / self._mode_w ** 2,
                np.sin(np.multiply.outer(self._mode_w, t)), axes=(0, 0))
        if self.has_closed_form:
            x = d.omega_c * t
            return 4.0 * d.G * x / (1.0 + x * x)
        x, w = gauss_laguerre(2 * self.quadrature.nodes_1d)
        coef = w * x ** (d.s - 2.0)
        return 4.0 * d.G * np.tensordot(
            coef, np.sin(np.multiply.outer(x, d.omega_c * t)), axes=(0, 0))

    def phi_r_values(self, t):
        """phi_R on an array; always finite for s > 0."""
        t = np.asarray(t, dtype=float)
        d = self.density
        if d.kind == "discrete":
            return np.tensordot(
                4.0 * self._mode_g2 * self._mode_coth / self._mode_w ** 2,
                1.0 - np.cos(np.multiply.outer(self._mode_w, t)), axes=(0, 0))
        if self.has_closed_form:
            x2 = (d.omega_c * t) ** 2
            return d.G * (4.0 - 4.0 / (1.0 + x2))
        x, w = gauss_laguerre(2 * self.quadrature.nodes_1d)
        coef = w * x ** (d.s - 2.0) * self.temperature.coth_half(d.omega_c * x)
        return 4.0 * d.G * np.tensordot(
            coef, 1.0 - np.cos(np.multiply.outer(x, d.omega_c * t)),
            axes=(0, 0))

    # -- Gaussian trace of a displacement word ------------------------------

    def word_trace(self, word):
        """Thermal expectation of prod_m exp(s_m * chi(u_m)).

        ``word`` is a sequence of (sign, time) pairs in operator order.  All
        exponents are summed before a single exponentiation.
        """
        word = [(int(s), float(u)) for s, u in word]
        if not word:
            return 1.0 + 0.0j
        if self._r1_is_finite():
            L = len(word)
            mag = -0.5 * L * self.phi_R2()
            ph = 0.0
            for m in range(L):
                sm, um = word[m]
                for mp in range(m + 1, L):
                    sp, up = word[mp]
                    mag -= sm * sp * self.phi_R1(um - up)
                    ph += sm * sp * self.phi_I(um - up)
            return complex(np.exp(mag + 1j * ph))
        # Balanced words stay finite even when phi_R1 itself diverges:
        # evaluate the combined frequency kernel in a single quadrature.
        if sum(s for s, _ in word) != 0:
            raise DivergentIntegralError(
                "unbalanced displacement word diverges in this Ohmicity regime")
        return self._word_trace_kernel(word)

    def _word_trace_kernel(self, word):
        d = self.density
        temp = self.temperature
        signs = np.array([s for s, _ in word], dtype=float)
        times = np.array([u for _, u in word])

        def exponent_integrand(omega):
            amp = np.sum(signs * np.exp(1j * omega * times))
            sin_part = 0.0
            for m in range(len(word)):
                for mp in range(m + 1, len(word)):
                    sin_part += (signs[m] * signs[mp]
                                 * math.sin(omega * (times[m] - times[mp])))
            w2 = omega * omega
            return (d.j(omega) / w2) * (
                -2.0 * float(temp.coth_half(omega)) * abs(amp) ** 2
                + 4.0j * sin_part)

        opts = dict(limit=800, epsabs=1e-13, epsrel=1e-11)
        re, _ = _sciint.quad(lambda o: exponent_integrand(o).real, 0.0,
                             np.inf, **opts)
        im, _ = _sciint.quad(lambda o: exponent_integrand(o).imag, 0.0,
                             np.inf, **opts)
        return complex(np.exp(re + 1j * im))

    # -- four-time trace factors -------------------------------------------

    def w_factor(self, t1, t2, tau):
        """Four-time factor W(t1, t2, tau); W(0, 0, 0) = 1."""
        trace = self.word_trace([(+1, t2), (-1, tau), (+1, t1), (-1, 0.0)])
        phase = self.phi_I(t2) + self.phi_I(t1) - self.phi_I(tau)
        return trace * complex(np.exp(1j * phase))

    def w_prime_factor(self, t1, t2, tau):
        """Companion four-time factor W'(t1, t2, tau); W'(0, 0, 0) = 1."""
        trace = self.word_trace([(+1, tau), (-1, t1), (+1, t2), (-1, 0.0)])
        phase = self.phi_I(t2) - self.phi_I(t1) + self.phi_I(tau)
        return np.conjugate(trace) * complex(np.exp(-1j * phase))


# Functional aliases matching the operation-style API.

def phi_R(t, phases):
    return phases.phi_R(t)


def phi_I(t, phases):
    return phases.phi_I(t)


def phi_R1(t, phases):
    return phases.phi_R1(t)


def phi_R2(phases):
    return phases.phi_R2()


def correlation(t, phases):
    return phases.correlation(t)


def w_factor(t1, t2, tau, phases):
    return phases.w_factor(t1, t2, tau)


def w_prime_factor(t1, t2, tau, phases):
    return phases.w_prime_factor(t1, t2, tau)
