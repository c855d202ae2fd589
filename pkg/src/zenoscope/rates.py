"""Survival probabilities and effective / modified decay rates.

Two independent routes are implemented and cross-checked in the tests:

* ``gamma_general`` / ``gamma_modified`` assemble the second-order survival
  probability from the generated term lists in ``_terms`` (arbitrary initial
  state, thermal branch weighted),
* ``gamma_excited``, ``gamma_superposition`` and
  ``gamma_modified_excited`` are direct transcriptions of the closed
  expressions for the excited state and the equal superposition, written out
  explicitly against the bath phase functions.

Rates default to the linear-in-survival definition (1 - s)/tau; the
logarithmic definition -ln(s)/tau is available via ``definition``.
"""

import enum
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _terms
from .bath import BathPhases, SpectralDensity, Temperature, ZERO_TEMPERATURE
from .errors import ConfigError, NumericsError
from .quadrature import (QuadratureSpec, DEFAULT_SPEC, gauss_legendre_01,
                         oscillation_nodes)
from .state import InitialState, decompose_projector

# internal guard: imaginary residue of an assembled survival value
_IM_RESIDUE_TOL = 1e-9


class PerturbativeValidityWarning(UserWarning):
    """Tunneling amplitude looks too large for second-order accuracy."""


class RateDefinition(enum.Enum):
    LINEAR_IN_S = "linear"
    LOG_OF_S = "log"


@dataclass(frozen=True)
class ModelParams:
    """Level splitting, tunneling amplitude, bath and temperature."""

    eps: float
    delta: float
    bath: SpectralDensity
    temp: Temperature = ZERO_TEMPERATURE

    def __post_init__(self):
        if self.eps <= 0:
            raise ConfigError("eps must be positive")
        if self.delta < 0:
            raise ConfigError("delta must be >= 0")
        if self.delta / self.eps > 0.2:
            warnings.warn(
                f"delta/eps = {self.delta / self.eps:.3g} > 0.2; second-order "
                "perturbation theory may be inaccurate",
                PerturbativeValidityWarning, stacklevel=2)


@dataclass(frozen=True)
class RateResult:
    """One (tau, survival, rate) sample.

    For LINEAR_IN_S, gamma = (1 - survival)/tau exactly; for LOG_OF_S,
    gamma = -ln(survival)/tau.
    """

    tau: float
    survival: float
    gamma: float
    definition: RateDefinition = RateDefinition.LINEAR_IN_S


def _check_tau(tau):
    if tau <= 0:
        raise ConfigError("tau must be positive")


def _realize_survival(s, tau):
    """Validate the complex-assembled survival and return its real part."""
    if abs(s.imag) > _IM_RESIDUE_TOL * max(1.0, abs(s)):
        raise NumericsError(
            f"survival at tau={tau} has imaginary residue {s.imag:.3e}")
    sr = float(s.real)
    if not math.isfinite(sr) or sr <= 0.0 or sr > 1.0 + 1e-6:
        raise NumericsError(
            f"survival at tau={tau} is outside (0, 1]: {sr}")
    return sr


def _result(tau, s, definition):
    if definition == RateDefinition.LINEAR_IN_S:
        gamma = (1.0 - s) / tau
    else:
        gamma = -math.log(s) / tau
    return RateResult(tau=tau, survival=s, gamma=gamma, definition=definition)


def _result_from_decay(tau, decay, definition):
    """Build a RateResult from 1 - s directly, avoiding the cancellation in
    1 - (1 - decay) when the decay is tiny."""
    s = _realize_survival(complex(1.0 - decay), tau)
    if definition == RateDefinition.LINEAR_IN_S:
        gamma = decay / tau
    else:
        gamma = -math.log1p(-decay) / tau
    return RateResult(tau=tau, survival=s, gamma=gamma, definition=definition)


def _grids_2d(tau, eps, spec):
    """Triangle and square tensor grids with the oscillation guard applied."""
    n = oscillation_nodes(spec.nodes_2d, eps, tau)
    x, w = gauss_legendre_01(n)
    t = tau * x
    tc = t[:, None]
    u, wu = gauss_legendre_01(n)
    tri = (tc, tc * u[None, :], (tau * w * t)[:, None] * wu[None, :])
    sq = (tc, t[None, :], (tau * w)[:, None] * (tau * w)[None, :])
    line = (t, tau * w)
    return tri, sq, line


# -- excited-state rate ----------------------------------------------------

def _excited_decay(tau, p, quadrature):
    """1 - s(tau) for the excited state, kept away from the value 1.

    decay = 2 Re (delta^2/4) int_tri e^{-i eps (t1-t2)} C(t2-t1)
    with C(v) = exp(-phi_R(v) - i phi_I(v)).
    """
    _check_tau(tau)
    if p.delta == 0.0:
        return 0.0
    phases = BathPhases(p.bath, p.temp, quadrature)
    (t1, t2, wts), _, _ = _grids_2d(tau, p.eps, quadrature)
    v = t2 - t1
    integrand = np.exp(-1j * p.eps * (t1 - t2) - phases.phi_r_values(v)
                       - 1j * phases.phi_i_values(v))
    integral = np.sum(wts * integrand)
    return 2.0 * (0.25 * p.delta ** 2 * integral).real


def survival_excited(tau, p, quadrature=DEFAULT_SPEC):
    """Second-order survival of the excited state |0>."""
    return _realize_survival(
        complex(1.0 - _excited_decay(tau, p, quadrature)), tau)


def gamma_excited(tau, p, definition=RateDefinition.LINEAR_IN_S,
                  quadrature=DEFAULT_SPEC):
    """Effective decay rate of the excited state."""
    return _result_from_decay(tau, _excited_decay(tau, p, quadrature),
                              definition)


# -- general state, generated term assembly --------------------------------

def _merge_terms(terms):
    """Sum weights of terms sharing the same compiled structure."""
    merged = {}
    for t in terms:
        key = (t.domain, t.double_re, t.c_tau, t.c1, t.c2, t.length,
               t.r1, t.ii)
        if key in merged:
            merged[key] = merged[key]._replace_weight(merged[key].weight
                                                      + t.weight)
        else:
            merged[key] = t
    return tuple(t for t in merged.values() if t.weight != 0)


@lru_cache(maxsize=64)
def _branch_plan(state, params, modified):
    """Branch weights and compiled term lists for one (state, model) pair."""
    decomp = decompose_projector(state, params.temp, params.eps)
    weights = decomp.branch_weights()
    z = state.amplitudes
    gen = _terms.modified_terms if modified else _terms.effective_terms
    plan = []
    for n in (0, 1):
        if weights[n] > 0.0:
            plan.append((n, weights[n],
                         _merge_terms(gen(n, z, params.delta))))
    return tuple(plan)


def survival_general(tau, state, p, quadrature=DEFAULT_SPEC, modified=False):
    """Second-order survival for an arbitrary prepared state."""
    _check_tau(tau)
    phases = BathPhases(p.bath, p.temp, quadrature)
    plan = _branch_plan(state, p, modified)
    ctx = _terms.EvalContext(phases, p.eps, tau, quadrature.nodes_2d)
    s = 0.0 + 0.0j
    for _, weight, terms in plan:
        s += weight * _terms.survival_from_terms(terms, ctx)
    return _realize_survival(s, tau)


def gamma_general(tau, state, p, definition=RateDefinition.LINEAR_IN_S,
                  quadrature=DEFAULT_SPEC):
    """Effective decay rate for an arbitrary prepared state."""
    s = survival_general(tau, state, p, quadrature)
    return _result(tau, s, definition)


def gamma_modified(tau, state, p, definition=RateDefinition.LINEAR_IN_S,
                   quadrature=DEFAULT_SPEC):
    """Modified decay rate (system evolution undone before the measurement)."""
    s = survival_general(tau, state, p, quadrature, modified=True)
    return _result(tau, s, definition)


# -- equal superposition, explicit transcription ----------------------------

def gamma_superposition(tau, p, definition=RateDefinition.LINEAR_IN_S,
                        quadrature=DEFAULT_SPEC):
    """Effective rate of (|0> + |1>)/sqrt(2), written out term by term.

    Zero-temperature branch: the dominant thermal factor cancels against the
    normalization, so it is set to one in every term.  Serves as an
    independent cross-check of ``gamma_general`` at theta = pi/2, phi = 0.
    """
    _check_tau(tau)
    if not p.temp.is_zero:
        raise ConfigError("the superposition transcription is the "
                          "zero-temperature branch only")
    phases = BathPhases(p.bath, p.temp, quadrature)
    eps, delta = p.eps, p.delta

    def phi_r(t):
        return phases.phi_r_values(t)

    def phi_i(t):
        return phases.phi_i_values(t)

    def phi_r1(t):
        return phases.phi_r1_values(t)

    phi_r2 = phases.phi_R2()

    # zeroth order
    s = 0.5 * (1.0 + (np.exp(1j * eps * tau - phi_r(tau)
                             + 1j * phi_i(tau))).real)

    (tt1, tt2, tw), (st1, st2, sw), (lt, lw) = _grids_2d(tau, eps, quadrature)

    if delta != 0.0:
        # first order
        f1 = (np.exp(-1j * eps * lt - phi_r(lt) - 1j * phi_i(lt))
              + np.exp(1j * eps * lt - phi_r(lt) + 1j * phi_i(lt))
              + np.exp(1j * eps * (tau - lt) - phi_r(lt - tau)
                       - 1j * phi_i(lt - tau))
              + np.exp(-1j * eps * (tau - lt) - phi_r(lt - tau)
                       - 1j * phi_i(lt - tau)
                       - 2j * phi_i(tau) + 2j * phi_i(lt)))
        s += 0.25 * 2.0 * (0.5j * delta * np.sum(lw * f1)).real

    if delta != 0.0:
        # time-ordered double integral
        v = tt2 - tt1
        wp_log = (-2.0 * phi_r2 + phi_r1(v) - phi_r1(tt2 - tau)
                  + phi_r1(tt1 - tau) + phi_r1(tt2) - phi_r1(tt1)
                  + phi_r1(tau))
        wp_ph = -phi_i(v) + phi_i(tt2 - tau) - phi_i(tt1 - tau)
        wprime = np.exp(wp_log + 1j * wp_ph)
        f2 = (np.exp(-1j * eps * (tt1 - tt2) - phi_r(v) - 1j * phi_i(v)
                     + 2j * phi_i(tt2) - 2j * phi_i(tt1))
              + np.exp(1j * eps * (tt1 - tt2) - phi_r(v) - 1j * phi_i(v))
              + wprime * np.exp(1j * eps * (tau - tt1 + tt2)
                                + 1j * (phi_i(tt2) - phi_i(tt1) + phi_i(tau)))
              + wprime * np.exp(-1j * eps * (tau - tt1 + tt2)
                                - 1j * (phi_i(tt2) - phi_i(tt1)
                                        + phi_i(tau))))
        s += -0.25 * 2.0 * (0.25 * delta ** 2 * np.sum(tw * f2)).real

        # unordered (sandwich) double integral
        v = st2 - st1
        w_log = (-2.0 * phi_r2 - phi_r1(v) + phi_r1(st2 - tau)
                 + phi_r1(st1 - tau) + phi_r1(st2) + phi_r1(st1)
                 - phi_r1(tau))
        w_ph = phi_i(v) - phi_i(st2 - tau) + phi_i(st1 - tau)
        wfac = np.exp(w_log + 1j * w_ph)
        f3 = (np.exp(1j * eps * (st1 - st2) - phi_r(v) - 1j * phi_i(v))
              + np.exp(-1j * eps * (st1 - st2) - phi_r(v) - 1j * phi_i(v)
                       + 2j * phi_i(st2) - 2j * phi_i(st1))
              + wfac * np.exp(1j * eps * (tau - st1 - st2)
                              - 1j * (phi_i(st2) + phi_i(st1) - phi_i(tau)))
              + wfac * np.exp(-1j * eps * (tau - st1 - st2)
                              + 1j * (phi_i(st2) + phi_i(st1) - phi_i(tau))))
        s += 0.25 * (0.25 * delta ** 2 * np.sum(sw * f3)).real

    return _result(tau, _realize_survival(complex(s), tau), definition)


# -- modified rate, excited-state transcription ------------------------------

def gamma_modified_excited(tau, p, definition=RateDefinition.LINEAR_IN_S,
                           quadrature=DEFAULT_SPEC):
    """Modified rate of |0>: effective rate plus the explicit correction.

    The correction is (delta^2 / 2 tau) Re[ int_tri e^{i eps (t1-t2)}
    - int_sq e^{i eps (t1-t2)} e^{-phi_R(t1)} e^{-i phi_I(t1)} ]; it vanishes
    identically when the coupling is switched off (the undoing layer then
    cancels the free evolution exactly).
    """
    _check_tau(tau)
    base = gamma_excited(tau, p, RateDefinition.LINEAR_IN_S, quadrature)
    if p.delta == 0.0:
        return _result(tau, base.survival, definition)
    phases = BathPhases(p.bath, p.temp, quadrature)
    (tt1, tt2, tw), (st1, st2, sw), _ = _grids_2d(tau, p.eps, quadrature)
    tri = np.sum(tw * np.exp(1j * p.eps * (tt1 - tt2)))
    sq = np.sum(sw * np.exp(1j * p.eps * (st1 - st2)
                            - phases.phi_r_values(st1)
                            - 1j * phases.phi_i_values(st1)))
    correction = 0.5 * p.delta ** 2 / tau * (tri - sq).real
    gamma_lin = base.gamma + correction
    s = 1.0 - gamma_lin * tau
    return _result(tau, _realize_survival(complex(s), tau), definition)


# -- repeated measurements ---------------------------------------------------

def survival_chain(s_tau, n):
    """Survival after n uncorrelated measurement intervals: s_tau ** n."""
    if not 0.0 < s_tau <= 1.0:
        raise ConfigError("single-interval survival must lie in (0, 1]")
    if n < 0 or int(n) != n:
        raise ConfigError("measurement count must be a non-negative integer")
    return float(s_tau) ** int(n)
