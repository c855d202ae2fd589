"""Prepared qubit state, projector decomposition and thermal normalization.

The repeatedly prepared state is ``|psi> = zeta1 |0> + zeta2 |1>`` with
``zeta1 = cos(theta/2)`` and ``zeta2 = exp(i*phi) sin(theta/2)``; ``|0>`` is
the excited level (sigma_z eigenvalue +1) and ``|1>`` the ground level.

In the displaced frame the projector picks up bath dressing operators: the
element ``|i><j|`` carries ``exp(((e_j - e_i)/2) * chi)`` with ``e_0 = +1``,
``e_1 = -1``.  Sandwiching the free thermal state gives the double-indexed
coefficient table

    C[n][i][j] = zeta_i * conj(zeta_j) * |zeta_n|^2 * exp(-beta*eps_n)

(eps_0 = +eps/2, eps_1 = -eps/2) paired with the bath operator strings

    E[n][i][j] = exp(p_left * chi) * exp(-beta H_B) * exp(p_right * chi),
    p_left = (e_n - e_i)/2,   p_right = (e_j - e_n)/2.

At zero temperature the exponentially dominant thermal branch is selected
analytically (the ``exp(+beta*eps/2)`` factor cancels against the
normalization) instead of plugging in a huge finite beta.
"""

import math
from dataclasses import dataclass

import numpy as np

from .bath import Temperature, ZERO_TEMPERATURE
from .errors import ConfigError

SIGMA_Z_EIG = (+1, -1)  # e_i for levels |0>, |1>


@dataclass(frozen=True)
class InitialState:
    """Bloch angles of the prepared state."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ConfigError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise ConfigError(f"phi must lie in [0, 2*pi), got {self.phi}")

    @property
    def zeta1(self):
        return complex(math.cos(self.theta / 2.0))

    @property
    def zeta2(self):
        return complex(math.cos(self.phi), math.sin(self.phi)) \
            * math.sin(self.theta / 2.0)

    @property
    def amplitudes(self):
        return (self.zeta1, self.zeta2)


def make_state(theta, phi=0.0):
    """Construct a validated InitialState from Bloch angles."""
    return InitialState(theta=float(theta), phi=float(phi))


def dressing_power(i, j):
    """Exponent p of exp(p*chi) dressing the projector element |i><j|."""
    return (SIGMA_Z_EIG[j] - SIGMA_Z_EIG[i]) // 2


def bath_operator_powers(n, i, j):
    """(left, right) powers of exp(chi) around exp(-beta H_B) in E[n][i][j]."""
    left = (SIGMA_Z_EIG[n] - SIGMA_Z_EIG[i]) // 2
    right = (SIGMA_Z_EIG[j] - SIGMA_Z_EIG[n]) // 2
    return left, right


def _power_label(p):
    return {0: "", 1: "exp(+chi)", -1: "exp(-chi)"}[p]


def bath_operator_label(n, i, j):
    """Readable tag for the operator string E[n][i][j]."""
    left, right = bath_operator_powers(n, i, j)
    parts = [s for s in (_power_label(left), "rho_B", _power_label(right)) if s]
    return " ".join(parts)


@dataclass(frozen=True)
class ProjectorDecomposition:
    """The sixteen (coefficient, bath-operator) pairs of P e^{-beta H0} P.

    ``mantissas[n][i][j]`` excludes the thermal factor exp(-beta*eps_n),
    which is kept symbolically per branch so the zero-temperature limit can
    cancel it analytically against the normalization.
    """

    state: InitialState
    temperature: Temperature
    eps: float
    mantissas: tuple  # mantissas[n][i][j], complex
    thermal_log: tuple  # log of exp(-beta*eps_n) per branch; None at T = 0

    def coefficient_mantissa(self, n, i, j):
        return self.mantissas[n][i][j]

    def coefficient(self, n, i, j):
        """Full Table-style coefficient including the thermal factor.

        Only available at finite temperature; at T = 0 the factors are held
        symbolically and combined through branch_weights().
        """
        if self.temperature.is_zero:
            raise ConfigError("coefficients are symbolic at zero temperature; "
                              "use coefficient_mantissa / branch_weights")
        return self.mantissas[n][i][j] * math.exp(self.thermal_log[n])

    def bath_label(self, n, i, j):
        return bath_operator_label(n, i, j)

    def branch_weights(self):
        """Normalized thermal branch weights (w0, w1).

        w_n = |zeta_n|^2 exp(-beta*eps_n) / Z_s, evaluated with a
        max-exponent shift; at zero temperature the dominant branch with
        nonzero state weight carries all the weight.
        """
        z = self.state.amplitudes
        mags = np.array([abs(z[0]) ** 2, abs(z[1]) ** 2])
        if self.temperature.is_zero:
            w = np.zeros(2)
            w[1 if mags[1] > 0 else 0] = 1.0
            return tuple(w)
        logs = np.array(self.thermal_log, dtype=float)
        active = mags > 0
        shift = np.max(logs[active])
        w = np.where(active, mags * np.exp(logs - shift), 0.0)
        return tuple(w / np.sum(w))


def decompose_projector(state, temp, eps):
    """Populate the coefficient mantissas and thermal branch factors."""
    if eps <= 0:
        raise ConfigError("level splitting eps must be positive")
    z = state.amplitudes
    mantissas = tuple(
        tuple(tuple(z[i] * np.conjugate(z[j]) * abs(z[n]) ** 2
                    for j in (0, 1)) for i in (0, 1))
        for n in (0, 1))
    if temp.is_zero:
        thermal_log = (None, None)
    else:
        # eps_n = +eps/2 for n=0, -eps/2 for n=1
        thermal_log = (-temp.beta * eps / 2.0, +temp.beta * eps / 2.0)
    return ProjectorDecomposition(state=state, temperature=temp, eps=eps,
                                  mantissas=mantissas, thermal_log=thermal_log)


def normalization_Z(decomp, phases=None):
    """Reduced normalization (per unit bath partition function).

    The bath traces of every diagonal operator string equal the bare bath
    partition function, so the full normalization factorizes as Z = Z_s * Z_B
    and only Z_s is physically relevant; it is what this function returns.
    At zero temperature the dominant exp(+beta*eps/2) is factored out
    analytically and the finite residue |zeta_branch|^2 is returned.
    """
    if phases is not None and phases.temperature != decomp.temperature:
        raise ConfigError("decomposition and bath phases disagree on "
                          "temperature")
    z = decomp.state.amplitudes
    mags = (abs(z[0]) ** 2, abs(z[1]) ** 2)
    if decomp.temperature.is_zero:
        zs = mags[1] if mags[1] > 0 else mags[0]
    else:
        zs = (mags[0] * math.exp(decomp.thermal_log[0])
              + mags[1] * math.exp(decomp.thermal_log[1]))
    if not (zs > 0 and math.isfinite(zs)):
        raise ConfigError(f"normalization is not positive-finite: {zs}")
    return zs
