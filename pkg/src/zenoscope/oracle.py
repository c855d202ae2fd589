"""Brute-force checks on small discretized baths in truncated Fock space.

Everything here is independent of the perturbative machinery: Hamiltonians
are dense matrices, evolution uses exact eigendecompositions, and bath
traces are computed operator by operator.  Used to validate the polaron
transformation, the four-time trace factors and the second-order survival
probabilities.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh, expm

from .bath import BathPhases, SpectralDensity, discretize
from .errors import ConfigError, IntegrationError, TruncationLeakageError
from .quadrature import gauss_legendre_01
from .state import InitialState

_SZ = np.diag([1.0, -1.0]).astype(complex)
_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SP = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |0><1|
_SM = _SP.conj().T

_LEAKAGE_TOL = 1e-6


@dataclass(frozen=True)
class DiscreteBathSystem:
    """A few bosonic modes with a per-mode Fock truncation."""

    modes: tuple  # ((omega_k, g_k), ...)
    n_max: int

    def __post_init__(self):
        if not 1 <= len(self.modes) <= 6:
            raise ConfigError("mode count must lie in 1..6")
        if not 1 <= self.n_max <= 6:
            raise ConfigError("n_max must lie in 1..6")
        if any(w <= 0 for w, _ in self.modes):
            raise ConfigError("mode frequencies must be positive")
        if self.dim > 20000:
            raise ConfigError(f"truncated dimension {self.dim} exceeds the "
                              "dense-matrix bound 20000")

    @classmethod
    def from_continuum(cls, density, n_modes, n_max, omega_max=None):
        disc = discretize(density, n_modes, omega_max)
        return cls(modes=disc.modes, n_max=n_max)

    @property
    def bath_dim(self):
        return (self.n_max + 1) ** len(self.modes)

    @property
    def dim(self):
        return 2 * self.bath_dim

    def spectral_density(self):
        return SpectralDensity.discrete(self.modes)


@lru_cache(maxsize=16)
def _bath_ops(modes, n_max):
    """Per-mode annihilation operators, H_B diagonal and occupation table."""
    m = len(modes)
    local = n_max + 1
    a1 = np.diag(np.sqrt(np.arange(1, local, dtype=float)), k=1).astype(complex)
    eye = np.eye(local, dtype=complex)
    ann = []
    for k in range(m):
        ops = [eye] * m
        ops[k] = a1
        full = ops[0]
        for o in ops[1:]:
            full = np.kron(full, o)
        ann.append(full)
    dim = local ** m
    occ = np.zeros((m, dim), dtype=int)
    for idx in range(dim):
        rem = idx
        for k in reversed(range(m)):
            occ[k, idx] = rem % local
            rem //= local
    h_b = np.zeros(dim)
    for k, (w, _) in enumerate(modes):
        h_b += w * occ[k]
    return tuple(ann), h_b, occ


def chi_matrix(sys):
    """Displacement generator chi = sum_k (2 g_k*/w_k) b_k - (2 g_k/w_k) b_k^dag."""
    ann, _, _ = _bath_ops(sys.modes, sys.n_max)
    chi = np.zeros((sys.bath_dim, sys.bath_dim), dtype=complex)
    for (w, g), b in zip(sys.modes, ann):
        c = 2.0 * np.conjugate(g) / w
        chi += c * b - np.conjugate(c) * b.conj().T
    return chi


def chi_matrix_at(sys, t):
    """Heisenberg-evolved chi(t) = e^{i H_B t} chi e^{-i H_B t}."""
    _, h_b, _ = _bath_ops(sys.modes, sys.n_max)
    phase = np.exp(1j * h_b * t)
    return phase[:, None] * chi_matrix(sys) * np.conjugate(phase)[None, :]


def polaron_shift(sys):
    """Constant energy shift sum_k |g_k|^2 / w_k produced by the transform."""
    return sum(abs(g) ** 2 / w for w, g in sys.modes)


def polaron_unitary(sys):
    """U_P = exp(-chi sigma_z / 2) on the full system x bath space."""
    return expm(np.kron(_SZ, -0.5 * chi_matrix(sys)))


def build_hamiltonians(sys, eps, delta):
    """Dense lab-frame and displaced-frame Hamiltonians.

    H_lab = eps/2 sz + delta/2 sx + H_B + sz (sum_k g_k* b_k^dag + g_k b_k)
    H_pol = eps/2 sz + H_B + delta/2 (s+ e^{-chi} + s- e^{chi})

    and U_P H_lab U_P^dag = H_pol - polaron_shift(sys) up to truncation.
    """
    ann, h_b, _ = _bath_ops(sys.modes, sys.n_max)
    nb = sys.bath_dim
    eye_b = np.eye(nb, dtype=complex)
    coupling = np.zeros((nb, nb), dtype=complex)
    for (w, g), b in zip(sys.modes, ann):
        coupling += np.conjugate(g) * b.conj().T + g * b
    h_lab = (0.5 * eps * np.kron(_SZ, eye_b)
             + 0.5 * delta * np.kron(_SX, eye_b)
             + np.kron(np.eye(2, dtype=complex), np.diag(h_b).astype(complex))
             + np.kron(_SZ, coupling))
    chi = chi_matrix(sys)
    e_plus = expm(chi)
    e_minus = expm(-chi)
    h_pol = (0.5 * eps * np.kron(_SZ, eye_b)
             + np.kron(np.eye(2, dtype=complex), np.diag(h_b).astype(complex))
             + 0.5 * delta * (np.kron(_SP, e_minus) + np.kron(_SM, e_plus)))
    if (np.abs(h_lab - h_lab.conj().T).max() > 1e-12
            or np.abs(h_pol - h_pol.conj().T).max() > 1e-12):
        raise ConfigError("built Hamiltonians are not Hermitian")
    return h_lab, h_pol


def _interior_mask(sys, occupancy):
    _, _, occ = _bath_ops(sys.modes, sys.n_max)
    keep = np.all(occ <= occupancy, axis=0)
    return np.concatenate([keep, keep])


def polaron_identity_residual(sys, eps, delta, interior_occupancy=None):
    """Max-abs entry of U_P H_lab U_P^dag - (H_pol - shift) on the interior.

    The comparison is restricted to basis states with per-mode occupancy at
    most ``interior_occupancy`` (default n_max - 2), where the finite-Fock
    artifacts of the displacement exponentials are negligible; on a fixed
    interior window the residual decreases monotonically with n_max.
    """
    if interior_occupancy is None:
        interior_occupancy = max(sys.n_max - 2, 0)
    if not 0 <= interior_occupancy <= sys.n_max:
        raise ConfigError("interior occupancy must lie in [0, n_max]")
    h_lab, h_pol = build_hamiltonians(sys, eps, delta)
    u = polaron_unitary(sys)
    lhs = u @ h_lab @ u.conj().T
    rhs = h_pol - polaron_shift(sys) * np.eye(sys.dim)
    mask = _interior_mask(sys, interior_occupancy)
    diff = (lhs - rhs)[np.ix_(mask, mask)]
    return float(np.abs(diff).max())


def dressed_projector(sys, state):
    """P_psi = U_P (|psi><psi| x 1_B) U_P^dag in the truncated space."""
    psi = np.array([state.zeta1, state.zeta2], dtype=complex)
    proj_s = np.outer(psi, psi.conj())
    u = polaron_unitary(sys)
    return u @ np.kron(proj_s, np.eye(sys.bath_dim, dtype=complex)) @ u.conj().T


def exact_survival(tau, n_measurements, state, sys, eps, delta):
    """Survival probabilities under repeated projective measurements.

    Zero temperature: the initial state is the normalized projection of the
    free ground-branch product state (the excited branch when the prepared
    state has no ground component).  Evolution uses the dense
    eigendecomposition of the displaced-frame Hamiltonian.
    """
    if tau <= 0:
        raise ConfigError("tau must be positive")
    if n_measurements < 1:
        raise ConfigError("need at least one measurement")
    _, h_pol = build_hamiltonians(sys, eps, delta)
    proj = dressed_projector(sys, state)
    branch = 1 if abs(state.zeta2) > 0 else 0
    v = np.zeros(sys.dim, dtype=complex)
    v[branch * sys.bath_dim] = 1.0  # |branch> x |vac>
    v = proj @ v
    norm = np.linalg.norm(v)
    if norm <= 0:
        raise ConfigError("initial projection vanished")
    v = v / norm

    evals, evecs = eigh(h_pol)
    phases = np.exp(-1j * evals * tau)
    prop = (evecs * phases[None, :]) @ evecs.conj().T

    _, _, occ = _bath_ops(sys.modes, sys.n_max)
    top = np.any(occ == sys.n_max, axis=0)
    top_full = np.concatenate([top, top])

    survivals = []
    for _ in range(n_measurements):
        w = prop @ v
        leak = float(np.sum(np.abs(w[top_full]) ** 2))
        if leak > _LEAKAGE_TOL:
            raise TruncationLeakageError(
                f"truncation leakage {leak:.3e} exceeds {_LEAKAGE_TOL}",
                leakage=leak)
        q = proj @ w
        p = float(np.real(np.vdot(q, q)))
        if p <= 0:
            raise ConfigError("survival collapsed to zero; cannot renormalize")
        survivals.append(p)
        v = q / math.sqrt(p)
    return survivals


def bath_trace_check(t1, t2, tau, sys):
    """Vacuum expectation <e^{chi(t2)} e^{-chi(tau)} e^{chi(t1)} e^{-chi}>.

    Computed operator by operator from Heisenberg-evolved generators; equals
    W(t1, t2, tau) * e^{-i phi_I(t2)} e^{-i phi_I(t1)} e^{i phi_I(tau)} for
    the same discrete bath.
    """
    vac = np.zeros(sys.bath_dim, dtype=complex)
    vac[0] = 1.0
    v = expm(-chi_matrix_at(sys, 0.0)) @ vac
    v = expm(chi_matrix_at(sys, t1)) @ v
    v = expm(-chi_matrix_at(sys, tau)) @ v
    v = expm(chi_matrix_at(sys, t2)) @ v
    return complex(np.vdot(vac, v))


def bath_trace_reference(t1, t2, tau, sys):
    """The same trace built from the phase functions of the discrete bath."""
    phases = BathPhases(sys.spectral_density())
    w = phases.w_factor(t1, t2, tau)
    corr = np.exp(-1j * phases.phi_I(t2) - 1j * phases.phi_I(t1)
                  + 1j * phases.phi_I(tau))
    return complex(w * corr)


# -- adaptive refinement oracle ----------------------------------------------

def _panel_line(f, a, b, n):
    x, w = gauss_legendre_01(n)
    t = a + (b - a) * x
    return (b - a) * np.sum(w * np.asarray(f(t)))


def _adapt_line(f, a, b, tol, depth):
    coarse = _panel_line(f, a, b, 16)
    fine = _panel_line(f, a, b, 32)
    if abs(fine - coarse) <= tol:
        return fine
    if depth <= 0:
        raise IntegrationError(
            f"adaptive line refinement stalled on [{a}, {b}]",
            estimate=abs(fine - coarse))
    m = 0.5 * (a + b)
    return (_adapt_line(f, a, m, tol / 2, depth - 1)
            + _adapt_line(f, m, b, tol / 2, depth - 1))


def _panel_rect(f, ax, bx, ay, by, n):
    x, w = gauss_legendre_01(n)
    tx = ax + (bx - ax) * x
    ty = ay + (by - ay) * x
    wts = (bx - ax) * (by - ay) * w[:, None] * w[None, :]
    return np.sum(wts * np.asarray(f(tx[:, None], ty[None, :])))


def _adapt_rect(f, ax, bx, ay, by, tol, depth):
    coarse = _panel_rect(f, ax, bx, ay, by, 8)
    fine = _panel_rect(f, ax, bx, ay, by, 16)
    if abs(fine - coarse) <= tol:
        return fine
    if depth <= 0:
        raise IntegrationError(
            "adaptive rectangle refinement stalled",
            estimate=abs(fine - coarse))
    mx = 0.5 * (ax + bx)
    my = 0.5 * (ay + by)
    q = tol / 4
    return (_adapt_rect(f, ax, mx, ay, my, q, depth - 1)
            + _adapt_rect(f, mx, bx, ay, my, q, depth - 1)
            + _adapt_rect(f, ax, mx, my, by, q, depth - 1)
            + _adapt_rect(f, mx, bx, my, by, q, depth - 1))


def refine_quadrature(f, domain, target_tol=1e-12, max_depth=16):
    """Adaptive bisection oracle over a named domain.

    ``domain`` is one of ("line", a, b), ("triangle", tau), ("square", tau)
    or ("semi_infinite", scale).  Integrands must be vectorized.  Panels are
    bisected until the node-doubling difference is below ``target_tol``.
    """
    kind = domain[0]
    if kind == "line":
        return _adapt_line(f, domain[1], domain[2], target_tol, max_depth)
    if kind == "triangle":
        tau = domain[1]
        return _adapt_rect(lambda t1, u: t1 * np.asarray(f(t1, t1 * u)),
                           0.0, tau, 0.0, 1.0, target_tol, max_depth)
    if kind == "square":
        tau = domain[1]
        return _adapt_rect(f, 0.0, tau, 0.0, tau, target_tol, max_depth)
    if kind == "semi_infinite":
        scale = domain[1]
        total = 0.0 + 0.0j
        width = 8.0 * scale
        lo = 0.0
        small = 0
        for _ in range(64):
            part = _adapt_line(f, lo, lo + width, target_tol / 4, max_depth)
            total += part
            lo += width
            small = small + 1 if abs(part) <= target_tol / 4 else 0
            if small >= 2:
                return total
        raise IntegrationError("semi-infinite tail did not decay")
    raise ConfigError(f"unknown refinement domain {kind!r}")
