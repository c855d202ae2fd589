import numpy as np
import pytest
import scipy.integrate as si

from zenoscope.bath import (BathPhases, SpectralDensity, Temperature,
                            discretize)
from zenoscope.errors import ConfigError, DivergentIntegralError


def closed_phases(G, omega_c=1.0):
    return BathPhases(SpectralDensity.continuum(G, 2.0, omega_c))


def quad_phases(G, s=2.0, omega_c=1.0, beta=None):
    temp = Temperature.zero() if beta is None else Temperature.finite(beta)
    return BathPhases(SpectralDensity.continuum(G, s, omega_c), temp,
                      use_closed_form=False)


def reference_integral(kernel, G, s, omega_c, t, coth=lambda w: 1.0):
    def f(w):
        j = G * w ** s * omega_c ** (1 - s) * np.exp(-w / omega_c)
        return 4 * j * kernel(w) / w ** 2 * coth(w)
    val, _ = si.quad(f, 0, np.inf, limit=400)
    return val


def test_density_validation():
    with pytest.raises(ConfigError):
        SpectralDensity.continuum(-1.0)
    with pytest.raises(ConfigError):
        SpectralDensity.continuum(1.0, s=0.0)
    with pytest.raises(ConfigError):
        SpectralDensity.continuum(1.0, omega_c=0.0)
    with pytest.raises(ConfigError):
        SpectralDensity.discrete([])
    with pytest.raises(ConfigError):
        SpectralDensity.discrete([(-1.0, 0.1)])


def test_phi_r_closed_form_values():
    ph = closed_phases(1.0)
    assert ph.phi_R(0.0) == 0.0
    assert abs(ph.phi_R(1.0) - 2.0) <= 1e-14  # G(4 - 4/(1 + t^2)) at t=1


def test_phi_r_quadrature_matches_defining_integral():
    G, t = 3.0, 10.0
    ref = reference_integral(lambda w: 1 - np.cos(w * t), G, 2.0, 1.0, t)
    ph = closed_phases(G)
    assert abs(ph.phi_R(t) - ref) <= 1e-8 * abs(ref)
    phq = quad_phases(G)
    assert abs(phq.phi_R(t) - ref) <= 1e-8 * abs(ref)


def test_phi_i_values():
    ph = closed_phases(1.0)
    assert ph.phi_I(0.0) == 0.0
    assert abs(ph.phi_I(1.0) - 2.0) <= 1e-14  # 4G t wc/(1 + wc^2 t^2)
    G, t = 2.0, 0.5
    ref = reference_integral(lambda w: np.sin(w * t), G, 2.0, 1.0, t)
    assert abs(quad_phases(G).phi_I(t) - ref) <= 1e-8 * abs(ref)


def test_phi_r1_values():
    ph = closed_phases(1.0)
    assert abs(ph.phi_R1(0.0) - 4.0) <= 1e-14
    assert abs(ph.phi_R1(1.0) - 2.0) <= 1e-14
    G, t = 2.0, 3.0
    ref = reference_integral(lambda w: np.cos(w * t), G, 2.0, 1.0, t)
    assert abs(quad_phases(G).phi_R1(t) - ref) <= 1e-8 * abs(ref)


def test_phi_r2_values():
    assert abs(closed_phases(1.0).phi_R2() - 4.0) <= 1e-14
    assert abs(closed_phases(2.5).phi_R2() - 10.0) <= 1e-14
    # super-Ohmic s=3 against the defining integral
    ref = reference_integral(lambda w: 1.0, 1.0, 3.0, 1.0, 0.0)
    got = quad_phases(1.0, s=3.0).phi_R2()
    assert abs(got - ref) <= 1e-8 * abs(ref)


def test_phi_r2_divergence_detected():
    with pytest.raises(DivergentIntegralError):
        quad_phases(1.0, s=0.8).phi_R2()
    # finite temperature makes s = 2 infrared-divergent as well
    with pytest.raises(DivergentIntegralError):
        quad_phases(1.0, s=2.0, beta=5.0).phi_R2()


def test_correlation_function():
    ph = closed_phases(3.0)
    assert ph.correlation(0.0) == 1.0 + 0.0j
    rng = np.random.default_rng(7)
    for t in rng.uniform(-5, 5, size=20):
        c = ph.correlation(t)
        assert abs(abs(c) - np.exp(-ph.phi_R(t))) <= 1e-14
    # component-wise reconstruction from independently quadratured parts
    t = 2.0
    pr = reference_integral(lambda w: 1 - np.cos(w * t), 3.0, 2.0, 1.0, t)
    pi = reference_integral(lambda w: np.sin(w * t), 3.0, 2.0, 1.0, t)
    assert abs(ph.correlation(t) - np.exp(-pr - 1j * pi)) <= 1e-10


def test_parity():
    ph = closed_phases(1.7)
    rng = np.random.default_rng(11)
    for t in rng.uniform(0.01, 8, size=20):
        assert abs(ph.phi_R(-t) - ph.phi_R(t)) <= 1e-14
        assert abs(ph.phi_I(-t) + ph.phi_I(t)) <= 1e-14


def test_phi_r_monotone_in_abs_t():
    ph = closed_phases(2.0)
    ts = np.linspace(0.0, 20.0, 100)
    vals = [ph.phi_R(t) for t in ts]
    assert np.all(np.diff(vals) >= -1e-14)


def test_correlation_composition_identity():
    ph = closed_phases(1.2)
    for t in (0.3, 1.0, 4.2):
        prod = ph.correlation(t) * np.conjugate(ph.correlation(-t))
        assert abs(abs(prod) - np.exp(-2 * ph.phi_R(t))) <= 1e-14


def test_closed_vs_quadrature_log_grid():
    # 50-point log grid over six decades, both directions of the dual route
    ts = np.logspace(-3, 3, 50)
    pc = closed_phases(2.0)
    pq = quad_phases(2.0)
    for t in ts:
        for name in ("phi_R", "phi_I", "phi_R1"):
            a = getattr(pc, name)(t)
            b = getattr(pq, name)(t)
            assert abs(a - b) <= 1e-8 * max(abs(a), 1e-300)


def test_w_factor_values():
    ph = closed_phases(1.0)
    # all chi exponents cancel pairwise at coincident times
    assert abs(ph.w_factor(0.0, 0.0, 0.0) - 1.0) <= 1e-12
    assert abs(ph.w_prime_factor(0.0, 0.0, 0.0) - 1.0) <= 1e-12


def _w_printed(ph, t1, t2, tau):
    log = (-2 * ph.phi_R2() - ph.phi_R1(t2 - t1) + ph.phi_R1(t2 - tau)
           + ph.phi_R1(t1 - tau) + ph.phi_R1(t2) + ph.phi_R1(t1)
           - ph.phi_R1(tau))
    phase = ph.phi_I(t2 - t1) - ph.phi_I(t2 - tau) + ph.phi_I(t1 - tau)
    return np.exp(log + 1j * phase)


def _w_prime_printed(ph, t1, t2, tau):
    log = (-2 * ph.phi_R2() + ph.phi_R1(t2 - t1) - ph.phi_R1(t2 - tau)
           + ph.phi_R1(t1 - tau) + ph.phi_R1(t2) - ph.phi_R1(t1)
           + ph.phi_R1(tau))
    phase = -ph.phi_I(t2 - t1) + ph.phi_I(t2 - tau) - ph.phi_I(t1 - tau)
    return np.exp(log + 1j * phase)


def test_w_factors_match_product_formulas():
    ph = closed_phases(1.3)
    rng = np.random.default_rng(3)
    for _ in range(6):
        t1, t2, tau = rng.uniform(0, 3, size=3)
        assert abs(ph.w_factor(t1, t2, tau)
                   - _w_printed(ph, t1, t2, tau)) <= 1e-12
        assert abs(ph.w_prime_factor(t1, t2, tau)
                   - _w_prime_printed(ph, t1, t2, tau)) <= 1e-12


def test_w_factor_real_when_phases_zeroed():
    ph = closed_phases(0.9)
    rng = np.random.default_rng(5)
    for _ in range(5):
        t1, t2, tau = rng.uniform(0, 4, size=3)
        w = _w_printed(ph, t1, t2, tau)
        assert abs(w) > 0.0
        # magnitude part alone (phi_I terms dropped) is real and positive
        assert np.exp(np.log(np.abs(w))) > 0.0
        assert abs(np.abs(ph.w_factor(t1, t2, tau)) - np.abs(w)) <= 1e-12


def test_discrete_phi_functions():
    modes = [(1.0, 0.2), (2.5, 0.1 + 0.05j)]
    ph = BathPhases(SpectralDensity.discrete(modes))
    t = 1.3
    expect_r = sum(4 * abs(g) ** 2 * (1 - np.cos(w * t)) / w ** 2
                   for w, g in modes)
    expect_i = sum(4 * abs(g) ** 2 * np.sin(w * t) / w ** 2
                   for w, g in modes)
    assert abs(ph.phi_R(t) - expect_r) <= 1e-14
    assert abs(ph.phi_I(t) - expect_i) <= 1e-14


def test_discrete_convergence_to_continuum():
    # Gauss-Legendre discretization error at fixed t halves (or better)
    # when the mode count doubles
    density = SpectralDensity.continuum(1.0, 2.0, 1.0)
    ph_cont = BathPhases(density)
    t = 1.0
    errs = []
    for n in (8, 16, 32):
        disc = discretize(density, n, omega_max=30.0)
        ph = BathPhases(disc)
        errs.append(abs(ph.phi_R(t) - ph_cont.phi_R(t)))
    assert errs[1] <= 0.5 * errs[0]
    assert errs[2] <= 0.5 * errs[1]


def test_finite_temperature_coth():
    temp = Temperature.finite(2.0)
    # series guard region agrees with the exact expression
    x = 1e-5
    w = 2 * x / temp.beta
    assert abs(temp.coth_half(w) - 1.0 / np.tanh(x)) <= 1e-12
    # phi_R picks up the thermal factor
    ph_t = BathPhases(SpectralDensity.continuum(1.0, 2.0, 1.0), temp)
    ph_0 = closed_phases(1.0)
    assert ph_t.phi_R(1.0) > ph_0.phi_R(1.0)
    ref = reference_integral(lambda w: 1 - np.cos(w), 1.0, 2.0, 1.0, 1.0,
                             coth=lambda w: 1.0 / np.tanh(temp.beta * w / 2))
    assert abs(ph_t.phi_R(1.0) - ref) <= 1e-8 * ref


def test_word_trace_kernel_path_balanced():
    # finite-beta continuum s=2: individual phi_R1 diverge, but the balanced
    # word stays finite and matches a discretized-bath evaluation
    density = SpectralDensity.continuum(0.5, 2.0, 1.0)
    temp = Temperature.finite(3.0)
    ph = BathPhases(density, temp)
    word = [(+1, 0.7), (-1, 1.2), (+1, 0.3), (-1, 0.0)]
    val = ph.word_trace(word)
    disc = discretize(density, 160, omega_max=40.0)
    val_disc = BathPhases(disc, temp).word_trace(word)
    assert abs(val - val_disc) <= 1e-6 * abs(val_disc)
    with pytest.raises(DivergentIntegralError):
        ph.word_trace([(+1, 0.5), (+1, 0.0)])  # unbalanced diverges
