"""Acceptance suite: one test per exit criterion, each printing a PASS/FAIL
line.  The reference point throughout is eps = omega_c = 1, delta = 0.05,
super-Ohmic s = 2 at zero temperature.

Criterion 5's general-angle clause is implemented exactly as stated and is
expected to fail: at any fixed angle away from the poles the rate contains a
tunneling-independent dephasing part (present by construction, cf. the
pure-dephasing limit test in test_rates), so the ratio of rates at 2*delta
and delta tends to 1 rather than 4 as delta -> 0.  See the decisions ledger.
"""

import json
import math
import os
import time

import numpy as np
import pytest

from zenoscope.analysis import (ANTI_ZENO, MODE_EFFECTIVE, MODE_MODIFIED,
                                TauGrid, classify_regimes, critical_angle,
                                find_peak, sample_curve)
from zenoscope.bath import BathPhases, SpectralDensity
from zenoscope.cli import PRESETS, main as cli_main
from zenoscope.oracle import (DiscreteBathSystem, bath_trace_check,
                              bath_trace_reference, exact_survival,
                              polaron_identity_residual)
from zenoscope.rates import (ModelParams, gamma_excited, gamma_general,
                             gamma_modified, gamma_modified_excited,
                             gamma_superposition, survival_general)
from zenoscope.state import make_state

EPS = 1.0
OMEGA_C = 1.0
DELTA = 0.05
FIG_GRID = TauGrid(0.025, 5.0, 200, "linear")


def params(G, delta=DELTA):
    return ModelParams(eps=EPS, delta=delta,
                       bath=SpectralDensity.continuum(G, 2.0, OMEGA_C))


def report(criterion, ok, detail):
    print(f"CRITERION {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {criterion}: {detail}"


def test_criterion_1_phi_closed_vs_quadrature():
    start = time.time()
    ts = np.logspace(-3, 3, 50)
    worst = 0.0
    for G in (0.5, 1.0, 2.0, 3.0):
        density = SpectralDensity.continuum(G, 2.0, OMEGA_C)
        closed = BathPhases(density)
        quad = BathPhases(density, use_closed_form=False)
        for t in ts:
            for name in ("phi_R", "phi_I", "phi_R1"):
                a = getattr(closed, name)(t)
                b = getattr(quad, name)(t)
                worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
        worst = max(worst, abs(closed.phi_R2() - quad.phi_R2())
                    / closed.phi_R2())
    elapsed = time.time() - start
    report(1, worst <= 1e-8 and elapsed < 5.0,
           f"max rel err {worst:.2e} (tol 1e-8), {elapsed:.1f}s (< 5s)")


def _curves(theta, mode):
    state = make_state(theta)
    out = {}
    for G in (1.0, 2.0, 3.0):
        curve = sample_curve(state, params(G), mode, FIG_GRID)
        out[G] = (find_peak(curve), classify_regimes(curve))
    return out


def test_criterion_2_fig1a_excited_state():
    start = time.time()
    res = _curves(0.0, MODE_EFFECTIVE)
    peaks = {G: res[G][0] for G in res}
    decreasing = (peaks[1.0].gamma_max > peaks[2.0].gamma_max
                  > peaks[3.0].gamma_max)
    g1_zeno_only = ANTI_ZENO not in res[1.0][1].labels()
    interior_23 = (peaks[2.0].refined and peaks[3.0].refined
                   and ANTI_ZENO in res[2.0][1].labels()
                   and ANTI_ZENO in res[3.0][1].labels())
    elapsed = time.time() - start
    report(2, decreasing and g1_zeno_only and interior_23 and elapsed < 60,
           f"peaks {peaks[1.0].gamma_max:.3e} > {peaks[2.0].gamma_max:.3e} > "
           f"{peaks[3.0].gamma_max:.3e}; G=1 Zeno-only {g1_zeno_only}; "
           f"interior anti-Zeno peaks for G=2,3 {interior_23}; "
           f"{elapsed:.0f}s (< 60s)")


def test_criterion_3_fig1b_superposition():
    start = time.time()
    res = _curves(math.pi / 2, MODE_EFFECTIVE)
    peaks = {G: res[G][0] for G in res}
    increasing = (peaks[1.0].gamma_max < peaks[2.0].gamma_max
                  < peaks[3.0].gamma_max)
    elapsed = time.time() - start
    report(3, increasing and elapsed < 120,
           f"peaks {peaks[1.0].gamma_max:.3e} < {peaks[2.0].gamma_max:.3e} < "
           f"{peaks[3.0].gamma_max:.3e}; {elapsed:.0f}s (< 120s)")


def test_criterion_4_specialization_equalities():
    taus = np.linspace(0.05, 5.0, 100)
    p = params(1.0)
    st0 = make_state(0.0)
    stx = make_state(math.pi / 2)
    worst0 = max(abs(gamma_general(float(t), st0, p).gamma
                     - gamma_excited(float(t), p).gamma) for t in taus)
    worstx = max(abs(gamma_general(float(t), stx, p).gamma
                     - gamma_superposition(float(t), p).gamma) for t in taus)
    report(4, worst0 <= 1e-9 and worstx <= 1e-9,
           f"max |general - excited| = {worst0:.2e}, "
           f"max |general - superposition| = {worstx:.2e} (tol 1e-9)")


def test_criterion_5a_delta_scaling_excited():
    worst = 0.0
    for tau in (0.4, 1.0, 3.0):
        g1 = gamma_excited(tau, params(1.0, delta=0.025)).gamma
        g2 = gamma_excited(tau, params(1.0, delta=0.05)).gamma
        worst = max(worst, abs(g2 / g1 - 4.0) / 4.0)
    report("5a", worst <= 1e-12,
           f"max |ratio/4 - 1| = {worst:.2e} (tol 1e-12)")


def test_criterion_5b_delta_scaling_general_theta():
    # As stated: at general theta the deviation of Gamma(2*delta)/Gamma(delta)
    # from 4 must shrink proportionally to delta.  The model's
    # tunneling-independent dephasing term makes the ratio tend to 1 instead,
    # so this criterion cannot hold; it is kept faithful and red.
    st = make_state(math.pi / 3)
    tau = 1.0
    devs = []
    for delta in (0.05, 0.025, 0.0125):
        r = (gamma_general(tau, st, params(1.0, delta=2 * delta)).gamma
             / gamma_general(tau, st, params(1.0, delta=delta)).gamma)
        devs.append(abs(r - 4.0))
    shrinks = devs[1] <= 0.75 * devs[0] and devs[2] <= 0.75 * devs[1]
    report("5b", shrinks,
           f"deviations from 4 at delta=0.05/0.025/0.0125: "
           f"{devs[0]:.4f}/{devs[1]:.4f}/{devs[2]:.4f} - do not shrink "
           "linearly (documented spec defect: rate has a delta-independent "
           "dephasing part at general theta; see decisions ledger)")


def test_criterion_6_critical_angles():
    start = time.time()
    p = params(1.0)
    details = []
    ok = True
    for mode, target in ((MODE_EFFECTIVE, math.pi / 225),
                         (MODE_MODIFIED, math.pi / 167)):
        res = critical_angle(1.0, 3.0, p, mode)
        rel = abs(res.theta_c - target) / target
        within = rel <= 0.20
        grid = TauGrid(0.05, 5.0, 200, "log")
        signs = []
        for factor in (0.8, 1.25):
            theta = res.theta_c * factor
            peaks = []
            for G in (1.0, 3.0):
                pg = ModelParams(eps=EPS, delta=DELTA,
                                 bath=SpectralDensity.continuum(G, 2.0,
                                                                OMEGA_C))
                curve = sample_curve(make_state(theta), pg, mode, grid)
                peaks.append(find_peak(curve).gamma_max)
            signs.append(peaks[1] - peaks[0])
        flips = signs[0] < 0.0 < signs[1]
        ok = ok and within and flips
        details.append(f"{mode}: theta_c = pi/{math.pi / res.theta_c:.1f} "
                       f"(target pi/{math.pi / target:.0f}, dev {rel:.1%}), "
                       f"order flips across theta_c: {flips}")
    elapsed = time.time() - start
    report(6, ok and elapsed < 600,
           "; ".join(details) + f"; {elapsed:.0f}s (< 600s)")


def test_criterion_7_modified_rate_structure():
    taus = np.linspace(0.05, 5.0, 40)
    st0 = make_state(0.0)
    worst = 0.0
    for G in (1.0, 3.0):
        p = params(G)
        for t in taus:
            a = gamma_modified(float(t), st0, p).gamma
            b = gamma_modified_excited(float(t), p).gamma
            worst = max(worst, abs(a - b))
    res0 = _curves(0.0, MODE_MODIFIED)
    resx = _curves(math.pi / 2, MODE_MODIFIED)
    decreasing = (res0[1.0][0].gamma_max > res0[2.0][0].gamma_max
                  > res0[3.0][0].gamma_max)
    increasing = (resx[1.0][0].gamma_max < resx[2.0][0].gamma_max
                  < resx[3.0][0].gamma_max)
    report(7, worst <= 1e-9 and decreasing and increasing,
           f"max |assembly - transcription| = {worst:.2e} (tol 1e-9); "
           f"modified peak order: decreasing at theta=0 {decreasing}, "
           f"increasing at theta=pi/2 {increasing}")


def test_criterion_8_oracle_suite():
    start = time.time()
    # polaron identity on M=2, n_max=4
    ident = DiscreteBathSystem.from_continuum(
        SpectralDensity.continuum(0.001, 2.0, OMEGA_C), 2, 4)
    residual = polaron_identity_residual(ident, EPS, DELTA)
    # Bloch-identity four-time trace on M=2, n_max=5
    wsys = DiscreteBathSystem(modes=((1.3, 0.11), (2.1, 0.07)), n_max=5)
    werr = 0.0
    for t1, t2, tau in ((0.7, 0.3, 1.2), (0.4, 1.1, 0.9), (1.5, 0.2, 0.6)):
        got = bath_trace_check(t1, t2, tau, wsys)
        ref = bath_trace_reference(t1, t2, tau, wsys)
        werr = max(werr, abs(got - ref) / abs(ref))
    # exact vs perturbative survival scaling on M=3, n_max=4
    sys_ = DiscreteBathSystem.from_continuum(
        SpectralDensity.continuum(0.015, 2.0, OMEGA_C), 3, 4)
    st = make_state(math.pi / 2)
    deltas = (0.05, 0.025, 0.0125)
    errs = []
    for delta in deltas:
        p = ModelParams(eps=EPS, delta=delta, bath=sys_.spectral_density())
        s_ex = exact_survival(1.0, 1, st, sys_, EPS, delta)[0]
        s_pt = survival_general(1.0, st, p)
        errs.append(abs(s_ex - s_pt))
    exponent = float(np.polyfit(np.log(deltas), np.log(errs), 1)[0])
    elapsed = time.time() - start
    report(8, residual <= 1e-8 and werr <= 1e-4 and exponent >= 2.5
           and elapsed < 300,
           f"identity residual {residual:.2e} (tol 1e-8); W check rel err "
           f"{werr:.2e} (tol 1e-4); scaling exponent {exponent:.2f} "
           f"(>= 2.5); {elapsed:.0f}s (< 300s)")


def _run_preset(name, workdir):
    command, _ = PRESETS[name]
    os.makedirs(workdir, exist_ok=True)
    cwd = os.getcwd()
    os.chdir(workdir)
    try:
        code = cli_main([command, "--preset", name])
    finally:
        os.chdir(cwd)
    assert code == 0, f"preset {name} exited {code}"
    return sorted(os.listdir(workdir))


def test_criterion_9_preset_determinism(tmp_path):
    mismatches = []
    for name in sorted(PRESETS):
        d1 = tmp_path / f"{name}_run1"
        d2 = tmp_path / f"{name}_run2"
        files1 = _run_preset(name, str(d1))
        files2 = _run_preset(name, str(d2))
        if files1 != files2:
            mismatches.append(f"{name}: file sets differ")
            continue
        for f in files1:
            if (d1 / f).read_bytes() != (d2 / f).read_bytes():
                mismatches.append(f"{name}/{f}")
    report(9, not mismatches,
           "byte-identical outputs for presets "
           f"{', '.join(sorted(PRESETS))}"
           + (f"; mismatches: {mismatches}" if mismatches else ""))
