"""Command-line front end: curve/sweep/critical-angle/phases/oracle.

Configuration is a JSON document; command-line flags override file values
and presets provide one-command reproduction of the reference figures.  All
numeric output is serialized with 17 significant digits and no timestamps,
so identical configurations produce byte-identical files.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
4 no sign change in a critical-angle bracket.
"""

import argparse
import copy
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (MODES, MODE_EFFECTIVE, MODE_MODIFIED, TauGrid,
                       critical_angle, find_peak, sample_curve)
from .bath import BathPhases, SpectralDensity, Temperature
from .errors import (ConfigError, NoCrossingError, NumericsError,
                     TruncationLeakageError, ZenoscopeError)
from .oracle import (DiscreteBathSystem, bath_trace_check,
                     bath_trace_reference, exact_survival,
                     polaron_identity_residual)
from .quadrature import QuadratureSpec
from .rates import ModelParams, gamma_general, gamma_modified, survival_general
from .state import InitialState

_PI = math.pi

DEFAULT_CONFIG = {
    "model": {
        "eps": 1.0,
        "delta": 0.05,
        "beta": None,
        "bath": {"kind": "continuum", "G": 1.0, "s": 2.0, "omega_c": 1.0},
    },
    "state": {"theta": 0.0, "phi": 0.0},
    "mode": MODE_EFFECTIVE,
    "grid": {"tau_min": 0.025, "tau_max": 5.0, "count": 200,
             "spacing": "linear"},
    "quadrature": {"nodes_1d": 200, "nodes_2d": 128, "rel_tol": 1e-8,
                   "max_refinements": 6},
    "curve": {"G_values": None, "both_modes": False},
    "critical_angle": {"G1": 1.0, "G2": 3.0, "bracket": [0.0, _PI / 2],
                       "tol": 1e-6,
                       "grid": {"tau_min": 0.05, "tau_max": 5.0, "count": 200,
                                "spacing": "log"},
                       "table_pi_over_theta": [150.0, 175.0, 200.0, 225.0,
                                               250.0, 275.0, 300.0]},
    "sweep": {"G_values": [1.0], "theta_values": [0.0], "modes": None},
    "phases": {"t_min": 0.0, "t_max": 10.0, "count": 101,
               "spacing": "linear"},
    "oracle": {"n_modes": 3, "n_max": 4, "G": 0.015, "tau": 1.0,
               "theta": _PI / 2, "deltas": [0.05, 0.025, 0.0125],
               "identity_modes": 2, "identity_n_max": 4,
               "identity_G": 0.001,
               "trace_points": [[0.7, 0.3, 1.2], [0.4, 1.1, 0.9]]},
    "output": {"path": None, "format": "csv"},
}

_FIG_GRID = {"tau_min": 0.025, "tau_max": 5.0, "count": 200,
             "spacing": "linear"}

PRESETS = {
    "fig1a": ("curve", {"state": {"theta": 0.0, "phi": 0.0},
                        "mode": MODE_EFFECTIVE, "grid": _FIG_GRID,
                        "curve": {"G_values": [1.0, 2.0, 3.0]}}),
    "fig1b": ("curve", {"state": {"theta": _PI / 2, "phi": 0.0},
                        "mode": MODE_EFFECTIVE, "grid": _FIG_GRID,
                        "curve": {"G_values": [1.0, 2.0, 3.0]}}),
    "fig2a": ("sweep", {"mode": MODE_EFFECTIVE, "grid": _FIG_GRID,
                        "sweep": {"G_values": [1.0],
                                  "theta_values": [0.0, _PI / 8, _PI / 4,
                                                   _PI / 2],
                                  "modes": [MODE_EFFECTIVE]}}),
    "fig2b": ("sweep", {"mode": MODE_MODIFIED, "grid": _FIG_GRID,
                        "sweep": {"G_values": [1.0],
                                  "theta_values": [0.0, _PI / 8, _PI / 4,
                                                   _PI / 2],
                                  "modes": [MODE_MODIFIED]}}),
    "fig3": ("critical-angle", {"mode": MODE_EFFECTIVE}),
    "fig5a": ("curve", {"state": {"theta": 0.0, "phi": 0.0},
                        "mode": MODE_MODIFIED, "grid": _FIG_GRID,
                        "curve": {"G_values": [1.0, 2.0, 3.0]}}),
    "fig5b": ("curve", {"state": {"theta": _PI / 2, "phi": 0.0},
                        "mode": MODE_MODIFIED, "grid": _FIG_GRID,
                        "curve": {"G_values": [1.0, 2.0, 3.0]}}),
    "fig6": ("critical-angle", {"mode": MODE_MODIFIED}),
}


def _merge(base, override):
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _fmt(x):
    return format(float(x), ".17g")


def load_config(args, command):
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if args.preset:
        if args.preset not in PRESETS:
            raise ConfigError(f"unknown preset {args.preset!r}; choose from "
                              f"{sorted(PRESETS)}")
        preset_cmd, preset_cfg = PRESETS[args.preset]
        if preset_cmd != command:
            raise ConfigError(f"preset {args.preset!r} belongs to the "
                              f"{preset_cmd!r} command")
        cfg = _merge(cfg, preset_cfg)
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        cfg = _merge(cfg, file_cfg)
    overrides = {}
    for key in ("eps", "delta", "beta", "G"):
        value = getattr(args, key.lower(), None)
        if value is not None:
            if key == "G":
                overrides.setdefault("model", {}).setdefault("bath", {})["G"] \
                    = value
            else:
                overrides.setdefault("model", {})[key] = value
    for key in ("theta", "phi"):
        value = getattr(args, key, None)
        if value is not None:
            overrides.setdefault("state", {})[key] = value
    if getattr(args, "mode", None):
        overrides["mode"] = args.mode
    for key in ("tau_min", "tau_max", "count", "spacing"):
        value = getattr(args, key, None)
        if value is not None:
            overrides.setdefault("grid", {})[key] = value
    if getattr(args, "output", None):
        overrides.setdefault("output", {})["path"] = args.output
    if getattr(args, "fmt", None):
        overrides.setdefault("output", {})["format"] = args.fmt
    if getattr(args, "both_modes", False):
        overrides.setdefault("curve", {})["both_modes"] = True
    if getattr(args, "G1", None) is not None:
        overrides.setdefault("critical_angle", {})["G1"] = args.G1
    if getattr(args, "G2", None) is not None:
        overrides.setdefault("critical_angle", {})["G2"] = args.G2
    if getattr(args, "G_values", None):
        values = [float(v) for v in args.G_values.split(",")]
        overrides.setdefault("sweep", {})["G_values"] = values
        overrides.setdefault("curve", {})["G_values"] = values
    if getattr(args, "theta_values", None):
        overrides.setdefault("sweep", {})["theta_values"] = \
            [float(v) for v in args.theta_values.split(",")]
    return _merge(cfg, overrides)


def model_from_config(cfg):
    m = cfg["model"]
    b = m["bath"]
    if b.get("kind", "continuum") == "continuum":
        bath = SpectralDensity.continuum(b["G"], b.get("s", 2.0),
                                         b.get("omega_c", 1.0))
    else:
        bath = SpectralDensity.discrete(
            [(w, complex(re, im)) for w, re, im in b["modes"]])
    beta = m.get("beta")
    temp = Temperature.zero() if beta is None else Temperature.finite(beta)
    return ModelParams(eps=m["eps"], delta=m["delta"], bath=bath, temp=temp)


def state_from_config(cfg):
    s = cfg["state"]
    return InitialState(theta=float(s["theta"]), phi=float(s.get("phi", 0.0)))


def grid_from_config(cfg):
    g = cfg["grid"]
    return TauGrid(tau_min=g["tau_min"], tau_max=g["tau_max"],
                   count=int(g["count"]), spacing=g.get("spacing", "linear"))


def quadrature_from_config(cfg):
    q = cfg["quadrature"]
    return QuadratureSpec(nodes_1d=int(q["nodes_1d"]),
                          nodes_2d=int(q["nodes_2d"]),
                          rel_tol=float(q["rel_tol"]),
                          max_refinements=int(q["max_refinements"]))


def _mode_from_config(cfg):
    mode = cfg["mode"]
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def _header_lines(cfg):
    return [f"# zenoscope {__version__}",
            "# config " + json.dumps(cfg, sort_keys=True)]


def _write_text(path, text):
    Path(path).write_text(text)
    print(f"wrote {path}")


def write_csv(path, cfg, columns, rows):
    lines = _header_lines(cfg)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _fmt(cell)
                              for cell in row))
    _write_text(path, "\n".join(lines) + "\n")


def write_json(path, cfg, payload):
    doc = {"tool": f"zenoscope {__version__}", "config": cfg,
           "result": payload}
    _write_text(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _curve_rows(state, params, mode, grid, quad, both_modes):
    taus = grid.values()
    rows = []
    for tau in taus:
        tau = float(tau)
        if both_modes:
            ge = gamma_general(tau, state, params, quadrature=quad).gamma
            gm = gamma_modified(tau, state, params, quadrature=quad).gamma
            rows.append((tau, ge, gm))
        else:
            fn = gamma_general if mode == MODE_EFFECTIVE else gamma_modified
            rows.append((tau, fn(tau, state, params, quadrature=quad).gamma))
    return rows


def cmd_curve(args):
    cfg = load_config(args, "curve")
    params = model_from_config(cfg)
    state = state_from_config(cfg)
    grid = grid_from_config(cfg)
    quad = quadrature_from_config(cfg)
    mode = _mode_from_config(cfg)
    both = bool(cfg["curve"].get("both_modes"))
    columns = (["tau", "gamma_effective", "gamma_modified"] if both
               else ["tau", "gamma"])
    base = cfg["output"]["path"] or "curve.csv"
    g_values = cfg["curve"].get("G_values")
    if g_values:
        if not params.bath.is_continuum:
            raise ConfigError("G_values requires a continuum bath")
        stem = Path(base)
        for g in g_values:
            p = ModelParams(eps=params.eps, delta=params.delta,
                            bath=SpectralDensity.continuum(
                                g, params.bath.s, params.bath.omega_c),
                            temp=params.temp)
            sub_cfg = _merge(cfg, {"model": {"bath": {"G": g}},
                                   "curve": {"G_values": None}})
            rows = _curve_rows(state, p, mode, grid, quad, both)
            path = stem.with_name(f"{stem.stem}_G{g:g}{stem.suffix}")
            write_csv(path, sub_cfg, columns, rows)
    else:
        rows = _curve_rows(state, params, mode, grid, quad, both)
        write_csv(base, cfg, columns, rows)
    return 0


def _peak_pair(theta, G1, G2, params, mode, grid, quad):
    from dataclasses import replace
    out = []
    for g in (G1, G2):
        p = replace(params, bath=replace(params.bath, G=float(g)))
        curve = sample_curve(InitialState(theta=theta, phi=0.0), p, mode,
                             grid, quad)
        out.append(find_peak(curve, quad))
    return out


def cmd_critical_angle(args):
    cfg = load_config(args, "critical-angle")
    params = model_from_config(cfg)
    quad = quadrature_from_config(cfg)
    mode = _mode_from_config(cfg)
    ca = cfg["critical_angle"]
    cg = ca["grid"]
    grid = TauGrid(tau_min=cg["tau_min"], tau_max=cg["tau_max"],
                   count=int(cg["count"]), spacing=cg.get("spacing", "log"))
    res = critical_angle(ca["G1"], ca["G2"], params, mode,
                         theta_bracket=tuple(ca["bracket"]),
                         tol=float(ca["tol"]), grid=grid, quadrature=quad)
    payload = {
        "theta_c": res.theta_c,
        "pi_over_theta_c": _PI / res.theta_c,
        "bracket": list(res.bracket),
        "residual": res.residual,
        "G_pair": list(res.G_pair),
        "peaks_at_theta_c": {
            "G1": {"tau": res.peak_g1.tau_star,
                   "gamma": res.peak_g1.gamma_max},
            "G2": {"tau": res.peak_g2.tau_star,
                   "gamma": res.peak_g2.gamma_max}},
    }
    for label, factor in (("below", 0.8), ("above", 1.25)):
        theta = res.theta_c * factor
        p1, p2 = _peak_pair(theta, *res.G_pair, params, mode, grid, quad)
        payload[f"peaks_{label}"] = {
            "theta": theta,
            "G1_gamma": p1.gamma_max, "G2_gamma": p2.gamma_max,
            "difference": p2.gamma_max - p1.gamma_max}
    base = cfg["output"]["path"] or "critical_angle.json"
    write_json(base, cfg, payload)
    table_rows = []
    for ratio in ca["table_pi_over_theta"]:
        theta = _PI / float(ratio)
        p1, p2 = _peak_pair(theta, *res.G_pair, params, mode, grid, quad)
        table_rows.append((float(ratio), theta,
                           p2.gamma_max - p1.gamma_max))
    table_path = Path(base).with_suffix("").as_posix() + "_table.csv"
    write_csv(table_path, cfg,
              ["pi_over_theta", "theta", "peak_difference"], table_rows)
    return 0


def cmd_sweep(args):
    cfg = load_config(args, "sweep")
    params = model_from_config(cfg)
    grid = grid_from_config(cfg)
    quad = quadrature_from_config(cfg)
    sw = cfg["sweep"]
    g_values = sw["G_values"]
    theta_values = sw["theta_values"]
    modes = sw["modes"] or [_mode_from_config(cfg)]
    if not g_values or not theta_values or not modes:
        raise ConfigError("sweep lists must be non-empty")
    for m in modes:
        if m not in MODES:
            raise ConfigError(f"unknown sweep mode {m!r}")
    phi = float(cfg["state"].get("phi", 0.0))
    rows = []
    failures = 0
    cells = 0
    from dataclasses import replace
    for g in g_values:
        p = (replace(params, bath=replace(params.bath, G=float(g)))
             if params.bath.is_continuum else params)
        for theta in theta_values:
            state = InitialState(theta=float(theta), phi=phi)
            for mode in modes:
                cells += 1
                fn = (gamma_general if mode == MODE_EFFECTIVE
                      else gamma_modified)
                for tau in grid.values():
                    tau = float(tau)
                    try:
                        gamma = fn(tau, state, p, quadrature=quad).gamma
                        rows.append((float(g), float(theta), phi, mode, tau,
                                     gamma))
                    except NumericsError:
                        failures += 1
                        rows.append((float(g), float(theta), phi, mode, tau,
                                     float("nan")))
    if failures:
        print(f"warning: {failures} sweep cells failed and were recorded as "
              "nan", file=sys.stderr)
        if failures >= cells * len(grid.values()):
            raise NumericsError("all sweep cells failed")
    path = cfg["output"]["path"] or "sweep.csv"
    write_csv(path, cfg, ["G", "theta", "phi", "mode", "tau", "gamma"], rows)
    return 0


def cmd_phases(args):
    cfg = load_config(args, "phases")
    params = model_from_config(cfg)
    quad = quadrature_from_config(cfg)
    ph = cfg["phases"]
    count = int(ph["count"])
    if count < 2:
        raise ConfigError("phases grid needs at least 2 points")
    if ph.get("spacing", "linear") == "log":
        if ph["t_min"] <= 0:
            raise ConfigError("log spacing needs t_min > 0")
        ts = np.logspace(math.log10(ph["t_min"]), math.log10(ph["t_max"]),
                         count)
    else:
        ts = np.linspace(ph["t_min"], ph["t_max"], count)
    phases = BathPhases(params.bath, params.temp, quad)
    rows = []
    for t in ts:
        t = float(t)
        phi_r = phases.phi_R(t)
        rows.append((t, phi_r, phases.phi_I(t), phases.phi_R1(t),
                     phases.phi_R2(), math.exp(-phi_r)))
    path = cfg["output"]["path"] or "phases.csv"
    write_csv(path, cfg, ["t", "phi_R", "phi_I", "phi_R1", "phi_R2", "abs_C"],
              rows)
    return 0


def cmd_oracle(args):
    cfg = load_config(args, "oracle")
    oc = cfg["oracle"]
    eps = cfg["model"]["eps"]
    s_ohm = cfg["model"]["bath"]["s"]
    omega_c = cfg["model"]["bath"]["omega_c"]

    ident_density = SpectralDensity.continuum(oc["identity_G"], s_ohm,
                                              omega_c)
    ident_sys = DiscreteBathSystem.from_continuum(
        ident_density, int(oc["identity_modes"]), int(oc["identity_n_max"]))
    residual = polaron_identity_residual(ident_sys, eps, cfg["model"]["delta"])

    density = SpectralDensity.continuum(oc["G"], s_ohm, omega_c)
    sys_ = DiscreteBathSystem.from_continuum(density, int(oc["n_modes"]),
                                             int(oc["n_max"]))

    traces = []
    for t1, t2, tau in oc["trace_points"]:
        got = bath_trace_check(t1, t2, tau, sys_)
        ref = bath_trace_reference(t1, t2, tau, sys_)
        traces.append({"t1": t1, "t2": t2, "tau": tau,
                       "fock": [got.real, got.imag],
                       "reference": [ref.real, ref.imag],
                       "rel_error": abs(got - ref) / abs(ref)})
    state = InitialState(theta=float(oc["theta"]), phi=0.0)
    tau = float(oc["tau"])
    table = []
    errs = []
    deltas = [float(d) for d in oc["deltas"]]
    for delta in deltas:
        p = ModelParams(eps=eps, delta=delta,
                        bath=sys_.spectral_density(), temp=Temperature.zero())
        s_exact = exact_survival(tau, 1, state, sys_, eps, delta)[0]
        s_pert = survival_general(tau, state, p)
        errs.append(abs(s_exact - s_pert))
        table.append({"delta": delta, "exact": s_exact,
                      "perturbative": s_pert,
                      "abs_error": abs(s_exact - s_pert)})
    exponent = float(np.polyfit(np.log(deltas), np.log(errs), 1)[0])

    payload = {"polaron_identity_residual": residual,
               "trace_checks": traces,
               "survival_table": table,
               "delta_scaling_exponent": exponent}
    path = cfg["output"]["path"] or "oracle.json"
    write_json(path, cfg, payload)
    print(f"polaron identity residual: {residual:.3e}")
    print(f"delta-scaling exponent: {exponent:.3f}")
    return 0


def _add_common(parser):
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--preset", help="named preset configuration")
    parser.add_argument("--output", help="output path")
    parser.add_argument("--format", dest="fmt", choices=["csv", "json"],
                        help="output format")
    parser.add_argument("--eps", type=float)
    parser.add_argument("--delta", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--G", type=float, dest="g")
    parser.add_argument("--theta", type=float)
    parser.add_argument("--phi", type=float)
    parser.add_argument("--mode", choices=list(MODES))
    parser.add_argument("--tau-min", dest="tau_min", type=float)
    parser.add_argument("--tau-max", dest="tau_max", type=float)
    parser.add_argument("--count", type=int)
    parser.add_argument("--spacing", choices=["linear", "log"])


def build_parser():
    parser = argparse.ArgumentParser(
        prog="zenoscope",
        description="Decay rates of a repeatedly measured two-level system "
                    "strongly coupled to a bosonic environment")
    parser.add_argument("--version", action="version",
                        version=f"zenoscope {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve", help="sample a decay-rate curve")
    _add_common(p)
    p.add_argument("--both-modes", action="store_true", dest="both_modes")
    p.add_argument("--G-values", dest="G_values",
                   help="comma-separated couplings, one output file each")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("critical-angle",
                       help="bisect for the peak-crossing Bloch angle")
    _add_common(p)
    p.add_argument("--G1", type=float)
    p.add_argument("--G2", type=float)
    p.set_defaults(func=cmd_critical_angle)

    p = sub.add_parser("sweep", help="cartesian parameter sweep")
    _add_common(p)
    p.add_argument("--G-values", dest="G_values")
    p.add_argument("--theta-values", dest="theta_values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("phases", help="tabulate the bath phase functions")
    _add_common(p)
    p.set_defaults(func=cmd_phases)

    p = sub.add_parser("oracle", help="run the brute-force check suite")
    _add_common(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NoCrossingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except TruncationLeakageError as exc:
        print(f"error: {exc} (leakage {exc.leakage})", file=sys.stderr)
        return 3
    except (NumericsError, ZenoscopeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
