"""Command-line front end: every pipeline as a subcommand writing CSV or JSON.

Each output embeds a JSON metadata line holding the resolved configuration,
which can be fed back through ``--config`` to reproduce the file exactly.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings

import numpy as np

from . import __version__
from .bath import BathSpec
from .core import DensityMatrix2, DomainError, DriveParams, lzs_parameter
from .floquet import DegenerateError, TruncationError, propagate, quasienergy_map
from .hysteresis import PRESETS, count_steps, dephasing_ladder, quasistationary_curve, transient_curve
from .master import (
    DecoupledError,
    ModelError,
    ReducedState,
    decoherence_time,
    evolve_reduced,
    quasistationary,
    quasistationary_scan,
    sigma_z_expectation,
    solve_rates,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
WORKERS_ENV = "ANTICROSS_WORKERS"
NUMERIC_ERRORS = (DegenerateError, TruncationError, ModelError, DecoupledError, DomainError, FloatingPointError)


class ConfigError(ValueError):
    pass


# --- value parsers: each returns a JSON-compatible canonical value ------------------------------

def _float(v):
    if isinstance(v, bool):
        raise ConfigError("expected a number")
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number, got {v!r}") from None
    if not math.isfinite(x):
        raise ConfigError("numbers must be finite")
    return x


def _int(v):
    x = _float(v)
    if x != int(x) or x < 1:
        raise ConfigError(f"expected a positive integer, got {v!r}")
    return int(x)


def _grid(v):
    """List of numbers, ``"a,b,c"`` or ``"start:stop:num"`` (inclusive linspace)."""
    if isinstance(v, str):
        if ":" in v:
            parts = v.split(":")
            if len(parts) != 3:
                raise ConfigError("grid ranges look like start:stop:num")
            values = np.linspace(_float(parts[0]), _float(parts[1]), _int(parts[2]))
        else:
            values = [_float(p) for p in v.split(",") if p.strip()]
    elif isinstance(v, (list, tuple)):
        values = [_float(p) for p in v]
    else:
        values = [_float(v)]
    if len(values) == 0:
        raise ConfigError("grid is empty")
    return [float(x) for x in values]


def _nonneg(v):
    x = _float(v)
    if x < 0:
        raise ConfigError(f"expected a non-negative number, got {v!r}")
    return x


def _nonneg_grid(v):
    values = _grid(v)
    if min(values) < 0:
        raise ConfigError("grid values must be non-negative")
    return values


def _choice(*options):
    def parse(v):
        if v not in options:
            raise ConfigError(f"expected one of {options}, got {v!r}")
        return v

    return parse


def _optional(parse):
    def inner(v):
        return None if v in (None, "none", "null") else parse(v)

    return inner


_STATES = {"plus": [0.0, 0.0, 1.0], "minus": [0.0, 0.0, -1.0], "x": [1.0, 0.0, 0.0], "mixed": [0.0, 0.0, 0.0]}


def _state(v):
    """Named state or a Bloch vector ``[x, y, z]`` (also ``"x,y,z"``)."""
    if isinstance(v, str) and v in _STATES:
        return v
    vec = _grid(v)
    if len(vec) != 3 or np.linalg.norm(vec) > 1 + 1e-12:
        raise ConfigError("initial state must be plus|minus|x|mixed or a Bloch vector of length <= 1")
    return vec


def _density(v):
    return DensityMatrix2.from_bloch(_STATES[v] if isinstance(v, str) else v)


_coupling = _choice("sx", "sy", "sz")

BATH = {"theta": (_nonneg, 1.0), "kappa": (_nonneg, 1e-3), "S": (_coupling, "sz")}

FREE_PRESETS = {
    "weak-slow": (0.5, 0.5),
    "weak-fast": (0.5, 1.5),
    "strong-slow": (10.0, 0.4),
    "strong-fast": (3.0, 1.5),
    "static": (0.0, 0.6),
}

SCHEMAS = {
    "quasienergy-map": {"A": (_nonneg_grid, "0:2:5"), "Delta": (_nonneg_grid, "0.2:1.4:4")},
    "free-evolve": {
        "preset": (_optional(_choice(*FREE_PRESETS)), None),
        "A": (_nonneg, 0.5),
        "Delta": (_nonneg, 0.5),
        "initial": (_state, "minus"),
        "tau_max": (_nonneg, 20 * math.pi),
        "n_points": (_int, 1001),
    },
    "evolve": {
        "A": (_nonneg, 1.0),
        "Delta": (_nonneg, 0.5),
        **BATH,
        "initial": (_state, "minus"),
        "tau_max": (_nonneg, 200.0),
        "n_points": (_int, 1001),
    },
    "qs-scan": {"A": (_nonneg_grid, "0.5:10:20"), "Delta": (_nonneg, 0.5), **BATH, "tau_eval": (_float, 0.0)},
    "decoherence-scan": {"A": (_nonneg_grid, "0.5:10:20"), "Delta": (_nonneg, 0.5), **BATH},
    "hysteresis": {
        "mode": (_choice("quasistationary", "transient"), "quasistationary"),
        "A": (_nonneg, 1.0),
        "Delta": (_nonneg, 0.6),
        **BATH,
        "initial": (_state, "minus"),
        "n_periods": (_int, 10),
        "samples_per_period": (_int, 256),
    },
    "ladder": {
        "preset": (_optional(_choice(*PRESETS)), "mn12-seventh-resonance"),
        "A": (_nonneg, 2.9e12),
        "Delta": (_nonneg, 9.2e5),
        "Omega": (_nonneg, 0.1),
        "Gamma12": (_nonneg, 0.005),
        "n_periods": (_int, 10),
        "samples_per_period": (_int, 512),
    },
}


def resolve_config(command, config_file=None, overrides=None):
    """Merge defaults, a config mapping and flag overrides into a validated canonical dict."""
    schema = SCHEMAS[command]
    merged = {k: default for k, (_, default) in schema.items()}
    for source in (config_file or {}, overrides or {}):
        unknown = sorted(set(source) - set(schema))
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {unknown}")
        merged.update({k: v for k, v in source.items() if v is not None or k == "preset"})
    return {k: schema[k][0](v) if v is not None else None for k, v in merged.items()}


# --- commands: each returns (columns, rows, extra metadata) -------------------------------------

def _bath(cfg):
    return BathSpec(cfg["theta"], cfg["kappa"])


def cmd_quasienergy_map(cfg, workers=1):
    gaps, flags = quasienergy_map(cfg["A"], cfg["Delta"], workers=workers)
    rows, gaps_manifest = [], []
    for i, a in enumerate(cfg["A"]):
        for j, d in enumerate(cfg["Delta"]):
            p = lzs_parameter(DriveParams(a, d)) if a > 0 else math.nan
            rows.append([a, d, gaps[i, j], bool(flags[i, j]), p])
            if not math.isfinite(gaps[i, j]):
                gaps_manifest.append({"A": a, "Delta": d, "reason": "vanishing Hamiltonian"})
    return ["A", "Delta", "eps_gap", "degenerate_flag", "P_LZS"], rows, {"gaps": gaps_manifest}


def cmd_free_evolve(cfg, workers=1):
    A, D = FREE_PRESETS[cfg["preset"]] if cfg["preset"] else (cfg["A"], cfg["Delta"])
    tau = np.linspace(0.0, cfg["tau_max"], cfg["n_points"])
    U = propagate(DriveParams(A, D), tau)
    rho = U @ _density(cfg["initial"]).matrix @ np.conj(np.swapaxes(U, 1, 2))
    sz = np.real(rho[:, 0, 0] - rho[:, 1, 1])
    return ["tau", "sigma_z"], [[t, s] for t, s in zip(tau, sz)], {"A": A, "Delta": D}


def cmd_evolve(cfg, workers=1):
    sol, _, rates = solve_rates(cfg["A"], cfg["Delta"], _bath(cfg), cfg["S"])
    tau = np.linspace(0.0, cfg["tau_max"], cfg["n_points"])
    traj = evolve_reduced(ReducedState.from_density(_density(cfg["initial"]), sol), rates, tau)
    sz = sigma_z_expectation(traj, sol)
    rows = [[t, s, p, abs(c)] for t, s, p, c in zip(tau, sz, traj.p11, traj.c12)]
    return ["tau", "sigma_z", "p11", "abs_c12"], rows, {"tau_d": decoherence_time(rates)}


def cmd_qs_scan(cfg, workers=1):
    values, notes = quasistationary_scan(
        cfg["Delta"], cfg["A"], _bath(cfg), cfg["S"], tau_eval=cfg["tau_eval"], workers=workers
    )
    gaps = [{"A": a, "reason": n} for a, n in zip(cfg["A"], notes) if n]
    return ["A", "sigma_z_qs"], [[a, v] for a, v in zip(cfg["A"], values)], {"gaps": gaps}


def _decoherence_point(args):
    A, Delta, bath, S = args
    try:
        _, _, rates = solve_rates(A, Delta, bath, S)
    except (DegenerateError, TruncationError) as exc:
        return [A] + [math.nan] * 4, f"{type(exc).__name__}: {exc}"
    tau_d = decoherence_time(rates)
    inv = 0.0 if math.isinf(tau_d) else 1 / tau_d
    try:
        p11 = quasistationary(rates).p11
    except DecoupledError:
        p11 = math.nan
    return [A, inv, rates.relaxation_rate, rates.G12, p11], ""


def cmd_decoherence_scan(cfg, workers=1):
    jobs = [(a, cfg["Delta"], _bath(cfg), cfg["S"]) for a in cfg["A"]]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            out = list(pool.map(_decoherence_point, jobs))
    else:
        out = [_decoherence_point(j) for j in jobs]
    gaps = [{"A": j[0], "reason": n} for j, (_, n) in zip(jobs, out) if n]
    return ["A", "inv_tau_d", "relaxation_rate", "G12", "p11_qs"], [r for r, _ in out], {"gaps": gaps}


def cmd_hysteresis(cfg, workers=1):
    params = DriveParams(cfg["A"], cfg["Delta"])
    if cfg["mode"] == "quasistationary":
        curve = quasistationary_curve(params, _bath(cfg), cfg["S"], cfg["samples_per_period"])
    else:
        curve = transient_curve(
            params, _bath(cfg), cfg["S"], _density(cfg["initial"]), cfg["n_periods"], cfg["samples_per_period"]
        )
    rows = [[f, s, t] for f, s, t in zip(curve.F, curve.sz, curve.tau)]
    return ["F", "sigma_z", "tau"], rows, {"closure_error": curve.closure_error()}


def cmd_ladder(cfg, workers=1):
    if cfg["preset"]:
        p = PRESETS[cfg["preset"]]
        A, D, Om = p.A, p.Delta, p.omega
    else:
        A, D, Om, p = cfg["A"], cfg["Delta"], cfg["Omega"], None
    curve = dephasing_ladder(A, D, cfg["Gamma12"], Om, cfg["n_periods"], samples_per_period=cfg["samples_per_period"])
    field = p.field_tesla(curve.F) if p else np.full(len(curve), math.nan)
    rows = [list(r) for r in zip(curve.F, field, curve.sz, curve.tau, curve.series["p1"], curve.series["pointer_sz"])]
    extra = {"A": A, "Delta": D, "Omega": Om, "steps_falling_field": count_steps(curve),
             "surrogate_A": curve.params["surrogate_A"], "surrogate_Delta": curve.params["surrogate_Delta"]}
    return ["F", "field_T", "sigma_z", "tau", "p1", "pointer_sz"], rows, extra


COMMANDS = {
    "quasienergy-map": cmd_quasienergy_map,
    "free-evolve": cmd_free_evolve,
    "evolve": cmd_evolve,
    "qs-scan": cmd_qs_scan,
    "decoherence-scan": cmd_decoherence_scan,
    "hysteresis": cmd_hysteresis,
    "ladder": cmd_ladder,
}


# --- output --------------------------------------------------------------------------------------

def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    return repr(float(x))


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    x = float(x)
    return x if math.isfinite(x) else None


def _clean(obj):
    """Make metadata JSON-safe (non-finite floats become strings)."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else repr(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def render(columns, rows, meta, fmt):
    meta = _clean(meta)
    if fmt == "json":
        doc = {"metadata": meta, "columns": columns, "rows": [[_json_value(c) for c in r] for r in rows]}
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"
    lines = ["# " + json.dumps(meta, sort_keys=True), ",".join(columns)]
    lines += [",".join(_cell(c) for c in r) for r in rows]
    return "\n".join(lines) + "\n"


def run(command, cfg, fmt="csv", workers=1):
    """Execute ``command`` on a resolved config and return the rendered output text."""
    columns, rows, extra = COMMANDS[command](cfg, workers=workers)
    meta = {"command": command, "config": cfg, "version": __version__, "columns": columns, **extra}
    return render(columns, rows, meta, fmt)


def _default_workers():
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer") from None
    return os.cpu_count() or 1


def build_parser():
    parser = argparse.ArgumentParser(prog="anticross", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        p = sub.add_parser(name, help=COMMANDS[name].__name__.replace("cmd_", "").replace("_", " "))
        p.add_argument("--config", help="JSON file with parameters (keys as in the flags below)")
        p.add_argument("--out", help="output file (default: standard output)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--workers", type=int, default=None, help=f"process count (default: ${WORKERS_ENV} or CPU count)")
        for key in schema:
            p.add_argument("--" + key.replace("_", "-"), dest="param_" + key, default=None, metavar=key.upper())
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config_file = None
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    config_file = json.load(fh)
            except OSError as exc:
                print(f"error: cannot read config: {exc}", file=sys.stderr)
                return EXIT_IO
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from None
            if not isinstance(config_file, dict):
                raise ConfigError("config must be a JSON object")
        overrides = {k[len("param_"):]: v for k, v in vars(args).items() if k.startswith("param_") and v is not None}
        cfg = resolve_config(args.command, config_file, overrides)
        workers = args.workers if args.workers is not None else _default_workers()
        if workers < 1:
            raise ConfigError("--workers must be at least 1")
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            text = run(args.command, cfg, args.format, workers)
    except NUMERIC_ERRORS as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
