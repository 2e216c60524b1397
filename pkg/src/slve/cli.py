"""Command-line front end: INI configs in, CSV/JSONL tables + status out.

Usage:

    slve <command> --config run.ini [--nu X] [--gamma X] [--k X]
                                    [--t-final X] [--out DIR]

Commands: simulate, dispersion, twave, audit, energy.  The config is INI
text (see the section schema in _SCHEMA); unknown sections or keys are
rejected, as are values violating a model precondition (a negative gamma,
for instance, fails the nonnegative-dissipation requirement gamma >= 0).

Material parameters are given dimensionally in [model]; the front end
nondimensionalizes once and runs every solver in the unit form, so [grid]
lengths, [solver] times and all table output are in scaled units.

Outcomes are machine-parsable: each run writes its tables plus status.json
into the output directory and prints the same status record to stdout.
Exit codes: 0 ok, 2 bad config, 3 blow-up of an unstable run (the time of
blow-up is in the record; this is an expected outcome for the stress-rate
model, not an internal error), 1 any other model error.  Reruns of one
config are byte-identical; floats are written with 17 significant digits so
parsing them back loses nothing.
"""

from __future__ import annotations

import argparse
import configparser
import enum
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import constitutive as con
from . import core, pde, twave
# the package re-exports the dispersion() wrapper under the submodule's own
# name, so pull what we need from the submodule directly
from .dispersion import Classification, dispersion as solve_dispersion
from .errors import BlowUpError, ConfigError, SlveError

__all__ = ["Command", "RunConfig", "RunResult", "parse_config", "run", "main"]


class Command(str, enum.Enum):
    SIMULATE = "simulate"
    DISPERSION = "dispersion"
    TWAVE = "twave"
    AUDIT = "audit"
    ENERGY = "energy"


# section -> allowed keys; anything else in the config is an error
_SCHEMA: Dict[str, Tuple[str, ...]] = {
    "run": ("command",),
    "model": ("variant", "rho", "mu", "length_scale", "nu", "gamma"),
    "constitutive": ("kind", "beta", "a"),
    "grid": ("length", "n_cells", "boundary"),
    "solver": ("dt", "t_final", "output_stride", "blowup_threshold"),
    "initial": ("type", "center", "width", "amplitude", "k"),
    "dispersion": ("k_values",),
    "twave": ("t_minus", "t_plus", "xi_span", "n_samples"),
    "output": ("directory", "format"),
}


@dataclass
class InitialSpec:
    type: str
    center: Optional[float]
    width: float
    amplitude: float
    k: Optional[float]


@dataclass
class TwaveSpec:
    t_minus: float
    t_plus: float
    xi_span: float
    n_samples: int


@dataclass
class RunConfig:
    """Validated run description; everything a command needs."""

    command: Command
    params: core.ModelParams
    response: con.ConstitutiveFunction
    grid: Optional[core.Grid1D]
    dt: Optional[float]
    t_final: Optional[float]
    output_stride: int
    blowup_threshold: float
    initial: Optional[InitialSpec]
    k_values: Optional[np.ndarray]
    twave: Optional[TwaveSpec]
    out_dir: str
    fmt: str


@dataclass
class RunResult:
    status: str
    exit_code: int
    files: Tuple[str, ...]
    record: dict


def _load_ini(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config text is not valid INI: {exc}") from exc
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key '{key}' in section [{section}]")
    return cp


def _get(cp, section: str, key: str, default=None) -> Optional[str]:
    if cp.has_section(section) and key in cp[section]:
        return cp[section][key]
    return default


def _get_float(cp, section: str, key: str, default=None, required: bool = False):
    raw = _get(cp, section, key)
    if raw is None:
        if required:
            raise ConfigError(f"missing required key '{key}' in section [{section}]")
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a number") from None


def _get_int(cp, section: str, key: str, default=None, required: bool = False):
    raw = _get(cp, section, key)
    if raw is None:
        if required:
            raise ConfigError(f"missing required key '{key}' in section [{section}]")
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not an integer") from None


def _require_section(cp, section: str, command: Command) -> None:
    if not cp.has_section(section):
        raise ConfigError(
            f"command '{command.value}' needs a [{section}] section"
        )


def parse_config(source: str, overrides: Optional[Dict[Tuple[str, str], str]] = None) -> RunConfig:
    """Parse and validate INI config text into a RunConfig.

    overrides maps (section, key) to raw string values applied after the
    text is read (this is how the CLI flags land).  Validation failures
    raise ConfigError naming the offending section, key, or precondition.
    """
    cp = _load_ini(source)
    for (section, key), raw in (overrides or {}).items():
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(f"override targets unknown key [{section}] {key}")
        if not cp.has_section(section):
            cp.add_section(section)
        cp[section][key] = raw

    raw_command = _get(cp, "run", "command")
    if raw_command is None:
        raise ConfigError("missing [run] command (or pass the command on the CLI)")
    try:
        command = Command(raw_command)
    except ValueError:
        raise ConfigError(f"unknown command {raw_command!r}") from None

    variant_raw = _get(cp, "model", "variant")
    if variant_raw is None:
        raise ConfigError("missing [model] variant")
    try:
        params = core.ModelParams(
            variant=variant_raw,
            rho=_get_float(cp, "model", "rho", 1.0),
            mu=_get_float(cp, "model", "mu", 1.0),
            length_scale=_get_float(cp, "model", "length_scale", 1.0),
            nu=_get_float(cp, "model", "nu", 0.0),
            gamma=_get_float(cp, "model", "gamma", 0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"[model] rejected: {exc}") from exc

    kind = _get(cp, "constitutive", "kind", "linear")
    try:
        response = con.make_constitutive(
            kind,
            beta=_get_float(cp, "constitutive", "beta", 1.0),
            a=_get_float(cp, "constitutive", "a", 1.0),
        )
    except ValueError as exc:
        raise ConfigError(f"[constitutive] rejected: {exc}") from exc

    grid = None
    if cp.has_section("grid"):
        try:
            grid = core.Grid1D(
                length=_get_float(cp, "grid", "length", required=True),
                n_cells=_get_int(cp, "grid", "n_cells", required=True),
                boundary=_get(cp, "grid", "boundary", "periodic"),
            )
        except ValueError as exc:
            raise ConfigError(f"[grid] rejected: {exc}") from exc

    initial = None
    if cp.has_section("initial"):
        itype = _get(cp, "initial", "type", "zero")
        if itype not in ("zero", "gaussian_bump", "single_mode"):
            raise ConfigError(f"[initial] type = {itype!r} is not a known shape")
        initial = InitialSpec(
            type=itype,
            center=_get_float(cp, "initial", "center"),
            width=_get_float(cp, "initial", "width", 1.0),
            amplitude=_get_float(cp, "initial", "amplitude", 1.0),
            k=_get_float(cp, "initial", "k"),
        )

    k_values = None
    raw_ks = _get(cp, "dispersion", "k_values")
    if raw_ks is not None:
        try:
            k_values = np.asarray(
                [float(tok) for tok in raw_ks.replace(",", " ").split()], dtype=float
            )
        except ValueError:
            raise ConfigError(f"[dispersion] k_values = {raw_ks!r} is not a number list") from None
        if k_values.size == 0:
            raise ConfigError("[dispersion] k_values is empty")

    twave_spec = None
    if cp.has_section("twave"):
        twave_spec = TwaveSpec(
            t_minus=_get_float(cp, "twave", "t_minus", required=True),
            t_plus=_get_float(cp, "twave", "t_plus", required=True),
            xi_span=_get_float(cp, "twave", "xi_span", 200.0),
            n_samples=_get_int(cp, "twave", "n_samples", 2001),
        )

    fmt = _get(cp, "output", "format", "csv")
    if fmt not in ("csv", "jsonl"):
        raise ConfigError(f"[output] format must be csv or jsonl, got {fmt!r}")

    config = RunConfig(
        command=command,
        params=params,
        response=response,
        grid=grid,
        dt=_get_float(cp, "solver", "dt"),
        t_final=_get_float(cp, "solver", "t_final"),
        output_stride=_get_int(cp, "solver", "output_stride", 1),
        blowup_threshold=_get_float(cp, "solver", "blowup_threshold", 1e6),
        initial=initial,
        k_values=k_values,
        twave=twave_spec,
        out_dir=_get(cp, "output", "directory", "."),
        fmt=fmt,
    )
    _validate_for_command(config)
    return config


def _validate_for_command(config: RunConfig) -> None:
    command = config.command
    if command in (Command.SIMULATE, Command.AUDIT, Command.ENERGY):
        if config.grid is None:
            raise ConfigError(f"command '{command.value}' needs a [grid] section")
        if config.dt is None or config.t_final is None:
            raise ConfigError(f"command '{command.value}' needs [solver] dt and t_final")
        if config.initial is None:
            raise ConfigError(f"command '{command.value}' needs an [initial] section")
        if config.initial.type == "single_mode" and config.initial.k is None:
            raise ConfigError("[initial] type single_mode needs a wavenumber k")
        # solver-level checks (positivity, dt ceiling) run against the
        # dimensionless coefficients the solver will actually see
        unit = core.dimensionless_params(config.params)
        try:
            solver_config = pde.SolverConfig(
                params=unit,
                constitutive=config.response,
                dt=config.dt,
                t_final=config.t_final,
                output_stride=config.output_stride,
                blowup_threshold=config.blowup_threshold,
            )
            ceiling = pde.stability_ceiling(unit.variant, config.grid, unit)
        except ValueError as exc:
            raise ConfigError(f"[solver] rejected: {exc}") from exc
        if solver_config.dt > ceiling:
            raise ConfigError(
                f"[solver] dt = {config.dt} exceeds the stability ceiling "
                f"{ceiling:.6g} for variant {unit.variant.value} "
                f"on spacing {config.grid.spacing:.6g}"
            )
    elif command is Command.DISPERSION:
        if config.params.variant is core.Variant.ELASTIC:
            raise ConfigError("dispersion needs the stress_rate or strain_rate variant")
        if config.k_values is None:
            raise ConfigError("command 'dispersion' needs [dispersion] k_values")
        if np.any(~np.isfinite(config.k_values)) or np.any(config.k_values < 0.0):
            raise ConfigError("[dispersion] k_values must be finite and >= 0")
    elif command is Command.TWAVE:
        if config.params.variant is core.Variant.ELASTIC:
            raise ConfigError("twave needs the stress_rate or strain_rate variant")
        if config.twave is None:
            raise ConfigError("command 'twave' needs a [twave] section")


def _fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _cell_csv(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return _fmt_float(x)
    return str(x)


def _cell_json(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def _write_table(path: Path, header: Sequence[str], rows: Sequence[Sequence], fmt: str) -> None:
    if fmt == "csv":
        lines = [",".join(header)]
        lines += [",".join(_cell_csv(x) for x in row) for row in rows]
        path.write_text("\n".join(lines) + "\n")
    else:
        lines = [
            json.dumps(dict(zip(header, (_cell_json(x) for x in row)))) for row in rows
        ]
        path.write_text("\n".join(lines) + ("\n" if lines else ""))


def _build_initial(config: RunConfig) -> pde.SimState:
    spec = config.initial
    grid = config.grid
    if spec.type == "zero":
        return pde.zero_state(grid)
    if spec.type == "gaussian_bump":
        center = spec.center if spec.center is not None else 0.5 * grid.length
        return pde.gaussian_bump_state(grid, config.response, center, spec.width, spec.amplitude)
    return pde.single_mode_state(grid, config.response, spec.k, spec.amplitude)


def _solver_config(config: RunConfig) -> pde.SolverConfig:
    return pde.SolverConfig(
        params=core.dimensionless_params(config.params),
        constitutive=config.response,
        dt=config.dt,
        t_final=config.t_final,
        output_stride=config.output_stride,
        blowup_threshold=config.blowup_threshold,
    )


def _trajectory_rows(states: Sequence[pde.SimState]) -> List[list]:
    rows = []
    for s in states:
        x = s.grid.nodes()
        for j in range(s.grid.n_nodes):
            rows.append(
                [s.t, float(x[j]), float(s.v.values[j]), float(s.eps.values[j]), float(s.stress.values[j])]
            )
    return rows


def _run_simulate(config: RunConfig, out_dir: Path) -> Tuple[Tuple[str, ...], dict]:
    solver_config = _solver_config(config)
    states = pde.simulate(_build_initial(config), solver_config)
    name = f"trajectory.{config.fmt}"
    _write_table(
        out_dir / name, ["t", "x", "v", "eps", "stress"], _trajectory_rows(states), config.fmt
    )
    final = states[-1]
    extra = {
        "n_samples": len(states),
        "t_final": final.t,
        "max_abs_stress": float(np.max(np.abs(final.stress.values))),
    }
    return (name,), extra


def _run_energy(config: RunConfig, out_dir: Path) -> Tuple[Tuple[str, ...], dict]:
    solver_config = _solver_config(config)
    states = pde.simulate(_build_initial(config), solver_config)
    if len(states) < 3:
        raise ConfigError(
            "energy needs at least 3 output samples; lower output_stride or dt"
        )
    reports = pde.energy_series(states, solver_config.params, config.response)
    name = f"energy.{config.fmt}"
    _write_table(
        out_dir / name,
        ["t", "kinetic", "internal", "total", "dissipation_rate", "balance_residual"],
        [[r.t, r.kinetic, r.internal, r.total, r.dissipation_rate, r.balance_residual] for r in reports],
        config.fmt,
    )
    extra = {
        "n_samples": len(states),
        "max_balance_residual": max(r.balance_residual for r in reports),
        "total_initial": reports[0].total,
        "total_final": reports[-1].total,
    }
    return (name,), extra


def _run_audit(config: RunConfig, out_dir: Path) -> Tuple[Tuple[str, ...], dict]:
    solver_config = _solver_config(config)
    states = pde.simulate(_build_initial(config), solver_config)
    if len(states) < 3:
        raise ConfigError(
            "audit needs at least 3 output samples; lower output_stride or dt"
        )
    gamma = solver_config.params.gamma
    times = np.asarray([s.t for s in states])
    stresses = np.column_stack([s.stress.values for s in states])  # (n_nodes, n_t)
    x = config.grid.nodes()
    rows = []
    worst = math.inf
    total = 0.0
    for j in range(config.grid.n_nodes):
        audit = con.audit_dissipation(gamma, np.column_stack([times, stresses[j]]))
        worst = min(worst, audit.min_rate)
        total += audit.total_dissipation
        rows.append([j, float(x[j]), audit.min_rate, audit.total_dissipation, audit.passed])
    name = f"audit.{config.fmt}"
    _write_table(
        out_dir / name, ["node", "x", "min_rate", "total_dissipation", "passed"], rows, config.fmt
    )
    extra = {
        "min_rate": worst,
        "passed": bool(worst >= -1e-12),
        "summed_dissipation": total,
    }
    return (name,), extra


def _run_dispersion(config: RunConfig, out_dir: Path) -> Tuple[Tuple[str, ...], dict]:
    unit = core.dimensionless_params(config.params)
    variant = unit.variant
    coeff = unit.coefficient
    n_roots = 3 if variant is core.Variant.STRESS_RATE else 2
    header = ["k", "classification", "max_real_part", "positive_real_root",
              "k_critical", "discriminant", "max_residual"]
    for i in range(n_roots):
        header += [f"re_r{i}", f"im_r{i}"]
    rows = []
    worst_classification = "stable"
    for k in config.k_values:
        res = solve_dispersion(variant, coeff, float(k))
        row = [
            float(k),
            res.classification.value,
            res.max_real_part,
            res.positive_real_root,
            res.k_critical,
            res.discriminant,
            float(np.max(res.residuals())),
        ]
        for r in res.roots:
            row += [float(r.real), float(r.imag)]
        rows.append(row)
        if res.classification is Classification.UNSTABLE:
            worst_classification = "unstable"
        elif (res.classification is Classification.MARGINALLY_STABLE
              and worst_classification == "stable"):
            worst_classification = "marginally_stable"
    name = f"dispersion.{config.fmt}"
    _write_table(out_dir / name, header, rows, config.fmt)
    extra = {
        "model": variant.value,
        "coefficient": coeff,
        "n_modes": int(config.k_values.size),
        "worst_classification": worst_classification,
    }
    if variant is core.Variant.STRAIN_RATE:
        extra["k_critical"] = 2.0 / coeff
    return (name,), extra


def _run_twave(config: RunConfig, out_dir: Path) -> Tuple[Tuple[str, ...], dict]:
    unit = core.dimensionless_params(config.params)
    problem = twave.make_problem(
        config.response,
        config.twave.t_minus,
        config.twave.t_plus,
        unit.variant,
        unit.coefficient,
    )
    diag = twave.kink_exists(problem)
    extra = {
        "c_squared": problem.c_squared,
        "c": problem.c,
        "kappa": problem.kappa,
        "a2": problem.a2,
        "exists": diag.exists,
        "degenerate": diag.degenerate,
        "interior_zeros": [float(z) for z in diag.interior_zeros],
        "message": diag.message,
    }
    if not diag.exists:
        return (), extra
    profile = twave.kink_profile(
        problem, xi_span=config.twave.xi_span, n_samples=config.twave.n_samples
    )
    extra["signed_speed"] = profile.signed_speed
    rows = [
        [float(xi), float(T), float(profile.strain(xi)), float(profile.velocity(xi))]
        for xi, T in zip(profile.xi, profile.T)
    ]
    name = f"twave.{config.fmt}"
    _write_table(out_dir / name, ["xi", "stress", "eps", "v"], rows, config.fmt)
    return (name,), extra


def run(config: RunConfig) -> RunResult:
    """Execute a validated config; writes tables and status.json."""
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scales = core.nondimensionalize(config.params)
    base = {
        "command": config.command.value,
        "variant": config.params.variant.value,
        "scales": {
            "x_scale": scales.x_scale,
            "t_scale": scales.t_scale,
            "stress_scale": scales.stress_scale,
            "nu_bar": scales.nu_bar,
            "gamma_bar": scales.gamma_bar,
        },
    }
    runners = {
        Command.SIMULATE: _run_simulate,
        Command.ENERGY: _run_energy,
        Command.AUDIT: _run_audit,
        Command.DISPERSION: _run_dispersion,
        Command.TWAVE: _run_twave,
    }
    try:
        files, extra = runners[config.command](config, out_dir)
    except BlowUpError as exc:
        files = []
        partial = getattr(exc, "partial", None)
        if partial:
            name = f"trajectory.{config.fmt}"
            _write_table(
                out_dir / name, ["t", "x", "v", "eps", "stress"],
                _trajectory_rows(partial), config.fmt,
            )
            files = [name]
        record = dict(base)
        record.update(
            {
                "status": "blow_up",
                "t": exc.t,
                "max_abs_stress": exc.max_abs_stress,
                "files": list(files),
            }
        )
        (out_dir / "status.json").write_text(json.dumps(record, indent=2) + "\n")
        return RunResult(status="blow_up", exit_code=3, files=tuple(files), record=record)

    record = dict(base)
    record["status"] = "ok"
    record.update(extra)
    record["files"] = list(files)
    (out_dir / "status.json").write_text(json.dumps(record, indent=2) + "\n")
    return RunResult(status="ok", exit_code=0, files=tuple(files), record=record)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="slve",
        description="Strain-limiting viscoelasticity: simulate, analyze modes, "
        "trace traveling fronts, audit dissipation.",
    )
    parser.add_argument("command", choices=[c.value for c in Command])
    parser.add_argument("--config", required=True, help="path to an INI config file")
    parser.add_argument("--nu", type=float, help="override [model] nu")
    parser.add_argument("--gamma", type=float, help="override [model] gamma")
    parser.add_argument("--k", type=float, help="override the wavenumber "
                        "([initial] k and [dispersion] k_values)")
    parser.add_argument("--t-final", type=float, help="override [solver] t_final")
    parser.add_argument("--out", help="override [output] directory")
    args = parser.parse_args(argv)

    overrides: Dict[Tuple[str, str], str] = {("run", "command"): args.command}
    if args.nu is not None:
        overrides[("model", "nu")] = repr(args.nu)
    if args.gamma is not None:
        overrides[("model", "gamma")] = repr(args.gamma)
    if args.k is not None:
        overrides[("initial", "k")] = repr(args.k)
        overrides[("dispersion", "k_values")] = repr(args.k)
    if args.t_final is not None:
        overrides[("solver", "t_final")] = repr(args.t_final)
    if args.out is not None:
        overrides[("output", "directory")] = args.out

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        record = {"status": "error", "category": "config", "message": str(exc)}
        print(json.dumps(record))
        return 2

    try:
        config = parse_config(text, overrides)
        result = run(config)
    except ConfigError as exc:
        record = {"status": "error", "category": "config", "message": str(exc)}
        print(json.dumps(record))
        return 2
    except SlveError as exc:
        record = {
            "status": "error",
            "category": type(exc).__name__,
            "message": str(exc),
        }
        print(json.dumps(record))
        return 1

    print(json.dumps(result.record))
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
