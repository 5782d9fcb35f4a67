"""Batch command-line front end.

Subcommands wrap the library analyses and emit CSV or JSON only; no
plotting.  All numeric CSV fields are written with 12 significant
digits and a '.' decimal separator regardless of locale.  Exit codes:
0 success, 2 input/validation error, 3 numeric failure; errors are
mirrored as one-line JSON on stderr.
"""
from __future__ import annotations

import functools
import json
import math
import sys
from dataclasses import asdict
from typing import Iterable, Sequence

import click
import numpy as np

from . import cavity, cnot, montecarlo, pumping, rounds
from .errors import XyPurifyError
from .states import werner

CONFIG_SCHEMA_VERSION = 1


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _emit_csv(header: Sequence[str], table: Iterable[Sequence], output: str | None) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in table)
    text = "\n".join(lines) + "\n"
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _emit_json(payload: dict, output: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _cli_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, OSError, json.JSONDecodeError) as exc:
            _fail(exc, code=2)
        except (ArithmeticError, RuntimeError) as exc:
            if isinstance(exc, XyPurifyError):
                _fail(exc, code=3)
            raise
    return wrapper


def _fail(exc: Exception, code: int) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    click.echo(json.dumps(payload, sort_keys=True), err=True)
    sys.exit(code)


@click.group()
def main() -> None:
    """Purification-protocol analyses as reproducible batch commands."""


@main.command("round")
@click.option("--f", "f", type=float, required=True,
              help="Fidelity of both conveyed pairs.")
@click.option("--fprime", type=float, required=True,
              help="Fidelity of the stored (stationary) Werner pair.")
@click.option("--jt0", type=float, default=None,
              help="Dimensionless evolution time J*t0.")
@click.option("--at-T", "at_t", is_flag=True,
              help="Evolve for the operational time J*T = pi/3 (n + 1/2).")
@click.option("--n", "n_index", type=int, default=0, show_default=True,
              help="Index n of the operational time (with --at-T).")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@_cli_errors
def cmd_round(f: float, fprime: float, jt0: float | None, at_t: bool,
              n_index: int, fmt: str, output: str | None) -> None:
    """Simulate one purification round and compare to the closed forms."""
    if (jt0 is None) == (not at_t):
        raise click.UsageError("specify exactly one of --jt0 / --at-T")
    j = 1.0
    t0 = rounds.operational_time(j, n_index).t if at_t else jt0 / j
    stationary = werner(fprime, labels=(3, 6))
    result = rounds.run_round(rounds.RoundInput(f=f, stationary_state=stationary,
                                                t0=t0, j=j))
    payload = {
        "f": f,
        "fprime": fprime,
        "jt0": j * t0,
        "fidelity": result.fidelity,
        "success_probability": result.success_probability,
        "werner_deviation": result.werner_deviation,
        "closed_form_fidelity": rounds.closed_form_fidelity(t0, f, j),
        "closed_form_success": rounds.closed_form_success(t0, f, j),
    }
    if at_t:
        general = rounds.closed_form_general(f, fprime)
        payload["closed_form_general_fidelity"] = general.fidelity
        payload["closed_form_general_success"] = general.success_probability
    if fmt == "json":
        _emit_json(payload, output)
    else:
        keys = sorted(payload)
        _emit_csv(keys, [[payload[k] for k in keys]], output)


def _float_grid(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 2:
        raise click.UsageError("grid needs at least 2 steps")
    return np.linspace(lo, hi, steps)


@main.command("fig5")
@click.option("--panel", type=click.Choice(["a", "b", "c"]), required=True)
@click.option("--f", "f_fixed", type=float, default=0.75, show_default=True,
              help="Input fidelity for panel a.")
@click.option("--f-min", type=float, default=0.55, show_default=True)
@click.option("--f-max", type=float, default=0.95, show_default=True)
@click.option("--f-steps", type=int, default=41, show_default=True)
@click.option("--jt-max", type=float, default=math.pi / 2, show_default=True)
@click.option("--jt-steps", type=int, default=121, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@_cli_errors
def cmd_fig5(panel: str, f_fixed: float, f_min: float, f_max: float,
             f_steps: int, jt_max: float, jt_steps: int,
             output: str | None) -> None:
    """Single-round fidelity sweeps: vs time (a), vs baseline (b), vs f,f' (c)."""
    if panel == "a":
        grid = _float_grid(0.0, jt_max, jt_steps)
        table = [(jt, rounds.closed_form_fidelity(jt, f_fixed)) for jt in grid]
        _emit_csv(["jt0", "fidelity"], table, output)
    elif panel == "b":
        grid = _float_grid(f_min, f_max, f_steps)
        table = [(r.f, r.xy_one_round, r.cnot_one_round, r.scheme_c_two_rounds)
                 for r in cnot.comparison_table(grid)]
        _emit_csv(["f", "xy_one_round", "cnot_one_round", "scheme_c_two_rounds"],
                  table, output)
    else:
        grid = _float_grid(f_min, f_max, f_steps)
        table = [(f, fp, rounds.closed_form_general(f, fp).fidelity)
                 for f in grid for fp in grid]
        _emit_csv(["f", "fprime", "fidelity"], table, output)


@main.command("fig6")
@click.option("--f-min", type=float, default=0.55, show_default=True)
@click.option("--f-max", type=float, default=0.95, show_default=True)
@click.option("--f-steps", type=int, default=41, show_default=True)
@click.option("--n-max", type=int, default=10, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@_cli_errors
def cmd_fig6(f_min: float, f_max: float, f_steps: int, n_max: int,
             output: str | None) -> None:
    """Pumping saturation table over (f, n), incl. n = 1 and n = 4 rows."""
    if n_max < 4:
        raise click.UsageError("n-max must be at least 4 for the comparison rows")
    grid = _float_grid(f_min, f_max, f_steps)
    table = [(r.f, r.n, r.fidelity, r.f_hat, r.f_bar, r.success_probability,
              r.fixed_point)
             for r in pumping.saturation_table(grid, n_max)]
    _emit_csv(["f", "n", "F_n", "F_hat", "F_bar", "P_succ", "fixed_point"],
              table, output)


@main.command("validate-cavity")
@click.option("--delta", type=float, required=True,
              help="Detuning ratio Delta/g0 (sign allowed).")
@click.option("--ell", type=float, required=True,
              help="Trapped-atom offset in units of the waist w.")
@click.option("--v", type=float, default=0.5, show_default=True,
              help="Conveyor velocity in units of w*g0.")
@click.option("--d", "d_override", type=float, default=None,
              help="Pair spacing in units of w (default: solve for C12 = 1).")
@click.option("--force", is_flag=True,
              help="Run even when the adiabaticity condition fails.")
@click.option("--dump-trajectory", type=click.Path(dir_okay=False), default=None,
              help="Write the exact-dynamics trajectory CSV here.")
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@_cli_errors
def cmd_validate_cavity(delta: float, ell: float, v: float,
                        d_override: float | None, force: bool,
                        dump_trajectory: str | None,
                        output: str | None) -> None:
    """Check the microscopic-to-ring-exchange reduction for one geometry."""
    d = d_override if d_override is not None else cavity.solve_geometry(ell, 1.0)
    geom = cavity.CavityGeometry(g0=1.0, w=1.0, ell=ell, d=d, v=v, delta=delta)
    if not geom.adiabatic and not force:
        raise cavity.GeometryError(
            f"detuning ratio |delta|/g0 = {abs(delta):.4g} is below the "
            f"adiabatic minimum {geom.ratio_min:.4g}; the effective dynamics "
            "is not trustworthy here (pass --force to run anyway)")
    report = cavity.xy_agreement(geom)
    couplings = cavity.asymptotic_hamiltonian(geom)
    study = cavity.convergence_study(geom, factors=(1.0, 2.0))
    ratio = study[1][1] / study[0][1] if study[0][1] > 0 else float("nan")
    payload = {
        "geometry": {
            "delta_over_g0": delta, "ell_over_w": ell, "d_over_w": d,
            "v_over_w_g0": v, "adiabatic": geom.adiabatic,
            "j_effective": geom.j_effective, "t_prime": geom.t_prime,
        },
        "c_matrix": [[float(x) for x in row] for row in couplings.c_matrix],
        "c_matrix_max_rel_error": couplings.max_rel_error,
        "agreement": asdict(report),
        "distance_halving_ratio": ratio,
    }
    if dump_trajectory:
        c4 = np.array([0.0, 1.0, 0.0, 0.0], dtype=complex)
        traj = cavity.integrate_full(geom, c4)
        header = ["t", "re_c0", "im_c0", "re_c1", "im_c1", "re_c2", "im_c2",
                  "re_c3", "im_c3", "photon_population"]
        table = [
            [t, c[0].real, c[0].imag, c[1].real, c[1].imag,
             c[2].real, c[2].imag, c[3].real, c[3].imag, abs(c[0]) ** 2]
            for t, c in zip(traj.times, traj.amplitudes)
        ]
        _emit_csv(header, table, dump_trajectory)
    _emit_json(payload, output)


@main.command("montecarlo")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="JSON configuration file.")
@click.option("--trials-csv", type=click.Path(dir_okay=False), default=None,
              help="Write per-trial attempt counts here.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@_cli_errors
def cmd_montecarlo(config_path: str, trials_csv: str | None, workers: int,
                   output: str | None) -> None:
    """Run seeded protocol trials from a JSON config and emit JSON stats."""
    with open(config_path, encoding="utf-8") as fh:
        raw = json.load(fh)
    version = raw.pop("schema_version", None)
    if version != CONFIG_SCHEMA_VERSION:
        raise montecarlo.ConfigurationError(
            f"config schema_version must be {CONFIG_SCHEMA_VERSION}, got {version!r}")
    trials = raw.pop("trials", 1000)
    known = {"f", "target_rounds", "target_fidelity", "p_inconclusive", "seed",
             "gate_time", "restore_extra_time", "message_latency"}
    unknown = set(raw) - known
    if unknown:
        raise montecarlo.ConfigurationError(
            f"unknown config keys: {sorted(unknown)}")
    config = montecarlo.ProtocolConfig(**raw)
    batch = montecarlo.simulate_batch(config, trials, workers=workers)
    click.echo(
        f"trials={batch.trials} mean_attempts={batch.mean_attempts:.6g} "
        f"mean_final_fidelity={batch.mean_final_fidelity:.9g}",
        err=True,
    )
    payload = {
        "config": {**raw, "trials": trials, "schema_version": CONFIG_SCHEMA_VERSION},
        "trials": batch.trials,
        "mean_attempts": batch.mean_attempts,
        "attempts_halfwidth": batch.attempts_halfwidth,
        "mean_time": batch.mean_time,
        "time_halfwidth": batch.time_halfwidth,
        "mean_final_fidelity": batch.mean_final_fidelity,
        "attempts_by_round": list(batch.attempts_by_round),
        "successes_by_round": list(batch.successes_by_round),
        "expected_attempts_analytic": (
            montecarlo.expected_attempts(config.f, config.target_rounds,
                                         config.p_inconclusive)
            if config.target_rounds is not None else None),
    }
    _emit_json(payload, output)
    if trials_csv:
        _emit_csv(["trial", "attempts"],
                  list(enumerate(batch.attempts_per_trial)), trials_csv)


if __name__ == "__main__":
    main()
