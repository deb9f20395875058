"""Experiment harness: seeded run grids, CSV/JSON persistence, summaries.

Configs are TOML; one config describes a grid over (N, depth) for a single
(architecture, state, estimator, mode) combination.  Estimator values are
fully determined by (config, master_seed); the wall_time_s column is the
only non-deterministic CSV field.
"""

from __future__ import annotations

import csv
import datetime
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import click
import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python 3.10
    import tomli as tomllib

from . import __version__, analytics, oracle, replica, shadows
from .pauli import PauliString
from .replica import CHAIN_DENSE_MAX, SYMMETRIC_MAX

EXIT_INVALID_CONFIG = 2
EXIT_UNSUPPORTED_EXACT = 3
EXIT_IO = 4

CSV_COLUMNS = [
    "architecture", "N", "t", "estimator", "state", "noise_p", "mode",
    "M", "R", "mean", "stderr", "sample_variance", "variance_err",
    "wall_time_s",
]

STABILIZER_STATES = ("zero", "ghz", "cluster2d", "random_stabilizer")
DEFAULT_DELTAS = [0.2, 0.1, 0.05]


class ConfigError(Exception):
    """Invalid or inconsistent experiment configuration."""


class UnsupportedExact(Exception):
    """(architecture, estimator, state) has no exact replica engine."""


def _parse_spec(s):
    """'name' or 'name(a,b)' -> (name, [args])."""
    s = str(s)
    if "(" not in s:
        return s, []
    base, argstr = s.split("(", 1)
    return base.strip(), [a.strip() for a in argstr.rstrip(")").split(",")
                          if a.strip()]


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML: {exc}") from exc
    return raw


def validate_config(raw: dict) -> dict:
    """Normalize and fully validate a config before any compute starts."""
    cfg = dict(raw)
    for key in ("architecture", "N_list", "depth_list"):
        if key not in cfg:
            raise ConfigError(f"missing required key {key!r}")
    if cfg["architecture"] not in ("chain1d", "grid2d", "alltoall"):
        raise ConfigError(f"unknown architecture {cfg['architecture']!r}")
    for key in ("N_list", "depth_list"):
        vals = cfg[key]
        if (not isinstance(vals, list) or not vals
                or not all(isinstance(v, int) and v > 0 for v in vals)):
            raise ConfigError(f"{key} must be a non-empty list of positive "
                              "integers")
    cfg.setdefault("state", "zero")
    cfg.setdefault("noise", "none")
    cfg.setdefault("estimator", "fidelity")
    cfg.setdefault("mode", "monte_carlo")
    cfg.setdefault("master_seed", 0)
    cfg.setdefault("delta_list", list(DEFAULT_DELTAS))
    est_kind, est_args = _parse_spec(cfg["estimator"])
    if est_kind not in ("fidelity", "purity", "pauli"):
        raise ConfigError(f"unknown estimator {cfg['estimator']!r}")
    if est_kind == "pauli":
        if len(est_args) != 1:
            raise ConfigError("pauli estimator needs a label: pauli(XX...)")
        if set(est_args[0].upper()) - set("IXYZ"):
            raise ConfigError(f"bad Pauli label {est_args[0]!r}")
        if set(est_args[0].upper()) == {"I"}:
            raise ConfigError("Pauli label must be traceless (not all I)")
    cfg.setdefault("M", shadows.DEFAULT_M)
    cfg.setdefault("R", shadows.DEFAULT_R.get(est_kind, 9600))
    cfg.setdefault("B", shadows.DEFAULT_B)
    for key in ("M", "R", "B", "master_seed"):
        if not isinstance(cfg[key], int) or cfg[key] < 0:
            raise ConfigError(f"{key} must be a non-negative integer")
    if cfg["mode"] not in ("monte_carlo", "exact"):
        raise ConfigError(f"unknown mode {cfg['mode']!r}")
    state_kind, state_args = _parse_spec(cfg["state"])
    if state_kind not in STABILIZER_STATES + ("product",):
        raise ConfigError(f"unknown state {cfg['state']!r}")
    try:
        shadows.parse_noise(cfg["noise"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    deltas = cfg["delta_list"]
    if not all(isinstance(d, float) and 0.0 < d < 1.0 for d in deltas):
        raise ConfigError("delta_list entries must be floats in (0, 1)")
    if cfg["architecture"] == "grid2d":
        for n in cfg["N_list"]:
            side = math.isqrt(n)
            if side * side != n or side < 2:
                raise ConfigError(f"grid2d needs square N >= 4, got {n}")
    if cfg["architecture"] == "alltoall":
        for n in cfg["N_list"]:
            if n % 2:
                raise ConfigError(f"alltoall needs even N, got {n}")
    if cfg["mode"] == "monte_carlo":
        if state_kind == "product":
            raise ConfigError("monte_carlo requires a stabilizer state "
                              "(zero | ghz | cluster2d | random_stabilizer)")
        if est_kind == "pauli":
            if any(len(est_args[0]) != n for n in cfg["N_list"]):
                raise ConfigError("Pauli label length must equal every N "
                                  "in N_list")
        if cfg["M"] < 2 and est_kind == "purity":
            raise ConfigError("purity estimator needs M >= 2")
        if cfg["M"] < 1 or cfg["R"] < 2:
            raise ConfigError("monte_carlo needs M >= 1 and R >= 2")
    else:
        _check_exact_support(cfg, est_kind, state_kind)
    return cfg


def _check_exact_support(cfg, est_kind, state_kind):
    arch = cfg["architecture"]
    if arch == "grid2d":
        raise UnsupportedExact("no exact replica engine for grid2d")
    if est_kind == "pauli":
        raise UnsupportedExact("no exact engine for the Pauli estimator")
    nmax = CHAIN_DENSE_MAX if arch == "chain1d" else SYMMETRIC_MAX
    for n in cfg["N_list"]:
        if n > nmax:
            raise UnsupportedExact(
                f"exact {arch} engine caps at N = {nmax}, got {n}")
    if est_kind == "fidelity":
        if state_kind not in ("zero", "product"):
            raise UnsupportedExact("exact fidelity covers product targets "
                                   "only (zero | product(mu))")
        if shadows.parse_noise(cfg["noise"]) != 0.0:
            raise UnsupportedExact("exact fidelity curves are noiseless")
    else:  # purity
        if state_kind not in ("product", "ghz"):
            raise UnsupportedExact("exact purity covers product(mu) and "
                                   "ghz only")
        if shadows.parse_noise(cfg["noise"]) != 0.0:
            raise UnsupportedExact("exact purity curves are noiseless")


# ---------------------------------------------------------------------------
# run execution
# ---------------------------------------------------------------------------

def _cell_seed(master_seed: int, n: int, t: int) -> int:
    """Independent master seed per grid cell, so cells parallelize."""
    from . import _kernels as K
    return int(K._mix3(np.uint64(master_seed & (2 ** 64 - 1)),
                       np.uint64(n), np.uint64(t)))


def _run_monte_carlo_cell(cfg, n, t):
    est_kind, est_args = _parse_spec(cfg["estimator"])
    seed = _cell_seed(cfg["master_seed"], n, t)
    start = time.perf_counter()
    if est_kind == "fidelity":
        values = shadows.collect_fidelity_series(
            cfg["state"], cfg["state"], cfg["noise"], cfg["architecture"],
            n, t, seed, cfg["M"], cfg["R"])
    elif est_kind == "purity":
        values = shadows.collect_purity_series(
            cfg["state"], cfg["noise"], cfg["architecture"], n, t, seed,
            cfg["M"], cfg["R"])
    else:
        pauli = PauliString.from_label(est_args[0])
        values = shadows.collect_pauli_series(
            cfg["state"], pauli, cfg["noise"], cfg["architecture"], n, t,
            seed, cfg["M"], cfg["R"])
    stats = shadows.batch_statistics(values, cfg["B"], cfg["M"],
                                     bootstrap_seed=seed)
    wall = time.perf_counter() - start
    return (stats.mean, stats.stderr, stats.sample_variance,
            stats.variance_err, wall)


def _run_exact_cell(cfg, n, t):
    est_kind, _ = _parse_spec(cfg["estimator"])
    start = time.perf_counter()
    if est_kind == "fidelity":
        mean = replica.avg_fidelity_exact(n, cfg["architecture"], t)
    else:
        state_kind, state_args = _parse_spec(cfg["state"])
        spec = ("ghz",) if state_kind == "ghz" else \
            ("product", float(state_args[0]) if state_args else 0.0)
        mean = replica.avg_purity_exact(n, cfg["architecture"], t, spec)
    wall = time.perf_counter() - start
    return (mean, 0.0, 0.0, 0.0, wall)


def _format_row(cfg, n, t, result):
    mean, stderr, s2, s2err, wall = result
    return {
        "architecture": cfg["architecture"], "N": n, "t": t,
        "estimator": cfg["estimator"], "state": cfg["state"],
        "noise_p": repr(shadows.parse_noise(cfg["noise"])),
        "mode": cfg["mode"], "M": cfg["M"], "R": cfg["R"],
        "mean": repr(mean), "stderr": repr(stderr),
        "sample_variance": repr(s2), "variance_err": repr(s2err),
        "wall_time_s": f"{wall:.6f}",
    }


def _write_csv(path, rows):
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
    except OSError as exc:
        raise click.exceptions.Exit(EXIT_IO) from _io_fail(exc)


def _write_manifest(path, cfg, started_at, finished_at):
    manifest = {
        "config_echo": {k: v for k, v in cfg.items()},
        "master_seed": cfg["master_seed"],
        "code_version": __version__,
        "started_at": started_at,
        "finished_at": finished_at,
    }
    try:
        with open(path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
    except OSError as exc:
        raise click.exceptions.Exit(EXIT_IO) from _io_fail(exc)


def _io_fail(exc):
    click.echo(f"error: I/O failure: {exc}", err=True)
    return exc


def _now():
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def execute_run(cfg, out_path, threads):
    """Run the full grid and write CSV plus JSON manifest."""
    cells = [(n, t) for n in cfg["N_list"] for t in cfg["depth_list"]]
    runner = (_run_exact_cell if cfg["mode"] == "exact"
              else _run_monte_carlo_cell)
    started_at = _now()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {cell: pool.submit(runner, cfg, *cell)
                       for cell in cells}
            results = {cell: fut.result() for cell, fut in futures.items()}
    else:
        results = {cell: runner(cfg, *cell) for cell in cells}
    finished_at = _now()
    # canonical deterministic order regardless of completion order
    rows = [_format_row(cfg, n, t, results[(n, t)]) for n, t in cells]
    _write_csv(out_path, rows)
    manifest_path = os.path.splitext(str(out_path))[0] + ".manifest.json"
    _write_manifest(manifest_path, cfg, started_at, finished_at)
    return out_path, manifest_path


# ---------------------------------------------------------------------------
# CLI plumbing
# ---------------------------------------------------------------------------

def _resolve_threads(threads):
    if threads is not None:
        return max(1, threads)
    env = os.environ.get("SHADOWLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            click.echo("error: SHADOWLAB_THREADS must be an integer",
                       err=True)
            sys.exit(EXIT_INVALID_CONFIG)
    return 1


def _load_and_validate(config_path, seed, mode):
    try:
        cfg = load_config(config_path)
        if seed is not None:
            cfg["master_seed"] = seed
        if mode is not None:
            cfg["mode"] = mode
        return validate_config(cfg)
    except ConfigError as exc:
        click.echo(f"error: invalid config: {exc}", err=True)
        sys.exit(EXIT_INVALID_CONFIG)
    except UnsupportedExact as exc:
        click.echo(f"error: unsupported exact-mode combination: {exc}",
                   err=True)
        sys.exit(EXIT_UNSUPPORTED_EXACT)


def _output_path(cfg, out):
    path = out or cfg.get("output_path")
    if not path:
        click.echo("error: invalid config: no output path (set output_path "
                   "in the config or pass --out)", err=True)
        sys.exit(EXIT_INVALID_CONFIG)
    return path


@click.group()
@click.version_option(__version__)
def main():
    """Shallow-shadow estimation experiments."""


_config_opt = click.option("--config", "config_path", required=True,
                           type=click.Path(), help="TOML experiment config.")
_seed_opt = click.option("--seed", type=int, default=None,
                         help="Override master_seed.")
_out_opt = click.option("--out", type=click.Path(), default=None,
                        help="Override output_path.")
_threads_opt = click.option("--threads", type=int, default=None,
                            help="Worker threads (default: "
                                 "SHADOWLAB_THREADS or 1).")
_mode_opt = click.option("--mode", type=click.Choice(["monte_carlo",
                                                      "exact"]),
                         default=None, help="Override mode.")


@main.command()
@_config_opt
@_seed_opt
@_out_opt
@_threads_opt
@_mode_opt
def sample(config_path, seed, out, threads, mode):
    """Monte Carlo estimator runs over the config grid."""
    cfg = _load_and_validate(config_path, seed, mode or "monte_carlo")
    path = _output_path(cfg, out)
    csv_path, manifest_path = execute_run(cfg, path,
                                          _resolve_threads(threads))
    click.echo(f"wrote {csv_path} and {manifest_path}")


@main.command()
@_config_opt
@_seed_opt
@_out_opt
@_threads_opt
@_mode_opt
def exact(config_path, seed, out, threads, mode):
    """Exact replica-average curves over the config grid."""
    cfg = _load_and_validate(config_path, seed, mode or "exact")
    path = _output_path(cfg, out)
    csv_path, manifest_path = execute_run(cfg, path,
                                          _resolve_threads(threads))
    click.echo(f"wrote {csv_path} and {manifest_path}")


@main.command()
@_config_opt
@_seed_opt
@_out_opt
def bounds(config_path, seed, out):
    """Closed-form bound/variance curves for the config grid."""
    cfg = _load_and_validate(config_path, seed, None)
    path = _output_path(cfg, out)
    deltas = cfg["delta_list"]
    rows = []
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["N", "delta", "g_bound", "T_N",
                             "fidelity_var_inf", "purity_var_asymptote"])
            for n in cfg["N_list"]:
                for delta in deltas:
                    writer.writerow([
                        n, repr(delta), repr(analytics.g_bound(n, delta)),
                        repr(analytics.t_anticoncentration(n)),
                        repr(analytics.fidelity_var_inf(n, cfg["M"])),
                        repr(analytics.purity_var_asymptote(
                            n, max(2, cfg["M"]))),
                    ])
    except OSError as exc:
        _io_fail(exc)
        sys.exit(EXIT_IO)
    click.echo(f"wrote {path}")


@main.command()
@click.argument("result_csv", type=click.Path())
@click.option("--delta", "deltas", type=float, multiple=True,
              default=tuple(DEFAULT_DELTAS), show_default=True,
              help="Accuracy thresholds for t* extraction.")
@_out_opt
def summarize(result_csv, deltas, out):
    """Per-N t* table from a run CSV (plus g_bound for chain1d fidelity)."""
    try:
        with open(result_csv, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != CSV_COLUMNS:
                click.echo("error: malformed CSV: unexpected columns",
                           err=True)
                sys.exit(EXIT_INVALID_CONFIG)
            records = list(reader)
    except OSError as exc:
        _io_fail(exc)
        sys.exit(EXIT_IO)
    if not records:
        click.echo("error: malformed CSV: no records", err=True)
        sys.exit(EXIT_INVALID_CONFIG)
    arch = records[0]["architecture"]
    est_kind, _ = _parse_spec(records[0]["estimator"])
    state_kind, state_args = _parse_spec(records[0]["state"])
    by_n = {}
    for rec in records:
        by_n.setdefault(int(rec["N"]), []).append(
            (int(rec["t"]), float(rec["mean"])))
    add_bound = arch == "chain1d" and est_kind == "fidelity"
    header = ["N"] + [f"t_star(delta={d:g})" for d in deltas]
    if add_bound:
        header += [f"g_bound(delta={d:g})" for d in deltas]
    lines = [",".join(header)]
    for n in sorted(by_n):
        pts = sorted(by_n[n])
        ts = [t for t, _ in pts]
        values = [v for _, v in pts]
        if est_kind == "purity":
            if state_kind == "product":
                mu = float(state_args[0]) if state_args else 0.0
                target = (math.cos(mu) ** 4 + math.sin(mu) ** 4) ** n
            else:
                target = 1.0
            relative = True
        else:
            target = 1.0
            relative = False
        cells = [str(n)]
        for d in deltas:
            ts_val = replica.t_star(ts, values, target, d, relative=relative)
            cells.append("" if ts_val is None else str(ts_val))
        if add_bound:
            cells += [f"{analytics.g_bound(n, d):.4f}" for d in deltas]
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if out:
        try:
            with open(out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            _io_fail(exc)
            sys.exit(EXIT_IO)
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


@main.command("oracle")
@click.option("--n", "n", type=int, default=2, show_default=True,
              help="Qubit count (<= 2 exhaustive, <= 6 dense).")
@_out_opt
def oracle_cmd(n, out):
    """Tiny-N brute-force ground truth dump (JSON)."""
    if not 1 <= n <= oracle.EXHAUSTIVE_MAX_QUBITS:
        click.echo("error: invalid config: oracle dump needs 1 <= N <= 2",
                   err=True)
        sys.exit(EXIT_INVALID_CONFIG)
    d = 2 ** n
    psi = np.zeros(d, dtype=complex)
    psi[0] = 1.0
    rho = np.outer(psi, psi.conj())
    fid_mean, fid_var = oracle.exhaustive_global_fidelity_moments(rho, psi, n)
    pur_mean, pur_var = oracle.exhaustive_global_purity_moments(
        rho, n, shadows.DEFAULT_M)
    payload = {
        "N": n,
        "state": "zero",
        "global_fidelity_mean": fid_mean,
        "global_fidelity_variance": fid_var,
        "global_purity_mean": pur_mean,
        "global_purity_variance": pur_var,
        "fidelity_var_inf": analytics.fidelity_var_inf(n, 1),
        "purity_var_inf": analytics.purity_var_inf(
            n, shadows.DEFAULT_M, 1.0, 1.0),
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        try:
            with open(out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            _io_fail(exc)
            sys.exit(EXIT_IO)
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


@main.command()
@click.option("--fast", is_flag=True,
              help="Skip the long Monte Carlo criteria.")
def selftest(fast):
    """Run the acceptance suite; one line per criterion."""
    from . import acceptance
    ok = acceptance.run_all(fast=fast)
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
