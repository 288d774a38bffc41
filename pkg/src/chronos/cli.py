"""Command-line front end: configuration, orchestration, serialization.

Commands: distribution, verify, povm-matrix, covariance-scan.
Configuration merges three layers: built-in defaults, then a key=value
config file, then command-line flags (flags win).  All floating-point
output uses 17 significant digits, so runs with identical configuration
and seed produce byte-identical files.

Exit codes: 0 success, 1 validation failure, 2 I/O failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

from . import clock, operators, verify
from .errors import ChronosError
from .hilbert import GaussianStateSpec, gaussian_state, make_grid

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_VERIFICATION = 3

COVARIANCE_TOL = 1e-8


@dataclass(frozen=True)
class RunConfig:
    p_min: float = 0.5
    p_max: float = 12.0
    n: int = 2048
    t_min: float = -6.0
    t_max: float = 2.0
    m: int = 4096
    p0: float = 4.0
    sigma_p: float = 0.25
    x0: float = -8.0
    a: float = -3.0
    b: float = -1.0
    k: int = 64
    trials: int = 100
    seed: int = 1729
    epsilons: tuple = verify.DEFAULT_EPSILONS
    out_dir: str = "."
    matrix_format: str = "binary"


class ConfigError(ChronosError, ValueError):
    """Bad configuration file or flag combination."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; 2 is reserved for I/O
    # failures here, so usage errors go through the validation path instead
    def error(self, message):
        raise ConfigError(message)


def _parse_epsilons(text: str) -> tuple:
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"epsilons must be comma-separated floats, got {text!r}") from exc
    if len(values) != 2 or not all(v > 0 for v in values):
        raise ConfigError("epsilons must be two positive values")
    return values


def _parse_matrix_format(text: str) -> str:
    if text not in ("binary", "csv"):
        raise ConfigError(f"matrix_format must be 'binary' or 'csv', got {text!r}")
    return text


_CONVERTERS = {
    "p_min": float,
    "p_max": float,
    "n": int,
    "t_min": float,
    "t_max": float,
    "m": int,
    "p0": float,
    "sigma_p": float,
    "x0": float,
    "a": float,
    "b": float,
    "k": int,
    "trials": int,
    "seed": int,
    "epsilons": _parse_epsilons,
    "out_dir": str,
    "matrix_format": _parse_matrix_format,
}


def parse_config_file(path: str) -> dict:
    """Flat key=value file; blank lines and '#' comments allowed; unknown
    keys rejected."""
    updates = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONVERTERS:
            raise ConfigError(f"{path}:{lineno}: unknown configuration key {key!r}")
        try:
            updates[key] = _CONVERTERS[key](value)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return updates


def load_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if args.config is not None:
        config = replace(config, **parse_config_file(args.config))
    flag_updates = {
        name: getattr(args, name)
        for name in _CONVERTERS
        if getattr(args, name, None) is not None
    }
    if flag_updates:
        config = replace(config, **flag_updates)
    return config


# ---------------------------------------------------------------------------
# serialization


def fmt(x: float) -> str:
    return f"{x:.17g}"


def dumps_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{pad}  "{key}": {dumps_json(value, indent + 1)}'
            for key, value in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(f"{pad}  {dumps_json(v, indent + 1)}" for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"cannot serialize non-finite float {obj!r}")
        return fmt(obj)
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialize {type(obj)!r}")


def write_json(path: Path, obj) -> None:
    path.write_text(dumps_json(obj) + "\n")


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def config_echo(config: RunConfig) -> dict:
    out = {}
    for f in fields(config):
        value = getattr(config, f.name)
        out[f.name] = list(value) if isinstance(value, tuple) else value
    return out


# ---------------------------------------------------------------------------
# commands


def _grid_and_window(config: RunConfig):
    grid = make_grid(config.p_min, config.p_max, config.n)
    tg = clock.make_time_grid(config.t_min, config.t_max, config.m)
    return grid, tg


def _state_spec(config: RunConfig) -> GaussianStateSpec:
    return GaussianStateSpec(config.p0, config.sigma_p, config.x0)


def cmd_distribution(config: RunConfig, out_dir: Path) -> int:
    grid, tg = _grid_and_window(config)
    phi = gaussian_state(_state_spec(config), grid)
    amp = clock.amplitudes(phi, tg)
    dist = clock.distribution_from_amplitudes(amp)
    mean, variance = clock.mean_and_variance(dist)
    _, sigma_h = operators.energy_moments(phi)
    write_csv(
        out_dir / "distribution.csv",
        ["t", "rho", "re_a_plus", "im_a_plus", "re_a_minus", "im_a_minus"],
        (
            (
                float(tg.samples[j]),
                float(dist.density[j]),
                float(amp.a_plus[j].real),
                float(amp.a_plus[j].imag),
                float(amp.a_minus[j].real),
                float(amp.a_minus[j].imag),
            )
            for j in range(tg.m)
        ),
    )
    write_json(
        out_dir / "summary.json",
        {
            "total_mass": dist.total_mass,
            "mean": mean,
            "variance": variance,
            "sigma_T": math.sqrt(variance),
            "sigma_H": sigma_h,
            "uncertainty_product": operators.uncertainty_product(phi),
        },
    )
    return EXIT_OK


def cmd_verify(config: RunConfig, out_dir: Path) -> int:
    grid, tg = _grid_and_window(config)
    report = verify.run_verification(
        grid,
        tg,
        _state_spec(config),
        clock.Interval(config.a, config.b),
        k=config.k,
        trials=config.trials,
        seed=config.seed,
        epsilons=config.epsilons,
    )
    payload = {"config": config_echo(config)}
    payload.update(report.to_dict())
    write_json(out_dir / "report.json", payload)
    if not report.all_passed:
        names = ", ".join(c.name for c in report.failed())
        print(f"verification failed: {names}", file=sys.stderr)
        return EXIT_VERIFICATION
    return EXIT_OK


def cmd_povm_matrix(config: RunConfig, out_dir: Path) -> int:
    grid = make_grid(config.p_min, config.p_max, config.n)
    interval = clock.Interval(config.a, config.b)
    nodes, _ = clock.interval_time_nodes(interval, grid.p_max)
    element = clock.povm_element(interval, grid)
    eigenvalues = element.eigenvalues()
    matrix_name = f"povm_matrix.{'bin' if config.matrix_format == 'binary' else 'csv'}"
    header = {
        "p_min": config.p_min,
        "p_max": config.p_max,
        "n": config.n,
        "a": config.a,
        "b": config.b,
        "tq": len(nodes),
        "side": grid.size,
        "dtype": "float64",
        "layout": "row-major, interleaved real/imag",
        "format": config.matrix_format,
        "matrix_file": matrix_name,
    }
    write_json(out_dir / "povm_matrix.json", header)
    flat = element.entries.astype("complex128").view("float64")
    if config.matrix_format == "binary":
        flat.tofile(out_dir / matrix_name)
    else:
        write_csv(
            out_dir / matrix_name,
            [f"c{i}" for i in range(2 * grid.size)],
            (tuple(float(v) for v in row) for row in flat),
        )
    write_csv(
        out_dir / "eigenvalues.csv",
        ["index", "eigenvalue"],
        ((i, float(v)) for i, v in enumerate(eigenvalues)),
    )
    return EXIT_OK


def cmd_covariance_scan(config: RunConfig, out_dir: Path) -> int:
    grid, tg = _grid_and_window(config)
    if config.k < 0:
        raise ConfigError(f"scan half-range k must be nonnegative, got {config.k}")
    if config.k >= tg.m:
        raise ConfigError(
            f"shift range k={config.k} exceeds the window margin (m={tg.m} nodes): "
            "the shifted density would be truncated"
        )
    phi = gaussian_state(_state_spec(config), grid)
    scan = verify.covariance_scan(phi, range(-config.k, config.k + 1), tg)
    rows = [(kk * tg.dt, err) for kk, err in scan]
    worst = max(err for _, err in scan)
    write_csv(out_dir / "covariance_scan.csv", ["lambda", "max_abs_error"], rows)
    if worst >= COVARIANCE_TOL:
        print(
            f"covariance scan failed: max error {worst:.3e} >= {COVARIANCE_TOL:g}",
            file=sys.stderr,
        )
        return EXIT_VERIFICATION
    return EXIT_OK


COMMANDS = {
    "distribution": cmd_distribution,
    "verify": cmd_verify,
    "povm-matrix": cmd_povm_matrix,
    "covariance-scan": cmd_covariance_scan,
}


# ---------------------------------------------------------------------------
# entry point


def _apply_thread_cap() -> None:
    raw = os.environ.get("CHRONOS_THREADS")
    if raw is None:
        return
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ConfigError(f"CHRONOS_THREADS must be an integer, got {raw!r}") from exc
    if cap < 0:
        raise ConfigError(f"CHRONOS_THREADS must be >= 0, got {cap}")
    if cap > 0:
        import threadpoolctl

        threadpoolctl.threadpool_limits(limits=cap)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key=value configuration file")
    for flag, key in [
        ("--p-min", "p_min"),
        ("--p-max", "p_max"),
        ("--t-min", "t_min"),
        ("--t-max", "t_max"),
        ("--p0", "p0"),
        ("--sigma-p", "sigma_p"),
        ("--x0", "x0"),
        ("--a", "a"),
        ("--b", "b"),
    ]:
        common.add_argument(flag, dest=key, type=float)
    for flag, key in [
        ("--n", "n"),
        ("--m", "m"),
        ("--k", "k"),
        ("--trials", "trials"),
        ("--seed", "seed"),
    ]:
        common.add_argument(flag, dest=key, type=int)
    common.add_argument("--out-dir", dest="out_dir")

    parser = _Parser(
        prog="chronos",
        description="Measured-time distributions and identity checks for the "
        "free-particle quantum clock.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser(
        "distribution",
        parents=[common],
        help="write the measured-time density and a moment summary",
    )
    sub.add_parser(
        "verify",
        parents=[common],
        help="run every check family and write a verification report",
    )
    sub.add_parser(
        "povm-matrix",
        parents=[common],
        help="write the measure-element matrix of (a, b] and its spectrum",
    )
    sub.add_parser(
        "covariance-scan",
        parents=[common],
        help="check the density shift identity for all |shifts| <= k",
    )
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _apply_thread_cap()
        config = load_config(args)
        out_dir = Path(config.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](config, out_dir)
    except ChronosError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
