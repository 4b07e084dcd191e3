"""Command-line front end.

Pencils travel as {"a": [...], "b": [...]}, spectral data as
{"lambda": [...], "w": [...]}. Trajectories come out as CSV with header
t,a_1..a_N,b_1..b_{N-1}, or as JSON with --format json.

Exit codes: 0 success, 1 invalid input, 2 numerical failure. Errors are
reported on stderr as {"error": {"kind": ..., "detail": ...}}.
"""

from __future__ import annotations

import csv
import io
import json
import sys

import click
import numpy as np

from .core import BidiagonalPencil, FlowSpec, SpectralData
from .direct import direct_transform
from .errors import NumericalError, RelTodaError, ValidationError
from .flow import evolve_weights, solve_trajectory
from .inverse import inverse_transform, inverse_transform_stieltjes
from .ode_oracle import integrate_at

SIG_DIGITS = 15

EXAMPLE_A = (3.0, 12.0, 16.0, 7.0, 5.0)
EXAMPLE_B = (1.0, 6.0, 11.0, 5.0)
PUBLISHED_LAMBDA = (1.9812757881, 2.6941860907, 6.6927423653, 13.8305993379, 40.8011964181)
PUBLISHED_W = (0.0097186754, 0.8409233539, 0.0757415291, 0.0665694128, 0.0070470286)


class InputError(ValidationError):
    kind = "InvalidInput"


def _num(x: float) -> float:
    # round to 15 significant digits; json then prints the shortest repr
    return float(f"{float(x):.{SIG_DIGITS}g}")


def _nums(xs) -> list:
    return [_num(x) for x in np.asarray(xs, dtype=float).reshape(-1)]


def _emit_error(kind: str, detail: str) -> None:
    click.echo(json.dumps({"error": {"kind": kind, "detail": detail}}), err=True)


class _Group(click.Group):
    """Runs click non-standalone so every failure maps onto the 0/1/2 exit codes."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.exceptions.Abort:
            _emit_error("Aborted", "interrupted")
            sys.exit(1)
        except click.ClickException as exc:
            _emit_error("UsageError", exc.format_message())
            sys.exit(1)
        except ValidationError as exc:
            _emit_error(exc.kind, str(exc.detail))
            sys.exit(1)
        except NumericalError as exc:
            _emit_error(exc.kind, str(exc.detail))
            sys.exit(2)
        except RelTodaError as exc:
            _emit_error(exc.kind, str(exc.detail))
            sys.exit(2)
        sys.exit(rv if isinstance(rv, int) else 0)


def _read_json(input_path, data):
    if data is not None:
        text = data
    else:
        with click.open_file(input_path or "-", "r") as fh:
            text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"input is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise InputError("input must be a JSON object")
    return obj


def _field(obj, key):
    if key not in obj:
        raise InputError(f"missing field {key!r}")
    try:
        return np.asarray(obj[key], dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise InputError(f"field {key!r} must be a list of numbers") from None


def _pencil(obj) -> BidiagonalPencil:
    return BidiagonalPencil(_field(obj, "a"), _field(obj, "b"))


def _spectral(obj) -> SpectralData:
    return SpectralData(_field(obj, "lambda"), _field(obj, "w"))


def _write(output_path, text: str) -> None:
    with click.open_file(output_path or "-", "w") as fh:
        fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj) + "\n"


def _parse_times(times, time_list):
    if (times is None) == (time_list is None):
        raise InputError("give exactly one of --times START,END,COUNT or --time-list T1,T2,...")
    try:
        if times is not None:
            start, end, count = times.split(",")
            count = int(count)
            if count < 1:
                raise InputError("count must be at least 1")
            return np.linspace(float(start), float(end), count)
        vals = np.array([float(x) for x in time_list.split(",") if x.strip()])
    except ValueError:
        raise InputError("times must be comma-separated numbers") from None
    if vals.size == 0 or np.any(np.diff(vals) <= 0):
        raise InputError("--time-list must be non-empty and strictly increasing")
    return vals


def _trajectory_text(traj, fmt: str) -> str:
    if fmt == "json":
        return _dump(
            {
                "t": _nums(traj.times),
                "a": [_nums(r) for r in traj.a],
                "b": [_nums(r) for r in traj.b],
            }
        )
    N = traj.N
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t"] + [f"a_{n}" for n in range(1, N + 1)] + [f"b_{n}" for n in range(1, N)])
    for t, a, b in zip(traj.times, traj.a, traj.b):
        writer.writerow([f"{x:.{SIG_DIGITS}g}" for x in (t, *a, *b)])
    return buf.getvalue()


def _flow(text: str) -> FlowSpec:
    return FlowSpec.parse(text)


_input = click.option("--input", "-i", "input_path", type=click.Path(dir_okay=False), default=None, help="Input JSON file (default stdin).")
_data = click.option("--data", default=None, help="Inline JSON instead of --input.")
_output = click.option("--output", "-o", "output_path", type=click.Path(dir_okay=False), default=None, help="Output file (default stdout).")
_flow_opt = click.option("--flow", "flow", default="reciprocal", show_default=True, help="reciprocal, identity, log or power:<p>.")
_times = click.option("--times", default=None, help="Uniform grid START,END,COUNT.")
_time_list = click.option("--time-list", default=None, help="Explicit increasing times T1,T2,...")
_dt = click.option("--dt", type=float, default=1e-4, show_default=True, help="RK4 step.")


def _fmt(default):
    return click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=default, show_default=True)


@click.group(cls=_Group)
@click.version_option(package_name="artifact")
def main():
    """Direct and inverse spectral transforms for the relativistic Toda lattice."""


@main.command()
@_input
@_data
@_output
@click.option("--method", type=click.Choice(["residues", "eigenvectors"]), default="residues", show_default=True)
def direct(input_path, data, output_path, method):
    """Pencil {"a","b"} to spectral data {"lambda","w"}."""
    s = direct_transform(_pencil(_read_json(input_path, data)), method=method)
    _write(output_path, _dump({"lambda": _nums(s.lam), "w": _nums(s.w)}))


@main.command()
@_input
@_data
@_output
@click.option("--method", type=click.Choice(["tfraction", "stieltjes"]), default="tfraction", show_default=True)
def inverse(input_path, data, output_path, method):
    """Spectral data {"lambda","w"} to pencil {"a","b"}."""
    s = _spectral(_read_json(input_path, data))
    p = inverse_transform(s) if method == "tfraction" else inverse_transform_stieltjes(s)
    _write(output_path, _dump({"a": _nums(p.a), "b": _nums(p.b)}))


@main.command()
@_input
@_data
@_output
@_flow_opt
@click.option("--t", "t", type=float, required=True, help="Time to evolve to.")
def evolve(input_path, data, output_path, flow, t):
    """Spectral data at time 0 to spectral data at time t."""
    s = evolve_weights(_spectral(_read_json(input_path, data)), _flow(flow), t)
    _write(output_path, _dump({"lambda": _nums(s.lam), "w": _nums(s.w), "t": _num(t)}))


@main.command()
@_input
@_data
@_output
@_flow_opt
@_times
@_time_list
@_fmt("csv")
def trajectory(input_path, data, output_path, flow, times, time_list, fmt):
    """Matrix data on a time grid through the spectral transform."""
    p = _pencil(_read_json(input_path, data))
    traj = solve_trajectory(p, _flow(flow), _parse_times(times, time_list))
    _write(output_path, _trajectory_text(traj, fmt))


@main.command()
@_input
@_data
@_output
@_flow_opt
@_times
@_time_list
@_dt
@_fmt("csv")
def simulate(input_path, data, output_path, flow, times, time_list, dt, fmt):
    """Matrix data on a time grid by RK4 integration of the lattice equations."""
    p = _pencil(_read_json(input_path, data))
    traj = integrate_at(p, _flow(flow), _parse_times(times, time_list), dt)
    _write(output_path, _trajectory_text(traj, fmt))


@main.command()
@_input
@_data
@_output
@_flow_opt
@_times
@_time_list
@_dt
@click.option("--tol", type=float, default=1e-6, show_default=True)
def verify(input_path, data, output_path, flow, times, time_list, dt, tol):
    """Compare the spectral and RK4 trajectories; exit 0 iff they agree within --tol."""
    p = _pencil(_read_json(input_path, data))
    F = _flow(flow)
    ts = _parse_times(times, time_list)
    spec = solve_trajectory(p, F, ts)
    ode = integrate_at(p, F, ts, dt)
    dev = float(max(np.max(np.abs(spec.a - ode.a)), np.max(np.abs(spec.b - ode.b), initial=0.0)))
    ok = dev < tol
    _write(output_path, _dump({"max_deviation": dev, "tol": tol, "pass": ok}))
    return 0 if ok else 2


@main.command("paper-example")
@_output
@_fmt("json")
def paper_example(output_path, fmt):
    """Spectral data of the worked five-site example against the published table."""
    s = direct_transform(BidiagonalPencil(EXAMPLE_A, EXAMPLE_B))
    dev = float(max(np.max(np.abs(s.lam - PUBLISHED_LAMBDA)), np.max(np.abs(s.w - PUBLISHED_W))))
    if fmt == "json":
        text = _dump(
            {
                "a": list(EXAMPLE_A),
                "b": list(EXAMPLE_B),
                "flow": "reciprocal",
                "lambda": _nums(s.lam),
                "w": _nums(s.w),
                "published_lambda": list(PUBLISHED_LAMBDA),
                "published_w": list(PUBLISHED_W),
                "max_deviation": dev,
            }
        )
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["j", "lambda", "published_lambda", "w", "published_w"])
        for j in range(s.N):
            writer.writerow(
                [j + 1, f"{s.lam[j]:.{SIG_DIGITS}g}", PUBLISHED_LAMBDA[j], f"{s.w[j]:.{SIG_DIGITS}g}", PUBLISHED_W[j]]
            )
        text = buf.getvalue()
    _write(output_path, text)
    click.echo(f"max deviation {dev:.3e}", err=True)
    return 0 if dev < 1e-8 else 2


if __name__ == "__main__":
    main()
