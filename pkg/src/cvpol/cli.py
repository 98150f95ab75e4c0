"""``cvpol`` command-line front end.

Exit codes: 0 success, 1 validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from cvpol import capacity as cap
from cvpol.fock_oracle import OracleSpec, TruncationError, commutator_residuals, oracle_compare
from cvpol.opa_model import frequency_grid, load_preset, preset_names, spectrum_sweep
from cvpol.polstate import PolarizationState, StateError, coherent_state, load_state
from cvpol.scenarios import SCENARIOS, SPOT_FREQUENCY_MHZ, Scenario, run_scenario
from cvpol.stokes import poincare_ellipsoid, stokes_statistics

__all__ = ["main", "build_parser", "Scenario", "run_scenario", "DEFAULT_SUITE", "SUSPECT_CASE"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_HALF = 100.0 / math.sqrt(2.0)
DEFAULT_SUITE = (
    OracleSpec(100.0, r_h=0.1, label="single r=0.1"),
    OracleSpec(100.0, r_h=0.3, label="single r=0.3"),
    OracleSpec(100.0, r_h=0.5, label="single r=0.5"),
    OracleSpec(_HALF, _HALF, 0.5 * math.pi, r_h=0.3, r_v=0.3, label="two-beam r=0.3"),
)
SUSPECT_CASE = OracleSpec(1.0, r_h=1.0, label="linearization-suspect alpha=1 r=1")


class UsageError(Exception):
    pass


def _parse_grid(text: str, parts: int) -> list[float]:
    try:
        values = [float(v) for v in text.split(":")]
    except ValueError:
        raise UsageError(f"bad grid {text!r}") from None
    if len(values) != parts:
        raise UsageError(f"grid {text!r} needs {parts} colon-separated numbers")
    return values


def _spectral_grid(text: str | None, default):
    if text is None:
        return default
    start, stop, step = _parse_grid(text, 3)
    if not (0 < start <= stop and step > 0):
        raise UsageError(f"bad frequency grid {text!r}")
    return tuple(frequency_grid(start, stop, step))


def _emit(args, name: str, text: str) -> None:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps(data) -> str:
    return json.dumps(data, indent=2) + "\n"


def _rows_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _state(args) -> PolarizationState:
    if args.state:
        return load_state(args.state)
    return coherent_state(args.alpha_h, args.alpha_v, args.theta)


def cmd_means(args) -> int:
    stats = stokes_statistics(_state(args))
    return _emit_vector(args, "means", stats.mean)


def cmd_variances(args) -> int:
    stats = stokes_statistics(_state(args))
    return _emit_vector(args, "variances", stats.variance)


def _emit_vector(args, kind: str, values) -> int:
    values = [float(v) for v in values]
    if args.format == "json":
        _emit(args, f"{kind}.json", _dumps({f"s{i}": v for i, v in enumerate(values)}))
    else:
        _emit(args, f"{kind}.csv", _rows_csv(["s0", "s1", "s2", "s3"], [values]))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    if args.scenario:
        result = run_scenario(args.scenario, grid=_spectral_grid(args.grid, SCENARIOS[args.scenario].grid))
        if args.format == "json":
            rows = [dict(zip(("freq_mhz", "v0_db", "v1_db", "v2_db", "v3_db"), row)) for row in result.db_table().tolist()]
            _emit(args, f"{args.scenario}_spectra.json", _dumps(rows))
        else:
            _emit(args, f"{args.scenario}_spectra.csv", result.spectra_csv())
        return EXIT_OK
    preset = load_preset(args.preset)
    if args.lock:
        preset = preset.with_lock(args.lock)
    grid = _spectral_grid(args.grid, frequency_grid(3.0, 10.0, 0.1))
    rows = spectrum_sweep(preset.opa, preset.laser, grid)
    table = [(r.freq_mhz, 10 * math.log10(r.v_plus), 10 * math.log10(r.v_minus), r.laser_excess) for r in rows]
    header = ["freq_mhz", "v_plus_db", "v_minus_db", "laser_excess"]
    if args.format == "json":
        _emit(args, "spectrum.json", _dumps({"preset": preset.to_dict(), "rows": [dict(zip(header, t)) for t in table]}))
    else:
        _emit(args, "spectrum.csv", _rows_csv(header, table))
    return EXIT_OK


def cmd_ellipsoid(args) -> int:
    if args.scenario:
        result = run_scenario(args.scenario, spot_mhz=args.freq, grid=())
        _emit(args, f"{args.scenario}_ellipsoid.json", result.ellipsoid_json())
    else:
        _emit(args, "ellipsoid.json", poincare_ellipsoid(_state(args), not args.absolute).to_json() + "\n")
    return EXIT_OK


def cmd_scenario(args) -> int:
    result = run_scenario(args.name, spot_mhz=args.freq, grid=_spectral_grid(args.grid, None))
    if args.out:
        _emit(args, f"{args.name}_spectra.csv", result.spectra_csv())
        _emit(args, f"{args.name}_ellipsoid.json", result.ellipsoid_json())
    elif args.format == "json":
        _emit(args, "", result.ellipsoid_json())
    else:
        _emit(args, "", result.spectra_csv())
    return EXIT_OK


def cmd_capacity(args) -> int:
    annotations = args.crossover or args.experimental is not None
    if args.crossover:
        print(f"crossover n_bar = {cap.coherent_crossover():.4f}")
    if args.experimental is not None:
        if args.experimental < 0:
            raise UsageError("--experimental needs a non-negative photon number")
        report = cap.experimental_capacity(args.experimental)
        print(
            f"n_bar = {report.n_bar:.4g}: sqz2_ii {report.squeezed_bits:.4f} bits, "
            f"best coherent ({report.coherent_scheme}) {report.coherent_bits:.4f} bits, "
            f"gain {report.gain_percent:.1f}%"
        )
    if annotations and args.grid is None:
        return EXIT_OK
    start, stop, points = _parse_grid(args.grid or "0.01:10000:61", 3)
    if not (0 < start < stop) or points < 2 or points != int(points):
        raise UsageError(f"bad capacity grid {args.grid!r}; use START:STOP:POINTS with 0 < START < STOP")
    grid = np.geomspace(start, stop, int(points)).tolist()
    table = cap.capacity_curve(grid)
    if args.format == "json":
        _emit(args, "capacity.json", _dumps(table.to_dict()))
    else:
        _emit(args, "capacity.csv", table.to_csv())
    return EXIT_OK


def _monte_carlo_loss(seed: int, samples: int, eta: float = 0.76) -> dict:
    """Sample the beamsplitter loss model and compare with the closed form."""
    rng = np.random.default_rng(seed)
    v_in = np.array([0.5, 2.0])
    x_in = rng.normal(size=(samples, 2)) * np.sqrt(v_in)
    vac = rng.normal(size=(samples, 2))
    x_out = math.sqrt(eta) * x_in + math.sqrt(1.0 - eta) * vac
    predicted = eta * v_in + (1.0 - eta)
    sampled = x_out.var(axis=0)
    sigma = predicted * math.sqrt(2.0 / (samples - 1))
    z = np.abs(sampled - predicted) / sigma
    return {"seed": seed, "samples": samples, "predicted": predicted.tolist(), "sampled": sampled.tolist(), "max_z": float(z.max())}


def cmd_validate(args) -> int:
    cases = list(DEFAULT_SUITE)
    if args.alpha is not None:
        cases = [OracleSpec(args.alpha, r_h=args.r, label=f"alpha={args.alpha:g} r={args.r:g}")]
    if args.suspect:
        cases = [SUSPECT_CASE]
    rows, ok = [], True
    for spec in cases:
        try:
            report = oracle_compare(spec)
        except TruncationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_FAIL
        passed = report.passes(args.threshold)
        ok &= passed
        rows.append({**report.to_dict(), "passed": passed})
    out = {"threshold": args.threshold, "cases": rows}
    if args.commutators:
        residuals = commutator_residuals(args.commutators)
        out["commutators"] = {"cutoff": args.commutators, "residuals": residuals}
        ok &= max(residuals.values()) <= 1e-10
    if args.monte_carlo:
        mc = _monte_carlo_loss(args.seed, args.monte_carlo)
        out["monte_carlo_loss"] = mc
        ok &= mc["max_z"] <= 3.0
    out["passed"] = bool(ok)
    _emit(args, "validate.json", _dumps(out))
    return EXIT_OK if ok else EXIT_FAIL


def _global_flags(parser, defaults: bool) -> None:
    def default(value):
        return value if defaults else argparse.SUPPRESS

    parser.add_argument("--out", default=default(None), help="write files into this directory instead of stdout")
    parser.add_argument("--format", choices=("csv", "json"), default=default("csv"))
    parser.add_argument("--seed", type=int, default=default(20260101), help="seed for Monte-Carlo checks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvpol", description=__doc__.splitlines()[0])
    _global_flags(parser, defaults=True)
    # global flags are also accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, defaults=False)
    sub = parser.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    def state_flags(p):
        p.add_argument("--state", help="state JSON file")
        p.add_argument("--alpha-h", type=float, default=10.0)
        p.add_argument("--alpha-v", type=float, default=0.0)
        p.add_argument("--theta", type=float, default=0.0)

    p = sub.add_parser("means", help="Stokes means of a state")
    state_flags(p)
    p.set_defaults(func=cmd_means)
    p = sub.add_parser("variances", help="linearized Stokes variances of a state")
    state_flags(p)
    p.set_defaults(func=cmd_variances)

    p = sub.add_parser("spectrum", help="OPA quadrature spectra or scenario Stokes spectra")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", default="paper-amplitude", choices=preset_names())
    src.add_argument("--scenario", choices=sorted(SCENARIOS))
    p.add_argument("--lock", choices=("deamplification", "amplification"))
    p.add_argument("--grid", help="START:STOP:STEP in MHz")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("ellipsoid", help="Poincare-sphere noise ellipsoid")
    state_flags(p)
    p.add_argument("--scenario", choices=sorted(SCENARIOS))
    p.add_argument("--freq", type=float, default=SPOT_FREQUENCY_MHZ)
    p.add_argument("--absolute", action="store_true", help="do not normalize to shot noise")
    p.set_defaults(func=cmd_ellipsoid)

    p = sub.add_parser("scenario", help="named state-preparation scenario")
    p.add_argument("name", choices=sorted(SCENARIOS))
    p.add_argument("--freq", type=float, default=SPOT_FREQUENCY_MHZ, help="ellipsoid spot frequency (MHz)")
    p.add_argument("--grid", help="START:STOP:STEP in MHz")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("capacity", help="channel-capacity curves")
    p.add_argument("--grid", help="START:STOP:POINTS, log-spaced photon numbers")
    p.add_argument("--crossover", action="store_true")
    p.add_argument("--experimental", type=float, metavar="N_SQ")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("validate", help="linearized statistics against the Fock-space oracle")
    p.add_argument("--threshold", type=float, default=0.01, help="maximum relative deviation")
    p.add_argument("--alpha", type=float)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--suspect", action="store_true", help="run the low-photon linearization-suspect case")
    p.add_argument("--commutators", type=int, nargs="?", const=10, metavar="N")
    p.add_argument("--monte-carlo", type=int, nargs="?", const=1_000_000, metavar="SAMPLES")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"cvpol: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StateError, ValueError, OSError) as exc:
        print(f"cvpol: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
