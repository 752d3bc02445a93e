"""Command-line interface.

Exit codes: 0 success, 1 validation-suite or fixture failure, 2 invalid
input, 3 numerical failure.  Times given on the command line (``--tmax``,
``--t-eval``) are in units of ``1/G01``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analytic2
from .distances import ALL_MEASURES, Measure
from .errors import NumericalError, ValidationError
from .lindblad import decompose_system
from .phasemap import SweepSpec, sweep
from .quench import (
    DEFAULT_T_EVAL,
    classify,
    coherence_locus,
    coherent_partner,
    find_equidistant_pair,
    regime_report,
    run_quench,
)
from .system import CoherentInitialSpec, LevelSystem, coherent_state, thermal_state

EXIT_OK, EXIT_SUITE, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


def _positive(kind):
    def parse(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not (math.isfinite(value) and value > 0):
            raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
        return value
    return parse


def _finite(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if math.isnan(value):
        raise argparse.ArgumentTypeError("NaN is not allowed")
    return value


def _measures(text):
    try:
        out = Measure.parse_list(text)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not out:
        raise argparse.ArgumentTypeError("empty measure list")
    return out


def parse_grid(text: str):
    """``XMIN:XMAX:NX,YMIN:YMAX:NY`` -> ``((xmin, xmax), nx, (ymin, ymax), ny)``."""
    try:
        xs, ys = text.split(",")
        x0, x1, nx = xs.split(":")
        y0, y1, ny = ys.split(":")
        return (float(x0), float(x1)), int(nx), (float(y0), float(y1)), int(ny)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"grid must look like XMIN:XMAX:NX,YMIN:YMAX:NY, got {text!r}") from None


def _pairing(text: str):
    text = text.strip().lower()
    if text == "per-measure":
        return None
    if text.startswith("fixed-"):
        try:
            return Measure.parse(text[len("fixed-"):])
        except ValidationError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    raise argparse.ArgumentTypeError("pairing must be per-measure or fixed-<measure>")


def load_system(path) -> LevelSystem:
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"system file {str(p)!r} does not exist")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"system file {str(p)!r} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ValidationError("system file must contain a JSON object")
    return LevelSystem.from_json(data)


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


def cmd_evolve(args) -> int:
    system = load_system(args.system)
    beta0 = system.beta if args.beta0 is None else args.beta0
    spec = CoherentInitialSpec(beta0, args.r, args.phi)
    if spec.r > 0 or spec.phi:
        rho0 = coherent_state(system, spec)
    else:
        rho0 = thermal_state(system, beta0)
    out = _out_dir(args.out)
    t_max = args.tmax / system.time_unit_rate
    dec = decompose_system(system)
    payload, lines = {}, []
    for m in args.measure:
        rec = run_quench(system, rho0, m, t_max, args.samples, label=f"beta0={beta0!r}", dec=dec)
        path = out / f"evolve_{m.value}.csv"
        rec.to_csv(path)
        payload[m.value] = {"path": str(path), "initial": float(rec.distances[0]),
                            "final": float(rec.distances[-1])}
        lines.append(f"{m.value}: D(0)={rec.distances[0]:.6g} D(tmax)={rec.distances[-1]:.6g} -> {path}")
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_equidistant(args) -> int:
    system = load_system(args.system)
    out = _out_dir(args.out)
    payload, lines = {}, []
    for m in args.measure:
        pair = find_equidistant_pair(system, m, args.distance)
        entry = {"beta0_hot": pair.beta0_hot, "beta0_cold": pair.beta0_cold}
        line = f"{m.value}: beta0_hot={pair.beta0_hot:.6f} beta0_cold={pair.beta0_cold:.6f}"
        if system.n == 2:
            grid = np.linspace(pair.beta0_hot, pair.beta0_cold, args.samples)
            locus = coherence_locus(system, m, args.distance, grid)
            path = out / f"locus_{m.value}.csv"
            path.write_text("beta0,r\n" + "".join(
                f"{format(b, '.17g')},{format(r, '.17g')}\n" for b, r in locus))
            entry["r_coherent"] = coherent_partner(system, m, args.distance)
            entry["locus_path"] = str(path)
            line += f" r(beta0=beta)={entry['r_coherent']:.6f} locus -> {path}"
        payload[m.value] = entry
        lines.append(line)
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_quench_compare(args) -> int:
    system = load_system(args.system)
    out = _out_dir(args.out)
    t_eval = args.t_eval / system.time_unit_rate
    t_max = args.tmax / system.time_unit_rate
    dec = decompose_system(system)
    payload, lines = {}, []
    for m in args.measure:
        pair = find_equidistant_pair(system, m, args.distance)
        verdict = classify(system, pair, m, t_eval, dec=dec)
        for side, b0 in (("uphill", pair.beta0_cold), ("downhill", pair.beta0_hot)):
            rec = run_quench(system, thermal_state(system, b0), m, t_max, args.samples, side, dec)
            rec.to_csv(out / f"quench_{m.value}_{side}.csv")
        entry = {"verdict": verdict.kind.value, "gap": verdict.gap,
                 "d_uphill": verdict.d_uphill, "d_downhill": verdict.d_downhill,
                 "beta0_hot": pair.beta0_hot, "beta0_cold": pair.beta0_cold}
        lines.append(f"{m.value}: {verdict.kind.value} (gap {verdict.gap:.3e} at tG01={args.t_eval:g})")
        if system.n == 2 and m in (Measure.KL, Measure.TRACE):
            gamma01 = system.rates[(0, 1)]
            p = analytic2.TwoLevelParams(omega0=system.omega0, beta=system.beta,
                                         gamma01=gamma01, dephasing=system.dephasing)
            rep = regime_report(p, args.distance, m, args.t_eval)
            for label, (b0, r) in rep.candidates.items():
                rho0 = coherent_state(system, CoherentInitialSpec(b0, r))
                rec = run_quench(system, rho0, m, t_max, args.samples, label, dec)
                rec.to_csv(out / f"quench_{m.value}_{label}.csv")
            entry["regime"] = {
                "regime": rep.regime, "delta_c": rep.delta_c,
                "candidates": {k: list(v) for k, v in rep.candidates.items()},
                "predicted": sorted(rep.predicted), "fastest": sorted(rep.fastest),
                "simulated": rep.simulated, "agrees": rep.agrees,
            }
            lines.append(f"  dephasing {rep.regime} critical ({rep.delta_c:.5f}): "
                         f"predicted {sorted(rep.predicted)} fastest {sorted(rep.fastest)} "
                         f"{'agree' if rep.agrees else 'DISAGREE'}")
        payload[m.value] = entry
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_phase_diagram(args) -> int:
    energies, beta = (0.0, 1.0, 2.0), 1.0
    if args.system is not None:
        system = load_system(args.system)
        energies, beta = system.energies, system.beta
    x_range, nx, y_range, ny = args.grid
    spec = SweepSpec(energies=tuple(energies), beta=beta, x_range=x_range, nx=nx,
                     y_range=y_range, ny=ny, target=args.distance,
                     measures=tuple(args.measure or ALL_MEASURES),
                     fixed_pair=args.pairing, t_eval=args.t_eval)
    if args.jobs < 1:
        raise ValidationError("--jobs must be >= 1")
    out = _out_dir(args.out)
    diagram = sweep(spec, jobs=args.jobs)
    diagram.to_csv(out / "phase_diagram.csv")
    diagram.boundaries_to_csv(out / "boundaries.csv")
    if args.svg:
        diagram.to_svg(out / "phase_diagram.svg")
    counts: dict[str, dict[str, int]] = {}
    for c in diagram.cells:
        for m in spec.measures:
            kind = "Error" if c.error else c.verdicts[m].kind.value
            counts.setdefault(m.value, {}).setdefault(kind, 0)
            counts[m.value][kind] += 1
    payload = {
        "unanimity": diagram.unanimity(),
        "counts": counts,
        "pairs": {m.value: [p.beta0_hot, p.beta0_cold] for m, p in diagram.pairs.items()},
        "cells": [{"x": c.x, "y": c.y, "error": c.error,
                   "verdicts": {m.value: v.kind.value for m, v in c.verdicts.items()}}
                  for c in diagram.cells],
    }
    lines = [f"{nx}x{ny} cells -> {out / 'phase_diagram.csv'}",
             f"unanimity (all measures agree): {diagram.unanimity():.5f}"]
    lines += [f"  {m}: {dict(sorted(c.items()))}" for m, c in counts.items()]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validate import format_report, run_validation

    results = run_validation(args.seed)
    if args.json:
        print(json.dumps([r.__dict__ for r in results], indent=2))
    else:
        print(format_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_SUITE


def cmd_fixtures(args) -> int:
    from .repro import format_table, run_fixtures

    results = run_fixtures(args.file)
    print(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_SUITE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="equiquench",
        description="Thermal relaxation of few-level open quantum systems from equidistant initial states.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, system_required=True, measure_default=(Measure.KL,)):
        p.add_argument("--system", required=system_required, metavar="PATH",
                       help="JSON system description")
        p.add_argument("--measure", type=_measures, default=list(measure_default) if measure_default else None,
                       metavar="LIST", help="comma-separated subset of kl,trace,revkl,symkl")
        p.add_argument("--out", default=".", metavar="DIR", help="output directory")
        p.add_argument("--json", action="store_true", help="print a JSON summary")

    p = sub.add_parser("evolve", help="distance from equilibrium along one relaxation")
    common(p)
    p.add_argument("--beta0", type=_finite, default=None, help="initial inverse temperature")
    p.add_argument("--r", type=_finite, default=0.0, help="initial coherence modulus (two-level)")
    p.add_argument("--phi", type=_finite, default=0.0, help="initial coherence phase")
    p.add_argument("--tmax", type=_positive(float), default=10.0)
    p.add_argument("--samples", type=_positive(int), default=200)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("equidistant", help="thermal pair (and coherent locus) at distance D*")
    common(p)
    p.add_argument("--distance", type=_positive(float), default=0.1, metavar="D*")
    p.add_argument("--samples", type=_positive(int), default=101, help="locus grid size")
    p.set_defaults(func=cmd_equidistant)

    p = sub.add_parser("quench-compare", help="uphill vs downhill verdict and regime check")
    common(p)
    p.add_argument("--distance", type=_positive(float), default=0.1, metavar="D*")
    p.add_argument("--t-eval", type=_positive(float), default=DEFAULT_T_EVAL)
    p.add_argument("--tmax", type=_positive(float), default=10.0)
    p.add_argument("--samples", type=_positive(int), default=200)
    p.set_defaults(func=cmd_quench_compare)

    p = sub.add_parser("phase-diagram", help="three-level verdict map over (G02/G01, G12/G01)")
    common(p, system_required=False, measure_default=None)
    p.add_argument("--distance", type=_positive(float), default=0.1, metavar="D*")
    p.add_argument("--t-eval", type=_positive(float), default=DEFAULT_T_EVAL)
    p.add_argument("--grid", type=parse_grid, default=parse_grid("0:3:61,0:3:61"),
                   metavar="XMIN:XMAX:NX,YMIN:YMAX:NY")
    p.add_argument("--pairing", type=_pairing, default=None,
                   metavar="per-measure|fixed-kl", help="which measure fixes the initial pair")
    p.add_argument("--jobs", type=int, default=1, metavar="K")
    p.add_argument("--svg", action="store_true", help="also render phase_diagram.svg")
    p.set_defaults(func=cmd_phase_diagram)

    p = sub.add_parser("validate", help="run the oracle suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("fixtures", help="run the reproduction fixtures")
    p.add_argument("--file", default=None, metavar="PATH", help="fixture JSON (default: bundled)")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
