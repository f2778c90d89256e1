"""Command-line entry point: ``idnls <subcommand> ...``.

Exit codes: 0 success, 1 configuration or I/O error, 2 a generic spectral
assumption failed, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .asymptotics import PredictorParams, predict
from .errors import AssumptionViolated, ConfigError, IDNLSError
from .harness import ExperimentConfig, fit_power_law, run
from .lattice import IntegratorConfig, integrate
from .scattering import ScatteringConfig, compute_ab, find_eigenvalues, scatter
from .solitons import build_three_site, synthesize_reflectionless

log = logging.getLogger("idnls")


def parse_complex(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"not a complex number: {text!r}") from exc


def _emit(line: str) -> None:
    sys.stdout.write(line + "\n")


def cmd_simulate(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    state = cfg.initial_data.build(cfg.seed)
    icfg = IntegratorConfig(cfg.integrator.dt, cfg.integrator.tail_tol, cfg.integrator.tail_guard, cfg.times)
    snaps = integrate(state, icfg)
    out = Path(cfg.out_dir) / "snapshots"
    out.mkdir(parents=True, exist_ok=True)
    for s in snaps:
        io.write_lattice(out / f"t_{io.fmt(s.time)}.csv", s)
    _emit("t,drift")
    for s, d in zip(snaps, snaps.drift):
        _emit(f"{io.fmt(s.time)},{io.fmt(d)}")
    return 0


def cmd_scatter(args) -> int:
    state = io.read_lattice(args.state)
    data = scatter(state, args.n, ScatteringConfig(d=args.d))
    io.write_scattering(args.out, data)
    _emit("z_re,z_im,C_re,C_im,tw")
    for q in data.quartets:
        _emit(",".join(io.fmt(v) for v in (q.z.real, q.z.imag, q.C.real, q.C.imag, q.tw)))
    return 0


def cmd_synth(args) -> int:
    spec = io.read_quartet_spec(args.spec)
    io.write_lattice(args.out, synthesize_reflectionless(spec))
    return 0


def cmd_predict(args) -> int:
    data = io.read_scattering(args.scattering)
    params = PredictorParams(d=args.d, V0=args.V0, M=args.M, t_min=args.t_min, envelope_k=args.K)
    preds = [predict(n, args.t, data, params) for n in args.n]
    if args.out:
        io.write_predictions(args.out, preds)
    _emit(",".join(io.PREDICTION_COLUMNS))
    for p in preds:
        _emit(",".join(io.prediction_row(p)))
    return 0


def cmd_compare(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    result = run(cfg)
    for f in result.files:
        _emit(f)
    return result.status


def cmd_appendix(args) -> int:
    x1, x2 = parse_complex(args.x1), parse_complex(args.x2)
    state, closed = build_three_site(x1, x2)
    theta = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    zs = np.concatenate([np.exp(1j * theta), 1.7 * np.exp(1j * theta)])
    err = max(abs(compute_ab(z, state)[0] - closed(z)) for z in zs)
    report = {
        "x1": [x1.real, x1.imag],
        "x2": [x2.real, x2.imag],
        "R": [[v.real, v.imag] for v in state.amplitudes],
        "max_abs_a_minus_closed_form": err,
    }
    try:
        report["eigenvalues"] = [[z.real, z.imag] for z in find_eigenvalues(state)]
    except AssumptionViolated:
        report["eigenvalues"] = None
    try:
        scatter(state)
        report["assumption"] = "ok"
    except AssumptionViolated as exc:
        report["assumption"] = exc.kind
    io.write_json(args.out, report)
    _emit(f"max_abs_a_minus_closed_form,{io.fmt(err)}")
    _emit(f"assumption,{report['assumption']}")
    return 0


def cmd_fit(args) -> int:
    try:
        with open(args.csv, newline="") as fh:
            rows = list(csv.DictReader(fh))
        pts = [(float(r[args.xcol]), float(r[args.ycol])) for r in rows]
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{args.csv}: cannot read columns {args.xcol}, {args.ycol} ({exc})") from exc
    slope, r2 = fit_power_law(pts)
    _emit("exponent,r_squared")
    _emit(f"{io.fmt(slope)},{io.fmt(r2)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="idnls", description="Ablowitz-Ladik lattice simulation, "
                                "scattering and long-time asymptotics")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="integrate the initial data of an experiment config")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("scatter", help="scattering data of a lattice CSV")
    s.add_argument("--state", required=True)
    s.add_argument("--n", type=int, default=512, help="number of circle samples (power of two)")
    s.add_argument("--d", type=float, default=0.05, help="velocity separation half-width")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_scatter)

    s = sub.add_parser("synth", help="reflectionless state from a quartet spec")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("predict", help="asymptotic prediction at (n, t)")
    s.add_argument("--scattering", required=True)
    s.add_argument("--n", type=int, nargs="+", required=True)
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--d", type=float, default=0.05)
    s.add_argument("--V0", type=float, default=0.2)
    s.add_argument("--M", type=float, default=2.0)
    s.add_argument("--t-min", dest="t_min", type=float, default=5.0)
    s.add_argument("--K", type=float, default=1.0, help="solitonless envelope constant")
    s.add_argument("--out")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("compare", help="full simulate/scatter/predict/compare pipeline")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("appendix", help="three-site state with a(z) = z^-4 (z^2 - x1)(z^2 - x2)")
    s.add_argument("--x1", required=True)
    s.add_argument("--x2", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_appendix)

    s = sub.add_parser("fit", help="power-law exponent of two CSV columns")
    s.add_argument("--csv", required=True)
    s.add_argument("--xcol", default="t")
    s.add_argument("--ycol", default="abs_err")
    s.set_defaults(func=cmd_fit)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except IDNLSError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
