"""File formats: lattice CSV, scattering JSON, quartet-spec JSON and the
prediction / comparison CSVs.

Floats are written with 17 significant digits so every file round-trips
bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
import re
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .lattice import LatticeState
from .scattering import ScatteringData
from .solitons import SolitonSpec
from .spectral import EigenQuartet

_HEADER = re.compile(r"#\s*t=(\S+)\s+n_min=(-?\d+)\s*$")


def fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


# -- lattice ---------------------------------------------------------------

def write_lattice(path, state: LatticeState) -> None:
    lines = [f"# t={fmt(state.time)} n_min={state.n_min}", "n,re,im"]
    for n, v in zip(state.sites, state.amplitudes):
        lines.append(f"{n},{fmt(v.real)},{fmt(v.imag)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_lattice(path) -> LatticeState:
    text = Path(path).read_text().splitlines()
    if not text:
        raise ConfigError(f"{path}: empty lattice file")
    m = _HEADER.match(text[0])
    if not m:
        raise ConfigError(f"{path}: first line must be '# t=<real> n_min=<int>'")
    t, n_min = float(m.group(1)), int(m.group(2))
    rows = [r for r in csv.reader(text[1:]) if r and not r[0].startswith("#")]
    if rows and rows[0][0].strip() == "n":
        rows = rows[1:]
    try:
        ns = [int(r[0]) for r in rows]
        vals = [complex(float(r[1]), float(r[2])) for r in rows]
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: malformed row ({exc})") from exc
    if ns != list(range(n_min, n_min + len(ns))):
        raise ConfigError(f"{path}: sites must be consecutive starting at n_min={n_min}")
    return LatticeState(n_min, np.array(vals), t)


# -- quartets and scattering data -------------------------------------------

def _quartet_dict(q: EigenQuartet) -> dict:
    return {"z_re": q.z.real, "z_im": q.z.imag, "C_re": q.C.real, "C_im": q.C.imag}


def _quartet_from(d: dict) -> EigenQuartet:
    try:
        return EigenQuartet(complex(d["z_re"], d["z_im"]), complex(d["C_re"], d["C_im"]))
    except KeyError as exc:
        raise ConfigError(f"quartet entry missing {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def scattering_to_dict(data: ScatteringData) -> dict:
    return {
        "n_samples": data.n_samples,
        "base_time": data.base_time,
        "c_inf": data.c_inf,
        "samples": [{"theta": th, "a_re": a.real, "a_im": a.imag, "b_re": b.real, "b_im": b.imag}
                    for th, a, b in zip(data.theta.tolist(), data.a.tolist(), data.b.tolist())],
        "quartets": [dict(_quartet_dict(q), tw=q.tw) for q in data.quartets],
        "diagnostics": data.diagnostics,
    }


def scattering_from_dict(d: dict) -> ScatteringData:
    samples = d["samples"]
    if len(samples) != int(d.get("n_samples", len(samples))):
        raise ConfigError("n_samples does not match the number of samples")
    a = np.array([complex(s["a_re"], s["a_im"]) for s in samples])
    b = np.array([complex(s["b_re"], s["b_im"]) for s in samples])
    quartets = tuple(_quartet_from(q) for q in d.get("quartets", []))
    return ScatteringData(a, b, quartets, float(d.get("c_inf", 1.0)),
                          float(d.get("base_time", 0.0)), dict(d.get("diagnostics", {})))


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def write_scattering(path, data: ScatteringData) -> None:
    write_json(path, scattering_to_dict(data))


def read_scattering(path) -> ScatteringData:
    try:
        return scattering_from_dict(json.loads(Path(path).read_text()))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: malformed scattering file ({exc})") from exc


def quartet_spec_to_dict(spec: SolitonSpec) -> dict:
    return {"quartets": [_quartet_dict(q) for q in spec.quartets],
            "t": spec.time, "n_min": spec.n_min, "n_max": spec.n_max}


def quartet_spec_from_dict(d: dict) -> SolitonSpec:
    try:
        return SolitonSpec(tuple(_quartet_from(q) for q in d["quartets"]),
                           int(d["n_min"]), int(d["n_max"]), float(d.get("t", 0.0)))
    except KeyError as exc:
        raise ConfigError(f"quartet spec missing {exc}") from exc


def read_quartet_spec(path) -> SolitonSpec:
    try:
        return quartet_spec_from_dict(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed quartet spec ({exc})") from exc


def write_quartet_spec(path, spec: SolitonSpec) -> None:
    write_json(path, quartet_spec_to_dict(spec))


# -- tables ----------------------------------------------------------------

PREDICTION_COLUMNS = ("n", "t", "region", "re_pred", "im_pred", "envelope", "order")


def prediction_row(p) -> list:
    value = p.value if p.value is not None else complex(math.nan, math.nan)
    env = p.envelope if p.envelope is not None else math.nan
    return [str(p.n), fmt(p.t), str(p.region), fmt(value.real), fmt(value.imag), fmt(env), fmt(p.order)]


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_predictions(path, predictions) -> None:
    write_rows(path, PREDICTION_COLUMNS, [prediction_row(p) for p in predictions])
