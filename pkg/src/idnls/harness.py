"""Experiment pipeline: build initial data, integrate, scatter, predict and
compare, plus the measurement helpers used on simulated snapshots."""

from __future__ import annotations

import cmath
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .asymptotics import PredictorParams, T_infinity, blaschke_T, classify_region, predict
from .errors import ConfigError, DegenerateFit, NoPeak
from .lattice import IntegratorConfig, LatticeState, integrate
from .scattering import ScatteringConfig, ScatteringData, scatter
from .solitons import SolitonSpec, bright_soliton, soliton_center, synthesize_reflectionless
from .spectral import EigenQuartet

log = logging.getLogger(__name__)

# -- initial data ----------------------------------------------------------

def gaussian(amplitude: float = 0.3, width: float = 1.0, chirp: float = 0.0,
             n_min: int = -100, n_max: int = 100, center: float = 0.0) -> LatticeState:
    """R_n = amplitude exp(-(n - center)^2 / (2 width^2) + i chirp (n - center)^2)."""
    if not width > 0:
        raise ConfigError("gaussian width must be positive")
    x = np.arange(n_min, n_max + 1) - center
    R = amplitude * np.exp(-0.5 * (x / width) ** 2 + 1j * chirp * x * x)
    return LatticeState(n_min, R, 0.0)


def bs_plus_noise(quartet: EigenQuartet, noise_amp: float, seed: int,
                  n_min: int = -100, n_max: int = 100, noise_width: float = 4.0) -> LatticeState:
    """Bright soliton at t = 0 plus complex gaussian noise under a gaussian
    envelope of width ``noise_width`` centred on the soliton, so the tails
    of the window stay clean."""
    n = np.arange(n_min, n_max + 1)
    bs = bright_soliton(n, 0.0, quartet.z, quartet.C)
    c = float(np.round(np.argmax(np.abs(bs)) + n_min))
    rng = np.random.default_rng(seed)
    eta = rng.standard_normal(n.size) + 1j * rng.standard_normal(n.size)
    env = np.exp(-0.5 * ((n - c) / noise_width) ** 2)
    return LatticeState(n_min, bs + noise_amp * env * eta / math.sqrt(2), 0.0)


@dataclass(frozen=True)
class InitialData:
    """One of ``quartets`` (path or inline spec), ``lattice`` (path),
    ``gaussian`` or ``bs_plus_noise``; ``params`` holds the keyword
    arguments of the chosen source."""

    kind: str
    params: dict = field(default_factory=dict)

    KINDS = ("quartets", "lattice", "gaussian", "bs_plus_noise")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigError(f"initial_data kind must be one of {self.KINDS}, got {self.kind!r}")

    def build(self, seed: int) -> LatticeState:
        p = dict(self.params)
        if self.kind == "gaussian":
            return gaussian(**p)
        if self.kind == "bs_plus_noise":
            q = p.pop("quartet")
            q = q if isinstance(q, EigenQuartet) else EigenQuartet(
                complex(q["z_re"], q["z_im"]), complex(q.get("C_re", 1.0), q.get("C_im", 0.0)))
            return bs_plus_noise(q, seed=p.pop("seed", seed), **p)
        if self.kind == "lattice":
            return io.read_lattice(p["path"])
        spec = io.read_quartet_spec(p["path"]) if "path" in p else io.quartet_spec_from_dict(p)
        return synthesize_reflectionless(SolitonSpec(spec.quartets, spec.n_min, spec.n_max, 0.0))


@dataclass(frozen=True)
class ExperimentConfig:
    initial_data: InitialData
    integrator: IntegratorConfig = IntegratorConfig()
    scattering_N: int = 512
    rays: tuple = (0.0,)
    times: tuple = (20.0, 40.0, 60.0, 80.0, 100.0)
    params: PredictorParams = PredictorParams()
    out_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if not times or any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError("times must be a nonempty increasing list")
        if times[0] < self.params.t_min:
            raise ConfigError(f"times must be >= t_min = {self.params.t_min}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "rays", tuple(float(r) for r in self.rays))
        if self.integrator.snapshot_times and tuple(self.integrator.snapshot_times) != times:
            raise ConfigError("integrator.snapshot_times, if given, must equal times")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            init = d["initial_data"]
            initial = InitialData(init["kind"], {k: v for k, v in init.items() if k != "kind"})
            params = PredictorParams(**d.get("params", {}))
            integ = IntegratorConfig(**d.get("integrator", {}))
            return cls(initial, integ, int(d.get("scattering_N", 512)), tuple(d.get("rays", (0.0,))),
                       tuple(d.get("times", cls.times)), params, str(d.get("out_dir", "out")),
                       int(d.get("seed", 0)))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad experiment config: {exc}") from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc


# -- comparison ------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRecord:
    """Simulated vs predicted R_n(t). Solitonless regions carry only an
    envelope; their ``abs_err`` is |R_n| itself (the leading term is not
    computed) and ``rel_err`` is |R_n| / envelope."""

    n: int
    t: float
    ray: float
    region: str
    sim: complex
    pred: complex | None
    envelope: float
    abs_err: float
    rel_err: float

    COLUMNS = ("n", "t", "ray", "region", "sim_re", "sim_im", "pred_re", "pred_im",
               "envelope", "abs_err", "rel_err")

    def row(self) -> list:
        pred = self.pred if self.pred is not None else complex(math.nan, math.nan)
        f = io.fmt
        return [str(self.n), f(self.t), f(self.ray), self.region, f(self.sim.real), f(self.sim.imag),
                f(pred.real), f(pred.imag), f(self.envelope), f(self.abs_err), f(self.rel_err)]


def compare(snapshot: LatticeState, n: int, ray: float, data: ScatteringData,
            params: PredictorParams) -> ComparisonRecord:
    p = predict(n, snapshot.time, data, params)
    sim = snapshot.at(n)
    if p.region.soliton or p.region.kind == "Exterior":
        err = abs(sim - p.value)
        scale = abs(p.value)
    else:
        err = abs(sim)
        scale = p.envelope
    rel = err / scale if scale > 0 else math.inf
    return ComparisonRecord(n, snapshot.time, ray, str(p.region), sim, p.value,
                            float(p.envelope), float(err), float(rel))


# -- measurements ------------------------------------------------------------

@dataclass(frozen=True)
class PeakMeasurement:
    t: float
    center: float
    amplitude: float
    carrier_phase: float
    velocity_fit: float = math.nan
    site: int = 0


def _three_point_peak(ym: float, y0: float, yp: float) -> tuple[float, float]:
    """Offset and height of the peak through three samples at -1, 0, 1.

    A sech profile A sech(k (n - c)) has u = 1/|R| obeying
    u(-1) + u(1) = 2 cosh(k) u(0), which pins k, c and A exactly. Samples
    that do not fit that shape fall back to a parabola through |R|^2.
    """
    if ym > 0 and yp > 0:
        um, u0, up = 1 / ym, 1 / y0, 1 / yp
        ch = 0.5 * (um + up) / u0
        if ch > 1:
            kappa = math.acosh(ch)
            x = math.atanh(max(-1.0, min(1.0, (up - um) / (2 * u0 * math.sinh(kappa)))))
            return -x / kappa, math.cosh(x) / u0
    qm, q0, qp = ym**2, y0**2, yp**2
    curv = qm - 2 * q0 + qp
    off = 0.5 * (qm - qp) / curv if curv < 0 else 0.0
    return off, math.sqrt(max(q0 - 0.25 * (qm - qp) * off, 0.0))


def track_peak(snapshot: LatticeState, hint: float, previous: PeakMeasurement | None = None,
               reach: int = 10) -> PeakMeasurement:
    """Local maximum of |R_n| within ``reach`` sites of ``hint``, refined to
    sub-grid precision from the three samples around it. The carrier phase
    is arg R at the peak site, unwrapped against ``previous`` when given."""
    amp = np.abs(snapshot.amplitudes)
    lo = max(int(math.floor(hint)) - reach, snapshot.n_min + 1)
    hi = min(int(math.ceil(hint)) + reach, snapshot.n_max - 1)
    if hi < lo:
        raise NoPeak(f"hint {hint} is outside the window")
    idx = np.arange(lo, hi + 1) - snapshot.n_min
    k = int(idx[np.argmax(amp[idx])])
    if amp[k] <= 0 or amp[k] < amp[k - 1] or amp[k] < amp[k + 1]:
        raise NoPeak(f"no local maximum of |R_n| within {reach} sites of {hint}")
    off, peak = _three_point_peak(amp[k - 1], amp[k], amp[k + 1])
    site = k + snapshot.n_min
    phase = cmath.phase(snapshot.amplitudes[k])
    if previous is not None:
        phase += 2 * math.pi * round((previous.carrier_phase - phase) / (2 * math.pi))
    return PeakMeasurement(snapshot.time, site + off, peak, phase, math.nan, site)


def track_series(snapshots, hint: float, velocity: float = 0.0, reach: int = 10) -> list[PeakMeasurement]:
    """Follow one peak through a list of snapshots; ``velocity`` seeds the
    extrapolated hint. Every entry gets the least-squares velocity of the
    whole series."""
    out: list[PeakMeasurement] = []
    for snap in snapshots:
        if out:
            dt = snap.time - out[-1].t
            v = velocity if len(out) < 2 else (out[-1].center - out[-2].center) / (out[-1].t - out[-2].t)
            hint = out[-1].center + v * dt
        out.append(track_peak(snap, hint, out[-1] if out else None, reach))
    if len(out) >= 2:
        v = float(np.polyfit([p.t for p in out], [p.center for p in out], 1)[0])
        out = [PeakMeasurement(p.t, p.center, p.amplitude, p.carrier_phase, v, p.site) for p in out]
    return out


def fit_power_law(points) -> tuple[float, float]:
    """Least-squares slope of log(err) against log(t), with r^2."""
    pts = [(float(t), float(e)) for t, e in points]
    if len(pts) < 5:
        raise DegenerateFit(f"need at least 5 points, got {len(pts)}")
    if any(not (t > 0 and e > 0) or not (math.isfinite(t) and math.isfinite(e)) for t, e in pts):
        raise DegenerateFit("all points must be positive and finite")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    if np.ptp(x) == 0:
        raise DegenerateFit("all abscissae are equal")
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss = float(np.sum((y - y.mean()) ** 2))
    # a flat series is fitted perfectly by slope 0; do not divide roundoff by roundoff
    flat = ss <= 1e-24 * y.size * max(1.0, float(np.max(y * y)))
    r2 = 1.0 if flat else 1.0 - float(np.sum(resid**2)) / ss
    return float(slope), r2


def _wrap(x: float) -> float:
    return (x + math.pi) % (2 * math.pi) - math.pi


def carrier_offsets(series, quartet: EigenQuartet) -> np.ndarray:
    """arg C implied by each measurement: the BS carrier is
    arg C - 2 beta (n + 1) + 2 w t, so this removes the known drift."""
    w = math.cosh(2 * quartet.alpha) * math.cos(2 * quartet.beta) - 1
    return np.array([p.carrier_phase + 2 * quartet.beta * (p.site + 1) - 2 * w * p.t for p in series])


def collision_time(q1: EigenQuartet, q2: EigenQuartet) -> float:
    """Time at which the free-soliton centers of two quartets coincide."""
    if q1.tw == q2.tw:
        raise ConfigError("solitons with equal velocity never collide")
    c1, c2 = soliton_center(0.0, q1.z, q1.C), soliton_center(0.0, q2.z, q2.C)
    return (c2 - c1) / (q1.tw - q2.tw)


def split_at_collision(snapshots, t_collision: float, blackout: float) -> tuple[list, list]:
    """Snapshots before and after a collision, dropping those within
    ``blackout`` of it (the peaks may merge there)."""
    if blackout < 0:
        raise ConfigError("blackout must be non-negative")
    pre = [s for s in snapshots if s.time < t_collision - blackout]
    post = [s for s in snapshots if s.time > t_collision + blackout]
    if not pre or not post:
        raise DegenerateFit(f"no snapshots on one side of the collision at t = {t_collision:.3f}")
    return pre, post


def measure_phase_shift(pre, post, quartet: EigenQuartet) -> tuple[float, float]:
    """Center and carrier shifts between two tracked series of one soliton.

    Centers are fitted linearly and compared at the midpoint time between
    the series; carrier offsets are averaged on the circle.
    """
    if len(pre) < 2 or len(post) < 2:
        raise DegenerateFit("each series needs at least 2 measurements")
    tp, cp = [p.t for p in pre], [p.center for p in pre]
    tq, cq = [p.t for p in post], [p.center for p in post]
    if np.ptp(tp) == 0 or np.ptp(tq) == 0:
        raise DegenerateFit("each series needs distinct times")
    t_ref = 0.5 * (max(tp) + min(tq))
    fa = np.polyfit(tp, cp, 1)
    fb = np.polyfit(tq, cq, 1)
    center_shift = float(np.polyval(fb, t_ref) - np.polyval(fa, t_ref))
    mean_pre = cmath.phase(np.mean(np.exp(1j * carrier_offsets(pre, quartet))))
    mean_post = cmath.phase(np.mean(np.exp(1j * carrier_offsets(post, quartet))))
    return center_shift, _wrap(mean_post - mean_pre)


def predicted_phase_shift(quartets, s: int) -> tuple[float, float]:
    """Center and carrier shifts of soliton ``s`` through a full collision.

    Long before the collision the slower solitons are ahead of it and
    multiply C_s by p T(z_s)^-2 over that set; long after, the faster ones
    are. The shift is the ratio of the two factors.
    """
    qs = sorted(quartets, key=lambda q: q.tw)
    slower = tuple(range(s))
    faster = tuple(range(s + 1, len(qs)))

    def factor(S):
        T = blaschke_T(qs[s].z, qs, S)
        p = blaschke_T(0, qs, S) * T_infinity(qs, S)
        return p * T**-2

    ratio = factor(faster) / factor(slower)
    return math.log(abs(ratio)) / (2 * qs[s].alpha), cmath.phase(ratio)


# -- pipeline ----------------------------------------------------------------

@dataclass
class RunResult:
    status: int
    files: list
    records: list
    data: ScatteringData
    summary: dict


def run(config: ExperimentConfig) -> RunResult:
    """Simulate, scatter, predict and compare; write snapshots, scattering
    JSON, comparison CSV and a summary JSON into ``config.out_dir``."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = config.params
    # every (ray, time) must classify before any work is done
    probe = ScatteringData(np.ones(8, complex), np.zeros(8, complex))
    for t in config.times:
        for ray in config.rays:
            classify_region(int(round(ray * t)), t, probe, params.d, params.V0, params.M)

    state = config.initial_data.build(config.seed)
    data = scatter(state, config.scattering_N, ScatteringConfig(d=params.d))
    if config.initial_data.kind == "gaussian" and data.quartets:
        log.warning("gaussian initial data carries %d soliton(s); it is not solitonless",
                    len(data.quartets))
    icfg = IntegratorConfig(config.integrator.dt, config.integrator.tail_tol,
                            config.integrator.tail_guard, config.times)
    snaps = integrate(state, icfg)

    files = []
    io.write_lattice(out / "initial.csv", state)
    files.append(out / "initial.csv")
    snap_dir = out / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    for s in snaps:
        p = snap_dir / f"t_{io.fmt(s.time)}.csv"
        io.write_lattice(p, s)
        files.append(p)
    io.write_scattering(out / "scattering.json", data)
    files.append(out / "scattering.json")

    records = []
    for snap in snaps:
        for ray in config.rays:
            n = int(round(ray * snap.time))
            records.append(compare(snap, n, ray, data, params))
    io.write_rows(out / "comparison.csv", ComparisonRecord.COLUMNS, [r.row() for r in records])
    files.append(out / "comparison.csv")

    fits = {}
    for ray in config.rays:
        pts = [(r.t, r.abs_err) for r in records if r.ray == ray]
        try:
            slope, r2 = fit_power_law(pts)
            # fitted envelope constant K in err ~ K t^slope; a diagnostic only
            K = math.exp(float(np.mean(np.log([e for _, e in pts]) - slope * np.log([t for t, _ in pts]))))
            fits[io.fmt(ray)] = {"exponent": slope, "r_squared": r2, "prefactor": K}
        except DegenerateFit as exc:
            fits[io.fmt(ray)] = {"error": str(exc)}
    summary = {
        "seed": config.seed,
        "c_inf": data.c_inf,
        "max_drift": snaps.max_drift,
        "quartets": [{"z_re": q.z.real, "z_im": q.z.imag, "C_re": q.C.real, "C_im": q.C.imag,
                      "tw": q.tw} for q in data.quartets],
        "diagnostics": data.diagnostics,
        "regions": sorted({r.region for r in records}),
        "max_abs_err": max((r.abs_err for r in records), default=0.0),
        "fits": fits,
    }
    io.write_json(out / "summary.json", summary)
    files.append(out / "summary.json")
    return RunResult(0, [str(f) for f in files], records, data, summary)
