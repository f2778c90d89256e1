"""Long-time asymptotic predictions for R_n(t).

Everything here is evaluated from scattering data at t = 0: the saddle-point
geometry of the phase ``i t (z - 1/z)^2 / 2 - n log z``, the scalar factor
``delta`` built from ``log(1 + |r|^2)`` on the two arcs between saddle points,
the Blaschke-type product ``T`` over faster solitons, and the resulting
modified norming constant that is fed back into the bright soliton.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AmbiguousRegion, ArcCollision, ConfigError, OutOfRange, PoleHit
from .scattering import ScatteringData
from .solitons import bright_soliton
from .spectral import EigenQuartet

GL_NODES = 16


@dataclass(frozen=True)
class PhaseGeometry:
    xi: float
    A: complex
    saddles: tuple

    @property
    def arcs(self) -> tuple:
        """Counterclockwise angular intervals (start, end) of arcs S1->S2 and S3->S4."""
        s1, s2 = self.saddles[0], self.saddles[1]
        p1 = cmath.phase(s1)
        span = (cmath.phase(s2) - p1) % (2 * math.pi)
        return ((p1, p1 + span), (p1 + math.pi, p1 + math.pi + span))


def saddle_points(xi: float) -> PhaseGeometry:
    """The four stationary points on |z| = 1 for the ray n/t = xi, |xi| < 2."""
    xi = float(xi)
    if not abs(xi) < 2:
        raise OutOfRange(f"saddle points exist only for |n/t| < 2, got {xi}")
    A = 0.5 * complex(math.sqrt(2 + xi), -math.sqrt(2 - xi))
    rot = cmath.exp(-0.25j * math.pi)
    s1, s2 = rot * A, rot * A.conjugate()
    return PhaseGeometry(xi, A, (s1, s2, -s1, -s2))


def phase_re_at_eigenvalue(q: EigenQuartet, n: int, t: float) -> float:
    """Re phi(z_j) = alpha_j t (tw_j - n/t)."""
    if not t > 0:
        raise ConfigError("t must be positive")
    return q.alpha * t * (q.tw - n / t)


def phase_at(z: complex, n: int, t: float) -> complex:
    """phi(z; n, t) = i t (z - 1/z)^2 / 2 - n log z, principal log."""
    z = complex(z)
    return 0.5j * t * (z - 1 / z) ** 2 - n * cmath.log(z)


# -- delta -----------------------------------------------------------------

@lru_cache(maxsize=None)
def _gl(m: int = GL_NODES):
    x, w = np.polynomial.legendre.leggauss(m)
    return x, w


def _log_weight(data: ScatteringData, phis: np.ndarray) -> np.ndarray:
    r = data.r_at(phis)
    return np.log1p(r.real**2 + r.imag**2)


def _adaptive_arc(func, lo: float, hi: float, tol: float, max_panels: int = 20000) -> complex:
    """Composite Gauss-Legendre with panel bisection: a panel is accepted
    when its 16-node value matches the sum over its two halves."""
    x, w = _gl()
    panels = np.linspace(lo, hi, 9)
    pending = list(zip(panels[:-1], panels[1:]))
    total = 0j
    count = 0
    while pending:
        a = np.array([p[0] for p in pending])
        b = np.array([p[1] for p in pending])
        mid = 0.5 * (a + b)
        def rule(lo_, hi_):
            h = 0.5 * (hi_ - lo_)
            nodes = (0.5 * (hi_ + lo_))[:, None] + h[:, None] * x[None, :]
            vals = func(nodes.ravel()).reshape(nodes.shape)
            return h * (vals @ w)
        whole = rule(a, b)
        halves = rule(a, mid) + rule(mid, b)
        err = np.abs(whole - halves)
        # the width share floors at 1e-3 so tiny panels are not held below roundoff
        ok = (err <= tol * np.maximum((b - a) / (hi - lo), 1e-3)) | ((b - a) < 1e-13)
        total += halves[ok].sum()
        count += len(pending)
        if count > max_panels:
            raise ArcCollision("delta quadrature did not converge (point too close to an arc?)")
        nxt = []
        for ai, mi, bi, good in zip(a, mid, b, ok):
            if not good:
                nxt += [(ai, mi), (mi, bi)]
        pending = nxt
    return total


def _cauchy_log_integral(z: complex, lo: float, hi: float) -> complex:
    """Integral of d tau / (tau - z) along the arc e^{i phi}, phi in [lo, hi]."""
    phis = np.linspace(lo, hi, 257)
    ang = cmath.phase(z) if z != 0 else None
    if ang is not None:
        k = (ang - lo) % (2 * math.pi)
        if 0 < k < hi - lo:
            phis = np.sort(np.append(phis, lo + k))
    tau = np.exp(1j * phis)
    d = tau - z
    return complex(np.log(np.abs(d[-1]) / np.abs(d[0])) + 1j * np.angle(d[1:] / d[:-1]).sum())


def delta_eval(z: complex, geom: PhaseGeometry, data: ScatteringData, tol: float = 1e-13) -> complex:
    """delta(z) = exp(-(1/2 pi i) int_arcs log(1 + |r(tau)|^2) / (tau - z) d tau)."""
    z = complex(z)
    total = 0j
    for lo, hi in geom.arcs:
        if hi - lo <= 0:
            continue
        # distance from z to the arc
        if z == 0:
            dist = 1.0
            f0 = None
        else:
            k = (cmath.phase(z) - lo) % (2 * math.pi)
            if 0 <= k <= hi - lo:
                dist = abs(abs(z) - 1)
                phi0 = lo + k
            else:
                ends = [cmath.exp(1j * lo), cmath.exp(1j * hi)]
                dist = min(abs(z - e) for e in ends)
                phi0 = lo if abs(z - ends[0]) < abs(z - ends[1]) else hi
            f0 = float(_log_weight(data, np.array([phi0]))[0]) if dist < 0.2 else None
        if dist < 1e-8:
            raise ArcCollision(f"z = {z} lies within 1e-8 of the arc [{lo:.6f}, {hi:.6f}]")

        if f0 is None:
            def integrand(phi):
                tau = np.exp(1j * phi)
                return _log_weight(data, phi) * tau / (tau - z)
            part = _adaptive_arc(integrand, lo, hi, tol)
            total += part / (2 * math.pi)
        else:
            def integrand(phi, f0=f0):
                tau = np.exp(1j * phi)
                return (_log_weight(data, phi) - f0) * tau / (tau - z)
            part = _adaptive_arc(integrand, lo, hi, tol) / (2 * math.pi)
            part += f0 * _cauchy_log_integral(z, lo, hi) / (2j * math.pi)
            total += part
    return cmath.exp(-total)


# -- Blaschke products -----------------------------------------------------

def faster_set(data: ScatteringData, xi: float, d: float) -> tuple:
    """Indices k (into ``data.quartets``) with tw(z_k) > xi + d."""
    return tuple(k for k, q in enumerate(data.quartets) if q.tw > xi + d)


def blaschke_T(z: complex, quartets, S_set) -> complex:
    """T(z) = prod_{k in S} z_k^2 (z^2 - conj(z_k)^-2) / (z^2 - z_k^2); 1 if S is empty."""
    z = complex(z)
    out = 1 + 0j
    for k in S_set:
        zk = quartets[k].z
        den = z * z - zk * zk
        if abs(den) < 1e-14 * max(1.0, abs(zk) ** 2):
            raise PoleHit(f"z^2 = z_k^2 for k = {k}")
        out *= zk * zk * (z * z - zk.conjugate() ** -2) / den
    return out


def T_infinity(quartets, S_set) -> complex:
    out = 1 + 0j
    for k in S_set:
        out *= quartets[k].z ** 2
    return out


# -- regions ---------------------------------------------------------------

@dataclass(frozen=True)
class RegionTag:
    kind: str
    s: int | None = None

    KINDS = ("Interior", "Edge", "Exterior")

    @property
    def soliton(self) -> bool:
        return self.s is not None

    def __str__(self):
        return f"{self.kind}Soliton({self.s})" if self.soliton else f"{self.kind}Solitonless"

    @classmethod
    def parse(cls, text: str) -> "RegionTag":
        for kind in cls.KINDS:
            if text == f"{kind}Solitonless":
                return cls(kind)
            if text.startswith(f"{kind}Soliton(") and text.endswith(")"):
                return cls(kind, int(text[len(kind) + 8:-1]))
        raise ValueError(f"unknown region tag {text!r}")


@dataclass(frozen=True)
class PredictorParams:
    d: float = 0.05
    V0: float = 0.2
    M: float = 2.0
    t_min: float = 5.0
    envelope_k: float = 1.0

    def __post_init__(self):
        if not (self.d > 0 and 0 < self.V0 < 2 and self.M > 0 and self.t_min > 0):
            raise ConfigError("need d > 0, 0 < V0 < 2, M > 0, t_min > 0")


def classify_region(n: int, t: float, data: ScatteringData, d: float = 0.05,
                    V0: float = 0.2, M: float = 2.0) -> RegionTag:
    """Region of (n, t): interior |n| < 2t, the edge band ||n| - 2t| <= M t^(1/3),
    or exterior |n| > 2t, each with a soliton index when one applies.

    Bands are measured on |n| (the equation is symmetric under n -> -n); the
    soliton index uses the signed ray n/t.
    """
    if not t > 0:
        raise ConfigError("t must be positive")
    xi = n / t
    m = abs(n)
    in_interior = m <= (2 - V0) * t
    in_edge = abs(m - 2 * t) <= M * t ** (1 / 3)
    if in_interior and in_edge:
        raise AmbiguousRegion(
            f"(n, t) = ({n}, {t}) lies in both the interior band (V0={V0}) and the edge band (M={M})"
        )
    tws = [q.tw for q in data.quartets]
    near = [k for k, tw in enumerate(tws) if abs(tw - xi) <= d]
    s = min(near, key=lambda k: abs(tws[k] - xi)) if near else None
    if in_edge:
        sign = 1.0 if n >= 0 else -1.0
        edge = [k for k, tw in enumerate(tws) if abs(tw - 2 * sign) <= d]
        s_edge = min(edge, key=lambda k: abs(tws[k] - 2 * sign)) if edge else None
        return RegionTag("Edge", s_edge)
    if m < 2 * t:
        return RegionTag("Interior", s)
    return RegionTag("Exterior", s)


# -- phase factors and prediction -----------------------------------------

@dataclass(frozen=True)
class PhaseFactors:
    s: int
    S_set: tuple
    delta0: float
    delta_zs: complex
    T_zs: complex
    p_s: complex
    C0: complex
    modified_C: complex


def initial_norming_constant(data: ScatteringData, s: int) -> complex:
    q = data.quartets[s]
    return q.C * cmath.exp(-2j * q.omega * data.base_time)


def phase_factors(s: int, n: int, t: float, data: ScatteringData, d: float,
                  region: RegionTag) -> PhaseFactors:
    """Modified norming constant of soliton ``s`` on the ray n/t.

    Interior: delta(0) delta(z_s)^-2 p_s T(z_s)^-2 C_s(0). Edge and exterior
    regions carry no delta factors.
    """
    if not region.soliton:
        raise ConfigError(f"phase factors need a soliton region, got {region}")
    quartets = data.quartets
    S_set = faster_set(data, n / t, d)
    zs = quartets[s].z
    T_zs = blaschke_T(zs, quartets, S_set)
    p_s = blaschke_T(0, quartets, S_set) * T_infinity(quartets, S_set)
    C0 = initial_norming_constant(data, s)
    if region.kind == "Interior":
        geom = saddle_points(n / t)
        delta0 = delta_eval(0, geom, data).real
        delta_zs = delta_eval(zs, geom, data)
    else:
        delta0, delta_zs = 1.0, 1 + 0j
    modified = delta0 * delta_zs**-2 * p_s * T_zs**-2 * C0
    return PhaseFactors(s, S_set, delta0, delta_zs, T_zs, p_s, C0, modified)


@dataclass(frozen=True)
class Prediction:
    n: int
    t: float
    region: RegionTag
    value: complex | None
    envelope: float | None
    order: float
    factors: PhaseFactors | None = None


def predict(n: int, t: float, data: ScatteringData, params: PredictorParams | None = None) -> Prediction:
    """Leading-order R_n(t) for large t.

    Soliton regions give a bright soliton with the modified norming constant
    (error order -1/2 interior, -1/3 edge, -inf exterior). Solitonless regions
    give only a decay envelope K t^order (K = ``params.envelope_k``), or zero
    in the exterior.
    """
    params = params or PredictorParams()
    if t < params.t_min:
        raise ConfigError(f"t = {t} is below t_min = {params.t_min}")
    region = classify_region(n, t, data, params.d, params.V0, params.M)
    order = {"Interior": -0.5, "Edge": -1.0 / 3.0, "Exterior": -math.inf}[region.kind]
    if region.soliton:
        pf = phase_factors(region.s, n, t, data, params.d, region)
        value = complex(bright_soliton(n, t, data.quartets[region.s].z, pf.modified_C))
        return Prediction(n, t, region, value, abs(value), order, pf)
    if region.kind == "Exterior":
        return Prediction(n, t, region, 0j, 0.0, -math.inf)
    return Prediction(n, t, region, None, params.envelope_k * t**order, order)
