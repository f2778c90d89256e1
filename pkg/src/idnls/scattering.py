"""Forward scattering for the Ablowitz-Ladik spectral problem.

For a state supported on ``n_min .. n_max`` the Jost solution ``phi`` is
propagated through the transfer matrices ``M_n = [[z, -conj(R_n)], [R_n, 1/z]]``.
Beyond the window ``phi_n = b psi_n + a psi*_n`` with ``psi*_n = z^n (1, 0)``
and ``psi_n = z^-n (0, 1)``, so ``a`` and ``b`` are read off exactly at
``n = n_max + 1``.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import (
    AssumptionViolated,
    ConfigError,
    DegenerateEigenvalue,
    NumericFailure,
    ZeroSpectralParameter,
)
from .lattice import LatticeState, conserved_product
from .spectral import EigenQuartet, canonical_eigenvalue

log = logging.getLogger(__name__)

DEFAULT_EPS0 = 1e-3
DEFAULT_R_MAX = 8.0
DEFAULT_ASSUMPTION_FLOOR = 1e-6
DEFAULT_D = 0.05


@dataclass(frozen=True)
class ScatteringConfig:
    eps0: float = DEFAULT_EPS0
    r_max: float = DEFAULT_R_MAX
    assumption_floor: float = DEFAULT_ASSUMPTION_FLOOR
    d: float = DEFAULT_D
    newton_tol: float = 1e-12

    def __post_init__(self):
        if not (0 < self.eps0 < 1 and self.r_max > 1 + self.eps0):
            raise ConfigError("need 0 < eps0 < 1 and r_max > 1 + eps0")
        if self.assumption_floor <= 0 or self.d <= 0:
            raise ConfigError("assumption_floor and d must be positive")


def transfer_matrix(z: complex, Rn: complex) -> np.ndarray:
    z = complex(z)
    if z == 0:
        raise ZeroSpectralParameter("spectral parameter z must be nonzero")
    Rn = complex(Rn)
    return np.array([[z, -Rn.conjugate()], [Rn, 1 / z]], dtype=np.complex128)


def _propagate(z, R: np.ndarray):
    """Rescaled Jost column ``u_n = z^-n phi_n`` after the last window site.

    Works on arrays of ``z``; ``u`` starts at (1, 0) and each step applies
    ``z^-1 M_n`` so nothing overflows for |z| >= 1.
    """
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z == 0):
        raise ZeroSpectralParameter("spectral parameter z must be nonzero")
    zi = 1.0 / z
    zi2 = zi * zi
    u1 = np.ones_like(z)
    u2 = np.zeros_like(z)
    for Rn in R:
        if Rn == 0:
            u2 = u2 * zi2
            continue
        u1, u2 = u1 - (Rn.conjugate() * zi) * u2, (Rn * zi) * u1 + zi2 * u2
    return u1, u2


def a_values(z, state: LatticeState) -> np.ndarray:
    """a(z) for an array of spectral parameters (valid for any z != 0)."""
    return _propagate(z, state.amplitudes)[0]


def compute_ab(z: complex, state: LatticeState) -> tuple[complex, complex]:
    """Scattering coefficients (a, b) at ``z``.

    ``b`` carries the factor ``z^(2 (n_max + 1))`` and is only meaningful on
    or near the unit circle; use :func:`norming_constant` at eigenvalues.
    """
    u1, u2 = _propagate(np.array([z]), state.amplitudes)
    N = state.n_max + 1
    return complex(u1[0]), complex(u2[0] * complex(z) ** (2 * N))


def _ab_on_circle(theta: np.ndarray, state: LatticeState):
    z = np.exp(1j * theta)
    u1, u2 = _propagate(z, state.amplitudes)
    N = state.n_max + 1
    return u1, u2 * np.exp(2j * N * theta)


def a_derivative(z0: complex, state: LatticeState, radius: float = 1e-3, nodes: int = 32) -> complex:
    """da/dz at ``z0`` by the trapezoid rule on a small Cauchy circle."""
    phases = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    vals = a_values(complex(z0) + radius * phases, state)
    return complex(np.mean(vals / phases) / radius)


def _jost_profiles(z: complex, R: np.ndarray):
    """Rescaled left and right Jost columns at every site boundary.

    ``u[k] = z^-n phi_n`` (forward from the left) and ``v[k] = z^n psi_n``
    (backward from the right) for n = n_min + k, k = 0 .. len(R).
    Both recursions are bounded for |z| >= 1.
    """
    L = R.size
    u = np.empty((L + 1, 2), dtype=np.complex128)
    v = np.empty((L + 1, 2), dtype=np.complex128)
    zi = 1 / z
    u[0] = (1, 0)
    for k, Rn in enumerate(R):
        u1, u2 = u[k]
        u[k + 1] = (u1 - Rn.conjugate() * zi * u2, Rn * zi * u1 + zi * zi * u2)
    v[L] = (0, 1)
    for k in range(L - 1, -1, -1):
        Rn = R[k]
        v1, v2 = v[k + 1]
        det = 1 + abs(Rn) ** 2
        v[k] = ((zi * zi * v1 + Rn.conjugate() * zi * v2) / det, (-Rn * zi * v1 + v2) / det)
    return u, v


@dataclass(frozen=True)
class JostSolution:
    """A Jost column over the window: ``values[n]`` is the 2-vector at site n.

    ``phi`` ~ z^n (1, 0) and ``phi_star`` ~ z^-n (0, 1) to the left of the
    support; ``psi`` ~ z^-n (0, 1) and ``psi_star`` ~ z^n (1, 0) to the right.
    """

    z: complex
    values: dict
    kind: str

    KINDS = ("phi", "psi", "phi_star", "psi_star")


def jost_solution(z: complex, state: LatticeState, kind: str = "phi") -> JostSolution:
    """Unscaled Jost column of ``kind`` at sites n_min .. n_max + 1."""
    if kind not in JostSolution.KINDS:
        raise ValueError(f"kind must be one of {JostSolution.KINDS}, got {kind!r}")
    z = complex(z)
    if z == 0:
        raise ZeroSpectralParameter("spectral parameter z must be nonzero")
    R = state.amplitudes
    sites = range(state.n_min, state.n_max + 2)
    if kind in ("phi", "psi"):
        u, v = _jost_profiles(z, R)
        if kind == "phi":
            vals = {n: z**n * u[k] for k, n in enumerate(sites)}
        else:
            vals = {n: z ** (-n) * v[k] for k, n in enumerate(sites)}
        return JostSolution(z, vals, kind)
    vals = {}
    if kind == "phi_star":
        w = z ** (-state.n_min) * np.array([0, 1], dtype=np.complex128)
        for k, n in enumerate(sites):
            vals[n] = w
            if k < R.size:
                w = transfer_matrix(z, R[k]) @ w
    else:
        w = z ** sites[-1] * np.array([1, 0], dtype=np.complex128)
        for k in range(R.size, -1, -1):
            vals[sites[k]] = w
            if k > 0:
                w = np.linalg.solve(transfer_matrix(z, R[k - 1]), w)
    return JostSolution(z, dict(sorted(vals.items())), kind)


def norming_constant(z0: complex, state: LatticeState) -> complex:
    """C = b / a'(z0) where ``phi_n(z0) = b psi_n(z0)``.

    ``b`` is matched at the site where the forward and backward recursions
    have amplified roundoff least, so the cancellation that builds the
    decaying eigenfunction never enters the ratio.
    """
    z0 = complex(z0)
    da = a_derivative(z0, state)
    if abs(da) < 1e-10:
        raise DegenerateEigenvalue(f"a'(z) = {abs(da):.2e} at z = {z0}")
    u, v = _jost_profiles(z0, state.amplitudes)
    nu = np.abs(u).max(axis=1)
    nv = np.abs(v).max(axis=1)
    if not np.any(nu * nv > 0):
        return 0j
    with np.errstate(divide="ignore"):
        growth_f = np.maximum.accumulate(nu) / nu
        growth_b = np.maximum.accumulate(nv[::-1])[::-1] / nv
    k = int(np.argmin(growth_f + growth_b))
    c = int(np.argmax(np.abs(v[k])))
    if u[k, c] == 0:
        return 0j
    m = state.n_min + k
    return cmath.exp(cmath.log(complex(u[k, c])) - cmath.log(complex(v[k, c]))
                     + 2 * m * cmath.log(z0) - cmath.log(da))


# -- winding-number eigenvalue search --------------------------------------

class _ZeroOnContour(Exception):
    pass


def _arg_increment(func, path, n0=64, max_points=200_000):
    """Total change of arg(func(path(s))) for s in [0, 1], refined until
    consecutive samples differ in argument by less than 0.5 rad."""
    s = np.linspace(0.0, 1.0, n0 + 1)
    vals = func(path(s))
    scale = np.max(np.abs(vals))
    while True:
        if np.any(np.abs(vals) <= 1e-13 * max(scale, 1.0)):
            raise _ZeroOnContour
        d = np.angle(vals[1:] / vals[:-1])
        bad = np.abs(d) > 0.5
        if not bad.any():
            return float(d.sum())
        if s.size > max_points:
            raise NumericFailure("argument increment failed to resolve along contour")
        mids = 0.5 * (s[:-1][bad] + s[1:][bad])
        mvals = func(path(mids))
        s = np.concatenate([s, mids])
        vals = np.concatenate([vals, mvals])
        order = np.argsort(s, kind="stable")
        s, vals = s[order], vals[order]


def _circle_winding(func, radius):
    w = _arg_increment(func, lambda s: radius * np.exp(2j * np.pi * s), n0=256)
    return int(round(w / (2 * np.pi)))


def _cell_winding(func, cell):
    s0, s1, p0, p1 = cell
    edges = [
        lambda s: np.exp(s0 + (s1 - s0) * s + 1j * p0),
        lambda s: np.exp(s1 + 1j * (p0 + (p1 - p0) * s)),
        lambda s: np.exp(s1 + (s0 - s1) * s + 1j * p1),
        lambda s: np.exp(s0 + 1j * (p1 + (p0 - p1) * s)),
    ]
    total = sum(_arg_increment(func, e) for e in edges)
    w = total / (2 * np.pi)
    if abs(w - round(w)) > 0.1:
        raise NumericFailure(f"non-integer winding {w:.3f} on cell {cell}")
    return int(round(w))


def _newton(func, deriv, z, tol, maxiter=60):
    for _ in range(maxiter):
        f = complex(func(np.array([z]))[0])
        if abs(f) <= tol:
            return z
        dz = f / deriv(z)
        z = z - dz
        if abs(dz) <= 1e-15 * abs(z):
            return z
    return z


def find_eigenvalues(state: LatticeState, cfg: ScatteringConfig | None = None) -> list[complex]:
    """All zeros of a(z) with 1 + eps0 <= |z| <= r_max, one per ``+-z`` pair,
    returned as canonical representatives sorted by modulus then angle."""
    cfg = cfg or ScatteringConfig()
    func = lambda z: a_values(z, state)

    try:
        thin = _circle_winding(func, 1 + cfg.eps0) - _circle_winding(func, 1 - cfg.eps0)
    except _ZeroOnContour:
        thin = 1
    if thin != 0:
        raise AssumptionViolated("zero_on_circle", f"{thin} zero(s) of a within eps0 of |z| = 1")
    try:
        beyond = -_circle_winding(func, cfg.r_max) + _circle_winding(func, 1e6)
    except _ZeroOnContour:
        beyond = 1
    if beyond:
        raise NumericFailure(f"a(z) has zeros at or beyond |z| = r_max = {cfg.r_max}")

    deriv = lambda z: a_derivative(z, state)
    s_lo, s_hi = math.log1p(cfg.eps0), math.log(cfg.r_max)
    # half-annulus fundamental domain; the cut is rotated off any zero
    for shift in (0.0, 0.0137, -0.0291, 0.0533, -0.0779, 0.1013):
        p0 = -math.pi / 2 + shift
        root = (s_lo, s_hi, p0, p0 + math.pi)
        try:
            count = _cell_winding(func, root)
            break
        except _ZeroOnContour:
            continue
    else:
        raise NumericFailure("could not place a zero-free cut for the eigenvalue search")

    found: list[complex] = []
    stack = [(root, count, 0)] if count else []
    while stack:
        cell, w, depth = stack.pop()
        s0, s1, p0, p1 = cell
        if w == 1 and max(s1 - s0, p1 - p0) < 0.25:
            zc = cmath.exp(complex(0.5 * (s0 + s1), 0.5 * (p0 + p1)))
            z = _newton(func, deriv, zc, cfg.newton_tol)
            lz = cmath.log(z)
            lz = complex(lz.real, lz.imag + 2 * math.pi * round((0.5 * (p0 + p1) - lz.imag) / (2 * math.pi)))
            pad = 1e-9
            if s0 - pad <= lz.real <= s1 + pad and p0 - pad <= lz.imag <= p1 + pad:
                found.append(z)
                continue
        if max(s1 - s0, p1 - p0) < 1e-8:
            raise AssumptionViolated("double_zero", f"multiple zero of a near {cmath.exp(complex(s0, p0))}")
        frac_options = (0.5371, 0.4629, 0.6113, 0.3887)
        split_s = (s1 - s0) >= (p1 - p0)
        for frac in frac_options:
            if split_s:
                m = s0 + frac * (s1 - s0)
                kids = [(s0, m, p0, p1), (m, s1, p0, p1)]
            else:
                m = p0 + frac * (p1 - p0)
                kids = [(s0, s1, p0, m), (s0, s1, m, p1)]
            try:
                ws = [_cell_winding(func, k) for k in kids]
            except _ZeroOnContour:
                continue
            break
        else:
            if w >= 2:
                # every split line passes through the flat neighbourhood of a multiple zero
                raise AssumptionViolated("double_zero", f"multiple zero of a near {cmath.exp(complex(s0, p0))}")
            raise NumericFailure("could not subdivide eigenvalue cell away from zeros")
        if sum(ws) != w:
            raise NumericFailure(f"winding mismatch {ws} vs {w} on cell {cell}")
        stack.extend((k, wk, depth + 1) for k, wk in zip(kids, ws) if wk > 0)

    zs = [canonical_eigenvalue(z) for z in found]
    return sorted(zs, key=lambda z: (round(abs(z), 9), cmath.phase(z)))


# -- scattering data -------------------------------------------------------

class ScatteringSample(NamedTuple):
    theta: float
    a: complex
    b: complex
    r: complex


@dataclass(frozen=True)
class ScatteringData:
    """Circle samples of a and b, eigenvalue quartets, and c_{-inf}.

    Samples sit at ``theta_k = 2 pi k / N``; ``r`` is reconstructed between
    them by trigonometric interpolation.
    """

    a: np.ndarray
    b: np.ndarray
    quartets: tuple = ()
    c_inf: float = 1.0
    base_time: float = 0.0
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.complex128)
        b = np.asarray(self.b, dtype=np.complex128)
        if a.shape != b.shape or a.ndim != 1:
            raise ConfigError("a and b must be 1-d arrays of equal length")
        N = a.size
        if N < 4 or N & (N - 1):
            raise ConfigError(f"number of samples must be a power of two, got {N}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        quartets = tuple(sorted(self.quartets, key=lambda q: q.tw))
        object.__setattr__(self, "quartets", quartets)

    @property
    def n_samples(self) -> int:
        return self.a.size

    @property
    def theta(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_samples) / self.n_samples

    @property
    def r(self) -> np.ndarray:
        return self.b / self.a

    @property
    def samples(self) -> list[ScatteringSample]:
        return [ScatteringSample(*v) for v in zip(self.theta, self.a, self.b, self.r)]

    @cached_property
    def _r_coefficients(self):
        N = self.n_samples
        coef = np.fft.fft(self.r) / N
        k = np.fft.fftfreq(N, 1.0 / N)
        nyq = N // 2
        main = coef.copy()
        main[nyq] = 0.0
        return k, main, coef[nyq], nyq

    def r_at(self, theta) -> np.ndarray:
        """Trigonometric interpolant of the r samples at arbitrary angles."""
        theta = np.asarray(theta, dtype=float)
        k, main, c_nyq, nyq = self._r_coefficients
        out = np.exp(1j * np.multiply.outer(theta, k)) @ main
        return out + c_nyq * np.cos(nyq * theta)

    def replace(self, **kw) -> "ScatteringData":
        fields = dict(a=self.a, b=self.b, quartets=self.quartets, c_inf=self.c_inf,
                      base_time=self.base_time, diagnostics=dict(self.diagnostics))
        fields.update(kw)
        return ScatteringData(**fields)

    @classmethod
    def from_reflection(cls, r, quartets=(), base_time=0.0) -> "ScatteringData":
        """Build data from reflection samples alone, taking a = 1 / sqrt(1 + |r|^2)
        so that |a|^2 + |b|^2 = 1 = c_inf on the circle."""
        r = np.asarray(r, dtype=np.complex128)
        a = 1.0 / np.sqrt(1.0 + np.abs(r) ** 2)
        return cls(a.astype(np.complex128), r * a, tuple(quartets), 1.0, base_time)


def scatter(state: LatticeState, N: int = 512, cfg: ScatteringConfig | None = None) -> ScatteringData:
    """Full scattering data of a windowed state, with the generic-assumption
    checks (no zero of a on |z| = 1, simple zeros, distinct velocities)."""
    cfg = cfg or ScatteringConfig()
    if N < 64 or N & (N - 1):
        raise ConfigError(f"N must be a power of two >= 64, got {N}")
    theta = 2 * np.pi * np.arange(N) / N
    a, b = _ab_on_circle(theta, state)
    amin = float(np.abs(a).min())
    if amin < cfg.assumption_floor:
        raise AssumptionViolated("zero_on_circle", f"min |a| = {amin:.3e} on the sample grid")
    zs = find_eigenvalues(state, cfg)
    quartets = [EigenQuartet(z, norming_constant(z, state)) for z in zs]
    tws = sorted(q.tw for q in quartets)
    for lo, hi in zip(tws, tws[1:]):
        if hi - lo <= 2 * cfg.d:
            raise AssumptionViolated(
                "velocity_collision", f"velocities {lo:.6g} and {hi:.6g} closer than 2d = {2 * cfg.d:g}"
            )
    c_inf = conserved_product(state)
    r = b / a
    diagnostics = {
        "characterization_residual": float(np.max(np.abs(np.abs(a) ** 2 + np.abs(b) ** 2 - c_inf)) / c_inf),
        "parity_residual": float(np.max(np.abs(np.roll(r, -N // 2) + r))),
        "min_abs_a": amin,
    }
    return ScatteringData(a, b, tuple(quartets), c_inf, state.time, diagnostics)


def evolve_scattering(data: ScatteringData, t: float) -> ScatteringData:
    """Scattering data at time ``t``: r gains exp(i dt (z - 1/z)^2), a is
    time independent and C_j gains exp(2 i omega_j dt)."""
    dt = float(t) - data.base_time
    if dt < -1e-12:
        raise ConfigError("cannot evolve scattering data backwards")
    z = np.exp(1j * data.theta)
    phase = np.exp(1j * dt * ((z - 1 / z) ** 2).real)
    b = data.b * phase
    quartets = tuple(q.evolved(dt) for q in data.quartets)
    return data.replace(b=b, quartets=quartets, base_time=float(t))
