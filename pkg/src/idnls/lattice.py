"""Truncated lattice states and RK4 integration of the Ablowitz-Ladik equation.

The equation integrated here is

    i dR_n/dt + (R_{n+1} - 2 R_n + R_{n-1}) + |R_n|^2 (R_{n+1} + R_{n-1}) = 0

on a finite window ``n_min .. n_max`` with zero amplitudes outside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, TailOverflow

DEFAULT_DT = 1e-3
DEFAULT_TAIL_TOL = 1e-10
DEFAULT_TAIL_GUARD = 5


@dataclass(frozen=True)
class LatticeState:
    """Complex amplitudes ``R_n`` for ``n = n_min, ..., n_max`` at time ``time``."""

    n_min: int
    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1:
            raise ConfigError("amplitudes must be one-dimensional")
        if amps.size < 3:
            raise ConfigError("window must contain at least 3 sites")
        if not np.all(np.isfinite(amps)):
            raise ConfigError("amplitudes must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "n_min", int(self.n_min))
        object.__setattr__(self, "time", float(self.time))

    @property
    def n_max(self) -> int:
        return self.n_min + self.amplitudes.size - 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def __len__(self):
        return self.amplitudes.size

    def at(self, n: int) -> complex:
        """Amplitude at site ``n``; zero outside the window."""
        k = n - self.n_min
        if 0 <= k < self.amplitudes.size:
            return complex(self.amplitudes[k])
        return 0j

    def replace(self, amplitudes=None, time=None) -> "LatticeState":
        return LatticeState(
            self.n_min,
            self.amplitudes if amplitudes is None else amplitudes,
            self.time if time is None else time,
        )

    def reflected(self) -> "LatticeState":
        """The state ``R_n -> R_{-n}`` (the equation is invariant under it)."""
        return LatticeState(-self.n_max, self.amplitudes[::-1].copy(), self.time)

    @classmethod
    def zeros(cls, n_min: int, n_max: int, time: float = 0.0) -> "LatticeState":
        return cls(n_min, np.zeros(n_max - n_min + 1, dtype=np.complex128), time)

    @classmethod
    def from_function(cls, func, n_min: int, n_max: int, time: float = 0.0):
        n = np.arange(n_min, n_max + 1)
        return cls(n_min, np.asarray(func(n), dtype=np.complex128), time)


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = DEFAULT_DT
    tail_tol: float = DEFAULT_TAIL_TOL
    tail_guard: int = DEFAULT_TAIL_GUARD
    snapshot_times: tuple = ()

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.tail_tol > 0:
            raise ConfigError("tail_tol must be positive")
        if int(self.tail_guard) < 1:
            raise ConfigError("tail_guard must be >= 1")
        times = tuple(float(t) for t in self.snapshot_times)
        if any(t < 0 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError("snapshot_times must be nonnegative and increasing")
        object.__setattr__(self, "snapshot_times", times)
        object.__setattr__(self, "tail_guard", int(self.tail_guard))


class Snapshots(list):
    """List of :class:`LatticeState` with the relative drift of the
    conserved product recorded at each snapshot in ``drift``."""

    def __init__(self, states=(), drift=()):
        super().__init__(states)
        self.drift = list(drift)

    @property
    def max_drift(self) -> float:
        return max(self.drift, default=0.0)


def _rhs(R: np.ndarray) -> np.ndarray:
    nb = np.zeros_like(R)
    nb[:-1] += R[1:]
    nb[1:] += R[:-1]
    return 1j * (nb - 2.0 * R + (R.real**2 + R.imag**2) * nb)


def _rk4(R: np.ndarray, h: float) -> np.ndarray:
    k1 = _rhs(R)
    k2 = _rhs(R + 0.5 * h * k1)
    k3 = _rhs(R + 0.5 * h * k2)
    k4 = _rhs(R + h * k3)
    return R + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def tail_violation(amplitudes: np.ndarray, tail_tol: float, tail_guard: int) -> float | None:
    """Largest guard-site modulus if it exceeds ``tail_tol``, else ``None``."""
    g = min(tail_guard, amplitudes.size // 2)
    edge = max(np.abs(amplitudes[:g]).max(), np.abs(amplitudes[-g:]).max())
    return float(edge) if edge > tail_tol else None


def rhs(state: LatticeState) -> np.ndarray:
    """dR_n/dt for every site of the window (neighbours outside are zero)."""
    return _rhs(state.amplitudes)


def _checked(R, t, cfg):
    edge = tail_violation(R, cfg.tail_tol, cfg.tail_guard)
    if edge is not None:
        raise TailOverflow(
            f"|R| = {edge:.3e} at guard sites exceeds tail_tol={cfg.tail_tol:g} at t={t:g}"
        )
    return R


def step(state: LatticeState, cfg: IntegratorConfig) -> LatticeState:
    R = _checked(_rk4(state.amplitudes, cfg.dt), state.time + cfg.dt, cfg)
    return state.replace(amplitudes=R, time=state.time + cfg.dt)


def integrate(state: LatticeState, cfg: IntegratorConfig) -> Snapshots:
    """Advance ``state`` with fixed-step RK4, returning one snapshot per
    requested time. The last sub-step before a snapshot is shortened so that
    snapshots land exactly on the requested times."""
    times = cfg.snapshot_times
    if times and times[0] < state.time - 1e-12:
        raise ConfigError("snapshot times precede the initial state")
    c0 = conserved_product(state)
    R = state.amplitudes.copy()
    t = state.time
    out = Snapshots()
    for target in times:
        span = target - t
        nfull = int(math.floor(span / cfg.dt + 1e-9))
        t_start = t
        for k in range(nfull):
            R = _checked(_rk4(R, cfg.dt), t_start + (k + 1) * cfg.dt, cfg)
        rest = target - (t_start + nfull * cfg.dt)
        if rest > 1e-12 * max(1.0, abs(target)):
            R = _checked(_rk4(R, rest), target, cfg)
        t = target
        snap = LatticeState(state.n_min, R.copy(), t)
        out.append(snap)
        out.drift.append(abs(conserved_product(snap) - c0) / c0)
    return out


def conserved_product(state: LatticeState) -> float:
    """c_{-inf} = prod_n (1 + |R_n|^2) over the window."""
    R = state.amplitudes
    return float(np.exp(np.sum(np.log1p(R.real**2 + R.imag**2))))


def norm_l1p(state: LatticeState, p: int = 0) -> float:
    """Weighted norm sum_n (1 + |n|)^p |R_n|."""
    if p < 0:
        raise ConfigError("p must be nonnegative")
    weights = (1.0 + np.abs(state.sites)) ** p
    return float(np.sum(weights * np.abs(state.amplitudes)))
