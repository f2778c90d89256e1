"""Exact soliton states: the closed-form bright soliton, reflectionless
multi-solitons from the pole conditions, and three-site counter-examples."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, SingularPoleSystem, ZeroNormingConstant
from .lattice import LatticeState
from .spectral import EigenQuartet, tw_velocity

__all__ = [
    "SolitonSpec",
    "ThreeSiteSpec",
    "bright_soliton",
    "bright_soliton_dt",
    "soliton_center",
    "build_three_site",
    "synthesize_reflectionless",
    "tw_velocity",
]


def _soliton_params(z1, C):
    C = complex(C)
    if C == 0:
        raise ZeroNormingConstant("norming constant must be nonzero")
    lz = cmath.log(complex(z1))
    alpha, beta = lz.real, lz.imag
    if not alpha > 0:
        raise ConfigError(f"|z1| must exceed 1, got {abs(z1)}")
    v = -math.sinh(2 * alpha) * math.sin(2 * beta)
    w = math.cosh(2 * alpha) * math.cos(2 * beta) - 1
    theta = math.log(abs(C)) - math.log(math.sinh(2 * alpha))
    return alpha, beta, v, w, theta, C / abs(C)


def bright_soliton(n, t, z1: complex, C: complex):
    """BS(n, t; z1, C): the one-soliton with eigenvalue z1 and norming constant C(0).

    ``n`` may be an integer array.
    """
    alpha, beta, v, w, theta, unit = _soliton_params(z1, C)
    n = np.asarray(n, dtype=float)
    carrier = unit * np.exp(-1j * (2 * beta * (n + 1) - 2 * w * t))
    out = carrier * math.sinh(2 * alpha) / np.cosh(2 * alpha * (n + 1) - 2 * v * t - theta)
    return out[()] if out.ndim == 0 else out


def bright_soliton_dt(n, t, z1: complex, C: complex):
    """Exact time derivative of :func:`bright_soliton`.

    With X = 2 alpha (n + 1) - 2 v t - theta, d/dt of exp(2 i w t) sech X is
    (2 i w + 2 v tanh X) times the soliton itself.
    """
    alpha, beta, v, w, theta, unit = _soliton_params(z1, C)
    n = np.asarray(n, dtype=float)
    X = 2 * alpha * (n + 1) - 2 * v * t - theta
    bs = bright_soliton(n, t, z1, C)
    out = (2j * w + 2 * v * np.tanh(X)) * bs
    return out[()] if np.ndim(out) == 0 else out


def soliton_center(t: float, z1: complex, C: complex) -> float:
    """Lattice coordinate where the sech argument vanishes."""
    alpha, _, v, _, theta, _ = _soliton_params(z1, C)
    return (2 * v * t + theta) / (2 * alpha) - 1


@dataclass(frozen=True)
class SolitonSpec:
    quartets: tuple
    n_min: int
    n_max: int
    time: float = 0.0

    def __post_init__(self):
        qs = tuple(q if isinstance(q, EigenQuartet) else EigenQuartet(*q) for q in self.quartets)
        sq = [q.z**2 for q in qs]
        for i in range(len(sq)):
            for j in range(i):
                if abs(sq[i] - sq[j]) < 1e-12:
                    raise ConfigError("quartets must have pairwise distinct z^2")
        if self.n_max - self.n_min < 2:
            raise ConfigError("window must contain at least 3 sites")
        object.__setattr__(self, "quartets", qs)


def _pole_system(n: np.ndarray, zs: np.ndarray, logC: np.ndarray):
    """Row-scaled reduced residue system for each site in ``n``.

    Unknowns are the residues A_j of m_21 at z_j and B_j of m_22 at
    1/conj(z_j), with m_21 odd and m_22 even. Rows whose pole weight
    |c| = |z^-2n C| exceeds one are divided by it, so no weight overflows.
    """
    J = zs.size
    ws = 1 / np.conj(zs)
    K = 2 * ws[None, :] / (zs[:, None] ** 2 - ws[None, :] ** 2)
    L = 2 * ws[:, None] / (ws[:, None] ** 2 - zs[None, :] ** 2)
    logc = -2 * np.multiply.outer(n, np.log(zs)) + logC[None, :]
    logd = np.conj(logc) - 2 * np.log(np.conj(zs))[None, :]

    S = n.size
    M = np.zeros((S, 2 * J, 2 * J), dtype=np.complex128)
    rhs = np.zeros((S, 2 * J), dtype=np.complex128)
    eye = np.arange(J)
    big_c = logc.real > 0
    c = np.exp(np.where(big_c, -logc, logc))  # c or 1/c
    big_d = logd.real > 0
    d = np.exp(np.where(big_d, -logd, logd))
    # A_j = c_j (1 + sum_k K_jk B_k)
    M[:, eye, eye] = np.where(big_c, c, 1.0)
    M[:, :J, J:] = -np.where(big_c[:, :, None], 1.0, c[:, :, None]) * K[None]
    rhs[:, :J] = np.where(big_c, 1.0, c)
    # B_j = d_j sum_k L_jk A_k
    M[:, J + eye, J + eye] = np.where(big_d, d, 1.0)
    M[:, J:, :J] = -np.where(big_d[:, :, None], 1.0, d[:, :, None]) * L[None]
    return M, rhs, (c, big_c, d, big_d)


def _full_residual(x, n, zs, logC):
    """Residual of the unreduced 4J pole system at the parity-reduced solution."""
    J = zs.size
    ws = 1 / np.conj(zs)
    A, B = x[:, :J], x[:, J:]
    logc = -2 * np.multiply.outer(n, np.log(zs)) + logC[None, :]
    logd = np.conj(logc) - 2 * np.log(np.conj(zs))[None, :]
    # residues at (z_j, -z_j) for m_21 and (w_j, -w_j) for m_22
    poles_a = np.concatenate([zs, -zs])
    poles_b = np.concatenate([ws, -ws])
    res_a = np.concatenate([A, A], axis=1)
    res_b = np.concatenate([B, -B], axis=1)

    def m22(p):
        return 1 + np.sum(res_b[:, None, :] / (p[None, :, None] - poles_b[None, None, :]), axis=2)

    def m21(p):
        return np.sum(res_a[:, None, :] / (p[None, :, None] - poles_a[None, None, :]), axis=2)

    lc = np.concatenate([logc, logc], axis=1)
    ld = np.concatenate([logd, logd], axis=1)
    ra = _scaled_relation(res_a, lc, m22(poles_a))
    rb = _scaled_relation(res_b, ld, m21(poles_b))
    return max(np.abs(ra).max(), np.abs(rb).max())


def _scaled_relation(res, logw, m_at_pole):
    big = logw.real > 0
    w = np.exp(np.where(big, -logw, logw))
    return np.where(big, w * res - m_at_pole, res - w * m_at_pole)


def _solve_full(n, zs, logC):
    """Unreduced solve with separate residues at all 4J poles."""
    J = zs.size
    ws = 1 / np.conj(zs)
    poles_a = np.concatenate([zs, -zs])
    poles_b = np.concatenate([ws, -ws])
    logc = -2 * np.multiply.outer(n, np.log(zs)) + logC[None, :]
    logd = np.conj(logc) - 2 * np.log(np.conj(zs))[None, :]
    lc = np.concatenate([logc, logc], axis=1)
    ld = np.concatenate([logd, logd], axis=1)
    P = 2 * J
    Ka = 1.0 / (poles_a[:, None] - poles_b[None, :])  # m22 at poles_a
    Lb = 1.0 / (poles_b[:, None] - poles_a[None, :])  # m21 at poles_b
    S = n.size
    M = np.zeros((S, 2 * P, 2 * P), dtype=np.complex128)
    rhs = np.zeros((S, 2 * P), dtype=np.complex128)
    idx = np.arange(P)
    bc = lc.real > 0
    c = np.exp(np.where(bc, -lc, lc))
    bd = ld.real > 0
    d = np.exp(np.where(bd, -ld, ld))
    M[:, idx, idx] = np.where(bc, c, 1.0)
    M[:, :P, P:] = -np.where(bc[:, :, None], 1.0, c[:, :, None]) * Ka[None]
    rhs[:, :P] = np.where(bc, 1.0, c)
    M[:, P + idx, P + idx] = np.where(bd, d, 1.0)
    M[:, P:, :P] = -np.where(bd[:, :, None], 1.0, d[:, :, None]) * Lb[None]
    cond = np.linalg.cond(M)
    if np.any(~np.isfinite(cond)) or cond.max() > 1e12:
        raise SingularPoleSystem(f"pole system condition number {np.nanmax(cond):.3e}")
    x = np.linalg.solve(M, rhs[..., None])[..., 0]
    A = x[:, :P]
    return np.sum(A / poles_a[None, :] ** 2, axis=1)


def _reflectionless_values(n: np.ndarray, quartets, t: float) -> np.ndarray:
    if not quartets:
        return np.zeros(n.size, dtype=np.complex128)
    zs = np.array([q.z for q in quartets], dtype=np.complex128)
    logC = np.array([cmath.log(q.C) + 2j * q.omega * t for q in quartets], dtype=np.complex128)
    M, rhs, _ = _pole_system(n.astype(float), zs, logC)
    cond = np.linalg.cond(M)
    if np.any(~np.isfinite(cond)) or cond.max() > 1e12:
        raise SingularPoleSystem(f"pole system condition number {np.nanmax(cond):.3e}")
    x = np.linalg.solve(M, rhs[..., None])[..., 0]
    if _full_residual(x, n.astype(float), zs, logC) > 1e-8:
        return _solve_full(n.astype(float), zs, logC)
    J = zs.size
    return np.sum(2 * x[:, :J] / zs[None, :] ** 2, axis=1)


def synthesize_reflectionless(spec: SolitonSpec) -> LatticeState:
    """Reflectionless state with the given quartets (norming constants at
    t = 0) at time ``spec.time``, reconstructed as R_n = -d/dz m_21(0)."""
    n = np.arange(spec.n_min, spec.n_max + 1)
    R = _reflectionless_values(n, spec.quartets, spec.time)
    return LatticeState(spec.n_min, R, spec.time)


@dataclass(frozen=True)
class ThreeSiteSpec:
    x1: complex
    x2: complex
    R0: complex
    R2: complex
    R1: complex = 1.0


def build_three_site(x1: complex, x2: complex) -> tuple[LatticeState, Callable[[complex], complex]]:
    """State on sites {0, 1, 2} with R_1 = 1 whose a(z) is z^-4 (z^2 - x1)(z^2 - x2)."""
    x1, x2 = complex(x1), complex(x2)
    if x1 == 0 or x2 == 0:
        raise ConfigError("x1 and x2 must be nonzero")
    # y^2 - (x1 + x2) y - x1 x2 = 0 has roots R0 and conj(R2)
    s, p = x1 + x2, -x1 * x2
    disc = cmath.sqrt(s * s - 4 * p)
    y1, y2 = (s + disc) / 2, (s - disc) / 2
    if abs(y2) > abs(y1):
        y1, y2 = y2, y1
    R0, R2 = y1, y2.conjugate()
    state = LatticeState(0, np.array([R0, 1.0, R2], dtype=np.complex128), 0.0)

    def closed_form_a(z):
        z = np.asarray(z, dtype=np.complex128)
        z2 = z * z
        return (z2 - x1) * (z2 - x2) / (z2 * z2)

    closed_form_a.spec = ThreeSiteSpec(x1, x2, R0, R2)
    return state, closed_form_a
