import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from idnls.errors import AssumptionViolated, ConfigError, ZeroSpectralParameter
from idnls.lattice import IntegratorConfig, LatticeState, conserved_product, integrate
from idnls.scattering import (
    ScatteringConfig,
    ScatteringData,
    a_values,
    compute_ab,
    evolve_scattering,
    find_eigenvalues,
    jost_solution,
    norming_constant,
    scatter,
    transfer_matrix,
)
from idnls.solitons import bright_soliton, build_three_site
from idnls.spectral import EigenQuartet

# zero of a(z) = 1 - 1.44 z^-2 - 0.35 z^-4 with |z| > 1 for R = (0.5, 1.2, 0.7),
# from the polynomial roots at 30 digits
THREE_SITE_ZERO = 1.28525476874343458703695290768


def random_states(max_amp=0.6):
    amp = st.floats(-max_amp, max_amp, allow_nan=False)
    return st.builds(
        lambda n0, v: LatticeState(n0, np.array([complex(a, b) for a, b in v])),
        st.integers(-10, 10),
        st.lists(st.tuples(amp, amp), min_size=3, max_size=10),
    )


def test_transfer_matrix_determinant():
    M = transfer_matrix(1.3 - 0.2j, 0.4 + 0.9j)
    assert np.linalg.det(M) == pytest.approx(1 + abs(0.4 + 0.9j) ** 2)
    with pytest.raises(ZeroSpectralParameter):
        transfer_matrix(0, 1)


def test_zero_state_has_trivial_data():
    s = LatticeState.zeros(-4, 4)
    a, b = compute_ab(cmath.exp(0.3j), s)
    assert a == 1 and b == 0
    data = scatter(s, 64)
    assert data.quartets == () and np.all(data.r == 0)


@given(random_states(), st.floats(0, 2 * math.pi))
def test_characterization_and_parity(s, theta):
    z = cmath.exp(1j * theta)
    a, b = compute_ab(z, s)
    c = conserved_product(s)
    assert abs(abs(a) ** 2 + abs(b) ** 2 - c) <= 1e-10 * c
    a2, b2 = compute_ab(-z, s)
    assert a2 == pytest.approx(a, abs=1e-12 * c)
    assert b2 / a2 == pytest.approx(-b / a, abs=1e-10)


@given(random_states())
def test_a_tends_to_one(s):
    for z in (1e3, 1e3j, 1e3 * cmath.exp(0.7j)):
        assert abs(compute_ab(z, s)[0] - 1) < 1e-5


def test_three_site_zero_matches_polynomial_root():
    s = LatticeState(0, [0.5, 1.2, 0.7])
    zs = find_eigenvalues(s)
    assert len(zs) == 1
    assert zs[0] == pytest.approx(THREE_SITE_ZERO, abs=1e-12)


def test_two_site_complex_zero():
    s = LatticeState(0, [0.9 + 0.4j, -0.6 + 1.1j, 0])
    # a = 1 + (0.1 + 1.23 i) z^-2
    expected = cmath.sqrt(-(0.1 + 1.23j))
    (z,) = find_eigenvalues(s)
    assert z == pytest.approx(expected if expected.real > 0 else -expected, abs=1e-12)


def test_soliton_round_trip():
    z1 = cmath.exp(0.5 + 2.0j)
    n = np.arange(-60, 61)
    for C in (1.0, 2j, 0.3 - 0.1j):
        data = scatter(LatticeState(-60, bright_soliton(n, 0.0, z1, C)))
        (q,) = data.quartets
        assert q.z == pytest.approx(EigenQuartet(z1).z, abs=1e-10)
        assert q.C == pytest.approx(C, rel=1e-8)
        assert np.abs(data.r).max() < 1e-10


def test_norming_constant_ignores_window_padding():
    z1 = cmath.exp(0.7 - 0.3j)
    R = bright_soliton(np.arange(-30, 31), 0.0, z1, 1.5)
    s1 = LatticeState(-30, R)
    s2 = LatticeState(-30, np.concatenate([R, np.zeros(20)]))
    assert norming_constant(z1, s1) == pytest.approx(norming_constant(z1, s2), rel=1e-10)


def test_zero_on_circle_detected():
    # a(z) = (z^2 - 1)(z^2 - 4) / z^4 vanishes at z = 1
    from idnls.solitons import build_three_site

    s, _ = build_three_site(1.0, 4.0)
    with pytest.raises(AssumptionViolated) as exc:
        scatter(s)
    assert exc.value.kind == "zero_on_circle"


def test_evolve_scattering_matches_simulation():
    n = np.arange(-80, 81)
    R = bright_soliton(n, 0.0, cmath.exp(0.6 + 0.4j), 1.0) + 0.2 * np.exp(-((n - 3) ** 2) / 4)
    s = LatticeState(-80, R)
    d0 = scatter(s, 256)
    s5 = integrate(s, IntegratorConfig(dt=5e-3, snapshot_times=(3.0,)))[0]
    direct = scatter(s5, 256)
    evolved = evolve_scattering(d0, 3.0)
    assert np.abs(direct.b - evolved.b).max() < 1e-8
    assert np.abs(direct.a - evolved.a).max() < 1e-8
    assert direct.quartets[0].C == pytest.approx(evolved.quartets[0].C, rel=1e-7)
    with pytest.raises(ConfigError):
        evolve_scattering(evolved, 1.0)


def test_r_interpolation_is_spectral():
    theta = 2 * np.pi * np.arange(64) / 64
    f = lambda th: 0.3 * np.sin(th) + 0.1j * np.sin(3 * th)
    data = ScatteringData.from_reflection(f(theta))
    probe = np.linspace(0, 2 * np.pi, 37)
    assert np.abs(data.r_at(probe) - f(probe)).max() < 1e-14


def test_config_and_grid_validation():
    with pytest.raises(ConfigError):
        ScatteringConfig(eps0=0)
    with pytest.raises(ConfigError):
        scatter(LatticeState.zeros(0, 4), 100)
    with pytest.raises(ConfigError):
        ScatteringData(np.ones(6), np.zeros(6))


def test_a_values_vectorized():
    s = LatticeState(0, [0.5, 1.2, 0.7])
    zs = np.array([1.5, 2j, 3 - 1j])
    vec = a_values(zs, s)
    assert vec == pytest.approx([compute_ab(z, s)[0] for z in zs], abs=1e-14)
    w = zs**-2
    assert vec == pytest.approx(1 - 1.44 * w - 0.35 * w * w, abs=1e-13)


def test_transfer_matrix_examples():
    assert np.allclose(transfer_matrix(2.0, 0), np.diag([2.0, 0.5]))
    for z, R in ((1.3 - 0.2j, 0.4 + 0.9j), (cmath.exp(0.7j), -2.0), (0.3j, 1e-3)):
        assert np.linalg.det(transfer_matrix(z, R)) == pytest.approx(1 + abs(R) ** 2, rel=1e-13)


def test_evolve_scattering_identity_and_unit_modulus():
    data = scatter(LatticeState(-3, np.array([0.3, -0.2j, 0.5 + 0.1j, 0.1])), 64)
    same = evolve_scattering(data, data.base_time)
    assert np.array_equal(same.a, data.a) and np.array_equal(same.b, data.b)
    later = evolve_scattering(data, 7.5)
    assert np.max(np.abs(np.abs(later.r) - np.abs(data.r))) <= 1e-14
    q = EigenQuartet(cmath.exp(0.6), 1.5 - 0.5j)
    sol = scatter(LatticeState(-40, bright_soliton(np.arange(-40, 41), 0.0, q.z, q.C)), 64)
    moved = evolve_scattering(sol, 3.0)
    assert abs(moved.quartets[0].C) == pytest.approx(abs(sol.quartets[0].C), rel=1e-13)
    with pytest.raises(ConfigError):
        evolve_scattering(moved, 1.0)


def test_eigenvalues_of_appendix_state():
    zs = sorted(find_eigenvalues(build_three_site(4, 9)[0]), key=abs)
    assert zs == [pytest.approx(2, abs=1e-12), pytest.approx(3, abs=1e-12)]


def test_eigenvalue_of_sampled_soliton_is_canonical():
    z1 = cmath.exp(complex(0.5, 2.0))
    n = np.arange(-60, 61)
    zs = find_eigenvalues(LatticeState(-60, bright_soliton(n, 0.0, z1, 1.0)))
    assert len(zs) == 1
    assert zs[0] == pytest.approx(-z1, abs=1e-6)


def test_norming_constant_examples():
    z1 = cmath.exp(complex(0.6, 0.4))
    n = np.arange(-60, 61)
    for C in (1.0, 2j):
        state = LatticeState(-60, bright_soliton(n, 0.0, z1, C))
        assert norming_constant(z1, state) == pytest.approx(C, abs=1e-4)


def test_zero_on_circle_from_complex_root():
    # z^2 = e^{i pi/3} puts a zero of a at e^{i pi/6}
    state, closed = build_three_site(cmath.exp(1j * math.pi / 3), 4)
    assert abs(closed(cmath.exp(1j * math.pi / 6))) < 1e-15
    with pytest.raises(AssumptionViolated) as exc:
        scatter(state)
    assert exc.value.kind == "zero_on_circle"


def test_jost_solutions_at_an_eigenvalue():
    state = build_three_site(4, 9)[0]
    z = 2.0
    phi = jost_solution(z, state, "phi")
    psi = jost_solution(z, state, "psi")
    # phi = b psi everywhere when a(z) = 0
    b = phi.values[3][1] / psi.values[3][1]
    for n in range(0, 4):
        assert np.allclose(phi.values[n], b * psi.values[n], atol=1e-12)
    # each column solves the recursion
    for kind in ("phi", "psi", "phi_star", "psi_star"):
        sol = jost_solution(1.4 + 0.3j, state, kind)
        for k, n in enumerate(range(0, 3)):
            step = transfer_matrix(sol.z, state.amplitudes[k]) @ sol.values[n]
            assert np.allclose(step, sol.values[n + 1], atol=1e-12)
    with pytest.raises(ValueError):
        jost_solution(z, state, "chi")


def test_double_zero_has_degenerate_norming_constant():
    from idnls.errors import DegenerateEigenvalue

    assert np.isfinite(abs(norming_constant(2.0, build_three_site(4, 9)[0])))
    with pytest.raises(DegenerateEigenvalue):
        norming_constant(2.0, build_three_site(4, 4)[0])
