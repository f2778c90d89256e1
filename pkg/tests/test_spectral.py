import cmath
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from idnls.spectral import EigenQuartet, canonical_eigenvalue, omega, tw_velocity

alphas = st.floats(0.05, 2.0)
betas = st.floats(-math.pi, math.pi)


def test_tw_examples():
    assert tw_velocity(cmath.exp(0.5)) == pytest.approx(0.0, abs=1e-15)
    z = cmath.exp(complex(0.5, -math.pi / 4))
    assert tw_velocity(z) == pytest.approx(math.sinh(1.0) / 0.5, rel=1e-14)
    with pytest.raises(ValueError):
        tw_velocity(0.5)


@given(alphas, betas)
def test_quartet_members_share_velocity_class(a, b):
    q = EigenQuartet.from_polar(a, b, 2 - 1j)
    assert abs(q.z) > 1
    assert q.z.real > 0 or (q.z.real == 0 and q.z.imag > 0)
    assert q.tw == pytest.approx(tw_velocity(-q.z), rel=1e-9, abs=1e-12)
    assert q.C_star == pytest.approx(q.z.conjugate() ** -2 * (2 + 1j))
    assert len(set(q.members)) == 4


@given(alphas, betas, st.floats(0, 5))
def test_norming_constant_evolution_composes(a, b, t):
    q = EigenQuartet.from_polar(a, b, 1.0)
    one = q.evolved(t)
    two = q.evolved(t / 2).evolved(t / 2)
    assert one.C == pytest.approx(two.C, rel=1e-9)
    assert abs(one.C) == pytest.approx(math.exp(-2 * omega(q.z).imag * t), rel=1e-9)


def test_canonical_eigenvalue():
    assert canonical_eigenvalue(-2 + 1j) == 2 - 1j
    assert canonical_eigenvalue(-3j) == 3j
    assert canonical_eigenvalue(1 - 1j) == 1 - 1j


def test_tw_unit_scale_example():
    # alpha = 1, beta = -pi/4: tw = sinh(2) = 3.626860...
    assert tw_velocity(cmath.exp(complex(1.0, -math.pi / 4))) == pytest.approx(3.626860407847019, rel=1e-14)
