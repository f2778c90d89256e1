import cmath

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from idnls.errors import ConfigError, TailOverflow
from idnls.lattice import (
    IntegratorConfig,
    LatticeState,
    conserved_product,
    integrate,
    norm_l1p,
    rhs,
    step,
)
from idnls.solitons import bright_soliton, bright_soliton_dt

Z1 = cmath.exp(0.5 + 2.0j)


def small_states(max_len=12, max_amp=0.8):
    amp = st.floats(-max_amp, max_amp, allow_nan=False)
    vals = st.lists(st.tuples(amp, amp), min_size=3, max_size=max_len)
    return st.builds(
        lambda n0, v: LatticeState(n0, np.array([complex(a, b) for a, b in v])),
        st.integers(-20, 20),
        vals,
    )


def test_zero_state_is_fixed_point():
    s = LatticeState.zeros(-5, 5)
    assert np.all(rhs(s) == 0)
    snaps = integrate(s, IntegratorConfig(dt=0.01, snapshot_times=(1.0,)))
    assert np.all(snaps[0].amplitudes == 0)


def test_single_site_rhs():
    s = LatticeState(-1, np.array([0, 1, 0]))
    np.testing.assert_allclose(rhs(s), [1j, -2j, 1j])


def test_rhs_matches_analytic_soliton_derivative():
    n = np.arange(-60, 61)
    for t in (0.0, 0.7, 2.3):
        s = LatticeState(-60, bright_soliton(n, t, Z1, 1.0), t)
        inner = slice(10, -10)
        err = np.abs(rhs(s) - bright_soliton_dt(n, t, Z1, 1.0))[inner].max()
        assert err < 1e-10


def test_conserved_product_examples():
    assert conserved_product(LatticeState.zeros(0, 4)) == 1.0
    assert conserved_product(LatticeState(0, [1, 0, 0])) == pytest.approx(2.0, rel=1e-15)


def test_norm_examples():
    assert norm_l1p(LatticeState.zeros(0, 6), 0) == 0
    s = LatticeState(4, [0, 2, 0])
    assert norm_l1p(s, 0) == 2
    assert norm_l1p(s, 1) == 12
    with pytest.raises(ConfigError):
        norm_l1p(s, -1)


def test_state_validation():
    with pytest.raises(ConfigError):
        LatticeState(0, [1, 2])
    with pytest.raises(ConfigError):
        LatticeState(0, [1, np.nan, 0])
    s = LatticeState(-2, [1, 2, 3])
    assert s.n_max == 0 and s.at(-2) == 1 and s.at(5) == 0
    with pytest.raises(ValueError):
        s.amplitudes[0] = 5


def test_config_validation():
    with pytest.raises(ConfigError):
        IntegratorConfig(dt=0)
    with pytest.raises(ConfigError):
        IntegratorConfig(snapshot_times=(2.0, 1.0))
    with pytest.raises(ConfigError):
        IntegratorConfig(tail_guard=0)


def test_tail_overflow_on_narrow_window():
    s = LatticeState(-3, bright_soliton(np.arange(-3, 4), 0.0, Z1, 1.0))
    with pytest.raises(TailOverflow):
        step(s, IntegratorConfig(tail_guard=2))


def test_snapshots_land_exactly_on_requested_times():
    n = np.arange(-40, 41)
    s = LatticeState(-40, bright_soliton(n, 0.0, Z1, 1.0))
    snaps = integrate(s, IntegratorConfig(dt=3e-3, snapshot_times=(0.0, 0.1, 1.0)))
    assert [x.time for x in snaps] == [0.0, 0.1, 1.0]
    err = np.abs(snaps[-1].amplitudes - bright_soliton(n, 1.0, Z1, 1.0)).max()
    assert err < 1e-8
    assert snaps.max_drift < 1e-10


def test_rk4_is_fourth_order():
    n = np.arange(-40, 41)
    s = LatticeState(-40, bright_soliton(n, 0.0, Z1, 1.0))
    exact = bright_soliton(n, 1.0, Z1, 1.0)
    errs = []
    for dt in (0.04, 0.02):
        out = integrate(s, IntegratorConfig(dt=dt, snapshot_times=(1.0,)))[0]
        errs.append(np.abs(out.amplitudes - exact).max())
    assert 12 < errs[0] / errs[1] < 20


@given(small_states())
def test_reflection_commutes_with_flow(s):
    cfg = IntegratorConfig(dt=0.01, tail_tol=1e300, snapshot_times=(0.3,))
    a = integrate(s, cfg)[0].reflected()
    b = integrate(s.reflected(), cfg)[0]
    assert a.n_min == b.n_min
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-13)


@given(small_states())
def test_conserved_product_at_least_one(s):
    assert conserved_product(s) >= 1.0
    assert conserved_product(s) == pytest.approx(conserved_product(s.reflected()), rel=1e-14)
