import numpy as np
import pytest

from chemotaxis_fd.diagnostics import f_integral
from chemotaxis_fd.grid import interior, make_grid, trapezoid
from chemotaxis_fd.transform import (
    InitialCondition, c_from_v, ic_gaussian, ic_heaviside, ic_smooth, v_from_c,
)


def _at(field, g, x):
    return interior(field)[int(round(x * g.n))]


def test_heaviside_values():
    g = make_grid(20)
    u0 = ic_heaviside(g)
    assert _at(u0, g, 0.3) == 1.0
    assert _at(u0, g, 0.6) == 0.0
    assert _at(u0, g, 0.8) == 1.0
    assert _at(u0, g, 0.25) == 1.0  # H(0) = 1
    assert set(np.unique(u0)) <= {0.0, 1.0}
    assert u0[0] == u0[2] and u0[-1] == u0[-3]


@pytest.mark.parametrize("n", [64, 100, 317])
def test_heaviside_mean(n):
    g = make_grid(n)
    assert trapezoid(interior(ic_heaviside(g)), g) == pytest.approx(0.5, abs=g.dx)


def test_gaussian_values():
    g = make_grid(64)
    v0 = ic_gaussian(g)
    assert _at(v0, g, 0.5) == pytest.approx(5 / 3)
    assert _at(v0, g, 0.0) == 0.0 and _at(v0, g, 1.0) == 0.0
    assert _at(v0, g, 0.25) == pytest.approx(5 / 3 * np.exp(-1.125))
    assert np.argmax(interior(v0)) == 32
    assert np.all(interior(v0) >= 0)
    assert v0[0] == -v0[2]


def test_smooth_ic():
    g = make_grid(32)
    u0, v0 = ic_smooth(g, 0.0, 0.0)
    assert np.all(u0 == 1.0) and np.all(v0 == 0.0)
    u0, v0 = ic_smooth(g, 0.2, 0.2)
    assert interior(u0).min() == pytest.approx(0.8)
    assert interior(u0)[-1] == pytest.approx(0.8)
    assert u0[0] == u0[2] and v0[1] == 0.0 and v0[-2] == 0.0
    val = f_integral(u0, g)
    assert val is not None and np.isfinite(val)
    # closed form of int(1 + 0.2 cos(pi x)) - ln(1 + 0.2 cos(pi x)) dx
    exact = 1.0 - np.log((1 + np.sqrt(1 - 0.04)) / 2)
    assert val == pytest.approx(exact, abs=1e-3)


def test_smooth_ic_rejects_nonpositive():
    with pytest.raises(ValueError):
        ic_smooth(make_grid(8), 1.0, 0.0)


def test_initial_condition_build():
    g = make_grid(16)
    s = InitialCondition.paper().build(g)
    assert s.t == 0.0 and s.u.shape == (19,)
    with pytest.raises(ValueError):
        InitialCondition("bogus")
    with pytest.raises(ValueError):
        InitialCondition("custom")
    s = InitialCondition("custom", u0=np.ones(19), v0=np.zeros(19)).build(g)
    assert np.all(s.u == 1)


def test_c_from_v_examples():
    g = make_grid(64)
    c = c_from_v(g.zeros(), g)
    assert np.all(c == 1.0)
    c = c_from_v(np.full(g.size, 2.0), g)
    np.testing.assert_allclose(interior(c), np.exp(2 * g.x), rtol=1e-12)
    assert np.all(c_from_v(g.field(lambda x: 30 * np.sin(7 * x)), g, c_left=1e-3) > 0)
    with pytest.raises(ValueError):
        c_from_v(g.zeros(), g, c_left=0.0)


def test_v_from_c_examples():
    g = make_grid(64)
    assert np.all(v_from_c(np.full(g.size, 5.0), g) == 0.0)
    v = v_from_c(g.field(np.exp), g)
    np.testing.assert_allclose(interior(v), 1.0, atol=g.dx ** 2)
    c = np.ones(g.size)
    c[10] = 0.0
    with pytest.raises(ValueError):
        v_from_c(c, g)


def _round_trip_error(n):
    g = make_grid(n)
    v = g.field(lambda x: np.sin(np.pi * x) + 0.3 * np.cos(2 * np.pi * x))
    back = v_from_c(c_from_v(v, g), g)
    return np.max(np.abs(interior(back) - interior(v)))


def test_round_trip_second_order():
    errs = [_round_trip_error(n) for n in (32, 64, 128)]
    assert errs[0] < 0.01
    assert 3.5 <= errs[0] / errs[1] <= 4.5
    assert 3.5 <= errs[1] / errs[2] <= 4.5
