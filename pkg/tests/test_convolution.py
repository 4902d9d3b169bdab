import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heisenlab.convolution import heisenberg_convolve, heisenberg_convolve_reference
from heisenlab.errors import GridError
from heisenlab.grid import GridField, GridSpec


def bump(spec, w=1.0, shift=(0.0, 0.0, 0.0)):
    def f(xs, ys, t):
        x, y = xs[0] - shift[0], ys[0] - shift[1]
        return np.exp(-((x * x + y * y) ** 2 + (t - shift[2]) ** 2) ** 0.5 / w)

    return GridField.from_function(spec, f)


@pytest.mark.parametrize("nxy, nt", [(7, 9), (8, 9), (9, 12)])
def test_fast_matches_reference(nxy, nt):
    spec = GridSpec(1, 2.0, 4.0, nxy, nt)
    f = bump(spec, 0.5, (0.3, -0.2, 0.5))
    g = bump(spec, 1.0)
    fast = heisenberg_convolve(f, g, support_tol=0.0)
    ref = heisenberg_convolve_reference(f, g)
    assert np.max(np.abs(fast.values - ref.values)) <= 1e-12 * np.max(np.abs(ref.values))


@given(st.integers(0, 2**31 - 1))
def test_fast_matches_reference_random_signed(seed):
    spec = GridSpec(1, 1.5, 2.0, 5, 7)
    rng = np.random.default_rng(seed)
    f = GridField(spec, rng.normal(size=spec.shape))
    g = GridField(spec, rng.normal(size=spec.shape))
    fast = heisenberg_convolve(f, g, support_tol=0.0)
    ref = heisenberg_convolve_reference(f, g)
    assert np.allclose(fast.values, ref.values, atol=1e-11)


def test_delta_at_identity_is_neutral():
    spec = GridSpec(1, 2.0, 4.0, 9, 11)
    f = bump(spec, 0.7, (0.5, 0.0, -1.0))
    d = np.zeros(spec.shape)
    d[spec.center_index()] = 1.0 / spec.cell_volume
    out = heisenberg_convolve(f, GridField(spec, d))
    assert np.allclose(out.values, f.values, atol=1e-13)


def test_bilinear_and_nonnegative():
    spec = GridSpec(1, 2.0, 4.0, 9, 11)
    f1, f2, g = bump(spec, 0.5), bump(spec, 0.3, (0.5, 0.5, 0.0)), bump(spec, 1.0)
    lhs = heisenberg_convolve(f1.like(2 * f1.values - 3 * f2.values), g, 0.0)
    rhs = 2 * heisenberg_convolve(f1, g, 0.0).values - 3 * heisenberg_convolve(f2, g, 0.0).values
    assert np.allclose(lhs.values, rhs, atol=1e-12)
    assert heisenberg_convolve(f1, g).values.min() >= 0.0


def test_mass_multiplies():
    spec = GridSpec(1, 4.0, 12.0, 33, 49)
    f, g = bump(spec, 0.3), bump(spec, 0.4)
    conv = heisenberg_convolve(f, g)
    assert conv.integrate() == pytest.approx(f.integrate() * g.integrate(), rel=2e-2)


def test_zero_input_short_circuits():
    spec = GridSpec(1, 1.0, 1.0, 5, 5)
    z = GridField.zeros(spec)
    assert not heisenberg_convolve(z, bump(spec)).values.any()


def test_reference_size_limit():
    spec = GridSpec(1, 1.0, 1.0, 31, 31)
    with pytest.raises(GridError):
        heisenberg_convolve_reference(GridField.zeros(spec), GridField.zeros(spec))


def test_grid_mismatch():
    with pytest.raises(GridError):
        heisenberg_convolve(GridField.zeros(GridSpec(1, 1.0, 1.0, 5, 5)),
                            GridField.zeros(GridSpec(1, 1.0, 1.0, 7, 5)))
