import numpy as np
import pytest

from heisenlab.grid import GridField, GridSpec
from heisenlab.stencils import apply_vector_fields, stability_bound, sub_laplacian, sub_laplacian_array

G = GridSpec(1, 2.0, 3.0, 9, 13)


def field(func, spec=G):
    return GridField.from_function(spec, func)


# hand-derived actions of X = d_x - 2y d_tau, Y = d_y + 2x d_tau on low-degree polynomials
CASES = [
    (lambda x, y, t: x[0] ** 2 + y[0] ** 2 + 0 * t, lambda x, y, t: 4.0 + 0 * (x[0] + y[0] + t)),
    (lambda x, y, t: t + 0 * x[0], lambda x, y, t: 0 * (x[0] + y[0] + t)),
    (lambda x, y, t: t**2 + 0 * x[0], lambda x, y, t: 8 * (x[0] ** 2 + y[0] ** 2) + 0 * t),
    (lambda x, y, t: x[0] * t + 0 * y[0], lambda x, y, t: -4 * y[0] + 0 * (x[0] + t)),
    (lambda x, y, t: y[0] * t + 0 * x[0], lambda x, y, t: 4 * x[0] + 0 * (y[0] + t)),
]


@pytest.mark.parametrize("f, lap", CASES)
@pytest.mark.parametrize("boundary", ["one_sided", "dirichlet"])
def test_exact_on_quadratics(f, lap, boundary):
    got = sub_laplacian(field(f), boundary).values
    want = np.broadcast_to(field(lap).values, G.shape)
    # one-sided differences stay exact on quadratics up to the faces; the
    # zero extension does not
    m = np.ones(G.shape, bool) if boundary == "one_sided" else G.interior_mask(1)
    assert np.allclose(got[m], want[m], atol=1e-9)


def test_vector_fields():
    X, Y, T = apply_vector_fields(field(lambda x, y, t: x[0] * t + 0 * y[0]))
    xs, ys, t = G.coordinates()
    assert np.allclose(X[0].values, np.broadcast_to(t - 2 * ys[0] * xs[0], G.shape))
    assert np.allclose(Y[0].values, np.broadcast_to(2 * xs[0] ** 2 + 0 * t, G.shape))
    assert np.allclose(T.values, np.broadcast_to(xs[0] + 0 * t + 0 * ys[0], G.shape))


def test_second_order_convergence():
    def err(N):
        spec = GridSpec(1, 1.5, 2.0, N, N)
        xs, ys, t = spec.coordinates()
        r2 = xs[0] ** 2 + ys[0] ** 2
        u = np.broadcast_to(np.exp(-r2 - t**2), spec.shape)
        # closed form via the operator's coefficients
        e = np.exp(-r2 - t**2)
        lap_xy = (4 * r2 - 4) * e
        tt = 4 * r2 * (4 * t**2 - 2) * e
        mix = 4 * (xs[0] * (4 * ys[0] * t) - ys[0] * (4 * xs[0] * t)) * e
        exact = np.broadcast_to(lap_xy + tt + mix, spec.shape)
        m = spec.interior_mask(2)
        return np.max(np.abs(sub_laplacian_array(np.array(u), spec) - exact)[m])

    ratio = err(21) / err(41)
    assert 3.3 < ratio < 4.7


def test_stability_bound_makes_euler_contractive(rng):
    spec = GridSpec(1, 2.0, 4.0, 11, 11)
    dt = stability_bound(spec)
    u = rng.normal(size=spec.shape)
    for _ in range(200):
        u = u + dt * sub_laplacian_array(u, spec, "dirichlet")
    assert np.max(np.abs(u)) < 10.0


def test_stability_bound_scales_with_box():
    a = stability_bound(GridSpec(1, 2.0, 4.0, 11, 11))
    b = stability_bound(GridSpec(1, 4.0, 4.0, 21, 11))
    assert b < a


def test_unknown_boundary():
    with pytest.raises(ValueError):
        sub_laplacian(GridField.zeros(G), "periodic")
