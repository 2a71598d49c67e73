import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hjsweep.reconstruction import (LINEAR, HWENO, WeightParams, beta_minus, beta_plus,
                                    candidates_minus, candidates_plus, hweno_value, hybrid_select,
                                    nonlinear_weights, one_sided, reconstruct_point, same_sign,
                                    smoothness_indicators)
from hjsweep.grid import PointCategory

finite = st.floats(-10.0, 10.0, allow_nan=False)
steps = st.floats(0.01, 0.5)


# --------------------------------------------------------------------------
# oracles: interpolants built by linear solves, integrals by Gauss-Legendre
# --------------------------------------------------------------------------

def hermite_oracle(phi, deriv, h, side):
    """Quintic through 4 values and 2 slopes; nodes relative to x_i."""
    nodes = np.array([-2, -1, 0, 1.0]) if side == "minus" else np.array([-1, 0, 1, 2.0])
    nodes = nodes * h
    rows, rhs = [], []
    for x, val in zip(nodes, phi):
        rows.append([x ** k for k in range(6)])
        rhs.append(val)
    for x, val in zip((-h, h), deriv):
        rows.append([k * x ** (k - 1) if k else 0.0 for k in range(6)])
        rhs.append(val)
    return np.polynomial.Polynomial(np.linalg.solve(np.array(rows), np.array(rhs)))


def quadratic_oracles(phi, h, side):
    if side == "minus":
        s2, s3 = ([-2, -1, 0], phi[0:3]), ([-1, 0, 1], phi[1:4])
    else:
        s2, s3 = ([-1, 0, 1], phi[0:3]), ([0, 1, 2], phi[1:4])
    return [np.polynomial.Polynomial.fit(np.array(n) * h, vals, 2).convert() for n, vals in (s2, s3)]


def beta_oracle(p, h, r):
    xs, ws = np.polynomial.legendre.leggauss(6)
    xs, ws = 0.5 * h * xs, 0.5 * h * ws
    total = 0.0
    for a in range(2, r + 1):
        total += h ** (2 * a - 3) * np.sum(ws * p.deriv(a)(xs) ** 2)
    return total


def stencil(fun, dfun, h, side, x0=0.0):
    offs = np.array([-2, -1, 0, 1]) if side == "minus" else np.array([-1, 0, 1, 2])
    phi = fun(x0 + offs * h)
    deriv = (dfun(x0 - h), dfun(x0 + h))
    return phi, deriv


# --------------------------------------------------------------------------
# candidates
# --------------------------------------------------------------------------

def test_candidates_exact_on_linear():
    h = 0.1
    assert candidates_minus(-0.2, -0.1, 0.0, 0.1, 1.0, 1.0, h) == pytest.approx((1, 1, 1))
    assert candidates_plus(-0.1, 0.0, 0.1, 0.2, 1.0, 1.0, h) == pytest.approx((1, 1, 1))


def test_candidates_minus_on_even_quadratic():
    h = 0.1
    phi = [(k * h) ** 2 for k in (-2, -1, 0, 1)]
    d1, d2, d3 = candidates_minus(*phi, -2 * h, 2 * h, h)
    assert d1 == pytest.approx(0.0, abs=1e-14)
    assert d3 == pytest.approx(0.0, abs=1e-14)
    assert d2 == pytest.approx(0.0, abs=1e-14)


def test_plus_candidates_on_quintic():
    h = 0.1
    phi = [(k * h) ** 5 for k in (-1, 0, 1, 2)]
    d1, d2, d3 = candidates_plus(*phi, 5 * h ** 4, 5 * h ** 4, h)
    assert d1 == pytest.approx(0.0, abs=1e-15)
    assert d2 == pytest.approx(1e-4)
    assert d3 == pytest.approx((4 * h ** 5 - 32 * h ** 5) / (2 * h))


@settings(max_examples=60, deadline=None)
@given(st.lists(finite, min_size=6, max_size=6), steps, st.sampled_from(["minus", "plus"]))
def test_candidates_match_interpolant_oracle(c, h, side):
    p = np.polynomial.Polynomial(c)
    phi, deriv = stencil(p, p.deriv(), h, side)
    herm = hermite_oracle(phi, deriv, h, side)
    q2, q3 = quadratic_oracles(phi, h, side)
    fn = candidates_minus if side == "minus" else candidates_plus
    d = fn(*phi, *deriv, h)
    scale = 1 + np.abs(c).sum() / h
    np.testing.assert_allclose(d, [herm.deriv()(0.0), q2.deriv()(0.0), q3.deriv()(0.0)],
                               atol=1e-9 * scale)
    # the Hermite candidate reproduces quintics exactly
    assert d[0] == pytest.approx(p.deriv()(0.0), abs=1e-9 * scale)


@settings(max_examples=60, deadline=None)
@given(st.lists(finite, min_size=4, max_size=4), finite, finite, steps)
def test_mirror_symmetry(phi, um, up, h):
    # reflecting the stencil about x_i maps the minus side onto minus the plus side
    m = candidates_minus(*phi, um, up, h)
    r = phi[::-1]
    p = candidates_plus(*r, -up, -um, h)
    np.testing.assert_allclose(p, [-m[0], -m[2], -m[1]], atol=1e-9 * (1 + np.abs(phi).sum() / h))


# --------------------------------------------------------------------------
# smoothness indicators and weights
# --------------------------------------------------------------------------

def test_beta_zero_on_affine():
    b = smoothness_indicators([-0.2, -0.1, 0.0, 0.1], (1.0, 1.0), 0.1, "minus")
    assert np.allclose(b, 0.0, atol=1e-28)


def test_beta_quadratic_value():
    # p = c x^2 on S2 has beta = 4 c^2 h^2
    c, h = 1.7, 0.2
    phi = [c * (k * h) ** 2 for k in (-2, -1, 0, 1)]
    _, b2, b3 = beta_minus(*phi, -2 * c * h, 2 * c * h, h)
    assert b2 == pytest.approx(4 * c * c * h * h)
    assert b3 == pytest.approx(4 * c * c * h * h)


@settings(max_examples=80, deadline=None)
@given(st.lists(finite, min_size=4, max_size=4), finite, finite, steps,
       st.sampled_from(["minus", "plus"]))
def test_beta_matches_quadrature_oracle(phi, um, up, h, side):
    herm = hermite_oracle(phi, (um, up), h, side)
    q2, q3 = quadratic_oracles(phi, h, side)
    want = [beta_oracle(herm, h, 5), beta_oracle(q2, h, 2), beta_oracle(q3, h, 2)]
    got = smoothness_indicators(phi, (um, up), h, side)
    for g_, w_ in zip(got, want):
        assert g_ >= 0.0
        assert g_ == pytest.approx(w_, rel=1e-12, abs=1e-12 * (1 + max(want)))


def test_smoothness_indicators_bad_side():
    with pytest.raises(ValueError):
        smoothness_indicators([0, 0, 0, 0], (0, 0), 0.1, "left")


@settings(max_examples=200, deadline=None)
@given(st.tuples(*(st.floats(0.0, 1e6, allow_nan=False),) * 3))
def test_weights_sum_to_one(b):
    w = nonlinear_weights(*b, 1e-6, 0.98, 0.01, 0.01)
    assert sum(w) == pytest.approx(1.0)
    assert min(w) >= 0.0


@pytest.mark.parametrize("c", [0.0, 1.0, 123.4])
def test_equal_betas_give_linear_weights(c):
    assert nonlinear_weights(c, c, c, 1e-6, 0.98, 0.01, 0.01) == pytest.approx((0.98, 0.01, 0.01))


def test_weights_direct_evaluation():
    eps = 1e-6
    raw = [0.98 * (1 + 1 / (eps + 1)), 0.01 * (1 + 1 / eps), 0.01 * (1 + 1 / eps)]
    s = sum(raw)
    assert nonlinear_weights(1.0, 0.0, 0.0, eps, 0.98, 0.01, 0.01) == pytest.approx(
        [r / s for r in raw])


def test_linear_weights_recover_hermite_candidate():
    assert hweno_value(1.5, 7.0, -3.0, 0.98, 0.01, 0.01, 0.98, 0.01, 0.01) == pytest.approx(1.5)


@pytest.mark.parametrize("kwargs", [dict(epsilon=0.0), dict(gamma1=0.5),
                                    dict(gamma1=1.0, gamma2=0.0, gamma3=0.0)])
def test_weight_params_validation(kwargs):
    with pytest.raises(ValueError):
        WeightParams(**kwargs)


# --------------------------------------------------------------------------
# accuracy
# --------------------------------------------------------------------------

@pytest.mark.parametrize("side", ["minus", "plus"])
@pytest.mark.parametrize("deg", range(6))
def test_polynomial_reproduction(side, deg):
    p = np.polynomial.Polynomial(np.arange(1.0, deg + 2.0))
    h = 0.05
    phi, deriv = stencil(p, p.deriv(), h, side, x0=0.3)
    exact = p.deriv()(0.3)
    assert one_sided(phi, deriv, h, side, mode="linear") == pytest.approx(exact, rel=1e-12, abs=1e-12)
    if deg <= 1:
        assert one_sided(phi, deriv, h, side) == pytest.approx(exact, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("side", ["minus", "plus"])
def test_fifth_order_on_sine(side):
    hs = 0.2 / 2 ** np.arange(5)
    errs = []
    for h in hs:
        xs = 0.3 + h * np.arange(-4, 5)
        e = 0.0
        for x0 in xs:
            phi, deriv = stencil(np.sin, np.cos, h, side, x0)
            e = max(e, abs(one_sided(phi, deriv, h, side) - np.cos(x0)))
        errs.append(e)
    slopes = np.diff(np.log(errs)) / np.diff(np.log(hs))
    assert slopes[-1] >= 4.5


def test_one_sided_rejects_unknown_side():
    with pytest.raises(ValueError):
        one_sided([0, 0, 0, 0], (0, 0), 0.1, "up")


# --------------------------------------------------------------------------
# hybrid switch
# --------------------------------------------------------------------------

def test_same_sign_zero_counts_as_mixed():
    assert same_sign(1.0, 2.0, 3.0, 4.0)
    assert same_sign(-1.0, -2.0, -3.0, -4.0)
    assert not same_sign(1.0, 2.0, 0.0, 4.0)
    assert not same_sign(1.0, -2.0, 3.0, 4.0)


def test_hybrid_select_needs_far_interior():
    far = int(PointCategory.INTERIOR_FAR)
    near = int(PointCategory.INTERIOR_NEAR_BAND)
    assert hybrid_select(1.0, 1.0, 1.0, 1.0, far) == LINEAR
    assert hybrid_select(1.0, 1.0, 1.0, 1.0, near) == HWENO
    assert hybrid_select(1.0, -1.0, 1.0, 1.0, far) == HWENO


def test_reconstruct_point_hybrid_matches_linear_on_monotone_data():
    from hjsweep.grid import Grid2D
    g = Grid2D(11, 11)
    X, Y = g.mesh
    phi = np.exp(X) + np.exp(2 * Y)
    u, v = np.exp(X), 2 * np.exp(2 * Y)
    hyb = reconstruct_point(phi, u, v, 7, 7, g.dx, g.dy, hybrid=True)
    full = reconstruct_point(phi, u, v, 7, 7, g.dx, g.dy)
    np.testing.assert_allclose(hyb, full, rtol=1e-3)
    assert hyb[0] == pytest.approx(one_sided(phi[5:9, 7], (u[6, 7], u[8, 7]), g.dx, "minus",
                                             mode="linear"))
