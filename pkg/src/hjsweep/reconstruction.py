"""Fifth-order Hermite-WENO (HWENO) reconstruction of one-sided derivatives.

Along one grid line with spacing ``h``, the minus-side value at node ``i``
uses the big stencil ``i-2..i+1`` and the plus-side value ``i-1..i+2``; both
also read the stored derivative at ``i-1`` and ``i+1``. Each side blends a
Hermite quintic candidate with two quadratic candidates.

The scalar kernels are ``numba.njit`` functions so that the sweeping loops in
:mod:`hjsweep.solver` can inline them; they are equally callable from Python.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .grid import PointCategory

LINEAR = 0
HWENO = 1

_FAR = int(PointCategory.INTERIOR_FAR)


@dataclass(frozen=True)
class WeightParams:
    epsilon: float = 1e-6
    gamma1: float = 0.98
    gamma2: float = 0.01
    gamma3: float = 0.01

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        gs = (self.gamma1, self.gamma2, self.gamma3)
        if min(gs) <= 0 or abs(sum(gs) - 1.0) > 1e-12:
            raise ValueError("linear weights must be positive and sum to 1")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return self.epsilon, self.gamma1, self.gamma2, self.gamma3


# --------------------------------------------------------------------------
# candidates
# --------------------------------------------------------------------------

@njit(cache=True)
def candidates_minus(pm2, pm1, p0, pp1, um1, up1, h):
    """(d1, d2, d3) for the minus side at node i."""
    # differences against p0 keep roundoff proportional to the slope, not to |phi|
    em2 = pm2 - p0
    em1 = pm1 - p0
    ep1 = pp1 - p0
    d1 = (em2 + 18.0 * em1 - 10.0 * ep1 + 9.0 * h * um1 + 3.0 * h * up1) / (-18.0 * h)
    d2 = (em2 - 4.0 * em1) / (2.0 * h)
    d3 = (ep1 - em1) / (2.0 * h)
    return d1, d2, d3


@njit(cache=True)
def candidates_plus(pm1, p0, pp1, pp2, um1, up1, h):
    """(d1, d2, d3) for the plus side at node i."""
    em1 = pm1 - p0
    ep1 = pp1 - p0
    ep2 = pp2 - p0
    d1 = (10.0 * em1 - 18.0 * ep1 - ep2 + 3.0 * h * um1 + 9.0 * h * up1) / (-18.0 * h)
    d2 = (ep1 - em1) / (2.0 * h)
    d3 = (4.0 * ep1 - ep2) / (2.0 * h)
    return d1, d2, d3


# --------------------------------------------------------------------------
# smoothness indicators
# --------------------------------------------------------------------------

@njit(cache=True)
def _quintic_beta(a2, a3, a4, a5, h):
    # sum_{k=2..5} int_{-1/2}^{1/2} (P^(k))^2 dxi, P in the unit variable xi = (x - x_i)/h
    q = (4.0 * a2 * a2 + 4.0 * a2 * a4 + 39.0 * a3 * a3 + 63.0 * a3 * a5
         + (3129.0 / 5.0) * a4 * a4 + (438085.0 / 28.0) * a5 * a5)
    return q / (h * h)


@njit(cache=True)
def beta_minus(pm2, pm1, p0, pp1, um1, up1, h):
    hu0 = h * um1
    hu1 = h * up1
    a2 = 0.25 * hu0 - 0.25 * hu1 - 2.0 * p0 + pm1 + pp1
    a3 = 0.75 * hu0 + hu1 / 12.0 - p0 + 0.75 * pm1 + pm2 / 9.0 + 5.0 * pp1 / 36.0
    a4 = -0.25 * hu0 + 0.25 * hu1 + p0 - 0.5 * pm1 - 0.5 * pp1
    a5 = -0.25 * hu0 + hu1 / 12.0 + 0.5 * p0 - 0.25 * pm1 - pm2 / 18.0 - 7.0 * pp1 / 36.0
    b1 = _quintic_beta(a2, a3, a4, a5, h)
    s2 = pm2 - 2.0 * pm1 + p0
    s3 = pm1 - 2.0 * p0 + pp1
    return b1, s2 * s2 / (h * h), s3 * s3 / (h * h)


@njit(cache=True)
def beta_plus(pm1, p0, pp1, pp2, um1, up1, h):
    hu0 = h * um1
    hu1 = h * up1
    a2 = 0.25 * hu0 - 0.25 * hu1 - 2.0 * p0 + pm1 + pp1
    a3 = hu0 / 12.0 + 0.75 * hu1 + p0 - 5.0 * pm1 / 36.0 - 0.75 * pp1 - pp2 / 9.0
    a4 = -0.25 * hu0 + 0.25 * hu1 + p0 - 0.5 * pm1 - 0.5 * pp1
    a5 = hu0 / 12.0 - 0.25 * hu1 - 0.5 * p0 + 7.0 * pm1 / 36.0 + 0.25 * pp1 + pp2 / 18.0
    b1 = _quintic_beta(a2, a3, a4, a5, h)
    s2 = pm1 - 2.0 * p0 + pp1
    s3 = p0 - 2.0 * pp1 + pp2
    return b1, s2 * s2 / (h * h), s3 * s3 / (h * h)


# --------------------------------------------------------------------------
# weights and blending
# --------------------------------------------------------------------------

@njit(cache=True)
def nonlinear_weights(b1, b2, b3, eps, g1, g2, g3):
    tau = 0.5 * (abs(b1 - b2) + abs(b1 - b3))
    tau = tau * tau
    w1 = g1 * (1.0 + tau / (eps + b1))
    w2 = g2 * (1.0 + tau / (eps + b2))
    w3 = g3 * (1.0 + tau / (eps + b3))
    s = w1 + w2 + w3
    return w1 / s, w2 / s, w3 / s


@njit(cache=True)
def hweno_value(d1, d2, d3, w1, w2, w3, g1, g2, g3):
    return w1 * (d1 / g1 - (g2 / g1) * d2 - (g3 / g1) * d3) + w2 * d2 + w3 * d3


@njit(cache=True)
def linear_value(d1, d2, d3):
    return d1


@njit(cache=True)
def same_sign(a, b, c, d):
    """True iff all four values are strictly positive or all strictly negative."""
    return (a > 0.0 and b > 0.0 and c > 0.0 and d > 0.0) or (
        a < 0.0 and b < 0.0 and c < 0.0 and d < 0.0)


@njit(cache=True)
def hybrid_select(s0, s1, s2, s3, category):
    if category == _FAR and same_sign(s0, s1, s2, s3):
        return LINEAR
    return HWENO


# --------------------------------------------------------------------------
# one grid line
# --------------------------------------------------------------------------

@njit(cache=True)
def line_minus(pm2, pm1, p0, pp1, um2, um1, u0, up1, h, eps, g1, g2, g3, allow_linear, counts):
    """Minus-side derivative; ``allow_linear`` enables the monotone shortcut.

    ``counts[0]`` tallies linear evaluations, ``counts[1]`` HWENO evaluations.
    """
    d1, d2, d3 = candidates_minus(pm2, pm1, p0, pp1, um1, up1, h)
    if allow_linear and same_sign(um2, um1, u0, up1):
        counts[0] += 1
        return d1
    counts[1] += 1
    b1, b2, b3 = beta_minus(pm2, pm1, p0, pp1, um1, up1, h)
    w1, w2, w3 = nonlinear_weights(b1, b2, b3, eps, g1, g2, g3)
    return hweno_value(d1, d2, d3, w1, w2, w3, g1, g2, g3)


@njit(cache=True)
def line_plus(pm1, p0, pp1, pp2, um1, u0, up1, up2, h, eps, g1, g2, g3, allow_linear, counts):
    d1, d2, d3 = candidates_plus(pm1, p0, pp1, pp2, um1, up1, h)
    if allow_linear and same_sign(um1, u0, up1, up2):
        counts[0] += 1
        return d1
    counts[1] += 1
    b1, b2, b3 = beta_plus(pm1, p0, pp1, pp2, um1, up1, h)
    w1, w2, w3 = nonlinear_weights(b1, b2, b3, eps, g1, g2, g3)
    return hweno_value(d1, d2, d3, w1, w2, w3, g1, g2, g3)


@njit(cache=True)
def reconstruct_at(phi, u, v, i, j, dx, dy, eps, g1, g2, g3, allow_linear, counts):
    """(phi_x^-, phi_x^+, phi_y^-, phi_y^+) at array index (i, j)."""
    xm = line_minus(phi[i - 2, j], phi[i - 1, j], phi[i, j], phi[i + 1, j],
                    u[i - 2, j], u[i - 1, j], u[i, j], u[i + 1, j],
                    dx, eps, g1, g2, g3, allow_linear, counts)
    xp = line_plus(phi[i - 1, j], phi[i, j], phi[i + 1, j], phi[i + 2, j],
                   u[i - 1, j], u[i, j], u[i + 1, j], u[i + 2, j],
                   dx, eps, g1, g2, g3, allow_linear, counts)
    ym = line_minus(phi[i, j - 2], phi[i, j - 1], phi[i, j], phi[i, j + 1],
                    v[i, j - 2], v[i, j - 1], v[i, j], v[i, j + 1],
                    dy, eps, g1, g2, g3, allow_linear, counts)
    yp = line_plus(phi[i, j - 1], phi[i, j], phi[i, j + 1], phi[i, j + 2],
                   v[i, j - 1], v[i, j], v[i, j + 1], v[i, j + 2],
                   dy, eps, g1, g2, g3, allow_linear, counts)
    return xm, xp, ym, yp


# --------------------------------------------------------------------------
# Python-facing conveniences
# --------------------------------------------------------------------------

def smoothness_indicators(phi, deriv, h: float, side: str) -> tuple[float, float, float]:
    """Smoothness indicators from a stencil slice.

    ``phi`` holds the four big-stencil values (``i-2..i+1`` for ``side='minus'``,
    ``i-1..i+2`` for ``'plus'``) and ``deriv`` the derivatives at ``i-1, i+1``.
    """
    phi = [float(p) for p in phi]
    um1, up1 = (float(d) for d in deriv)
    if side == "minus":
        return beta_minus(*phi, um1, up1, h)
    if side == "plus":
        return beta_plus(*phi, um1, up1, h)
    raise ValueError(f"side must be 'minus' or 'plus', got {side!r}")


def one_sided(phi, deriv, h: float, side: str, params: WeightParams = WeightParams(),
              mode: str = "hweno") -> float:
    """Single one-sided value from a stencil slice; ``mode`` is 'hweno' or 'linear'."""
    phi = [float(p) for p in phi]
    um1, up1 = (float(d) for d in deriv)
    eps, g1, g2, g3 = params.as_tuple()
    if side == "minus":
        c = candidates_minus(*phi, um1, up1, h)
        b = beta_minus(*phi, um1, up1, h)
    elif side == "plus":
        c = candidates_plus(*phi, um1, up1, h)
        b = beta_plus(*phi, um1, up1, h)
    else:
        raise ValueError(f"side must be 'minus' or 'plus', got {side!r}")
    if mode == "linear":
        return linear_value(*c)
    w = nonlinear_weights(*b, eps, g1, g2, g3)
    return hweno_value(*c, *w, g1, g2, g3)


def reconstruct_point(phi: np.ndarray, u: np.ndarray, v: np.ndarray, i: int, j: int,
                      dx: float, dy: float, params: WeightParams = WeightParams(),
                      hybrid: bool = False, category: int = _FAR) -> tuple[float, float, float, float]:
    """One-sided derivatives at array index ``(i, j)`` (ghost-padded arrays)."""
    eps, g1, g2, g3 = params.as_tuple()
    counts = np.zeros(2, dtype=np.int64)
    allow = bool(hybrid) and category == _FAR
    return reconstruct_at(phi, u, v, i, j, dx, dy, eps, g1, g2, g3, allow, counts)
