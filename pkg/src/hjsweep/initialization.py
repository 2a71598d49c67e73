"""First-order sweeping start-up and initial derivative fields."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .grid import (PINNED, Grid2D, PointCategory, classify_points, extrapolate_derivative_ghosts,
                   extrapolate_ghosts)
from .hamiltonian import numerical_h, viscosity_bounds

BIG = 1e10


@dataclass
class InitialGuess:
    phi: np.ndarray
    u: np.ndarray
    v: np.ndarray


def eikonal_candidate(a: float, b: float, fh: float) -> float:
    """Local first-order Eikonal update for ``dx == dy`` (``fh = f * h``)."""
    return float(_eikonal_local(a, b, fh, fh, 1.0, 1.0))


@njit(cache=True)
def _eikonal_local(a, b, fx, fy, dx, dy):
    # fx = f*dx, fy = f*dy; solves ((t-a)/dx)^2 + ((t-b)/dy)^2 = f^2 with t >= max(a, b)
    t1 = min(a + fx, b + fy)
    if t1 <= max(a, b):
        return t1
    f = fx / dx
    s = dx * dx + dy * dy
    disc = f * f * s - (a - b) * (a - b)
    if disc < 0.0:
        return t1
    return (a * dy * dy + b * dx * dx + dx * dy * np.sqrt(disc)) / s


@njit(cache=True)
def _sweep_bounds(direction, n, g):
    if direction:
        return g, g + n, 1
    return g + n - 1, g - 1, -1


@njit(cache=True)
def _eikonal_sweeps(phi, f, fixed, g, nx, ny, dx, dy, tol, max_cycles):
    inf = np.inf
    for cycle in range(max_cycles):
        change = 0.0
        for d in range(4):
            i0, i1, si = _sweep_bounds(d == 0 or d == 3, nx, g)
            j0, j1, sj = _sweep_bounds(d == 0 or d == 1, ny, g)
            for i in range(i0, i1, si):
                for j in range(j0, j1, sj):
                    if fixed[i, j]:
                        continue
                    a = inf
                    if i > g:
                        a = phi[i - 1, j]
                    if i < g + nx - 1:
                        a = min(a, phi[i + 1, j])
                    b = inf
                    if j > g:
                        b = phi[i, j - 1]
                    if j < g + ny - 1:
                        b = min(b, phi[i, j + 1])
                    if a >= BIG and b >= BIG:
                        continue
                    t = _eikonal_local(a, b, f[i, j] * dx, f[i, j] * dy, dx, dy)
                    if t < phi[i, j]:
                        change = max(change, phi[i, j] - t)
                        phi[i, j] = t
        if change <= tol:
            return cycle + 1
    return max_cycles


@njit(cache=True)
def _lf_sweeps(phi, f, fixed, g, nx, ny, dx, dy, code, par, tol, max_cycles):
    alpha, beta = par[0], par[1]
    denom = alpha / dx + beta / dy
    ilo, ihi = g, g + nx - 1
    jlo, jhi = g, g + ny - 1
    for cycle in range(max_cycles):
        change = 0.0
        for d in range(4):
            i0, i1, si = _sweep_bounds(d == 0 or d == 3, nx, g)
            j0, j1, sj = _sweep_bounds(d == 0 or d == 1, ny, g)
            for i in range(i0, i1, si):
                for j in range(j0, j1, sj):
                    if fixed[i, j]:
                        continue
                    old = phi[i, j]
                    if i == ilo or i == ihi or j == jlo or j == jhi:
                        # boundary: monotone linear extrapolation from the inside
                        new = old
                        if i == ilo:
                            new = min(new, max(2 * phi[i + 1, j] - phi[i + 2, j], phi[i + 2, j]))
                        if i == ihi:
                            new = min(new, max(2 * phi[i - 1, j] - phi[i - 2, j], phi[i - 2, j]))
                        if j == jlo:
                            new = min(new, max(2 * phi[i, j + 1] - phi[i, j + 2], phi[i, j + 2]))
                        if j == jhi:
                            new = min(new, max(2 * phi[i, j - 1] - phi[i, j - 2], phi[i, j - 2]))
                    else:
                        e, w = phi[i + 1, j], phi[i - 1, j]
                        n, s = phi[i, j + 1], phi[i, j - 1]
                        ub = (e - w) / (2 * dx)
                        vb = (n - s) / (2 * dy)
                        # numerical_h with um = up = ub is the central H; viscosity handled here
                        hc = numerical_h(code, par, ub, ub, vb, vb)
                        new = (f[i, j] - hc + alpha * (e + w) / (2 * dx)
                               + beta * (n + s) / (2 * dy)) / denom
                    if new != old:
                        change = max(change, abs(new - old))
                        phi[i, j] = new
        if change <= tol:
            return cycle + 1
    return max_cycles


def _pinned_field(problem, grid: Grid2D, cat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X, Y = grid.mesh
    fixed = np.isin(cat, [int(c) for c in PINNED])
    values = np.zeros(grid.shape)
    values[fixed] = problem.pinned_values(X[fixed], Y[fixed])
    return fixed, values


def first_order_fsm_eikonal(problem, grid: Grid2D, cat: Optional[np.ndarray] = None,
                            tol: float = 1e-12, max_cycles: int = 10_000) -> np.ndarray:
    """Zhao-style first-order fast sweeping; pinned points keep their exact values."""
    if problem.hamiltonian.is_lax_friedrichs:
        raise ValueError("first_order_fsm_eikonal needs a Godunov-Eikonal problem")
    if cat is None:
        cat = classify_points(grid, problem)
    fixed, values = _pinned_field(problem, grid, cat)
    X, Y = grid.mesh
    f = np.asarray(problem.f(X, Y), dtype=float) * np.ones(grid.shape)
    phi = np.where(fixed, values, BIG)
    _eikonal_sweeps(phi, f, fixed, grid.ghost_width, grid.nx, grid.ny, grid.dx, grid.dy,
                    tol, max_cycles)
    return extrapolate_ghosts(phi, grid)


def first_order_fsm_lf(problem, grid: Grid2D, cat: Optional[np.ndarray] = None,
                       ham=None, tol: float = 1e-6, max_cycles: int = 20_000) -> np.ndarray:
    """First-order Lax-Friedrichs sweeping for a general convex-or-not ``H``.

    ``ham`` overrides the problem Hamiltonian (e.g. to supply viscosity
    constants); by default they are sampled over the unit slowness box scaled
    to the data.
    """
    if cat is None:
        cat = classify_points(grid, problem)
    if ham is None:
        ham = problem.hamiltonian
        if not ham.is_lax_friedrichs:
            ham = ham.__class__("lf-norm")
        ham = startup_viscosity(problem, grid, ham)
    fixed, values = _pinned_field(problem, grid, cat)
    X, Y = grid.mesh
    f = np.asarray(problem.f(X, Y), dtype=float) * np.ones(grid.shape)
    # start from a supersolution: every point reachable within the domain diameter
    diam = np.hypot(grid.xmax - grid.xmin, grid.ymax - grid.ymin)
    theta = np.linspace(0, 2 * np.pi, 721)
    hmin = float(np.min(ham.H(np.cos(theta), np.sin(theta))))
    top = float(values[fixed].max()) if fixed.any() else 0.0
    start = top + 2.0 * diam * float(f[grid.interior].max()) / max(hmin, 1e-12)
    phi = np.where(fixed, values, start)
    code, par = ham.kernel_args()
    _lf_sweeps(phi, f, fixed, grid.ghost_width, grid.nx, grid.ny, grid.dx, grid.dy,
               code, par, tol, max_cycles)
    return extrapolate_ghosts(phi, grid)


def startup_viscosity(problem, grid: Grid2D, ham):
    """Viscosity constants from the range of gradients the data can reach."""
    X, Y = grid.mesh
    f = np.asarray(problem.f(X, Y), dtype=float)
    theta = np.linspace(0, 2 * np.pi, 721)
    hmin = float(np.min(ham.H(np.cos(theta), np.sin(theta))))
    # |grad phi| <= max f / min_{|n|=1} H(n) for a 1-homogeneous H
    r = 1.2 * float(np.max(f)) / max(hmin, 1e-12)
    alpha, beta = viscosity_bounds(ham, -r, r, -r, r)
    return ham.with_viscosity(alpha, beta)


def init_derivatives(phi: np.ndarray, grid: Grid2D) -> tuple[np.ndarray, np.ndarray]:
    """Forward differences, backward on the last interior row/column."""
    g, nx, ny = grid.ghost_width, grid.nx, grid.ny
    core = phi[g:g + nx, g:g + ny]
    u = np.empty_like(core)
    v = np.empty_like(core)
    u[:-1, :] = (core[1:, :] - core[:-1, :]) / grid.dx
    u[-1, :] = (core[-1, :] - core[-2, :]) / grid.dx
    v[:, :-1] = (core[:, 1:] - core[:, :-1]) / grid.dy
    v[:, -1] = (core[:, -1] - core[:, -2]) / grid.dy
    U = grid.zeros()
    V = grid.zeros()
    U[g:g + nx, g:g + ny] = u
    V[g:g + nx, g:g + ny] = v
    return extrapolate_ghosts(U, grid), extrapolate_ghosts(V, grid)


# --------------------------------------------------------------------------
# classical WENO5 point-value derivatives (for pinned points without an
# analytic gradient)
# --------------------------------------------------------------------------

def weno5_derivative(d1, d2, d3, d4, d5, eps: float = 1e-6):
    """Upwind-biased WENO5 derivative from five consecutive first differences."""
    p1 = d1 / 3 - 7 * d2 / 6 + 11 * d3 / 6
    p2 = -d2 / 6 + 5 * d3 / 6 + d4 / 3
    p3 = d3 / 3 + 5 * d4 / 6 - d5 / 6
    s1 = 13 / 12 * (d1 - 2 * d2 + d3) ** 2 + 0.25 * (d1 - 4 * d2 + 3 * d3) ** 2
    s2 = 13 / 12 * (d2 - 2 * d3 + d4) ** 2 + 0.25 * (d2 - d4) ** 2
    s3 = 13 / 12 * (d3 - 2 * d4 + d5) ** 2 + 0.25 * (3 * d3 - 4 * d4 + d5) ** 2
    a1 = 0.1 / (eps + s1) ** 2
    a2 = 0.6 / (eps + s2) ** 2
    a3 = 0.3 / (eps + s3) ** 2
    return (a1 * p1 + a2 * p2 + a3 * p3) / (a1 + a2 + a3)


def weno5_gradient(field, x, y, dx: float, dy: float) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of a callable ``field`` at points ``(x, y)`` by WENO5.

    Both one-sided values are formed; where they agree in sign the upwind one
    is kept (same rule as the derivative update), otherwise their mean.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    k = np.arange(-3, 4)

    def one_axis(step, along_x):
        if along_x:
            vals = field(x[..., None] + k * step, np.broadcast_to(y[..., None], x.shape + (7,)))
        else:
            vals = field(np.broadcast_to(x[..., None], x.shape + (7,)), y[..., None] + k * step)
        d = np.diff(vals, axis=-1) / step  # 6 differences, d[m] between nodes m-3, m-2
        minus = weno5_derivative(d[..., 0], d[..., 1], d[..., 2], d[..., 3], d[..., 4])
        plus = weno5_derivative(d[..., 5], d[..., 4], d[..., 3], d[..., 2], d[..., 1])
        return np.where((minus > 0) & (plus > 0), minus,
                        np.where((minus < 0) & (plus < 0), plus, 0.5 * (minus + plus)))

    return one_axis(dx, True), one_axis(dy, False)


def pinned_derivatives(problem, grid: Grid2D, cat: np.ndarray, u: np.ndarray, v: np.ndarray):
    """Overwrite ``u``, ``v`` at pinned points with exact (or WENO5) derivatives."""
    X, Y = grid.mesh
    fixed = np.isin(cat, [int(c) for c in PINNED])
    if problem.exact_grad is not None:
        gx, gy = problem.exact_grad(X[fixed], Y[fixed])
    else:
        gx, gy = weno5_gradient(problem.pinned_values, X[fixed], Y[fixed], grid.dx, grid.dy)
    u[fixed] = gx
    v[fixed] = gy
    return u, v


def initial_guess(problem, grid: Grid2D, cat: Optional[np.ndarray] = None,
                  ham=None) -> InitialGuess:
    if cat is None:
        cat = classify_points(grid, problem)
    if problem.hamiltonian.is_lax_friedrichs:
        phi = first_order_fsm_lf(problem, grid, cat, ham)
    else:
        phi = first_order_fsm_eikonal(problem, grid, cat)
    u, v = init_derivatives(phi, grid)
    pinned_derivatives(problem, grid, cat, u, v)
    extrapolate_derivative_ghosts(u, v, phi, grid)
    return InitialGuess(phi, u, v)
