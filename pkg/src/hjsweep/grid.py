"""Uniform 2-D grid with a ghost layer, point categories and ghost extrapolation."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property, lru_cache
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .problems import ProblemSpec


class PointCategory(IntEnum):
    GAMMA_EXACT = 0  # on the inflow set
    GHOST = 1  # outside the domain, filled by extrapolation
    NEAR_GAMMA_EXACT = 2  # within 2h of the inflow set, or in a pinned box
    INTERIOR_NEAR_BAND = 3  # updated; within 2h of a pinned point
    INTERIOR_FAR = 4  # updated; eligible for the linear shortcut


PINNED = (PointCategory.GAMMA_EXACT, PointCategory.NEAR_GAMMA_EXACT)
UPDATED = (PointCategory.INTERIOR_NEAR_BAND, PointCategory.INTERIOR_FAR)

# degree-4 Lagrange extrapolation from the 5 nearest interior nodes
_EXTRAP_1 = np.array([5.0, -10.0, 10.0, -5.0, 1.0])
_EXTRAP_2 = np.array([15.0, -40.0, 45.0, -24.0, 5.0])


@dataclass(frozen=True)
class Grid2D:
    """``nx`` x ``ny`` nodes spanning the closed rectangle, plus ``ghost_width`` layers.

    Arrays are indexed ``[i, j]`` with ``i`` along x; interior node ``(i, j)``
    lives at array index ``(i + g, j + g)``.
    """

    nx: int
    ny: int
    xmin: float = -1.0
    xmax: float = 1.0
    ymin: float = -1.0
    ymax: float = 1.0
    ghost_width: int = 2

    def __post_init__(self):
        if self.nx < 5 or self.ny < 5:
            raise ValueError("need at least 5 nodes per axis for ghost extrapolation")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("empty domain")
        if self.ghost_width < 2:
            raise ValueError("ghost_width must be >= 2")

    @classmethod
    def square(cls, n: int, lo: float, hi: float) -> "Grid2D":
        return cls(n, n, lo, hi, lo, hi)

    @property
    def dx(self) -> float:
        return (self.xmax - self.xmin) / (self.nx - 1)

    @property
    def dy(self) -> float:
        return (self.ymax - self.ymin) / (self.ny - 1)

    @property
    def h(self) -> float:
        return max(self.dx, self.dy)

    @property
    def shape(self) -> tuple[int, int]:
        g = self.ghost_width
        return self.nx + 2 * g, self.ny + 2 * g

    @property
    def interior(self) -> tuple[slice, slice]:
        g = self.ghost_width
        return slice(g, g + self.nx), slice(g, g + self.ny)

    @cached_property
    def x(self) -> np.ndarray:
        g = self.ghost_width
        return self.xmin + (np.arange(self.nx + 2 * g) - g) * self.dx

    @cached_property
    def y(self) -> np.ndarray:
        g = self.ghost_width
        return self.ymin + (np.arange(self.ny + 2 * g) - g) * self.dy

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)


def classify_points(grid: Grid2D, problem: "ProblemSpec") -> np.ndarray:
    """Total category map (``int8`` array over grid and ghost points)."""
    gamma = problem.gamma
    if not gamma.within(grid.xmin, grid.xmax, grid.ymin, grid.ymax):
        raise ValueError(f"inflow set of {problem.name!r} lies outside the domain")

    h = grid.h
    X, Y = grid.mesh
    cat = np.full(grid.shape, PointCategory.INTERIOR_FAR, dtype=np.int8)

    dist = gamma.distance(X, Y, grid.dx, grid.dy)
    on_gamma = dist <= 1e-12 * h
    band = dist <= 2.0 * h * (1.0 + 1e-12)
    pinned_box = np.zeros(grid.shape, dtype=bool)
    for box in problem.pinned_boxes:
        pinned_box |= box.contains(X, Y, h)

    cat[band | pinned_box] = PointCategory.NEAR_GAMMA_EXACT
    cat[on_gamma] = PointCategory.GAMMA_EXACT

    pinned = (cat == PointCategory.GAMMA_EXACT) | (cat == PointCategory.NEAR_GAMMA_EXACT)
    near = _within_radius_of(pinned, grid, 2.0 * h)
    cat[near & ~pinned] = PointCategory.INTERIOR_NEAR_BAND

    ghost = np.ones(grid.shape, dtype=bool)
    ghost[grid.interior] = False
    cat[ghost] = PointCategory.GHOST
    return cat


def _within_radius_of(mask: np.ndarray, grid: Grid2D, radius: float) -> np.ndarray:
    """Points whose Euclidean distance to some ``mask`` point is <= radius."""
    ri = int(np.floor(radius / grid.dx * (1 + 1e-12)))
    rj = int(np.floor(radius / grid.dy * (1 + 1e-12)))
    out = np.zeros_like(mask)
    nx, ny = mask.shape
    lim = radius * radius * (1 + 1e-12)
    for di in range(-ri, ri + 1):
        for dj in range(-rj, rj + 1):
            if (di * grid.dx) ** 2 + (dj * grid.dy) ** 2 > lim:
                continue
            src = mask[max(0, -di):nx - max(0, di), max(0, -dj):ny - max(0, dj)]
            out[max(0, di):nx - max(0, -di), max(0, dj):ny - max(0, -dj)] |= src
    return out


def _extrapolated(block: np.ndarray, k: int) -> np.ndarray:
    """Degree-4 value at distance ``k`` beyond ``block[0]`` (five nodes along axis 0).

    Written relative to the boundary value (the weights sum to one) so that
    roundoff scales with the variation along the line rather than its magnitude.
    """
    w = _weights(k)
    return block[0] + np.tensordot(w[1:], block[1:] - block[0], axes=1)


def _slope(block: np.ndarray, k: int, h: float) -> np.ndarray:
    """Slope, at distance ``k`` beyond ``block[0]``, of the degree-4 interpolant (toward block[1:])."""
    w = _derivative_weights(k)
    return np.tensordot(w[1:], block[1:] - block[0], axes=1) / h


def _fill_rows(a: np.ndarray, lo: int, hi: int, g: int, cols=slice(None)) -> None:
    for k in range(1, g + 1):
        a[lo - k, cols] = _extrapolated(a[lo:lo + 5, cols], k)
        a[hi + k, cols] = _extrapolated(a[hi - 4:hi + 1, cols][::-1], k)


def extrapolate_ghosts(a: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Fill the ghost layers of ``a`` in place and return it.

    Each ghost is the degree-4 extrapolation along its grid line from the five
    nearest interior nodes. Rows are done first (x direction), then columns
    over the full x extent, which fills the corners from the x-ghosts.
    """
    g = grid.ghost_width
    _fill_rows(a, g, g + grid.nx - 1, g, slice(g, g + grid.ny))
    _fill_rows(a.T, g, g + grid.ny - 1, g)
    return a


def extrapolate_derivative_ghosts(u: np.ndarray, v: np.ndarray, phi: np.ndarray,
                                  grid: Grid2D) -> tuple[np.ndarray, np.ndarray]:
    """Fill the ghost layers of the derivative fields ``u = phi_x``, ``v = phi_y``.

    Along its own axis a derivative ghost is the slope, at the ghost node, of the
    degree-4 interpolant through the five nearest interior ``phi`` values on that
    line, so the ghost data stay consistent with ``phi``. Plain extrapolation of
    ``u`` there lets outflow boundaries drift. The cross direction (and the
    corners) uses ordinary degree-4 extrapolation of the field itself.
    """
    g = grid.ghost_width
    for d, p, n, h in ((u, phi, grid.nx, grid.dx), (v.T, phi.T, grid.ny, grid.dy)):
        lo, hi = g, g + n - 1
        for k in range(1, g + 1):
            d[lo - k, :] = _slope(p[lo:lo + 5, :], k, h)
            d[hi + k, :] = -_slope(p[hi - 4:hi + 1, :][::-1], k, h)
    # cross directions: rows of v, then columns of u (full extent, so corners too)
    _fill_rows(v, g, g + grid.nx - 1, g)
    _fill_rows(u.T, g, g + grid.ny - 1, g)
    return u, v


@lru_cache(maxsize=None)
def _lagrange_basis(k: int) -> tuple[np.poly1d, ...]:
    nodes = np.arange(5.0)
    basis = []
    for n in range(5):
        c = np.poly1d([1.0])
        for m in range(5):
            if m != n:
                c = c * np.poly1d([1.0, -nodes[m]]) / (nodes[n] - nodes[m])
        basis.append(c)
    return tuple(basis)


def _weights(k: int) -> np.ndarray:
    """Values at node ``-k`` of the degree-4 Lagrange basis on nodes 0..4."""
    if k == 1:
        return _EXTRAP_1
    if k == 2:
        return _EXTRAP_2
    return np.array([b(-float(k)) for b in _lagrange_basis(k)])


@lru_cache(maxsize=None)
def _derivative_weights(k: int) -> np.ndarray:
    """Slopes at node ``-k`` (unit spacing) of the degree-4 Lagrange basis on nodes 0..4."""
    return np.array([b.deriv()(-float(k)) for b in _lagrange_basis(k)])
