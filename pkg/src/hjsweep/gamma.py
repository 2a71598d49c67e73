"""Inflow-set descriptions.

A problem's inflow set is a union of primitives. Each primitive reports the
unsigned Euclidean distance from arbitrary points to itself, the nearest point
on itself (used for exact distance-function gradients) and a bounding box used
to reject sets lying outside the computational domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage


class GammaPart:
    def distance(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        qx, qy = self.nearest(x, y)
        return np.hypot(x - qx, y - qy)

    def nearest(self, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def bounds(self) -> tuple[float, float, float, float]:
        raise NotImplementedError


@dataclass(frozen=True)
class Points(GammaPart):
    coords: tuple[tuple[float, float], ...]

    def nearest(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        pts = np.asarray(self.coords, dtype=float)
        d2 = (x[..., None] - pts[:, 0]) ** 2 + (y[..., None] - pts[:, 1]) ** 2
        k = np.argmin(d2, axis=-1)
        return pts[k, 0], pts[k, 1]

    def bounds(self):
        pts = np.asarray(self.coords, dtype=float)
        return pts[:, 0].min(), pts[:, 0].max(), pts[:, 1].min(), pts[:, 1].max()


@dataclass(frozen=True)
class Arc(GammaPart):
    """Circular arc, counter-clockwise from ``theta0`` to ``theta1`` (radians)."""

    cx: float
    cy: float
    radius: float
    theta0: float = 0.0
    theta1: float = 2.0 * np.pi

    def _full(self) -> bool:
        return self.theta1 - self.theta0 >= 2.0 * np.pi - 1e-14

    def nearest(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        dx, dy = x - self.cx, y - self.cy
        r = np.hypot(dx, dy)
        theta = np.arctan2(dy, dx)
        # at the centre every arc point is nearest; pick angle 0 (or theta0)
        safe = np.where(r > 0.0, r, 1.0)
        rx = np.where(r > 0.0, dx / safe, np.cos(self.theta0))
        ry = np.where(r > 0.0, dy / safe, np.sin(self.theta0))
        qx = self.cx + self.radius * rx
        qy = self.cy + self.radius * ry
        if self._full():
            return qx, qy
        rel = np.mod(theta - self.theta0, 2.0 * np.pi)
        inside = rel <= (self.theta1 - self.theta0)
        ax0 = self.cx + self.radius * np.cos(self.theta0)
        ay0 = self.cy + self.radius * np.sin(self.theta0)
        ax1 = self.cx + self.radius * np.cos(self.theta1)
        ay1 = self.cy + self.radius * np.sin(self.theta1)
        first = np.hypot(x - ax0, y - ay0) <= np.hypot(x - ax1, y - ay1)
        ex = np.where(first, ax0, ax1)
        ey = np.where(first, ay0, ay1)
        return np.where(inside, qx, ex), np.where(inside, qy, ey)

    def bounds(self):
        return (self.cx - self.radius, self.cx + self.radius,
                self.cy - self.radius, self.cy + self.radius)


@dataclass(frozen=True)
class Segment(GammaPart):
    x0: float
    y0: float
    x1: float
    y1: float

    def nearest(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ex, ey = self.x1 - self.x0, self.y1 - self.y0
        t = ((x - self.x0) * ex + (y - self.y0) * ey) / (ex * ex + ey * ey)
        t = np.clip(t, 0.0, 1.0)
        return self.x0 + t * ex, self.y0 + t * ey

    def bounds(self):
        return (min(self.x0, self.x1), max(self.x0, self.x1),
                min(self.y0, self.y1), max(self.y0, self.y1))


@dataclass(frozen=True)
class RectBoundary(GammaPart):
    """The four edges of an axis-aligned rectangle."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def nearest(self, x, y):
        x = np.clip(np.asarray(x, dtype=float), self.xmin, self.xmax)
        y = np.clip(np.asarray(y, dtype=float), self.ymin, self.ymax)
        gaps = np.stack([x - self.xmin, self.xmax - x, y - self.ymin, self.ymax - y])
        k = np.argmin(gaps, axis=0)
        qx = np.choose(k, [np.full_like(x, self.xmin), np.full_like(x, self.xmax), x, x])
        qy = np.choose(k, [y, y, np.full_like(y, self.ymin), np.full_like(y, self.ymax)])
        return qx, qy

    def bounds(self):
        return self.xmin, self.xmax, self.ymin, self.ymax


@dataclass(frozen=True)
class Region(GammaPart):
    """Inflow set given by a point predicate; distances are rasterized on the grid."""

    predicate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    box: tuple[float, float, float, float]

    def nearest(self, x, y):
        raise TypeError("Region inflow sets only support rasterized distances")

    def raster_distance(self, x: np.ndarray, y: np.ndarray, dx: float, dy: float) -> np.ndarray:
        inside = np.asarray(self.predicate(x, y), dtype=bool)
        if not inside.any():
            return np.full(x.shape, np.inf)
        return ndimage.distance_transform_edt(~inside, sampling=(dx, dy))

    def bounds(self):
        return self.box


@dataclass(frozen=True)
class Gamma:
    parts: Sequence[GammaPart] = field(default_factory=tuple)

    def distance(self, x: np.ndarray, y: np.ndarray, dx: float | None = None,
                 dy: float | None = None) -> np.ndarray:
        """Distance to the union of parts.

        ``dx``/``dy`` are required when a :class:`Region` part is present and
        ``x``, ``y`` must then be a full ``ij``-indexed mesh.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d = np.full(np.broadcast(x, y).shape, np.inf)
        for part in self.parts:
            if isinstance(part, Region):
                if dx is None or dy is None:
                    raise ValueError("rasterized region distance needs grid spacing")
                d = np.minimum(d, part.raster_distance(x, y, dx, dy))
            else:
                d = np.minimum(d, part.distance(x, y))
        return d

    def nearest(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        best = np.full(np.broadcast(x, y).shape, np.inf)
        qx = np.zeros_like(best)
        qy = np.zeros_like(best)
        for part in self.parts:
            px, py = part.nearest(x, y)
            d = np.hypot(x - px, y - py)
            take = d < best
            best = np.where(take, d, best)
            qx = np.where(take, px, qx)
            qy = np.where(take, py, qy)
        return qx, qy

    def distance_gradient(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        """Gradient of the unsigned distance; zero where the distance vanishes."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        qx, qy = self.nearest(x, y)
        d = np.hypot(x - qx, y - qy)
        safe = np.where(d > 0.0, d, 1.0)
        return np.where(d > 0.0, (x - qx) / safe, 0.0), np.where(d > 0.0, (y - qy) / safe, 0.0)

    def within(self, xmin: float, xmax: float, ymin: float, ymax: float, tol: float = 1e-12) -> bool:
        for part in self.parts:
            bx0, bx1, by0, by1 = part.bounds()
            if bx0 < xmin - tol or bx1 > xmax + tol or by0 < ymin - tol or by1 > ymax + tol:
                return False
        return True
