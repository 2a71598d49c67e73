"""Benchmark problems, error norms and the anisotropic travel-time reference."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .gamma import Arc, Gamma, Points, RectBoundary, Segment
from .grid import Grid2D, PointCategory
from .hamiltonian import ElasticParams, HamiltonianKind

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]
GradField = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]

QP_MEDIUM = ElasticParams(a11=15.0638, a33=10.8373, a13=1.6381, a44=3.1258)
QSV_MEDIUM = ElasticParams(a11=15.90, a33=6.21, a13=4.82, a44=4.00)


@dataclass(frozen=True)
class PinnedBox:
    """Square of half-width ``half`` (absolute, or in units of ``h`` when ``in_h``)."""

    cx: float
    cy: float
    half: float
    in_h: bool = False

    def contains(self, X: np.ndarray, Y: np.ndarray, h: float) -> np.ndarray:
        half = self.half * h if self.in_h else self.half
        lim = half * (1.0 + 1e-12)
        return (np.abs(X - self.cx) <= lim) & (np.abs(Y - self.cy) <= lim)


def _everywhere(X, Y):
    return np.ones(np.broadcast(X, Y).shape, dtype=bool)


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    domain: tuple[float, float, float, float]
    hamiltonian: HamiltonianKind
    f: Field
    gamma: Gamma
    exact_phi: Optional[Field] = None
    exact_grad: Optional[GradField] = None
    boundary_phi: Optional[Field] = None
    pinned_boxes: tuple[PinnedBox, ...] = ()
    error_mask: Field = _everywhere
    description: str = ""
    ladder: tuple[int, ...] = (40, 80, 160)

    @property
    def pinned_values(self) -> Field:
        """Values imposed at pinned points (the exact solution unless overridden)."""
        if self.boundary_phi is not None:
            return self.boundary_phi
        if self.exact_phi is None:
            raise ValueError(f"{self.name}: no exact or boundary values")
        return self.exact_phi

    def grid(self, n: int) -> Grid2D:
        """Mesh with ``n`` cells (``n + 1`` nodes) per axis."""
        xmin, xmax, ymin, ymax = self.domain
        return Grid2D(n + 1, n + 1, xmin, xmax, ymin, ymax)


@dataclass
class ErrorReport:
    l1: float
    linf: float
    count: int
    order_l1: Optional[float] = None
    order_linf: Optional[float] = None
    iterations: Optional[int] = None
    wall_time: Optional[float] = None


def measured_points(problem: ProblemSpec, grid: Grid2D, cat: np.ndarray) -> np.ndarray:
    X, Y = grid.mesh
    mask = np.asarray(problem.error_mask(X, Y), dtype=bool)
    return mask & ((cat == PointCategory.INTERIOR_FAR) | (cat == PointCategory.INTERIOR_NEAR_BAND))


def masked_error(phi: np.ndarray, problem: ProblemSpec, grid: Grid2D, cat: np.ndarray,
                 reference: Optional[np.ndarray] = None) -> ErrorReport:
    """Mean and max of ``|phi - exact|`` over measured, non-pinned points.

    ``reference`` overrides the analytic solution (array over the padded grid).
    """
    if reference is None:
        if problem.exact_phi is None:
            raise ValueError(f"{problem.name} has no exact solution; pass a reference field")
        X, Y = grid.mesh
        reference = problem.exact_phi(X, Y)
    sel = measured_points(problem, grid, cat)
    err = np.abs(phi[sel] - reference[sel])
    if err.size == 0:
        return ErrorReport(0.0, 0.0, 0)
    return ErrorReport(float(err.mean()), float(err.max()), int(err.size))


def convergence_order(e_coarse: float, e_fine: float) -> Optional[float]:
    if e_coarse > 0 and e_fine > 0:
        return float(np.log2(e_coarse / e_fine))
    return None


# --------------------------------------------------------------------------
# anisotropic point-source travel time
# --------------------------------------------------------------------------

def slowness_radius(theta: np.ndarray, elastic: ElasticParams, branch: str = "qp") -> np.ndarray:
    """Positive root ``r`` of the slowness quartic along direction ``theta``."""
    c1, c2, c3, c4, c5 = elastic.coefficients
    c, s = np.cos(theta), np.sin(theta)
    a = c1 * c ** 4 + c2 * c * c * s * s + c3 * s ** 4
    b = c4 * c * c + c5 * s * s
    disc = b * b - 4.0 * a
    if np.any(disc < 0) or np.any(a <= 0):
        raise ValueError("slowness quartic has no positive root in some direction")
    sign = -1.0 if branch == "qp" else 1.0
    r2 = (-b + sign * np.sqrt(disc)) / (2.0 * a)
    if np.any(r2 <= 0):
        raise ValueError("slowness quartic has no positive root in some direction")
    return np.sqrt(r2)


def slowness_support(x, y, elastic: ElasticParams, branch: str = "qp",
                     samples: int = 4096, refine: int = 64, chunk: int = 2048) -> np.ndarray:
    """``max_theta (x, y) . p(theta)`` over the slowness curve (point source at the origin)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast(x, y).shape
    xf = np.broadcast_to(x, shape).ravel()
    yf = np.broadcast_to(y, shape).ravel()
    theta = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    r = slowness_radius(theta, elastic, branch)
    px, py = r * np.cos(theta), r * np.sin(theta)
    dth = theta[1] - theta[0]
    out = np.empty(xf.size)
    for start in range(0, xf.size, chunk):
        xs = xf[start:start + chunk]
        ys = yf[start:start + chunk]
        vals = xs[:, None] * px[None, :] + ys[:, None] * py[None, :]
        k = np.argmax(vals, axis=1)
        lo = theta[k] - dth
        hi = theta[k] + dth
        out[start:start + chunk] = _golden_max(xs, ys, lo, hi, elastic, branch, refine)
        out[start:start + chunk] = np.maximum(out[start:start + chunk], vals.max(axis=1))
    return out.reshape(shape)


def _golden_max(x, y, lo, hi, elastic, branch, iterations):
    def g(t):
        r = slowness_radius(t, elastic, branch)
        return r * (x * np.cos(t) + y * np.sin(t))

    ratio = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo.copy(), hi.copy()
    c = b - ratio * (b - a)
    d = a + ratio * (b - a)
    gc, gd = g(c), g(d)
    for _ in range(iterations):
        left = gc > gd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - ratio * (b - a)
        new_d = a + ratio * (b - a)
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        gc_next = np.where(left, g(new_c), gd)
        gd_next = np.where(left, gc, g(new_d))
        c, d, gc, gd = c_next, d_next, gc_next, gd_next
    return np.maximum(gc, gd)


def pwave_reference(x, y, elastic: ElasticParams = QP_MEDIUM) -> np.ndarray:
    return slowness_support(x, y, elastic, "qp")


# --------------------------------------------------------------------------
# the built-in examples
# --------------------------------------------------------------------------

def _box(half):
    def inside(X, Y):
        return (np.abs(X) <= half) & (np.abs(Y) <= half)
    return inside


def _ex1() -> ProblemSpec:
    k = np.pi / 2.0

    def f(X, Y):
        return k * np.sqrt(np.sin(np.pi + k * X) ** 2 + np.sin(np.pi + k * Y) ** 2)

    def exact(X, Y):
        return np.cos(np.pi + k * X) + np.cos(np.pi + k * Y)

    def grad(X, Y):
        return -k * np.sin(np.pi + k * X), -k * np.sin(np.pi + k * Y)

    return ProblemSpec("ex1_sine_source", (-1.0, 1.0, -1.0, 1.0), HamiltonianKind(), f,
                       Gamma((Points(((0.0, 0.0),)),)), exact, grad,
                       description="Eikonal, smooth solution, point source at the origin")


def _unit(X, Y):
    return np.ones(np.broadcast(X, Y).shape)


def _distance_problem(name, domain, gamma, mask, description, boxes=(), ladder=(40, 80, 160)):
    return ProblemSpec(name, domain, HamiltonianKind(), _unit, gamma,
                       exact_phi=lambda X, Y: gamma.distance(X, Y),
                       exact_grad=lambda X, Y: gamma.distance_gradient(X, Y),
                       pinned_boxes=boxes, error_mask=mask, description=description,
                       ladder=ladder)


def _ex2() -> ProblemSpec:
    inner, outer = _box(0.15), _box(0.9)
    return _distance_problem(
        "ex2_circle", (-1.0, 1.0, -1.0, 1.0), Gamma((Arc(0.0, 0.0, 0.5),)),
        lambda X, Y: outer(X, Y) & ~inner(X, Y),
        "distance to a circle of radius 0.5")


def _ex3() -> ProblemSpec:
    s = np.sqrt(1.5)
    c = np.sqrt(0.375)
    excluded = [(-1.15, -0.85, -0.15, 0.15), (s - 0.15, s + 0.15, -0.15, 0.15),
                (c - 0.65, c - 0.35, -2.85, 2.85)]

    def mask(X, Y):
        m = (np.abs(X) <= 2.85) & (np.abs(Y) <= 2.85)
        for x0, x1, y0, y1 in excluded:
            m &= ~((X >= x0) & (X <= x1) & (Y >= y0) & (Y <= y1))
        return m

    return _distance_problem(
        "ex3_two_circles", (-3.0, 3.0, -3.0, 3.0),
        Gamma((Arc(-1.0, 0.0, 0.5), Arc(s, 0.0, 0.5))), mask,
        "distance to two circles", ladder=(80, 160))


def _ex4() -> ProblemSpec:
    return _distance_problem(
        "ex4_point_source", (-1.0, 1.0, -1.0, 1.0), Gamma((Points(((0.0, 0.0),)),)),
        _everywhere, "distance to the origin, exact values on [-0.3, 0.3]^2",
        boxes=(PinnedBox(0.0, 0.0, 0.3),))


def _ex5() -> ProblemSpec:
    gamma = Gamma((Arc(0.0, 0.0, 0.5, 0.5 * np.pi, 2.0 * np.pi),
                   Segment(0.0, 0.0, 0.5, 0.0), Segment(0.0, 0.0, 0.0, 0.5)))
    inner = _box(0.5)

    def mask(X, Y):
        return ((X <= 0.0) | (Y <= 0.0)) & ~inner(X, Y)

    return _distance_problem("ex5_sector", (-1.0, 1.0, -1.0, 1.0), gamma, mask,
                             "distance to a three-quarter disc boundary")


_EX6_SOURCES = ((0.25, 0.25), (0.75, 0.75), (0.25, 0.75), (0.75, 0.25), (0.5, 0.5))


def _ex6_common():
    tp = 2.0 * np.pi

    def f(X, Y):
        return tp * np.sqrt((np.cos(tp * X) * np.sin(tp * Y)) ** 2
                            + (np.sin(tp * X) * np.cos(tp * Y)) ** 2)

    gamma = Gamma((Points(_EX6_SOURCES), RectBoundary(0.0, 1.0, 0.0, 1.0)))
    boxes = tuple(PinnedBox(cx, cy, 2.0, in_h=True) for cx, cy in _EX6_SOURCES)
    return tp, f, gamma, boxes


def _ex6a() -> ProblemSpec:
    tp, f, gamma, boxes = _ex6_common()

    def exact(X, Y):
        return np.sin(tp * X) * np.sin(tp * Y)

    def grad(X, Y):
        return (tp * np.cos(tp * X) * np.sin(tp * Y), tp * np.sin(tp * X) * np.cos(tp * Y))

    return ProblemSpec("ex6a_shape", (0.0, 1.0, 0.0, 1.0), HamiltonianKind(), f, gamma,
                       exact, grad, pinned_boxes=boxes,
                       description="shape-from-shading, smooth case (a)")


def _ex6b_diamond(X, Y):
    return (np.abs(X + Y - 1.0) < 0.5) & (np.abs(X - Y) < 0.5)


def _ex6b() -> ProblemSpec:
    tp, f, gamma, boxes = _ex6_common()

    def exact(X, Y):
        ss = np.abs(np.sin(tp * X) * np.sin(tp * Y))
        inner = np.maximum(ss, 1.0 + np.cos(tp * X) * np.cos(tp * Y))
        return np.where(_ex6b_diamond(X, Y), inner, ss)

    def grad(X, Y):
        sgn = np.sign(np.sin(tp * X) * np.sin(tp * Y))
        gx_o = sgn * tp * np.cos(tp * X) * np.sin(tp * Y)
        gy_o = sgn * tp * np.sin(tp * X) * np.cos(tp * Y)
        gx_i = -tp * np.sin(tp * X) * np.cos(tp * Y)
        gy_i = -tp * np.cos(tp * X) * np.sin(tp * Y)
        ss = np.abs(np.sin(tp * X) * np.sin(tp * Y))
        use_inner = _ex6b_diamond(X, Y) & (1.0 + np.cos(tp * X) * np.cos(tp * Y) >= ss)
        return np.where(use_inner, gx_i, gx_o), np.where(use_inner, gy_i, gy_o)

    def pinned(X, Y):
        # the source values of case (b) differ from case (a)
        return exact(X, Y)

    return ProblemSpec("ex6b_shape", (0.0, 1.0, 0.0, 1.0), HamiltonianKind(), f, gamma,
                       exact, grad, boundary_phi=pinned, pinned_boxes=boxes,
                       description="shape-from-shading, non-smooth case (b)")


def _ex7() -> ProblemSpec:
    def f(X, Y):
        return 2.0 * np.sqrt(Y * Y * (1 - X * X) ** 2 + X * X * (1 - Y * Y) ** 2)

    def exact(X, Y):
        return (1.0 - X * X) * (1.0 - Y * Y)

    def grad(X, Y):
        return -2.0 * X * (1.0 - Y * Y), -2.0 * Y * (1.0 - X * X)

    gamma = Gamma((RectBoundary(-1.0, 1.0, -1.0, 1.0), Points(((0.0, 0.0),))))
    return ProblemSpec("ex7_biquadratic", (-1.0, 1.0, -1.0, 1.0), HamiltonianKind(), f, gamma,
                       exact, grad, pinned_boxes=(PinnedBox(0.0, 0.0, 3.0, in_h=True),),
                       description="bi-quadratic exact solution")


def _ex8(branch: str) -> ProblemSpec:
    medium = QP_MEDIUM if branch == "qp" else QSV_MEDIUM
    kind = "lf-qp" if branch == "qp" else "lf-qsv"

    def reference(X, Y):
        return slowness_support(X, Y, medium, branch)

    if branch == "qp":
        mask = _everywhere
        name, desc = "ex8_pwave", "quasi-P travel time (convex, Lax-Friedrichs)"
    else:
        def mask(X, Y):
            # kinks of the first-arrival time lie on the coordinate axes
            return (np.abs(X) >= 0.1) & (np.abs(Y) >= 0.1)
        name, desc = "ex8_svwave", "quasi-SV travel time (nonconvex, Lax-Friedrichs)"

    return ProblemSpec(name, (-1.0, 1.0, -1.0, 1.0), HamiltonianKind(kind, medium), _unit,
                       Gamma((Points(((0.0, 0.0),)),)), boundary_phi=reference,
                       pinned_boxes=(PinnedBox(0.0, 0.0, 0.3),), error_mask=mask,
                       description=desc)


_BUILDERS: dict[str, Callable[[], ProblemSpec]] = {
    "ex1_sine_source": _ex1,
    "ex2_circle": _ex2,
    "ex3_two_circles": _ex3,
    "ex4_point_source": _ex4,
    "ex5_sector": _ex5,
    "ex6a_shape": _ex6a,
    "ex6b_shape": _ex6b,
    "ex7_biquadratic": _ex7,
    "ex8_pwave": lambda: _ex8("qp"),
    "ex8_svwave": lambda: _ex8("qsv"),
}

_ALIASES = {"ex1": "ex1_sine_source", "ex2": "ex2_circle", "ex3": "ex3_two_circles",
            "ex4": "ex4_point_source", "ex5": "ex5_sector", "ex6a": "ex6a_shape",
            "ex6b": "ex6b_shape", "ex7": "ex7_biquadratic", "ex8p": "ex8_pwave",
            "ex8sv": "ex8_svwave"}


def registry() -> list[ProblemSpec]:
    return [build() for build in _BUILDERS.values()]


def get_problem(name: str) -> ProblemSpec:
    """Built-in problem by name or alias, or a custom one from a ``.json`` file."""
    key = _ALIASES.get(name, name)
    if key not in _BUILDERS and str(name).endswith(".json") and Path(name).is_file():
        return load_problem(name)
    if key not in _BUILDERS:
        raise KeyError(f"unknown problem {name!r}; known: {', '.join(sorted(_BUILDERS))}")
    return _BUILDERS[key]()


# --------------------------------------------------------------------------
# declarative problems
# --------------------------------------------------------------------------

def _expression(text: str):
    import sympy as sp

    x, y = sp.symbols("x y")
    expr = sp.sympify(text, locals={"x": x, "y": y, "pi": sp.pi})
    fn = sp.lambdify((x, y), expr, "numpy")
    gx = sp.lambdify((x, y), sp.diff(expr, x), "numpy")
    gy = sp.lambdify((x, y), sp.diff(expr, y), "numpy")

    def value(X, Y):
        return np.broadcast_to(np.asarray(fn(X, Y), dtype=float), np.broadcast(X, Y).shape).copy()

    def grad(X, Y):
        shape = np.broadcast(X, Y).shape
        # gradients of distance-like expressions are singular on the source itself
        with np.errstate(divide="ignore", invalid="ignore"):
            return (np.broadcast_to(np.asarray(gx(X, Y), dtype=float), shape).copy(),
                    np.broadcast_to(np.asarray(gy(X, Y), dtype=float), shape).copy())

    return value, grad


def _raster(path: Path, domain):
    from scipy.interpolate import RegularGridInterpolator

    data = np.loadtxt(path, delimiter=",", ndmin=2)
    xmin, xmax, ymin, ymax = domain
    xs = np.linspace(xmin, xmax, data.shape[0])
    ys = np.linspace(ymin, ymax, data.shape[1])
    interp = RegularGridInterpolator((xs, ys), data, bounds_error=False, fill_value=None)

    def value(X, Y):
        pts = np.stack(np.broadcast_arrays(X, Y), axis=-1)
        return interp(pts)

    return value


def load_problem(path: str | Path) -> ProblemSpec:
    """Build a problem from a JSON description.

    Keys: ``name``, ``domain`` ``[xmin, xmax, ymin, ymax]``, ``hamiltonian``
    (``"eikonal"`` or ``{"wave": "qp"|"qsv", "a11", "a33", "a13", "a44"}``),
    ``f`` (expression in ``x``, ``y`` or ``{"raster": "file.csv"}``), ``exact``
    and/or ``g`` (expressions), ``gamma`` (``points``, ``circles``,
    ``segments``, ``boundary``), ``boxes`` (``[cx, cy, half]`` or
    ``{"center": [cx, cy], "half": w, "units": "h"}``) and ``mask``
    (``{"box": w, "exclude": [[x0, x1, y0, y1], ...]}``).
    """
    path = Path(path)
    spec = json.loads(path.read_text())
    name = spec.get("name", path.stem)
    domain = tuple(float(v) for v in spec["domain"])
    if len(domain) != 4:
        raise ValueError("domain must be [xmin, xmax, ymin, ymax]")

    ham_spec = spec.get("hamiltonian", "eikonal")
    if ham_spec == "eikonal":
        ham = HamiltonianKind()
    elif isinstance(ham_spec, dict) and ham_spec.get("wave") in ("qp", "qsv"):
        medium = ElasticParams(*(float(ham_spec[k]) for k in ("a11", "a33", "a13", "a44")))
        ham = HamiltonianKind("lf-" + ham_spec["wave"], medium)
    else:
        raise ValueError(f"unsupported hamiltonian {ham_spec!r}")

    f_spec = spec.get("f", "1")
    if isinstance(f_spec, dict):
        f = _raster(path.parent / f_spec["raster"], domain)
    else:
        f = _expression(str(f_spec))[0]

    exact = grad = None
    if "exact" in spec:
        exact, grad = _expression(spec["exact"])
    boundary = _expression(spec["g"])[0] if "g" in spec else None
    if exact is None and boundary is None:
        raise ValueError("a problem needs 'exact' or 'g'")

    g_spec = spec.get("gamma", {})
    parts = []
    if g_spec.get("points"):
        parts.append(Points(tuple((float(a), float(b)) for a, b in g_spec["points"])))
    for cx, cy, r in g_spec.get("circles", []):
        parts.append(Arc(float(cx), float(cy), float(r)))
    for x0, y0, x1, y1 in g_spec.get("segments", []):
        parts.append(Segment(float(x0), float(y0), float(x1), float(y1)))
    if g_spec.get("boundary"):
        parts.append(RectBoundary(*domain))
    if not parts:
        raise ValueError("empty inflow set")

    boxes = []
    for b in spec.get("boxes", []):
        if isinstance(b, dict):
            cx, cy = b["center"]
            boxes.append(PinnedBox(float(cx), float(cy), float(b["half"]), b.get("units") == "h"))
        else:
            boxes.append(PinnedBox(float(b[0]), float(b[1]), float(b[2])))

    mask = _everywhere
    if "mask" in spec:
        m = spec["mask"]
        half = m.get("box")
        excluded = [tuple(map(float, e)) for e in m.get("exclude", [])]

        def mask(X, Y, half=half, excluded=excluded):
            sel = np.ones(np.broadcast(X, Y).shape, dtype=bool)
            if half is not None:
                sel &= (np.abs(X) <= half) & (np.abs(Y) <= half)
            for x0, x1, y0, y1 in excluded:
                sel &= ~((X >= x0) & (X <= x1) & (Y >= y0) & (Y <= y1))
            return sel

    return ProblemSpec(name, domain, ham, f, Gamma(tuple(parts)), exact, grad, boundary,
                       tuple(boxes), mask, spec.get("description", ""))
