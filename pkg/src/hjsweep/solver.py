"""Fixed-point sweeping schemes and the convergence loop.

Every scheme advances the pseudo-time relaxation

    phi <- a * phi_old + b * phi + c * dt * (f - H^(phi_x^-, phi_x^+, phi_y^-, phi_y^+))

at the updated points (categories III and IV). Jacobi schemes read a frozen
snapshot; Gauss-Seidel (fast sweeping) schemes update in place along one of
four lexicographic orderings and refresh the stored derivatives ``u``, ``v``
at each point right after its ``phi`` update.
"""

from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numba import njit

from .grid import (Grid2D, PointCategory, classify_points, extrapolate_derivative_ghosts,
                   extrapolate_ghosts)
from .hamiltonian import HamiltonianKind, numerical_h
from .initialization import initial_guess, startup_viscosity
from .reconstruction import WeightParams, reconstruct_at

log = logging.getLogger(__name__)

_NEAR = int(PointCategory.INTERIOR_NEAR_BAND)
_FAR = int(PointCategory.INTERIOR_FAR)


class SchemeKind(str, enum.Enum):
    FE_JACOBI = "fe-jacobi"
    FE_FSM = "fe-fsm"
    RK_JACOBI = "rk-jacobi"
    RK_FSM = "rk-fsm"
    RK_FSM_T = "rk-fsm-t"

    @property
    def is_jacobi(self) -> bool:
        return self in (SchemeKind.FE_JACOBI, SchemeKind.RK_JACOBI)

    @property
    def stages(self) -> tuple[tuple[float, float, float], ...]:
        """(a, b, c) per stage: ``phi <- a*phi_old + b*phi + c*dt*L``."""
        return _STAGES[self]


_STAGES = {
    SchemeKind.FE_JACOBI: ((0.0, 1.0, 1.0),),
    SchemeKind.FE_FSM: ((0.0, 1.0, 1.0),),
    SchemeKind.RK_JACOBI: ((0.0, 1.0, 1.0), (0.75, 0.25, 0.25), (1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0)),
    # increments dt, dt/4, 2dt/3 chained on the latest values
    SchemeKind.RK_FSM: ((0.0, 1.0, 1.0), (0.0, 1.0, 0.25), (0.0, 1.0, 2.0 / 3.0)),
    SchemeKind.RK_FSM_T: ((0.0, 1.0, 1.0), (0.75, 0.25, 0.25), (1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0)),
}


@dataclass(frozen=True)
class SchemeConfig:
    scheme: SchemeKind = SchemeKind.FE_FSM
    cfl: Optional[float] = None
    weights: WeightParams = WeightParams()
    reconstruction: str = "hweno"
    tol: float = 1e-14
    max_iter: int = 100_000
    history_stride: int = 4

    def __post_init__(self):
        object.__setattr__(self, "scheme", SchemeKind(self.scheme))
        if self.cfl is not None and self.cfl <= 0:
            raise ValueError("cfl must be positive")
        if self.reconstruction not in ("hweno", "hybrid"):
            raise ValueError("reconstruction must be 'hweno' or 'hybrid'")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1 or self.history_stride < 1:
            raise ValueError("max_iter and history_stride must be positive")

    @property
    def gamma(self) -> float:
        if self.cfl is not None:
            return self.cfl
        return 0.1 if self.scheme is SchemeKind.FE_JACOBI else 1.0

    @property
    def hybrid(self) -> bool:
        return self.reconstruction == "hybrid"


@dataclass
class SolutionState:
    phi: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def copy(self) -> "SolutionState":
        return SolutionState(self.phi.copy(), self.u.copy(), self.v.copy())


@dataclass
class IterationStats:
    iterations: int = 0
    converged: bool = False
    delta_history: list[tuple[int, float]] = field(default_factory=list)
    residual_history: list[tuple[int, float]] = field(default_factory=list)
    error_history: list[tuple[int, float]] = field(default_factory=list)
    linear_hits: int = 0
    hweno_evals: int = 0
    wall_time: float = 0.0
    alpha: float = 1.0
    beta: float = 1.0
    dt: float = 0.0

    @property
    def final_delta(self) -> float:
        return self.delta_history[-1][1] if self.delta_history else float("nan")

    @property
    def linear_fraction(self) -> float:
        total = self.linear_hits + self.hweno_evals
        return self.linear_hits / total if total else 0.0


class SolverError(RuntimeError):
    def __init__(self, message: str, stats: IterationStats, state: SolutionState):
        super().__init__(message)
        self.stats = stats
        self.state = state


class NotConverged(SolverError):
    pass


class Diverged(SolverError):
    def __init__(self, message, stats, state, location):
        super().__init__(message, stats, state)
        self.location = location


def time_step(cfl: float, alpha: float, beta: float, dx: float, dy: float) -> float:
    if cfl <= 0 or dx <= 0 or dy <= 0 or alpha < 0 or beta < 0:
        raise ValueError("time_step needs positive cfl, dx, dy and nonnegative alpha, beta")
    if alpha == 0 and beta == 0:
        raise ValueError("alpha and beta cannot both vanish")
    return cfl / (alpha / dx + beta / dy)


@njit(cache=True)
def _pick(m, p, old):
    if m > 0.0 and p > 0.0:
        return m
    if m < 0.0 and p < 0.0:
        return p
    return old


def update_derivatives(xm, xp, ym, yp, u_old, v_old) -> tuple[float, float]:
    """Upwind-consistent derivative refresh from one-sided values."""
    return _pick(xm, xp, u_old), _pick(ym, yp, v_old)


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------

@njit(cache=True)
def _direction_bounds(direction, nx, ny, g):
    # (1) i up, j up; (2) i down, j up; (3) i down, j down; (4) i up, j down
    if direction == 0 or direction == 3:
        i0, i1, si = g, g + nx, 1
    else:
        i0, i1, si = g + nx - 1, g - 1, -1
    if direction == 0 or direction == 1:
        j0, j1, sj = g, g + ny, 1
    else:
        j0, j1, sj = g + ny - 1, g - 1, -1
    return i0, i1, si, j0, j1, sj


@njit(cache=True)
def _gs_pass(phi, u, v, phi_old, f, cat, direction, a, b, cdt, dx, dy, eps, g1, g2, g3,
             hybrid, counts, code, par, nx, ny, g):
    """One Gauss-Seidel sweep. Returns the flat index of the first non-finite value or -1."""
    i0, i1, si, j0, j1, sj = _direction_bounds(direction, nx, ny, g)
    for i in range(i0, i1, si):
        for j in range(j0, j1, sj):
            k = cat[i, j]
            if k != _FAR and k != _NEAR:
                continue
            allow = hybrid and k == _FAR
            xm, xp, ym, yp = reconstruct_at(phi, u, v, i, j, dx, dy, eps, g1, g2, g3, allow, counts)
            res = f[i, j] - numerical_h(code, par, xm, xp, ym, yp)
            new = a * phi_old[i, j] + b * phi[i, j] + cdt * res
            if not np.isfinite(new):
                return i * phi.shape[1] + j
            phi[i, j] = new
            xm, xp, ym, yp = reconstruct_at(phi, u, v, i, j, dx, dy, eps, g1, g2, g3, allow, counts)
            u[i, j] = _pick(xm, xp, u[i, j])
            v[i, j] = _pick(ym, yp, v[i, j])
    return -1


@njit(cache=True)
def _jacobi_phi(phi, u, v, phi_old, out, f, cat, a, b, cdt, dx, dy, eps, g1, g2, g3,
                hybrid, counts, code, par, nx, ny, g):
    for i in range(g, g + nx):
        for j in range(g, g + ny):
            k = cat[i, j]
            if k != _FAR and k != _NEAR:
                continue
            allow = hybrid and k == _FAR
            xm, xp, ym, yp = reconstruct_at(phi, u, v, i, j, dx, dy, eps, g1, g2, g3, allow, counts)
            new = a * phi_old[i, j] + b * phi[i, j] + cdt * (f[i, j] - numerical_h(code, par, xm, xp, ym, yp))
            if not np.isfinite(new):
                return i * phi.shape[1] + j
            out[i, j] = new
    return -1


@njit(cache=True)
def _jacobi_uv(phi, u, v, u_out, v_out, cat, dx, dy, eps, g1, g2, g3, hybrid, counts, nx, ny, g):
    for i in range(g, g + nx):
        for j in range(g, g + ny):
            k = cat[i, j]
            if k != _FAR and k != _NEAR:
                continue
            allow = hybrid and k == _FAR
            xm, xp, ym, yp = reconstruct_at(phi, u, v, i, j, dx, dy, eps, g1, g2, g3, allow, counts)
            u_out[i, j] = _pick(xm, xp, u[i, j])
            v_out[i, j] = _pick(ym, yp, v[i, j])


@njit(cache=True)
def _residual(phi, u, v, f, cat, dx, dy, eps, g1, g2, g3, code, par, nx, ny, g):
    counts = np.zeros(2, dtype=np.int64)
    total = 0.0
    n = 0
    for i in range(g, g + nx):
        for j in range(g, g + ny):
            k = cat[i, j]
            if k != _FAR and k != _NEAR:
                continue
            xm, xp, ym, yp = reconstruct_at(phi, u, v, i, j, dx, dy, eps, g1, g2, g3, False, counts)
            total += abs(f[i, j] - numerical_h(code, par, xm, xp, ym, yp))
            n += 1
    return total / n if n else 0.0


# --------------------------------------------------------------------------
# the discrete problem bundled with its precomputed arrays
# --------------------------------------------------------------------------

@dataclass
class Discretization:
    problem: object
    grid: Grid2D
    cat: np.ndarray
    f: np.ndarray
    hamiltonian: HamiltonianKind
    updated: np.ndarray
    counts: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=np.int64))

    @classmethod
    def build(cls, problem, grid: Grid2D, hamiltonian: Optional[HamiltonianKind] = None):
        cat = classify_points(grid, problem)
        X, Y = grid.mesh
        f = np.asarray(problem.f(X, Y), dtype=float) * np.ones(grid.shape)
        ham = hamiltonian or problem.hamiltonian
        if hamiltonian is None and ham.is_lax_friedrichs:
            ham = startup_viscosity(problem, grid, ham)
        updated = (cat == _FAR) | (cat == _NEAR)
        return cls(problem, grid, cat, f, ham, updated)

    def dt(self, config: SchemeConfig) -> float:
        return time_step(config.gamma, self.hamiltonian.alpha, self.hamiltonian.beta,
                         self.grid.dx, self.grid.dy)

    def kernel_common(self, config: SchemeConfig):
        eps, g1, g2, g3 = config.weights.as_tuple()
        code, par = self.hamiltonian.kernel_args()
        return eps, g1, g2, g3, code, par

    def refresh(self, state: SolutionState):
        extrapolate_ghosts(state.phi, self.grid)
        extrapolate_derivative_ghosts(state.u, state.v, state.phi, self.grid)

    def residual(self, state: SolutionState, config: SchemeConfig = SchemeConfig()) -> float:
        eps, g1, g2, g3, code, par = self.kernel_common(config)
        g = self.grid
        return _residual(state.phi, state.u, state.v, self.f, self.cat, g.dx, g.dy,
                         eps, g1, g2, g3, code, par, g.nx, g.ny, g.ghost_width)

    def delta(self, before: np.ndarray, after: np.ndarray) -> float:
        if not self.updated.any():
            return 0.0
        return float(np.mean(np.abs(after[self.updated] - before[self.updated])))


def _diverged(disc: Discretization, state, flat, stats):
    i, j = np.unravel_index(flat, state.phi.shape)
    g = disc.grid.ghost_width
    loc = (int(i - g), int(j - g))
    raise Diverged(f"non-finite value at interior node {loc}", stats, state, loc)


def _gs_stage(disc, state, phi_old, direction, stage, config, stats):
    a, b, c = stage
    g = disc.grid
    eps, g1, g2, g3, code, par = disc.kernel_common(config)
    disc.refresh(state)
    flat = _gs_pass(state.phi, state.u, state.v, phi_old, disc.f, disc.cat, direction,
                    a, b, c * disc.dt(config), g.dx, g.dy, eps, g1, g2, g3, config.hybrid,
                    disc.counts, code, par, g.nx, g.ny, g.ghost_width)
    if flat >= 0:
        _diverged(disc, state, flat, stats)


def _jacobi_stage(disc, state, phi_old, stage, config, stats) -> SolutionState:
    a, b, c = stage
    g = disc.grid
    eps, g1, g2, g3, code, par = disc.kernel_common(config)
    disc.refresh(state)
    phi_new = state.phi.copy()
    flat = _jacobi_phi(state.phi, state.u, state.v, phi_old, phi_new, disc.f, disc.cat, a, b,
                       c * disc.dt(config), g.dx, g.dy, eps, g1, g2, g3, config.hybrid,
                       disc.counts, code, par, g.nx, g.ny, g.ghost_width)
    if flat >= 0:
        _diverged(disc, state, flat, stats)
    extrapolate_ghosts(phi_new, g)
    u_new, v_new = state.u.copy(), state.v.copy()
    _jacobi_uv(phi_new, state.u, state.v, u_new, v_new, disc.cat, g.dx, g.dy, eps, g1, g2, g3,
               config.hybrid, disc.counts, g.nx, g.ny, g.ghost_width)
    new = SolutionState(phi_new, u_new, v_new)
    extrapolate_derivative_ghosts(u_new, v_new, phi_new, g)
    return new


# --------------------------------------------------------------------------
# public single-step operations
# --------------------------------------------------------------------------

def fe_jacobi_step(state: SolutionState, disc: Discretization, config: SchemeConfig,
                   stats: Optional[IterationStats] = None) -> tuple[SolutionState, float]:
    stats = stats or IterationStats()
    new = _jacobi_stage(disc, state, state.phi, _STAGES[SchemeKind.FE_JACOBI][0], config, stats)
    return new, disc.delta(state.phi, new.phi)


def rk_jacobi_step(state: SolutionState, disc: Discretization, config: SchemeConfig,
                   stats: Optional[IterationStats] = None) -> tuple[SolutionState, float]:
    stats = stats or IterationStats()
    disc.refresh(state)
    phi_old = state.phi.copy()
    cur = state
    for stage in _STAGES[SchemeKind.RK_JACOBI]:
        cur = _jacobi_stage(disc, cur, phi_old, stage, config, stats)
    return cur, disc.delta(phi_old, cur.phi)


def _fsm_pass(kind, state, disc, config, direction, stats):
    if direction not in (1, 2, 3, 4):
        raise ValueError("direction must be 1..4")
    stats = stats or IterationStats()
    disc.refresh(state)
    before = state.phi.copy()
    for stage in _STAGES[kind]:
        _gs_stage(disc, state, before, direction - 1, stage, config, stats)
    extrapolate_ghosts(state.phi, disc.grid)
    return state, disc.delta(before, state.phi)


def fe_fsm_pass(state: SolutionState, disc: Discretization, config: SchemeConfig,
                direction: int, stats: Optional[IterationStats] = None):
    """In-place forward-Euler Gauss-Seidel sweep in ``direction`` (1..4)."""
    return _fsm_pass(SchemeKind.FE_FSM, state, disc, config, direction, stats)


def rk_fsm_pass(state: SolutionState, disc: Discretization, config: SchemeConfig,
                direction: int, stats: Optional[IterationStats] = None):
    """Three chained sub-sweeps with increments dt, dt/4, 2dt/3."""
    return _fsm_pass(SchemeKind.RK_FSM, state, disc, config, direction, stats)


def rk_fsm_t_pass(state: SolutionState, disc: Discretization, config: SchemeConfig,
                  direction: int, stats: Optional[IterationStats] = None):
    """Three sub-sweeps with the convex SSP-RK3 combinations."""
    return _fsm_pass(SchemeKind.RK_FSM_T, state, disc, config, direction, stats)


_PASSES = {SchemeKind.FE_FSM: fe_fsm_pass, SchemeKind.RK_FSM: rk_fsm_pass,
           SchemeKind.RK_FSM_T: rk_fsm_t_pass}


# --------------------------------------------------------------------------
# the driver
# --------------------------------------------------------------------------

def solve(problem, grid: Grid2D, config: SchemeConfig = SchemeConfig(), *,
          state: Optional[SolutionState] = None, reference: Optional[np.ndarray] = None,
          callback: Optional[Callable[[int, float], None]] = None,
          hamiltonian: Optional[HamiltonianKind] = None) -> tuple[SolutionState, IterationStats]:
    """Iterate ``config.scheme`` from the first-order start until ``delta < tol``.

    ``reference`` (padded array) enables the error history when the problem has
    no analytic solution. Raises :class:`NotConverged` or :class:`Diverged`.
    """
    t0 = time.perf_counter()
    disc = Discretization.build(problem, grid, hamiltonian)
    if state is None:
        guess = initial_guess(problem, grid, disc.cat, disc.hamiltonian)
        state = SolutionState(guess.phi, guess.u, guess.v)
    else:
        state = state.copy()
    stats = IterationStats(alpha=disc.hamiltonian.alpha, beta=disc.hamiltonian.beta,
                           dt=disc.dt(config))

    if reference is None and getattr(problem, "exact_phi", None) is not None:
        X, Y = grid.mesh
        reference = problem.exact_phi(X, Y)
    err_sel = None
    if reference is not None:
        from .problems import measured_points
        err_sel = measured_points(problem, grid, disc.cat)

    if not disc.updated.any():
        stats.converged = True
        stats.wall_time = time.perf_counter() - t0
        return state, stats

    scheme = config.scheme
    per_check = {SchemeKind.FE_JACOBI: 1, SchemeKind.RK_JACOBI: 3}.get(scheme, 4 * len(scheme.stages))
    next_record = 0

    def record(it, delta):
        nonlocal next_record
        stats.delta_history.append((it, delta))
        if it >= next_record:
            stats.residual_history.append((it, disc.residual(state, config)))
            if err_sel is not None and err_sel.any():
                stats.error_history.append(
                    (it, float(np.mean(np.abs(state.phi[err_sel] - reference[err_sel])))))
            next_record = it + config.history_stride
        if callback is not None:
            callback(it, delta)

    while stats.iterations < config.max_iter:
        if scheme.is_jacobi:
            step = fe_jacobi_step if scheme is SchemeKind.FE_JACOBI else rk_jacobi_step
            state, delta = step(state, disc, config, stats)
        else:
            before = state.phi.copy()
            for direction in (1, 2, 3, 4):
                _PASSES[scheme](state, disc, config, direction, stats)
            delta = disc.delta(before, state.phi)
        stats.iterations += per_check
        record(stats.iterations, delta)
        if not np.isfinite(delta):
            raise Diverged("non-finite update norm", stats, state, None)
        if delta < config.tol:
            stats.converged = True
            break

    disc.refresh(state)
    stats.linear_hits, stats.hweno_evals = int(disc.counts[0]), int(disc.counts[1])
    stats.wall_time = time.perf_counter() - t0
    if not stats.converged:
        raise NotConverged(f"delta {stats.final_delta:.3e} >= tol after {stats.iterations} "
                           "iterations", stats, state)
    log.debug("%s converged in %d iterations", scheme.value, stats.iterations)
    return state, stats
