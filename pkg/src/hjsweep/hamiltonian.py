"""Monotone numerical Hamiltonians.

Two flavours are supported: the Godunov Hamiltonian specialised to the
Eikonal equation, and the Lax-Friedrichs Hamiltonian for a small family of
analytic ``H(u, v)``: the Euclidean norm and the quasi-P / quasi-SV
travel-time Hamiltonians of a homogeneous anisotropic elastic medium.
Inside the sweeping kernels a Hamiltonian is an integer code plus a float
parameter vector, see :meth:`HamiltonianKind.kernel_args`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numba import njit

GODUNOV_EIKONAL = 0
LF_NORM = 1
LF_QUASI_WAVE = 2

_KIND_CODES = {"godunov-eikonal": GODUNOV_EIKONAL, "lf-norm": LF_NORM,
               "lf-qp": LF_QUASI_WAVE, "lf-qsv": LF_QUASI_WAVE}

# parameter vector layout: alpha, beta, c1..c5, branch (+1 quasi-P, -1 quasi-SV)
_NPAR = 8


@njit(cache=True)
def godunov_eikonal(um, up, vm, vp):
    a = max(max(um, 0.0), -min(up, 0.0))
    b = max(max(vm, 0.0), -min(vp, 0.0))
    return np.sqrt(a * a + b * b)


@njit(cache=True)
def quasi_wave_h(p, q, c1, c2, c3, c4, c5, branch):
    p2 = p * p
    q2 = q * q
    b = c4 * p2 + c5 * q2
    a = c1 * p2 * p2 + c2 * p2 * q2 + c3 * q2 * q2
    disc = max(0.25 * b * b - a, 0.0)
    return np.sqrt(max(-0.5 * b + branch * np.sqrt(disc), 0.0))


@njit(cache=True)
def analytic_h(kind, p, q, par):
    if kind == LF_QUASI_WAVE:
        return quasi_wave_h(p, q, par[2], par[3], par[4], par[5], par[6], par[7])
    return np.sqrt(p * p + q * q)


@njit(cache=True)
def numerical_h(kind, par, um, up, vm, vp):
    if kind == GODUNOV_EIKONAL:
        return godunov_eikonal(um, up, vm, vp)
    hc = analytic_h(kind, 0.5 * (um + up), 0.5 * (vm + vp), par)
    return hc - 0.5 * par[0] * (up - um) - 0.5 * par[1] * (vp - vm)


def lax_friedrichs(H: Callable[[float, float], float], um: float, up: float, vm: float,
                   vp: float, alpha: float, beta: float) -> float:
    return H(0.5 * (um + up), 0.5 * (vm + vp)) - 0.5 * alpha * (up - um) - 0.5 * beta * (vp - vm)


@dataclass(frozen=True)
class ElasticParams:
    """Elastic moduli of a transversely isotropic medium and the slowness-quartic
    coefficients ``c1 p^4 + c2 p^2 q^2 + c3 q^4 + c4 p^2 + c5 q^2 + 1 = 0``."""

    a11: float
    a33: float
    a13: float
    a44: float

    @property
    def coefficients(self) -> tuple[float, float, float, float, float]:
        a11, a33, a13, a44 = self.a11, self.a33, self.a13, self.a44
        c1 = a11 * a44
        c2 = a11 * a33 + a44 * a44 - (a13 + a44) ** 2
        c3 = a33 * a44
        c4 = -(a11 + a44)
        c5 = -(a33 + a44)
        return c1, c2, c3, c4, c5


@dataclass(frozen=True)
class HamiltonianKind:
    """``kind`` is one of ``'godunov-eikonal'``, ``'lf-norm'``, ``'lf-qp'``, ``'lf-qsv'``.

    ``alpha``/``beta`` are the Lax-Friedrichs viscosity constants; for the
    Godunov Eikonal Hamiltonian they are 1 and only enter the time step.
    """

    kind: str = "godunov-eikonal"
    elastic: ElasticParams | None = None
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise ValueError(f"unknown Hamiltonian kind {self.kind!r}")
        if self.kind in ("lf-qp", "lf-qsv") and self.elastic is None:
            raise ValueError("quasi-wave Hamiltonians need elastic parameters")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")

    @property
    def is_lax_friedrichs(self) -> bool:
        return self.kind != "godunov-eikonal"

    @property
    def code(self) -> int:
        return _KIND_CODES[self.kind]

    def with_viscosity(self, alpha: float, beta: float) -> "HamiltonianKind":
        return HamiltonianKind(self.kind, self.elastic, alpha, beta)

    def kernel_args(self) -> tuple[int, np.ndarray]:
        par = np.zeros(_NPAR)
        par[0], par[1] = self.alpha, self.beta
        if self.elastic is not None:
            par[2:7] = self.elastic.coefficients
            par[7] = 1.0 if self.kind == "lf-qp" else -1.0
        return self.code, par

    def H(self, p, q):
        """The continuous Hamiltonian, vectorised over numpy arrays."""
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        if self.kind in ("godunov-eikonal", "lf-norm"):
            return np.hypot(p, q)
        c1, c2, c3, c4, c5 = self.elastic.coefficients
        branch = 1.0 if self.kind == "lf-qp" else -1.0
        p2, q2 = p * p, q * q
        b = c4 * p2 + c5 * q2
        a = c1 * p2 * p2 + c2 * p2 * q2 + c3 * q2 * q2
        disc = np.maximum(0.25 * b * b - a, 0.0)
        return np.sqrt(np.maximum(-0.5 * b + branch * np.sqrt(disc), 0.0))

    def numerical(self, um, up, vm, vp) -> float:
        code, par = self.kernel_args()
        return numerical_h(code, par, float(um), float(up), float(vm), float(vp))


def viscosity_bounds(ham: HamiltonianKind, pmin: float, pmax: float, qmin: float,
                     qmax: float, samples: int = 201, inflate: float = 1.2) -> tuple[float, float]:
    """Sampled ``max |dH/dp|``, ``max |dH/dq|`` over a derivative box, inflated."""
    ps = np.linspace(pmin, pmax, samples)
    qs = np.linspace(qmin, qmax, samples)
    P, Q = np.meshgrid(ps, qs, indexing="ij")
    scale = max(abs(pmin), abs(pmax), abs(qmin), abs(qmax), 1e-300)
    keep = np.hypot(P, Q) > 1e-3 * scale
    P, Q = P[keep], Q[keep]
    step = 1e-6 * scale
    dHp = (ham.H(P + step, Q) - ham.H(P - step, Q)) / (2 * step)
    dHq = (ham.H(P, Q + step) - ham.H(P, Q - step)) / (2 * step)
    return inflate * float(np.max(np.abs(dHp))), inflate * float(np.max(np.abs(dHq)))
