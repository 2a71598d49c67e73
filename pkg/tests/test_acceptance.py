"""Acceptance criteria 1-13.

Each test records one PASS/FAIL line (printed in the terminal summary by
``conftest.py``; ``python3 tests/test_acceptance.py`` prints them directly).

Solves are capped at ``FSM_CAP`` iterations (``JACOBI_CAP`` for FE-Jacobi).
Converging runs finish far below the caps; the cases that do not converge
sit in a limit cycle whose error no longer changes, so a larger cap only
costs time.
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import ACCEPTANCE, CAP, cached_run  # noqa: E402

from hjsweep.grid import classify_points  # noqa: E402
from hjsweep.problems import get_problem, measured_points, pwave_reference  # noqa: E402
from hjsweep.solver import SchemeKind  # noqa: E402

FSM_CAP = CAP
JACOBI_CAP = 20000

pytestmark = pytest.mark.slow
REL = 0.10      # relative tolerance on errors
ORD = 0.4       # absolute tolerance on orders
ITS = 0.20      # relative tolerance on iteration counts


def fsm(name, n, mode="hweno"):
    return cached_run(name, n, "fe-fsm", mode=mode, max_iter=FSM_CAP)


def near(got, want, rel=REL):
    return got is not None and abs(got - want) <= rel * abs(want)


def order(coarse, fine):
    return math.log2(coarse / fine)


class Checks:
    """Collects named sub-checks of one criterion."""

    def __init__(self):
        self.items = []

    def add(self, ok, text):
        self.items.append((bool(ok), text))

    @property
    def ok(self):
        return all(ok for ok, _ in self.items)

    def detail(self):
        return "; ".join(("" if ok else "FAIL ") + text for ok, text in self.items)


def _table(ch, name, ladder, l1_want, order_want, its_want=None):
    runs = [fsm(name, n) for n in ladder]
    for r, want in zip(runs, l1_want):
        ch.add(near(r.l1, want), f"{name} N={r.n} L1={r.l1:.3e} (want {want:.2e})")
        ch.add(r.converged, f"{name} N={r.n} converged={r.converged} ({r.iterations} it)")
    o = order(runs[-2].l1, runs[-1].l1)
    ch.add(abs(o - order_want) <= ORD, f"{name} order={o:.2f} (want {order_want})")
    if its_want:
        for r, want in zip(runs, its_want):
            ch.add(near(r.iterations, want, ITS), f"{name} N={r.n} iter={r.iterations} (want {want})")
    return runs


# --------------------------------------------------------------------------
# quantitative criteria
# --------------------------------------------------------------------------

def criterion_1():
    ch = Checks()
    runs = _table(ch, "ex1", (40, 80), (3.65e-6, 5.75e-8), 5.99, (240, 272))
    t = sum(r.wall_time for r in runs)
    ch.add(t < 30.0, f"runtime {t:.1f}s (< 30s)")
    return ch


def criterion_2():
    ch = Checks()
    for n, want in ((40, 3.65e-6), (80, 5.75e-8)):
        r = cached_run("ex1", n, "fe-jacobi", max_iter=JACOBI_CAP)
        ref = fsm("ex1", n)
        ch.add(near(r.l1, want), f"N={n} L1={r.l1:.3e} (want {want:.2e}; this FE-FSM {ref.l1:.3e})")
        ch.add(r.converged, f"N={n} converged={r.converged}")
        if n == 40:
            ch.add(near(r.iterations, 1690, ITS), f"N=40 iter={r.iterations} (want 1690)")
    return ch


def criterion_3():
    ch = Checks()
    _table(ch, "ex2", (80, 160), (1.16e-8, 8.76e-11), 7.05)
    return ch


def criterion_4():
    ch = Checks()
    _table(ch, "ex4", (40, 80), (3.10e-7, 6.95e-9), 5.48)
    return ch


def criterion_5():
    ch = Checks()
    _table(ch, "ex5", (40, 80), (1.12e-6, 4.28e-8), 4.71)
    return ch


def criterion_6():
    ch = Checks()
    _table(ch, "ex6a", (80, 160), (3.41e-9, 1.09e-10), 4.96)
    b80, b160 = fsm("ex6b", 80), fsm("ex6b", 160)
    o = order(b80.l1, b160.l1)
    ch.add(abs(o - 1.87) <= ORD, f"ex6b order={o:.2f} (want 1.87; L1 {b80.l1:.2e}, {b160.l1:.2e}; "
                                 f"converged {b80.converged}/{b160.converged})")
    return ch


def criterion_7():
    ch = Checks()
    for n in (40, 80, 160):
        r = fsm("ex7", n)
        ch.add(r.l1 < 1e-12 and r.converged, f"N={n} L1={r.l1:.2e}")
    return ch


def criterion_8():
    ch = Checks()
    for name in ("ex1", "ex4", "ex5", "ex6a"):
        for n in (40, 80):
            base, hyb = fsm(name, n), fsm(name, n, "hybrid")
            r1, rinf = hyb.l1 / base.l1, hyb.linf / base.linf
            frac = hyb.linear_hits / max(1, hyb.linear_hits + hyb.hweno_evals)
            ch.add(0.5 <= r1 <= 2 and 0.5 <= rinf <= 2,
                   f"{name} N={n} L1 ratio {r1:.3f} Linf ratio {rinf:.3f}")
            ch.add(hyb.hweno_evals <= base.hweno_evals,
                   f"{name} N={n} HWENO evals {hyb.hweno_evals} <= {base.hweno_evals}")
            ch.add(frac > 0.30, f"{name} N={n} linear fraction {frac:.2f}")
    return ch


LADDERS = {"ex1": (40, 80), "ex2": (80, 160), "ex3": (80, 160), "ex4": (40, 80), "ex5": (40, 80),
           "ex6a": (80, 160), "ex6b": (80, 160), "ex7": (40, 80, 160)}


def criterion_9():
    ch = Checks()
    for name, ladder in LADDERS.items():
        for n in ladder:
            r = fsm(name, n)
            ch.add(r.converged and r.deltas[-1] < 1e-14,
                   f"{name} N={n} final delta {r.deltas[-1]:.1e} after {r.iterations} it")
    return ch


# --------------------------------------------------------------------------
# property criteria
# --------------------------------------------------------------------------

def _self_convergence(name, ladder=(40, 80, 160), finest=320):
    p = get_problem(name)
    ref = fsm(name, finest).phi
    g0 = p.grid(finest).ghost_width
    errs = []
    for n in ladder:
        g = p.grid(n)
        s = finest // n
        mask = measured_points(p, g, classify_points(g, p))
        coarse = ref[g0:-g0:s, g0:-g0:s]
        core = (slice(g.ghost_width, -g.ghost_width),) * 2
        diff = np.abs(fsm(name, n).phi[core] - coarse)
        errs.append(float(diff[mask[core]].mean()))
    return errs


def criterion_10():
    ch = Checks()
    for name, need in (("ex8p", 4.0), ("ex8sv", 3.5)):
        errs = _self_convergence(name)
        orders = [order(a, b) for a, b in zip(errs, errs[1:])]
        conv = [fsm(name, n).converged for n in (40, 80, 160, 320)]
        ch.add(min(orders) >= need,
               f"{name} self-convergence L1 {', '.join(f'{e:.2e}' for e in errs)}, orders "
               f"{', '.join(f'{o:.2f}' for o in orders)} (need >= {need}); converged {conv}")
    p = get_problem("ex8p")
    g = p.grid(160)
    mask = measured_points(p, g, classify_points(g, p))
    X, Y = g.mesh
    gap = np.abs(fsm("ex8p", 160).phi - pwave_reference(X, Y))[mask]
    ch.add(gap.max() <= 5e-5, f"ex8p N=160 vs reference: max {gap.max():.2e}, mean {gap.mean():.2e}")
    return ch


def criterion_11():
    from test_reconstruction import (beta_oracle, hermite_oracle, quadratic_oracles, stencil)
    from hjsweep.reconstruction import nonlinear_weights, one_sided, smoothness_indicators

    ch = Checks()
    worst = 0.0
    for side in ("minus", "plus"):
        for deg in range(6):
            p = np.polynomial.Polynomial(np.arange(1.0, deg + 2.0))
            phi, deriv = stencil(p, p.deriv(), 0.05, side, x0=0.3)
            exact = p.deriv()(0.3)
            scale = max(1.0, abs(exact))
            worst = max(worst, abs(one_sided(phi, deriv, 0.05, side, mode="linear") - exact) / scale)
            if deg <= 2:      # nonlinear weights equal the linear ones up to quadratics
                worst = max(worst, abs(one_sided(phi, deriv, 0.05, side) - exact) / scale)
    ch.add(worst < 1e-12, f"polynomial reproduction rel err {worst:.1e}")

    for side in ("minus", "plus"):
        hs = 0.2 / 2 ** np.arange(5)
        errs = []
        for h in hs:
            e = 0.0
            for x0 in 0.3 + h * np.arange(-4, 5):
                phi, deriv = stencil(np.sin, np.cos, h, side, x0)
                e = max(e, abs(one_sided(phi, deriv, h, side) - np.cos(x0)))
            errs.append(e)
        slope = float(np.diff(np.log(errs))[-1] / np.diff(np.log(hs))[-1])
        ch.add(slope >= 4.5, f"sine slope ({side}) {slope:.2f}")

    rng = np.random.default_rng(11)
    b = rng.uniform(0, 10, (2000, 3)) ** 3
    sums = np.array([sum(nonlinear_weights(*row, 1e-6, 0.98, 0.01, 0.01)) for row in b])
    ch.add(np.abs(sums - 1).max() < 1e-14, f"weights sum to 1 (max dev {np.abs(sums - 1).max():.1e})")

    affine = smoothness_indicators([-0.2, -0.1, 0.0, 0.1], (1.0, 1.0), 0.1, "minus")
    ch.add(max(affine) < 1e-28, f"beta on affine data {max(affine):.1e}")

    dev, neg = 0.0, False
    for _ in range(500):
        phi = rng.uniform(-10, 10, 4)
        um, up = rng.uniform(-10, 10, 2)
        h = rng.uniform(0.01, 0.5)
        side = ("minus", "plus")[rng.integers(2)]
        want = [beta_oracle(hermite_oracle(phi, (um, up), h, side), h, 5)]
        want += [beta_oracle(q, h, 2) for q in quadratic_oracles(phi, h, side)]
        got = smoothness_indicators(phi, (um, up), h, side)
        neg |= min(got) < 0
        dev = max(dev, max(abs(x - y) / (1 + max(want)) for x, y in zip(got, want)))
    ch.add(not neg and dev < 1e-12, f"beta vs quadrature oracle dev {dev:.1e}, nonnegative {not neg}")
    return ch


def criterion_12():
    from test_solver import check_fixed_point

    ch = Checks()
    rng = np.random.default_rng(12)
    for kind in ("godunov-eikonal", "lf-qp"):
        for scheme in SchemeKind:
            try:
                for a, b in zip(rng.uniform(0.2, 2.0, 4), rng.uniform(-2.0, -0.2, 4)):
                    check_fixed_point(float(a), float(b), kind, scheme)
                ch.add(True, f"{kind}/{scheme.value}")
            except AssertionError as exc:
                ch.add(False, f"{kind}/{scheme.value}: {exc}")
    return ch


def criterion_13():
    from hjsweep.hamiltonian import HamiltonianKind, viscosity_bounds
    from hjsweep.problems import QP_MEDIUM, QSV_MEDIUM

    ch = Checks()
    rng = np.random.default_rng(13)
    for kind, medium in (("lf-norm", None), ("lf-qp", QP_MEDIUM), ("lf-qsv", QSV_MEDIUM)):
        base = HamiltonianKind(kind, medium)
        r = 3.0
        ham = base.with_viscosity(*viscosity_bounds(base, -r, r, -r, r))
        pq = rng.uniform(-r, r, (10_000, 2))
        cons = max(abs(ham.numerical(p, p, q, q) - float(ham.H(p, q))) for p, q in pq)
        bad = 0
        for um, up, vm, vp in rng.uniform(-r, r, (10_000, 4)):
            h0 = ham.numerical(um, up, vm, vp)
            d = 1e-3
            bad += ham.numerical(min(um + d, r), up, vm, vp) < h0 - 1e-12
            bad += ham.numerical(um, min(up + d, r), vm, vp) > h0 + 1e-12
            bad += ham.numerical(um, up, min(vm + d, r), vp) < h0 - 1e-12
            bad += ham.numerical(um, up, vm, min(vp + d, r)) > h0 + 1e-12
        ch.add(cons < 1e-12 and bad == 0, f"{kind}: consistency dev {cons:.1e}, monotonicity "
                                          f"violations {bad}")
    from hjsweep.hamiltonian import godunov_eikonal
    gd = max(abs(godunov_eikonal(p, p, q, q) - math.hypot(p, q)) for p, q in rng.normal(size=(10_000, 2)))
    ch.add(gd < 1e-12, f"godunov consistency dev {gd:.1e}")
    return ch


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 14)}


def evaluate(k):
    ch = CRITERIA[k]()
    ACCEPTANCE[k] = (ch.ok, ch.detail())
    line = f"criterion {k:>2}: {'PASS' if ch.ok else 'FAIL'}  {ch.detail()}"
    print(line)
    return ch


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    ch = evaluate(k)
    assert ch.ok, ch.detail()


if __name__ == "__main__":
    for k in sorted(CRITERIA):
        evaluate(k)
