"""Fixed-step explicit Runge-Kutta integration.

Three tableaux are shipped: the classical four-stage RK4, Butcher's
seven-stage sixth order scheme and the eleven-stage eighth order scheme of
Cooper and Verner. Steps may be negative (backward integration). Abscissae
are always generated as ``x0 + k*h`` so long sweeps do not accumulate drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import IntegrationError, OrderSaturationError

__all__ = [
    "ButcherTableau",
    "FirstOrderSystem",
    "Trajectory",
    "RK4",
    "RK6",
    "RK8",
    "TABLEAUX",
    "get_tableau",
    "rk_step",
    "integrate_fixed",
    "integrate_to",
    "estimate_order",
]


@dataclass(frozen=True)
class ButcherTableau:
    name: str
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    nominal_order: int
    _rows: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        c = np.asarray(self.c, dtype=float)
        s = len(b)
        if a.shape != (s, s) or c.shape != (s,):
            raise ValueError(f"{self.name}: inconsistent tableau shapes")
        if np.any(np.triu(a) != 0.0):
            raise ValueError(f"{self.name}: stage matrix is not strictly lower triangular")
        if abs(b.sum() - 1.0) > 1e-14:
            raise ValueError(f"{self.name}: weights sum to {b.sum()!r}, not 1")
        if np.max(np.abs(a.sum(axis=1) - c)) > 1e-14:
            raise ValueError(f"{self.name}: row-sum condition violated")
        for arr in (a, b, c):
            arr.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        # sparse rows as python floats; the inner loop runs on 2-vectors
        rows = tuple(
            tuple((j, float(a[i, j])) for j in range(i) if a[i, j] != 0.0)
            for i in range(s)
        )
        object.__setattr__(self, "_rows", rows)

    @property
    def stages(self) -> int:
        return len(self.b)


def _rk4() -> ButcherTableau:
    a = np.zeros((4, 4))
    a[1, 0] = 0.5
    a[2, 1] = 0.5
    a[3, 2] = 1.0
    return ButcherTableau("rk4", a, [1 / 6, 1 / 3, 1 / 3, 1 / 6], [0.0, 0.5, 0.5, 1.0], 4)


def _rk6() -> ButcherTableau:
    # Butcher (1964), seven stages
    a = np.zeros((7, 7))
    a[1, :1] = [1 / 3]
    a[2, :2] = [0.0, 2 / 3]
    a[3, :3] = [1 / 12, 1 / 3, -1 / 12]
    a[4, :4] = [-1 / 16, 9 / 8, -3 / 16, -3 / 8]
    a[5, :5] = [0.0, 9 / 8, -3 / 8, -3 / 4, 1 / 2]
    a[6, :6] = [9 / 44, -9 / 11, 63 / 44, 18 / 11, 0.0, -16 / 11]
    b = [11 / 120, 0.0, 27 / 40, 27 / 40, -4 / 15, -4 / 15, 11 / 120]
    c = [0.0, 1 / 3, 2 / 3, 1 / 3, 1 / 2, 1 / 2, 1.0]
    return ButcherTableau("rk6", a, b, c, 6)


def _rk8() -> ButcherTableau:
    # Cooper & Verner (1972), eleven stages
    r = math.sqrt(21.0)
    a = np.zeros((11, 11))
    a[1, :1] = [1 / 2]
    a[2, :2] = [1 / 4, 1 / 4]
    a[3, :3] = [1 / 7, (-7 - 3 * r) / 98, (21 + 5 * r) / 49]
    a[4, :4] = [(11 + r) / 84, 0.0, (18 + 4 * r) / 63, (21 - r) / 252]
    a[5, :5] = [(5 + r) / 48, 0.0, (9 + r) / 36, (-231 + 14 * r) / 360, (63 - 7 * r) / 80]
    a[6, :6] = [
        (10 - r) / 42, 0.0, (-432 + 92 * r) / 315, (633 - 145 * r) / 90,
        (-504 + 115 * r) / 70, (63 - 13 * r) / 35,
    ]
    a[7, :7] = [1 / 14, 0.0, 0.0, 0.0, (14 - 3 * r) / 126, (13 - 3 * r) / 63, 1 / 9]
    a[8, :8] = [
        1 / 32, 0.0, 0.0, 0.0, (91 - 21 * r) / 576, 11 / 72,
        (-385 - 75 * r) / 1152, (63 + 13 * r) / 128,
    ]
    a[9, :9] = [
        1 / 14, 0.0, 0.0, 0.0, 1 / 9, (-733 - 147 * r) / 2205,
        (515 + 111 * r) / 504, (-51 - 11 * r) / 56, (132 + 28 * r) / 245,
    ]
    a[10, :10] = [
        0.0, 0.0, 0.0, 0.0, (-42 + 7 * r) / 18, (-18 + 28 * r) / 45,
        (-273 - 53 * r) / 72, (301 + 53 * r) / 72, (28 - 28 * r) / 45, (49 - 7 * r) / 18,
    ]
    b = [1 / 20, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 49 / 180, 16 / 45, 49 / 180, 1 / 20]
    c = [0.0, 1 / 2, 1 / 2, (7 + r) / 14, (7 + r) / 14, 1 / 2, (7 - r) / 14, (7 - r) / 14,
         1 / 2, (7 + r) / 14, 1.0]
    return ButcherTableau("rk8", a, b, c, 8)


RK4 = _rk4()
RK6 = _rk6()
RK8 = _rk8()
TABLEAUX = {"rk4": RK4, "rk6": RK6, "rk8": RK8}


def get_tableau(name: str) -> ButcherTableau:
    try:
        return TABLEAUX[name.lower()]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; choose from {sorted(TABLEAUX)}") from None


@dataclass(frozen=True)
class FirstOrderSystem:
    """Right-hand side ``y' = rhs(x, y)`` of a system of size ``dimension``."""

    dimension: int
    rhs: Callable[[float, np.ndarray], np.ndarray]
    params: Mapping[str, float] = field(default_factory=dict)

    def __call__(self, x, y):
        return self.rhs(x, y)


@dataclass(frozen=True)
class Trajectory:
    xs: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if xs.ndim != 1 or len(xs) < 2 or states.shape[0] != len(xs):
            raise ValueError("trajectory needs at least two points and one state per abscissa")
        dx = np.diff(xs)
        if not (np.all(dx > 0) or np.all(dx < 0)):
            raise ValueError("trajectory abscissae must be strictly monotone")
        xs.flags.writeable = False
        states.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "states", states)

    @property
    def direction(self) -> int:
        return 1 if self.xs[1] > self.xs[0] else -1

    @property
    def u(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def du_dx(self) -> np.ndarray:
        return self.states[:, 1]

    def __len__(self):
        return len(self.xs)


def _eval(f, x, y):
    try:
        k = np.asarray(f(x, y), dtype=float)
    except OverflowError:
        raise IntegrationError(f"overflow in right-hand side at x={x!r}", x=x) from None
    if not np.all(np.isfinite(k)):
        raise IntegrationError(f"non-finite right-hand side at x={x!r}", x=x)
    return k


def rk_step(tab: ButcherTableau, f, x: float, y, h: float) -> np.ndarray:
    """One explicit RK update ``y + h * sum(b_i k_i)``; ``h < 0`` steps backward."""
    if h == 0:
        raise ValueError("step size must be nonzero")
    y = np.asarray(y, dtype=float)
    ks = []
    for ci, row in zip(tab.c, tab._rows):
        yi = y
        for j, aij in row:
            yi = yi + (h * aij) * ks[j]
        ks.append(_eval(f, x + ci * h, yi))
    incr = 0.0
    for bi, ki in zip(tab.b, ks):
        if bi != 0.0:
            incr = incr + bi * ki
    return y + h * incr


def integrate_fixed(tab: ButcherTableau, f, x0: float, y0, h: float, n_steps: int) -> Trajectory:
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    y = np.asarray(y0, dtype=float)
    xs = x0 + h * np.arange(n_steps + 1)
    states = np.empty((n_steps + 1, y.size))
    states[0] = y
    for k in range(n_steps):
        try:
            y = rk_step(tab, f, xs[k], y, h)
        except IntegrationError as exc:
            exc.step_index = k
            raise
        states[k + 1] = y
    return Trajectory(xs, states)


def integrate_to(tab: ButcherTableau, f, x0: float, y0, x_end: float, h: float) -> Trajectory:
    """Uniform steps of size ``h`` towards ``x_end`` plus one shorter closing step.

    The closing step is skipped when the grid already lands on ``x_end``
    within a relative 1e-10 of the step.
    """
    span = x_end - x0
    if span == 0 or np.sign(span) != np.sign(h):
        raise ValueError("step sign must point from x0 towards x_end")
    n = int(math.floor(span / h + 1e-10))
    rem = span - n * h
    if n >= 1 and abs(rem) <= 1e-10 * abs(h):
        traj = integrate_fixed(tab, f, x0, y0, h, n)
        xs = np.array(traj.xs)
        xs[-1] = x_end
        return Trajectory(xs, traj.states)
    if n == 0:
        y1 = rk_step(tab, f, x0, np.asarray(y0, dtype=float), span)
        return Trajectory([x0, x_end], [y0, y1])
    traj = integrate_fixed(tab, f, x0, y0, h, n)
    try:
        y_last = rk_step(tab, f, traj.xs[-1], traj.states[-1], x_end - traj.xs[-1])
    except IntegrationError as exc:
        exc.step_index = n
        raise
    return Trajectory(np.append(traj.xs, x_end), np.vstack([traj.states, y_last]))


def estimate_order(tab: ButcherTableau, f, x0: float, y0, x_end: float, exact_end, h: float,
                   rungs: int = 3) -> float:
    """Empirical order from endpoint errors on the ladder h, h/2, h/4, ...

    ``exact_end`` is the exact state at ``x_end``. Returns the mean of the
    base-2 logarithms of successive error ratios.
    """
    exact_end = np.asarray(exact_end, dtype=float)
    floor = 100 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(exact_end))))
    errors = []
    for r in range(rungs):
        step = h / 2**r
        n = int(round((x_end - x0) / step))
        if not math.isclose(n * step, x_end - x0, rel_tol=1e-12):
            raise ValueError("step ladder must divide the interval")
        traj = integrate_fixed(tab, f, x0, y0, step, n)
        err = float(np.max(np.abs(traj.states[-1] - exact_end)))
        if err < floor:
            raise OrderSaturationError(
                f"{tab.name}: endpoint error {err:.3e} at h={step:g} is at round-off level"
            )
        errors.append(err)
    ratios = [math.log2(e0 / e1) for e0, e1 in zip(errors, errors[1:])]
    return float(np.mean(ratios))
