"""Non-iterative transformation methods for two classes of free BVPs.

Translation/spiral class::

    u'' = u * Omega(u exp(-w x), u' exp(-w x)),   x in [0, s]
    u(0) = alpha,  u(s) = beta exp(w s),  u'(s) = gamma exp(w s)

is left unchanged by ``x -> x + mu, u -> exp(w mu) u``. One backward
integration from an arbitrary ``s*`` plus an event locator for ``u* = alpha``
gives ``mu`` and therefore the free boundary ``s = s* - mu``.

Scaling class::

    u'' = u**(1 - 2 d) * Phi(x u**(-d), u' u**(d - 1)),   x in [0, s]
    u(0) = 0,  u(s) = beta

is left unchanged by ``x -> lam**d x, u -> lam u``. One forward integration
from ``u*(0) = 0, u*'(0) = v0`` on ``[0, s*]`` gives ``lam = u*(s*) / beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DegenerateInterpolationError,
    IntegrationError,
    InvalidLambdaError,
    NoCrossingError,
    NotInClassError,
    ToleranceNotMetError,
)
from .rk import ButcherTableau, FirstOrderSystem, Trajectory, rk_step

FROM_PREVIOUS = "from-previous-point"
LITERAL = "literal-eq23"
LOCATOR_MODES = (FROM_PREVIOUS, LITERAL)


@dataclass(frozen=True)
class Term:
    """Monomial ``coef * x**x_exp * u**u_exp * (u')**du_exp * (u'')**d2u_exp``."""

    coef: float
    x_exp: float = 0.0
    u_exp: float = 0.0
    du_exp: float = 0.0
    d2u_exp: float = 0.0

    def scaling_weight(self):
        # under x -> lam^d x, u -> lam u the term picks up lam^(d*slope + offset)
        slope = self.x_exp - self.du_exp - 2 * self.d2u_exp
        offset = self.u_exp + self.du_exp + self.d2u_exp
        return slope, offset


@dataclass(frozen=True)
class TranslationFreeBvp:
    omega: float
    alpha: float
    beta: float
    gamma: float
    system: FirstOrderSystem
    rhs_Omega: Callable[[float, float], float] | None = None
    name: str = "translation"

    def __post_init__(self):
        # x -> x + mu sends u(0) = alpha to u(0) = alpha exp(-omega mu), so the
        # condition at the origin is invariant only when one of them vanishes
        if self.omega != 0 and self.alpha != 0:
            raise NotInClassError(
                "spiral group (omega != 0) leaves u(0) = alpha invariant only for alpha = 0"
            )

    @classmethod
    def from_omega(cls, Omega, omega, alpha, beta, gamma, params=None, name="translation"):
        def rhs(x, y):
            e = math.exp(-omega * x)
            return np.array([y[1], y[0] * Omega(y[0] * e, y[1] * e)])

        system = FirstOrderSystem(2, rhs, dict(params or {}))
        return cls(omega, alpha, beta, gamma, system, Omega, name)

    def boundary_state(self, s):
        g = math.exp(self.omega * s)
        return np.array([self.beta * g, self.gamma * g])


@dataclass(frozen=True)
class ScalingFreeBvp:
    delta: float
    beta: float
    system: FirstOrderSystem
    rhs_Phi: Callable[[float, float], float] | None = None
    terms: Sequence[Term] = field(default_factory=tuple)
    name: str = "scaling"

    def __post_init__(self):
        if self.delta == 0:
            raise NotInClassError("scaling class requires delta != 0")
        if self.beta == 0:
            raise ValueError("scaling class requires beta != 0")

    @classmethod
    def from_phi(cls, Phi, delta, beta, params=None, terms=(), name="scaling"):
        # the generic form is singular at u = 0 whenever Phi grows like
        # u**(1-delta) or faster; supply ``system`` directly in that case
        def rhs(x, y):
            u, du = y
            return np.array([du, u ** (1 - 2 * delta) * Phi(x * u ** (-delta), du * u ** (delta - 1))])

        return cls(delta, beta, FirstOrderSystem(2, rhs, dict(params or {})), Phi, tuple(terms), name)


@dataclass(frozen=True)
class FbfSolution:
    free_boundary: float
    missing_slope: float
    group_parameter: float
    trajectory: Trajectory
    residual_at_origin: float | None = None
    terminal_slope: float | None = None
    solver_name: str = ""
    step_size: float = float("nan")
    escalations: int = 0
    v0: float | None = None
    auxiliary: Trajectory | None = None
    diagnostics: dict = field(default_factory=dict)


def locate_event(x_prev, y_prev, x_k, y_k, alpha, h, tab=None, f=None, mode=FROM_PREVIOUS,
                 component=0):
    """Linear-interpolation event locator for ``y[component] = alpha``.

    ``(x_prev, y_prev)`` is the last point before the crossing and
    ``(x_k, y_k)`` the first point past it. The abscissa is the secant
    estimate; the state there comes from one extra RK step, taken from
    ``x_prev`` (default) or from ``x_k`` with step ``x_alpha - x_k``.
    Without ``tab``/``f`` only the abscissa is returned.
    """
    u_prev, u_k = y_prev[component], y_k[component]
    if u_k == u_prev:
        raise DegenerateInterpolationError(f"flat segment at x={x_k!r}, cannot interpolate")
    x_alpha = x_k + (alpha - u_k) * h / (u_k - u_prev)
    if tab is None:
        return x_alpha
    if mode == FROM_PREVIOUS:
        if x_alpha == x_prev:
            return x_alpha, np.array(y_prev, dtype=float)
        return x_alpha, rk_step(tab, f, x_prev, y_prev, x_alpha - x_prev)
    if mode == LITERAL:
        if x_alpha == x_k:
            return x_alpha, np.array(y_k, dtype=float)
        return x_alpha, rk_step(tab, f, x_k, y_k, x_alpha - x_k)
    raise ValueError(f"unknown locator mode {mode!r}")


def _crossed(u_prev, u_k, alpha, descending):
    if descending:
        return u_k < alpha <= u_prev
    return u_k > alpha >= u_prev


def solve_translation(prob: TranslationFreeBvp, s_star: float, tab: ButcherTableau, h: float,
                      *, locator_mode=FROM_PREVIOUS, max_steps=10**6, refine=False,
                      refine_tol=1e-14, refine_iters=50) -> FbfSolution:
    """Backward shooting from ``s_star`` with event location at ``u* = alpha``.

    ``refine=True`` repeats the secant correction from the bracketing
    points until ``|u*(x_alpha) - alpha| < refine_tol``; it is an extension
    and is never used for the table reproductions.
    """
    if not h < 0:
        raise ValueError("translation method integrates backward: h must be negative")
    f = prob.system
    alpha = prob.alpha
    y = prob.boundary_state(s_star)
    if y[0] == alpha:
        raise ValueError("boundary value at s* already equals alpha; event fires at the start")
    descending = alpha < y[0]

    xs = [s_star]
    states = [y]
    for k in range(1, max_steps + 1):
        x_prev = s_star + (k - 1) * h
        try:
            y_new = rk_step(tab, f, x_prev, states[-1], h)
        except IntegrationError as exc:
            exc.step_index = k - 1
            raise
        x_k = s_star + k * h
        if _crossed(states[-1][0], y_new[0], alpha, descending):
            x_alpha, y_alpha = locate_event(
                x_prev, states[-1], x_k, y_new, alpha, h, tab, f, mode=locator_mode
            )
            if refine:
                x_alpha, y_alpha = _refine_event(
                    tab, f, x_prev, states[-1], x_k, y_new, x_alpha, y_alpha, alpha,
                    refine_tol, refine_iters,
                )
            break
        xs.append(x_k)
        states.append(y_new)
    else:
        raise NoCrossingError(
            f"u* never crossed alpha={alpha!r} within {max_steps} steps of size {h!r}"
        )

    if x_alpha != xs[-1]:
        xs.append(x_alpha)
        states.append(y_alpha)
    else:
        states[-1] = y_alpha

    mu = x_alpha
    shrink = math.exp(-prob.omega * mu)
    xs = np.asarray(xs) - mu
    xs[-1] = 0.0
    traj = Trajectory(xs, shrink * np.asarray(states))
    return FbfSolution(
        free_boundary=s_star - mu,
        missing_slope=shrink * y_alpha[1],
        group_parameter=mu,
        trajectory=traj,
        residual_at_origin=abs(y_alpha[0] - alpha),
        solver_name=tab.name,
        step_size=h,
    )


def _refine_event(tab, f, x_prev, y_prev, x_k, y_k, x_a, y_a, alpha, tol, iters):
    # regula falsi on the bracket [x_prev, x_k]; every state comes from x_prev
    lo, u_lo = x_prev, y_prev[0]
    hi, u_hi = x_k, y_k[0]
    for _ in range(iters):
        if abs(y_a[0] - alpha) < tol:
            break
        if (y_a[0] - alpha) * (u_lo - alpha) > 0:
            lo, u_lo = x_a, y_a[0]
        else:
            hi, u_hi = x_a, y_a[0]
        if u_hi == u_lo:
            break
        x_a = hi + (alpha - u_hi) * (hi - lo) / (u_hi - u_lo)
        y_a = rk_step(tab, f, x_prev, y_prev, x_a - x_prev) if x_a != x_prev else np.array(y_prev)
    return x_a, y_a


def escalation_factor(delta: float, factor: float = 10.0) -> float:
    """Direction in which to move ``v0`` so the terminal slope decreases.

    For large ``v0`` the rescaled terminal slope behaves like ``v0**delta``,
    so ``v0`` grows when ``delta < 0`` and shrinks when ``delta > 0``.
    """
    return factor if delta < 0 else 1.0 / factor


def _auxiliary_ivp(tab, f, s_star, v0, h):
    """Forward march of ``u*(0) = 0, u*'(0) = v0`` to ``s_star``.

    Stops early where ``u*'`` first reaches zero: past that point the
    derivative has left its admissible sign and the located abscissa serves
    as the auxiliary free boundary. Returns the trajectory and whether the
    stop was triggered.
    """
    y = np.array([0.0, v0])
    xs = [0.0]
    states = [y]
    n = int(math.floor(s_star / h + 1e-10))
    for k in range(1, n + 2):
        x_prev = (k - 1) * h
        if k == n + 1:
            step = s_star - x_prev
            if step <= 1e-10 * h:
                break
            x_k = s_star
        else:
            step = h
            x_k = k * h
        try:
            y_new = rk_step(tab, f, x_prev, states[-1], step)
        except IntegrationError as exc:
            exc.step_index = k - 1
            raise
        if states[-1][1] > 0 >= y_new[1]:
            x_z, y_z = locate_event(x_prev, states[-1], x_k, y_new, 0.0, step, tab, f,
                                    component=1)
            if x_z != xs[-1]:
                xs.append(x_z)
                states.append(y_z)
            return Trajectory(xs, states), True
        xs.append(x_k)
        states.append(y_new)
    xs[-1] = s_star
    return Trajectory(xs, states), False


def solve_scaling(prob: ScalingFreeBvp, s_star: float = 1.0, v0: float = 100.0, tau: float = 1e-6,
                  tab: ButcherTableau | None = None, h: float = 0.01, max_escalations: int = 12,
                  factor: float = 10.0) -> FbfSolution:
    """Forward shooting with rescaling; ``v0`` is moved by ``factor`` until the
    rescaled terminal slope is at most ``tau`` in magnitude."""
    if tab is None:
        raise ValueError("a Butcher tableau is required")
    if not s_star > 0 or not v0 > 0 or not h > 0:
        raise ValueError("s_star, v0 and h must be positive")
    d = prob.delta
    mult = escalation_factor(d, factor)
    escalations = 0
    while True:
        aux, _ = _auxiliary_ivp(tab, prob.system, s_star, v0, h)
        x_end = aux.xs[-1]
        u_end, du_end = aux.states[-1]
        lam = u_end / prob.beta
        if not lam > 0:
            raise InvalidLambdaError(
                f"u*(s*)={u_end!r} and beta={prob.beta!r} give non-positive lambda"
            )
        terminal = lam ** (d - 1) * du_end
        if abs(terminal) <= tau:
            break
        if escalations >= max_escalations:
            raise ToleranceNotMetError(
                f"terminal slope {terminal:.3e} > tau={tau:g} after {escalations} escalations",
                terminal,
            )
        escalations += 1
        v0 *= mult

    xs = lam ** (-d) * aux.xs
    states = np.column_stack([aux.u / lam, lam ** (d - 1) * aux.du_dx])
    # u(s) = beta holds by construction of lambda; pin it against round-off
    states[-1, 0] = prob.beta
    return FbfSolution(
        free_boundary=lam ** (-d) * x_end,
        missing_slope=lam ** (d - 1) * v0,
        group_parameter=lam,
        trajectory=Trajectory(xs, states),
        terminal_slope=terminal,
        solver_name=tab.name,
        step_size=h,
        escalations=escalations,
        v0=v0,
        auxiliary=aux,
    )


def check_class_membership(terms: Sequence[Term]):
    """Scaling exponent ``delta`` that balances every term of the equation.

    Returns ``(True, delta)``; raises :class:`NotInClassError` when no
    nonzero ``delta`` balances the terms.
    """
    if len(terms) < 2:
        raise NotInClassError("need at least two terms to balance")
    weights = [t.scaling_weight() for t in terms]
    delta = None
    s0, o0 = weights[0]
    for s1, o1 in weights[1:]:
        if math.isclose(s1, s0, abs_tol=1e-12):
            if not math.isclose(o1, o0, abs_tol=1e-12):
                raise NotInClassError("terms scale differently for every delta")
            continue
        cand = (o0 - o1) / (s1 - s0)
        if delta is None:
            delta = cand
        elif not math.isclose(cand, delta, rel_tol=1e-12, abs_tol=1e-12):
            raise NotInClassError(f"inconsistent balances: delta={delta!r} vs {cand!r}")
    if delta is None:
        raise NotInClassError("delta is not determined by the equation")
    if abs(delta) < 1e-12:
        raise NotInClassError("balance gives delta = 0; the scaling group degenerates")
    return True, delta


def check_spiral_invariance(system: FirstOrderSystem, omega=0.0, samples=None, mus=(-1.3, 0.7, 2.9),
                            rtol=1e-10):
    """Numerical test that ``u'' = F(x, u, u')`` commutes with the spiral group.

    Invariance means ``F(x + mu, g u, g u') = g F(x, u, u')`` with
    ``g = exp(omega mu)``. Raises :class:`NotInClassError` on the first
    violation; ``omega = 0`` is the translation group.
    """
    if samples is None:
        samples = [(0.3, 0.4, 0.9), (1.7, 0.8, 0.2), (4.1, 0.1, 0.5)]
    for x, u, du in samples:
        base = system(x, np.array([u, du]))[1]
        for mu in mus:
            g = math.exp(omega * mu)
            moved = system(x + mu, np.array([g * u, g * du]))[1]
            if not math.isclose(moved, g * base, rel_tol=rtol, abs_tol=rtol):
                raise NotInClassError(
                    f"equation not invariant under x -> x + {mu:g} (omega={omega:g}) at x={x:g}"
                )
    return True


# group maps and closure residuals --------------------------------------------------


def spiral_map(x, u, du, d2u, mu, omega):
    g = math.exp(omega * mu)
    return x + mu, g * u, g * du, g * d2u


def scaling_map(x, u, du, d2u, lam, delta):
    return lam**delta * x, lam * u, lam ** (1 - delta) * du, lam ** (1 - 2 * delta) * d2u


def translation_residual(prob: TranslationFreeBvp, x, u, du, d2u):
    e = math.exp(-prob.omega * x)
    return d2u - u * prob.rhs_Omega(u * e, du * e)


def scaling_residual(prob: ScalingFreeBvp, x, u, du, d2u):
    d = prob.delta
    return d2u - u ** (1 - 2 * d) * prob.rhs_Phi(x * u ** (-d), du * u ** (d - 1))


def fd_residuals(xs, us, residual):
    """Residuals of a governing equation on a grid via three-point differences.

    ``residual(x, u, du, d2u)`` is evaluated at every interior node with
    derivatives taken from nonuniform central differences.
    """
    xs = np.asarray(xs, dtype=float)
    us = np.asarray(us, dtype=float)
    out = []
    for i in range(1, len(xs) - 1):
        h0 = xs[i] - xs[i - 1]
        h1 = xs[i + 1] - xs[i]
        du = (h0**2 * us[i + 1] - h1**2 * us[i - 1] + (h1**2 - h0**2) * us[i]) / (h0 * h1 * (h0 + h1))
        d2u = 2 * (h0 * us[i + 1] - (h0 + h1) * us[i] + h1 * us[i - 1]) / (h0 * h1 * (h0 + h1))
        out.append(residual(xs[i], us[i], du, d2u))
    return np.asarray(out)
