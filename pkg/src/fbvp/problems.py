"""Benchmark problems: governing equations, free boundary data, closed forms.

Catalog names::

    linear                 u'' + P u' = 0,               u(0)=0, u(inf)=1
    linear-nonautonomous   u'' + P^2 exp(-P x) = 0,      same exact solutions
    nonlinear-tanh         u'' + 2 P u u' = 0,           u(0)=0, u(inf)=1
    colloid                u'' - 2 sinh(u) = 0,          u(0)=c, u(inf)=0
    viscoplastic-rod       u'' + m x (u')^(2-q) = 0,     u(0)=0, u(inf)=1
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, NotInClassError
from .groups import ScalingFreeBvp, Term, TranslationFreeBvp, check_class_membership
from .rk import FirstOrderSystem

PROBLEM_NAMES = ("linear", "linear-nonautonomous", "nonlinear-tanh", "colloid", "viscoplastic-rod")
EPS_MAX = 0.5


@dataclass(frozen=True)
class ExactSolution:
    """Closed-form solution on ``[0, x_eps]``; ``x_eps = inf`` for the BVP itself."""

    u: Callable
    du_dx: Callable
    d2u_dx2: Callable
    x_eps: float
    missing_slope: float
    boundary_value: float = 1.0
    epsilon: float = 0.0
    C: float | None = None


@dataclass(frozen=True)
class BenchmarkProblem:
    name: str
    kind: str  # translation | scaling | direct
    params: dict
    epsilon: float
    fbf: TranslationFreeBvp | ScalingFreeBvp | None
    system: FirstOrderSystem
    exact: ExactSolution | None = None
    limit: ExactSolution | None = None
    first_integral: Callable | None = None
    extra: dict = field(default_factory=dict)


def _check_P(P):
    if not P > 0:
        raise DomainError(f"P must be positive, got {P!r}")


def _check_eps(eps):
    if abs(eps) > EPS_MAX:
        raise DomainError(f"|eps| must be at most {EPS_MAX}, got {eps!r}")


# closed forms ----------------------------------------------------------------


def exact_linear_bvp(P, x):
    _check_P(P)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("x must be nonnegative")
    e = np.exp(-P * x)
    return 1.0 - e, P * e


def exact_linear_fbf(P, eps, x):
    """``u_eps = (P+eps)/P (1 - exp(-P x))``, ``x_eps = -ln(eps/(P+eps))/P``."""
    _check_P(P)
    if not eps > 0:
        raise DomainError("closed form of the linear free boundary problem needs eps > 0")
    x_eps = -math.log(eps / (P + eps)) / P
    x = np.asarray(x, dtype=float)
    e = np.exp(-P * x)
    return (P + eps) / P * (1.0 - e), (P + eps) * e, x_eps


def nonlinear_constant(P, eps):
    """``C = (eps - sqrt(eps^2 + 4 P^2)) / (2P)``."""
    return (eps - math.sqrt(eps * eps + 4 * P * P)) / (2 * P)


def _published_x_eps(P, eps):
    if eps == 0:
        return math.inf
    root = math.sqrt(eps * eps + 4 * P * P)
    # 1 + C without cancellation
    one_plus_c = 2 * eps / (2 * P + eps + root)
    one_minus_c = (2 * P - eps + root) / (2 * P)
    return math.log(one_minus_c / one_plus_c) / (2 * P)


def exact_nonlinear_fbf(P, eps, x):
    """Published closed form ``u_eps = -tanh(P x) / C``.

    It meets ``u(x_eps) = 1`` and ``u'(x_eps) = eps`` exactly (both reduce to
    ``P C^2 - eps C - P = 0``) but solves ``u'' + 2 P u u' = 0`` only when
    ``C = -1``; the equation residual is O(eps). :func:`nonlinear_exact` is
    the solution of the free boundary problem itself.
    """
    _check_P(P)
    if eps < 0:
        raise DomainError("closed form of the tanh free boundary problem needs eps >= 0")
    C = nonlinear_constant(P, eps)
    x = np.asarray(x, dtype=float)
    t = np.tanh(P * x)
    return -t / C, -P * (1 - t * t) / C, _published_x_eps(P, eps), C


def linear_exact(P, eps=0.0) -> ExactSolution:
    _check_P(P)
    k = (P + eps) / P
    x_eps = math.inf if eps == 0 else exact_linear_fbf(P, eps, 0.0)[2]
    return ExactSolution(
        u=lambda x: k * (1 - np.exp(-P * np.asarray(x, dtype=float))),
        du_dx=lambda x: (P + eps) * np.exp(-P * np.asarray(x, dtype=float)),
        d2u_dx2=lambda x: -P * (P + eps) * np.exp(-P * np.asarray(x, dtype=float)),
        x_eps=x_eps,
        missing_slope=P + eps,
        epsilon=eps,
    )


def nonlinear_exact(P, eps=0.0) -> ExactSolution:
    """``u_eps = a tanh(P a x)`` with ``a = sqrt(1 + eps/P)``.

    From the first integral ``u' + P u^2 = P + eps``; ``x_eps`` solves
    ``tanh(P a x_eps) = 1/a``. ``C`` carries the published constant.
    """
    _check_P(P)
    if eps < 0:
        raise DomainError("tanh free boundary problem needs eps >= 0")
    a = math.sqrt(1 + eps / P)
    Pa = P * a
    if eps == 0:
        x_eps = math.inf
    else:
        a_minus_1 = (eps / P) / (a + 1)  # a - 1 without cancellation
        x_eps = math.log((a + 1) / a_minus_1) / (2 * Pa)

    def u(x):
        return a * np.tanh(Pa * np.asarray(x, dtype=float))

    def du(x):
        t = np.tanh(Pa * np.asarray(x, dtype=float))
        return Pa * a * (1 - t * t)

    def d2u(x):
        t = np.tanh(Pa * np.asarray(x, dtype=float))
        return -2 * Pa * Pa * a * t * (1 - t * t)

    return ExactSolution(u, du, d2u, x_eps, P + eps, epsilon=eps, C=nonlinear_constant(P, eps))


def nonautonomous_exact(P, eps) -> ExactSolution:
    """Free boundary solution of ``u'' + P^2 exp(-P x) = 0``.

    ``u = k x + 1 - exp(-P x)``; the free boundary data force
    ``k = exp(-P x_eps) / x_eps`` and ``exp(-P x_eps) (1/x_eps + P) = eps``,
    solved by Newton's method on the logarithm (monotone in ``x_eps``).
    """
    _check_P(P)
    if not eps > 0:
        raise DomainError("non-autonomous free boundary problem needs eps > 0")
    target = math.log(eps)
    x = max(-math.log(eps / P) / P, 1e-3)
    for _ in range(100):
        g = -P * x + math.log(1 / x + P) - target
        dg = -P - 1 / (x * (1 + P * x))
        step = g / dg
        x = max(x - step, x / 2)
        if abs(step) <= 1e-15 * x:
            break
    k = math.exp(-P * x) / x
    return ExactSolution(
        u=lambda z: k * np.asarray(z, dtype=float) + 1 - np.exp(-P * np.asarray(z, dtype=float)),
        du_dx=lambda z: k + P * np.exp(-P * np.asarray(z, dtype=float)),
        d2u_dx2=lambda z: -P * P * np.exp(-P * np.asarray(z, dtype=float)),
        x_eps=x,
        missing_slope=k + P,
        epsilon=eps,
    )


def rod_exact(m, q=1.5) -> ExactSolution:
    """Closed form of the rod BVP for ``q = 3/2`` (derivative of compact support).

    ``sqrt(u') = w - m x^2/4`` up to ``x0 = 2 sqrt(w/m)`` where ``u' = 0`` and
    ``u = 1``; ``u(x0) = 1`` fixes ``w = (15 sqrt(m) / 16)**(2/5)``.
    """
    if q != 1.5:
        raise DomainError("closed form only available for q = 3/2")
    w = (15 * math.sqrt(m) / 16) ** 0.4
    x0 = 2 * math.sqrt(w / m)

    def r(x):
        return np.clip(w - m * np.asarray(x, dtype=float) ** 2 / 4, 0.0, None)

    def u(x):
        x = np.minimum(np.asarray(x, dtype=float), x0)
        return w * w * x - w * m * x**3 / 6 + m * m * x**5 / 80

    return ExactSolution(
        u=u,
        du_dx=lambda x: r(x) ** 2,
        d2u_dx2=lambda x: -m * np.asarray(x, dtype=float) * r(x),
        x_eps=x0,
        missing_slope=w * w,
    )


# problem constructors --------------------------------------------------------


def linear_problem(P=1.0, eps=1e-6) -> BenchmarkProblem:
    _check_P(P)
    _check_eps(eps)

    def rhs(x, y):
        return np.array([y[1], -P * y[1]])

    system = FirstOrderSystem(2, rhs, {"P": P})
    fbf = TranslationFreeBvp(
        omega=0.0, alpha=0.0, beta=1.0, gamma=eps, system=system,
        rhs_Omega=lambda p, q: -P * q / p, name="linear",
    )
    exact = linear_exact(P, eps) if eps > 0 else None
    return BenchmarkProblem("linear", "translation", {"P": P}, eps, fbf, system, exact, linear_exact(P))


def nonautonomous_variant(P=1.0) -> FirstOrderSystem:
    """``u'' + P^2 exp(-P x) = 0``; shares the linear BVP solution, not its FBF one."""
    _check_P(P)

    def rhs(x, y):
        return np.array([y[1], -P * P * math.exp(-P * x)])

    return FirstOrderSystem(2, rhs, {"P": P})


def linear_nonautonomous_problem(P=1.0, eps=1e-6) -> BenchmarkProblem:
    _check_P(P)
    _check_eps(eps)
    system = nonautonomous_variant(P)
    exact = nonautonomous_exact(P, eps) if eps > 0 else None
    return BenchmarkProblem(
        "linear-nonautonomous", "direct", {"P": P}, eps, None, system, exact, linear_exact(P)
    )


def nonlinear_terms(P):
    return (Term(1.0, d2u_exp=1), Term(2 * P, u_exp=1, du_exp=1))


def nonlinear_problem(P=1.0, tau=1e-6) -> BenchmarkProblem:
    """tanh benchmark; ``tau`` is the tolerance on the free boundary slope."""
    _check_P(P)
    _, delta = check_class_membership(nonlinear_terms(P))

    def rhs(x, y):
        return np.array([y[1], -2 * P * y[0] * y[1]])

    system = FirstOrderSystem(2, rhs, {"P": P})
    fbf = ScalingFreeBvp(
        delta=delta, beta=1.0, system=system, rhs_Phi=lambda a, b: -2 * P * b,
        terms=nonlinear_terms(P), name="nonlinear-tanh",
    )
    return BenchmarkProblem(
        "nonlinear-tanh", "scaling", {"P": P}, tau, fbf, system, None, nonlinear_exact(P)
    )


def colloid_first_integral(u, du):
    """``(u')^2 - 4 (cosh u - 1)``; equals ``eps^2`` along exact solutions."""
    return du * du - 4.0 * (np.cosh(u) - 1.0)


def _colloid_slope(c, eps):
    # first integral at x = 0; inf once cosh(c) overflows
    try:
        return -math.sqrt(4 * (math.cosh(c) - 1) + eps * eps)
    except OverflowError:
        return -math.inf


def colloid_problem(c=1.0, eps=-1e-6) -> BenchmarkProblem:
    if not c > 0:
        raise DomainError("c must be positive")
    if not eps < 0:
        raise DomainError("colloid solution decreases to 0: eps must be negative")
    _check_eps(eps)

    def rhs(x, y):
        return np.array([y[1], 2.0 * math.sinh(y[0])])

    def Omega(p, q):
        return 2.0 if p == 0 else 2.0 * math.sinh(p) / p

    system = FirstOrderSystem(2, rhs, {"c": c})
    fbf = TranslationFreeBvp(
        omega=0.0, alpha=c, beta=0.0, gamma=eps, system=system, rhs_Omega=Omega, name="colloid"
    )
    return BenchmarkProblem(
        "colloid", "translation", {"c": c}, eps, fbf, system,
        first_integral=colloid_first_integral,
        extra={"missing_slope": _colloid_slope(c, eps)},
    )


def rod_terms(m, q):
    return (Term(1.0, d2u_exp=1), Term(m, x_exp=1, du_exp=2 - q))


def rod_problem(m=1.0, q=1.5, tau=1e-4) -> BenchmarkProblem:
    if not m > 0:
        raise DomainError("m must be positive")
    if not 0 < q < 2:
        raise DomainError("q must lie in (0, 2)")
    try:
        _, delta = check_class_membership(rod_terms(m, q))
    except NotInClassError as exc:
        raise NotInClassError(f"rod problem with q={q!r}: {exc}") from None
    p = 2.0 - q

    def rhs(x, y):
        # u' >= 0 on solutions; clamp keeps stage values real past u' = 0
        return np.array([y[1], -m * x * max(y[1], 0.0) ** p])

    system = FirstOrderSystem(2, rhs, {"m": m, "q": q})
    fbf = ScalingFreeBvp(
        delta=delta, beta=1.0, system=system, rhs_Phi=lambda a, b: -m * a * b**p,
        terms=rod_terms(m, q), name="viscoplastic-rod",
    )
    limit = rod_exact(m, q) if q == 1.5 else None
    return BenchmarkProblem(
        "viscoplastic-rod", "scaling", {"m": m, "q": q}, tau, fbf, system, None, limit
    )


def get_problem(name, *, P=1.0, eps=None, c=1.0, m=1.0, q=1.5, tau=None) -> BenchmarkProblem:
    if name == "linear":
        return linear_problem(P, 1e-6 if eps is None else eps)
    if name == "linear-nonautonomous":
        return linear_nonautonomous_problem(P, 1e-6 if eps is None else eps)
    if name == "nonlinear-tanh":
        return nonlinear_problem(P, 1e-6 if tau is None else tau)
    if name == "colloid":
        return colloid_problem(c, -1e-6 if eps is None else eps)
    if name == "viscoplastic-rod":
        return rod_problem(m, q, 1e-4 if tau is None else tau)
    raise ValueError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}")
