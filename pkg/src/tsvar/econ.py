"""Firm production/investment model on the integer horizon scale.

Sales follow a hyperbolic price curve ``(y - y_floor)(p - p0) = B``; the
firm weighs a discounted capital functional (production cost minus
revenue) against a discounted technology functional, combined as a
product.  Each of the two component integrals can be discretized with
the forward (delta) or backward (nabla) quotient, giving four problem
kinds; the mixed kinds additionally admit two time-scale
Euler-Lagrange formulations beside the directly discretized system.

Everything here works on the scale {0, 1, ..., T} with clamped jump
operators: a forward difference at T and a backward difference at 0 are
taken as zero.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .solver import ResidualSystem
from .timescale import DomainError, GridFunction, TimeScale
from .variational import CompositeProblem, Integrand, product_outer

__all__ = [
    "EquationKind",
    "FirmParams",
    "ProblemKind",
    "firm_integrand",
    "firm_problem",
    "gamma_term",
    "residual_system",
]

INTEGRAND_NAMES = (
    "capital_delta",
    "capital_nabla",
    "technology_delta",
    "technology_nabla",
)


class ProblemKind(enum.Enum):
    """Which quotient each component integral uses (capital, technology)."""

    DELTA_DELTA = "dd"
    NABLA_NABLA = "nn"
    DELTA_NABLA = "dn"
    NABLA_DELTA = "nd"

    @property
    def capital_mode(self) -> str:
        return "delta" if self.value[0] == "d" else "nabla"

    @property
    def technology_mode(self) -> str:
        return "delta" if self.value[1] == "d" else "nabla"

    @property
    def is_mixed(self) -> bool:
        return self.value in ("dn", "nd")


class EquationKind(enum.Enum):
    """Residual system flavour; all three coincide for the pure kinds."""

    DIRECT = "direct"
    TIMESCALE_EL1 = "el1"
    TIMESCALE_EL2 = "el2"


@dataclass(frozen=True)
class FirmParams:
    """Model constants; defaults reproduce the worked horizon-3 example."""

    discount_rate: float = 0.05
    c0: float = 3.0          # fixed production cost
    c1: float = 0.5          # linear production cost
    c2: float = 3.0          # cost of changing the production rate
    lam: float = 0.5         # technology cost proportional to sales
    beta: float = 0.25       # technology cost of changing the rate
    b: float = 4.0           # bound softening the rate change under the root
    B: float = 2.0           # hyperbola constant of the price curve
    p0: float = 1.0          # price floor
    y_floor: float = 1.0     # sales floor of the price curve
    horizon: int = 3
    y_initial: float = 2.0
    y_terminal: float = 3.0

    def __post_init__(self):
        if not 0.0 < self.discount_rate < 1.0:
            raise ValueError(f"discount_rate must lie in (0, 1), got {self.discount_rate}")
        if self.c2 <= 0:
            raise ValueError(f"c2 must be positive, got {self.c2}")
        if self.b <= 0:
            raise ValueError(f"b must be positive, got {self.b}")
        if self.B <= 0:
            raise ValueError(f"B must be positive, got {self.B}")
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if int(self.horizon) != self.horizon or self.horizon < 2:
            raise ValueError(f"horizon must be an integer >= 2, got {self.horizon}")
        if self.y_initial <= self.y_floor:
            raise ValueError(
                f"y_initial {self.y_initial} must exceed y_floor {self.y_floor}"
            )
        if self.y_terminal <= self.y_floor:
            raise ValueError(
                f"y_terminal {self.y_terminal} must exceed y_floor {self.y_floor}"
            )


# ---------------------------------------------------------------------------
# clamped index helpers on {0, ..., T}


def _up(i: int, top: int) -> int:
    return i + 1 if i < top else top


def _down(i: int) -> int:
    return i - 1 if i > 0 else 0


def _dy(yv: Sequence[float], i: int) -> float:
    """Forward difference, zero at the top by clamping."""
    return yv[_up(i, len(yv) - 1)] - yv[i]


def _ny(yv: Sequence[float], i: int) -> float:
    """Backward difference, zero at the bottom by clamping."""
    return yv[i] - yv[_down(i)]


def _guarded_sqrt(p: FirmParams, rate: float, t) -> float:
    arg = rate + p.b
    if arg <= 0.0:
        raise DomainError(
            f"rate-change guard: quotient {rate} + b = {arg} is not positive at t={t}"
        )
    return math.sqrt(arg)


def _guarded_margin(p: FirmParams, sales: float, t) -> float:
    margin = sales - p.y_floor
    if margin == 0.0:
        raise DomainError(f"price-curve guard: sales hit the floor {p.y_floor} at t={t}")
    return margin


def _disc_delta(p: FirmParams, t: float) -> float:
    return (1.0 + p.discount_rate) ** (t - p.horizon)


def _disc_nabla(p: FirmParams, t: float) -> float:
    return (1.0 - p.discount_rate) ** (p.horizon - t)


# ---------------------------------------------------------------------------
# integrands


def firm_integrand(params: FirmParams, which: str) -> Integrand:
    """One of the four discounted integrands, with analytic partials.

    ``which`` is ``capital_delta``, ``capital_nabla``, ``technology_delta``
    or ``technology_nabla``.  The ``(t, y, v)`` arguments are the time
    point, the jump-shifted sales and the difference-quotient rate.
    """
    if which not in INTEGRAND_NAMES:
        raise ValueError(f"which must be one of {INTEGRAND_NAMES}, got {which!r}")
    family, mode = which.rsplit("_", 1)
    disc = _disc_delta if mode == "delta" else _disc_nabla
    p = params

    if family == "capital":
        def value(t, y, v):
            margin = _guarded_margin(p, y, t)
            return disc(p, t) * (
                p.c0 + p.c1 * y + p.c2 * v * v - y * p.p0 - p.B * y / margin
            )

        def partial_y(t, y, v):
            margin = _guarded_margin(p, y, t)
            return disc(p, t) * (p.c1 - p.p0 + p.B * p.y_floor / margin**2)

        def partial_v(t, y, v):
            return disc(p, t) * 2.0 * p.c2 * v
    else:
        def value(t, y, v):
            return disc(p, t) * (p.lam * y + p.beta * _guarded_sqrt(p, v, t))

        def partial_y(t, y, v):
            return disc(p, t) * p.lam

        def partial_v(t, y, v):
            return disc(p, t) * p.beta / (2.0 * _guarded_sqrt(p, v, t))

    return Integrand(mode, value, partial_y, partial_v)


def firm_problem(params: FirmParams, kind: ProblemKind) -> CompositeProblem:
    """Composite product problem for the requested discretization kind."""
    scale = TimeScale.integer_range(0, params.horizon)
    capital = firm_integrand(params, f"capital_{kind.capital_mode}")
    technology = firm_integrand(params, f"technology_{kind.technology_mode}")
    # component order: delta slots before nabla, capital before technology
    if kind is ProblemKind.DELTA_DELTA:
        delta, nabla = (capital, technology), ()
    elif kind is ProblemKind.NABLA_NABLA:
        delta, nabla = (), (capital, technology)
    elif kind is ProblemKind.DELTA_NABLA:
        delta, nabla = (capital,), (technology,)
    else:
        delta, nabla = (technology,), (capital,)
    return CompositeProblem(
        scale=scale,
        delta_integrands=delta,
        nabla_integrands=nabla,
        outer=product_outer(),
        boundary=(params.y_initial, params.y_terminal),
    )


# ---------------------------------------------------------------------------
# component integrals


def _capital_total(p: FirmParams, yv: Sequence[float], mode: str) -> float:
    total = 0.0
    if mode == "delta":
        for t in range(p.horizon):
            y = yv[t + 1]
            margin = _guarded_margin(p, y, t)
            v = yv[t + 1] - yv[t]
            total += _disc_delta(p, t) * (
                p.c0 + p.c1 * y + p.c2 * v * v - y * p.p0 - p.B * y / margin
            )
    else:
        for t in range(1, p.horizon + 1):
            y = yv[t - 1]
            margin = _guarded_margin(p, y, t)
            v = yv[t] - yv[t - 1]
            total += _disc_nabla(p, t) * (
                p.c0 + p.c1 * y + p.c2 * v * v - y * p.p0 - p.B * y / margin
            )
    return total


def _technology_total(p: FirmParams, yv: Sequence[float], mode: str) -> float:
    total = 0.0
    if mode == "delta":
        for t in range(p.horizon):
            total += _disc_delta(p, t) * (
                p.lam * yv[t + 1] + p.beta * _guarded_sqrt(p, yv[t + 1] - yv[t], t)
            )
    else:
        for t in range(1, p.horizon + 1):
            total += _disc_nabla(p, t) * (
                p.lam * yv[t - 1] + p.beta * _guarded_sqrt(p, yv[t] - yv[t - 1], t)
            )
    return total


# ---------------------------------------------------------------------------
# gamma terms: pointwise Euler-Lagrange cores of the four integrands


def _gamma_capital_delta(p: FirmParams, yv: Sequence[float], t: int) -> float:
    sales = yv[_up(t, p.horizon)]
    margin = _guarded_margin(p, sales, t)
    dyt = _dy(yv, t)
    ddyt = _dy(yv, _up(t, p.horizon)) - dyt
    return _disc_delta(p, t) * (
        (p.c1 - p.p0 + p.B * p.y_floor / margin**2)
        - 2.0 * p.c2 * (p.discount_rate * dyt + (1.0 + p.discount_rate) * ddyt)
    )


def _gamma_capital_nabla(p: FirmParams, yv: Sequence[float], t: int) -> float:
    sales = yv[_down(t)]
    margin = _guarded_margin(p, sales, t)
    nyt = _ny(yv, t)
    nnyt = nyt - _ny(yv, _down(t))
    return _disc_nabla(p, t) * (
        (p.c1 - p.p0 + p.B * p.y_floor / margin**2)
        - 2.0 * p.c2 * (p.discount_rate * nyt + (1.0 - p.discount_rate) * nnyt)
    )


def _gamma_technology_delta(p: FirmParams, yv: Sequence[float], t: int) -> float:
    root_here = _guarded_sqrt(p, _dy(yv, t), t)
    root_next = _guarded_sqrt(p, _dy(yv, _up(t, p.horizon)), t)
    numer = p.discount_rate * root_here - (root_next - root_here)
    return _disc_delta(p, t) * (p.lam - p.beta * numer / (2.0 * root_here * root_next))


def _gamma_technology_nabla(p: FirmParams, yv: Sequence[float], t: int) -> float:
    root_here = _guarded_sqrt(p, _ny(yv, t), t)
    root_prev = _guarded_sqrt(p, _ny(yv, _down(t)), t)
    numer = p.discount_rate * root_here - (root_here - root_prev)
    return _disc_nabla(p, t) * (p.lam - p.beta * numer / (2.0 * root_here * root_prev))


_GAMMAS = {
    "capital_delta": _gamma_capital_delta,
    "capital_nabla": _gamma_capital_nabla,
    "technology_delta": _gamma_technology_delta,
    "technology_nabla": _gamma_technology_nabla,
}


def _state_values(params: FirmParams, y) -> Sequence[float]:
    if isinstance(y, GridFunction):
        vals = y.values
    else:
        vals = np.asarray(y, dtype=float)
    if vals.shape != (params.horizon + 1,):
        raise ValueError(
            f"state needs {params.horizon + 1} values on 0..{params.horizon}, "
            f"got {vals.shape}"
        )
    return vals.tolist()


def gamma_term(params: FirmParams, which: str, y, t: int) -> float:
    """Euler-Lagrange core of one integrand at point ``t``.

    ``y`` holds the sales values on the whole scale {0, ..., T}; shifts
    that leave the scale are clamped, so the term is defined at every
    point.
    """
    if which not in _GAMMAS:
        raise ValueError(f"which must be one of {INTEGRAND_NAMES}, got {which!r}")
    if int(t) != t or not 0 <= t <= params.horizon:
        raise ValueError(f"t={t} is not a point of the horizon scale")
    return _GAMMAS[which](params, _state_values(params, y), int(t))


# ---------------------------------------------------------------------------
# mixed-kind time-scale Euler-Lagrange pieces


def _parts_dn_el1(p: FirmParams, yv: Sequence[float], k_delta: float, t: int) -> float:
    disc = _disc_nabla(p, _up(t, p.horizon))
    part1 = p.lam * disc
    w_here = _guarded_sqrt(p, _ny(yv, t), t)
    w_next = _guarded_sqrt(p, _ny(yv, _up(t, p.horizon)), t)
    u_here = _guarded_sqrt(p, _dy(yv, t), t)
    numer = p.discount_rate * w_here - (1.0 - p.discount_rate) * (w_next - w_here)
    part2 = p.beta * disc * numer / (2.0 * w_here * u_here)
    return k_delta * (part1 - part2)


def _parts_dn_el2(p: FirmParams, yv: Sequence[float], a_nabla: float, t: int) -> float:
    disc = _disc_delta(p, _down(t))
    margin = _guarded_margin(p, yv[t], t)
    part3 = disc * (p.c1 - p.p0 + p.B * p.y_floor / margin**2)
    curvature = yv[_up(t, p.horizon)] - 2.0 * yv[t] + yv[_down(t)]
    part4 = 2.0 * p.c2 * disc * (p.discount_rate * _dy(yv, t) + curvature)
    return a_nabla * (part3 - part4)


def _parts_nd_el1(p: FirmParams, yv: Sequence[float], a_delta: float, t: int) -> float:
    disc = _disc_nabla(p, _up(t, p.horizon))
    margin = _guarded_margin(p, yv[t], t)
    part5 = disc * (p.c1 - p.p0 + p.B * p.y_floor / margin**2)
    rate_jump = _ny(yv, _up(t, p.horizon)) - _ny(yv, t)
    part6 = 2.0 * p.c2 * disc * (p.discount_rate * _ny(yv, t) + rate_jump)
    return a_delta * (part5 - part6)


def _parts_nd_el2(p: FirmParams, yv: Sequence[float], k_nabla: float, t: int) -> float:
    disc = _disc_delta(p, _down(t))
    part7 = p.lam * disc
    u_here = _guarded_sqrt(p, _dy(yv, t), t)
    u_prev = _guarded_sqrt(p, _dy(yv, _down(t)), t)
    w_here = _guarded_sqrt(p, _ny(yv, t), t)
    numer = p.discount_rate * u_here - (1.0 + p.discount_rate) * (u_here - u_prev)
    part8 = disc * p.beta * numer / (2.0 * u_here * w_here)
    return k_nabla * (part7 - part8)


# ---------------------------------------------------------------------------
# residual systems


def _domain_points(kind: ProblemKind, horizon: int) -> range:
    if kind is ProblemKind.DELTA_DELTA:
        return range(0, horizon - 1)
    if kind is ProblemKind.NABLA_NABLA:
        return range(2, horizon + 1)
    return range(1, horizon)


def _point_residual(p: FirmParams, kind: ProblemKind, eq: EquationKind,
                    yv: Sequence[float], t: int,
                    capital_total: float, technology_total: float) -> float:
    """One equation of the system at point t.

    The product rule pairs each integrand's core with the other
    component's integral; both totals are frozen at the current state.
    """
    if kind is ProblemKind.DELTA_DELTA:
        return (technology_total * _gamma_capital_delta(p, yv, t)
                + capital_total * _gamma_technology_delta(p, yv, t))
    if kind is ProblemKind.NABLA_NABLA:
        return (technology_total * _gamma_capital_nabla(p, yv, t)
                + capital_total * _gamma_technology_nabla(p, yv, t))
    top = p.horizon
    if kind is ProblemKind.DELTA_NABLA:
        if eq is EquationKind.DIRECT:
            return (technology_total * _gamma_capital_delta(p, yv, t)
                    + capital_total * _gamma_technology_nabla(p, yv, t))
        if eq is EquationKind.TIMESCALE_EL1:
            head = technology_total * _gamma_capital_delta(p, yv, t)
            middle = _parts_dn_el1(p, yv, capital_total, t)
            def aggregated(s):
                return capital_total * _gamma_technology_nabla(p, yv, s)
            tail = aggregated(_up(_up(t, top), top)) - aggregated(_up(t, top))
            return head + middle + tail
        head = capital_total * _gamma_technology_nabla(p, yv, t)
        middle = _parts_dn_el2(p, yv, technology_total, t)
        def aggregated(s):
            return technology_total * _gamma_capital_delta(p, yv, s)
        tail = aggregated(_down(t)) - aggregated(_down(_down(t)))
        return middle + head - tail
    # nabla-delta
    if eq is EquationKind.DIRECT:
        return (technology_total * _gamma_capital_nabla(p, yv, t)
                + capital_total * _gamma_technology_delta(p, yv, t))
    if eq is EquationKind.TIMESCALE_EL1:
        head = capital_total * _gamma_technology_delta(p, yv, t)
        middle = _parts_nd_el1(p, yv, technology_total, t)
        def aggregated(s):
            return technology_total * _gamma_capital_nabla(p, yv, s)
        tail = aggregated(_up(_up(t, top), top)) - aggregated(_up(t, top))
        return head + middle + tail
    head = technology_total * _gamma_capital_nabla(p, yv, t)
    middle = _parts_nd_el2(p, yv, capital_total, t)
    def aggregated(s):
        return capital_total * _gamma_technology_delta(p, yv, s)
    tail = aggregated(_down(t)) - aggregated(_down(_down(t)))
    return middle + head - tail


def _totals(p: FirmParams, kind: ProblemKind, yv: Sequence[float]):
    capital = _capital_total(p, yv, kind.capital_mode)
    technology = _technology_total(p, yv, kind.technology_mode)
    return capital, technology


def residual_system(params: FirmParams, kind: ProblemKind,
                    eq: EquationKind = EquationKind.DIRECT) -> ResidualSystem:
    """Square system in the interior sales values y_1, ..., y_{T-1}.

    For the pure kinds every :class:`EquationKind` yields the same
    system; the mixed kinds dispatch on it.
    """
    p = params
    points = list(_domain_points(kind, p.horizon))

    def assemble(x) -> list:
        if len(x) != p.horizon - 1:
            raise ValueError(
                f"expected {p.horizon - 1} interior values, got {len(x)}"
            )
        return [p.y_initial, *(float(v) for v in x), p.y_terminal]

    def residual(x: np.ndarray) -> np.ndarray:
        yv = assemble(x)
        capital, technology = _totals(p, kind, yv)
        return np.array([
            _point_residual(p, kind, eq, yv, t, capital, technology)
            for t in points
        ])

    def functional(x: np.ndarray) -> float:
        yv = assemble(x)
        capital, technology = _totals(p, kind, yv)
        return capital * technology

    return ResidualSystem(
        dimension=p.horizon - 1,
        residual=residual,
        label=f"{kind.value}/{eq.value}",
        functional=functional,
    )
