"""Composite variational functionals on finite time scales.

The objects here describe functionals of the form

    H( I_1, ..., I_k, I_{k+1}, ..., I_{k+n} )

where the first k components are delta integrals of integrands evaluated
along ``(t, y(sigma(t)), delta-quotient of y)`` and the remaining n are
nabla integrals evaluated along ``(t, y(rho(t)), nabla-quotient of y)``.
Two residual forms of the stationarity system are provided, plus the
specialization to contiguous integer scales written directly with index
shifts.

Shifted difference quotients near the scale's extremes exit their
natural domains.  The ``strict`` policy leaves such points undefined
(NaN in the returned grid function; access raises), while the
``clamped`` policy substitutes a zero quotient at the offending extreme,
mirroring the convention used by the firm model in :mod:`tsvar.econ`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .timescale import DomainError, GridFunction, TimeScale

__all__ = [
    "BoundaryMismatchError",
    "CompositeProblem",
    "Integrand",
    "OuterFunction",
    "STRICT",
    "CLAMPED",
    "check_integrand_partials",
    "corollary_z_residual",
    "eval_component_integrals",
    "eval_functional",
    "identity_outer",
    "product_outer",
    "sum_outer",
    "theorem_main_residual",
]

STRICT = "strict"
CLAMPED = "clamped"

_POLICIES = (STRICT, CLAMPED)


class BoundaryMismatchError(ValueError):
    """The candidate state does not take the problem's boundary values."""


@dataclass(frozen=True)
class Integrand:
    """One inner integrand with analytic partial derivatives.

    ``value``, ``partial_y`` and ``partial_v`` all take ``(t, y, v)``:
    the time point, the jump-shifted state and the difference-quotient
    rate fed to this integrand by its kind.
    """

    kind: str  # "delta" or "nabla"
    value: Callable[[float, float, float], float]
    partial_y: Callable[[float, float, float], float]
    partial_v: Callable[[float, float, float], float]

    def __post_init__(self):
        if self.kind not in ("delta", "nabla"):
            raise ValueError(f"kind must be 'delta' or 'nabla', got {self.kind!r}")


@dataclass(frozen=True)
class OuterFunction:
    """Outer combining function with one partial per component integral."""

    arity: int
    value: Callable[[Sequence[float]], float]
    partials: tuple = field(default=())

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("outer function needs at least one argument")
        if len(self.partials) != self.arity:
            raise ValueError(
                f"expected {self.arity} partials, got {len(self.partials)}"
            )


def identity_outer() -> OuterFunction:
    return OuterFunction(1, lambda c: float(c[0]), (lambda c: 1.0,))


def sum_outer(arity: int) -> OuterFunction:
    return OuterFunction(
        arity,
        lambda c: float(sum(c)),
        tuple((lambda c: 1.0) for _ in range(arity)),
    )


def product_outer() -> OuterFunction:
    return OuterFunction(
        2,
        lambda c: float(c[0] * c[1]),
        (lambda c: float(c[1]), lambda c: float(c[0])),
    )


@dataclass(frozen=True)
class CompositeProblem:
    """A composite functional together with its fixed boundary values."""

    scale: TimeScale
    delta_integrands: tuple
    nabla_integrands: tuple
    outer: OuterFunction
    boundary: tuple

    def __post_init__(self):
        k = len(self.delta_integrands)
        n = len(self.nabla_integrands)
        if k + n < 1:
            raise ValueError("a composite problem needs at least one integrand")
        if self.outer.arity != k + n:
            raise ValueError(
                f"outer arity {self.outer.arity} != number of integrands {k + n}"
            )
        for f in self.delta_integrands:
            if f.kind != "delta":
                raise ValueError("delta integrand slot holds a nabla integrand")
        for g in self.nabla_integrands:
            if g.kind != "nabla":
                raise ValueError("nabla integrand slot holds a delta integrand")


# ---------------------------------------------------------------------------
# evaluation


def _admissible_values(problem: CompositeProblem, y: GridFunction) -> np.ndarray:
    if y.scale != problem.scale:
        raise ValueError("state lives on a different scale than the problem")
    if y.support != range(0, len(problem.scale)):
        raise DomainError("state must be defined on the whole scale")
    ya, yb = problem.boundary
    vals = y.values
    if abs(vals[0] - ya) > 1e-12 or abs(vals[-1] - yb) > 1e-12:
        raise BoundaryMismatchError(
            f"state endpoints ({vals[0]}, {vals[-1]}) do not match boundary ({ya}, {yb})"
        )
    return vals


def eval_component_integrals(problem: CompositeProblem, y: GridFunction) -> np.ndarray:
    """Vector of the k delta and n nabla component integrals at state y."""
    vals = _admissible_values(problem, y)
    scale = problem.scale
    pts = scale.points
    mu = scale.mu_values()
    nu = scale.nu_values()
    n = len(scale)
    out = []
    for f in problem.delta_integrands:
        total = 0.0
        for i in range(n - 1):
            total += mu[i] * f.value(pts[i], vals[i + 1], (vals[i + 1] - vals[i]) / mu[i])
        out.append(total)
    for g in problem.nabla_integrands:
        total = 0.0
        for i in range(1, n):
            total += nu[i] * g.value(pts[i], vals[i - 1], (vals[i] - vals[i - 1]) / nu[i])
        out.append(total)
    return np.asarray(out)


def eval_functional(problem: CompositeProblem, y: GridFunction) -> float:
    """Outer function applied to the component integrals."""
    return float(problem.outer.value(eval_component_integrals(problem, y)))


# ---------------------------------------------------------------------------
# residual assembly

def _check_policy(policy: str) -> None:
    if policy not in _POLICIES:
        raise ValueError(f"policy must be one of {_POLICIES}, got {policy!r}")


def _rate_tables(scale: TimeScale, vals: np.ndarray, policy: str):
    """Shifted states and difference-quotient rates for both kinds.

    Entries that are undefined under the strict policy come back NaN.
    """
    n = len(scale)
    mu = scale.mu_values()
    nu = scale.nu_values()
    sig_state = np.empty(n)
    sig_state[:-1] = vals[1:]
    sig_state[-1] = vals[-1]
    rho_state = np.empty(n)
    rho_state[1:] = vals[:-1]
    rho_state[0] = vals[0]
    d_rate = np.full(n, 0.0 if policy == CLAMPED else np.nan)
    d_rate[:-1] = (vals[1:] - vals[:-1]) / mu[:-1]
    n_rate = np.full(n, 0.0 if policy == CLAMPED else np.nan)
    n_rate[1:] = (vals[1:] - vals[:-1]) / nu[1:]
    return sig_state, rho_state, d_rate, n_rate


def _apply(fn, pts, state, rate) -> np.ndarray:
    out = np.full(len(pts), np.nan)
    for i in range(len(pts)):
        if not (math.isnan(state[i]) or math.isnan(rate[i])):
            out[i] = fn(pts[i], state[i], rate[i])
    return out


def _delta_quotient(arr: np.ndarray, mu: np.ndarray, policy: str) -> np.ndarray:
    out = np.full(len(arr), 0.0 if policy == CLAMPED else np.nan)
    out[:-1] = (arr[1:] - arr[:-1]) / mu[:-1]
    return out


def _nabla_quotient(arr: np.ndarray, nu: np.ndarray, policy: str) -> np.ndarray:
    out = np.full(len(arr), 0.0 if policy == CLAMPED else np.nan)
    out[1:] = (arr[1:] - arr[:-1]) / nu[1:]
    return out


def theorem_main_residual(
    problem: CompositeProblem,
    y: GridFunction,
    form: str = "delta",
    policy: str = STRICT,
) -> GridFunction:
    """Stationarity residual of the composite functional at state ``y``.

    ``form`` selects which of the two equivalent formulations is
    assembled: ``"delta"`` places the delta-kind terms unshifted and
    differences the nabla-kind aggregate forward, ``"nabla"`` does the
    mirror image.  The residual lives on the interior of the scale.
    """
    _check_policy(policy)
    if form not in ("delta", "nabla"):
        raise ValueError(f"form must be 'delta' or 'nabla', got {form!r}")
    vals = _admissible_values(problem, y)
    scale = problem.scale
    pts = scale.points
    n = len(scale)
    mu = scale.mu_values()
    nu = scale.nu_values()
    comps = eval_component_integrals(problem, y)
    weights_delta = [p(comps) for p in
                     (problem.outer.partials[: len(problem.delta_integrands)])]
    weights_nabla = [p(comps) for p in
                     (problem.outer.partials[len(problem.delta_integrands):])]

    sig_state, rho_state, d_rate, n_rate = _rate_tables(scale, vals, policy)

    # weighted Euler-Lagrange cores of each kind
    delta_core = np.zeros(n)
    for w, f in zip(weights_delta, problem.delta_integrands):
        ptl_y = _apply(f.partial_y, pts, sig_state, d_rate)
        ptl_v = _apply(f.partial_v, pts, sig_state, d_rate)
        delta_core = delta_core + w * (ptl_y - _delta_quotient(ptl_v, mu, policy))
    nabla_core = np.zeros(n)
    nabla_state_partial = np.zeros(n)   # nabla partial_y tables, sigma-shifted later
    nabla_rate_partial = np.zeros(n)
    for w, g in zip(weights_nabla, problem.nabla_integrands):
        ptl_y = _apply(g.partial_y, pts, rho_state, n_rate)
        ptl_v = _apply(g.partial_v, pts, rho_state, n_rate)
        nabla_core = nabla_core + w * (ptl_y - _nabla_quotient(ptl_v, nu, policy))
        nabla_state_partial = nabla_state_partial + w * ptl_y
        nabla_rate_partial = nabla_rate_partial + w * ptl_v

    sig_idx = np.minimum(np.arange(n) + 1, n - 1)
    rho_idx = np.maximum(np.arange(n) - 1, 0)

    if form == "delta":
        # unshifted delta core, sigma-shifted nabla state term with a
        # forward-differenced nabla aggregate
        middle = nabla_state_partial[sig_idx] - _delta_quotient(nabla_rate_partial, mu, policy)
        tail = _delta_quotient((nu * nabla_core)[sig_idx], mu, policy)
        res = delta_core + middle + tail
    else:
        delta_state_partial = np.zeros(n)
        delta_rate_partial = np.zeros(n)
        for w, f in zip(weights_delta, problem.delta_integrands):
            delta_state_partial = delta_state_partial + w * _apply(
                f.partial_y, pts, sig_state, d_rate
            )
            delta_rate_partial = delta_rate_partial + w * _apply(
                f.partial_v, pts, sig_state, d_rate
            )
        middle = delta_state_partial[rho_idx] - _nabla_quotient(delta_rate_partial, nu, policy)
        tail = _nabla_quotient((mu * delta_core)[rho_idx], nu, policy)
        res = middle + nabla_core - tail

    out = np.full(n, np.nan)
    interior = scale.interior_domain
    out[interior.start : interior.stop] = res[interior.start : interior.stop]
    return GridFunction(scale, out, interior)


def corollary_z_residual(
    problem: CompositeProblem,
    y: GridFunction,
    which: str = "first",
    policy: str = STRICT,
) -> GridFunction:
    """Residual of the one-delta/one-nabla specialization on an integer scale.

    Written directly with unit index shifts; serves as an independent
    cross-check of :func:`theorem_main_residual` on contiguous integer
    scales.
    """
    _check_policy(policy)
    if which not in ("first", "second"):
        raise ValueError(f"which must be 'first' or 'second', got {which!r}")
    if len(problem.delta_integrands) != 1 or len(problem.nabla_integrands) != 1:
        raise ValueError("specialized residual needs exactly one integrand of each kind")
    if not problem.scale.is_integer_grid:
        raise ValueError("specialized residual needs a contiguous integer scale")
    vals = _admissible_values(problem, y)
    scale = problem.scale
    pts = scale.points
    n = len(scale)
    f = problem.delta_integrands[0]
    g = problem.nabla_integrands[0]
    comps = eval_component_integrals(problem, y)
    wf = problem.outer.partials[0](comps)
    wg = problem.outer.partials[1](comps)

    clamped = policy == CLAMPED

    def fwd(i):
        return min(i + 1, n - 1)

    def bwd(i):
        return max(i - 1, 0)

    def dy(i):
        if i == n - 1:
            return 0.0 if clamped else math.nan
        return vals[i + 1] - vals[i]

    def ny(i):
        if i == 0:
            return 0.0 if clamped else math.nan
        return vals[i] - vals[i - 1]

    def f_y(i):
        v = dy(i)
        return math.nan if math.isnan(v) else f.partial_y(pts[i], vals[fwd(i)], v)

    def f_v(i):
        v = dy(i)
        return math.nan if math.isnan(v) else f.partial_v(pts[i], vals[fwd(i)], v)

    def g_y(i):
        v = ny(i)
        return math.nan if math.isnan(v) else g.partial_y(pts[i], vals[bwd(i)], v)

    def g_v(i):
        v = ny(i)
        return math.nan if math.isnan(v) else g.partial_v(pts[i], vals[bwd(i)], v)

    def gamma_f(i):
        # delta core of f at i: f_y(i) - (f_v(i+1) - f_v(i)); forward
        # difference collapses to zero at the clamped top
        if i == n - 1:
            step = 0.0 if clamped else math.nan
        else:
            step = f_v(i + 1) - f_v(i)
        return f_y(i) - step

    def gamma_g(i):
        if i == 0:
            step = 0.0 if clamped else math.nan
        else:
            step = g_v(i) - g_v(i - 1)
        return g_y(i) - step

    out = np.full(n, np.nan)
    for i in scale.interior_domain:
        if which == "first":
            term_delta = wf * gamma_f(i)
            term_mid = wg * (g_y(i + 1) - (g_v(i + 1) - g_v(i)))
            term_tail = wg * (gamma_g(fwd(fwd(i))) - gamma_g(fwd(i)))
            out[i] = term_delta + term_mid + term_tail
        else:
            term_mid = wf * (f_y(i - 1) - (f_v(i) - f_v(i - 1)))
            term_tail = wf * (gamma_f(bwd(i)) - gamma_f(bwd(bwd(i))))
            term_nabla = wg * gamma_g(i)
            out[i] = term_mid + term_nabla - term_tail
    return GridFunction(scale, out, scale.interior_domain)


# ---------------------------------------------------------------------------
# finite-difference validation of analytic partials


def check_integrand_partials(
    integrand: Integrand,
    samples: Sequence,
    rel_tol: float = 1e-6,
) -> float:
    """Largest relative error of the analytic partials against central
    differences over the sample triples; raises if it exceeds ``rel_tol``."""
    worst = 0.0
    for (t, yv, vv) in samples:
        for which, fn in (("partial_y", integrand.partial_y), ("partial_v", integrand.partial_v)):
            pos = 1 if which == "partial_y" else 2
            arg = (t, yv, vv)
            h = 1e-6 * max(1.0, abs(arg[pos]))
            hi = list(arg)
            lo = list(arg)
            hi[pos] += h
            lo[pos] -= h
            approx = (integrand.value(*hi) - integrand.value(*lo)) / (2 * h)
            exact = fn(t, yv, vv)
            err = abs(approx - exact) / max(1.0, abs(exact))
            worst = max(worst, err)
            if err > rel_tol:
                raise AssertionError(
                    f"{which} disagrees with central difference at {arg}: "
                    f"analytic {exact}, difference {approx}"
                )
    return worst
