"""Damped Newton iteration for square residual systems.

The Jacobian is always approximated by central differences; damping
halves the step until the residual sup-norm decreases.  Residual
evaluations may signal infeasibility by raising
:class:`~tsvar.timescale.DomainError`, which rejects the trial step the
same way a norm increase does.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .timescale import DomainError

__all__ = [
    "ResidualSystem",
    "SolveReport",
    "SolverConfig",
    "fd_jacobian",
    "multistart_solve",
    "newton_solve",
    "default_start_grid",
]

log = logging.getLogger(__name__)

#: multistart grid spanned per coordinate unless configured otherwise
DEFAULT_GRID = (0.5, 8.0, 0.5)


@dataclass(frozen=True)
class SolverConfig:
    tol_residual: float = 1e-12   # sup-norm of the residual at acceptance
    tol_step: float = 1e-14       # sup-norm of the Newton step at stagnation
    max_iterations: int = 100
    fd_step: float = 1e-7         # scaled by max(1, |x_j|) per coordinate
    max_halvings: int = 30

    def __post_init__(self):
        if self.tol_residual <= 0 or self.tol_step <= 0 or self.fd_step <= 0:
            raise ValueError("tolerances and the difference step must be positive")
        if self.max_iterations < 1 or self.max_halvings < 0:
            raise ValueError("iteration limits out of range")


@dataclass(frozen=True)
class ResidualSystem:
    """A square nonlinear system with an optional objective attached."""

    dimension: int
    residual: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    functional: Callable[[np.ndarray], float] | None = None


@dataclass(frozen=True)
class SolveReport:
    root: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    functional_value: float | None = None
    message: str = ""
    residual_norms: tuple = ()
    iterates: tuple = ()


def _norm(r: np.ndarray) -> float:
    return float(np.max(np.abs(r)))


def fd_jacobian(system: ResidualSystem, x: np.ndarray, step: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian, column by column."""
    x = np.asarray(x, dtype=float)
    m = system.dimension
    jac = np.empty((m, m))
    for j in range(m):
        h = step * max(1.0, abs(x[j]))
        hi = x.copy()
        lo = x.copy()
        hi[j] += h
        lo[j] -= h
        try:
            jac[:, j] = (system.residual(hi) - system.residual(lo)) / (2.0 * h)
        except DomainError as exc:
            raise DomainError(
                f"residual evaluation failed while perturbing coordinate {j}: {exc}"
            ) from exc
    return jac


def newton_solve(
    system: ResidualSystem,
    guess: Sequence[float],
    config: SolverConfig | None = None,
) -> SolveReport:
    cfg = config or SolverConfig()
    x = np.array(guess, dtype=float)
    if x.shape != (system.dimension,):
        raise ValueError(f"guess has shape {x.shape}, system dimension is {system.dimension}")

    def report(converged: bool, norm: float, iters: int, msg: str,
               norms: list, path: list) -> SolveReport:
        fval = None
        if converged and system.functional is not None:
            fval = float(system.functional(x))
        return SolveReport(
            root=x.copy(), residual_norm=norm, iterations=iters, converged=converged,
            functional_value=fval, message=msg,
            residual_norms=tuple(norms), iterates=tuple(np.copy(p) for p in path),
        )

    try:
        res = np.asarray(system.residual(x), dtype=float)
    except DomainError as exc:
        return SolveReport(x, np.inf, 0, False, message=f"infeasible start: {exc}")
    if res.shape != (system.dimension,):
        raise ValueError("residual shape does not match the system dimension")
    norm = _norm(res)
    norms = [norm]
    path = [x.copy()]

    for it in range(1, cfg.max_iterations + 1):
        if norm <= cfg.tol_residual:
            return report(True, norm, it - 1, "residual tolerance reached", norms, path)
        try:
            jac = fd_jacobian(system, x, cfg.fd_step)
        except DomainError as exc:
            return report(False, norm, it - 1, f"jacobian failed: {exc}", norms, path)
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            return report(False, norm, it - 1, "singular jacobian", norms, path)
        if not np.all(np.isfinite(step)):
            return report(False, norm, it - 1, "non-finite newton step", norms, path)

        scale = 1.0
        accepted = False
        for _ in range(cfg.max_halvings + 1):
            trial = x + scale * step
            try:
                trial_res = np.asarray(system.residual(trial), dtype=float)
            except DomainError:
                scale *= 0.5
                continue
            trial_norm = _norm(trial_res)
            if trial_norm < norm:
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            return report(False, norm, it - 1,
                          "damping found no residual decrease", norms, path)
        step_size = _norm(scale * step)
        x, res, norm = trial, trial_res, trial_norm
        norms.append(norm)
        path.append(x.copy())
        if step_size <= cfg.tol_step:
            return report(norm <= cfg.tol_residual, norm, it,
                          "step below stagnation tolerance", norms, path)

    return report(norm <= cfg.tol_residual, norm, cfg.max_iterations,
                  "iteration limit reached", norms, path)


def default_start_grid(dimension: int, spec: tuple = DEFAULT_GRID) -> list:
    """Cartesian product of an inclusive coordinate grid lo:hi:step."""
    lo, hi, step = spec
    if step <= 0 or hi < lo:
        raise ValueError(f"bad start grid {spec}")
    count = int(round((hi - lo) / step)) + 1
    axis = [lo + i * step for i in range(count) if lo + i * step <= hi + 1e-12]
    return list(itertools.product(axis, repeat=dimension))


def multistart_solve(
    system: ResidualSystem,
    guesses: Iterable[Sequence[float]],
    config: SolverConfig | None = None,
    distinct_tol: float = 1e-6,
) -> list:
    """Newton from every guess; distinct converged roots, best first.

    Roots closer than ``distinct_tol`` in sup-norm are merged (the copy
    with the smaller residual survives).  When the system carries a
    functional the survivors are ordered by its value, otherwise
    lexicographically.  Failed starts are dropped.
    """
    converged = []
    failed = 0
    total = 0
    for guess in guesses:
        total += 1
        rep = newton_solve(system, guess, config)
        if rep.converged:
            converged.append(rep)
        else:
            failed += 1
    if failed:
        log.debug("%s: %d of %d starts failed to converge",
                  system.label or "system", failed, total)

    converged.sort(key=lambda r: tuple(r.root))
    distinct = []
    for rep in converged:
        for i, kept in enumerate(distinct):
            if _norm(rep.root - kept.root) <= distinct_tol:
                if rep.residual_norm < kept.residual_norm:
                    distinct[i] = rep
                break
        else:
            distinct.append(rep)

    if system.functional is not None:
        distinct.sort(key=lambda r: (r.functional_value, tuple(r.root)))
    else:
        distinct.sort(key=lambda r: tuple(r.root))
    return distinct
