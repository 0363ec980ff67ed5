"""Dense Levenberg-Marquardt for the small calibration refinements.

The problems here have <= 12 parameters and a few hundred residuals, so the
normal equations are formed directly. Damping follows the classic schedule:
multiply by 10 on a rejected step, by 0.3 on an accepted one. Accepted-step
costs are recorded so callers can verify the refinement never went uphill.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

ResidualFn = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]

_DAMPING_CEILING = 1e15


@dataclass(frozen=True)
class LmSettings:
    max_iterations: int = 200
    initial_damping: float = 1e-3
    damping_increase: float = 10.0
    damping_decrease: float = 0.3
    gradient_tolerance: float = 1e-10
    step_tolerance: float = 1e-12

    def __post_init__(self):
        for name in (
            "max_iterations",
            "initial_damping",
            "damping_increase",
            "damping_decrease",
            "gradient_tolerance",
            "step_tolerance",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class LmResult:
    x: np.ndarray
    cost: float
    iterations: int
    converged: bool
    status: str
    cost_history: list[float] = field(default_factory=list)


def minimize_least_squares(fun: ResidualFn, x0: np.ndarray, settings: LmSettings) -> LmResult:
    """Minimize ``sum(r(x)**2)`` where ``fun(x)`` returns ``(r, J)``.

    ``cost_history`` starts with the cost at ``x0`` and appends the cost of
    every accepted step; it is non-increasing by construction. A run that
    exhausts ``max_iterations`` returns the best point found with
    ``converged=False`` rather than raising.
    """
    x = np.asarray(x0, dtype=float).copy()
    residual, jacobian = fun(x)
    cost = float(residual @ residual)
    history = [cost]
    damping = settings.initial_damping
    identity = np.eye(len(x))

    iterations = 0
    converged = False
    status = "max iterations reached"
    for _ in range(settings.max_iterations):
        gradient = jacobian.T @ residual
        if np.max(np.abs(gradient)) < settings.gradient_tolerance:
            converged, status = True, "gradient below tolerance"
            break
        hessian = jacobian.T @ jacobian

        accepted = False
        while damping <= _DAMPING_CEILING:
            try:
                step = np.linalg.solve(hessian + damping * identity, -gradient)
            except np.linalg.LinAlgError:
                damping *= settings.damping_increase
                continue
            candidate = x + step
            residual_new, jacobian_new = fun(candidate)
            cost_new = float(residual_new @ residual_new)
            if cost_new <= cost:
                accepted = True
                break
            damping *= settings.damping_increase
        if not accepted:
            converged, status = False, "damping exhausted without improvement"
            break

        assert cost_new <= history[-1]
        x, residual, jacobian, cost = candidate, residual_new, jacobian_new, cost_new
        history.append(cost)
        iterations += 1
        damping = max(damping * settings.damping_decrease, 1e-15)

        if np.linalg.norm(step) < settings.step_tolerance * (np.linalg.norm(x) + settings.step_tolerance):
            converged, status = True, "step below tolerance"
            break

    return LmResult(
        x=x,
        cost=cost,
        iterations=iterations,
        converged=converged,
        status=status,
        cost_history=history,
    )
