"""Linearized backward-Euler driver for the coupled system.

Each step lags the pressure/velocity pair one level behind the transported
concentration: the state after n steps carries the pressure at level n-1
(the one the n-th transport solve used) and the concentration at level n.
``run`` finishes with one extra pressure solve so the final state also has
the end-time pressure and velocity.

Memory stays O(1) in the number of steps; anything that must be recorded
along the way goes through observer callables or the returned per-step
norm history.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .elements import interpolate
from .forms import (Discretization, ProblemCoefficients, VelocityField,
                    assemble_concentration, assemble_pressure,
                    compute_velocity)
from .solvers import SolveReport, cg_deflated, gmres


class StepFailure(RuntimeError):
    """A linear solve inside one time step did not converge."""

    def __init__(self, step_index, what, report):
        super().__init__(
            f"{what} solve failed at step {step_index}: "
            f"residual {report.relative_residual:.3e} after "
            f"{report.iterations} iterations")
        self.step_index = step_index
        self.report = report


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [0, final_time] with num_steps steps."""

    final_time: float
    num_steps: int

    def __post_init__(self):
        if self.final_time <= 0:
            raise ValueError("final_time must be positive")
        if int(self.num_steps) != self.num_steps or self.num_steps < 1:
            raise ValueError("num_steps must be a positive integer")

    @property
    def tau(self) -> float:
        return self.final_time / self.num_steps

    def time(self, n: int) -> float:
        return n * self.final_time / self.num_steps


@dataclass(frozen=True)
class SolverOptions:
    pressure_tol: float = 1e-11
    concentration_tol: float = 1e-10
    pressure_jacobi: bool = True
    gmres_restart: int = 30
    max_iter: Optional[int] = None


@dataclass(frozen=True)
class TimeStepState:
    """Solution data after ``step_index`` transport steps.

    ``pressure``/``velocity`` live at level ``pressure_level`` (normally
    step_index - 1, the lag the scheme prescribes; equal to step_index
    only for the initial state and after ``finalize_pressure``)."""

    step_index: int
    pressure_level: int
    pressure: np.ndarray
    velocity: VelocityField
    concentration: np.ndarray
    pressure_report: SolveReport
    concentration_report: Optional[SolveReport]


@dataclass(frozen=True)
class StepRecord:
    step_index: int
    time: float
    concentration_l2: float
    pressure_iterations: int
    concentration_iterations: int


def _solve_pressure(disc, coeffs, c_prev, t, options, x0=None):
    system = assemble_pressure(disc, coeffs, c_prev, t)
    p, report = cg_deflated(system.matrix, system.rhs,
                            deflate=system.mass_vector,
                            rel_tol=options.pressure_tol,
                            max_iter=options.max_iter,
                            x0=x0, jacobi=options.pressure_jacobi)
    return p, report


def initialize(disc: Discretization, coeffs: ProblemCoefficients,
               grid: TimeGrid,
               options: SolverOptions = SolverOptions()) -> TimeStepState:
    """Interpolate the initial concentration and solve the initial pressure."""
    c0 = interpolate(disc.p1, coeffs.initial_concentration)
    p0, report = _solve_pressure(disc, coeffs, c0, 0.0, options)
    if not report.converged:
        raise StepFailure(0, "pressure", report)
    velocity = compute_velocity(disc, coeffs, c0, p0)
    return TimeStepState(step_index=0, pressure_level=0,
                         pressure=p0, velocity=velocity, concentration=c0,
                         pressure_report=report, concentration_report=None)


def step(disc: Discretization, coeffs: ProblemCoefficients, grid: TimeGrid,
         state: TimeStepState, mode: str = "skew",
         options: SolverOptions = SolverOptions()) -> TimeStepState:
    """Advance one level: lagged pressure, then the transport solve."""
    n = state.step_index + 1
    if n > grid.num_steps:
        raise ValueError(f"time grid has only {grid.num_steps} steps")

    if state.pressure_level == state.step_index:
        # pressure at the lagged level is already in the state
        p, velocity, p_report = (state.pressure, state.velocity,
                                 state.pressure_report)
    else:
        p, p_report = _solve_pressure(disc, coeffs, state.concentration,
                                      grid.time(state.step_index), options,
                                      x0=state.pressure)
        if not p_report.converged:
            raise StepFailure(n, "pressure", p_report)
        velocity = compute_velocity(disc, coeffs, state.concentration, p)

    system = assemble_concentration(disc, coeffs, state.concentration,
                                    velocity, grid.tau, grid.time(n), mode)
    c, c_report = gmres(system.matrix, system.rhs,
                        rel_tol=options.concentration_tol,
                        restart=options.gmres_restart,
                        max_iter=options.max_iter,
                        x0=state.concentration)
    if not c_report.converged:
        raise StepFailure(n, "concentration", c_report)

    return TimeStepState(step_index=n, pressure_level=n - 1,
                         pressure=p, velocity=velocity, concentration=c,
                         pressure_report=p_report, concentration_report=c_report)


def finalize_pressure(disc: Discretization, coeffs: ProblemCoefficients,
                      grid: TimeGrid, state: TimeStepState,
                      options: SolverOptions = SolverOptions()) -> TimeStepState:
    """Extra pressure solve so pressure and concentration share a level."""
    if state.pressure_level == state.step_index:
        return state
    p, report = _solve_pressure(disc, coeffs, state.concentration,
                                grid.time(state.step_index), options,
                                x0=state.pressure)
    if not report.converged:
        raise StepFailure(state.step_index, "pressure", report)
    velocity = compute_velocity(disc, coeffs, state.concentration, p)
    return replace(state, pressure_level=state.step_index, pressure=p,
                   velocity=velocity, pressure_report=report)


def run(disc: Discretization, coeffs: ProblemCoefficients, grid: TimeGrid,
        mode: str = "skew", options: SolverOptions = SolverOptions(),
        observers=()) -> tuple[TimeStepState, list[StepRecord]]:
    """March all steps; returns the finalized state and per-step records.

    Observers are called with each new state (including the initial one)
    so callers can stream fields to disk without the driver keeping them.
    """
    mass = disc.mass_p1

    def l2(c):
        return float(np.sqrt(max(c @ (mass @ c), 0.0)))

    state = initialize(disc, coeffs, grid, options)
    history = [StepRecord(0, 0.0, l2(state.concentration),
                          state.pressure_report.iterations, 0)]
    for obs in observers:
        obs(state)
    for n in range(1, grid.num_steps + 1):
        state = step(disc, coeffs, grid, state, mode, options)
        history.append(StepRecord(n, grid.time(n), l2(state.concentration),
                                  state.pressure_report.iterations,
                                  state.concentration_report.iterations))
        for obs in observers:
            obs(state)
    state = finalize_pressure(disc, coeffs, grid, state, options)
    return state, history
