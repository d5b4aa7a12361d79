"""Ellipsoid-membership solvers.

The search region is ``E_rho = {Ax : ||x|| <= rho}``.  Each iteration holds a
point ``b' = Ax'`` inside it and asks whether ``b`` can be approached: the
direction ``c = A^T(b - b')`` yields the extreme point
``v = rho * A c / ||c||`` of ``E_rho``, and the inequality
``rho ||c|| >= (b - b')^T b`` decides whether moving toward ``v`` makes
progress (a *pivot*) or whether ``b'`` certifies ``b`` outside the ellipsoid
(a *witness*, carrying the lower bound ``(b - b')^T b / ||c||`` on the
minimum-norm solution).  Three drivers build on this: a fixed-radius
membership test, an adaptive-radius solver that grows ``rho`` past
``||x*||``, and a bisection on ``rho`` that certifies an approximate
minimum-norm solution.
"""

from __future__ import annotations

import math
import time

import numpy as np

from .linalg import frobenius_norm, matvec, matvec_transpose, norm2, shape_of
from .results import (
    APPROX_SOLUTION,
    ITERATION_CAP,
    MIN_NORM_SOLUTION,
    NORMAL_EQ_SOLUTION,
    NUMERICAL_FAILURE,
    TRIANGLE_TRACE_COLUMNS,
    SolveResult,
    Trace,
    WITNESS,
)

# Re-validate b' = A x' this often; convex-combination updates drift slowly.
_REVALIDATE_EVERY = 512

# The min-norm bisection runs its membership tests at a residual tolerance
# tighter than the bracket target: any point with ||Ax - b|| <= delta can
# undershoot ||x*|| by about ||pinv(A)|| * delta, and this keeps that slack
# small against the bracket width.
_INNER_EPS_FACTOR = 0.25


def pivot_direction(a, b, b_prime) -> np.ndarray:
    """``c = A^T (b - b')``, the ascent direction that defines the pivot."""
    return matvec_transpose(a, np.asarray(b) - np.asarray(b_prime))


def pivot_point(a, c, rho):
    """Maximizer of ``c^T x`` over ``E_rho`` plus its preimage:
    ``v = rho A c / ||c||`` attained at ``x = rho c / ||c||``."""
    c_norm = norm2(c)
    if c_norm == 0.0:
        raise ValueError("pivot direction is zero; caller must branch to the witness case")
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    preimage = (rho / c_norm) * np.asarray(c, dtype=np.float64)
    return matvec(a, preimage), preimage


def is_strict_pivot(rho, c, b, b_prime) -> bool:
    """``rho ||c|| >= (b - b')^T b`` characterizes existence of a strict pivot."""
    gap = np.asarray(b) - np.asarray(b_prime)
    return rho * norm2(c) >= float(np.dot(gap, b))


def move_to_pivot(b_prime, x_prime, v, preimage, b):
    """Advance to the point of segment ``[b', v]`` nearest to ``b``.

    Returns ``(b'', x'', alpha)`` with the step ``alpha`` clamped to [0, 1]
    so the new iterate stays a convex combination inside the ellipsoid.
    """
    d = np.asarray(v) - np.asarray(b_prime)
    denom = float(np.dot(d, d))
    if denom == 0.0:
        raise ValueError("degenerate pivot: v coincides with the iterate")
    alpha = float(np.dot(np.asarray(b) - b_prime, d)) / denom
    alpha = min(1.0, max(0.0, alpha))
    return b_prime + alpha * d, (1.0 - alpha) * x_prime + alpha * preimage, alpha


def _result(status, a, b, x, iterations, trace, **extra) -> SolveResult:
    final = np.asarray(b) - matvec(a, x)
    return SolveResult(
        status, x, norm2(final), norm2(matvec_transpose(a, final)),
        iterations, trace, **extra,
    )


def solve_in_ball(a, b, rho, eps, eps_prime=None, max_iters=100_000,
                  x0=None) -> SolveResult:
    """Membership test at fixed radius: an approximate solution with
    ``||x|| <= rho``, an approximate normal-equation solution, or a witness
    that ``b`` lies outside ``E_rho``.  Tolerances are absolute.  A warm
    start ``x0`` is used only when it already lies inside the ball."""
    m, n = shape_of(a)
    b = np.asarray(b, dtype=np.float64)
    if norm2(b) == 0.0:
        raise ValueError("b must be nonzero")
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    if eps_prime is None:
        eps_prime = eps
    trace = Trace(TRIANGLE_TRACE_COLUMNS)
    state = _BallState(a, b, rho, x0)
    t0 = time.perf_counter_ns()
    status, iterations = _membership_loop(state, eps, eps_prime, max_iters, trace, t0)
    extra = {"rho": rho, "b_prime": state.b_prime}
    if status == WITNESS:
        extra["lower_bound"] = state.witness_bound
    return _result(status, a, b, state.x, iterations, trace, **extra)


class _BallState:
    """Iterate pair ``(x', b' = A x')`` inside a fixed-radius ellipsoid."""

    def __init__(self, a, b, rho, x0=None):
        m, n = shape_of(a)
        self.a, self.b, self.rho = a, b, rho
        if x0 is not None and norm2(x0) <= rho * (1.0 + 1e-9):
            self.x = np.asarray(x0, dtype=np.float64).copy()
            self.b_prime = matvec(a, self.x)
        else:
            self.x = np.zeros(n)
            self.b_prime = np.zeros(m)
        self.witness_bound = None
        self.steps_since_revalidate = 0

    def revalidate(self):
        self.b_prime = matvec(self.a, self.x)
        self.steps_since_revalidate = 0


def _membership_loop(state: _BallState, eps, eps_prime, max_iters, trace, t0,
                     iteration_offset=0):
    """Shared fixed-radius iteration; returns ``(status, iterations_done)``."""
    a, b, rho = state.a, state.b, state.rho
    iterations = 0
    while iterations < max_iters:
        gap = b - state.b_prime
        gap_norm = norm2(gap)
        if not math.isfinite(gap_norm):
            return NUMERICAL_FAILURE, iterations
        if gap_norm <= eps:
            return APPROX_SOLUTION, iterations
        c = matvec_transpose(a, gap)
        c_norm = norm2(c)
        if c_norm <= eps_prime:
            return NORMAL_EQ_SOLUTION, iterations
        gap_dot_b = float(np.dot(gap, b))
        wall = time.perf_counter_ns() - t0
        if rho * c_norm >= gap_dot_b:
            preimage = (rho / c_norm) * c
            v = matvec(a, preimage)
            state.b_prime, state.x, _ = move_to_pivot(state.b_prime, state.x, v, preimage, b)
            trace.append(iteration_offset + iterations, rho, gap_norm, c_norm, "pivot", wall)
            state.steps_since_revalidate += 1
            if state.steps_since_revalidate >= _REVALIDATE_EVERY:
                state.revalidate()
        else:
            state.witness_bound = gap_dot_b / c_norm
            trace.append(iteration_offset + iterations, rho, gap_norm, c_norm, "witness", wall)
            return WITNESS, iterations + 1
        iterations += 1
    return ITERATION_CAP, iterations


def solve_adaptive(a, b, eps, eps_prime=None, rho_cap=None, max_iters=100_000,
                   x0=None, restart_halvings: int = 0) -> SolveResult:
    """Solve ``Ax = b`` or its normal equation by growing the search radius.

    Starts from ``rho = 0`` (or the norm of the warm start ``x0``); whenever
    the strict-pivot test fails, the radius jumps to
    ``max(2 rho, (b - b')^T b / ||c||)``, which eventually clears the norm of
    the minimum-norm solution.  ``c = 0`` certifies an exact normal-equation
    solution immediately.  Tolerances are absolute.

    ``restart_halvings`` > 0 enables the restart heuristic: when the run
    ends through the normal-equation clause while the residual target is
    still open, ``eps_prime`` is halved and the solve resumes from the
    current iterate, at most that many times.
    """
    m, n = shape_of(a)
    b = np.asarray(b, dtype=np.float64)
    if norm2(b) == 0.0:
        return SolveResult(APPROX_SOLUTION, np.zeros(n), 0.0, 0.0, 0,
                           Trace(TRIANGLE_TRACE_COLUMNS), rho=0.0)
    if eps_prime is None:
        eps_prime = eps
    if rho_cap is None:
        rho_cap = 4.0 * norm2(b) ** 2 / eps_prime
    trace = Trace(TRIANGLE_TRACE_COLUMNS)
    t0 = time.perf_counter_ns()

    if x0 is not None:
        x = np.asarray(x0, dtype=np.float64).copy()
        b_prime = matvec(a, x)
        rho = norm2(x)
    else:
        x = np.zeros(n)
        b_prime = np.zeros(m)
        rho = 0.0
    status = ITERATION_CAP
    detail = ""
    iterations = 0
    steps_since_revalidate = 0
    halvings_left = max(0, restart_halvings)
    while iterations < max_iters:
        gap = b - b_prime
        gap_norm = norm2(gap)
        if not math.isfinite(gap_norm):
            status, detail = NUMERICAL_FAILURE, "non-finite iterate"
            break
        if gap_norm <= eps:
            status = APPROX_SOLUTION
            break
        c = matvec_transpose(a, gap)
        c_norm = norm2(c)
        if c_norm <= eps_prime:
            if c_norm > 0.0 and halvings_left > 0:
                # restart heuristic: tighten the normal-equation clause and
                # keep going from the current iterate
                halvings_left -= 1
                eps_prime *= 0.5
                continue
            status = NORMAL_EQ_SOLUTION
            detail = ("pivot direction vanished" if c_norm == 0.0
                      else f"certified ||A^T(b - Ax)|| <= {eps_prime:.3e}")
            break
        gap_dot_b = float(np.dot(gap, b))
        wall = time.perf_counter_ns() - t0
        if rho > 0.0 and rho * c_norm >= gap_dot_b:
            preimage = (rho / c_norm) * c
            v = matvec(a, preimage)
            b_prime, x, _ = move_to_pivot(b_prime, x, v, preimage, b)
            trace.append(iterations, rho, gap_norm, c_norm, "pivot", wall)
            steps_since_revalidate += 1
            if steps_since_revalidate >= _REVALIDATE_EVERY:
                b_prime = matvec(a, x)
                steps_since_revalidate = 0
        else:
            rho = max(2.0 * rho, gap_dot_b / c_norm)
            trace.append(iterations, rho, gap_norm, c_norm, "expand", wall)
            if rho > rho_cap:
                status, detail = ITERATION_CAP, f"radius exceeded cap {rho_cap:.3e}"
                iterations += 1
                break
        iterations += 1
    return _result(status, a, b, x, iterations, trace, rho=rho, detail=detail)


def min_norm_solve(a, b, eps, x_eps, inner_cap=250_000, max_iters=4_000_000) -> SolveResult:
    """Refine an approximate solution ``x_eps`` into an approximate
    minimum-norm solution by bisecting on the ellipsoid radius.

    Maintains a bracket ``rho_lo <= ||x*|| <= rho_hi``: a successful
    fixed-radius test tightens ``rho_hi``, a witness raises ``rho_lo``
    through its certified lower bound.  Stops once
    ``rho_hi - rho_lo <= eps``; the returned result carries the bracket in
    ``rho_interval``.  Each test warm-starts from the most recent iterate
    that still fits inside the new ball.  A vanishing pivot direction ends
    the search with an exact normal-equation solution instead.
    """
    m, n = shape_of(a)
    b = np.asarray(b, dtype=np.float64)
    if norm2(b) == 0.0:
        raise ValueError("b must be nonzero")
    x_eps = np.asarray(x_eps, dtype=np.float64)
    start_gap = norm2(b - matvec(a, x_eps))
    if start_gap > eps * (1.0 + 1e-9):
        raise ValueError(
            f"x_eps is not an eps-approximate solution: ||Ax-b|| = {start_gap:.3e} > {eps:.3e}"
        )
    # Floating-point floor standing in for an exact "||c|| > 0" guard.
    zero_floor = 1e-14 * frobenius_norm(a) * norm2(b)

    rho_hi = norm2(x_eps)
    rho_lo = 0.0
    best_x = x_eps.copy()
    warm = None
    trace = Trace(TRIANGLE_TRACE_COLUMNS)
    t0 = time.perf_counter_ns()
    iterations = 0
    status = MIN_NORM_SOLUTION
    detail = ""

    outer_budget = max(8, int(math.ceil(math.log2(max(rho_hi / eps, 2.0)))) + 8)
    for _ in range(outer_budget):
        if rho_hi - rho_lo <= eps or iterations >= max_iters:
            break
        rho = 0.5 * (rho_hi + rho_lo)
        if rho <= 0.0:
            break
        state = _BallState(a, b, rho, warm)
        inner_status, inner_iters = _membership_loop(
            state, _INNER_EPS_FACTOR * eps, zero_floor,
            min(inner_cap, max_iters - iterations),
            trace, t0, iteration_offset=iterations,
        )
        iterations += inner_iters
        wall = time.perf_counter_ns() - t0
        if inner_status == APPROX_SOLUTION:
            best_x = state.x
            rho_hi = min(rho, norm2(state.x))
            warm = state.x
            trace.append(iterations, rho_hi, norm2(b - state.b_prime), 0.0, "shrink", wall)
        elif inner_status == WITNESS:
            # Clamping to rho_hi keeps the bracket ordered; a smaller lower
            # bound is weaker but stays certified (no exact solution lies
            # strictly inside any radius below the witness bound).
            rho_lo = min(max(rho_lo, state.witness_bound), rho_hi)
            warm = state.x
            trace.append(iterations, rho_lo, norm2(b - state.b_prime), 0.0, "expand", wall)
        elif inner_status == NORMAL_EQ_SOLUTION:
            # the STOP branch: c = 0 within the floating floor
            return _result(NORMAL_EQ_SOLUTION, a, b, state.x, iterations, trace,
                           rho=rho, rho_interval=(rho_lo, rho_hi),
                           detail="pivot direction vanished during bisection")
        else:
            status = inner_status
            detail = ("inner membership test exhausted its budget"
                      if inner_status == ITERATION_CAP else "non-finite iterate")
            break

    if status == MIN_NORM_SOLUTION and rho_hi - rho_lo > eps:
        status, detail = ITERATION_CAP, "bisection budget exhausted"
    return _result(status, a, b, best_x, iterations, trace,
                   rho=rho_hi, rho_interval=(rho_lo, rho_hi), detail=detail)
