"""Transformed chemotaxis system with logistic growth.

    u_t + (u v)_x = u_xx + r u (1 - u),          u_x = 0 on the boundary
    v_t + u_x     = eps v_xx + eps (v^2)_x,       v = 0 on the boundary

discretized with central differences on a collocated grid and advanced by
explicit Euler with ``dt = dx**2 / 2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernel
from .grid import Grid1D, d1, d2, make_grid, reflect_even, reflect_odd

DEFAULT_N_FLOOR = 64
DEFAULT_OBSERVER_DT = 0.01


class InstabilityError(FloatingPointError):
    """Non-finite values appeared while stepping.

    ``state`` and ``samples`` hold the trajectory up to the last finite
    sample so callers can still inspect the partial run.
    """

    def __init__(self, t: float, state: "State | None" = None, samples=None,
                 context: str = ""):
        msg = f"numerical instability: non-finite values at t={t:.6g}"
        super().__init__(f"{msg} ({context})" if context else msg)
        self.t = t
        self.state = state
        self.samples = list(samples or [])


@dataclass(frozen=True)
class ModelParams:
    eps: float
    r: float

    def __post_init__(self):
        if not (0.0 <= self.eps < 1.0):
            raise ValueError(f"eps must lie in [0, 1), got {self.eps}")
        if not (self.r >= 0.0 and math.isfinite(self.r)):
            raise ValueError(f"r must be >= 0, got {self.r}")


@dataclass
class State:
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def copy(self) -> "State":
        return State(self.u.copy(), self.v.copy(), self.t)


@dataclass(frozen=True)
class StepControl:
    n: int
    dt: float
    t_end: float
    observer_stride: int = 1
    clamp_u: bool = False

    def __post_init__(self):
        if self.dt <= 0 or not math.isfinite(self.dt):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.observer_stride < 1:
            raise ValueError("observer_stride must be a positive integer")
        if self.dt > stable_dt(1.0 / self.n) * (1 + 1e-12):
            warnings.warn(
                f"dt={self.dt:g} exceeds the explicit stability bound "
                f"dx^2/2={stable_dt(1.0 / self.n):g}",
                RuntimeWarning,
                stacklevel=3,
            )

    @classmethod
    def default(cls, n: int, t_end: float, observer_dt: float = DEFAULT_OBSERVER_DT,
                dt: float | None = None, clamp_u: bool = False,
                dt_factor: float = 1.0) -> "StepControl":
        """Stability-limited control sampling every ``observer_dt``.

        ``dt_factor < 1`` shrinks the step below ``dx**2/2``.  At the bound
        itself the grid-scale (checkerboard) mode has amplification exactly
        -1; a damping reaction term near u = 1 tips it past -1, so long
        runs close to carrying capacity want a factor such as 0.9.
        """
        if dt is None:
            dt = dt_factor * stable_dt(1.0 / n)
        return cls(n=n, dt=dt, t_end=t_end,
                   observer_stride=default_stride(dt, observer_dt), clamp_u=clamp_u)


def default_mesh(eps: float, n_floor: int = DEFAULT_N_FLOOR) -> int:
    """Smallest ``n`` with ``1/n < sqrt(eps/10)``, never below ``n_floor``."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps == 0:
        return n_floor
    h = math.sqrt(eps / 10.0)
    n = max(1, math.floor(1.0 / h))
    while 1.0 / n >= h:
        n += 1
    return max(n, n_floor)


def stable_dt(dx: float) -> float:
    if dx <= 0:
        raise ValueError("dx must be positive")
    return dx * dx / 2.0


def default_stride(dt: float, observer_dt: float = DEFAULT_OBSERVER_DT) -> int:
    return max(1, math.ceil(observer_dt / dt - 1e-9))


def apply_bc(s: State) -> State:
    """Neumann ghosts for u, Dirichlet pin plus odd ghosts for v (in place)."""
    reflect_even(s.u)
    reflect_odd(s.v)
    return s


def _check_finite(*fields):
    for f in fields:
        if not np.all(np.isfinite(f)):
            return False
    return True


def rhs(s: State, p: ModelParams, g: Grid1D) -> tuple[np.ndarray, np.ndarray]:
    if not _check_finite(s.u, s.v):
        raise InstabilityError(s.t, s)
    u, v = s.u, s.v
    with np.errstate(over="ignore", invalid="ignore"):
        du = d2(u, g) - d1(u * v, g) + p.r * u * (1.0 - u)
        dv = p.eps * d2(v, g) - d1(u, g) + p.eps * d1(v * v, g)
    du[0] = du[-1] = 0.0
    dv[0] = dv[-1] = 0.0
    return du, dv


def step_euler(s: State, p: ModelParams, g: Grid1D, dt: float,
               clamp_u: bool = False) -> State:
    du, dv = rhs(s, p, g)
    with np.errstate(over="ignore", invalid="ignore"):
        u = s.u + dt * du
        v = s.v + dt * dv
    if clamp_u:
        np.maximum(u, 0.0, out=u)
    out = apply_bc(State(u, v, s.t + dt))
    if not _check_finite(out.u, out.v):
        raise InstabilityError(out.t, s)
    return out


Observer = Callable[[State, Grid1D], object]


def integrate(
    s0: State,
    p: ModelParams,
    ctrl: StepControl,
    observers: Sequence[Observer] = (),
    stop: Optional[Callable[[list], bool]] = None,
) -> tuple[State, list]:
    """Advance ``s0`` to ``ctrl.t_end``.

    Every observer is called at the start, after every ``observer_stride``
    steps and at the final time; non-None results are collected in call
    order.  ``stop(samples)`` returning True ends the run at that sample.
    The input state is not modified.
    """
    g = make_grid(ctrl.n)
    if s0.u.shape != (g.size,) or s0.v.shape != (g.size,):
        raise ValueError(f"state arrays must have length {g.size}")
    state = apply_bc(s0.copy())
    samples: list = []

    def observe(st):
        for obs in observers:
            rec = obs(st, g)
            if rec is not None:
                samples.append(rec)
        return stop is not None and stop(samples)

    if observe(state):
        return state, samples

    span = ctrl.t_end - s0.t
    if span < 0:
        raise ValueError("t_end precedes the initial time")
    n_full = math.floor(span / ctrl.dt + 1e-9)
    remainder = span - n_full * ctrl.dt
    if remainder <= 1e-9 * ctrl.dt:
        remainder = 0.0

    u = np.ascontiguousarray(state.u, dtype=np.float64)
    v = np.ascontiguousarray(state.v, dtype=np.float64)
    done = 0
    while done < n_full:
        chunk = min(ctrl.observer_stride, n_full - done)
        last_good = State(u.copy(), v.copy(), state.t)
        status = _kernel.advance(u, v, chunk, ctrl.dt, g.dx, p.eps, p.r, ctrl.clamp_u)
        if status >= 0:
            t_fail = s0.t + (done + status + 1) * ctrl.dt
            raise InstabilityError(t_fail, last_good, samples)
        done += chunk
        t = ctrl.t_end if (done == n_full and remainder == 0.0) else s0.t + done * ctrl.dt
        state = State(u, v, t)
        at_end = done == n_full and remainder == 0.0
        if done % ctrl.observer_stride == 0 or at_end:
            if observe(State(u.copy(), v.copy(), t)):
                return State(u.copy(), v.copy(), t), samples

    if remainder > 0.0:
        last_good = State(u.copy(), v.copy(), state.t)
        status = _kernel.advance(u, v, 1, remainder, g.dx, p.eps, p.r, ctrl.clamp_u)
        if status >= 0:
            raise InstabilityError(ctrl.t_end, last_good, samples)
        state = State(u, v, ctrl.t_end)
        observe(State(u.copy(), v.copy(), state.t))

    return State(u.copy(), v.copy(), state.t), samples
