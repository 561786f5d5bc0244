"""Initial data and the Cole-Hopf map between c and v = (ln c)_x."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import State, apply_bc
from .grid import Grid1D, d1, reflect_even, reflect_odd

GAUSSIAN_PEAK = 5.0 / 3.0
GAUSSIAN_WIDTH = 18.0


def _heaviside(y):
    # H(0) = 1 so that nodes at 0.25, 0.5, 0.75 take the right-hand value
    return np.where(y >= 0.0, 1.0, 0.0)


def ic_heaviside(g: Grid1D) -> np.ndarray:
    """Two plateaus of height 1 on [0.25, 0.5) and [0.75, 1]."""
    x = g.x_full
    u0 = _heaviside(x - 0.25) - _heaviside(x - 0.5) + _heaviside(x - 0.75)
    return reflect_even(u0)


def ic_gaussian(g: Grid1D) -> np.ndarray:
    """Gaussian bump centred at 1/2, pinned to zero at both endpoints."""
    x = g.x_full
    v0 = GAUSSIAN_PEAK * np.exp(-GAUSSIAN_WIDTH * (x - 0.5) ** 2)
    return reflect_odd(v0)


def ic_smooth(g: Grid1D, a_u: float, a_v: float) -> tuple[np.ndarray, np.ndarray]:
    """``u0 = 1 + a_u cos(pi x)``, ``v0 = a_v sin(pi x)``.

    Both satisfy the boundary compatibility conditions exactly and keep
    ``u0`` strictly positive, so the entropy ``int(u - ln u)`` is finite.
    """
    if not 0.0 <= a_u < 1.0:
        raise ValueError(f"a_u must lie in [0, 1) to keep u0 positive, got {a_u}")
    x = g.x_full
    u0 = 1.0 + a_u * np.cos(np.pi * x)
    v0 = a_v * np.sin(np.pi * x)
    return reflect_even(u0), reflect_odd(v0)


@dataclass(frozen=True)
class InitialCondition:
    kind: str = "paper_heaviside_gaussian"
    a_u: float = 0.2
    a_v: float = 0.2
    u0: np.ndarray | None = None
    v0: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("paper_heaviside_gaussian", "smooth_cosine", "custom"):
            raise ValueError(f"unknown initial condition kind {self.kind!r}")
        if self.kind == "custom" and (self.u0 is None or self.v0 is None):
            raise ValueError("custom initial conditions need u0 and v0 arrays")

    @classmethod
    def paper(cls) -> "InitialCondition":
        return cls("paper_heaviside_gaussian")

    @classmethod
    def smooth(cls, a_u: float = 0.2, a_v: float = 0.2) -> "InitialCondition":
        return cls("smooth_cosine", a_u=a_u, a_v=a_v)

    def build(self, g: Grid1D) -> State:
        if self.kind == "paper_heaviside_gaussian":
            u0, v0 = ic_heaviside(g), ic_gaussian(g)
        elif self.kind == "smooth_cosine":
            u0, v0 = ic_smooth(g, self.a_u, self.a_v)
        else:
            u0 = np.array(self.u0, dtype=float)
            v0 = np.array(self.v0, dtype=float)
            if u0.shape != (g.size,) or v0.shape != (g.size,):
                raise ValueError(f"custom fields must have length {g.size}")
        return apply_bc(State(u0, v0, 0.0))


def c_from_v(v: np.ndarray, g: Grid1D, c_left: float = 1.0) -> np.ndarray:
    """Recover c up to the multiplicative constant fixed by ``c_left``.

    ``c_i = c_left * exp(int_0^{x_i} v)`` with the cumulative trapezoid
    rule, continued through the ghost slots using the ghost values of v.
    """
    if not c_left > 0:
        raise ValueError("c_left must be positive")
    v = np.asarray(v, dtype=float)
    cum = np.concatenate(([0.0], np.cumsum(0.5 * g.dx * (v[1:] + v[:-1]))))
    return c_left * np.exp(cum - cum[1])


def v_from_c(c: np.ndarray, g: Grid1D) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0) or not np.all(np.isfinite(c)):
        raise ValueError("c must be strictly positive and finite at every slot")
    return d1(np.log(c), g)
