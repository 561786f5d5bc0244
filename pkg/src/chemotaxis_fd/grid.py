"""Uniform node grid on [0, 1] with one ghost slot per side.

Fields are plain ``numpy`` arrays of length ``n + 3``.  Array index ``k``
holds logical node ``k - 1``, so ``f[0]`` is the left ghost (node -1),
``f[1:-1]`` are the nodes ``x_0 .. x_n`` and ``f[-1]`` is the right ghost
(node n+1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_INTERVALS = 4


@dataclass(frozen=True)
class Grid1D:
    n: int
    dx: float

    @property
    def x(self) -> np.ndarray:
        """Node coordinates ``x_i = i/n`` for ``i = 0..n``."""
        return np.arange(self.n + 1) / self.n

    @property
    def x_full(self) -> np.ndarray:
        """Coordinates of every slot, ghosts included."""
        return np.arange(-1, self.n + 2) / self.n

    @property
    def size(self) -> int:
        return self.n + 3

    def zeros(self) -> np.ndarray:
        return np.zeros(self.n + 3)

    def field(self, func) -> np.ndarray:
        """Evaluate ``func`` on every slot, ghosts included."""
        vals = np.asarray(func(self.x_full), dtype=float)
        return np.broadcast_to(vals, (self.n + 3,)).copy()


def make_grid(n: int) -> Grid1D:
    if int(n) != n or n < MIN_INTERVALS:
        raise ValueError(f"grid needs an integer n >= {MIN_INTERVALS}, got {n!r}")
    n = int(n)
    return Grid1D(n=n, dx=1.0 / n)


def interior(f: np.ndarray) -> np.ndarray:
    """View of the node values ``f_0 .. f_n``."""
    return f[1:-1]


def d1(f: np.ndarray, g: Grid1D) -> np.ndarray:
    """Central first difference on the nodes; output ghosts are zero."""
    out = np.zeros_like(f, dtype=float)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * g.dx)
    return out


def d2(f: np.ndarray, g: Grid1D) -> np.ndarray:
    """Central second difference on the nodes; output ghosts are zero."""
    out = np.zeros_like(f, dtype=float)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (g.dx * g.dx)
    return out


def trapezoid(values: np.ndarray, g: Grid1D) -> float:
    """Composite trapezoid rule over node values ``x_0 .. x_n``."""
    values = np.asarray(values, dtype=float)
    return float(g.dx * (values.sum() - 0.5 * (values[0] + values[-1])))


def l2_sq(f: np.ndarray, g: Grid1D) -> float:
    fi = interior(f)
    return trapezoid(fi * fi, g)


def linf(f: np.ndarray) -> float:
    return float(np.max(np.abs(interior(f))))


def h1_sq(f: np.ndarray, g: Grid1D) -> float:
    """Squared discrete H1 norm; ghosts of ``f`` must be filled."""
    return l2_sq(f, g) + l2_sq(d1(f, g), g)


def reflect_even(f: np.ndarray) -> np.ndarray:
    """Fill ghosts so that f_{-1} = f_1 and f_{n+1} = f_{n-1} (in place)."""
    f[0] = f[2]
    f[-1] = f[-3]
    return f


def reflect_odd(f: np.ndarray) -> np.ndarray:
    """Pin f_0 = f_n = 0 and fill ghosts by odd reflection (in place)."""
    f[1] = 0.0
    f[-2] = 0.0
    f[0] = -f[2]
    f[-1] = -f[-3]
    return f
