"""Uniform square grids, node-valued scalar fields, and discrete calculus.

Everything downstream (forward/adjoint solves, the cost functional, the
pointwise Hamiltonian sweep) works on fields sampled at the nodes of a
uniform grid on a square (a, b)^2 with n cells per direction.  Arrays are
indexed ``values[j, i]`` so that row j holds the nodes with y = a + j*h.

L2 quantities use composite-trapezoid weights (1 interior, 1/2 edge,
1/4 corner); nodal gradients are second-order central differences with
second-order one-sided stencils on the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "Grid2D",
    "ScalarField",
    "l2_norm_weighted",
    "l2_norm_vector",
    "l1_norm_weighted",
    "h1_norm_discrete",
    "nodal_gradient",
    "restrict",
    "read_qgrid",
    "write_qgrid",
]


@dataclass(frozen=True)
class Grid2D:
    """Uniform grid on the square (a, b)^2 with n cells per direction.

    Node (i, j) sits at (a + i*h, a + j*h) for 0 <= i, j <= n, h = (b-a)/n.
    """

    a: float
    b: float
    n: int

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(f"grid needs b > a, got a={self.a}, b={self.b}")
        if self.n < 2:
            raise ValueError(f"grid needs n >= 2, got n={self.n}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def npoints(self) -> int:
        return self.n + 1

    def node_coords(self, i: int, j: int) -> tuple[float, float]:
        if not (0 <= i <= self.n and 0 <= j <= self.n):
            raise IndexError(f"node ({i},{j}) outside 0..{self.n}")
        return (self.a + i * self.h, self.a + j * self.h)

    def axis(self) -> np.ndarray:
        """Node coordinates along one direction, shape (n+1,)."""
        return self.a + self.h * np.arange(self.n + 1)

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) arrays of shape (n+1, n+1) indexed [j, i]."""
        ax = self.axis()
        return np.meshgrid(ax, ax, indexing="xy")


@dataclass(frozen=True)
class ScalarField:
    """A real-valued function sampled at the nodes of a Grid2D.

    values has shape (n+1, n+1), indexed [j, i]; all entries finite.
    """

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        m = self.grid.npoints
        if v.shape != (m, m):
            raise ValueError(f"field shape {v.shape} does not match grid ({m},{m})")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    @staticmethod
    def from_function(grid: Grid2D, f: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "ScalarField":
        X, Y = grid.meshgrid()
        return ScalarField(grid, np.asarray(f(X, Y), dtype=float) + np.zeros_like(X))

    @staticmethod
    def constant(grid: Grid2D, value: float) -> "ScalarField":
        return ScalarField(grid, np.full((grid.npoints, grid.npoints), float(value)))

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, values)


def conformable(*fields: ScalarField) -> Grid2D:
    """Return the common grid, raising if any two fields disagree."""
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise ValueError(f"fields on different grids: {f.grid} vs {g}")
    return g


def trapezoid_weights(n: int) -> np.ndarray:
    """Composite-trapezoid node weights: 1 interior, 1/2 edge, 1/4 corner."""
    w = np.ones((n + 1, n + 1))
    w[0, :] *= 0.5
    w[-1, :] *= 0.5
    w[:, 0] *= 0.5
    w[:, -1] *= 0.5
    return w


def l2_norm_weighted(f: ScalarField) -> float:
    """Trapezoid discretization of the L2(domain) norm."""
    w = trapezoid_weights(f.grid.n)
    return float(np.sqrt(f.grid.h**2 * np.sum(w * f.values**2)))


def l2_norm_vector(f: ScalarField) -> float:
    """Plain Euclidean norm over all (n+1)^2 node values (no quadrature)."""
    return float(np.sqrt(np.sum(f.values**2)))


def l1_norm_weighted(f: ScalarField) -> float:
    """Trapezoid discretization of the L1(domain) norm."""
    w = trapezoid_weights(f.grid.n)
    return float(f.grid.h**2 * np.sum(w * np.abs(f.values)))


def _gradient_1d(v: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second-order differences along one axis: central inside, one-sided at ends."""
    g = np.empty_like(v)
    vm = np.moveaxis(v, axis, 0)
    gm = np.moveaxis(g, axis, 0)
    gm[1:-1] = (vm[2:] - vm[:-2]) / (2.0 * h)
    gm[0] = (-3.0 * vm[0] + 4.0 * vm[1] - vm[2]) / (2.0 * h)
    gm[-1] = (3.0 * vm[-1] - 4.0 * vm[-2] + vm[-3]) / (2.0 * h)
    return g


def nodal_gradient(f: ScalarField) -> tuple[ScalarField, ScalarField]:
    """(df/dx, df/dy) at every node; exact for quadratic fields."""
    h = f.grid.h
    fx = _gradient_1d(f.values, h, axis=1)
    fy = _gradient_1d(f.values, h, axis=0)
    return f.with_values(fx), f.with_values(fy)


def h1_norm_discrete(f: ScalarField) -> float:
    """Grid analogue of the H1 norm: weighted L2 of f plus of both gradient parts."""
    fx, fy = nodal_gradient(f)
    return l2_norm_weighted(f) + l2_norm_weighted(fx) + l2_norm_weighted(fy)


def restrict(fine: ScalarField, coarse_grid: Grid2D) -> ScalarField:
    """Injection of a fine-grid field onto a nested coarser grid.

    Nodes of nested uniform grids coincide, so the coarse value at (i, j)
    is the fine value at (r*i, r*j) with r = fine.n / coarse.n.
    """
    fg = fine.grid
    if (fg.a, fg.b) != (coarse_grid.a, coarse_grid.b):
        raise ValueError("restriction requires identical domain endpoints")
    if fg.n % coarse_grid.n != 0:
        raise ValueError(f"grids not nested: fine n={fg.n}, coarse n={coarse_grid.n}")
    r = fg.n // coarse_grid.n
    return ScalarField(coarse_grid, fine.values[::r, ::r].copy())


# --- qgrid v1 file format -------------------------------------------------
#
# Line 1:  qgrid 1 <n> <a> <b>
# Then n+1 lines (row j = 0..n), each with n+1 full-precision decimal floats
# (column i = 0..n).  Full precision means %.17g, so write/read round-trips
# are bit exact.


def write_qgrid(f: ScalarField, path) -> None:
    g = f.grid
    with open(path, "w") as fh:
        fh.write(f"qgrid 1 {g.n} {g.a:.17g} {g.b:.17g}\n")
        for j in range(g.npoints):
            fh.write(" ".join(f"{v:.17g}" for v in f.values[j]) + "\n")


def read_qgrid(path) -> ScalarField:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 5 or header[0] != "qgrid" or header[1] != "1":
            raise ValueError(f"{path}: not a qgrid v1 file")
        n = int(header[2])
        grid = Grid2D(a=float(header[3]), b=float(header[4]), n=n)
        values = np.empty((n + 1, n + 1))
        for j in range(n + 1):
            row = fh.readline().split()
            if len(row) != n + 1:
                raise ValueError(f"{path}: row {j} has {len(row)} values, expected {n + 1}")
            values[j] = [float(t) for t in row]
    return ScalarField(grid, values)
