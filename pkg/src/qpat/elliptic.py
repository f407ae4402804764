"""Cell-nodal finite-difference solver for -div(D grad u) + sigma_a u = f.

Unknowns, D and sigma_a live at grid nodes; the diffusion coefficient is
averaged onto cell edges, D_{i+1/2,j} = (D_{i+1,j} + D_{i,j}) / 2, giving a
symmetric positive-definite 5-point system over the interior nodes.
Dirichlet values are folded into the right-hand side.

The linear solve is conjugate gradients with a Jacobi preconditioner
(the matrix is SPD for admissible coefficients, so CG cannot stagnate
unless an invariant is broken; non-convergence raises).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from qpat.grid import Grid2D, ScalarField, conformable

__all__ = [
    "EllipticProblem",
    "SparseSystem",
    "SolverConvergenceError",
    "edge_coefficient",
    "assemble",
    "solve",
]

BoundaryData = Union[Callable[[np.ndarray, np.ndarray], np.ndarray], ScalarField, float]

DEFAULT_TOL = 1e-10


class SolverConvergenceError(RuntimeError):
    """CG failed to reach tolerance; carries the last relative residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class EllipticProblem:
    """Coefficients, source and Dirichlet data for one elliptic solve.

    D must be strictly positive and sigma_a nonnegative at every node;
    f may be None for a zero source.
    """

    grid: Grid2D
    D: ScalarField
    sigma_a: ScalarField
    f: ScalarField | None = None
    dirichlet: BoundaryData = 0.0

    def __post_init__(self):
        fields = [self.D, self.sigma_a] + ([self.f] if self.f is not None else [])
        if isinstance(self.dirichlet, ScalarField):
            fields.append(self.dirichlet)
        g = conformable(*fields)
        if g != self.grid:
            raise ValueError("problem fields live on a different grid")
        if not np.all(self.D.values > 0.0):
            raise ValueError("diffusion coefficient must be > 0 at every node")
        if not np.all(self.sigma_a.values >= 0.0):
            raise ValueError("total absorption must be >= 0 at every node")

    def boundary_values(self) -> np.ndarray:
        """Full (n+1, n+1) array with the Dirichlet ring filled, zeros inside."""
        g = self.grid
        out = np.zeros((g.npoints, g.npoints))
        if isinstance(self.dirichlet, ScalarField):
            src = self.dirichlet.values
        elif callable(self.dirichlet):
            X, Y = g.meshgrid()
            src = np.asarray(self.dirichlet(X, Y), dtype=float) + np.zeros_like(X)
        else:
            src = np.full((g.npoints, g.npoints), float(self.dirichlet))
        for sl in (np.s_[0, :], np.s_[-1, :], np.s_[:, 0], np.s_[:, -1]):
            out[sl] = src[sl]
        return out


@dataclass(frozen=True)
class SparseSystem:
    """Assembled interior system A x = b, row-major over (n-1)^2 interior nodes."""

    grid: Grid2D
    matrix: sp.csr_matrix
    rhs: np.ndarray


def edge_coefficient(D: ScalarField, i: int, j: int, direction: str, side: int) -> float:
    """Arithmetic mean of D between node (i, j) and its neighbor.

    direction is "x" or "y"; side is +1 or -1, e.g. ("x", +1) gives
    D_{i+1/2, j} = (D_{i+1,j} + D_{i,j}) / 2.
    """
    if direction not in ("x", "y") or side not in (1, -1):
        raise ValueError(f"bad edge ({direction!r}, {side})")
    n = D.grid.n
    di, dj = (side, 0) if direction == "x" else (0, side)
    ii, jj = i + di, j + dj
    if not (0 <= i <= n and 0 <= j <= n and 0 <= ii <= n and 0 <= jj <= n):
        raise IndexError(f"edge neighbor of ({i},{j}) towards ({ii},{jj}) out of range")
    return 0.5 * (D.values[jj, ii] + D.values[j, i])


def assemble(p: EllipticProblem) -> SparseSystem:
    g = p.grid
    n, h = g.n, g.h
    m = n - 1
    h2 = h * h
    Dv = p.D.values
    core = Dv[1:-1, 1:-1]

    # edge-averaged diffusion around each interior node, shape (m, m)
    Dxp = 0.5 * (Dv[1:-1, 2:] + core)
    Dxm = 0.5 * (Dv[1:-1, :-2] + core)
    Dyp = 0.5 * (Dv[2:, 1:-1] + core)
    Dym = 0.5 * (Dv[:-2, 1:-1] + core)

    diag = (Dxp + Dxm + Dyp + Dym) / h2 + p.sigma_a.values[1:-1, 1:-1]

    idx = np.arange(m * m).reshape(m, m)
    rows = [idx.ravel()]
    cols = [idx.ravel()]
    vals = [diag.ravel()]

    # east/west couplings (Dxm[j,i+1] equals Dxp[j,i] exactly, so A is symmetric)
    rows += [idx[:, :-1].ravel(), idx[:, 1:].ravel()]
    cols += [idx[:, 1:].ravel(), idx[:, :-1].ravel()]
    vals += [(-Dxp[:, :-1] / h2).ravel(), (-Dxm[:, 1:] / h2).ravel()]
    # north/south couplings
    rows += [idx[:-1, :].ravel(), idx[1:, :].ravel()]
    cols += [idx[1:, :].ravel(), idx[:-1, :].ravel()]
    vals += [(-Dyp[:-1, :] / h2).ravel(), (-Dym[1:, :] / h2).ravel()]

    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(m * m, m * m),
    ).tocsr()

    b = np.zeros((m, m)) if p.f is None else p.f.values[1:-1, 1:-1].copy()
    bc = p.boundary_values()
    b[:, 0] += Dxm[:, 0] / h2 * bc[1:-1, 0]
    b[:, -1] += Dxp[:, -1] / h2 * bc[1:-1, -1]
    b[0, :] += Dym[0, :] / h2 * bc[0, 1:-1]
    b[-1, :] += Dyp[-1, :] / h2 * bc[-1, 1:-1]

    return SparseSystem(grid=g, matrix=A, rhs=b.ravel())


def solve(p: EllipticProblem, tol: float = DEFAULT_TOL, maxiter: int | None = None) -> ScalarField:
    """Solve the problem; boundary nodes carry the Dirichlet data exactly.

    Interior values satisfy the assembled system with relative residual
    ||Ax - b|| / ||b|| <= tol.  Deterministic for fixed inputs.
    """
    if not tol > 0.0:
        raise ValueError("tol must be > 0")
    g = p.grid
    m = g.n - 1
    sys = assemble(p)
    A, b = sys.matrix, sys.rhs

    out = p.boundary_values()
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return ScalarField(g, out)  # unique solution is zero in the interior

    if maxiter is None:
        maxiter = 20 * m * m
    M = sp.diags(1.0 / A.diagonal())
    x, info = spla.cg(A, b, rtol=tol, atol=0.0, maxiter=maxiter, M=M)
    if info != 0:
        res = float(np.linalg.norm(A @ x - b) / bnorm)
        raise SolverConvergenceError(
            f"CG did not reach rtol={tol:g} within {maxiter} iterations "
            f"(relative residual {res:.3e}); check coefficient invariants",
            residual=res,
        )
    out[1:-1, 1:-1] = x.reshape(m, m)
    return ScalarField(g, out)
