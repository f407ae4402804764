"""Adjoint problems for the two illuminations.

The adjoint operator is the same assembled 5-point matrix as the forward
one at the same (D, sigma); only the right-hand side and the (homogeneous)
boundary data differ.  With the symmetric scheme this makes
discretize-then-optimize and optimize-then-discretize coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

from qpat.grid import ScalarField, conformable
from qpat import elliptic
from qpat.objective import PhysicalConstants

__all__ = ["AdjointProblem", "adjoint_rhs", "build_adjoint_problem", "solve_adjoint", "solve_adjoint_fields"]


@dataclass(frozen=True)
class AdjointProblem:
    """Elliptic problem with the data-misfit source and zero Dirichlet data."""

    base: elliptic.EllipticProblem
    illumination_index: int


def adjoint_rhs(
    sigma: ScalarField,
    u: ScalarField,
    Gdelta: ScalarField,
    alpha: float,
    Gamma: float,
    sigma_b: float,
) -> ScalarField:
    """Source term -alpha * Gamma * (sigma + sigma_b) * (H - Gdelta)."""
    conformable(sigma, u, Gdelta)
    sa = sigma.values + sigma_b
    H = Gamma * sa * u.values
    return sigma.with_values(-alpha * Gamma * sa * (H - Gdelta.values))


def build_adjoint_problem(
    D: ScalarField,
    sigma: ScalarField,
    u: ScalarField,
    Gdelta: ScalarField,
    alpha: float,
    const: PhysicalConstants,
    illumination_index: int = 1,
) -> AdjointProblem:
    rhs = adjoint_rhs(sigma, u, Gdelta, alpha, const.Gamma, const.sigma_b)
    sa = sigma.with_values(sigma.values + const.sigma_b)
    base = elliptic.EllipticProblem(D.grid, D, sa, rhs, 0.0)
    return AdjointProblem(base=base, illumination_index=illumination_index)


def solve_adjoint(p: AdjointProblem, tol: float = elliptic.DEFAULT_TOL) -> ScalarField:
    """Adjoint state with exactly zero boundary values."""
    return elliptic.solve(p.base, tol=tol)


def solve_adjoint_fields(
    D: ScalarField,
    sigma: ScalarField,
    u: ScalarField,
    Gdelta: ScalarField,
    alpha: float,
    const: PhysicalConstants,
    illumination_index: int = 1,
    tol: float = elliptic.DEFAULT_TOL,
) -> ScalarField:
    return solve_adjoint(build_adjoint_problem(D, sigma, u, Gdelta, alpha, const, illumination_index), tol=tol)
