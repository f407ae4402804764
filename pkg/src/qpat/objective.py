"""Cost functional, Kubelka-Munk diffusion prior, and gradient validation.

The functional combines a least-squares fit of the optical energy
H = Gamma * (sigma + sigma_b) * u against measured interior data for two
illuminations with L2/L1 regularization of sigma and an L2 penalty tying
D to the Kubelka-Munk target Dbar = 1 / (3c (sigma + sigma_b)).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from qpat.grid import (
    Grid2D,
    ScalarField,
    conformable,
    l1_norm_weighted,
    l2_norm_weighted,
    trapezoid_weights,
)
from qpat import elliptic

__all__ = [
    "RegularizationWeights",
    "PhysicalConstants",
    "AdmissibleBox",
    "ProblemSpec",
    "default_box",
    "optical_energy",
    "kubelka_target",
    "evaluate_J",
    "solve_states",
    "directional_check",
]


@dataclass(frozen=True)
class RegularizationWeights:
    """Weights of the functional: data fit, L2(sigma), diffusion prior, L1(sigma)."""

    alpha: float = 1.0
    xi1: float = 0.01
    xi2: float = 20.0
    gamma: float = 0.01

    def __post_init__(self):
        for name in ("alpha", "xi1", "xi2", "gamma"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0.0):
                raise ValueError(f"weight {name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class PhysicalConstants:
    """Gruneisen coefficient, background absorption, Kubelka-Munk slope, sigma floor."""

    Gamma: float = 1.0
    sigma_b: float = 0.16
    c: float = 100.0 / 3.0
    sigma_eps: float = 1e-3

    def __post_init__(self):
        if not self.Gamma > 0.0:
            raise ValueError("Gamma must be > 0")
        if not self.sigma_b >= 0.0:
            raise ValueError("sigma_b must be >= 0")
        if not self.c > 0.0:
            raise ValueError("c must be > 0")
        if not self.sigma_eps > 0.0:
            raise ValueError("sigma_eps must be > 0")


@dataclass(frozen=True)
class AdmissibleBox:
    """Pointwise bounds for the controls: D in [D_l, D_r], sigma in [sigma_l, sigma_r]."""

    D_l: float = 1e-4
    D_r: float = 0.2
    sigma_l: float = -0.159
    sigma_r: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.D_l <= self.D_r:
            raise ValueError(f"need 0 < D_l <= D_r, got [{self.D_l}, {self.D_r}]")
        if not self.sigma_l <= self.sigma_r:
            raise ValueError(f"need sigma_l <= sigma_r, got [{self.sigma_l}, {self.sigma_r}]")

    def contains(self, D: ScalarField, sigma: ScalarField) -> bool:
        return bool(
            np.all(D.values >= self.D_l)
            and np.all(D.values <= self.D_r)
            and np.all(sigma.values >= self.sigma_l)
            and np.all(sigma.values <= self.sigma_r)
        )


def default_box(const: PhysicalConstants, D_l: float = 1e-4, D_r: float = 0.2, sigma_r: float = 2.0) -> AdmissibleBox:
    """Default box with sigma_l = -sigma_b + sigma_eps so sigma_a stays positive."""
    return AdmissibleBox(D_l=D_l, D_r=D_r, sigma_l=-const.sigma_b + const.sigma_eps, sigma_r=sigma_r)


@dataclass(frozen=True)
class ProblemSpec:
    """Reconstruction setup: grid, physical constants, control box, illuminations."""

    grid: Grid2D
    constants: PhysicalConstants
    box: AdmissibleBox
    g1: Callable[[np.ndarray, np.ndarray], np.ndarray]
    g2: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __post_init__(self):
        if self.box.sigma_l + self.constants.sigma_b < self.constants.sigma_eps - 1e-12:
            raise ValueError("box allows sigma_a below the sigma_eps floor")


def optical_energy(sigma: ScalarField, u: ScalarField, const: PhysicalConstants) -> ScalarField:
    """Interior pressure map H = Gamma * (sigma + sigma_b) * u."""
    conformable(sigma, u)
    return sigma.with_values(const.Gamma * (sigma.values + const.sigma_b) * u.values)


def kubelka_target(sigma: ScalarField, const: PhysicalConstants) -> ScalarField:
    """Diffusion prior Dbar = 1 / (3c (sigma + sigma_b)); guards the singularity."""
    sa = sigma.values + const.sigma_b
    # 1e-12 slack: box edges constructed as -sigma_b + sigma_eps round both ways
    if np.any(sa < const.sigma_eps - 1e-12):
        raise ValueError(
            f"sigma + sigma_b dips below sigma_eps={const.sigma_eps:g} "
            f"(min {sa.min():g}); Kubelka-Munk target undefined"
        )
    return sigma.with_values(1.0 / (3.0 * const.c * sa))


def evaluate_J(
    D: ScalarField,
    sigma: ScalarField,
    u1: ScalarField,
    u2: ScalarField,
    G1: ScalarField,
    G2: ScalarField,
    weights: RegularizationWeights,
    const: PhysicalConstants,
) -> float:
    """Value of the regularized data-fit functional (trapezoid quadrature)."""
    conformable(D, sigma, u1, u2, G1, G2)
    dbar = kubelka_target(sigma, const)
    fit = 0.0
    for u, G in ((u1, G1), (u2, G2)):
        H = optical_energy(sigma, u, const)
        fit += l2_norm_weighted(H.with_values(H.values - G.values)) ** 2
    return float(
        0.5 * weights.alpha * fit
        + 0.5 * weights.xi1 * l2_norm_weighted(sigma) ** 2
        + 0.5 * weights.xi2 * l2_norm_weighted(D.with_values(D.values - dbar.values)) ** 2
        + weights.gamma * l1_norm_weighted(sigma)
    )


def solve_states(
    spec: ProblemSpec, D: ScalarField, sigma: ScalarField, tol: float = elliptic.DEFAULT_TOL
) -> tuple[ScalarField, ScalarField]:
    """Forward solves for both illuminations at the given coefficients."""
    sa = sigma.with_values(sigma.values + spec.constants.sigma_b)
    u1 = elliptic.solve(elliptic.EllipticProblem(spec.grid, D, sa, None, spec.g1), tol=tol)
    u2 = elliptic.solve(elliptic.EllipticProblem(spec.grid, D, sa, None, spec.g2), tol=tol)
    return u1, u2


def _reduced_J(spec, data, weights, D, sigma, tol):
    u1, u2 = solve_states(spec, D, sigma, tol)
    return evaluate_J(D, sigma, u1, u2, data[0], data[1], weights, spec.constants)


def directional_check(
    spec: ProblemSpec,
    data: tuple[ScalarField, ScalarField],
    weights: RegularizationWeights,
    D: ScalarField,
    sigma: ScalarField,
    delta: ScalarField,
    direction: str = "sigma",
    eps_fd: float = 1e-5,
    tol: float = 1e-12,
) -> tuple[float, float]:
    """Central finite difference of the reduced functional vs the adjoint prediction.

    Requires gamma = 0 (smooth functional) and a perturbation that keeps the
    iterate away from the box bounds.  The sigma prediction integrates the
    sigma-partial of the Hamiltonian integrand; the D prediction pairs the
    adjoints with the edge-average sensitivity of the discrete operator,
    which is its exact derivative.
    """
    if weights.gamma != 0.0:
        raise ValueError("directional_check requires gamma = 0")
    if direction not in ("sigma", "D"):
        raise ValueError(f"unknown direction {direction!r}")
    conformable(D, sigma, delta, data[0], data[1])
    const = spec.constants
    g = spec.grid

    if direction == "sigma":
        plus = _reduced_J(spec, data, weights, D, sigma.with_values(sigma.values + eps_fd * delta.values), tol)
        minus = _reduced_J(spec, data, weights, D, sigma.with_values(sigma.values - eps_fd * delta.values), tol)
    else:
        plus = _reduced_J(spec, data, weights, D.with_values(D.values + eps_fd * delta.values), sigma, tol)
        minus = _reduced_J(spec, data, weights, D.with_values(D.values - eps_fd * delta.values), sigma, tol)
    fd = (plus - minus) / (2.0 * eps_fd)

    u1, u2 = solve_states(spec, D, sigma, tol)
    from qpat.adjoint import solve_adjoint_fields  # cycle-free late import

    q1 = solve_adjoint_fields(D, sigma, u1, data[0], weights.alpha, const, tol=tol)
    q2 = solve_adjoint_fields(D, sigma, u2, data[1], weights.alpha, const, tol=tol)

    w = trapezoid_weights(g.n)
    h2 = g.h**2
    dbar = kubelka_target(sigma, const)

    if direction == "sigma":
        integrand = weights.xi1 * sigma.values
        integrand = integrand + weights.xi2 * (D.values - dbar.values) * (3.0 * const.c * dbar.values**2)
        for u, G, q in ((u1, data[0], q1), (u2, data[1], q2)):
            H = optical_energy(sigma, u, const)
            integrand = integrand + weights.alpha * const.Gamma * u.values * (H.values - G.values)
            integrand = integrand + u.values * q.values
        predicted = float(h2 * np.sum(w * integrand * delta.values))
    else:
        predicted = float(h2 * np.sum(w * weights.xi2 * (D.values - dbar.values) * delta.values))
        dv = delta.values
        core = dv[1:-1, 1:-1]
        dxp = 0.5 * (dv[1:-1, 2:] + core)
        dxm = 0.5 * (dv[1:-1, :-2] + core)
        dyp = 0.5 * (dv[2:, 1:-1] + core)
        dym = 0.5 * (dv[:-2, 1:-1] + core)
        for u, q in ((u1, q1), (u2, q2)):
            uc = u.values[1:-1, 1:-1]
            qc = q.values[1:-1, 1:-1]
            pair = (
                dxp * (uc - u.values[1:-1, 2:])
                + dxm * (uc - u.values[1:-1, :-2])
                + dyp * (uc - u.values[2:, 1:-1])
                + dym * (uc - u.values[:-2, 1:-1])
            )
            predicted += float(np.sum(qc * pair))
    return fd, predicted
