"""The sequential quadratic Hamiltonian (SQH) iteration.

Each step sweeps the pointwise minimizer of the proximally augmented
Hamiltonian over all nodes at the current penalty eps, re-solves both
forward problems for the candidate controls, and applies the sufficient
decrease test

    J(candidate) - J(current) > -rho * tau,   tau = ||dD||_L2^2 + ||dsigma||_L2^2:

true means insufficient decrease, the candidate is discarded and eps grows
by lambda; false means the candidate is accepted, its adjoints are
recomputed and eps shrinks by zeta.  Iteration stops once an accepted step
moves less than kappa (tau < kappa), or a safety cap trips.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

from qpat.grid import ScalarField, l2_norm_weighted
from qpat.adjoint import solve_adjoint_fields
from qpat.objective import ProblemSpec, RegularizationWeights, evaluate_J, solve_states
from qpat.pointwise import SearchGrid, minimize_field

__all__ = [
    "SqhConfig",
    "SqhState",
    "HistoryRow",
    "ReconstructionResult",
    "initialize",
    "sqh_step",
    "run",
    "history_to_csv",
]


class HistoryRow(NamedTuple):
    iter: int
    J: float
    tau: float
    eps: float
    accepted: bool


@dataclass(frozen=True)
class SqhConfig:
    search: SearchGrid
    eps0: float = 10.0
    kappa: float = 1e-6
    lam: float = 2.0
    zeta: float = 0.8
    rho: float = 1e-4
    max_outer: int = 500
    max_eps_rescue: int = 60
    eps_overflow: float = 1e15
    solver_tol: float = 1e-10

    def __post_init__(self):
        if not self.eps0 > 0.0:
            raise ValueError("eps0 must be > 0")
        if not self.kappa > 0.0:
            raise ValueError("kappa must be > 0")
        if not self.lam > 1.0:
            raise ValueError("lambda must be > 1")
        if not 0.0 < self.zeta < 1.0:
            raise ValueError("zeta must be in (0, 1)")
        if not self.rho > 0.0:
            raise ValueError("rho must be > 0")
        if self.max_outer < 1 or self.max_eps_rescue < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass(frozen=True)
class SqhState:
    k: int
    D: ScalarField
    sigma: ScalarField
    u1: ScalarField
    u2: ScalarField
    q1: ScalarField
    q2: ScalarField
    J: float
    eps: float
    history: tuple[HistoryRow, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class ReconstructionResult:
    D_star: ScalarField
    sigma_star: ScalarField
    sigma_a_star: ScalarField
    history: tuple[HistoryRow, ...]
    termination: str  # converged | max_iterations | eps_overflow

    @property
    def accepted_J(self) -> list[float]:
        return [r.J for r in self.history if r.accepted]

    @property
    def accepted_steps(self) -> int:
        return sum(1 for r in self.history if r.accepted)


def _adjoints(spec, weights, D, sigma, u1, u2, data, tol):
    q1 = solve_adjoint_fields(D, sigma, u1, data[0], weights.alpha, spec.constants, 1, tol)
    q2 = solve_adjoint_fields(D, sigma, u2, data[1], weights.alpha, spec.constants, 2, tol)
    return q1, q2


def initialize(
    spec: ProblemSpec,
    data: tuple[ScalarField, ScalarField],
    weights: RegularizationWeights,
    cfg: SqhConfig,
    D0: ScalarField,
    sigma0: ScalarField,
) -> SqhState:
    """States, adjoints and J at the starting controls; eps at its initial value."""
    if not spec.box.contains(D0, sigma0):
        raise ValueError("initial (D0, sigma0) violates the admissible box")
    u1, u2 = solve_states(spec, D0, sigma0, cfg.solver_tol)
    q1, q2 = _adjoints(spec, weights, D0, sigma0, u1, u2, data, cfg.solver_tol)
    J0 = evaluate_J(D0, sigma0, u1, u2, data[0], data[1], weights, spec.constants)
    return SqhState(k=0, D=D0, sigma=sigma0, u1=u1, u2=u2, q1=q1, q2=q2, J=J0, eps=cfg.eps0)


def sqh_step(
    state: SqhState,
    spec: ProblemSpec,
    data: tuple[ScalarField, ScalarField],
    weights: RegularizationWeights,
    cfg: SqhConfig,
) -> tuple[SqhState, bool]:
    """One sweep + sufficient-decrease test; returns (new state, accepted)."""
    eps_used = state.eps
    D, sigma = minimize_field(
        state.u1, state.u2, state.q1, state.q2,
        state.D, state.sigma, data[0], data[1],
        eps_used, cfg.search, weights, spec.constants,
    )
    u1, u2 = solve_states(spec, D, sigma, cfg.solver_tol)
    dD = D.with_values(D.values - state.D.values)
    ds = sigma.with_values(sigma.values - state.sigma.values)
    tau = l2_norm_weighted(dD) ** 2 + l2_norm_weighted(ds) ** 2
    J_new = evaluate_J(D, sigma, u1, u2, data[0], data[1], weights, spec.constants)

    if J_new - state.J > -cfg.rho * tau:
        row = HistoryRow(state.k, J_new, tau, eps_used, False)
        return replace(state, eps=cfg.lam * state.eps, history=state.history + (row,)), False

    q1, q2 = _adjoints(spec, weights, D, sigma, u1, u2, data, cfg.solver_tol)
    row = HistoryRow(state.k + 1, J_new, tau, eps_used, True)
    new = SqhState(
        k=state.k + 1, D=D, sigma=sigma, u1=u1, u2=u2, q1=q1, q2=q2,
        J=J_new, eps=cfg.zeta * state.eps, history=state.history + (row,),
    )
    return new, True


def run(
    spec: ProblemSpec,
    data: tuple[ScalarField, ScalarField],
    weights: RegularizationWeights,
    cfg: SqhConfig,
    D0: ScalarField,
    sigma0: ScalarField,
) -> ReconstructionResult:
    """Full SQH iteration from (D0, sigma0) until tau < kappa or a cap trips."""
    state = initialize(spec, data, weights, cfg, D0, sigma0)
    termination = "max_iterations"
    rejects = 0
    while state.k < cfg.max_outer:
        state, accepted = sqh_step(state, spec, data, weights, cfg)
        if accepted:
            rejects = 0
            if state.history[-1].tau < cfg.kappa:
                termination = "converged"
                break
        else:
            rejects += 1
            if rejects > cfg.max_eps_rescue or state.eps > cfg.eps_overflow:
                termination = "eps_overflow"
                break
    sigma_a = state.sigma.with_values(state.sigma.values + spec.constants.sigma_b)
    return ReconstructionResult(
        D_star=state.D,
        sigma_star=state.sigma,
        sigma_a_star=sigma_a,
        history=state.history,
        termination=termination,
    )


def history_to_csv(history, path) -> None:
    with open(path, "w") as fh:
        fh.write("iter,J,tau,eps,accepted\n")
        for r in history:
            fh.write(f"{r.iter},{r.J:.17g},{r.tau:.17g},{r.eps:.17g},{int(r.accepted)}\n")
