import numpy as np
import pytest

from qpat.grid import Grid2D, ScalarField, trapezoid_weights
from qpat.elliptic import EllipticProblem, assemble, solve
from qpat.adjoint import adjoint_rhs, build_adjoint_problem, solve_adjoint, solve_adjoint_fields
from qpat.objective import PhysicalConstants, optical_energy


def test_rhs_zero_on_exact_data():
    g = Grid2D(-1.0, 1.0, 8)
    rng = np.random.default_rng(1)
    sig = ScalarField(g, rng.uniform(0.0, 1.0, (9, 9)))
    u = ScalarField(g, rng.uniform(0.5, 2.0, (9, 9)))
    k = PhysicalConstants(Gamma=1.2, sigma_b=0.1)
    G = optical_energy(sig, u, k)
    r = adjoint_rhs(sig, u, G, alpha=1.0, Gamma=k.Gamma, sigma_b=k.sigma_b)
    assert np.all(r.values == 0.0)


def test_rhs_plugin_value():
    g = Grid2D(-1.0, 1.0, 4)
    sig = ScalarField.constant(g, 0.0)
    u = ScalarField.constant(g, 1.0)
    G = ScalarField.constant(g, 0.0)
    r = adjoint_rhs(sig, u, G, alpha=1.0, Gamma=1.0, sigma_b=1.0)
    assert np.allclose(r.values, -1.0, atol=1e-16)


def test_rhs_duplicate_formula():
    g = Grid2D(-1.0, 1.0, 3)
    rng = np.random.default_rng(2)
    sig, u, G = (ScalarField(g, rng.uniform(0.0, 1.0, (4, 4))) for _ in range(3))
    alpha, Gamma, sb = 0.7, 1.4, 0.23
    r = adjoint_rhs(sig, u, G, alpha, Gamma, sb)
    for j in range(4):
        for i in range(4):
            s = sig.values[j, i] + sb
            want = -alpha * Gamma * s * (Gamma * s * u.values[j, i] - G.values[j, i])
            assert r.values[j, i] == want


def test_zero_rhs_gives_zero_adjoint():
    g = Grid2D(-1.0, 1.0, 10)
    k = PhysicalConstants(sigma_b=0.16)
    sig = ScalarField.constant(g, 0.3)
    D = ScalarField.constant(g, 0.02)
    u = ScalarField.constant(g, 1.0)
    G = optical_energy(sig, u, k)
    q = solve_adjoint_fields(D, sig, u, G, alpha=1.0, const=k)
    assert np.all(q.values == 0.0)


def test_boundary_exactly_zero():
    g = Grid2D(-1.0, 1.0, 12)
    rng = np.random.default_rng(3)
    k = PhysicalConstants(sigma_b=0.16)
    sig = ScalarField(g, rng.uniform(0.0, 0.5, (13, 13)))
    D = ScalarField(g, rng.uniform(0.01, 0.05, (13, 13)))
    u = ScalarField(g, rng.uniform(0.5, 1.5, (13, 13)))
    G = ScalarField(g, rng.uniform(0.0, 0.5, (13, 13)))
    q = solve_adjoint_fields(D, sig, u, G, alpha=1.0, const=k)
    for sl in (np.s_[0, :], np.s_[-1, :], np.s_[:, 0], np.s_[:, -1]):
        assert np.all(q.values[sl] == 0.0)
    assert np.any(q.values != 0.0)


def test_same_operator_as_forward():
    g = Grid2D(-1.0, 1.0, 9)
    rng = np.random.default_rng(4)
    k = PhysicalConstants(sigma_b=0.1)
    sig = ScalarField(g, rng.uniform(0.0, 1.0, (10, 10)))
    D = ScalarField(g, rng.uniform(0.01, 0.1, (10, 10)))
    u = ScalarField(g, rng.uniform(0.5, 1.5, (10, 10)))
    G = ScalarField(g, rng.uniform(0.0, 1.0, (10, 10)))
    sa = ScalarField(g, sig.values + k.sigma_b)
    fwd = assemble(EllipticProblem(g, D, sa, None, lambda x, y: np.exp(x)))
    adj = assemble(build_adjoint_problem(D, sig, u, G, 1.0, k).base)
    assert (fwd.matrix != adj.matrix).nnz == 0


def test_discrete_self_adjointness():
    # <solve(r), s> == <r, solve(s)> for the SPD operator with zero Dirichlet data
    g = Grid2D(-1.0, 1.0, 20)
    rng = np.random.default_rng(5)
    D = ScalarField(g, rng.uniform(0.01, 0.1, (21, 21)))
    sa = ScalarField(g, rng.uniform(0.1, 1.0, (21, 21)))

    def apply_inverse(rhs_values):
        p = EllipticProblem(g, D, sa, ScalarField(g, rhs_values), 0.0)
        return solve(p, tol=1e-12).values

    r = rng.standard_normal((21, 21))
    s = rng.standard_normal((21, 21))
    for arr in (r, s):
        arr[0, :] = arr[-1, :] = arr[:, 0] = arr[:, -1] = 0.0
    w = trapezoid_weights(g.n)
    lhs = np.sum(w * apply_inverse(r) * s)
    rhs = np.sum(w * r * apply_inverse(s))
    assert abs(lhs - rhs) / max(abs(lhs), abs(rhs)) <= 1e-8


def test_adjoint_problem_records_illumination():
    g = Grid2D(-1.0, 1.0, 6)
    k = PhysicalConstants(sigma_b=0.16)
    f = ScalarField.constant(g, 0.1)
    D = ScalarField.constant(g, 0.02)
    p = build_adjoint_problem(D, f, f, f, 1.0, k, illumination_index=2)
    assert p.illumination_index == 2
    q = solve_adjoint(p)
    assert q.grid == g
