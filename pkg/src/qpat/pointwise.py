"""Pointwise Hamiltonian evaluation and its per-node direct-search minimizer.

At each node the Hamiltonian-Pontryagin value for trial controls (w, z) is

    0.5*alpha * sum_i (Gamma*(z+sigma_b)*u_i - G_i)^2  +  0.5*xi1*z^2
  + 0.5*xi2 * (w - Dbar(z))^2  +  gamma*|z|
  + sum_i w * grad(u_i) . grad(q_i)  +  sum_i (z+sigma_b) * u_i * q_i

with frozen state/adjoint values, and the proximally augmented version adds
eps*((w - D_prev)^2 + (z - sigma_prev)^2).

The minimizer scans every sigma candidate of a uniform search grid; for a
fixed z the value is a quadratic in w with curvature xi2/2 + eps >= 0, so
only the grid points straddling its vertex (or the endpoints in the linear
case) can attain the grid minimum, and only those are evaluated.  The
previous controls are injected as an extra candidate pair so a no-move
fallback always exists.  Ties resolve to the smallest z, then smallest w.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qpat.grid import ScalarField, conformable, nodal_gradient
from qpat.objective import AdmissibleBox, PhysicalConstants, RegularizationWeights

__all__ = [
    "SearchGrid",
    "NodeContext",
    "hamiltonian",
    "augmented_hamiltonian",
    "minimize_node",
    "minimize_field",
]


@dataclass(frozen=True)
class SearchGrid:
    """Uniform candidate grid over the admissible box, endpoints included."""

    box: AdmissibleBox
    nD: int = 201
    nSigma: int = 201

    def __post_init__(self):
        if self.nD < 2 or self.nSigma < 2:
            raise ValueError("search grid needs at least 2 candidates per axis")

    def d_candidates(self) -> np.ndarray:
        return np.linspace(self.box.D_l, self.box.D_r, self.nD)

    def sigma_candidates(self) -> np.ndarray:
        return np.linspace(self.box.sigma_l, self.box.sigma_r, self.nSigma)


@dataclass(frozen=True)
class NodeContext:
    """Frozen per-node data for the Hamiltonian: states, adjoints, gradients, data."""

    u1: float
    u2: float
    q1: float
    q2: float
    gu1: tuple[float, float]
    gu2: tuple[float, float]
    gq1: tuple[float, float]
    gq2: tuple[float, float]
    G1: float
    G2: float
    Dk: float
    sigmak: float

    def grad_dots(self) -> tuple[float, float]:
        d1 = self.gu1[0] * self.gq1[0] + self.gu1[1] * self.gq1[1]
        d2 = self.gu2[0] * self.gq2[0] + self.gu2[1] * self.gq2[1]
        return d1, d2


def _z_part(z, u1, u2, q1, q2, G1, G2, sigmak, eps, wt, k):
    # all w-independent terms; z may be scalar or array, node data arrays broadcast
    s = z + k.sigma_b
    r1 = k.Gamma * s * u1 - G1
    r2 = k.Gamma * s * u2 - G2
    return (
        0.5 * wt.alpha * (r1 * r1 + r2 * r2)
        + 0.5 * wt.xi1 * (z * z)
        + wt.gamma * np.abs(z)
        + s * (u1 * q1)
        + s * (u2 * q2)
        + eps * (z - sigmak) ** 2
    )


def _w_part(w, z, dot1, dot2, Dk, eps, wt, k):
    dbar = 1.0 / (3.0 * k.c * (z + k.sigma_b))
    return 0.5 * wt.xi2 * (w - dbar) ** 2 + w * dot1 + w * dot2 + eps * (w - Dk) ** 2


def augmented_hamiltonian(
    node: NodeContext, w: float, z: float, eps: float, wt: RegularizationWeights, k: PhysicalConstants
) -> float:
    dot1, dot2 = node.grad_dots()
    zp = _z_part(z, node.u1, node.u2, node.q1, node.q2, node.G1, node.G2, node.sigmak, eps, wt, k)
    return float(zp + _w_part(w, z, dot1, dot2, node.Dk, eps, wt, k))


def hamiltonian(
    node: NodeContext, w: float, z: float, wt: RegularizationWeights, k: PhysicalConstants
) -> float:
    return augmented_hamiltonian(node, w, z, 0.0, wt, k)


def _sweep(u1, u2, q1, q2, dot1, dot2, G1, G2, Dk, sigmak, eps, sg, wt, k):
    """Vectorized minimizer over flat node arrays; returns (w*, z*) arrays."""
    w_grid = sg.d_candidates()
    z_grid = sg.sigma_candidates()
    nW = w_grid.size
    m = u1.shape[0]

    best_v = np.full(m, np.inf)
    best_w = np.empty(m)
    best_z = np.empty(m)

    # curvature of the w-quadratic; node independent
    a = 0.5 * wt.xi2 + eps
    dw = (w_grid[-1] - w_grid[0]) / (nW - 1)

    for z in z_grid:
        zp = _z_part(z, u1, u2, q1, q2, G1, G2, sigmak, eps, wt, k)
        if a > 0.0:
            dbar = 1.0 / (3.0 * k.c * (z + k.sigma_b))
            # vertex of a*w^2 + b*w + const; only straddling grid points matter
            b = (dot1 + dot2) - wt.xi2 * dbar - 2.0 * eps * Dk
            jc = (-b / (2.0 * a) - w_grid[0]) / dw
            j0 = np.floor(np.clip(jc, -1.0, float(nW))).astype(np.int64)
            offsets = (-1, 0, 1, 2)
        else:
            j0 = np.zeros(m, dtype=np.int64)
            offsets = (0, nW - 1)

        row_v = None
        row_w = None
        for off in offsets:
            j = np.clip(j0 + off, 0, nW - 1)
            w_cand = w_grid[j]
            v = zp + _w_part(w_cand, z, dot1, dot2, Dk, eps, wt, k)
            if row_v is None:
                row_v, row_w = v, w_cand
            else:
                better = v < row_v  # candidates ascend in w, so ties keep smaller w
                row_v = np.where(better, v, row_v)
                row_w = np.where(better, w_cand, row_w)

        better = row_v < best_v  # z ascends, so ties keep smaller z
        best_v = np.where(better, row_v, best_v)
        best_w = np.where(better, row_w, best_w)
        best_z = np.where(better, z, best_z)

    # previous controls as injected candidates: guarantees a no-move fallback
    v_inj = _z_part(sigmak, u1, u2, q1, q2, G1, G2, sigmak, eps, wt, k) + _w_part(
        Dk, sigmak, dot1, dot2, Dk, eps, wt, k
    )
    lex_smaller = (sigmak < best_z) | ((sigmak == best_z) & (Dk < best_w))
    take = (v_inj < best_v) | ((v_inj == best_v) & lex_smaller)
    best_w = np.where(take, Dk, best_w)
    best_z = np.where(take, sigmak, best_z)
    return best_w, best_z


def minimize_node(
    node: NodeContext, eps: float, sg: SearchGrid, wt: RegularizationWeights, k: PhysicalConstants
) -> tuple[float, float]:
    """Candidate pair minimizing the augmented Hamiltonian at one node."""
    dot1, dot2 = node.grad_dots()
    args = [
        np.array([v], dtype=float)
        for v in (node.u1, node.u2, node.q1, node.q2, dot1, dot2, node.G1, node.G2, node.Dk, node.sigmak)
    ]
    w, z = _sweep(*args, eps, sg, wt, k)
    return float(w[0]), float(z[0])


def minimize_field(
    u1: ScalarField,
    u2: ScalarField,
    q1: ScalarField,
    q2: ScalarField,
    Dk: ScalarField,
    sigmak: ScalarField,
    G1: ScalarField,
    G2: ScalarField,
    eps: float,
    sg: SearchGrid,
    wt: RegularizationWeights,
    k: PhysicalConstants,
) -> tuple[ScalarField, ScalarField]:
    """Apply the per-node minimizer at every node (boundary included)."""
    g = conformable(u1, u2, q1, q2, Dk, sigmak, G1, G2)
    gu1x, gu1y = nodal_gradient(u1)
    gu2x, gu2y = nodal_gradient(u2)
    gq1x, gq1y = nodal_gradient(q1)
    gq2x, gq2y = nodal_gradient(q2)
    dot1 = gu1x.values * gq1x.values + gu1y.values * gq1y.values
    dot2 = gu2x.values * gq2x.values + gu2y.values * gq2y.values

    flat = lambda f: f.values.ravel()
    w, z = _sweep(
        flat(u1),
        flat(u2),
        flat(q1),
        flat(q2),
        dot1.ravel(),
        dot2.ravel(),
        flat(G1),
        flat(G2),
        flat(Dk),
        flat(sigmak),
        eps,
        sg,
        wt,
        k,
    )
    shape = (g.npoints, g.npoints)
    return ScalarField(g, w.reshape(shape)), ScalarField(g, z.reshape(shape))
