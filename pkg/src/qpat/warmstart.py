"""Data-driven starting guess for the SQH iteration.

Strong absorbers cast photon shadows: deep inside an organ the data carry
almost no information about sigma, and pointwise schemes settle on hollow
shell impostors that fit the data while missing the interior.  This warm
start resolves the ambiguity with the same structural assumption the
regularizers encode, that absorbers are filled regions.

Phase A refines the multiplicative estimate sigma_a = G / (Gamma * u) on
nodes with trustworthy photon density (illuminations weighted by u^2);
shadowed nodes keep their previous value, so the phase settles on the
stable hollow branch.  Semi-transparent absorbers come out solid and need
nothing further; strong absorbers come out as shells around undetected
shadow holes.  Phase B freezes the geometry of those holes together with
a wide surrounding ring of detected nodes per hole.  Phase C raises each
hole to the crest level of its own ring (75th percentile of trusted ring
estimates) and re-solves; darkened interiors pull the ring estimates up,
so the levels ratchet toward the true contrast, with Picard damping to
keep the shadow feedback from overshooting.  D follows the Kubelka-Munk
target inside detected absorbers and stays at the configured background
value elsewhere.

The result is a feasible (D0, sigma0) pair lying in the basin of the
correct SQH fixed point; the SQH run then polishes it under the full
functional.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from qpat.grid import ScalarField
from qpat.objective import ProblemSpec, kubelka_target, solve_states

__all__ = ["warm_start"]

_BOX3 = np.ones((3, 3), dtype=bool)


def warm_start(
    spec: ProblemSpec,
    data: tuple[ScalarField, ScalarField],
    D_bg: float,
    rounds_estimate: int = 4,
    rounds_fill: int = 6,
    trust_frac: float = 0.05,
    detect_sigma: float = 0.06,
    denoise_frac: float = 0.05,
    ring_width: int = 4,
    tol: float = 1e-10,
) -> tuple[ScalarField, ScalarField]:
    """Initial (D0, sigma0) estimated from the interior data; box feasible."""
    g = spec.grid
    const = spec.constants
    box = spec.box
    G1, G2 = data[0].values, data[1].values
    D_bg = float(np.clip(D_bg, box.D_l, box.D_r))

    sigma = ScalarField.constant(g, 0.0)
    D = ScalarField.constant(g, D_bg)

    def estimate(D_cur, sigma_cur):
        u1, u2 = solve_states(spec, D_cur, sigma_cur, tol)
        u1v = np.maximum(u1.values, 1e-12)
        u2v = np.maximum(u2.values, 1e-12)
        w1, w2 = u1v**2, u2v**2
        sa = (w1 * (G1 / u1v) + w2 * (G2 / u2v)) / ((w1 + w2) * const.Gamma)
        trusted = np.maximum(u1v, u2v) > trust_frac * max(u1v.max(), u2v.max())
        sv = np.where(trusted, sa - const.sigma_b, sigma_cur.values)
        return np.clip(sv, box.sigma_l, box.sigma_r), trusted

    # phase A: hollow-branch estimate, stable but missing organ interiors
    for _ in range(rounds_estimate):
        sv, trusted = estimate(D, sigma)
        sigma = ScalarField(g, sv)

    # phase B: shadow holes enclosed by detected absorbers, plus a wide
    # ring of detected nodes per hole (spanning the rim crest); frozen
    threshold = max(detect_sigma, 0.1 * float(sigma.values.max()))
    detected = sigma.values > threshold
    closed = ndimage.binary_closing(detected, structure=_BOX3, iterations=2)
    organ = ndimage.binary_fill_holes(closed) | detected
    holes, count = ndimage.label(organ & ~detected)
    rings = []
    for idx in range(1, count + 1):
        ring = ndimage.binary_dilation(holes == idx, structure=_BOX3, iterations=ring_width) & detected
        rings.append(ring if ring.any() else detected)

    # phase C: ratchet each hole to its ring crest level and re-solve
    levels = np.zeros(count)
    for r in range(rounds_fill if count else 0):
        sv, trusted = estimate(D, sigma)
        for idx, ring in enumerate(rings):
            src = ring & trusted
            if not src.any():
                src = ring
            lvl = float(np.quantile(sv[src], 0.75))
            levels[idx] = lvl if r == 0 else 0.5 * levels[idx] + 0.5 * lvl
            hole = holes == idx + 1
            sv[hole] = np.maximum(sv[hole], levels[idx])
        sv = np.clip(sv, box.sigma_l, box.sigma_r)
        sigma = ScalarField(g, sv)
        dbar = kubelka_target(sigma, const).values
        D = ScalarField(g, np.where(organ, np.clip(dbar, box.D_l, box.D_r), D_bg))

    # sparsity-flavored cleanup: tiny background wiggles go to exactly zero
    sv = sigma.values.copy()
    small = np.abs(sv) < denoise_frac * max(float(sv.max()), 1e-12)
    sv[small & ~organ] = 0.0
    return D, ScalarField(g, np.clip(sv, box.sigma_l, box.sigma_r))
