"""Inverse-crime-free synthetic interior data.

The forward model is solved on a fine mesh (4x the reconstruction mesh by
default), the optical energy map is formed there, multiplicative Gaussian
noise G = (1 + eta*Z) * H is applied nodewise, and the result is restricted
onto the reconstruction mesh by injection.

Normal deviates come from a pinned counter-based recipe: the raw Philox
4x64 stream feeding an explicit Box-Muller transform, so realizations are
reproducible bit for bit across platforms and are consumed positionally by
node index.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from qpat.grid import Grid2D, ScalarField, restrict
from qpat import elliptic
from qpat.objective import PhysicalConstants, optical_energy

__all__ = [
    "Illumination",
    "NoiseSpec",
    "standard_normal_stream",
    "generate",
    "default_illuminations",
]


@dataclass(frozen=True)
class Illumination:
    index: int  # 1 or 2
    g: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __post_init__(self):
        if self.index not in (1, 2):
            raise ValueError("illumination index must be 1 or 2")


def default_illuminations() -> tuple[Illumination, Illumination]:
    """The benchmark boundary radiation pair g1 = e^x, g2 = e^y."""
    return (
        Illumination(1, lambda x, y: np.exp(x)),
        Illumination(2, lambda x, y: np.exp(y)),
    )


@dataclass(frozen=True)
class NoiseSpec:
    level: float = 0.0
    seed: int = 0
    apply_on: str = "fine"  # or "coarse": noise after restriction

    def __post_init__(self):
        if self.level < 0.0:
            raise ValueError("noise level must be >= 0")
        if self.level >= 1.0:
            warnings.warn(f"noise level {self.level} >= 1 makes negative data likely", stacklevel=2)
        if self.apply_on not in ("fine", "coarse"):
            raise ValueError("apply_on must be 'fine' or 'coarse'")


def standard_normal_stream(seed, count: int) -> np.ndarray:
    """Reproducible i.i.d. N(0,1) draws: Philox4x64 raws through Box-Muller.

    seed may be an int or a small sequence of ints forming the Philox key.
    """
    key = np.zeros(2, dtype=np.uint64)
    seq = [seed] if np.isscalar(seed) else list(seed)
    if len(seq) > 2:
        raise ValueError("at most two 64-bit words of key")
    for i, s in enumerate(seq):
        key[i] = np.uint64(int(s) & 0xFFFFFFFFFFFFFFFF)
    npairs = (count + 1) // 2
    raw = np.random.Philox(key=key).random_raw(2 * npairs)
    u = (raw >> np.uint64(11)) * np.float64(2.0**-53)  # uniform in [0, 1)
    u1, u2 = u[0::2], u[1::2]
    radius = np.sqrt(-2.0 * np.log1p(-u1))  # log(1-u1), safe because 1-u1 > 0
    angle = 2.0 * np.pi * u2
    out = np.empty(2 * npairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:count]


def _noisy(H: ScalarField, noise: NoiseSpec, illum_index: int) -> ScalarField:
    if noise.level == 0.0:
        return H
    m = H.grid.npoints
    z = standard_normal_stream((noise.seed, illum_index), m * m).reshape(m, m)
    return H.with_values((1.0 + noise.level * z) * H.values)


def generate(
    D: ScalarField,
    sigma: ScalarField,
    illum: Illumination,
    coarse_n: int,
    noise: NoiseSpec,
    const: PhysicalConstants,
    tol: float = elliptic.DEFAULT_TOL,
) -> ScalarField:
    """Measured-data surrogate G on the coarse grid for one illumination.

    D and sigma are the exact phantom fields on the fine grid; its cell
    count must be an integer multiple of coarse_n.
    """
    fine = D.grid
    if fine.n % coarse_n != 0:
        raise ValueError(f"fine n={fine.n} not a multiple of coarse n={coarse_n}")
    coarse = Grid2D(fine.a, fine.b, coarse_n)
    sa = sigma.with_values(sigma.values + const.sigma_b)
    u = elliptic.solve(elliptic.EllipticProblem(fine, D, sa, None, illum.g), tol=tol)
    H = optical_energy(sigma, u, const)
    if noise.apply_on == "fine":
        return restrict(_noisy(H, noise, illum.index), coarse)
    return _noisy(restrict(H, coarse), noise, illum.index)
