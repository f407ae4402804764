"""Quantitative photoacoustic tomography reconstruction toolkit.

Recovers the optical diffusion coefficient D and the absorption deviation
sigma from interior pressure data under two boundary illuminations, by
minimizing a Tikhonov-type functional with a Kubelka-Munk diffusion prior
via a sequential quadratic Hamiltonian (SQH) iteration.
"""

from qpat.grid import (
    Grid2D,
    ScalarField,
    l1_norm_weighted,
    l2_norm_vector,
    l2_norm_weighted,
    nodal_gradient,
    read_qgrid,
    restrict,
    write_qgrid,
)

__version__ = "0.1.0"
