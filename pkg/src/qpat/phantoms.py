"""The five benchmark phantom pairs (D, sigma) and their backgrounds.

Shapes are painted onto constant background fields in list order (later
shapes overwrite earlier ones); a node belongs to a shape when its
coordinates satisfy the closed-region inequality.  Geometry that the
benchmark leaves free (heart/lung ellipse placement, tumor disks) is
parameterized with recorded defaults.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Union

import numpy as np

from qpat.grid import Grid2D, ScalarField, conformable

__all__ = [
    "Disk",
    "Ellipse",
    "EllipticalAnnulus",
    "PhantomSpec",
    "case_spec",
    "build_phantom",
    "sigma_a_of",
    "CASE_SIGMA_B",
    "CASE_BACKGROUND_D",
]


def _ellipse_mask(X, Y, cx, cy, a, b, angle):
    ca, sa = math.cos(angle), math.sin(angle)
    xr = ca * (X - cx) + sa * (Y - cy)
    yr = -sa * (X - cx) + ca * (Y - cy)
    return (xr / a) ** 2 + (yr / b) ** 2 <= 1.0


@dataclass(frozen=True)
class Disk:
    cx: float
    cy: float
    r: float
    sigma: float
    D: float

    def contains(self, X, Y):
        return (X - self.cx) ** 2 + (Y - self.cy) ** 2 <= self.r**2


@dataclass(frozen=True)
class Ellipse:
    cx: float
    cy: float
    a: float
    b: float
    angle: float  # radians, counterclockwise
    sigma: float
    D: float

    def contains(self, X, Y):
        return _ellipse_mask(X, Y, self.cx, self.cy, self.a, self.b, self.angle)


@dataclass(frozen=True)
class EllipticalAnnulus:
    """Region inside the outer ellipse but outside the inner one."""

    outer: tuple[float, float, float, float, float]  # cx, cy, a, b, angle
    inner: tuple[float, float, float, float, float]
    sigma: float
    D: float

    def contains(self, X, Y):
        return _ellipse_mask(X, Y, *self.outer) & ~_ellipse_mask(X, Y, *self.inner)


Shape = Union[Disk, Ellipse, EllipticalAnnulus]

CASE_SIGMA_B = {1: 0.16, 2: 0.03, 3: 0.03, 4: 0.5, 5: 0.5}
CASE_BACKGROUND_D = {1: 0.02, 2: 0.1, 3: 0.1, 4: 0.006, 5: 0.006}

# free geometry of the heart-lung benchmark, recorded here and in sidecars
LUNG_CENTERS = ((-0.35, 0.05), (0.35, 0.05))
LUNG_SEMI_AXES = (0.18, 0.35)
HEART_CENTER = (0.0, -0.15)
HEART_RADIUS = 0.18

# free geometry of the tumor disks in case 5
TUMOR_DISKS = ((0.45, 0.45, 0.08), (-0.45, -0.45, 0.08))

# classic head-phantom ellipse table (a, b, cx, cy, angle in degrees),
# intensities replaced by the benchmark's sigma / D values
_HEAD_OUTER = (0.0, 0.0, 0.69, 0.92, 0.0)
_HEAD_INNER = (0.0, -0.0184, 0.6624, 0.874, 0.0)


def _head_shapes() -> list[Shape]:
    deg = math.pi / 180.0
    shapes: list[Shape] = [
        EllipticalAnnulus(outer=_HEAD_OUTER, inner=_HEAD_INNER, sigma=1.0, D=0.002),
        Ellipse(0.22, 0.0, 0.11, 0.31, -18.0 * deg, sigma=-0.3, D=0.02),
        Ellipse(-0.22, 0.0, 0.16, 0.41, 18.0 * deg, sigma=-0.3, D=0.02),
        Ellipse(0.0, 0.35, 0.21, 0.25, 0.0, sigma=0.5, D=0.003),
        Disk(0.0, 0.1, 0.046, sigma=0.5, D=0.003),
        Disk(0.0, -0.1, 0.046, sigma=0.5, D=0.003),
        Ellipse(-0.08, -0.605, 0.046, 0.023, 0.0, sigma=0.5, D=0.003),
        Ellipse(0.0, -0.606, 0.023, 0.023, 0.0, sigma=0.5, D=0.003),
        Ellipse(0.06, -0.605, 0.023, 0.046, 0.0, sigma=0.5, D=0.003),
    ]
    return shapes


def _heart_lung_shapes(d_left: float, d_right: float, d_heart: float) -> list[Shape]:
    (lx, ly), (rx, ry) = LUNG_CENTERS
    ax, ay = LUNG_SEMI_AXES
    return [
        Ellipse(lx, ly, ax, ay, 0.0, sigma=1.0, D=d_left),
        Ellipse(rx, ry, ax, ay, 0.0, sigma=1.0, D=d_right),
        Disk(*HEART_CENTER, HEART_RADIUS, sigma=0.5, D=d_heart),
    ]


@dataclass(frozen=True)
class PhantomSpec:
    case_id: int
    grid: Grid2D
    shapes: tuple[Shape, ...]
    background_D: float
    sigma_b: float


def case_spec(case_id: int, grid: Grid2D) -> PhantomSpec:
    """Benchmark phantom description for cases 1 to 5."""
    if case_id == 1:
        shapes = [Disk(0.25, 0.25, 0.25, sigma=1.0, D=0.003)]
    elif case_id == 2:
        shapes = _heart_lung_shapes(d_left=0.003, d_right=0.003, d_heart=0.006)
    elif case_id == 3:
        shapes = _heart_lung_shapes(d_left=0.003, d_right=0.0006, d_heart=0.009)
    elif case_id == 4:
        shapes = _head_shapes()
    elif case_id == 5:
        shapes = _head_shapes()
        shapes.append(Disk(*TUMOR_DISKS[0][:2], TUMOR_DISKS[0][2], sigma=1.5, D=0.001))
        shapes.append(Disk(*TUMOR_DISKS[1][:2], TUMOR_DISKS[1][2], sigma=0.2, D=0.004))
    else:
        raise ValueError(f"unknown case id {case_id!r} (expected 1..5)")
    return PhantomSpec(
        case_id=case_id,
        grid=grid,
        shapes=tuple(shapes),
        background_D=CASE_BACKGROUND_D[case_id],
        sigma_b=CASE_SIGMA_B[case_id],
    )


def build_phantom(spec: PhantomSpec) -> tuple[ScalarField, ScalarField, float]:
    """Exact (D, sigma) fields by nodewise indicator evaluation, plus sigma_b."""
    X, Y = spec.grid.meshgrid()
    D = np.full_like(X, spec.background_D)
    sigma = np.zeros_like(X)
    for shape in spec.shapes:
        mask = shape.contains(X, Y)
        D[mask] = shape.D
        sigma[mask] = shape.sigma
    return ScalarField(spec.grid, D), ScalarField(spec.grid, sigma), spec.sigma_b


def sigma_a_of(sigma: ScalarField, sigma_b: float) -> ScalarField:
    """Total absorption sigma_a = sigma + sigma_b."""
    return sigma.with_values(sigma.values + sigma_b)


def shapes_as_json(spec: PhantomSpec) -> list[dict]:
    """Shape list for the run sidecar, with a type tag per entry."""
    out = []
    for s in spec.shapes:
        d = asdict(s)
        d["type"] = type(s).__name__
        out.append(d)
    return out
