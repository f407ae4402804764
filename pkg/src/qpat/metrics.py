"""Figures of merit for reconstructions: RMSE percentage and PSNR.

Both use the unweighted nodewise Euclidean norm.  The PSNR here follows
the benchmark's own formula, 10*log10(max(f_ex) / ||f_rec - f_ex||_2^2),
which is not the textbook definition; the conventional
10*log10(max(f_ex)^2 / MSE) is reported alongside it as psnr_std.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qpat.grid import ScalarField, conformable, l2_norm_vector

__all__ = ["MeritReport", "rmse_pct", "psnr", "psnr_std", "report", "merit_csv_header", "merit_csv_row", "format_table"]


def rmse_pct(f_rec: ScalarField, f_ex: ScalarField) -> float:
    """100 * ||f_rec - f_ex||_2 / ||f_ex||_2 over all nodes."""
    conformable(f_rec, f_ex)
    denom = l2_norm_vector(f_ex)
    if denom == 0.0:
        raise ValueError("exact field is identically zero; RMSE% undefined")
    return 100.0 * l2_norm_vector(f_rec.with_values(f_rec.values - f_ex.values)) / denom


def psnr(f_rec: ScalarField, f_ex: ScalarField) -> float:
    """Benchmark PSNR: 10*log10(max(f_ex) / ||f_rec - f_ex||_2^2); inf on exact match."""
    conformable(f_rec, f_ex)
    peak = float(np.max(f_ex.values))
    if peak <= 0.0:
        raise ValueError("PSNR needs max(f_ex) > 0")
    err2 = l2_norm_vector(f_rec.with_values(f_rec.values - f_ex.values)) ** 2
    if err2 == 0.0:
        return math.inf
    return 10.0 * math.log10(peak / err2)


def psnr_std(f_rec: ScalarField, f_ex: ScalarField) -> float:
    """Conventional PSNR: 10*log10(max(f_ex)^2 / MSE)."""
    conformable(f_rec, f_ex)
    peak = float(np.max(f_ex.values))
    if peak <= 0.0:
        raise ValueError("PSNR needs max(f_ex) > 0")
    mse = float(np.mean((f_rec.values - f_ex.values) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak**2 / mse)


@dataclass(frozen=True)
class MeritReport:
    case_id: int
    noise: float
    rmse_pct_D: float
    rmse_pct_sigma_a: float
    psnr_D: float
    psnr_sigma_a: float
    psnr_std_D: float
    psnr_std_sigma_a: float


def report(
    case_id: int,
    noise: float,
    D_rec: ScalarField,
    sigma_a_rec: ScalarField,
    D_ex: ScalarField,
    sigma_a_ex: ScalarField,
) -> MeritReport:
    return MeritReport(
        case_id=case_id,
        noise=noise,
        rmse_pct_D=rmse_pct(D_rec, D_ex),
        rmse_pct_sigma_a=rmse_pct(sigma_a_rec, sigma_a_ex),
        psnr_D=psnr(D_rec, D_ex),
        psnr_sigma_a=psnr(sigma_a_rec, sigma_a_ex),
        psnr_std_D=psnr_std(D_rec, D_ex),
        psnr_std_sigma_a=psnr_std(sigma_a_rec, sigma_a_ex),
    )


def merit_csv_header() -> str:
    return "case,noise,rmse_pct_D,rmse_pct_sigma_a,psnr_D,psnr_sigma_a,psnr_std_D,psnr_std_sigma_a"


def merit_csv_row(r: MeritReport) -> str:
    nums = (r.rmse_pct_D, r.rmse_pct_sigma_a, r.psnr_D, r.psnr_sigma_a, r.psnr_std_D, r.psnr_std_sigma_a)
    return f"{r.case_id},{r.noise:.17g}," + ",".join(f"{v:.17g}" for v in nums)


def format_table(reports) -> str:
    """Human-readable table in the benchmark's column order."""
    lines = [f"{'case':>4} {'noise':>6} {'RMSE% D':>9} {'RMSE% sa':>9} {'PSNR D':>8} {'PSNR sa':>8}"]
    for r in reports:
        lines.append(
            f"{r.case_id:>4} {r.noise:>6.2f} {r.rmse_pct_D:>9.2f} {r.rmse_pct_sigma_a:>9.2f} "
            f"{r.psnr_D:>8.2f} {r.psnr_sigma_a:>8.2f}"
        )
    return "\n".join(lines)
