"""
AdjointBundle 輸出成 CSV：depth, lam_0..lam_{N-1}, residual, lam_t
"""

from typing import Optional, Sequence

from ..core import AdjointBundle
from ..recorder import write_csv


def adjoint_bundle_records(bundle: AdjointBundle, residual: Optional[Sequence[float]] = None) -> list:
    records = []
    for i, depth in enumerate(bundle.depths):
        row = {"depth": float(depth)}
        for k, value in enumerate(bundle.lam[i]):
            row[f"lam_{k}"] = float(value)
        row["residual"] = float(residual[i]) if residual is not None else float("nan")
        row["lam_t"] = float(bundle.lam_t[i]) if bundle.lam_t is not None else float("nan")
        records.append(row)
    return records


def save_adjoint_bundle_csv(path: str, bundle: AdjointBundle, residual: Optional[Sequence[float]] = None) -> None:
    write_csv(path, adjoint_bundle_records(bundle, residual))
