"""
StateBundle 輸出成 CSV：depth, z_0..z_{N-1}, loss
"""

from typing import Optional, Sequence

from ..core import StateBundle
from ..recorder import write_csv


def state_bundle_records(bundle: StateBundle, losses: Optional[Sequence[float]] = None) -> list:
    records = []
    for i, depth in enumerate(bundle.depths):
        row = {"depth": float(depth)}
        for k, value in enumerate(bundle.outputs[i]):
            row[f"z_{k}"] = float(value)
        row["loss"] = float(losses[i]) if losses is not None else float("nan")
        records.append(row)
    return records


def save_state_bundle_csv(path: str, bundle: StateBundle, losses: Optional[Sequence[float]] = None) -> None:
    write_csv(path, state_bundle_records(bundle, losses))
