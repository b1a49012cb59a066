import threading
from typing import Dict, List, Optional
import csv
import json
import logging
import os

import numpy as np
import pandas as pd

logger = logging.getLogger("InImNet")

HISTORY_FIELDS = ["epoch", "depth", "loss", "residual", "seconds"]


def format_cell(value) -> str:
    """數值以最短 round-trip 十進位表示 (repr(float))"""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def _ensure_parent(path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def write_csv(path: str, records: List[Dict], fieldnames: Optional[List[str]] = None) -> None:
    """
    把 list of dict 寫成 CSV

    Raises:
        OSError: 寫檔失敗時
    """
    if fieldnames is None:
        if not records:
            raise ValueError(f"no records to write to {path}")
        fieldnames = list(records[0].keys())
    _ensure_parent(path)
    with open(path, "w", newline="", encoding="utf-8") as csvfile:
        writer = csv.DictWriter(csvfile, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow({key: format_cell(record.get(key)) for key in fieldnames})
    logger.debug(f"Wrote {len(records)} rows to {path}")


def write_json(path: str, payload: Dict) -> None:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")
    logger.debug(f"Wrote {path}")


def read_csv(path: str) -> pd.DataFrame:
    """以 round-trip 精度讀回 CSV"""
    return pd.read_csv(path, float_precision="round_trip")


def reemit_csv(src: str, dst: str) -> None:
    """讀回再寫出；對本模組寫出的檔案應得到 byte-identical 的結果"""
    frame = read_csv(src)
    records = frame.to_dict("records")
    write_csv(dst, records, fieldnames=list(frame.columns))


class Recorder:
    """
    訓練歷程記錄器

    每個 epoch 每個深度一筆 (epoch, depth, loss, residual, seconds)，
    worker 執行緒可同時寫入，以 lock 保護。
    """

    def __init__(self, lock: Optional[threading.Lock] = None, csv_path: str = "out/history.csv"):
        self.lock = lock or threading.Lock()
        self.csv_path = csv_path

        # 每筆紀錄格式：
        # {
        #     "epoch": int,       # 0 為訓練前
        #     "depth": float,     # p_i
        #     "loss": float,      # 該深度的平均成本
        #     "residual": float,  # p_min 的 optimality residual (其他深度為 nan)
        #     "seconds": float    # 該 epoch 花費的時間
        # }
        self.records: List[Dict] = []

        # 每個 epoch 在 p_min 的 loss，用於快速統計
        self.epoch_loss: Dict[int, float] = {}

    def record_epoch(self, epoch: int, depths, losses, residual: float, seconds: float, p_min_loss: float) -> None:
        rows = []
        for i, (depth, loss) in enumerate(zip(depths, losses)):
            rows.append({
                "epoch": int(epoch),
                "depth": float(depth),
                "loss": float(loss),
                "residual": float(residual) if i == 0 else float("nan"),
                "seconds": float(seconds),
            })
        with self.lock:
            self.records.extend(rows)
            self.epoch_loss[int(epoch)] = float(p_min_loss)

    def get_epoch_losses(self) -> Dict[int, float]:
        with self.lock:
            return dict(self.epoch_loss)

    def get_final_statistics(self) -> Dict:
        with self.lock:
            if not self.epoch_loss:
                return {"epochs": 0}
            epochs = sorted(self.epoch_loss)
            first = self.epoch_loss[epochs[0]]
            last = self.epoch_loss[epochs[-1]]
            return {
                "epochs": epochs[-1],
                "initial_loss": first,
                "final_loss": last,
                "best_loss": min(self.epoch_loss.values()),
                "improvement": (first / last) if last > 0 else float("inf"),
            }

    def save_csv(self, path: Optional[str] = None) -> None:
        path = path or self.csv_path
        with self.lock:
            records = list(self.records)
        if not records:
            logger.error("No history records to save.")
            return
        write_csv(path, records, fieldnames=HISTORY_FIELDS)
        logger.info(f"History saved to {path} ({len(records)} rows)")
