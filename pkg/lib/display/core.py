import logging
import math
from typing import Dict, Optional

import pandas as pd
from colorama import Fore, Style

from ..recorder import Recorder, read_csv
from ..verify import SuiteReport

logger = logging.getLogger("InImNet")


def format_loss(value: Optional[float]) -> str:
    """loss 以固定寬度科學記號顯示；None / NaN 顯示為 '-'"""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "-"
    return f"{value:.4e}"


class Display:
    def __init__(self, recorder: Optional[Recorder] = None):
        self.recorder = recorder

    def print_final_statistics(self):
        """打印訓練結束時的統計報告"""
        if self.recorder is None:
            return
        stats = self.recorder.get_final_statistics()

        print("\n" + "=" * 60)
        print(f"{'FINAL TRAINING REPORT':^60}")
        print("=" * 60)
        if "final_loss" not in stats:
            print("No epochs recorded.")
            print("=" * 60)
            return
        print(f"{'Epochs':<24} {stats['epochs']}")
        print(f"{'Initial loss (p_min)':<24} {format_loss(stats['initial_loss'])}")
        print(f"{'Final loss (p_min)':<24} {format_loss(stats['final_loss'])}")
        print(f"{'Best loss (p_min)':<24} {format_loss(stats['best_loss'])}")
        print(f"{'Improvement':<24} {stats['improvement']:.2f}x")
        print("=" * 60)

    def print_depth_table(self, csv_path: str, epoch: Optional[int] = None):
        """從 depth_profile.csv 印出每個深度的 loss (預設最後一個 epoch)"""
        try:
            df = read_csv(csv_path)
        except Exception as e:
            logger.error(f"Failed to read CSV: {e}")
            return

        required_cols = {"epoch", "depth", "loss"}
        if not required_cols.issubset(df.columns):
            logger.error("CSV file missing required columns.")
            return

        epoch = int(df["epoch"].max()) if epoch is None else epoch
        table = df[df["epoch"] == epoch].sort_values("depth")
        print(f"\n{'Depth':>10} {'Loss':>14}   (epoch {epoch})")
        print("-" * 40)
        for depth, loss in zip(table["depth"], table["loss"]):
            print(f"{depth:>10.4g} {format_loss(float(loss)):>14}")

    def print_summary(self, summary: Dict):
        """run_task 回傳的 summary"""
        print("\n" + "=" * 60)
        print(f"{'EXPERIMENT SUMMARY: ' + str(summary.get('task', '?')).upper():^60}")
        print("=" * 60)
        print(f"{'Epochs':<24} {summary['epochs']}{' (stopped)' if summary.get('stopped') else ''}")
        print(f"{'Loss':<24} {format_loss(summary['initial_loss'])} -> {format_loss(summary['final_loss'])}")
        print(f"{'Residual':<24} {format_loss(summary.get('final_residual'))}")
        print(f"{'Runtime':<24} {summary['runtime_seconds']:.2f} seconds")
        extrapolation = summary.get("extrapolation")
        if extrapolation:
            frame = pd.DataFrame(extrapolation)
            print("-" * 60)
            print("Extrapolation (depths outside the trained grid):")
            for depth, loss in zip(frame["depth"], frame["loss"]):
                print(f"  p = {depth:>8.4g}   loss = {format_loss(float(loss))}")
        print("=" * 60)

    def print_verify_report(self, report: SuiteReport):
        """每項檢查一行：量測值、門檻與 PASS / FAIL"""
        print("\n" + "=" * 80)
        print(f"{'VERIFY SUITE: ' + report.suite:^80}")
        print("=" * 80)
        for check in report.checks:
            op = "<=" if check.kind == "at_most" else ">"
            mark = f"{Fore.GREEN}PASS{Style.RESET_ALL}" if check.passed else f"{Fore.RED}FAIL{Style.RESET_ALL}"
            print(f"[{mark}] {check.name:<56} {check.error:.3e} {op} {check.tol:.1e}")
        print("-" * 80)
        total = len(report.checks)
        passed = total - len(report.failures)
        color = Fore.GREEN if report.passed else Fore.RED
        print(f"{color}{passed}/{total} checks passed{Style.RESET_ALL} in {report.seconds:.2f} seconds")
        print("=" * 80)
