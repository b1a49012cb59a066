#!/usr/bin/env python3
"""
命令列與設定檔測試

測試項目：
1. verify 的結束碼
2. 設定檔解析錯誤
3. train / experiment 的錯誤處理
4. experiment 輸出檔案與可重現性
5. 拋體實驗多個 seed 的 loss 下降
6. 旋轉向量實驗的 loss、外插與可重現性
"""

import json
import math
import os
import signal
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from lib.config_module import parse_config, parse_config_dict
from lib.core import ConfigParseError
from lib.experiments import run_experiment
from lib.recorder import Recorder
from main import main

ROOT = os.path.dirname(os.path.abspath(__file__))
OUTPUT_FILES = ["history.csv", "depth_profile.csv", "checkpoint.json", "bundle.csv", "adjoint.csv",
                "extrapolation.csv", "summary.json"]


def _run(argv) -> int:
    """main() 會安裝 SIGINT handler，結束後還原"""
    previous = signal.getsignal(signal.SIGINT)
    try:
        return main(argv)
    finally:
        signal.signal(signal.SIGINT, previous)


def test_verify_exit_codes():
    print("=" * 60)
    print("測試 1: verify 結束碼")
    print("=" * 60)

    assert _run(["verify", "bogus"]) == 2
    print("  ✓ 未知 suite -> 2")

    assert _run(["verify", "theorem3", "--log-level", "WARNING"]) == 0
    print("  ✓ theorem3 通過 -> 0")

    assert _run(["verify", "theorem1", "--tol", "1e-2", "--log-level", "WARNING"]) == 0
    print("  ✓ theorem1 --tol 1e-2 -> 0")

    for suite in ("imbedding_rule", "gradients", "convergence"):
        assert _run(["verify", suite, "--log-level", "WARNING"]) == 0, suite
        print(f"  ✓ {suite} 通過 -> 0")

    # 離散化誤差約 1e-4，不可能低於 1e-12
    assert _run(["verify", "theorem2", "--tol", "1e-12", "--log-level", "WARNING"]) == 1
    print("  ✓ theorem2 --tol 1e-12 -> 1")

    assert _run([]) == 2
    assert _run(["verify"]) == 2
    assert _run(["--help"]) == 0
    print("  ✓ 參數錯誤 -> 2，--help -> 0\n")


def test_config_parsing():
    print("=" * 60)
    print("測試 2: 設定檔解析")
    print("=" * 60)

    cfg = parse_config(os.path.join(ROOT, "config", "projectile.yaml"))
    assert cfg.task.name == "projectile"
    assert cfg.train.mode == "adjoint_update"
    assert cfg.train.learning_rate == 1e-3
    print("  ✓ config/projectile.yaml")

    cfg = parse_config(os.path.join(ROOT, "config", "rotvec.yaml"))
    assert cfg.train.lr_schedule.kind == "exp_decay"
    assert cfg.train.lr_schedule.step_epochs == 30
    print("  ✓ config/rotvec.yaml")

    cfg = parse_config_dict({"task": {"name": "rotvec", "frames": 8}, "train": {"learning_rate": "1e-2"}})
    assert cfg.task.frames == 8 and cfg.train.learning_rate == 0.01
    print("  ✓ 字串數值會被轉換")

    cases = [
        ("not a mapping", []),
        ("unknown task", {"task": {"name": "cifar"}, "train": {}}),
        ("unknown key", {"task": {"name": "projectile", "colour": 1}, "train": {}}),
        ("bad value", {"task": {"name": "projectile"}, "train": {"epochs": "many"}}),
        ("missing train", {"task": {"name": "projectile"}}),
        ("sharing", {"task": {"name": "projectile"},
                     "train": {"mode": "adjoint_update", "parameter_sharing": "per_layer"}}),
        ("schedule", {"task": {"name": "projectile"}, "train": {"lr_schedule": "cosine"}}),
    ]
    for label, raw in cases:
        try:
            parse_config_dict(raw)
            assert False, f"{label} 應該失敗"
        except ConfigParseError:
            print(f"  ✓ {label}")

    try:
        parse_config_dict({"task": {"name": "projectile", "samples": 0}, "train": {"epochs": 0}})
        assert False
    except ConfigParseError as e:
        assert "samples" in str(e) and "epochs" in str(e)
        print("  ✓ 所有問題一次回報\n")


def test_command_errors():
    print("=" * 60)
    print("測試 3: train / experiment 錯誤處理")
    print("=" * 60)

    with tempfile.TemporaryDirectory() as tmp:
        missing = os.path.join(tmp, "nope.yaml")
        assert _run(["train", "-c", missing, "-o", tmp]) == 3
        print("  ✓ 找不到設定檔 -> 3")

        broken = os.path.join(tmp, "broken.yaml")
        with open(broken, "w", encoding="utf-8") as f:
            f.write("task: [unclosed\n")
        assert _run(["train", "-c", broken, "-o", tmp]) == 2
        print("  ✓ YAML 格式錯誤 -> 2")

        invalid = os.path.join(tmp, "invalid.yaml")
        with open(invalid, "w", encoding="utf-8") as f:
            f.write("task:\n  name: projectile\ntrain:\n  optimizer: lbfgs\n")
        assert _run(["train", "-c", invalid, "-o", tmp]) == 2
        print("  ✓ 設定值不合法 -> 2")

    assert _run(["experiment", "unknown"]) == 2
    print("  ✓ 未知 experiment -> 2\n")


def test_experiment_outputs():
    print("=" * 60)
    print("測試 4: experiment 輸出")
    print("=" * 60)

    with tempfile.TemporaryDirectory() as tmp:
        first = os.path.join(tmp, "a")
        second = os.path.join(tmp, "b")
        argv = ["experiment", "projectile", "--epochs", "1", "--seed", "7", "--log-level", "WARNING"]
        assert _run(argv + ["-o", first]) == 0
        assert _run(argv + ["-o", second]) == 0

        for name in OUTPUT_FILES:
            assert os.path.isfile(os.path.join(first, name)), name
        print(f"  ✓ 輸出 {', '.join(OUTPUT_FILES)}")

        with open(os.path.join(first, "summary.json"), encoding="utf-8") as f:
            summary = json.load(f)
        assert summary["task"] == "projectile" and summary["epochs"] == 1 and summary["seed"] == 7
        assert len(summary["depth_table"]) == 5
        print("  ✓ summary.json")

        with open(os.path.join(first, "history.csv"), encoding="utf-8") as f:
            header = f.readline().strip()
        assert header == "epoch,depth,loss,residual,seconds"

        for name in OUTPUT_FILES[:-1]:
            with open(os.path.join(first, name), "rb") as a, open(os.path.join(second, name), "rb") as b:
                assert a.read() == b.read(), name
        print("  ✓ 相同 seed 的 CSV 與 checkpoint 逐位元相同\n")


def test_projectile_seeds():
    print("=" * 60)
    print("測試 5: 拋體實驗 (seed 0-4)")
    print("=" * 60)

    with tempfile.TemporaryDirectory() as tmp:
        for seed in range(5):
            recorder = Recorder()
            summary = run_experiment("projectile", seed, os.path.join(tmp, str(seed)), epochs=10, recorder=recorder)
            losses = recorder.get_epoch_losses()
            assert sorted(losses) == list(range(11)), sorted(losses)
            series = [losses[e] for e in range(11)]
            assert all(b < a for a, b in zip(series, series[1:])), (seed, series)
            assert summary["final_p_min_loss"] == series[-1]
            assert summary["final_loss"] < summary["initial_loss"]
            print(f"  ✓ seed {seed}: p_min loss {series[0]:.4f} -> {series[-1]:.4f}，每個 epoch 都下降")
    print()


def test_rotvec():
    print("=" * 60)
    print("測試 6: 旋轉向量實驗")
    print("=" * 60)

    with tempfile.TemporaryDirectory() as tmp:
        # 學習率每 30 epoch 減半，150 epoch 之後的更新量已經很小
        summary = run_experiment("rotvec", 7, os.path.join(tmp, "long"), epochs=150)
        drop = summary["initial_p_min_loss"] / summary["final_p_min_loss"]
        assert drop > 10.0, summary
        print(f"  ✓ p_min loss {summary['initial_p_min_loss']:.4f} -> {summary['final_p_min_loss']:.2e} ({drop:.0f}x)")

        extrapolated = {row["depth"]: row["loss"] for row in summary["extrapolation"]}
        for depth in (-5.0, -4.5, -3.0):
            assert depth in extrapolated, sorted(extrapolated)
            assert extrapolated[depth] is not None and math.isfinite(extrapolated[depth]), (depth, extrapolated[depth])
        print("  ✓ 外插深度 -5, -4.5, -3 的 loss 都是有限值")

        argv = ["experiment", "rotvec", "--epochs", "5", "--seed", "7", "--log-level", "WARNING"]
        first, second = os.path.join(tmp, "a"), os.path.join(tmp, "b")
        assert _run(argv + ["-o", first]) == 0
        assert _run(argv + ["-o", second]) == 0
        with open(os.path.join(first, "history.csv"), "rb") as a, open(os.path.join(second, "history.csv"), "rb") as b:
            assert a.read() == b.read()
        print("  ✓ 相同 seed 的 history.csv 逐位元相同\n")


def main_tests():
    print("\n" + "=" * 60)
    print(" 命令列測試")
    print("=" * 60 + "\n")

    tests = [
        test_verify_exit_codes,
        test_config_parsing,
        test_command_errors,
        test_experiment_outputs,
        test_projectile_seeds,
        test_rotvec,
    ]
    failed = 0
    for test in tests:
        try:
            test()
        except AssertionError as e:
            failed += 1
            print(f"  ✗ {test.__name__} 失敗: {e}\n")

    print("=" * 60)
    if failed == 0:
        print(" 所有測試通過！✓")
        print("=" * 60 + "\n")
        return 0
    print(f" {failed} 項測試失敗！✗")
    print("=" * 60 + "\n")
    return 1


if __name__ == "__main__":
    sys.exit(main_tests())
