#!/usr/bin/env python3
"""
訓練模組測試

測試項目：
1. 最佳化器與學習率排程
2. TrainConfig 驗證與執行緒數
3. BatchRunner 的順序與例外
4. 參數梯度 (through-system / adjoint update)
5. 訓練迴圈：loss 下降、可重現、中斷
6. 深度外插報表
7. Recorder 統計與 CSV
8. 凸 benchmark 的 loss 單調下降
"""

import os
import sys
import tempfile
import threading

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from lib.core import (
    DepthGrid,
    InImNetError,
    JacobianScheme,
    LayerParams,
    SchemeUnavailable,
    SharingRequired,
    mse_cost,
    squared_cost,
)
from lib.dynamics import LinearParamDynamics, MlpDynamics, ScalarControlDynamics
from lib.propagate import forward_imbed
from lib.recorder import HISTORY_FIELDS, Recorder, read_csv
from lib.train import (
    SGD,
    Adam,
    BatchRunner,
    LrSchedule,
    Sample,
    TrainConfig,
    extrapolation_report,
    grad_adjoint_update,
    grad_through_system,
    make_optimizer,
    sample_loss,
    train_loop,
)

CROPPED = JacobianScheme("cropped")


def _linear_dataset(count: int = 8):
    """y = 0.5 x，起始參數 (0, 0) 時 z(q) = x"""
    xs = np.linspace(-1.0, 1.0, count)
    return [Sample.supervised([x], [0.5 * x]) for x in xs]


def test_optimizers():
    print("=" * 60)
    print("測試 1: 最佳化器與學習率排程")
    print("=" * 60)

    params = np.array([1.0, -2.0])
    grad = np.array([0.5, -4.0])
    assert np.allclose(SGD().step(params, grad, 0.1), [0.95, -1.6])
    print("  ✓ SGD")

    # 第一步 m̂ = g、v̂ = g²，位移約為 lr·sign(g)
    adam = Adam()
    out = adam.step(params, grad, 0.1)
    assert np.allclose(out, params - 0.1 * np.sign(grad), atol=1e-6)
    assert adam.t == 1
    adam.step(out, grad, 0.1)
    assert adam.t == 2
    print("  ✓ Adam 第一步與偏差修正")

    assert isinstance(make_optimizer("adam"), Adam)
    try:
        make_optimizer("rmsprop")
        assert False, "未知最佳化器應該失敗"
    except InImNetError:
        print("  ✓ 未知最佳化器被拒絕")

    schedule = LrSchedule(kind="exp_decay", factor=0.5, step_epochs=30)
    assert schedule.rate(0.01, 0) == 0.01
    assert schedule.rate(0.01, 29) == 0.01
    assert np.isclose(schedule.rate(0.01, 30), 0.005)
    assert np.isclose(schedule.rate(0.01, 95), 0.00125)
    assert LrSchedule().rate(0.3, 1000) == 0.3
    assert LrSchedule(kind="exp_decay", factor=1.5).validate()
    assert LrSchedule(kind="exp_decay", factor=0.5, step_epochs=0).validate()
    print("  ✓ exp_decay 每 30 epoch 減半\n")


def test_train_config():
    print("=" * 60)
    print("測試 2: TrainConfig")
    print("=" * 60)

    assert TrainConfig().validate() == []
    print("  ✓ 預設值合法")

    bad = TrainConfig(mode="backprop", optimizer="lbfgs", learning_rate=0.0, epochs=0, scheme="midpoint")
    errors = bad.validate()
    assert len(errors) == 5, errors
    print(f"  ✓ 一次回報所有問題 ({len(errors)} 項)")

    errors = TrainConfig(mode="adjoint_update", parameter_sharing="per_layer").validate()
    assert any("shared" in e for e in errors)
    print("  ✓ adjoint_update 需要 shared")

    scheme = TrainConfig(scheme="newton", deltas=(0.01,), newton_shift_sign=-1.0).jacobian_scheme()
    assert scheme.mode == "newton" and scheme.newton_shift_sign == -1.0
    print("  ✓ jacobian_scheme")

    saved = os.environ.get("INIMNET_THREADS")
    try:
        os.environ["INIMNET_THREADS"] = "1"
        assert TrainConfig(threads=8).worker_count() == 1
        os.environ["INIMNET_THREADS"] = "not-a-number"
        assert TrainConfig(threads=1).worker_count() == 1
        assert TrainConfig().worker_count() >= 1
    finally:
        if saved is None:
            os.environ.pop("INIMNET_THREADS", None)
        else:
            os.environ["INIMNET_THREADS"] = saved
    print("  ✓ INIMNET_THREADS 限制執行緒數\n")


def test_batch_runner():
    print("=" * 60)
    print("測試 3: BatchRunner")
    print("=" * 60)

    runner = BatchRunner(workers=4)
    items = list(range(20))
    assert runner.map(lambda k: k * k, items) == [k * k for k in items]
    assert BatchRunner(workers=1).map(lambda k: -k, [1, 2]) == [-1, -2]
    print("  ✓ 結果依輸入順序排列")

    def flaky(k):
        if k == 7:
            raise ValueError("bad item")
        return k

    try:
        runner.map(flaky, items)
        assert False, "worker 的例外應該傳出"
    except ValueError as e:
        assert "bad item" in str(e)
        print("  ✓ worker 的例外被重新丟出\n")


def test_parameter_gradients():
    print("=" * 60)
    print("測試 4: 參數梯度")
    print("=" * 60)

    # 單層：z = x + h(a x + b)，loss = ½(z − y)²
    model = LinearParamDynamics(1)
    a, b, x, y, h = 0.7, 0.2, 0.8, 1.5, 0.5
    z = x + h * (a * x + b)
    loss, grad = grad_through_system(model, LayerParams.shared([a, b]), DepthGrid([-h, 0.0]),
                                     [Sample.supervised([x], [y])], squared_cost(1), CROPPED)
    assert np.isclose(loss, 0.5 * (z - y) ** 2)
    assert np.allclose(grad, [(z - y) * h * x, (z - y) * h], rtol=1e-12)
    print("  ✓ 單層 chain rule")

    rng = np.random.default_rng(5)
    mlp = MlpDynamics([2, 4, 2])
    grid = DepthGrid.uniform(-0.5, 0.0, 4)
    layers = LayerParams.broadcast(0.5 * mlp.init_params(rng), grid.layers, "per_layer")
    cost = mse_cost(2)
    sample = Sample.supervised([0.3, -0.1], [0.2, 0.2])
    _, grad = grad_through_system(mlp, layers, grid, [sample], cost, CROPPED)
    assert grad.shape == layers.values.shape

    flat = layers.flat()
    fd = np.empty(flat.size)
    eps = 1e-6
    for k in range(flat.size):
        up, down = flat.copy(), flat.copy()
        up[k] += eps
        down[k] -= eps
        f_up = sample_loss(forward_imbed(mlp, layers.with_flat(up), sample.x, grid, CROPPED).outputs, sample, cost)
        f_down = sample_loss(forward_imbed(mlp, layers.with_flat(down), sample.x, grid, CROPPED).outputs, sample, cost)
        fd[k] = (f_up - f_down) / (2 * eps)
    err = np.max(np.abs(grad.reshape(-1) - fd)) / np.max(np.abs(fd))
    assert err < 1e-4, err
    print(f"  ✓ per_layer MLP vs 有限差分: {err:.1e}")

    try:
        grad_through_system(mlp, layers, grid, [sample], cost, JacobianScheme("exact"))
        assert False
    except SchemeUnavailable:
        print("  ✓ exact scheme 不能穿過 forward 遞迴")

    try:
        grad_adjoint_update(mlp, layers, grid, sample, cost, CROPPED)
        assert False
    except SharingRequired:
        print("  ✓ adjoint update 拒絕 per-layer 參數")

    # 線性參數模型下兩種梯度的方向一致
    lin = LinearParamDynamics(1)
    shared = LayerParams.shared([0.3, -0.1])
    grid = DepthGrid.uniform(-1.0, 0.0, 100)
    sample = Sample.supervised([0.8], [0.1])
    loss_a, through = grad_through_system(lin, shared, grid, [sample], mse_cost(1), CROPPED)
    loss_b, adjoint = grad_adjoint_update(lin, shared, grid, sample, mse_cost(1), JacobianScheme("exact"))
    assert np.isclose(loss_a, loss_b)
    cosine = float(np.dot(through, adjoint) / (np.linalg.norm(through) * np.linalg.norm(adjoint)))
    assert cosine > 0.99, cosine
    print(f"  ✓ adjoint update 與 through-system 方向 cos = {cosine:.5f}\n")


def test_train_loop():
    print("=" * 60)
    print("測試 5: 訓練迴圈")
    print("=" * 60)

    model = LinearParamDynamics(1)
    grid = DepthGrid.uniform(-1.0, 0.0, 10)
    dataset = _linear_dataset()
    config = TrainConfig(learning_rate=0.1, epochs=5, batch_size=4, threads=1, seed=3)

    def run():
        return train_loop(model, LayerParams.shared([0.0, 0.0]), grid, dataset, mse_cost(1), config)

    first = run()
    losses = [r.loss for r in first.reports]
    assert len(first.reports) == 6 and first.reports[0].epoch == 0
    assert losses[-1] < losses[0], losses
    assert not first.stopped
    assert len(first.recorder.records) == 6 * grid.size
    assert all(np.isnan(r["seconds"]) for r in first.recorder.records)
    print(f"  ✓ loss {losses[0]:.4f} -> {losses[-1]:.4f}")

    second = run()
    assert [r.loss for r in second.reports] == losses
    assert np.array_equal(second.layers.values, first.layers.values)
    print("  ✓ 同一 seed 結果逐位元相同")

    adjoint = train_loop(model, LayerParams.shared([0.0, 0.0]), grid, dataset, mse_cost(1),
                         TrainConfig(mode="adjoint_update", learning_rate=0.1, epochs=3, threads=2))
    assert adjoint.final_loss < adjoint.reports[0].loss
    print("  ✓ adjoint_update 模式")

    # 每個深度都有目標時，目標函數是各深度成本的總和，recorder 只記 p_min 的成本
    series = [Sample(np.array([v]), {k: np.array([0.5 * v]) for k in range(grid.size)}) for v in (-0.5, 0.5, 1.0)]
    multi = train_loop(model, LayerParams.shared([0.0, 0.0]), grid, series, mse_cost(1),
                       TrainConfig(learning_rate=0.05, epochs=2, threads=1))
    p_min = multi.recorder.get_epoch_losses()
    assert sorted(p_min) == [0, 1, 2]
    for report in multi.reports:
        assert p_min[report.epoch] == report.p_min_loss == float(report.profile[0])
    assert np.isclose(multi.reports[0].loss, grid.size * p_min[0])
    assert multi.recorder.get_final_statistics()["initial_loss"] == multi.reports[0].p_min_loss
    print("  ✓ recorder 的 epoch loss 是 p_min 的成本")

    stop = threading.Event()
    stop.set()
    stopped = train_loop(model, LayerParams.shared([0.0, 0.0]), grid, dataset, mse_cost(1), config, stop_flag=stop)
    assert stopped.stopped and len(stopped.reports) == 1
    print("  ✓ stop flag 在第一個 batch 前中斷")

    try:
        train_loop(model, LayerParams.per_layer(np.zeros((10, 2))), grid, dataset, mse_cost(1),
                   TrainConfig(mode="adjoint_update"))
        assert False
    except SharingRequired:
        print("  ✓ adjoint_update 拒絕 per-layer 參數")

    try:
        train_loop(model, LayerParams.shared([0.0, 0.0]), grid, [], mse_cost(1), config)
        assert False
    except InImNetError:
        print("  ✓ 空資料集被拒絕\n")


def test_extrapolation():
    print("=" * 60)
    print("測試 6: 深度外插")
    print("=" * 60)

    model = LinearParamDynamics(1)
    grid = DepthGrid.uniform(-2.0, 0.0, 8)
    samples = [np.array([0.5]), np.array([-1.0])]
    rows = extrapolation_report(model, LayerParams.shared([0.0, 0.0]), grid, samples,
                                lambda x, p: x, mse_cost(1))
    assert len(rows) == grid.size
    assert rows[0]["depth"] == -2.0
    assert all(row["loss"] == 0.0 for row in rows)
    print("  ✓ 零動態在所有深度的成本為 0")

    try:
        extrapolation_report(model, LayerParams.per_layer(np.zeros((8, 2))), grid, samples,
                             lambda x, p: x, mse_cost(1))
        assert False
    except SharingRequired:
        print("  ✓ per-layer 參數不能外插\n")


def test_recorder():
    print("=" * 60)
    print("測試 7: Recorder")
    print("=" * 60)

    assert Recorder().get_final_statistics() == {"epochs": 0}

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "out", "history.csv")
        recorder = Recorder(csv_path=path)
        depths = [-1.0, -0.5, 0.0]
        recorder.record_epoch(0, depths, [0.4, 0.2, 0.1], 0.3, float("nan"), 0.4)
        recorder.record_epoch(1, depths, [0.1, 0.05, 0.1], 0.01, float("nan"), 0.1)
        stats = recorder.get_final_statistics()
        assert stats["epochs"] == 1
        assert stats["initial_loss"] == 0.4 and stats["final_loss"] == 0.1
        assert np.isclose(stats["improvement"], 4.0)
        print("  ✓ 最終統計")

        recorder.save_csv()
        frame = read_csv(path)
    assert list(frame.columns) == HISTORY_FIELDS
    assert len(frame) == 6
    assert frame["residual"].isna().sum() == 4
    assert frame["loss"].tolist() == [0.4, 0.2, 0.1, 0.1, 0.05, 0.1]
    print("  ✓ history.csv 讀回\n")


def test_convex_benchmark():
    """f = θ、C = ½(z − y)²：z(q) = x + (q − p)θ，loss 對 θ 的 Lipschitz 常數 L = (q − p)²"""
    print("=" * 60)
    print("測試 8: 凸的純量 benchmark")
    print("=" * 60)

    model = ScalarControlDynamics(1)
    grid = DepthGrid.uniform(-2.0, 0.0, 20)
    lipschitz = (grid.terminal - grid.p_min) ** 2
    xs = [-1.0, 0.0, 0.5, 2.0]
    ys = [0.3, -0.2, 1.0, 1.5]
    dataset = [Sample.supervised([x], [y]) for x, y in zip(xs, ys)]

    for lr in (0.1 / lipschitz, 0.05 / lipschitz):
        config = TrainConfig(learning_rate=lr, epochs=20, batch_size=len(dataset), threads=1)
        result = train_loop(model, LayerParams.shared([2.0]), grid, dataset, squared_cost(1), config)
        losses = [result.recorder.get_epoch_losses()[e] for e in range(21)]
        assert all(b <= a for a, b in zip(losses, losses[1:])), losses
        assert losses[-1] < losses[0]
        print(f"  ✓ lr = {lr:.4f}: p_min loss {losses[0]:.4f} -> {losses[-1]:.4f}，沒有任何 epoch 上升")

    # 最佳 θ* = mean(y − x) / (q − p)
    best = float(np.mean(np.array(ys) - np.array(xs))) / (grid.terminal - grid.p_min)
    long_run = train_loop(model, LayerParams.shared([2.0]), grid, dataset, squared_cost(1),
                          TrainConfig(learning_rate=0.1 / lipschitz, epochs=300, batch_size=len(dataset), threads=1))
    assert abs(float(long_run.layers.values[0]) - best) < 1e-6
    print(f"  ✓ 收斂到 θ* = {best:.4f}\n")


def main():
    print("\n" + "=" * 60)
    print(" 訓練模組測試")
    print("=" * 60 + "\n")

    tests = [
        test_optimizers,
        test_train_config,
        test_batch_runner,
        test_parameter_gradients,
        test_train_loop,
        test_extrapolation,
        test_recorder,
        test_convex_benchmark,
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
    sys.exit(main())
