#!/usr/bin/env python3
"""
核心型別與模型介面測試

測試項目：
1. 深度網格驗證與細分
2. 層參數 (shared / per_layer)
3. Jacobian scheme 的 Δ 解析
4. 損失函數梯度
5. 模型偏導數 contract
"""

import os
import sys

import numpy as np

# 添加專案路徑
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from lib.core import (
    DepthGrid,
    InImNetError,
    JacobianScheme,
    LayerParams,
    LengthMismatch,
    LossSpec,
    NonFiniteEntry,
    NonMonotoneGrid,
    TooFewPoints,
    as_state,
    check_loss_gradient,
    check_partials,
    mse_cost,
    validate_grid,
)
from lib.dynamics import LinearDynamics, LinearParamDynamics, MlpDynamics, ProjectileDynamics


def _raises(exc, fn, *args, **kwargs) -> bool:
    try:
        fn(*args, **kwargs)
    except exc:
        return True
    return False


def test_grid_validation():
    """網格必須嚴格遞增、至少兩點且有限"""
    print("=" * 60)
    print("測試 1: 深度網格驗證")
    print("=" * 60)

    assert validate_grid([0.0, 0.5, 1.0])
    assert _raises(NonMonotoneGrid, validate_grid, [0.0, 0.5, 0.5])
    assert _raises(NonMonotoneGrid, validate_grid, [1.0, 0.0])
    assert _raises(TooFewPoints, validate_grid, [0.0])
    assert _raises(NonFiniteEntry, validate_grid, [0.0, float("nan"), 1.0])
    print("  ✓ 非遞增 / 單點 / NaN 網格被拒絕")

    grid = DepthGrid.uniform(-1.0, 0.0, 4)
    assert grid.size == 5 and grid.layers == 4
    assert grid.p_min == -1.0 and grid.terminal == 0.0
    assert grid.index_of(-0.5) == 2
    assert grid.index_of(-0.3) is None
    print(f"  ✓ uniform 網格: {grid.points.tolist()}")

    fine = grid.refine(3)
    assert fine.size == 13
    assert np.allclose(fine.points[fine.coarse_index], grid.points)
    assert fine.layer_of.tolist() == [0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3]
    print("  ✓ 細分保留回報深度\n")


def test_layer_params():
    """q 點使用最後一層參數"""
    print("=" * 60)
    print("測試 2: 層參數")
    print("=" * 60)

    shared = LayerParams.shared([1.0, 2.0])
    assert shared.param_count == 2 and shared.layer_count is None
    assert np.array_equal(shared.at(7), [1.0, 2.0])

    per_layer = LayerParams.per_layer([[1.0], [2.0], [3.0]])
    assert per_layer.layer_count == 3
    assert per_layer.at(0)[0] == 1.0
    assert per_layer.at(3)[0] == 3.0
    print("  ✓ per_layer 在 q 點取最後一層")

    flat = per_layer.flat()
    again = per_layer.with_flat(flat * 2)
    assert np.array_equal(again.values, [[2.0], [4.0], [6.0]])

    grid = DepthGrid([0.0, 0.5, 1.0, 1.5])
    schedule = per_layer.schedule(grid)
    assert schedule(0.25)[0] == 1.0 and schedule(1.25)[0] == 3.0
    print("  ✓ schedule 分段常數")

    assert _raises(LengthMismatch, LayerParams.per_layer, [1.0, 2.0])
    assert _raises(NonFiniteEntry, LayerParams.shared, [float("inf")])
    assert _raises(InImNetError, LayerParams, np.zeros(2), "bogus")
    print("  ✓ 形狀錯誤 / 非有限值被拒絕\n")


def test_scheme_deltas():
    """Δ 預設為 1e-3·(1 + |x|)"""
    print("=" * 60)
    print("測試 3: Jacobian scheme")
    print("=" * 60)

    x = np.array([0.0, -2.0])
    assert np.allclose(JacobianScheme("symmetric").resolve_deltas(x), [1e-3, 3e-3])
    assert np.allclose(JacobianScheme("newton", deltas=(0.1,)).resolve_deltas(x), [0.1, 0.1])
    assert _raises(LengthMismatch, JacobianScheme("newton", deltas=(0.1, 0.2, 0.3)).resolve_deltas, x)
    assert _raises(NonFiniteEntry, JacobianScheme, "symmetric", (0.0,))
    assert _raises(InImNetError, JacobianScheme, "midpoint")
    print("  ✓ Δ 解析與驗證\n")


def test_state_validation():
    print("=" * 60)
    print("測試 4: 狀態向量")
    print("=" * 60)

    assert as_state(3.0).shape == (1,)
    assert _raises(LengthMismatch, as_state, [])
    assert _raises(NonFiniteEntry, as_state, [1.0, float("nan")])
    print("  ✓ 純量轉為長度 1 向量；空向量 / NaN 被拒絕\n")


def test_loss_gradients():
    """terminal_grad 與中央差分一致"""
    print("=" * 60)
    print("測試 5: 損失函數")
    print("=" * 60)

    y = np.array([0.5, -1.0])
    loss = LossSpec.mse(y)
    z = np.array([1.0, 2.0])
    assert np.isclose(float(loss.terminal(z)), 0.5 * (0.25 + 9.0) / 2)
    assert check_loss_gradient(loss, z)
    assert np.allclose(loss.hess_T(z), np.eye(2) / 2)
    print("  ✓ MSE 值、梯度與 Hessian")

    control = LossSpec.quadratic_control(np.array([1.0]), weight=2.0)
    theta = np.array([0.3])
    assert np.isclose(float(control.R(0.0, np.array([0.0]), theta)), 0.09)
    assert np.allclose(control.grad_R_theta(0.0, np.array([0.0]), theta), [0.6])
    assert np.allclose(control.grad_R_z(0.0, np.array([0.0]), theta), [0.0])
    print("  ✓ quadratic control 的 running loss")

    cost = mse_cost(2)
    retargeted = loss.retarget([0.0, 0.0])
    assert np.isclose(float(retargeted.terminal(z)), float(cost.value(z, np.zeros(2))))
    print("  ✓ retarget\n")


def test_model_partials():
    """解析偏導數與中央差分一致"""
    print("=" * 60)
    print("測試 6: 模型偏導數 contract")
    print("=" * 60)

    rng = np.random.default_rng(0)
    models = [
        LinearDynamics([[0.2, 1.0], [-1.0, -0.1]], [0.1, 0.0]),
        LinearParamDynamics(2),
        ProjectileDynamics(),
        MlpDynamics([2, 8, 2]),
    ]
    for model in models:
        report = check_partials(model, rng, samples=20)
        assert report.ok, f"{type(model).__name__}: {report}"
        print(f"  ✓ {type(model).__name__}: d_dz err={report.d_dz_error:.1e}, d_dtheta err={report.d_dtheta_error:.1e}")
    print()


def main():
    print("\n" + "=" * 60)
    print(" 核心型別測試")
    print("=" * 60 + "\n")

    tests = [
        test_grid_validation,
        test_layer_params,
        test_scheme_deltas,
        test_state_validation,
        test_loss_gradients,
        test_model_partials,
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
