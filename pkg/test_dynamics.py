#!/usr/bin/env python3
"""
內建動態與解析解測試

測試項目：
1. 線性 / 拋體解析解
2. 解析二階量與中央差分預設值一致
3. MLP 參數攤平
4. JSON checkpoint 存取
"""

import os
import sys
import tempfile

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from lib.core import DynamicsModel, InImNetError, LayerParams, ParamLengthMismatch
from lib.dynamics import (
    LinearParamDynamics,
    MlpDynamics,
    ProjectileDynamics,
    ScalarControlDynamics,
    build_model,
    linear_closed_form,
    load_checkpoint,
    projectile_closed_form,
    save_checkpoint,
)


def test_closed_forms():
    print("=" * 60)
    print("測試 1: 解析解")
    print("=" * 60)

    out = linear_closed_form([[1.0]], [0.0], [1.0], -1.0, 0.0)
    assert np.isclose(out[0], np.e, rtol=1e-12)
    print(f"  ✓ ż = z 從 -1 到 0: {out[0]:.12f}")

    # ż = b 為常數漂移
    out = linear_closed_form([[0.0]], [2.0], [1.0], 0.0, 0.5)
    assert np.isclose(out[0], 2.0)

    rot = linear_closed_form([[0.0, -1.0], [1.0, 0.0]], None, [1.0, 0.0], 0.0, np.pi / 2)
    assert np.allclose(rot, [0.0, 1.0], atol=1e-12)
    print("  ✓ 常數漂移與旋轉")

    out = projectile_closed_form(9.81, [10.0, 5.0], 0.0, 1.0)
    assert np.allclose(out, [10.0 + 5.0 - 0.5 * 9.81, 5.0 - 9.81])
    assert np.array_equal(projectile_closed_form(9.81, [1.0, 2.0], 1.0, 1.0), [1.0, 2.0])
    print(f"  ✓ 拋體 h(1) = {out[0]:.4f}")

    try:
        projectile_closed_form(9.81, [0.0, 0.0], 1.0, 0.0)
        assert False, "q < p 應該失敗"
    except InImNetError:
        print("  ✓ q < p 被拒絕\n")


def test_second_order_terms():
    """LinearParamDynamics 的解析二階量 vs DynamicsModel 的差分預設"""
    print("=" * 60)
    print("測試 2: 二階量")
    print("=" * 60)

    rng = np.random.default_rng(1)
    model = LinearParamDynamics(2)
    theta = rng.normal(size=model.param_count)
    z = rng.normal(size=(3, 2))
    w = rng.normal(size=(3, 2))
    G = rng.normal(size=(3, 2, 2))

    analytic = model.hess_theta_z(0.0, z, theta, w)
    default = DynamicsModel.hess_theta_z(model, 0.0, z, theta, w)
    assert analytic.shape == (3, 6, 2)
    assert np.allclose(analytic, default, atol=1e-8)
    print("  ✓ hess_theta_z")

    analytic = model.jac_z_vjp_theta(0.0, z, theta, G)
    default = DynamicsModel.jac_z_vjp_theta(model, 0.0, z, theta, G)
    assert np.allclose(analytic, default, atol=1e-8)
    print("  ✓ jac_z_vjp_theta")

    mlp = MlpDynamics([2, 4, 2])
    theta = mlp.init_params(rng)
    hess = mlp.hess_z(0.0, z, theta, w)
    assert hess.shape == (3, 2, 2)
    assert np.allclose(hess, np.swapaxes(hess, -1, -2))
    print("  ✓ MLP 的 hess_z 對稱\n")


def test_mlp_params():
    print("=" * 60)
    print("測試 3: MLP 參數")
    print("=" * 60)

    mlp = MlpDynamics([2, 8, 2])
    assert mlp.param_count == 2 * 8 + 8 + 8 * 2 + 2
    theta = mlp.init_params(np.random.default_rng(0))
    assert theta.shape == (42,)
    assert mlp.eval(0.0, np.zeros((5, 2)), theta).shape == (5, 2)
    assert mlp.d_dtheta(0.0, np.zeros(2), theta).shape == (2, 42)
    print(f"  ✓ [2, 8, 2] 共 {mlp.param_count} 個參數")

    try:
        mlp.eval(0.0, np.zeros(2), np.zeros(5))
        assert False, "參數長度不符應該失敗"
    except ParamLengthMismatch:
        print("  ✓ 參數長度不符被拒絕")

    try:
        MlpDynamics([2, 8, 3])
        assert False, "輸入輸出維度不同應該失敗"
    except InImNetError:
        print("  ✓ R^N → R^N 檢查")

    try:
        ProjectileDynamics(g=-1.0)
        assert False
    except InImNetError:
        print("  ✓ g <= 0 被拒絕\n")


def test_checkpoint_roundtrip():
    print("=" * 60)
    print("測試 4: checkpoint")
    print("=" * 60)

    rng = np.random.default_rng(2)
    mlp = MlpDynamics([2, 4, 2])
    layers = LayerParams.per_layer(rng.normal(size=(3, mlp.param_count)))
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "ckpt", "checkpoint.json")
        save_checkpoint(path, mlp, layers, extra={"seed": 2})
        model, loaded, extra = load_checkpoint(path)
    assert isinstance(model, MlpDynamics) and model.sizes == [2, 4, 2]
    assert loaded.sharing == "per_layer"
    assert np.array_equal(loaded.values, layers.values)
    assert extra == {"seed": 2}
    print("  ✓ per_layer 參數 bit-exact 讀回")

    assert isinstance(build_model({"type": "scalar_control", "state_dim": 1}), ScalarControlDynamics)
    try:
        build_model({"type": "resnet"})
        assert False
    except InImNetError:
        print("  ✓ 未知模型類型被拒絕\n")


def main():
    print("\n" + "=" * 60)
    print(" 動態模組測試")
    print("=" * 60 + "\n")

    tests = [test_closed_forms, test_second_order_terms, test_mlp_params, test_checkpoint_roundtrip]
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
