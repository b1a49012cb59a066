"""
性質驗證 suites

每個 suite 接收一個 numpy Generator，回傳 Check list；門檻是預設值，
run_suite 的 tol 只覆寫 scalable 的誤差檢查。
"""

import logging
import time
from typing import Callable, Dict, List, Optional

import numpy as np

from ..adjoint import adjoint_direct, backward_augmented, backward_imbed, optimality_residual
from ..core import (
    DepthGrid,
    JacobianScheme,
    LayerParams,
    LossSpec,
    UnknownSuite,
    constant_schedule,
    mse_cost,
    squared_cost,
)
from ..dynamics import (
    LinearDynamics,
    LinearParamDynamics,
    MlpDynamics,
    ProjectileDynamics,
    ScalarControlDynamics,
    linear_closed_form,
    projectile_closed_form,
)
from ..jacobian import cropped_jacobian_step, exact_sensitivity_step, newton_diff_bundle
from ..propagate import compose_imbedding, forward_direct, forward_imbed, integrate_direct, theorem1_residual
from ..train import Sample, grad_adjoint_update, grad_through_system, sample_loss
from .checks import Check, SuiteReport, ladder_ratio_check, relative_error

logger = logging.getLogger("InImNet")

NO_PARAMS = LayerParams.shared(np.zeros(0))
EXACT = JacobianScheme("exact")
CROPPED = JacobianScheme("cropped")
SYMMETRIC = JacobianScheme("symmetric")


def _small_mlp(rng: np.random.Generator, hidden: int = 8) -> tuple:
    model = MlpDynamics([2, hidden, 2])
    return model, 0.5 * model.init_params(rng)


def _fd_gradient(fn: Callable[[np.ndarray], float], v: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    grad = np.empty(v.size)
    for k in range(v.size):
        step = eps * (1.0 + abs(v[k]))
        up, down = v.copy(), v.copy()
        up[k] += step
        down[k] -= step
        grad[k] = (fn(up) - fn(down)) / (2.0 * step)
    return grad


# === theorem1：forward imbedding ===

def theorem1(rng: np.random.Generator) -> List[Check]:
    model = LinearDynamics.scalar(1.0)
    x = np.array([1.0])
    truth = linear_closed_form([[1.0]], [0.0], x, -1.0, 0.0)

    def error(layers: int) -> float:
        grid = DepthGrid.uniform(-1.0, 0.0, layers)
        return relative_error(forward_imbed(model, NO_PARAMS, x, grid, EXACT).outputs[0], truth)

    checks = [Check("linear a=1, 1000 layers, exact scheme vs e", error(1000), 1e-2)]
    checks.append(ladder_ratio_check("order-1 ladder over 100..1600 layers", [error(n) for n in (100, 200, 400, 800, 1600)]))

    bundle = forward_imbed(model, NO_PARAMS, x, DepthGrid.uniform(-1.0, 0.0, 1000), EXACT)
    residual = theorem1_residual(bundle, model, NO_PARAMS)
    scale = float(np.max(np.abs(bundle.jacobians[:, 0, 0])))
    checks.append(Check("centered ∂p z + J·Φ at interior depths", float(np.max(residual)) / scale, 1e-2))

    proj = ProjectileDynamics()
    px = np.array([0.0, 5.0])
    grid = DepthGrid([0.0, 0.25, 0.5, 0.75, 1.0])
    out = forward_imbed(proj, NO_PARAMS, px, grid, CROPPED, substeps=2000).outputs
    worst = max(float(np.max(np.abs(out[i] - projectile_closed_form(proj.g, px, p, 1.0))))
                for i, p in enumerate(grid.points))
    checks.append(Check("projectile per-depth outputs vs closed form", worst, 1e-3))
    return checks


# === theorem2：imbedded adjoint ===

def theorem2(rng: np.random.Generator) -> List[Check]:
    checks = []
    layers_n = 1000

    # 純量線性：a = 0.5，T = ½(z − y)²
    model = LinearDynamics.scalar(0.5)
    x, y = np.array([1.0]), np.array([0.25])
    loss = LossSpec.mse(y)
    grid = DepthGrid.uniform(-1.0, 0.0, layers_n)
    lam = backward_imbed(model, NO_PARAMS, grid, x, loss, CROPPED).lam[0]
    traj = integrate_direct(model, constant_schedule(np.zeros(0)), x, -1.0, 0.0, layers_n)
    direct = adjoint_direct(model, constant_schedule(np.zeros(0)), traj, loss).input_grad
    checks.append(Check("linear: Λ(p_min) vs discrete Euler–Lagrange", relative_error(lam, direct), 1e-3))

    def linear_loss(v):
        return float(loss.terminal(forward_direct(model, constant_schedule(np.zeros(0)), v, -1.0, 0.0, layers_n)))
    checks.append(Check("linear: Λ(p_min) vs finite differences", relative_error(lam, _fd_gradient(linear_loss, x)), 1e-3))

    # 2 層 MLP：Λ 對 x 非線性，co-state 與 cropped 都會丟掉 ∇²_xΛ·Φ，用 exact scheme
    mlp, theta = _small_mlp(rng)
    layers = LayerParams.shared(theta)
    schedule = constant_schedule(theta)
    x = np.array([0.3, -0.2])
    loss = LossSpec.mse(np.array([0.1, 0.4]))
    grid = DepthGrid.uniform(-0.5, 0.0, layers_n)

    first = backward_imbed(mlp, layers, grid, x, loss, SYMMETRIC)
    forward_imbed(mlp, layers, x, grid, SYMMETRIC)
    second = backward_imbed(mlp, layers, grid, x, loss, SYMMETRIC)
    diff = float(np.max(np.abs(first.lam - second.lam)))
    checks.append(Check("backward pass unaffected by a forward pass", diff, 0.0, scalable=False))

    lam = backward_imbed(mlp, layers, grid, x, loss, EXACT).lam[0]
    traj = integrate_direct(mlp, schedule, x, -0.5, 0.0, layers_n)
    direct = adjoint_direct(mlp, schedule, traj, loss).input_grad
    checks.append(Check("mlp: Λ(p_min) vs discrete Euler–Lagrange", relative_error(lam, direct), 1e-3))

    def mlp_loss(v):
        return float(loss.terminal(forward_direct(mlp, schedule, v, -0.5, 0.0, layers_n)))
    checks.append(Check("mlp: Λ(p_min) vs finite differences", relative_error(lam, _fd_gradient(mlp_loss, x)), 1e-3))
    return checks


# === theorem3：optimality residual ===

def theorem3(rng: np.random.Generator) -> List[Check]:
    model = ScalarControlDynamics(1)
    x, y = np.array([0.3]), np.array([1.0])
    loss = LossSpec.quadratic_control(y)
    grid = DepthGrid([-1.0, 0.0])
    optimum = 0.5 * (y - x)

    def residual(theta) -> float:
        layers = LayerParams.shared(theta)
        adjoint = backward_imbed(model, layers, grid, x, loss, CROPPED)
        return float(optimality_residual(model, layers, grid, x, loss, adjoint)[0])

    return [
        Check("residual at θ* = (y − x)/2", residual(optimum), 1e-6),
        Check("residual at θ* + 0.1", residual(optimum + 0.1), 0.1, kind="at_least", scalable=False),
    ]


# === imbedding_rule ===

def imbedding_rule(rng: np.random.Generator, pairs: int = 20, steps: int = 200) -> List[Check]:
    A = np.array([[0.2, 1.0], [-1.0, -0.1]])
    b = np.array([0.1, 0.0])
    cases = [
        ("linear", LinearDynamics(A, b), lambda x, p: linear_closed_form(A, b, x, p, 0.0), np.array([1.0, 0.5])),
        ("projectile", ProjectileDynamics(), lambda x, p: projectile_closed_form(9.81, x, p, 0.0), np.array([2.0, 5.0])),
    ]
    schedule = constant_schedule(np.zeros(0))
    checks = []
    for name, model, closed, x in cases:
        worst = 0.0
        for _ in range(pairs):
            p2, p1 = np.sort(rng.uniform(-1.0, -0.01, size=2))
            if p1 - p2 < 1e-3:
                p1 = p2 + 1e-3
            lhs, rhs = compose_imbedding(model, schedule, x, float(p2), float(p1), 0.0, steps, "rk4")
            truth = closed(x, float(p2))
            scale = max(float(np.max(np.abs(truth))), 1.0)
            single = max(float(np.max(np.abs(lhs - truth))), float(np.max(np.abs(rhs - truth))), 1e-9 * scale)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))) / (2.0 * single))
        checks.append(Check(f"{name}: both sides within 2x single-solve error ({pairs} pairs)", worst, 1.0, scalable=False))
    return checks


# === gradients ===

def gradients(rng: np.random.Generator) -> List[Check]:
    checks = []

    # 單層純量線性參數：手算 chain rule
    model = LinearParamDynamics(1)
    a, b, x, y, h = 0.7, 0.2, 0.8, 1.5, 0.5
    grid = DepthGrid([-h, 0.0])
    cost = squared_cost(1)
    z = x + h * (a * x + b)
    expected = np.array([(z - y) * h * x, (z - y) * h])
    _, got = grad_through_system(model, LayerParams.shared([a, b]), grid, [Sample.supervised([x], [y])], cost, CROPPED)
    checks.append(Check("one-layer linear-param gradient vs chain rule", relative_error(got, expected), 1e-9))

    # MLP 穿過 forward 遞迴
    mlp, theta = _small_mlp(rng)
    cost = mse_cost(2)
    grid = DepthGrid.uniform(-0.5, 0.0, 5)
    batch = [Sample.supervised(rng.normal(size=2) * 0.5, rng.normal(size=2) * 0.5) for _ in range(3)]
    for sharing, scheme in (("per_layer", CROPPED), ("shared", SYMMETRIC)):
        layers = LayerParams.broadcast(theta, grid.layers, sharing)
        _, grad = grad_through_system(mlp, layers, grid, batch, cost, scheme)

        def batch_loss(flat, layers=layers, scheme=scheme):
            current = layers.with_flat(flat)
            return sum(sample_loss(forward_imbed(mlp, current, s.x, grid, scheme).outputs, s, cost) for s in batch) / len(batch)
        fd = _fd_gradient(batch_loss, layers.flat())
        checks.append(Check(f"mlp through-system gradient ({sharing}, {scheme.mode}) vs finite differences",
                            relative_error(grad.reshape(-1), fd), 1e-3))

    # augmented adjoint：Λθ 與 Λt
    layers = LayerParams.shared(theta)
    x = np.array([0.3, -0.2])
    loss = LossSpec.mse(np.array([0.1, 0.4]))
    p_min, steps = -0.5, 1000
    grid = DepthGrid.uniform(p_min, 0.0, steps)
    aug = backward_augmented(mlp, layers, grid, x, loss, EXACT)

    def theta_loss(v):
        return float(loss.terminal(forward_direct(mlp, constant_schedule(v), x, p_min, 0.0, steps)))
    checks.append(Check("Λθ(p_min) vs finite differences in θ", relative_error(aug.lam_theta[0], _fd_gradient(theta_loss, theta)), 1e-3))

    schedule = constant_schedule(theta)
    delta = 1e-3
    up = float(loss.terminal(forward_direct(mlp, schedule, x, p_min + delta, 0.0, steps, "rk4")))
    down = float(loss.terminal(forward_direct(mlp, schedule, x, p_min - delta, 0.0, steps, "rk4")))
    # 尺度取 |∂J/∂p| 與 ‖Λ(q)‖·‖Φ(q)‖ 的較大者
    phi_q = mlp.eval(0.0, x, theta)
    scale = max(abs(up - down) / (2 * delta), float(np.linalg.norm(aug.lam[-1]) * np.linalg.norm(phi_q)))
    checks.append(Check("Λt(p_min) vs −∂J/∂p", abs(aug.lam_t[0] + (up - down) / (2 * delta)) / scale, 1e-2))

    # adjoint update 與 through-system 的方向
    lin = LinearParamDynamics(2)
    layers = LayerParams.shared(0.3 * rng.normal(size=lin.param_count))
    grid = DepthGrid.uniform(-1.0, 0.0, 200)
    cost = mse_cost(2)
    batch = [Sample.supervised(rng.normal(size=2), rng.normal(size=2)) for _ in range(4)]
    _, through = grad_through_system(lin, layers, grid, batch, cost, CROPPED)
    adjoint = sum(grad_adjoint_update(lin, layers, grid, s, cost, EXACT)[1] for s in batch) / len(batch)
    cosine = float(np.dot(through, adjoint) / (np.linalg.norm(through) * np.linalg.norm(adjoint)))
    checks.append(Check("adjoint-update vs through-system direction (cosine)", cosine, 0.99, kind="at_least", scalable=False))
    return checks


# === convergence ===

def convergence(rng: np.random.Generator) -> List[Check]:
    checks = []
    model = LinearDynamics.scalar(1.0)
    x = np.array([1.0])
    e = np.e
    schedule = constant_schedule(np.zeros(0))

    errors = [abs(forward_direct(model, schedule, x, -1.0, 0.0, n)[0] - e) / e for n in (100, 200, 400, 800, 1600)]
    checks.append(ladder_ratio_check("direct Euler order-1 ladder", errors))

    J = np.eye(1)
    for _ in range(1000):
        J = exact_sensitivity_step(J, np.array([[1.0]]), 1e-3)
    checks.append(Check("variational equation, 1000 steps of a=1", abs(J[0, 0] - e) / e, 2e-3))

    J = np.eye(1)
    for _ in range(100):
        J = cropped_jacobian_step(J, np.array([[1.0]]), 1e-2)
    checks.append(Check("cropped Jacobian, 100 layers on [-1, 0]", abs(J[0, 0] - e) / e, 5e-2))

    cropped = [relative_error(forward_imbed(model, NO_PARAMS, x, DepthGrid.uniform(-1.0, 0.0, n), CROPPED).outputs[0], [e])
               for n in (10, 30, 100, 300, 1000)]
    increases = sum(1 for a, b in zip(cropped, cropped[1:]) if b >= a)
    checks.append(Check("cropped error strictly decreasing over 10..1000 layers", float(increases), 0.0, scalable=False))

    A = np.array([[0.2, 1.0], [-1.0, -0.1]])
    lin = LinearDynamics(A, [0.1, 0.0])
    grid = DepthGrid.uniform(-1.0, 0.0, 200)
    x2 = np.array([1.0, 0.5])
    exact = forward_imbed(lin, NO_PARAMS, x2, grid, EXACT).outputs
    sym = forward_imbed(lin, NO_PARAMS, x2, grid, SYMMETRIC).outputs
    checks.append(Check("symmetric difference vs exact on linear dynamics", relative_error(sym, exact), 1e-8))

    biases = []
    for delta in (1e-2, 5e-3, 2.5e-3, 1.25e-3):
        _, jac = newton_diff_bundle(np.sin, np.array([1.0]), [delta])
        biases.append(abs(jac[0, 0] - np.cos(1.0)))
    checks.append(ladder_ratio_check("newton difference bias linear in Δ", biases))
    return checks


SUITES: Dict[str, Callable[[np.random.Generator], List[Check]]] = {
    "theorem1": theorem1,
    "theorem2": theorem2,
    "theorem3": theorem3,
    "imbedding_rule": imbedding_rule,
    "gradients": gradients,
    "convergence": convergence,
}


def run_suite(name: str, tol: Optional[float] = None, seed: int = 0) -> SuiteReport:
    """
    執行指定 suite

    Raises:
        UnknownSuite: 名稱不在 SUITES 中
    """
    suite = SUITES.get(name)
    if suite is None:
        raise UnknownSuite(f"unknown suite '{name}'. Available: {', '.join(SUITES)}")
    logger.info(f"Running suite '{name}' (seed={seed})")
    start = time.perf_counter()
    checks = [c.with_tol(tol) for c in suite(np.random.default_rng(seed))]
    report = SuiteReport(suite=name, checks=checks, seconds=time.perf_counter() - start)
    for c in checks:
        logger.debug(f"{name}: {c.name}: {c.error:.3e} vs {c.tol:.1e} -> {'ok' if c.passed else 'FAIL'}")
    return report
