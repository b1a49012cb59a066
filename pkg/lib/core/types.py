"""
核心資料型別：狀態向量、深度網格、層參數、Jacobian scheme 與各種 bundle
"""

from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    InImNetError,
    LengthMismatch,
    NonFiniteEntry,
    NonMonotoneGrid,
    TooFewPoints,
)

SchemeMode = Literal["exact", "symmetric", "newton", "cropped"]
SharingMode = Literal["shared", "per_layer"]

SCHEME_MODES = ("exact", "symmetric", "newton", "cropped")


def as_state(values, name: str = "state") -> np.ndarray:
    """
    轉換並驗證狀態向量 z ∈ R^N

    Raises:
        LengthMismatch: N < 1 或不是一維向量
        NonFiniteEntry: 含 NaN / Inf
    """
    arr = np.array(values, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 or arr.size < 1:
        raise LengthMismatch(f"{name} must be a non-empty vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEntry(f"{name} contains non-finite entries: {arr}")
    return arr


def as_params(values, name: str = "theta") -> np.ndarray:
    """轉換並驗證參數向量 θ ∈ R^M (M = 0 合法)"""
    arr = np.array(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEntry(f"{name} contains non-finite entries")
    return arr


def validate_grid(points) -> bool:
    """
    驗證深度網格 p_1 < p_2 < ... < p_n = q

    Args:
        points: DepthGrid 或任意一維序列

    Returns:
        True (合法時)

    Raises:
        TooFewPoints: n < 2
        NonFiniteEntry: 含 NaN / Inf
        NonMonotoneGrid: 非嚴格遞增
    """
    if isinstance(points, DepthGrid):
        points = points.points
    arr = np.asarray(points, dtype=float).reshape(-1)
    if arr.size < 2:
        raise TooFewPoints(f"depth grid needs at least 2 points, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEntry(f"depth grid contains non-finite entries: {arr}")
    steps = np.diff(arr)
    if np.any(steps <= 0.0):
        bad = int(np.argmax(steps <= 0.0))
        raise NonMonotoneGrid(
            f"depth grid must be strictly increasing (p[{bad}]={arr[bad]}, p[{bad + 1}]={arr[bad + 1]})"
        )
    return True


@dataclass(frozen=True, eq=False)
class RefinedGrid:
    """細分後的網格；coarse_index 指出回報深度在細網格中的位置"""
    points: np.ndarray
    coarse_index: np.ndarray
    layer_of: np.ndarray  # 每個細區間所屬的粗層編號

    @property
    def size(self) -> int:
        return int(self.points.size)

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.points)


@dataclass(frozen=True, eq=False)
class DepthGrid:
    points: np.ndarray

    def __post_init__(self):
        arr = np.array(self.points, dtype=float).reshape(-1)
        validate_grid(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)

    @classmethod
    def uniform(cls, p_min: float, q: float, layers: int) -> "DepthGrid":
        if layers < 1:
            raise TooFewPoints(f"need at least one layer, got {layers}")
        return cls(np.linspace(p_min, q, layers + 1))

    @property
    def terminal(self) -> float:
        return float(self.points[-1])

    @property
    def p_min(self) -> float:
        return float(self.points[0])

    @property
    def size(self) -> int:
        return int(self.points.size)

    @property
    def layers(self) -> int:
        return self.size - 1

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.points)

    def index_of(self, p: float, tol: float = 1e-12) -> Optional[int]:
        """回傳 p 在網格上的索引；不在網格上時回傳 None"""
        scale = max(1.0, float(np.max(np.abs(self.points))))
        hits = np.nonzero(np.abs(self.points - p) <= tol * scale)[0]
        return int(hits[0]) if hits.size else None

    def refine(self, substeps: int = 1) -> RefinedGrid:
        """每個區間切成 substeps 個 Euler 子步，回報深度不變"""
        if substeps < 1:
            raise InImNetError(f"substeps must be >= 1, got {substeps}")
        k = int(substeps)
        pieces = [np.linspace(a, b, k + 1)[:-1] for a, b in zip(self.points[:-1], self.points[1:])]
        fine = np.concatenate(pieces + [self.points[-1:]])
        coarse_index = np.arange(self.size) * k
        layer_of = np.repeat(np.arange(self.layers), k)
        return RefinedGrid(points=fine, coarse_index=coarse_index, layer_of=layer_of)


@dataclass(frozen=True, eq=False)
class LayerParams:
    """
    層參數 Ψ(p_i, x)

    - shared: 所有層共用一個 θ (values.shape == (M,))
    - per_layer: 每層一組 θ_i (values.shape == (L, M))，q 點使用最後一層
    """
    values: np.ndarray
    sharing: SharingMode = "shared"

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if self.sharing == "shared":
            arr = arr.reshape(-1)
        elif self.sharing == "per_layer":
            if arr.ndim != 2 or arr.shape[0] < 1:
                raise LengthMismatch(f"per-layer parameters need shape (L, M), got {arr.shape}")
        else:
            raise InImNetError(f"unknown parameter sharing '{self.sharing}'")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteEntry("layer parameters contain non-finite entries")
        object.__setattr__(self, "values", arr)

    @classmethod
    def shared(cls, theta) -> "LayerParams":
        return cls(np.asarray(theta, dtype=float), "shared")

    @classmethod
    def per_layer(cls, thetas) -> "LayerParams":
        return cls(np.asarray(thetas, dtype=float), "per_layer")

    @classmethod
    def broadcast(cls, theta, layers: int, sharing: SharingMode) -> "LayerParams":
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if sharing == "shared":
            return cls.shared(theta)
        return cls.per_layer(np.tile(theta, (layers, 1)))

    @property
    def param_count(self) -> int:
        return int(self.values.shape[-1])

    @property
    def layer_count(self) -> Optional[int]:
        return None if self.sharing == "shared" else int(self.values.shape[0])

    def at(self, layer: int) -> np.ndarray:
        if self.sharing == "shared":
            return self.values
        return self.values[min(int(layer), self.values.shape[0] - 1)]

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1).copy()

    def with_flat(self, flat) -> "LayerParams":
        return LayerParams(np.asarray(flat, dtype=float).reshape(self.values.shape), self.sharing)

    def schedule(self, grid: DepthGrid) -> Callable[[float], np.ndarray]:
        """θ(t)：在網格區間上分段常數的參數排程"""
        points = grid.points

        def theta_at(t: float) -> np.ndarray:
            layer = int(np.searchsorted(points, t, side="right")) - 1
            return self.at(min(max(layer, 0), grid.layers - 1))

        return theta_at


def constant_schedule(theta) -> Callable[[float], np.ndarray]:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    return lambda t: theta


@dataclass(frozen=True)
class JacobianScheme:
    """
    ∇_x 估計方式

    - exact: 直接解 variational equation 當 oracle
    - symmetric: 2N+1 個 co-state 的對稱差分
    - newton: N+1 個 co-state 的前向差分
    - cropped: 略去二階項 ∇_x∇_x z · Φ
    """
    mode: SchemeMode = "cropped"
    deltas: Optional[Tuple[float, ...]] = None
    delta_scale: float = 1e-3
    # shifted co-state 使用 sign·J；-1 為逐字的取負號近似，會發散
    newton_shift_sign: float = 1.0
    # True 時 Λ 的更新使用 ∇_xΛ(p_i) 而非 ∇_xΛ(p_{i+1})
    implicit_adjoint: bool = False

    def __post_init__(self):
        if self.mode not in SCHEME_MODES:
            raise InImNetError(f"unknown Jacobian scheme '{self.mode}'. Supported: {', '.join(SCHEME_MODES)}")
        if self.deltas is not None:
            d = np.asarray(self.deltas, dtype=float)
            if d.size == 0 or not np.all(np.isfinite(d)) or np.any(d <= 0.0):
                raise NonFiniteEntry(f"scheme deltas must be positive and finite, got {self.deltas}")
            object.__setattr__(self, "deltas", tuple(float(v) for v in d.reshape(-1)))
        if not (np.isfinite(self.delta_scale) and self.delta_scale > 0.0):
            raise NonFiniteEntry(f"delta_scale must be positive, got {self.delta_scale}")

    def resolve_deltas(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.deltas is None:
            return self.delta_scale * (1.0 + np.abs(x))
        d = np.asarray(self.deltas, dtype=float)
        if d.size == 1:
            return np.full(x.shape, d[0])
        if d.size != x.size:
            raise LengthMismatch(f"scheme has {d.size} deltas for a state of length {x.size}")
        return d


@dataclass(frozen=True, eq=False)
class StateBundle:
    """各深度輸出 z(q; p_i, x) 與 Jacobian 估計 J_i"""
    depths: np.ndarray
    outputs: np.ndarray
    jacobians: np.ndarray
    inputs: np.ndarray

    def check_trivial(self) -> None:
        n = self.inputs.size
        assert np.array_equal(self.outputs[-1], self.inputs), "z(q;q,x) must equal x"
        assert np.array_equal(self.jacobians[-1], np.eye(n)), "J(q;q,x) must be the identity"

    @property
    def p_min_output(self) -> np.ndarray:
        return self.outputs[0]


@dataclass(frozen=True, eq=False)
class AdjointBundle:
    """各深度的 imbedded adjoint Λ(p_i, x)，可附帶 Λθ / Λt"""
    depths: np.ndarray
    lam: np.ndarray
    lam_jacobians: np.ndarray
    lam_theta: Optional[np.ndarray] = None
    lam_t: Optional[np.ndarray] = None
    inputs: Optional[np.ndarray] = field(default=None)
    # time-series 模式下共同演化的 z(q; p_i, x)
    outputs: Optional[np.ndarray] = None

    def check_trivial(self, grad_terminal: np.ndarray, phi_q: Optional[np.ndarray] = None,
                      running_q: float = 0.0) -> None:
        assert np.array_equal(self.lam[-1], grad_terminal), "Λ(q,x) must equal ∇T(x)"
        if self.lam_theta is not None:
            assert not np.any(self.lam_theta[-1]), "Λθ(q,x) must be zero"
        if self.lam_t is not None and phi_q is not None:
            expected = float(np.sum(self.lam[-1] * phi_q, axis=-1) + running_q)
            assert np.isclose(self.lam_t[-1], expected, rtol=1e-12, atol=1e-14), "Λt(q,x) must equal <Λ(q,x), Φ(q,x)> + R(q,x)"


def check_lengths(name: str, got: Sequence, expected: int) -> None:
    if len(got) != expected:
        raise LengthMismatch(f"{name}: expected {expected} entries, got {len(got)}")
