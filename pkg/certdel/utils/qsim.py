"""
最小量子模拟器

只覆盖共轭编码所需的部分：BB84 态制备、逐比特测量、以及（≤3 个量子比特时）
精确的密度矩阵分析。

单比特实态统一用“八分之一转角”k ∈ Z_8 表示：
    |ψ_k⟩ = cos(kπ/8)|0⟩ + sin(kπ/8)|1⟩
BB84 四态是 k ∈ {0, 4, 2, 6}（|0⟩, |1⟩, |+⟩, |−⟩）。测量基也按同样方式编号：
计算基 0、Breidbart(π/8) 基 1、Hadamard 基 2；结果 0 对应 |ψ_a⟩，结果 1 对应 |ψ_{a+4}⟩。
"""
from typing import Optional
import logging

import numpy as np

from ..exceptions import LengthMismatchError, ParameterError, RegisterConsumedError
from . import bits as bitops

logger = logging.getLogger(__name__)

TOLERANCE = 1e-10
MAX_DENSE_QUBITS = 3

COMPUTATIONAL = 0
BREIDBART = 1
HADAMARD = 2

_C = float(np.cos(np.pi / 8))
_S = float(np.sin(np.pi / 8))
_R = float(np.sqrt(0.5))

# cos²(dπ/8)，d = (k - a) mod 8；匹配基的 0/1 是精确值
COS2_PI_8 = (2 + np.sqrt(2)) / 4
SIN2_PI_8 = (2 - np.sqrt(2)) / 4
_P0 = np.array([1.0, COS2_PI_8, 0.5, SIN2_PI_8, 0.0, SIN2_PI_8, 0.5, COS2_PI_8])

_AMPLITUDES = np.array([
    [1.0, 0.0],
    [_C, _S],
    [_R, _R],
    [_S, _C],
    [0.0, 1.0],
    [-_S, _C],
    [-_R, _R],
    [-_C, _S],
])

_SYMBOLS = {0: '|0⟩', 2: '|+⟩', 4: '|1⟩', 6: '|−⟩'}


def bb84_angles(x: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """(x_i, θ_i) -> 八分之一转角：(0,0)->0, (1,0)->4, (0,1)->2, (1,1)->6"""
    return ((4 * np.asarray(x, dtype=np.int64) + 2 * np.asarray(theta, dtype=np.int64)) % 8).astype(np.int64)


def basis_angles(basis: np.ndarray) -> np.ndarray:
    """BasisString（0 计算基 / 1 Hadamard 基）-> 测量基转角"""
    return 2 * np.asarray(basis, dtype=np.int64)


def outcome_probability(state_angle: int, basis_angle: int, outcome: int) -> float:
    """在 basis_angle 基下测量 |ψ_state_angle⟩ 得到 outcome 的精确概率"""
    p0 = float(_P0[(state_angle - basis_angle) % 8])
    return p0 if outcome == 0 else 1.0 - p0


def qubit_vector(angle: int) -> np.ndarray:
    return _AMPLITUDES[angle % 8].astype(complex)


def qubit_density(angle: int) -> np.ndarray:
    v = qubit_vector(angle)
    return np.outer(v, v.conj())


class DensityMatrix:
    """至多 3 个量子比特的密度矩阵，构造时校验厄米性、半正定与单位迹"""

    def __init__(self, data: np.ndarray, atol: float = TOLERANCE):
        matrix = np.array(data, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ParameterError(f"密度矩阵必须是方阵，得到形状 {matrix.shape}")
        dim = matrix.shape[0]
        num_qubits = dim.bit_length() - 1
        if dim < 2 or 2 ** num_qubits != dim or num_qubits > MAX_DENSE_QUBITS:
            raise ParameterError(f"密度矩阵维度必须是 2^k (1 ≤ k ≤ {MAX_DENSE_QUBITS})，得到 {dim}")
        if not np.allclose(matrix, matrix.conj().T, atol=atol, rtol=0):
            raise ParameterError("密度矩阵不是厄米矩阵")
        eigenvalues = np.linalg.eigvalsh((matrix + matrix.conj().T) / 2)
        if eigenvalues.min() < -atol:
            raise ParameterError(f"密度矩阵不是半正定的，最小特征值 {eigenvalues.min():.3e}")
        if abs(np.trace(matrix).real - 1.0) > atol or abs(np.trace(matrix).imag) > atol:
            raise ParameterError(f"密度矩阵的迹不为1: {np.trace(matrix)}")
        self._data = matrix
        self._data.setflags(write=False)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def trace_norm(operator: np.ndarray) -> float:
    """厄米算子的迹范数：特征值绝对值之和。用于未归一化的经典-量子分块"""
    operator = np.asarray(operator, dtype=complex)
    if operator.size == 1:
        return float(abs(operator.reshape(-1)[0]))
    hermitian = (operator + operator.conj().T) / 2
    return float(np.abs(np.linalg.eigvalsh(hermitian)).sum())


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """TD(a, b) = ½·Σ|λ_i(a − b)|"""
    if a.dim != b.dim:
        raise ParameterError(f"维度不一致: {a.dim} != {b.dim}")
    value = 0.5 * trace_norm(a.data - b.data)
    return min(1.0, max(0.0, value))


class QRegister:
    """
    λ 个量子比特的模拟寄存器

    product 模式保存每个比特的转角；dense 模式保存 2^λ × 2^λ 密度矩阵（λ ≤ 3）。
    破坏性测量之后寄存器被标记为已消耗，再次测量抛 RegisterConsumedError。
    """

    PRODUCT = 'product'
    DENSE = 'dense'

    def __init__(self, num_qubits: int, mode: str = PRODUCT,
                 angles: Optional[np.ndarray] = None,
                 density: Optional[DensityMatrix] = None):
        if num_qubits < 1:
            raise ParameterError("寄存器至少需要1个量子比特")
        self.num_qubits = num_qubits
        self.mode = mode
        self._consumed = False
        if mode == self.PRODUCT:
            angles = np.asarray(angles, dtype=np.int64) % 8
            if angles.shape != (num_qubits,):
                raise LengthMismatchError(f"需要 {num_qubits} 个单比特描述，得到 {angles.shape}")
            self._angles = angles
            self._rho = None
        elif mode == self.DENSE:
            if density is None or density.num_qubits != num_qubits:
                raise ParameterError("dense 模式需要维度匹配的 DensityMatrix")
            self._angles = None
            self._rho = np.array(density.data)
        else:
            raise ParameterError(f"未知寄存器模式: {mode}")

    @property
    def consumed(self) -> bool:
        return self._consumed

    def describe(self) -> str:
        """符号化摘要，例如 |1⟩|+⟩；供演示输出使用"""
        if self.mode == self.DENSE:
            return f"ρ[{self.num_qubits} qubits]"
        return ''.join(_SYMBOLS.get(int(k), f"|{int(k)}π/8⟩") for k in self._angles)

    def __repr__(self):
        state = 'consumed' if self._consumed else 'fresh'
        return f"QRegister({self.num_qubits}, {self.mode}, {state})"


def prepare_states(angles) -> QRegister:
    angles = np.asarray(angles, dtype=np.int64).reshape(-1)
    return QRegister(len(angles), QRegister.PRODUCT, angles=angles)


def prepare_bb84(x: np.ndarray, theta: np.ndarray) -> QRegister:
    """θ_i = 0 时第 i 比特为 |x_i⟩，θ_i = 1 时为 H|x_i⟩"""
    x = bitops.as_bits(x)
    theta = bitops.as_bits(theta)
    if len(x) != len(theta):
        raise LengthMismatchError(f"|x| = {len(x)} 与 |θ| = {len(theta)} 不一致")
    if len(x) < 1:
        raise LengthMismatchError("λ 至少为 1")
    return prepare_states(bb84_angles(x, theta))


def dense_register(density: DensityMatrix) -> QRegister:
    return QRegister(density.num_qubits, QRegister.DENSE, density=density)


def to_density(reg: QRegister) -> DensityMatrix:
    """寄存器的精确密度矩阵；0 号比特为最高位"""
    if reg.num_qubits > MAX_DENSE_QUBITS:
        raise ParameterError(f"寄存器过大，dense 模式最多 {MAX_DENSE_QUBITS} 个量子比特")
    if reg.mode == QRegister.DENSE:
        return DensityMatrix(reg._rho)
    rho = np.array([[1.0 + 0j]])
    for angle in reg._angles:
        rho = np.kron(rho, qubit_density(int(angle)))
    return DensityMatrix(rho)


def measure(reg: QRegister, basis: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """在 BasisString 给定的基（0 计算基 / 1 Hadamard 基）下破坏性测量全部比特"""
    basis = bitops.as_bits(basis)
    return measure_in(reg, basis_angles(basis), rng)


def measure_in(reg: QRegister, angles, rng: np.random.Generator) -> np.ndarray:
    """在任意菜单基（转角）下逐比特测量；匹配基的结果是确定的"""
    angles = np.asarray(angles, dtype=np.int64).reshape(-1) % 8
    if reg.consumed:
        raise RegisterConsumedError(f"{reg!r} 已被测量，不能再次测量")
    if len(angles) != reg.num_qubits:
        raise LengthMismatchError(f"测量基长度 {len(angles)} 与寄存器 {reg.num_qubits} 不一致")

    if reg.mode == QRegister.PRODUCT:
        p0 = _P0[(reg._angles - angles) % 8]
        outcomes = (rng.random(reg.num_qubits) >= p0).astype(np.uint8)
        reg._angles = (angles + 4 * outcomes.astype(np.int64)) % 8
    else:
        outcomes = _measure_dense(reg, angles, rng)

    reg._consumed = True
    return outcomes


def _measure_dense(reg: QRegister, angles: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = reg.num_qubits
    rho = reg._rho
    outcomes = np.zeros(n, dtype=np.uint8)
    for qubit, angle in enumerate(angles):
        projector = _single_qubit_projector(n, qubit, int(angle))
        p0 = float(np.real(np.trace(projector @ rho)))
        p0 = min(1.0, max(0.0, p0))
        if rng.random() < p0:
            rho = projector @ rho @ projector / p0
        else:
            other = np.eye(2 ** n) - projector
            rho = other @ rho @ other / (1.0 - p0)
            outcomes[qubit] = 1
    reg._rho = rho
    return outcomes


def _single_qubit_projector(num_qubits: int, qubit: int, angle: int) -> np.ndarray:
    """|ψ_angle⟩⟨ψ_angle| 作用在第 qubit 个比特上（0 号为最高位）"""
    before = np.eye(2 ** qubit)
    after = np.eye(2 ** (num_qubits - qubit - 1))
    return np.kron(np.kron(before, qubit_density(angle)), after)
