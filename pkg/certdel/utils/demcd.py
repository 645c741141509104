"""
可认证删除的数据封装 DEM-CD

单比特方案：随机选 x, θ ∈ {0,1}^λ，量子部分为 |x⟩_θ，经典部分是
DEM 加密的 (θ, m ⊕ ⊕_{θ_i=0} x_i)，验证密钥 vk = (x, θ)。
OTP 变体即构造一中的信息论 DEM-CD，stream 变体是构造二的组件。

验证规则：
- default：只检查 θ_i = 1 的位置（诚实删除必然通过）；
- strict：检查全部 λ 个位置（诚实删除在 θ 含 0 时会被拒绝，仅用于对比）。
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple
import logging

import numpy as np

from ..exceptions import KeyLengthError, LengthMismatchError, ParameterError
from . import bits as bitops
from . import qsim, wire
from .dem import Dem, DemCiphertext, OTP, STREAM_KEY_BITS
from .qsim import QRegister

logger = logging.getLogger(__name__)

DEFAULT_MODE = 'default'
STRICT_MODE = 'strict'
VRFY_MODES = (DEFAULT_MODE, STRICT_MODE)


@dataclass(frozen=True, eq=False)
class VerificationKey:
    x: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        if len(self.x) != len(self.theta):
            raise LengthMismatchError(f"vk 中 |x| = {len(self.x)} 与 |θ| = {len(self.theta)} 不一致")

    @property
    def lam(self) -> int:
        return len(self.x)

    def to_bytes(self) -> bytes:
        return wire.write_bits(self.x) + wire.write_bits(self.theta)

    @classmethod
    def from_bytes(cls, data: bytes) -> 'VerificationKey':
        x, offset = wire.read_bits(data, 0)
        theta, offset = wire.read_bits(data, offset)
        wire.expect_end(data, offset)
        return cls(x, theta)


@dataclass(frozen=True, eq=False)
class Certificate:
    bits: np.ndarray

    def to_bytes(self) -> bytes:
        return wire.write_bits(self.bits)

    @classmethod
    def from_bytes(cls, data: bytes) -> 'Certificate':
        value, offset = wire.read_bits(data, 0)
        wire.expect_end(data, offset)
        return cls(value)


@dataclass(eq=False)
class DemCdCiphertext:
    """C2 = (qpart, cpart)；qpart 永不序列化"""
    qpart: QRegister
    cpart: DemCiphertext


def mask_bit(x: np.ndarray, theta: np.ndarray) -> int:
    """⊕_{i:θ_i=0} x_i"""
    return bitops.parity(x[theta == 0])


class DemCd:
    """单比特 DEM-CD 及其逐比特扩展"""

    def __init__(self, dem: Dem, lam: int):
        if lam < 1:
            raise ParameterError(f"λ 至少为 1，得到 {lam}")
        self.dem = dem
        self.lam = lam
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    @property
    def plaintext_len(self) -> int:
        """经典部分明文 θ ‖ m′ 的长度"""
        return self.lam + 1

    def key_len_for(self, message_len: int) -> int:
        """OTP 变体每个消息比特消耗 λ+1 个密钥比特；stream 变体复用整个密钥"""
        if self.dem.variant == OTP:
            return message_len * self.plaintext_len
        return 1

    def key_slice(self, key: np.ndarray, index: int) -> np.ndarray:
        if self.dem.variant == OTP:
            width = self.plaintext_len
            return key[index * width:(index + 1) * width]
        return key

    def gen(self, rng: np.random.Generator, message_len: int = 1) -> np.ndarray:
        if self.dem.variant == OTP:
            return self.dem.gen(self.key_len_for(message_len), rng)
        return self.dem.gen(STREAM_KEY_BITS, rng)

    def encap(self, key: np.ndarray, m: int, rng: np.random.Generator,
              x: Optional[np.ndarray] = None,
              theta: Optional[np.ndarray] = None) -> Tuple[VerificationKey, DemCdCiphertext]:
        """
        加密单个比特

        Args:
            key: DEM 密钥
            m: 明文比特
            rng: 随机源
            x, theta: 固定的随机性（测试用），缺省时均匀抽取

        Returns:
            (vk, C2)
        """
        key = bitops.as_bits(key)
        if self.dem.variant == OTP and len(key) < self.plaintext_len:
            raise KeyLengthError(f"OTP 密钥需要 {self.plaintext_len} 比特，只有 {len(key)}")
        x = bitops.random_bits(rng, self.lam) if x is None else bitops.as_bits(x)
        theta = bitops.random_bits(rng, self.lam) if theta is None else bitops.as_bits(theta)
        bitops.require_length(x, self.lam, 'x')
        bitops.require_length(theta, self.lam, 'θ')

        masked = (int(m) & 1) ^ mask_bit(x, theta)
        plaintext = np.concatenate([theta, np.array([masked], dtype=np.uint8)])
        cpart = self.dem.encap(key, plaintext, rng)
        return VerificationKey(x, theta), DemCdCiphertext(qsim.prepare_bb84(x, theta), cpart)

    def open_cpart(self, key: np.ndarray, c2: DemCdCiphertext) -> Optional[Tuple[np.ndarray, int]]:
        """只解经典部分，得到 (θ, m′)；不触碰量子部分"""
        plaintext = self.dem.decap(key, c2.cpart)
        if plaintext is None or len(plaintext) != self.plaintext_len:
            return None
        return plaintext[:self.lam], int(plaintext[self.lam])

    def measure_opened(self, opened: Tuple[np.ndarray, int], c2: DemCdCiphertext,
                       rng: np.random.Generator) -> int:
        theta, masked = opened
        x = qsim.measure(c2.qpart, theta, rng)
        return masked ^ mask_bit(x, theta)

    def decap(self, key: np.ndarray, c2: DemCdCiphertext, rng: np.random.Generator) -> Optional[int]:
        """解经典部分得到 (θ, m′)，在 θ 基下测量量子部分；DEM 失败返回 None 且不消耗寄存器"""
        opened = self.open_cpart(key, c2)
        if opened is None:
            return None
        return self.measure_opened(opened, c2, rng)

    def delete(self, c2: DemCdCiphertext, rng: np.random.Generator) -> Certificate:
        """在 Hadamard 基下测量全部量子比特，结果即证书"""
        return Certificate(qsim.measure(c2.qpart, np.ones(c2.qpart.num_qubits, dtype=np.uint8), rng))

    def verify(self, vk: VerificationKey, cert: Certificate, mode: str = DEFAULT_MODE) -> bool:
        if mode not in VRFY_MODES:
            raise ParameterError(f"未知验证模式: {mode}")
        cert_bits = bitops.as_bits(cert.bits)
        if len(cert_bits) != vk.lam:
            raise LengthMismatchError(f"证书长度 {len(cert_bits)} 与 λ = {vk.lam} 不一致")
        if mode == STRICT_MODE:
            return bool(np.array_equal(cert_bits, vk.x))
        checked = vk.theta == 1
        return bool(np.array_equal(cert_bits[checked], vk.x[checked]))

    # 逐比特扩展：每个消息比特独立的 (x, θ)

    def encap_multi(self, key: np.ndarray, message: np.ndarray,
                    rng: np.random.Generator) -> Tuple[List[VerificationKey], List[DemCdCiphertext]]:
        message = bitops.as_bits(message)
        key = bitops.as_bits(key)
        needed = self.key_len_for(len(message))
        if len(key) < needed:
            raise KeyLengthError(f"{len(message)} 比特消息需要 {needed} 比特密钥，只有 {len(key)}")
        vks, c2s = [], []
        for index, bit in enumerate(message):
            vk, c2 = self.encap(self.key_slice(key, index), int(bit), rng)
            vks.append(vk)
            c2s.append(c2)
        return vks, c2s

    def decap_multi(self, key: np.ndarray, c2s: List[DemCdCiphertext],
                    rng: np.random.Generator) -> Optional[np.ndarray]:
        """先解全部经典部分，任意一个失败即 None 且不测量任何寄存器"""
        keys = [self.key_slice(key, index) for index in range(len(c2s))]
        return self.decap_each(keys, c2s, rng)

    def decap_each(self, keys: List[np.ndarray], c2s: List[DemCdCiphertext],
                   rng: np.random.Generator) -> Optional[np.ndarray]:
        """每个比特用各自的密钥；语义同 decap_multi"""
        opened = [self.open_cpart(key, c2) for key, c2 in zip(keys, c2s)]
        if any(item is None for item in opened):
            self.logger.debug("存在无法解密的经典部分，寄存器保持未测量")
            return None
        return np.array([self.measure_opened(item, c2, rng) for item, c2 in zip(opened, c2s)], dtype=np.uint8)

    def delete_multi(self, c2s: List[DemCdCiphertext], rng: np.random.Generator) -> List[Certificate]:
        return [self.delete(c2, rng) for c2 in c2s]

    def verify_multi(self, vks: List[VerificationKey], certs: List[Certificate],
                     mode: str = DEFAULT_MODE) -> bool:
        """全部比特都通过才为 ⊤"""
        if len(vks) != len(certs):
            raise LengthMismatchError(f"证书数量 {len(certs)} 与消息比特数 {len(vks)} 不一致")
        return all(self.verify(vk, cert, mode) for vk, cert in zip(vks, certs))
