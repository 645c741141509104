"""
一次性数据封装 DEM

两个变体共用一个接口：
- otp: 信息论安全的一次一密，c = m ⊕ K 前缀；
- stream: AES-128-CTR 密钥流，AES 密钥由 HKDF-SHA256(K) 派生，每条消息一个 12 字节随机 nonce。

一次性使用是游戏层的约定，这里不强制。
"""
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Optional, Union
import logging

import numpy as np
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from ..exceptions import KeyLengthError, ParameterError
from . import bits as bitops
from . import wire

logger = logging.getLogger(__name__)

OTP = 'otp'
STREAM = 'stream'
VARIANTS = (OTP, STREAM)
VARIANT_TAGS = {OTP: 0x00, STREAM: 0x01}

NONCE_BYTES = 12
STREAM_KEY_BITS = 128
HKDF_INFO = b'certdel dem stream v1'

DemKey = np.ndarray


def aes_ctr_keystream(aes_key: bytes, counter_block: bytes, nbytes: int) -> bytes:
    """原始 AES-CTR 密钥流（对全零明文加密），counter_block 为 16 字节初始计数块"""
    encryptor = Cipher(algorithms.AES(aes_key), modes.CTR(counter_block)).encryptor()
    return encryptor.update(b'\x00' * nbytes) + encryptor.finalize()


def derive_stream_key(key: np.ndarray) -> bytes:
    """HKDF-SHA256(长度前缀 ‖ K) -> 16 字节 AES 密钥"""
    return _derive(wire.write_bits(key))


@lru_cache(maxsize=4096)
def _derive(framed_key: bytes) -> bytes:
    # 同一个 K 在逐比特加解密中反复出现
    return HKDF(
        algorithm=hashes.SHA256(),
        length=16,
        salt=None,
        info=HKDF_INFO,
    ).derive(framed_key)


def stream_keystream(key: np.ndarray, nonce: bytes, nbits: int) -> np.ndarray:
    """计数块为 nonce ‖ 32 位大端计数器（从 0 开始）"""
    raw = aes_ctr_keystream(derive_stream_key(key), nonce + b'\x00\x00\x00\x00', (nbits + 7) // 8)
    return bitops.unpack(raw, nbits)


@dataclass(frozen=True, eq=False)
class DemCiphertext:
    variant: str
    payload: np.ndarray
    nonce: bytes = b''

    def to_bytes(self) -> bytes:
        """1 字节变体标签 ‖ nonce（仅 stream）‖ u16 比特长度 ‖ 打包载荷"""
        return bytes([VARIANT_TAGS[self.variant]]) + self.nonce + wire.write_bits(self.payload)

    @classmethod
    def from_bytes(cls, data: bytes) -> 'DemCiphertext':
        if not data:
            raise wire.FramingError("空的 DEM 密文")
        tags = {tag: name for name, tag in VARIANT_TAGS.items()}
        if data[0] not in tags:
            raise wire.FramingError(f"未知变体标签 0x{data[0]:02x}")
        variant = tags[data[0]]
        offset = 1
        nonce = b''
        if variant == STREAM:
            if len(data) < offset + NONCE_BYTES:
                raise wire.FramingError("nonce 被截断")
            nonce = data[offset:offset + NONCE_BYTES]
            offset += NONCE_BYTES
        payload, offset = wire.read_bits(data, offset)
        wire.expect_end(data, offset)
        return cls(variant, payload, nonce)

    def __eq__(self, other):
        if not isinstance(other, DemCiphertext):
            return NotImplemented
        return self.to_bytes() == other.to_bytes()

    def __hash__(self):
        return hash(self.to_bytes())


class Dem:
    """DEM.Gen / DEM.Encap / DEM.Decap"""

    def __init__(self, variant: str = OTP):
        if variant not in VARIANTS:
            raise ParameterError(f"未知 DEM 变体: {variant}")
        self.variant = variant
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    @property
    def is_information_theoretic(self) -> bool:
        return self.variant == OTP

    def required_key_len(self, message_len: int) -> int:
        return message_len if self.variant == OTP else 1

    def gen(self, length: int, rng: np.random.Generator) -> DemKey:
        if length < 1:
            raise ParameterError(f"DEM 密钥长度至少为 1，得到 {length}")
        return bitops.random_bits(rng, length)

    def encap(self, key: DemKey, message: np.ndarray,
              rng: Optional[np.random.Generator] = None) -> DemCiphertext:
        """
        加密一条消息

        Args:
            key: DEM 密钥（比特串）
            message: 明文比特串
            rng: stream 变体生成 nonce 用的随机源

        Returns:
            DemCiphertext
        """
        key = bitops.as_bits(key)
        message = bitops.as_bits(message)
        if self.variant == OTP:
            if len(message) > len(key):
                raise KeyLengthError(f"一次一密密钥过短: |m| = {len(message)} > |K| = {len(key)}")
            return DemCiphertext(OTP, np.bitwise_xor(message, key[:len(message)]))

        if rng is None:
            raise ParameterError("stream 变体需要随机源来生成 nonce")
        if len(key) < 1:
            raise KeyLengthError("stream 变体密钥不能为空")
        nonce = rng.bytes(NONCE_BYTES)
        payload = np.bitwise_xor(message, stream_keystream(key, nonce, len(message)))
        return DemCiphertext(STREAM, payload, nonce)

    def decap(self, key: DemKey, ciphertext: Union[DemCiphertext, bytes]) -> Optional[np.ndarray]:
        """解密；帧格式错误、变体不符或密钥过短时返回 None（⊥）"""
        if isinstance(ciphertext, (bytes, bytearray)):
            try:
                ciphertext = DemCiphertext.from_bytes(bytes(ciphertext))
            except wire.FramingError as e:
                self.logger.debug(f"DEM 密文帧格式错误: {e}")
                return None
        if ciphertext.variant != self.variant:
            self.logger.debug(f"DEM 变体不符: {ciphertext.variant} != {self.variant}")
            return None
        key = bitops.as_bits(key)
        payload = ciphertext.payload
        if self.variant == OTP:
            if len(payload) > len(key):
                return None
            return np.bitwise_xor(payload, key[:len(payload)])
        if len(ciphertext.nonce) != NONCE_BYTES or len(key) < 1:
            return None
        return np.bitwise_xor(payload, stream_keystream(key, ciphertext.nonce, len(payload)))


def exact_otp_advantage(message_len: int = 1) -> float:
    """
    穷举 (K, m0, m1, b) 得到一次一密的精确 IND-OT 优势

    对每一对 (m0, m1) 计算两种密文分布的统计距离，取最大值；完美保密时为 0。
    """
    if message_len > 4:
        raise ParameterError("穷举只支持 |m| ≤ 4")
    dem = Dem(OTP)
    messages = bitops.all_strings(message_len)
    keys = bitops.all_strings(message_len)
    best = 0.0
    for m0, m1 in product(messages, repeat=2):
        counts = np.zeros((2, 2 ** message_len))
        for b, m in enumerate((m0, m1)):
            for key in keys:
                counts[b, bitops.to_int(dem.encap(key, m).payload)] += 1
        distribution = counts / len(keys)
        best = max(best, 0.5 * float(np.abs(distribution[0] - distribution[1]).sum()))
    return best
