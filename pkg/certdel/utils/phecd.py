"""
预处理模型下的可认证删除混合加密 pHE-CD

iKEM 建立密钥，DEM-CD 承载逐比特的量子/经典载荷。C1 纯经典，量子部分只在 C2 中。
方案本身从不释放 K；验证通过后释放密钥是游戏环境的动作。
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple
import logging

import numpy as np

from ..exceptions import KeyLengthError
from . import bits as bitops
from . import wire
from .correlated import CorrelatedTriple
from .demcd import Certificate, DemCd, DemCdCiphertext, VerificationKey, DEFAULT_MODE
from .ikem import Ikem, IkemCapsule

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class HybridCiphertext:
    """CT = (C1, [C2, ...])；per_bit_capsule 模式下每个比特有自己的 C1"""
    c1: IkemCapsule
    c2: List[DemCdCiphertext]
    extra_capsules: List[IkemCapsule] = field(default_factory=list)

    @property
    def capsules(self) -> List[IkemCapsule]:
        return [self.c1] + list(self.extra_capsules)

    def classical_bytes(self) -> bytes:
        """c1 ‖ u32 计数 ‖ 每比特 cpart（各自带 u32 字节长度）；量子部分不序列化"""
        data = self.c1.to_bytes()
        data += wire.write_sequence([c2.cpart.to_bytes() for c2 in self.c2])
        if self.extra_capsules:
            data += wire.write_sequence([capsule.to_bytes() for capsule in self.extra_capsules])
        return data


def encode_vk_list(vks: List[VerificationKey]) -> bytes:
    return wire.write_sequence([vk.to_bytes() for vk in vks])


def decode_vk_list(data: bytes) -> List[VerificationKey]:
    items, offset = wire.read_sequence(data, 0)
    wire.expect_end(data, offset)
    return [VerificationKey.from_bytes(item) for item in items]


def encode_cert_list(certs: List[Certificate]) -> bytes:
    return wire.write_sequence([cert.to_bytes() for cert in certs])


def decode_cert_list(data: bytes) -> List[Certificate]:
    items, offset = wire.read_sequence(data, 0)
    wire.expect_end(data, offset)
    return [Certificate.from_bytes(item) for item in items]


class PheCd:
    """
    pHE-CD = iKEM + DEM-CD

    Args:
        ikem: 密钥封装
        demcd: 单比特 DEM-CD（决定 λ 和 DEM 变体）
        per_bit_capsule: 每个消息比特单独做一次 iKEM 封装
    """

    def __init__(self, ikem: Ikem, demcd: DemCd, per_bit_capsule: bool = False):
        self.ikem = ikem
        self.demcd = demcd
        self.per_bit_capsule = per_bit_capsule
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    @property
    def lam(self) -> int:
        return self.demcd.lam

    def required_key_len(self, message_len: int) -> int:
        units = 1 if self.per_bit_capsule else message_len
        return self.demcd.key_len_for(units)

    def check_key_len(self, message_len: int) -> None:
        needed = self.required_key_len(message_len)
        if self.ikem.params.key_len < needed:
            raise KeyLengthError(
                f"iKEM 密钥长度 {self.ikem.params.key_len} 不足，"
                f"{message_len} 比特消息需要 {needed} 比特（{self.demcd.dem.variant}）"
            )

    def keygen(self, rng: np.random.Generator) -> CorrelatedTriple:
        return self.ikem.gen(rng)

    def enc(self, x: np.ndarray, message: np.ndarray,
            rng: np.random.Generator) -> Tuple[List[VerificationKey], HybridCiphertext]:
        """(K, C1) ← iK.Encap(X)；逐比特 DEM-CD 加密"""
        vks, ct, _ = self.enc_with_keys(x, message, rng)
        return vks, ct

    def enc_with_keys(self, x: np.ndarray, message: np.ndarray,
                      rng: np.random.Generator
                      ) -> Tuple[List[VerificationKey], HybridCiphertext, List[np.ndarray]]:
        """
        同 enc，另外返回封装出的 iKEM 密钥

        Returns:
            (vks, CT, keys)：keys 与 recover_keys 的形状一致，只留在挑战者一侧
        """
        message = bitops.as_bits(message)
        self.check_key_len(len(message))
        if not self.per_bit_capsule:
            key, c1 = self.ikem.encap(x, rng)
            vks, c2s = self.demcd.encap_multi(key, message, rng)
            return vks, HybridCiphertext(c1, c2s), [key]

        vks, c2s, capsules, keys = [], [], [], []
        for bit in message:
            key, capsule = self.ikem.encap(x, rng)
            vk, c2 = self.demcd.encap(self.demcd.key_slice(key, 0), int(bit), rng)
            vks.append(vk)
            c2s.append(c2)
            capsules.append(capsule)
            keys.append(key)
        return vks, HybridCiphertext(capsules[0], c2s, capsules[1:]), keys

    def recover_keys(self, y: np.ndarray, ct: HybridCiphertext) -> Optional[List[np.ndarray]]:
        """按 CT 中的封装逐个 Decap；任意一个失败即 None"""
        keys = []
        for capsule in ct.capsules:
            key = self.ikem.decap(y, capsule)
            if key is None:
                return None
            keys.append(key)
        return keys

    def dec_with_keys(self, keys: List[np.ndarray], ct: HybridCiphertext,
                      rng: np.random.Generator) -> Optional[np.ndarray]:
        if not self.per_bit_capsule:
            return self.demcd.decap_multi(keys[0], ct.c2, rng)
        return self.demcd.decap_each([self.demcd.key_slice(key, 0) for key in keys], ct.c2, rng)

    def dec(self, y: np.ndarray, ct: HybridCiphertext, rng: np.random.Generator) -> Optional[np.ndarray]:
        """K = iK.Decap(Y, C1)；K = ⊥ 时返回 None；否则逐比特 DEM-CD 解密"""
        keys = self.recover_keys(y, ct)
        if keys is None:
            self.logger.debug("iKEM 解封装失败，返回 ⊥")
            return None
        return self.dec_with_keys(keys, ct, rng)

    def delete(self, ct: HybridCiphertext, rng: np.random.Generator) -> List[Certificate]:
        """逐比特 Hadamard 测量；C1 不受影响"""
        return self.demcd.delete_multi(ct.c2, rng)

    def verify(self, vks: List[VerificationKey], certs: List[Certificate],
               mode: str = DEFAULT_MODE) -> bool:
        return self.demcd.verify_multi(vks, certs, mode)
