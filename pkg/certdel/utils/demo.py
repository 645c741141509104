"""
端到端演示：keygen → enc → {dec | del → vrfy}

经典字段以十六进制输出，量子部分只给符号摘要。
"""
from typing import Any, Dict, List
import logging

import numpy as np

from . import bits as bitops
from .demcd import DEFAULT_MODE
from .phecd import HybridCiphertext, encode_cert_list, encode_vk_list
from .presets import Components

logger = logging.getLogger(__name__)

DECRYPT = 'decrypt'
DELETE = 'delete'
BOTH = 'both'
PATHS = (DECRYPT, DELETE, BOTH)


class DemoRunner:
    """
    一次演示会话

    Args:
        components: 装配好的方案
        seed: 随机种子
        vrfy_mode: 验证模式
    """

    def __init__(self, components: Components, seed: int, vrfy_mode: str = DEFAULT_MODE):
        self.components = components
        self.seed = seed
        self.vrfy_mode = vrfy_mode
        self.rng = np.random.default_rng(seed)
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    def run(self, message: np.ndarray, path: str) -> Dict[str, Any]:
        """
        执行演示并返回 transcript

        path = both 时先解密再删除；第二次破坏性测量抛出 RegisterConsumedError，由调用方处理。
        """
        phecd = self.components.phecd
        transcript: Dict[str, Any] = {
            'path': path,
            'seed': self.seed,
            'params': self.components.params(),
            'vrfy_mode': self.vrfy_mode,
            'message': bitops.to_str(message),
        }

        triple = phecd.keygen(self.rng)
        transcript['keygen'] = {
            'x': bitops.to_hex(triple.x),
            'y': bitops.to_hex(triple.y),
            'z': bitops.to_hex(triple.z),
            'x_y_distance': bitops.hamming(triple.x, triple.y),
        }
        vks, ct = phecd.enc(triple.x, message, self.rng)
        transcript['ciphertext'] = self._describe_ciphertext(ct)
        transcript['vks'] = encode_vk_list(vks).hex()
        self.logger.info(f"已加密 {len(message)} 比特消息，λ = {phecd.lam}")

        if path in (DECRYPT, BOTH):
            transcript['decrypt'] = self._decrypt(triple.y, ct, message)
        if path in (DELETE, BOTH):
            transcript['delete'] = self._delete(vks, ct)
        return transcript

    def _describe_ciphertext(self, ct: HybridCiphertext) -> Dict[str, Any]:
        return {
            'c1': [capsule.to_bytes().hex() for capsule in ct.capsules],
            'c2': [
                {'qpart': c2.qpart.describe(), 'cpart': c2.cpart.to_bytes().hex()}
                for c2 in ct.c2
            ],
            'classical': ct.classical_bytes().hex(),
        }

    def _decrypt(self, y: np.ndarray, ct: HybridCiphertext, message: np.ndarray) -> Dict[str, Any]:
        recovered = self.components.phecd.dec(y, ct, self.rng)
        if recovered is None:
            self.logger.warning("解密返回 ⊥")
            return {'recovered': None, 'matches': False}
        return {'recovered': bitops.to_str(recovered), 'matches': bool(np.array_equal(recovered, message))}

    def _delete(self, vks, ct: HybridCiphertext) -> Dict[str, Any]:
        certs = self.components.phecd.delete(ct, self.rng)
        accepted = self.components.phecd.verify(vks, certs, self.vrfy_mode)
        return {'certs': encode_cert_list(certs).hex(), 'verified': bool(accepted)}


def render_text(transcript: Dict[str, Any]) -> List[str]:
    """人类可读的演示输出"""
    lines = [
        f"🔐 pHE-CD 演示 (path = {transcript['path']}, seed = {transcript['seed']})",
        f"📋 消息: {transcript['message']}",
        f"🔑 X = {transcript['keygen']['x']}",
        f"🔑 Y = {transcript['keygen']['y']}  (d(X, Y) = {transcript['keygen']['x_y_distance']})",
        f"👁  Z = {transcript['keygen']['z']}",
        f"📦 C1 = {', '.join(transcript['ciphertext']['c1'])}",
    ]
    for index, c2 in enumerate(transcript['ciphertext']['c2']):
        lines.append(f"  C2[{index}] qpart = {c2['qpart']}  cpart = {c2['cpart']}")
    if 'decrypt' in transcript:
        recovered = transcript['decrypt']['recovered']
        lines.append(f"🔓 解密结果: {'⊥' if recovered is None else recovered}")
    if 'delete' in transcript:
        lines.append(f"🗑  证书: {transcript['delete']['certs']}")
        lines.append(f"✅ 验证: {'⊤' if transcript['delete']['verified'] else '⊥'}")
    return lines
