"""
参数预设与组件装配

这张参数表由我们自己确定，推导见 doc/PARAMETERS.md。
"""
from dataclasses import dataclass
from typing import Any, Dict
import logging

from .correlated import SourceSpec
from .dem import Dem
from .demcd import DemCd
from .ikem import Ikem, IkemParams
from .phecd import PheCd

logger = logging.getLogger(__name__)

PRESETS: Dict[str, Dict[str, Any]] = {
    # 穷举/IKIND 用的小参数
    'tiny': {
        'n': 8, 'p_b': 0.0, 'p_e': 0.25, 'key_len': 2, 'check_len': 1, 'block_len': 0,
        'lam': 1, 'dem': 'otp',
    },
    # λ = 3 的 oracle 交叉验证；p_E = 0.5 时 Z 与 X 独立
    'oracle': {
        'n': 32, 'p_b': 0.0, 'p_e': 0.5, 'key_len': 8, 'check_len': 8, 'block_len': 0,
        'lam': 3, 'dem': 'otp',
    },
    'noiseless': {
        'n': 128, 'p_b': 0.0, 'p_e': 0.25, 'key_len': 34, 'check_len': 8, 'block_len': 0,
        'lam': 16, 'dem': 'otp',
    },
    # 带噪声的参考参数，δ ≈ 0.019（分块码解析上界）
    'reference': {
        'n': 256, 'p_b': 0.005, 'p_e': 0.25, 'key_len': 64, 'check_len': 16, 'block_len': 7,
        'lam': 16, 'dem': 'stream',
    },
}

DEFAULT_PRESET = 'reference'

SCHEME_KEYS = ('n', 'p_b', 'p_e', 'key_len', 'check_len', 'block_len', 'lam', 'dem', 'per_bit_capsule')


@dataclass
class Components:
    """一组参数装配出的全部方案对象"""
    ikem: Ikem
    dem: Dem
    demcd: DemCd
    phecd: PheCd

    def params(self) -> Dict[str, Any]:
        return {
            **self.ikem.params.to_dict(),
            'lambda': self.demcd.lam,
            'dem': self.dem.variant,
            'per_bit_capsule': self.phecd.per_bit_capsule,
        }


def preset_values(name: str) -> Dict[str, Any]:
    return {'per_bit_capsule': False, **PRESETS[name]}


def build_components(values: Dict[str, Any]) -> Components:
    """
    由已校验的配置装配方案

    Args:
        values: 至少包含 SCHEME_KEYS 中的全部键

    Returns:
        Components
    """
    spec = SourceSpec(values['n'], values['p_b'], values['p_e'])
    params = IkemParams(spec, key_len=values['key_len'], check_len=values['check_len'],
                        block_len=values['block_len'])
    if not spec.has_secrecy_capacity:
        logger.warning(f"p_E = {spec.p_e} 不大于 p_B = {spec.p_b}，密钥没有信息论保密性")
    dem = Dem(values['dem'])
    demcd = DemCd(dem, values['lam'])
    ikem = Ikem(params)
    phecd = PheCd(ikem, demcd, per_bit_capsule=bool(values.get('per_bit_capsule', False)))
    return Components(ikem, dem, demcd, phecd)
