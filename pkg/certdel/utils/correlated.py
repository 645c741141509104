"""
预处理模型中的公共源 P(XYZ)

采用二元对称广播（卫星）模型：X 均匀，Bob 与 Eve 分别经过翻转概率 p_B、p_E
的二元对称信道得到 Y、Z。安全运行要求 p_E > p_B（正的密钥容量），这里只记录不强制。
"""
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Tuple

import numpy as np

from ..exceptions import LengthMismatchError, ParameterError
from . import bits as bitops


@dataclass(frozen=True)
class SourceSpec:
    n: int
    p_b: float
    p_e: float

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"n 至少为 1，得到 {self.n}")
        for name in ('p_b', 'p_e'):
            value = getattr(self, name)
            if not 0.0 <= value <= 0.5:
                raise ParameterError(f"{name} 必须在 [0, 0.5] 内，得到 {value}")

    @property
    def has_secrecy_capacity(self) -> bool:
        return self.p_e > self.p_b

    def to_dict(self):
        return {'n': self.n, 'p_b': self.p_b, 'p_e': self.p_e}


class CorrelatedTriple(NamedTuple):
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def validate(self, n: int) -> None:
        for name, value in zip(('X', 'Y', 'Z'), self):
            if len(value) != n:
                raise LengthMismatchError(f"{name} 长度应为 {n}，实际为 {len(value)}")


def flip_mask(rng: np.random.Generator, n: int, p: float) -> np.ndarray:
    """i.i.d. Bernoulli(p) 翻转向量；p = 0 时精确为全零"""
    return (rng.random(n) < p).astype(np.uint8)


def sample(spec: SourceSpec, rng: np.random.Generator) -> CorrelatedTriple:
    """X 均匀；Y = X ⊕ e_B；Z = X ⊕ e_E"""
    x = bitops.random_bits(rng, spec.n)
    y = np.bitwise_xor(x, flip_mask(rng, spec.n, spec.p_b))
    z = np.bitwise_xor(x, flip_mask(rng, spec.n, spec.p_e))
    return CorrelatedTriple(x, y, z)


def estimate_flip_rates(triples: Iterable[CorrelatedTriple]) -> Tuple[float, float]:
    """经验翻转率 (p̂_B, p̂_E)"""
    flips_b = flips_e = total = 0
    for triple in triples:
        flips_b += bitops.hamming(triple.x, triple.y)
        flips_e += bitops.hamming(triple.x, triple.z)
        total += len(triple.x)
    if total == 0:
        raise ParameterError("没有样本，无法估计翻转率")
    return flips_b / total, flips_e / total
