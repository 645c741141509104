"""
比特串工具

整个包里的比特串都是取值 0/1 的 numpy uint8 一维数组。
打包顺序为 MSB-first（与 np.packbits 默认一致）。
"""
from typing import Iterable, Union

import numpy as np

from ..exceptions import LengthMismatchError

BitsLike = Union[np.ndarray, str, Iterable[int]]


def as_bits(value: BitsLike) -> np.ndarray:
    """把字符串 '0101'、整数序列或数组统一转换为 uint8 比特数组"""
    if isinstance(value, str):
        return from_str(value)
    arr = np.asarray(value, dtype=np.uint8).reshape(-1)
    if arr.size and arr.max() > 1:
        raise ValueError(f"比特串只能包含0/1: {arr.tolist()}")
    return arr


def from_str(text: str) -> np.ndarray:
    """'0110' -> array([0, 1, 1, 0])"""
    if any(ch not in '01' for ch in text):
        raise ValueError(f"非法比特串: {text!r}")
    return np.frombuffer(text.encode('ascii'), dtype=np.uint8) - ord('0')


def to_str(bits: np.ndarray) -> str:
    return ''.join('1' if b else '0' for b in np.asarray(bits).reshape(-1))


def random_bits(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def require_length(bits: np.ndarray, n: int, name: str = 'bits') -> None:
    if len(bits) != n:
        raise LengthMismatchError(f"{name} 长度应为 {n}，实际为 {len(bits)}")


def xor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if len(a) != len(b):
        raise LengthMismatchError(f"异或两侧长度不一致: {len(a)} != {len(b)}")
    return np.bitwise_xor(a, b).astype(np.uint8)


def parity(bits: np.ndarray) -> int:
    return int(np.bitwise_xor.reduce(np.asarray(bits, dtype=np.uint8), initial=0))


def hamming(a: np.ndarray, b: np.ndarray) -> int:
    return int(np.count_nonzero(xor(a, b)))


def pack(bits: np.ndarray) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def unpack(data: bytes, n: int) -> np.ndarray:
    """bytes -> 前 n 个比特；数据不够时抛 LengthMismatchError"""
    if len(data) * 8 < n:
        raise LengthMismatchError(f"需要 {n} 比特，只有 {len(data) * 8}")
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=n).astype(np.uint8)


def to_hex(bits: np.ndarray) -> str:
    return pack(bits).hex()


def to_int(bits: np.ndarray) -> int:
    """MSB-first 解释为非负整数"""
    value = 0
    for b in np.asarray(bits).reshape(-1):
        value = (value << 1) | int(b)
    return value


def from_int(value: int, n: int) -> np.ndarray:
    return np.array([(value >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.uint8)


def all_strings(n: int) -> np.ndarray:
    """全部 2^n 个 n 比特串，形状 (2^n, n)，按整数值升序"""
    if n == 0:
        return np.zeros((1, 0), dtype=np.uint8)
    idx = np.arange(2 ** n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def rows_to_int(matrix: np.ndarray) -> np.ndarray:
    """按行 MSB-first 把 0/1 矩阵转换为整数向量"""
    matrix = np.asarray(matrix, dtype=np.int64)
    if matrix.shape[-1] == 0:
        return np.zeros(matrix.shape[:-1], dtype=np.int64)
    weights = 1 << np.arange(matrix.shape[-1] - 1, -1, -1, dtype=np.int64)
    return matrix @ weights
