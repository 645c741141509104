"""
信息论密钥封装 iKEM

在相关源之上的具体实例化：
- 协调：分块 Hamming 伴随式（每块纠正 1 个错误），block_len = 0 表示不做协调；
- 确认标签与密钥提取：同一个 Toeplitz 矩阵（c + ℓ 行）加偏移向量，
  前 c 行输出确认标签，后 ℓ 行输出密钥。矩阵描述和偏移都取自封装的盐。
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Optional, Tuple
import logging

import numpy as np
from scipy.linalg import toeplitz

from ..exceptions import ParameterError
from . import bits as bitops
from . import correlated, wire
from .correlated import CorrelatedTriple, SourceSpec

logger = logging.getLogger(__name__)

MIN_SALT_BITS = 64

# 穷举规模上限
MAX_EXACT_N = 12
MAX_EXACT_KEY_LEN = 4
MAX_EXACT_WORK = 2 ** 28
EXACT_CHUNK = 2 ** 18

IkemKey = np.ndarray


def syndrome_width(block_length: int) -> int:
    """长度 L 的块需要 ⌈log2(L+1)⌉ 个伴随式比特"""
    return int(block_length).bit_length()


@dataclass(frozen=True)
class IkemParams:
    spec: SourceSpec
    key_len: int
    check_len: int = 8
    block_len: int = 0
    target_delta: Optional[float] = None
    blocks: Tuple[Tuple[int, int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.key_len < 0:
            raise ParameterError(f"key_len 不能为负: {self.key_len}")
        if self.check_len < 1:
            raise ParameterError(f"check_len 至少为 1: {self.check_len}")
        if self.block_len < 0:
            raise ParameterError(f"block_len 不能为负: {self.block_len}")
        blocks = []
        if self.block_len:
            for start in range(0, self.spec.n, self.block_len):
                blocks.append((start, min(self.block_len, self.spec.n - start)))
        object.__setattr__(self, 'blocks', tuple(blocks))
        if self.recon_len >= self.spec.n:
            raise ParameterError(f"协调数据 r = {self.recon_len} 必须小于 n = {self.spec.n}")

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def recon_len(self) -> int:
        return sum(syndrome_width(length) for _, length in self.blocks)

    @property
    def hash_rows(self) -> int:
        return self.check_len + self.key_len

    @property
    def description_bits(self) -> int:
        """Toeplitz 矩阵描述长度 n + rows − 1"""
        return self.n + self.hash_rows - 1

    @property
    def salt_bits(self) -> int:
        needed = max(MIN_SALT_BITS, self.description_bits + self.hash_rows)
        return (needed + 7) // 8 * 8

    @property
    def delta(self) -> float:
        """正确性目标 δ；未配置时取分块码的解析失败上界"""
        if self.target_delta is not None:
            return self.target_delta
        return self.failure_bound()

    def failure_bound(self) -> float:
        """1 − Π_blocks[(1−p)^L + L·p·(1−p)^(L−1)]；不做协调时为 1 − (1−p)^n"""
        p = self.spec.p_b
        if not self.blocks:
            return float(1.0 - (1.0 - p) ** self.n)
        success = 1.0
        for _, length in self.blocks:
            success *= (1.0 - p) ** length + length * p * (1.0 - p) ** (length - 1)
        return float(1.0 - success)

    def leftover_hash_budget(self) -> float:
        """2^{−(n − ℓ − r − c)/2}，p_E = 0.5 时精确统计距离的上界"""
        return float(2.0 ** (-(self.n - self.key_len - self.recon_len - self.check_len) / 2))

    def parity_check_matrix(self) -> np.ndarray:
        """分块对角的伴随式矩阵 (r × n)；列 j 是块内位置 j+1 的二进制（MSB 在前）"""
        matrix = np.zeros((self.recon_len, self.n), dtype=np.uint8)
        row = 0
        for start, length in self.blocks:
            width = syndrome_width(length)
            for t in range(width):
                shift = width - 1 - t
                for j in range(length):
                    matrix[row + t, start + j] = ((j + 1) >> shift) & 1
            row += width
        return matrix

    def to_dict(self):
        return {
            **self.spec.to_dict(),
            'key_len': self.key_len,
            'check_len': self.check_len,
            'block_len': self.block_len,
            'recon_len': self.recon_len,
            'delta': self.delta,
        }


@dataclass(frozen=True, eq=False)
class IkemCapsule:
    """C1 = (salt, recon, tag)，纯经典"""
    salt: np.ndarray
    recon: np.ndarray
    tag: np.ndarray

    def to_bytes(self) -> bytes:
        return wire.write_bits(self.salt) + wire.write_bits(self.recon) + wire.write_bits(self.tag)

    @classmethod
    def from_bytes(cls, data: bytes) -> 'IkemCapsule':
        salt, offset = wire.read_bits(data, 0)
        recon, offset = wire.read_bits(data, offset)
        tag, offset = wire.read_bits(data, offset)
        wire.expect_end(data, offset)
        return cls(salt, recon, tag)

    def with_flipped_tag_bit(self, index: int = 0) -> 'IkemCapsule':
        tag = self.tag.copy()
        tag[index] ^= 1
        return IkemCapsule(self.salt.copy(), self.recon.copy(), tag)

    def __eq__(self, other):
        if not isinstance(other, IkemCapsule):
            return NotImplemented
        return self.to_bytes() == other.to_bytes()

    def __hash__(self):
        return hash(self.to_bytes())


class Encapsulation(NamedTuple):
    """iK.Encap(X) 的结果：.key 与 .ct"""
    key: IkemKey
    ct: IkemCapsule


class ToeplitzHash:
    """由盐确定的 Toeplitz + 偏移哈希，输出 c + ℓ 比特"""

    def __init__(self, matrix: np.ndarray, offset: np.ndarray, check_len: int):
        self.matrix = matrix
        self.offset = offset
        self.check_len = check_len
        self._weights = matrix.astype(np.int64)

    @staticmethod
    def matrix_from_description(description: np.ndarray, rows: int, n: int) -> np.ndarray:
        first_column = description[:rows]
        first_row = np.concatenate([description[:1], description[rows:rows + n - 1]])
        return toeplitz(first_column, first_row).astype(np.asarray(description).dtype)

    @classmethod
    def from_salt(cls, salt: np.ndarray, params: IkemParams) -> 'ToeplitzHash':
        rows, desc = params.hash_rows, params.description_bits
        matrix = cls.matrix_from_description(salt[:desc], rows, params.n)
        offset = salt[desc:desc + rows].astype(np.uint8)
        return cls(matrix, offset, params.check_len)

    def digest(self, x: np.ndarray) -> np.ndarray:
        return ((self._weights @ x.astype(np.int64) + self.offset) % 2).astype(np.uint8)

    def tag_and_key(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        out = self.digest(x)
        return out[:self.check_len], out[self.check_len:]

    def digest_many(self, xs: np.ndarray) -> np.ndarray:
        """xs 形状 (k, n) -> (k, rows)"""
        return ((xs.astype(np.int64) @ self._weights.T + self.offset) % 2).astype(np.uint8)


class Ikem:
    """iKEM 的 Gen / Encap / Decap"""

    def __init__(self, params: IkemParams):
        self.params = params
        self._parity_check = params.parity_check_matrix().astype(np.int64)
        self._hashers = lru_cache(maxsize=256)(self._build_hasher)
        # 矩阵第 (i, j) 项取自描述的哪一位
        self._description_index = ToeplitzHash.matrix_from_description(
            np.arange(params.description_bits), params.hash_rows, params.n)
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    def gen(self, rng: np.random.Generator) -> CorrelatedTriple:
        return correlated.sample(self.params.spec, rng)

    def syndrome(self, x: np.ndarray) -> np.ndarray:
        if self.params.recon_len == 0:
            return np.zeros(0, dtype=np.uint8)
        return ((self._parity_check @ x.astype(np.int64)) % 2).astype(np.uint8)

    def syndrome_many(self, xs: np.ndarray) -> np.ndarray:
        """xs 形状 (k, n) -> (k, r)"""
        return ((xs.astype(np.int64) @ self._parity_check.T) % 2).astype(np.uint8)

    def hasher(self, salt: np.ndarray) -> ToeplitzHash:
        """按盐构造 Toeplitz 哈希；同一个盐只构造一次"""
        return self._hashers(bitops.pack(salt))

    def _build_hasher(self, packed_salt: bytes) -> ToeplitzHash:
        salt = bitops.unpack(packed_salt, self.params.salt_bits)
        desc, rows = self.params.description_bits, self.params.hash_rows
        return ToeplitzHash(salt[self._description_index], salt[desc:desc + rows], self.params.check_len)

    def encap(self, x: np.ndarray, rng: np.random.Generator) -> Encapsulation:
        """新鲜盐；recon = Syn(X)；tag = h_conf(s, X)；K = h_ext(s, X)"""
        x = bitops.as_bits(x)
        bitops.require_length(x, self.params.n, 'X')
        salt = bitops.random_bits(rng, self.params.salt_bits)
        tag, key = self.hasher(salt).tag_and_key(x)
        capsule = IkemCapsule(salt, self.syndrome(x), tag)
        return Encapsulation(key, capsule)

    def reconcile(self, y: np.ndarray, recon: np.ndarray) -> Optional[np.ndarray]:
        """逐块伴随式译码；伴随式差值指向块外时返回 None"""
        if len(recon) != self.params.recon_len:
            return None
        x_hat = y.copy()
        if not self.params.blocks:
            return x_hat
        difference = np.bitwise_xor(recon, self.syndrome(y))
        row = 0
        for start, length in self.params.blocks:
            width = syndrome_width(length)
            position = bitops.to_int(difference[row:row + width])
            row += width
            if position == 0:
                continue
            if position > length:
                return None
            x_hat[start + position - 1] ^= 1
        return x_hat

    def decap(self, y: np.ndarray, capsule: IkemCapsule) -> Optional[IkemKey]:
        """恢复 K；译码失败或标签不符时返回 None（⊥）"""
        y = bitops.as_bits(y)
        bitops.require_length(y, self.params.n, 'Y')
        if len(capsule.salt) != self.params.salt_bits or len(capsule.tag) != self.params.check_len:
            self.logger.debug("封装长度不符，返回 ⊥")
            return None
        x_hat = self.reconcile(y, capsule.recon)
        if x_hat is None:
            self.logger.debug("伴随式译码失败，返回 ⊥")
            return None
        tag, key = self.hasher(capsule.salt).tag_and_key(x_hat)
        if not np.array_equal(tag, capsule.tag):
            self.logger.debug("确认标签不一致，返回 ⊥")
            return None
        return key


def exact_key_distance(params: IkemParams) -> float:
    """
    穷举计算 SD((Z, C*, K*), (Z, C*, U_ℓ))

    X 均匀且 Z = X ⊕ E，记 M 为伴随式与哈希拼成的线性映射，则 Eve 看到的是
    M·X = M·Z ⊕ M·E。对每个 z 内层求和都等于 ½ Σ_s |P(M·E = s) − P(M·E 高位 = s_hi)/2^ℓ|，
    所以只需枚举误差 E，每个 Toeplitz 描述的代价是 2^n 而不是 4^n。偏移向量对距离没有影响。

    Args:
        params: n ≤ 12、ℓ ≤ 4 且 2^(n+c+ℓ−1)·2^n ≤ MAX_EXACT_WORK 的小参数

    Returns:
        精确统计距离
    """
    n, ell, c = params.n, params.key_len, params.check_len
    if ell == 0:
        return 0.0
    if n > MAX_EXACT_N or ell > MAX_EXACT_KEY_LEN:
        raise ParameterError(f"参数过大，无法穷举: n = {n} (≤ {MAX_EXACT_N}), ℓ = {ell} (≤ {MAX_EXACT_KEY_LEN})")
    work = 2 ** params.description_bits * 2 ** n
    if work > MAX_EXACT_WORK:
        raise ParameterError(f"穷举工作量 {work} 超过上限 {MAX_EXACT_WORK}")

    errors = bitops.all_strings(n)
    flips = errors.sum(axis=1)
    p = params.spec.p_e
    weight = (p ** flips) * ((1.0 - p) ** (n - flips))
    syndromes = bitops.rows_to_int(Ikem(params).syndrome_many(errors))

    rows = params.hash_rows
    # 描述比特在矩阵中的位置
    index = ToeplitzHash.matrix_from_description(np.arange(params.description_bits), rows, n).astype(np.intp)
    descriptions = bitops.all_strings(params.description_bits)
    label_space = 2 ** (params.recon_len + rows)
    chunk = max(1, EXACT_CHUNK // 2 ** n)
    errors_t = errors.T.astype(np.int64)

    total = 0.0
    for start in range(0, len(descriptions), chunk):
        matrices = descriptions[start:start + chunk][:, index].astype(np.int64)  # (d, rows, n)
        count = len(matrices)
        digests = np.transpose((matrices @ errors_t) % 2, (0, 2, 1))  # (d, 2^n, rows)
        labels = (syndromes[None, :] << rows) | bitops.rows_to_int(digests)
        labels += np.arange(count, dtype=np.int64)[:, None] * label_space
        table = np.bincount(labels.ravel(), weights=np.tile(weight, count), minlength=count * label_space)
        table = table.reshape(count, label_space >> ell, 2 ** ell)
        marginal = table.sum(axis=2, keepdims=True)
        total += 0.5 * float(np.abs(table - marginal / 2 ** ell).sum())
    value = total / len(descriptions)
    logger.info(f"穷举密钥统计距离: n={n}, ℓ={ell}, c={c}, p_E={p} -> {value:.12f}")
    return float(value)


def key_posterior(params: IkemParams, z: np.ndarray, capsule: IkemCapsule) -> np.ndarray:
    """
    给定 (Z, C1) 时各候选密钥的联合权重 P(z, recon, tag, k)，长度 2^ℓ

    只在小 n 下使用（枚举全部 X）。
    """
    n = params.n
    if n > MAX_EXACT_N:
        raise ParameterError(f"n = {n} 过大，无法计算密钥后验")
    xs = bitops.all_strings(n)
    ikem = Ikem(params)
    hasher = ToeplitzHash.from_salt(capsule.salt, params)
    digests = hasher.digest_many(xs)
    consistent = np.all(digests[:, :params.check_len] == capsule.tag, axis=1)
    if params.recon_len:
        consistent &= np.all(ikem.syndrome_many(xs) == capsule.recon, axis=1)
    flips = (xs != z).sum(axis=1)
    p = params.spec.p_e
    weight = (p ** flips) * ((1.0 - p) ** (n - flips))
    keys = bitops.rows_to_int(digests[:, params.check_len:])
    return np.bincount(keys[consistent], weights=weight[consistent], minlength=2 ** params.key_len)

