"""
线格式工具：长度前缀字段

所有整数为小端序。比特字段为 u16 比特长度 ‖ MSB-first 打包字节；
字节字段为 u32 字节长度 ‖ 原始字节。详细布局见 doc/FORMATS.md。
"""
import struct
from typing import List, Tuple

import numpy as np

from ..exceptions import LengthMismatchError
from . import bits as bitops

_U16 = struct.Struct('<H')
_U32 = struct.Struct('<I')


class FramingError(LengthMismatchError):
    """字节流被截断、有多余数据或字段长度非法"""


def write_bits(bits: np.ndarray) -> bytes:
    bits = np.asarray(bits, dtype=np.uint8)
    if len(bits) > 0xFFFF:
        raise FramingError(f"比特字段过长: {len(bits)}")
    return _U16.pack(len(bits)) + bitops.pack(bits)


def read_bits(data: bytes, offset: int = 0) -> Tuple[np.ndarray, int]:
    """从 offset 读取一个比特字段，返回 (bits, 新 offset)"""
    if offset + _U16.size > len(data):
        raise FramingError("比特字段长度前缀被截断")
    (nbits,) = _U16.unpack_from(data, offset)
    offset += _U16.size
    nbytes = (nbits + 7) // 8
    if offset + nbytes > len(data):
        raise FramingError(f"比特字段被截断: 需要 {nbytes} 字节")
    bits = bitops.unpack(data[offset:offset + nbytes], nbits)
    return bits, offset + nbytes


def write_blob(blob: bytes) -> bytes:
    return _U32.pack(len(blob)) + blob


def read_blob(data: bytes, offset: int = 0) -> Tuple[bytes, int]:
    if offset + _U32.size > len(data):
        raise FramingError("字节字段长度前缀被截断")
    (size,) = _U32.unpack_from(data, offset)
    offset += _U32.size
    if offset + size > len(data):
        raise FramingError(f"字节字段被截断: 需要 {size} 字节")
    return data[offset:offset + size], offset + size


def write_count(count: int) -> bytes:
    return _U32.pack(count)


def read_count(data: bytes, offset: int = 0) -> Tuple[int, int]:
    if offset + _U32.size > len(data):
        raise FramingError("计数字段被截断")
    (count,) = _U32.unpack_from(data, offset)
    return count, offset + _U32.size


def write_sequence(blobs: List[bytes]) -> bytes:
    """u32 计数 ‖ 每个元素一个字节字段"""
    return write_count(len(blobs)) + b''.join(write_blob(b) for b in blobs)


def read_sequence(data: bytes, offset: int = 0) -> Tuple[List[bytes], int]:
    count, offset = read_count(data, offset)
    items = []
    for _ in range(count):
        item, offset = read_blob(data, offset)
        items.append(item)
    return items, offset


def expect_end(data: bytes, offset: int) -> None:
    if offset != len(data):
        raise FramingError(f"末尾有 {len(data) - offset} 字节多余数据")
