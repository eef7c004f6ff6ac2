"""Scalar arithmetic with MISO semantics.

Int is 64-bit two's complement with wrapping; Float is IEEE binary64.
These functions are the reference definition the vectorised kernels must
agree with bit-for-bit.
"""
from __future__ import annotations

import math
import struct

import numpy as np


INT = "Int"
FLOAT = "Float"
INT_MIN = -(1 << 63)
INT_MAX = (1 << 63) - 1
_MASK = (1 << 64) - 1

DTYPES = {INT: np.dtype(np.int64), FLOAT: np.dtype(np.float64)}

# Which input NaN a two-NaN operation returns depends on operand order in the
# machine code, so every NaN produced by arithmetic is replaced by this one.
CANONICAL_NAN_BITS = 0x7FF8000000000000
CANONICAL_NAN = struct.unpack("<d", struct.pack("<Q", CANONICAL_NAN_BITS))[0]


class ArithmeticFault(ArithmeticError):
    """Runtime arithmetic failure (division by zero, non-finite truncation)."""


def wrap(x: int) -> int:
    x &= _MASK
    return x - (1 << 64) if x > INT_MAX else x


def int_div(a: int, b: int) -> int:
    if b == 0:
        raise ArithmeticFault("integer division by zero")
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return wrap(q)


def float_div(a: float, b: float) -> float:
    if b == 0.0 or math.isnan(b):
        # let the FPU pick the infinity sign
        with np.errstate(all="ignore"):
            return float(np.float64(a) / np.float64(b))
    return a / b


def truncate(x: float) -> int:
    """Float to Int conversion: toward zero, wrapping out-of-range magnitudes."""
    if math.isnan(x) or math.isinf(x):
        raise ArithmeticFault(f"cannot convert {x} to Int")
    return wrap(int(x))


def binop(op: str, ty: str, a, b):
    """Apply ``op`` at result type ``ty``; operands are already promoted."""
    if ty == INT:
        if op == "+":
            return wrap(a + b)
        if op == "-":
            return wrap(a - b)
        if op == "*":
            return wrap(a * b)
        return int_div(a, b)
    if op == "+":
        r = a + b
    elif op == "-":
        r = a - b
    elif op == "*":
        r = a * b
    else:
        r = float_div(a, b)
    return CANONICAL_NAN if r != r else r


def negate(ty: str, a):
    return wrap(-a) if ty == INT else -a


def coerce(value, ty: str):
    """Store ``value`` into a slot of type ``ty``."""
    if ty == INT:
        return truncate(value) if isinstance(value, float) else value
    return float(value)


def bits(value, ty: str) -> int:
    """Raw 64-bit pattern of a value, as an unsigned int."""
    if ty == FLOAT:
        return struct.unpack("<Q", struct.pack("<d", value))[0]
    return value & _MASK


def from_bits(pattern: int, ty: str):
    if ty == FLOAT:
        return struct.unpack("<d", struct.pack("<Q", pattern & _MASK))[0]
    return wrap(pattern)


def same(a, b, ty: str) -> bool:
    """Bit-exact equality (distinct NaN payloads compare unequal)."""
    return bits(a, ty) == bits(b, ty)
