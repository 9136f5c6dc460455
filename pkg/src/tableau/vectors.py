"""Encoded vectors: n elements of m bits packed into one integer, element i at bit m*i."""
from __future__ import annotations

from typing import List, Optional, Sequence

from ..configs import DEFAULT_BUDGETS
from ..errors import BudgetExceeded, WidthViolation
from ..numerics import clear, natsub_via_bool, tweaked_not


def _natsub(a: int, b: int) -> int:
    return a - b if a > b else 0


def _check_vector(m: int, value: int, n: int):
    if m < 1 or n < 0:
        raise WidthViolation(f"bad vector shape m={m}, n={n}")
    if value < 0 or value >> (m * n):
        raise WidthViolation(f"value does not fit {n} element(s) of {m} bits")


def encode_vector(elements: Sequence[int], m: int) -> int:
    value = 0
    for i, element in enumerate(elements):
        if element < 0 or element >> m:
            raise WidthViolation(f"element {element} does not fit {m} bits")
        value |= element << (m * i)
    return value


def decode_vector(m: int, value: int, n: Optional[int] = None) -> List[int]:
    if n is None:
        n = max(1, -(-value.bit_length() // m))
    _check_vector(m, value, n)
    mask = (1 << m) - 1
    return [(value >> (m * i)) & mask for i in range(n)]


def make_O(a: int, m: int, n: int) -> int:
    """The vector [a] * n, built as ((a << nm) - a) / ((1 << m) - 1)."""
    if m < 1 or a < 0 or a >> m:
        raise WidthViolation(f"{a} does not fit {m} bits")
    if n <= 0:
        return 0
    q, r = divmod(_natsub(a << (n * m), a), _natsub(1 << m, 1))
    assert r == 0
    return q


def make_O_pow2(a: int, m: int, T: int) -> int:
    """``make_O`` for a length of 2^T; the product nm is the shift m << T."""
    if m < 1 or a < 0 or a >> m:
        raise WidthViolation(f"{a} does not fit {m} bits")
    return _natsub(a << (m << T), a) // _natsub(1 << m, 1)


def make_U(T: int, budget: Optional[int] = None) -> int:
    """Width-T vector of length 2^T holding every T-bit value once, largest first."""
    if T < 1:
        raise WidthViolation("U needs a width of at least 1")
    budget = DEFAULT_BUDGETS.witness_bits if budget is None else budget
    if T << T > budget:
        raise BudgetExceeded(f"U^{T} needs {T << T} bits (budget {budget})")
    slot = tweaked_not(1 << T)
    ones = tweaked_not(1 << (T << T)) // slot
    return clear(ones, 1 << T) // slot


def gt_vec(m: int, v1: int, v2: int, n: int) -> int:
    """Element i is 1 where element i of v1 exceeds element i of v2.

    Each element's subtraction is done without its top bit so no borrow leaves
    the element; the top bits are then combined separately.
    """
    _check_vector(m, v1, n)
    _check_vector(m, v2, n)
    top = make_O(1 << (m - 1), m, n)
    low = make_O(tweaked_not(1 << (m - 1)), m, n)
    top1, top2 = v1 & top, v2 & top
    low1, low2 = v1 & low, v2 & low
    carry_to_top = natsub_via_bool(low1 + low, low2) & top
    carry = (carry_to_top & top1) | clear(carry_to_top | top1, top2)
    return carry >> (m - 1)


def eq_vec(m: int, v1: int, v2: int, n: int) -> int:
    ones = make_O(1, m, n)
    return _natsub(_natsub(ones, gt_vec(m, v1, v2, n)), gt_vec(m, v2, v1, n))
