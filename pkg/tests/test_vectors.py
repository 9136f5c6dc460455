import pytest

from src.errors import BudgetExceeded, WidthViolation
from src.tableau.vectors import decode_vector, encode_vector, eq_vec, gt_vec, make_O, make_O_pow2, make_U


def test_make_O():
    assert make_O(5, 4, 3) == 1365
    assert make_O(7, 9, 3) == 1838599
    assert make_O(1, 9, 3) == 262657
    assert make_O(3, 2, 0) == 0


def test_make_O_pow2_matches_make_O():
    for a, m, T in [(1, 3, 2), (5, 4, 3), (0, 2, 1), (15, 4, 4)]:
        assert make_O_pow2(a, m, T) == make_O(a, m, 1 << T)


def test_make_U():
    assert make_U(2) == 27
    assert decode_vector(2, make_U(2), 4) == [3, 2, 1, 0]
    assert sorted(decode_vector(3, make_U(3), 8)) == list(range(8))


def test_make_U_budget():
    with pytest.raises(BudgetExceeded):
        make_U(20, budget=1 << 16)


def test_element_wise_comparison():
    v1 = encode_vector([3, 7, 2], 4)
    v2 = encode_vector([3, 5, 9], 4)
    assert gt_vec(4, v1, v2, 3) == 16
    assert gt_vec(4, v2, v1, 3) == encode_vector([0, 0, 1], 4)
    assert eq_vec(4, v1, v2, 3) == 1


def test_comparison_uses_the_top_bit():
    v1 = encode_vector([8, 15, 0, 9], 4)
    v2 = encode_vector([7, 15, 8, 9], 4)
    assert decode_vector(4, gt_vec(4, v1, v2, 4), 4) == [1, 0, 0, 0]
    assert decode_vector(4, eq_vec(4, v1, v2, 4), 4) == [0, 1, 0, 1]


@pytest.mark.parametrize("m", [1, 2, 3, 5])
def test_exhaustive_pairs(m):
    values = list(range(1 << m))
    pairs = [(a, b) for a in values for b in values]
    v1 = encode_vector([a for a, _ in pairs], m)
    v2 = encode_vector([b for _, b in pairs], m)
    n = len(pairs)
    assert decode_vector(m, gt_vec(m, v1, v2, n), n) == [int(a > b) for a, b in pairs]
    assert decode_vector(m, eq_vec(m, v1, v2, n), n) == [int(a == b) for a, b in pairs]


def test_width_violations():
    with pytest.raises(WidthViolation):
        encode_vector([4], 2)
    with pytest.raises(WidthViolation):
        make_O(8, 3, 2)
    with pytest.raises(WidthViolation):
        gt_vec(2, 1 << 6, 0, 3)
