import math

import pytest

from src.cohomology.lattice import (
    LatticeQuotient, ext_gcd, invariant_factors_of, kernel_mod, smith_normal_form,
)
from src.errors import StableLabError


@pytest.mark.parametrize("a, b", [(12, 18), (7, 5), (0, 4), (9, 0)])
def test_ext_gcd(a, b):
    g, x, y = ext_gcd(a, b)
    assert g == math.gcd(a, b)
    assert a * x + b * y == g


@pytest.mark.parametrize("orders, factors", [
    ([2, 3], [6]),
    ([4, 6], [2, 12]),
    ([2, 2, 2], [2, 2, 2]),
    ([1, 5], [5]),
    ([], []),
])
def test_invariant_factors(orders, factors):
    assert invariant_factors_of(orders) == factors


def test_smith_normal_form_divisibility():
    diag, _, _ = smith_normal_form([[2, 4, 4], [-6, 6, 12], [10, -4, -16]], 3)
    assert [abs(d) for d in diag] == [2, 6, 12]


def test_kernel_mod_even_sum():
    basis, pivots = kernel_mod([([1, 1], 2)], [2, 2])
    quotient = LatticeQuotient(basis, pivots, [[2, 0], [0, 2]])
    assert quotient.order == 2
    assert quotient.contains([1, 1])
    assert not quotient.contains([1, 0])
    assert quotient.coordinates([1, 1]) == [1]
    assert quotient.coordinates([2, 0]) == [0]


def test_kernel_mod_without_constraints():
    basis, pivots = kernel_mod([], [4, 6])
    assert LatticeQuotient(basis, pivots, [[4, 0], [0, 6]]).factors == [2, 12]


def test_quotient_round_trip_through_dict():
    basis, pivots = kernel_mod([([2, 3], 6)], [6, 6])
    quotient = LatticeQuotient(basis, pivots, [[6, 0], [0, 6]])
    restored = LatticeQuotient.from_dict(quotient.to_dict())
    assert restored.factors == quotient.factors
    for g in quotient.generators:
        assert restored.coordinates(g) == quotient.coordinates(g)


def test_infinite_quotient_rejected():
    basis, pivots = kernel_mod([], [3, 3])
    with pytest.raises(StableLabError):
        LatticeQuotient(basis, pivots, [[3, 0]])
