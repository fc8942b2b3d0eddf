import random
from fractions import Fraction

import pytest

from hilbertq.field import RealQuadraticField
from hilbertq.ideals import (
    FracIdeal,
    congruent_mod,
    different,
    element_crt,
    element_valuation,
    factor_integral_ideal,
    find_uniformizer,
    ideal_from_json,
    ideal_to_json,
    primes_over,
    valuation,
)

F5 = RealQuadraticField(5)
F3 = RealQuadraticField(3)
O5 = FracIdeal.unit_ideal(F5)


def principal(F, x):
    return FracIdeal.from_generators(F, [F.from_rational(x) if not hasattr(x, "norm") else x])


def random_ideal(F, rng):
    while True:
        x = F.element(rng.randint(-9, 9), rng.randint(-9, 9))
        y = F.element(rng.randint(-9, 9), rng.randint(-9, 9))
        if x and y:
            return FracIdeal.from_generators(F, [x, y])


def test_identity_and_rational_products():
    assert O5 * O5 == O5
    six = principal(F5, 2) * principal(F5, 3)
    assert six == principal(F5, 6)
    assert six.norm() == 36


def test_split_prime_product_is_eleven():
    # 5 is a square mod 11 (4^2 = 16 = 5), so 11 splits
    assert any(r * r % 11 == 5 for r in range(11))
    p, pbar = primes_over(F5, 11)
    assert p.norm() == 11 and pbar.norm() == 11
    assert p * pbar == principal(F5, 11)
    assert p != pbar
    assert p.conjugate() == pbar


def test_norm_multiplicative_200_random_pairs():
    rng = random.Random(5)
    for _ in range(200):
        a = random_ideal(F5, rng)
        b = random_ideal(F5, rng)
        assert (a * b).norm() == a.norm() * b.norm()


def test_inverse_exact():
    rng = random.Random(6)
    for _ in range(50):
        a = random_ideal(F5, rng)
        assert a * a.inverse() == O5


def test_module_closure():
    rng = random.Random(7)
    for _ in range(50):
        a = random_ideal(F3, rng)
        assert a.is_module()


def test_different():
    d5 = different(F5)
    assert d5.norm() == abs(F5.disc) == 5
    assert d5 == FracIdeal.from_generators(F5, [F5.sqrtD])
    d3 = different(F3)
    assert d3.norm() == abs(F3.disc) == 12
    assert d3 == FracIdeal.from_generators(F3, [2 * F3.sqrtD])
    # trace pairing integrality: inverse different contains O_F
    assert d5.inverse().contains(F5.one)
    assert d3.inverse().contains(F3.one)
    for x in d3.inverse().basis():
        assert x.trace().denominator == 1


def test_primes_over_shapes():
    ram = primes_over(F5, 5)
    assert len(ram) == 1 and ram[0].e == 2 and ram[0].residue_norm() == 5
    inert = primes_over(F5, 3)
    assert len(inert) == 1 and inert[0].f == 2 and inert[0].residue_norm() == 9
    split = primes_over(F5, 11)
    assert len(split) == 2 and all(P.residue_norm() == 11 for P in split)


def test_uniformizers():
    P5 = primes_over(F5, 5)[0]
    assert find_uniformizer(F5, P5) is not None
    assert valuation(find_uniformizer(F5, P5), P5) == 1
    P3 = primes_over(F5, 3)[0]
    assert find_uniformizer(F5, P3) == 3
    p11, p11bar = primes_over(F5, 11)
    pi = find_uniformizer(F5, p11)
    assert valuation(pi, p11) == 1
    assert valuation(pi, p11bar) == 0
    # the canonical generator w - 4 has norm exactly 11
    assert (F5.omega - 4).norm() == 11


def test_uniformizer_with_congruence():
    n = principal(F5, 7)
    p11, p11bar = primes_over(F5, 11)
    pi = find_uniformizer(F5, p11, congruence=(n, F5.one))
    assert valuation(pi, p11) == 1
    assert valuation(pi, p11bar) == 0
    assert congruent_mod(pi, F5.one, n)


def test_element_valuation_and_congruence():
    P5 = primes_over(F5, 5)[0]
    assert element_valuation(F5.sqrtD, P5) == 1
    assert element_valuation(F5.from_rational(5), P5) == 2
    assert element_valuation(F5.from_rational(Fraction(1, 5)), P5) == -2
    n = principal(F5, 7)
    assert congruent_mod(F5.from_rational(8), F5.one, n)
    assert congruent_mod(F5.from_rational(Fraction(1, 8)), F5.one, n)
    assert not congruent_mod(F5.omega, F5.one, n)


def test_factor_integral_ideal():
    A = principal(F5, 55)
    fac = factor_integral_ideal(A)
    assert sorted(P.p for P, _ in fac) == [5, 5, 11] or sorted(
        P.p for P, _ in fac
    ) == [5, 11, 11]
    prod = O5
    for P, e in fac:
        prod = prod * P ** e
    assert prod == A


def test_crt():
    two, three = principal(F5, 2), principal(F5, 3)
    x = element_crt(F5, [two, three], [F5.one, F5.omega])
    assert two.contains(x - 1)
    assert three.contains(x - F5.omega)


def test_index_in():
    A = principal(F5, 3)
    assert A.index_in(O5) == 9


def test_json_round_trip():
    p11 = primes_over(F5, 11)[0]
    rows = ideal_to_json(p11)
    assert ideal_from_json(F5, rows) == p11


def test_residues_count():
    A = principal(F5, 3)
    assert len(list(A.residues())) == 9
