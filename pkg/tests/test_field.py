import random
from fractions import Fraction

import pytest

from hilbertq.field import (
    RealQuadraticField,
    chi_value,
    element_from_json,
    element_to_json,
)


F5 = RealQuadraticField(5)
F3 = RealQuadraticField(3)
F2 = RealQuadraticField(2)


def test_integral_basis_declared_polynomial():
    for F in (F5, F3, F2):
        w = F.omega
        assert w * w == F.omega_trace * w - F.omega_norm
    assert F5.disc == 5
    assert F3.disc == 12
    assert F2.disc == 8


def test_rejects_bad_discriminants():
    with pytest.raises(ValueError):
        RealQuadraticField(12)
    with pytest.raises(ValueError):
        RealQuadraticField(1)


def test_norm_trace_multiplicative():
    rng = random.Random(1)
    for _ in range(100):
        x = F5.element(Fraction(rng.randint(-9, 9), rng.randint(1, 5)), rng.randint(-9, 9))
        y = F5.element(rng.randint(-9, 9), Fraction(rng.randint(-9, 9), rng.randint(1, 4)))
        assert (x * y).norm() == x.norm() * y.norm()
        assert (x + y).trace() == x.trace() + y.trace()
        assert x.norm() == x.conjugate().norm()
        if x:
            assert x * x.inverse() == F5.one


def test_exact_signs():
    assert F5.one.is_totally_positive()
    assert not (-F5.one).is_totally_positive()
    # (1+sqrt5)/2 has a negative conjugate
    assert not F5.omega.is_totally_positive()
    assert (F5.omega * F5.omega).is_totally_positive()
    assert F5.sqrtD.sign_embedding(0) == 1
    assert F5.sqrtD.sign_embedding(1) == -1
    with pytest.raises(ValueError):
        F5.zero.is_totally_positive()


def test_sign_agrees_with_float():
    rng = random.Random(2)
    import math

    s = math.sqrt(5)
    for _ in range(300):
        x = F5.element(
            Fraction(rng.randint(-50, 50), rng.randint(1, 9)),
            Fraction(rng.randint(-50, 50), rng.randint(1, 9)),
        )
        if not x:
            continue
        u, v = x.sqrt_coords()
        approx = float(u) + float(v) * s
        if abs(approx) > 1e-6:
            assert x.sign_embedding(0) == (1 if approx > 0 else -1)


def test_chi_value():
    w = F5.omega
    assert chi_value(w, (1, 1)) == w.norm()
    assert chi_value(w, (1, 0)) == w
    assert chi_value(w, (0, 2)) == w.conjugate() * w.conjugate()
    assert chi_value(w, (-1, 0)) == w.inverse()


def test_json_round_trip():
    x = F5.element(Fraction(3, 7), Fraction(-2, 5))
    blob = element_to_json(x)
    assert blob == {"a": "3/7", "b": "-2/5"}
    assert element_from_json(F5, blob) == x
