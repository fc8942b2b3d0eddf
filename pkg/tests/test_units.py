import random

from hilbertq.field import RealQuadraticField
from hilbertq.ideals import FracIdeal
from hilbertq.units import (
    enumerate_orbit_reps,
    lattice_points_in_embedding_box,
    multiplicative_order_mod,
    orbit_representative,
    totally_positive_fundamental_unit,
    unit_data,
    units_congruent_one_generators,
)

F5 = RealQuadraticField(5)
F3 = RealQuadraticField(3)
F2 = RealQuadraticField(2)
O5 = FracIdeal.unit_ideal(F5)


def brute_force_smallest_totally_positive_unit(F, box=40):
    """Oracle: scan a coordinate box for the smallest unit > 1 that is
    totally positive (independent of the Pell machinery)."""
    best = None
    for x in range(-box, box + 1):
        for y in range(-box, box + 1):
            u = F.element(x, y)
            if not u or abs(u.norm()) != 1:
                continue
            if not (u.sign_embedding(0) > 0 and u.sign_embedding(1) > 0):
                continue
            if (u - 1).sign_embedding(0) <= 0:
                continue
            if best is None or (best - u).sign_embedding(0) > 0:
                best = u
    return best


def test_totally_positive_fundamental_units_frozen():
    # (3+sqrt5)/2, 2+sqrt3, 3+2*sqrt2
    assert totally_positive_fundamental_unit(F5) == F5.element(1, 1)
    assert totally_positive_fundamental_unit(F3) == F3.element(2, 1)
    assert totally_positive_fundamental_unit(F2) == F2.element(3, 2)


def test_units_against_bruteforce_oracle():
    for F in (F5, F3, F2, RealQuadraticField(7), RealQuadraticField(13)):
        eps = totally_positive_fundamental_unit(F)
        oracle = brute_force_smallest_totally_positive_unit(F)
        assert oracle is not None
        assert eps == oracle


def test_norm_signs():
    assert unit_data(F5).norm_sign == -1
    assert unit_data(F3).norm_sign == 1
    assert unit_data(F2).norm_sign == -1


def test_orbit_representative_idempotent_and_invariant():
    eps = totally_positive_fundamental_unit(F5)
    assert orbit_representative(F5.one, eps) == F5.one
    assert orbit_representative(eps, eps) == F5.one
    m = F5.element(7, 0) + 3 * F5.sqrtD
    r = orbit_representative(m, eps)
    assert orbit_representative(r, eps) == r
    for k in range(-5, 6):
        assert orbit_representative(m * eps ** k, eps) == r


def test_enumerate_orbit_reps_bounds():
    eps = totally_positive_fundamental_unit(F5)
    assert enumerate_orbit_reps(O5, 0, eps) == []
    reps1 = enumerate_orbit_reps(O5, 1, eps)
    assert reps1 == [F5.one]


def brute_force_orbit_reps(M, bound, eps, cap=60):
    """Oracle: enumerate every totally positive point with both embeddings
    below a large cap, reduce each to its orbit representative, dedupe."""
    NB = bound * M.norm()
    pts = lattice_points_in_embedding_box(M, cap, cap)
    seen = set()
    for m in pts:
        if m.norm() > NB:
            continue
        seen.add(orbit_representative(m, eps))
    return seen


def test_enumerate_orbit_reps_matches_bruteforce():
    eps = totally_positive_fundamental_unit(F5)
    reps = enumerate_orbit_reps(O5, 5, eps)
    oracle = brute_force_orbit_reps(O5, 5, eps)
    assert set(reps) == oracle
    assert len(reps) == len(set(reps))
    # frozen from the oracle: 1, 2, and (5+sqrt5)/2
    assert reps == [F5.one, F5.element(2, 0), F5.element(2, 1)]


def test_enumerate_orbit_reps_closed_under_reduction():
    eps = totally_positive_fundamental_unit(F3)
    M = FracIdeal.from_generators(F3, [F3.one, F3.sqrtD])
    reps = enumerate_orbit_reps(M, 7, eps)
    listed = set(reps)
    for m in lattice_points_in_embedding_box(M, 50, 50):
        if m.norm() <= 7 * M.norm():
            assert orbit_representative(m, eps) in listed


def test_sorted_by_norm():
    eps = totally_positive_fundamental_unit(F5)
    reps = enumerate_orbit_reps(O5, 9, eps)
    norms = [m.norm() for m in reps]
    assert norms == sorted(norms)


def test_unit_order_mod():
    n7 = FracIdeal.from_generators(F5, [F5.from_rational(7)])
    assert multiplicative_order_mod(F5.omega, n7) == 16
    gens = units_congruent_one_generators(F5, n7)
    for g in gens:
        assert abs(g.norm()) == 1
        assert n7.contains(n7.reduce_element(g - 1))
