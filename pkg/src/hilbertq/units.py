"""Units, the totally positive cone, and unit-orbit enumeration.

The totally positive units of a real quadratic field form an infinite
cyclic group; its generator eps_plus drives every truncation and every
orbit computation in the package.  The fundamental domain for the action
m -> eps^k * m on the totally positive cone is the ratio slab

    1 <= theta1(m)/theta2(m) < theta1(eps)/theta2(eps),

closed on the left, which makes orbit representatives unique and
deterministic.
"""

from __future__ import annotations

import functools
import math
import os
from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetError
from .field import FieldElement, _Field
from .ideals import FracIdeal


def enumeration_budget() -> int:
    return int(os.environ.get("HILBERTQ_ENUM_BUDGET", "4000000"))


def _continued_fraction_quadratic(D: int, P: int, Q: int, terms: int):
    """CF expansion of (P + sqrt(D))/Q, yielding partial quotients."""
    sqrt_floor = math.isqrt(D)
    out = []
    for _ in range(terms):
        # exact floor of an irrational (P + sqrt(D))/Q for either sign of Q
        if Q > 0:
            a = (P + sqrt_floor) // Q
        else:
            a = (P + sqrt_floor + 1) // Q
        out.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
    return out


@dataclass(frozen=True)
class UnitData:
    fundamental_unit: FieldElement
    totally_positive_fundamental_unit: FieldElement
    norm_sign: int


def unit_data(field: _Field) -> UnitData:
    """Fundamental unit (theta1 > 1) of O_F by the Pell machine.

    Convergents of -conj(w) produce every unit x + y*w with small
    conjugate; a small brute-force box guards the first few solutions.
    """
    D = field.D
    if field.omega_trace:
        P, Q = -1, 2
    else:
        P, Q = 0, 1
    quotients = _continued_fraction_quadratic(D, P, Q, 80)
    p0, p1 = 1, quotients[0]
    q0, q1 = 0, 1
    best = None
    for a in quotients[1:]:
        cand = field.element(p1, q1)
        n = cand.norm()
        if abs(n) == 1 and cand.sign_embedding(0) > 0 and cand != field.one:
            best = cand
            break
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
    # guard the tiny-solution corner the Legendre criterion can miss
    for x in range(-12, 13):
        for y in range(-12, 13):
            u = field.element(x, y)
            if not u or abs(u.norm()) != 1 or u == field.one:
                continue
            if u.sign_embedding(0) <= 0:
                u = -u
            if (u - 1).sign_embedding(0) <= 0:
                continue
            if best is None or (best - u).sign_embedding(0) > 0:
                best = u
    if best is None:
        raise RuntimeError("Pell machine failed (should not happen)")
    eps0 = best
    sign = int(eps0.norm())
    eps_plus = eps0 if sign == 1 else eps0 * eps0
    return UnitData(eps0, eps_plus, sign)


def totally_positive_fundamental_unit(field: _Field) -> FieldElement:
    return unit_data(field).totally_positive_fundamental_unit


def _ratio_below(m: FieldElement, e: FieldElement) -> bool:
    """theta1(m)/theta2(m) < theta1(e)/theta2(e), for totally positive m, e."""
    return (m * e.conjugate() - e * m.conjugate()).sign_embedding(0) < 0


def orbit_representative(m: FieldElement, eps: FieldElement) -> FieldElement:
    """The unique <eps>-orbit element of m in the ratio fundamental domain."""
    if not m.is_totally_positive():
        raise ValueError("orbit reduction needs a totally positive element")
    one = m.field.one
    while _ratio_below(m, one):
        m = m * eps
    while not _ratio_below(m, eps):
        m = m / eps
    return m


def orbit_exponent(m: FieldElement, rep: FieldElement, eps: FieldElement) -> int:
    """k with eps^k * m == rep (both on the same orbit)."""
    k = 0
    cur = m
    while cur != rep:
        if _ratio_below(cur, rep):
            cur = cur * eps
            k += 1
        else:
            cur = cur / eps
            k -= 1
        if abs(k) > 4096:
            raise ValueError("elements are not on the same orbit")
    return k


def gauss_reduced_basis(M: FracIdeal):
    """Lagrange-reduced basis for the embedding quadratic form Tr(m^2).

    HNF bases of prime powers are extremely skew; reduction keeps the
    candidate boxes of the enumerators proportional to the lattice
    covolume.
    """

    def ip(u: FieldElement, v: FieldElement) -> Fraction:
        return (u * v).trace()

    b1, b2 = M.basis()
    while True:
        if ip(b2, b2) < ip(b1, b1):
            b1, b2 = b2, b1
        r = round(ip(b1, b2) / ip(b1, b1))
        if r:
            b2 = b2 - r * b1
        if ip(b2, b2) >= ip(b1, b1):
            return b1, b2


def lattice_points_in_embedding_box(M: FracIdeal, bound1, bound2, digits=30):
    """All m in M with 0 < theta_i(m) <= bound_i, by exact filtering.

    The candidate coordinate box is derived from rational outer bounds on
    sqrt(D); every candidate is then tested exactly.
    """
    b1, b2 = gauss_reduced_basis(M)
    bounds = [b.embedding_bounds(i, digits) for i in (0, 1) for b in (b1, b2)]
    t1b1, t1b2, t2b1, t2b2 = bounds
    # exact determinant: theta1(b1)theta2(b2) - theta2(b1)theta1(b2)
    cross = b1 * b2.conjugate() - b2 * b1.conjugate()
    # cross is a rational multiple of sqrt(D); |det| exactly:
    u, v = cross.sqrt_coords()
    assert u == 0
    sq_lo, sq_hi = M.field.sqrt_bounds(digits)
    det_abs_lo = abs(v) * sq_lo
    if det_abs_lo <= 0:
        raise ValueError("degenerate basis")
    B1, B2 = Fraction(bound1), Fraction(bound2)

    def up(iv):
        return max(abs(iv[0]), abs(iv[1]))

    x_max = (B1 * up(t2b2) + B2 * up(t1b2)) / det_abs_lo
    y_max = (B1 * up(t2b1) + B2 * up(t1b1)) / det_abs_lo
    xr = int(x_max) + 2
    yr = int(y_max) + 2
    if (2 * xr + 1) * (2 * yr + 1) > enumeration_budget():
        raise BudgetError(
            f"lattice box of {(2*xr+1)*(2*yr+1)} points exceeds the budget"
        )
    F = M.field
    out = []
    for x in range(-xr, xr + 1):
        for y in range(-yr, yr + 1):
            if x == 0 and y == 0:
                continue
            m = x * b1 + y * b2
            if m.sign_embedding(0) <= 0 or m.sign_embedding(1) <= 0:
                continue
            if (m - F.from_sqrt_coords(B1, 0)).sign_embedding(0) > 0:
                continue
            if (m.conjugate() - F.from_sqrt_coords(B2, 0)).sign_embedding(0) > 0:
                continue
            out.append(m)
    return out


def enumerate_orbit_reps(M: FracIdeal, bound, eps: FieldElement, digits=30):
    """One representative per <eps>-orbit of totally positive m in M with
    relative norm Nm(m)/Nm(M) <= bound, sorted by (relative norm, theta1).

    Completeness comes from enumerating the compact slab
    {1 <= theta1/theta2 < ratio(eps), theta1*theta2 <= bound*Nm(M)}.
    """
    bound = Fraction(bound)
    if bound <= 0:
        return []
    NB = bound * M.norm()
    ratio = eps / eps.conjugate()
    _, r_hi = ratio.embedding_bounds(0, digits)

    def sqrt_hi(q):
        q = Fraction(q)
        scale = 10 ** 12
        n = math.isqrt(int(q * scale * scale)) + 1
        return Fraction(n, scale)

    c1 = sqrt_hi(NB * r_hi)
    c2 = sqrt_hi(NB)
    cands = lattice_points_in_embedding_box(M, c1, c2, digits)
    reps = []
    seen = set()
    for m in cands:
        if m.norm() > NB:
            continue
        # in-domain test: ratio >= 1 and ratio < ratio(eps)
        if (m - m.conjugate()).sign_embedding(0) < 0:
            continue
        if not _ratio_below(m, eps):
            continue
        if m not in seen:
            seen.add(m)
            reps.append(m)

    def cmp(m1, m2):
        n1, n2 = m1.norm(), m2.norm()
        if n1 != n2:
            return -1 if n1 < n2 else 1
        s = m1.compare_embedding(m2, 0)
        return s

    reps.sort(key=functools.cmp_to_key(cmp))
    return reps


# -- unit images modulo an ideal -------------------------------------------


def multiplicative_order_mod(x: FieldElement, n: FracIdeal) -> int:
    """Order of x in (O_F/n)^*; x must be invertible mod n."""
    O = FracIdeal.unit_ideal(x.field)
    if n == O:
        return 1
    cur = n.reduce_element(x)
    one = n.reduce_element(x.field.one)
    k = 1
    limit = int(n.norm()) + 1
    while cur != one:
        cur = n.reduce_element(cur * x)
        k += 1
        if k > limit:
            raise ValueError("element is not invertible modulo n")
    return k


def congruent_to_one_mod(x: FieldElement, n: FracIdeal) -> bool:
    return n.contains(x - x.field.one)


def units_congruent_one_generators(field: _Field, n: FracIdeal):
    """Generators of E_n = {units = 1 mod n} inside <-1> x <eps0>."""
    ud = unit_data(field)
    eps0 = ud.fundamental_unit
    O = FracIdeal.unit_ideal(field)
    if n == O:
        return [field.from_rational(-1), eps0]
    d = multiplicative_order_mod(eps0, n)
    gens = [eps0 ** d]
    minus = field.from_rational(-1)
    if congruent_to_one_mod(minus, n):
        gens.append(minus)
    else:
        cur = field.one
        for k in range(1, d + 1):
            cur = cur * eps0
            if congruent_to_one_mod(minus * cur, n):
                gens.append(minus * cur)
                break
    return gens


def totally_positive_units_congruent_one_generator(
    field: _Field, n: FracIdeal
) -> FieldElement:
    """Generator of the totally positive units = 1 mod n."""
    eps_plus = unit_data(field).totally_positive_fundamental_unit
    O = FracIdeal.unit_ideal(field)
    if n == O:
        return eps_plus
    d = multiplicative_order_mod(eps_plus, n)
    return eps_plus ** d


def sign_vector(x: FieldElement):
    return (x.sign_embedding(0), x.sign_embedding(1))
