"""Narrow and wide (ray) class groups of a real quadratic field.

Everything is computed by finite enumeration:

* the wide class group from integral ideals below the Minkowski bound,
  classified by exact principality tests;
* the ray quotient order from the residue/sign datum group modulo the
  image of the unit group;
* generators as small prime ideals, assembled into a polycyclic
  presentation whose total order is checked against the exact formula.

Principality with side conditions (total positivity, congruence mod the
modulus) is decided by a bounded generator search plus a full sweep of
one period of the unit group, so failures are certificates, not timeouts.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import product

from .errors import BudgetError, MathDomainError
from .field import FieldElement, _Field
from .ideals import (
    FracIdeal,
    PrimeIdeal,
    congruent_mod,
    is_rational_prime,
    primes_over,
)
from .units import (
    enumeration_budget,
    gauss_reduced_basis,
    multiplicative_order_mod,
    sign_vector,
    unit_data,
)


def _sqrt_upper(q: Fraction) -> Fraction:
    scale = 10 ** 9
    return Fraction(math.isqrt(int(Fraction(q) * scale * scale)) + 1, scale)


def lattice_points_box_all_signs(M: FracIdeal, bound1, bound2, digits=25):
    """Nonzero m in M with |theta_i(m)| <= bound_i (exact filtering)."""
    b1, b2 = gauss_reduced_basis(M)
    bounds = [b.embedding_bounds(i, digits) for i in (0, 1) for b in (b1, b2)]
    t1b1, t1b2, t2b1, t2b2 = bounds
    cross = b1 * b2.conjugate() - b2 * b1.conjugate()
    u, v = cross.sqrt_coords()
    assert u == 0
    sq_lo, _ = M.field.sqrt_bounds(digits)
    det_abs_lo = abs(v) * sq_lo
    B1, B2 = Fraction(bound1), Fraction(bound2)

    def up(iv):
        return max(abs(iv[0]), abs(iv[1]))

    xr = int((B1 * up(t2b2) + B2 * up(t1b2)) / det_abs_lo) + 2
    yr = int((B1 * up(t2b1) + B2 * up(t1b1)) / det_abs_lo) + 2
    if (2 * xr + 1) * (2 * yr + 1) > enumeration_budget():
        raise BudgetError("generator search box exceeds the enumeration budget")
    F = M.field
    big1 = F.from_sqrt_coords(B1, 0)
    big2 = F.from_sqrt_coords(B2, 0)
    out = []
    for x in range(-xr, xr + 1):
        for y in range(-yr, yr + 1):
            if x == 0 and y == 0:
                continue
            m = x * b1 + y * b2
            if (big1 - m).sign_embedding(0) < 0 or (big1 + m).sign_embedding(0) < 0:
                continue
            if (big2 - m).sign_embedding(1) < 0 or (big2 + m).sign_embedding(1) < 0:
                continue
            out.append(m)
    return out


@lru_cache(maxsize=None)
def any_generator(A: FracIdeal):
    """Some generator of A if A is principal, else None."""
    F = A.field
    N = A.norm()
    rho = unit_data(F).totally_positive_fundamental_unit
    ratio_hi = (rho / rho.conjugate()).embedding_bounds(0)[1]
    c1 = _sqrt_upper(N * ratio_hi)
    c2 = _sqrt_upper(N * ratio_hi)
    for g in lattice_points_box_all_signs(A, c1, c2):
        if abs(g.norm()) == N and FracIdeal.from_generators(F, [g]) == A:
            return g
    return None


def adjusted_generator(
    A: FracIdeal,
    totally_positive: bool = False,
    modulus: FracIdeal | None = None,
    residue: FieldElement | None = None,
):
    """A generator of A that is totally positive and/or = residue mod modulus.

    Returns None when no unit adjustment achieves the conditions (which is
    an exact statement: one full period of the unit group is swept).
    """
    F = A.field
    g0 = any_generator(A)
    if g0 is None:
        return None
    ud = unit_data(F)
    eps0 = ud.fundamental_unit
    if modulus is not None and modulus != FracIdeal.unit_ideal(F):
        d = multiplicative_order_mod(eps0, modulus)
    else:
        d = 1
        modulus = None
    period = int(math.lcm(2, d))
    cur = g0 * eps0 ** (-period)
    for _ in range(2 * period + 1):
        for cand in (cur, -cur):
            if totally_positive and not (
                cand.sign_embedding(0) > 0 and cand.sign_embedding(1) > 0
            ):
                continue
            if modulus is not None:
                target = residue if residue is not None else F.one
                if not congruent_mod(cand, target, modulus):
                    continue
            return cand
        cur = cur * eps0
    return None


# -- wide class group --------------------------------------------------------


def _integral_ideals_of_norm(field: _Field, n: int):
    """All integral ideals of norm n (HNF enumeration with module filter)."""
    out = []
    for a in range(1, n + 1):
        if n % a:
            continue
        d = n // a
        for b in range(d):
            rows = ((Fraction(a), Fraction(b)), (Fraction(0), Fraction(d)))
            try:
                I = FracIdeal(field, rows)
            except ValueError:
                continue
            if I.is_module():
                out.append(I)
    return out


@lru_cache(maxsize=None)
def wide_class_representatives(field: _Field):
    """Integral ideal representatives of the class group (Minkowski sweep)."""
    bound = int(_sqrt_upper(Fraction(field.disc)) / 2) + 1
    reps: list[FracIdeal] = []
    for n in range(1, bound + 1):
        for I in _integral_ideals_of_norm(field, n):
            if not any(any_generator(I / R) is not None for R in reps):
                reps.append(I)
    return tuple(reps)


def class_number(field: _Field) -> int:
    return len(wide_class_representatives(field))


# -- ray datum bookkeeping ---------------------------------------------------


def invertible_residues(field: _Field, n: FracIdeal):
    """Representatives of (O_F/n)^* for an integral modulus n."""
    O = FracIdeal.unit_ideal(field)
    if n == O:
        return [field.one]
    out = []
    for r in n.residues():
        if not r:
            continue
        if (FracIdeal.from_generators(field, [r]) + n) == O:
            out.append(r)
    return out


def _unit_image_size(field: _Field, n: FracIdeal, narrow: bool) -> int:
    """Size of the image of O_F^* in the residue/sign datum group.

    Data are pairs (residue mod n, sign vector); multiplication is
    componentwise, so the closure is taken on pairs directly.
    """
    ud = unit_data(field)
    O = FracIdeal.unit_ideal(field)
    nn = None if n == O else n

    def datum(x: FieldElement):
        res = repr(nn.reduce_element(x)) if nn is not None else ""
        sv = sign_vector(x) if narrow else (1, 1)
        return res, sv

    gens = [ud.fundamental_unit, field.from_rational(-1)]
    seen = {datum(field.one)}
    carriers = [field.one]
    changed = True
    while changed:
        changed = False
        for x in list(carriers):
            for g in gens:
                y = x * g
                key = datum(y)
                if key not in seen:
                    seen.add(key)
                    carriers.append(y)
                    changed = True
    return len(seen)


def ray_group_order(field: _Field, n: FracIdeal, narrow: bool) -> int:
    """|Cl_n| from the exact sequence through the wide class group."""
    h = class_number(field)
    O = FracIdeal.unit_ideal(field)
    datum_size = len(invertible_residues(field, n)) if n != O else 1
    if narrow:
        datum_size *= 4
    return h * datum_size // _unit_image_size(field, n, narrow)


# -- the ray class group ------------------------------------------------------


class RayClassGroup:
    """Polycyclic presentation of the (narrow) ray class group mod n.

    gens[i] is a prime ideal; orders[i] its relative order; the relation
    gens[i]^orders[i] = prod_{j<i} gens[j]^tails[i][j]  * (gamma_i)
    holds with gamma_i totally positive (narrow case) and = 1 mod n.
    Exponent tuples e with 0 <= e[i] < orders[i] enumerate the group once.
    """

    def __init__(self, field: _Field, modulus: FracIdeal, narrow: bool,
                 coprime_to: FracIdeal | None = None):
        if not modulus.is_integral():
            raise MathDomainError("ray modulus must be integral")
        self.field = field
        self.modulus = modulus
        self.narrow = narrow
        self.order = ray_group_order(field, modulus, narrow)
        self.gens: list[PrimeIdeal] = []
        self.orders: list[int] = []
        self.tails: list[tuple] = []
        self.rel_gammas: list[FieldElement] = []
        self._principal_cache: dict = {}
        avoid = modulus
        if coprime_to is not None:
            avoid = avoid * coprime_to
        self._build(avoid)

    # smallest positive generator-power datum ---------------------------------

    def _ray_principal_gen(self, A: FracIdeal, residue: FieldElement | None = None):
        """gamma with (gamma)=A, totally positive if narrow, = residue mod n."""
        key = (A.key(), None if residue is None else str(residue))
        if key not in self._principal_cache:
            O = FracIdeal.unit_ideal(self.field)
            mod = None if self.modulus == O else self.modulus
            self._principal_cache[key] = adjusted_generator(
                A,
                totally_positive=self.narrow,
                modulus=mod,
                residue=residue,
            )
        return self._principal_cache[key]

    def _power_combo(self, exps):
        I = FracIdeal.unit_ideal(self.field)
        for g, e in zip(self.gens, exps):
            if e:
                I = I * g ** e
        return I

    def _in_subgroup(self, A: FracIdeal):
        """Exponents e (current gens) and gamma with A = prod g^e * (gamma)."""
        ranges = [range(d) for d in self.orders]
        for exps in product(*ranges):
            test = A / self._power_combo(exps)
            gamma = self._ray_principal_gen(test)
            if gamma is not None:
                return tuple(exps), gamma
        return None

    def _build(self, avoid: FracIdeal):
        target = self.order
        current = 1
        p = 1
        tried = 0
        while current < target:
            p += 1
            if not is_rational_prime(p):
                continue
            tried += 1
            if tried > 400:
                raise BudgetError("ray class generator search exhausted")
            for P in primes_over(self.field, p):
                if not (P + avoid) == FracIdeal.unit_ideal(self.field):
                    continue
                if self._in_subgroup(P) is not None:
                    continue
                # relative order of P over the current subgroup
                k = 1
                power = P
                while True:
                    k += 1
                    power = power * P
                    hit = self._in_subgroup(power)
                    if hit is not None:
                        break
                    if k > target:
                        raise BudgetError("runaway generator order")
                exps, gamma = hit
                self.gens.append(P)
                self.orders.append(k)
                self.tails.append(exps)
                self.rel_gammas.append(gamma)
                current *= k
                if current >= target:
                    break
        if current != target:
            raise MathDomainError("generator set does not match the group order")

    # public API ---------------------------------------------------------------

    def exponent_tuples(self):
        return product(*[range(d) for d in self.orders])

    def structure(self):
        return tuple(self.orders)

    def discrete_log(self, A: FracIdeal, residue: FieldElement | None = None):
        """(exps, gamma) with A = prod gens^exps * (gamma) and gamma meeting
        the ray conditions (= residue mod n when given).  None if A is not
        coprime-representable (should not happen for coprime input)."""
        for exps in self.exponent_tuples():
            test = A / self._power_combo(exps)
            gamma = self._ray_principal_gen(test, residue=residue)
            if gamma is not None:
                return tuple(exps), gamma
        return None

    def is_ray_principal(self, A: FracIdeal, residue: FieldElement | None = None):
        return self._ray_principal_gen(A, residue=residue) is not None

    def class_representatives(self):
        """Integral ideal representatives, one per class (identity first)."""
        reps = []
        for exps in sorted(self.exponent_tuples()):
            reps.append(self._power_combo(exps))
        return reps


@lru_cache(maxsize=None)
def ray_class_group(
    field: _Field, modulus: FracIdeal, narrow: bool,
    coprime_to: FracIdeal | None = None,
) -> RayClassGroup:
    if int(modulus.norm()) > 100000:
        raise BudgetError("ray modulus too large for the enumeration budget")
    return RayClassGroup(field, modulus, narrow, coprime_to)


def narrow_class_group(field: _Field) -> RayClassGroup:
    return ray_class_group(field, FracIdeal.unit_ideal(field), True)
