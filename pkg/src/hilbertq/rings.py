"""Coefficient rings for q-expansion families.

Two exact families are provided:

* QuadCyclotomicRing -- Q(sqrt D) with a root of unity adjoined, stored
  as vectors of field elements over the power basis of the cyclotomic
  polynomial.  Characteristic zero; every rational prime is invertible.

* QuadTorsionRing -- the p-power torsion quotient O_F / P^(n*e) at a
  chosen prime P over p.  This is a finite local ring killed by p^n; the
  coordinate maps are defined on every element of F that is integral at
  P (denominators supported away from P are divided out).

Both expose the same duck interface: zero/one, add/neg/mul, embed (the
first coordinate map), embed_conj (the second), chi (weight characters),
inv, zeta, and helpers for torsion bookkeeping.  Elements are plain
hashable values, so families can live in dictionaries.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .errors import MathDomainError
from .field import FieldElement, _Field, chi_value
from .ideals import (
    FracIdeal,
    PrimeIdeal,
    element_valuation,
    find_uniformizer,
    primes_over,
)


def _poly_divmod(num, den):
    """Division of integer coefficient lists (little endian), den monic."""
    num = list(num)
    d = len(den) - 1
    q = [0] * max(0, len(num) - d)
    for i in range(len(num) - 1, d - 1, -1):
        c = num[i]
        if c:
            q[i - d] = c
            for j, dc in enumerate(den):
                num[i - d + j] -= c * dc
    while num and num[-1] == 0:
        num.pop()
    return q, num


@lru_cache(maxsize=None)
def cyclotomic_polynomial(N: int):
    """Coefficients of Phi_N, little endian."""
    if N == 1:
        return (-1, 1)
    poly = [0] * (N + 1)
    poly[0], poly[N] = -1, 1
    for d in range(1, N):
        if N % d == 0:
            q, r = _poly_divmod(poly, list(cyclotomic_polynomial(d)))
            assert not r
            poly = q
    return tuple(poly)


class QuadCyclotomicRing:
    """Q(sqrt D, zeta_N) as exact vectors of Q(sqrt D)-coefficients."""

    def __init__(self, field: _Field, zeta_order: int = 1):
        self.field = field
        self.zeta_order = zeta_order
        self.phi = cyclotomic_polynomial(zeta_order)
        self.deg = len(self.phi) - 1
        self.zero = self._vec({})
        self.one = self._vec({0: field.one})
        self.is_torsion = False
        self.torsion = None
        self.p_invertible = True

    def __repr__(self):
        if self.zeta_order == 1:
            return f"Q(sqrt({self.field.D}))"
        return f"Q(sqrt({self.field.D}), zeta_{self.zeta_order})"

    def description(self):
        return {"kind": "cyclotomic", "D": self.field.D, "zeta": self.zeta_order}

    def _vec(self, coeffs: dict):
        out = [self.field.zero] * self.deg
        for i, c in coeffs.items():
            out[i] = c
        return tuple(out)

    # -- ring operations ----------------------------------------------------

    def add(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def neg(self, a):
        return tuple(-x for x in a)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        conv = [self.field.zero] * (2 * self.deg - 1 if self.deg > 1 else 1)
        for i, x in enumerate(a):
            if not x:
                continue
            for j, y in enumerate(b):
                if y:
                    conv[i + j] = conv[i + j] + x * y
        # reduce modulo the (monic, integer) cyclotomic polynomial
        for i in range(len(conv) - 1, self.deg - 1, -1):
            c = conv[i]
            if c:
                for j, pc in enumerate(self.phi):
                    conv[i - self.deg + j] = conv[i - self.deg + j] - c * pc
        return tuple(conv[: self.deg])

    def scalar_mul(self, q, a):
        q = Fraction(q)
        return tuple(x * q for x in a)

    def rational(self, q):
        return self._vec({0: self.field.from_rational(q)})

    def is_zero(self, a):
        return all(not x for x in a)

    # -- coordinate maps ------------------------------------------------------

    def embed(self, x: FieldElement):
        return self._vec({0: x})

    def embed_conj(self, x: FieldElement):
        return self._vec({0: x.conjugate()})

    def chi(self, alpha: FieldElement, exponents):
        return self.embed(chi_value(alpha, exponents))

    def zeta(self, j: int = 1):
        j %= self.zeta_order
        if self.deg == 1:
            # Phi_N linear: the root is -phi[0]
            root = self.rational(-self.phi[0])
            out = self.one
            for _ in range(j):
                out = self.mul(out, root)
            return out
        gen = self._vec({1: self.field.one})
        out = self.one
        for _ in range(j):
            out = self.mul(out, gen)
        return out

    def inv(self, a):
        """Inverse by exact linear solve over Q in the full basis."""
        if self.is_zero(a):
            raise ZeroDivisionError("zero in coefficient ring")
        n = 2 * self.deg
        w = self.field.omega

        def to_qvec(elt):
            out = []
            for c in elt:
                out.extend([c.a, c.b])
            return out

        cols = []
        for j in range(self.deg):
            for part in (self.field.one, w):
                basis_elt = self._vec({j: part})
                cols.append(to_qvec(self.mul(a, basis_elt)))
        # solve M x = e0 with M columns = cols
        M = [[cols[j][i] for j in range(n)] for i in range(n)]
        rhs = [Fraction(1 if i == 0 else 0) for i in range(n)]
        x = _solve_linear(M, rhs)
        if x is None:
            raise MathDomainError("element is a zero divisor in the ring")
        out = [self.field.zero] * self.deg
        for j in range(self.deg):
            out[j] = FieldElement(self.field, Fraction(x[2 * j]), Fraction(x[2 * j + 1]))
        return tuple(out)

    def inv_int(self, k: int):
        return self.rational(Fraction(1, k))

    # -- torsion hooks ---------------------------------------------------------

    def torsion_annihilator_generator(self, b):
        """Generator of the annihilator of the image of b (FieldElement)."""
        if isinstance(b, FieldElement) and not b:
            return self.one
        if b == 0:
            return self.one
        return self.zero

    def random_element(self, rng):
        return self._vec(
            {
                i: self.field.element(
                    Fraction(rng.randint(-6, 6), rng.choice((1, 1, 2, 3))),
                    rng.randint(-4, 4),
                )
                for i in range(self.deg)
            }
        )

    def to_json(self, a):
        return [[str(c.a), str(c.b)] for c in a]

    def from_json(self, blob):
        return tuple(
            FieldElement(self.field, Fraction(c[0]), Fraction(c[1])) for c in blob
        )


def _solve_linear(M, rhs):
    """Gaussian elimination over Q; returns None when singular."""
    n = len(M)
    A = [row[:] + [rhs[i]] for i, row in enumerate(M)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if A[r][col] != 0:
                piv = r
                break
        if piv is None:
            return None
        A[col], A[piv] = A[piv], A[col]
        pv = A[col][col]
        A[col] = [c / pv for c in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                f = A[r][col]
                A[r] = [c - f * d for c, d in zip(A[r], A[col])]
    return [A[i][n] for i in range(n)]


class QuadTorsionRing:
    """O_F / P^(n e_P): a finite local ring with p^n = 0.

    Elements are canonical coordinate pairs modulo the HNF lattice of
    P^(n e_P).  The first coordinate map reduces F at P; the second
    composes with conjugation (so it reduces at the conjugate prime).
    """

    def __init__(self, field: _Field, P: PrimeIdeal, n: int):
        self.field = field
        self.P = P
        self.p = P.p
        self.n = n
        self.s = n * P.e
        mod = FracIdeal.unit_ideal(field)
        for _ in range(self.s):
            mod = mod * P
        self.modulus = mod
        self.zero = self._reduce(field.zero)
        self.one = self._reduce(field.one)
        self.is_torsion = True
        self.torsion = (self.p, self.n)
        self.p_invertible = False
        self.zeta_order = 2
        self.uniformizer = find_uniformizer(field, P)

    def __repr__(self):
        return f"O({self.field.D})/P{self.p}^{self.s}"

    def description(self):
        return {
            "kind": "torsion",
            "D": self.field.D,
            "p": self.p,
            "n": self.n,
            "prime": [[str(c) for c in row] for row in self.P.rows],
        }

    def _reduce(self, x: FieldElement):
        r = self.modulus.reduce_element(x)
        return (int(r.a), int(r.b))

    def _lift(self, a) -> FieldElement:
        return self.field.element(a[0], a[1])

    # -- ring operations ----------------------------------------------------

    def add(self, a, b):
        return self._reduce(self._lift(a) + self._lift(b))

    def neg(self, a):
        return self._reduce(-self._lift(a))

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        return self._reduce(self._lift(a) * self._lift(b))

    def rational(self, q):
        q = Fraction(q)
        return self.mul(
            self._reduce(self.field.from_rational(q.numerator)),
            self.inv_int(q.denominator),
        )

    def is_zero(self, a):
        return a == self.zero

    # -- coordinate maps ------------------------------------------------------

    def embed(self, x: FieldElement):
        """Reduction of x at P; defined whenever v_P(x) >= 0."""
        if not x:
            return self.zero
        if element_valuation(x, self.P) < 0:
            raise MathDomainError("element is not integral at the torsion prime")
        factors_inv = []
        work = x
        for Q in primes_over(self.field, self.p):
            if Q == self.P:
                continue
            v = element_valuation(work, Q)
            if v < 0:
                wq = find_uniformizer(self.field, Q)
                work = work * wq ** (-v)
                factors_inv.append(self.inv(self.embed(wq ** (-v))))
        d = work.denominator()
        y = FieldElement(self.field, work.a * d, work.b * d)
        vp = 0
        while d % self.p == 0:
            d //= self.p
            vp += 1
        if vp:
            scale = self.p ** vp
            y = FieldElement(self.field, y.a / scale, y.b / scale)
            if y.a.denominator != 1 or y.b.denominator != 1:
                raise MathDomainError("element is not integral at the torsion prime")
        out = self._reduce(y)
        if d != 1:
            out = self.mul(out, self.inv_int(d))
        for f in factors_inv:
            out = self.mul(out, f)
        return out

    def embed_conj(self, x: FieldElement):
        return self.embed(x.conjugate())

    def chi(self, alpha: FieldElement, exponents):
        return self.embed(chi_value(alpha, exponents))

    def zeta(self, j: int = 1):
        return self.rational((-1) ** (j % 2))

    def inv_int(self, k: int):
        k = int(k)
        if k % self.p == 0:
            raise MathDomainError("integer not invertible in torsion ring")
        kinv = pow(k, -1, self.p ** (self.s + 2))
        return self._reduce(self.field.from_rational(kinv))

    def inv(self, a):
        """Hensel lift of the residue-field inverse."""
        x = self._lift(a)
        if not x or element_valuation(x, self.P) != 0:
            raise MathDomainError("element not invertible in torsion ring")
        inv1 = None
        for r in self.P.residues():
            if self.P.contains(x * r - 1):
                inv1 = r
                break
        if inv1 is None:
            raise MathDomainError("element not invertible in torsion ring")
        cur = inv1
        for _ in range(self.s.bit_length() + 1):
            cur = self.modulus.reduce_element(cur * (2 - x * cur))
        out = self._reduce(cur)
        assert self.mul(out, a) == self.one
        return out

    # -- torsion hooks ---------------------------------------------------------

    def torsion_annihilator_generator(self, b):
        """g with ann(image of b) = (g); b is an exact field element or 0."""
        if not isinstance(b, FieldElement) or not b:
            return self.one
        v = element_valuation(b, self.P)
        if v >= self.s:
            return self.one
        if v < 0:
            raise MathDomainError("annihilator of a non-integral element")
        return self.embed(self.uniformizer ** (self.s - v))

    def random_element(self, rng):
        (h11, _), (_, h22) = self.modulus.rows
        return self._reduce(
            self.field.element(rng.randrange(int(h11)), rng.randrange(int(h22)))
        )

    def to_json(self, a):
        return [a[0], a[1]]

    def from_json(self, blob):
        return self._reduce(self.field.element(blob[0], blob[1]))
