"""Fractional ideals of a real quadratic field as HNF lattices.

An ideal is stored by the canonical upper-triangular row basis
((h11, h12), (0, h22)) with respect to (1, w): the lattice is spanned by
h11 + h12*w and h22*w, with h11, h22 > 0 and 0 <= h12 < h22 after row
reduction.  All entries are exact rationals, so equality and hashing are
structural.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .errors import MathDomainError
from .field import FieldElement, RealQuadraticField, _Field


def _hnf_rows(rows):
    """Hermite form of the row lattice spanned by integer pairs."""
    rows = [(int(x), int(y)) for x, y in rows if x or y]
    if not rows:
        raise ValueError("zero lattice")
    # make the second coordinate the pivot of one vector
    a, b = rows[0]
    for x, y in rows[1:]:
        # gcd on first coordinates, tracking the second
        while x:
            q = a // x
            a, b, x, y = x, y, a - q * x, b - q * y
        if a == 0:
            a, b = x, y
    # now every row has first coord divisible by a (possibly a == 0)
    if a == 0:
        raise ValueError("rank-deficient lattice")
    if a < 0:
        a, b = -a, -b
    d = 0
    for x, y in rows:
        d = math.gcd(d, y - (x // a) * b)
    if d == 0:
        raise ValueError("rank-deficient lattice")
    b %= d
    return (a, b), (0, d)


class FracIdeal:
    """A nonzero fractional O_F-ideal (rank-2 lattice closed under w)."""

    __slots__ = ("field", "rows", "_norm")

    def __init__(self, field: _Field, rows):
        self.field = field
        self.rows = (
            (Fraction(rows[0][0]), Fraction(rows[0][1])),
            (Fraction(rows[1][0]), Fraction(rows[1][1])),
        )
        self._norm = self.rows[0][0] * self.rows[1][1]
        if self._norm <= 0:
            raise ValueError("ideal basis must be positively oriented")

    # -- construction ----------------------------------------------------

    @staticmethod
    def from_generators(field: _Field, gens) -> "FracIdeal":
        """O_F-module generated by field elements (ideal generated by gens)."""
        elts = []
        for g in gens:
            if not isinstance(g, FieldElement):
                g = field.from_rational(g)
            if g:
                elts.append(g)
                elts.append(g * field.omega)
        if not elts:
            raise ValueError("the zero ideal is not supported")
        den = math.lcm(*(e.denominator() for e in elts))
        rows = [(e.a * den, e.b * den) for e in elts]
        (h11, h12), (_, h22) = _hnf_rows(rows)
        return FracIdeal(
            field,
            ((Fraction(h11, den), Fraction(h12, den)), (0, Fraction(h22, den))),
        )

    @staticmethod
    def unit_ideal(field: _Field) -> "FracIdeal":
        return FracIdeal.from_generators(field, [field.one])

    @staticmethod
    def from_lattice_rows(field: _Field, rows) -> "FracIdeal":
        """Canonicalize arbitrary basis rows (must already be an O_F-module)."""
        den = math.lcm(
            *(Fraction(c).denominator for row in rows for c in row)
        )
        int_rows = [(Fraction(c) * den for c in row) for row in rows]
        (h11, h12), (_, h22) = _hnf_rows([tuple(r) for r in int_rows])
        I = FracIdeal(
            field,
            ((Fraction(h11, den), Fraction(h12, den)), (0, Fraction(h22, den))),
        )
        if not I.is_module():
            raise ValueError("lattice is not an O_F-module")
        return I

    # -- structural --------------------------------------------------------

    def basis(self):
        (a, b), (_, d) = self.rows
        F = self.field
        return FieldElement(F, a, b), FieldElement(F, Fraction(0), d)

    def is_module(self) -> bool:
        b1, b2 = self.basis()
        w = self.field.omega
        return self.contains(b1 * w) and self.contains(b2 * w)

    def norm(self) -> Fraction:
        return self._norm

    def contains(self, x: FieldElement) -> bool:
        # x = s*(h11 + h12 w) + t*(h22 w) needs integer s, t
        (h11, h12), (_, h22) = self.rows
        s = x.a / h11
        if s.denominator != 1:
            return False
        t = (x.b - s * h12) / h22
        return t.denominator == 1

    def coordinates(self, x: FieldElement):
        """Integer coordinates of x in the HNF basis, or None."""
        (h11, h12), (_, h22) = self.rows
        s = x.a / h11
        if s.denominator != 1:
            return None
        t = (x.b - s * h12) / h22
        if t.denominator != 1:
            return None
        return int(s), int(t)

    def __eq__(self, other):
        return (
            isinstance(other, FracIdeal)
            and self.field == other.field
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.field.D, self.rows))

    def __repr__(self):
        b1, b2 = self.basis()
        return f"<{b1}, {b2}>"

    def key(self):
        (a, b), (_, d) = self.rows
        return (str(a), str(b), str(d))

    # -- arithmetic --------------------------------------------------------

    def __mul__(self, other):
        if isinstance(other, FracIdeal):
            g1 = self.basis()
            g2 = other.basis()
            return FracIdeal.from_generators(
                self.field, [x * y for x in g1 for y in g2]
            )
        # scaling by a field element or rational
        if not isinstance(other, FieldElement):
            other = self.field.from_rational(other)
        return FracIdeal.from_generators(
            self.field, [x * other for x in self.basis()]
        )

    __rmul__ = __mul__

    def conjugate(self) -> "FracIdeal":
        return FracIdeal.from_generators(
            self.field, [b.conjugate() for b in self.basis()]
        )

    def inverse(self) -> "FracIdeal":
        # for quadratic fields  a * conj(a) = (Nm a)
        return self.conjugate() * self.field.from_rational(Fraction(1) / self.norm())

    def __truediv__(self, other):
        return self * other.inverse()

    def __pow__(self, n: int):
        if n == 0:
            return FracIdeal.unit_ideal(self.field)
        if n < 0:
            return self.inverse() ** (-n)
        out = self
        for _ in range(n - 1):
            out = out * self
        return out

    def __add__(self, other):
        """Ideal sum (lattice generated by both)."""
        return FracIdeal.from_generators(
            self.field, list(self.basis()) + list(other.basis())
        )

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for row in self.rows for c in row)

    def is_coprime(self, other) -> bool:
        return (self + other) == FracIdeal.unit_ideal(self.field)

    def subset_of(self, other) -> bool:
        return all(other.contains(b) for b in self.basis())

    def index_in(self, other) -> Fraction:
        """[other : self] for self a sublattice of other."""
        if not self.subset_of(other):
            raise ValueError("not a sublattice")
        return self.norm() / other.norm()

    # -- enumeration -------------------------------------------------------

    def residues(self):
        """Canonical representatives of O_F-coordinates modulo an integral ideal."""
        (h11, h12), (_, h22) = self.rows
        if any(c.denominator != 1 for c in (h11, h12, h22)):
            raise ValueError("residues require an integral ideal")
        F = self.field
        for s in range(int(h11)):
            for t in range(int(h22)):
                yield FieldElement(F, Fraction(s), Fraction(t))

    def reduce_element(self, x: FieldElement) -> FieldElement:
        """Canonical representative of x modulo this (integral) ideal."""
        (h11, h12), (_, h22) = self.rows
        s = x.a // h11
        a = x.a - s * h11
        b = x.b - s * h12
        t = b // h22
        b = b - t * h22
        return FieldElement(self.field, a, b)


# -- primes ---------------------------------------------------------------


def is_rational_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class PrimeIdeal(FracIdeal):
    """A prime over a rational prime, remembering (p, e, f)."""

    __slots__ = ("p", "e", "f")

    def __init__(self, field, rows, p, e, f):
        super().__init__(field, rows)
        self.p = p
        self.e = e
        self.f = f

    def residue_norm(self) -> int:
        return self.p ** self.f

    @staticmethod
    def _wrap(ideal: FracIdeal, p, e, f) -> "PrimeIdeal":
        return PrimeIdeal(ideal.field, ideal.rows, p, e, f)


def primes_over(field: _Field, p: int):
    """The primes of O_F over a rational prime p, sorted by HNF key.

    Returns a list of PrimeIdeal; length 1 (inert, ramified) or 2 (split).
    """
    if not is_rational_prime(p):
        raise ValueError(f"{p} is not prime")
    tr, nm = field.omega_trace, field.omega_norm
    roots = [r for r in range(p) if (r * r - tr * r + nm) % p == 0]
    if not roots:
        ideal = FracIdeal.from_generators(field, [field.from_rational(p)])
        return [PrimeIdeal._wrap(ideal, p, 1, 2)]
    if len(roots) == 1:
        gen = field.omega - field.from_rational(roots[0])
        ideal = FracIdeal.from_generators(field, [field.from_rational(p), gen])
        return [PrimeIdeal._wrap(ideal, p, 2, 1)]
    out = []
    for r in sorted(roots):
        gen = field.omega - field.from_rational(r)
        ideal = FracIdeal.from_generators(field, [field.from_rational(p), gen])
        out.append(PrimeIdeal._wrap(ideal, p, 1, 1))
    out.sort(key=lambda I: I.key())
    return out


def different(field: _Field) -> FracIdeal:
    """The different ideal; O_F is monogenic so it is (minpoly'(w))."""
    gen = 2 * field.omega - field.from_rational(field.omega_trace)
    return FracIdeal.from_generators(field, [gen])


def valuation(ideal_or_elt, P: FracIdeal) -> int:
    """Exact valuation v_P of a fractional ideal or field element."""
    F = P.field
    if isinstance(ideal_or_elt, FieldElement):
        if isinstance(P, PrimeIdeal):
            return element_valuation(ideal_or_elt, P)
        A = FracIdeal.from_generators(F, [ideal_or_elt])
    else:
        A = ideal_or_elt
    O = FracIdeal.unit_ideal(F)
    v = 0
    Pinv = P.inverse()
    while A.subset_of(O):
        A2 = A * Pinv
        if not A2.subset_of(O):
            return v
        A = A2
        v += 1
    while not A.subset_of(O):
        A = A * P
        v -= 1
    # A integral again; count remaining positive part
    while True:
        A2 = A * Pinv
        if not A2.subset_of(O):
            return v
        A = A2
        v += 1


def factor_rational(n: int):
    n = abs(int(n))
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@lru_cache(maxsize=None)
def factor_integral_ideal(A: FracIdeal):
    """[(prime ideal, exponent), ...] for an integral ideal."""
    if not A.is_integral():
        raise ValueError("factorization helper expects an integral ideal")
    out = []
    for p in sorted(factor_rational(int(A.norm()))):
        for P in primes_over(A.field, p):
            v = valuation(A, P)
            if v > 0:
                out.append((P, v))
    return tuple(out)


@lru_cache(maxsize=None)
def _prime_power(P: FracIdeal, k: int) -> FracIdeal:
    out = FracIdeal.unit_ideal(P.field)
    for _ in range(k):
        out = out * P
    return out


def element_valuation(x: FieldElement, P: PrimeIdeal) -> int:
    """v_P(x) by cached prime-power membership (fast path for elements)."""
    if not x:
        raise ValueError("valuation of zero")
    d = x.denominator()
    y = FieldElement(x.field, x.a * d, x.b * d)
    vd = 0
    while d % P.p == 0:
        d //= P.p
        vd += 1
    v = 0
    while _prime_power(P, v + 1).contains(y):
        v += 1
    return v - P.e * vd


def congruent_mod(x: FieldElement, y: FieldElement, n: FracIdeal) -> bool:
    """x = y mod n in the multiplicative/ray sense: v_P(x - y) >= v_P(n)
    for every prime P dividing n (denominators prime to n are allowed)."""
    diff = x - y
    if not diff:
        return True
    return all(
        element_valuation(diff, P) >= e for P, e in factor_integral_ideal(n)
    )


def element_crt(field: _Field, moduli, targets) -> FieldElement:
    """Solve x = targets[i] mod moduli[i] for pairwise coprime integral ideals."""
    if len(moduli) != len(targets):
        raise ValueError("length mismatch")
    x = field.zero
    modulus_all = moduli[0]
    for M in moduli[1:]:
        modulus_all = modulus_all * M
    for M, t in zip(moduli, targets):
        others = modulus_all / M
        e = idempotent_for(M, others)
        if not isinstance(t, FieldElement):
            t = field.from_rational(t)
        x = x + t * e
    return modulus_all.reduce_element(x)


def idempotent_for(A: FracIdeal, B: FracIdeal) -> FieldElement:
    """Element e with e = 1 mod A and e = 0 mod B, for coprime A + B = O."""
    if not A.is_coprime(B):
        raise MathDomainError("idempotent requires coprime ideals")
    # solve beta in B with 1 - beta in A: express 1 over the stacked bases
    b1, b2 = B.basis()
    a1, a2 = A.basis()
    den = math.lcm(
        a1.denominator(), a2.denominator(), b1.denominator(), b2.denominator()
    )
    rows = []
    vecs = [a1, a2, b1, b2]
    for v in vecs:
        rows.append([int(v.a * den), int(v.b * den)])
    target = [den, 0]  # the element 1 scaled by den
    sol = _solve_integer_combination(rows, target)
    if sol is None:
        raise MathDomainError("coprimality certificate not found")
    beta = sol[2] * b1 + sol[3] * b2
    return beta


def _solve_integer_combination(rows, target):
    """Integer solution x of sum x_i * rows_i = target, or None.

    Works by Hermite-reducing the stacked rows while tracking the
    unimodular row transformation.
    """
    n = len(rows)
    M = [list(r) for r in rows]
    U = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for col in (0, 1):
        pivot = col
        while True:
            pr = None
            for i in range(pivot, n):
                if M[i][col] != 0 and (pr is None or abs(M[i][col]) < abs(M[pr][col])):
                    pr = i
            if pr is None:
                break
            M[pivot], M[pr] = M[pr], M[pivot]
            U[pivot], U[pr] = U[pr], U[pivot]
            done = True
            for i in range(pivot + 1, n):
                if M[i][col] != 0:
                    q = M[i][col] // M[pivot][col]
                    M[i] = [M[i][k] - q * M[pivot][k] for k in range(2)]
                    U[i] = [U[i][k] - q * U[pivot][k] for k in range(n)]
                    if M[i][col] != 0:
                        done = False
            if done:
                break
        if pivot < n and M[pivot][col] < 0:
            M[pivot] = [-c for c in M[pivot]]
            U[pivot] = [-c for c in U[pivot]]
    # back-substitute against the (upper triangular) pivot rows
    t = list(target)
    z = [0, 0]
    if M[0][0] == 0 or t[0] % M[0][0] != 0:
        if t[0] != 0:
            return None
    else:
        z[0] = t[0] // M[0][0]
    t = [t[0] - z[0] * M[0][0], t[1] - z[0] * M[0][1]]
    if t[0] != 0:
        return None
    if M[1][1] == 0 or t[1] % M[1][1] != 0:
        if t[1] != 0:
            return None
    else:
        z[1] = t[1] // M[1][1]
    if t[1] - z[1] * M[1][1] != 0:
        return None
    return [z[0] * U[0][j] + z[1] * U[1][j] for j in range(n)]


def negative_norm_element(A: FracIdeal) -> FieldElement:
    """A small element of A with negative norm (exists in any ideal)."""
    b1, b2 = A.basis()
    for radius in range(1, 40):
        for s in range(-radius, radius + 1):
            for t in range(-radius, radius + 1):
                x = s * b1 + t * b2
                if x and x.norm() < 0:
                    return x
    raise MathDomainError("no negative-norm element found (unexpected)")


def _fix_norm_sign(field: _Field, x: FieldElement, stable_moduli) -> FieldElement:
    """Multiply by delta = 1 mod each modulus until the norm is positive.

    The Hecke layer needs uniformizers of positive norm: the two-term
    coefficient formula is only uniformizer-independent within that
    normalization (a norm-sign flip is invisible to the central
    character but flips the second term).
    """
    if x.norm() > 0:
        return x
    M = FracIdeal.unit_ideal(field)
    for A in stable_moduli:
        M = M * A
    v0 = negative_norm_element(M)
    for t in range(1, 200):
        delta = field.one + t * v0
        if delta.norm() < 0:
            return x * delta
    raise MathDomainError("norm sign correction failed (unexpected)")


def find_uniformizer(field: _Field, P: PrimeIdeal, congruence=None) -> FieldElement:
    """An element of positive norm with v_P = 1 and v = 0 at the other
    primes over p.

    With `congruence` = (ideal n, residue r) the result additionally
    satisfies x = r mod n (n must be coprime to p); solved by CRT in the
    semi-local ring, so the result is an algebraic integer.
    """
    p = P.p
    sibs = [Q for Q in primes_over(field, p) if Q != P]
    base = None
    if P.e == 1 and P.f == 2:
        base = field.from_rational(p)
    else:
        b1, b2 = P.basis()
        for s in range(0, p + 1):
            for cand in (b2 + s * b1, b1 + s * b2):
                if valuation(cand, P) == 1 and all(
                    valuation(cand, Q) == 0 for Q in sibs
                ):
                    base = cand
                    break
            if base is not None:
                break
    if base is None:
        raise MathDomainError("no uniformizer found (unexpected)")
    if congruence is None:
        return _fix_norm_sign(field, base, [P * P] + sibs)
    n, r = congruence
    if not n.is_coprime(P):
        raise MathDomainError("congruence modulus must be coprime to p")
    moduli = [n, P * P] + [Q for Q in sibs]
    targets = [r, base] + [field.one for _ in sibs]
    x = element_crt(field, moduli, targets)
    x = _fix_norm_sign(field, x, moduli)
    assert valuation(x, P) == 1
    for Q in sibs:
        assert valuation(x, Q) == 0
    return x


def ideal_from_json(field: _Field, rows) -> FracIdeal:
    return FracIdeal(
        field,
        (
            (Fraction(rows[0][0]), Fraction(rows[0][1])),
            (Fraction(rows[1][0]), Fraction(rows[1][1])),
        ),
    )


def ideal_to_json(I: FracIdeal):
    return [[str(c) for c in row] for row in I.rows]
