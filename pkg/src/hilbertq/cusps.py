"""Cusp and clasp combinatorics for the two level shapes of the package.

Levels are U1(n) or the full congruence level U(n), both prime to p.
The cusps constructed here are the ones at infinity: one per strict
ideal class for U1(n), one per strict ray class mod n for U(n), which is
also one per connected component.  Deeper level structure at a
squarefree P over p is tracked combinatorially:

* a level-P cusp is a (cusp, divisor q1 of P) pair, and the two
  projections to the base cusp set read off q1 and q2 = P/q1;
* a clasp is a (cusp, divisor q, generator class xi) triple; the fiber
  over (c, q) has #(O_F/q)^* elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .errors import MathDomainError
from .field import FieldElement, _Field
from .ideals import (
    FracIdeal,
    congruent_mod,
    different,
    factor_integral_ideal,
)
from .classgroup import invertible_residues, ray_class_group
from .units import (
    totally_positive_units_congruent_one_generator,
    unit_data,
    units_congruent_one_generators,
)
from .weights import WeightData


@dataclass(frozen=True)
class Level:
    """U1(n) (kind 'U1') or U(n) (kind 'U'), n an integral ideal prime to p."""

    kind: str
    modulus: FracIdeal

    def __post_init__(self):
        if self.kind not in ("U1", "U"):
            raise MathDomainError("level kind must be 'U1' or 'U'")
        if not self.modulus.is_integral():
            raise MathDomainError("level modulus must be integral")

    @property
    def field(self):
        return self.modulus.field

    def ray_modulus(self) -> FracIdeal:
        """Modulus of the class group indexing cusps at infinity."""
        if self.kind == "U":
            return self.modulus
        return FracIdeal.unit_ideal(self.field)

    def class_group(self, coprime_to: FracIdeal | None = None):
        return ray_class_group(self.field, self.ray_modulus(), True, coprime_to)

    def equivariance_unit(self) -> FieldElement:
        """Generator of the totally positive units acting on coefficients."""
        if self.kind == "U":
            return totally_positive_units_congruent_one_generator(
                self.field, self.modulus
            )
        return unit_data(self.field).totally_positive_fundamental_unit

    def lattice_scale(self) -> FracIdeal:
        """Extra n^-1 scaling of coefficient lattices at full level."""
        if self.kind == "U":
            return self.modulus.inverse()
        return FracIdeal.unit_ideal(self.field)

    def unit_group_generators(self):
        """Generators of O_F^* cap U (units = 1 mod n for both shapes)."""
        return units_congruent_one_generators(self.field, self.modulus)

    def is_P_neat(self, P: FracIdeal) -> bool:
        """Every unit = 1 mod n must be = 1 mod P."""
        one = self.field.one
        return all(
            congruent_mod(u, one, P) for u in self.unit_group_generators()
        )

    def describe(self):
        return {"kind": self.kind, "modulus": [[str(c) for c in r] for r in self.modulus.rows]}


@dataclass(frozen=True)
class CuspRecord:
    """A cusp at infinity, stored by its class invariants.

    The representative idele is the ideal t_ideal (residue 1 at the
    level); J = t_ideal^-1 and I = O_F.
    """

    level: Level
    t_ideal: FracIdeal
    class_exponents: tuple

    @property
    def field(self):
        return self.level.field

    @property
    def J(self) -> FracIdeal:
        return self.t_ideal.inverse()

    @property
    def I(self) -> FracIdeal:
        return FracIdeal.unit_ideal(self.field)

    def coefficient_lattice(self) -> FracIdeal:
        """d^-1 J for U1(n), d^-1 n^-1 J for U(n)."""
        F = self.field
        return different(F).inverse() * self.level.lattice_scale() * self.J


@dataclass(frozen=True)
class U0Cusp:
    """Cusp of P-Iwahori level: a base cusp plus a divisor q1 of P."""

    base: CuspRecord
    P: FracIdeal
    q1: FracIdeal

    @property
    def q2(self) -> FracIdeal:
        return self.P / self.q1

    def project_first(self):
        """(base cusp, q1): the first projection to C x divisors."""
        return self.base, self.q1

    def project_second(self):
        """(second-leg cusp data, q2); J2 = q1^-1 J, I2 = q2^-1."""
        return (self.base.J * self.q1.inverse(), self.q2.inverse()), self.q2

    def coefficient_lattice(self) -> FracIdeal:
        """d^-1 I1^-1 J2 = d^-1 q1^-1 J (with the level scale)."""
        F = self.base.field
        return (
            different(F).inverse()
            * self.base.level.lattice_scale()
            * self.q1.inverse()
            * self.base.J
        )


@dataclass(frozen=True)
class Clasp:
    """(cusp, q, xi): xi generates a rank-one quotient with annihilator q."""

    base: CuspRecord
    P: FracIdeal
    q: FracIdeal
    xi: FieldElement

    @property
    def r(self) -> FracIdeal:
        return self.P / self.q

    def degenerate_to_u0(self) -> U0Cusp:
        return U0Cusp(self.base, self.P, self.q)

    def degenerate_to_cusp(self) -> CuspRecord:
        return self.base

    def coefficient_lattice(self) -> FracIdeal:
        return self.q.inverse() * self.base.coefficient_lattice()


def cusps_at_infinity(field: _Field, level: Level,
                      coprime_to: FracIdeal | None = None):
    """One cusp per strict (ray) class; each component is hit exactly once."""
    G = level.class_group(coprime_to)
    out = []
    for exps, rep in zip(sorted(G.exponent_tuples()), G.class_representatives()):
        out.append(CuspRecord(level, rep, exps))
    return out


def squarefree_prime_factors(P: FracIdeal):
    factors = factor_integral_ideal(P)
    if any(e != 1 for _, e in factors):
        raise MathDomainError("level structure requires a squarefree ideal")
    return [Q for Q, _ in factors]


def divisors_of_squarefree(field: _Field, P: FracIdeal):
    primes = squarefree_prime_factors(P)
    out = []
    for r in range(len(primes) + 1):
        for combo in combinations(primes, r):
            d = FracIdeal.unit_ideal(field)
            for Q in combo:
                d = d * Q
            out.append(d)
    out.sort(key=lambda I: (I.norm(), I.key()))
    return out


def u0_cusps(field: _Field, level: Level, P: FracIdeal,
             coprime_to: FracIdeal | None = None):
    """The cusp set at P-Iwahori level: base cusps x divisors of P."""
    base = cusps_at_infinity(field, level, coprime_to)
    divs = divisors_of_squarefree(field, P)
    return [U0Cusp(c, P, q1) for c in base for q1 in divs]


def clasps(field: _Field, level: Level, P: FracIdeal,
           coprime_to: FracIdeal | None = None):
    """All clasps over P, fibered over the P-Iwahori cusps.

    Requires the level to be P-neat; the generator classes xi are then
    honest representatives of (O_F/q)^* with no residual automorphisms.
    """
    if not level.is_P_neat(P):
        raise MathDomainError(
            "level is not P-neat: a unit = 1 mod n is not = 1 mod P"
        )
    base = cusps_at_infinity(field, level, coprime_to)
    divs = divisors_of_squarefree(field, P)
    out = []
    for c in base:
        for q in divs:
            for xi in invertible_residues(field, q):
                out.append(Clasp(c, P, q, xi))
    return out


def level_indices(P: FracIdeal):
    """Degrees of the two level-lowering maps over P: the products of
    (Nm(q)+1) and (Nm(q)^2 - 1) over primes q dividing P."""
    idx0, idx1 = 1, 1
    for Q in squarefree_prime_factors(P):
        nq = int(Q.norm())
        idx0 *= nq + 1
        idx1 *= nq * nq - 1
    return idx0, idx1


def component_cover_check(records, level: Level) -> bool:
    """Do the classes of the records cover the full cusp class group?"""
    G = level.class_group()
    hit = set()
    for rec in records:
        dl = G.discrete_log(rec.t_ideal)
        if dl is None:
            return False
        hit.add(dl[0])
    return len(hit) == G.order


# -- completed-ring descriptors ----------------------------------------------


@dataclass(frozen=True)
class QModuleDescriptor:
    """Validation data for coefficient families at one boundary component.

    gamma_generators is a list of (alpha, beta, delta) with alpha, delta
    units and beta in the dual translation lattice; a coefficient family
    r must satisfy

        r(alpha^-1 delta m) = zeta^(-beta-pairing) *
                              chi_m(alpha) chi_{k+m}(delta) * r(m)

    with the xi(delta)-factor added on graded pieces at clasp level.
    """

    lattice: FracIdeal
    weight: WeightData
    gamma_generators: tuple
    beta_lattice: FracIdeal
    zeta_order: int
    xi_modulus: FracIdeal | None = None

    def unit_rule_pairs(self):
        """(nu, chi-exponents) pairs generating the orbit equivariance."""
        out = []
        for alpha, _beta, delta in self.gamma_generators:
            if delta == alpha.field.one and not _beta:
                out.append((alpha, self.weight.m))
        return out


def _gamma_generators_for(level: Level, weight: WeightData,
                          unit_restriction: FracIdeal | None = None):
    F = level.field
    one = F.one
    if level.kind == "U":
        nu = level.equivariance_unit()
    else:
        nu = unit_data(F).totally_positive_fundamental_unit
    if unit_restriction is not None:
        # clasp level: the alpha-part must be = 1 mod q as well
        from .units import multiplicative_order_mod

        O = FracIdeal.unit_ideal(F)
        if unit_restriction != O:
            nu = nu ** multiplicative_order_mod(nu, unit_restriction)
    gens = [(nu, F.zero, one)]
    for u in level.unit_group_generators():
        gens.append((u, F.zero, u))
    return tuple(gens)


def q_module_descriptor(c, weight: WeightData, level: Level) -> QModuleDescriptor:
    """Descriptor of the coefficient module at a cusp, Iwahori cusp or clasp."""
    F = level.field
    n = level.modulus
    if isinstance(c, CuspRecord):
        M = c.coefficient_lattice()
        beta = n * c.J.inverse()
        return QModuleDescriptor(
            lattice=M,
            weight=weight,
            gamma_generators=_gamma_generators_for(level, weight),
            beta_lattice=beta,
            zeta_order=int(n.norm()) if level.kind == "U" else 1,
        )
    if isinstance(c, U0Cusp):
        M = c.coefficient_lattice()
        beta = n * c.q1 * c.base.J.inverse()
        return QModuleDescriptor(
            lattice=M,
            weight=weight,
            gamma_generators=_gamma_generators_for(level, weight),
            beta_lattice=beta,
            zeta_order=int(n.norm()) if level.kind == "U" else 1,
        )
    if isinstance(c, Clasp):
        M = c.coefficient_lattice()
        beta = n * c.q * c.base.J.inverse()
        return QModuleDescriptor(
            lattice=M,
            weight=weight,
            gamma_generators=_gamma_generators_for(level, weight, c.q),
            beta_lattice=beta,
            zeta_order=int(n.norm()) if level.kind == "U" else 1,
            xi_modulus=c.r,
        )
    raise MathDomainError("unsupported boundary object")
