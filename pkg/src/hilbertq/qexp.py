"""Truncated unit-equivariant q-expansion coefficient families.

A family stores, for each idele representative t (one per cusp class at
infinity), the coefficients r_m on one orbit representative per unit
orbit of the lattice (d^-1 J_t, scaled by n^-1 at full level), up to a
relative-norm truncation bound, plus the constant term.  Everything else
is derived:

* within one t, the unit rule r_m = chi_m(nu) r_{nu m} extends the data
  to the whole cone;
* between representatives, the transport rule
  r_m at t' = chi_m(alpha) * r_{alpha m} at t moves any idele class onto
  a stored one.

Truncation is measured by the relative norm Nm(m)/Nm(L), which is
constant on unit orbits, so it commutes with both rules.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .classgroup import adjusted_generator
from .cusps import CuspRecord, Level, cusps_at_infinity
from .errors import MathDomainError, SchemaError, TransportError
from .field import FieldElement, _Field, chi_value, element_from_json, element_to_json
from .ideals import FracIdeal, different, primes_over
from .units import enumerate_orbit_reps, orbit_representative, unit_data
from .weights import WeightData


@dataclass(frozen=True)
class IdelePoint:
    """A prime-to-p finite idele, recorded as (ideal, residue mod n)."""

    ideal: FracIdeal
    residue: FieldElement

    def scaled(self, by_ideal: FracIdeal, by_residue: FieldElement):
        return IdelePoint(self.ideal * by_ideal, self.residue * by_residue)


class QExpContext:
    """Field, rational prime, level, weight and coefficient ring, with the
    derived cusp representatives and equivariance unit."""

    def __init__(self, field: _Field, p: int, level: Level,
                 weight: WeightData, ring):
        self.field = field
        self.p = p
        self.level = level
        self.weight = weight
        self.ring = ring
        O = FracIdeal.unit_ideal(field)
        p_ideal = FracIdeal.from_generators(field, [field.from_rational(p)])
        if (level.modulus + p_ideal) != O:
            raise MathDomainError("level modulus must be prime to p")
        if not (ring.is_torsion or weight.k_plus_2m_parallel()):
            raise MathDomainError(
                "need k+2m parallel unless the ring is p-power torsion"
            )
        one = ring.one
        for u in level.unit_group_generators():
            if ring.chi(u, weight.k_plus_2m()) != one:
                raise MathDomainError(
                    "chi_{k+2m} is nontrivial on the level's unit group"
                )
        self.primes = self._assign_embeddings(p_ideal)
        self.eps = level.equivariance_unit()
        self.reps = cusps_at_infinity(field, level, coprime_to=p_ideal)
        self.lattices = [c.coefficient_lattice() for c in self.reps]
        self._transport_cache: dict = {}
        self._points_cache: dict = {}
        self._b = None
        self._b_known = False

    def rep_points(self, i: int, bound):
        key = (i, Fraction(bound))
        if key not in self._points_cache:
            self._points_cache[key] = enumerate_orbit_reps(
                self.lattices[i], bound, self.eps
            )
        return self._points_cache[key]

    def _assign_embeddings(self, p_ideal):
        """Which embedding indices belong to each prime over p.

        A torsion ring distinguishes one prime; its reduction is the
        first coordinate map, so that prime owns embedding index 0.
        """
        ps = primes_over(self.field, self.p)
        if len(ps) == 1:
            return [(ps[0], (0, 1))]
        first, second = ps
        if getattr(self.ring, "is_torsion", False):
            if self.ring.p != self.p or self.ring.P not in ps:
                raise MathDomainError(
                    "torsion ring prime does not lie over the context prime"
                )
            if self.ring.P == second:
                first, second = second, first
        return [(first, (0,)), (second, (1,))]

    def theta_indices(self, P) -> tuple:
        for Q, idx in self.primes:
            if Q == P:
                return idx
        raise MathDomainError("prime does not divide the context prime")

    # -- idele transport -------------------------------------------------------

    def base_point(self, i: int) -> IdelePoint:
        return IdelePoint(self.reps[i].t_ideal, self.field.one)

    def transport(self, t: IdelePoint):
        """(index j, alpha) with t = alpha t_j u; fails loudly otherwise."""
        key = (t.ideal.key(), repr(self.level.modulus.reduce_element(t.residue))
               if self.level.kind == "U" else None)
        if key in self._transport_cache:
            hit = self._transport_cache[key]
            if hit is None:
                raise TransportError("no representative in the idele class")
            return hit
        found = None
        O = FracIdeal.unit_ideal(self.field)
        for j, rec in enumerate(self.reps):
            ratio = t.ideal / rec.t_ideal
            if self.level.kind == "U":
                alpha = adjusted_generator(
                    ratio,
                    totally_positive=True,
                    modulus=self.level.modulus,
                    residue=t.residue,
                )
            else:
                alpha = adjusted_generator(ratio, totally_positive=True)
            if alpha is not None:
                found = (j, alpha)
                break
        self._transport_cache[key] = found
        if found is None:
            raise TransportError("no representative in the idele class")
        return found

    # -- constant-term torsion ---------------------------------------------------

    def constant_pair_generators(self):
        """Generators (alpha, delta) of the unit pairs constraining constants."""
        F = self.field
        level = self.level
        ud = unit_data(F)
        if level.kind == "U":
            alpha_pos = level.equivariance_unit()
        else:
            alpha_pos = ud.totally_positive_fundamental_unit
        delta_pos = level.equivariance_unit() if level.kind == "U" else None
        if delta_pos is None:
            from .units import totally_positive_units_congruent_one_generator

            delta_pos = totally_positive_units_congruent_one_generator(
                F, level.modulus
            )
        pairs = [(alpha_pos, F.one), (F.one, delta_pos)]
        for u in level.unit_group_generators():
            pairs.append((u, u))
        return pairs

    def constant_term_torsion_index(self):
        """Exact generator b of the ideal of constant-term obstructions.

        Constants must be killed by b; b = 0 means no constraint.  The
        returned value is a field element (0 allowed); for a torsion ring
        the representative of minimal valuation at its prime is chosen.
        """
        if self._b_known:
            return self._b
        k, m = self.weight.k, self.weight.m
        km = tuple(a + b for a, b in zip(k, m))
        values = []
        for alpha, delta in self.constant_pair_generators():
            w = chi_value(alpha, m) * chi_value(delta, km) - 1
            if w:
                values.append(w)
        if not values:
            b = self.field.zero
        elif getattr(self.ring, "is_torsion", False):
            from .ideals import element_valuation

            b = min(values, key=lambda w: element_valuation(w, self.ring.P))
        else:
            b = values[0]
        self._b = b
        self._b_known = True
        return b

    def describe(self):
        return {
            "D": self.field.D,
            "p": self.p,
            "level": self.level.describe(),
            "weight": self.weight.to_json(),
            "ring": self.ring.description(),
        }


def make_context(field, p, level, weight, ring) -> QExpContext:
    return QExpContext(field, p, level, weight, ring)


class QExpFamily:
    """Coefficient data {r_m at t_i} up to a relative-norm bound."""

    def __init__(self, context: QExpContext, bound, coeffs: dict, constants: list):
        self.context = context
        self.bound = Fraction(bound)
        self.coeffs = coeffs
        self.constants = list(constants)

    # -- construction helpers ---------------------------------------------------

    @staticmethod
    def zero(context: QExpContext, bound) -> "QExpFamily":
        zero = context.ring.zero
        coeffs = {}
        for i in range(len(context.reps)):
            for m in context.rep_points(i, bound):
                coeffs[(i, m)] = zero
        return QExpFamily(
            context, bound, coeffs, [zero] * len(context.reps)
        )

    def copy_with(self, coeffs, constants) -> "QExpFamily":
        return QExpFamily(self.context, self.bound, coeffs, constants)

    def support_points(self, i: int):
        return self.context.rep_points(i, self.bound)

    # -- linear structure ---------------------------------------------------------

    def add(self, other: "QExpFamily") -> "QExpFamily":
        if other.context is not self.context or other.bound != self.bound:
            raise MathDomainError("family shapes differ")
        R = self.context.ring
        coeffs = {k: R.add(v, other.coeffs[k]) for k, v in self.coeffs.items()}
        consts = [R.add(a, b) for a, b in zip(self.constants, other.constants)]
        return self.copy_with(coeffs, consts)

    def scale(self, scalar) -> "QExpFamily":
        R = self.context.ring
        coeffs = {k: R.mul(scalar, v) for k, v in self.coeffs.items()}
        consts = [R.mul(scalar, c) for c in self.constants]
        return self.copy_with(coeffs, consts)

    def __eq__(self, other):
        return (
            isinstance(other, QExpFamily)
            and self.bound == other.bound
            and self.coeffs == other.coeffs
            and self.constants == other.constants
        )

    # -- coefficient access ---------------------------------------------------------

    def lookup(self, i: int, m: FieldElement, strict: bool = False):
        """Orbit-equivariant read of r_m at the stored representative i."""
        ctx = self.context
        R = ctx.ring
        if not m:
            return self.constants[i]
        L = ctx.lattices[i]
        if not L.contains(m):
            if strict:
                raise MathDomainError("index outside the coefficient lattice")
            return R.zero
        if not m.is_totally_positive():
            if strict:
                raise MathDomainError("index is not totally positive")
            return R.zero
        rep = orbit_representative(m, ctx.eps)
        if (i, rep) not in self.coeffs:
            if strict:
                raise MathDomainError("index beyond the truncation bound")
            return R.zero
        nu = rep / m
        if nu == ctx.field.one:
            return self.coeffs[(i, rep)]
        return R.mul(R.chi(nu, ctx.weight.m), self.coeffs[(i, rep)])

    def coefficient(self, t, m: FieldElement, strict: bool = False):
        """r_m at an arbitrary idele point (or stored index) t."""
        if isinstance(t, int):
            return self.lookup(t, m, strict)
        j, alpha = self.context.transport(t)
        if not m:
            inner = self.constants[j]
        else:
            inner = self.lookup(j, alpha * m, strict)
        R = self.context.ring
        return R.mul(R.chi(alpha, self.context.weight.m), inner)

    def constant_term(self, i: int):
        return self.constants[i]

    def is_cuspidal_at_infinity(self) -> bool:
        R = self.context.ring
        return all(R.is_zero(c) for c in self.constants)

    # -- validation ---------------------------------------------------------------

    def validate(self):
        """Report of admissibility violations (empty report = valid)."""
        ctx = self.context
        R = ctx.ring
        report = []
        expected = set()
        for i in range(len(ctx.reps)):
            for m in self.support_points(i):
                expected.add((i, m))
        stored = set(self.coeffs.keys())
        for key in sorted(stored - expected, key=lambda k: (k[0], str(k[1]))):
            report.append(f"coefficient stored off the representative grid: {key}")
        for key in sorted(expected - stored, key=lambda k: (k[0], str(k[1]))):
            report.append(f"missing representative coefficient: {key}")
        if len(self.constants) != len(ctx.reps):
            report.append("constant-term list length mismatch")
        b = ctx.constant_term_torsion_index()
        b_img = ctx.ring.embed(b) if b else ctx.ring.zero
        for i, c in enumerate(self.constants):
            if not R.is_zero(R.mul(b_img, c)):
                report.append(f"constant term at representative {i} is not torsion")
        # spot-check: twisted lookups are self-consistent along the orbit
        if not report:
            for i in range(len(ctx.reps)):
                pts = self.support_points(i)
                for m in pts[:3]:
                    for k in (-2, -1, 1, 2):
                        shifted = m * ctx.eps ** k
                        lhs = self.lookup(i, shifted)
                        rhs = R.mul(
                            R.chi(ctx.eps ** (-k), ctx.weight.m),
                            self.lookup(i, m),
                        )
                        if lhs != rhs:
                            report.append(
                                f"orbit rule broken at rep {i}, index {m}, shift {k}"
                            )
        return report

    # -- serialization ---------------------------------------------------------------

    def to_json(self):
        R = self.context.ring
        entries = []
        for (i, m), v in sorted(
            self.coeffs.items(), key=lambda kv: (kv[0][0], str(kv[0][1]))
        ):
            entries.append(
                {"t_index": i, "m": element_to_json(m), "value": R.to_json(v)}
            )
        return {
            "schema": "qexp-family@1",
            "context": self.context.describe(),
            "B": str(self.bound),
            "entries": entries,
            "constants": [R.to_json(c) for c in self.constants],
        }

    @staticmethod
    def from_json(context: QExpContext, blob) -> "QExpFamily":
        if blob.get("schema") != "qexp-family@1":
            raise SchemaError("unknown family schema")
        R = context.ring
        coeffs = {}
        for e in blob["entries"]:
            m = element_from_json(context.field, e["m"])
            coeffs[(e["t_index"], m)] = R.from_json(e["value"])
        constants = [R.from_json(c) for c in blob["constants"]]
        return QExpFamily(context, Fraction(blob["B"]), coeffs, constants)


def random_admissible_family(context: QExpContext, seed: int, bound) -> QExpFamily:
    """Deterministic-in-seed family passing validation, constants torsion."""
    rng = random.Random(seed)
    R = context.ring
    coeffs = {}
    for i in range(len(context.reps)):
        for m in context.rep_points(i, bound):
            coeffs[(i, m)] = R.random_element(rng)
    b = context.constant_term_torsion_index()
    g = R.torsion_annihilator_generator(b)
    constants = [R.mul(g, R.random_element(rng)) for _ in context.reps]
    return QExpFamily(context, bound, coeffs, constants)


# -- plain lattice series and the unipotent twist -------------------------------


class LatticeSeries:
    """A truncated series over the totally positive points of a lattice,
    with no equivariance assumed (used for twist bookkeeping)."""

    def __init__(self, ring, lattice: FracIdeal, bound, coeffs: dict):
        self.ring = ring
        self.lattice = lattice
        self.bound = Fraction(bound)
        self.coeffs = dict(coeffs)

    @staticmethod
    def indicator(ring, lattice, bound):
        """Truncated series with coefficient one on a window of points."""
        pts = _all_lattice_points(lattice, bound)
        coeffs = {m: ring.one for m in pts}
        coeffs[0] = ring.one
        return LatticeSeries(ring, lattice, bound, coeffs)

    def get(self, m):
        return self.coeffs.get(m, self.ring.zero)

    def add(self, other):
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = self.ring.add(out.get(k, self.ring.zero), v)
        return LatticeSeries(self.ring, self.lattice, self.bound, out)

    def __eq__(self, other):
        if not isinstance(other, LatticeSeries):
            return NotImplemented
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.get(k) == other.get(k) for k in keys)


def _all_lattice_points(lattice: FracIdeal, bound):
    """Totally positive points of norm <= bound*Nm(L) in a fixed window.

    The full point set is infinite (unit orbits); the window keeps both
    embeddings below 4*sqrt(norm cap), which is what the twist identities
    are quantified over.
    """
    from .units import lattice_points_in_embedding_box

    NB = Fraction(bound) * lattice.norm()
    if NB <= 0:
        return []
    scale = 10 ** 6
    c = Fraction(math.isqrt(int(NB * scale * scale)) + 1, scale)
    pts = lattice_points_in_embedding_box(lattice, c * 4, c * 4)
    return [m for m in pts if m.norm() <= NB]


def unipotent_twist(series: LatticeSeries, epsilon: FieldElement, nprime: int):
    """Coefficientwise twist by zeta_{N'}^(-pairing(epsilon, N' m)).

    The pairing is the trace form; epsilon must pair integrally with
    N' times the support lattice, and the ring must carry a root of
    unity of order divisible by N'.
    """
    R = series.ring
    order = getattr(R, "zeta_order", 1)
    if order % nprime != 0:
        raise MathDomainError("ring has no root of unity of the needed order")
    out = {}
    for m, v in series.coeffs.items():
        if m == 0:
            out[m] = v
            continue
        pairing = (epsilon * m).trace() * nprime
        if pairing.denominator != 1:
            raise MathDomainError("twist element does not pair integrally")
        e = int(pairing) % nprime
        out[m] = R.mul(R.zeta((-e * (order // nprime)) % order), v)
    return LatticeSeries(R, series.lattice, series.bound, out)
