"""Unit-periodic cone decompositions and the saving-trace reindexing.

A fan is one period of the boundary of the convex hull of the totally
positive points of a rank-2 lattice, extended to the whole cone by a
totally positive unit.  Consecutive rays of such a hull always form a
Z-basis of the lattice; the builder uses that determinant statement as
its completeness certificate and retries on a larger candidate window
whenever it fails.

The saving trace on truncated monoid series is pure reindexing: the
output coefficient at m is the input coefficient at alpha(m), and the
rank-one twist token scales by Nm(q2)^-1 * det(alpha).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetError, MathDomainError
from .field import FieldElement
from .ideals import FracIdeal
from .units import enumeration_budget, enumerate_orbit_reps, gauss_reduced_basis


def _cross(u: FieldElement, v: FieldElement) -> int:
    """Sign of theta1(u)theta2(v) - theta2(u)theta1(v), exactly.

    Positive when u has the larger ratio theta1/theta2 (for totally
    positive arguments)."""
    return (u * v.conjugate() - v * u.conjugate()).sign_embedding(0)


@dataclass(frozen=True)
class Lattice2:
    """A rank-2 lattice with its totally positive cone."""

    M: FracIdeal

    @property
    def field(self):
        return self.M.field


class Fan:
    """One unit period of a polyhedral decomposition of the positive cone.

    rays have strictly decreasing ratio theta1/theta2 and live in the
    window [1, ratio(eps)); ray(i) for arbitrary integer i extends the
    list eps-periodically, with ray(period) = rays[0] / eps.
    """

    def __init__(self, M: FracIdeal, eps: FieldElement, rays):
        self.M = M
        self.eps = eps
        self.rays = tuple(rays)
        if not self.rays:
            raise MathDomainError("a fan needs at least one ray per period")
        for r in self.rays:
            if not M.contains(r):
                raise MathDomainError("ray outside the lattice")
            if not r.is_totally_positive():
                raise MathDomainError("rays must be totally positive")
            if not _in_ratio_window(r, eps):
                raise MathDomainError("rays must lie in one fundamental period")
        for a, b in zip(self.rays, self.rays[1:]):
            if _cross(a, b) <= 0:
                raise MathDomainError("rays must have strictly decreasing ratio")

    def period(self) -> int:
        return len(self.rays)

    def ray(self, i: int) -> FieldElement:
        q, r = divmod(i, self.period())
        return self.rays[r] * self.eps ** (-q)

    def cones(self):
        return [(self.ray(i), self.ray(i + 1)) for i in range(self.period())]

    def cone_determinants(self):
        out = []
        for a, b in self.cones():
            xa, ya = self.M.coordinates(a)
            xb, yb = self.M.coordinates(b)
            out.append(xa * yb - ya * xb)
        return out

    def is_smooth(self) -> bool:
        return all(abs(d) == 1 for d in self.cone_determinants())

    def check_periodicity(self) -> bool:
        k = self.period()
        return all(self.ray(i + k) == self.ray(i) / self.eps for i in range(k))

    def cone_containing(self, m: FieldElement) -> int:
        """Index i with m in the closed cone (ray(i), ray(i+1))."""
        if not m.is_totally_positive():
            raise MathDomainError("fans decompose the totally positive cone")
        shift = 0
        cur = m
        while _cross(cur, self.rays[0]) > 0:
            cur = cur / self.eps
            shift += 1
        while _cross(cur, self.ray(self.period())) < 0:
            cur = cur * self.eps
            shift -= 1
        for i in range(self.period()):
            if _cross(self.ray(i), cur) >= 0 and _cross(cur, self.ray(i + 1)) >= 0:
                return i + shift * self.period()
        raise MathDomainError("coverage hole (should not happen)")

    def check_coverage(self, norm_bound=6) -> bool:
        """Bounded-norm points land in exactly one open cone or on a ray."""
        for m in _window_points(self.M, norm_bound, self.eps):
            hits = 0
            on_ray = False
            lo = -2 * self.period()
            hi = 3 * self.period()
            for i in range(lo, hi):
                ca = _cross(self.ray(i), m)
                cb = _cross(m, self.ray(i + 1))
                if ca > 0 and cb > 0:
                    hits += 1
                if _cross(self.ray(i), m) == 0:
                    on_ray = True
            if hits > 1 or (hits == 1 and on_ray) or (hits == 0 and not on_ray):
                return False
        return True

    def describe(self):
        return {
            "lattice": [[str(c) for c in row] for row in self.M.rows],
            "unit": {"a": str(self.eps.a), "b": str(self.eps.b)},
            "rays": [{"a": str(r.a), "b": str(r.b)} for r in self.rays],
        }


def _window_points(M: FracIdeal, bound, eps: FieldElement):
    """Bounded-norm totally positive points spread over three periods."""
    out = []
    for m in enumerate_orbit_reps(M, bound, eps):
        out.extend([m * eps, m, m / eps])
    return out


def _in_ratio_window(r: FieldElement, eps: FieldElement) -> bool:
    """1 <= theta1(r)/theta2(r) < ratio(eps)."""
    if (r - r.conjugate()).sign_embedding(0) < 0:
        return False
    return (r * eps.conjugate() - eps * r.conjugate()).sign_embedding(0) < 0


class _RetryLarger(Exception):
    pass


def build_unit_invariant_fan(
    M: FracIdeal, eps: FieldElement, smooth: bool = False
) -> Fan:
    """The hull-boundary fan of the totally positive cone of M.

    Deterministic: candidates in a three-period window are filtered to
    the convex chain seen from the origin, and the window rays are
    certified by the unimodularity of consecutive pairs (retrying on a
    larger window when the certificate fails).  The smooth flag re-runs
    the determinant check as a subdivision pass, which is a no-op for
    hull fans.
    """
    if eps == M.field.one or not eps.is_totally_positive():
        raise MathDomainError("the periodicity unit must be totally positive, not 1")
    if (eps - 1).sign_embedding(0) < 0:
        eps = eps.inverse()
    bound = Fraction(4)
    for _ in range(10):
        try:
            fan = _try_build_fan(M, eps, bound)
        except _RetryLarger:
            bound *= 4
            continue
        if smooth and not fan.is_smooth():
            fan = _subdivide_until_smooth(fan)
        return fan
    raise BudgetError("hull construction did not stabilize")


def _try_build_fan(M: FracIdeal, eps: FieldElement, bound) -> Fan:
    pts = _window_points(M, bound, eps)
    if not pts:
        raise _RetryLarger
    keep = []
    for m in pts:
        dominated = False
        for q in pts:
            if q == m:
                continue
            d1 = (m - q).sign_embedding(0)
            d2 = (m - q).sign_embedding(1)
            if d1 >= 0 and d2 >= 0:
                dominated = True
                break
        if not dominated:
            keep.append(m)
    keep.sort(key=functools.cmp_to_key(lambda a, b: -_cross(a, b)))
    chain = []
    for c in keep:
        while len(chain) >= 2 and _cross(c - chain[-1], chain[-1] - chain[-2]) <= 0:
            chain.pop()
        chain.append(c)
    window = [r for r in chain if _in_ratio_window(r, eps)]
    if not window:
        raise _RetryLarger
    fan = Fan(M, eps, window)
    # completeness certificate: consecutive hull points of a quadratic
    # lattice form a Z-basis; a larger determinant means a missed point
    if not fan.is_smooth():
        raise _RetryLarger
    return fan


def _subdivide_until_smooth(fan: Fan) -> Fan:
    """Insert interior points until all cone determinants are unimodular."""
    rays = list(fan.rays)
    for _ in range(64):
        fan2 = Fan(fan.M, fan.eps, rays)
        dets = fan2.cone_determinants()
        if all(abs(d) == 1 for d in dets):
            return fan2
        new_rays = []
        for (a, b), d in zip(fan2.cones(), dets):
            new_rays.append(a)
            if abs(d) != 1:
                new_rays.append(_minimal_interior_point(fan.M, a, b))
        rays = sorted(
            {r * fan.eps ** _power_into_window(r, fan.eps) for r in new_rays},
            key=functools.cmp_to_key(lambda x, y: -_cross(x, y)),
        )
        rays = [r for r in rays if _in_ratio_window(r, fan.eps)]
    raise BudgetError("subdivision did not terminate")


def _power_into_window(r: FieldElement, eps: FieldElement) -> int:
    k = 0
    while not _in_ratio_window(r * eps ** k, eps):
        k += 1 if (r - r.conjugate()).sign_embedding(0) < 0 else -1
        if abs(k) > 64:
            raise MathDomainError("window reduction runaway")
    return k


def _minimal_interior_point(M: FracIdeal, a: FieldElement, b: FieldElement):
    """A lattice point strictly inside cone(a, b) and below the chord."""
    best = None
    from .units import lattice_points_in_embedding_box

    c1 = max(a.embedding_bounds(0)[1], b.embedding_bounds(0)[1])
    c2 = max(a.embedding_bounds(1)[1], b.embedding_bounds(1)[1])
    for m in lattice_points_in_embedding_box(M, c1 + 1, c2 + 1):
        if _cross(a, m) <= 0 or _cross(m, b) <= 0:
            continue
        if _cross(b - a, m - a) <= 0:
            continue
        if best is None or _cross(b - a, m - best) > 0:
            best = m
    if best is None:
        raise MathDomainError("no interior point despite determinant > 1")
    return best


def refine_check(fine: Fan, coarse: Fan, alpha: FieldElement | None = None) -> bool:
    """Is every coarse cone a union of fine cones?

    alpha identifies the coarse lattice inside the fine one (the
    inclusion when omitted).  True iff the coarse periodicity unit is a
    power of the fine one and every coarse ray direction occurs among
    the fine rays.
    """
    F = fine.M.field
    if alpha is None:
        alpha = F.one
    if not (coarse.M * alpha).subset_of(fine.M):
        raise MathDomainError("coarse lattice does not map into the fine one")
    cur = F.one
    for _ in range(64):
        cur = cur * fine.eps
        if cur == coarse.eps:
            break
    else:
        return False
    for r in coarse.rays:
        target = alpha * r
        if all(
            _cross(fine.ray(i), target) != 0
            for i in range(-2 * fine.period(), 3 * fine.period())
        ):
            return False
    return True


# -- truncated monoid series and the saving trace -------------------------------


class MonoidSeries:
    """Coefficients on an explicit support set, plus a rank-one twist token.

    Keys are field elements (and the integer 0 for the constant term);
    missing keys read as zero.  The twist token models the rank-one
    module the series is valued in.
    """

    def __init__(self, ring, lattice: FracIdeal, bound, coeffs: dict, twist=None):
        self.ring = ring
        self.lattice = lattice
        self.bound = Fraction(bound)
        self.coeffs = dict(coeffs)
        self.twist = ring.one if twist is None else twist

    def get(self, m):
        return self.coeffs.get(m, self.ring.zero)

    def support(self):
        return [k for k, v in self.coeffs.items() if not self.ring.is_zero(v)]

    def __eq__(self, other):
        if not isinstance(other, MonoidSeries):
            return NotImplemented
        if self.twist != other.twist:
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.get(k) == other.get(k) for k in keys)


def monoid_series_window(ring, lattice: FracIdeal, bound, value=None) -> MonoidSeries:
    """The window series with a constant coefficient (default one)."""
    from .qexp import _all_lattice_points

    if value is None:
        value = ring.one
    coeffs = {m: value for m in _all_lattice_points(lattice, bound)}
    coeffs[0] = value
    return MonoidSeries(ring, lattice, bound, coeffs)


def saving_trace_local(
    series: MonoidSeries,
    alpha: FieldElement,
    target: FracIdeal,
    q2_norm=1,
    beta=None,
) -> MonoidSeries:
    """Reindex along alpha: the output coefficient at m is the input
    coefficient at alpha*m; everything else is discarded.

    The twist token scales by beta = Nm(q2)^-1 * det(alpha) (an explicit
    beta overrides the computed one)."""
    R = series.ring
    if beta is None:
        beta = R.rational(Fraction(1, int(q2_norm)) * alpha.norm())
    if not (target * alpha).subset_of(series.lattice):
        raise MathDomainError("alpha does not map the target lattice inward")
    out = {}
    for key in series.coeffs:
        if key == 0:
            out[0] = series.coeffs[0]
            continue
        pre = key / alpha
        if target.contains(pre):
            out[pre] = series.coeffs[key]
    if 0 not in out:
        out[0] = R.zero
    return MonoidSeries(R, target, series.bound, out, twist=R.mul(series.twist, beta))


def pullback_series(
    series: MonoidSeries, alpha: FieldElement, big: FracIdeal
) -> MonoidSeries:
    """Push a series on the target lattice into the big one along alpha:
    the coefficient at alpha*m is the input coefficient at m, supported
    exactly on the image."""
    R = series.ring
    if not (series.lattice * alpha).subset_of(big):
        raise MathDomainError("alpha does not map the series lattice into the target")
    out = {}
    for key, v in series.coeffs.items():
        if key == 0:
            out[0] = v
        else:
            out[alpha * key] = v
    return MonoidSeries(R, big, series.bound, out, twist=series.twist)


# -- finite-flat degree certification -------------------------------------------


@dataclass
class TraceDegreeCertificate:
    rank: int
    bound: int
    conclusive: bool
    detail: str = ""


def _pairing_box_points(M: FracIdeal, u: FieldElement, v: FieldElement, cap):
    """Points m of M with Tr(um) >= 0, Tr(vm) >= 0, Tr((u+v)m) <= cap.

    The pairings are rational-linear in the coordinates, so the search
    box is exact."""
    b1, b2 = gauss_reduced_basis(M)
    A = (u * b1).trace()
    B = (u * b2).trace()
    C = (v * b1).trace()
    D = (v * b2).trace()
    det = A * D - B * C
    if det == 0:
        raise MathDomainError("degenerate cone")
    cap = Fraction(cap)
    xr = int((abs(D) + abs(B)) * cap / abs(det)) + 2
    yr = int((abs(C) + abs(A)) * cap / abs(det)) + 2
    if (2 * xr + 1) * (2 * yr + 1) > enumeration_budget():
        raise BudgetError("cone point enumeration exceeds the budget")
    out = []
    for x in range(-xr, xr + 1):
        for y in range(-yr, yr + 1):
            if x == 0 and y == 0:
                continue
            s = x * A + y * B
            t = x * C + y * D
            if s >= 0 and t >= 0 and s + t <= cap:
                out.append(x * b1 + y * b2)
    return out


def monoid_trace_degree(
    cone, alpha: FieldElement, M: FracIdeal, M1: FracIdeal, degree_bound: int
) -> TraceDegreeCertificate:
    """Certify that the cone monoid of M is a free module of rank
    [M : alpha M1] over the cone monoid of M1, by coset-graded counting.

    cone is a pair (u, v) of elements spanning the dual side; the monoid
    consists of lattice points pairing nonnegatively with both under the
    trace form, graded by pairing against u + v.  The certificate checks
    every coset of alpha M1 in M is generated over the sub-monoid by its
    minimal point, through degree_bound grading levels; shortfalls are
    reported as inconclusive rather than asserted.
    """
    u, v = cone
    sub = M1 * alpha
    if not sub.subset_of(M):
        raise MathDomainError("alpha M1 is not a sublattice of M")
    index = int(sub.norm() / M.norm())
    w = u + v
    probe = _pairing_box_points(M, u, v, 64)
    degs = sorted({(w * m).trace() for m in probe if (w * m).trace() > 0})
    if not degs:
        return TraceDegreeCertificate(index, degree_bound, False, "empty cone probe")
    cap = degs[0] * degree_bound
    pts = _pairing_box_points(M, u, v, cap)
    cosets: dict = {}
    for m in pts:
        cosets.setdefault(repr(sub.reduce_element(m)), []).append(m)
    if len(cosets) < index:
        return TraceDegreeCertificate(
            index, degree_bound, False,
            f"only {len(cosets)} of {index} cosets visible at this bound",
        )
    if len(cosets) > index:
        return TraceDegreeCertificate(
            index, degree_bound, False, "more cosets than the lattice index"
        )

    def in_dual(m):
        return (u * m).trace() >= 0 and (v * m).trace() >= 0

    # the trivial coset is generated by 0, which every monoid point extends
    trivial_key = repr(sub.reduce_element(M.field.zero))
    for key, group in cosets.items():
        if key == trivial_key:
            continue
        group.sort(key=lambda m: ((w * m).trace(), str(m.a), str(m.b)))
        base = group[0]
        for m in group[1:]:
            if not in_dual(m - base):
                return TraceDegreeCertificate(
                    index, degree_bound, False,
                    "a coset is not generated by its minimal element at this bound",
                )
    return TraceDegreeCertificate(index, degree_bound, True)
