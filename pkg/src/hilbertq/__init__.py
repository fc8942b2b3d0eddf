"""Exact q-expansion and Hecke-operator toolkit for Hilbert modular
surfaces over real quadratic fields.

Everything is exact: field elements are rational pairs, ideals are HNF
lattices, coefficient rings are built from integers, and no floating
point ever enters a result.
"""

from .field import FieldElement, RealQuadraticField, chi_value
from .ideals import (
    FracIdeal,
    PrimeIdeal,
    different,
    find_uniformizer,
    primes_over,
    valuation,
)
from .units import (
    UnitData,
    enumerate_orbit_reps,
    orbit_representative,
    totally_positive_fundamental_unit,
    unit_data,
)

__all__ = [
    "FieldElement",
    "RealQuadraticField",
    "chi_value",
    "FracIdeal",
    "PrimeIdeal",
    "different",
    "find_uniformizer",
    "primes_over",
    "valuation",
    "UnitData",
    "enumerate_orbit_reps",
    "orbit_representative",
    "totally_positive_fundamental_unit",
    "unit_data",
]
