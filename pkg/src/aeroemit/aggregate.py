"""Roll-ups of per-flight results to airlines, airports, gases, and scatters.

Aggregation totals are accumulated as exact rationals over the per-flight
double-precision values, so every grouping of the same flights sums to the
same mass regardless of order or thread count. Floats appear only in derived
ratios and serialized output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .emissions import Co2eFactors, EmissionsResult, GasVector, split_lto  # noqa: F401
from .matching import ResolvedFlight

GASES = ("HC", "CO2", "CO", "NOX")


@dataclass
class ExactGasTotals:
    """Per-gas mass totals kept exact (sums of IEEE doubles are rationals)."""

    hc: Fraction = Fraction(0)
    co2: Fraction = Fraction(0)
    co: Fraction = Fraction(0)
    nox: Fraction = Fraction(0)

    def add(self, v: GasVector) -> None:
        self.hc += Fraction(v.hc)
        self.co2 += Fraction(v.co2)
        self.co += Fraction(v.co)
        self.nox += Fraction(v.nox)

    def __add__(self, other: "ExactGasTotals") -> "ExactGasTotals":
        return ExactGasTotals(self.hc + other.hc, self.co2 + other.co2,
                              self.co + other.co, self.nox + other.nox)

    def get(self, gas: str) -> Fraction:
        return {"HC": self.hc, "CO2": self.co2, "CO": self.co, "NOX": self.nox}[gas]

    def co2e(self, f: Co2eFactors) -> Fraction:
        return (self.co2 * Fraction(f.co2) + Fraction(f.co) * self.co
                + Fraction(f.hc) * self.hc + Fraction(f.nox) * self.nox)


@dataclass(frozen=True)
class FlightOutcome:
    """A resolved flight paired with its computed emissions, if any."""

    resolved: ResolvedFlight
    result: EmissionsResult | None


@dataclass
class AirlineSummary:
    carrier_code: str
    total_flights: int = 0
    emission_flights: int = 0
    total_seats: int = 0
    gas_totals: ExactGasTotals = field(default_factory=ExactGasTotals)
    total_co2e: Fraction = Fraction(0)
    seat_miles: Fraction = Fraction(0)

    @property
    def total_co2_kg(self) -> float:
        return float(self.gas_totals.co2)

    @property
    def total_co2e_kg(self) -> float:
        return float(self.total_co2e)

    @property
    def co2_per_seat_mile(self) -> float | None:
        if self.seat_miles == 0:
            return None
        return float(self.gas_totals.co2 / self.seat_miles)

    @property
    def co2e_per_seat_mile(self) -> float | None:
        if self.seat_miles == 0:
            return None
        return float(self.total_co2e / self.seat_miles)


@dataclass
class AirportLtoSummary:
    airport: str
    gas_totals: ExactGasTotals = field(default_factory=ExactGasTotals)
    lto_co2e: Fraction = Fraction(0)

    @property
    def lto_co2e_kg(self) -> float:
        return float(self.lto_co2e)


@dataclass
class GasBreakdown:
    cycle: str
    raw: ExactGasTotals = field(default_factory=ExactGasTotals)

    def co2e_kg(self, gas: str, f: Co2eFactors) -> float:
        factor = {"HC": f.hc, "CO2": f.co2, "CO": f.co, "NOX": f.nox}[gas]
        return float(self.raw.get(gas) * Fraction(factor))


@dataclass(frozen=True)
class ScatterPoint:
    distance_mi: float
    value: float
    canonical_type: str
    engine_uid: str
    carrier_code: str


@dataclass(frozen=True)
class UnepBaseline:
    short_haul_co2_per_seat_mile: float
    long_haul_co2_per_seat_mile: float
    cutoff_mi: float


def unep_baseline(distance_mi: float, config: UnepBaseline) -> float:
    """Step-function reference intensity: long-haul constant at/above cutoff."""
    if distance_mi < config.cutoff_mi:
        return config.short_haul_co2_per_seat_mile
    return config.long_haul_co2_per_seat_mile


def _computed(outcomes: Iterable[FlightOutcome]) -> Iterable[FlightOutcome]:
    return (o for o in outcomes if o.result is not None)


def aggregate_airlines(outcomes: list[FlightOutcome],
                       co2e_factors: Co2eFactors = Co2eFactors(),
                       ) -> list[AirlineSummary]:
    """Per-carrier totals, ordered by total flight count descending."""
    by_carrier: dict[str, AirlineSummary] = {}
    for outcome in outcomes:
        carrier = outcome.resolved.flight.carrier_code
        summary = by_carrier.setdefault(carrier, AirlineSummary(carrier))
        summary.total_flights += 1
        result = outcome.result
        if result is None:
            continue
        flight = outcome.resolved.flight
        summary.emission_flights += 1
        summary.total_seats += outcome.resolved.seat_count or 0
        summary.gas_totals.add(result.lto_origin_share)
        summary.gas_totals.add(result.lto_destination_share)
        summary.gas_totals.add(result.ccd)
        summary.total_co2e += Fraction(result.total_co2e_kg)
        summary.seat_miles += Fraction(outcome.resolved.seat_count or 0) * Fraction(
            flight.distance_mi)
    return sorted(by_carrier.values(),
                  key=lambda s: (-s.total_flights, s.carrier_code))


def aggregate_airports(outcomes: list[FlightOutcome],
                       co2e_factors: Co2eFactors = Co2eFactors(),
                       ) -> list[AirportLtoSummary]:
    """Local LTO mass per airport via the origin/destination split."""
    by_airport: dict[str, AirportLtoSummary] = {}
    for outcome in _computed(outcomes):
        flight = outcome.resolved.flight
        result = outcome.result
        origin = by_airport.setdefault(flight.origin, AirportLtoSummary(flight.origin))
        origin.gas_totals.add(result.lto_origin_share)
        dest = by_airport.setdefault(flight.destination,
                                     AirportLtoSummary(flight.destination))
        dest.gas_totals.add(result.lto_destination_share)
    for summary in by_airport.values():
        summary.lto_co2e = summary.gas_totals.co2e(co2e_factors)
    return sorted(by_airport.values(), key=lambda s: (-s.lto_co2e, s.airport))


def gas_breakdowns(outcomes: list[FlightOutcome]) -> tuple[GasBreakdown, GasBreakdown]:
    lto = GasBreakdown("LTO")
    ccd = GasBreakdown("CCD")
    for outcome in _computed(outcomes):
        lto.raw.add(outcome.result.lto_origin_share)
        lto.raw.add(outcome.result.lto_destination_share)
        ccd.raw.add(outcome.result.ccd)
    return lto, ccd


def scatter_datasets(outcomes: list[FlightOutcome],
                     ) -> tuple[list[ScatterPoint], list[ScatterPoint]]:
    """(CO2e vs distance, CO2-per-seat-mile vs distance), one point per
    computed flight, in input order."""
    co2e_points = []
    seat_mile_points = []
    for outcome in _computed(outcomes):
        rf = outcome.resolved
        flight = rf.flight
        common = (flight.distance_mi, rf.canonical_type or "", rf.engine_uid or "",
                  flight.carrier_code)
        co2e_points.append(ScatterPoint(common[0], outcome.result.total_co2e_kg,
                                        *common[1:]))
        seat_mile_points.append(ScatterPoint(common[0],
                                             outcome.result.per_seat_mile_co2_kg,
                                             *common[1:]))
    return co2e_points, seat_mile_points


def system_totals(outcomes: list[FlightOutcome]) -> ExactGasTotals:
    """Grand per-gas total over all computed flights (LTO shares + CCD)."""
    totals = ExactGasTotals()
    for outcome in _computed(outcomes):
        totals.add(outcome.result.lto_origin_share)
        totals.add(outcome.result.lto_destination_share)
        totals.add(outcome.result.ccd)
    return totals
