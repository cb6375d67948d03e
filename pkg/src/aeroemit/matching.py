"""Resolution of flights to canonical airframes and ICAO engine UIDs.

A flight's tail number is joined to the airframe inventory for type and seat
count, the type designator is normalized to a canonical name, and the FAA
engine designation is aligned with an ICAO engine UID by Jaccard token
similarity. Every fallback taken is recorded as a provenance flag.
"""

from __future__ import annotations

import csv
import fnmatch
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .ingest import (
    AirframeRecord,
    CcdProfile,
    EngineCodeRecord,
    EngineLtoFactors,
    FlightRecord,
    TailEngineRecord,
)

DEFAULT_JACCARD_THRESHOLD = 0.5

# Provenance flags
ENGINE_EXACT = "ENGINE_EXACT"
ENGINE_JACCARD = "ENGINE_JACCARD"
ENGINE_POPULAR_FALLBACK = "ENGINE_POPULAR_FALLBACK"
FAMILY_FALLBACK = "FAMILY_FALLBACK"
INCOMPUTABLE = "INCOMPUTABLE"

# Incomputable causes
MISSING_TAIL = "MISSING_TAIL"
MISSING_AIRTIME = "MISSING_AIRTIME"
MISSING_DISTANCE = "MISSING_DISTANCE"
NO_AIRFRAME = "NO_AIRFRAME"
NO_TYPE_MATCH = "NO_TYPE_MATCH"
NO_CCD_PROFILE = "NO_CCD_PROFILE"
NO_ENGINE_MATCH = "NO_ENGINE_MATCH"

_DATA_DIR = Path(__file__).parent / "data"
DEFAULT_NORMALIZATION_RULES = _DATA_DIR / "normalization_rules.csv"
DEFAULT_FAMILY_FALLBACK = _DATA_DIR / "family_fallback.csv"


class MatchingConfigError(Exception):
    """Invalid normalization / fallback / override configuration."""


@dataclass(frozen=True)
class ResolvedFlight:
    flight: FlightRecord
    canonical_type: str | None
    seat_count: int | None
    engine_count: int | None
    engine_uid: str | None
    emissions_type: str | None
    efficiency_factor: float
    provenance: frozenset[str]
    incomputable_cause: str | None = None

    @property
    def is_computable(self) -> bool:
        return INCOMPUTABLE not in self.provenance


@dataclass(frozen=True)
class NormalizationRule:
    pattern: str
    canonical_type: str


class NormalizationRuleSet:
    """Ordered, first-match-wins designator rewrite rules.

    A designator that already equals a canonical name on the right-hand side
    of any rule maps to itself, which makes normalization idempotent.
    """

    def __init__(self, rules: Iterable[NormalizationRule]):
        self.rules = list(rules)
        self._canonicals = {r.canonical_type for r in self.rules}

    @classmethod
    def from_csv(cls, path: str | Path) -> "NormalizationRuleSet":
        rules = []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["pattern", "canonical_type"]:
                raise MatchingConfigError(f"{path}: bad header {header}")
            for lineno, row in enumerate(reader, start=2):
                if len(row) != 2 or not row[0] or not row[1]:
                    raise MatchingConfigError(f"{path} line {lineno}: bad rule {row}")
                rules.append(NormalizationRule(row[0].upper(), row[1]))
        return cls(rules)

    def normalize(self, raw: str) -> str | None:
        cleaned = raw.strip().upper()
        if not cleaned:
            return None
        if cleaned in self._canonicals:
            return cleaned
        for rule in self.rules:
            if "*" in rule.pattern or "?" in rule.pattern or "[" in rule.pattern:
                if fnmatch.fnmatchcase(cleaned, rule.pattern):
                    return rule.canonical_type
            elif cleaned == rule.pattern:
                return rule.canonical_type
        return None


def normalize_airframe_type(raw: str, rules: NormalizationRuleSet) -> str | None:
    return rules.normalize(raw)


@dataclass(frozen=True)
class FamilyFallback:
    surrogate_type: str
    efficiency_factor: float


def load_family_fallback(path: str | Path) -> dict[str, FamilyFallback]:
    table: dict[str, FamilyFallback] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["missing_type", "surrogate_type", "efficiency_factor"]:
            raise MatchingConfigError(f"{path}: bad header {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3 or not row[0] or not row[1]:
                raise MatchingConfigError(f"{path} line {lineno}: bad row {row}")
            factor = float(row[2])
            if factor <= 0:
                raise MatchingConfigError(
                    f"{path} line {lineno}: efficiency_factor must be > 0, got {factor}")
            table[row[0].upper()] = FamilyFallback(row[1], factor)
    return table


def load_popular_engine_override(path: str | Path) -> dict[str, str]:
    table: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["canonical_type", "engine_uid"]:
            raise MatchingConfigError(f"{path}: bad header {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2 or not row[0] or not row[1]:
                raise MatchingConfigError(f"{path} line {lineno}: bad row {row}")
            table[row[0]] = row[1]
    return table


def tokenize(designation: str) -> frozenset[str]:
    """Uppercase tokens split on non-alphanumeric characters."""
    tokens = []
    current = []
    for ch in designation.upper():
        if ch.isalnum():
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return frozenset(tokens)


def jaccard_similarity(a: frozenset[str], b: frozenset[str]) -> float:
    if not a and not b:
        return 1.0
    union = len(a | b)
    if union == 0:
        return 1.0
    return len(a & b) / union


def match_engine(faa_designation: str, databank: list[EngineLtoFactors],
                 threshold: float = DEFAULT_JACCARD_THRESHOLD,
                 ) -> tuple[str, float] | None:
    """Best Jaccard match of a designation against databank UIDs.

    Ties break to the lexicographically smallest UID; below-threshold best
    scores are no-match.
    """
    query = tokenize(faa_designation)
    best_uid: str | None = None
    best_score = -1.0
    for entry in sorted(databank, key=lambda e: e.engine_uid):
        score = jaccard_similarity(query, tokenize(entry.engine_uid))
        if score > best_score:
            best_uid, best_score = entry.engine_uid, score
    if best_uid is None or best_score < threshold:
        return None
    return best_uid, best_score


def build_popular_engine_table(fleet: Iterable[tuple[str, str]]) -> dict[str, str]:
    """Most common engine UID per canonical type from (type, uid) tail pairs.

    Ties break to the lexicographically smallest UID.
    """
    counts: dict[str, dict[str, int]] = {}
    for canonical_type, engine_uid in fleet:
        per_type = counts.setdefault(canonical_type, {})
        per_type[engine_uid] = per_type.get(engine_uid, 0) + 1
    table = {}
    for canonical_type, per_type in counts.items():
        table[canonical_type] = min(
            per_type, key=lambda uid: (-per_type[uid], uid))
    return table


@dataclass
class LookupTables:
    """Immutable lookup state shared by all resolve_flight calls."""

    airframes_by_tail: dict[str, AirframeRecord]
    registry_by_tail: dict[str, str]
    engine_code_text: dict[str, str]
    databank_by_uid: dict[str, EngineLtoFactors]
    ccd_by_type: dict[str, CcdProfile]
    rules: NormalizationRuleSet
    family_fallback: dict[str, FamilyFallback]
    jaccard_threshold: float = DEFAULT_JACCARD_THRESHOLD
    popular_engine: dict[str, str] = field(default_factory=dict)
    _engine_cache: dict[str, tuple[str, str] | None] = field(default_factory=dict)

    @classmethod
    def build(cls,
              airframes: list[AirframeRecord],
              registry: list[TailEngineRecord],
              engine_codes: list[EngineCodeRecord],
              databank: list[EngineLtoFactors],
              ccd_profiles: list[CcdProfile],
              rules: NormalizationRuleSet,
              family_fallback: dict[str, FamilyFallback],
              jaccard_threshold: float = DEFAULT_JACCARD_THRESHOLD,
              popular_engine_override: dict[str, str] | None = None,
              ) -> "LookupTables":
        tables = cls(
            airframes_by_tail={a.tail_number: a for a in airframes},
            registry_by_tail={r.tail_number: r.faa_engine_designation for r in registry},
            engine_code_text={c.faa_code: c.designation_text for c in engine_codes},
            databank_by_uid={e.engine_uid: e for e in databank},
            ccd_by_type={p.canonical_type: p for p in ccd_profiles},
            rules=rules,
            family_fallback=family_fallback,
            jaccard_threshold=jaccard_threshold,
        )
        for airframe in tables.airframes_by_tail.values():
            canonical = rules.normalize(airframe.raw_type_designator)
            airframe.canonical_type = canonical or ""
        tables.popular_engine = tables._derive_popular_engines()
        if popular_engine_override:
            for ctype, uid in popular_engine_override.items():
                if uid not in tables.databank_by_uid:
                    raise MatchingConfigError(
                        f"popular-engine override {ctype} -> {uid}: UID not in databank")
                tables.popular_engine[ctype] = uid
        return tables

    def resolve_tail_engine(self, tail: str) -> tuple[str, str] | None:
        """(engine_uid, flag) from the FAA registry, cached per tail."""
        if tail in self._engine_cache:
            return self._engine_cache[tail]
        result: tuple[str, str] | None = None
        designation = self.registry_by_tail.get(tail)
        if designation is not None:
            designation = self.engine_code_text.get(designation, designation)
            exact = designation.strip().upper()
            if exact in self.databank_by_uid:
                result = (exact, ENGINE_EXACT)
            else:
                matched = match_engine(designation, list(self.databank_by_uid.values()),
                                       self.jaccard_threshold)
                if matched is not None:
                    result = (matched[0], ENGINE_JACCARD)
        self._engine_cache[tail] = result
        return result

    def _derive_popular_engines(self) -> dict[str, str]:
        fleet = []
        for tail, airframe in self.airframes_by_tail.items():
            if not airframe.canonical_type:
                continue
            resolved = self.resolve_tail_engine(tail)
            if resolved is not None:
                fleet.append((airframe.canonical_type, resolved[0]))
        return build_popular_engine_table(fleet)


def resolve_flight(flight: FlightRecord, tables: LookupTables) -> ResolvedFlight:
    """Resolve a flight through the matching cascade.

    Failure never raises; it is encoded as the INCOMPUTABLE flag plus a cause.
    """
    flags: set[str] = set()
    cause: str | None = None
    canonical_type: str | None = None
    seat_count: int | None = None
    engine_count: int | None = None
    engine_uid: str | None = None
    emissions_type: str | None = None
    efficiency_factor = 1.0

    airframe = None
    if flight.tail_number is None:
        cause = MISSING_TAIL
    else:
        airframe = tables.airframes_by_tail.get(flight.tail_number)
        if airframe is None:
            cause = NO_AIRFRAME

    if airframe is not None:
        seat_count = airframe.seat_count
        engine_count = airframe.engine_count
        canonical_type = airframe.canonical_type or None
        if canonical_type is None:
            cause = cause or NO_TYPE_MATCH
        else:
            emissions_type = canonical_type
            if canonical_type not in tables.ccd_by_type:
                fallback = tables.family_fallback.get(canonical_type)
                if fallback is not None and fallback.surrogate_type in tables.ccd_by_type:
                    emissions_type = fallback.surrogate_type
                    efficiency_factor = fallback.efficiency_factor
                    flags.add(FAMILY_FALLBACK)
                else:
                    emissions_type = None
                    cause = cause or NO_CCD_PROFILE

        resolved_engine = tables.resolve_tail_engine(airframe.tail_number)
        if resolved_engine is not None:
            engine_uid, engine_flag = resolved_engine
            flags.add(engine_flag)
        elif canonical_type is not None and canonical_type in tables.popular_engine:
            engine_uid = tables.popular_engine[canonical_type]
            flags.add(ENGINE_POPULAR_FALLBACK)
        else:
            cause = cause or NO_ENGINE_MATCH

    if cause is None and flight.air_time_min is None:
        cause = MISSING_AIRTIME
    if cause is None and flight.distance_mi is None:
        cause = MISSING_DISTANCE

    if cause is not None:
        flags.add(INCOMPUTABLE)
    return ResolvedFlight(
        flight=flight,
        canonical_type=canonical_type,
        seat_count=seat_count,
        engine_count=engine_count,
        engine_uid=engine_uid,
        emissions_type=emissions_type,
        efficiency_factor=efficiency_factor,
        provenance=frozenset(flags),
        incomputable_cause=cause,
    )
