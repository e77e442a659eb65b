"""
Finite-group side of moonshine.

Character tables with values in one quadratic field, Hauptmodul assignments
g ↦ 𝒯_g, the multiplicity series M_χ = (1/|G|) Σ_g conj(χ(g)) 𝒯_g, and the
p-adic checks on them: integrality, positivity on the window, annihilation
evidence per class, and the exponent bounds from J − 𝒯.
"""

from __future__ import annotations

import math
import time
from collections import defaultdict
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import orjson
import yaml
from pydantic import ValidationError
from sympy import factorint, isprime, primerange

from haupt.config import get_settings
from haupt.errors import (
    FileError,
    IrrationalResidue,
    Malformed,
    OrthogonalityFailure,
    PowerMapInconsistent,
)
from haupt.schemas.groups import GroupFile
from haupt.schemas.reports import CheckReport, MultiplicityReport, Verdict
from haupt.services.annihilation import check_valuation_growth, check_weak_annihilation
from haupt.services.catalog import Catalog, default_catalog
from haupt.services.modlinalg import solve_mod_prime_power
from haupt.services.qseries import LaurentSeries, ValuationP, scale, valuation_p
from haupt.services.symbols import GroupSymbol, canonical, parse_symbol, power_group
from haupt.utils.logger import get_logger, log_check


logger = get_logger("Moonshine")


# ============================================================
# Quadratic numbers
# ============================================================

@dataclass(frozen=True)
class QuadNum:
    """a + b√d."""

    a: Fraction
    b: Fraction = Fraction(0)
    d: int = -1

    @classmethod
    def of(cls, value: int | Fraction | QuadNum, d: int = -1) -> QuadNum:
        if isinstance(value, QuadNum):
            return value
        return cls(Fraction(value), Fraction(0), d)

    def _coerce(self, other: object) -> QuadNum:
        if isinstance(other, QuadNum):
            if self.b and other.b and self.d != other.d:
                raise ValueError(f"cannot mix √{self.d} and √{other.d}")
            return other
        if isinstance(other, int | Fraction):
            return QuadNum(Fraction(other), Fraction(0), self.d)
        raise TypeError(f"unsupported operand {other!r}")

    def _field(self, other: QuadNum) -> int:
        return self.d if self.b or not other.b else other.d

    def __add__(self, other: object) -> QuadNum:
        o = self._coerce(other)
        return QuadNum(self.a + o.a, self.b + o.b, self._field(o))

    __radd__ = __add__

    def __neg__(self) -> QuadNum:
        return QuadNum(-self.a, -self.b, self.d)

    def __sub__(self, other: object) -> QuadNum:
        return self + (-self._coerce(other))

    def __mul__(self, other: object) -> QuadNum:
        o = self._coerce(other)
        d = self._field(o)
        return QuadNum(self.a * o.a + self.b * o.b * d, self.a * o.b + self.b * o.a, d)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int | Fraction):
            return self.b == 0 and self.a == other
        if not isinstance(other, QuadNum):
            return NotImplemented
        if self.b == 0 and other.b == 0:
            return self.a == other.a
        return (self.a, self.b, self.d) == (other.a, other.b, other.d)

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.d if self.b else None))

    def conj(self) -> QuadNum:
        """Complex conjugate: flips √d only for imaginary fields."""
        return QuadNum(self.a, -self.b, self.d) if self.d < 0 else self

    def galois(self) -> QuadNum:
        return QuadNum(self.a, -self.b, self.d)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def __str__(self) -> str:
        if not self.b:
            return str(self.a)
        return f"{self.a}+{self.b}*sqrt({self.d})"


# ============================================================
# Character tables
# ============================================================

@dataclass(frozen=True)
class ConjugacyClass:
    name: str
    size: int
    order: int


@dataclass(frozen=True)
class CharacterTable:
    name: str
    classes: tuple[ConjugacyClass, ...]
    characters: tuple[tuple[QuadNum, ...], ...]
    character_names: tuple[str, ...]
    power_maps: Mapping[str, Mapping[int, str]]
    quad_d: int

    @property
    def group_order(self) -> int:
        return sum(c.size for c in self.classes)

    def index(self, name: str) -> int:
        for i, c in enumerate(self.classes):
            if c.name == name:
                return i
        raise Malformed(f"unknown class {name!r} in {self.name}")

    @property
    def identity(self) -> int:
        for i, c in enumerate(self.classes):
            if c.order == 1:
                return i
        raise Malformed(f"{self.name} has no class of order 1")

    def power_map(self, c: int, m: int) -> int:
        """Class of g^m for g in class c."""
        cls = self.classes[c]
        m %= cls.order
        if m == 0:
            return self.identity
        if m == 1:
            return c
        explicit = self.power_maps.get(cls.name, {})
        if m in explicit:
            return self.index(explicit[m])
        ell = min(factorint(m))
        if ell == m:
            raise PowerMapInconsistent(f"{cls.name}: no entry for the {m}-th power")
        return self.power_map(self.power_map(c, ell), m // ell)


def _check_power_maps(table: CharacterTable) -> None:
    names = {c.name for c in table.classes}
    for c_index, cls in enumerate(table.classes):
        entries = table.power_maps.get(cls.name, {})
        for m, target in entries.items():
            if target not in names:
                raise PowerMapInconsistent(f"{cls.name}^{m} maps to unknown class {target!r}")
            expected = cls.order // math.gcd(cls.order, m)
            found = table.classes[table.index(target)].order
            if found != expected:
                raise PowerMapInconsistent(f"{cls.name}^{m} = {target} has order {found}, expected {expected}")
        for ell in primerange(2, cls.order):
            if ell not in entries:
                raise PowerMapInconsistent(f"{cls.name}: missing the {ell}-th power")
        for m, target in entries.items():
            residue = m % cls.order
            if residue <= 1 or isprime(residue):
                continue
            ell = min(factorint(residue))
            composed = table.power_map(table.power_map(c_index, ell), residue // ell)
            if table.classes[composed].name != target:
                raise PowerMapInconsistent(
                    f"{cls.name}^{m} = {target} but composing powers gives {table.classes[composed].name}"
                )


def _check_orthogonality(table: CharacterTable) -> None:
    order = table.group_order
    for i, chi in enumerate(table.characters):
        for j, psi in enumerate(table.characters):
            total = QuadNum.of(0, table.quad_d)
            for cls, x, y in zip(table.classes, chi, psi, strict=True):
                total = total + x * y.conj() * cls.size
            expected = order if i == j else 0
            if total != expected:
                raise OrthogonalityFailure(
                    f"<{table.character_names[i]}, {table.character_names[j]}> = {total}, expected {expected}"
                )


def build_table(data: GroupFile) -> CharacterTable:
    """Validate a parsed group file into a CharacterTable."""
    classes = tuple(ConjugacyClass(c.name, c.size, c.order) for c in data.classes)
    if sum(c.size for c in classes) != data.order:
        raise Malformed(f"class sizes sum to {sum(c.size for c in classes)}, not {data.order}")
    if len({c.name for c in classes}) != len(classes):
        raise Malformed("class names must be unique")
    rows = []
    for row in data.characters:
        if len(row) != len(classes):
            raise Malformed(f"character with {len(row)} values for {len(classes)} classes")
        rows.append(tuple(QuadNum(a, b, data.quad_d) for a, b in row))
    names = tuple(data.character_names or (f"chi{i}" for i in range(len(rows))))
    if len(names) != len(rows):
        raise Malformed("character_names does not match the number of characters")
    table = CharacterTable(
        name=data.name,
        classes=classes,
        characters=tuple(rows),
        character_names=names,
        power_maps={k: dict(v) for k, v in data.power_map.items()},
        quad_d=data.quad_d,
    )
    if any(name not in {c.name for c in classes} for name in table.power_maps):
        raise PowerMapInconsistent("power map names an unknown class")
    _check_orthogonality(table)
    _check_power_maps(table)
    return table


def _read_group_file(path: Path) -> GroupFile:
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FileError(f"cannot read group file {path}: {exc}") from exc
    try:
        return GroupFile.model_validate(orjson.loads(raw))
    except orjson.JSONDecodeError as exc:
        raise Malformed(f"{path}: invalid JSON ({exc})") from exc
    except ValidationError as exc:
        raise Malformed(f"{path}: {exc.error_count()} validation error(s): {exc.errors()[0]['msg']}") from exc


def resolve_group_path(path: str | Path) -> Path:
    """Paths that do not exist are looked up in the configured group directory."""

    path = Path(path)
    if path.exists():
        return path
    bundled = get_settings().catalog.group_dir / path.name
    return bundled if bundled.exists() else path


def load_group(path: str | Path) -> CharacterTable:
    path = resolve_group_path(path)
    table = build_table(_read_group_file(path))
    logger.info("👥 Group loaded", path=str(path), group=table.name, classes=len(table.classes))
    return table


def load_assignment(path: str | Path) -> dict[str, GroupSymbol]:
    """The ``assignment`` block of a group file."""
    data = _read_group_file(resolve_group_path(path))
    if data.assignment is None:
        raise Malformed(f"{path} has no assignment")
    return {name: parse_symbol(symbol) for name, symbol in data.assignment.items()}


# ============================================================
# Assignments
# ============================================================

@lru_cache(maxsize=4)
def _load_order_symbols(path: str) -> dict[int, tuple[str, ...]]:
    try:
        with Path(path).open(encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
    except OSError as exc:
        raise FileError(f"cannot read monster class list {path}: {exc}") from exc
    return {int(k): tuple(canonical(s) for s in v) for k, v in raw.items()}


def element_order_symbols(path: str | Path | None = None) -> dict[int, tuple[str, ...]]:
    """Hauptmodul symbols of monster classes, by element order."""
    return _load_order_symbols(str(path or get_settings().catalog.monster_classes))


def validate_assignment(
    table: CharacterTable,
    assignment: Mapping[str, str | GroupSymbol],
    order_symbols: Mapping[int, Sequence[str]] | None = None,
) -> CheckReport:
    """Order match and power compatibility of g ↦ 𝒯_g."""
    started = time.perf_counter()
    options = order_symbols if order_symbols is not None else element_order_symbols()
    symbols = {name: parse_symbol(s) for name, s in assignment.items()}
    failures: list[dict[str, object]] = []
    unchecked: list[str] = []

    for cls in table.classes:
        if cls.name not in symbols:
            failures.append({"class": cls.name, "reason": "unassigned"})
            continue
        allowed = options.get(cls.order)
        if allowed is None:
            unchecked.append(cls.name)
        elif symbols[cls.name].render() not in allowed:
            failures.append({"class": cls.name, "reason": "order", "found": symbols[cls.name].render()})

    for c_index, cls in enumerate(table.classes):
        if cls.name not in symbols:
            continue
        for m in range(1, cls.order + 1):
            target = table.classes[table.power_map(c_index, m)].name
            if target not in symbols:
                continue
            expected = power_group(symbols[cls.name], m).render()
            found = symbols[target].render()
            if expected != found:
                failures.append(
                    {"class": cls.name, "m": m, "reason": "power", "expected": expected, "found": found}
                )

    if failures:
        verdict = Verdict.FAIL
    elif unchecked:
        verdict = Verdict.INDETERMINATE
    else:
        verdict = Verdict.PASS
    witness = next((f["m"] for f in failures if "m" in f), None)
    report = CheckReport(
        name="assignment",
        params={"group": table.name},
        window=0,
        verdict=verdict,
        witness=witness,
        details={"failures": failures, "unchecked": unchecked},
    )
    log_check("assignment", verdict.value, 0, (time.perf_counter() - started) * 1000)
    return report


# ============================================================
# Multiplicities
# ============================================================

def _catalog(catalog: Catalog | None) -> Catalog:
    return catalog if catalog is not None else default_catalog()


def _combine(
    weights: Mapping[str, QuadNum], catalog: Catalog, high: int, divisor: int, what: str
) -> LaurentSeries:
    total = LaurentSeries.zero(high, -1)
    for symbol in sorted(weights):
        weight = weights[symbol]
        if not weight.is_rational:
            raise IrrationalResidue(f"{what}: coefficient {weight} of 𝒯_{symbol} is not rational")
        if weight.a:
            total = total + scale(catalog.expand(symbol, high), weight.a / divisor)
    return total


def multiplicity_series(
    table: CharacterTable,
    assignment: Mapping[str, str | GroupSymbol],
    chi_index: int,
    catalog: Catalog | None = None,
    high: int = 10,
) -> LaurentSeries:
    """M_χ = (1/|G|) Σ_c |c| conj(χ(c)) 𝒯_c."""
    cat = _catalog(catalog)
    chi = table.characters[chi_index]
    weights: dict[str, QuadNum] = defaultdict(lambda: QuadNum.of(0, table.quad_d))
    for cls, value in zip(table.classes, chi, strict=True):
        weights[canonical(assignment[cls.name])] += value.conj() * cls.size
    return _combine(weights, cat, high, table.group_order, f"M_{table.character_names[chi_index]}")


def reconstruct_class_series(
    table: CharacterTable,
    assignment: Mapping[str, str | GroupSymbol],
    class_index: int,
    catalog: Catalog | None = None,
    high: int = 10,
) -> LaurentSeries:
    """Σ_χ χ(c) M_χ, which recovers 𝒯_c."""
    cat = _catalog(catalog)
    rational = LaurentSeries.zero(high, -1)
    irrational = LaurentSeries.zero(high, -1)
    for i, chi in enumerate(table.characters):
        m = multiplicity_series(table, assignment, i, cat, high)
        value = chi[class_index]
        rational = rational + scale(m, value.a)
        irrational = irrational + scale(m, value.b)
    if not irrational.is_zero():
        raise IrrationalResidue(f"class {table.classes[class_index].name}: irrational part does not cancel")
    return rational


def check_padic_moonshine(
    table: CharacterTable,
    assignment: Mapping[str, str | GroupSymbol],
    p: int,
    high: int = 200,
    n_max: int = 3,
    catalog: Catalog | None = None,
    window: int | None = None,
) -> MultiplicityReport:
    """
    Integrality and positivity of every M_χ below q^high, plus weak
    annihilation and U_p valuation evidence for each assigned Hauptmodul.

    The evidence window defaults to windows.weak // p^n_max.
    """
    started = time.perf_counter()
    cat = _catalog(catalog)
    if window is None:
        window = max(1, get_settings().windows.weak // p**n_max)
    series = {
        name: multiplicity_series(table, assignment, i, cat, high)
        for i, name in enumerate(table.character_names)
    }

    integral_witness: tuple[str, int] | None = None
    negative_witness: tuple[str, int] | None = None
    for name, m in series.items():
        for n, c in m.items():
            if integral_witness is None and isinstance(c, Fraction):
                integral_witness = (name, n)
            if negative_witness is None and c < 0:
                negative_witness = (name, n)

    integrality = CheckReport(
        name="integrality",
        params={"group": table.name},
        window=high,
        verdict=Verdict.PASS if integral_witness is None else Verdict.FAIL,
        witness=None if integral_witness is None else integral_witness[1],
        details={} if integral_witness is None else {"character": integral_witness[0]},
    )
    positivity = CheckReport(
        name="positivity",
        params={"group": table.name},
        window=high,
        verdict=Verdict.PASS if negative_witness is None else Verdict.FAIL,
        witness=None if negative_witness is None else negative_witness[1],
        details={"scope": "to precision", **({} if negative_witness is None else {"character": negative_witness[0]})},
    )

    classes_by_symbol: dict[str, list[str]] = defaultdict(list)
    for cls in table.classes:
        classes_by_symbol[canonical(assignment[cls.name])].append(cls.name)
    evidence = []
    for symbol in sorted(classes_by_symbol):
        classes = classes_by_symbol[symbol]
        for report in (
            check_weak_annihilation(symbol, p, n_max, window, cat),
            check_valuation_growth(symbol, p, n_max, window, cat),
        ):
            evidence.append(report.model_copy(update={"params": {**report.params, "classes": classes}}))

    ok = integrality.passed and positivity.passed and all(r.verdict is not Verdict.FAIL for r in evidence)
    verdict = Verdict.PASS if ok else Verdict.FAIL
    conclusion = (
        f"{table.name} has {p}-adic moonshine"
        if ok
        else f"{table.name} does not have {p}-adic moonshine on this window"
    )
    log_check("moonshine", verdict.value, high, (time.perf_counter() - started) * 1000)
    return MultiplicityReport(
        group=table.name,
        p=p,
        window=high,
        characters=list(table.character_names),
        integrality=integrality,
        positivity=positivity,
        evidence=evidence,
        verdict=verdict,
        conclusion=conclusion,
        series=series,
    )


# ============================================================
# Exponent bounds
# ============================================================

def exponent_divisibility(
    symbol: str | GroupSymbol, q: int, window: int = 500, catalog: Catalog | None = None
) -> ValuationP:
    """Window minimum of v_q over the coefficients of J − 𝒯."""
    cat = _catalog(catalog)
    return valuation_p(cat.expand("1", window) - cat.expand(symbol, window), q)


def _system(
    candidates: Sequence[str | GroupSymbol], window: int, catalog: Catalog
) -> tuple[list[list[int]], list[int]]:
    j = catalog.expand("1", window)
    columns = [catalog.expand(s, window) for s in candidates]
    exponents = [-1, *range(1, window)]
    matrix = [[int(col[n]) for col in columns] for n in exponents]
    rhs = [-int(j[n]) for n in exponents]
    return matrix, rhs


def order_bound_feasible(
    candidates: Sequence[str | GroupSymbol],
    q: int,
    r: int,
    window: int = 500,
    catalog: Catalog | None = None,
) -> tuple[bool, list[int] | None]:
    """Is J + Σ a_i 𝒯_i ≡ 0 (mod q^r) solvable on the window? Returns a witness when it is."""
    matrix, rhs = _system(candidates, window, _catalog(catalog))
    solution = solve_mod_prime_power(matrix, rhs, q, r, ncols=len(candidates))
    return solution.feasible, list(solution.x) if solution.x is not None else None


def max_feasible_exponent(
    candidates: Sequence[str | GroupSymbol],
    q: int,
    r_max: int,
    window: int = 500,
    catalog: Catalog | None = None,
) -> int:
    """Largest r <= r_max for which the order-bound system is solvable."""
    matrix, rhs = _system(candidates, window, _catalog(catalog))
    best = 0
    for r in range(1, r_max + 1):
        if not solve_mod_prime_power(matrix, rhs, q, r, ncols=len(candidates)).feasible:
            break
        best = r
    return best


def check_order_bound(
    candidates: Sequence[str | GroupSymbol],
    q: int,
    r: int,
    window: int = 500,
    catalog: Catalog | None = None,
) -> CheckReport:
    """Report form of order_bound_feasible; passes when a solution exists."""
    started = time.perf_counter()
    feasible, solution = order_bound_feasible(candidates, q, r, window, catalog)
    verdict = Verdict.PASS if feasible else Verdict.FAIL
    log_check("orderbound", verdict.value, window, (time.perf_counter() - started) * 1000)
    return CheckReport(
        name="orderbound",
        params={"candidates": [canonical(s) for s in candidates], "q": q, "r": r},
        window=window,
        verdict=verdict,
        details={"coefficients": solution} if solution is not None else {},
    )


def check_exponent_group(
    symbol: str | GroupSymbol, q: int, r: int, window: int = 500, catalog: Catalog | None = None
) -> CheckReport:
    """q^r | (J − 𝒯) on the window."""
    started = time.perf_counter()
    value = exponent_divisibility(symbol, q, window, catalog)
    verdict = Verdict.PASS if value.value >= r else Verdict.FAIL
    witness = None
    if verdict is Verdict.FAIL:
        cat = _catalog(catalog)
        diff = cat.expand("1", window) - cat.expand(symbol, window)
        witness = next(n for n, c in diff.items() if c and c % q**r)
    log_check("exponent", verdict.value, window, (time.perf_counter() - started) * 1000)
    return CheckReport(
        name="exponent",
        params={"symbol": str(symbol), "q": q, "r": r},
        window=window,
        verdict=verdict,
        witness=witness,
        valuations=[value.value],
    )


__all__ = [
    "CharacterTable",
    "ConjugacyClass",
    "QuadNum",
    "build_table",
    "check_exponent_group",
    "check_order_bound",
    "check_padic_moonshine",
    "element_order_symbols",
    "exponent_divisibility",
    "load_assignment",
    "load_group",
    "max_feasible_exponent",
    "multiplicity_series",
    "order_bound_feasible",
    "reconstruct_class_series",
    "validate_assignment",
]
