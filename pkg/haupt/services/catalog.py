"""
Hauptmodul Catalog Service

Registry of normalized Hauptmodul expansions 𝒯_Γ = q^-1 + O(q).

Catalog files hold one record per line::

    symbol<TAB>kind<TAB>payload

with ``#`` comments and blank lines ignored. Kinds and payloads:

    j          (none)                 J itself
    eta        1^6*3^6*2^-6*6^-6      eta quotient
    etapower   N                      (η(τ)/η(Nτ))^(24/(N-1))
    fricke     N                      t + N^(12/(N-1))/t for t the etapower
    root       h:base:scale[:offset]  h-th root of base(scale·τ) + offset
    compress   p:base                 base − p²·base|U_p²
    file       relative/path          qseries coefficient file

Every expansion has its constant term replaced by 0.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from sympy import integer_nthroot

from haupt.errors import (
    DuplicateSymbol,
    FileError,
    HauptError,
    InvariantViolation,
    Malformed,
    MissingCatalogEntry,
    PrecisionExhausted,
    RootMismatch,
)
from haupt.services.expansion_cache import ExpansionCache
from haupt.services.forms import EtaQuotient, expand_eta_quotient, j_function, parse_eta_quotient
from haupt.services.qseries import LaurentSeries, load_series, nth_root, recip, scale, u_p, v_m
from haupt.services.symbols import (
    GroupSymbol,
    adjoin_we,
    al_set,
    canonical,
    exact_divisors,
    parse_symbol,
    power_group,
    star,
    sturm_index,
)
from haupt.utils.logger import get_logger


logger = get_logger("Catalog")


# ============================================================
# Constructions
# ============================================================

@dataclass(frozen=True)
class JFunction:
    pass


@dataclass(frozen=True)
class EtaProduct:
    quotient: EtaQuotient


@dataclass(frozen=True)
class EtaPower:
    N: int

    def __post_init__(self) -> None:
        if self.N < 2 or 24 % (self.N - 1):
            raise Malformed(f"etapower needs N-1 | 24, got N={self.N}")

    @property
    def quotient(self) -> EtaQuotient:
        r = 24 // (self.N - 1)
        return EtaQuotient(((1, r), (self.N, -r)))


@dataclass(frozen=True)
class FrickeSym:
    N: int

    def __post_init__(self) -> None:
        if self.N < 2 or 24 % (self.N - 1):
            raise Malformed(f"fricke needs N-1 | 24, got N={self.N}")

    @property
    def constant(self) -> int:
        """N^(12/(N-1)), the W_N scalar of the etapower."""
        root, exact = integer_nthroot(self.N**12, self.N - 1)
        if not exact:
            raise Malformed(f"N^(12/(N-1)) is not an integer for N={self.N}")
        return int(root)


@dataclass(frozen=True)
class FormalRoot:
    h: int
    base: str
    scale: int
    offset: int = 0


@dataclass(frozen=True)
class Compression:
    p: int
    base: str


@dataclass(frozen=True)
class CoeffFile:
    path: Path


Construction = JFunction | EtaProduct | EtaPower | FrickeSym | FormalRoot | Compression | CoeffFile


@dataclass(frozen=True)
class HauptmodulDef:
    symbol: GroupSymbol
    construction: Construction

    @property
    def key(self) -> str:
        return self.symbol.render()

    def dependencies(self) -> tuple[str, ...]:
        if isinstance(self.construction, FormalRoot | Compression):
            return (canonical(self.construction.base),)
        return ()


# ============================================================
# Catalog files
# ============================================================

def _int_args(kind: str, payload: str, lineno: int, count: int) -> list[int]:
    parts = payload.split(":")
    try:
        values = [int(x) for x in parts]
    except ValueError as exc:
        raise Malformed(f"line {lineno}: {kind} needs integer arguments, got {payload!r}") from exc
    if len(values) != count:
        raise Malformed(f"line {lineno}: {kind} takes {count} argument(s), got {payload!r}")
    return values


def parse_construction(kind: str, payload: str, base_dir: Path, lineno: int = 0) -> Construction:
    """Build a construction from the kind and payload columns."""
    payload = payload.strip()
    if kind == "j":
        return JFunction()
    if kind == "eta":
        if not payload:
            raise Malformed(f"line {lineno}: eta entry without a quotient")
        return EtaProduct(parse_eta_quotient(payload))
    if kind == "etapower":
        return EtaPower(*_int_args(kind, payload, lineno, 1))
    if kind == "fricke":
        return FrickeSym(*_int_args(kind, payload, lineno, 1))
    if kind == "root":
        parts = payload.split(":")
        if len(parts) not in (3, 4):
            raise Malformed(f"line {lineno}: root takes h:base:scale[:offset], got {payload!r}")
        try:
            h, scale_ = int(parts[0]), int(parts[2])
            offset = int(parts[3]) if len(parts) == 4 else 0
        except ValueError as exc:
            raise Malformed(f"line {lineno}: bad root arguments {payload!r}") from exc
        return FormalRoot(h, canonical(parts[1]), scale_, offset)
    if kind == "compress":
        prime_text, _, base = payload.partition(":")
        try:
            p = int(prime_text)
        except ValueError as exc:
            raise Malformed(f"line {lineno}: bad compress arguments {payload!r}") from exc
        if not base:
            raise Malformed(f"line {lineno}: compress needs p:base")
        return Compression(p, canonical(base))
    if kind == "file":
        if not payload:
            raise Malformed(f"line {lineno}: file entry without a path")
        return CoeffFile(base_dir / payload)
    raise Malformed(f"line {lineno}: unknown kind {kind!r}")


def parse_catalog(text: str, base_dir: Path = Path(".")) -> dict[str, HauptmodulDef]:
    """Parse catalog text; keys are canonical symbols."""
    entries: dict[str, HauptmodulDef] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = raw.rstrip("\r\n").split("\t")
        if len(fields) not in (2, 3):
            raise Malformed(f"line {lineno}: expected 'symbol<TAB>kind<TAB>payload'")
        symbol = parse_symbol(fields[0].strip())
        construction = parse_construction(
            fields[1].strip(), fields[2] if len(fields) == 3 else "", base_dir, lineno
        )
        defn = HauptmodulDef(symbol, construction)
        if defn.key in entries:
            raise DuplicateSymbol(f"line {lineno}: {defn.key} is listed twice")
        entries[defn.key] = defn
    _check_acyclic(entries)
    return entries


def _check_acyclic(entries: dict[str, HauptmodulDef]) -> None:
    state: dict[str, int] = {}

    def visit(key: str) -> None:
        if state.get(key) == 2:
            return
        if state.get(key) == 1:
            raise Malformed(f"catalog entries depend on each other in a cycle through {key}")
        state[key] = 1
        defn = entries.get(key)
        if defn is not None:
            for dep in defn.dependencies():
                visit(dep)
        state[key] = 2

    for key in entries:
        visit(key)


def load_catalog(path: str | Path) -> dict[str, HauptmodulDef]:
    """Read and validate a catalog file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileError(f"cannot read catalog {path}: {exc}") from exc
    entries = parse_catalog(text, path.parent)
    logger.info("📚 Catalog loaded", path=str(path), entries=len(entries))
    return entries


# ============================================================
# Expansion
# ============================================================

def normalize(series: LaurentSeries, symbol: GroupSymbol, *, source: str = "eta") -> LaurentSeries:
    """Force a(0) = 0 and check the shape q^-1 + O(q) with integral coefficients."""
    series = series.leading().with_constant(0)
    error = RootMismatch if source == "root" else InvariantViolation
    if series.low != -1 or series.coefficient(-1) != 1:
        raise error(f"{symbol} does not start with q^-1 (got {series.coefficient(series.low)}*q^{series.low})")
    for n, c in series.items():
        if isinstance(c, Fraction):
            raise error(f"{symbol}: coefficient of q^{n} is {c}, not an integer")
    if symbol.h > 1:
        for n, c in series.items():
            if c and (n + 1) % symbol.h:
                raise error(f"{symbol}: a({n}) = {c} but support must lie in -1 + {symbol.h}Z")
    return series


class Catalog:
    """Immutable registry of Hauptmodul definitions with cached expansions."""

    def __init__(self, entries: dict[str, HauptmodulDef], cache_size: int = 64, path: Path | None = None):
        self._entries = dict(entries)
        self.path = path
        self.cache = ExpansionCache(max_size=cache_size)

    @classmethod
    def from_file(cls, path: str | Path, cache_size: int = 64) -> Catalog:
        return cls(load_catalog(path), cache_size=cache_size, path=Path(path))

    def __contains__(self, symbol: object) -> bool:
        if not isinstance(symbol, str | GroupSymbol):
            return False
        try:
            return canonical(symbol) in self._entries
        except HauptError:
            return False

    def __len__(self) -> int:
        return len(self._entries)

    def symbols(self) -> list[str]:
        return sorted(self._entries, key=lambda s: (parse_symbol(s).n, parse_symbol(s).h, s))

    def definition(self, symbol: str | GroupSymbol) -> HauptmodulDef:
        try:
            key = canonical(symbol)
        except HauptError as exc:
            raise MissingCatalogEntry(str(symbol)) from exc
        try:
            return self._entries[key]
        except KeyError:
            raise MissingCatalogEntry(key) from None

    def expand(self, symbol: str | GroupSymbol, high: int) -> LaurentSeries:
        """Normalized 𝒯_Γ on [-1, high)."""
        defn = self.definition(symbol)
        cached = self.cache.get(defn.key, high)
        if cached is not None:
            return cached
        series = hauptmodul(defn, high, self)
        self.cache.set(defn.key, series)
        return series

    def unnormalized(self, symbol: str | GroupSymbol, high: int) -> LaurentSeries:
        """𝔗_Γ: the raw construction before the constant term is cleared."""
        defn = self.definition(symbol)
        if isinstance(defn.construction, EtaProduct):
            return expand_eta_quotient(defn.construction.quotient, high)
        if isinstance(defn.construction, EtaPower):
            return expand_eta_quotient(defn.construction.quotient, high)
        return self.expand(symbol, high)


def hauptmodul(defn: HauptmodulDef, high: int, catalog: Catalog | None = None) -> LaurentSeries:
    """Expand one definition through q^(high-1); bases resolve through ``catalog``."""
    construction = defn.construction
    symbol = defn.symbol

    if isinstance(construction, JFunction):
        return normalize(j_function(high), symbol)

    if isinstance(construction, EtaProduct | EtaPower):
        return normalize(expand_eta_quotient(construction.quotient, high), symbol)

    if isinstance(construction, FrickeSym):
        t = expand_eta_quotient(EtaPower(construction.N).quotient, high)
        return normalize(t + scale(recip(t), construction.constant), symbol)

    if isinstance(construction, CoeffFile):
        series = load_series(construction.path)
        if series.high < high:
            raise PrecisionExhausted(high - series.low, len(series))
        return normalize(series.truncate(high), symbol, source="file")

    catalog = catalog or default_catalog()

    if isinstance(construction, Compression):
        p = construction.p
        base = catalog.expand(construction.base, p * p * (high + 1))
        compressed = base - scale(u_p(u_p(base, p), p), p * p)
        return normalize(compressed.truncate(high), symbol)

    if isinstance(construction, FormalRoot):
        return _formal_root(construction, symbol, high, catalog)

    raise TypeError(f"unknown construction {construction!r}")


def _formal_root(root: FormalRoot, symbol: GroupSymbol, high: int, catalog: Catalog) -> LaurentSeries:
    if root.scale != root.h:
        raise RootMismatch(f"{symbol}: scale {root.scale} must equal h={root.h} for a q^-1 root")
    base = catalog.expand(root.base, high // root.scale + 2)
    target = v_m(base, root.scale) + root.offset
    try:
        series = nth_root(target, root.h)
    except Malformed as exc:
        raise RootMismatch(f"{symbol}: {exc}") from exc
    if series.high < high:
        raise RootMismatch(f"{symbol}: root known only below q^{series.high}")
    return normalize(series.truncate(high), symbol, source="root")


# ============================================================
# Default catalog
# ============================================================

@lru_cache(maxsize=8)
def _catalog_for(path: str, cache_size: int) -> Catalog:
    return Catalog.from_file(path, cache_size=cache_size)


_default_lock = threading.Lock()


def get_catalog(path: str | Path | None = None) -> Catalog:
    """Catalog for ``path``, or the configured one; one instance per path and process."""
    from haupt.config import get_settings

    settings = get_settings()
    resolved = str(Path(path) if path is not None else settings.catalog.path)
    with _default_lock:
        return _catalog_for(resolved, settings.catalog.cache_size)


def default_catalog() -> Catalog:
    return get_catalog(None)


def reset_catalogs() -> None:
    with _default_lock:
        _catalog_for.cache_clear()


__all__ = [
    "Catalog",
    "CoeffFile",
    "Compression",
    "Construction",
    "EtaPower",
    "EtaProduct",
    "FormalRoot",
    "FrickeSym",
    "GroupSymbol",
    "HauptmodulDef",
    "JFunction",
    "adjoin_we",
    "al_set",
    "canonical",
    "default_catalog",
    "exact_divisors",
    "get_catalog",
    "hauptmodul",
    "load_catalog",
    "normalize",
    "parse_catalog",
    "parse_construction",
    "parse_symbol",
    "power_group",
    "reset_catalogs",
    "star",
    "sturm_index",
]
