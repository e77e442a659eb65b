"""
U_p iteration, valuation sequences and the identity checks built on them.

All checks compare exact coefficients on a finite window and return a
:class:`CheckReport`. A failing report carries the first exponent (or U_p
power) at which the identity breaks. Non-annihilation is only ever reported as
evidence: a repeating nonzero residue of 𝒯|U_p^n mod p on the window.
"""

from __future__ import annotations

import math
import re
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction

from haupt.errors import HypothesisViolated, Malformed, OutOfRange, UnknownDatum
from haupt.schemas.reports import CheckReport, Verdict
from haupt.services.catalog import Catalog, default_catalog
from haupt.services.qseries import (
    LaurentSeries,
    ValuationP,
    _vp_int,
    first_difference,
    power,
    recip,
    reduce_mod,
    require_coefficients,
    scale,
    u_p,
    valuation_p,
)
from haupt.services.symbols import GroupSymbol, adjoin_we, parse_symbol, power_group
from haupt.utils.logger import get_logger, log_check


logger = get_logger("Annihilation")


def _catalog(catalog: Catalog | None) -> Catalog:
    return catalog if catalog is not None else default_catalog()


def _report(name: str, started: float, **fields: object) -> CheckReport:
    report = CheckReport(name=name, **fields)  # type: ignore[arg-type]
    log_check(name, report.verdict.value, report.window, (time.perf_counter() - started) * 1000)
    return report


# ============================================================
# Valuation sequences
# ============================================================

def valuation_sequence(
    symbol: str | GroupSymbol,
    p: int,
    iters: int,
    base_window: int,
    catalog: Catalog | None = None,
) -> list[ValuationP]:
    """[v_p(𝒯|U_p^n) for n = 1..iters], each over at least ``base_window`` coefficients."""
    high = base_window * p**iters
    require_coefficients(high)
    f = _catalog(catalog).expand(symbol, high)
    out: list[ValuationP] = []
    for _ in range(iters):
        f = u_p(f, p)
        out.append(valuation_p(f, p))
    logger.debug("Valuation sequence", symbol=str(symbol), p=p, values=[str(v) for v in out])
    return out


def _residues(f: LaurentSeries, p: int, n_max: int, window: int) -> list[tuple[int, ...]]:
    """Residues mod p of f|U_p^n on [0, window) for n = 1..n_max."""
    out = []
    for _ in range(n_max):
        f = u_p(f, p)
        out.append(reduce_mod(f.truncate(window), p).coeffs)
    return out


def _find_cycle(residues: Sequence[tuple[int, ...]]) -> tuple[int, int] | None:
    seen: dict[tuple[int, ...], int] = {}
    for n, residue in enumerate(residues, start=1):
        if not any(residue):
            continue
        if residue in seen:
            return seen[residue], n
        seen[residue] = n
    return None


# ============================================================
# Rate patterns
# ============================================================

_ARROW = re.compile(r"->|→")


@dataclass(frozen=True)
class RatePattern:
    """``a1,...,am -> b1,...,bk``: the head, then increments b cycling forever."""

    head: tuple[int, ...]
    cycle: tuple[int, ...] = ()

    def term(self, i: int) -> int:
        """The i-th term, 1-indexed."""
        m = len(self.head)
        if i < 1:
            raise OutOfRange(f"terms are numbered from 1, got {i}")
        if i <= m:
            return self.head[i - 1]
        if not self.cycle:
            raise OutOfRange(f"pattern {self} has only {m} terms")
        q, r = divmod(i - m, len(self.cycle))
        start = self.head[-1] if self.head else 0
        return start + q * sum(self.cycle) + sum(self.cycle[:r])

    def terms(self, count: int) -> list[int]:
        return [self.term(i) for i in range(1, count + 1)]

    def __str__(self) -> str:
        return format_rate_pattern(self)


def _int_list(text: str, original: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise Malformed(f"bad rate pattern {original!r}") from exc


def parse_rate_pattern(text: str) -> RatePattern:
    parts = _ARROW.split(text)
    if len(parts) > 2:
        raise Malformed(f"rate pattern {text!r} has more than one arrow")
    head = _int_list(parts[0], text)
    if not head:
        raise Malformed(f"rate pattern {text!r} has no head")
    cycle: tuple[int, ...] = ()
    if len(parts) == 2:
        cycle = _int_list(parts[1], text)
        if not cycle:
            raise Malformed(f"rate pattern {text!r} has an empty cycle")
    return RatePattern(head, cycle)


def format_rate_pattern(pattern: RatePattern) -> str:
    text = ",".join(str(a) for a in pattern.head)
    if pattern.cycle:
        text += "->" + ",".join(str(b) for b in pattern.cycle)
    return text


def fit_rate_pattern(values: Sequence[int]) -> RatePattern:
    """Shortest head + cycle reproducing ``values`` with the cycle seen at least twice."""
    values = list(values)
    n = len(values)
    for total in range(2, n + 1):
        for k in range(1, total):
            m = total - k
            if n - m < 2 * k:
                continue
            cycle = tuple(values[m + j] - values[m + j - 1] for j in range(k))
            candidate = RatePattern(tuple(values[:m]), cycle)
            if candidate.terms(n) == values:
                return candidate
    return RatePattern(tuple(values))


# ============================================================
# Lehner-type congruences for J
# ============================================================

_CONGRUENCE_EXPONENTS: dict[int, Callable[[int], int]] = {
    2: lambda a: 3 * a + 8,
    3: lambda a: 2 * a + 3,
    5: lambda a: a + 1,
    7: lambda a: a,
    11: lambda a: a,
}


def congruence_exponent(p: int, alpha: int) -> int:
    """Exponent of p guaranteed to divide c(p^α n) for the coefficients of J."""
    try:
        return _CONGRUENCE_EXPONENTS[p](alpha)
    except KeyError:
        raise UnknownDatum(f"no congruence family for p={p}") from None


def check_congruence_family(
    p: int,
    exp_fn: Callable[[int], int] | None = None,
    alpha_max: int = 1,
    window: int = 100,
    catalog: Catalog | None = None,
) -> CheckReport:
    """v_p(c(p^α n)) ≥ exp_fn(α) for 1 <= n < window and 1 <= α <= alpha_max."""
    started = time.perf_counter()
    exp_fn = exp_fn or (lambda a: congruence_exponent(p, a))
    params = {"p": p, "alpha_max": alpha_max}
    if alpha_max < 1:
        return _report("congruences", started, params=params, window=window, verdict=Verdict.PASS, valuations=[])

    high = p**alpha_max * window
    require_coefficients(high + 1)
    j = _catalog(catalog).expand("1", high)
    minima: list[int | float] = []
    required: list[int] = []
    witness: int | None = None
    for alpha in range(1, alpha_max + 1):
        bound = exp_fn(alpha)
        required.append(bound)
        best: int | float = math.inf
        step = p**alpha
        for n in range(1, window):
            c = j[step * n]
            if not c:
                continue
            v = _vp_int(abs(int(c)), p)
            best = min(best, v)
            if v < bound and witness is None:
                witness = step * n
        minima.append(best)
    verdict = Verdict.PASS if witness is None else Verdict.FAIL
    return _report(
        "congruences",
        started,
        params=params,
        window=window,
        verdict=verdict,
        witness=witness,
        valuations=minima,
        details={"required": required},
    )


# ============================================================
# Compression identities
# ============================================================

COMPRESSION_CASES = ("a", "b", "c", "d", "conway")


def _split_p(n: int, p: int) -> tuple[int, int]:
    r = 0
    while n % p == 0:
        n //= p
        r += 1
    return r, n


def _identity_report(
    name: str,
    started: float,
    params: dict[str, object],
    lhs: LaurentSeries,
    rhs: LaurentSeries,
    window: int,
) -> CheckReport:
    lhs = lhs.truncate(window)
    rhs = rhs.truncate(window)
    witness = first_difference(lhs, rhs)
    verdict = Verdict.PASS if witness is None else Verdict.FAIL
    return _report(name, started, params=params, window=window, verdict=verdict, witness=witness)


def check_compression(
    case: str,
    gamma: str | GroupSymbol,
    p: int,
    window: int = 2500,
    catalog: Catalog | None = None,
) -> CheckReport:
    """
    Verify one compression identity coefficientwise on [-1, window).

    a:      p 𝒯_Γ|U_p   = 𝒯_Γ − 𝒯_⟨Γ,w_p⟩
    b:      p² 𝒯_Γ|U_p² = 𝒯_Γ − 𝒯_Γ^p
    c:      p 𝒯_Γ|U_p   = 𝒯_⟨Γ^p,w_p^(r−1)⟩ − 𝒯_Γ^p
    d:      𝒯_Γ|U_p     = −𝒯_Γ^p|U_p
    conway: p 𝒯_Γ|U_p   = 𝒯_Γ^p − 𝒯_Γ
    """
    started = time.perf_counter()
    gamma = parse_symbol(gamma)
    cat = _catalog(catalog)
    r, _ = _split_p(gamma.n, p)
    if r == 0 or gamma.h % p == 0:
        raise HypothesisViolated(f"{gamma}: need p^r || n with r >= 1 and p not dividing h")
    no_wp = all(e % p for e in gamma.fricke)
    params: dict[str, object] = {"case": case, "symbol": gamma.render(), "p": p}
    gp = power_group(gamma, p)

    if case == "a":
        if r != 1 or not no_wp:
            raise HypothesisViolated(f"case a needs p || n and no w_e with p | e ({gamma})")
        lhs = scale(u_p(cat.expand(gamma, p * window), p), p)
        rhs = cat.expand(gamma, window) - cat.expand(adjoin_we(gamma, p), window)
    elif case == "b":
        if r != 1 or not no_wp:
            raise HypothesisViolated(f"case b needs p || n and no w_e with p | e ({gamma})")
        lhs = scale(u_p(u_p(cat.expand(gamma, p * p * window), p), p), p * p)
        rhs = cat.expand(gamma, window) - cat.expand(gp, window)
    elif case == "c":
        if r < 2 or p**r not in gamma.fricke:
            raise HypothesisViolated(f"case c needs p^r || n with r >= 2 and w_(p^r) in {gamma}")
        lhs = scale(u_p(cat.expand(gamma, p * window), p), p)
        rhs = cat.expand(adjoin_we(gp, p ** (r - 1)), window) - cat.expand(gp, window)
    elif case == "d":
        if r != 2 or p * p not in gamma.fricke:
            raise HypothesisViolated(f"case d needs p^2 || n and w_(p^2) in {gamma}")
        lhs = u_p(cat.expand(gamma, p * window), p)
        rhs = -u_p(cat.expand(gp, p * window), p)
    elif case == "conway":
        if r != 1 or p not in gamma.fricke:
            raise HypothesisViolated(f"conway case needs p || n and w_p in {gamma}")
        lhs = scale(u_p(cat.expand(gamma, p * window), p), p)
        rhs = cat.expand(gp, window) - cat.expand(gamma, window)
    else:
        raise Malformed(f"unknown compression case {case!r}; expected one of {COMPRESSION_CASES}")

    return _identity_report("compression", started, params, lhs, rhs, window)


# ============================================================
# Functional equations
# ============================================================

@dataclass(frozen=True)
class LehnerDatum:
    """U_p functional equation data for an eta-quotient Hauptmodul."""

    symbol: str
    p: int
    e: int
    alpha: Fraction
    scaled_b: tuple[int, ...]

    def __post_init__(self) -> None:
        if (2 * self.alpha).denominator != 1:
            raise Malformed(f"alpha must be a half-integer, got {self.alpha}")
        if len(self.scaled_b) > self.p:
            raise Malformed(f"at most p={self.p} polynomial coefficients, got {len(self.scaled_b)}")


LEHNER_DATA: dict[str, LehnerDatum] = {
    d.symbol: d
    for d in (
        LehnerDatum("6+2", 3, 4, Fraction(3, 2), (18, 324, 2187)),
        LehnerDatum("6+3", 2, 6, Fraction(1), (6, 32)),
        LehnerDatum("10+5", 2, 4, Fraction(3, 2), (4, 8)),
        LehnerDatum("22+11", 2, 2, Fraction(1, 2), (2, 2)),
        LehnerDatum("6|3", 2, 4, Fraction(3, 2), (0, 8)),
        LehnerDatum("24|4+2", 3, 1, Fraction(1, 2), (0, 0, 3)),
    )
}


def lehner_datum(symbol: str | GroupSymbol) -> LehnerDatum:
    key = parse_symbol(symbol).render()
    try:
        return LEHNER_DATA[key]
    except KeyError:
        raise UnknownDatum(f"no functional-equation data for {key}") from None


def check_lehner(datum: LehnerDatum, window: int = 600, catalog: Catalog | None = None) -> CheckReport:
    """
    With Z = 1/𝔗 for the unnormalized eta quotient 𝔗:

    (i)  p·𝒯|U_p + p^e·Z is constant on the window;
    (ii) Z|U_p = Σ_j scaled_b[j]·Z^(j+1).
    """
    started = time.perf_counter()
    cat = _catalog(catalog)
    p = datum.p
    high = p * window + 2
    require_coefficients(high + 1)
    t = cat.expand(datum.symbol, high)
    z = recip(cat.unnormalized(datum.symbol, high))

    functional = (scale(u_p(t, p), p) + scale(z, p**datum.e)).truncate(window)
    constant = functional.constant_term()
    functional_witness = next((n for n, c in functional.items() if n != 0 and c), None)

    z_up = u_p(z, p).truncate(window)
    poly = LaurentSeries.zero(window, 1)
    for j, b in enumerate(datum.scaled_b, start=1):
        if b:
            poly = poly + scale(power(z, j), b)
    polynomial_witness = first_difference(z_up, poly.truncate(window))

    failures = [w for w in (functional_witness, polynomial_witness) if w is not None]
    verdict = Verdict.FAIL if failures else Verdict.PASS
    return _report(
        "lehner",
        started,
        params={"symbol": datum.symbol, "p": p, "e": datum.e, "alpha": datum.alpha, "scaled_b": datum.scaled_b},
        window=window,
        verdict=verdict,
        witness=min(failures) if failures else None,
        details={
            "constant": constant,
            "functional_equation": "pass" if functional_witness is None else "fail",
            "polynomial": "pass" if polynomial_witness is None else "fail",
        },
    )


# ============================================================
# Rates and increments
# ============================================================

def _plain_values(values: Sequence[ValuationP]) -> list[int | float]:
    return [v.value for v in values]


def _pattern_of(values: Sequence[int | float]) -> str | None:
    if any(v == math.inf for v in values) or not values:
        return None
    return format_rate_pattern(fit_rate_pattern([int(v) for v in values]))


def check_rate_bound(
    symbol: str | GroupSymbol,
    p: int,
    alpha: Fraction | int,
    n_max: int = 5,
    base_window: int = 100,
    catalog: Catalog | None = None,
) -> CheckReport:
    """v_p(𝒯|U_p^n) ≥ ⌊nα⌋ for n <= n_max."""
    started = time.perf_counter()
    alpha = Fraction(alpha)
    params = {"symbol": str(symbol), "p": p, "alpha": alpha, "n_max": n_max}
    values = _plain_values(valuation_sequence(symbol, p, n_max, base_window, catalog)) if n_max > 0 else []
    bounds = [math.floor(n * alpha) for n in range(1, n_max + 1)]
    witness = next((n for n, (v, b) in enumerate(zip(values, bounds, strict=True), start=1) if v < b), None)
    return _report(
        "rates",
        started,
        params=params,
        window=base_window,
        verdict=Verdict.PASS if witness is None else Verdict.FAIL,
        witness=witness,
        valuations=values,
        details={"bounds": bounds, "pattern": _pattern_of(values)},
    )


def check_increment(
    symbol: str | GroupSymbol,
    p: int,
    m: int,
    n_max: int,
    base_window: int = 100,
    catalog: Catalog | None = None,
) -> CheckReport:
    """v_p(𝒯|U_p^(ℓ+m+1)) ≥ v_p(𝒯|U_p^ℓ) + 1 for every ℓ with ℓ+m+1 <= n_max."""
    started = time.perf_counter()
    values = _plain_values(valuation_sequence(symbol, p, n_max, base_window, catalog)) if n_max > 0 else []
    witness = None
    for ell in range(1, n_max - m):
        if values[ell + m] < values[ell - 1] + 1:
            witness = ell
            break
    return _report(
        "increment",
        started,
        params={"symbol": str(symbol), "p": p, "m": m, "n_max": n_max},
        window=base_window,
        verdict=Verdict.PASS if witness is None else Verdict.FAIL,
        witness=witness,
        valuations=values,
    )


# ============================================================
# Residues mod p
# ============================================================

def detect_mod_p_cycle(
    symbol: str | GroupSymbol,
    p: int,
    n_max: int = 2,
    window: int = 50,
    catalog: Catalog | None = None,
) -> CheckReport:
    """
    Look for n1 < n2 <= n_max with 𝒯|U_p^n1 ≡ 𝒯|U_p^n2 ≢ 0 (mod p) on the window.

    A hit fails the check (evidence against annihilation; witness n2). When
    every residue vanishes there is nothing to compare and the verdict is
    indeterminate.
    """
    started = time.perf_counter()
    high = window * p**n_max
    require_coefficients(high)
    f = _catalog(catalog).expand(symbol, high)
    residues = _residues(f, p, n_max, window)
    hit = _find_cycle(residues)
    params = {"symbol": str(symbol), "p": p, "n_max": n_max}
    zero_at = [n for n, r in enumerate(residues, start=1) if not any(r)]
    if hit is not None:
        n1, n2 = hit
        return _report(
            "cycle",
            started,
            params=params,
            window=window,
            verdict=Verdict.FAIL,
            witness=n2,
            details={"n1": n1, "n2": n2, "evidence": "non-annihilation (window residue cycle)"},
        )
    verdict = Verdict.INDETERMINATE if len(zero_at) == len(residues) else Verdict.PASS
    return _report("cycle", started, params=params, window=window, verdict=verdict, details={"zero_at": zero_at})


def check_weak_annihilation(
    symbol: str | GroupSymbol,
    p: int,
    n_max: int = 3,
    window: int = 100,
    catalog: Catalog | None = None,
) -> CheckReport:
    """Least n <= n_max with 𝒯|U_p^n ≡ 0 (mod p) on the window."""
    started = time.perf_counter()
    high = window * p**n_max
    require_coefficients(high)
    f = _catalog(catalog).expand(symbol, high)
    residues = _residues(f, p, n_max, window)
    params = {"symbol": str(symbol), "p": p, "n_max": n_max}
    for n, residue in enumerate(residues, start=1):
        if not any(residue):
            return _report(
                "weak", started, params=params, window=window, verdict=Verdict.PASS, witness=n,
                details={"annihilated_at": n},
            )
    hit = _find_cycle(residues)
    if hit is not None:
        return _report(
            "weak", started, params=params, window=window, verdict=Verdict.FAIL, witness=hit[1],
            details={"annihilated_at": None, "n1": hit[0], "n2": hit[1]},
        )
    return _report(
        "weak", started, params=params, window=window, verdict=Verdict.INDETERMINATE,
        details={"annihilated_at": None},
    )


def check_up_vanishing(
    symbol: str | GroupSymbol,
    p: int,
    window: int = 1000,
    catalog: Catalog | None = None,
) -> CheckReport:
    """𝒯|U_p = 0 on the window, for n|h symbols with p | h."""
    started = time.perf_counter()
    gamma = parse_symbol(symbol)
    if gamma.h % p:
        raise HypothesisViolated(f"{gamma}: U_{p} vanishing needs p | h")
    f = u_p(_catalog(catalog).expand(gamma, p * window), p).truncate(window)
    witness = next((n for n, c in f.items() if c), None)
    return _report(
        "up_vanishing",
        started,
        params={"symbol": gamma.render(), "p": p},
        window=window,
        verdict=Verdict.PASS if witness is None else Verdict.FAIL,
        witness=witness,
    )


def check_valuation_growth(
    symbol: str | GroupSymbol,
    p: int,
    n_max: int = 3,
    window: int = 100,
    catalog: Catalog | None = None,
) -> CheckReport:
    """
    v_p(𝒯|U_p^n) for n = 1..n_max as annihilation evidence.

    Passes with the first n whose valuation is positive; a sequence stuck at 0
    is indeterminate. When p | h the sequence is replaced by the vanishing of
    𝒯|U_p.
    """
    gamma = parse_symbol(symbol)
    if gamma.h % p == 0:
        return check_up_vanishing(gamma, p, window, catalog)
    started = time.perf_counter()
    values = _plain_values(valuation_sequence(gamma, p, n_max, window, catalog))
    reached = next((n for n, v in enumerate(values, start=1) if v >= 1), None)
    return _report(
        "valuations",
        started,
        params={"symbol": gamma.render(), "p": p, "n_max": n_max},
        window=window,
        verdict=Verdict.PASS if reached is not None else Verdict.INDETERMINATE,
        witness=reached,
        valuations=values,
        details={"pattern": _pattern_of(values)},
    )


def check_strong_annihilation(
    symbol: str | GroupSymbol,
    p: int,
    degree: int = 2,
    n_max: int = 4,
    base_window: int = 100,
    catalog: Catalog | None = None,
) -> CheckReport:
    """
    Evidence that 𝒯^k − const is annihilated for every k <= degree.

    For each k, the first n with 𝒯^k|U_p^n ≡ 0 (mod p) on the window is
    recorded; a repeating nonzero residue for some k fails the check with
    witness k.
    """
    started = time.perf_counter()
    high = base_window * p**n_max + degree
    require_coefficients(high)
    t = _catalog(catalog).expand(symbol, high)
    reached: dict[int, int | None] = {}
    failing: int | None = None
    for k in range(1, degree + 1):
        f = power(t, k).with_constant(0)
        residues = _residues(f, p, n_max, base_window - 1)
        first_zero = next((n for n, r in enumerate(residues, start=1) if not any(r)), None)
        reached[k] = first_zero
        if first_zero is None and failing is None and _find_cycle(residues) is not None:
            failing = k
    if failing is not None:
        verdict = Verdict.FAIL
    elif all(v is not None for v in reached.values()):
        verdict = Verdict.PASS
    else:
        verdict = Verdict.INDETERMINATE
    return _report(
        "strong",
        started,
        params={"symbol": str(symbol), "p": p, "degree": degree, "n_max": n_max},
        window=base_window,
        verdict=verdict,
        witness=failing,
        details={"annihilated_at": reached},
    )


__all__ = [
    "COMPRESSION_CASES",
    "LEHNER_DATA",
    "LehnerDatum",
    "RatePattern",
    "check_compression",
    "check_congruence_family",
    "check_increment",
    "check_lehner",
    "check_rate_bound",
    "check_strong_annihilation",
    "check_up_vanishing",
    "check_valuation_growth",
    "check_weak_annihilation",
    "congruence_exponent",
    "detect_mod_p_cycle",
    "fit_rate_pattern",
    "format_rate_pattern",
    "lehner_datum",
    "parse_rate_pattern",
    "valuation_sequence",
]
