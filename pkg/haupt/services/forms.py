"""
Level-one building blocks and the forms built from them.

Eta quotients, Eisenstein series, Δ and J expand to exact q-series. Products of
scaled level-one generators are kept symbolic as :class:`FormExpr` so that the
Atkin–Lehner action f(dτ)|W_e = ((d*e)/d)^(k/2) f((d*e)τ) can be applied
before expanding.
"""

from __future__ import annotations

import math
import threading
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from sympy import bernoulli, factorint, isprime, legendre_symbol

from haupt.errors import (
    BadGroup,
    BadWeight,
    EmptyWindow,
    FractionalOffset,
    IrrationalScalar,
    Malformed,
    NotExactDivisor,
    OddWeight,
)
from haupt.services.qseries import (
    LaurentSeries,
    _recip_power_series,
    mul_truncated,
    power,
    require_coefficients,
    scale,
    u_p,
    v_m,
)
from haupt.services.symbols import GroupSymbol, al_set, is_exact_divisor, parse_symbol, star, sturm_index
from haupt.utils.logger import get_logger


logger = get_logger("Forms")

# above this length eta powers are built by squaring instead of the recurrence
RECURRENCE_LIMIT = 4096


# ============================================================
# Eta products
# ============================================================

def pentagonal_terms(n: int) -> list[tuple[int, int]]:
    """Nonzero terms (exponent, ±1) of ∏(1 − q^k) below q^n, constant excluded."""
    out: list[tuple[int, int]] = []
    m = 1
    while m * (3 * m - 1) // 2 < n:
        sign = -1 if m % 2 else 1
        out.append((m * (3 * m - 1) // 2, sign))
        if m * (3 * m + 1) // 2 < n:
            out.append((m * (3 * m + 1) // 2, sign))
        m += 1
    return out


def _eta_power_recurrence(r: int, n: int) -> list[int]:
    # n g_m = sum_k ((r+1)k - m) f_k g_{m-k} for G = F^r, F the pentagonal series
    pent = pentagonal_terms(n)
    g = [0] * n
    g[0] = 1
    for m in range(1, n):
        total = 0
        for k, sign in pent:
            if k > m:
                break
            weight = (r + 1) * k - m
            if weight:
                total += weight * sign * g[m - k]
        g[m] = total // m
    return g


def _eta_power_squaring(r: int, n: int) -> list[int]:
    base: list[int] = [0] * n
    base[0] = 1
    for k, sign in pentagonal_terms(n):
        base[k] = sign
    if r < 0:
        base = [int(c) for c in _recip_power_series(base, n)]
        r = -r
    result: list[int] = [1] + [0] * (n - 1)
    while r:
        if r & 1:
            result = [int(c) for c in mul_truncated(result, base, n)]
        r >>= 1
        if r:
            base = [int(c) for c in mul_truncated(base, base, n)]
    return result


class _EtaPowerMemo:
    """Longest computed ∏(1−q^k)^r per r; shorter requests are served by slicing."""

    def __init__(self, max_entries: int = 64):
        self._store: dict[int, tuple[int, ...]] = {}
        self._lock = threading.Lock()
        self.max_entries = max_entries

    def get(self, r: int, n: int) -> tuple[int, ...] | None:
        with self._lock:
            cached = self._store.get(r)
        if cached is not None and len(cached) >= n:
            return cached[:n]
        return None

    def put(self, r: int, values: tuple[int, ...]) -> None:
        with self._lock:
            current = self._store.get(r)
            if current is not None and len(current) >= len(values):
                return
            if current is None and len(self._store) >= self.max_entries:
                self._store.pop(next(iter(self._store)))
            self._store[r] = values

    def clear(self) -> None:
        with self._lock:
            self._store.clear()


_eta_memo = _EtaPowerMemo()


def eta_power(r: int, n: int, method: str = "auto") -> tuple[int, ...]:
    """
    First n coefficients of ∏_{k≥1} (1 − q^k)^r.

    ``method`` is ``recurrence`` (power recurrence on Euler's pentagonal
    series), ``squaring`` (binary powering, Newton inverse for r < 0) or
    ``auto``. Both are exact and agree coefficient for coefficient.
    """
    if n <= 0:
        return ()
    if r == 0:
        return (1,) + (0,) * (n - 1)
    if method == "auto":
        cached = _eta_memo.get(r, n)
        if cached is not None:
            return cached
        method = "recurrence" if n <= RECURRENCE_LIMIT else "squaring"
    if method == "recurrence":
        values = tuple(_eta_power_recurrence(r, n))
    elif method == "squaring":
        values = tuple(_eta_power_squaring(r, n))
    else:
        raise ValueError(f"unknown method {method!r}")
    _eta_memo.put(r, values)
    return values


# ============================================================
# Eta quotients
# ============================================================

@dataclass(frozen=True)
class EtaQuotient:
    """∏ η(dτ)^r as a list of (d, r)."""

    terms: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        for d, _ in self.terms:
            if d < 1:
                raise Malformed(f"eta scale must be positive, got {d}")

    @property
    def offset(self) -> Fraction:
        return Fraction(sum(d * r for d, r in self.terms), 24)

    @property
    def weight(self) -> Fraction:
        return Fraction(sum(r for _, r in self.terms), 2)

    def exponents(self) -> dict[int, int]:
        """Merged exponent per scale, zeros dropped."""
        merged: Counter[int] = Counter()
        for d, r in self.terms:
            merged[d] += r
        return {d: r for d, r in sorted(merged.items()) if r}

    def __mul__(self, other: EtaQuotient) -> EtaQuotient:
        return EtaQuotient(self.terms + other.terms)

    def __str__(self) -> str:
        return format_eta_quotient(self)


def parse_eta_quotient(text: str) -> EtaQuotient:
    """``1^6*3^6*2^-6*6^-6``; a bare ``d`` means exponent 1, empty text the empty quotient."""
    text = text.strip()
    if not text:
        return EtaQuotient()
    terms: list[tuple[int, int]] = []
    for part in text.split("*"):
        scale_text, _, exp_text = part.strip().partition("^")
        try:
            d = int(scale_text)
            r = int(exp_text) if exp_text else 1
        except ValueError as exc:
            raise Malformed(f"bad eta factor {part!r} in {text!r}") from exc
        terms.append((d, r))
    return EtaQuotient(tuple(terms))


def format_eta_quotient(eq: EtaQuotient) -> str:
    return "*".join(f"{d}^{r}" for d, r in eq.terms)


def expand_eta_quotient(eq: EtaQuotient, high: int) -> LaurentSeries:
    """q-expansion of the eta quotient on [offset, high)."""
    offset = eq.offset
    if offset.denominator != 1:
        raise FractionalOffset(f"{format_eta_quotient(eq) or '1'} has q-offset {offset}")
    low = int(offset)
    length = high - low
    if length <= 0:
        raise EmptyWindow(f"eta quotient starts at q^{low}, nothing below {high}")
    require_coefficients(length)

    exponents = eq.exponents()
    if not exponents:
        return LaurentSeries.one(high)

    # all factors live on q^g for g the gcd of the scales
    g = math.gcd(*exponents)
    reduced = -(-length // g)
    acc: list[int] | None = None
    for d, r in exponents.items():
        step = d // g
        spread = [0] * reduced
        spread[::step] = eta_power(r, -(-reduced // step))
        acc = spread if acc is None else [int(c) for c in mul_truncated(acc, spread, reduced)]
    assert acc is not None

    coeffs = [0] * length
    coeffs[::g] = acc
    logger.debug("Expanded eta quotient", quotient=format_eta_quotient(eq), low=low, high=high)
    return LaurentSeries(low, coeffs)


# ============================================================
# Eisenstein series, Δ, J
# ============================================================

def divisor_power_sums(power_: int, n: int) -> list[int]:
    """σ_power(m) for 0 <= m < n (σ(0) reported as 0)."""
    sigma = [0] * n
    for d in range(1, n):
        dp = d**power_
        for m in range(d, n, d):
            sigma[m] += dp
    return sigma


def eisenstein(k: int, high: int) -> LaurentSeries:
    """E_k = 1 − (2k/B_k) Σ σ_{k−1}(n) q^n on [0, high)."""
    if k < 4 or k % 2:
        raise BadWeight(f"Eisenstein series need even weight >= 4, got {k}")
    if high <= 0:
        raise EmptyWindow(f"E_{k} has nothing below q^{high}")
    require_coefficients(high)
    b = bernoulli(k)
    factor = Fraction(-2 * k) / Fraction(int(b.p), int(b.q))
    sigma = divisor_power_sums(k - 1, high)
    return LaurentSeries(0, [1] + [factor * s for s in sigma[1:]])


def delta_function(high: int) -> LaurentSeries:
    """Δ = η(τ)^24 = q − 24q² + 252q³ − …"""
    return expand_eta_quotient(EtaQuotient(((1, 24),)), high)


def j_function(high: int) -> LaurentSeries:
    """J = E₄³/Δ − 744 on [−1, high)."""
    length = high + 1
    if length <= 0:
        raise EmptyWindow(f"J starts at q^-1, nothing below {high}")
    e4 = eisenstein(4, length)
    e4_cubed = power(e4, 3)
    inv_delta = eta_power(-24, length)
    j = LaurentSeries(-1, mul_truncated(e4_cubed.coeffs, inv_delta, length))
    return j - 744


# ============================================================
# Symbolic forms
# ============================================================

class Generator(str, Enum):
    ETA = "eta"
    EISENSTEIN = "E"
    DELTA = "Delta"


@dataclass(frozen=True, order=True)
class Factor:
    """generator(scale·τ)^exponent; ``k`` is the Eisenstein weight."""

    generator: Generator
    scale: int
    exponent: int = 1
    k: int = 0

    @property
    def weight(self) -> Fraction:
        if self.generator is Generator.ETA:
            return Fraction(self.exponent, 2)
        if self.generator is Generator.DELTA:
            return Fraction(12 * self.exponent)
        return Fraction(self.k * self.exponent)

    def rescaled(self, new_scale: int) -> Factor:
        return Factor(self.generator, new_scale, self.exponent, self.k)


def _merge_factors(factors: list[Factor]) -> tuple[Factor, ...]:
    merged: Counter[tuple[Generator, int, int]] = Counter()
    for f in factors:
        merged[(f.generator, f.scale, f.k)] += f.exponent
    return tuple(sorted(Factor(g, d, e, k) for (g, d, k), e in merged.items() if e))


@dataclass(frozen=True)
class Monomial:
    scalar: Fraction
    factors: tuple[Factor, ...] = ()

    @classmethod
    def of(cls, *factors: Factor, scalar: int | Fraction = 1) -> Monomial:
        return cls(Fraction(scalar), _merge_factors(list(factors)))

    @property
    def weight(self) -> Fraction:
        return sum((f.weight for f in self.factors), Fraction(0))

    def __mul__(self, other: Monomial) -> Monomial:
        return Monomial(self.scalar * other.scalar, _merge_factors([*self.factors, *other.factors]))


@dataclass(frozen=True)
class FormExpr:
    """Linear combination of monomials in scaled level-one generators, of one weight."""

    terms: tuple[Monomial, ...]
    weight: Fraction = field(init=False)

    def __post_init__(self) -> None:
        weights = {m.weight for m in self.terms}
        if len(weights) > 1:
            raise BadWeight(f"mixed weights {sorted(weights)} in one form")
        object.__setattr__(self, "weight", weights.pop() if weights else Fraction(0))

    @classmethod
    def monomial(cls, *factors: Factor, scalar: int | Fraction = 1) -> FormExpr:
        return cls((Monomial.of(*factors, scalar=scalar),))

    @classmethod
    def delta(cls, scale_: int = 1, exponent: int = 1) -> FormExpr:
        return cls.monomial(Factor(Generator.DELTA, scale_, exponent))

    @classmethod
    def eisenstein(cls, k: int, scale_: int = 1) -> FormExpr:
        if k < 4 or k % 2:
            raise BadWeight(f"Eisenstein series need even weight >= 4, got {k}")
        return cls.monomial(Factor(Generator.EISENSTEIN, scale_, 1, k))

    @classmethod
    def eta(cls, exponent: int, scale_: int = 1) -> FormExpr:
        return cls.monomial(Factor(Generator.ETA, scale_, exponent))

    def scaled(self, c: int | Fraction) -> FormExpr:
        return FormExpr(tuple(Monomial(m.scalar * c, m.factors) for m in self.terms))

    def __add__(self, other: FormExpr) -> FormExpr:
        return FormExpr(self.terms + other.terms)

    def __mul__(self, other: FormExpr) -> FormExpr:
        return FormExpr(tuple(a * b for a in self.terms for b in other.terms))

    def scales(self) -> set[int]:
        return {f.scale for m in self.terms for f in m.factors}


def _slash_monomial(m: Monomial, e: int, N: int) -> Monomial:
    prime_exponents: Counter[int] = Counter()
    factors: list[Factor] = []
    for f in m.factors:
        if N % f.scale:
            raise NotExactDivisor(f"scale {f.scale} does not divide the level {N}")
        target = star(f.scale, e)
        half = f.weight / 2
        for ell, mult in factorint(target).items():
            prime_exponents[ell] += mult * half
        for ell, mult in factorint(f.scale).items():
            prime_exponents[ell] -= mult * half
        factors.append(f.rescaled(target))

    scalar = m.scalar
    for ell, exponent in prime_exponents.items():
        exponent = Fraction(exponent)
        if exponent.denominator != 1:
            raise IrrationalScalar(f"slash by W_{e} needs {ell}^{exponent}")
        scalar *= Fraction(ell) ** int(exponent)
    return Monomial(scalar, _merge_factors(factors))


def slash_we(f: FormExpr, e: int, N: int) -> FormExpr:
    """Atkin–Lehner action of W_e on level N, factor by factor."""
    if not is_exact_divisor(e, N):
        raise NotExactDivisor(f"{e} is not an exact divisor of {N}")
    return FormExpr(tuple(_slash_monomial(m, e, N) for m in f.terms))


def expand_monomial(m: Monomial, high: int) -> LaurentSeries:
    """Expand one monomial on a window ending at ``high``."""
    eta_terms: list[tuple[int, int]] = []
    eis: list[Factor] = []
    for f in m.factors:
        if f.generator is Generator.ETA:
            eta_terms.append((f.scale, f.exponent))
        elif f.generator is Generator.DELTA:
            eta_terms.append((f.scale, 24 * f.exponent))
        else:
            eis.append(f)

    quotient = EtaQuotient(tuple(eta_terms))
    offset = quotient.offset
    if offset.denominator != 1:
        raise FractionalOffset(f"{format_eta_quotient(quotient)} has q-offset {offset}")
    low = int(offset)
    if low >= high:
        return LaurentSeries.zero(high, high - 1)

    series = expand_eta_quotient(quotient, high)
    length = high - low
    for f in eis:
        base = eisenstein(f.k, -(-length // f.scale) + 1)
        factor_series = power(v_m(base, f.scale).truncate(length), f.exponent)
        series = series * factor_series
    return scale(series, m.scalar)


def expand_form(f: FormExpr, high: int) -> LaurentSeries:
    """q-expansion of a FormExpr through q^(high−1)."""
    if not f.terms:
        return LaurentSeries.zero(high)
    total: LaurentSeries | None = None
    for m in f.terms:
        series = expand_monomial(m, high)
        total = series if total is None else total + series
    assert total is not None
    return total


# ============================================================
# Constructed forms
# ============================================================

@dataclass(frozen=True)
class DeltaQuotient:
    form: FormExpr
    form_wp: FormExpr
    weight: int
    level: int


def delta_quotient_form(gamma: str | GroupSymbol, p: int) -> DeltaQuotient:
    """g = ∏_{E ∈ AL(Γ)} (Δ(hτ)^p / Δ(phτ))|W_E, kept symbolic, with g|W_p."""
    gamma = parse_symbol(gamma)
    if not isprime(p):
        raise BadGroup(f"{p} is not prime")
    if gamma.n % p or (gamma.n // p) % p or gamma.h % p:
        raise BadGroup(f"{p} must exactly divide n and not divide h for {gamma}")
    N = gamma.level
    indices = sorted(al_set(gamma))
    if any(E % p == 0 for E in indices):
        raise BadGroup(f"{p} divides an Atkin-Lehner index of {gamma}")

    base = FormExpr.monomial(
        Factor(Generator.DELTA, gamma.h, p),
        Factor(Generator.DELTA, p * gamma.h, -1),
    )
    g: FormExpr | None = None
    for E in indices:
        piece = slash_we(base, E, N)
        g = piece if g is None else g * piece
    assert g is not None
    weight = 12 * len(indices) * (p - 1)
    return DeltaQuotient(g, slash_we(g, p, N), weight, N)


def delta_quotient_g(
    gamma: str | GroupSymbol, p: int, high: int
) -> tuple[LaurentSeries, int, LaurentSeries]:
    """Expanded g, its weight and g|W_p."""
    dq = delta_quotient_form(gamma, p)
    return expand_form(dq.form, high), dq.weight, expand_form(dq.form_wp, high)


def hat_f_form(gamma: str | GroupSymbol, p: int) -> FormExpr:
    """Σ_{E ∈ AL(Γ)} (E/p) · E_{p−1}(hτ)|W_E."""
    gamma = parse_symbol(gamma)
    if p < 5 or not isprime(p):
        raise BadGroup(f"need a prime p >= 5, got {p}")
    N = gamma.level
    if N % p == 0:
        raise BadGroup(f"{p} divides the level {N} of {gamma}")
    base = FormExpr.eisenstein(p - 1, gamma.h)
    total: FormExpr | None = None
    for E in sorted(al_set(gamma)):
        piece = slash_we(base, E, N).scaled(int(legendre_symbol(E % p, p)))
        total = piece if total is None else total + piece
    assert total is not None
    return total


def hat_f(gamma: str | GroupSymbol, p: int, high: int) -> LaurentSeries:
    return expand_form(hat_f_form(gamma, p), high)


def trace_down(f: LaurentSeries, f_slash_wp: LaurentSeries, k: int, p: int) -> LaurentSeries:
    """tr f = f + p^(1−k/2) (f|W_p)|U_p."""
    if k % 2:
        raise OddWeight(f"trace needs even weight, got {k}")
    factor = Fraction(p) ** (1 - k // 2)
    return f + scale(u_p(f_slash_wp, p), factor)


def sturm_bound(k: int, N: int) -> int:
    """⌊k·[SL₂(ℤ):Γ₀(N)]/12⌋."""
    return k * sturm_index(N) // 12


def clear_caches() -> None:
    _eta_memo.clear()


__all__ = [
    "DeltaQuotient",
    "EtaQuotient",
    "Factor",
    "FormExpr",
    "Generator",
    "Monomial",
    "clear_caches",
    "delta_function",
    "delta_quotient_form",
    "delta_quotient_g",
    "divisor_power_sums",
    "eisenstein",
    "eta_power",
    "expand_eta_quotient",
    "expand_form",
    "expand_monomial",
    "format_eta_quotient",
    "hat_f",
    "hat_f_form",
    "j_function",
    "parse_eta_quotient",
    "pentagonal_terms",
    "slash_we",
    "sturm_bound",
    "trace_down",
]
