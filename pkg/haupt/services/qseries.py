"""
Truncated Laurent series in q over exact rationals.

A series knows its lowest exponent ``low`` (coefficients below it are zero) and
an exclusive precision bound ``high`` (coefficients from ``high`` on are
unknown). Every operation returns the tightest window it can prove.

Features:
- Integer coefficients stay plain ints; Fractions only where needed
- Schoolbook product as the reference, Kronecker substitution on gmpy2 for speed
- Newton reciprocal and h-th roots
- U_p, V_m, p-adic valuations and residues
- Line-oriented text serialization
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from haupt.errors import EmptyWindow, FileError, Malformed, NonPIntegral, PrecisionExhausted, ZeroLeadingCoefficient
from haupt.utils.logger import get_logger


try:
    import gmpy2

    _MPZ = gmpy2.mpz
except ImportError:  # pragma: no cover - exercised only without gmpy2
    gmpy2 = None
    _MPZ = int

logger = get_logger("QSeries")

Coeff = int | Fraction
Scalar = int | Fraction


# ============================================================
# Coefficient helpers
# ============================================================

def _norm(c: Coeff) -> Coeff:
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


def _norm_all(values: Iterable[Coeff]) -> tuple[Coeff, ...]:
    out = tuple(values)
    if any(type(c) is Fraction for c in out):
        return tuple(_norm(c) for c in out)
    return out


def _max_coefficients() -> int:
    from haupt.config import get_settings

    return get_settings().series.max_coefficients


def _fast_threshold() -> int:
    from haupt.config import get_settings

    return get_settings().series.fast_mul_threshold


def require_coefficients(count: int) -> None:
    """Raise PrecisionExhausted when ``count`` exceeds the configured limit."""
    limit = _max_coefficients()
    if count > limit:
        raise PrecisionExhausted(count, limit)


# ============================================================
# Product kernels
# ============================================================

def mul_naive(a: Sequence[Coeff], b: Sequence[Coeff], n: int) -> list[Coeff]:
    """First ``n`` coefficients of the product of two power series (O(n^2))."""
    out: list[Coeff] = [0] * n
    b = b[:n]
    for i, ai in enumerate(a[:n]):
        if not ai:
            continue
        for j, bj in enumerate(b[: n - i]):
            if bj:
                out[i + j] += ai * bj
    return [_norm(c) for c in out]


def _pack(values: Sequence[int], width: int) -> int:
    pos = b"".join((v if v > 0 else 0).to_bytes(width, "little") for v in values)
    neg = b"".join((-v if v < 0 else 0).to_bytes(width, "little") for v in values)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def _kronecker(a: Sequence[int], b: Sequence[int], n: int) -> list[int]:
    a = list(a[:n])
    b = list(b[:n])
    ma = max((abs(v) for v in a), default=0)
    mb = max((abs(v) for v in b), default=0)
    if ma == 0 or mb == 0:
        return [0] * n

    # each product coefficient is bounded by min(len) * ma * mb < 2^(bits-1)
    bits = ma.bit_length() + mb.bit_length() + min(len(a), len(b)).bit_length() + 1
    width = bits // 8 + 1
    product = int(_MPZ(_pack(a, width)) * _MPZ(_pack(b, width)))

    slots = len(a) + len(b) - 1
    half = 1 << (8 * width - 1)
    bias = int.from_bytes((b"\x00" * (width - 1) + b"\x80") * slots, "little")
    raw = (product + bias).to_bytes(slots * width, "little")
    count = min(slots, n)
    out = [
        int.from_bytes(raw[i * width : (i + 1) * width], "little") - half
        for i in range(count)
    ]
    out.extend([0] * (n - count))
    return out


def _to_integers(values: Sequence[Coeff]) -> tuple[list[int], int]:
    den = 1
    for c in values:
        if type(c) is Fraction:
            den = math.lcm(den, c.denominator)
    if den == 1:
        return [int(c) for c in values], 1
    return [int(c * den) for c in values], den


def mul_fast(a: Sequence[Coeff], b: Sequence[Coeff], n: int) -> list[Coeff]:
    """Same result as :func:`mul_naive`, via Kronecker substitution."""
    ia, da = _to_integers(a[:n])
    ib, db = _to_integers(b[:n])
    out = _kronecker(ia, ib, n)
    den = da * db
    if den == 1:
        return list(out)
    return [_norm(Fraction(c, den)) for c in out]


def mul_truncated(a: Sequence[Coeff], b: Sequence[Coeff], n: int) -> list[Coeff]:
    """Dispatch between the reference and the fast product."""
    if min(len(a), len(b), n) < _fast_threshold():
        return mul_naive(a, b, n)
    return mul_fast(a, b, n)


def _recip_power_series(a: Sequence[Coeff], n: int) -> list[Coeff]:
    """First n coefficients of 1/A for A with a[0] != 0 (Newton iteration)."""
    inv0 = _norm(Fraction(1) / a[0]) if a[0] not in (1, -1) else a[0]
    y: list[Coeff] = [inv0]
    prec = 1
    while prec < n:
        prec = min(2 * prec, n)
        ay = mul_truncated(a[:prec], y, prec)
        # y <- y * (2 - a*y)
        corr = [-c for c in ay]
        corr[0] += 2
        y = mul_truncated(y, corr, prec)
    return [_norm(c) for c in y[:n]]


# ============================================================
# Series type
# ============================================================

class LaurentSeries:
    """Immutable truncated Laurent series ``sum a(n) q^n`` for low <= n < high."""

    __slots__ = ("coeffs", "low")

    def __init__(self, low: int, coeffs: Iterable[Coeff]):
        values = _norm_all(coeffs)
        if not values:
            raise EmptyWindow(f"series window starting at q^{low} is empty")
        self.low = low
        self.coeffs = values

    @classmethod
    def _trusted(cls, low: int, coeffs: tuple[Coeff, ...]) -> LaurentSeries:
        obj = cls.__new__(cls)
        obj.low = low
        obj.coeffs = coeffs
        return obj

    # ----- constructors -----

    @classmethod
    def zero(cls, high: int, low: int = 0) -> LaurentSeries:
        return cls(low, (0,) * (high - low))

    @classmethod
    def one(cls, high: int) -> LaurentSeries:
        return cls.monomial(0, 1, high)

    @classmethod
    def monomial(cls, exponent: int, coefficient: Scalar = 1, high: int | None = None) -> LaurentSeries:
        """``coefficient * q^exponent`` known through ``high - 1`` (default: one term)."""
        high = exponent + 1 if high is None else high
        return cls(exponent, [coefficient] + [0] * (high - exponent - 1))

    @classmethod
    def from_dict(cls, terms: Mapping[int, Scalar], high: int, low: int | None = None) -> LaurentSeries:
        low = min(terms, default=0) if low is None else low
        coeffs: list[Coeff] = [0] * (high - low)
        for exponent, value in terms.items():
            if exponent < low or exponent >= high:
                raise EmptyWindow(f"q^{exponent} lies outside [{low}, {high})")
            coeffs[exponent - low] = value
        return cls(low, coeffs)

    # ----- window -----

    @property
    def high(self) -> int:
        return self.low + len(self.coeffs)

    def __len__(self) -> int:
        return len(self.coeffs)

    def coefficient(self, exponent: int) -> Coeff:
        if exponent < self.low:
            return 0
        if exponent >= self.high:
            raise EmptyWindow(f"q^{exponent} is beyond the precision bound {self.high}")
        return self.coeffs[exponent - self.low]

    __getitem__ = coefficient

    def items(self) -> Iterable[tuple[int, Coeff]]:
        return ((self.low + i, c) for i, c in enumerate(self.coeffs))

    def support(self) -> list[int]:
        return [n for n, c in self.items() if c]

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def truncate(self, high: int) -> LaurentSeries:
        if high >= self.high:
            return self
        if high <= self.low:
            raise EmptyWindow(f"truncation to {high} leaves nothing of [{self.low}, {self.high})")
        return LaurentSeries._trusted(self.low, self.coeffs[: high - self.low])

    def _padded(self, low: int, high: int) -> list[Coeff]:
        """Coefficients on [low, high) with low <= self.low and high <= self.high; high may fall below self.low."""
        return ([0] * (self.low - low) + list(self.coeffs))[: high - low]

    def valuation(self) -> int | None:
        """Exponent of the first nonzero coefficient, or None."""
        for n, c in self.items():
            if c:
                return n
        return None

    def leading(self) -> LaurentSeries:
        """Drop leading zeros so that ``low`` is the first nonzero exponent."""
        first = self.valuation()
        if first is None or first == self.low:
            return self
        return LaurentSeries._trusted(first, self.coeffs[first - self.low :])

    # ----- constant term -----

    def constant_term(self) -> Coeff:
        return self.coefficient(0)

    def with_constant(self, value: Scalar) -> LaurentSeries:
        """Replace a(0); a no-op when q^0 lies above the window."""
        if self.high <= 0:
            return self
        if self.low > 0:
            return self + value
        coeffs = list(self.coeffs)
        coeffs[-self.low] = value
        return LaurentSeries(self.low, coeffs)

    # ----- arithmetic -----

    def __add__(self, other: LaurentSeries | Scalar) -> LaurentSeries:
        if isinstance(other, LaurentSeries):
            return add(self, other)
        return _add_constant(self, other)

    __radd__ = __add__

    def __neg__(self) -> LaurentSeries:
        return LaurentSeries._trusted(self.low, tuple(-c for c in self.coeffs))

    def __sub__(self, other: LaurentSeries | Scalar) -> LaurentSeries:
        return self + (-other)

    def __rsub__(self, other: Scalar) -> LaurentSeries:
        return (-self) + other

    def __mul__(self, other: LaurentSeries | Scalar) -> LaurentSeries:
        if isinstance(other, LaurentSeries):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other: LaurentSeries | Scalar) -> LaurentSeries:
        if isinstance(other, LaurentSeries):
            return mul(self, recip(other))
        return scale(self, Fraction(1) / other)

    def __pow__(self, k: int) -> LaurentSeries:
        return power(self, k)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, LaurentSeries):
            return equal_on_window(self, other)
        if isinstance(other, int | Fraction):
            return equal_on_window(self, _add_constant(LaurentSeries.zero(self.high, self.low), other))
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        terms = [f"{c}*q^{n}" for n, c in self.items() if c][:6]
        more = " + ..." if len(self.support()) > 6 else ""
        body = " + ".join(terms) or "0"
        return f"LaurentSeries({body}{more}, window=[{self.low}, {self.high}))"


@dataclass(frozen=True)
class ValuationP:
    """Window minimum of v_p over the coefficients (an upper bound on the true v_p)."""

    value: int | float
    window_high: int

    @property
    def infinite(self) -> bool:
        return self.value == math.inf

    def __str__(self) -> str:
        return "inf" if self.infinite else str(self.value)


# ============================================================
# Operations
# ============================================================

def _add_constant(a: LaurentSeries, c: Scalar) -> LaurentSeries:
    if not c or a.high <= 0:
        return a
    low = min(a.low, 0)
    coeffs = a._padded(low, a.high)
    coeffs[-low] += c
    return LaurentSeries(low, coeffs)


def add(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    """Coefficientwise sum on [min(low), min(high))."""
    low = min(a.low, b.low)
    high = min(a.high, b.high)
    if high <= low:
        raise EmptyWindow(f"no common window for [{a.low}, {a.high}) and [{b.low}, {b.high})")
    left = a._padded(low, high)
    right = b._padded(low, high)
    return LaurentSeries(low, [x + y for x, y in zip(left, right, strict=True)])


def sub(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    return add(a, -b)


def scale(a: LaurentSeries, c: Scalar) -> LaurentSeries:
    if c == 1:
        return a
    return LaurentSeries(a.low, [x * c for x in a.coeffs])


def shift(a: LaurentSeries, k: int) -> LaurentSeries:
    """Multiply by q^k."""
    return LaurentSeries._trusted(a.low + k, a.coeffs)


def mul(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    """Cauchy product; high = min(low_a + high_b, low_b + high_a)."""
    low = a.low + b.low
    n = min(len(a), len(b))
    coeffs = mul_truncated(a.coeffs, b.coeffs, n)
    return LaurentSeries._trusted(low, tuple(coeffs))


def recip(a: LaurentSeries) -> LaurentSeries:
    """Multiplicative inverse; the lowest coefficient must be nonzero."""
    if not a.coeffs[0]:
        raise ZeroLeadingCoefficient(f"coefficient of q^{a.low} is zero")
    coeffs = _recip_power_series(a.coeffs, len(a))
    return LaurentSeries._trusted(-a.low, tuple(coeffs))


def power(a: LaurentSeries, k: int) -> LaurentSeries:
    """a^k by repeated squaring; negative k goes through :func:`recip`."""
    if k < 0:
        return power(recip(a), -k)
    if k == 0:
        return LaurentSeries.one(len(a))
    result: LaurentSeries | None = None
    base = a
    while k:
        if k & 1:
            result = base if result is None else mul(result, base)
        k >>= 1
        if k:
            base = mul(base, base)
    assert result is not None
    return result


def nth_root(a: LaurentSeries, h: int) -> LaurentSeries:
    """The unique root with leading coefficient 1 of a = q^(h*m) (1 + ...).

    Newton iteration y <- y - (y^h - A) / (h y^(h-1)) on the unit part A.
    """
    if h == 1:
        return a
    if a.low % h or a.coeffs[0] != 1:
        raise Malformed(f"series starting {a.coeffs[0]}*q^{a.low} has no normalized {h}-th root")
    unit = shift(a, -a.low)
    n = len(unit)
    y = LaurentSeries.one(1)
    prec = 1
    while prec < n:
        prec = min(2 * prec, n)
        y = LaurentSeries(0, list(y.coeffs) + [0] * (prec - len(y)))
        target = unit.truncate(prec)
        residual = power(y, h) - target
        denom = recip(scale(power(y, h - 1), h))
        y = y - residual * denom
    return shift(y.truncate(n), a.low // h)


def u_p(f: LaurentSeries, p: int) -> LaurentSeries:
    """``sum a(pn) q^n`` on [ceil(low/p), floor((high-1)/p) + 1)."""
    low = -((-f.low) // p)
    high = (f.high - 1) // p + 1
    if high <= low:
        raise EmptyWindow(f"U_{p} of window [{f.low}, {f.high}) is empty")
    start = p * low - f.low
    coeffs = f.coeffs[start : start + p * (high - low) : p]
    return LaurentSeries._trusted(low, tuple(coeffs))


def u_p_iter(f: LaurentSeries, p: int, times: int) -> LaurentSeries:
    for _ in range(times):
        f = u_p(f, p)
    return f


def v_m(f: LaurentSeries, m: int) -> LaurentSeries:
    """``sum a(n) q^(mn)`` on [m*low, m*(high-1) + 1)."""
    if m < 1:
        raise Malformed(f"V_m needs m >= 1, got {m}")
    if m == 1:
        return f
    coeffs: list[Coeff] = [0] * (m * (len(f) - 1) + 1)
    coeffs[::m] = f.coeffs
    return LaurentSeries._trusted(m * f.low, tuple(coeffs))


def _vp_int(n: int, p: int) -> int:
    if gmpy2 is not None:
        return int(gmpy2.remove(_MPZ(n), p)[1])
    count = 0
    while n % p == 0:
        n //= p
        count += 1
    return count


def valuation_p(f: LaurentSeries, p: int) -> ValuationP:
    """Minimum p-adic valuation over the window; +inf for the zero series."""
    best: int | float = math.inf
    for i, c in enumerate(f.coeffs):
        if not c:
            continue
        if type(c) is Fraction:
            if c.denominator % p == 0:
                raise NonPIntegral(p, f.low + i)
            c = c.numerator
        if best == 0:
            continue
        # only coefficients not divisible by p^best can lower the minimum
        if best == math.inf or c % p ** int(best):
            best = min(best, _vp_int(abs(c), p))
    return ValuationP(best, f.high)


def reduce_mod(f: LaurentSeries, p: int, k: int = 1) -> LaurentSeries:
    """Canonical residues in [0, p^k) of p-integral coefficients."""
    modulus = p**k
    out: list[int] = []
    for i, c in enumerate(f.coeffs):
        if type(c) is Fraction:
            if c.denominator % p == 0:
                raise NonPIntegral(p, f.low + i)
            out.append(c.numerator * pow(c.denominator, -1, modulus) % modulus)
        else:
            out.append(c % modulus)
    return LaurentSeries._trusted(f.low, tuple(out))


def equal_on_window(a: LaurentSeries, b: LaurentSeries) -> bool:
    """Compare on the common provable window."""
    return first_difference(a, b) is None


def first_difference(a: LaurentSeries, b: LaurentSeries) -> int | None:
    """Lowest exponent in the common window where a and b differ."""
    low = min(a.low, b.low)
    high = min(a.high, b.high)
    if high <= low:
        raise EmptyWindow("series have no common window to compare on")
    for offset, (x, y) in enumerate(zip(a._padded(low, high), b._padded(low, high), strict=True)):
        if x != y:
            return low + offset
    return None


# ============================================================
# Serialization
# ============================================================

def format_series(f: LaurentSeries) -> str:
    """``# low=<int> high=<int>`` header, then ``exponent<TAB>value`` per nonzero term."""
    lines = [f"# low={f.low} high={f.high}"]
    lines.extend(f"{n}\t{c}" for n, c in f.items() if c)
    return "\n".join(lines) + "\n"


def parse_series(text: str) -> LaurentSeries:
    header: tuple[int, int] | None = None
    terms: dict[int, Fraction | int] = {}
    last = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].split()
            fields = dict(part.split("=", 1) for part in body if "=" in part)
            if "low" in fields and "high" in fields:
                try:
                    header = (int(fields["low"]), int(fields["high"]))
                except ValueError as exc:
                    raise Malformed(f"line {lineno}: bad window header") from exc
            continue
        try:
            exp_text, value_text = line.split("\t")
            exponent = int(exp_text)
            value = Fraction(value_text)
        except ValueError as exc:
            raise Malformed(f"line {lineno}: expected 'exponent<TAB>value'") from exc
        if last is not None and exponent <= last:
            raise Malformed(f"line {lineno}: exponents must increase")
        last = exponent
        terms[exponent] = value
    if header is None:
        raise Malformed("missing '# low=<int> high=<int>' header")
    low, high = header
    if any(n < low or n >= high for n in terms):
        raise Malformed("term outside the declared window")
    return LaurentSeries.from_dict(terms, high=high, low=low)


def load_series(path: Path) -> LaurentSeries:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileError(f"cannot read coefficient file {path}: {exc}") from exc
    series = parse_series(text)
    logger.debug("Loaded coefficient file", path=str(path), low=series.low, high=series.high)
    return series
