"""
n|h+e,... group symbols.

A symbol names the group Γ₀(n|h)+e₁,e₂,… : level N = nh, a 1/h translation,
and the Atkin–Lehner cosets w_e for exact divisors e of n/h.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import reduce

from sympy import factorint, primefactors

from haupt.errors import InvariantViolation, Malformed, NotExactDivisor


_SYMBOL = re.compile(r"^\s*(\d+)(?:\|(\d+))?(\+(\d+(?:,\d+)*)?)?\s*$")


def is_exact_divisor(e: int, n: int) -> bool:
    """e ∥ n: e divides n and gcd(e, n/e) = 1."""
    return e > 0 and n % e == 0 and math.gcd(e, n // e) == 1


def exact_divisors(n: int) -> list[int]:
    """All exact divisors of n, 1 and n included, ascending."""
    primes = factorint(n)
    out = [1]
    for prime, mult in primes.items():
        out += [d * prime**mult for d in out]
    return sorted(out)


def star(e1: int, e2: int) -> int:
    """e₁*e₂ = e₁e₂ / gcd(e₁, e₂)²."""
    g = math.gcd(e1, e2)
    return e1 * e2 // (g * g)


@dataclass(frozen=True)
class GroupSymbol:
    n: int
    h: int = 1
    fricke: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        if self.n < 1 or self.h < 1:
            raise InvariantViolation(f"n and h must be positive (got n={self.n}, h={self.h})")
        if math.gcd(self.n, 24) % self.h:
            raise InvariantViolation(f"h={self.h} does not divide gcd({self.n}, 24)")
        ratio = self.n // self.h
        for e in self.fricke:
            if e == 1 or not is_exact_divisor(e, ratio):
                raise InvariantViolation(f"{e} is not a nontrivial exact divisor of {ratio}")
        closed = self.fricke | {1}
        for a in closed:
            for b in closed:
                if star(a, b) not in closed:
                    raise InvariantViolation(
                        f"Atkin-Lehner set {sorted(self.fricke)} is not closed ({a}*{b} = {star(a, b)})"
                    )

    @property
    def level(self) -> int:
        """N = nh."""
        return self.n * self.h

    @property
    def ratio(self) -> int:
        return self.n // self.h

    def render(self) -> str:
        base = str(self.n) if self.h == 1 else f"{self.n}|{self.h}"
        if not self.fricke:
            return base
        full = set(exact_divisors(self.ratio)) - {1}
        if set(self.fricke) == full:
            return base + "+"
        return base + "+" + ",".join(str(e) for e in sorted(self.fricke))

    def __str__(self) -> str:
        return self.render()


def parse_symbol(text: str | GroupSymbol) -> GroupSymbol:
    """Parse ``n``, ``n|h``, ``n+``, ``n+e,f`` or ``n|h+e,...``."""
    if isinstance(text, GroupSymbol):
        return text
    match = _SYMBOL.match(text)
    if not match:
        raise Malformed(f"not a group symbol: {text!r}")
    n = int(match.group(1))
    h = int(match.group(2) or 1)
    if n < 1 or h < 1:
        raise Malformed(f"not a group symbol: {text!r}")
    fricke: set[int] = set()
    if match.group(3):
        if match.group(4):
            fricke = {int(e) for e in match.group(4).split(",")}
        else:
            if n % h:
                raise InvariantViolation(f"h={h} does not divide n={n}")
            fricke = set(exact_divisors(n // h)) - {1}
    if n % h:
        raise InvariantViolation(f"h={h} does not divide n={n}")
    return GroupSymbol(n, h, frozenset(fricke))


def canonical(text: str | GroupSymbol) -> str:
    return parse_symbol(text).render()


def power_group(gamma: str | GroupSymbol, d: int) -> GroupSymbol:
    """Γ^d: n' = n/gcd(n,d), h' = h/gcd(h,d), keep the e dividing n'/h'."""
    gamma = parse_symbol(gamma)
    n = gamma.n // math.gcd(gamma.n, d)
    h = gamma.h // math.gcd(gamma.h, d)
    ratio = n // h
    fricke = frozenset(e for e in gamma.fricke if is_exact_divisor(e, ratio) and e > 1)
    return GroupSymbol(n, h, fricke)


def adjoin_we(gamma: str | GroupSymbol, e: int) -> GroupSymbol:
    """⟨Γ, w_e⟩: close the Atkin–Lehner set under * after adding e."""
    gamma = parse_symbol(gamma)
    if e == 1:
        return gamma
    if not is_exact_divisor(e, gamma.ratio):
        raise NotExactDivisor(f"{e} does not exactly divide {gamma.ratio}")
    closure = set(gamma.fricke) | {e} | {star(x, e) for x in gamma.fricke}
    return GroupSymbol(gamma.n, gamma.h, frozenset(closure - {1}))


def al_index(e: int, h: int) -> int:
    """Atkin–Lehner index on Γ₀(nh) for w_e: E = e·h_e², h_e the h-part over primes of gcd(e, h)."""
    h_e = 1
    for prime in primefactors(math.gcd(e, h)):
        while h % (h_e * prime) == 0:
            h_e *= prime
    return e * h_e * h_e


def al_set(gamma: str | GroupSymbol) -> frozenset[int]:
    """AL(Γ) as indices E ∥ nh."""
    gamma = parse_symbol(gamma)
    return frozenset({1} | {al_index(e, gamma.h) for e in gamma.fricke})


def sturm_index(N: int) -> int:
    """[SL₂(ℤ) : Γ₀(N)] = N ∏_{ℓ|N} (1 + 1/ℓ)."""
    if N < 1:
        raise Malformed(f"level must be positive, got {N}")
    primes = primefactors(N)
    return N * reduce(lambda acc, ell: acc * (ell + 1), primes, 1) // math.prod(primes)
