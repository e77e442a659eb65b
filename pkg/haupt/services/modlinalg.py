"""
Linear systems over ℤ/q^r.

ℤ/q^r is a local ring: every nonzero entry is q^v times a unit. Elimination
pivots on an entry of least q-valuation (a unit whenever one exists), clears
its row and column, and records column operations so the solution of the
diagonal system can be mapped back.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass


def _valuation(x: int, q: int, r: int) -> int:
    """v_q of a residue mod q^r; r for zero."""
    if x == 0:
        return r
    v = 0
    while x % q == 0:
        x //= q
        v += 1
    return v


@dataclass(frozen=True)
class ModularSolution:
    feasible: bool
    x: tuple[int, ...] | None = None
    rank: int = 0


def solve_mod_prime_power(
    matrix: Sequence[Sequence[int]],
    rhs: Sequence[int],
    q: int,
    r: int,
    ncols: int | None = None,
) -> ModularSolution:
    """Find x with matrix·x ≡ rhs (mod q^r), free variables set to 0."""
    modulus = q**r
    rows = len(matrix)
    cols = ncols if ncols is not None else (len(matrix[0]) if rows else 0)
    if len(rhs) != rows:
        raise ValueError(f"{rows} rows but {len(rhs)} right-hand sides")
    a = [[int(v) % modulus for v in row] for row in matrix]
    b = [int(v) % modulus for v in rhs]
    # column operations: x = V y
    vmat = [[int(i == j) for j in range(cols)] for i in range(cols)]

    rank = 0
    for t in range(min(rows, cols)):
        best: tuple[int, int, int] | None = None
        for i in range(t, rows):
            for j in range(t, cols):
                if a[i][j]:
                    v = _valuation(a[i][j], q, r)
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        v, pi, pj = best
        a[t], a[pi] = a[pi], a[t]
        b[t], b[pi] = b[pi], b[t]
        if pj != t:
            for row in a:
                row[t], row[pj] = row[pj], row[t]
            for row in vmat:
                row[t], row[pj] = row[pj], row[t]

        qv = q**v
        unit_inv = pow(a[t][t] // qv, -1, modulus)
        # rows below: entries are multiples of q^v
        for i in range(t + 1, rows):
            if a[i][t]:
                factor = (a[i][t] // qv) * unit_inv % modulus
                a[i] = [(x - factor * y) % modulus for x, y in zip(a[i], a[t], strict=True)]
                b[i] = (b[i] - factor * b[t]) % modulus
        # columns to the right
        for j in range(t + 1, cols):
            if a[t][j]:
                factor = (a[t][j] // qv) * unit_inv % modulus
                for row in a:
                    row[j] = (row[j] - factor * row[t]) % modulus
                for row in vmat:
                    row[j] = (row[j] - factor * row[t]) % modulus
        rank = t + 1

    y = [0] * cols
    for t in range(rank):
        d = a[t][t]
        v = _valuation(d, q, r)
        if b[t] % q**v:
            return ModularSolution(False, None, rank)
        qv = q**v
        y[t] = (b[t] // qv) * pow(d // qv, -1, modulus) % modulus
    for i in range(rank, rows):
        if b[i]:
            return ModularSolution(False, None, rank)

    x = tuple(sum(vmat[i][j] * y[j] for j in range(cols)) % modulus for i in range(cols))
    return ModularSolution(True, x, rank)
