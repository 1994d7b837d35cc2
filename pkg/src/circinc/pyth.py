"""Pythagorean triples: the three-family parametrisation, its inversion, and
solution counts for a^2 + b^2 = c^2 in a box."""
from __future__ import annotations

import csv
import enum
import math
from typing import NamedTuple

import numpy as np

from .errors import NotATriple, NotPrimitive

C_MAX_LIMIT = 1 << 20


class PythTriple(NamedTuple):
    a: int
    b: int
    c: int


class TripleFamily(enum.Enum):
    HALF_SQUARES = "HalfSquares"
    POWER_FIRST = "PowerFirst"
    POWER_SECOND = "PowerSecond"


class TripleRepresentation(NamedTuple):
    family: TripleFamily
    alpha: int
    beta: int
    j: int | None = None

    def triple(self) -> PythTriple:
        al, be, j = self.alpha, self.beta, self.j
        if self.family is TripleFamily.HALF_SQUARES:
            return PythTriple((al * al - be * be) // 2, al * be, (al * al + be * be) // 2)
        b = (1 << ((j + 2) // 2)) * al * be
        if self.family is TripleFamily.POWER_FIRST:
            return PythTriple((1 << j) * al * al - be * be, b, (1 << j) * al * al + be * be)
        return PythTriple(al * al - (1 << j) * be * be, b, al * al + (1 << j) * be * be)


def _odd_coprime_pairs(limit_a: int, limit_b: int):
    """All odd (alpha, beta) with alpha <= limit_a, beta <= limit_b, gcd 1, as arrays."""
    al = np.arange(1, limit_a + 1, 2, dtype=np.int64)
    be = np.arange(1, limit_b + 1, 2, dtype=np.int64)
    A, B = np.meshgrid(al, be, indexing="ij")
    A = A.ravel()
    B = B.ravel()
    keep = np.gcd(A, B) == 1
    return A[keep], B[keep]


def primitive_triples_array(c_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows (a, b, c, family, alpha, beta, j) for every primitive triple with
    b, c > 0 and c <= c_max, sorted by (c, b, a). ``family`` is 0/1/2 in the
    order of ``TripleFamily``; j is 0 for the half-squares family."""
    if c_max < 1:
        raise ValueError("c_max must be positive")
    if c_max > C_MAX_LIMIT:
        raise ValueError(f"c_max above {C_MAX_LIMIT} risks overflow")
    rows = []
    lim = math.isqrt(2 * c_max)
    A, B = _odd_coprime_pairs(lim, lim)
    c = (A * A + B * B) // 2
    m = c <= c_max
    A, B, c = A[m], B[m], c[m]
    rows.append(np.column_stack([(A * A - B * B) // 2, A * B, c, np.zeros_like(c), A, B, np.zeros_like(c)]))
    j = 2
    while (1 << j) + 1 <= c_max:
        p = 1 << j
        half = 1 << ((j + 2) // 2)
        # PowerFirst: 2^j alpha^2 + beta^2 <= c_max
        A, B = _odd_coprime_pairs(math.isqrt((c_max - 1) // p), math.isqrt(c_max - p))
        c = p * A * A + B * B
        m = c <= c_max
        A, B, c = A[m], B[m], c[m]
        rows.append(np.column_stack([p * A * A - B * B, half * A * B, c, np.ones_like(c), A, B, np.full_like(c, j)]))
        A, B = _odd_coprime_pairs(math.isqrt(c_max - p), math.isqrt((c_max - 1) // p))
        c = A * A + p * B * B
        m = c <= c_max
        A, B, c = A[m], B[m], c[m]
        rows.append(np.column_stack([A * A - p * B * B, half * A * B, c, np.full_like(c, 2), A, B, np.full_like(c, j)]))
        j += 2
    out = np.concatenate(rows).astype(np.int64)
    order = np.lexsort((out[:, 0], out[:, 1], out[:, 2]))
    out = out[order]
    if out.shape[0] > 1:
        dup = np.all(out[1:, :3] == out[:-1, :3], axis=1)
        assert not dup.any(), "parametrisation produced a triple twice"
    return out[:, :3], out[:, 3:]


def enumerate_primitive_triples(c_max: int) -> list[PythTriple]:
    triples, _ = primitive_triples_array(c_max)
    return [PythTriple(int(a), int(b), int(c)) for a, b, c in triples]


def write_triples_csv(c_max: int, fh) -> int:
    """Write every primitive triple with c <= c_max to the text stream ``fh``
    as rows a,b,c,family,alpha,beta,j (j empty for HalfSquares); returns the row count."""
    triples, reps = primitive_triples_array(c_max)
    names = [f.value for f in TripleFamily]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["a", "b", "c", "family", "alpha", "beta", "j"])
    for (a, b, c), (fam, al, be, j) in zip(triples.tolist(), reps.tolist()):
        w.writerow([a, b, c, names[fam], al, be, j if fam else ""])
    return len(triples)


def _v2(n: int) -> int:
    return (n & -n).bit_length() - 1


def represent_triple(t: PythTriple | tuple[int, int, int]) -> TripleRepresentation:
    a, b, c = (int(v) for v in t)
    if b <= 0 or c <= 0 or a * a + b * b != c * c:
        raise NotATriple(f"({a}, {b}, {c}) is not a triple with b, c > 0")
    if math.gcd(math.gcd(abs(a), b), c) != 1:
        raise NotPrimitive(f"({a}, {b}, {c}) is not primitive")
    if b % 2:
        al, be = math.isqrt(c + a), math.isqrt(c - a)
        rep = TripleRepresentation(TripleFamily.HALF_SQUARES, al, be)
    else:
        j = 2 * _v2(b) - 2
        if (a + c) % 4 == 0:
            al = math.isqrt((c + a) >> (j + 1))
            be = math.isqrt((c - a) // 2)
            rep = TripleRepresentation(TripleFamily.POWER_FIRST, al, be, j)
        else:
            al = math.isqrt((c + a) // 2)
            be = math.isqrt((c - a) >> (j + 1))
            rep = TripleRepresentation(TripleFamily.POWER_SECOND, al, be, j)
    if rep.triple() != (a, b, c):
        raise AssertionError(f"inversion failed for {(a, b, c)}")
    return rep


def _multiples(c: np.ndarray, N: int, c_min: int) -> np.ndarray:
    """Number of D >= 1 with c_min <= D*c <= N."""
    below = (max(c_min, 1) - 1) // c
    return np.maximum(N // c - below, 0)


def count_tangency_vectors(N: int, c_min: int = 0) -> int:
    """Integer solutions of a^2 + b^2 = c^2 with |a|, |b|, |c| <= N, c != 0 and
    |c| >= c_min, all signs counted.

    Each enumerated primitive triple (b > 0) stands for four signed solutions
    (signs of b and c; the sign of a is already part of the enumeration). The
    axis solutions (+-1, 0, +-1) add four more per scale.
    """
    if N < 1 or not 0 <= c_min <= N:
        raise ValueError("need N >= 1 and 0 <= c_min <= N")
    triples, _ = primitive_triples_array(N)
    ones = np.array([1], np.int64)
    return int(4 * _multiples(triples[:, 2], N, c_min).sum() + 4 * _multiples(ones, N, c_min).sum())


def tangency_vectors(N: int, c_min: int = 1, c_max: int | None = None) -> np.ndarray:
    """Explicit (a, b, c) rows of the solutions counted by ``count_tangency_vectors``
    (with |c| <= c_max, default N), sorted lexicographically."""
    c_max = N if c_max is None else min(c_max, N)
    if c_max < 1:
        return np.empty((0, 3), np.int64)
    triples, _ = primitive_triples_array(c_max)
    prim = np.vstack([triples, [[1, 0, 1]]])
    out = []
    for a, b, c in prim:
        D = np.arange(max(1, -(-c_min // c)), c_max // c + 1, dtype=np.int64)
        if D.size == 0:
            continue
        for sb in ((1, -1) if b else (1,)):
            for sc in (1, -1):
                if b:
                    out.append(np.column_stack([D * a, D * sb * b, D * sc * c]))
                else:
                    # axis solutions: both signs of a
                    out.append(np.column_stack([D * a, np.zeros_like(D), D * sc * c]))
                    out.append(np.column_stack([-D * a, np.zeros_like(D), D * sc * c]))
    v = np.concatenate(out) if out else np.empty((0, 3), np.int64)
    return v[np.lexsort((v[:, 2], v[:, 1], v[:, 0]))]


def count_tangency_vectors_bruteforce(N: int, c_min: int = 0) -> int:
    """Exhaustive O(N^2) oracle over (a, b)."""
    a = np.arange(-N, N + 1, dtype=np.int64)
    s = a[:, None] ** 2 + a[None, :] ** 2
    c = np.sqrt(s).astype(np.int64)
    c += (c + 1) ** 2 <= s
    c -= c * c > s
    ok = (c * c == s) & (c >= max(c_min, 1)) & (c <= N)
    return 2 * int(ok.sum())


def primitive_triples_bruteforce(c_max: int) -> set[tuple[int, int, int]]:
    """Exhaustive oracle: all (a, b, c), b > 0, c <= c_max, gcd 1."""
    out = set()
    a = np.arange(-c_max, c_max + 1, dtype=np.int64)
    for b in range(1, c_max + 1):
        s = a * a + b * b
        c = np.sqrt(s).astype(np.int64)
        c += (c + 1) ** 2 <= s
        c -= c * c > s
        ok = (c * c == s) & (c <= c_max)
        aa, cc = a[ok], c[ok]
        g = np.gcd(np.gcd(np.abs(aa), b), cc)
        out.update((int(x), b, int(z)) for x, z in zip(aa[g == 1], cc[g == 1]))
    return out


def _mobius(n: int) -> np.ndarray:
    mu = np.ones(n + 1, np.int64)
    is_comp = np.zeros(n + 1, bool)
    for p in range(2, n + 1):
        if is_comp[p]:
            continue
        is_comp[2 * p::p] = True
        mu[p::p] *= -1
        mu[p * p::p * p] = 0
    mu[0] = 0
    return mu


def coprime_odd_pairs(M: int) -> int:
    """Pairs (n, m) in [1, M]^2, both odd, with gcd 1 (Moebius inversion over odd d)."""
    if M < 1:
        raise ValueError("M must be positive")
    mu = _mobius(M)
    d = np.arange(1, M + 1, 2)
    odd_mult = (M // d + 1) // 2
    return int((mu[d] * odd_mult * odd_mult).sum())


def coprime_odd_pairs_bruteforce(M: int) -> int:
    odd = np.arange(1, M + 1, 2)
    return int((np.gcd(odd[:, None], odd[None, :]) == 1).sum())
