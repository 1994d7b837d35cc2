import io
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from circinc.errors import NotATriple, NotPrimitive
from circinc.pyth import (PythTriple, TripleFamily, coprime_odd_pairs, coprime_odd_pairs_bruteforce,
                          count_tangency_vectors, count_tangency_vectors_bruteforce, enumerate_primitive_triples,
                          primitive_triples_array, primitive_triples_bruteforce, represent_triple,
                          tangency_vectors, write_triples_csv)


def test_enumerate_small():
    assert set(enumerate_primitive_triples(5)) == {(0, 1, 1), (-4, 3, 5), (-3, 4, 5), (3, 4, 5), (4, 3, 5)}
    assert enumerate_primitive_triples(1) == [PythTriple(0, 1, 1)]


def test_enumerate_sorted_by_c_b_a():
    out = enumerate_primitive_triples(300)
    keys = [(t.c, t.b, t.a) for t in out]
    assert keys == sorted(keys)
    assert len(set(out)) == len(out)


@pytest.mark.parametrize("c_max", [1, 2, 25, 1000])
def test_enumerate_matches_exhaustive(c_max):
    assert set(enumerate_primitive_triples(c_max)) == primitive_triples_bruteforce(c_max)


def test_enumerate_rejects_bad_bounds():
    with pytest.raises(ValueError):
        enumerate_primitive_triples(0)
    with pytest.raises(ValueError):
        primitive_triples_array((1 << 20) + 1)


@pytest.mark.parametrize("t, family, alpha, beta, j", [
    ((4, 3, 5), TripleFamily.HALF_SQUARES, 3, 1, None),
    ((3, 4, 5), TripleFamily.POWER_FIRST, 1, 1, 2),
    ((0, 1, 1), TripleFamily.HALF_SQUARES, 1, 1, None),
    ((-3, 4, 5), TripleFamily.POWER_SECOND, 1, 1, 2),
])
def test_represent_examples(t, family, alpha, beta, j):
    rep = represent_triple(t)
    assert (rep.family, rep.alpha, rep.beta, rep.j) == (family, alpha, beta, j)


def test_represent_errors():
    with pytest.raises(NotATriple):
        represent_triple((1, 2, 3))
    with pytest.raises(NotATriple):
        represent_triple((3, -4, 5))
    with pytest.raises(NotPrimitive):
        represent_triple((6, 8, 10))


def test_round_trip_and_uniqueness_up_to_2000():
    triples, reps = primitive_triples_array(2000)
    seen = set()
    for (a, b, c), (fam, al, be, j) in zip(triples.tolist(), reps.tolist()):
        rep = represent_triple((a, b, c))
        assert rep.triple() == (a, b, c)
        assert (list(TripleFamily).index(rep.family), rep.alpha, rep.beta, rep.j or 0) == (fam, al, be, j)
        assert al % 2 == 1 and be % 2 == 1 and math.gcd(al, be) == 1
        assert (fam, al, be, j) not in seen
        seen.add((fam, al, be, j))


@given(st.integers(1, 200), st.integers(1, 200))
def test_represent_accepts_generated_triples(m, n):
    # Euclid's formula, reduced to a primitive triple
    if m == n:
        return
    a, b, c = m * m - n * n, 2 * m * n, m * m + n * n
    g = math.gcd(math.gcd(abs(a), b), c)
    t = (a // g, b // g, c // g)
    assert represent_triple(t).triple() == t
    if t[0]:
        swapped = (t[1], abs(t[0]), t[2])
        assert represent_triple(swapped).triple() == swapped


@pytest.mark.parametrize("N, c_min, expected", [(1, 0, 8), (5, 0, 56), (5, 3, 40)])
def test_count_examples(N, c_min, expected):
    assert count_tangency_vectors(N, c_min) == expected
    assert count_tangency_vectors_bruteforce(N, c_min) == expected


@pytest.mark.parametrize("N", [2, 3, 17, 64, 150, 300])
@pytest.mark.parametrize("frac", [0, 0.5, 1])
def test_count_matches_bruteforce(N, frac):
    c_min = int(N * frac)
    assert count_tangency_vectors(N, c_min) == count_tangency_vectors_bruteforce(N, c_min)


def test_count_rejects_bad_range():
    with pytest.raises(ValueError):
        count_tangency_vectors(5, 6)
    with pytest.raises(ValueError):
        count_tangency_vectors(0)


def test_tangency_vectors_listing_agrees_with_count():
    for N in (5, 30):
        v = tangency_vectors(N)
        assert len(v) == count_tangency_vectors(N, 1)
        assert ((v[:, 0] ** 2 + v[:, 1] ** 2) == v[:, 2] ** 2).all()
        assert len({tuple(r) for r in v.tolist()}) == len(v)


def test_restricted_count_is_linear():
    # at least k2' N solutions with |c| >= N/2; frozen k2' = 1
    for k in range(8, 15):
        N = 2 ** k
        assert count_tangency_vectors(N, N // 2) >= N


@pytest.mark.parametrize("M, expected", [(1, 1), (5, 7)])
def test_coprime_examples(M, expected):
    assert coprime_odd_pairs(M) == expected


@pytest.mark.parametrize("M", [2, 8, 31, 100, 257])
def test_coprime_matches_scan(M):
    assert coprime_odd_pairs(M) == coprime_odd_pairs_bruteforce(M)


def test_coprime_density():
    assert 0.15 <= coprime_odd_pairs(100) / 100 ** 2 <= 0.25
    # frozen lower constant c = 0.18 for M >= 8 (limit 2/pi^2 ~ 0.2026)
    for M in (8, 9, 16, 50, 200, 1000):
        assert coprime_odd_pairs(M) >= 0.18 * M * M


def test_triples_csv_export():
    buf = io.StringIO()
    assert write_triples_csv(5, buf) == 5
    lines = buf.getvalue().splitlines()
    assert lines[0] == "a,b,c,family,alpha,beta,j"
    assert "3,4,5,PowerFirst,1,1,2" in lines
    assert "4,3,5,HalfSquares,3,1," in lines
