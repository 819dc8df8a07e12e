import pytest
from hypothesis import given, strategies as st

from evildet.numtheory import OddPrime, is_prime, jacobi, legendre, primes_in_class, sieve
from oracles import legendre_by_squares, trial_division_is_prime

SMALL_ODD_PRIMES = [q for q in range(3, 102) if trial_division_is_prime(q)]


@pytest.mark.parametrize("m, expected", [(5, True), (1, False), (561, False), (0, False), (2, True)])
def test_is_prime_examples(m, expected):
    assert is_prime(m) is expected


def test_is_prime_matches_trial_division():
    assert [m for m in range(20000) if is_prime(m)] == [
        m for m in range(20000) if trial_division_is_prime(m)
    ]


@pytest.mark.parametrize("m", [2047, 1373653, 25326001, 3215031751, 2152302898747,
                               3474749660383, 341550071728321, 3825123056546413051])
def test_is_prime_rejects_strong_pseudoprimes(m):
    # each is a strong pseudoprime to the first few bases
    assert not is_prime(m)


@pytest.mark.parametrize("m", [2**31 - 1, 2**61 - 1, 18446744073709551557])
def test_is_prime_large_known_primes(m):
    assert is_prime(m)


def test_is_prime_rejects_out_of_range():
    with pytest.raises(ValueError):
        is_prime(2**64)
    with pytest.raises(ValueError):
        is_prime(-3)


@pytest.mark.parametrize("k, p, expected", [(0, 5, 0), (2, 5, -1), (-1, 13, 1), (-1, 7, -1), (10, 5, 0)])
def test_legendre_examples(k, p, expected):
    assert legendre(k, p) == expected


@pytest.mark.parametrize("p", SMALL_ODD_PRIMES)
def test_legendre_matches_squares_and_euler(p):
    for k in range(-2 * p, 2 * p):
        expected = legendre_by_squares(k, p)
        assert legendre(k, p) == expected
        euler = pow(k % p, (p - 1) // 2, p)
        assert expected == (0 if k % p == 0 else (1 if euler == 1 else -1))


@pytest.mark.parametrize("p", SMALL_ODD_PRIMES)
def test_legendre_completely_multiplicative(p):
    for k in range(p):
        for m in range(p):
            assert legendre(k, p) * legendre(m, p) == legendre(k * m, p)


@pytest.mark.parametrize("p", [q for q in SMALL_ODD_PRIMES if q % 4 == 1])
def test_even_character_and_balanced_half(p):
    n = (p - 1) // 2
    assert all(legendre(-k, p) == legendre(k, p) for k in range(-p, p))
    values = [legendre(k, p) for k in range(1, n + 1)]
    assert values.count(1) == values.count(-1) == (p - 1) // 4


@given(st.integers(-10**6, 10**6), st.integers(1, 5000).map(lambda x: 2 * x + 1))
def test_jacobi_multiplicative_in_modulus(k, m):
    # (k/m1 m2) = (k/m1)(k/m2) for odd moduli
    assert jacobi(k, m) * jacobi(k, 3) == jacobi(k, 3 * m)


def test_jacobi_rejects_even_modulus():
    with pytest.raises(ValueError):
        jacobi(3, 8)


@pytest.mark.parametrize("bound, residue, modulus, expected", [
    (30, 1, 4, [5, 13, 17, 29]),
    (30, 3, 4, [3, 7, 11, 19, 23]),
    (4, 1, 4, []),
])
def test_primes_in_class_examples(bound, residue, modulus, expected):
    out = primes_in_class(bound, residue, modulus)
    assert out == expected
    assert all(isinstance(q, OddPrime) for q in out)


def test_primes_in_class_rejects_bad_residue():
    with pytest.raises(ValueError):
        primes_in_class(30, 4, 4)


def test_primes_in_class_counts():
    assert len(primes_in_class(100, 1, 4)) + len(primes_in_class(100, 3, 4)) == 24
    assert sieve(100) == [q for q in range(101) if trial_division_is_prime(q)]


class TestOddPrime:
    def test_accessors(self):
        p = OddPrime(13)
        assert p == 13 and p.value == 13 and p.n == 6
        assert (p.mod4, p.mod8, p.mod16) == (1, 5, 13)

    @given(st.sampled_from(SMALL_ODD_PRIMES))
    def test_residues_consistent(self, q):
        p = OddPrime(q)
        assert p.mod16 % 8 == p.mod8 and p.mod8 % 4 == p.mod4 and p.value % 16 == p.mod16

    @pytest.mark.parametrize("bad", [2, 1, 15, 0, -7])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            OddPrime(bad)

    def test_rejects_non_int(self):
        with pytest.raises(TypeError):
            OddPrime(5.0)
        with pytest.raises(TypeError):
            OddPrime(True)
