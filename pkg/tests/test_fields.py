"""Exact finite-field arithmetic and polynomial factorization shapes."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lonesieve.errors import (
    DegreeOutOfRange,
    LeadingCoefficientVanishes,
    NonPrimeModulus,
)
from lonesieve.fields import (
    UnivariatePolynomial,
    _field_nocap,
    _pfind_root,
    _proots,
    factor_degree_profile,
    get_field,
    is_prime,
    legendre_symbol,
)

FIELDS = [(2, 1), (2, 3), (3, 2), (5, 1), (5, 2), (7, 1), (13, 1)]


def elements_of(p, k):
    K = _field_nocap(p, k)
    return K, st.integers(0, p**k - 1).map(K.decode)


@pytest.mark.parametrize("p,k", FIELDS)
@given(data=st.data())
def test_field_axioms(p, k, data):
    K, elts = elements_of(p, k)
    a = data.draw(elts)
    b = data.draw(elts)
    c = data.draw(elts)
    assert K.add(a, b) == K.add(b, a)
    assert K.mul(a, b) == K.mul(b, a)
    assert K.add(K.add(a, b), c) == K.add(a, K.add(b, c))
    assert K.mul(K.mul(a, b), c) == K.mul(a, K.mul(b, c))
    assert K.mul(a, K.add(b, c)) == K.add(K.mul(a, b), K.mul(a, c))
    assert K.add(a, K.neg(a)) == K.zero
    if not K.is_zero(a):
        assert K.mul(a, K.inv(a)) == K.one


@pytest.mark.parametrize("p,k", FIELDS)
@given(data=st.data())
def test_frobenius_is_additive_pth_power(p, k, data):
    K, elts = elements_of(p, k)
    a = data.draw(elts)
    b = data.draw(elts)
    assert K.frob(a) == K.pow_int(a, p)
    assert K.frob(K.add(a, b)) == K.add(K.frob(a), K.frob(b))
    # k-fold Frobenius is the identity
    x = a
    for _ in range(k):
        x = K.frob(x)
    assert x == a


@pytest.mark.parametrize("p,k", FIELDS)
def test_encode_decode_roundtrip(p, k):
    K = _field_nocap(p, k)
    for n in range(p**k):
        assert K.encode(K.decode(n)) == n


def test_multiplicative_group_order():
    K = _field_nocap(3, 3)
    q = 27
    for n in range(1, q):
        a = K.decode(n)
        assert K.pow_int(a, q - 1) == K.one


def test_get_field_rejects_bad_moduli():
    with pytest.raises(NonPrimeModulus):
        get_field(6)
    with pytest.raises(NonPrimeModulus):
        get_field(1)


def test_extension_degree_window():
    from lonesieve.fields import build_extension

    with pytest.raises(DegreeOutOfRange):
        build_extension(2, 0)


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13, 41, 167])
def test_root_finding_agrees_with_scan(p):
    """_proots against a full residue scan; _pfind_root on split inputs."""
    K = get_field(p)
    polys = [
        [1, 0, 1],
        [p - 1, 0, 0, 1],
        [10, p - 8, 0, 1],
        [2, 1],
    ]
    for coeffs in polys:
        def ev(t):
            acc = 0
            for c in reversed(coeffs):
                acc = (acc * t + c) % p
            return acc

        scan = sorted(t for t in range(p) if ev(t) == 0)
        lifted = [K.embed_base(c) for c in coeffs]
        mine = sorted(K.encode(r) for r in _proots(K, lifted))
        assert mine == scan
    # one-branch splitting on a polynomial built from its roots
    roots = [1 % p, 2 % p, (p - 1) % p]
    prod = [K.one]
    from lonesieve.fields import _pmul, _psub

    for r in set(roots):
        prod = _pmul(K, prod, _psub(K, [K.zero, K.one], [K.embed_base(r)]))
    found = K.encode(_pfind_root(K, prod))
    assert found in {r % p for r in roots}


@given(st.integers(3, 400).filter(is_prime), st.integers(-50, 50))
def test_legendre_symbol_matches_square_scan(p, a):
    squares = {(x * x) % p for x in range(1, p)}
    sym = legendre_symbol(a, p)
    if a % p == 0:
        assert sym == 0
    elif a % p in squares:
        assert sym == 1
    else:
        assert sym == -1


def test_is_prime_small_table():
    primes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47}
    for n in range(2, 50):
        assert is_prime(n) == (n in primes)
    assert not is_prime(1) and not is_prime(0) and not is_prime(-7)


def test_univariate_polynomial_shape():
    g = UnivariatePolynomial((10, -8, 0, 1))
    assert g.degree == 3 and g.is_monic
    assert UnivariatePolynomial((1, 2, 0, 0)).degree == 1
    assert UnivariatePolynomial(()).degree == -1


@pytest.mark.parametrize(
    "p,expected",
    [
        (3, (1, 2)),
        (41, (3,)),
        (167, (1, 1, 1)),
    ],
)
def test_factor_degree_profile_cubic(p, expected):
    g = UnivariatePolynomial((10, -8, 0, 1))
    profile = factor_degree_profile(g, p)
    assert tuple(sorted(profile.degrees)) == expected


def test_factor_degree_profile_leading_coefficient_guard():
    g = UnivariatePolynomial((1, 0, 0, 5))
    with pytest.raises(LeadingCoefficientVanishes):
        factor_degree_profile(g, 5)


@pytest.mark.parametrize("p", [5, 7, 11, 13, 17])
def test_profile_partitions_degree(p):
    g = UnivariatePolynomial((3, 1, 4, 1, 1))
    profile = factor_degree_profile(g, p)
    assert sum(profile.degrees) == 4
