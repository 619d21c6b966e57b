"""Exact arithmetic in small prime fields and their canonical extensions.

Elements of GF(p^k) are represented by tuples of k integers in 0..p-1,
listing the coefficients of the residue polynomial in ascending degree:
(c0, c1, ..., c_{k-1}) stands for c0 + c1*x + ... modulo the defining
polynomial.  The defining polynomial of GF(p^k) is always the
lexicographically smallest monic irreducible of degree k over GF(p),
where candidates are compared coefficient-by-coefficient from the
highest degree down and coefficients use representatives 0..p-1.  This
pins a single canonical model per (p, k), so equal field parameters give
interchangeable elements.

Two layers coexist on purpose.  The tuple layer (methods add/mul/inv/...
on the field objects, and the _p* polynomial helpers) is what the
geometry and sieve modules drive in their inner loops.  The FieldElement
and UnivariatePolynomial wrapper classes give the same arithmetic an
operator-overloaded surface for interactive use and for the public API.

Characteristic is capped at p < 2**20 and extension degree at k <= 6;
nothing here is meant for cryptographic sizes.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from math import isqrt

from .errors import (
    DegreeOutOfRange,
    EvenPrime,
    LeadingCoefficientVanishes,
    NonPrimeModulus,
)

P_CAP = 1 << 20
K_CAP = 6


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7):
        if n % q == 0:
            return n == q
    d = 11
    while d <= isqrt(n):
        if n % d == 0:
            return False
        d += 2
    return True


def _check_characteristic(p: int) -> None:
    if not isinstance(p, int) or not is_prime(p):
        raise NonPrimeModulus(f"characteristic {p!r} is not prime")
    if p >= P_CAP:
        raise DegreeOutOfRange(f"characteristic {p} exceeds the 2**20 cap")


class FiniteField:
    """Shared implementation of GF(p^k) on coefficient tuples."""

    def __init__(self, p: int, k: int, modulus: tuple[int, ...]):
        self.p = p
        self.k = k
        self.modulus = modulus          # ascending, length k+1, monic
        self.order = p ** k
        self.zero = (0,) * k
        self.one = (1,) + (0,) * (k - 1)
        # x^(k+j) mod modulus for j = 0..k-2, used to fold products down
        self._fold = []
        if k > 1:
            row = tuple((-modulus[i]) % p for i in range(k))
            self._fold.append(row)
            for _ in range(k - 2):
                row = self._shift_reduce(row)
                self._fold.append(row)

    def _shift_reduce(self, row: tuple[int, ...]) -> tuple[int, ...]:
        p, k = self.p, self.k
        top = row[k - 1]
        shifted = (0,) + row[: k - 1]
        head = self._fold[0]
        return tuple((shifted[i] + top * head[i]) % p for i in range(k))

    # ------------------------------------------------------------ element ops

    def add(self, a, b):
        p = self.p
        if self.k == 1:
            return ((a[0] + b[0]) % p,)
        return tuple((x + y) % p for x, y in zip(a, b))

    def sub(self, a, b):
        p = self.p
        if self.k == 1:
            return ((a[0] - b[0]) % p,)
        return tuple((x - y) % p for x, y in zip(a, b))

    def neg(self, a):
        p = self.p
        return tuple((-x) % p for x in a)

    def mul(self, a, b):
        p, k = self.p, self.k
        if k == 1:
            return ((a[0] * b[0]) % p,)
        if k == 2:
            m1, m0 = self.modulus[1], self.modulus[0]
            hi = a[1] * b[1]
            return (
                (a[0] * b[0] - hi * m0) % p,
                (a[0] * b[1] + a[1] * b[0] - hi * m1) % p,
            )
        conv = [0] * (2 * k - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    conv[i + j] += ai * bj
        out = [c % p for c in conv[:k]]
        for j in range(2 * k - 2, k - 1, -1):
            top = conv[j] % p
            if top:
                fold = self._fold[j - k]
                for i in range(k):
                    out[i] = (out[i] + top * fold[i]) % p
        return tuple(out)

    def scalar_mul(self, c: int, a):
        p = self.p
        c %= p
        return tuple((c * x) % p for x in a)

    def inv(self, a):
        p, k = self.p, self.k
        if k == 1:
            if a[0] == 0:
                raise ZeroDivisionError("inverse of zero")
            return (pow(a[0], -1, p),)
        # extended Euclid on the residue polynomial and the modulus
        r0 = list(self.modulus)
        r1 = [c for c in a]
        while r1 and r1[-1] == 0:
            r1.pop()
        if not r1:
            raise ZeroDivisionError("inverse of zero")
        s0, s1 = [0], [1]
        while len(r1) > 1:
            q, r = _int_poly_divmod(r0, r1, p)
            while r and r[-1] == 0:
                r.pop()
            r0, r1 = r1, r
            s0, s1 = s1, _int_poly_sub(s0, _int_poly_mul(q, s1, p), p)
        c = pow(r1[0], -1, p)
        s1 = [(c * x) % p for x in s1]
        s1 += [0] * (k - len(s1))
        return tuple(s1[:k])

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow_int(self, a, e: int):
        if e < 0:
            a, e = self.inv(a), -e
        out = self.one
        base = a
        while e:
            if e & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            e >>= 1
        return out

    def frob(self, a):
        """The p-power Frobenius, an automorphism fixing the prime field."""
        return self.pow_int(a, self.p)

    def embed_base(self, c: int):
        return ((c % self.p,) + (0,) * (self.k - 1))

    def encode(self, a) -> int:
        n = 0
        for c in reversed(a):
            n = n * self.p + c
        return n

    def decode(self, n: int):
        out = []
        for _ in range(self.k):
            out.append(n % self.p)
            n //= self.p
        return tuple(out)

    def elements(self):
        """All field elements in ascending encode() order."""
        for n in range(self.order):
            yield self.decode(n)

    def is_zero(self, a) -> bool:
        return not any(a)

    def element(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            if value.field is not self:
                raise TypeError("element of a different field")
            return value
        if isinstance(value, int):
            return FieldElement(self, self.embed_base(value))
        coeffs = tuple(int(c) % self.p for c in value)
        if len(coeffs) > self.k:
            raise ValueError("too many coefficients for this field")
        coeffs += (0,) * (self.k - len(coeffs))
        return FieldElement(self, coeffs)

    def __eq__(self, other):
        return (
            isinstance(other, FiniteField)
            and self.p == other.p
            and self.k == other.k
        )

    def __hash__(self):
        return hash((self.p, self.k))

    def __repr__(self):
        if self.k == 1:
            return f"GF({self.p})"
        return f"GF({self.p}^{self.k})"


class PrimeField(FiniteField):
    """GF(p) for a verified prime p < 2**20."""

    def __init__(self, p: int):
        _check_characteristic(p)
        super().__init__(p, 1, (0, 1))


class ExtensionField(FiniteField):
    """GF(p^k) built on the canonical lexicographically smallest modulus."""

    def __init__(self, p: int, k: int, modulus: tuple[int, ...]):
        super().__init__(p, k, modulus)

    @property
    def modulus_polynomial(self) -> "UnivariatePolynomial":
        return UnivariatePolynomial(self.modulus)


class FieldElement:
    """A single element of a FiniteField, with operator sugar."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: FiniteField, coeffs: tuple[int, ...]):
        self.field = field
        self.coeffs = coeffs

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise TypeError("mixed-field arithmetic")
            return other.coeffs
        if isinstance(other, int):
            return self.field.embed_base(other)
        return NotImplemented

    def __add__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.add(self.coeffs, c))

    __radd__ = __add__

    def __sub__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.sub(self.coeffs, c))

    def __rsub__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.sub(c, self.coeffs))

    def __mul__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.mul(self.coeffs, c))

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.div(self.coeffs, c))

    def __rtruediv__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.div(c, self.coeffs))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.coeffs))

    def __pow__(self, e: int):
        return FieldElement(self.field, self.field.pow_int(self.coeffs, e))

    def __eq__(self, other):
        if isinstance(other, int):
            return self.coeffs == self.field.embed_base(other)
        return (
            isinstance(other, FieldElement)
            and self.field == other.field
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.field.p, self.field.k, self.coeffs))

    def __bool__(self):
        return any(self.coeffs)

    def __int__(self):
        return self.field.encode(self.coeffs)

    def __repr__(self):
        return f"{self.field!r}({list(self.coeffs)})"


@lru_cache(maxsize=None)
def get_field(p: int, k: int = 1) -> FiniteField:
    """Cached canonical field objects; (p, 1) is a PrimeField."""
    if k == 1:
        return PrimeField(p)
    return build_extension(p, k)


def build_extension(p: int, k: int) -> ExtensionField:
    """GF(p^k) with the lexicographically smallest monic irreducible modulus.

    Candidate moduli are ordered by comparing coefficients from degree
    k-1 down to the constant term, each in 0..p-1.
    """
    _check_characteristic(p)
    if not 1 <= k <= K_CAP:
        raise DegreeOutOfRange(f"extension degree {k} outside 1..{K_CAP}")
    return _extension_nocap(p, k)


@lru_cache(maxsize=None)
def _extension_nocap(p: int, k: int) -> ExtensionField:
    # Intersection points can live in GF(p^e) for e well past the public
    # cap; the geometry layer builds those fields through here.
    for idx in range(p ** k):
        # base-p digits of idx, least significant first: digit j is the
        # coefficient of x^j, so higher-degree coefficients advance more
        # slowly and the scan realizes the high-degree-first ordering.
        digits = []
        n = idx
        for _ in range(k):
            digits.append(n % p)
            n //= p
        coeffs = tuple(digits) + (1,)
        if _is_irreducible(coeffs, p):
            return ExtensionField(p, k, coeffs)
    raise AssertionError("no irreducible of the requested degree")


def _field_nocap(p: int, k: int) -> FiniteField:
    if k == 1:
        return get_field(p)
    return _extension_nocap(p, k)


def _is_irreducible(coeffs: tuple[int, ...], p: int) -> bool:
    k = len(coeffs) - 1
    if k == 1:
        return True
    F = get_field(p, 1)
    f = [(c,) for c in coeffs]
    x = [F.zero, F.one]
    # x^(p^k) must equal x, and x^(p^(k/q)) - x must be coprime to f
    # for every prime divisor q of k.
    xp = _ppowmod(F, x, p ** k, f)
    if _ptrim(_psub(F, xp, x)) != []:
        return False
    for q in _prime_divisors(k):
        xq = _ppowmod(F, x, p ** (k // q), f)
        g = _pgcd(F, _psub(F, xq, x), f)
        if _pdeg(g) != 0:
            return False
    return True


def _prime_divisors(n: int):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def frobenius(x: FieldElement) -> FieldElement:
    """x -> x^p, the arithmetic Frobenius of the ambient field."""
    return FieldElement(x.field, x.field.frob(x.coeffs))


def legendre_symbol(a: int, p: int) -> int:
    """Quadratic-residue symbol (a/p) in {-1, 0, 1} by Euler's criterion."""
    if p == 2:
        raise EvenPrime("Legendre symbol needs an odd prime")
    if not is_prime(p):
        raise NonPrimeModulus(f"{p} is not prime")
    e = pow(a % p, (p - 1) // 2, p)
    if e == 0:
        return 0
    return 1 if e == 1 else -1


# ----------------------------------------------------------------------
# Integer-coefficient helper routines used by the inverse above.

def _int_poly_divmod(a, b, p):
    a = [x % p for x in a]
    inv_lead = pow(b[-1], -1, p)
    q = [0] * (len(a) - len(b) + 1)
    for i in range(len(a) - len(b), -1, -1):
        c = (a[i + len(b) - 1] * inv_lead) % p
        q[i] = c
        if c:
            for j, bb in enumerate(b):
                a[i + j] = (a[i + j] - c * bb) % p
    return q, a[: len(b) - 1]


def _int_poly_mul(a, b, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return out


def _int_poly_sub(a, b, p):
    n = max(len(a), len(b))
    a = a + [0] * (n - len(a))
    b = b + [0] * (n - len(b))
    return [(x - y) % p for x, y in zip(a, b)]


# ----------------------------------------------------------------------
# Dense univariate polynomials over a FiniteField: lists of coefficient
# tuples in ascending degree, trailing zeros trimmed.  The empty list is
# the zero polynomial.

def _ptrim(f):
    while f and not any(f[-1]):
        f.pop()
    return f


def _pdeg(f) -> int:
    return len(f) - 1          # -1 for the zero polynomial


def _padd(F, f, g):
    n = max(len(f), len(g))
    f = f + [F.zero] * (n - len(f))
    g = g + [F.zero] * (n - len(g))
    return _ptrim([F.add(a, b) for a, b in zip(f, g)])


def _psub(F, f, g):
    n = max(len(f), len(g))
    f = f + [F.zero] * (n - len(f))
    g = g + [F.zero] * (n - len(g))
    return _ptrim([F.sub(a, b) for a, b in zip(f, g)])


def _pscale(F, c, f):
    if not any(c):
        return []
    return [F.mul(c, a) for a in f]


def _pmul(F, f, g):
    if not f or not g:
        return []
    out = [F.zero] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if any(a):
            for j, b in enumerate(g):
                if any(b):
                    out[i + j] = F.add(out[i + j], F.mul(a, b))
    return _ptrim(out)


def _pdivmod(F, f, g):
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    f = list(f)
    dg = _pdeg(g)
    df = _pdeg(f)
    if df < dg:
        return [], f
    inv_lead = F.inv(g[-1])
    q = [F.zero] * (df - dg + 1)
    for i in range(df - dg, -1, -1):
        c = F.mul(f[i + dg], inv_lead)
        q[i] = c
        if any(c):
            for j in range(dg + 1):
                f[i + j] = F.sub(f[i + j], F.mul(c, g[j]))
    return _ptrim(q), _ptrim(f[:dg])


def _pmod(F, f, g):
    return _pdivmod(F, f, g)[1]


def _pmonic(F, f):
    if not f:
        return f
    inv = F.inv(f[-1])
    return [F.mul(inv, c) for c in f]


def _pgcd(F, f, g):
    f, g = list(f), list(g)
    while g:
        f, g = g, _pmod(F, f, g)
    return _pmonic(F, f)


def _ppowmod(F, f, e: int, m):
    out = [F.one]
    base = _pmod(F, f, m)
    while e:
        if e & 1:
            out = _pmod(F, _pmul(F, out, base), m)
        base = _pmod(F, _pmul(F, base, base), m)
        e >>= 1
    return out


def _pderiv(F, f):
    return _ptrim([F.scalar_mul(i, f[i]) for i in range(1, len(f))])


def _peval(F, f, x):
    acc = F.zero
    for c in reversed(f):
        acc = F.add(F.mul(acc, x), c)
    return acc


def _pth_root(F, f):
    """Inverse of the absolute Frobenius on a polynomial in x^p."""
    p = F.p
    inv_frob = F.order // p      # a -> a^(p^(k-1)) inverts a -> a^p
    out = []
    for i in range(0, len(f), p):
        out.append(F.pow_int(f[i], inv_frob))
    return _ptrim(out)


def _psquarefree_decomp(F, f):
    """Monic f as a list of (g, e) with the g squarefree, pairwise coprime."""
    out = []
    df = _pderiv(F, f)
    if not df:
        if _pdeg(f) == 0:
            return out
        root = _pth_root(F, f)
        return [(g, e * F.p) for g, e in _psquarefree_decomp(F, root)]
    c = _pgcd(F, f, df)
    w = _pdivmod(F, f, c)[0]
    i = 1
    while _pdeg(w) > 0:
        y = _pgcd(F, w, c)
        z = _pdivmod(F, w, y)[0]
        if _pdeg(z) > 0:
            out.append((z, i))
        w = y
        c = _pdivmod(F, c, y)[0]
        i += 1
    if _pdeg(c) > 0:
        root = _pth_root(F, c)
        out.extend((g, e * F.p) for g, e in _psquarefree_decomp(F, root))
    return out


def _pddf(F, f):
    """Distinct-degree split of squarefree monic f: list of (product, d)."""
    out = []
    x = [F.zero, F.one]
    h = list(x)
    rest = list(f)
    d = 0
    while _pdeg(rest) > 2 * d + 1:
        d += 1
        h = _ppowmod(F, h, F.order, rest)
        g = _pgcd(F, _psub(F, h, x), rest)
        if _pdeg(g) > 0:
            out.append((g, d))
            rest = _pdivmod(F, rest, g)[0]
            h = _pmod(F, h, rest)
    if _pdeg(rest) > 0:
        out.append((rest, _pdeg(rest)))
    return out


def _candidate_polys(F, max_deg: int):
    """Deterministic stream of nonconstant polynomials of degree <= max_deg."""
    for n in itertools.count(F.order):
        digits = []
        m = n
        while m:
            digits.append(F.decode(m % F.order))
            m //= F.order
        if len(digits) > max_deg + 1:
            return
        yield _ptrim(digits)


def _char2_candidates(F, max_deg: int):
    """Basis monomials b_j * x^i for the characteristic-2 trace split.

    The pair-separating functional c -> Tr(c(r) - c(r')) is F_2-linear
    in c and kills constants, so whenever any candidate of degree
    <= max_deg works, one of these k * max_deg monomials already does.
    Enumerating constant terms first (as _candidate_polys would) stalls:
    they never change the trace.
    """
    for i in range(1, max_deg + 1):
        for j in range(F.k):
            yield [F.zero] * i + [F.decode(F.p ** j)]


def _pedf(F, f, d):
    """All monic irreducible degree-d factors of f (f a product of such)."""
    if _pdeg(f) == d:
        return [_pmonic(F, f)]
    q_to_d = F.order ** d
    max_deg = 2 * d - 1 if d > 1 else 1
    cands = _char2_candidates(F, max_deg) if F.p == 2 else _candidate_polys(F, max_deg)
    for c in cands:
        if F.p == 2:
            t = list(c)
            acc = list(c)
            bits = q_to_d.bit_length() - 1
            for _ in range(bits - 1):
                acc = _pmod(F, _pmul(F, acc, acc), f)
                t = _padd(F, t, acc)
        else:
            t = _psub(F, _ppowmod(F, c, (q_to_d - 1) // 2, f), [F.one])
        g = _pgcd(F, t, f)
        if 0 < _pdeg(g) < _pdeg(f):
            rest = _pdivmod(F, f, g)[0]
            return _pedf(F, g, d) + _pedf(F, rest, d)
    raise AssertionError("equal-degree splitting exhausted candidates")


def _pfind_root(F, f):
    """One root of f in F, assuming f splits into distinct linear factors.

    Follows a single branch of the equal-degree splitting recursion, so
    finding one root of a high-degree polynomial over a big field costs
    a fraction of the full split.
    """
    f = _pmonic(F, list(f))
    while _pdeg(f) > 1:
        cands = _char2_candidates(F, 1) if F.p == 2 else _candidate_polys(F, 1)
        for c in cands:
            if F.p == 2:
                t = list(c)
                acc = list(c)
                bits = F.order.bit_length() - 1
                for _ in range(bits - 1):
                    acc = _pmod(F, _pmul(F, acc, acc), f)
                    t = _padd(F, t, acc)
            else:
                t = _psub(F, _ppowmod(F, c, (F.order - 1) // 2, f), [F.one])
            g = _pgcd(F, t, f)
            dg = _pdeg(g)
            if 0 < dg < _pdeg(f):
                rest = _pdivmod(F, f, g)[0]
                f = g if dg <= _pdeg(rest) else rest
                break
        else:
            raise AssertionError("root splitting exhausted candidates")
    return F.neg(f[0])


def _pfactor(F, f):
    """Full factorization: list of (monic irreducible, multiplicity)."""
    out = []
    f = _pmonic(F, list(f))
    for g, e in _psquarefree_decomp(F, f):
        for block, d in _pddf(F, g):
            for irr in _pedf(F, block, d):
                out.append((irr, e))
    out.sort(key=lambda t: (len(t[0]), [F.encode(c) for c in t[0]]))
    return out


def _proots(F, f):
    """Distinct roots of f in F, sorted by encode()."""
    if not f:
        raise ZeroDivisionError("roots of the zero polynomial")
    x = [F.zero, F.one]
    lin = _pgcd(F, _psub(F, _ppowmod(F, x, F.order, f), x), f)
    d = _pdeg(lin)
    if d <= 0:
        return []
    if d == 1:
        return [F.neg(lin[0])]
    roots = [F.neg(piece[0]) for piece in _pedf(F, lin, 1)]
    roots.sort(key=F.encode)
    return roots


# ----------------------------------------------------------------------
# Public polynomial wrapper.

class UnivariatePolynomial:
    """Dense univariate polynomial with integer or FieldElement coefficients.

    Coefficients are stored in ascending degree with no trailing zeros;
    the zero polynomial has an empty coefficient tuple and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = list(coeffs)
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "UnivariatePolynomial":
        return UnivariatePolynomial(
            tuple(i * c for i, c in enumerate(self.coeffs))[1:]
        )

    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return UnivariatePolynomial(x + y for x, y in zip(a, b))

    def __sub__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return UnivariatePolynomial(x - y for x, y in zip(a, b))

    def __mul__(self, other):
        other = self._coerce(other)
        if not self.coeffs or not other.coeffs:
            return UnivariatePolynomial(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return UnivariatePolynomial(out)

    def __neg__(self):
        return UnivariatePolynomial(tuple(-c for c in self.coeffs))

    def _coerce(self, other):
        if isinstance(other, UnivariatePolynomial):
            return other
        return UnivariatePolynomial((other,))

    def __eq__(self, other):
        return (
            isinstance(other, UnivariatePolynomial)
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "Poly(0)"
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            if i == 0:
                parts.append(f"{c}")
            elif i == 1:
                parts.append(f"{c}*x" if c != 1 else "x")
            else:
                parts.append(f"{c}*x^{i}" if c != 1 else f"x^{i}")
        return "Poly(" + " + ".join(reversed(parts)) + ")"

    def reduce_mod(self, p: int):
        """Coefficient list over GF(p), ascending, for integer-coefficient
        polynomials.  Raises if the leading coefficient vanishes mod p."""
        if self.degree < 0:
            return []
        red = [int(c) % p for c in self.coeffs]
        if red[-1] == 0:
            raise LeadingCoefficientVanishes(
                f"leading coefficient of {self!r} vanishes mod {p}"
            )
        return red


class FactorProfile(tuple):
    """(degrees, squarefree) with the degree multiset sorted ascending."""

    __slots__ = ()

    def __new__(cls, degrees, squarefree):
        return super().__new__(cls, (tuple(sorted(degrees)), bool(squarefree)))

    @property
    def degrees(self):
        return self[0]

    @property
    def squarefree(self):
        return self[1]


def factor_degree_profile(g: UnivariatePolynomial, p: int) -> FactorProfile:
    """Degrees (with multiplicity) of the irreducible factors of g mod p.

    Degrees 1..3 are resolved by root counting plus a discriminant test
    on the quadratic cofactor; degrees 4..6 run distinct-degree
    factorization on the squarefree decomposition.  Returns the sorted
    degree multiset and a squarefree flag.
    """
    if not isinstance(g, UnivariatePolynomial):
        g = UnivariatePolynomial(g)
    if not all(isinstance(c, int) for c in g.coeffs):
        raise TypeError("factor_degree_profile expects integer coefficients")
    if not 1 <= g.degree <= 6:
        raise DegreeOutOfRange(f"degree {g.degree} outside 1..6")
    _check_characteristic(p)
    F = get_field(p, 1)
    f = [(c,) for c in g.reduce_mod(p)]
    f = _pmonic(F, f)
    deg = _pdeg(f)

    df = _pderiv(F, f)
    squarefree = bool(df) and _pdeg(_pgcd(F, f, df)) == 0

    if deg <= 3:
        x = [F.zero, F.one]
        lin = _pgcd(F, _psub(F, _ppowmod(F, x, p, f), x), f)
        nroots = _pdeg(lin)
        if deg == 1:
            degrees = [1]
        elif deg == 2:
            degrees = [2] if nroots == 0 else [1, 1]
        else:
            if nroots == 0:
                degrees = [3]
            elif nroots == 1 and squarefree:
                degrees = [1, 2]
                # cross-check: the quadratic cofactor must be rootless
                quad = _pdivmod(F, f, lin)[0]
                if p == 2:
                    assert any(_peval(F, quad, F.zero)) and any(
                        _peval(F, quad, F.one)
                    )
                else:
                    disc = (
                        quad[1][0] * quad[1][0] - 4 * quad[0][0] * quad[2][0]
                    ) % p
                    assert legendre_symbol(disc, p) == -1
            else:
                degrees = [1, 1, 1]
        return FactorProfile(degrees, squarefree)

    degrees = []
    for sq, e in _psquarefree_decomp(F, f):
        for block, d in _pddf(F, sq):
            degrees.extend([d] * ((_pdeg(block) // d) * e))
    return FactorProfile(degrees, squarefree)
