"""Effective divisors and exact linear-equivalence decisions.

Equivalence of divisors A ~ B on a smooth plane curve is decided by
residuation: pick a form F through B, peel off the residual R =
div(F) - B, and ask whether some form of the same degree cuts exactly
A + R.  Because every line bundle on the plane has vanishing first
cohomology, the restriction of degree-m forms to the curve is onto, so
the answer is exact at every admissible m: a decision procedure, not
a search.  Torsion-class matching runs the same test against a chain
of degree-3 representatives of the classes m*[c0 - cinf], which keeps
the per-candidate work at one rank computation on a 12 x 10 matrix
over GF(p) no matter how large the torsion order is.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .curves import (
    BranchExpansion,
    Place,
    PlaneCurveModel,
    ProjectivePoint,
    apply_matrix_place,
    apply_matrix_point,
    enumerate_points,
    form_divisible_by_curve,
    intersection_divisor,
    line_section_divisor,
    line_through,
    local_expansion,
    monomial_basis,
    places_up_to_degree,
    tangent_line,
)
from .errors import (
    AuxiliaryDegreeOverflow,
    BadReduction,
    DegreeMismatch,
    DenominatorClash,
    InputError,
    InvariantViolation,
    MultipleMatches,
    SearchSpaceTooLarge,
)
from .fields import get_field
from .linalg import nullspace_mod_p, rank_mod_p


# ----------------------------------------------------------------------
# Effective divisors.

class EffectiveDivisor:
    """A finite formal sum of places with multiplicities >= 1.

    Support is stored sorted by place key, so equal divisors compare
    and hash identically and every downstream iteration order is
    deterministic.
    """

    __slots__ = ("support", "degree", "_key")

    def __init__(self, mapping):
        items = []
        for pl, mult in (mapping.items() if isinstance(mapping, dict) else mapping):
            if mult < 0:
                raise InputError("negative multiplicity in effective divisor")
            if mult:
                items.append((pl, int(mult)))
        items.sort(key=lambda t: t[0].key())
        self.support = tuple(items)
        self.degree = sum(m * pl.degree for pl, m in items)
        self._key = tuple((pl.degree, pl.rep.key(), m) for pl, m in items)

    @classmethod
    def of_point(cls, point: ProjectivePoint, mult: int = 1) -> "EffectiveDivisor":
        return cls({Place.of_point(point): mult})

    @classmethod
    def cut_by(cls, curve: PlaneCurveModel, form: dict) -> "EffectiveDivisor":
        return cls(intersection_divisor(curve, form))

    def key(self):
        return self._key

    def multiplicity(self, place: Place) -> int:
        for pl, m in self.support:
            if pl == place:
                return m
        return 0

    def __add__(self, other: "EffectiveDivisor") -> "EffectiveDivisor":
        acc = {pl: m for pl, m in self.support}
        for pl, m in other.support:
            acc[pl] = acc.get(pl, 0) + m
        return EffectiveDivisor(acc)

    def __sub__(self, other: "EffectiveDivisor") -> "EffectiveDivisor":
        acc = {pl: m for pl, m in self.support}
        for pl, m in other.support:
            have = acc.get(pl, 0) - m
            if have < 0:
                raise InvariantViolation("divisor difference is not effective")
            acc[pl] = have
        return EffectiveDivisor(acc)

    def contains(self, other: "EffectiveDivisor") -> bool:
        acc = {pl: m for pl, m in self.support}
        return all(acc.get(pl, 0) >= m for pl, m in other.support)

    def scale(self, c: int) -> "EffectiveDivisor":
        return EffectiveDivisor({pl: c * m for pl, m in self.support})

    def __eq__(self, other):
        return isinstance(other, EffectiveDivisor) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __iter__(self):
        return iter(self.support)

    def to_jsonable(self):
        out = []
        for pl, m in self.support:
            coords = [list(c) for c in pl.rep.coords]
            out.append([coords, pl.degree, m])
        return out

    def __repr__(self):
        parts = " + ".join(
            (f"{m}*" if m > 1 else "") + repr(pl.rep) for pl, m in self.support
        )
        return f"Divisor({parts or '0'})"


def involution_image(divisor: EffectiveDivisor, mat) -> EffectiveDivisor:
    """Place-wise image of a divisor under a coordinate involution."""
    acc = {}
    for pl, m in divisor.support:
        img = apply_matrix_place(mat, pl)
        acc[img] = acc.get(img, 0) + m
    return EffectiveDivisor(acc)


def sym2_enumerate(curve: PlaneCurveModel):
    """All effective degree-2 divisors over the base field, sorted.

    These are the unordered pairs of rational points (doubles included)
    together with the quadratic places.  The count must equal
    (n^2 + m)/2 with n, m the point counts over GF(p) and GF(p^2);
    that identity is asserted on every call.
    """
    pts = enumerate_points(curve, 1)
    places1 = [Place.of_point(pt) for pt in pts]
    out = []
    for i, a in enumerate(places1):
        for b in places1[i:]:
            if a == b:
                out.append(EffectiveDivisor({a: 2}))
            else:
                out.append(EffectiveDivisor({a: 1, b: 1}))
    for pl in places_up_to_degree(curve, 2):
        if pl.degree == 2:
            out.append(EffectiveDivisor({pl: 1}))
    n = len(pts)
    m = len(enumerate_points(curve, 2))
    if 2 * len(out) != n * n + m:
        raise InvariantViolation(
            f"sym^2 count {len(out)} disagrees with (n^2+m)/2 = {(n*n+m)//2}"
        )
    out.sort(key=EffectiveDivisor.key)
    return out


# ----------------------------------------------------------------------
# Vanishing-condition linear systems.

def _binom2(t: int) -> int:
    return (t + 2) * (t + 1) // 2 if t >= 0 else 0


def form_space_dims(d: int, m: int):
    """(ambient dimension, dimension of curve multiples) at degree m."""
    return _binom2(m), _binom2(m - d)


class RowCache:
    """Per-curve cache of branch expansions and flattened condition rows.

    Rows are keyed by (place, multiplicity, form degree); branches by
    place.  Read-shared across equivalence tests; entirely rebuilt per
    process, so fork-based workers inherit a warm cache for free.
    """

    __slots__ = ("curve", "branches", "rows", "line_sections")

    def __init__(self, curve: PlaneCurveModel):
        self.curve = curve
        self.branches = {}
        self.rows = {}
        self.line_sections = {}

    def branch(self, place: Place, precision: int) -> BranchExpansion:
        key = (place.field.k, place.rep.key())
        br = self.branches.get(key)
        if br is None or br.precision < precision:
            br = local_expansion(self.curve, place.rep, max(precision, 8))
            self.branches[key] = br
        return br

    def place_rows(self, place: Place, mult: int, m: int):
        """Vanishing-to-order-mult conditions at one place, over GF(p).

        Each series coefficient lives in GF(p^e); its e components give
        e rows, so the block has mult * e rows in total.
        """
        key = (place.field.k, place.rep.key(), mult, m)
        cached = self.rows.get(key)
        if cached is None:
            br = self.branch(place, mult + 1)
            e = place.degree
            basis = monomial_basis(m)
            cols = []
            for mono in basis:
                series = br.monomial_series(mono)
                cols.append(series)
            cached = []
            for j in range(mult):
                for comp in range(e):
                    cached.append([col[j][comp] for col in cols])
            self.rows[key] = cached
        return cached

    def divisor_rows(self, divisor: EffectiveDivisor, m: int):
        rows = []
        for pl, mult in divisor.support:
            rows.extend(self.place_rows(pl, mult, m))
        return rows

    def line_section(self, coeffs) -> EffectiveDivisor:
        key = tuple(coeffs)
        cached = self.line_sections.get(key)
        if cached is None:
            cached = EffectiveDivisor(line_section_divisor(self.curve, coeffs))
            self.line_sections[key] = cached
        return cached


def _vector_to_form(vec, m: int) -> dict:
    basis = monomial_basis(m)
    return {basis[i]: c for i, c in enumerate(vec) if c}


def vanishing_forms(curve: PlaneCurveModel, divisor: EffectiveDivisor, m: int,
                    cache: RowCache):
    """Canonical nullspace basis of degree-m forms containing the divisor."""
    rows = cache.divisor_rows(divisor, m)
    n_amb, _ = form_space_dims(curve.degree, m)
    if not rows:
        rows = [[0] * n_amb]
    return nullspace_mod_p(rows, n_amb, curve.base.p)


def _first_nondivisible(curve: PlaneCurveModel, basis_vectors, m: int):
    for vec in basis_vectors:
        form = _vector_to_form(vec, m)
        if not form:
            continue
        if m >= curve.degree and form_divisible_by_curve(curve, form):
            continue
        return form
    return None


def has_exact_cut(curve: PlaneCurveModel, divisor: EffectiveDivisor, m: int,
                  cache: RowCache) -> bool:
    """Is the divisor cut by some degree-m form not divisible by the curve?

    Curve multiples satisfy every vanishing condition, so the test is a
    bare rank comparison: solutions outside that subspace exist iff
    rank < ambient - multiples.
    """
    rows = cache.divisor_rows(divisor, m)
    n_amb, n_mult = form_space_dims(curve.degree, m)
    rank = rank_mod_p(rows, n_amb, curve.base.p) if rows else 0
    return rank < n_amb - n_mult


# ----------------------------------------------------------------------
# Linear equivalence.

@dataclass(frozen=True)
class EquivalenceCertificate:
    """A re-checkable witness that A ~ B.

    div(form_through_b) = B + residual and div(form_through_a) = A +
    residual, both verifiable with two independent intersection-divisor
    computations.
    """

    aux_degree: int
    form_through_b: dict
    form_through_a: dict
    residual: EffectiveDivisor

    def verify(self, curve: PlaneCurveModel, a: EffectiveDivisor,
               b: EffectiveDivisor) -> bool:
        try:
            div_f = EffectiveDivisor.cut_by(curve, self.form_through_b)
            div_g = EffectiveDivisor.cut_by(curve, self.form_through_a)
        except Exception:
            return False
        return div_f == b + self.residual and div_g == a + self.residual

    def to_jsonable(self):
        def table(form):
            return [[list(e), c] for e, c in sorted(form.items())]

        return {
            "aux_degree": self.aux_degree,
            "form_through_b": table(self.form_through_b),
            "form_through_a": table(self.form_through_a),
            "residual": self.residual.to_jsonable(),
        }


def default_aux_cap(d: int, n_max: int = 27) -> int:
    return d + -(-n_max // d)


def lin_equiv(a: EffectiveDivisor, b: EffectiveDivisor, curve: PlaneCurveModel,
              cache: RowCache | None = None, max_aux: int | None = None):
    """Decide A ~ B; on success also return an EquivalenceCertificate.

    The auxiliary degree starts at the smallest m whose form space can
    both contain B (dimension margin) and cut it (m*d >= deg B), and
    the negative answer is read off a rank computation, never off a
    failed search.
    """
    if a.degree != b.degree:
        raise DegreeMismatch(f"degrees {a.degree} and {b.degree} differ")
    if cache is None:
        cache = RowCache(curve)
    d = curve.degree
    cap = default_aux_cap(d) if max_aux is None else max_aux
    for m in range(1, cap + 1):
        if m * d < b.degree:
            continue
        n_amb, n_mult = form_space_dims(d, m)
        basis = vanishing_forms(curve, b, m, cache)
        # margin counts independent conditions, not divisor degree, so a
        # special B (say a full line section) can admit a smaller m
        if len(basis) <= n_mult:
            continue
        f0 = _first_nondivisible(curve, basis, m)
        if f0 is None:
            continue
        residual = EffectiveDivisor.cut_by(curve, f0) - b
        if a == b:
            return True, EquivalenceCertificate(m, f0, f0, residual)
        target = a + residual
        if not has_exact_cut(curve, target, m, cache):
            return False, None
        g = _first_nondivisible(curve, vanishing_forms(curve, target, m, cache), m)
        if g is None:
            raise InvariantViolation("rank promised a form outside the curve ideal")
        return True, EquivalenceCertificate(m, f0, g, residual)
    raise AuxiliaryDegreeOverflow(f"auxiliary degree exceeded cap {cap}")


# ----------------------------------------------------------------------
# Brute-force oracle.

_section_cache: dict = {}


def _all_section_divisors(curve: PlaneCurveModel, m: int):
    """Divisor of every degree-m form up to scalars, cached per curve."""
    key = (curve.digest(), m)
    cached = _section_cache.get(key)
    if cached is not None:
        return cached
    p = curve.base.p
    basis = monomial_basis(m)
    n = len(basis)
    out = []
    for lead in range(n):
        tail = n - lead - 1
        for code in range(p ** tail):
            vec = [0] * lead + [1]
            rest = code
            for _ in range(tail):
                vec.append(rest % p)
                rest //= p
            form = _vector_to_form(vec, m)
            if m >= curve.degree and form_divisible_by_curve(curve, form):
                continue
            out.append((form, EffectiveDivisor.cut_by(curve, form)))
    _section_cache[key] = out
    return out


def brute_force_equiv(a: EffectiveDivisor, b: EffectiveDivisor,
                      curve: PlaneCurveModel, mmax: int = 2):
    """Independent oracle: search for forms F, G with div F + A = div G + B.

    Returns True on an explicit witness, False when the geometry rules
    equivalence out (degree-1 divisors on a positive-genus curve,
    degree-2 divisors on a smooth plane curve of degree >= 4, which has
    no degree-2 pencil), and None when the search is merely exhausted.
    """
    if a.degree != b.degree:
        raise DegreeMismatch(f"degrees {a.degree} and {b.degree} differ")
    if curve.base.p > 4:
        raise SearchSpaceTooLarge(f"oracle restricted to fields of size <= 4, got {curve.base.p}")
    if mmax > 3:
        raise SearchSpaceTooLarge(f"oracle restricted to form degree <= 3, got {mmax}")
    if a == b:
        return True
    for m in range(1, mmax + 1):
        sections = _all_section_divisors(curve, m)
        targets = {}
        for form, div in sections:
            targets.setdefault((div + a).key(), form)
        for form, div in sections:
            if (div + b).key() in targets:
                return True
    if a.degree == 1 and curve.genus >= 1:
        return False
    if a.degree == 2 and curve.degree >= 4:
        return False
    return None


# ----------------------------------------------------------------------
# Torsion-class matching.

@dataclass(frozen=True)
class TorsionModel:
    """Cyclic torsion data: order n and the two swapped rational points.

    The generator class is [c0 - cinf]; the involution is required to
    exchange c0 and cinf, which makes the generator anti-invariant.
    Coordinates are exact rationals so the model reduces at any good
    prime.
    """

    order: int
    c0: tuple
    cinf: tuple

    def __post_init__(self):
        if self.order < 1:
            raise InputError("torsion order must be >= 1")
        a = tuple(Fraction(c) for c in self.c0)
        b = tuple(Fraction(c) for c in self.cinf)
        if len(a) != 3 or len(b) != 3 or not any(a) or not any(b):
            raise InputError("torsion points need three projective coordinates")
        object.__setattr__(self, "c0", a)
        object.__setattr__(self, "cinf", b)
        if _proj_normalize_q(a) == _proj_normalize_q(b):
            raise InputError("c0 and cinf must be distinct points")

    def reduce(self, p: int):
        return _reduce_rational_point(self.c0, p), _reduce_rational_point(self.cinf, p)


def _proj_normalize_q(coords):
    for c in coords:
        if c:
            return tuple(x / c for x in coords)
    raise InputError("zero coordinate triple")


def _reduce_rational_point(coords, p: int) -> ProjectivePoint:
    K = get_field(p)
    # scale to integers with content prime to p before reducing, so a
    # representative like (1/2 : 1 : 1) survives reduction mod 3
    denom_lcm = 1
    for c in coords:
        denom_lcm = denom_lcm * c.denominator // _gcd(denom_lcm, c.denominator)
    ints = [int(c * denom_lcm) for c in coords]
    g = 0
    for v in ints:
        g = _gcd(g, abs(v))
    ints = [v // g for v in ints]
    raw = tuple(K.element(v % p).coeffs for v in ints)
    if all(K.is_zero(c) for c in raw):
        raise DenominatorClash(f"point reduces to zero mod {p}")
    return ProjectivePoint(K, raw)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _match_order(n: int):
    """Candidate residues 0, 1, n-1, 2, n-2, ...: the near-generator
    classes come first because they are the interesting ones."""
    out = [0]
    lo, hi = 1, n - 1
    while lo <= hi:
        out.append(lo)
        if hi != lo:
            out.append(hi)
        lo += 1
        hi -= 1
    return out


class TorsionClassTester:
    """Decides which multiple of [c0 - cinf] a degree-2 divisor maps to.

    Construction builds a chain of effective degree-3 divisors E_m with
    E_m ~ m*(c0 - cinf) + 3*cinf via pairs of conic residuations, then
    Q matches residue m iff Q + E_0 ~ w(Q) + E_m, a test of fixed
    degree: one rank computation on the cubic forms through
    w(Q) + E_m + R(Q).  The per-Q residual R(Q) is cut by a product of
    three lines, so the hot path never touches a resultant.
    """

    def __init__(self, curve: PlaneCurveModel, mat, order: int,
                 c0: ProjectivePoint, cinf: ProjectivePoint,
                 verify_order: bool = True):
        if curve.base is None:
            raise InputError("torsion matching expects a curve over a prime field")
        if not curve.contains(c0) or not curve.contains(cinf):
            raise InputError("torsion points must lie on the curve")
        if c0 == cinf:
            raise BadReduction("torsion points collide in reduction")
        if apply_matrix_point(mat, c0) != cinf or apply_matrix_point(mat, cinf) != c0:
            raise InputError("involution does not swap the torsion points")
        self.curve = curve
        self.mat = tuple(tuple(int(c) % curve.base.p for c in row) for row in mat)
        self.order = order
        self.c0 = c0
        self.cinf = cinf
        self.cache = RowCache(curve)
        self._c0_div = EffectiveDivisor.of_point(c0)
        self._cinf_div = EffectiveDivisor.of_point(cinf)
        self._l_tangent = tangent_line(curve, cinf)
        self._l_marked = line_through(c0, cinf)
        self.chain = self._build_chain()
        if verify_order:
            self._verify_order()

    # -- chain construction ------------------------------------------------

    def _step(self, e_div: EffectiveDivisor) -> EffectiveDivisor:
        """One chain step: an effective representative of [E] + c0 - cinf."""
        base = e_div + self._c0_div
        h = _first_nondivisible(self.curve, vanishing_forms(self.curve, base, 2, self.cache), 2)
        if h is None:
            raise InvariantViolation("no conic through a degree-4 divisor")
        r1 = EffectiveDivisor.cut_by(self.curve, h) - base
        base2 = r1 + self._cinf_div
        g = _first_nondivisible(self.curve, vanishing_forms(self.curve, base2, 2, self.cache), 2)
        if g is None:
            raise InvariantViolation("no conic through a degree-5 divisor")
        return EffectiveDivisor.cut_by(self.curve, g) - base2

    def _build_chain(self):
        chain = [EffectiveDivisor({Place.of_point(self.cinf): 3})]
        for _ in range(1, self.order):
            chain.append(self._step(chain[-1]))
        return chain

    def _verify_order(self):
        wrap = self._step(self.chain[-1]) if self.order > 1 else self.chain[0]
        ok, _ = lin_equiv(wrap, self.chain[0], self.curve, self.cache)
        if not ok:
            raise InputError(f"[c0 - cinf] does not have order dividing {self.order}")
        for m in range(1, self.order):
            ok, _ = lin_equiv(self.chain[m], self.chain[0], self.curve, self.cache)
            if ok:
                raise InputError(f"[c0 - cinf] has order {m}, not {self.order}")

    # -- per-divisor matching ----------------------------------------------

    def _line_for(self, q: EffectiveDivisor):
        support = q.support
        if len(support) == 1:
            pl, mult = support[0]
            if mult == 2:
                return tangent_line(self.curve, pl.rep)
            return line_through(pl.rep, pl.rep.frobenius())
        return line_through(support[0][0].rep, support[1][0].rep)

    def _residual(self, q: EffectiveDivisor) -> EffectiveDivisor:
        l3 = self._line_for(q)
        div_f0 = (
            self.cache.line_section(self._l_tangent)
            + self.cache.line_section(self._l_marked)
            + self.cache.line_section(l3)
        )
        return div_f0 - (q + self.chain[0])

    def _test(self, wq: EffectiveDivisor, residual: EffectiveDivisor, m: int) -> bool:
        target = wq + self.chain[m] + residual
        return has_exact_cut(self.curve, target, 3, self.cache)

    def class_match(self, q: EffectiveDivisor, verify_unique: bool = False):
        """The residue m with Q + m*cinf ~ w(Q) + m*c0, or None.

        Candidates are scanned 0, 1, n-1, 2, n-2, ...; with
        verify_unique the scan is exhaustive and a second hit raises
        MultipleMatches, since torsion reduction at an odd prime is
        injective and two hits would be a soundness bug.
        """
        if q.degree != 2:
            raise DegreeMismatch(f"class matching expects degree 2, got {q.degree}")
        wq = involution_image(q, self.mat)
        residual = None
        matches = []
        for m in _match_order(self.order):
            if m == 0:
                hit = q == wq
            else:
                if residual is None:
                    residual = self._residual(q)
                hit = self._test(wq, residual, m)
            if hit:
                if not verify_unique:
                    return m
                matches.append(m)
        if len(matches) > 1:
            raise MultipleMatches(f"divisor matches residues {sorted(matches)}")
        return matches[0] if matches else None


_tester_cache: dict = {}


def class_match(q: EffectiveDivisor, mat, torsion: TorsionModel,
                curve: PlaneCurveModel, verify_unique: bool = False):
    """Module-level entry: reduce the torsion model and match one divisor."""
    p = curve.base.p
    c0r, cinfr = torsion.reduce(p)
    key = (curve.digest(), torsion.order, c0r.key(), cinfr.key(),
           tuple(tuple(int(c) % p for c in row) for row in mat))
    tester = _tester_cache.get(key)
    if tester is None:
        tester = TorsionClassTester(curve, mat, torsion.order, c0r, cinfr)
        _tester_cache[key] = tester
    return tester.class_match(q, verify_unique=verify_unique)
