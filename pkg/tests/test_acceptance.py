"""Acceptance gate.

One test per shipped guarantee, numbered so `pytest -v` reads as a
checklist.  Timing bounds are asserted with wall-clock measurements on
the spot; nothing here is mocked or precomputed.
"""

import itertools
import json
import os
import random
import time

import pytest

from lonesieve.cli import main
from lonesieve.curves import (
    PlaneCurveModel,
    enumerate_points,
    local_expansion,
    places_up_to_degree,
    reduce_mod_p,
)
from lonesieve.divisors import (
    EffectiveDivisor,
    RowCache,
    brute_force_equiv,
    lin_equiv,
    sym2_enumerate,
)
from lonesieve.fields import UnivariatePolynomial, is_prime
from lonesieve.sieve import (
    LonelyCertificates,
    MarkedCurveData,
    compute_Wp,
    fixed_points_mod_p,
)
from lonesieve.splitting import (
    CubicFieldSpec,
    QuadraticFieldSpec,
    cubic_profile,
    min_split_prime,
    no_degree_six_check,
    quadratic_splitting,
)

Q163 = QuadraticFieldSpec(-163, class_number_one=True)
Q43 = QuadraticFieldSpec(-43, class_number_one=True)
Q67 = QuadraticFieldSpec(-67, class_number_one=True)
CUBIC = CubicFieldSpec(UnivariatePolynomial((10, -8, 0, 1)))
EMPTY = LonelyCertificates.empty()

ODD_PRIMES_TO_37 = (3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def test_01_every_small_prime_is_doomed():
    """Odd p <= 37: inert quadratic field and a linear cubic factor."""
    t0 = time.perf_counter()
    for p in ODD_PRIMES_TO_37:
        assert quadratic_splitting(Q163, p) == "inert", p
        assert 1 in cubic_profile(CUBIC, p).degrees, p
    assert time.perf_counter() - t0 < 1.0


def test_02_minimal_split_primes():
    t0 = time.perf_counter()
    bounds = {Q163: 41, Q43: 11, Q67: 17}
    for spec, expected in bounds.items():
        assert min_split_prime(spec) == expected
        for p in range(3, expected, 2):
            if is_prime(p):
                assert quadratic_splitting(spec, p) != "split"
    assert time.perf_counter() - t0 < 1.0


def test_03_first_fully_split_cubic_prime():
    assert quadratic_splitting(Q163, 167) == "split"
    assert cubic_profile(CUBIC, 167).degrees == (1, 1, 1)


def test_04_smallest_inert_cubic_prime_is_usable():
    found = None
    p = 3
    while found is None:
        if is_prime(p) and cubic_profile(CUBIC, p).degrees == (3,):
            found = p
        p += 2
    assert found == 41
    assert quadratic_splitting(Q163, 41) == "split"
    # independent oracle: a rootless cubic mod p is irreducible, so the
    # profile scan must agree with a bare residue sweep
    def has_root(q):
        return any((x * x * x - 8 * x + 10) % q == 0 for x in range(q))

    for q in ODD_PRIMES_TO_37:
        assert has_root(q), q
    assert not has_root(41)


def test_05_no_simultaneous_inertia_up_to_1000():
    t0 = time.perf_counter()
    assert no_degree_six_check(Q163, CUBIC, 1000) is True
    assert time.perf_counter() - t0 < 5.0


def _all_effective(curve, deg):
    places = [(pl, pl.degree) for pl in places_up_to_degree(curve, deg)]
    out = []

    def rec(i, left, acc):
        if left == 0:
            out.append(EffectiveDivisor(dict(acc)))
            return
        if i == len(places):
            return
        pl, k = places[i]
        for mult in range(left // k, -1, -1):
            rec(i + 1, left - mult * k, acc + [(pl, mult)] if mult else acc)

    rec(0, deg, [])
    return out


def test_06_equivalence_decision_matches_oracle(klein2, fermat3):
    """Exhaustive cross-check against the form-search oracle."""
    t0 = time.perf_counter()
    checked = disagreements = 0
    for curve, dmax in ((klein2, 3), (fermat3, 2)):
        cache = RowCache(curve)
        for deg in range(1, dmax + 1):
            divs = _all_effective(curve, deg)
            for a, b in itertools.combinations_with_replacement(divs, 2):
                want = brute_force_equiv(a, b, curve)
                if want is None:
                    continue
                got, _ = lin_equiv(a, b, curve, cache)
                checked += 1
                disagreements += got != want
    assert disagreements == 0
    assert checked >= 300
    assert time.perf_counter() - t0 < 120.0


def test_07_geometry_invariants(klein2, fermat3, toy_data):
    toy5 = reduce_mod_p(toy_data.curve, 5)
    toy3 = reduce_mod_p(toy_data.curve, 3)
    rng = random.Random(20260815)
    for curve in (klein2, fermat3, toy5):
        p = curve.base.p
        drawn = 0
        while drawn < 100:
            m = 1 + drawn % 3
            monos = [(i, j, m - i - j)
                     for i in range(m + 1) for j in range(m - i + 1)]
            form = {e: rng.randrange(p) for e in monos}
            form = {e: c for e, c in form.items() if c}
            if not form or max(sum(e) for e in form) != m:
                continue
            cut = EffectiveDivisor.cut_by(curve, form)
            assert cut.degree == m * curve.degree, (p, form)
            drawn += 1
    # size of the degree-2 locus from point counts over GF(p), GF(p^2)
    for curve in (klein2, fermat3, toy3, toy5):
        n1 = len(enumerate_points(curve, 1))
        n2 = len(enumerate_points(curve, 2))
        assert len(sym2_enumerate(curve)) == (n1 * n1 + n2) // 2
    # branch series solve the curve equation to the declared precision
    for curve in (klein2, fermat3, toy5):
        for pt in enumerate_points(curve, 1)[:3]:
            exp = local_expansion(curve, pt, 10)
            assert exp.order_of_form(curve.form) is None


def test_08_extra_fixed_point_forces_unit_residues(toy_data):
    """An undeclared involution-fixed point mod p lands 1 and n-1 in
    the residue set, and the set stays symmetric under negation."""
    bare = MarkedCurveData(
        curve=toy_data.curve,
        involution=toy_data.involution,
        torsion=toy_data.torsion,
    )
    for p in (3, 5):
        fixed, extra = fixed_points_mod_p(bare, p)
        assert fixed and extra
        rep = compute_Wp(bare, p, EMPTY)
        assert 1 in rep.wp and (rep.n - 1) in rep.wp
        assert sorted(rep.wp) == sorted({(-r) % rep.n for r in rep.wp})
        assert 0 in rep.wp  # the marked pair itself survives in S_p


def test_09_outputs_identical_across_worker_counts(data_dir, capsys):
    outs = []
    for workers in (1, 2, 4):
        code = main(["sieve", "--curve", str(data_dir / "toy_quartic.json"),
                     "--primes", "3,5", "--workers", str(workers)])
        assert code == 1
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1] == outs[2]
    json.loads(outs[0])  # well-formed, not just equal


@pytest.fixture(scope="module")
def one_worker_run(perf_data):
    t0 = time.perf_counter()
    rep = compute_Wp(perf_data, 41, EMPTY, workers=1)
    return rep, time.perf_counter() - t0


def test_10a_full_residue_set_mod_41_under_five_minutes(one_worker_run):
    rep, elapsed = one_worker_run
    assert rep.n == 27
    assert rep.sym2_size == 1546
    assert rep.sp_size == 1546  # nothing certified: every divisor tested
    assert sorted(rep.wp) == sorted({(-r) % 27 for r in rep.wp})
    assert 0 in rep.wp and 1 in rep.wp and 26 in rep.wp
    assert elapsed < 300.0


@pytest.mark.xfail(
    condition=os.cpu_count() < 4,
    reason="speedup target needs 4 hardware threads; host has fewer",
    strict=False,
)
def test_10b_four_workers_speed_up_the_same_run(perf_data, one_worker_run):
    _, t1 = one_worker_run
    t0 = time.perf_counter()
    rep4 = compute_Wp(perf_data, 41, EMPTY, workers=4)
    t4 = time.perf_counter() - t0
    assert rep4.to_jsonable() == one_worker_run[0].to_jsonable()
    assert t1 / t4 >= 2.5, f"speedup {t1 / t4:.2f}"


def test_11_external_level_43_model():
    pytest.skip("needs an externally supplied quartic model and "
                "involution matrix; not bundled, not gating")
