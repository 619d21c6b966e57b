"""Search for a small swap-symmetric quartic usable as a test fixture.

Wanted: a quartic F(x,y,z) = F(y,x,z) over Q, smooth mod 3 and mod 5,
passing through (1:0:0) and (0:1:0) (these become the swapped marked
points), whose difference class has the same small order at both
primes, with at least one swap-fixed point mod one of the primes, and
with a quadratic conjugate-pair divisor on the line z = 0 to serve as
a known divisor.  The winner is frozen into tests/data/.
"""
import json
import random
import sys
import time

from lonesieve.curves import (
    PlaneCurveModel, ProjectivePoint, is_smooth, matrix_mod_p, reduce_mod_p,
    validate_involution,
)
from lonesieve.divisors import TorsionClassTester, lin_equiv
from lonesieve.errors import LonesieveError
from lonesieve.fields import get_field
from lonesieve.sieve import scan_fixed_points, _is_squarefree

SWAP = ((0, 1, 0), (1, 0, 0), (0, 0, 1))


def symmetric_form(a310, a301, a220, a202, a211, a112, a103, a004):
    form = {}
    def put(e, c):
        if c:
            form[e] = form.get(e, 0) + c
    put((3, 1, 0), a310); put((1, 3, 0), a310)
    put((3, 0, 1), a301); put((0, 3, 1), a301)
    put((2, 2, 0), a220)
    put((2, 0, 2), a202); put((0, 2, 2), a202)
    put((2, 1, 1), a211); put((1, 2, 1), a211)
    put((1, 1, 2), a112)
    put((1, 0, 3), a103); put((0, 1, 3), a103)
    put((0, 0, 4), a004)
    return form


def probe_order(curve_p, p, cap=12):
    K = get_field(p)
    c0 = ProjectivePoint(K, (K.one, K.zero, K.zero))
    cinf = ProjectivePoint(K, (K.zero, K.one, K.zero))
    mat_p = matrix_mod_p(SWAP, p)
    tester = TorsionClassTester(curve_p, mat_p, 1, c0, cinf, verify_order=False)
    e0 = tester.chain[0]
    cur = e0
    for m in range(1, cap + 1):
        cur = tester._step(cur)
        ok, _ = lin_equiv(cur, e0, curve_p, tester.cache)
        if ok:
            return m
    return None


def squarefree_part(n):
    s, k = 1, 2
    while k * k <= abs(n):
        while n % (k * k) == 0:
            n //= k * k
        k += 1
    return n


def main(seed=7, tries=4000):
    rng = random.Random(seed)
    t0 = time.time()
    found = []
    for trial in range(tries):
        coeffs = [rng.randint(-4, 4) for _ in range(8)]
        a310, a301, a220, a202, a211, a112, a103, a004 = coeffs
        if a310 == 0 or a220 == 0:
            continue  # need the z=0 section to carry a quadratic pair
        disc = a220 * a220 - 4 * a310 * a310
        if disc == 0:
            continue
        d = squarefree_part(disc)
        if d in (0, 1) or d % 3 == 0 or d % 5 == 0:
            continue
        form = symmetric_form(*coeffs)
        try:
            curve = PlaneCurveModel(form, None)
            if curve.degree != 4:
                continue
            chk = validate_involution(curve, SWAP)
            if chk.trivial:
                continue
            orders = {}
            fixed = {}
            ok = True
            for p in (3, 5):
                cp = reduce_mod_p(curve, p)
                if not is_smooth(cp):
                    ok = False
                    break
                orders[p] = probe_order(cp, p)
                fixed[p] = len(scan_fixed_points(cp, matrix_mod_p(SWAP, p)))
            if not ok:
                continue
        except LonesieveError:
            continue
        n3, n5 = orders[3], orders[5]
        if n3 is None or n5 is None or n3 != n5 or n3 < 2:
            continue
        if fixed[3] == 0 and fixed[5] == 0:
            continue
        rec = {
            "coeffs": dict(zip(
                ["a310", "a301", "a220", "a202", "a211", "a112", "a103", "a004"],
                coeffs)),
            "order": n3,
            "fixed_mod_3": fixed[3],
            "fixed_mod_5": fixed[5],
            "known_disc": d,
            "disc_raw": disc,
            "trial": trial,
        }
        found.append(rec)
        print(json.dumps(rec), flush=True)
        if len(found) >= 8:
            break
    print(f"# {len(found)} hits in {time.time()-t0:.0f}s over {trial+1} trials",
          file=sys.stderr)


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:]))
