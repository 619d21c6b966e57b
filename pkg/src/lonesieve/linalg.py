"""Dense exact linear algebra mod p on plain integer rows.

Rows are lists of ints in 0..p-1.  Everything is deterministic: pivots
are chosen left to right, first usable row wins, and nullspace bases
come out of the reduced echelon form with free columns in ascending
order.  These routines sit in the inner loop of the equivalence tests,
so they stay allocation-light and avoid any wrapper types.
"""

from __future__ import annotations


def rref_mod_p(rows: list[list[int]], ncols: int, p: int):
    """Reduced row echelon form in place; returns the pivot column list."""
    pivots = []
    r = 0
    for c in range(ncols):
        sel = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                sel = i
                break
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        inv = pow(rows[r][c], -1, p)
        row = rows[r]
        for j in range(c, ncols):
            row[j] = (row[j] * inv) % p
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                ri = rows[i]
                for j in range(c, ncols):
                    ri[j] = (ri[j] - f * row[j]) % p
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots


def rank_mod_p(rows: list[list[int]], ncols: int, p: int) -> int:
    work = [list(r) for r in rows]
    return len(rref_mod_p(work, ncols, p))


def nullspace_mod_p(rows: list[list[int]], ncols: int, p: int):
    """Canonical nullspace basis: one vector per free column, ascending."""
    work = [list(r) for r in rows]
    pivots = rref_mod_p(work, ncols, p)
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    for fc in free:
        v = [0] * ncols
        v[fc] = 1
        for r, pc in enumerate(pivots):
            v[pc] = (-work[r][fc]) % p
        basis.append(v)
    return basis


def has_nonzero_kernel(rows: list[list[int]], ncols: int, p: int) -> bool:
    return rank_mod_p(rows, ncols, p) < ncols
