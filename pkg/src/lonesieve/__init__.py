"""lonesieve: a linear-equivalence sieve for quadratic points on plane
curves over small finite fields, with a prime-splitting doom analyzer.

The package decides whether the class of (1 - w)(Q) matches a declared
torsion multiple for every residual degree-2 divisor Q on the reduction
of a marked curve, entirely through explicit linear-equivalence tests
between effective divisors.  No Jacobian group law is ever constructed:
each test is a small exact linear-algebra problem over GF(p) built from
truncated branch expansions, so a sieve pass at p costs arithmetic in
GF(p^2) rather than in a high-degree splitting field.
"""

__version__ = "0.1.0"
