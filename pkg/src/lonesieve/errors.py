"""Exception catalogue for the lonesieve package.

Every error raised by the library is a subclass of LonesieveError.  The
three broad families mirror the CLI exit codes: input problems (bad data,
bad flags) map to exit code 2, violated internal invariants map to exit
code 3, and a sieve that simply fails to resolve is not an error at all
(exit code 1 is decided by the CLI from the verdict).
"""


class LonesieveError(Exception):
    """Base class for all package errors."""


class InputError(LonesieveError):
    """Bad user-supplied data; maps to CLI exit code 2."""


class InvariantViolation(LonesieveError):
    """A checked internal invariant failed; maps to CLI exit code 3."""


# ---------------------------------------------------------------- fields

class NonPrimeModulus(InputError):
    """Characteristic is composite (or otherwise not a usable prime)."""


class DegreeOutOfRange(InputError):
    """Polynomial or extension degree outside the supported window."""


class EvenPrime(InputError):
    """p = 2 where an odd prime is required."""


class LeadingCoefficientVanishes(InputError):
    """Leading coefficient of a polynomial dies under reduction mod p."""


class SearchExhausted(LonesieveError):
    """A bounded scan ran out of candidates before finding a witness."""


# ------------------------------------------------------------- splitting

class RamifiedPrime(InputError):
    """Prime divides a relevant discriminant; splitting type undefined."""


class IncompatibleFields(InputError):
    """Quadratic and cubic data do not generate the expected sextic setup."""


class CompositeLevel(InputError):
    """Modular-curve level must be prime."""


# -------------------------------------------------------------- geometry

class BadReduction(InputError):
    """Curve reduces to a singular or degenerate model mod p."""


class DenominatorClash(InputError):
    """A rational coefficient has denominator divisible by p."""


class EnumerationTooLarge(InputError):
    """Point enumeration would exceed the configured ceiling."""


class NotAnAutomorphism(InputError):
    """Matrix does not preserve the curve form up to scalar."""


class NotAnInvolution(InputError):
    """Matrix squared is not a scalar matrix."""


class PrecisionOverflow(InvariantViolation):
    """Local power-series precision request exceeded the hard cap."""


class FormDivisibleByCurve(InputError):
    """Intersection divisor of G with C undefined when C divides G."""


class BezoutMismatch(InvariantViolation):
    """Intersection multiplicities did not sum to deg(G) * deg(C)."""


# -------------------------------------------------------------- divisors

class DegreeMismatch(InputError):
    """Linear equivalence is only tested between divisors of equal degree."""


class AuxiliaryDegreeOverflow(LonesieveError):
    """No auxiliary form degree below the cap produced a usable system."""


class SearchSpaceTooLarge(InputError):
    """Brute-force oracle refused: field or form degree too big."""


class MultipleMatches(InvariantViolation):
    """Two distinct torsion residues matched one divisor; reduction of
    torsion at an odd prime is injective, so this aborts the run."""


# ----------------------------------------------------------------- sieve

class RamifiedCoordinateField(InputError):
    """Known divisor lives in Q(sqrt(d)) with p | d; reduction undefined."""


class UnknownLabel(InputError):
    """Loneliness certificate references a label not among known divisors."""


class InvolutionUnstableCertificates(InputError):
    """Certified-lonely set at some prime is not closed under the involution."""


class MixedCurves(InputError):
    """Sieve reports being intersected were computed from different curves."""


class EmptyReportList(InputError):
    """Intersection of an empty collection of reports is undefined."""


class SpecValidationError(InputError):
    """A JSON input document failed structural validation."""
