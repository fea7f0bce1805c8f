"""Exact operator algebra for 1-D Schroedinger Hamiltonians on
polynomial-times-Gaussian states.

States are p(x)*exp(-alpha*x^2) with exact rational p and alpha, Hamiltonians
are -d^2/dx^2 + V(x) with polynomial V.  Everything here is exact: moments
come out as rational numbers times a common sqrt(pi/beta) factor, so the
notoriously ill-conditioned Hankel stages downstream receive noise-free input.
The only irrational factor is applied at display time.
"""

from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpf, pi, sqrt

from .errors import ValidationError

#: Exact rational scalar used for all moment algebra.
ExactRational = Fraction


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int) or isinstance(x, str):
        return Fraction(x)
    raise ValidationError(f"expected an exact rational, got {x!r}")


def _trim(coeffs):
    coeffs = [_as_fraction(c) for c in coeffs]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


@dataclass(frozen=True)
class GaussianPolyState:
    """p(x) * exp(-alpha x^2) with coeffs[k] multiplying x^k.

    The coefficient list is stored trimmed (highest stored coefficient
    nonzero); an empty list is the zero state, which most operations reject.
    """

    coeffs: tuple
    alpha: Fraction

    def __init__(self, coeffs, alpha):
        alpha = _as_fraction(alpha)
        if alpha <= 0:
            raise ValidationError(f"alpha must be positive, got {alpha}")
        object.__setattr__(self, "coeffs", _trim(coeffs))
        object.__setattr__(self, "alpha", alpha)

    @property
    def is_zero(self):
        return not self.coeffs

    def scaled(self, factor):
        factor = _as_fraction(factor)
        return GaussianPolyState([c * factor for c in self.coeffs], self.alpha)


@dataclass(frozen=True)
class PolynomialHamiltonian:
    """-d^2/dx^2 + V(x), potential[k] multiplying x^k, degree >= 1."""

    potential: tuple

    def __init__(self, potential):
        potential = _trim(potential)
        if len(potential) < 2:
            raise ValidationError("potential must have degree >= 1")
        object.__setattr__(self, "potential", potential)


def apply_hamiltonian(h, s):
    """Apply -d^2/dx^2 + V to a Gaussian-polynomial state, exactly.

    With s = p(x) e^{-alpha x^2} the result keeps the Gaussian factor and has
    polynomial

        q = -p'' + 4 alpha x p' + 2 alpha p - 4 alpha^2 x^2 p + V p.

    Returns a GaussianPolyState with the same alpha.
    """
    if s.is_zero:
        raise ValidationError("cannot apply Hamiltonian to the zero state")
    a = s.alpha
    out = {}

    def add(k, v):
        out[k] = out.get(k, Fraction(0)) + v

    for k, c in enumerate(s.coeffs):
        if k >= 2:
            add(k - 2, -c * k * (k - 1))
        add(k, (4 * k + 2) * a * c)
        add(k + 2, -4 * a * a * c)
    for m, v in enumerate(h.potential):
        if v:
            for k, c in enumerate(s.coeffs):
                add(k + m, v * c)
    top = max(out)
    return GaussianPolyState([out.get(k, Fraction(0)) for k in range(top + 1)],
                             a)


def inner_product(s1, s2):
    """<s1|s2> as an exact pair (R, beta) with value R * sqrt(pi/beta).

    beta = alpha1 + alpha2; the x^{2n} Gaussian integral contributes
    (2n-1)!!/(2 beta)^n, odd powers vanish by parity.
    """
    if s1.is_zero or s2.is_zero:
        raise ValidationError("inner product of the zero state")
    beta = s1.alpha + s2.alpha
    prod = {}
    for i, a in enumerate(s1.coeffs):
        for j, b in enumerate(s2.coeffs):
            if a and b:
                prod[i + j] = prod.get(i + j, Fraction(0)) + a * b
    R = Fraction(0)
    weight = Fraction(1)          # (2n-1)!!/(2 beta)^n, built up iteratively
    n = 0
    top = max(prod)
    while 2 * n <= top:
        R += prod.get(2 * n, Fraction(0)) * weight
        n += 1
        weight = weight * (2 * n - 1) / (2 * beta)
    return R, beta


@dataclass(frozen=True)
class MomentSequence:
    """Exact moments mu_j = <s|H^j|s> stored as rational parts.

    mu_j = rational_parts[j] * sqrt(pi/beta) with one common beta = 2*alpha.
    nu holds the normalized moments nu_j = mu_j/mu_0, exact rationals with
    nu_0 = 1; downstream stages consume nu and reapply mu_0 at the end.
    """

    rational_parts: tuple
    beta: Fraction

    @property
    def nu(self):
        r0 = self.rational_parts[0]
        return tuple(r / r0 for r in self.rational_parts)

    def mu0(self, dps=None):
        """mu_0 as an mpf at the given (or current) working precision."""
        r0 = self.rational_parts[0]
        with mp.workdps(dps or mp.dps):
            return (mpf(r0.numerator) / mpf(r0.denominator)
                    * sqrt(pi * self.beta.denominator / self.beta.numerator))


def moment_sequence(h, s, jmax):
    """Exact mu_j = <s|H^j|s> for j = 0..jmax.

    Splits each power as mu_j = <H^(j//2) s | H^((j+1)//2) s> so only
    ceil(jmax/2) Hamiltonian applications are needed; all inner products share
    beta = 2*alpha.
    """
    if jmax < 1:
        raise ValidationError("jmax must be >= 1")
    if s.is_zero:
        raise ValidationError("zero trial state")
    states = [s]
    for _ in range((jmax + 1) // 2):
        states.append(apply_hamiltonian(h, states[-1]))
    parts = []
    beta = 2 * s.alpha
    for j in range(jmax + 1):
        R, b = inner_product(states[j // 2], states[(j + 1) // 2])
        assert b == beta
        parts.append(R)
    if parts[0] <= 0:
        raise ValidationError("trial state has nonpositive norm")
    return MomentSequence(tuple(parts), beta)


def _hermite(n):
    """Physicists' Hermite polynomial H_n, exact integer coefficients."""
    hk, hk1 = [Fraction(1)], [Fraction(0), Fraction(2)]
    if n == 0:
        return hk
    for k in range(1, n):
        # H_{k+1} = 2 x H_k - 2 k H_{k-1}
        nxt = [Fraction(0)] + [2 * c for c in hk1]
        for i, c in enumerate(hk):
            nxt[i] -= 2 * k * c
        hk, hk1 = hk1, nxt
    return hk1


def harmonic_overlap(s, n, ctx):
    """|<s|psi_n>|^2 against the n-th eigenfunction of -d^2/dx^2 + x^2.

    psi_n = H_n(x) e^{-x^2/2} / sqrt(2^n n! sqrt(pi)).  The integral of
    p*H_n against e^{-(alpha+1/2)x^2} is exact, so the result is an exact
    rational times sqrt(pi), evaluated at ctx precision.  Opposite-parity
    states give exactly zero.
    """
    if n < 0:
        raise ValidationError("n must be >= 0")
    if s.is_zero:
        raise ValidationError("zero trial state")
    beta = s.alpha + Fraction(1, 2)
    hn = _hermite(n)
    prod = {}
    for i, a in enumerate(s.coeffs):
        for j, b in enumerate(hn):
            if a and b:
                prod[i + j] = prod.get(i + j, Fraction(0)) + a * b
    R = Fraction(0)
    weight = Fraction(1)
    k = 0
    top = max(prod) if prod else 0
    while 2 * k <= top:
        R += prod.get(2 * k, Fraction(0)) * weight
        k += 1
        weight = weight * (2 * k - 1) / (2 * beta)
    # |<s|psi_n>|^2 = R^2 (pi/beta) / (2^n n! sqrt(pi)) = rational * sqrt(pi)
    fact = Fraction(1)
    for m in range(1, n + 1):
        fact *= m
    rat = R * R / (beta * 2**n * fact)
    with mp.workdps(ctx.digits):
        return (mpf(rat.numerator) / mpf(rat.denominator) * sqrt(pi)) + mpf(0)
