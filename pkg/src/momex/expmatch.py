"""Match a truncated Taylor series to a sum of exponentials.

Given 2M series coefficients F_0..F_{2M-1} (moments, cumulants, or anything
else), find amplitudes d_j and exponents e_j so that the Taylor coefficients
of Sigma_j d_j exp(-t e_j) agree with F through order 2M-1.  The exponents
are the roots of the characteristic polynomial of the Hankel system

    Sigma_j F_{i+j} p_j = 0,   i = 0..M-1,  p_M = 1,

equivalently the generalized eigenvalues of the pencil (F_{i+j+1}, F_{i+j}),
and the amplitudes then solve the leading M equations of the (otherwise
overdetermined, but consistent) Vandermonde system Sigma_n d_n e_n^k = F_k.

Ill-conditioning is confined to root extraction and the Vandermonde solve,
which run at elevated binary precision; the characteristic polynomial itself
is computed exactly whenever the input is rational.
"""

from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpf, mpc, matrix, lu_solve, fabs, exp, re, im, conj

from .errors import (ValidationError, SingularHankel, NoConvergence,
                     IllConditioned)


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision and tolerances for the inexact stages.

    digits is the decimal precision of returned values.  merge_tol governs
    when two exponents count as one multiple root; residual_tol bounds the
    relative error of the reconstructed series in the match verification.
    Tolerances are stored exactly (powers of ten) so contexts at very high
    digit counts do not underflow.
    """

    digits: int = 60
    merge_tol: Fraction = None
    residual_tol: Fraction = None

    def __post_init__(self):
        if self.digits < 30:
            raise ValidationError("precision must be >= 30 digits")
        if self.merge_tol is None:
            object.__setattr__(self, "merge_tol",
                               Fraction(1, 10 ** (self.digits // 2)))
        if self.residual_tol is None:
            object.__setattr__(self, "residual_tol",
                               Fraction(1, 10 ** (self.digits - 15)))
        for tol in (self.merge_tol, self.residual_tol):
            if not 0 < tol < 1:
                raise ValidationError(f"tolerance {tol} outside (0,1)")


@dataclass(frozen=True)
class ExponentialModel:
    """constant + Sigma_j d_j exp(-t e_j).

    terms are (amplitude, exponent) pairs sorted by ascending real part of
    the exponent; effective_order = len(terms) and is smaller than the
    requested order when a singular Hankel system forced a reduction.
    The constant is zero here; the connected-moments layer uses it.
    """

    terms: tuple
    effective_order: int
    constant: object = 0


def _is_exact(values):
    return all(isinstance(v, (Fraction, int)) for v in values)


def _validate_series(F):
    values = tuple(F)
    if len(values) < 2 or len(values) % 2:
        raise ValidationError(
            f"series must have even length >= 2, got {len(values)}")
    return values


def _exact_solve(A, b):
    """Gaussian elimination over Fraction with row pivoting.

    Returns the solution list, or None when the matrix is singular.
    """
    n = len(b)
    A = [row[:] for row in A]
    b = list(b)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if A[r][col] != 0:
                piv = r
                break
        if piv is None:
            return None
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            b[col], b[piv] = b[piv], b[col]
        for r in range(col + 1, n):
            if A[r][col]:
                f = A[r][col] / A[col][col]
                for c in range(col, n):
                    A[r][c] -= f * A[col][c]
                b[r] -= f * b[col]
    x = [Fraction(0)] * n
    for r in range(n - 1, -1, -1):
        s = b[r] - sum(A[r][c] * x[c] for c in range(r + 1, n))
        x[r] = s / A[r][r]
    return x


def hankel_determinant(F, n):
    """det (F_{i+j})_{i,j=0}^{n-1}, exact.  n=0 gives 1."""
    if n == 0:
        return Fraction(1)
    A = [[Fraction(F[i + j]) for j in range(n)] for i in range(n)]
    det = Fraction(1)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if A[r][col] != 0:
                piv = r
                break
        if piv is None:
            return Fraction(0)
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            det = -det
        det *= A[col][col]
        for r in range(col + 1, n):
            if A[r][col]:
                f = A[r][col] / A[col][col]
                for c in range(col, n):
                    A[r][c] -= f * A[col][c]
    return det


def max_feasible_order(F):
    """Largest n with det (F_{i+j})_{i,j<n} nonzero, for exact F."""
    top = len(F) // 2
    for n in range(top, 0, -1):
        if hankel_determinant(F, n) != 0:
            return n
    return 0


def characteristic_polynomial(F, ctx=None):
    """Monic characteristic polynomial p_0..p_M of the Hankel recurrence.

    Exact input gives exact Fraction coefficients via exact elimination;
    a singular system raises SingularHankel carrying the largest feasible
    order.  Real (mpf) input is solved at ctx precision instead, and
    genuine trouble there surfaces later as IllConditioned in the match
    verification.
    """
    F = _validate_series(F)
    M = len(F) // 2
    if _is_exact(F):
        Fr = [Fraction(v) for v in F]
        A = [[Fr[i + j] for j in range(M)] for i in range(M)]
        rhs = [-Fr[i + M] for i in range(M)]
        sol = _exact_solve(A, rhs)
        if sol is None:
            raise SingularHankel(max_feasible_order(Fr))
        return sol + [Fraction(1)]
    ctx = ctx or PrecisionContext()
    with mp.workdps(ctx.digits + 10):
        A = matrix(M, M)
        rhs = matrix(M, 1)
        for i in range(M):
            for j in range(M):
                A[i, j] = _num(F[i + j])
            rhs[i] = -_num(F[i + M])
        try:
            sol = lu_solve(A, rhs)
        except ZeroDivisionError as exc:
            raise IllConditioned("Hankel solve hit a zero pivot") from exc
        return [sol[i] for i in range(M)] + [mpf(1)]


def _num(x):
    """Fraction/int/float/mpf/mpc -> mpmath scalar at current precision."""
    return mp.mpmathify(x)


def _polyval(p, w):
    # Horner on ascending coefficients (already converted to mp scalars)
    acc = mp.mpmathify(0)
    for c in reversed(p):
        acc = acc * w + c
    return acc


def pencil_roots(p, ctx):
    """All roots of Sigma_j p_j W^j, Newton-polished, sorted by real part.

    Polishing runs at twice the context precision and must bring the
    residual (relative to the evaluated coefficient magnitude) below
    10^(5 - digits); a root that stalls raises NoConvergence with its index.
    Multiple roots are reported with multiplicity.
    """
    degree = len(p) - 1
    if degree < 1:
        raise ValidationError("polynomial must have degree >= 1")
    work = 2 * ctx.digits + 20
    with mp.workdps(work):
        coeffs = [_num(c) for c in p]
        dcoeffs = [k * coeffs[k] for k in range(1, degree + 1)]
        try:
            roots = mp.polyroots(list(reversed(coeffs)), maxsteps=200,
                                 extraprec=mp.prec)
        except mp.NoConvergence as exc:
            raise NoConvergence(-1) from exc
        target = mpf(10) ** (5 - ctx.digits)
        polished = []
        for idx, w in enumerate(roots):
            w = mp.mpmathify(w)
            for _ in range(80):
                pw = _polyval(coeffs, w)
                scale = sum(fabs(c) * fabs(w) ** k
                            for k, c in enumerate(coeffs))
                if fabs(pw) <= target * scale:
                    break
                dpw = _polyval(dcoeffs, w)
                if dpw == 0:
                    break
                w = w - pw / dpw
            pw = _polyval(coeffs, w)
            scale = sum(fabs(c) * fabs(w) ** k for k, c in enumerate(coeffs))
            if fabs(pw) > target * scale:
                raise NoConvergence(idx)
            polished.append(w)
    with mp.workdps(ctx.digits):
        out = [+w for w in polished]
    return sorted(out, key=lambda w: (re(w), im(w)))


def _merge_roots(roots, ctx):
    """Cluster roots closer than merge_tol*max(1,|e|); mean per cluster.

    Arithmetic runs at ctx precision; ambient precision must never touch
    the roots (a stray 15-digit rounding here wrecks the trailing Taylor
    coefficients far below any visible display digit).
    """
    with mp.workdps(ctx.digits):
        tol = _num(ctx.merge_tol)
        clusters = []
        for w in sorted(roots, key=lambda z: (re(z), im(z))):
            for cl in clusters:
                ref = cl[0]
                if fabs(w - ref) < tol * max(1, fabs(ref)):
                    cl.append(w)
                    break
            else:
                clusters.append([w])
        return [sum(cl) / len(cl) for cl in clusters]


def _symmetrize_real(roots, ctx):
    """For real input: drop stray imaginary dust, pair the rest conjugately.

    Runs at ctx precision for the same reason as _merge_roots.
    """
    with mp.workdps(ctx.digits):
        tol = _num(ctx.merge_tol)
        reals, complexes = [], []
        for w in roots:
            if fabs(im(w)) <= tol * max(1, fabs(re(w))):
                reals.append(re(w) + mpf(0))
            else:
                complexes.append(mpc(w))
        paired = []
        used = [False] * len(complexes)
        for i, w in enumerate(complexes):
            if used[i]:
                continue
            best, bestd = None, None
            for j in range(i + 1, len(complexes)):
                if used[j]:
                    continue
                d = fabs(conj(w) - complexes[j])
                if bestd is None or d < bestd:
                    best, bestd = j, d
            if best is not None and bestd <= tol * max(1, fabs(w)):
                used[i] = used[best] = True
                z = (w + conj(complexes[best])) / 2
                paired.extend([z, conj(z)])
            else:
                used[i] = True
                paired.append(w)        # unpaired; keep honestly
        return reals + paired


def solve_amplitudes(F, roots, ctx):
    """Amplitudes from the first len(roots) equations Sigma d_n e_n^k = F_k.

    Any size-M subset of the 2M matching equations gives the same amplitudes
    when the model is consistent, so the leading ones are used.  Raises
    IllConditioned when the Vandermonde condition number eats all but 10 of
    the working digits.
    """
    M = len(roots)
    if M == 0:
        raise ValidationError("no roots to fit amplitudes to")
    with mp.workdps(ctx.digits + 10):
        V = matrix(M, M)
        rhs = matrix(M, 1)
        for k in range(M):
            for n in range(M):
                V[k, n] = _num(roots[n]) ** k
            rhs[k] = _num(F[k])
        try:
            Vinv = V ** -1
        except ZeroDivisionError as exc:
            raise IllConditioned("Vandermonde system is singular") from exc
        cond = mp.mnorm(V, 1) * mp.mnorm(Vinv, 1)
        if cond > mpf(10) ** (ctx.digits - 10):
            raise IllConditioned(
                f"Vandermonde condition number {mp.nstr(cond, 3)} leaves "
                f"fewer than 10 digits at {ctx.digits}-digit precision")
        d = lu_solve(V, rhs)
    with mp.workdps(ctx.digits):
        return [+d[i] if isinstance(d[i], mpf) else mpc(d[i])
                for i in range(M)]


def _pair_conjugate_amplitudes(roots, amps, ctx, dust_tol=None):
    """Symmetrize amplitudes of conjugate root pairs; strip imaginary dust
    from amplitudes of exactly real roots (only below dust_tol, so a genuine
    complex amplitude on a real root survives and fails verification
    downstream instead of being silently discarded)."""
    out = list(amps)
    n = len(roots)
    used = [False] * n
    with mp.workdps(ctx.digits):
        for i in range(n):
            if used[i] or im(mp.mpmathify(roots[i])) == 0:
                continue
            for j in range(i + 1, n):
                if not used[j] and mp.mpmathify(roots[j]) == conj(
                        mp.mpmathify(roots[i])):
                    a = (out[i] + conj(out[j])) / 2
                    out[i], out[j] = a, conj(a)
                    used[i] = used[j] = True
                    break
        if dust_tol is not None:
            tol = _num(dust_tol)
            for i in range(n):
                a = out[i]
                if (im(mp.mpmathify(roots[i])) == 0 and isinstance(a, mpc)
                        and fabs(im(a)) <= tol * max(1, fabs(a))):
                    out[i] = re(a) + mpf(0)
    return out


def match_expansion(F, ctx=None):
    """Full pipeline: F_0..F_{2M-1} -> ExponentialModel with <= M terms.

    Exactly singular Hankel systems trigger an automatic retry at the
    largest feasible order (recorded in effective_order); nearly coincident
    roots are merged with their amplitudes summed; for real input the model
    is closed under conjugation.  The reconstructed Taylor series is
    verified against F through order 2*effective_order - 1 and a violation
    raises IllConditioned.
    """
    ctx = ctx or PrecisionContext()
    F = _validate_series(F)
    exact = _is_exact(F)
    M = len(F) // 2
    while True:
        try:
            p = characteristic_polynomial(F[:2 * M], ctx)
            break
        except SingularHankel as err:
            if err.max_feasible_order < 1:
                raise
            M = err.max_feasible_order
    roots = pencil_roots(p, ctx)
    roots = _merge_roots(roots, ctx)
    real_input = exact or all(not isinstance(v, mpc) or im(v) == 0 for v in F)
    if real_input:
        roots = _symmetrize_real(roots, ctx)
    roots = sorted(roots, key=lambda w: (re(w), im(w)))
    amps = solve_amplitudes(F[:len(roots)], roots, ctx)
    amps = _pair_conjugate_amplitudes(
        roots, amps, ctx, ctx.residual_tol if real_input else None)
    model = ExponentialModel(terms=tuple(zip(amps, roots)),
                             effective_order=len(roots))
    with mp.workdps(ctx.digits):
        recon = reconstruct_taylor(model, 2 * len(roots) - 1)
        tol = _num(ctx.residual_tol)
        for k in range(2 * len(roots)):
            fk = _num(F[k])
            if fabs(recon[k] - fk) > tol * max(1, fabs(fk)):
                raise IllConditioned(
                    f"reconstructed coefficient {k} off by "
                    f"{mp.nstr(fabs(recon[k] - fk), 3)}; "
                    "increase precision")
    return model


def evaluate(model, t, ctx):
    """constant + Sigma d_j exp(-t e_j) at ctx precision."""
    with mp.workdps(ctx.digits):
        t = mp.mpmathify(t)
        acc = mp.mpmathify(model.constant)
        for d, e in model.terms:
            acc += d * exp(-t * e)
        return acc


def reconstruct_taylor(model, kmax):
    """Taylor coefficients Sigma d_j e_j^k of the model for k = 0..kmax.

    The constant term contributes only at k = 0 (it is an exponent-zero
    term), so the k = 0 value is constant + Sigma d_j.
    """
    out = []
    for k in range(kmax + 1):
        acc = mp.mpmathify(model.constant) if k == 0 else mp.mpmathify(0)
        for d, e in model.terms:
            acc += d * mp.mpmathify(e) ** k
        out.append(acc)
    return out
