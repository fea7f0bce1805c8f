"""Connected-moments machinery.

From normalized moments nu_j this module builds the cumulant-like connected
moments I_j, fits the two exponential forms of the energy function E(t)
(a constant plus N exponentials, or N+1 pure exponentials whose smallest
root is a convergence diagnostic), evaluates the closed-form order-M energy
approximant, and converts a fitted model into an overlap estimate.

Everything rides on the same Hankel-pencil matcher as the series fit; the
shifted sequences just start at different I subscripts.
"""

from fractions import Fraction
from dataclasses import dataclass
from math import comb

from mpmath import mp, mpf, fabs, im, re, exp, log

from .errors import (ValidationError, NotNormalized, SingularHankel,
                     SingularMatrix, IllConditioned, ZeroExponent)
from . import expmatch
from .expmatch import PrecisionContext


@dataclass(frozen=True)
class ConnectedMoments:
    """I_1..I_kmax, exact; indexed with the conventional 1-based subscripts."""

    values: tuple

    def __getitem__(self, j):
        if not 1 <= j <= len(self.values):
            raise ValidationError(f"I_{j} not available (have 1..{len(self.values)})")
        return self.values[j - 1]

    def __len__(self):
        return len(self.values)


def _coerce_connected(I):
    if isinstance(I, ConnectedMoments):
        return I
    return ConnectedMoments(tuple(I))


def connected_moments(nu, kmax):
    """Connected moments I_1..I_kmax from normalized moments nu_0..=1.

    I_1 = nu_1 and

        I_{j+1} = nu_{j+1} - Sigma_{i=0}^{j-1} C(j,i) I_{i+1} nu_{j-i},

    computed exactly.  Requires nu_0 = 1 (use nu = mu/mu_0, never raw mu).
    """
    nu = [Fraction(v) if not isinstance(v, Fraction) else v for v in nu]
    if not nu or nu[0] != 1:
        raise NotNormalized("connected moments need nu_0 = 1")
    if kmax < 1 or kmax > len(nu) - 1:
        raise ValidationError(f"kmax must be in 1..{len(nu) - 1}")
    I = [nu[1]]
    for j in range(1, kmax):
        s = nu[j + 1] - sum(comb(j, i) * I[i] * nu[j - i] for i in range(j))
        I.append(s)
    return ConnectedMoments(tuple(I))


@dataclass(frozen=True)
class CmxModel:
    """a0 + Sigma A_j exp(-b_j t) (E variant) or pure Sigma (U variant).

    For the U variant a0 is zero and terms are ordered smallest |b| first
    (the leading term is the convergence diagnostic); the E variant orders
    terms by ascending real part of b.  effective_order < order records a
    singular-Hankel reduction.
    """

    a0: object
    terms: tuple
    variant: str
    order: int
    effective_order: int


def cmx_fit_E(I, N, ctx=None):
    """Fit I_1.. to a constant plus N exponentials.

    The exponents b_j are the pencil roots of the twice-shifted sequence
    I_2, I_3, ..., the amplitudes solve Sigma_n A_n b_n^k = I_{k+1} for
    k = 1..N, and a0 = I_1 - Sigma A_n.  Needs I_1..I_{2N+1}.

    An exactly singular pencil reduces the order automatically (an
    eigenstate reduces all the way to a bare constant a0 = I_1).
    """
    ctx = ctx or PrecisionContext()
    I = _coerce_connected(I)
    if N < 1:
        raise ValidationError("order must be >= 1")
    if len(I) < 2 * N + 1:
        raise ValidationError(f"need I_1..I_{2 * N + 1}, have {len(I)}")
    eff = N
    while eff >= 1:
        G = [I[k + 2] for k in range(2 * eff)]
        try:
            p = expmatch.characteristic_polynomial(G, ctx)
            break
        except SingularHankel as err:
            eff = err.max_feasible_order
    if eff < 1:
        with mp.workdps(ctx.digits):
            a0 = expmatch._num(I[1])
        return CmxModel(a0=a0, terms=(), variant="E", order=N,
                        effective_order=0)
    roots = expmatch.pencil_roots(p, ctx)
    roots = expmatch._merge_roots(roots, ctx)
    roots = expmatch._symmetrize_real(roots, ctx)
    roots = sorted(roots, key=lambda w: (re(w), im(w)))
    # Sigma A_n b_n^k = I_{k+1}, k = 1..eff: a Vandermonde in C_n = A_n b_n
    # on the shifted sequence; solve directly in the A variables.
    with mp.workdps(ctx.digits + 10):
        M = len(roots)
        V = mp.matrix(M, M)
        rhs = mp.matrix(M, 1)
        for k in range(1, M + 1):
            for n in range(M):
                V[k - 1, n] = expmatch._num(roots[n]) ** k
            rhs[k - 1] = expmatch._num(I[k + 1])
        try:
            Vinv = V ** -1
        except ZeroDivisionError as exc:
            raise IllConditioned("amplitude system is singular") from exc
        cond = mp.mnorm(V, 1) * mp.mnorm(Vinv, 1)
        if cond > mpf(10) ** (ctx.digits - 10):
            raise IllConditioned(
                f"amplitude system condition {mp.nstr(cond, 3)} too large "
                f"for {ctx.digits} digits")
        A = mp.lu_solve(V, rhs)
        amps = expmatch._pair_conjugate_amplitudes(
            roots, [A[i] for i in range(M)], ctx, ctx.residual_tol)
        a0 = expmatch._num(I[1]) - sum(amps)
    with mp.workdps(ctx.digits):
        amps = [+a for a in amps]
        # conjugate pairs cancel exactly, leaving a real constant
        if not isinstance(a0, mpf) and im(a0) == 0:
            a0 = re(a0) + mpf(0)
        a0 = +a0
    return CmxModel(a0=a0, terms=tuple(zip(amps, roots)), variant="E",
                    order=N, effective_order=eff)


def cmx_fit_U(I, N, ctx=None):
    """Fit I_1.. to N+1 pure exponentials (no constant).

    The exponents b_0..b_N are the pencil roots of the once-shifted
    sequence I_1, I_2, ..., the amplitudes solve the first N+1 equations
    Sigma_n A_n b_n^k = I_{k+1} (k = 0..N).  Needs I_1..I_{2N+2}.  Terms
    come back smallest-|b| first, so b_0 is the diagnostic small root.

    A singular pencil raises SingularHankel: a pure exponential Z needs no
    fitting, and unlike the E variant there is no meaningful constant to
    fall back to.
    """
    ctx = ctx or PrecisionContext()
    I = _coerce_connected(I)
    if N < 1:
        raise ValidationError("order must be >= 1")
    if len(I) < 2 * N + 2:
        raise ValidationError(f"need I_1..I_{2 * N + 2}, have {len(I)}")
    G = [I[k + 1] for k in range(2 * N + 2)]
    p = expmatch.characteristic_polynomial(G, ctx)
    roots = expmatch.pencil_roots(p, ctx)
    roots = expmatch._merge_roots(roots, ctx)
    roots = expmatch._symmetrize_real(roots, ctx)
    roots = sorted(roots, key=lambda w: (re(w), im(w)))
    amps = expmatch.solve_amplitudes(G, roots, ctx)
    amps = expmatch._pair_conjugate_amplitudes(roots, amps, ctx,
                                               ctx.residual_tol)
    terms = sorted(zip(amps, roots), key=lambda t: (fabs(t[1]), re(t[1])))
    with mp.workdps(ctx.digits):
        a0 = mpf(0)
    return CmxModel(a0=a0, terms=tuple(terms), variant="U", order=N,
                    effective_order=len(roots) - 1)


def knowles_a0(I, M, ctx=None):
    """Closed-form order-M energy approximant.

    A_{0,M} = I_1 - v^T H^{-1} v with v = (I_2..I_{M+1}) and
    H = (I_{i+j+1})_{i,j=1}^M.  Rational input is eliminated exactly;
    otherwise the solve runs at ctx precision.  Needs I_1..I_{2M+1}.
    """
    ctx = ctx or PrecisionContext()
    I = _coerce_connected(I)
    if M < 1:
        raise ValidationError("order must be >= 1")
    if len(I) < 2 * M + 1:
        raise ValidationError(f"need I_1..I_{2 * M + 1}, have {len(I)}")
    exact = all(isinstance(I[j], (Fraction, int)) for j in range(1, 2 * M + 2))
    if exact:
        H = [[I[i + j + 1] for j in range(1, M + 1)] for i in range(1, M + 1)]
        v = [I[k] for k in range(2, M + 2)]
        y = expmatch._exact_solve(H, v)
        if y is None:
            raise SingularMatrix(_max_feasible_knowles(I, M))
        a0 = I[1] - sum(v[k] * y[k] for k in range(M))
        with mp.workdps(ctx.digits):
            return expmatch._num(a0)
    with mp.workdps(ctx.digits + 10):
        H = mp.matrix(M, M)
        v = mp.matrix(M, 1)
        for i in range(1, M + 1):
            for j in range(1, M + 1):
                H[i - 1, j - 1] = expmatch._num(I[i + j + 1])
            v[i - 1] = expmatch._num(I[i + 1])
        try:
            y = mp.lu_solve(H, v)
        except ZeroDivisionError as exc:
            raise IllConditioned("connected-moment Hankel solve failed") \
                from exc
        a0 = expmatch._num(I[1]) - sum(v[k] * y[k] for k in range(M))
    with mp.workdps(ctx.digits):
        return +a0


def _max_feasible_knowles(I, M):
    # H is the Hankel matrix of the shifted sequence I_3, I_4, ...
    seq = [Fraction(I[k + 3]) for k in range(2 * M - 1)]
    return expmatch.max_feasible_order(seq)


def overlap_s2(model, mu0, ctx=None):
    """Squared overlap estimate exp(ln mu0 - Sigma A_j/b_j).

    Valid for E-variant models; any zero exponent raises ZeroExponent, and
    an imaginary residue in the sum beyond 10^-(digits-15) (conjugate pairs
    cancel it) raises IllConditioned.
    """
    ctx = ctx or PrecisionContext()
    if model.variant != "E":
        raise ValidationError("overlap needs an E-variant model")
    with mp.workdps(ctx.digits):
        tol = expmatch._num(ctx.residual_tol)
        total = mp.mpmathify(0)
        for A, b in model.terms:
            if b == 0:
                raise ZeroExponent("model has a zero exponent")
            total += mp.mpmathify(A) / mp.mpmathify(b)
        scale = max(1, fabs(total))
        if fabs(im(total)) > tol * scale:
            raise IllConditioned(
                f"imaginary residue {mp.nstr(im(total), 3)} in overlap sum")
        return exp(log(mp.mpmathify(mu0)) - re(total))


def track_roots(models):
    """Match exponents across a sequence of fits at increasing order.

    Greedy nearest-neighbor continuation: each trajectory extends to the
    closest unclaimed root of the next model (ties broken toward smaller
    imaginary part); roots that start mid-sequence are flagged spurious.
    Returns a list of dicts with keys 'orders', 'exponents', 'amplitudes',
    'spurious'.
    """
    models = list(models)
    if not models:
        raise ValidationError("need at least one model")
    trajectories = []
    for A, b in models[0].terms:
        trajectories.append({"orders": [models[0].order], "exponents": [b],
                             "amplitudes": [A], "spurious": False})
    for model in models[1:]:
        terms = list(model.terms)
        claimed = [False] * len(terms)
        # live trajectories pick their nearest continuation first
        for tr in sorted(trajectories,
                         key=lambda t: fabs(t["exponents"][-1])):
            best, bestd = None, None
            last = mp.mpmathify(tr["exponents"][-1])
            for i, (A, b) in enumerate(terms):
                if claimed[i]:
                    continue
                d = fabs(mp.mpmathify(b) - last)
                if bestd is None or d < bestd:
                    best, bestd = i, d
            if best is None:
                continue
            claimed[best] = True
            tr["orders"].append(model.order)
            tr["exponents"].append(terms[best][1])
            tr["amplitudes"].append(terms[best][0])
        for i, (A, b) in enumerate(terms):
            if not claimed[i]:
                trajectories.append({"orders": [model.order],
                                     "exponents": [b], "amplitudes": [A],
                                     "spurious": True})
    return trajectories
