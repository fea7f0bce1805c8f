"""Series-to-exponentials matcher: exact cases, properties, failure modes."""

import random
from fractions import Fraction

import pytest
from mpmath import mp, mpf, mpc, fabs, im, re, conj

from momex.errors import ValidationError, SingularHankel
from momex.expmatch import (PrecisionContext, ExponentialModel,
                            characteristic_polynomial, pencil_roots,
                            solve_amplitudes, match_expansion, evaluate,
                            reconstruct_taylor, hankel_determinant,
                            max_feasible_order, _merge_roots,
                            _symmetrize_real)

CTX = PrecisionContext()


def _series(terms, count):
    """Exact coefficients Sigma d e^k, k = 0..count-1, rational terms."""
    return [sum(d * e**k for d, e in terms) for k in range(count)]


def _assert_terms(model, expected, tol=mpf(10) ** -50):
    assert len(model.terms) == len(expected)
    with mp.workdps(60):
        for (d, e), (dw, ew) in zip(model.terms, expected):
            assert fabs(d - mp.mpmathify(dw)) < tol
            assert fabs(e - mp.mpmathify(ew)) < tol


def test_two_term_integer_example():
    model = match_expansion([5, 14, 50, 194])
    assert model.effective_order == 2
    _assert_terms(model, [(2, 1), (3, 4)])


def test_rational_model_roundtrip():
    terms = [(Fraction(1, 3), Fraction(2)), (Fraction(5, 2), Fraction(7, 3))]
    model = match_expansion(_series(terms, 4))
    _assert_terms(model, terms)


def test_characteristic_polynomial_exact():
    p = characteristic_polynomial([5, 14, 50, 194])
    assert p == [Fraction(4), Fraction(-5), Fraction(1)]
    roots = pencil_roots(p, CTX)
    with mp.workdps(60):
        assert fabs(roots[0] - 1) < mpf(10) ** -55
        assert fabs(roots[1] - 4) < mpf(10) ** -55


def test_singular_hankel_reduces_order():
    # single exponential offered as a two-term problem
    with pytest.raises(SingularHankel) as err:
        characteristic_polynomial([3, 6, 12, 24])
    assert err.value.max_feasible_order == 1
    model = match_expansion([3, 6, 12, 24])
    assert model.effective_order == 1
    _assert_terms(model, [(3, 2)])


def test_zero_series_rejected():
    with pytest.raises(SingularHankel):
        match_expansion([0, 0])


def test_series_validation():
    for bad in ([], [1], [1, 2, 3]):
        with pytest.raises(ValidationError):
            match_expansion(bad)


def test_hankel_determinant_and_feasible_order():
    assert hankel_determinant([5, 14, 50, 194], 2) != 0
    assert max_feasible_order([5, 14, 50, 194]) == 2
    assert hankel_determinant([1, 2, 4, 8], 2) == 0
    assert max_feasible_order([1, 2, 4, 8]) == 1
    assert max_feasible_order([0, 0]) == 0
    assert hankel_determinant([7, 9], 0) == 1


def test_precision_context_validation():
    with pytest.raises(ValidationError):
        PrecisionContext(digits=20)
    with pytest.raises(ValidationError):
        PrecisionContext(digits=60, merge_tol=Fraction(2))
    assert PrecisionContext(digits=60).residual_tol == Fraction(1, 10 ** 45)


@pytest.mark.parametrize("seed", range(6))
def test_random_integer_models_reproduce_all_coefficients(seed):
    # the fit uses the first M equations; consistency must propagate to
    # all 2M coefficients
    rng = random.Random(seed)
    M = rng.randint(1, 3)
    exps = rng.sample(range(1, 10), M)
    terms = [(Fraction(rng.randint(1, 5)), Fraction(e)) for e in exps]
    F = _series(terms, 2 * M)
    model = match_expansion(F)
    with mp.workdps(60):
        recon = reconstruct_taylor(model, 2 * M - 1)
        for k in range(2 * M):
            want = mpf(F[k].numerator) / mpf(F[k].denominator)
            assert fabs(recon[k] - want) < mpf(10) ** -50 * max(1, fabs(want))


def test_conjugate_pair_input_closes_under_conjugation():
    with mp.workdps(80):
        d, e = mpc(0.5, 0.25), mpc(3, 4)
        F = [d * e**k + conj(d) * conj(e)**k for k in range(4)]
        F = [re(f) for f in F]        # exactly real by construction
    model = match_expansion(F, CTX)
    assert len(model.terms) == 2
    (d0, e0), (d1, e1) = model.terms
    with mp.workdps(60):
        assert fabs(e0 - conj(e1)) < mpf(10) ** -50
        assert fabs(d0 - conj(d1)) < mpf(10) ** -50
        assert im(e0) < 0 < im(e1)    # sorted by (Re, Im)


def test_merge_roots_clusters_and_keeps_precision():
    with mp.workdps(60):
        roots = [mpf(2), mpf(2) + mpf(10) ** -45, mpf(7)]
    merged = _merge_roots(roots, CTX)
    assert len(merged) == 2
    with mp.workdps(60):
        # cluster mean sits half the gap away from 2: far below ambient
        # double precision, so this pins the working-precision handling
        delta = fabs(merged[0] - 2)
        assert mpf(10) ** -46 < delta < mpf(10) ** -44


def test_symmetrize_keeps_precision_at_ambient_15_digits():
    with mp.workdps(60):
        w = mpf(1) / 3
    out = _symmetrize_real([w], CTX)[0]
    with mp.workdps(60):
        assert fabs(out - mpf(1) / 3) < mpf(10) ** -55


def test_symmetrize_drops_imaginary_dust_and_pairs_conjugates():
    with mp.workdps(60):
        dusty = mpc(mpf(5), mpf(10) ** -40)
        pair = [mpc(1, 2) + mpc(0, mpf(10) ** -40), mpc(1, -2)]
    out = _symmetrize_real([dusty] + pair, CTX)
    real = [w for w in out if im(w) == 0]
    cplx = [w for w in out if im(w) != 0]
    assert len(real) == 1 and len(cplx) == 2
    with mp.workdps(60):
        assert fabs(cplx[0] - conj(cplx[1])) == 0


def test_solve_amplitudes_requires_roots():
    with pytest.raises(ValidationError):
        solve_amplitudes([1, 2], [], CTX)


def test_evaluate_and_reconstruct():
    model = match_expansion([5, 14, 50, 194])
    with mp.workdps(60):
        assert fabs(evaluate(model, 0, CTX) - 5) < mpf(10) ** -55
        want = 2 * mp.exp(-1) + 3 * mp.exp(-4)
        assert fabs(evaluate(model, 1, CTX) - want) < mpf(10) ** -55


def test_reconstruct_constant_only_contributes_at_order_zero():
    model = ExponentialModel(terms=((mpf(2), mpf(3)),), effective_order=1,
                             constant=mpf(4))
    with mp.workdps(60):
        r = reconstruct_taylor(model, 2)
        assert r[0] == 6 and r[1] == 6 and r[2] == 18
