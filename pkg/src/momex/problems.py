"""Benchmark problems and a validated loader for user-supplied ones.

A problem bundles a polynomial Hamiltonian, a Gaussian-polynomial trial
state, and optional reference values with their literature citations.  The
four builtins cover the harmonic and quartic oscillators with ground-like
and excited-like trial states.

On disk a problem is a JSON object with fields `name`, `potential` (array
of rational strings, index = power of x), `trial_poly` (array of rational
strings), `alpha` (rational string), and optionally `references` (array of
[label, value, citation] string triples).  Rationals travel as strings
("2/5", "-1/4") so nothing is ever rounded.
"""

import json
from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError, UnknownProblem, ParseError
from .qstate import GaussianPolyState, PolynomialHamiltonian


@dataclass(frozen=True)
class ProblemSpec:
    """Named Hamiltonian + trial state, with optional reference values.

    references is a tuple of (label, value, citation) string triples; the
    values are kept verbatim from the cited source, not recomputed.
    """

    name: str
    hamiltonian: PolynomialHamiltonian
    trial: GaussianPolyState
    references: tuple = ()


_QUARTIC_CITE = ("F. T. Hioe and E. W. Montroll, "
                 "J. Math. Phys. 16 (1975) 1945")


def _make_builtins():
    ho = PolynomialHamiltonian(potential=(0, 0, 1))
    aho = PolynomialHamiltonian(potential=(0, 0, 0, 0, 1))
    return {
        "ho_g": ProblemSpec(
            name="ho_g", hamiltonian=ho,
            trial=GaussianPolyState(coeffs=(1,), alpha=Fraction(2, 5)),
            references=(
                ("ground state energy", "1",
                 "exact eigenvalue of -d^2/dx^2 + x^2"),)),
        "ho_e": ProblemSpec(
            name="ho_e", hamiltonian=ho,
            trial=GaussianPolyState(coeffs=(Fraction(-1, 2), 0, 1),
                                    alpha=Fraction(2, 5)),
            references=(
                ("second even-parity energy", "5",
                 "exact eigenvalue of -d^2/dx^2 + x^2"),)),
        "aho_g": ProblemSpec(
            name="aho_g", hamiltonian=aho,
            trial=GaussianPolyState(coeffs=(1,), alpha=Fraction(3, 2)),
            references=(
                ("ground state energy", "1.060362090", _QUARTIC_CITE),)),
        "aho_e": ProblemSpec(
            name="aho_e", hamiltonian=aho,
            trial=GaussianPolyState(coeffs=(Fraction(-1, 4), 0, 1),
                                    alpha=Fraction(3, 2)),
            references=(
                ("second even-parity energy", "7.455697938",
                 _QUARTIC_CITE),)),
    }


_BUILTINS = _make_builtins()

BUILTIN_NAMES = tuple(sorted(_BUILTINS))


def builtin(name):
    """Registered problem by name; UnknownProblem otherwise."""
    try:
        return _BUILTINS[name]
    except KeyError:
        raise UnknownProblem(name) from None


def _parse_rational(s, what):
    if isinstance(s, bool) or not isinstance(s, str):
        raise ParseError(0, f"{what} must be a rational string, got {s!r}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise ParseError(0, f"{what} is not a rational: {s!r}") from None


def load_problem(text):
    """Parse and validate a problem file (see module docstring for format).

    Raises ParseError (with a 1-based line number when the JSON itself is
    malformed, 0 for schema violations) or ValidationError (alpha <= 0,
    zero trial polynomial, constant potential).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from None
    if not isinstance(doc, dict):
        raise ParseError(0, "top level must be an object")
    required = {"name", "potential", "trial_poly", "alpha"}
    missing = required - doc.keys()
    if missing:
        raise ParseError(0, f"missing fields: {', '.join(sorted(missing))}")
    unknown = doc.keys() - required - {"references"}
    if unknown:
        raise ParseError(0, f"unknown fields: {', '.join(sorted(unknown))}")
    if not isinstance(doc["name"], str):
        raise ParseError(0, "name must be a string")
    for key in ("potential", "trial_poly"):
        if not isinstance(doc[key], list):
            raise ParseError(0, f"{key} must be an array of rational strings")
    potential = [_parse_rational(s, f"potential[{i}]")
                 for i, s in enumerate(doc["potential"])]
    poly = [_parse_rational(s, f"trial_poly[{i}]")
            for i, s in enumerate(doc["trial_poly"])]
    alpha = _parse_rational(doc["alpha"], "alpha")
    if alpha <= 0:
        raise ValidationError(f"alpha must be positive, got {alpha}")
    refs = []
    for i, item in enumerate(doc.get("references", [])):
        if (not isinstance(item, list) or len(item) != 3
                or not all(isinstance(x, str) for x in item)):
            raise ParseError(
                0, f"references[{i}] must be [label, value, citation]")
        refs.append(tuple(item))
    trial = GaussianPolyState(coeffs=poly, alpha=alpha)
    if trial.is_zero:
        raise ValidationError("trial polynomial is zero")
    return ProblemSpec(name=doc["name"],
                       hamiltonian=PolynomialHamiltonian(potential=potential),
                       trial=trial, references=tuple(refs))


def serialize(spec):
    """Canonical JSON text for a ProblemSpec; round-trips bit-exactly."""
    doc = {
        "name": spec.name,
        "potential": [str(c) for c in spec.hamiltonian.potential],
        "trial_poly": [str(c) for c in spec.trial.coeffs],
        "alpha": str(spec.trial.alpha),
    }
    if spec.references:
        doc["references"] = [list(r) for r in spec.references]
    return json.dumps(doc, indent=2) + "\n"
