"""Unrolling and derivative expansion of recursion formulas.

Two independent routes produce the derivative polynomial of the final
state with respect to an earlier one:

  * ``derivative`` runs the backward recurrence: starting from the
    identity at the final state, each state's polynomial is pushed to the
    states it depends on, multiplying its dependency coefficient on the
    right (deeper blocks stay on the left).
  * ``derivative_bruteforce`` unrolls the recursion forward while holding
    the queried state as a free symbol and reads off its coefficient.

For affine formulas the two must agree exactly; the test suite leans on
that equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

from .algebra import PathPolynomial, StateExpansion, census, poly_add, poly_mul
from .errors import DepthError
from .parser import ArchitectureSpec

DEFAULT_DEPTH_CAP = 24


@dataclass(frozen=True)
class DerivativeQuery:
    """A (spec, depth, source index) triple naming one derivative."""

    spec: ArchitectureSpec
    depth: int
    wrt: int

    def __post_init__(self) -> None:
        if not 0 <= self.wrt <= self.depth:
            raise ValueError(f"wrt must be in [0, {self.depth}], got {self.wrt}")

    def evaluate(self, depth_cap: int = DEFAULT_DEPTH_CAP) -> PathPolynomial:
        return derivative(self.spec, self.depth, self.wrt, depth_cap=depth_cap)


def _check_depth(L: int, depth_cap: int) -> None:
    if L < 1:
        raise ValueError(f"depth must be >= 1, got {L}")
    if L > depth_cap:
        raise DepthError(
            f"depth {L} exceeds the expansion cap {depth_cap};"
            " raise the cap explicitly if you mean it"
        )


def unroll(
    spec: ArchitectureSpec, L: int, depth_cap: int = DEFAULT_DEPTH_CAP
) -> StateExpansion:
    """Express X[L] over the free input states, substituting all base cases."""
    _check_depth(L, depth_cap)
    states: dict[int, dict[int, PathPolynomial]] = {
        j: {j: PathPolynomial.one()} for j in spec.input_indices
    }
    for i in range(1, L + 1):
        if i in states:
            continue
        acc: dict[int, PathPolynomial] = {}
        for source, coeff in spec.instantiate_terms(i):
            for j, poly in states[source].items():
                contribution = poly_mul(coeff, poly)
                acc[j] = poly_add(acc.get(j, PathPolynomial.zero()), contribution)
        states[i] = acc
    return StateExpansion(states[L])


def derivative(
    spec: ArchitectureSpec, L: int, j: int, depth_cap: int = DEFAULT_DEPTH_CAP
) -> PathPolynomial:
    """Derivative of X[L] with respect to X[j] via the backward recurrence.

    W symbols are treated as constants: a coefficient like W[i-1] carries
    no derivative of its own, it is the block Jacobian itself.
    """
    _check_depth(L, depth_cap)
    if not 0 <= j <= L:
        raise ValueError(f"wrt index must be in [0, {L}], got {j}")
    f: dict[int, PathPolynomial] = {i: PathPolynomial.zero() for i in range(0, L + 1)}
    f[L] = PathPolynomial.one()
    for i in range(L, 0, -1):
        if f[i].is_zero():
            continue
        for source, coeff in spec.instantiate_terms(i):
            if source >= j:
                f[source] = poly_add(f[source], poly_mul(f[i], coeff))
    return f[j]


def derivative_bruteforce(
    spec: ArchitectureSpec, L: int, j: int, depth_cap: int = DEFAULT_DEPTH_CAP
) -> PathPolynomial:
    """Independent oracle: unroll forward with X[j] held free."""
    _check_depth(L, depth_cap)
    if not 0 <= j <= L:
        raise ValueError(f"wrt index must be in [0, {L}], got {j}")
    states: dict[int, dict[int, PathPolynomial]] = {}
    for free in spec.input_indices:
        states[free] = {free: PathPolynomial.one()}
    states[j] = {j: PathPolynomial.one()}
    for i in range(1, L + 1):
        if i in states:
            continue
        acc: dict[int, PathPolynomial] = {}
        for source, coeff in spec.instantiate_terms(i):
            for key, poly in states[source].items():
                contribution = poly_mul(coeff, poly)
                acc[key] = poly_add(acc.get(key, PathPolynomial.zero()), contribution)
        states[i] = acc
    return states[L].get(j, PathPolynomial.zero())


# ---------------------------------------------------------------------------
# Structure checks
# ---------------------------------------------------------------------------

CHECK_KINDS = ("binomial", "single-path", "widest")


@dataclass(frozen=True)
class Violation:
    length: int
    expected: object
    actual: object

    def to_dict(self) -> dict:
        return {"length": self.length, "expected": self.expected, "actual": self.actual}


@dataclass(frozen=True)
class StructureReport:
    """Outcome of one structural claim about a derivative polynomial."""

    spec: str
    depth: int
    wrt: int | None
    check: str
    passed: bool
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec,
            "depth": self.depth,
            "wrt": self.wrt,
            "check": self.check,
            "pass": self.passed,
            "violations": [v.to_dict() for v in self.violations],
        }


def check_structure(
    poly: PathPolynomial, kind: str, L: int, j: int, spec_name: str = ""
) -> StructureReport:
    """Check a path-structure claim about derivative(spec, L, j).

    Violations are data, not errors: the report lists each failed length
    with the expected and observed values.

    kind="binomial":    the count of length-k paths is C(L-j, k).
    kind="single-path": exactly one path per length 0..L-j.
    kind="widest":      the unique length-k path uses the k deepest blocks
                        W[L]*W[L-1]*...*W[L-k+1].
    """
    if kind not in CHECK_KINDS:
        raise ValueError(f"unknown check kind {kind!r}; choose from {CHECK_KINDS}")
    i = L - j
    if i < 0:
        raise ValueError(f"wrt index {j} exceeds depth {L}")
    counts = {k: entry.count for k, entry in census(poly).items()}
    violations: list[Violation] = []

    if kind == "binomial":
        for k in range(0, i + 1):
            expected = comb(i, k)
            actual = counts.get(k, 0)
            if actual != expected:
                violations.append(Violation(k, expected, actual))
        for k in sorted(counts):
            if k > i:
                violations.append(Violation(k, 0, counts[k]))
    elif kind == "single-path":
        for k in range(0, i + 1):
            actual = counts.get(k, 0)
            if actual != 1:
                violations.append(Violation(k, 1, actual))
        for k in sorted(counts):
            if k > i:
                violations.append(Violation(k, 0, counts[k]))
    else:  # widest
        by_length: dict[int, list] = {}
        for term in poly.terms():
            by_length.setdefault(len(term.factors), []).append(term)
        for k in range(0, i + 1):
            expected_factors = tuple(range(L, L - k, -1))
            expected_text = (
                "*".join(f"W[{b}]" for b in expected_factors) if k else "1"
            )
            terms = by_length.get(k, [])
            if len(terms) != 1 or terms[0].factors != expected_factors:
                actual_text = " + ".join(str(t) for t in terms) if terms else "absent"
                violations.append(Violation(k, expected_text, actual_text))
        for k in sorted(by_length):
            if k > i:
                violations.append(
                    Violation(k, "absent", " + ".join(str(t) for t in by_length[k]))
                )

    return StructureReport(
        spec=spec_name,
        depth=L,
        wrt=j,
        check=kind,
        passed=not violations,
        violations=tuple(violations),
    )


# ---------------------------------------------------------------------------
# Equivalence and identities
# ---------------------------------------------------------------------------


def value_equivalence(
    spec_a: ArchitectureSpec,
    spec_b: ArchitectureSpec,
    L: int,
    depth_cap: int = DEFAULT_DEPTH_CAP,
) -> bool:
    """True iff both specs unroll to the same expansion at depth L."""
    return unroll(spec_a, L, depth_cap) == unroll(spec_b, L, depth_cap)


def value_equivalence_report(
    spec_a: ArchitectureSpec,
    spec_b: ArchitectureSpec,
    L: int,
    depth_cap: int = DEFAULT_DEPTH_CAP,
) -> StructureReport:
    """Term-by-term comparison of the two unrolled expansions."""
    ea = unroll(spec_a, L, depth_cap).components
    eb = unroll(spec_b, L, depth_cap).components
    violations: list[Violation] = []
    for j in sorted(set(ea) | set(eb)):
        pa = ea.get(j, PathPolynomial.zero())
        pb = eb.get(j, PathPolynomial.zero())
        if pa == pb:
            continue
        keys = set(pa.coefficients) | set(pb.coefficients)
        for factors in sorted(keys, key=lambda f: (len(f), f)):
            ca = pa.coefficient(factors)
            cb = pb.coefficient(factors)
            if ca != cb:
                term = "*".join(f"W[{b}]" for b in factors) if factors else "1"
                violations.append(
                    Violation(len(factors), f"{ca}*{term} (X[{j}])", f"{cb}*{term}")
                )
    return StructureReport(
        spec=f"{spec_a.name} vs {spec_b.name}",
        depth=L,
        wrt=None,
        check="value-equivalence",
        passed=not violations,
        violations=tuple(violations),
    )


def verify_chain_identity(
    spec: ArchitectureSpec, m: int, depth_cap: int = DEFAULT_DEPTH_CAP
) -> bool:
    """Check d X[m]/d X[m-2] == d X[m]/d X[m-1] * (1 + W[m-1]) - W[m-1].

    This is the two-step chain-rule consistency condition satisfied by the
    two-lag architecture; it fails for plain shortcut recursions.
    """
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    lhs = derivative(spec, m, m - 2, depth_cap)
    one_plus_w = poly_add(PathPolynomial.one(), PathPolynomial.block(m - 1))
    rhs = poly_add(
        poly_mul(derivative(spec, m, m - 1, depth_cap), one_plus_w),
        -PathPolynomial.block(m - 1),
    )
    return lhs == rhs
