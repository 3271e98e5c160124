"""Exact noncommutative polynomial algebra over block symbols.

A path polynomial is a finite integer combination of ordered products of
block symbols W[i].  Each product is stored as a tuple of block indices,
leftmost first, where the leftmost factor is the block applied last (the
one closest to the network output):

  1 + W[3] + W[3]*W[2]   ->   {(): 1, (3,): 1, (3, 2): 1}

The empty tuple is the identity term "1".  The zero polynomial stores no
terms.  Coefficients are plain Python ints, so equality checks are exact;
multiplication concatenates factor tuples and never reorders them.

Canonical term order (used for rendering and iteration) is ascending
factor-sequence length, then lexicographically descending indices, which
puts "1" first and deeper blocks before shallower ones within a length.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, NamedTuple

Factors = tuple[int, ...]


@dataclass(frozen=True)
class BlockSymbol:
    """A single block mapping symbol W[index], index >= 1."""

    index: int

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError(f"block index must be >= 1, got {self.index}")

    def __str__(self) -> str:
        return f"W[{self.index}]"


@dataclass(frozen=True)
class PathTerm:
    """One signed product of block symbols; factors leftmost = applied last."""

    coeff: int
    factors: Factors

    def __str__(self) -> str:
        if not self.factors:
            return str(self.coeff)
        body = "*".join(f"W[{i}]" for i in self.factors)
        if self.coeff == 1:
            return body
        if self.coeff == -1:
            return f"-{body}"
        return f"{self.coeff}*{body}"


def _term_sort_key(factors: Factors) -> tuple:
    # Ascending length, then descending indices within a length.
    return (len(factors), tuple(-i for i in factors))


class PathPolynomial:
    """Immutable integer-weighted sum of ordered block-symbol products."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Factors, int] | None = None):
        normalized: dict[Factors, int] = {}
        if terms:
            for factors, coeff in terms.items():
                key = tuple(factors)
                if any(i < 1 for i in key):
                    raise ValueError(f"block index must be >= 1 in {key}")
                if coeff:
                    normalized[key] = coeff
        object.__setattr__(self, "_terms", normalized)

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls) -> "PathPolynomial":
        return cls()

    @classmethod
    def one(cls) -> "PathPolynomial":
        return cls({(): 1})

    @classmethod
    def constant(cls, value: int) -> "PathPolynomial":
        return cls({(): value})

    @classmethod
    def block(cls, index: int | BlockSymbol) -> "PathPolynomial":
        """The polynomial consisting of the single symbol W[index]."""
        idx = index.index if isinstance(index, BlockSymbol) else index
        if idx < 1:
            raise ValueError(f"block index must be >= 1, got {idx}")
        return cls({(idx,): 1})

    # -- inspection ---------------------------------------------------

    @property
    def coefficients(self) -> dict[Factors, int]:
        """Copy of the factor-sequence -> coefficient map."""
        return dict(self._terms)

    def coefficient(self, factors: Iterable[int]) -> int:
        return self._terms.get(tuple(factors), 0)

    def terms(self) -> Iterator[PathTerm]:
        """Yield terms in canonical order."""
        for factors in sorted(self._terms, key=_term_sort_key):
            yield PathTerm(self._terms[factors], factors)

    def max_length(self) -> int:
        """Length of the longest factor sequence (0 for constants and zero)."""
        return max((len(f) for f in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_one(self) -> bool:
        return self._terms == {(): 1}

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PathPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other: "PathPolynomial") -> "PathPolynomial":
        return poly_add(self, other)

    def __sub__(self, other: "PathPolynomial") -> "PathPolynomial":
        return poly_add(self, poly_neg(other))

    def __neg__(self) -> "PathPolynomial":
        return poly_neg(self)

    def __mul__(self, other: "PathPolynomial") -> "PathPolynomial":
        return poly_mul(self, other)

    def __repr__(self) -> str:
        return f"PathPolynomial({self._terms!r})"

    def __str__(self) -> str:
        return render_poly(self)


def poly_add(a: PathPolynomial, b: PathPolynomial) -> PathPolynomial:
    """Coefficient-wise sum; zero coefficients are dropped."""
    out = dict(a._terms)
    for factors, coeff in b._terms.items():
        total = out.get(factors, 0) + coeff
        if total:
            out[factors] = total
        else:
            out.pop(factors, None)
    return PathPolynomial(out)


def poly_neg(a: PathPolynomial) -> PathPolynomial:
    return PathPolynomial({f: -c for f, c in a._terms.items()})


def poly_mul(a: PathPolynomial, b: PathPolynomial) -> PathPolynomial:
    """Distributive noncommutative product.

    Factor sequences concatenate as (factors of a) + (factors of b): the
    left operand is the later stage, so its blocks end up closer to the
    output.  Coefficients multiply.
    """
    out: dict[Factors, int] = {}
    for fa, ca in a._terms.items():
        for fb, cb in b._terms.items():
            key = fa + fb
            out[key] = out.get(key, 0) + ca * cb
    return PathPolynomial(out)


class CensusBin(NamedTuple):
    """Count of distinct terms of one length and their total |coeff| weight."""

    count: int
    weight: int


def census(p: PathPolynomial) -> dict[int, CensusBin]:
    """Group terms by factor-sequence length.

    Returns a map length -> (number of distinct terms, sum of |coeff|),
    with lengths in ascending order.  The zero polynomial yields {}.
    """
    counts: dict[int, int] = {}
    weights: dict[int, int] = {}
    for factors, coeff in p._terms.items():
        k = len(factors)
        counts[k] = counts.get(k, 0) + 1
        weights[k] = weights.get(k, 0) + abs(coeff)
    return {k: CensusBin(counts[k], weights[k]) for k in sorted(counts)}


def render_poly(p: PathPolynomial) -> str:
    """Canonical text form: terms joined by " + "/" - ", identity as "1"."""
    if p.is_zero():
        return "0"
    parts: list[str] = []
    for term in p.terms():
        mag = abs(term.coeff)
        if not term.factors:
            text = str(mag)
        else:
            body = "*".join(f"W[{i}]" for i in term.factors)
            text = body if mag == 1 else f"{mag}*{body}"
        if not parts:
            parts.append(text if term.coeff > 0 else f"-{text}")
        else:
            parts.append(("+ " if term.coeff > 0 else "- ") + text)
    return " ".join(parts)


class StateExpansion:
    """A state written over free input states: X_L = sum_j P_j * X_j."""

    __slots__ = ("_components",)

    def __init__(self, components: Mapping[int, PathPolynomial]):
        self._components = {
            j: p for j, p in sorted(components.items()) if not p.is_zero()
        }

    @property
    def components(self) -> dict[int, PathPolynomial]:
        return dict(self._components)

    def component(self, j: int) -> PathPolynomial:
        return self._components.get(j, PathPolynomial.zero())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StateExpansion):
            return NotImplemented
        return self._components == other._components

    def __hash__(self) -> int:
        return hash(tuple(self._components.items()))

    def __str__(self) -> str:
        if not self._components:
            return "0"
        parts = []
        for j, poly in self._components.items():
            parts.append(f"({render_poly(poly)})*X[{j}]")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"StateExpansion({self._components!r})"
