"""Parser and renderer for the recursion-formula DSL.

Grammar (whitespace-insensitive; one statement per line or ';'; a "#"
starts a comment that runs to end of line; files use extension ".rf"):

    statement := "X[" idx "]" "=" expr  |  "X[0] = input"
    expr      := ["+"|"-"] term (("+"|"-") term)*
    term      := factor ("*" factor)*
    factor    := integer | "W[" idx "]" | "X[" idx "]" | "(" expr ")"
    idx       := identifier (("+"|"-") integer)? | integer

Two liberties beyond the minimal grammar: any integer literal is accepted
where "1" would be (so collected coefficients such as "2*X[i-1]" can be
re-read), and a unary sign is accepted before the first term of an
expression.  Both keep parse(render(spec)) an identity.

A statement whose left-hand index is an identifier defines the recursion
rule; integer left-hand indices define base cases; "X[0] = input" declares
the free input state.  The parser distributes parenthesized sums, collects
the per-source coefficient polynomials, and rejects anything that is not
affine in the X symbols (exactly one X factor per distributed term, in
rightmost position).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, NamedTuple

from .algebra import PathPolynomial
from .errors import (
    FormulaSyntaxError,
    NonAffineError,
    NonCausalError,
    RangeError,
)

# A coefficient atom: ("rel", c) denotes W[v-c] for the rule variable v,
# ("abs", k) denotes W[k].
WAtom = tuple[str, int]
WKey = tuple[WAtom, ...]

REL = "rel"
ABS = "abs"


def _atom_sort_key(atom: WAtom) -> tuple[int, int]:
    # Relative atoms by ascending offset (descending block index), then
    # absolute atoms by descending index.
    kind, value = atom
    return (0, value) if kind == REL else (1, -value)


def _coeff_term_key(atoms: WKey) -> tuple:
    return (len(atoms), tuple(_atom_sort_key(a) for a in atoms))


class CoefficientExpr:
    """Integer polynomial in W symbols, independent of the X states."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[WKey, int] | None = None):
        normalized: dict[WKey, int] = {}
        if terms:
            for atoms, coeff in terms.items():
                if coeff:
                    normalized[tuple(atoms)] = coeff
        object.__setattr__(self, "_terms", normalized)

    @classmethod
    def constant(cls, value: int) -> "CoefficientExpr":
        return cls({(): value})

    @classmethod
    def one(cls) -> "CoefficientExpr":
        return cls.constant(1)

    @classmethod
    def w_rel(cls, offset: int, coeff: int = 1) -> "CoefficientExpr":
        return cls({((REL, offset),): coeff})

    @classmethod
    def w_abs(cls, index: int, coeff: int = 1) -> "CoefficientExpr":
        return cls({((ABS, index),): coeff})

    @property
    def terms(self) -> dict[WKey, int]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_one(self) -> bool:
        return self._terms == {(): 1}

    def degree(self) -> int:
        """Largest number of W factors in any term."""
        return max((len(k) for k in self._terms), default=0)

    def atoms(self) -> Iterator[WAtom]:
        for key in self._terms:
            yield from key

    def instantiate(self, at_index: int | None) -> PathPolynomial:
        """Resolve atoms to concrete block indices for the state X[at_index].

        Relative atoms require at_index; absolute atoms never do.
        """
        out: dict[tuple[int, ...], int] = {}
        for atoms, coeff in self._terms.items():
            factors = []
            for kind, value in atoms:
                if kind == REL:
                    if at_index is None:
                        raise ValueError("relative W atom without a defining index")
                    factors.append(at_index - value)
                else:
                    factors.append(value)
            key = tuple(factors)
            out[key] = out.get(key, 0) + coeff
        return PathPolynomial(out)

    def render(self, var: str) -> str:
        """Canonical text, e.g. "1 + W[i]" or "-W[i-1]"."""
        if not self._terms:
            return "0"
        parts: list[str] = []
        for atoms in sorted(self._terms, key=_coeff_term_key):
            coeff = self._terms[atoms]
            mag = abs(coeff)
            if not atoms:
                text = str(mag)
            else:
                body = "*".join(_render_watom(a, var) for a in atoms)
                text = body if mag == 1 else f"{mag}*{body}"
            if not parts:
                parts.append(text if coeff > 0 else f"-{text}")
            else:
                parts.append(("+ " if coeff > 0 else "- ") + text)
        return " ".join(parts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoefficientExpr):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        return f"CoefficientExpr({self._terms!r})"


def _render_watom(atom: WAtom, var: str) -> str:
    kind, value = atom
    if kind == ABS:
        return f"W[{value}]"
    if value == 0:
        return f"W[{var}]"
    return f"W[{var}-{value}]"


@dataclass(frozen=True)
class RuleTerm:
    """One summand of the recursion rule: coeff * X[source].

    Exactly one of ``lag`` (relative source X[v-lag], lag >= 1) and
    ``source`` (absolute source X[source]) is set.
    """

    coeff: CoefficientExpr
    lag: int | None = None
    source: int | None = None

    def __post_init__(self) -> None:
        if (self.lag is None) == (self.source is None):
            raise ValueError("exactly one of lag/source must be set")
        if self.lag is not None and self.lag < 1:
            raise ValueError(f"lag must be >= 1, got {self.lag}")
        if self.source is not None and self.source < 0:
            raise ValueError(f"source must be >= 0, got {self.source}")


@dataclass(frozen=True)
class RecursionRule:
    """The uniform recursion X[v] = sum of coeff * X[earlier]."""

    index_var: str
    terms: tuple[RuleTerm, ...]

    def __post_init__(self) -> None:
        if not self.terms:
            raise ValueError("a recursion rule needs at least one term")
        object.__setattr__(self, "terms", _sort_rule_terms(self.terms))
        lags = [t.lag for t in self.terms if t.lag is not None]
        sources = [t.source for t in self.terms if t.source is not None]
        if len(set(lags)) != len(lags) or len(set(sources)) != len(sources):
            raise ValueError("duplicate sources in rule terms")

    @property
    def max_lag(self) -> int:
        return max((t.lag for t in self.terms if t.lag is not None), default=0)


def _sort_rule_terms(terms: tuple[RuleTerm, ...]) -> tuple[RuleTerm, ...]:
    rel = sorted((t for t in terms if t.lag is not None), key=lambda t: t.lag)
    absolute = sorted((t for t in terms if t.source is not None), key=lambda t: t.source)
    return tuple(rel) + tuple(absolute)


@dataclass(frozen=True)
class BaseCase:
    """An explicitly defined low state, or the free-input declaration."""

    index: int
    terms: tuple[tuple[int, CoefficientExpr], ...] = ()
    is_input: bool = False

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError("base-case index must be >= 0")
        if self.is_input:
            if self.terms:
                raise ValueError("the input declaration carries no expression")
            return
        if not self.terms:
            raise ValueError(f"base case X[{self.index}] has no terms")
        cleaned = []
        for source, coeff in sorted(self.terms, key=lambda t: t[0]):
            if any(kind == REL for kind, _ in coeff.atoms()):
                raise ValueError("base-case coefficients must use absolute W indices")
            if not coeff.is_zero():
                cleaned.append((source, coeff))
        object.__setattr__(self, "terms", tuple(cleaned))


@dataclass(frozen=True)
class ArchitectureSpec:
    """A validated recursion rule with its base cases.

    ``depth`` and ``name`` are presentation metadata; they do not take part
    in structural equality and are not emitted by :func:`render`.
    """

    rule: RecursionRule
    base_cases: tuple[BaseCase, ...]
    depth: int = 6
    name: str = "spec"

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "base_cases", tuple(sorted(self.base_cases, key=lambda b: b.index))
        )
        self.validate()

    # -- structure ------------------------------------------------------

    @property
    def first_rule_index(self) -> int:
        """Smallest state index computed by the rule."""
        return self.base_cases[-1].index + 1

    @property
    def input_indices(self) -> tuple[int, ...]:
        return tuple(b.index for b in self.base_cases if b.is_input)

    def base_case(self, index: int) -> BaseCase | None:
        for base in self.base_cases:
            if base.index == index:
                return base
        return None

    def instantiate_terms(self, i: int) -> list[tuple[int, PathPolynomial]]:
        """Dependencies of state i as (source index, coefficient polynomial)."""
        if i < 1:
            return []
        base = self.base_case(i)
        if base is not None:
            if base.is_input:
                return []
            return [(src, coeff.instantiate(None)) for src, coeff in base.terms]
        pairs = []
        for term in self.rule.terms:
            source = i - term.lag if term.lag is not None else term.source
            pairs.append((source, term.coeff.instantiate(i)))
        return pairs

    def structurally_equal(self, other: "ArchitectureSpec") -> bool:
        """Equality of rule and base cases, ignoring name and depth."""
        return self.rule == other.rule and self.base_cases == other.base_cases

    def same_recursion(self, other: "ArchitectureSpec") -> bool:
        """Like structurally_equal but indifferent to the index-variable name."""
        return (
            self.rule.terms == other.rule.terms
            and self.base_cases == other.base_cases
        )

    # -- validation -------------------------------------------------------

    def validate(self) -> None:
        if self.depth < 1:
            raise RangeError(f"depth must be >= 1, got {self.depth}")
        if not self.base_cases:
            raise FormulaSyntaxError("missing base cases (need at least X[0] = input)")
        indices = [b.index for b in self.base_cases]
        if len(set(indices)) != len(indices):
            raise FormulaSyntaxError("duplicate base-case indices")
        if indices != list(range(len(indices))):
            raise FormulaSyntaxError(
                "base cases must cover a contiguous range starting at X[0]"
            )
        for base in self.base_cases:
            if base.is_input != (base.index == 0):
                raise FormulaSyntaxError("X[0], and only X[0], is the free input")
            for source, coeff in base.terms:
                if not 0 <= source < base.index:
                    raise NonCausalError(
                        f"base case X[{base.index}] references X[{source}]"
                    )
                for kind, value in coeff.atoms():
                    if kind == ABS and not 1 <= value <= base.index:
                        raise RangeError(
                            f"W[{value}] outside [1, {base.index}] in base case"
                            f" X[{base.index}]"
                        )
        i_min = self.first_rule_index
        var = self.rule.index_var
        if self.rule.max_lag > i_min:
            raise RangeError(
                f"rule references X[{var}-{self.rule.max_lag}], which is"
                f" negative at the first rule state X[{i_min}]"
            )
        for term in self.rule.terms:
            if term.source is not None and term.source >= i_min:
                raise NonCausalError(
                    f"rule references X[{term.source}], which the rule itself"
                    f" defines (first rule state is X[{i_min}])"
                )
            for kind, value in term.coeff.atoms():
                if kind == REL and value > i_min - 1:
                    raise RangeError(
                        f"W[{var}-{value}] falls below W[1] at the first rule"
                        f" state X[{i_min}]"
                    )
                if kind == ABS and not 1 <= value <= i_min:
                    raise RangeError(
                        f"W[{value}] outside [1, {i_min}] for the first rule"
                        f" state X[{i_min}]"
                    )


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------


class Token(NamedTuple):
    kind: str
    value: str
    pos: int


_SYMBOLS = {
    "[": "LBRACK",
    "]": "RBRACK",
    "(": "LPAREN",
    ")": "RPAREN",
    "+": "PLUS",
    "-": "MINUS",
    "*": "STAR",
    "=": "EQUALS",
}


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r":
            i += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "\n" or ch == ";":
            tokens.append(Token("SEP", ch, i))
            i += 1
            continue
        if ch == "−":  # unicode minus, treated like '-'
            tokens.append(Token("MINUS", "-", i))
            i += 1
            continue
        if ch in _SYMBOLS:
            tokens.append(Token(_SYMBOLS[ch], ch, i))
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("INT", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("NAME", text[i:j], i))
            i = j
            continue
        raise FormulaSyntaxError(f"unexpected character {ch!r}", position=i)
    tokens.append(Token("EOF", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _WorkAtom(NamedTuple):
    sym: str  # "W" or "X"
    mode: str  # REL or ABS
    value: int
    pos: int


_Term = tuple[int, tuple[_WorkAtom, ...]]


@dataclass
class _Statement:
    pos: int
    lhs_kind: str  # "rule" or "base"
    lhs_value: object  # variable name (str) or state index (int)
    is_input: bool = False
    terms: list[_Term] = field(default_factory=list)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        # Set per statement: the rule's index variable, or the base-case index.
        self.context_var: str | None = None
        self.context_base: int | None = None

    # -- token plumbing -------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise FormulaSyntaxError(
                f"expected {what}, found {tok.value or 'end of input'!r}",
                position=tok.pos,
            )
        return self.advance()

    def skip_separators(self) -> None:
        while self.peek().kind == "SEP":
            self.advance()

    # -- statements ------------------------------------------------------

    def parse_statements(self) -> list[_Statement]:
        statements = []
        self.skip_separators()
        while self.peek().kind != "EOF":
            statements.append(self.parse_statement())
            tok = self.peek()
            if tok.kind not in ("SEP", "EOF"):
                raise FormulaSyntaxError(
                    f"expected end of statement, found {tok.value!r}",
                    position=tok.pos,
                )
            self.skip_separators()
        return statements

    def parse_statement(self) -> _Statement:
        start = self.peek()
        name = self.expect("NAME", "'X['")
        if name.value != "X":
            raise FormulaSyntaxError(
                f"statements define X states, found {name.value!r}", position=name.pos
            )
        self.expect("LBRACK", "'['")
        idx = self.parse_index()
        self.expect("RBRACK", "']'")
        self.expect("EQUALS", "'='")

        if idx[0] == REL:
            var, offset, pos = idx[1], idx[2], idx[3]
            if offset != 0:
                raise FormulaSyntaxError(
                    "the rule left-hand side must be a bare X[var]", position=pos
                )
            stmt = _Statement(pos=start.pos, lhs_kind="rule", lhs_value=var)
            self.context_var = var
            self.context_base = None
        else:
            index = idx[1]
            stmt = _Statement(pos=start.pos, lhs_kind="base", lhs_value=index)
            self.context_var = None
            self.context_base = index
            tok = self.peek()
            if tok.kind == "NAME" and tok.value == "input":
                self.advance()
                if index != 0:
                    raise FormulaSyntaxError(
                        "only X[0] may be declared as the input", position=tok.pos
                    )
                stmt.is_input = True
                return stmt
            if index == 0:
                raise FormulaSyntaxError(
                    "X[0] is the free input and cannot be defined", position=start.pos
                )
        stmt.terms = self.parse_expr()
        return stmt

    def parse_index(self):
        tok = self.peek()
        if tok.kind == "INT":
            self.advance()
            return (ABS, int(tok.value), None, tok.pos)
        if tok.kind == "NAME":
            self.advance()
            offset = 0
            nxt = self.peek()
            if nxt.kind in ("PLUS", "MINUS"):
                self.advance()
                num = self.expect("INT", "an integer offset")
                offset = int(num.value) if nxt.kind == "MINUS" else -int(num.value)
            return (REL, tok.value, offset, tok.pos)
        raise FormulaSyntaxError(
            f"expected an index, found {tok.value or 'end of input'!r}",
            position=tok.pos,
        )

    # -- expressions -------------------------------------------------------

    def parse_expr(self) -> list[_Term]:
        terms: list[_Term] = []
        sign = 1
        tok = self.peek()
        if tok.kind in ("PLUS", "MINUS"):
            self.advance()
            sign = -1 if tok.kind == "MINUS" else 1
        terms.extend(_scale(self.parse_product(), sign))
        while self.peek().kind in ("PLUS", "MINUS"):
            op = self.advance()
            sign = -1 if op.kind == "MINUS" else 1
            terms.extend(_scale(self.parse_product(), sign))
        return terms

    def parse_product(self) -> list[_Term]:
        value = self.parse_factor()
        while self.peek().kind == "STAR":
            self.advance()
            rhs = self.parse_factor()
            value = [
                (ca * cb, aa + ab) for ca, aa in value for cb, ab in rhs
            ]
        return value

    def parse_factor(self) -> list[_Term]:
        tok = self.peek()
        if tok.kind == "INT":
            self.advance()
            return [(int(tok.value), ())]
        if tok.kind == "LPAREN":
            self.advance()
            inner = self.parse_expr()
            self.expect("RPAREN", "')'")
            return inner
        if tok.kind == "NAME" and tok.value in ("W", "X"):
            self.advance()
            self.expect("LBRACK", "'['")
            idx = self.parse_index()
            close = self.expect("RBRACK", "']'")
            atom = self.make_atom(tok.value, idx)
            return [(1, (atom,))]
        if tok.kind == "NAME" and tok.value == "input":
            raise FormulaSyntaxError(
                "'input' may only stand alone in 'X[0] = input'", position=tok.pos
            )
        raise FormulaSyntaxError(
            f"expected a factor, found {tok.value or 'end of input'!r}",
            position=tok.pos,
        )

    def make_atom(self, sym: str, idx) -> _WorkAtom:
        kind, a, b, pos = idx
        if kind == REL:
            var, offset = a, b
            if self.context_var is None:
                raise FormulaSyntaxError(
                    "relative indices are not allowed in base cases", position=pos
                )
            if var != self.context_var:
                raise FormulaSyntaxError(
                    f"unknown index variable {var!r} (rule variable is"
                    f" {self.context_var!r})",
                    position=pos,
                )
            if sym == "X":
                if offset < 1:
                    raise NonCausalError(
                        "X reference must be strictly earlier than the defined state",
                        position=pos,
                    )
            else:
                if offset < 0:
                    raise RangeError(
                        "W index exceeds the defined state index", position=pos
                    )
            return _WorkAtom(sym, REL, offset, pos)
        index = a
        if sym == "W":
            if index < 1:
                raise RangeError("W indices start at 1", position=pos)
            if self.context_base is not None and index > self.context_base:
                raise RangeError(
                    f"W[{index}] outside [1, {self.context_base}]", position=pos
                )
        else:
            if self.context_base is not None and index >= self.context_base:
                raise NonCausalError(
                    f"X[{index}] is not earlier than X[{self.context_base}]",
                    position=pos,
                )
        return _WorkAtom(sym, ABS, index, pos)


def _scale(terms: list[_Term], sign: int) -> list[_Term]:
    if sign == 1:
        return terms
    return [(-c, atoms) for c, atoms in terms]


def _classify(terms: list[_Term], stmt_pos: int):
    """Split distributed terms into per-source coefficient dicts."""
    rel: dict[int, dict[WKey, int]] = {}
    absolute: dict[int, dict[WKey, int]] = {}
    for coeff, atoms in terms:
        if coeff == 0:
            continue
        x_positions = [k for k, a in enumerate(atoms) if a.sym == "X"]
        if len(x_positions) != 1:
            raise NonAffineError(
                f"each term needs exactly one X factor, found {len(x_positions)}",
                position=atoms[0].pos if atoms else stmt_pos,
            )
        if x_positions[0] != len(atoms) - 1:
            raise NonAffineError(
                "the X factor must be the rightmost factor of its term",
                position=atoms[x_positions[0]].pos,
            )
        x = atoms[-1]
        key: WKey = tuple((a.mode, a.value) for a in atoms[:-1])
        bucket = rel if x.mode == REL else absolute
        slot = bucket.setdefault(x.value, {})
        slot[key] = slot.get(key, 0) + coeff
    return rel, absolute


def parse(text: str, *, name: str = "spec", depth: int = 6) -> ArchitectureSpec:
    """Parse DSL text into an ArchitectureSpec.

    ``name`` and ``depth`` are metadata the DSL itself does not carry.
    """
    parser = _Parser(text)
    statements = parser.parse_statements()

    rule: RecursionRule | None = None
    rule_pos = 0
    base_cases: list[BaseCase] = []
    seen_bases: set[int] = set()

    for stmt in statements:
        if stmt.lhs_kind == "rule":
            if rule is not None:
                raise FormulaSyntaxError(
                    "only one recursion rule per spec", position=stmt.pos
                )
            rel, absolute = _classify(stmt.terms, stmt.pos)
            terms: list[RuleTerm] = []
            for lag, coeffs in rel.items():
                expr = CoefficientExpr(coeffs)
                if not expr.is_zero():
                    terms.append(RuleTerm(coeff=expr, lag=lag))
            for source, coeffs in absolute.items():
                expr = CoefficientExpr(coeffs)
                if not expr.is_zero():
                    terms.append(RuleTerm(coeff=expr, source=source))
            if not terms:
                raise FormulaSyntaxError(
                    "the rule right-hand side cancels to zero", position=stmt.pos
                )
            rule = RecursionRule(index_var=str(stmt.lhs_value), terms=tuple(terms))
            rule_pos = stmt.pos
        else:
            index = int(stmt.lhs_value)
            if index in seen_bases:
                raise FormulaSyntaxError(
                    f"duplicate definition of X[{index}]", position=stmt.pos
                )
            seen_bases.add(index)
            if stmt.is_input:
                base_cases.append(BaseCase(index=0, is_input=True))
                continue
            rel, absolute = _classify(stmt.terms, stmt.pos)
            if rel:
                raise FormulaSyntaxError(
                    "relative X indices are not allowed in base cases",
                    position=stmt.pos,
                )
            pairs = tuple(
                (source, CoefficientExpr(coeffs))
                for source, coeffs in sorted(absolute.items())
                if not CoefficientExpr(coeffs).is_zero()
            )
            if not pairs:
                raise FormulaSyntaxError(
                    f"base case X[{index}] cancels to zero", position=stmt.pos
                )
            base_cases.append(BaseCase(index=index, terms=pairs))

    if rule is None:
        raise FormulaSyntaxError("no recursion rule found", position=0)
    if not any(b.is_input for b in base_cases):
        raise FormulaSyntaxError("missing 'X[0] = input' declaration", position=0)

    try:
        return ArchitectureSpec(
            rule=rule, base_cases=tuple(base_cases), depth=depth, name=name
        )
    except (RangeError, NonCausalError, FormulaSyntaxError) as exc:
        if exc.position is None:
            exc.position = rule_pos
        raise


def parse_file(path, *, depth: int = 6) -> ArchitectureSpec:
    """Parse a .rf file; the spec is named after the file stem."""
    from pathlib import Path

    p = Path(path)
    return parse(p.read_text(encoding="utf-8"), name=p.stem, depth=depth)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _render_xref(var: str, lag: int | None, source: int | None) -> str:
    if lag is not None:
        return f"X[{var}-{lag}]"
    return f"X[{source}]"


def _render_summand(coeff: CoefficientExpr, xref: str, var: str, first: bool) -> str:
    if coeff.is_one():
        return xref if first else f"+ {xref}"
    items = coeff.terms
    if len(items) == 1:
        ((atoms, value),) = items.items()
        mag = abs(value)
        body = "*".join(_render_watom(a, var) for a in atoms) if atoms else None
        if body is None:
            text = xref if mag == 1 else f"{mag}*{xref}"
        elif mag == 1:
            text = f"{body}*{xref}"
        else:
            text = f"{mag}*{body}*{xref}"
        if first:
            return text if value > 0 else f"-{text}"
        return ("+ " if value > 0 else "- ") + text
    text = f"({coeff.render(var)})*{xref}"
    return text if first else f"+ {text}"


def render(spec: ArchitectureSpec) -> str:
    """Canonical DSL text; parse(render(spec)) is structurally the identity."""
    var = spec.rule.index_var
    parts = [f"X[{var}] ="]
    for pos, term in enumerate(spec.rule.terms):
        xref = _render_xref(var, term.lag, term.source)
        parts.append(_render_summand(term.coeff, xref, var, first=pos == 0))
    lines = [" ".join(parts)]
    for base in sorted(spec.base_cases, key=lambda b: -b.index):
        if base.is_input:
            lines.append("X[0] = input")
            continue
        chunks = [f"X[{base.index}] ="]
        for pos, (source, coeff) in enumerate(base.terms):
            chunks.append(
                _render_summand(coeff, f"X[{source}]", var, first=pos == 0)
            )
        lines.append(" ".join(chunks))
    return "\n".join(lines) + "\n"
