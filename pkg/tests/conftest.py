"""Shared helpers: random spec generators with reproducible seeds."""

from __future__ import annotations

import random

from recur.parser import (
    ArchitectureSpec,
    BaseCase,
    CoefficientExpr,
    RecursionRule,
    RuleTerm,
)

INDEX_VARS = ("i", "q", "n", "m")


def _random_abs_coeff(rng: random.Random, max_index: int) -> CoefficientExpr:
    """Random nonzero coefficient over absolute W[1..max_index] atoms."""
    terms = {}
    for _ in range(rng.randint(1, 2)):
        n_atoms = rng.randint(0, 1) if max_index >= 1 else 0
        atoms = tuple(("abs", rng.randint(1, max_index)) for _ in range(n_atoms))
        terms[atoms] = terms.get(atoms, 0) + rng.choice((-2, -1, 1, 2))
    expr = CoefficientExpr(terms)
    return expr if not expr.is_zero() else CoefficientExpr.one()


def _random_rel_coeff(
    rng: random.Random, max_offset: int, max_degree: int = 2
) -> CoefficientExpr:
    """Random nonzero coefficient over relative W[v-c] atoms, c <= max_offset."""
    terms = {}
    for _ in range(rng.randint(1, 2)):
        degree = rng.randint(0, max_degree)
        atoms = tuple(("rel", rng.randint(0, max_offset)) for _ in range(degree))
        terms[atoms] = terms.get(atoms, 0) + rng.choice((-2, -1, 1, 2))
    expr = CoefficientExpr(terms)
    return expr if not expr.is_zero() else CoefficientExpr.one()


def random_affine_spec(rng: random.Random, max_lag_cap: int = 3) -> ArchitectureSpec:
    """A random valid spec with lags up to max_lag_cap.

    Coefficients may have degree up to 2, so these specs exercise the
    algebra and the parser but not necessarily the graph compiler.
    """
    max_lag = rng.randint(1, max_lag_cap)
    base_cases = [BaseCase(0, is_input=True)]
    for j in range(1, max_lag):
        sources = list(range(j))
        rng.shuffle(sources)
        pairs = tuple(
            (src, _random_abs_coeff(rng, j))
            for src in sorted(sources[: rng.randint(1, j)])
        )
        base_cases.append(BaseCase(index=j, terms=pairs))
    i_min = max_lag

    lags = [lag for lag in range(1, max_lag + 1) if rng.random() < 0.7]
    if not lags:
        lags = [rng.randint(1, max_lag)]
    terms = [
        RuleTerm(coeff=_random_rel_coeff(rng, i_min - 1), lag=lag) for lag in lags
    ]
    if rng.random() < 0.3:
        terms.append(
            RuleTerm(coeff=_random_abs_coeff(rng, i_min), source=rng.randrange(i_min))
        )
    return ArchitectureSpec(
        rule=RecursionRule(index_var=rng.choice(INDEX_VARS), terms=tuple(terms)),
        base_cases=tuple(base_cases),
        name="random",
    )


def random_realizable_spec(rng: random.Random, max_lag_cap: int = 3) -> ArchitectureSpec:
    """A random spec the graph compiler can wire without fresh mapped edges.

    Every state's own block reads its lag-1 predecessor, and deeper lags
    reuse existing block outputs (the tap pattern) or identity edges, so
    recover_terms(build_graph(spec, L)) reproduces the coefficients.
    """
    max_lag = rng.randint(1, max_lag_cap)
    base_cases = [BaseCase(0, is_input=True)]
    for j in range(1, max_lag):
        coeff = CoefficientExpr(
            {(): rng.choice((0, 1, 1)), (("abs", j),): rng.choice((-1, 1))}
        )
        base_cases.append(BaseCase(index=j, terms=((j - 1, coeff),)))
    i_min = max_lag

    identity = rng.choice((0, 1, 1))
    own_block = rng.choice((-1, 1))
    terms = [
        RuleTerm(
            coeff=CoefficientExpr({(): identity, (("rel", 0),): own_block}), lag=1
        )
    ]
    for lag in range(2, max_lag + 1):
        if rng.random() < 0.6:
            # a + b*W[v-(lag-1)]: the W factor taps block (i-lag+1),
            # which reads X[i-lag], the term's own source.
            a = rng.choice((-1, 0, 1))
            b = rng.choice((-1, 0, 1))
            if a == 0 and b == 0:
                a = 1
            terms.append(
                RuleTerm(
                    coeff=CoefficientExpr({(): a, (("rel", lag - 1),): b}), lag=lag
                )
            )
    if rng.random() < 0.3:
        terms.append(
            RuleTerm(
                coeff=CoefficientExpr.constant(rng.choice((-1, 1))),
                source=rng.randrange(i_min),
            )
        )
    return ArchitectureSpec(
        rule=RecursionRule(index_var=rng.choice(INDEX_VARS), terms=tuple(terms)),
        base_cases=tuple(base_cases),
        name="random-realizable",
    )
