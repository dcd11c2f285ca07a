"""
Synthetic Programs - Random Layered Acyclic Programs
====================================================
Generator behind the randomized product property suite. Programs are
layered: every derived predicate only reads base predicates and derived
predicates introduced before it, so each program has finitely many
proofs.

Features:
- Unary base predicates b0..b2 and a binary relation rel/2 over c0..c2
- Derived unary predicates d1..dn, one or two rules each
- Values drawn per semiring with numpy's Generator
- Size caps: <= 8 predicates, <= 12 rules, <= 20 axioms

Author: WLP Engine
Version: 1.0.0
"""

import logging
from typing import Any, List

import numpy as np

from ..kernel import Atom, Axiom, Program, Rule, Sym, Var
from ..semiring import get_semiring

logger = logging.getLogger(__name__)

DOMAIN = ('c0', 'c1', 'c2')
BASE_UNARY = 3
MAX_DERIVED = 4
MAX_EDGES = 6


def _value(rng: np.random.Generator, semiring: str) -> Any:
    if semiring == 'boolean':
        return True
    if semiring == 'tropical':
        return round(float(rng.uniform(0.0, 5.0)), 3)
    return round(float(rng.uniform(0.1, 0.9)), 3)


def _subset(rng: np.random.Generator, items: List[Any], limit: int) -> List[Any]:
    size = int(rng.integers(1, min(limit, len(items)) + 1))
    picked = rng.choice(len(items), size=size, replace=False)
    return [items[i] for i in sorted(picked)]


def random_acyclic_program(rng: np.random.Generator, semiring: str = 'real',
                           prefix: str = '', n_derived: int = 0) -> Program:
    """
    Build one random acyclic program.

    Args:
        rng: numpy Generator; the program is a pure function of its state
        semiring: semiring id the axiom values are drawn for
        prefix: prepended to every predicate name
        n_derived: number of derived predicates, drawn from 2..4 when 0

    Returns:
        Program with axioms attached and `semiring` set
    """
    get_semiring(semiring)
    x, y = Var('X'), Var('Y')
    base = [f"{prefix}b{i}" for i in range(BASE_UNARY)]
    rel = f"{prefix}rel"

    axioms: List[Axiom] = []
    for name in base:
        for const in _subset(rng, list(DOMAIN), len(DOMAIN)):
            axioms.append(Axiom(Atom(name, (Sym(const),)), _value(rng, semiring)))
    edges = [(a, b) for a in DOMAIN for b in DOMAIN]
    for a, b in _subset(rng, edges, MAX_EDGES):
        axioms.append(Axiom(Atom(rel, (Sym(a), Sym(b))), _value(rng, semiring)))

    n = n_derived or int(rng.integers(2, MAX_DERIVED + 1))
    n = min(n, MAX_DERIVED)
    available = list(base)
    rules: List[Rule] = []
    for k in range(1, n + 1):
        head = f"{prefix}d{k}"
        for _ in range(int(rng.integers(1, 3))):
            a = available[int(rng.integers(len(available)))]
            shape = int(rng.integers(3))
            if shape == 0:
                rules.append(Rule(Atom(head, (x,)), (Atom(a, (x,)),)))
            elif shape == 1:
                rules.append(Rule(Atom(head, (y,)), (Atom(a, (x,)), Atom(rel, (x, y)))))
            else:
                b = available[int(rng.integers(len(available)))]
                rules.append(Rule(Atom(head, (x,)), (Atom(a, (x,)), Atom(b, (x,)))))
        available.append(head)

    logger.debug(f"Synthetic program: {len(rules)} rules, {len(axioms)} axioms, {n} derived")
    return Program(rules=tuple(rules), axioms=tuple(axioms), semiring=semiring)
