"""
Test helpers: product rule lookup, proof-weight oracles.
"""

import math
from typing import Dict, List, Optional

from wlp.kernel import Program, Rule
from wlp.proofs import ProofLimits, enumerate_proofs, leaves


def product_rule_id(program: Program, name: str, left_id: Optional[int],
                    right_id: Optional[int]) -> int:
    """1-based id of the product rule for `name` built from the given factor rules."""
    for i, rule in enumerate(program.rules, 1):
        lin = rule.lineage
        if (lin is not None and lin.kind in ('product', 'bridge')
                and rule.head.predicate == name
                and lin.left_id == left_id and lin.right_id == right_id):
            return i
    raise AssertionError(f"no product rule {name} for {left_id} x {right_id}")


def mixed(rule_id: int, rule: Rule) -> bool:
    lin = rule.lineage
    return lin is not None and lin.kind == 'product' and lin.left_id != lin.right_id


def leaf_product(proof, weights: Dict, default: float = 1.0) -> float:
    """Product of leaf weights looked up by atom (real numbers)."""
    value = 1.0
    for axiom in leaves(proof):
        value *= weights.get(axiom.atom, default)
    return value


def proofs_of(program: Program, goal: str, depth: int = 12) -> List:
    result = enumerate_proofs(program, goal, ProofLimits(max_depth=depth, max_count=100000))
    assert not result.truncated
    return list(result)


def xlogy(x: float, y: float) -> float:
    return 0.0 if x == 0.0 else x * math.log(y)


def loop_tail(scale: float, ratio: float, start: int) -> float:
    """
    Upper bound on the mass of proofs left out by a depth cut.

    sum over n >= start of scale * (n + 1) * ratio**n: n + 1 ways to split
    n loop traversals between two self-loops, each weighing at most ratio.
    """
    return scale * ratio ** start * ((start + 1) / (1 - ratio) + ratio / (1 - ratio) ** 2)
