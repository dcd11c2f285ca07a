"""
Proofs - Enumeration, Values and Projection
===========================================
Brute-force proof enumeration over the ground hypergraph. It is the
independent oracle for the solver (aggregate over proofs == chart value)
and the carrier of projections from product programs back to their
factors.

Features:
- Depth-bounded enumeration, shortest proofs first, memoized per
  (atom, depth); two traversals of a loop are two proofs
- Truncation is reported, never silent
- Iterative proof_value/aggregate (deep proofs of cyclic programs)
- project_proof splits product proofs using rule lineage

Author: WLP Engine
Version: 1.0.0
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .errors import UnsupportedProjectionError, UsageError
from .kernel import (FACTOR_1, FACTOR_2, SHARED, Atom, Axiom, Program, Rule, bind_conditions,
                     match_atom, substitute)
from .semiring import Semiring, Value, get_semiring
from .solver import Grounder

logger = logging.getLogger(__name__)


# ============================================================
# TYPES
# ============================================================

@dataclass(frozen=True)
class AxiomLeaf:
    axiom: Axiom


@dataclass(frozen=True, eq=False)
class RuleStep:
    rule_id: int
    rule: Rule
    children: Tuple['Proof', ...]


@dataclass(frozen=True, eq=False)
class Proof:
    """
    A derivation tree. Identity-compared; use proof_key() for structure.

    provenance is the component tag (factor-1, factor-2, shared) for
    nodes of product programs, None otherwise.
    """
    root: Atom
    via: Union[AxiomLeaf, RuleStep]
    provenance: Optional[str] = None

    @property
    def is_leaf(self) -> bool:
        return isinstance(self.via, AxiomLeaf)


@dataclass(frozen=True)
class ProofLimits:
    max_depth: int = 12
    max_count: int = 10000

    def __post_init__(self):
        if self.max_depth < 1 or self.max_count < 1:
            raise UsageError(f"Proof limits must be positive, got depth={self.max_depth} "
                             f"count={self.max_count}")


@dataclass(frozen=True)
class ProofEnumeration:
    proofs: Tuple[Proof, ...]
    truncated: bool = False

    def __iter__(self) -> Iterator[Proof]:
        return iter(self.proofs)

    def __len__(self) -> int:
        return len(self.proofs)

    def __getitem__(self, index: int) -> Proof:
        return self.proofs[index]


# ============================================================
# TRAVERSAL HELPERS
# ============================================================

def _postorder(proof: Proof, known: Optional[Dict[int, Any]] = None) -> Iterator[Proof]:
    """Every distinct node once, children before parents; nodes in `known` are not visited."""
    seen = set()
    known = known if known is not None else {}
    stack: List[Tuple[Proof, bool]] = [(proof, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in seen or id(node) in known:
            continue
        if expanded or node.is_leaf:
            seen.add(id(node))
            yield node
            continue
        stack.append((node, True))
        for child in reversed(node.via.children):
            stack.append((child, False))


def proof_key(proof: Proof) -> Tuple:
    """Hashable structural key: equal keys mean identical trees."""
    keys: Dict[int, Tuple] = {}
    for node in _postorder(proof):
        if node.is_leaf:
            keys[id(node)] = ('A', str(node.root))
        else:
            keys[id(node)] = ('R', node.via.rule_id, str(node.root),
                              tuple(keys[id(c)] for c in node.via.children))
    return keys[id(proof)]


def leaves(proof: Proof) -> List[Axiom]:
    """Axiom leaves, left to right (with repeats)."""
    out: List[Axiom] = []
    stack = [proof]
    while stack:
        node = stack.pop()
        if node.is_leaf:
            out.append(node.via.axiom)
        else:
            stack.extend(reversed(node.via.children))
    return out


def rule_steps(proof: Proof) -> List[int]:
    """Rule ids in preorder."""
    out: List[int] = []
    stack = [proof]
    while stack:
        node = stack.pop()
        if not node.is_leaf:
            out.append(node.via.rule_id)
            stack.extend(reversed(node.via.children))
    return out


def proof_depth(proof: Proof) -> int:
    depth: Dict[int, int] = {}
    for node in _postorder(proof):
        if node.is_leaf:
            depth[id(node)] = 1
        else:
            depth[id(node)] = 1 + max(depth[id(c)] for c in node.via.children)
    return depth[id(proof)]


# ============================================================
# VALUES
# ============================================================

def proof_values(proof: Proof, sr: Union[Semiring, str], memo: Optional[Dict[int, Value]] = None) -> Dict[int, Value]:
    """Value of every node, keyed by id(node)."""
    sr = get_semiring(sr)
    values = memo if memo is not None else {}
    for node in _postorder(proof, values):
        if node.is_leaf:
            values[id(node)] = sr.coerce(node.via.axiom.value)
        else:
            values[id(node)] = sr.product(values[id(c)] for c in node.via.children)
    return values


def proof_value(proof: Proof, sr: Union[Semiring, str]) -> Value:
    """Semiring product of the proof's axiom values."""
    return proof_values(proof, sr)[id(proof)]


def aggregate(proofs: Iterable[Proof], sr: Union[Semiring, str]) -> Value:
    """Semiring sum of proof values; zero for no proofs."""
    sr = get_semiring(sr)
    memo: Dict[int, Value] = {}
    total = sr.zero
    for proof in proofs:
        total = sr.plus(total, proof_values(proof, sr, memo)[id(proof)])
    return total


# ============================================================
# ENUMERATION
# ============================================================

def _rule_tag(program: Program, rule: Rule) -> Optional[str]:
    lineage = rule.lineage
    if lineage is not None:
        if lineage.kind in ('product', 'bridge'):
            return SHARED
        return lineage.kind
    return program.provenance.get(rule.head.predicate)


class _Enumerator:
    """Layer-by-layer construction of exact-depth proof lists."""

    def __init__(self, program: Program, limits: ProofLimits):
        self.program = program
        self.limits = limits
        self.grounder = Grounder(program).run()
        self.axioms = {ax.atom: ax for ax in program.axioms}
        # exact[d][atom]: proofs of atom with depth exactly d (1-based list index)
        self.exact: List[Dict[Atom, List[Proof]]] = [{}]
        self.count_upto: List[Dict[Atom, int]] = [{}]

    def _closure(self, goals: Sequence[Atom]) -> List[Atom]:
        seen = set(goals)
        stack = list(goals)
        while stack:
            atom = stack.pop()
            for edge in self.grounder.edges_by_head.get(atom, ()):
                for tail in edge.tails:
                    if tail not in seen:
                        seen.add(tail)
                        stack.append(tail)
        return sorted(seen, key=str)

    def _upto(self, atom: Atom, depth: int) -> List[Proof]:
        return list(itertools.chain.from_iterable(
            self.exact[d].get(atom, ()) for d in range(1, depth + 1)))

    def _cu(self, atom: Atom, depth: int) -> int:
        if depth < 1:
            return 0
        return self.count_upto[depth].get(atom, 0)

    def _ce(self, atom: Atom, depth: int) -> int:
        if depth < 1:
            return 0
        return len(self.exact[depth].get(atom, ()))

    def _layer(self, atoms: Sequence[Atom], d: int):
        layer: Dict[Atom, List[Proof]] = {}
        for atom in atoms:
            found: List[Proof] = []
            if d == 1:
                axiom = self.axioms.get(atom)
                if axiom is not None:
                    tag = self.program.provenance.get(atom.predicate)
                    found.append(Proof(atom, AxiomLeaf(axiom), tag))
            else:
                for edge in self.grounder.edges_by_head.get(atom, ()):
                    rule = self.program.rules[edge.rule_id - 1]
                    tag = _rule_tag(self.program, rule)
                    tails = edge.tails
                    for i, pivot in enumerate(tails):
                        # tails[i] is the first child of depth exactly d-1
                        if not self._ce(pivot, d - 1):
                            continue
                        if any(not self._cu(t, d - 2) for t in tails[:i]):
                            continue
                        if any(not self._cu(t, d - 1) for t in tails[i + 1:]):
                            continue
                        lists = ([self._upto(t, d - 2) for t in tails[:i]]
                                 + [self.exact[d - 1][pivot]]
                                 + [self._upto(t, d - 1) for t in tails[i + 1:]])
                        for children in itertools.product(*lists):
                            found.append(Proof(atom, RuleStep(edge.rule_id, rule, children), tag))
            if found:
                layer[atom] = found
        self.exact.append(layer)
        counts = {a: self._cu(a, d - 1) + len(layer.get(a, ())) for a in atoms}
        self.count_upto.append(counts)

    def _deeper_exists(self, goals: Sequence[Atom], atoms: Sequence[Atom]) -> bool:
        """True if some goal has a proof deeper than max_depth."""
        cap = self.limits.max_depth + 1
        best: Dict[Atom, int] = {a: 1 for a in atoms if a in self.axioms}
        changed = True
        while changed:
            changed = False
            for atom in atoms:
                for edge in self.grounder.edges_by_head.get(atom, ()):
                    if all(t in best for t in edge.tails):
                        depth = min(cap, 1 + max(best[t] for t in edge.tails))
                        if depth > best.get(atom, 0):
                            best[atom] = depth
                            changed = True
        return any(best.get(g, 0) >= cap for g in goals)

    def run(self, pattern: Atom) -> ProofEnumeration:
        goals = self.grounder.matching(pattern)
        if not goals:
            return ProofEnumeration((), False)
        atoms = self._closure(goals)
        collected: List[Proof] = []
        truncated = False
        for d in range(1, self.limits.max_depth + 1):
            self._layer(atoms, d)
            for goal in goals:
                for proof in self.exact[d].get(goal, ()):
                    if len(collected) >= self.limits.max_count:
                        truncated = True
                        break
                    collected.append(proof)
            if truncated:
                break
        if not truncated:
            truncated = self._deeper_exists(goals, atoms)
        logger.debug(f"Enumerated {len(collected)} proofs of {pattern} (truncated={truncated})")
        return ProofEnumeration(tuple(collected), truncated)


def enumerate_proofs(program: Program, goal: Union[Atom, str],
                     limits: Optional[ProofLimits] = None) -> ProofEnumeration:
    """
    All distinct proofs of ground atoms matching `goal`, up to the limits.

    Proofs come out by increasing depth, then by atom text, then by rule
    order. `truncated` is set when proofs beyond max_depth exist or when
    max_count cut the list.
    """
    if isinstance(goal, str):
        from .textio import parse_atom
        goal = parse_atom(goal)
    return _Enumerator(program, limits or ProofLimits()).run(goal)


# ============================================================
# PROJECTION
# ============================================================

def _factor_ids(proof: Proof, which: str) -> Proof:
    """A subtree copied from one factor, renumbered with that factor's rule ids."""
    if proof.is_leaf:
        return proof
    lineage = proof.via.rule.lineage
    if lineage is None or lineage.kind != which:
        return proof
    if which == FACTOR_1:
        factor_id, factor_rule = lineage.left_id, lineage.left_rule
    else:
        factor_id, factor_rule = lineage.right_id, lineage.right_rule
    children = tuple(_factor_ids(c, which) for c in proof.via.children)
    return Proof(proof.root, RuleStep(factor_id, factor_rule, children), which)


def _project_factor(proof: Proof, which: str) -> Proof:
    step = proof.via
    rule = step.rule
    lineage = rule.lineage
    side = 'L' if which == FACTOR_1 else 'R'
    factor_rule = lineage.left_rule if side == 'L' else lineage.right_rule
    factor_id = lineage.left_id if side == 'L' else lineage.right_id

    by_position: Dict[int, Proof] = {}
    for entry, child in zip(lineage.body_map, step.children):
        if entry[0] == side:
            by_position[entry[1]] = _factor_ids(child, which)
        elif entry[0] == 'P':
            if child.is_leaf:
                raise UnsupportedProjectionError(
                    f"{child.root} is a product axiom; it has no counterpart in {which}")
            by_position[entry[1] if side == 'L' else entry[2]] = project_proof(child, which)

    if factor_rule is None:
        # identity rule of an axiom-defined predicate
        return by_position[1]

    children = tuple(by_position[i] for i in range(1, len(factor_rule.body) + 1))
    subst: Optional[Dict[str, Any]] = {}
    for pattern, child in zip(factor_rule.body, children):
        subst = match_atom(pattern, child.root, subst)
        if subst is None:
            break
    if subst is not None:
        subst = bind_conditions(factor_rule.conditions, subst)
    if subst is None:
        raise UnsupportedProjectionError(
            f"Cannot rebuild {which} rule {factor_id} from the product proof of {proof.root}")
    head = substitute(factor_rule.head, subst)
    return Proof(head, RuleStep(factor_id, factor_rule, children), which)


def project_proof(proof: Proof, which: str) -> Proof:
    """
    Proof in one factor program recovered from a product-program proof.

    Product nodes are split with the lineage of the rule that built them;
    subtrees copied from the chosen factor come back with that factor's
    rule ids; shared input leaves are returned unchanged.
    """
    if which not in (FACTOR_1, FACTOR_2):
        raise UsageError(f"which must be {FACTOR_1} or {FACTOR_2}, got {which!r}")
    if proof.provenance is None:
        raise UnsupportedProjectionError(
            f"Proof of {proof.root} carries no product provenance; only proofs in "
            f"product programs can be projected")
    if proof.provenance == which:
        return _factor_ids(proof, which)
    if proof.is_leaf:
        if proof.provenance == SHARED:
            return proof
        raise UnsupportedProjectionError(f"Axiom {proof.root} belongs to the other factor")
    lineage = proof.via.rule.lineage
    if lineage is None or lineage.kind not in ('product', 'bridge'):
        raise UnsupportedProjectionError(
            f"Rule {proof.via.rule_id} concluding {proof.root} has no product lineage")
    return _project_factor(proof, which)
