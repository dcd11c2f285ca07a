"""
Product - Joining Two Programs and Constraining the Result
==========================================================
The PRODUCT transformation merges two weighted logic programs so that a
paired predicate p_q(X, Y) has the value p(X) * q(Y). The passes below
then specialize the raw product into a useful algorithm: drop rules,
add equality constraints, collapse equal arguments, generalize bridging
axioms and fix one side's structure.

Features:
- Alignment policies: left_to_right, crossed, explicit
- Bridging rules for paired axiom predicates, identity pseudo-rules for
  one-sided axiom predicates
- Rule lineage on every emitted rule (used by proof projection)
- Pure program-to-program functions

Author: WLP Engine
Version: 1.0.0
"""

import logging
import re
from dataclasses import dataclass, field, replace
from typing import (Callable, Dict, Iterable, List, Mapping, Optional, Sequence,
                    Set, Tuple, Union)

from .errors import (AlignmentError, CollapseError, GeneralizeError, NameClashError,
                     PairingError, PositionError, TransformError,
                     UnknownVariableError, ValidationError)
from .kernel import (FACTOR_1, FACTOR_2, SHARED, Atom, Axiom, Eq, Guard, Neq, Pair, Program,
                     Rule, RuleLineage, Signature, SideCondition, Substitution, Term, Var,
                     rename_apart, rename_variables, rule_vars,
                     substitute_rule, substitute_term, term_vars, unify_terms, validate)

logger = logging.getLogger(__name__)

POLICIES = ('left_to_right', 'crossed', 'explicit')


@dataclass(frozen=True)
class PairingSpec:
    """
    Which predicates to pair and how to fold paired antecedents.

    explicit_alignments maps (left rule id, right rule id) to the list of
    (left body position, right body position) pairs to fold, 1-based.
    """
    pairs: Tuple[Pair, ...]
    policy: str = 'left_to_right'
    explicit_alignments: Mapping[Tuple[int, int], Sequence[Tuple[int, int]]] = field(default_factory=dict)

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise AlignmentError(f"Unknown alignment policy '{self.policy}' "
                                 f"(expected one of {', '.join(POLICIES)})")
        object.__setattr__(self, 'pairs', tuple(self.pairs))


# ============================================================
# HELPERS
# ============================================================

def _require_valid(program: Program, label: str):
    errors = [d for d in validate(program) if d.severity == 'error']
    if errors:
        logger.error(f"{label} program failed validation")
        raise ValidationError(errors)


def rename_predicates(program: Program, mapping: Mapping[str, str]) -> Program:
    """Rename predicates everywhere (rules, guards, axioms, declarations)."""
    def atom(a: Atom) -> Atom:
        return Atom(mapping.get(a.predicate, a.predicate), a.args)

    def cond(c: SideCondition) -> SideCondition:
        return Guard(atom(c.atom)) if isinstance(c, Guard) else c

    def sig(s: Signature) -> Signature:
        return Signature(mapping.get(s.name, s.name), s.arity)

    rules = tuple(
        replace(r, head=atom(r.head), body=tuple(atom(b) for b in r.body),
                conditions=tuple(cond(c) for c in r.conditions))
        for r in program.rules
    )
    axioms = tuple(replace(ax, atom=atom(ax.atom)) for ax in program.axioms)
    pairings = tuple(Pair(sig(p.left), sig(p.right), mapping.get(p.name, p.name))
                     for p in program.pairings)
    provenance = {mapping.get(k, k): v for k, v in program.provenance.items()}
    return replace(program, rules=rules, axioms=axioms, pairings=pairings,
                   input_predicates=frozenset(sig(s) for s in program.input_predicates),
                   provenance=provenance)


def _reletter(rule: Rule) -> Rule:
    """X_l -> X1 and X_r -> X2."""
    mapping = {}
    for name in rule_vars(rule):
        if name.endswith('_l'):
            mapping[name] = name[:-2] + '1'
        elif name.endswith('_r'):
            mapping[name] = name[:-2] + '2'
    return rename_variables(rule, mapping)


def _identity_rule(sig: Signature) -> Rule:
    """p(W1,...,Wn) += p(W1,...,Wn): stands in for an axiom-defined side."""
    atom = Atom(sig.name, tuple(Var(f"W{i}") for i in range(1, sig.arity + 1)))
    return Rule(atom, (atom,))


# ============================================================
# PRODUCT
# ============================================================

class _ProductBuilder:
    """Cross product of the defining rules of each pair."""

    def __init__(self, p1: Program, p2: Program, spec: PairingSpec):
        self.p1 = p1
        self.p2 = p2
        self.spec = spec
        self.left_pairs: Dict[Signature, Pair] = {}
        self.right_pairs: Dict[Signature, Pair] = {}
        self._check_names()

    def _check_names(self):
        p1, p2, spec = self.p1, self.p2, self.spec
        names1, names2 = p1.predicate_names(), p2.predicate_names()
        defined = {s.name for s in p1.rule_defined() | p2.rule_defined()}
        clash = sorted((names1 & names2) & defined)
        if clash:
            raise NameClashError(
                f"Predicates defined by rules appear in both programs: {', '.join(clash)}; "
                f"rename one side (natural_pairing does this)")

        sigs1 = p1.signatures() | set(p1.input_predicates)
        sigs2 = p2.signatures() | set(p2.input_predicates)
        product_names: Set[str] = set()
        for pair in spec.pairs:
            if pair.left not in sigs1:
                raise PairingError(f"Pair {pair}: {pair.left} does not occur in the left program")
            if pair.right not in sigs2:
                raise PairingError(f"Pair {pair}: {pair.right} does not occur in the right program")
            if pair.left in self.left_pairs:
                raise PairingError(f"{pair.left} occurs in two pairs")
            if pair.right in self.right_pairs:
                raise PairingError(f"{pair.right} occurs in two pairs")
            if pair.name in names1 or pair.name in names2 or pair.name in product_names:
                raise NameClashError(f"Product predicate name '{pair.name}' is not fresh")
            product_names.add(pair.name)
            self.left_pairs[pair.left] = pair
            self.right_pairs[pair.right] = pair

    # -- defining rules -------------------------------------------

    @staticmethod
    def _defining(program: Program, sig: Signature) -> List[Tuple[Optional[int], Optional[Rule]]]:
        found: List[Tuple[Optional[int], Optional[Rule]]] = list(program.rules_for(sig))
        if sig in program.axiom_defined() or sig in program.input_predicates:
            found.append((None, None))
        return found

    # -- alignment ------------------------------------------------

    def _align(self, lbody: Sequence[Atom], rbody: Sequence[Atom],
               lid: Optional[int], rid: Optional[int]) -> Tuple[List[Tuple[int, int]], str]:
        """Folded (left, right) body positions, 0-based, and the policy used."""
        spec = self.spec
        if lid is None or rid is None:
            return [], 'none'

        groups: List[Tuple[List[int], List[int]]] = []
        for pair in spec.pairs:
            ls = [i for i, a in enumerate(lbody) if a.signature == pair.left]
            rs = [j for j, a in enumerate(rbody) if a.signature == pair.right]
            if ls and rs:
                groups.append((ls, rs))
        ambiguous = any(len(ls) > 1 or len(rs) > 1 for ls, rs in groups)

        if spec.policy == 'explicit' and (lid, rid) in spec.explicit_alignments:
            folds = []
            for i, j in spec.explicit_alignments[(lid, rid)]:
                if not (1 <= i <= len(lbody) and 1 <= j <= len(rbody)):
                    raise AlignmentError(
                        f"Explicit alignment ({i},{j}) for rules {lid} x {rid} is out of range")
                pair = self.left_pairs.get(lbody[i - 1].signature)
                if pair is None or pair.right != rbody[j - 1].signature:
                    raise AlignmentError(
                        f"Explicit alignment ({i},{j}) for rules {lid} x {rid} folds "
                        f"{lbody[i - 1]} with {rbody[j - 1]}, which are not paired")
                folds.append((i - 1, j - 1))
            return folds, 'explicit'

        if not ambiguous:
            return [(ls[0], rs[0]) for ls, rs in groups], 'left_to_right'

        if spec.policy == 'left_to_right':
            return [f for ls, rs in groups for f in zip(ls, rs)], 'left_to_right'
        if spec.policy == 'crossed':
            folds = []
            for ls, rs in groups:
                if len(ls) == 1 and len(rs) == 1:
                    folds.append((ls[0], rs[0]))
                elif len(ls) == 2 and len(rs) == 2:
                    folds.extend([(ls[0], rs[1]), (ls[1], rs[0])])
                else:
                    raise AlignmentError(
                        f"Crossed alignment needs exactly two paired antecedents per side; "
                        f"rules {lid} x {rid} have {len(ls)} and {len(rs)}")
            return folds, 'crossed'
        raise AlignmentError(
            f"Rules {lid} x {rid} have an ambiguous alignment and no explicit map covers them")

    # -- one product rule -----------------------------------------

    def _combine(self, pair: Pair, lid: Optional[int], lrule: Optional[Rule],
                 rid: Optional[int], rrule: Optional[Rule]) -> Rule:
        lsrc = lrule if lrule is not None else _identity_rule(pair.left)
        rsrc = rrule if rrule is not None else _identity_rule(pair.right)
        left = rename_apart(lsrc, '_l')
        right = rename_apart(rsrc, '_r')

        folds, alignment = self._align(left.body, right.body, lid, rid)
        fold_of = dict(folds)
        folded_right = set(fold_of.values())

        body: List[Atom] = []
        body_map: List[Tuple] = []
        for i, atom in enumerate(left.body):
            if i in fold_of:
                j = fold_of[i]
                partner = right.body[j]
                name = self.left_pairs[atom.signature].name
                body.append(Atom(name, atom.args + partner.args))
                body_map.append(('P', i + 1, j + 1))
            else:
                body.append(atom)
                body_map.append(('L', i + 1))
        for j, atom in enumerate(right.body):
            if j not in folded_right:
                body.append(atom)
                body_map.append(('R', j + 1))

        head = Atom(pair.name, left.head.args + right.head.args)
        kind = 'bridge' if lrule is None and rrule is None else 'product'
        origin = (f"product {pair.name}: left {lid if lid is not None else 'axioms'}"
                  f" x right {rid if rid is not None else 'axioms'}, {alignment}")
        lineage = RuleLineage(kind, lid, rid, lrule, rrule, tuple(body_map), alignment)
        rule = Rule(head, tuple(body), left.conditions + right.conditions, origin,
                    lineage=lineage)
        return _reletter(rule)

    def build(self) -> List[Rule]:
        rules = []
        for pair in self.spec.pairs:
            for lid, lrule in self._defining(self.p1, pair.left):
                for rid, rrule in self._defining(self.p2, pair.right):
                    rules.append(self._combine(pair, lid, lrule, rid, rrule))
        return rules


def _merge_axioms(p1: Program, p2: Program) -> Tuple[Axiom, ...]:
    merged: List[Axiom] = list(p1.axioms)
    first: Dict[Atom, Axiom] = {ax.atom: ax for ax in p1.axioms}
    for ax in p2.axioms:
        other = first.get(ax.atom)
        if other is None:
            merged.append(ax)
        elif other.value != ax.value:
            raise NameClashError(
                f"Shared axiom {ax.atom} has value {other.value!r} on the left "
                f"and {ax.value!r} on the right")
    return tuple(merged)


def product_transform(p1: Program, p2: Program, spec: PairingSpec) -> Program:
    """
    Both programs unchanged, plus one rule per (left rule, right rule)
    combination of every pair.

    Raises:
        ValidationError: an input program is invalid
        NameClashError: shared rule-defined names or a non-fresh product name
        PairingError: unknown or reused paired predicate
        AlignmentError: ambiguous alignment the policy cannot resolve
    """
    _require_valid(p1, 'left')
    _require_valid(p2, 'right')
    builder = _ProductBuilder(p1, p2, spec)

    left_rules = [replace(r, lineage=RuleLineage(FACTOR_1, left_id=i, left_rule=r))
                  for i, r in enumerate(p1.rules, 1)]
    right_rules = [replace(r, lineage=RuleLineage(FACTOR_2, right_id=i, right_rule=r))
                   for i, r in enumerate(p2.rules, 1)]
    product_rules = builder.build()

    names1, names2 = p1.predicate_names(), p2.predicate_names()
    provenance: Dict[str, str] = {}
    for name in sorted(names1 | names2):
        if name in names1 and name in names2:
            provenance[name] = SHARED
        else:
            provenance[name] = FACTOR_1 if name in names1 else FACTOR_2

    result = Program(
        rules=tuple(left_rules + right_rules + product_rules),
        axioms=_merge_axioms(p1, p2),
        semiring=p1.semiring or p2.semiring,
        pairings=spec.pairs,
        input_predicates=frozenset(p1.input_predicates | p2.input_predicates),
        provenance=provenance,
    )
    logger.info(f"Product emitted {len(product_rules)} rules for {len(spec.pairs)} pairs",
                extra={'rules': len(result.rules)})
    return result


def natural_pairing(p: Program, q: Program, shared: Iterable[str] = (),
                    policy: str = 'left_to_right') -> Tuple[Program, Program, PairingSpec]:
    """
    Rename predicates with suffixes 1 and 2 (except `shared` ones) and
    pair every predicate defined by rules in both programs; the product
    of `name` is `name_12`.
    """
    shared = set(shared)
    names = p.predicate_names() | q.predicate_names() | {s.name for s in p.input_predicates | q.input_predicates}
    left = rename_predicates(p, {n: f"{n}1" for n in names if n not in shared})
    right = rename_predicates(q, {n: f"{n}2" for n in names if n not in shared})

    q_defined = {s.name: s for s in q.rule_defined()}
    p_defined = {s.name: s for s in p.rule_defined()}
    order: List[str] = []
    for rule in p.rules:
        for atom in (rule.head, *rule.body):
            name = atom.predicate
            if name in p_defined and name in q_defined and name not in shared and name not in order:
                order.append(name)

    pairs = tuple(
        Pair(Signature(f"{n}1", p_defined[n].arity), Signature(f"{n}2", q_defined[n].arity), f"{n}_12")
        for n in order
    )
    return left, right, PairingSpec(pairs, policy)


# ============================================================
# EDIT PASSES
# ============================================================

RuleSelector = Union[Iterable[int], Callable[[int, Rule], bool]]


def _selected_ids(program: Program, selector: RuleSelector) -> Set[int]:
    if callable(selector):
        return {i for i, r in enumerate(program.rules, 1) if selector(i, r)}
    ids = set(selector)
    for rule_id in sorted(ids):
        program.rule(rule_id)
    return ids


def drop_rules(program: Program, selector: RuleSelector) -> Program:
    """Remove the selected rules (ids are 1-based); axioms untouched."""
    ids = _selected_ids(program, selector)
    kept = [r for i, r in enumerate(program.rules, 1) if i not in ids]
    logger.info(f"Dropped {len(ids)} rules, kept {len(kept)}")
    return program.with_rules(kept)


_ORIGIN = re.compile(r'^product \S+: left (\d+|axioms) x right (\d+|axioms)')


def is_mixed_product_rule(rule_id: int, rule: Rule) -> bool:
    """
    True for a product rule built from two differently numbered factor
    rules. Uses lineage when present, else the `%!` origin pragma, so it
    also works on re-parsed products.
    """
    if rule.lineage is not None:
        lin = rule.lineage
        return lin.kind == 'product' and lin.left_id != lin.right_id
    match = _ORIGIN.match(rule.origin or '')
    if match is None:
        return False
    left, right = match.groups()
    return 'axioms' not in (left, right) and left != right


def keep_rules(program: Program, selector: RuleSelector) -> Program:
    ids = _selected_ids(program, selector)
    return drop_rules(program, [i for i in range(1, len(program.rules) + 1) if i not in ids])


def _as_term(value: Union[str, Term]) -> Term:
    if isinstance(value, str):
        from .textio import parse_term
        return parse_term(value)
    return value


def add_equality_constraint(program: Program, rule_id: int,
                            pairs: Iterable[Tuple[Union[str, Term], Union[str, Term]]]) -> Program:
    """Append Eq side conditions `a = b` to one rule."""
    rule = program.rule(rule_id)
    known = set(rule_vars(rule))
    added: List[SideCondition] = []
    for a, b in pairs:
        left, right = _as_term(a), _as_term(b)
        for name in (*term_vars(left), *term_vars(right)):
            if name not in known:
                raise UnknownVariableError(f"Variable {name} does not occur in rule {rule_id}: {rule}")
        added.append(Eq(left, right))
    rules = list(program.rules)
    rules[rule_id - 1] = replace(rule, conditions=rule.conditions + tuple(added))
    return program.with_rules(rules)


def _check_positions(arity: int, positions: Iterable[int], what: str):
    for p in positions:
        if not 1 <= p <= arity:
            raise PositionError(f"{what}: position {p} is out of range 1..{arity}")


def _drop_positions(atom: Atom, sig: Signature, removed: Sequence[int]) -> Atom:
    if atom.signature != sig:
        return atom
    return Atom(atom.predicate, tuple(a for i, a in enumerate(atom.args, 1) if i not in removed))


def _collapse_rule(rule: Rule, rule_id: int, sig: Signature,
                   pairs: Sequence[Tuple[int, int]], removed: Sequence[int]) -> Optional[Rule]:
    """Collapsed rule, or None when the rule can never fire."""
    occurrences = [a for a in (*rule.body, *rule.guards) if a.signature == sig]
    if rule.head.signature != sig and not occurrences:
        return rule

    subst: Optional[Substitution] = {}
    for cond in rule.conditions:
        if isinstance(cond, Eq):
            subst = unify_terms(cond.left, cond.right, subst)
            if subst is None:
                logger.warning(f"Rule {rule_id} can never fire after collapsing {sig}; dropped")
                return None

    if rule.head.signature == sig:
        for i, j in pairs:
            a = substitute_term(rule.head.args[i - 1], subst)
            b = substitute_term(rule.head.args[j - 1], subst)
            if a != b:
                raise CollapseError(
                    f"Rule {rule_id} does not force positions {i} and {j} of {sig} to be equal "
                    f"({a} vs {b}); add an equality constraint first")

    for atom in occurrences:
        for i, j in pairs:
            subst = unify_terms(atom.args[i - 1], atom.args[j - 1], subst)
            if subst is None:
                logger.warning(f"Rule {rule_id} can never fire after collapsing {sig}; dropped")
                return None

    collapsed = substitute_rule(rule, subst)
    conditions = []
    for cond in collapsed.conditions:
        if isinstance(cond, Eq) and cond.left == cond.right:
            continue
        if isinstance(cond, Neq) and cond.left == cond.right:
            logger.warning(f"Rule {rule_id} can never fire after collapsing {sig}; dropped")
            return None
        if isinstance(cond, Guard):
            cond = Guard(_drop_positions(cond.atom, sig, removed))
        conditions.append(cond)
    return replace(
        collapsed,
        head=_drop_positions(collapsed.head, sig, removed),
        body=tuple(_drop_positions(a, sig, removed) for a in collapsed.body),
        conditions=tuple(conditions),
    )


def collapse_arguments(program: Program, sig: Union[Signature, str],
                       pairs: Sequence[Tuple[int, int]]) -> Program:
    """
    Merge argument positions forced equal: for each (i, j), position j of
    `sig` is removed everywhere (1-based positions).

    Raises:
        PositionError: a position outside 1..arity, or i == j
        CollapseError: a defining rule or axiom does not force equality
    """
    if isinstance(sig, str):
        from .kernel import parse_signature
        sig = parse_signature(sig)
    pairs = [tuple(p) for p in pairs]
    _check_positions(sig.arity, [p for pair in pairs for p in pair], f"collapse {sig}")
    removed = sorted({j for _, j in pairs})
    if any(i == j for i, j in pairs) or any(i in removed for i, _ in pairs):
        raise PositionError(f"collapse {sig}: kept and removed positions overlap in {pairs}")

    rules: List[Rule] = []
    for rule_id, rule in enumerate(program.rules, 1):
        collapsed = _collapse_rule(rule, rule_id, sig, pairs, removed)
        if collapsed is not None:
            rules.append(collapsed)

    axioms: List[Axiom] = []
    for ax in program.axioms:
        if ax.atom.signature == sig:
            for i, j in pairs:
                if ax.atom.args[i - 1] != ax.atom.args[j - 1]:
                    raise CollapseError(
                        f"Axiom {ax.atom} differs at positions {i} and {j}; cannot collapse {sig}")
            ax = replace(ax, atom=_drop_positions(ax.atom, sig, removed))
        axioms.append(ax)

    new_sig = Signature(sig.name, sig.arity - len(removed))
    inputs = frozenset(new_sig if s == sig else s for s in program.input_predicates)
    logger.info(f"Collapsed {sig} to {new_sig}", extra={'rules': len(rules)})
    return replace(program, rules=tuple(rules), axioms=tuple(axioms), input_predicates=inputs)


def _is_bridging(rule: Rule) -> bool:
    if rule.lineage is not None and rule.lineage.kind == 'bridge':
        return True
    if len(rule.body) != 2 or rule.conditions:
        return False
    args = rule.body[0].args + rule.body[1].args
    return (rule.head.args == args
            and all(isinstance(a, Var) for a in args)
            and len(set(args)) == len(args))


def generalize_axioms(program: Program, predicate: str) -> Program:
    """
    Replace the bridging rule of a product predicate by direct axioms:
    the rule is removed and the predicate becomes an input.
    """
    defining = [(i, r) for i, r in enumerate(program.rules, 1) if r.head.predicate == predicate]
    if len(defining) != 1 or not _is_bridging(defining[0][1]):
        raise GeneralizeError(
            f"{predicate} is not defined by exactly one bridging rule "
            f"({len(defining)} defining rules)")
    rule_id, rule = defining[0]
    result = drop_rules(program, [rule_id])
    return replace(result, input_predicates=result.input_predicates | {rule.head.signature})


def fix_structure(program: Program, predicate: str, witness: str,
                  positions: Sequence[int]) -> Program:
    """
    Add `if witness(args at positions)` to every rule concluding
    `predicate`; the witness becomes an input predicate.
    """
    positions = list(positions)
    if not positions:
        raise PositionError("fix_structure needs at least one position")
    rules = list(program.rules)
    touched = 0
    for index, rule in enumerate(rules):
        if rule.head.predicate != predicate:
            continue
        _check_positions(len(rule.head.args), positions, f"fix {predicate}")
        guard = Guard(Atom(witness, tuple(rule.head.args[p - 1] for p in positions)))
        rules[index] = replace(rule, conditions=rule.conditions + (guard,))
        touched += 1
    if not touched:
        raise TransformError(f"No rule concludes {predicate}")
    inputs = program.input_predicates | {Signature(witness, len(positions))}
    return replace(program, rules=tuple(rules), input_predicates=inputs)
