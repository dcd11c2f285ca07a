"""
Kernel - Terms, Rules, Programs
===============================
The shared data model: immutable terms, atoms, side conditions, rules,
weighted axioms and programs, plus matching, unification, substitution,
static validation and arithmetic desugaring.

Features:
- Frozen dataclasses (safe to share between threads)
- One-sided matching against ground facts (with Var+/-Int patterns)
- Two-sided unification with occurs check (used by program edits)
- Range-restriction and arity validation returning Diagnostics
- Desugaring of head/body arithmetic into Eq side conditions

Author: WLP Engine
Version: 1.0.0
"""

import itertools
import logging
import re
from dataclasses import dataclass, field, replace
from typing import (Any, Dict, FrozenSet, Iterable, Iterator, List, Mapping,
                    NamedTuple, Optional, Sequence, Set, Tuple, Union)

from .errors import Diagnostic, SourceSpan, TermTypeError, UnknownRuleError, UsageError

logger = logging.getLogger(__name__)

_PLAIN_SYMBOL = re.compile(r'^[a-z][A-Za-z0-9_]*$')
KEYWORDS = frozenset({'if', 'as', 'true', 'false', 'inf'})


# ============================================================
# TERMS
# ============================================================

@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Sym:
    name: str

    def __str__(self) -> str:
        if _PLAIN_SYMBOL.match(self.name) and self.name not in KEYWORDS:
            return self.name
        escaped = self.name.replace('\\', '\\\\').replace('"', '\\"')
        return f'"{escaped}"'


@dataclass(frozen=True)
class Int:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Nil:
    def __str__(self) -> str:
        return '[]'


@dataclass(frozen=True)
class Cons:
    head: 'Term'
    tail: 'Term'

    def __str__(self) -> str:
        head = f"({self.head})" if isinstance(self.head, Cons) else str(self.head)
        return f"{head}::{self.tail}"


@dataclass(frozen=True)
class ArithExpr:
    """`base + offset`; base is a Var or Int, offset a nonzero literal."""
    base: 'Term'
    offset: int

    def __str__(self) -> str:
        sign = '+' if self.offset > 0 else '-'
        return f"{self.base}{sign}{abs(self.offset)}"


Term = Union[Var, Sym, Int, Nil, Cons, ArithExpr]
Substitution = Dict[str, Term]

NIL = Nil()


def make_list(items: Sequence[Term], tail: Term = NIL) -> Term:
    """Build the `a::b::...::tail` chain."""
    result = tail
    for item in reversed(items):
        result = Cons(item, result)
    return result


# ============================================================
# ATOMS, CONDITIONS, SIGNATURES
# ============================================================

class Signature(NamedTuple):
    name: str
    arity: int

    def __str__(self) -> str:
        return f"{self.name}/{self.arity}"


def parse_signature(text: str) -> Signature:
    """Parse `name/arity`."""
    name, sep, arity = text.strip().rpartition('/')
    if not sep or not name or not arity.isdigit():
        raise UsageError(f"Bad predicate signature '{text}', expected name/arity")
    return Signature(name, int(arity))


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: Tuple[Term, ...] = ()

    @property
    def signature(self) -> Signature:
        return Signature(self.predicate, len(self.args))

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class Neq:
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left} != {self.right}"


@dataclass(frozen=True)
class Guard:
    """Filter on the presence of a derivable atom; contributes no weight."""
    atom: Atom

    def __str__(self) -> str:
        return str(self.atom)


SideCondition = Union[Eq, Neq, Guard]


class Pair(NamedTuple):
    """One paired predicate of a PRODUCT transformation."""
    left: Signature
    right: Signature
    name: str

    def __str__(self) -> str:
        return f"{self.left} {self.right} as {self.name}"


# ============================================================
# RULES, AXIOMS, PROGRAMS
# ============================================================

# Provenance tags of product-program nodes
FACTOR_1 = 'factor-1'
FACTOR_2 = 'factor-2'
SHARED = 'shared'


@dataclass(frozen=True)
class RuleLineage:
    """
    Where a rule emitted by product_transform came from.

    body_map has one entry per body atom: ("L", i) copied from the left
    factor rule's i-th antecedent, ("R", j) from the right one, or
    ("P", i, j) for a folded product antecedent. A factor rule of None
    stands for the identity rule of an axiom-defined predicate.
    """
    kind: str
    left_id: Optional[int] = None
    right_id: Optional[int] = None
    left_rule: Optional['Rule'] = None
    right_rule: Optional['Rule'] = None
    body_map: Tuple[Tuple[Any, ...], ...] = ()
    alignment: str = ''


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: Tuple[Atom, ...]
    conditions: Tuple[SideCondition, ...] = ()
    origin: Optional[str] = None
    span: Optional[SourceSpan] = field(default=None, compare=False)
    lineage: Optional[RuleLineage] = field(default=None, compare=False, repr=False)

    @property
    def guards(self) -> Tuple[Atom, ...]:
        return tuple(c.atom for c in self.conditions if isinstance(c, Guard))

    def __str__(self) -> str:
        text = f"{self.head} += {' * '.join(str(b) for b in self.body)}"
        if self.conditions:
            text += f" if {', '.join(str(c) for c in self.conditions)}"
        return text + '.'


@dataclass(frozen=True)
class Axiom:
    atom: Atom
    value: Any
    span: Optional[SourceSpan] = field(default=None, compare=False)


@dataclass(frozen=True)
class Program:
    rules: Tuple[Rule, ...] = ()
    axioms: Tuple[Axiom, ...] = ()
    semiring: Optional[str] = None
    pairings: Tuple[Pair, ...] = ()
    input_predicates: FrozenSet[Signature] = frozenset()
    provenance: Mapping[str, str] = field(default_factory=dict, compare=False, hash=False, repr=False)

    # -- structure ------------------------------------------------

    def signatures(self) -> Set[Signature]:
        sigs: Set[Signature] = set()
        for rule in self.rules:
            sigs.add(rule.head.signature)
            sigs.update(atom.signature for atom in rule.body)
            sigs.update(atom.signature for atom in rule.guards)
        sigs.update(ax.atom.signature for ax in self.axioms)
        return sigs

    def predicate_names(self) -> Set[str]:
        return {sig.name for sig in self.signatures()}

    def rule_defined(self) -> Set[Signature]:
        return {rule.head.signature for rule in self.rules}

    def axiom_defined(self) -> Set[Signature]:
        return {ax.atom.signature for ax in self.axioms}

    def rules_for(self, sig: Signature) -> List[Tuple[int, Rule]]:
        """(1-based id, rule) for every rule concluding `sig`."""
        return [(i, r) for i, r in enumerate(self.rules, 1) if r.head.signature == sig]

    def axioms_for(self, sig: Signature) -> List[Axiom]:
        return [ax for ax in self.axioms if ax.atom.signature == sig]

    def rule(self, rule_id: int) -> Rule:
        if not 1 <= rule_id <= len(self.rules):
            raise UnknownRuleError(f"No rule {rule_id} (program has {len(self.rules)} rules)")
        return self.rules[rule_id - 1]

    # -- functional updates ---------------------------------------

    def with_rules(self, rules: Iterable[Rule]) -> 'Program':
        return replace(self, rules=tuple(rules))

    def with_axioms(self, axioms: Iterable[Axiom]) -> 'Program':
        return replace(self, axioms=tuple(axioms))

    def merged(self, facts: Iterable[Axiom]) -> 'Program':
        """Program plus extra fact-table axioms (appended in order)."""
        return replace(self, axioms=self.axioms + tuple(facts))


# ============================================================
# TERM UTILITIES
# ============================================================

def is_ground(term: Term) -> bool:
    if isinstance(term, Var):
        return False
    if isinstance(term, Cons):
        return is_ground(term.head) and is_ground(term.tail)
    if isinstance(term, ArithExpr):
        return is_ground(term.base)
    return True


def atom_is_ground(atom: Atom) -> bool:
    return all(is_ground(a) for a in atom.args)


def term_vars(term: Term) -> Iterator[str]:
    """Variable names in first-occurrence order (with repeats)."""
    if isinstance(term, Var):
        yield term.name
    elif isinstance(term, Cons):
        yield from term_vars(term.head)
        yield from term_vars(term.tail)
    elif isinstance(term, ArithExpr):
        yield from term_vars(term.base)


def atom_vars(atom: Atom) -> Iterator[str]:
    for arg in atom.args:
        yield from term_vars(arg)


def condition_vars(cond: SideCondition) -> Iterator[str]:
    if isinstance(cond, Guard):
        yield from atom_vars(cond.atom)
    else:
        yield from term_vars(cond.left)
        yield from term_vars(cond.right)


def rule_vars(rule: Rule) -> List[str]:
    seen: Dict[str, None] = {}
    for name in atom_vars(rule.head):
        seen.setdefault(name)
    for atom in rule.body:
        for name in atom_vars(atom):
            seen.setdefault(name)
    for cond in rule.conditions:
        for name in condition_vars(cond):
            seen.setdefault(name)
    return list(seen)


def has_arith(term: Term) -> bool:
    if isinstance(term, ArithExpr):
        return True
    if isinstance(term, Cons):
        return has_arith(term.head) or has_arith(term.tail)
    return False


# ============================================================
# MATCHING AND SUBSTITUTION
# ============================================================

def match_term(pattern: Term, value: Term, subst: Substitution) -> bool:
    """Extend `subst` in place so that pattern matches the ground value."""
    if isinstance(pattern, Var):
        bound = subst.get(pattern.name)
        if bound is None:
            subst[pattern.name] = value
            return True
        return bound == value
    if isinstance(pattern, ArithExpr):
        if not isinstance(value, Int):
            return False
        base = pattern.base
        if isinstance(base, Int):
            return base.value + pattern.offset == value.value
        if isinstance(base, Var):
            return match_term(base, Int(value.value - pattern.offset), subst)
        return False
    if isinstance(pattern, Cons):
        return (isinstance(value, Cons)
                and match_term(pattern.head, value.head, subst)
                and match_term(pattern.tail, value.tail, subst))
    return pattern == value


def match_atom(pattern: Atom, fact: Atom, subst: Optional[Substitution] = None) -> Optional[Substitution]:
    """Match against a ground fact, extending a copy of `subst`."""
    if pattern.predicate != fact.predicate or len(pattern.args) != len(fact.args):
        return None
    result = dict(subst) if subst else {}
    for p, v in zip(pattern.args, fact.args):
        if not match_term(p, v, result):
            return None
    return result


def unify(pattern: Atom, fact: Atom) -> Optional[Substitution]:
    """
    Most general matcher of `pattern` onto the ground atom `fact`.

    Returns None when they do not match. `I-1` in the pattern matches the
    integer n by binding I to n+1.
    """
    return match_atom(pattern, fact)


def substitute_term(term: Term, subst: Mapping[str, Term]) -> Term:
    if isinstance(term, Var):
        bound = subst.get(term.name)
        if bound is None or bound == term:
            return term
        return substitute_term(bound, subst)
    if isinstance(term, Cons):
        return Cons(substitute_term(term.head, subst), substitute_term(term.tail, subst))
    if isinstance(term, ArithExpr):
        base = substitute_term(term.base, subst)
        if isinstance(base, Int):
            return Int(base.value + term.offset)
        if isinstance(base, Var):
            return ArithExpr(base, term.offset)
        if isinstance(base, ArithExpr):
            offset = base.offset + term.offset
            return base.base if offset == 0 else ArithExpr(base.base, offset)
        raise TermTypeError(f"Arithmetic on non-integer term {base} in {term}")
    return term


def substitute(atom: Atom, subst: Mapping[str, Term]) -> Atom:
    """Apply `subst`; arithmetic with a ground base is evaluated."""
    if not subst:
        return atom
    return Atom(atom.predicate, tuple(substitute_term(a, subst) for a in atom.args))


def substitute_condition(cond: SideCondition, subst: Mapping[str, Term]) -> SideCondition:
    if isinstance(cond, Guard):
        return Guard(substitute(cond.atom, subst))
    return type(cond)(substitute_term(cond.left, subst), substitute_term(cond.right, subst))


def substitute_rule(rule: Rule, subst: Mapping[str, Term]) -> Rule:
    return replace(
        rule,
        head=substitute(rule.head, subst),
        body=tuple(substitute(a, subst) for a in rule.body),
        conditions=tuple(substitute_condition(c, subst) for c in rule.conditions),
    )


def _walk(term: Term, subst: Substitution) -> Term:
    while isinstance(term, Var) and term.name in subst:
        term = subst[term.name]
    return term


def _occurs(name: str, term: Term, subst: Substitution) -> bool:
    term = _walk(term, subst)
    if isinstance(term, Var):
        return term.name == name
    if isinstance(term, Cons):
        return _occurs(name, term.head, subst) or _occurs(name, term.tail, subst)
    if isinstance(term, ArithExpr):
        return _occurs(name, term.base, subst)
    return False


def unify_terms(a: Term, b: Term, subst: Optional[Substitution] = None) -> Optional[Substitution]:
    """
    Two-sided unification with occurs check.

    When both sides are variables the right one is bound to the left one,
    so the earlier name survives. Returns an extended copy or None.
    """
    result = dict(subst) if subst else {}
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x, y = _walk(x, result), _walk(y, result)
        if x == y:
            continue
        if isinstance(y, Var):
            if _occurs(y.name, x, result):
                return None
            result[y.name] = x
        elif isinstance(x, Var):
            if _occurs(x.name, y, result):
                return None
            result[x.name] = y
        elif isinstance(x, Cons) and isinstance(y, Cons):
            stack.append((x.tail, y.tail))
            stack.append((x.head, y.head))
        elif isinstance(x, ArithExpr) and isinstance(y, ArithExpr):
            if x.offset != y.offset:
                return None
            stack.append((x.base, y.base))
        elif isinstance(x, ArithExpr) and isinstance(y, Int):
            stack.append((x.base, Int(y.value - x.offset)))
        elif isinstance(y, ArithExpr) and isinstance(x, Int):
            stack.append((y.base, Int(x.value - y.offset)))
        else:
            return None
    return result


# ============================================================
# SIDE CONDITIONS
# ============================================================

def bind_conditions(conditions: Sequence[SideCondition], subst: Substitution) -> Optional[Substitution]:
    """
    Evaluate Eq and Neq conditions under a ground binding.

    An Eq with one ground side binds the other side (solving `V+k` for V);
    conditions are retried until no progress. Guards are ignored here.
    Returns the extended binding, or None if a condition fails or
    cannot be decided.
    """
    pending = [c for c in conditions if not isinstance(c, Guard)]
    if not pending:
        return subst
    result = dict(subst)
    while pending:
        progress = False
        deferred = []
        for cond in pending:
            left = substitute_term(cond.left, result)
            right = substitute_term(cond.right, result)
            lg, rg = is_ground(left), is_ground(right)
            if isinstance(cond, Neq):
                if lg and rg:
                    if left == right:
                        return None
                    progress = True
                else:
                    deferred.append(cond)
                continue
            if lg and rg:
                if left != right:
                    return None
                progress = True
            elif lg or rg:
                ground, other = (left, right) if lg else (right, left)
                if not match_term(other, ground, result):
                    return None
                progress = True
            else:
                deferred.append(cond)
        if not progress:
            return None
        pending = deferred
    return result


# ============================================================
# RENAMING AND ALPHA-EQUIVALENCE
# ============================================================

def rename_variables(rule: Rule, mapping: Mapping[str, str]) -> Rule:
    return substitute_rule(rule, {old: Var(new) for old, new in mapping.items()})


def rename_apart(rule: Rule, suffix: str) -> Rule:
    """Append `suffix` to every variable name."""
    return rename_variables(rule, {v: f"{v}{suffix}" for v in rule_vars(rule)})


def _canonical(head: Atom, body: Sequence[Atom], conditions: Sequence[SideCondition]):
    order: Dict[str, str] = {}
    for atom in (head, *body):
        for name in atom_vars(atom):
            order.setdefault(name, f"V{len(order)}")
    for cond in conditions:
        for name in condition_vars(cond):
            order.setdefault(name, f"V{len(order)}")
    subst = {k: Var(v) for k, v in order.items()}
    return (
        str(substitute(head, subst)),
        tuple(str(substitute(a, subst)) for a in body),
        tuple(sorted(str(substitute_condition(c, subst)) for c in conditions)),
    )


def alpha_equivalent(a: Rule, b: Rule, ignore_body_order: bool = False) -> bool:
    """True when the rules differ only by a consistent variable renaming."""
    if len(a.body) != len(b.body) or len(a.conditions) != len(b.conditions):
        return False
    target = _canonical(a.head, a.body, a.conditions)
    if not ignore_body_order:
        return target == _canonical(b.head, b.body, b.conditions)
    return any(
        target == _canonical(b.head, perm, b.conditions)
        for perm in itertools.permutations(b.body)
    )


# ============================================================
# VALIDATION
# ============================================================

def _location(kind: str, index: int, span: Optional[SourceSpan]) -> str:
    where = f"{kind} {index}"
    return f"{where} (line {span.line})" if span else where


def bound_variables(rule: Rule) -> Set[str]:
    """Variables fixed by the body atoms, closed under Eq propagation."""
    bound = {v for atom in rule.body for v in atom_vars(atom)}
    eqs = [c for c in rule.conditions if isinstance(c, Eq)]
    changed = True
    while changed:
        changed = False
        for eq in eqs:
            left, right = set(term_vars(eq.left)), set(term_vars(eq.right))
            for known, unknown in ((left, right), (right, left)):
                if known <= bound and not unknown <= bound:
                    bound |= unknown
                    changed = True
    return bound


def validate(program: Program) -> List[Diagnostic]:
    """
    Static checks: range restriction, arity consistency, ground and unique
    axioms, declared pairings, and predicates defined both ways.

    Returns an empty list iff the program passes. Pure.
    """
    diagnostics: List[Diagnostic] = []
    desugared = desugar_arithmetic(program)

    def error(location: str, message: str):
        diagnostics.append(Diagnostic('error', location, message))

    # Range restriction (after desugaring)
    for index, rule in enumerate(desugared.rules, 1):
        loc = _location('rule', index, rule.span)
        bound = bound_variables(rule)
        for name in dict.fromkeys(atom_vars(rule.head)):
            if name not in bound:
                error(loc, f"variable {name} in head {program.rules[index - 1].head} is not bound by the body")
        for cond in rule.conditions:
            kind = 'guard' if isinstance(cond, Guard) else 'condition'
            for name in dict.fromkeys(condition_vars(cond)):
                if name not in bound:
                    error(loc, f"variable {name} in {kind} '{cond}' is not bound by the body")

    # Arity consistency
    arities: Dict[str, Set[int]] = {}
    for sig in program.signatures():
        arities.setdefault(sig.name, set()).add(sig.arity)
    for name, found in sorted(arities.items()):
        if len(found) > 1:
            listed = ', '.join(f"{name}/{a}" for a in sorted(found))
            error(f"predicate {name}", f"used with inconsistent arities: {listed}")

    # Axioms: ground, unique
    seen: Dict[Atom, int] = {}
    for index, axiom in enumerate(program.axioms, 1):
        loc = _location('axiom', index, axiom.span)
        if not atom_is_ground(axiom.atom):
            error(loc, f"axiom {axiom.atom} is not ground")
            continue
        if has_arith_atom(axiom.atom):
            error(loc, f"axiom {axiom.atom} contains arithmetic")
            continue
        if axiom.atom in seen:
            error(loc, f"duplicate axiom {axiom.atom} (first given as axiom {seen[axiom.atom]})")
        else:
            seen[axiom.atom] = index

    # Predicates defined both by axioms and rules
    both = program.axiom_defined() & program.rule_defined()
    for sig in sorted(both - set(program.input_predicates)):
        error(f"predicate {sig}", "defined by both axioms and rules; declare it with @input")

    # Pairings
    sigs = program.signatures() | set(program.input_predicates)
    for pair in program.pairings:
        for sig in (pair.left, pair.right):
            if sig not in sigs:
                error(f"pairing {pair}", f"references unknown predicate {sig}")

    return diagnostics


def has_arith_atom(atom: Atom) -> bool:
    return any(has_arith(a) for a in atom.args)


# ============================================================
# ARITHMETIC DESUGARING
# ============================================================

def _fresh_name(base: str, offset: int, taken: Set[str]) -> str:
    stem = f"{base}{'p' if offset > 0 else 'm'}{abs(offset)}"
    name, n = stem, 1
    while name in taken:
        n += 1
        name = f"{stem}_{n}"
    taken.add(name)
    return name


def _desugar_term(term: Term, taken: Set[str], conditions: List[SideCondition], in_head: bool) -> Term:
    if isinstance(term, Cons):
        return Cons(_desugar_term(term.head, taken, conditions, in_head),
                    _desugar_term(term.tail, taken, conditions, in_head))
    if not isinstance(term, ArithExpr):
        return term
    if isinstance(term.base, Int):
        return Int(term.base.value + term.offset)
    if not isinstance(term.base, Var):
        raise TermTypeError(f"Arithmetic on non-integer term {term}")
    fresh = Var(_fresh_name(term.base.name, term.offset, taken))
    if in_head:
        # c(X, I-1, I)  ->  c(X, Im1, I) if Im1 = I-1
        conditions.append(Eq(fresh, term))
    else:
        # path(P, I-1)  ->  path(P, Im1) if I = Im1+1
        conditions.append(Eq(term.base, ArithExpr(fresh, -term.offset)))
    return fresh


def desugar_rule(rule: Rule) -> Rule:
    if not (has_arith_atom(rule.head) or any(has_arith_atom(a) for a in rule.body)):
        return rule
    taken = set(rule_vars(rule))
    added: List[SideCondition] = []
    body = tuple(
        Atom(a.predicate, tuple(_desugar_term(t, taken, added, False) for t in a.args))
        for a in rule.body
    )
    head = Atom(rule.head.predicate,
                tuple(_desugar_term(t, taken, added, True) for t in rule.head.args))
    return replace(rule, head=head, body=body, conditions=tuple(added) + rule.conditions)


def desugar_arithmetic(program: Program) -> Program:
    """
    Move Var+/-Int terms out of heads and body atoms into Eq conditions.

    Rule order (and therefore rule ids) is preserved; rules without
    arithmetic are returned unchanged.
    """
    rules = tuple(desugar_rule(r) for r in program.rules)
    if all(a is b for a, b in zip(rules, program.rules)):
        return program
    return program.with_rules(rules)
