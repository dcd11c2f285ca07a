"""
Kernel Tests
Terms, matching, unification, side conditions, validation and
arithmetic desugaring.
"""

import itertools

import pytest

from wlp.errors import TermTypeError, UnknownRuleError, UsageError
from wlp.kernel import (NIL, ArithExpr, Atom, Eq, Guard, Int, Neq, Signature, Sym, Var, atom_vars,
                        alpha_equivalent, bind_conditions, bound_variables, desugar_arithmetic,
                        desugar_rule, make_list, match_atom, parse_signature, rename_apart,
                        rule_vars, substitute, substitute_term, unify, unify_terms, validate)
from wlp.solver import Grounder
from wlp.textio import parse_atom, parse_program


def rule_of(text: str):
    return parse_program(text).rules[0]


SYMBOLS = ('a', 'b', 'c')
VARIABLES = ('X', 'Y', 'I')


def random_pattern(rng) -> Atom:
    """p/1..3 over symbols, small integers, variables and Var+-1."""
    args = []
    for _ in range(int(rng.integers(1, 4))):
        kind = int(rng.integers(4))
        if kind == 0:
            args.append(Sym(str(rng.choice(SYMBOLS))))
        elif kind == 1:
            args.append(Int(int(rng.integers(0, 4))))
        elif kind == 2:
            args.append(Var(str(rng.choice(VARIABLES))))
        else:
            args.append(ArithExpr(Var(str(rng.choice(VARIABLES))), int(rng.choice([-1, 1]))))
    return Atom('p', tuple(args))


def random_fact(rng) -> Atom:
    args = [Sym(str(rng.choice(SYMBOLS))) if rng.random() < 0.5 else Int(int(rng.integers(0, 4)))
            for _ in range(int(rng.integers(1, 4)))]
    return Atom('p', tuple(args))


def ground_instance(pattern: Atom, rng) -> Atom:
    """pattern with every variable replaced; variables under arithmetic get integers."""
    numeric = {a.base.name for a in pattern.args if isinstance(a, ArithExpr)}
    binding = {}
    for name in atom_vars(pattern):
        if name in binding:
            continue
        if name in numeric or rng.random() < 0.5:
            binding[name] = Int(int(rng.integers(1, 5)))
        else:
            binding[name] = Sym(str(rng.choice(SYMBOLS)))
    return substitute(pattern, binding)


def direct_instances(program, atoms):
    """Ground rule instances from matching the unrewritten rules against `atoms`."""
    found = set()
    for rule_id, rule in enumerate(program.rules, 1):
        for facts in itertools.product(atoms, repeat=len(rule.body)):
            subst = {}
            for pattern, fact in zip(rule.body, facts):
                subst = match_atom(pattern, fact, subst)
                if subst is None:
                    break
            if subst is not None:
                subst = bind_conditions(rule.conditions, subst)
            if subst is not None:
                found.add((rule_id, substitute(rule.head, subst), facts))
    return found


class TestTerms:
    """Term construction and display"""

    def test_symbols_quote_when_needed(self):
        """Test 1: plain symbols print bare, keywords and odd text are quoted"""
        assert str(Sym('alice')) == 'alice'
        assert str(Sym('if')) == '"if"'
        assert str(Sym('Alice')) == '"Alice"'
        assert str(Sym('say "hi"')) == '"say \\"hi\\""'

    def test_lists(self):
        """Test 2: make_list builds cons chains ending in nil"""
        lst = make_list([Sym('the'), Sym('house')])
        assert str(lst) == 'the::house::[]'
        assert make_list([]) == NIL

    def test_arith_display(self):
        """Test 3: Var+/-Int prints with its sign"""
        assert str(ArithExpr(Var('I'), -1)) == 'I-1'
        assert str(ArithExpr(Var('M'), 1)) == 'M+1'

    def test_signature(self):
        """Test 4: name/arity round-trips; malformed text is a usage error"""
        assert parse_signature('c_12/6') == Signature('c_12', 6)
        assert str(Signature('path', 2)) == 'path/2'
        with pytest.raises(UsageError):
            parse_signature('path')


class TestMatching:
    """One-sided matching against ground atoms"""

    def test_basic_match(self):
        """Test 1: variables bind, repeated variables must agree"""
        pattern = parse_atom('edge(P,Q)')
        assert match_atom(pattern, parse_atom('edge(a,b)')) == {'P': Sym('a'), 'Q': Sym('b')}
        assert match_atom(parse_atom('edge(P,P)'), parse_atom('edge(a,b)')) is None
        assert match_atom(pattern, parse_atom('initial(a)')) is None

    def test_arithmetic_pattern(self):
        """Test 2: path(P,I-1) matches path(a,1) with I = 2"""
        subst = match_atom(parse_atom('path(P,I-1)'), parse_atom('path(a,1)'))
        assert subst['I'] == Int(2)
        assert match_atom(parse_atom('path(P,I-1)'), parse_atom('path(a,b)')) is None

    def test_list_pattern(self):
        """Test 3: E::Es splits a list"""
        subst = match_atom(parse_atom('phrase(I,I2,E::Es)'), parse_atom('phrase(0,1,[the,house])'))
        assert subst['E'] == Sym('the')
        assert subst['Es'] == make_list([Sym('house')])

    def test_substitute_evaluates_arithmetic(self):
        """Test 4: a bound base turns I+1 into an integer"""
        atom = substitute(parse_atom('predict(E1,E2,J+1)'), {'J': Int(3), 'E1': Sym('a')})
        assert str(atom) == 'predict(a,E2,4)'
        with pytest.raises(TermTypeError):
            substitute_term(ArithExpr(Var('J'), 1), {'J': Sym('x')})

    def test_unifier_reproduces_fact(self, rng):
        """Test 5: unify(p, g) = s implies substitute(p, s) = g, on random atoms"""
        matched = 0
        for _ in range(1000):
            pattern = random_pattern(rng)
            for fact in (ground_instance(pattern, rng), random_fact(rng)):
                subst = unify(pattern, fact)
                if subst is not None:
                    matched += 1
                    assert substitute(pattern, subst) == fact, f"{pattern} vs {fact}"
            assert unify(pattern, ground_instance(pattern, rng)) is not None
        assert matched > 1000


class TestUnification:
    """Two-sided unification used by the constraint passes"""

    def test_right_variable_binds_to_left(self):
        """Test 1: the earlier name survives"""
        subst = unify_terms(Var('I1'), Var('I2'))
        assert subst == {'I2': Var('I1')}

    def test_occurs_check(self):
        """Test 2: X = X::nil fails"""
        assert unify_terms(Var('X'), make_list([Var('X')])) is None

    def test_structures(self):
        """Test 3: cons cells unify element by element"""
        subst = unify_terms(make_list([Var('A'), Sym('b')]), make_list([Sym('a'), Var('B')]))
        assert subst == {'A': Sym('a'), 'B': Sym('b')}
        assert unify_terms(Sym('a'), Sym('b')) is None

    def test_arith_against_int(self):
        """Test 4: I-1 = 3 binds I to 4"""
        assert unify_terms(ArithExpr(Var('I'), -1), Int(3)) == {'I': Int(4)}


class TestSideConditions:
    """Eq/Neq evaluation under a binding"""

    def test_eq_binds_free_side(self):
        """Test 1: a ground side binds the other"""
        subst = bind_conditions([Eq(Var('I'), ArithExpr(Var('Im1'), 1))], {'I': Int(3)})
        assert subst['Im1'] == Int(2)

    def test_neq_rejects(self):
        """Test 2: X != Y fails when both are the same constant"""
        assert bind_conditions([Neq(Var('X'), Var('Y'))], {'X': Sym('a'), 'Y': Sym('a')}) is None
        assert bind_conditions([Neq(Var('X'), Var('Y'))], {'X': Sym('a'), 'Y': Sym('b')}) is not None

    def test_undecidable_fails(self):
        """Test 3: conditions over unbound variables cannot be decided"""
        assert bind_conditions([Eq(Var('A'), Var('B'))], {}) is None

    def test_guards_ignored(self):
        """Test 4: guards are checked by the grounder, not here"""
        assert bind_conditions([Guard(parse_atom('proof1(X)'))], {}) == {}


class TestRenaming:
    """Renaming apart and alpha-equivalence"""

    def test_rename_apart(self):
        """Test 1: every variable gets the suffix"""
        rule = rename_apart(rule_of('reachable(Q) += reachable(P) * edge(P,Q).'), '_l')
        assert rule_vars(rule) == ['Q_l', 'P_l']

    def test_alpha_equivalence(self):
        """Test 2: consistent renaming is equivalent, inconsistent is not"""
        a = rule_of('r(Q) += r(P) * edge(P,Q).')
        b = rule_of('r(Y) += r(X) * edge(X,Y).')
        c = rule_of('r(Y) += r(X) * edge(Y,X).')
        assert alpha_equivalent(a, b)
        assert not alpha_equivalent(a, c)

    def test_body_order(self):
        """Test 3: body permutations only match when asked"""
        a = rule_of('g += x(A) * y(A).')
        b = rule_of('g += y(B) * x(B).')
        assert not alpha_equivalent(a, b)
        assert alpha_equivalent(a, b, ignore_body_order=True)


class TestValidation:
    """Static program checks"""

    def test_valid_program(self):
        """Test 1: the reachability program passes"""
        program = parse_program(
            'reachable(Q) += initial(Q).\n'
            'reachable(Q) += reachable(P) * edge(P,Q).\n'
            'initial(a) = 1.\n')
        assert validate(program) == []

    def test_range_restriction(self):
        """Test 2: a head variable missing from the body is reported"""
        diagnostics = validate(parse_program('p(X,Y) += q(X).'))
        assert len(diagnostics) == 1
        assert 'Y' in diagnostics[0].message
        assert diagnostics[0].severity == 'error'

    def test_eq_binds_for_range_restriction(self):
        """Test 3: head arithmetic is bound through its desugared condition"""
        assert validate(parse_program('c(X,I-1,I) += unary(X,W) * string(I,W).')) == []
        assert validate(parse_program('p(Y) += q(X) if Y = X.')) == []

    def test_arity_mismatch(self):
        """Test 4: p/1 and p/2 in one program"""
        diagnostics = validate(parse_program('p(X) += q(X).\nr(X) += p(X,X).'))
        assert any('inconsistent arities' in d.message for d in diagnostics)

    def test_axioms(self):
        """Test 5: duplicate and non-ground axioms"""
        diagnostics = validate(parse_program('e(a) = 1.\ne(a) = 2.\nf(X) = 1.'))
        messages = ' '.join(d.message for d in diagnostics)
        assert 'duplicate axiom e(a)' in messages
        assert 'not ground' in messages

    def test_both_defined_needs_input(self):
        """Test 6: a predicate with rules and axioms must be declared @input"""
        text = 'p(X) += q(X).\nq(a) = 1.\np(b) = 1.\n'
        assert any('@input' in d.message for d in validate(parse_program(text)))
        assert validate(parse_program('@input p/1.\n' + text)) == []

    def test_unknown_pairing(self):
        """Test 7: @pair must reference known predicates"""
        diagnostics = validate(parse_program('@pair p/1 q/1 as pq.\np(X) += r(X).'))
        assert any('unknown predicate q/1' in d.message for d in diagnostics)

    def test_unknown_rule_id(self):
        """Test 8: rule ids are 1-based"""
        program = parse_program('p(X) += q(X).')
        assert program.rule(1).head == parse_atom('p(X)')
        with pytest.raises(UnknownRuleError):
            program.rule(2)


class TestDesugaring:
    """Var+/-Int moved into Eq conditions"""

    def test_head_arithmetic(self):
        """Test 1: c(X,I-1,I) gets a fresh variable bound by Eq"""
        rule = desugar_rule(rule_of('c(X,I-1,I) += unary(X,W) * string(I,W).'))
        assert str(rule.head) == 'c(X,Im1,I)'
        assert Eq(Var('Im1'), ArithExpr(Var('I'), -1)) in rule.conditions

    def test_body_arithmetic(self):
        """Test 2: path(P,I-1) in the body becomes path(P,Im1) if I = Im1+1"""
        rule = desugar_rule(rule_of('path(Q,I) += path(P,I-1) * arc(P,Q,A) * string(I,A).'))
        assert str(rule.body[0]) == 'path(P,Im1)'
        assert Eq(Var('I'), ArithExpr(Var('Im1'), 1)) in rule.conditions
        assert 'Im1' in bound_variables(rule)

    def test_order_preserved(self):
        """Test 3: rule ids survive desugaring"""
        program = parse_program(
            'a(X) += b(X).\n'
            'c(X,I-1,I) += unary(X,W) * string(I,W).\n'
            'd(X) += a(X).\n')
        desugared = desugar_arithmetic(program)
        assert desugared.rules[0] is program.rules[0]
        assert desugared.rules[2] is program.rules[2]
        assert desugared.rules[1].head.args[1] == Var('Im1')

    def test_fresh_names_avoid_clashes(self):
        """Test 4: an existing Im1 forces a different fresh name"""
        rule = desugar_rule(rule_of('c(I-1,Im1) += s(I,Im1).'))
        assert str(rule.head.args[0]) != 'Im1'

    @pytest.mark.parametrize('text', [
        'c(X,I-1,I) += unary(X,W) * string(I,W).\n'
        'd(I) += c(X,I-1,I).\n'
        'e(J+1) += d(J).\n'
        'unary(n,a) = 0.5.\nunary(v,b) = 0.5.\n'
        'string(1,a) = 1.\nstring(2,b) = 1.\nstring(3,a) = 1.\n',
        None,
    ], ids=['head-and-body', 'fsa6_01'])
    def test_ground_instances_unchanged(self, text, fsa6_01):
        """Test 5: the rewritten rules ground to exactly the original instances"""
        program = parse_program(text) if text else fsa6_01
        grounder = Grounder(program).run()
        edges = {(e.rule_id, e.head, e.tails) for e in grounder.edges}
        assert edges == direct_instances(program, grounder.atoms)
        if text:
            assert len(edges) == 9
