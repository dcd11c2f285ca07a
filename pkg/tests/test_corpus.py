"""
Corpus Tests
Every fixture's recorded values, fixture materialization, grammar and
translation aggregates, and the synthetic program generator.
"""

import os

import numpy as np

import pytest

from tests.helpers import proofs_of
from wlp.corpus import (build_fsa_fixtures, build_grammar_fixtures, build_graph_fixtures,
                        build_translation_fixtures, fixture_names, load_fixture, materialize,
                        random_acyclic_program)
from wlp.corpus.fixtures import expectations_for
from wlp.corpus.synthetic import MAX_DERIVED, MAX_EDGES
from wlp.errors import UsageError
from wlp.kernel import validate
from wlp.semiring import get_semiring
from wlp.solver import solve
from wlp.textio import parse_facts_tsv, parse_program


class TestExpectations:
    """Recorded fixture values"""

    @pytest.mark.parametrize('name,expectation', expectations_for(fixture_names()),
                             ids=lambda v: v if isinstance(v, str) else f"{v.semiring}:{v.atom}")
    def test_fixture_value(self, name, expectation):
        """Test 1: each recorded atom value, in its semiring"""
        chart = solve(load_fixture(name).combined(), expectation.semiring)
        got = chart.value_of(expectation.atom)
        sr = get_semiring(expectation.semiring)
        assert sr.approx_eq(got, expectation.value, expectation.tolerance), (
            f"{name}: {expectation.atom} = {got}, expected {expectation.value}")

    def test_registry(self):
        """Test 2: families partition the registry"""
        families = [build_graph_fixtures(), build_fsa_fixtures(),
                    build_grammar_fixtures(), build_translation_fixtures()]
        names = [n for family in families for n in family]
        assert sorted(names) == fixture_names()
        assert len(names) == len(set(names))
        assert load_fixture('wfst_order2').companion.name == 'wfst_order1'

    def test_unknown_fixture(self):
        """Test 3: unknown names are usage errors"""
        with pytest.raises(UsageError):
            load_fixture('nope')

    @pytest.mark.parametrize('name', fixture_names())
    def test_fixtures_validate(self, name):
        """Test 4: no fixture has static errors"""
        assert validate(load_fixture(name).combined()) == []


class TestAggregates:
    """Values worked out by hand"""

    def test_two_parses(self):
        """Test 1: PP attachment ambiguity, 0.00432 + 0.00216"""
        program = load_fixture('g18').combined()
        assert len(proofs_of(program, 'goal')) == 2
        assert solve(program, 'real').value_of('goal') == pytest.approx(0.00648)
        assert solve(program, 'viterbi').value_of('goal') == pytest.approx(0.00432)

    def test_binarized_grammar_agrees(self):
        """Test 2: splitting the binary rule keeps the parse forest"""
        plain = solve(load_fixture('g18').combined(), 'real').value_of('goal')
        split = solve(load_fixture('g18_binarized').combined(), 'real').value_of('goal')
        assert split == pytest.approx(plain)

    def test_dependency_parses(self):
        """Test 3: the dependency grammar also has two parses"""
        assert len(proofs_of(load_fixture('g18_dep').combined(), 'goal')) == 2

    def test_phrase_translation(self):
        """Test 4: three target strings, two segmentations of "the house is" """
        program = load_fixture('phrase_product').combined()
        assert solve(program, 'real').value_of('goal') == pytest.approx(0.753)
        assert solve(program, 'viterbi').value_of('goal') == pytest.approx(0.378)


class TestMaterialize:
    """Writing fixtures back out"""

    def test_round_trip(self, tmp_path):
        """Test 1: written files parse back to the fixture"""
        paths = materialize('graph4', str(tmp_path))
        assert [os.path.basename(p) for p in paths] == ['graph4.wlp', 'graph4.tsv']
        fixture = load_fixture('graph4')
        with open(paths[0], encoding='utf-8') as f:
            text = f.read()
        assert text.startswith('% fixture graph4')
        assert parse_program(text) == fixture.program
        with open(paths[1], encoding='utf-8') as f:
            assert tuple(parse_facts_tsv(f.read())) == fixture.facts

    def test_companion(self, tmp_path):
        """Test 2: the second program goes to NAME_right"""
        out = tmp_path / 'nested'
        paths = materialize('wfst_pair', str(out))
        assert [os.path.basename(p) for p in paths] == [
            'wfst_pair.wlp', 'wfst_pair.tsv', 'wfst_pair_right.wlp', 'wfst_pair_right.tsv']
        assert all(os.path.exists(p) for p in paths)


class TestSynthetic:
    """Random layered programs"""

    @pytest.mark.parametrize('sr', ['boolean', 'tropical', 'viterbi', 'real'])
    def test_shape(self, sr, rng):
        """Test 1: valid, acyclic and within the size caps"""
        for _ in range(30):
            program = random_acyclic_program(rng, sr)
            assert program.semiring == sr
            assert validate(program) == []
            derived = {r.head.predicate for r in program.rules}
            assert 2 <= len(derived) <= MAX_DERIVED
            assert len(program.rules) <= 2 * MAX_DERIVED
            assert len([a for a in program.axioms if a.atom.predicate == 'rel']) <= MAX_EDGES
            assert len(program.axioms) <= 20

    def test_deterministic(self):
        """Test 2: the same seed gives the same program"""
        a = random_acyclic_program(np.random.default_rng(7), 'real', prefix='p_')
        b = random_acyclic_program(np.random.default_rng(7), 'real', prefix='p_')
        assert a == b
        assert all(name.startswith('p_') for name in a.predicate_names())
