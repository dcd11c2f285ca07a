"""
Solver Tests
Chart values in every semiring, both strategies, divergence reporting
and the grounder's edge cases.
"""

import math
from dataclasses import replace

import pytest

from tests.helpers import loop_tail
from wlp.corpus import load_fixture, random_acyclic_program
from wlp.errors import CarrierError, DivergenceError, SolveModeError, UsageError, ValidationError
from wlp.proofs import ProofLimits, aggregate, enumerate_proofs
from wlp.semiring import REAL, VITERBI, get_semiring
from wlp.solver import SolveOptions, Solver, query, solve
from wlp.textio import parse_atom, parse_program

ITERATE = SolveOptions(mode='iterate', tolerance=1e-13)


class TestCharts:
    """Values on the graph fixtures"""

    @pytest.mark.parametrize('mode', ['priority', 'iterate'])
    def test_viterbi_best_path(self, graph4, mode):
        """Test 1: a -> d -> b beats every path through the loops"""
        chart = solve(graph4, 'viterbi', SolveOptions(mode=mode))
        assert chart.value_of('reachable(a)') == pytest.approx(1.0)
        assert chart.value_of('reachable(b)') == pytest.approx(0.16, abs=1e-12)
        assert chart.mode == mode

    def test_real_path_sum(self, graph4):
        """Test 2: geometric series through both self-loops, within 500 sweeps"""
        chart = solve(graph4, 'real', SolveOptions(tolerance=1e-9))
        assert chart.value_of('reachable(d)') == pytest.approx(1.25, abs=1e-6)
        assert chart.value_of('reachable(b)') == pytest.approx(10.0, abs=1e-6)
        assert chart.iterations <= 500
        assert chart.mode == 'iterate'

    def test_boolean_cycle(self):
        """Test 3: the cycle is reachable, the detached component is not"""
        chart = solve(load_fixture('reach_bool').combined(), 'boolean')
        assert chart.value_of('reachable(c)') is True
        assert parse_atom('reachable(e)') not in chart
        assert chart.value_of('reachable(e)') is False

    @pytest.mark.parametrize('mode', ['priority', 'iterate'])
    def test_tropical_shortest_path(self, mode):
        """Test 4: 1 + 4 through d, not the direct edge of 7"""
        chart = solve(load_fixture('cost3').combined(), 'tropical', SolveOptions(mode=mode))
        assert chart.value_of('reachable(d)') == 1.0
        assert chart.value_of('reachable(b)') == 5.0

    def test_program_semiring_directive(self):
        """Test 5: @semiring is used when no semiring is passed"""
        program = parse_program('@semiring tropical.\nreachable(Q) += initial(Q).\ninitial(a) = 3.')
        assert solve(program).value_of('reachable(a)') == 3.0
        with pytest.raises(UsageError):
            solve(parse_program('reachable(Q) += initial(Q).\ninitial(a) = 3.'))


class TestStrategies:
    """Priority and iterate modes"""

    def test_priority_needs_superior_semiring(self, graph4):
        """Test 1: priority mode on the real semiring is refused"""
        with pytest.raises(SolveModeError):
            solve(graph4, REAL, SolveOptions(mode='priority'))

    def test_auto_mode(self, graph4):
        """Test 2: auto resolves by semiring"""
        assert Solver(graph4, VITERBI).resolved_mode() == 'priority'
        assert Solver(graph4, REAL).resolved_mode() == 'iterate'

    def test_sweeps_increase_monotonically(self, graph4):
        """Test 3: Jacobi sweeps approach the path sum from below"""
        previous = 0.0
        atom = parse_atom('reachable(b)')
        for chart in Solver(graph4, REAL).iter_sweeps():
            value = chart.get(atom)
            assert value >= previous - 1e-12
            previous = value
            if chart.iterations == 300:
                break
        assert 9.99 < previous <= 10.0 + 1e-9

    def test_modes_agree_on_random_programs(self, rng):
        """Test 4: priority and iterate give the same viterbi chart"""
        for _ in range(25):
            program = random_acyclic_program(rng, 'viterbi')
            best = solve(program, 'viterbi', SolveOptions(mode='priority'))
            swept = solve(program, 'viterbi', ITERATE)
            assert set(best.entries) == set(swept.entries)
            for atom, value in best.entries.items():
                assert swept.entries[atom] == pytest.approx(value, abs=1e-12)


class TestOrderIndependence:
    """Rule and axiom order never changes the chart"""

    @pytest.mark.parametrize('name,sr', [
        ('graph4', 'viterbi'),
        ('graph4', 'real'),
        ('fsa6', 'real'),
        ('cost3', 'tropical'),
    ])
    def test_permuted_program(self, name, sr, rng):
        """Test 1: reversed and shuffled rules and axioms"""
        program = load_fixture(name).combined()
        semiring = get_semiring(sr)
        expected = solve(program, sr)
        variants = [replace(program, rules=program.rules[::-1], axioms=program.axioms[::-1])]
        for _ in range(5):
            variants.append(replace(
                program,
                rules=tuple(program.rules[i] for i in rng.permutation(len(program.rules))),
                axioms=tuple(program.axioms[i] for i in rng.permutation(len(program.axioms)))))
        for variant in variants:
            chart = solve(variant, sr)
            assert set(chart.entries) == set(expected.entries)
            for atom, value in expected.entries.items():
                assert semiring.approx_eq(chart.entries[atom], value, 1e-9), str(atom)


class TestEnumerationOracle:
    """Cyclic path sums against truncated proof enumeration"""

    MAX_DEPTH = 400

    def test_graph4_path_sum(self, graph4):
        """Test 1: reachable(b) equals the sum over proofs up to depth 400"""
        chart = solve(graph4, 'real', SolveOptions(tolerance=1e-9))
        result = enumerate_proofs(graph4, 'reachable(b)',
                                  ProofLimits(max_depth=self.MAX_DEPTH, max_count=200000))
        assert result.truncated
        assert len(result) < 200000

        # depth is 4 + loop traversals; each traversal weighs at most 0.9
        tail = loop_tail(0.2 * 0.8, 0.9, self.MAX_DEPTH - 3)
        assert tail < 1e-12
        total = aggregate(result, 'real')
        assert total == pytest.approx(chart.value_of('reachable(b)'), abs=1e-6)


class TestDivergence:
    """Sums that never converge are reported, not truncated"""

    def test_weight_one_loop(self):
        """Test 1: 1 + 1 + 1 + ... raises with the sweep count"""
        program = load_fixture('diverge').combined()
        with pytest.raises(DivergenceError) as info:
            solve(program, 'real', SolveOptions(max_iterations=50))
        assert info.value.iterations == 50
        assert info.value.residual >= 1.0
        assert info.value.exit_code == 4

    def test_same_loop_is_fine_when_idempotent(self):
        """Test 2: the boolean chart of the same program is finite"""
        chart = solve(load_fixture('diverge').combined(), 'boolean')
        assert chart.value_of('reachable(a)') is True

    def test_unbounded_atoms(self):
        """Test 3: counting upwards forever trips max_atoms"""
        program = parse_program('@input n/1.\nn(I) += n(I-1).\nn(0) = 1.')
        with pytest.raises(DivergenceError):
            solve(program, 'boolean', SolveOptions(max_atoms=50))


class TestGrounding:
    """Axioms, guards, arithmetic and queries"""

    def test_zero_axioms_are_absent(self):
        """Test 1: an axiom equal to zero derives nothing"""
        program = parse_program('reachable(Q) += initial(Q).\ninitial(a) = 0.\ninitial(b) = 0.5.')
        chart = solve(program, 'real')
        assert parse_atom('reachable(a)') not in chart
        assert chart.value_of('reachable(b)') == 0.5

    @pytest.mark.parametrize('sr', ['viterbi', 'real'])
    def test_guards_filter_without_weight(self, sr):
        """Test 2: `if r(X)` needs r(X) derivable and multiplies by one"""
        program = parse_program(
            'p(X) += q(X) if r(X).\n'
            'q(a) = 0.5.\nq(b) = 0.25.\nr(a) = 0.1.\n')
        chart = solve(program, sr)
        assert chart.value_of('p(a)') == pytest.approx(0.5)
        assert parse_atom('p(b)') not in chart

    def test_string_positions(self, fsa6_01):
        """Test 3: I-1 in the body walks the input string"""
        chart = solve(fsa6_01, 'real')
        assert chart.value_of('path(b,1)') == pytest.approx(0.5)
        assert chart.value_of('path(c,2)') == pytest.approx(0.6)
        assert chart.value_of('goal') == pytest.approx(0.6)

    def test_invalid_program(self):
        """Test 4: validation errors stop the solve"""
        with pytest.raises(ValidationError) as info:
            solve(parse_program('p(X,Y) += q(X).\nq(a) = 1.'), 'real')
        assert info.value.exit_code == 3

    def test_carrier_violation(self):
        """Test 5: 1.5 is not a probability"""
        program = parse_program('reachable(Q) += initial(Q).\ninitial(a) = 1.5.')
        with pytest.raises(CarrierError):
            solve(program, 'viterbi')

    def test_query(self, graph4):
        """Test 6: matches come back sorted with their bindings"""
        chart = solve(graph4, 'viterbi')
        results = query(chart, parse_atom('reachable(X)'))
        assert [str(s['X']) for s, _ in results] == ['a', 'b', 'd']
        assert math.isclose(results[1][1], 0.16)
