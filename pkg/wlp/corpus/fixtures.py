"""
Fixtures - Worked Examples as Programs and Fact Tables
======================================================
Every fixture is a program (`data/*.wlp`) plus its axioms (`data/*.tsv`)
and the values the regression suite expects. Fixtures whose weights are
not printed anywhere are reconstructed so that every published
aggregate holds; the TSV headers say how.

Features:
- build_*_fixtures() per family (graphs, automata, grammars, translation)
- load_fixture / fixture_names registry, loaded once and immutable
- Companion fixtures for two-program examples (composition, KL)
- materialize() writes a fixture back out as .wlp + .tsv

Author: WLP Engine
Version: 1.0.0
"""

import logging
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..errors import UsageError
from ..kernel import Axiom, Program
from ..textio import parse_facts_tsv, parse_program, render_facts_tsv, render_program

logger = logging.getLogger(__name__)

DATA_DIR = os.path.join(os.path.dirname(__file__), 'data')


# ============================================================
# TYPES
# ============================================================

@dataclass(frozen=True)
class Expectation:
    """Value of one atom under one semiring, within `tolerance`."""
    semiring: str
    atom: str
    value: Any
    tolerance: float = 1e-12
    note: str = ''


@dataclass(frozen=True)
class Fixture:
    name: str
    program: Program
    facts: Tuple[Axiom, ...]
    expectations: Tuple[Expectation, ...] = ()
    note: str = ''
    companion: Optional['Fixture'] = None

    def combined(self) -> Program:
        """The program with the fact table appended to its axioms."""
        return self.program.merged(self.facts)


@dataclass(frozen=True)
class _Source:
    programs: Tuple[str, ...]
    tables: Tuple[str, ...]
    note: str
    expectations: Tuple[Expectation, ...] = ()
    companion: Optional[str] = None


# ============================================================
# REGISTRY
# ============================================================

_GRAPHS: Dict[str, _Source] = {
    'reach_bool': _Source(
        ('reach.wlp',), ('reach_bool.tsv',),
        'boolean reachability with a cycle and an unreachable component',
        (Expectation('boolean', 'reachable(c)', True, 0.0, 'c lies on the cycle through a'),),
    ),
    'cost3': _Source(
        ('reach.wlp',), ('cost3.tsv',),
        'shortest paths with a self-loop that adds a cost of 2',
        (Expectation('tropical', 'reachable(d)', 1.0, 0.0, 'edge a->d'),
         Expectation('tropical', 'reachable(b)', 5.0, 0.0, 'a->d->b beats the direct edge')),
    ),
    'graph4': _Source(
        ('reach.wlp',), ('graph4.tsv',),
        'probabilistic graph; best path and path sum',
        (Expectation('viterbi', 'reachable(a)', 1.0, 1e-12, 'initial vertex'),
         Expectation('viterbi', 'reachable(b)', 0.16, 1e-12, 'best path a -> d -> b'),
         Expectation('real', 'reachable(b)', 10.0, 1e-6, 'path sum of b')),
    ),
    'chain3': _Source(
        ('reach.wlp',), ('chain3.tsv',),
        'tropical chain a -> b -> c',
        (Expectation('tropical', 'reachable(c)', 3.0, 0.0, '1 + 2'),),
    ),
    'diverge': _Source(
        ('reach.wlp',), ('diverge.tsv',),
        'real self-loop of weight 1; the path sum diverges',
    ),
}

_AUTOMATA: Dict[str, _Source] = {
    'fsa6': _Source(
        ('fsa.wlp',), ('fsa6.tsv',),
        'probabilistic FSA with five accepting paths',
        (Expectation('real', 'goal', 1.0, 1e-12, 'the five path probabilities sum to 1'),),
    ),
    'fsa6_01': _Source(
        ('fsa_string.wlp',), ('fsa6.tsv', 'string01.tsv'),
        'recognition of "01" by the probabilistic FSA',
        (Expectation('viterbi', 'goal', 0.4, 1e-12, 'best path a 0 b 1 c'),
         Expectation('real', 'goal', 0.6, 1e-12, '0.4 + 0.2')),
    ),
    'acceptor01': _Source(
        ('fsa.wlp',), ('acceptor01.tsv',),
        'deterministic acceptor of the single string "01"',
        (Expectation('real', 'goal', 1.0, 1e-12, 'one path of weight 1'),),
    ),
    'biaser1': _Source(
        ('fsa.wlp',), ('biaser1.tsv',),
        'one-state automaton biased towards the symbol 1',
        (Expectation('real', 'goal', 10.0, 1e-9, '1 / (1 - 0.9)'),),
    ),
    'wfst_pair': _Source(
        ('wfst.wlp',), ('wfst_left.tsv',),
        'two transducers to compose; the companion is the second one',
        (Expectation('real', 'goal', 1.0, 1e-12, 'each transducer is normalized'),),
        companion='wfst_pair_right',
    ),
    'wfst_pair_right': _Source(
        ('wfst.wlp',), ('wfst_right.tsv',),
        'second transducer of the composition pair',
        (Expectation('real', 'goal', 1.0, 1e-12, 'normalized'),),
    ),
    'wfst_order1': _Source(
        ('wfst.wlp',), ('wfst_order1.tsv',),
        'order-1 transducer over the states s0, s1, s2',
        (Expectation('real', 'goal', 1.0, 1e-12, '0.5 + 0.35 + 0.15'),),
    ),
    'wfst_order2': _Source(
        ('biarc.wlp',), ('wfst_order2.tsv',),
        'order-2 transducer on the same paths; the companion is the order-1 machine',
        (Expectation('real', 'goal', 1.0, 1e-12, '0.6 + 0.2 + 0.2'),),
        companion='wfst_order1',
    ),
}

_GRAMMARS: Dict[str, _Source] = {
    'g18': _Source(
        ('cky.wlp',), ('g18.tsv', 'sentence18.tsv'),
        'CNF grammar and the sentence "alice saw bob with binoculars"',
    ),
    'g18_dep': _Source(
        ('cky.wlp',), ('g18_dep.tsv', 'sentence18.tsv'),
        'dependency grammar over the same sentence',
    ),
    'g18_binarized': _Source(
        ('cky_binarized.wlp',), ('g18.tsv', 'sentence18.tsv'),
        'the CNF grammar parsed by the binarized CKY program',
    ),
    'gEps': _Source(
        ('cky_eps.wlp',), ('geps.tsv',),
        'grammar with an empty production',
        (Expectation('real', 'goal', 0.4, 1e-12, 'a -> x (0.8) times b -> eps (0.5)'),),
    ),
    'itg_pair': _Source(
        ('itg.wlp',), ('itg_pair.tsv',),
        'sentence pair that only an inverted production aligns; straight rules only',
        (Expectation('real', 'goal_12', 0.0, 0.0, 'no straight alignment exists'),),
    ),
    'itg_inverted': _Source(
        ('itg.wlp', 'itg_inversion.wlp'), ('itg_pair.tsv',),
        'the same sentence pair with the inverted production added',
        (Expectation('real', 'goal_12', 0.5, 1e-12, 'one inverted tree of weight 0.5'),),
    ),
    'lexcky': _Source(
        ('lexcky.wlp',), ('lexcky.tsv',),
        'lexicalized CKY over "alice saw bob"',
        (Expectation('real', 'goal_12', 0.5, 1e-12, 'one tree'),),
    ),
}

_TRANSLATION: Dict[str, _Source] = {
    'trigram_othello': _Source(
        ('trigram.wlp',), ('othello.tsv',),
        'trigram model seeded with "if it"',
        (Expectation('real', 'goal', 1.0, 1e-12, 'every trigram row sums to 1'),
         Expectation('viterbi', 'goal', 0.5, 1e-12, '"if it is so"')),
    ),
    'monotone': _Source(
        ('monotone.wlp',), ('monotone.tsv',),
        'monotone decoding of "das haus ist"',
        (Expectation('real', 'goal', 1.5, 1e-12, 'two segmentations: 1.0 + 0.5'),
         Expectation('viterbi', 'goal', 0.6, 1e-12, '"the" "house" "is" word by word')),
    ),
    'phrase_product': _Source(
        ('phrase.wlp',), ('monotone.tsv', 'phrase.tsv'),
        'phrase translation scored by a target trigram model',
    ),
}

_FAMILIES = (_GRAPHS, _AUTOMATA, _GRAMMARS, _TRANSLATION)


# ============================================================
# LOADING
# ============================================================

def _read(filename: str) -> str:
    path = os.path.join(DATA_DIR, filename)
    with open(path, 'r', encoding='utf-8') as f:
        return f.read()


def _lookup(name: str) -> _Source:
    for family in _FAMILIES:
        if name in family:
            return family[name]
    raise UsageError(f"Unknown fixture '{name}' (known: {', '.join(fixture_names())})")


@lru_cache(maxsize=None)
def load_fixture(name: str) -> Fixture:
    """Parse a fixture's program and tables; cached, fixtures are immutable."""
    source = _lookup(name)
    program = parse_program('\n'.join(_read(f) for f in source.programs))
    facts: List[Axiom] = []
    for table in source.tables:
        facts.extend(parse_facts_tsv(_read(table)))
    companion = load_fixture(source.companion) if source.companion else None
    logger.debug(f"Loaded fixture {name}: {len(program.rules)} rules, {len(facts)} facts")
    return Fixture(name, program, tuple(facts), source.expectations, source.note, companion)


def fixture_names() -> List[str]:
    return sorted(name for family in _FAMILIES for name in family)


def _build(family: Dict[str, _Source]) -> Dict[str, Fixture]:
    return {name: load_fixture(name) for name in family}


def build_graph_fixtures() -> Dict[str, Fixture]:
    """reach_bool, cost3, graph4, plus chain3 and diverge."""
    return _build(_GRAPHS)


def build_fsa_fixtures() -> Dict[str, Fixture]:
    """fsa6, fsa6_01, acceptor01, biaser1, wfst_pair, wfst_order1, wfst_order2."""
    return _build(_AUTOMATA)


def build_grammar_fixtures() -> Dict[str, Fixture]:
    """g18, g18_dep, g18_binarized, gEps, itg_pair, itg_inverted, lexcky."""
    return _build(_GRAMMARS)


def build_translation_fixtures() -> Dict[str, Fixture]:
    """trigram_othello, monotone, phrase_product."""
    return _build(_TRANSLATION)


# ============================================================
# MATERIALIZE
# ============================================================

def _write_pair(fixture: Fixture, stem: str, out_dir: str) -> List[str]:
    wlp_path = os.path.join(out_dir, f"{stem}.wlp")
    tsv_path = os.path.join(out_dir, f"{stem}.tsv")
    with open(wlp_path, 'w', encoding='utf-8') as f:
        f.write(f"% fixture {fixture.name}: {fixture.note}\n")
        f.write(render_program(fixture.program))
    with open(tsv_path, 'w', encoding='utf-8') as f:
        f.write(f"# fixture {fixture.name}: {fixture.note}\n")
        f.write(render_facts_tsv(fixture.facts))
    return [wlp_path, tsv_path]


def materialize(name: str, out_dir: str) -> List[str]:
    """
    Write `<name>.wlp` and `<name>.tsv` into out_dir (created if needed);
    a companion fixture goes to `<name>_right.wlp` / `.tsv`.

    Returns the written paths.
    """
    fixture = load_fixture(name)
    os.makedirs(out_dir, exist_ok=True)
    written = _write_pair(fixture, name, out_dir)
    if fixture.companion is not None:
        written.extend(_write_pair(fixture.companion, f"{name}_right", out_dir))
    logger.info(f"Materialized fixture {name} into {out_dir}")
    return written


def expectations_for(names: Sequence[str]) -> List[Tuple[str, Expectation]]:
    """(fixture name, expectation) for every listed fixture."""
    return [(name, e) for name in names for e in load_fixture(name).expectations]
