"""Fixture programs, their fact tables and the synthetic program generator."""

from .fixtures import (
    Expectation,
    Fixture,
    build_fsa_fixtures,
    build_grammar_fixtures,
    build_graph_fixtures,
    build_translation_fixtures,
    fixture_names,
    load_fixture,
    materialize,
)
from .synthetic import random_acyclic_program

__all__ = [
    'Expectation',
    'Fixture',
    'build_fsa_fixtures',
    'build_grammar_fixtures',
    'build_graph_fixtures',
    'build_translation_fixtures',
    'fixture_names',
    'load_fixture',
    'materialize',
    'random_acyclic_program',
]
