"""
WLP - Weighted Logic Programming Engine
=======================================
Semiring-generic solver for weighted logic programs, the PRODUCT
transformation with its constraint passes, proof enumeration and
information-theoretic measures over proof distributions.
"""

from .errors import WlpError
from .kernel import Atom, Axiom, Program, Rule
from .product import PairingSpec, natural_pairing, product_transform
from .proofs import ProofLimits, enumerate_proofs, project_proof
from .semiring import SEMIRINGS, get_semiring
from .solver import Chart, SolveOptions, query, solve
from .textio import parse_program, render_program

__version__ = '1.0.0'

__all__ = [
    'Atom',
    'Axiom',
    'Chart',
    'PairingSpec',
    'Program',
    'ProofLimits',
    'Rule',
    'SEMIRINGS',
    'SolveOptions',
    'WlpError',
    'enumerate_proofs',
    'get_semiring',
    'natural_pairing',
    'parse_program',
    'product_transform',
    'project_proof',
    'query',
    'render_program',
    'solve',
]
