"""
Text I/O - .wlp Programs, Fact Tables, Charts
=============================================
Parser and printer for the ASCII program format, the tab-separated fact
format, and the JSON-lines chart output.

Program syntax:
    @semiring viterbi.
    @input trans/2.
    @pair reachable1/1 reachable2/1 as reachable_12.
    reachable(Q) += reachable(P) * edge(P,Q) if edge(Q,P), Q != P.
    edge(a,b) = 0.5.
    p(a) = <0.5,0,1>.

`%` starts a comment; a `%! text` line right before a rule records the
rule's origin note, so emitted product programs round-trip exactly.

Author: WLP Engine
Version: 1.0.0
"""

import json
import logging
import math
import re
from typing import Any, Iterable, List, Optional, Sequence, Tuple, Union

from .errors import ParseError, SourceSpan
from .kernel import (NIL, ArithExpr, Atom, Axiom, Eq, Guard, Int, Neq, Pair,
                     Program, Rule, Signature, Sym, Term, Var, make_list)
from .semiring import Semiring, Triple

logger = logging.getLogger(__name__)


# ============================================================
# TOKENIZER
# ============================================================

_TOKEN_SPEC = [
    ('PRAGMA', r'%![^\n]*'),
    ('COMMENT', r'%[^\n]*'),
    ('NEWLINE', r'\n'),
    ('SKIP', r'[ \t\r]+'),
    ('DIRECTIVE', r'@[a-z]+'),
    ('FLOAT', r'\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+'),
    ('INT', r'\d+'),
    ('VAR', r'[A-Z_][A-Za-z0-9_]*'),
    ('NAME', r'[a-z][A-Za-z0-9_]*'),
    ('QUOTED', r'"(?:[^"\\\n]|\\.)*"|\'(?:[^\'\\\n]|\\.)*\''),
    ('OP', r'\+=|!=|::|[()\[\],.=*<>/+\-]'),
    ('MISMATCH', r'.'),
]
_TOKEN_RE = re.compile('|'.join(f'(?P<{name}>{pattern})' for name, pattern in _TOKEN_SPEC))


class Token:
    __slots__ = ('kind', 'text', 'line', 'column')

    def __init__(self, kind: str, text: str, line: int, column: int):
        self.kind = kind
        self.text = text
        self.line = line
        self.column = column

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.column)

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.column})"


def tokenize(text: str, first_line: int = 1) -> List[Token]:
    tokens: List[Token] = []
    line, line_start = first_line, 0
    for m in _TOKEN_RE.finditer(text):
        kind, value = m.lastgroup, m.group()
        column = m.start() - line_start + 1
        if kind == 'NEWLINE':
            line += 1
            line_start = m.end()
            continue
        if kind in ('SKIP', 'COMMENT'):
            continue
        if kind == 'MISMATCH':
            raise ParseError(f"unexpected character {value!r}", SourceSpan(line, column))
        tokens.append(Token(kind, value, line, column))
    tokens.append(Token('EOF', '', line, len(text) - line_start + 1))
    return tokens


def _unquote(text: str) -> str:
    body = text[1:-1]
    return re.sub(r'\\(.)', r'\1', body)


# ============================================================
# PARSER
# ============================================================

class _Parser:
    """Recursive-descent parser over the token list."""

    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers --------------------------------------------

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        index = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[index]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind != 'EOF':
            self.pos += 1
        return token

    def at(self, text: str) -> bool:
        tok = self.current
        return tok.kind in ('OP', 'NAME') and tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected '{text}'")
        return self.advance()

    def fail(self, message: str):
        tok = self.current
        found = 'end of input' if tok.kind == 'EOF' else repr(tok.text)
        raise ParseError(f"{message}, found {found}", tok.span)

    # -- terms ----------------------------------------------------

    def parse_int_literal(self) -> int:
        negative = False
        if self.at('-'):
            self.advance()
            negative = True
        if self.current.kind != 'INT':
            self.fail("expected integer")
        value = int(self.advance().text)
        return -value if negative else value

    def parse_primary(self) -> Term:
        tok = self.current
        if tok.kind == 'VAR':
            self.advance()
            var = Var(tok.text)
            if self.at('+') or self.at('-'):
                sign = 1 if self.advance().text == '+' else -1
                if self.current.kind != 'INT':
                    self.fail("expected integer offset")
                offset = sign * int(self.advance().text)
                return ArithExpr(var, offset) if offset else var
            return var
        if tok.kind == 'NAME':
            self.advance()
            return Sym(tok.text)
        if tok.kind == 'QUOTED':
            self.advance()
            return Sym(_unquote(tok.text))
        if tok.kind == 'INT' or self.at('-'):
            return Int(self.parse_int_literal())
        if self.at('['):
            self.advance()
            if self.at(']'):
                self.advance()
                return NIL
            items = [self.parse_term()]
            while self.at(','):
                self.advance()
                items.append(self.parse_term())
            self.expect(']')
            return make_list(items)
        if self.at('('):
            self.advance()
            term = self.parse_term()
            self.expect(')')
            return term
        self.fail("expected a term")

    def parse_term(self) -> Term:
        head = self.parse_primary()
        if self.at('::'):
            self.advance()
            from .kernel import Cons
            return Cons(head, self.parse_term())
        return head

    def parse_atom(self) -> Atom:
        tok = self.current
        if tok.kind != 'NAME' or tok.text == 'if':
            self.fail("expected a predicate name")
        self.advance()
        args: List[Term] = []
        if self.at('('):
            self.advance()
            args.append(self.parse_term())
            while self.at(','):
                self.advance()
                args.append(self.parse_term())
            self.expect(')')
        return Atom(tok.text, tuple(args))

    # -- values ---------------------------------------------------

    def parse_number(self) -> float:
        sign = 1.0
        if self.at('-'):
            self.advance()
            sign = -1.0
        tok = self.current
        if tok.kind in ('FLOAT', 'INT'):
            self.advance()
            return sign * float(tok.text)
        if tok.kind == 'NAME' and tok.text == 'inf':
            self.advance()
            return sign * math.inf
        self.fail("expected a number")

    def parse_value(self) -> Any:
        tok = self.current
        if tok.kind == 'NAME' and tok.text in ('true', 'false'):
            self.advance()
            return tok.text == 'true'
        if self.at('<'):
            self.advance()
            x = self.parse_number()
            self.expect(',')
            y = self.parse_number()
            self.expect(',')
            z = self.parse_number()
            self.expect('>')
            return Triple(x, y, z)
        return self.parse_number()

    # -- statements -----------------------------------------------

    def parse_condition(self):
        tok = self.current
        if tok.kind == 'NAME' and not (self.peek().kind == 'OP' and self.peek().text in ('=', '!=', '::')):
            return Guard(self.parse_atom())
        left = self.parse_term()
        if self.at('='):
            self.advance()
            return Eq(left, self.parse_term())
        if self.at('!='):
            self.advance()
            return Neq(left, self.parse_term())
        self.fail("expected '=' or '!=' in side condition")

    def parse_signature(self) -> Signature:
        tok = self.current
        if tok.kind != 'NAME':
            self.fail("expected predicate name")
        self.advance()
        self.expect('/')
        if self.current.kind != 'INT':
            self.fail("expected arity")
        return Signature(tok.text, int(self.advance().text))

    def parse_directive(self, program: dict):
        tok = self.advance()
        name = tok.text
        if name == '@semiring':
            if self.current.kind != 'NAME':
                self.fail("expected semiring name")
            program['semiring'] = self.advance().text
        elif name == '@pair':
            left = self.parse_signature()
            right = self.parse_signature()
            self.expect('as')
            if self.current.kind != 'NAME':
                self.fail("expected product predicate name")
            program['pairings'].append(Pair(left, right, self.advance().text))
        elif name == '@input':
            program['inputs'].add(self.parse_signature())
        else:
            raise ParseError(f"unknown directive {name}", tok.span)
        self.expect('.')

    def parse_program(self) -> Program:
        program = {'semiring': None, 'pairings': [], 'inputs': set()}
        rules: List[Rule] = []
        axioms: List[Axiom] = []
        origin: Optional[str] = None

        while self.current.kind != 'EOF':
            tok = self.current
            if tok.kind == 'PRAGMA':
                origin = self.advance().text[2:].strip() or None
                continue
            if tok.kind == 'DIRECTIVE':
                self.parse_directive(program)
                origin = None
                continue
            head = self.parse_atom()
            if self.at('+='):
                self.advance()
                body = [self.parse_atom()]
                while self.at('*'):
                    self.advance()
                    body.append(self.parse_atom())
                conditions = []
                if self.current.kind == 'NAME' and self.current.text == 'if':
                    self.advance()
                    conditions.append(self.parse_condition())
                    while self.at(','):
                        self.advance()
                        conditions.append(self.parse_condition())
                self.expect('.')
                rules.append(Rule(head, tuple(body), tuple(conditions), origin, span=tok.span))
            elif self.at('='):
                self.advance()
                value = self.parse_value()
                self.expect('.')
                axioms.append(Axiom(head, value, span=tok.span))
            else:
                self.fail("expected '+=' or '='")
            origin = None

        return Program(
            rules=tuple(rules),
            axioms=tuple(axioms),
            semiring=program['semiring'],
            pairings=tuple(program['pairings']),
            input_predicates=frozenset(program['inputs']),
        )


def parse_program(text: str) -> Program:
    """Parse .wlp text into a Program with source spans attached."""
    program = _Parser(tokenize(text)).parse_program()
    logger.debug(f"Parsed program: {len(program.rules)} rules, {len(program.axioms)} axioms")
    return program


def _parse_whole(text: str, method: str):
    parser = _Parser(tokenize(text))
    result = getattr(parser, method)()
    if parser.current.kind != 'EOF':
        parser.fail("unexpected trailing input")
    return result


def parse_atom(text: str) -> Atom:
    """Parse a single atom or pattern, e.g. `reachable(Q)`."""
    return _parse_whole(text, 'parse_atom')


def parse_term(text: str) -> Term:
    return _parse_whole(text, 'parse_term')


def parse_value(text: str) -> Any:
    return _parse_whole(text, 'parse_value')


def parse_term_list(text: str, line: int = 1) -> Tuple[Term, ...]:
    """Comma-separated terms (the argument column of a fact table)."""
    parser = _Parser(tokenize(text, first_line=line))
    if parser.current.kind == 'EOF':
        return ()
    terms = [parser.parse_term()]
    while parser.at(','):
        parser.advance()
        terms.append(parser.parse_term())
    if parser.current.kind != 'EOF':
        parser.fail("unexpected trailing input in arguments")
    return tuple(terms)


# ============================================================
# FACT TABLES
# ============================================================

def parse_facts_tsv(text: str, default_value: Any = 1.0) -> List[Axiom]:
    """
    One axiom per line: `pred <TAB> arg1,arg2,... <TAB> value`.

    Blank lines and lines starting with `#` or `%` are skipped; a missing
    value column takes `default_value`.
    """
    axioms: List[Axiom] = []
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip('\r')
        stripped = line.strip()
        if not stripped or stripped.startswith(('#', '%')):
            continue
        fields = line.split('\t')
        if len(fields) not in (2, 3) and not (len(fields) == 1 and fields[0].strip()):
            raise ParseError(f"expected 'pred<TAB>args[<TAB>value]', got {len(fields)} columns",
                             SourceSpan(number))
        predicate = fields[0].strip()
        if not re.match(r'^[a-z][A-Za-z0-9_]*$', predicate):
            raise ParseError(f"bad predicate name {predicate!r}", SourceSpan(number))
        try:
            args = parse_term_list(fields[1], number) if len(fields) > 1 else ()
            if len(fields) == 3 and fields[2].strip():
                value = parse_value(fields[2].strip())
            else:
                value = default_value
        except ParseError as e:
            raise ParseError(e.raw_message, SourceSpan(number, e.span.column if e.span else 1)) from e
        axioms.append(Axiom(Atom(predicate, args), value, span=SourceSpan(number)))
    return axioms


def render_facts_tsv(axioms: Iterable[Axiom]) -> str:
    lines = []
    for axiom in axioms:
        args = ','.join(str(a) for a in axiom.atom.args)
        lines.append(f"{axiom.atom.predicate}\t{args}\t{render_literal(axiom.value)}")
    return ''.join(line + '\n' for line in lines)


# ============================================================
# RENDERING
# ============================================================

def _exact_number(x: float) -> str:
    if math.isinf(x):
        return 'inf' if x > 0 else '-inf'
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def render_literal(value: Any) -> str:
    """Exact program-text form of a value (round-trips through the parser)."""
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, tuple) and len(value) == 3:
        return '<' + ','.join(_exact_number(v) for v in value) + '>'
    return _exact_number(value)


def format_number(x: float, digits: int = 12) -> str:
    if math.isinf(x):
        return 'inf' if x > 0 else '-inf'
    text = f"{x:.{digits}g}"
    return '0' if text == '-0' else text


def render_value(value: Any, digits: int = 12) -> str:
    """Display form of a value with `digits` significant digits."""
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, tuple) and len(value) == 3:
        return '<' + ','.join(format_number(v, digits) for v in value) + '>'
    return format_number(value, digits)


def _round(x: float, digits: int) -> Union[float, str]:
    # strict JSON has no Infinity; use the program syntax's inf
    if math.isinf(x):
        return 'inf' if x > 0 else '-inf'
    return float(f"{x:.{digits}g}")


def json_value(value: Any, digits: int = 12) -> Any:
    """Chart value as a JSON-ready object; infinities become "inf" / "-inf"."""
    if isinstance(value, bool):
        return value
    if isinstance(value, tuple) and len(value) == 3:
        return [_round(v, digits) for v in value]
    return _round(value, digits)


def render_rule(rule: Rule) -> str:
    return str(rule)


def render_program(program: Program) -> str:
    """
    Canonical text: directives, then rules, then axioms.

    parse_program(render_program(p)) == p for every valid program.
    """
    lines: List[str] = []
    if program.semiring:
        lines.append(f"@semiring {program.semiring}.")
    for sig in sorted(program.input_predicates):
        lines.append(f"@input {sig}.")
    for pair in program.pairings:
        lines.append(f"@pair {pair.left} {pair.right} as {pair.name}.")
    if lines and (program.rules or program.axioms):
        lines.append('')
    for rule in program.rules:
        if rule.origin:
            lines.append(f"%! {rule.origin}")
        lines.append(render_rule(rule))
    if program.rules and program.axioms:
        lines.append('')
    for axiom in program.axioms:
        lines.append(f"{axiom.atom} = {render_literal(axiom.value)}.")
    return ''.join(line + '\n' for line in lines)


def render_chart(chart, sr: Optional[Semiring] = None, digits: int = 12) -> str:
    """JSON lines `{"atom": ..., "value": ...}` sorted by atom text."""
    lines = []
    for text, value in sorted((str(atom), value) for atom, value in chart.entries.items()):
        lines.append(json.dumps({'atom': text, 'value': json_value(value, digits)},
                                separators=(',', ':'), allow_nan=False))
    return ''.join(line + '\n' for line in lines)


def render_proof(proof, sr: Optional[Semiring] = None, digits: int = 12, indent: str = '  ') -> str:
    """Indented proof tree; every node shows its value when `sr` is given."""
    from .proofs import AxiomLeaf, proof_values

    values = proof_values(proof, sr) if sr is not None else {}
    lines: List[str] = []
    stack: List[Tuple[Any, int]] = [(proof, 0)]
    while stack:
        node, depth = stack.pop()
        pad = indent * depth
        suffix = f" [{render_value(values[id(node)], digits)}]" if sr is not None else ''
        if isinstance(node.via, AxiomLeaf):
            lines.append(f"{pad}{node.root} = {render_literal(node.via.axiom.value)}{suffix}")
        else:
            lines.append(f"{pad}{node.root}  <- rule {node.via.rule_id}{suffix}")
            for child in reversed(node.via.children):
                stack.append((child, depth + 1))
    return ''.join(line + '\n' for line in lines)
