"""
WLP Command Line
================
Single entry point over the library: check, solve, proofs, product,
edit, entropy, kl and fixtures. Every subcommand is a thin wrapper
around the module operation of the same name.

Features:
- Subcommands registered with set_defaults(func=cli_*)
- Exit codes carried by the exception hierarchy (errors.WlpError)
- Config file + .env defaults, overridden per invocation by flags
- Numbers printed with 12 significant digits

Author: WLP Engine
Version: 1.0.0
"""

import argparse
import logging
import sys
from dataclasses import replace
from typing import Dict, List, Optional, Sequence, TextIO, Tuple

from .config import load_config, proof_limits_from_config, solve_options_from_config
from .corpus import fixture_names, materialize
from .errors import DivergenceError, UsageError, WlpError
from .infometrics import entropy_of_goal, kl_divergence
from .kernel import Pair, Program, parse_signature, substitute, validate
from .logging_setup import configure_logging
from .product import (PairingSpec, add_equality_constraint, collapse_arguments, drop_rules,
                      fix_structure, generalize_axioms, is_mixed_product_rule,
                      natural_pairing, product_transform)
from .proofs import aggregate, enumerate_proofs, proof_value
from .solver import query, solve
from .textio import (parse_atom, parse_facts_tsv, parse_program, render_chart, render_proof,
                     render_program, render_value)

logger = logging.getLogger(__name__)

POLICY_NAMES = {'left': 'left_to_right', 'crossed': 'crossed', 'explicit': 'explicit'}


class _ArgumentParser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting with status 2."""

    def error(self, message: str):
        raise UsageError(message)


# ============================================================
# INPUT HELPERS
# ============================================================

def _read_text(path: str) -> str:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return f.read()
    except OSError as e:
        raise UsageError(f"Cannot read {path}: {e.strerror or e}") from e


def _load_program(path: str, facts: Sequence[str] = ()) -> Program:
    program = parse_program(_read_text(path))
    for table in facts:
        program = program.merged(parse_facts_tsv(_read_text(table)))
    return program


def _emit(text: str, out_path: Optional[str], stdout: TextIO):
    if out_path:
        try:
            with open(out_path, 'w', encoding='utf-8') as f:
                f.write(text)
        except OSError as e:
            raise UsageError(f"Cannot write {out_path}: {e.strerror or e}") from e
        logger.info(f"Wrote {out_path}")
    else:
        stdout.write(text)


def _solve_options(args, config: Dict):
    opts = solve_options_from_config(config)
    overrides = {}
    if getattr(args, 'tol', None) is not None:
        overrides['tolerance'] = args.tol
    if getattr(args, 'max_iters', None) is not None:
        overrides['max_iterations'] = args.max_iters
    if getattr(args, 'mode', None) is not None:
        overrides['mode'] = args.mode
    return replace(opts, **overrides) if overrides else opts


def _digits(config: Dict) -> int:
    return int(config.get('output', {}).get('significant_digits', 12))


def _int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"{what}: expected an integer, got '{text}'") from None


# ============================================================
# FLAG PARSERS
# ============================================================

def parse_pair_flag(text: str) -> Pair:
    """`p/1=q/1:pq` -> Pair(p/1, q/1, pq)."""
    try:
        sigs, name = text.rsplit(':', 1)
        left, right = sigs.split('=', 1)
        return Pair(parse_signature(left), parse_signature(right), name.strip())
    except (ValueError, WlpError):
        raise UsageError(f"Bad --pair '{text}' (expected p/1=q/1:name)") from None


def parse_align_flag(text: str) -> Tuple[Tuple[int, int], List[Tuple[int, int]]]:
    """`3x4:1=2,2=1` -> ((3, 4), [(1, 2), (2, 1)])."""
    try:
        rules, folds = text.split(':', 1)
        lid, rid = rules.split('x', 1)
        pairs = []
        for item in folds.split(','):
            i, j = item.split('=', 1)
            pairs.append((int(i), int(j)))
        return (int(lid), int(rid)), pairs
    except ValueError:
        raise UsageError(f"Bad --align '{text}' (expected LIDxRID:i=j[,i=j])") from None


def parse_constrain_flag(text: str) -> Tuple[int, List[Tuple[str, str]]]:
    """`3:I1=I2,J1=J2` -> (3, [('I1', 'I2'), ('J1', 'J2')])."""
    rule, _, eqs = text.partition(':')
    pairs = []
    for item in eqs.split(','):
        a, sep, b = item.partition('=')
        if not sep or not a.strip() or not b.strip():
            raise UsageError(f"Bad --constrain '{text}' (expected RULE:X=Y[,X=Y])")
        pairs.append((a.strip(), b.strip()))
    return _int(rule, '--constrain rule id'), pairs


def parse_collapse_flag(text: str) -> Tuple[str, List[Tuple[int, int]]]:
    """`c_12/6:2=5,3=6` -> ('c_12/6', [(2, 5), (3, 6)])."""
    sig, _, rest = text.partition(':')
    pairs = []
    for item in rest.split(','):
        i, sep, j = item.partition('=')
        if not sep:
            raise UsageError(f"Bad --collapse '{text}' (expected pred/arity:i=j[,i=j])")
        pairs.append((_int(i, '--collapse position'), _int(j, '--collapse position')))
    return sig, pairs


def parse_fix_flag(text: str) -> Tuple[str, str, List[int]]:
    """`c_12:proof1:1,2,3` -> ('c_12', 'proof1', [1, 2, 3])."""
    parts = text.split(':')
    if len(parts) != 3:
        raise UsageError(f"Bad --fix '{text}' (expected pred:witness:positions)")
    predicate, witness, positions = parts
    return predicate, witness, [_int(p, '--fix position') for p in positions.split(',')]


# ============================================================
# SUBCOMMANDS
# ============================================================

def cli_check(args, config: Dict, stdout: TextIO) -> int:
    program = _load_program(args.file, args.facts)
    diagnostics = validate(program)
    for d in diagnostics:
        stdout.write(f"{d}\n")
    if any(d.severity == 'error' for d in diagnostics):
        return 3
    stdout.write(f"ok: {len(program.rules)} rules, {len(program.axioms)} axioms\n")
    return 0


def cli_solve(args, config: Dict, stdout: TextIO) -> int:
    program = _load_program(args.file, args.facts)
    chart = solve(program, args.semiring or program.semiring, _solve_options(args, config))
    digits = _digits(config)
    if args.query is None:
        stdout.write(render_chart(chart, digits=digits))
        return 0
    pattern = parse_atom(args.query)
    for subst, value in query(chart, pattern):
        stdout.write(f"{substitute(pattern, subst)} {render_value(value, digits)}\n")
    return 0


def cli_proofs(args, config: Dict, stdout: TextIO) -> int:
    program = _load_program(args.file, args.facts)
    limits = proof_limits_from_config(config)
    if args.max_depth is not None:
        limits = replace(limits, max_depth=args.max_depth)
    if args.max_count is not None:
        limits = replace(limits, max_count=args.max_count)
    result = enumerate_proofs(program, args.goal, limits)
    digits = _digits(config)
    sr = args.semiring
    for k, proof in enumerate(result, 1):
        header = f"% proof {k}"
        if sr:
            header += f": {render_value(proof_value(proof, sr), digits)}"
        stdout.write(header + '\n')
        stdout.write(render_proof(proof, sr, digits))
    stdout.write(f"% {len(result)} proofs{' (truncated)' if result.truncated else ''}\n")
    if sr:
        stdout.write(f"% total: {render_value(aggregate(result, sr), digits)}\n")
    return 0


def cli_product(args, config: Dict, stdout: TextIO) -> int:
    left = _load_program(args.left)
    right = _load_program(args.right)
    policy = POLICY_NAMES[args.policy]
    alignments = dict(parse_align_flag(a) for a in args.align)
    if alignments and policy != 'explicit':
        raise UsageError("--align needs --policy explicit")

    if args.natural:
        left, right, natural = natural_pairing(left, right, args.shared, policy)
        pairs = natural.pairs
    else:
        if args.shared:
            raise UsageError("--shared only applies with --natural")
        pairs = tuple(parse_pair_flag(p) for p in args.pair) or left.pairings
    if not pairs:
        raise UsageError("No pairs given: use --pair, --natural or @pair directives")

    result = product_transform(left, right, PairingSpec(pairs, policy, alignments))
    _emit(render_program(result), args.output, stdout)
    return 0


def cli_edit(args, config: Dict, stdout: TextIO) -> int:
    program = _load_program(args.file)
    for text in args.constrain:
        rule_id, pairs = parse_constrain_flag(text)
        program = add_equality_constraint(program, rule_id, pairs)
    if args.drop_rule or args.drop_mixed:
        ids = set(args.drop_rule)
        for rule_id in sorted(ids):
            program.rule(rule_id)
        program = drop_rules(
            program, lambda i, r: i in ids or (args.drop_mixed and is_mixed_product_rule(i, r)))
    for text in args.collapse:
        sig, pairs = parse_collapse_flag(text)
        program = collapse_arguments(program, sig, pairs)
    for predicate in args.generalize:
        program = generalize_axioms(program, predicate)
    for text in args.fix:
        program = fix_structure(program, *parse_fix_flag(text))
    _emit(render_program(program), args.output, stdout)
    return 0


def cli_entropy(args, config: Dict, stdout: TextIO) -> int:
    program = _load_program(args.file, args.facts)
    report = entropy_of_goal(program, args.goal, _solve_options(args, config))
    stdout.write(report.to_json(_digits(config)) + '\n')
    return 0


def cli_kl(args, config: Dict, stdout: TextIO) -> int:
    program = _load_program(args.file)
    p_weights = parse_facts_tsv(_read_text(args.p_facts))
    q_weights = parse_facts_tsv(_read_text(args.q_facts))
    report = kl_divergence(program, p_weights, q_weights, args.goal,
                           _solve_options(args, config), generalized=args.generalized,
                           parallel=bool(config.get('infometrics', {}).get('parallel_solves', True)))
    stdout.write(report.to_json(_digits(config)) + '\n')
    return 0


def cli_fixtures(args, config: Dict, stdout: TextIO) -> int:
    if args.list:
        for name in fixture_names():
            stdout.write(name + '\n')
        return 0
    if not args.name or not args.output:
        raise UsageError("fixtures needs NAME and -o DIR (or --list)")
    for path in materialize(args.name, args.output):
        stdout.write(path + '\n')
    return 0


# ============================================================
# PARSER
# ============================================================

def _add_solve_flags(parser: argparse.ArgumentParser):
    parser.add_argument('--tol', type=float, help='Convergence tolerance (iterate mode)')
    parser.add_argument('--max-iters', type=int, help='Maximum sweeps (iterate mode)')
    parser.add_argument('--mode', choices=['auto', 'priority', 'iterate'], help='Solver strategy')


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog='wlp', description='Weighted logic programming engine')
    parser.add_argument('--config', help='Config JSON (default: $WLP_CONFIG or wlp/config.json)')
    parser.add_argument('--log-level', help='DEBUG, INFO, WARNING or ERROR')
    parser.add_argument('--log-json', action='store_true', help='Structured JSON logs on stderr')
    subparsers = parser.add_subparsers(dest='command', parser_class=_ArgumentParser)

    check = subparsers.add_parser('check', help='Parse and validate a program')
    check.add_argument('file')
    check.add_argument('--facts', action='append', default=[], help='Fact table (TSV), repeatable')
    check.set_defaults(func=cli_check)

    solve_p = subparsers.add_parser('solve', help='Compute the chart of a program')
    solve_p.add_argument('file')
    solve_p.add_argument('--facts', action='append', default=[], help='Fact table (TSV), repeatable')
    solve_p.add_argument('--semiring', help='boolean, tropical, viterbi, real or entropy3')
    solve_p.add_argument('--query', help='Print only atoms matching this pattern')
    _add_solve_flags(solve_p)
    solve_p.set_defaults(func=cli_solve)

    proofs = subparsers.add_parser('proofs', help='Enumerate the proofs of a goal')
    proofs.add_argument('file')
    proofs.add_argument('--facts', action='append', default=[], help='Fact table (TSV), repeatable')
    proofs.add_argument('--goal', required=True)
    proofs.add_argument('--max-depth', type=int)
    proofs.add_argument('--max-count', type=int)
    proofs.add_argument('--semiring', help='Annotate proofs with their values')
    proofs.set_defaults(func=cli_proofs)

    product = subparsers.add_parser('product', help='PRODUCT of two programs')
    product.add_argument('left')
    product.add_argument('right')
    product.add_argument('--pair', action='append', default=[], help='p/1=q/1:name, repeatable')
    product.add_argument('--natural', action='store_true',
                         help='Rename both sides and pair every predicate both define')
    product.add_argument('--shared', action='append', default=[],
                         help='With --natural: predicate kept unrenamed on both sides')
    product.add_argument('--policy', choices=sorted(POLICY_NAMES), default='left')
    product.add_argument('--align', action='append', default=[],
                         help='Explicit alignment LIDxRID:i=j[,i=j], repeatable')
    product.add_argument('-o', '--output')
    product.set_defaults(func=cli_product)

    edit = subparsers.add_parser(
        'edit', help='Constrain, drop, collapse, generalize, fix',
        description='Edits run in a fixed order whatever the order of the flags: every '
                    '--constrain, then --drop-rule and --drop-mixed together, then --collapse, '
                    '--generalize and --fix. Rule ids refer to the input file.')
    edit.add_argument('file')
    edit.add_argument('--constrain', action='append', default=[], help='RULE:X=Y[,X=Y]')
    edit.add_argument('--drop-rule', action='append', default=[], type=int)
    edit.add_argument('--drop-mixed', action='store_true',
                      help='Drop product rules built from differently numbered factor rules')
    edit.add_argument('--collapse', action='append', default=[], help='pred/arity:i=j[,i=j]')
    edit.add_argument('--generalize', action='append', default=[])
    edit.add_argument('--fix', action='append', default=[], help='pred:witness:positions')
    edit.add_argument('-o', '--output')
    edit.set_defaults(func=cli_edit)

    entropy = subparsers.add_parser('entropy', help='Entropy of the proof distribution of a goal')
    entropy.add_argument('file')
    entropy.add_argument('--facts', action='append', default=[])
    entropy.add_argument('--goal', required=True)
    _add_solve_flags(entropy)
    entropy.set_defaults(func=cli_entropy)

    kl = subparsers.add_parser('kl', help='KL divergence between two weightings')
    kl.add_argument('file')
    kl.add_argument('--p-facts', required=True)
    kl.add_argument('--q-facts', required=True)
    kl.add_argument('--goal', required=True)
    kl.add_argument('--generalized', action='store_true')
    _add_solve_flags(kl)
    kl.set_defaults(func=cli_kl)

    fixtures = subparsers.add_parser('fixtures', help='Write a fixture as .wlp + .tsv')
    fixtures.add_argument('name', nargs='?')
    fixtures.add_argument('-o', '--output')
    fixtures.add_argument('--list', action='store_true')
    fixtures.set_defaults(func=cli_fixtures)

    return parser


# ============================================================
# MAIN ENTRY POINT
# ============================================================

def dispatch(argv: Optional[Sequence[str]] = None, stdout: TextIO = None,
             stderr: TextIO = None) -> int:
    """Run one invocation and return its exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise UsageError("missing subcommand (try --help)")
        config = load_config(args.config)
        log = config['logging']
        configure_logging(args.log_level or log.get('level', 'WARNING'),
                          args.log_json or log.get('json', False), log.get('file'))
        return args.func(args, config, stdout)
    except DivergenceError as e:
        stderr.write(f"error: {e}\n")
        stderr.write(f"residual: {e.residual} after {e.iterations} iterations\n")
        return e.exit_code
    except WlpError as e:
        stderr.write(f"error: {e}\n")
        return e.exit_code


def main() -> int:
    return dispatch(sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
