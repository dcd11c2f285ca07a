"""
Infometrics - Entropy and KL Divergence of Proof Distributions
==============================================================
Lifts real-valued axioms into the entropy semiring so that one solve
yields, at the goal, the path sum together with a weighted-log channel.
From those triples we read off the Shannon entropy of the normalized
proof distribution, cross-entropies and KL divergences (natural logs).

Features:
- lift_entropy: w -> <w, -w ln w, 0>
- lift_kl: a -> <p(a), p(a) ln q(a), q(a)> (or the p ln(p/q) variant)
- kl_divergence / projection_kl with the two solves run concurrently
- conditional_probability: best proof over all proofs (viterbi / real)

Author: WLP Engine
Version: 1.0.0
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Union

from .errors import (GoalUnderivableError, MismatchedAxiomsError, NegativeWeightError,
                     ZeroMassError)
from .kernel import Atom, Axiom, Program, atom_is_ground
from .product import PairingSpec, product_transform
from .semiring import ENTROPY, REAL, VITERBI, Triple, Value
from .solver import Chart, SolveOptions, query, solve

logger = logging.getLogger(__name__)

Weights = Union[Mapping[Any, float], Iterable[Axiom]]


# ============================================================
# REPORTS
# ============================================================

class _Report:
    """to_dict/to_json shared by the report dataclasses."""

    def to_dict(self, digits: int = 12) -> Dict[str, Any]:
        from .textio import json_value
        return {k: (json_value(v, digits) if isinstance(v, float) else v)
                for k, v in asdict(self).items()}

    def to_json(self, digits: int = 12) -> str:
        return json.dumps(self.to_dict(digits), indent=2, allow_nan=False)


@dataclass(frozen=True)
class EntropyReport(_Report):
    w_prime: float
    h_prime: float
    entropy: float


@dataclass(frozen=True)
class KlReport(_Report):
    p_bar: float
    q_bar: float
    r_bar: float
    ce_pq: float
    ce_pp: float
    kl: float
    generalized_kl: Optional[float] = None


@dataclass(frozen=True)
class ConditionalReport(_Report):
    best: float
    total: float
    ratio: float


# ============================================================
# LIFTING
# ============================================================

def _weight(value: Any, atom: Atom) -> float:
    if isinstance(value, bool):
        return 1.0 if value else 0.0
    if not isinstance(value, (int, float)):
        raise NegativeWeightError(f"Axiom {atom} has non-numeric weight {value!r}")
    value = float(value)
    if math.isnan(value) or value < 0:
        raise NegativeWeightError(f"Axiom {atom} has negative weight {value}")
    return value


def _xlogx(w: float) -> float:
    return 0.0 if w == 0.0 else w * math.log(w)


def _p_log_q(p: float, q: float) -> float:
    if p == 0.0:
        return 0.0
    if q == 0.0:
        return -math.inf
    return p * math.log(q)


def _p_log_p_over_q(p: float, q: float) -> float:
    if p == 0.0:
        return 0.0
    if q == 0.0:
        return math.inf
    return p * math.log(p / q)


def _with_values(program: Program, axioms: List[Axiom]) -> Program:
    return replace(program, axioms=tuple(axioms), semiring=ENTROPY.id)


def lift_entropy(program: Program) -> Program:
    """Each axiom weight w becomes <w, -w ln w, 0> (0 ln 0 = 0)."""
    lifted = []
    for ax in program.axioms:
        w = _weight(ax.value, ax.atom)
        lifted.append(replace(ax, value=Triple(w, -_xlogx(w), 0.0)))
    return _with_values(program, lifted)


def _weight_map(weights: Weights) -> Dict[Atom, float]:
    if isinstance(weights, Mapping):
        items = weights.items()
    else:
        items = ((ax.atom, ax.value) for ax in weights)
    result: Dict[Atom, float] = {}
    for key, value in items:
        if isinstance(key, str):
            from .textio import parse_atom
            key = parse_atom(key)
        result[key] = _weight(value, key)
    return result


def _universe(program: Program, *maps: Dict[Atom, float]) -> List[Atom]:
    if program.axioms:
        universe = [ax.atom for ax in program.axioms]
    else:
        universe = sorted(set().union(*maps), key=str)
    known = set(universe)
    for weights in maps:
        extra = sorted((str(a) for a in weights if a not in known))
        if extra:
            raise MismatchedAxiomsError(
                f"Weights given for atoms that are not axioms of the program: {', '.join(extra)}")
    return universe


def lift_kl(program: Program, p_weights: Weights, q_weights: Weights,
            generalized: bool = False) -> Program:
    """
    Each axiom a gets <p(a), p(a) ln q(a), q(a)>; atoms missing from a
    weighting weigh 0. With generalized=True the middle channel is
    p(a) ln(p(a)/q(a)).
    """
    p, q = _weight_map(p_weights), _weight_map(q_weights)
    middle = _p_log_p_over_q if generalized else _p_log_q
    lifted = []
    spans = {ax.atom: ax.span for ax in program.axioms}
    for atom in _universe(program, p, q):
        pa, qa = p.get(atom, 0.0), q.get(atom, 0.0)
        lifted.append(Axiom(atom, Triple(pa, middle(pa, qa), qa), span=spans.get(atom)))
    return _with_values(program, lifted)


def lift_p_side(program: Program) -> Program:
    """<p(a), 0, 1>: the p factor of the product route."""
    lifted = [replace(ax, value=Triple(_weight(ax.value, ax.atom), 0.0, 1.0))
              for ax in program.axioms]
    return _with_values(program, lifted)


def lift_q_side(program: Program) -> Program:
    """<1, ln q(a), q(a)>: the q factor of the product route."""
    lifted = []
    for ax in program.axioms:
        q = _weight(ax.value, ax.atom)
        lifted.append(replace(ax, value=Triple(1.0, math.log(q) if q > 0 else -math.inf, q)))
    return _with_values(program, lifted)


# ============================================================
# GOAL VALUES
# ============================================================

def _as_atom(goal: Union[Atom, str]) -> Atom:
    if isinstance(goal, str):
        from .textio import parse_atom
        return parse_atom(goal)
    return goal


def goal_value(chart: Chart, goal: Union[Atom, str]) -> Value:
    """Chart value of a ground goal, or the sum over a pattern's matches."""
    goal = _as_atom(goal)
    if atom_is_ground(goal):
        if goal not in chart:
            raise GoalUnderivableError(f"Goal {goal} is not derivable")
        return chart.get(goal)
    matches = query(chart, goal)
    if not matches:
        raise GoalUnderivableError(f"No derivable atom matches {goal}")
    return chart.semiring.sum(value for _, value in matches)


def _run_all(jobs: List[Callable[[], Chart]], parallel: bool) -> List[Chart]:
    if parallel and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            futures = [pool.submit(job) for job in jobs]
            return [f.result() for f in futures]
    return [job() for job in jobs]


def _entropy_opts(opts: Optional[SolveOptions]) -> SolveOptions:
    opts = opts or SolveOptions()
    return replace(opts, mode='iterate') if opts.mode == 'priority' else opts


# ============================================================
# ENTROPY
# ============================================================

def entropy_of_goal(program: Program, goal: Union[Atom, str],
                    opts: Optional[SolveOptions] = None) -> EntropyReport:
    """
    Entropy (nats) of the normalized distribution over proofs of goal:
    h'/w' + ln w' from the goal triple <w', h', 0>.
    """
    chart = solve(lift_entropy(program), ENTROPY, _entropy_opts(opts))
    w, h, _ = goal_value(chart, goal)
    if w == 0.0:
        raise ZeroMassError(f"Goal {goal} has zero total weight")
    report = EntropyReport(w, h, h / w + math.log(w))
    logger.info(f"Entropy of {goal}: {report.entropy:.6g} nats")
    return report


# ============================================================
# KL DIVERGENCE
# ============================================================

def _assemble(p_bar: float, r_bar: float, q_bar: float, r_pp: float,
              generalized: Optional[float] = None) -> KlReport:
    if p_bar == 0.0:
        raise ZeroMassError("p assigns zero total weight to the goal")
    ce_pp = r_pp / p_bar - math.log(p_bar)
    if r_bar == -math.inf or q_bar == 0.0:
        ce_pq, kl = -math.inf, math.inf
    else:
        ce_pq = r_bar / p_bar - math.log(q_bar)
        kl = ce_pp - ce_pq
    return KlReport(p_bar, q_bar, r_bar, ce_pq, ce_pp, kl, generalized)


def kl_divergence(program: Program, p_weights: Weights, q_weights: Weights,
                  goal: Union[Atom, str], opts: Optional[SolveOptions] = None,
                  generalized: bool = False, parallel: bool = True) -> KlReport:
    """
    KL(p || q) between the normalized proof distributions of goal under
    two weightings of the same axioms.

    One solve gives <p_bar, R, q_bar> with R = sum p ln q; a second solve
    with q := p gives the sum p ln p needed for CE(p || p).
    """
    opts = _entropy_opts(opts)
    programs = [lift_kl(program, p_weights, q_weights), lift_kl(program, p_weights, p_weights)]
    if generalized:
        programs.append(lift_kl(program, p_weights, q_weights, generalized=True))
    charts = _run_all([(lambda prog=prog: solve(prog, ENTROPY, opts)) for prog in programs], parallel)

    p_bar, r_bar, q_bar = goal_value(charts[0], goal)
    _, r_pp, _ = goal_value(charts[1], goal)
    general = None
    if generalized:
        gp, gr, gq = goal_value(charts[2], goal)
        general = gr - gp + gq
    report = _assemble(p_bar, r_bar, q_bar, r_pp, general)
    logger.info(f"KL of {goal}: {report.kl:.6g}")
    return report


def _left_goal(goal: Atom, spec: PairingSpec) -> Atom:
    for pair in spec.pairs:
        if pair.name == goal.predicate:
            return Atom(pair.left.name, goal.args[:pair.left.arity])
    raise GoalUnderivableError(
        f"Goal {goal} is not a paired predicate; pass the p-side goal explicitly")


def projection_kl(p_program: Program, q_program: Program, spec: PairingSpec,
                  goal: Union[Atom, str], opts: Optional[SolveOptions] = None,
                  constrain: Optional[Callable[[Program], Program]] = None,
                  p_goal: Optional[Union[Atom, str]] = None,
                  parallel: bool = True) -> KlReport:
    """
    KL between two programs whose proofs correspond one to one through
    a (constrained) product.

    The p side is lifted to <p, 0, 1>, the q side to <1, ln q, q>; the
    product goal then carries <p_bar, sum p ln q, q_bar>. `constrain`
    applies the caller's edit passes to the raw product.
    """
    opts = _entropy_opts(opts)
    goal = _as_atom(goal)
    p_goal = _as_atom(p_goal) if p_goal is not None else _left_goal(goal, spec)

    joint = product_transform(lift_p_side(p_program), lift_q_side(q_program), spec)
    if constrain is not None:
        joint = constrain(joint)
    joint = replace(joint, semiring=ENTROPY.id)

    p_only = lift_kl(p_program, p_program.axioms, p_program.axioms)
    charts = _run_all([lambda: solve(joint, ENTROPY, opts),
                       lambda: solve(p_only, ENTROPY, opts)], parallel)

    p_bar, r_bar, q_bar = goal_value(charts[0], goal)
    _, r_pp, _ = goal_value(charts[1], p_goal)
    report = _assemble(p_bar, r_bar, q_bar, r_pp)
    logger.info(f"Projection KL of {goal}: {report.kl:.6g}")
    return report


# ============================================================
# CONDITIONAL PROBABILITY
# ============================================================

def conditional_probability(program: Program, goal: Union[Atom, str],
                            opts: Optional[SolveOptions] = None) -> ConditionalReport:
    """Probability of the best proof given the goal: viterbi / real."""
    opts = opts or SolveOptions()
    real_opts = replace(opts, mode='auto') if opts.mode == 'priority' else opts
    best = goal_value(solve(program, VITERBI, opts), goal)
    total = goal_value(solve(program, REAL, real_opts), goal)
    return ConditionalReport(best, total, best / total)
