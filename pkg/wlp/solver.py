"""
Solver - Bottom-Up Chart Computation
====================================
Computes the chart of a weighted logic program: every derivable ground
atom with the semiring sum, over all its proofs, of the product of the
axiom values involved.

Features:
- Semi-naive grounding into a hypergraph (per-argument fact indexes)
- Priority mode: best-first agenda, each atom settled once (idempotent,
  superior semirings; exact on cyclic programs)
- Iterate mode: Jacobi sweeps from zero until the largest change is
  within tolerance; divergence is reported, never truncated
- Guards are presence filters that contribute the semiring one

Author: WLP Engine
Version: 1.0.0
"""

import heapq
import logging
from collections import deque
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Set, Tuple, Union

from .errors import DivergenceError, SolveModeError, UsageError, ValidationError
from .kernel import (Atom, Program, Rule, Signature, Substitution, Term,
                     atom_is_ground, bind_conditions, desugar_arithmetic, is_ground,
                     match_atom, substitute, substitute_term, validate)
from .semiring import Semiring, Value, get_semiring

logger = logging.getLogger(__name__)

MODES = ('auto', 'priority', 'iterate')


# ============================================================
# OPTIONS AND RESULTS
# ============================================================

@dataclass(frozen=True)
class SolveOptions:
    tolerance: float = 1e-12
    max_iterations: int = 10000
    mode: str = 'auto'
    max_atoms: int = 1_000_000

    def __post_init__(self):
        if self.tolerance < 0:
            raise UsageError(f"tolerance must be >= 0, got {self.tolerance}")
        if self.max_iterations < 1:
            raise UsageError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.mode not in MODES:
            raise UsageError(f"Unknown solve mode '{self.mode}' (expected one of {', '.join(MODES)})")
        if self.max_atoms < 1:
            raise UsageError(f"max_atoms must be >= 1, got {self.max_atoms}")


@dataclass(frozen=True)
class Chart:
    """
    Ground atoms and their values. Underivable atoms (and atoms whose
    value came out as zero) are absent.
    """
    entries: Mapping[Atom, Value]
    semiring: Semiring
    iterations: int = 0
    residual: float = 0.0
    mode: str = 'priority'

    def get(self, atom: Atom) -> Value:
        return self.entries.get(atom, self.semiring.zero)

    def value_of(self, text: str) -> Value:
        """Value of the atom written as program text, e.g. `reachable(b)`."""
        from .textio import parse_atom
        return self.get(parse_atom(text))

    def __contains__(self, atom: Atom) -> bool:
        return atom in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def atoms(self) -> List[Atom]:
        return sorted(self.entries, key=str)

    def to_lines(self, digits: int = 12) -> str:
        from .textio import render_chart
        return render_chart(self, digits=digits)


@dataclass(frozen=True)
class Hyperedge:
    """One ground rule instance: head += tails[0] * ... if guards."""
    rule_id: int
    head: Atom
    tails: Tuple[Atom, ...]
    guards: Tuple[Atom, ...] = ()


# ============================================================
# GROUNDING
# ============================================================

class Grounder:
    """
    Semi-naive forward chaining over a desugared program.

    Atoms are processed in FIFO order starting from the axioms (sorted by
    text). When an atom is processed it is joined against every body or
    guard position its predicate can fill, with the remaining positions
    drawn from already-processed atoms. An instance is produced only at
    the first position holding the newest atom, so each ground rule
    instance appears once.
    """

    def __init__(self, program: Program, axioms: Optional[Mapping[Atom, Any]] = None,
                 max_atoms: int = 1_000_000):
        self.program = desugar_arithmetic(program)
        if axioms is None:
            axioms = {ax.atom: ax.value for ax in self.program.axioms}
        self.axioms: Dict[Atom, Any] = dict(axioms)
        self.max_atoms = max_atoms

        self.atoms: List[Atom] = []
        self.edges: List[Hyperedge] = []
        self.edges_by_head: Dict[Atom, List[Hyperedge]] = {}

        self._known: Set[Atom] = set()
        self._edge_keys: Set[Hyperedge] = set()
        self._by_sig: Dict[Signature, List[Atom]] = {}
        self._index: Dict[Tuple[Signature, int, Term], List[Atom]] = {}
        self._triggers: Dict[Signature, List[Tuple[int, Rule, int]]] = {}
        for rule_id, rule in enumerate(self.program.rules, 1):
            positions = list(rule.body) + list(rule.guards)
            for k, pattern in enumerate(positions):
                self._triggers.setdefault(pattern.signature, []).append((rule_id, rule, k))
        self._done = False

    # -- indexes --------------------------------------------------

    def _add_to_index(self, atom: Atom):
        sig = atom.signature
        self._by_sig.setdefault(sig, []).append(atom)
        for i, arg in enumerate(atom.args):
            self._index.setdefault((sig, i, arg), []).append(atom)

    def _candidates(self, pattern: Atom, subst: Substitution) -> Sequence[Atom]:
        sig = pattern.signature
        best: Optional[Sequence[Atom]] = None
        for i, arg in enumerate(pattern.args):
            if subst:
                arg = substitute_term(arg, subst)
            if is_ground(arg):
                bucket = self._index.get((sig, i, arg), ())
                if best is None or len(bucket) < len(best):
                    best = bucket
                    if not best:
                        break
        if best is None:
            best = self._by_sig.get(sig, ())
        return best

    # -- joining --------------------------------------------------

    def _join(self, positions: Sequence[Atom], k: int, trigger: Atom,
              subst: Substitution) -> Iterator[Tuple[Substitution, Tuple[Atom, ...]]]:
        n = len(positions)
        chosen: List[Optional[Atom]] = [None] * n
        chosen[k] = trigger
        order = [j for j in range(n) if j != k]

        def extend(step: int, current: Substitution):
            if step == len(order):
                yield current, tuple(chosen)
                return
            j = order[step]
            pattern = positions[j]
            for fact in self._candidates(pattern, current):
                if j < k and fact == trigger:
                    continue
                extended = match_atom(pattern, fact, current)
                if extended is None:
                    continue
                chosen[j] = fact
                yield from extend(step + 1, extended)
            chosen[j] = None

        yield from extend(0, subst)

    def _fire(self, trigger: Atom) -> List[Hyperedge]:
        produced = []
        for rule_id, rule, k in self._triggers.get(trigger.signature, ()):
            positions = list(rule.body) + list(rule.guards)
            start = match_atom(positions[k], trigger)
            if start is None:
                continue
            n_body = len(rule.body)
            for subst, ground in self._join(positions, k, trigger, start):
                final = bind_conditions(rule.conditions, subst)
                if final is None:
                    continue
                head = substitute(rule.head, final)
                if not atom_is_ground(head):
                    continue
                edge = Hyperedge(rule_id, head, ground[:n_body], ground[n_body:])
                if edge in self._edge_keys:
                    continue
                self._edge_keys.add(edge)
                produced.append(edge)
        return produced

    def run(self) -> 'Grounder':
        if self._done:
            return self
        agenda = deque(sorted(self.axioms, key=str))
        queued = set(agenda)
        while agenda:
            atom = agenda.popleft()
            self._known.add(atom)
            self.atoms.append(atom)
            self._add_to_index(atom)
            for edge in self._fire(atom):
                self.edges.append(edge)
                self.edges_by_head.setdefault(edge.head, []).append(edge)
                if edge.head not in queued:
                    queued.add(edge.head)
                    agenda.append(edge.head)
                    if len(queued) > self.max_atoms:
                        raise DivergenceError(
                            f"Chart exceeded max_atoms={self.max_atoms} ground atoms; "
                            f"the program derives unboundedly many terms",
                            iterations=len(self.atoms))
        self._done = True
        logger.debug(f"Grounded {len(self.atoms)} atoms, {len(self.edges)} rule instances")
        return self

    def derivable(self, atom: Atom) -> bool:
        return atom in self._known

    def matching(self, pattern: Atom) -> List[Atom]:
        """Derivable atoms matching `pattern`, sorted by text."""
        return sorted((a for a in self._by_sig.get(pattern.signature, ())
                       if match_atom(pattern, a) is not None), key=str)


# ============================================================
# SOLVER
# ============================================================

class Solver:
    """
    Evaluates one program in one semiring.

    The program is validated and its axioms coerced to the carrier on
    construction; zero-valued axioms are treated as absent.
    """

    def __init__(self, program: Program, sr: Union[Semiring, str, None] = None,
                 opts: Optional[SolveOptions] = None):
        if sr is None:
            if not program.semiring:
                raise UsageError("No semiring given and the program has no @semiring directive")
            sr = program.semiring
        self.sr = get_semiring(sr)
        self.opts = opts or SolveOptions()

        diagnostics = [d for d in validate(program) if d.severity == 'error']
        if diagnostics:
            raise ValidationError(diagnostics)

        axioms: Dict[Atom, Value] = {}
        for ax in program.axioms:
            value = self.sr.coerce(ax.value)
            if not self.sr.is_zero(value):
                axioms[ax.atom] = value
        self.axioms = axioms
        self.program = program
        self._grounder: Optional[Grounder] = None

    @property
    def grounder(self) -> Grounder:
        if self._grounder is None:
            self._grounder = Grounder(self.program, self.axioms, self.opts.max_atoms).run()
        return self._grounder

    def resolved_mode(self) -> str:
        mode = self.opts.mode
        if mode == 'auto':
            return 'priority' if self.sr.monotone_superior else 'iterate'
        if mode == 'priority' and not self.sr.monotone_superior:
            raise SolveModeError(
                f"Priority mode needs an idempotent, superior semiring; {self.sr.id} is not")
        return mode

    def solve(self) -> Chart:
        mode = self.resolved_mode()
        chart = self._solve_priority() if mode == 'priority' else self._solve_iterate()
        logger.info(
            f"Solved in {mode} mode: {len(chart)} atoms",
            extra={'semiring': self.sr.id, 'mode': mode, 'iterations': chart.iterations,
                   'residual': chart.residual, 'atoms': len(chart),
                   'rules': len(self.program.rules)})
        return chart

    # -- priority mode --------------------------------------------

    def _solve_priority(self) -> Chart:
        sr = self.sr
        g = self.grounder

        waiting: Dict[Atom, List[int]] = {}
        remaining: List[int] = []
        for index, edge in enumerate(g.edges):
            inputs = set(edge.tails) | set(edge.guards)
            remaining.append(len(inputs))
            for atom in inputs:
                waiting.setdefault(atom, []).append(index)

        tentative: Dict[Atom, Value] = dict(self.axioms)
        settled: Dict[Atom, Value] = {}
        heap = [(sr.priority_key(v), str(a), a) for a, v in tentative.items()]
        heapq.heapify(heap)

        while heap:
            _, _, atom = heapq.heappop(heap)
            if atom in settled:
                continue
            value = tentative[atom]
            settled[atom] = value
            for index in waiting.get(atom, ()):
                remaining[index] -= 1
                if remaining[index]:
                    continue
                edge = g.edges[index]
                if edge.head in settled:
                    continue
                product = sr.product(settled[t] for t in edge.tails)
                if sr.is_zero(product):
                    continue
                old = tentative.get(edge.head)
                new = product if old is None else sr.plus(old, product)
                if old is None or new != old:
                    tentative[edge.head] = new
                    heapq.heappush(heap, (sr.priority_key(new), str(edge.head), edge.head))

        return Chart(settled, sr, iterations=1, residual=0.0, mode='priority')

    # -- iterate mode ---------------------------------------------

    def iter_sweeps(self) -> Iterator[Chart]:
        """
        Jacobi sweeps from the all-zero chart; yields the chart after
        each sweep, forever. Only heads whose inputs changed are
        recomputed.
        """
        sr = self.sr
        g = self.grounder

        dependents: Dict[Atom, Set[Atom]] = {}
        for edge in g.edges:
            for atom in (*edge.tails, *edge.guards):
                dependents.setdefault(atom, set()).add(edge.head)

        finite_axioms = all(sr.is_finite(v) for v in self.axioms.values())
        values: Dict[Atom, Value] = {}
        dirty: Set[Atom] = set(g.atoms)
        sweep = 0

        while True:
            sweep += 1
            updates: Dict[Atom, Value] = {}
            for atom in dirty:
                total = self.axioms.get(atom, sr.zero)
                for edge in g.edges_by_head.get(atom, ()):
                    if any(guard not in values for guard in edge.guards):
                        continue
                    product = sr.one
                    for tail in edge.tails:
                        tv = values.get(tail)
                        if tv is None:
                            product = sr.zero
                            break
                        product = sr.times(product, tv)
                    total = sr.plus(total, product)
                updates[atom] = total

            residual = 0.0
            changed: Set[Atom] = set()
            for atom, new in updates.items():
                old = values.get(atom, sr.zero)
                if new == old:
                    continue
                gap = sr.distance(new, old)
                residual = max(residual, gap)
                changed.add(atom)
                if finite_axioms and sr.is_finite(old) and not sr.is_finite(new):
                    raise DivergenceError(
                        f"Value of {atom} overflowed to {new} after {sweep} sweeps; the sum diverges",
                        residual=float('inf'), iterations=sweep)
                if sr.is_zero(new):
                    values.pop(atom, None)
                else:
                    values[atom] = new

            dirty = set()
            for atom in changed:
                dirty.update(dependents.get(atom, ()))

            logger.debug(f"Sweep {sweep}: {len(changed)} atoms changed, residual {residual:.3g}")
            yield Chart(dict(values), sr, iterations=sweep, residual=residual, mode='iterate')

    def _solve_iterate(self) -> Chart:
        tol = self.opts.tolerance
        chart = None
        for chart in self.iter_sweeps():
            if chart.residual <= tol:
                return chart
            if chart.iterations >= self.opts.max_iterations:
                break
        raise DivergenceError(
            f"No convergence after {chart.iterations} sweeps (residual {chart.residual:.6g} > "
            f"tolerance {tol:g}); the semiring sum may diverge",
            residual=chart.residual, iterations=chart.iterations)


# ============================================================
# PUBLIC API
# ============================================================

def solve(program: Program, sr: Union[Semiring, str, None] = None,
          opts: Optional[SolveOptions] = None) -> Chart:
    """
    Compute the chart of `program` in semiring `sr`.

    Raises:
        ValidationError: program fails static checks
        CarrierError: an axiom value is outside the carrier
        SolveModeError: priority mode on a non-superior semiring
        DivergenceError: no convergence within max_iterations
    """
    return Solver(program, sr, opts).solve()


def query(chart: Chart, pattern: Atom) -> List[Tuple[Substitution, Value]]:
    """Chart entries matching `pattern`, sorted by atom text."""
    results = []
    for atom in chart.atoms():
        subst = match_atom(pattern, atom)
        if subst is not None:
            results.append((subst, chart.entries[atom]))
    return results
