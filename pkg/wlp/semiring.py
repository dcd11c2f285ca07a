"""
Semirings - Pluggable Algebra
=============================
The five built-in semirings ⟨K, ⊕, ⊗, 0̄, 1̄⟩ used by the solver:
boolean, tropical, viterbi, real and the generalized entropy semiring
`entropy3` over triples.

Features:
- Abstract Semiring base with carrier checks and literal coercion
- Priority keys for the best-first agenda (monotone_superior semirings)
- Tolerance-aware comparison and distance for convergence tests
- Conventions 0·∞ = 0 and NaN -> NumericError

Author: WLP Engine
Version: 1.0.0
"""

import math
from abc import ABC, abstractmethod
from typing import Any, Dict, NamedTuple, Union

from .errors import CarrierError, NumericError, UsageError


class Triple(NamedTuple):
    """Value of the entropy semiring: weight, weighted log, second weight."""
    x: float
    y: float
    z: float


Value = Union[bool, float, Triple]

INF = math.inf


def _mul(a: float, b: float) -> float:
    # 0 * inf = 0, matching 0 log 0 = 0
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _gap(a: float, b: float) -> float:
    if math.isinf(a) or math.isinf(b):
        return 0.0 if a == b else INF
    return abs(a - b)


# ============================================================
# BASE CLASS
# ============================================================

class Semiring(ABC):
    """Stateless descriptor; every operation is pure."""

    id: str = ''
    carrier: str = ''
    idempotent_plus: bool = False
    monotone_superior: bool = False

    @property
    @abstractmethod
    def zero(self) -> Value:
        pass

    @property
    @abstractmethod
    def one(self) -> Value:
        pass

    @abstractmethod
    def plus(self, a: Value, b: Value) -> Value:
        pass

    @abstractmethod
    def times(self, a: Value, b: Value) -> Value:
        pass

    @abstractmethod
    def check(self, value: Any) -> bool:
        """True when `value` belongs to the carrier."""

    @abstractmethod
    def coerce(self, value: Any) -> Value:
        """Convert a parsed literal into the carrier, or raise CarrierError."""

    def approx_eq(self, a: Value, b: Value, tol: float = 0.0) -> bool:
        return self.distance(a, b) <= tol

    def distance(self, a: Value, b: Value) -> float:
        return _gap(float(a), float(b))

    def priority_key(self, value: Value) -> float:
        raise UsageError(f"Semiring {self.id} has no priority order")

    def is_zero(self, value: Value) -> bool:
        return value == self.zero

    def is_finite(self, value: Value) -> bool:
        return True

    def sum(self, values) -> Value:
        total = self.zero
        for v in values:
            total = self.plus(total, v)
        return total

    def product(self, values) -> Value:
        total = self.one
        for v in values:
            total = self.times(total, v)
        return total

    def __repr__(self) -> str:
        return f"<semiring {self.id}>"


# ============================================================
# INSTANCES
# ============================================================

class BooleanSemiring(Semiring):
    """⟨{T,F}, ∨, ∧, F, T⟩"""

    id = 'boolean'
    carrier = 'bool'
    idempotent_plus = True
    monotone_superior = True

    @property
    def zero(self) -> bool:
        return False

    @property
    def one(self) -> bool:
        return True

    def plus(self, a, b):
        return a or b

    def times(self, a, b):
        return a and b

    def check(self, value) -> bool:
        return isinstance(value, bool)

    def coerce(self, value) -> bool:
        if isinstance(value, bool):
            return value
        if _is_number(value):
            return value != 0
        raise CarrierError(f"boolean semiring cannot hold {value!r}")

    def distance(self, a, b) -> float:
        return 0.0 if a == b else 1.0

    def priority_key(self, value) -> float:
        return 0.0


class TropicalSemiring(Semiring):
    """⟨R≥0 ∪ {∞}, min, +, ∞, 0⟩ over nonnegative costs."""

    id = 'tropical'
    carrier = 'cost'
    idempotent_plus = True
    monotone_superior = True

    @property
    def zero(self) -> float:
        return INF

    @property
    def one(self) -> float:
        return 0.0

    def plus(self, a, b):
        return a if a <= b else b

    def times(self, a, b):
        return a + b

    def check(self, value) -> bool:
        return _is_number(value) and value >= 0

    def coerce(self, value) -> float:
        if isinstance(value, bool):
            return 0.0 if value else INF
        if _is_number(value):
            value = float(value)
            if math.isnan(value) or value < 0:
                raise CarrierError(f"tropical costs must be nonnegative, got {value}")
            return value
        raise CarrierError(f"tropical semiring cannot hold {value!r}")

    def priority_key(self, value) -> float:
        return value


class ViterbiSemiring(Semiring):
    """⟨[0,1], max, ×, 0, 1⟩"""

    id = 'viterbi'
    carrier = 'probability'
    idempotent_plus = True
    monotone_superior = True

    @property
    def zero(self) -> float:
        return 0.0

    @property
    def one(self) -> float:
        return 1.0

    def plus(self, a, b):
        return a if a >= b else b

    def times(self, a, b):
        return a * b

    def check(self, value) -> bool:
        return _is_number(value) and 0.0 <= value <= 1.0

    def coerce(self, value) -> float:
        if isinstance(value, bool):
            return 1.0 if value else 0.0
        if _is_number(value):
            value = float(value)
            if not 0.0 <= value <= 1.0:
                raise CarrierError(f"viterbi values must lie in [0,1], got {value}")
            return value
        raise CarrierError(f"viterbi semiring cannot hold {value!r}")

    def priority_key(self, value) -> float:
        return -value


class RealSemiring(Semiring):
    """⟨R≥0 ∪ {∞}, +, ×, 0, 1⟩ (path sums)."""

    id = 'real'
    carrier = 'nonnegative real'

    @property
    def zero(self) -> float:
        return 0.0

    @property
    def one(self) -> float:
        return 1.0

    def plus(self, a, b):
        return a + b

    def times(self, a, b):
        return _mul(a, b)

    def check(self, value) -> bool:
        return _is_number(value) and value >= 0

    def coerce(self, value) -> float:
        if isinstance(value, bool):
            return 1.0 if value else 0.0
        if _is_number(value):
            value = float(value)
            if math.isnan(value) or value < 0:
                raise CarrierError(f"real semiring weights must be nonnegative, got {value}")
            return value
        raise CarrierError(f"real semiring cannot hold {value!r}")

    def is_finite(self, value) -> bool:
        return math.isfinite(value)


class EntropySemiring(Semiring):
    """
    Generalized entropy semiring over (R ∪ {±∞})³.

    ⟨x1,y1,z1⟩ ⊕ ⟨x2,y2,z2⟩ = ⟨x1+x2, y1+y2, z1+z2⟩
    ⟨x1,y1,z1⟩ ⊗ ⟨x2,y2,z2⟩ = ⟨x1x2, x1y2 + x2y1, z1z2⟩
    """

    id = 'entropy3'
    carrier = 'triple'

    @property
    def zero(self) -> Triple:
        return Triple(0.0, 0.0, 0.0)

    @property
    def one(self) -> Triple:
        return Triple(1.0, 0.0, 1.0)

    @staticmethod
    def _checked(x: float, y: float, z: float) -> Triple:
        if math.isnan(x) or math.isnan(y) or math.isnan(z):
            raise NumericError("entropy semiring produced NaN (inf - inf)")
        return Triple(x, y, z)

    def plus(self, a, b):
        return self._checked(a[0] + b[0], a[1] + b[1], a[2] + b[2])

    def times(self, a, b):
        return self._checked(
            _mul(a[0], b[0]),
            _mul(a[0], b[1]) + _mul(b[0], a[1]),
            _mul(a[2], b[2]),
        )

    def check(self, value) -> bool:
        return isinstance(value, Triple)

    def coerce(self, value) -> Triple:
        if isinstance(value, bool):
            return self.one if value else self.zero
        if isinstance(value, (tuple, list)) and len(value) == 3 and all(_is_number(v) for v in value):
            return self._checked(*(float(v) for v in value))
        raise CarrierError(f"entropy3 values must be triples <x,y,z>, got {value!r}")

    def distance(self, a, b) -> float:
        return max(_gap(a[0], b[0]), _gap(a[1], b[1]), _gap(a[2], b[2]))

    def is_zero(self, value) -> bool:
        return value[0] == 0.0 and value[1] == 0.0 and value[2] == 0.0

    def is_finite(self, value) -> bool:
        return all(math.isfinite(c) for c in value)


# ============================================================
# REGISTRY
# ============================================================

BOOLEAN = BooleanSemiring()
TROPICAL = TropicalSemiring()
VITERBI = ViterbiSemiring()
REAL = RealSemiring()
ENTROPY = EntropySemiring()

SEMIRINGS: Dict[str, Semiring] = {
    sr.id: sr for sr in (BOOLEAN, TROPICAL, VITERBI, REAL, ENTROPY)
}


def get_semiring(name: Union[str, Semiring]) -> Semiring:
    """Look up a built-in semiring by id."""
    if isinstance(name, Semiring):
        return name
    try:
        return SEMIRINGS[name]
    except KeyError:
        known = ', '.join(SEMIRINGS)
        raise UsageError(f"Unknown semiring '{name}' (known: {known})") from None


def _require(sr: Semiring, *values: Value) -> None:
    for v in values:
        if not sr.check(v):
            raise CarrierError(f"{v!r} is not in the carrier of {sr.id}")


def plus(sr: Semiring, a: Value, b: Value) -> Value:
    """Checked ⊕."""
    _require(sr, a, b)
    return sr.plus(a, b)


def times(sr: Semiring, a: Value, b: Value) -> Value:
    """Checked ⊗."""
    _require(sr, a, b)
    return sr.times(a, b)


def approx_eq(sr: Semiring, a: Value, b: Value, tol: float = 0.0) -> bool:
    """Componentwise |a-b| <= tol; infinities equal only themselves."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    _require(sr, a, b)
    return sr.approx_eq(a, b, tol)
