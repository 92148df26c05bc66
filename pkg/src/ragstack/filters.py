"""Metadata filter predicates: conjunctions of typed scalar comparisons.

Filtering restricts the candidate set *before* similarity scoring, so a
selective predicate shrinks what has to be searched instead of trimming an
already-computed top-k.

Typing rule: ints and floats compare as one numeric family; strings compare
with strings; booleans only with booleans. A clause whose value family differs
from the record's metadata value never matches, and neither does a clause
whose key is absent. Ordering operators apply to numbers and strings only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import RagError
from .ingest import Scalar

OPS = ("==", "!=", "<", "<=", ">", ">=", "in")
_ORDERING_OPS = ("<", "<=", ">", ">=")


class InvalidFilterError(RagError):
    """Filter clause is structurally invalid (unknown op, non-scalar value, ...)."""


def _family(value: object) -> str | None:
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, str):
        return "string"
    return None


@dataclass(frozen=True)
class Clause:
    key: str
    op: str
    value: object  # scalar; list/tuple of same-family scalars for "in"

    def __post_init__(self):
        if not self.key:
            raise InvalidFilterError("clause key must be nonempty")
        if self.op not in OPS:
            raise InvalidFilterError(f"unknown operator {self.op!r}")
        if self.op == "in":
            if not isinstance(self.value, (list, tuple)) or not self.value:
                raise InvalidFilterError("'in' requires a nonempty list of scalars")
            families = {_family(v) for v in self.value}
            if None in families or len(families) != 1:
                raise InvalidFilterError("'in' values must be scalars of one type")
            object.__setattr__(self, "value", tuple(self.value))
        else:
            fam = _family(self.value)
            if fam is None:
                raise InvalidFilterError(f"clause value for {self.key!r} must be a scalar")
            if self.op in _ORDERING_OPS and fam == "bool":
                raise InvalidFilterError("ordering operators do not apply to booleans")

    def matches(self, metadata: Mapping[str, Scalar]) -> bool:
        if self.key not in metadata:
            return False
        actual = metadata[self.key]
        fam = _family(actual)
        if self.op == "in":
            return fam == _family(self.value[0]) and actual in self.value
        if fam != _family(self.value):
            return False
        if self.op == "==":
            return actual == self.value
        if self.op == "!=":
            return actual != self.value
        if fam == "bool":
            return False
        if self.op == "<":
            return actual < self.value
        if self.op == "<=":
            return actual <= self.value
        if self.op == ">":
            return actual > self.value
        return actual >= self.value


@dataclass(frozen=True)
class FilterPredicate:
    """Conjunction of clauses; a record matches when every clause matches."""

    clauses: tuple[Clause, ...]

    def matches(self, metadata: Mapping[str, Scalar]) -> bool:
        return all(clause.matches(metadata) for clause in self.clauses)

    @classmethod
    def of(cls, *clauses: Clause) -> "FilterPredicate":
        return cls(clauses=tuple(clauses))

    @classmethod
    def equals(cls, **kv: Scalar) -> "FilterPredicate":
        """Equality-only shorthand: FilterPredicate.equals(year=2020)."""
        return cls(clauses=tuple(Clause(k, "==", v) for k, v in kv.items()))

    @classmethod
    def from_obj(cls, obj) -> "FilterPredicate | None":
        """Parse the wire form: a list of {key, op, value} objects, or a
        {key: value} mapping meaning equality on every pair. None stays None."""
        if obj is None:
            return None
        if isinstance(obj, FilterPredicate):
            return obj
        if isinstance(obj, Mapping):
            return cls(clauses=tuple(Clause(str(k), "==", v) for k, v in obj.items()))
        if isinstance(obj, Sequence) and not isinstance(obj, (str, bytes)):
            clauses = []
            for item in obj:
                if not isinstance(item, Mapping) or not {"key", "op", "value"} <= set(item):
                    raise InvalidFilterError(
                        "filter clauses must be {key, op, value} objects"
                    )
                clauses.append(Clause(str(item["key"]), str(item["op"]), item["value"]))
            return cls(clauses=tuple(clauses))
        raise InvalidFilterError(f"cannot interpret {type(obj).__name__} as a filter")

    def to_obj(self) -> list[dict]:
        return [
            {"key": c.key, "op": c.op, "value": list(c.value) if c.op == "in" else c.value}
            for c in self.clauses
        ]
