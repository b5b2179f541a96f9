"""
Branch predicates
-----------------
Boolean expressions over named record bits, evaluated for a whole batch of
shots at once.  Every predicate is a plain dataclass so trees can be
serialised and shipped to worker processes.

Pattern convention: for labels (l0, l1, ..., lk) the pattern integer is
Σ bit(li) << i, i.e. the first label is the least significant bit.
"""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

MAX_PATTERN_BITS = 16


class RecordView:
    """Named access to the record columns of the shots present at a node."""

    def __init__(self, rec: np.ndarray, columns: Mapping[str, int]):
        self.rec     = rec
        self.columns = columns

    @property
    def n_rows(self) -> int:
        return int(self.rec.shape[0])

    def bit(self, label: str) -> np.ndarray:
        try:
            return self.rec[:, self.columns[label]]
        except KeyError:
            raise ValueError(f"❌ Record label '{label}' is not measured on this path") from None

    def bits(self, labels: Iterable[str]) -> np.ndarray:
        labels = list(labels)
        if not labels:
            return np.zeros((self.n_rows, 0), dtype=bool)
        return np.stack([self.bit(label) for label in labels], axis=1)

    def pattern(self, labels: Iterable[str]) -> np.ndarray:
        bits    = self.bits(labels).astype(np.int64)
        weights = np.left_shift(1, np.arange(bits.shape[1], dtype=np.int64))
        return bits @ weights

    @classmethod
    def zeros(cls, columns: Mapping[str, int]) -> "RecordView":
        """Single all-zero record: the branch taken by every trivial shot."""
        width = max(columns.values(), default=-1) + 1
        return cls(np.zeros((1, width), dtype=bool), columns)


class Predicate(ABC):
    """
    Base class; subclasses implement ``evaluate`` and provide ``labels`` as a
    field or a property.  ``labels`` must stay a bare annotation here:
    dataclass subclasses take any class-level value as their field default.
    """

    labels: tuple[str, ...]

    @abstractmethod
    def evaluate(self, view: RecordView) -> np.ndarray:
        ...

    def __invert__(self) -> "Predicate":
        return Not(self)

    def __and__(self, other: "Predicate") -> "Predicate":
        return All((self, other))

    def __or__(self, other: "Predicate") -> "Predicate":
        return Any_((self, other))


@dataclass(frozen=True)
class Const(Predicate):
    value: bool = True

    @property
    def labels(self) -> tuple[str, ...]:
        return ()

    def evaluate(self, view: RecordView) -> np.ndarray:
        return np.full(view.n_rows, bool(self.value))


@dataclass(frozen=True)
class Bit(Predicate):
    label: str

    @property
    def labels(self) -> tuple[str, ...]:
        return (self.label,)

    def evaluate(self, view: RecordView) -> np.ndarray:
        return view.bit(self.label).copy()


@dataclass(frozen=True)
class Parity(Predicate):
    """XOR of ``labels`` equals ``value``; Parity((a, b), 1) is the disagreement of a and b."""

    labels: tuple[str, ...]
    value:  int = 1

    def evaluate(self, view: RecordView) -> np.ndarray:
        parity = np.logical_xor.reduce(view.bits(self.labels), axis=1) if self.labels else np.zeros(view.n_rows, bool)
        return parity if self.value else ~parity


@dataclass(frozen=True)
class AnyOf(Predicate):
    """At least one of ``labels`` raised (flag triggered)."""

    labels: tuple[str, ...]

    def evaluate(self, view: RecordView) -> np.ndarray:
        return view.bits(self.labels).any(axis=1)


@dataclass(frozen=True)
class Differ(Predicate):
    """Bit strings ``left`` and ``right`` differ in at least one position."""

    left:  tuple[str, ...]
    right: tuple[str, ...]

    def __post_init__(self):
        if len(self.left) != len(self.right):
            raise ValueError(f"❌ Differ compares equal-length label lists, got {self.left} / {self.right}")

    @property
    def labels(self) -> tuple[str, ...]:
        return self.left + self.right

    def evaluate(self, view: RecordView) -> np.ndarray:
        return (view.bits(self.left) ^ view.bits(self.right)).any(axis=1)


@dataclass(frozen=True)
class PatternIn(Predicate):
    """The pattern of ``labels`` belongs to an enumerated set."""

    labels:   tuple[str, ...]
    patterns: frozenset[int]

    def __post_init__(self):
        if len(self.labels) > MAX_PATTERN_BITS:
            raise ValueError(f"❌ PatternIn over {len(self.labels)} bits exceeds {MAX_PATTERN_BITS}")
        object.__setattr__(self, "patterns", frozenset(int(p) for p in self.patterns))

    @classmethod
    def from_function(cls, labels: Iterable[str], rule: Callable[[tuple[int, ...]], bool]) -> "PatternIn":
        """Tabulate ``rule(bits)`` over every pattern (bits in label order)."""
        labels = tuple(labels)
        chosen = {
            sum(b << i for i, b in enumerate(bits))
            for bits in itertools.product((0, 1), repeat=len(labels))
            if rule(bits)
        }
        return cls(labels, frozenset(chosen))

    def evaluate(self, view: RecordView) -> np.ndarray:
        if not self.patterns:
            return np.zeros(view.n_rows, dtype=bool)
        return np.isin(view.pattern(self.labels), np.fromiter(self.patterns, dtype=np.int64))


@dataclass(frozen=True)
class Not(Predicate):
    inner: Predicate

    @property
    def labels(self) -> tuple[str, ...]:
        return self.inner.labels

    def evaluate(self, view: RecordView) -> np.ndarray:
        return ~self.inner.evaluate(view)


@dataclass(frozen=True)
class All(Predicate):
    parts: tuple[Predicate, ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(label for part in self.parts for label in part.labels))

    def evaluate(self, view: RecordView) -> np.ndarray:
        result = np.ones(view.n_rows, dtype=bool)
        for part in self.parts:
            result &= part.evaluate(view)
        return result


@dataclass(frozen=True)
class Any_(Predicate):
    parts: tuple[Predicate, ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(label for part in self.parts for label in part.labels))

    def evaluate(self, view: RecordView) -> np.ndarray:
        result = np.zeros(view.n_rows, dtype=bool)
        for part in self.parts:
            result |= part.evaluate(view)
        return result


ALWAYS = Const(True)
NEVER  = Const(False)


def none_of(*predicates: Predicate) -> Predicate:
    """Complement of the union: the 'nothing triggered' edge."""
    return Not(Any_(tuple(predicates)))


@dataclass(frozen=True)
class Xor(Predicate):
    """Odd number of ``parts`` hold (stored-value flip rules)."""

    parts: tuple[Predicate, ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(label for part in self.parts for label in part.labels))

    def evaluate(self, view: RecordView) -> np.ndarray:
        result = np.zeros(view.n_rows, dtype=bool)
        for part in self.parts:
            result ^= part.evaluate(view)
        return result
