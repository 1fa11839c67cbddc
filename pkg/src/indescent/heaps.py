"""Symbolic heaps and concrete heap models."""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping

from .terms import Lit, Substitution, Var, apply, term_key

LOC = "Loc"


class PointsTo:
    """The atom ``src ↦ (dst₁, …, dst_k)``."""

    __slots__ = ("src", "dsts", "_hash")

    def __init__(self, src: Var, dsts: Iterable[Var]) -> None:
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dsts", tuple(dsts))
        object.__setattr__(self, "_hash", hash(("pto", src, self.dsts)))

    def __setattr__(self, key, value):
        raise AttributeError("PointsTo is immutable")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PointsTo) and self.src == other.src and self.dsts == other.dsts

    def __hash__(self) -> int:
        return self._hash

    def key(self) -> tuple:
        return (term_key(self.src), tuple(term_key(d) for d in self.dsts))

    def subst(self, theta: Substitution) -> "PointsTo":
        return PointsTo(apply(theta, self.src), tuple(apply(theta, d) for d in self.dsts))

    def vars(self) -> frozenset[Var]:
        return frozenset((self.src, *self.dsts))

    def __repr__(self) -> str:
        return f"PointsTo({self.src!r}, {self.dsts!r})"

    def __str__(self) -> str:
        inner = ",".join(str(d) for d in self.dsts)
        if len(self.dsts) != 1:
            inner = f"({inner})"
        return f"{self.src}↦{inner}"

    def __reduce__(self):
        return (PointsTo, (self.src, self.dsts))


class SymbolicHeap:
    """Pure part (literals over location variables) plus points-to cells.

    ``has_true`` marks a trailing ``∗ true`` which lets the heap hold any
    further cells; it only arises from the ``true`` keyword.
    """

    __slots__ = ("pure", "cells", "has_true", "_hash", "_vars")

    def __init__(
        self,
        pure: Iterable[Lit] = (),
        cells: Iterable[PointsTo] = (),
        has_true: bool = False,
    ) -> None:
        object.__setattr__(self, "pure", tuple(sorted(set(pure), key=Lit.key)))
        object.__setattr__(self, "cells", tuple(sorted(cells, key=PointsTo.key)))
        object.__setattr__(self, "has_true", bool(has_true))
        object.__setattr__(self, "_hash", hash((self.pure, self.cells, self.has_true)))
        object.__setattr__(self, "_vars", None)

    def __setattr__(self, key, value):
        raise AttributeError("SymbolicHeap is immutable")

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, SymbolicHeap)
            and self.pure == other.pure
            and self.cells == other.cells
            and self.has_true == other.has_true
        )

    def __hash__(self) -> int:
        return self._hash

    @property
    def lits(self) -> tuple[Lit, ...]:
        return self.pure

    def vars(self) -> frozenset[Var]:
        if self._vars is None:
            vs: set[Var] = set()
            for l in self.pure:
                vs |= l.vars()
            for c in self.cells:
                vs |= c.vars()
            object.__setattr__(self, "_vars", frozenset(vs))
        return self._vars

    def subst(self, theta: Substitution) -> "SymbolicHeap":
        if not theta:
            return self
        return SymbolicHeap(
            (l.subst(theta) for l in self.pure),
            (c.subst(theta) for c in self.cells),
            self.has_true,
        )

    def conj(self, other: "SymbolicHeap") -> "SymbolicHeap":
        """Separating conjunction of two symbolic heaps."""
        return SymbolicHeap(
            self.pure + other.pure, self.cells + other.cells, self.has_true or other.has_true
        )

    def is_emp(self) -> bool:
        return not self.cells and not self.has_true

    def is_top(self) -> bool:
        return not self.pure and not self.cells and not self.has_true

    def key(self) -> tuple:
        return (
            tuple(l.key() for l in self.pure),
            tuple(c.key() for c in self.cells),
            self.has_true,
        )

    def __repr__(self) -> str:
        return f"SymbolicHeap({list(self.pure)!r}, {list(self.cells)!r}, {self.has_true})"

    def __str__(self) -> str:
        parts = [str(c) for c in self.cells]
        if self.has_true:
            parts.append("true")
        spatial = " ∗ ".join(parts) if parts else "emp"
        if self.pure:
            return " ∧ ".join(str(l) for l in self.pure) + " ∧ " + spatial
        return spatial

    def __reduce__(self):
        return (SymbolicHeap, (self.pure, self.cells, self.has_true))


EMP = SymbolicHeap()


class Heap(Mapping[int, tuple]):
    """Finite partial map from locations (ints) to k-tuples of locations."""

    __slots__ = ("_cells", "_hash")

    def __init__(self, cells: Mapping[int, tuple] | Iterable[tuple[int, tuple]] = ()) -> None:
        items = dict(cells.items() if isinstance(cells, Mapping) else cells)
        object.__setattr__(self, "_cells", dict(sorted(items.items())))
        object.__setattr__(self, "_hash", hash(tuple(self._cells.items())))

    def __setattr__(self, key, value):
        raise AttributeError("Heap is immutable")

    def __getitem__(self, loc: int) -> tuple:
        return self._cells[loc]

    def __iter__(self) -> Iterator[int]:
        return iter(self._cells)

    def __len__(self) -> int:
        return len(self._cells)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Heap):
            return self._cells == other._cells
        return NotImplemented

    def dom(self) -> frozenset[int]:
        return frozenset(self._cells)

    def img(self) -> frozenset[int]:
        return frozenset(l for t in self._cells.values() for l in t)

    def locations(self) -> frozenset[int]:
        return self.dom() | self.img()

    def disjoint(self, other: "Heap") -> bool:
        return not (self.dom() & other.dom())

    def union(self, other: "Heap") -> "Heap":
        if not self.disjoint(other):
            raise ValueError("heaps overlap")
        return Heap({**self._cells, **other._cells})

    def rename(self, m: Mapping[int, int]) -> "Heap":
        return Heap({m.get(l, l): tuple(m.get(x, x) for x in t) for l, t in self._cells.items()})

    def __repr__(self) -> str:
        return f"Heap({self._cells!r})"

    def __str__(self) -> str:
        if not self._cells:
            return "{}"
        return "{" + ", ".join(f"{l}↦{t}" for l, t in self._cells.items()) + "}"

    def __reduce__(self):
        return (Heap, (tuple(self._cells.items()),))
