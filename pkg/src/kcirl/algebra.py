"""Finite k-potent commutative integral residuated lattices as operation tables.

An algebra is stored as its join and fusion tables over elements 0..n-1 plus
the distinguished unit.  Order, meet, residual, bottom and the second-greatest
element are all derived from those two tables, so there is a single source of
truth; in a finite lattice the residual is forced anyway.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import KMismatch, LawViolation, MalformedTables, TrivialAlgebra

Table = tuple[tuple[int, ...], ...]


def freeze_table(rows: Sequence[Sequence[int]]) -> Table:
    return tuple(tuple(int(x) for x in row) for row in rows)


@dataclass(frozen=True)
class FiniteRL:
    """A finite residuated lattice, immutable and safe to share across threads."""

    size: int
    k: int
    join: Table
    mult: Table
    one: int
    name: str | None = field(default=None, compare=False)

    def le(self, a: int, b: int) -> bool:
        return self.join[a][b] == b

    def fuse(self, a: int, b: int) -> int:
        return self.mult[a][b]

    def meet(self, a: int, b: int) -> int:
        return self.meet_table[a][b]

    def imp(self, a: int, b: int) -> int:
        return self.imp_table[a][b]

    def power(self, a: int, m: int) -> int:
        acc = self.one
        for _ in range(m):
            acc = self.mult[acc][a]
        return acc

    @cached_property
    def leq(self) -> tuple[tuple[bool, ...], ...]:
        n = self.size
        return tuple(tuple(self.join[a][b] == b for b in range(n)) for a in range(n))

    @cached_property
    def meet_table(self) -> Table:
        n = self.size
        rows = []
        for a in range(n):
            row = []
            for b in range(n):
                lower = [c for c in range(n) if self.leq[c][a] and self.leq[c][b]]
                m = lower[0]
                for c in lower[1:]:
                    if self.leq[m][c]:
                        m = c
                row.append(m)
            rows.append(tuple(row))
        return tuple(rows)

    @cached_property
    def imp_table(self) -> Table:
        # a -> b is the join of {c | a.c <= b}; nonempty because bottom qualifies.
        n = self.size
        rows = []
        for a in range(n):
            row = []
            for b in range(n):
                r = self.bot
                for c in range(n):
                    if self.leq[self.mult[a][c]][b]:
                        r = self.join[r][c]
                row.append(r)
            rows.append(tuple(row))
        return tuple(rows)

    @cached_property
    def bot(self) -> int:
        for a in range(self.size):
            if all(self.leq[a][b] for b in range(self.size)):
                return a
        raise LawViolation("lattice-bottom", ())

    @cached_property
    def second_greatest(self) -> int | None:
        """The element s with {x != 1} = {x <= s}, or None if there is none."""
        below = [a for a in range(self.size) if a != self.one]
        if not below:
            return None
        s = below[0]
        for a in below[1:]:
            s = self.join[s][a]
        return s if s != self.one else None

    @cached_property
    def idempotents(self) -> tuple[int, ...]:
        return tuple(a for a in range(self.size) if self.mult[a][a] == a)

    def to_json(self, inclusion: Sequence[int] | None = None) -> dict:
        doc = {
            "size": self.size,
            "k": self.k,
            "one": self.one,
            "join": [list(r) for r in self.join],
            "mult": [list(r) for r in self.mult],
        }
        if self.name is not None:
            doc["name"] = self.name
        if inclusion is not None:
            doc["inclusion"] = list(inclusion)
        return doc

    @staticmethod
    def from_json(doc: dict) -> "FiniteRL":
        return validate(
            doc["join"], doc["mult"], k=doc["k"], one=doc["one"], name=doc.get("name")
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    def __repr__(self) -> str:
        tag = self.name or f"size{self.size}"
        return f"FiniteRL({tag}, k={self.k})"


def validate(
    join: Sequence[Sequence[int]],
    mult: Sequence[Sequence[int]],
    *,
    k: int,
    one: int,
    name: str | None = None,
) -> FiniteRL:
    """Check every defining law and return the validated algebra.

    Raises MalformedTables for shape problems and LawViolation naming the
    first broken law with a witnessing tuple.  The law-check order is fixed:
    join laws, lattice meets, monoid laws, distributivity, integrality,
    k-potency, residuation.
    """
    n = len(join)
    if n == 0:
        raise MalformedTables("empty join table")
    if not isinstance(k, int) or k < 1:
        raise MalformedTables(f"k must be a positive integer, got {k!r}")
    if not isinstance(one, int) or not 0 <= one < n:
        raise MalformedTables(f"unit {one!r} out of range for size {n}")
    for tbl, label in ((join, "join"), (mult, "mult")):
        if len(tbl) != n:
            raise MalformedTables(f"{label} table is not {n}x{n}")
        for row in tbl:
            if len(row) != n:
                raise MalformedTables(f"{label} table is ragged")
            for x in row:
                if not isinstance(x, int) or not 0 <= x < n:
                    raise MalformedTables(f"{label} entry {x!r} out of range")

    A = FiniteRL(size=n, k=k, join=freeze_table(join), mult=freeze_table(mult), one=one, name=name)
    j, m = A.join, A.mult

    for a in range(n):
        if j[a][a] != a:
            raise LawViolation("join-idempotent", (a,))
    for a in range(n):
        for b in range(a + 1, n):
            if j[a][b] != j[b][a]:
                raise LawViolation("join-commutative", (a, b))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if j[j[a][b]][c] != j[a][j[b][c]]:
                    raise LawViolation("join-associative", (a, b, c))

    # All binary meets must exist for <= to be a lattice order.
    leq = A.leq
    for a in range(n):
        for b in range(n):
            lower = [c for c in range(n) if leq[c][a] and leq[c][b]]
            maximal = [c for c in lower if all(not leq[c][d] or c == d for d in lower)]
            if len(maximal) != 1:
                raise LawViolation("meet-exists", (a, b))

    for a in range(n):
        for b in range(a + 1, n):
            if m[a][b] != m[b][a]:
                raise LawViolation("mult-commutative", (a, b))
    for a in range(n):
        if m[one][a] != a:
            raise LawViolation("unit-neutral", (a,))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if m[m[a][b]][c] != m[a][m[b][c]]:
                    raise LawViolation("mult-associative", (a, b, c))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if m[a][j[b][c]] != j[m[a][b]][m[a][c]]:
                    raise LawViolation("mult-distributes-over-join", (a, b, c))

    for a in range(n):
        if not leq[a][one]:
            raise LawViolation("integrality", (a,))
    for a in range(n):
        if A.power(a, k) != A.power(a, k + 1):
            raise LawViolation("k-potency", (a,))

    imp = A.imp_table
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if leq[m[a][c]][b] != leq[c][imp[a][b]]:
                    raise LawViolation("residuation", (a, b, c))
    return A


def is_subdirectly_irreducible(A: FiniteRL) -> bool:
    """True iff the algebra has a second-greatest element."""
    if A.size < 2:
        raise TrivialAlgebra("subdirect irreducibility is undefined for the trivial algebra")
    return A.second_greatest is not None


def is_well_connected(A: FiniteRL) -> bool:
    one = A.one
    others = [a for a in range(A.size) if a != one]
    return all(A.join[x][y] != one for x in others for y in others)


@dataclass(frozen=True)
class DeductiveFilter:
    """An up-set containing the unit and closed under fusion."""

    parent: FiniteRL
    members: frozenset[int]
    minimum: int


def filter_generated(A: FiniteRL, gens: Iterable[int]) -> DeductiveFilter:
    """The deductive filter generated by ``gens``: the up-set of prod(g^k)."""
    d = A.one
    for g in sorted(set(gens)):
        d = A.mult[d][A.power(g, A.k)]
    members = frozenset(x for x in range(A.size) if A.leq[d][x])
    return DeductiveFilter(parent=A, members=members, minimum=d)


def all_deductive_filters(A: FiniteRL) -> list[DeductiveFilter]:
    """Every deductive filter, one per idempotent element, ordered by minimum."""
    return [filter_generated(A, {d}) for d in A.idempotents]


def quotient(A: FiniteRL, F: DeductiveFilter) -> tuple[FiniteRL, tuple[int, ...]]:
    """Quotient by the congruence a ~ b iff d.a = d.b, with its surjection.

    Class representatives are the elements d.a themselves (fixed points of
    multiplication by d), reindexed densely in increasing order.
    """
    d = F.minimum
    reps = sorted({A.mult[d][a] for a in range(A.size)})
    index = {r: i for i, r in enumerate(reps)}
    surjection = tuple(index[A.mult[d][a]] for a in range(A.size))
    n = len(reps)
    join = [[index[A.mult[d][A.join[reps[x]][reps[y]]]] for y in range(n)] for x in range(n)]
    mult = [[index[A.mult[d][A.mult[reps[x]][reps[y]]]] for y in range(n)] for x in range(n)]
    Q = validate(join, mult, k=A.k, one=index[d])
    return Q, surjection


def all_si_quotients(A: FiniteRL) -> list[tuple[FiniteRL, tuple[int, ...]]]:
    """All subdirectly irreducible quotients of A, each with its surjection."""
    out = []
    for F in all_deductive_filters(A):
        Q, f = quotient(A, F)
        if Q.size >= 2 and is_subdirectly_irreducible(Q):
            out.append((Q, f))
    return out


def prepend_bottom(A: FiniteRL) -> FiniteRL:
    """Adjoin a new absorbing bottom element (at index size) below everything."""
    n = A.size
    join = [list(row) + [i] for i, row in enumerate(A.join)]
    join.append(list(range(n)) + [n])
    mult = [list(row) + [n] for row in A.mult]
    mult.append([n] * (n + 1))
    return validate(join, mult, k=A.k, one=A.one)


def _element_invariants(size: int, tables: Sequence[Table], anchors: Sequence[int]):
    """Isomorphism-invariant colour per element, with one refinement round."""
    base = []
    for a in range(size):
        down = sum(1 for b in range(size) if tables[0][a][b] == a)
        up = sum(1 for b in range(size) if tables[0][a][b] == b)
        idem = tuple(t[a][a] == a for t in tables)
        base.append((a in anchors, down, up, idem))
    refined = []
    for a in range(size):
        rows = tuple(tuple(sorted(base[t[a][b]] for b in range(size))) for t in tables)
        refined.append((base[a], rows))
    return refined


def minimal_relabeling(size: int, tables: Sequence[Table], anchors: Sequence[int]) -> bytes:
    """Lexicographically least byte encoding of the tables over all relabelings.

    Candidate permutations are restricted to those preserving element
    invariants; the restriction keeps the result isomorphism-invariant
    because invariants are themselves preserved by isomorphisms.
    """
    inv = _element_invariants(size, tables, anchors)
    blocks: dict = {}
    for a in range(size):
        blocks.setdefault(inv[a], []).append(a)
    ordered_blocks = [blocks[key] for key in sorted(blocks, key=repr)]
    best: bytes | None = None
    for choice in itertools.product(*(itertools.permutations(b) for b in ordered_blocks)):
        old_by_new = [a for blk in choice for a in blk]
        new_by_old = [0] * size
        for new, old in enumerate(old_by_new):
            new_by_old[old] = new
        enc = bytearray([size])
        enc.extend(new_by_old[a] for a in anchors)
        for t in tables:
            for x in old_by_new:
                enc.extend(new_by_old[t[x][y]] for y in old_by_new)
        enc = bytes(enc)
        if best is None or enc < best:
            best = enc
    assert best is not None
    return best


def canonical_form(A: FiniteRL) -> bytes:
    """Byte string equal for isomorphic algebras and distinct otherwise."""
    return bytes([A.k]) + minimal_relabeling(A.size, (A.join, A.mult), (A.one,))


def is_isomorphic(A: FiniteRL, B: FiniteRL) -> bool:
    if A.k != B.k:
        raise KMismatch(f"k={A.k} vs k={B.k}")
    if A.size != B.size:
        return False
    return canonical_form(A) == canonical_form(B)
