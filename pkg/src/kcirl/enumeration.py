"""Exhaustive generation of finite lattices and k-potent residuated lattices
up to isomorphism, with persistent JSON-Lines catalogs."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator, Sequence

from .algebra import FiniteRL, Table, canonical_form, freeze_table, is_subdirectly_irreducible, minimal_relabeling, validate
from .errors import MalformedTables
from .parallel import pmap


def _join_table_from_downsets(down: Sequence[frozenset[int]]) -> Table:
    n = len(down)
    rows = []
    for a in range(n):
        row = []
        for b in range(n):
            uppers = [c for c in range(n) if a in down[c] and b in down[c]]
            least = next(c for c in uppers if all(c in down[u] for u in uppers))
            row.append(least)
        rows.append(tuple(row))
    return tuple(rows)


def _antichains(down: list[frozenset[int]]) -> Iterator[tuple[int, ...]]:
    """All nonempty antichains of the poset given by principal down-sets."""
    n = len(down)

    def extend(start: int, chosen: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        for x in range(start, n):
            if any(x in down[c] or c in down[x] for c in chosen):
                continue
            picked = chosen + (x,)
            yield picked
            yield from extend(x + 1, picked)

    yield from extend(0, ())


def _lattice_downset_dfs(n: int) -> Iterator[list[frozenset[int]]]:
    """Grow posets one maximal element at a time, keeping all binary meets.

    Element indices form a linear extension with 0 the bottom; a prefix is
    emitted whenever its last element lies above everything (a top), at which
    point the poset is a lattice.
    """

    def extend(down: list[frozenset[int]]) -> Iterator[list[frozenset[int]]]:
        i = len(down)
        if down[-1] == frozenset(range(i)):
            yield down
        if i == n:
            return
        for maximals in _antichains(down):
            strict = frozenset().union(*(down[m] for m in maximals))
            if 0 not in strict:
                continue
            # every older element must keep a greatest lower bound with i
            ok = True
            for x in range(i):
                common = strict & down[x]
                if not any(common <= down[m] for m in common):
                    ok = False
                    break
            if ok:
                yield from extend(down + [strict | {i}])

    yield from extend([frozenset({0})])


def lattice_canonical_form(join: Table) -> bytes:
    return minimal_relabeling(len(join), (join,), ())


def check_lattice(join: Sequence[Sequence[int]]) -> Table:
    """Validate a join table as a lattice (top included) and relabel it so
    element indices form a linear extension: 0 the bottom, n-1 the top."""
    tbl = freeze_table(join)
    n = len(tbl)
    if any(len(row) != n for row in tbl) or any(
        not 0 <= x < n for row in tbl for x in row
    ):
        raise MalformedTables("join table is ragged or out of range")
    for a in range(n):
        if tbl[a][a] != a:
            raise MalformedTables(f"join not idempotent at {a}")
        for b in range(n):
            if tbl[a][b] != tbl[b][a]:
                raise MalformedTables(f"join not commutative at ({a}, {b})")
            for c in range(n):
                if tbl[tbl[a][b]][c] != tbl[a][tbl[b][c]]:
                    raise MalformedTables(f"join not associative at ({a}, {b}, {c})")
    leq = [[tbl[a][b] == b for b in range(n)] for a in range(n)]
    if not any(all(leq[a][b] for a in range(n)) for b in range(n)):
        raise MalformedTables("join table has no top element")
    for a in range(n):
        for b in range(n):
            lower = [c for c in range(n) if leq[c][a] and leq[c][b]]
            if sum(1 for c in lower if all(not leq[c][d] or c == d for d in lower)) != 1:
                raise MalformedTables(f"meet missing for ({a}, {b})")
    order = sorted(range(n), key=lambda a: (sum(leq[b][a] for b in range(n)), a))
    new_of_old = {old: new for new, old in enumerate(order)}
    return tuple(
        tuple(new_of_old[tbl[order[x]][order[y]]] for y in range(n)) for x in range(n)
    )


def enumerate_lattices(n: int) -> list[Table]:
    """All lattices on at most n elements up to isomorphism, as join tables.

    Deterministic: results are grouped by size and sorted by canonical form.
    """
    if n < 1:
        raise MalformedTables("n must be >= 1")
    by_size: dict[int, dict[bytes, Table]] = {m: {} for m in range(1, n + 1)}
    for down in _lattice_downset_dfs(n):
        join = _join_table_from_downsets(down)
        by_size[len(down)].setdefault(lattice_canonical_form(join), join)
    out: list[Table] = []
    for m in range(1, n + 1):
        out.extend(tbl for _, tbl in sorted(by_size[m].items()))
    return out


def _fusion_search(join: Table, k: int) -> list[FiniteRL]:
    """Backtrack over fusion tables on a fixed lattice; emit valid algebras.

    Cells are filled row by row in increasing element order with the diagonal
    last in each row, so that power chains and monotonicity constraints close
    over already-filled cells as early as possible.  Incremental checks prune;
    a full validate() on each complete table is the correctness backstop.
    """
    n = len(join)
    leq = [[join[a][b] == b for b in range(n)] for a in range(n)]
    meet = [[0] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            lower = [c for c in range(n) if leq[c][a] and leq[c][b]]
            meet[a][b] = next(c for c in lower if all(leq[d][c] for d in lower))
    top = n - 1
    if n == 1:
        return [validate([[0]], [[0]], k=k, one=0)]

    t: list[list[int | None]] = [[None] * n for _ in range(n)]
    for x in range(n):
        t[top][x] = t[x][top] = x
        t[0][x] = t[x][0] = 0
    join_pairs: dict[int, list[tuple[int, int]]] = {v: [] for v in range(n)}
    for b in range(n):
        for c in range(b + 1, n):
            join_pairs[join[b][c]].append((b, c))

    cells = []
    for i in range(1, n - 1):
        for j in range(1, i):
            cells.append((i, j))
        cells.append((i, i))

    def rotations_ok(a: int, b: int, c: int) -> bool:
        vals = []
        for x, y, z in ((a, b, c), (a, c, b), (b, c, a)):
            inner = t[x][y]
            if inner is None:
                continue
            outer = t[inner][z]
            if outer is None:
                continue
            vals.append(outer)
        return len(set(vals)) <= 1

    def distrib_ok(a: int, b: int, c: int) -> bool:
        lhs = t[a][join[b][c]]
        ab, ac = t[a][b], t[a][c]
        if lhs is None or ab is None or ac is None:
            return True
        return lhs == join[ab][ac]

    def powers_ok() -> bool:
        for a in range(n):
            x = a
            for _ in range(k - 1):
                nxt = t[x][a]
                if nxt is None:
                    break
                x = nxt
            else:
                xk = x
                nxt = t[xk][a]
                if nxt is not None and nxt != xk:
                    return False
        return True

    def consistent_after(i: int, j: int) -> bool:
        for c in range(n):
            if not rotations_ok(i, j, c):
                return False
        for a in range(n):
            for b in range(a, n):
                v = t[a][b]
                if v == i:
                    if not rotations_ok(a, b, j):
                        return False
                elif v == j:
                    if not rotations_ok(a, b, i):
                        return False
        for a, other in ((i, j), (j, i)):
            for b, c in join_pairs[other]:
                if not distrib_ok(a, b, c):
                    return False
            for c in range(n):
                if not distrib_ok(a, other, c):
                    return False
                if not distrib_ok(c, a, other):
                    return False
        return powers_ok()

    found: list[FiniteRL] = []

    def fill(pos: int) -> None:
        if pos == len(cells):
            mult = [[int(x) for x in row] for row in t]  # type: ignore[misc]
            try:
                found.append(validate(join, mult, k=k, one=top))
            except Exception:
                pass
            return
        i, j = cells[pos]
        m = meet[i][j]
        for c in range(n):
            if not leq[c][m]:
                continue
            t[i][j] = t[j][i] = c
            if consistent_after(i, j):
                fill(pos + 1)
        t[i][j] = t[j][i] = None

    fill(0)
    return found


@dataclass(frozen=True, eq=False)
class Catalog:
    """A deterministic, isomorphism-free listing of algebras."""

    k: int
    max_size: int
    filter: str
    entries: tuple[FiniteRL, ...]
    counts_per_size: dict[int, int]
    sha256: str

    @property
    def count(self) -> int:
        return len(self.entries)

    def header(self) -> dict:
        return {
            "k": self.k,
            "max_size": self.max_size,
            "filter": self.filter,
            "count": self.count,
            "counts_per_size": {str(s): c for s, c in sorted(self.counts_per_size.items())},
            "sha256": self.sha256,
        }

    def save(self, path: str | Path) -> None:
        lines = [json.dumps(self.header())]
        lines.extend(json.dumps(a.to_json()) for a in self.entries)
        Path(path).write_text("\n".join(lines) + "\n")

    @staticmethod
    def load(path: str | Path) -> "Catalog":
        lines = Path(path).read_text().splitlines()
        header = json.loads(lines[0])
        entries = tuple(FiniteRL.from_json(json.loads(line)) for line in lines[1:] if line)
        return Catalog(
            k=header["k"],
            max_size=header["max_size"],
            filter=header["filter"],
            entries=entries,
            counts_per_size={int(s): c for s, c in header["counts_per_size"].items()},
            sha256=header["sha256"],
        )


FilterSpec = str | tuple[str, Table]


def is_linear(A: FiniteRL) -> bool:
    return all(A.leq[a][b] or A.leq[b][a] for a in range(A.size) for b in range(A.size))


def _entry_passes(A: FiniteRL, spec: FilterSpec) -> bool:
    if spec == "all":
        return True
    if spec == "si":
        return A.size >= 2 and is_subdirectly_irreducible(A)
    if spec == "linear":
        return is_linear(A)
    if isinstance(spec, tuple) and spec[0] == "lattice_reduct":
        target = freeze_table(spec[1])
        if A.size != len(target):
            return False
        return lattice_canonical_form(A.join) == lattice_canonical_form(target)
    raise MalformedTables(f"unknown filter {spec!r}")


def _filter_name(spec: FilterSpec) -> str:
    return spec if isinstance(spec, str) else "lattice_reduct"


def enumerate_kcirl(k: int, n: int, spec: FilterSpec = "all", threads: int = 1) -> Catalog:
    """All k-potent algebras of size <= n up to isomorphism, filtered.

    Fixes each lattice first, then backtracks over fusion tables; duplicate
    algebras on the same lattice are rejected by canonical form.  Output is
    sorted by (size, canonical form) so runs are reproducible byte for byte.
    """
    if k < 1:
        raise MalformedTables("k must be >= 1")
    if n < 1:
        raise MalformedTables("n must be >= 1")
    if isinstance(spec, tuple) and spec[0] == "lattice_reduct":
        # only one lattice can contribute entries; skip the full generation
        target = check_lattice(spec[1])
        lattices = [target] if len(target) <= n else []
    else:
        lattices = enumerate_lattices(n)

    def per_lattice(join: Table) -> list[tuple[bytes, FiniteRL]]:
        algebras = _fusion_search(join, k)
        dedup: dict[bytes, FiniteRL] = {}
        for a in algebras:
            dedup.setdefault(canonical_form(a), a)
        return sorted(dedup.items())

    entries: list[tuple[bytes, FiniteRL]] = []
    for group in pmap(per_lattice, lattices, threads):
        entries.extend(group)
    entries.sort(key=lambda pair: (pair[1].size, pair[0]))
    kept = tuple(a for _, a in entries if _entry_passes(a, spec))
    counts: dict[int, int] = {}
    for a in kept:
        counts[a.size] = counts.get(a.size, 0) + 1
    digest = hashlib.sha256()
    digest.update(f"k={k};max={n};filter={_filter_name(spec)}".encode())
    for form, a in entries:
        if _entry_passes(a, spec):
            digest.update(form)
    return Catalog(
        k=k,
        max_size=n,
        filter=_filter_name(spec),
        entries=kept,
        counts_per_size=counts,
        sha256=digest.hexdigest(),
    )


def diamond_chain_lattice(depth: int) -> Table:
    """Join table of the lattice with a chain of ``depth`` elements below a
    four-element diamond below a separate top; size is depth + 5."""
    if depth < 0:
        raise MalformedTables("depth must be >= 0")
    i = depth
    down: list[frozenset[int]] = []
    for x in range(i + 1):
        down.append(frozenset(range(x + 1)))  # chain, then the diamond bottom
    base = frozenset(range(i + 1))
    down.append(base | {i + 1})
    down.append(base | {i + 2})
    down.append(base | {i + 1, i + 2, i + 3})
    down.append(base | {i + 1, i + 2, i + 3, i + 4})
    return _join_table_from_downsets(down)


def diamond_chain_algebra(k: int, depth: int) -> FiniteRL:
    """A canonical k-potent algebra on the diamond-chain lattice: fusion = meet."""
    join = diamond_chain_lattice(depth)
    n = len(join)
    leq = [[join[a][b] == b for b in range(n)] for a in range(n)]
    meet = [
        [next(c for c in range(n) if leq[c][a] and leq[c][b] and all(leq[d][c] for d in range(n) if leq[d][a] and leq[d][b])) for b in range(n)]
        for a in range(n)
    ]
    return validate(join, meet, k=k, one=n - 1)
