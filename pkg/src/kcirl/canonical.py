"""Canonical formulas: synthesis, partial-embedding search, refutation
characterizations and embedding lifting.

A canonical formula for a finite subdirectly irreducible algebra A encodes
the fusion/join/unit structure of A completely, and the residual and meet
only on designated pairs.  It is refuted exactly by the algebras into whose
subdirectly irreducible quotients A embeds compatibly with those pairs.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterator, Sequence

from .algebra import (
    FiniteRL,
    all_si_quotients,
    filter_generated,
    is_subdirectly_irreducible,
    quotient,
)
from .enumeration import Catalog, enumerate_kcirl
from .errors import KMismatch, NotSI, PreconditionViolation, TrivialAlgebra
from .formula import (
    BOT,
    TOP,
    Formula,
    Fuse,
    Impl,
    Join,
    Meet,
    Valuation,
    Var,
    evaluate,
    fuse_power,
    iff,
    join_all,
    meet_all,
    sub_values,
    variables,
)

Pair = tuple[int, int]


@dataclass(frozen=True)
class DSpec:
    """The two designated-pair sets parameterizing a canonical formula."""

    dwedge: frozenset[Pair]
    dto: frozenset[Pair]

    @staticmethod
    def empty() -> "DSpec":
        return DSpec(frozenset(), frozenset())

    @staticmethod
    def full(size: int) -> "DSpec":
        pairs = frozenset((a, b) for a in range(size) for b in range(size))
        return DSpec(pairs, pairs)

    @staticmethod
    def of(dwedge, dto) -> "DSpec":
        return DSpec(frozenset((int(a), int(b)) for a, b in dwedge),
                     frozenset((int(a), int(b)) for a, b in dto))

    def mode(self, size: int) -> str:
        if not self.dwedge and not self.dto:
            return "stable"
        if self == DSpec.full(size):
            return "splitting"
        return "general"


@dataclass(frozen=True)
class CanonicalFormula:
    algebra: FiniteRL
    dspec: DSpec
    gamma: Formula
    mode: str
    anchored: bool = False

    def to_json(self) -> dict:
        doc = {
            "algebra": self.algebra.to_json(),
            "dwedge": [list(p) for p in sorted(self.dspec.dwedge)],
            "dto": [list(p) for p in sorted(self.dspec.dto)],
            "gamma": str(self.gamma),
        }
        if self.anchored:
            doc["anchored"] = True
        return doc

    @staticmethod
    def from_json(doc: dict) -> "CanonicalFormula":
        A = FiniteRL.from_json(doc["algebra"])
        dspec = DSpec.of(doc["dwedge"], doc["dto"])
        return build_canonical(A, dspec, anchor_bottom=doc.get("anchored", False))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def element_variable(a: int) -> Var:
    return Var(f"X{a}")


def build_canonical(
    A: FiniteRL, dspec: DSpec | None = None, anchor_bottom: bool = False
) -> CanonicalFormula:
    """Synthesize the formula (structure encoding)^k -> (order discriminator).

    Conjuncts appear in a fixed order: constant conjuncts, fusion pairs
    lexicographically, join pairs, designated residual pairs, then designated
    meet pairs; the discriminator joins X_a -> X_b over all pairs with a not
    below b.  The result is a canonical text artifact.

    By default the encoding pins down exactly the fusion/join/unit structure:
    there is no conjunct tying X_bot to the bottom constant, so refuting
    assignments may land the image of the bottom anywhere.  This matches
    plain fusion/join/unit embeddings, which need not preserve the least
    element, and it is the mode every stable/splitting-style result uses.
    With anchor_bottom=True the conjunct (X_bot <-> 0) is added; that is the
    pointed variant, paired with bottom-preserving embeddings, and it is what
    associated systems of formulas mentioning the constant 0 require.
    """
    if A.size < 2:
        raise TrivialAlgebra("canonical formulas need a nontrivial algebra")
    if not is_subdirectly_irreducible(A):
        raise NotSI("canonical formulas need a subdirectly irreducible algebra")
    if dspec is None:
        dspec = DSpec.empty()
    X = [element_variable(a) for a in range(A.size)]
    conjuncts: list[Formula] = []
    if anchor_bottom:
        conjuncts.append(iff(X[A.bot], BOT))
    conjuncts.append(iff(X[A.one], TOP))
    pairs = [(a, b) for a in range(A.size) for b in range(A.size)]
    for a, b in pairs:
        conjuncts.append(iff(X[A.mult[a][b]], Fuse(X[a], X[b])))
    for a, b in pairs:
        conjuncts.append(iff(X[A.join[a][b]], Join(X[a], X[b])))
    for a, b in sorted(dspec.dto):
        conjuncts.append(iff(X[A.imp_table[a][b]], Impl(X[a], X[b])))
    for a, b in sorted(dspec.dwedge):
        conjuncts.append(iff(X[A.meet_table[a][b]], Meet(X[a], X[b])))
    encoding = meet_all(conjuncts)
    discriminator = join_all(
        [Impl(X[a], X[b]) for a, b in pairs if not A.leq[a][b]]
    )
    gamma = Impl(fuse_power(encoding, A.k), discriminator)
    return CanonicalFormula(
        algebra=A, dspec=dspec, gamma=gamma, mode=dspec.mode(A.size), anchored=anchor_bottom
    )


def _structure_constraints(cf: CanonicalFormula):
    """The conjunct list of the encoding, as table-level checks, in the same
    deterministic order as the synthesized formula."""
    A = cf.algebra
    pairs = [(a, b) for a in range(A.size) for b in range(A.size)]
    cons: list[tuple[str, int, int, int]] = []
    if cf.anchored:
        cons.append(("const_bot", A.bot, 0, 0))
    cons.append(("const_one", A.one, 0, 0))
    for a, b in pairs:
        cons.append(("mult", a, b, A.mult[a][b]))
    for a, b in pairs:
        cons.append(("join", a, b, A.join[a][b]))
    for a, b in sorted(cf.dspec.dto):
        cons.append(("imp", a, b, A.imp_table[a][b]))
    for a, b in sorted(cf.dspec.dwedge):
        cons.append(("meet", a, b, A.meet_table[a][b]))
    return cons


def gamma_counterexample(B: FiniteRL, cf: CanonicalFormula) -> Valuation | None:
    """First valuation refuting the canonical formula in B, or None.

    Semantically identical to holds(B, cf.gamma) but searched through the
    tables with sound pruning: extending a partial assignment only shrinks
    the encoding value and only grows the discriminator value, so a branch
    whose k-th encoding power already sits below the discriminator cannot
    refute and is dropped.  Complete assignments are visited in lexicographic
    order over (X_0, ..., X_{n-1}), so the returned witness is the least one.
    Distinct variables sharing a value force a discriminator disjunct to the
    unit, which is what keeps the search feasible for formulas larger than
    the target algebra.
    """
    A = cf.algebra
    if A.k != B.k:
        raise KMismatch(f"k={A.k} vs k={B.k}")
    n = A.size
    m = B.size
    mult, join, meet, imp, leq = B.mult, B.join, B.meet_table, B.imp_table, B.leq
    one, bot = B.one, B.bot
    k = B.k
    cons_by_depth: list[list[tuple[str, int, int, int]]] = [[] for _ in range(n)]
    for kind, a, b, target in _structure_constraints(cf):
        depth = a if kind.startswith("const") else max(a, b, target)
        cons_by_depth[depth].append((kind, a, b, target))
    delta_by_depth: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for a in range(n):
        for b in range(n):
            if not A.leq[a][b]:
                delta_by_depth[max(a, b)].append((a, b))

    def biimp(x: int, y: int) -> int:
        return meet[imp[x][y]][imp[y][x]]

    mu = [0] * n

    def search(depth: int, g: int, delta: int) -> tuple[int, ...] | None:
        if depth == n:
            return tuple(mu)
        for v in range(m):
            mu[depth] = v
            g2 = g
            for kind, a, b, target in cons_by_depth[depth]:
                if kind == "const_bot":
                    val = biimp(mu[a], bot)
                elif kind == "const_one":
                    val = biimp(mu[a], one)
                elif kind == "mult":
                    val = biimp(mu[target], mult[mu[a]][mu[b]])
                elif kind == "join":
                    val = biimp(mu[target], join[mu[a]][mu[b]])
                elif kind == "imp":
                    val = biimp(mu[target], imp[mu[a]][mu[b]])
                else:
                    val = biimp(mu[target], meet[mu[a]][mu[b]])
                g2 = meet[g2][val]
            d2 = delta
            for a, b in delta_by_depth[depth]:
                d2 = join[d2][imp[mu[a]][mu[b]]]
            gk = g2
            for _ in range(k - 1):
                gk = mult[gk][g2]
            if not leq[gk][d2]:
                found = search(depth + 1, g2, d2)
                if found is not None:
                    return found
        return None

    witness = search(0, one, bot)
    if witness is None:
        return None
    return Valuation(B, {f"X{a}": witness[a] for a in range(n)})


def models_gamma(B: FiniteRL, cf: CanonicalFormula) -> bool:
    return gamma_counterexample(B, cf) is None


def iter_d_embeddings(
    A: FiniteRL, B: FiniteRL, dspec: DSpec | None = None, anchor_bottom: bool = False
) -> Iterator[tuple[int, ...]]:
    """All injective maps preserving fusion, join, the unit, and the residual
    and meet on the designated pairs, in lexicographic order.  With
    anchor_bottom=True the least element must map to the least element."""
    if A.k != B.k:
        raise KMismatch(f"k={A.k} vs k={B.k}")
    if dspec is None:
        dspec = DSpec.empty()
    n, m = A.size, B.size
    if n > m:
        return
    dto = sorted(dspec.dto)
    dwedge = sorted(dspec.dwedge)
    h = [-1] * n
    used = [False] * m

    def consistent(a: int) -> bool:
        va = h[a]
        for b in range(n):
            w = h[b]
            if w < 0:
                continue
            if A.leq[a][b] != B.leq[va][w] or A.leq[b][a] != B.leq[w][va]:
                return False
            jt = h[A.join[a][b]]
            if jt >= 0 and B.join[va][w] != jt:
                return False
            mt = h[A.mult[a][b]]
            if mt >= 0 and B.mult[va][w] != mt:
                return False
        for x, y in dto:
            hx, hy, ht = h[x], h[y], h[A.imp_table[x][y]]
            if hx >= 0 and hy >= 0 and ht >= 0 and B.imp_table[hx][hy] != ht:
                return False
        for x, y in dwedge:
            hx, hy, ht = h[x], h[y], h[A.meet_table[x][y]]
            if hx >= 0 and hy >= 0 and ht >= 0 and B.meet_table[hx][hy] != ht:
                return False
        return True

    def extend(a: int) -> Iterator[tuple[int, ...]]:
        if a == n:
            yield tuple(h)
            return
        if a == A.one:
            candidates = [B.one]
        elif anchor_bottom and a == A.bot:
            candidates = [B.bot]
        else:
            candidates = [v for v in range(m) if v != B.one]
        for v in candidates:
            if used[v]:
                continue
            h[a] = v
            used[v] = True
            if consistent(a):
                yield from extend(a + 1)
            used[v] = False
            h[a] = -1

    yield from extend(0)


def find_d_embedding(
    A: FiniteRL, B: FiniteRL, dspec: DSpec | None = None, anchor_bottom: bool = False
) -> tuple[int, ...] | None:
    """Lexicographically least designated-pair embedding, or None."""
    return next(iter_d_embeddings(A, B, dspec, anchor_bottom), None)


def is_d_embedding(
    A: FiniteRL,
    B: FiniteRL,
    h: Sequence[int],
    dspec: DSpec | None = None,
    anchor_bottom: bool = False,
) -> bool:
    if dspec is None:
        dspec = DSpec.empty()
    if len(set(h)) != A.size or h[A.one] != B.one:
        return False
    if anchor_bottom and h[A.bot] != B.bot:
        return False
    for a in range(A.size):
        for b in range(A.size):
            if h[A.join[a][b]] != B.join[h[a]][h[b]]:
                return False
            if h[A.mult[a][b]] != B.mult[h[a]][h[b]]:
                return False
    for a, b in dspec.dto:
        if h[A.imp_table[a][b]] != B.imp_table[h[a]][h[b]]:
            return False
    for a, b in dspec.dwedge:
        if h[A.meet_table[a][b]] != B.meet_table[h[a]][h[b]]:
            return False
    return True


def refutes_1(C: FiniteRL, cf: CanonicalFormula) -> Valuation | None:
    """Witness valuation sending the whole encoding to the unit while the
    discriminator stays below the second-greatest element, or None.

    The first witness in lexicographic order over (X_0, ..., X_{n-1}) is
    returned.  Forcing the encoding to the unit is the same as requiring the
    assignment to reproduce the fusion/join tables and designated pairs
    exactly, which is how each candidate is tested.
    """
    A = cf.algebra
    if A.k != C.k:
        raise KMismatch(f"k={A.k} vs k={C.k}")
    if C.size < 2 or not is_subdirectly_irreducible(C):
        raise NotSI("the target of a pinned refutation must be subdirectly irreducible")
    n = A.size
    cons_by_depth: list[list[tuple[str, int, int, int]]] = [[] for _ in range(n)]
    for kind, a, b, target in _structure_constraints(cf):
        depth = a if kind.startswith("const") else max(a, b, target)
        cons_by_depth[depth].append((kind, a, b, target))
    # discriminator below the second-greatest element: no disjunct hits 1
    delta_by_depth: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for a in range(n):
        for b in range(n):
            if not A.leq[a][b]:
                delta_by_depth[max(a, b)].append((a, b))
    mu = [0] * n

    def search(depth: int) -> tuple[int, ...] | None:
        if depth == n:
            return tuple(mu)
        for v in range(C.size):
            mu[depth] = v
            ok = True
            for kind, a, b, target in cons_by_depth[depth]:
                if kind == "const_bot":
                    ok = mu[a] == C.bot
                elif kind == "const_one":
                    ok = mu[a] == C.one
                elif kind == "mult":
                    ok = mu[target] == C.mult[mu[a]][mu[b]]
                elif kind == "join":
                    ok = mu[target] == C.join[mu[a]][mu[b]]
                elif kind == "imp":
                    ok = mu[target] == C.imp_table[mu[a]][mu[b]]
                else:
                    ok = mu[target] == C.meet_table[mu[a]][mu[b]]
                if not ok:
                    break
            if ok:
                ok = all(not C.leq[mu[a]][mu[b]] for a, b in delta_by_depth[depth])
            if ok:
                found = search(depth + 1)
                if found is not None:
                    return found
        return None

    witness = search(0)
    if witness is None:
        return None
    return Valuation(C, {f"X{a}": witness[a] for a in range(n)})


def associated_system(
    phi: Formula, k: int, size_bound: int, catalog: Catalog | None = None
) -> list[tuple[FiniteRL, DSpec]]:
    """All (algebra, designated pairs) induced by refuting valuations on the
    subdirectly irreducible algebras up to the size bound, deduplicated."""
    if catalog is None:
        catalog = enumerate_kcirl(k, size_bound, "si")
    names = sorted(variables(phi))
    out: list[tuple[FiniteRL, DSpec]] = []
    seen: set[tuple[int, DSpec]] = set()
    for idx, A in enumerate(catalog.entries):
        for tup in itertools.product(range(A.size), repeat=len(names)):
            v = Valuation(A, dict(zip(names, tup)))
            if evaluate(phi, v) == A.one:
                continue
            vals = sorted(sub_values(phi, v))
            dspec = DSpec(
                dwedge=frozenset(
                    (a, b) for a in vals for b in vals if A.meet_table[a][b] in vals
                ),
                dto=frozenset(
                    (a, b) for a in vals for b in vals if A.imp_table[a][b] in vals
                ),
            )
            key = (idx, dspec)
            if key not in seen:
                seen.add(key)
                out.append((A, dspec))
    return out


@dataclass(frozen=True)
class Certificate:
    """Witness that an algebra refutes a canonical formula: a subdirectly
    irreducible quotient together with a designated-pair embedding into it."""

    kernel: frozenset[int]
    quotient: FiniteRL
    surjection: tuple[int, ...]
    embedding: tuple[int, ...]
    witness: Valuation

    def to_json(self) -> dict:
        return {
            "status": "refuted",
            "kernel": sorted(self.kernel),
            "quotient": self.quotient.to_json(),
            "surjection": list(self.surjection),
            "embedding": list(self.embedding),
            "witness": {x: e for x, e in sorted(self.witness.assignment.items())},
        }


def refutation_certificate(B: FiniteRL, cf: CanonicalFormula) -> Certificate | None:
    """Certificate extraction following the refutation characterization.

    If B refutes the formula, the refuting valuation generates a filter; the
    quotient by it pins the encoding at the unit, and some subdirectly
    irreducible quotient refining it keeps the discriminator away from the
    unit.  The assignment there is the wanted embedding.  Returns None when
    B models the formula.
    """
    A = cf.algebra
    if A.k != B.k:
        raise KMismatch(f"k={A.k} vs k={B.k}")
    mu = gamma_counterexample(B, cf)
    if mu is None:
        return None
    g = evaluate(cf.gamma.left, mu)  # value of the k-th power of the encoding
    delta = evaluate(cf.gamma.right, mu)
    F = filter_generated(B, {g})
    B1, q1 = quotient(B, F)
    delta1 = q1[delta]
    for C, q2 in all_si_quotients(B1):
        if q2[delta1] == C.one:
            continue
        h = tuple(q2[q1[mu.assignment[f"X{a}"]]] for a in range(A.size))
        if not is_d_embedding(A, C, h, cf.dspec, cf.anchored):
            raise AssertionError("certificate reconstruction produced a non-embedding")
        surjection = tuple(q2[q1[b]] for b in range(B.size))
        kernel = frozenset(b for b in range(B.size) if surjection[b] == C.one)
        return Certificate(
            kernel=kernel, quotient=C, surjection=surjection, embedding=h, witness=mu
        )
    raise AssertionError("no subdirectly irreducible quotient keeps the discriminator refuted")


def lift_embedding(
    A: FiniteRL,
    B: FiniteRL,
    C: FiniteRL,
    f: Sequence[int],
    h: Sequence[int],
) -> tuple[int, ...]:
    """Lift an embedding through a quotient: g with f(g(x)) = h(x).

    f must be a surjective homomorphism B -> C and h a fusion/join/unit
    embedding A -> C with A subdirectly irreducible.  The lift sends the
    unit to the unit and every other element to the representative of its
    class inside d.B, d being the minimum of the kernel filter.
    """
    if not (A.k == B.k == C.k):
        raise KMismatch(f"k={A.k}, {B.k}, {C.k} must agree")
    if A.size < 2:
        raise PreconditionViolation("A must be nontrivial")
    if not is_subdirectly_irreducible(A):
        raise PreconditionViolation("A must be subdirectly irreducible")
    if len(f) != B.size or len(h) != A.size:
        raise PreconditionViolation("map lengths must match the algebra sizes")
    if set(f) != set(range(C.size)):
        raise PreconditionViolation("f must be surjective onto C")
    if f[B.one] != C.one:
        raise PreconditionViolation("f must preserve the unit")
    for x in range(B.size):
        for y in range(B.size):
            if f[B.join[x][y]] != C.join[f[x]][f[y]] or f[B.mult[x][y]] != C.mult[f[x]][f[y]]:
                raise PreconditionViolation(f"f is not a homomorphism at ({x}, {y})")
    if not is_d_embedding(A, C, h, DSpec.empty()):
        raise PreconditionViolation("h is not a fusion/join/unit embedding")

    kernel = [b for b in range(B.size) if f[b] == C.one]
    d = kernel[0]
    for b in kernel[1:]:
        if B.leq[b][d]:
            d = b
    if any(not B.leq[d][b] for b in kernel):
        raise PreconditionViolation("the kernel of f is not a principal filter")
    scaled = sorted({B.mult[d][b] for b in range(B.size)})
    section: dict[int, int] = {}
    for x in scaled:
        c = f[x]
        if c in section:
            raise PreconditionViolation("f does not separate the scaled copy of B")
        section[c] = x
    g = tuple(
        B.one if a == A.one else section[h[a]]
        for a in range(A.size)
    )
    if not is_d_embedding(A, B, g, DSpec.empty()):
        raise PreconditionViolation("the constructed lift is not an embedding")
    if any(f[g[a]] != h[a] for a in range(A.size)):
        raise PreconditionViolation("the constructed lift does not commute with f")
    return g
