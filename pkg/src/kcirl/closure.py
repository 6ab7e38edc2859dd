"""Subalgebra closures under fusion, join and the unit, and their completion
to standalone residuated lattices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .algebra import FiniteRL, validate
from .errors import NotRefuted
from .formula import Formula, Valuation, evaluate, sub_values


@dataclass(frozen=True)
class PartialSubalgebra:
    """A carrier inside a host algebra, closed under host join and fusion."""

    host: FiniteRL
    carrier: frozenset[int]

    def is_closed(self) -> bool:
        c = self.carrier
        h = self.host
        if h.one not in c:
            return False
        return all(h.join[a][b] in c and h.mult[a][b] in c for a in c for b in c)


def closure_mult_join_one(host: FiniteRL, seed: Iterable[int]) -> PartialSubalgebra:
    """Least carrier containing seed and the unit, closed under fusion and join.

    Computed by least-fixpoint iteration of the one-step closure.
    """
    carrier = set(seed)
    carrier.add(host.one)
    while True:
        new = set()
        for a in carrier:
            for b in carrier:
                j = host.join[a][b]
                m = host.mult[a][b]
                if j not in carrier:
                    new.add(j)
                if m not in carrier:
                    new.add(m)
        if not new:
            return PartialSubalgebra(host=host, carrier=frozenset(carrier))
        carrier |= new


def complete_to_rl(P: PartialSubalgebra) -> tuple[FiniteRL, tuple[int, ...]]:
    """Turn the carrier into a standalone algebra with derived residual/meet.

    Join and fusion restrict from the host; the returned inclusion maps the
    dense new indices back to host elements and is a fusion/join/unit
    preserving embedding.
    """
    host = P.host
    inclusion = tuple(sorted(P.carrier))
    index = {e: i for i, e in enumerate(inclusion)}
    n = len(inclusion)
    join = [[index[host.join[inclusion[x]][inclusion[y]]] for y in range(n)] for x in range(n)]
    mult = [[index[host.mult[inclusion[x]][inclusion[y]]] for y in range(n)] for x in range(n)]
    A = validate(join, mult, k=host.k, one=index[host.one])
    return A, inclusion


def refuting_subalgebra(
    host: FiniteRL, phi: Formula, v: Valuation
) -> tuple[FiniteRL, tuple[int, ...], Valuation]:
    """Extract a finite refuting subalgebra from a refuting valuation.

    Closes the set of values of phi's subformulas, completes it, and returns
    the completed algebra, the inclusion, and the corestricted valuation,
    under which phi evaluates to the same (non-unit) value as in the host.
    """
    value = evaluate(phi, v)
    if value == host.one:
        raise NotRefuted("the valuation does not refute the formula in the host")
    P = closure_mult_join_one(host, sub_values(phi, v))
    A, inclusion = complete_to_rl(P)
    index = {e: i for i, e in enumerate(inclusion)}
    corestricted = Valuation(A, {x: index[e] for x, e in v.assignment.items() if e in index})
    return A, inclusion, corestricted
