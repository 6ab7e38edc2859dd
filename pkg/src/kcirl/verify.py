"""Named verification suites: each replays one of the package's structural
claims over an exhaustively enumerated catalog and reports a JSON-able
verdict with witnesses for any violation."""

from __future__ import annotations

import random
from pathlib import Path
from typing import Sequence

from .algebra import FiniteRL, all_si_quotients, is_subdirectly_irreducible
from .axioms import (
    StableAxiomatization,
    bounded_linear_variety_axioms,
    check_stability,
    family_algebras,
    fmp_witness,
    linear_algebras_of_size,
    linear_variety_axioms,
    model_class,
    nonlinear_witness_subalgebra,
)
from .canonical import (
    CanonicalFormula,
    DSpec,
    associated_system,
    build_canonical,
    find_d_embedding,
    gamma_counterexample,
    refutation_certificate,
    refutes_1,
    is_d_embedding,
    iter_d_embeddings,
)
from .enumeration import diamond_chain_lattice, enumerate_kcirl, is_linear, lattice_canonical_form
from .errors import MalformedTables
from .formula import Formula, Valuation, evaluate, holds, mentions_bottom, parse
from .parallel import pmap

DEFAULT_FORMULA_SUITE: tuple[str, ...] = (
    "(x->y) | (y->x)",
    "x | (x->0)",
    "(x->0) | ((x->0)->0)",
    "((x->0)->0) -> x",
    "((x->y)->x) -> x",
    "x -> x*x",
    "x*x -> x",
    "x^2 <-> x^3",
    "(x&y) -> x*y",
    "x*y -> (x&y)",
    "(x -> (y|z)) -> ((x->y)|(x->z))",
    "((x&y) -> z) -> ((x->z)|(y->z))",
    "(x&(y|z)) -> ((x&y)|(x&z))",
    "((x|y)&(x|z)) -> (x|(y&z))",
    "(x->y) | ((x->y)->0)",
    "((x*y)->0) -> ((x->0)|(y->0))",
    "(x->y) -> ((y->z)->(x->z))",
    "x -> (y->x)",
    "(x->(y->z)) -> ((x*y)->z)",
    "((x*y)->z) -> (x->(y->z))",
)


def load_formula_suite(path: str | Path) -> list[Formula]:
    """One formula per line; blank lines and # comments are skipped."""
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(parse(line))
    return out


def default_suite() -> list[Formula]:
    return [parse(s) for s in DEFAULT_FORMULA_SUITE]


def _sampled_dspecs(A: FiniteRL, rng: random.Random, extra: int = 3) -> list[DSpec]:
    pairs = [(a, b) for a in range(A.size) for b in range(A.size)]
    specs = [DSpec.empty(), DSpec.full(A.size)]
    for _ in range(extra):
        specs.append(
            DSpec.of(
                rng.sample(pairs, min(3, len(pairs))),
                rng.sample(pairs, min(3, len(pairs))),
            )
        )
    return specs


def verify_lemma36(k: int, max_size: int, seed: int = 0, threads: int = 1) -> dict:
    """Pinned self-refutation and the witness/embedding equivalence.

    For every SI algebra A up to max_size - 1, designated pairs sampled from
    {empty, full, random}, and every SI target C up to max_size: the identity
    assignment pins A against its own formula, and a pinned witness on C
    exists exactly when a designated-pair embedding does.
    """
    size_a = max(2, max_size - 1)
    cat_a = enumerate_kcirl(k, size_a, "si")
    cat_c = enumerate_kcirl(k, max_size, "si")
    rng = random.Random(seed)
    witnesses = []
    checked = 0
    jobs = []
    for A in cat_a.entries:
        for dspec in _sampled_dspecs(A, rng):
            jobs.append((A, dspec))

    def run_job(job):
        A, dspec = job
        local = []
        cf = build_canonical(A, dspec)
        if refutes_1(A, cf) is None:
            local.append({"kind": "missing-self-witness", "a_size": A.size})
        # the identity assignment must itself qualify; checked on the tree
        # evaluator, independently of the table-level witness search
        ident = Valuation(A, {f"X{a}": a for a in range(A.size)})
        s = A.second_greatest
        if evaluate(cf.gamma.left, ident) != A.one or not A.leq[evaluate(cf.gamma.right, ident)][s]:
            local.append({"kind": "identity-not-witness", "a_size": A.size,
                          "dwedge": sorted(dspec.dwedge), "dto": sorted(dspec.dto)})
        count = 0
        for C in cat_c.entries:
            count += 1
            lhs = refutes_1(C, cf) is not None
            rhs = find_d_embedding(A, C, dspec) is not None
            if lhs != rhs:
                local.append({
                    "kind": "witness-embedding-mismatch",
                    "a_size": A.size, "c_size": C.size,
                    "dwedge": sorted(dspec.dwedge), "dto": sorted(dspec.dto),
                    "witness": lhs, "embedding": rhs,
                })
        return count, local

    for count, local in pmap(run_job, jobs, threads):
        checked += count
        witnesses.extend(local)
    return {
        "claim": "lemma3.6",
        "k": k,
        "bound": max_size,
        "status": "verified" if not witnesses else "violated",
        "checked": checked,
        "witnesses": witnesses,
    }


def _refutes_via_system(B: FiniteRL, system, anchored: bool) -> bool:
    for A, dspec in system:
        for C, _ in all_si_quotients(B):
            if find_d_embedding(A, C, dspec, anchor_bottom=anchored) is not None:
                return True
    return False


def verify_prop38(k: int, max_size: int, formulas: Sequence[Formula] | None = None,
                  threads: int = 1) -> dict:
    """First equivalence: an algebra refutes a formula exactly when some
    member of the formula's associated system embeds into one of its SI
    quotients; plus the full conjunction equivalence over the catalog.

    Formulas mentioning the constant 0 live in the pointed language: their
    systems use bottom-anchored canonical formulas and bottom-preserving
    embeddings."""
    if formulas is None:
        formulas = default_suite()
    catalog = enumerate_kcirl(k, max_size)
    si_catalog = enumerate_kcirl(k, max_size, "si")
    witnesses = []
    checked = 0
    for phi in formulas:
        anchored = mentions_bottom(phi)
        system = associated_system(phi, k, max_size, si_catalog)
        gammas = [build_canonical(A, dspec, anchor_bottom=anchored) for A, dspec in system]

        def run_entry(B: FiniteRL):
            refuted = not holds(B, phi)[0]
            via_system = _refutes_via_system(B, system, anchored)
            refutes_some_gamma = any(gamma_counterexample(B, cf) is not None for cf in gammas)
            return refuted, via_system, refutes_some_gamma

        for B, (refuted, via_system, refutes_gamma) in zip(
            catalog.entries, pmap(run_entry, catalog.entries, threads)
        ):
            checked += 1
            if refuted != via_system:
                witnesses.append({"kind": "embedding-equivalence", "formula": str(phi),
                                  "b_size": B.size, "refuted": refuted,
                                  "system_hit": via_system})
            if refuted != refutes_gamma:
                witnesses.append({"kind": "conjunction-equivalence", "formula": str(phi),
                                  "b_size": B.size, "refuted": refuted,
                                  "gamma_refuted": refutes_gamma})
    return {
        "claim": "prop3.8",
        "k": k,
        "bound": max_size,
        "status": "verified" if not witnesses else "violated",
        "checked": checked,
        "witnesses": witnesses,
    }


def verify_prop39(k: int, max_size: int, seed: int = 0, threads: int = 1) -> dict:
    """Certificate soundness and completeness: a certificate is produced
    exactly when the formula fails (independently decided on the tree
    evaluator), certificates are valid, and absence means no (quotient,
    embedding) pair exists at all."""
    size_a = max(2, min(3, max_size))
    cat_a = enumerate_kcirl(k, size_a, "si")
    catalog = enumerate_kcirl(k, max_size)
    rng = random.Random(seed)
    witnesses = []
    checked = 0
    gammas = []
    for A in cat_a.entries:
        gammas.extend(build_canonical(A, dspec) for dspec in _sampled_dspecs(A, rng, extra=1))

    def run_entry(B: FiniteRL):
        local = []
        count = 0
        for cf in gammas:
            count += 1
            cert = refutation_certificate(B, cf)
            refuted = not holds(B, cf.gamma)[0]
            if (cert is not None) != refuted:
                local.append({"kind": "certificate-presence", "b_size": B.size,
                              "a_size": cf.algebra.size, "refuted": refuted})
                continue
            if cert is None:
                exists = any(
                    find_d_embedding(cf.algebra, C, cf.dspec) is not None
                    for C, _ in all_si_quotients(B)
                )
                if exists:
                    local.append({"kind": "missed-certificate", "b_size": B.size,
                                  "a_size": cf.algebra.size})
            else:
                f = cert.surjection
                C = cert.quotient
                hom = all(
                    f[B.join[x][y]] == C.join[f[x]][f[y]]
                    and f[B.mult[x][y]] == C.mult[f[x]][f[y]]
                    for x in range(B.size) for y in range(B.size)
                )
                if not (hom and set(f) == set(range(C.size)) and f[B.one] == C.one):
                    local.append({"kind": "bad-surjection", "b_size": B.size})
                if not is_d_embedding(cf.algebra, C, cert.embedding, cf.dspec):
                    local.append({"kind": "bad-embedding", "b_size": B.size})
        return count, local

    for count, local in pmap(run_entry, catalog.entries, threads):
        checked += count
        witnesses.extend(local)
    return {
        "claim": "prop3.9",
        "k": k,
        "bound": max_size,
        "status": "verified" if not witnesses else "violated",
        "checked": checked,
        "witnesses": witnesses,
    }


def verify_thm45(k: int, max_size: int, size_a: int | None = None, threads: int = 1) -> dict:
    """Stable-mode characterization: B refutes the stable formula of A
    exactly when A embeds into B, over all SI pairs at the bounds."""
    if size_a is None:
        size_a = min(4, max_size)
    cat_a = enumerate_kcirl(k, size_a, "si")
    cat_b = enumerate_kcirl(k, max_size, "si")
    witnesses = []
    pairs = 0

    def run_a(A: FiniteRL):
        cf = build_canonical(A, DSpec.empty())
        local = []
        count = 0
        for B in cat_b.entries:
            count += 1
            refuted = gamma_counterexample(B, cf) is not None
            embeds = find_d_embedding(A, B, DSpec.empty()) is not None
            if refuted != embeds:
                local.append({"a_size": A.size, "b_size": B.size,
                              "refuted": refuted, "embeds": embeds})
        return count, local

    for count, local in pmap(run_a, cat_a.entries, threads):
        pairs += count
        witnesses.extend(local)
    return {
        "claim": "thm4.5",
        "k": k,
        "bound": max_size,
        "size_a": size_a,
        "status": "verified" if not witnesses else "violated",
        "checked": pairs,
        "witnesses": witnesses,
    }


def verify_lemma51(k: int, max_size: int, threads: int = 1) -> dict:
    """Linearity criterion, both readings, plus the witness extractor.

    narrow reading: SI B is linear iff no algebra on the depth-k² lattice
    embeds; family reading: same with every depth 0..k².  For each
    non-linear B the extracted diamond-over-chain subalgebra must be closed,
    valid, of family shape, and embed into B.
    """
    catalog = enumerate_kcirl(k, max_size, "si")
    depth_max = k * k
    families = {d: family_algebras(k, d) for d in range(depth_max + 1)}
    family_lattices = {d: lattice_canonical_form(diamond_chain_lattice(d)) for d in range(depth_max + 1)}
    narrow_bad, family_bad, extractor_bad = [], [], []
    checked = 0
    for B in catalog.entries:
        checked += 1
        linear = is_linear(B)
        narrow_hit = any(find_d_embedding(A, B, DSpec.empty()) is not None
                         for A in families[depth_max])
        family_hit = any(find_d_embedding(A, B, DSpec.empty()) is not None
                         for d in range(depth_max + 1) for A in families[d])
        if linear != (not narrow_hit):
            narrow_bad.append({"b_size": B.size, "linear": linear, "hit": narrow_hit})
        if linear != (not family_hit):
            family_bad.append({"b_size": B.size, "linear": linear, "hit": family_hit})
        if not linear:
            extracted = nonlinear_witness_subalgebra(B)
            if extracted is None:
                extractor_bad.append({"b_size": B.size, "kind": "missing"})
            else:
                J, inclusion = extracted
                depth = J.size - 5
                shape_ok = (
                    0 <= depth <= depth_max
                    and lattice_canonical_form(J.join) == family_lattices.get(depth)
                )
                if not shape_ok:
                    extractor_bad.append({"b_size": B.size, "kind": "shape",
                                          "j_size": J.size})
                if not is_d_embedding(J, B, inclusion, DSpec.empty()):
                    extractor_bad.append({"b_size": B.size, "kind": "not-embedding"})
    status = "verified" if not (narrow_bad or extractor_bad) else "violated"
    return {
        "claim": "lemma5.1",
        "k": k,
        "bound": max_size,
        "status": status,
        "checked": checked,
        "readings": {
            "narrow": {"status": "verified" if not narrow_bad else "violated",
                        "witnesses": narrow_bad},
            "family": {"status": "verified" if not family_bad else "violated",
                        "witnesses": family_bad},
        },
        "extractor": {"status": "verified" if not extractor_bad else "violated",
                       "witnesses": extractor_bad},
        "witnesses": narrow_bad + family_bad + extractor_bad,
    }


def verify_lemma53(k: int, max_size: int, h: int = 3, threads: int = 1) -> dict:
    """Bounded-height criterion: SI B generates inside the height-h linear
    variety iff it is linear with at most h elements.  Tested against three
    candidate axiom families (exact-h chains, h+1 chains, h+1 chains plus the
    full diamond family); the report says which biconditional holds."""
    catalog = enumerate_kcirl(k, max_size, "si")
    depth_max = k * k
    diamonds_narrow = family_algebras(k, depth_max)
    diamonds_family = [A for d in range(depth_max + 1) for A in family_algebras(k, d)]
    readings = {
        "theorem-text": linear_algebras_of_size(k, h) + diamonds_narrow,
        "lemma-text": linear_algebras_of_size(k, h + 1) + diamonds_narrow,
        "lemma-text-family": linear_algebras_of_size(k, h + 1) + diamonds_family,
    }
    results = {}
    checked = 0
    for name, axioms_algebras in readings.items():
        bad = []
        for B in catalog.entries:
            checked += 1
            in_variety = is_linear(B) and B.size <= h
            hit = any(find_d_embedding(A, B, DSpec.empty()) is not None
                      for A in axioms_algebras)
            if in_variety != (not hit):
                bad.append({"b_size": B.size, "linear": is_linear(B), "hit": hit})
        results[name] = {"status": "verified" if not bad else "violated",
                          "witnesses": bad}
    status = results["lemma-text-family"]["status"]
    return {
        "claim": "lemma5.3",
        "k": k,
        "bound": max_size,
        "h": h,
        "status": status,
        "checked": checked,
        "readings": results,
        "witnesses": results["lemma-text-family"]["witnesses"],
    }


def verify_stability_fmp(k: int, max_size: int, formulas: Sequence[Formula] | None = None,
                         threads: int = 1) -> dict:
    """Stability of the linear-variety axioms plus finite countermodels.

    Every suite formula refuted by some model of the axioms must admit an
    extracted SI countermodel lying inside the model class; a splitting-mode
    axiom set serves as negative control for the down-set check, compared
    against a brute-force scan."""
    if formulas is None:
        formulas = default_suite()
    catalog = enumerate_kcirl(k, max_size, "si")
    axioms = linear_variety_axioms(k, all_depths=True)
    stability = check_stability(axioms.axioms, catalog, threads)
    witnesses = list(stability["witnesses"])
    members = set(stability["model_class"])
    fmp_results = []
    for phi in formulas:
        refuted_somewhere = any(
            not holds(catalog.entries[i], phi)[0] for i in sorted(members)
        )
        w = fmp_witness(axioms, phi, catalog)
        fmp_results.append({
            "formula": str(phi),
            "refuted": refuted_somewhere,
            "witness_size": None if w is None else w.countermodel.size,
        })
        if refuted_somewhere and w is None:
            witnesses.append({"kind": "missing-countermodel", "formula": str(phi)})
        if w is not None:
            ok, _ = holds(w.countermodel, phi)
            if ok:
                witnesses.append({"kind": "countermodel-does-not-refute",
                                  "formula": str(phi)})

    # negative control: splitting-mode formulas need not be stable
    control = None
    cat_small = enumerate_kcirl(k, min(3, max_size), "si")
    for A in cat_small.entries:
        cf = build_canonical(A, DSpec.full(A.size))
        report = check_stability([cf], catalog, threads)
        brute = []
        members_c = set(report["model_class"])
        for bi in sorted(members_c):
            B = catalog.entries[bi]
            for ai, A2 in enumerate(catalog.entries):
                if ai in members_c:
                    continue
                if find_d_embedding(A2, B, DSpec.empty()) is not None:
                    brute.append((ai, bi))
        agrees = brute == [
            (w["subalgebra_index"], w["model_index"]) for w in report["witnesses"]
        ]
        control = {"axiom_size": A.size, "status": report["status"],
                    "agrees_with_bruteforce": agrees}
        if not agrees:
            witnesses.append({"kind": "control-disagreement", "a_size": A.size})
        if report["status"] == "violated":
            break
    return {
        "claim": "stability-fmp",
        "k": k,
        "bound": max_size,
        "status": "verified" if not witnesses else "violated",
        "checked": len(formulas),
        "stability": stability["status"],
        "fmp": fmp_results,
        "negative_control": control,
        "witnesses": witnesses,
    }


THEOREM_SUITES = {
    "lemma3.6": verify_lemma36,
    "prop3.8": verify_prop38,
    "prop3.9": verify_prop39,
    "thm4.5": verify_thm45,
    "lemma5.1": verify_lemma51,
    "lemma5.3": verify_lemma53,
    "stability-fmp": verify_stability_fmp,
}


def run_suite(name: str, k: int, max_size: int, formulas=None, seed: int = 0,
              h: int = 3, threads: int = 1) -> dict:
    if name not in THEOREM_SUITES:
        raise MalformedTables(f"unknown theorem suite {name!r}")
    if name == "lemma3.6":
        return verify_lemma36(k, max_size, seed=seed, threads=threads)
    if name == "prop3.8":
        return verify_prop38(k, max_size, formulas=formulas, threads=threads)
    if name == "prop3.9":
        return verify_prop39(k, max_size, seed=seed, threads=threads)
    if name == "thm4.5":
        return verify_thm45(k, max_size, threads=threads)
    if name == "lemma5.1":
        return verify_lemma51(k, max_size, threads=threads)
    if name == "lemma5.3":
        return verify_lemma53(k, max_size, h=h, threads=threads)
    return verify_stability_fmp(k, max_size, formulas=formulas, threads=threads)
