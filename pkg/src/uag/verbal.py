"""Verbal operations: derived algebras, applicability evidence, transport of
closed congruences, the inner-automorphism search and automorphic equivalence."""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .algebra import FiniteAlgebra, Signature, graph_functional, is_homomorphism
from .errors import (
    BudgetError,
    InputError,
    PreconditionError,
    SignatureMismatchError,
    TransportError,
)
from .geometry import (
    ClosedCongruence,
    GeomVerdict,
    _full,
    congruence_leq,
    geom_equiv,
    induced_hom,
    relatively_free,
    solutions,
)
from .terms import EquationSystem, Term, TermMorphism, check_term, enumerate_terms, eval_points, point_array


@dataclass(frozen=True, eq=False)
class WordSystem:
    """One word w_op over x1..x_arity for every operation symbol."""

    signature: Signature
    words: dict
    name: str = ""

    def __post_init__(self):
        words = dict(self.words)
        missing = set(self.signature.symbols) - set(words)
        extra = set(words) - set(self.signature.symbols)
        if missing or extra:
            raise InputError(f"word system must cover exactly {self.signature.symbols}")
        for sym, arity in self.signature.ops:
            check_term(self.signature, words[sym], arity)
        object.__setattr__(self, "words", {s: words[s] for s in self.signature.symbols})

    def __getitem__(self, sym) -> Term:
        return self.words[sym]

    def __eq__(self, other):
        return (
            isinstance(other, WordSystem)
            and self.signature.compatible(other.signature)
            and self.words == other.words
        )

    def __hash__(self):
        return hash((self.signature.ops, tuple(self.words.items())))


def derive_algebra(H: FiniteAlgebra, W: WordSystem, name: str = "") -> FiniteAlgebra:
    """H*_W: same carrier, each operation replaced by its word."""
    if not H.signature.compatible(W.signature):
        raise SignatureMismatchError("word system and algebra have different signatures")
    tables = {}
    for sym, arity in H.signature.ops:
        vals = eval_points(H, W[sym], point_array(H.size, arity))
        tables[sym] = vals.reshape((H.size,) * arity)
    return FiniteAlgebra(H.signature, H.size, tables, name or f"{H.name}*{W.name}")


@functools.lru_cache(maxsize=64)
def _free_pair(h0: FiniteAlgebra, W: WordSystem, rank: int):
    C = relatively_free(h0, rank)
    F = C.to_algebra(f"F{rank}({h0.name})")
    return C, F, derive_algebra(F, W)


ISO_FOUND = "iso_found"
NOT_HOMOMORPHISM = "not_homomorphism"
NOT_BIJECTIVE = "not_bijective"
BUDGET_EXCEEDED = "budget_exceeded"


@dataclass
class RankStatus:
    status: str
    free: FiniteAlgebra | None = None
    s_map: np.ndarray | None = None
    violation: tuple | None = None  # witness terms (u, v): equal in F, images differ
    collision: tuple | None = None  # elements (a, b) of F with s(a) == s(b)


@dataclass
class ApplicabilityReport:
    """Per-rank evidence that W is applicable, relative to Var(h0)."""

    h0: FiniteAlgebra
    words: WordSystem
    max_rank: int
    ranks: dict = field(default_factory=dict)

    def iso_at(self, rank) -> bool:
        st = self.ranks.get(rank)
        return st is not None and st.status == ISO_FOUND

    def s_map(self, rank) -> np.ndarray:
        if not self.iso_at(rank):
            raise PreconditionError(f"no isomorphism recorded at rank {rank}")
        return self.ranks[rank].s_map

    @property
    def ok(self) -> bool:
        return all(self.iso_at(r) for r in range(1, self.max_rank + 1))


def check_applicable_rel(h0: FiniteAlgebra, W: WordSystem, max_rank: int) -> ApplicabilityReport:
    """Try the generator-fixing homomorphism F_r -> (F_r)*_W at every rank."""
    report = ApplicabilityReport(h0, W, max_rank)
    for r in range(1, max_rank + 1):
        try:
            C, F, D = _free_pair(h0, W, r)
        except BudgetError:
            report.ranks[r] = RankStatus(BUDGET_EXCEEDED)
            break
        gens = [int(g) for g in C.generator_images]
        v = graph_functional([F], [D], [((g,), (g,)) for g in gens])
        if not v.functional:
            report.ranks[r] = RankStatus(NOT_HOMOMORPHISM, F, violation=v.violation[2:])
            continue
        s = np.array([v.mapping[(a,)][0] for a in range(F.size)], np.int64)
        if len(np.unique(s)) < F.size:
            seen = {}
            for a, b in enumerate(s):
                if b in seen:
                    collision = (seen[b], a)
                    break
                seen[b] = a
            report.ranks[r] = RankStatus(NOT_BIJECTIVE, F, s_map=s, collision=collision)
            continue
        report.ranks[r] = RankStatus(ISO_FOUND, F, s_map=s)
    return report


def apply_automorphism_to_morphism(m: TermMorphism, W: WordSystem, h0: FiniteAlgebra,
                                   report: ApplicabilityReport) -> np.ndarray:
    """s_{r2} o mu o s_{r1}^{-1} as a map between relatively free carriers."""
    _check_report(report, h0, W)
    s1 = report.s_map(m.source_rank)
    s2 = report.s_map(m.target_rank)
    mu = induced_hom(m, _full(h0, m.source_rank), _full(h0, m.target_rank)).map
    s1_inv = np.empty_like(s1)
    s1_inv[s1] = np.arange(len(s1))
    return s2[mu[s1_inv]]


def _check_report(report, h0, W):
    if report.h0 != h0 or report.words != W:
        raise PreconditionError("applicability report was computed for another (h0, W)")


def in_variety_evidence(H: FiniteAlgebra, h0: FiniteAlgebra, max_rank: int = 2) -> bool:
    """H satisfies every identity of h0 in at most max_rank variables."""
    return all(congruence_leq(_full(h0, r), _full(H, r)) for r in range(1, max_rank + 1))


def _blocks(labels_rows: np.ndarray) -> np.ndarray:
    """Canonical block labels (first-occurrence numbering) for rows."""
    first = {}
    out = np.empty(len(labels_rows), np.int64)
    for i, row in enumerate(labels_rows):
        out[i] = first.setdefault(row.tobytes(), len(first))
    return out


def _renumber(labels):
    first = {}
    return np.array([first.setdefault(int(l), len(first)) for l in labels], np.int64)


def transport_closed(T: ClosedCongruence, W: WordSystem, h0: FiniteAlgebra,
                     report: ApplicabilityReport, variety_rank: int = 2) -> ClosedCongruence:
    """Push T through s_r and return the matching closed congruence over H*_W."""
    _check_report(report, h0, W)
    r = T.rank
    s = report.s_map(r)
    H = T.algebra
    if not in_variety_evidence(H, h0, max(r, variety_rank)):
        raise PreconditionError(f"{H.name} fails identities of {h0.name}")
    C = relatively_free(h0, r)
    labels = _blocks(C.sub.replay(H, T.base.generator_rows))
    s_inv = np.empty_like(s)
    s_inv[s] = np.arange(len(s))
    pushed = _renumber(labels[s_inv])
    wit = C.witnesses
    rep = {}
    pairs = []
    for u, lab in enumerate(pushed):
        v = rep.setdefault(int(lab), u)
        if v != u:
            pairs.append((wit[u], wit[v]))
    Hd = derive_algebra(H, W)
    result = ClosedCongruence(solutions(Hd, EquationSystem(r, tuple(pairs))))
    realized = _blocks(C.sub.replay(Hd, result.base.generator_rows))
    if not np.array_equal(realized, pushed):
        raise TransportError(
            "transported partition is not closed over the derived algebra; "
            "applicability evidence is insufficient for this algebra"
        )
    return result


@dataclass
class InnerWitness:
    c: Term
    verified_ranks: list


def _c_map(F: FiniteAlgebra, c: Term) -> np.ndarray:
    return eval_points(F, c, np.arange(F.size, dtype=np.int32)[:, None]).astype(np.int64)


def verify_inner(h0: FiniteAlgebra, W: WordSystem, c: Term, rank: int) -> bool:
    """f -> c(f), with c evaluated by the original operations, is F_r ~ (F_r)*_W."""
    _, F, D = _free_pair(h0, W, rank)
    cm = _c_map(F, c)
    return len(np.unique(cm)) == F.size and is_homomorphism(F, D, cm)


def inner_search(h0: FiniteAlgebra, W: WordSystem, max_rank: int, max_depth: int):
    """First unary term c (modulo Var(h0)) whose c-maps are isomorphisms, or None."""
    C1 = relatively_free(h0, 1)
    pts = point_array(h0.size, 1)
    seen = set()
    for c in enumerate_terms(h0.signature, 1, max_depth):
        elem = int(C1.sub.index.lookup(eval_points(h0, c, pts)[None, :])[0])
        if elem in seen:
            continue
        seen.add(elem)
        if all(verify_inner(h0, W, c, r) for r in range(1, max_rank + 1)):
            return InnerWitness(c, list(range(1, max_rank + 1)))
    return None


USER_ASSERTED = "user_asserted"
RELATIVE_EVIDENCE = "relative_evidence"


@dataclass
class AutoEqVerdict:
    verdict: bool
    max_rank: int
    basis: str
    geom: GeomVerdict
    basis_h0: str | None = None
    basis_rank: int | None = None

    def __bool__(self):
        return self.verdict


def auto_equiv(H1: FiniteAlgebra, H2: FiniteAlgebra, W: WordSystem, max_rank: int,
               basis=None, budget=None) -> AutoEqVerdict:
    """Automorphic equivalence through W: H1 geometrically equivalent to (H2)*_W.

    ``basis`` is ``"user_asserted"`` (W applicable by the caller's claim) or an
    ApplicabilityReport with isomorphisms at every rank up to max_rank.
    """
    if basis is None:
        raise PreconditionError("an applicability basis is required")
    if isinstance(basis, ApplicabilityReport):
        if basis.words != W:
            raise PreconditionError("report was computed for another word system")
        if basis.max_rank < max_rank or not all(basis.iso_at(r) for r in range(1, max_rank + 1)):
            raise PreconditionError("applicability report lacks isomorphisms up to max_rank")
        label, h0_name, b_rank = RELATIVE_EVIDENCE, basis.h0.name, basis.max_rank
    elif basis == USER_ASSERTED:
        label, h0_name, b_rank = USER_ASSERTED, None, None
    else:
        raise PreconditionError(f"unknown applicability basis {basis!r}")
    g = geom_equiv(H1, derive_algebra(H2, W), max_rank, budget)
    return AutoEqVerdict(g.equivalent_up_to_rank, max_rank, label, g, h0_name, b_rank)
