"""Solution sets, algebraic closure, closed congruences and geometric equivalence.

An H-closed congruence T on F(x1..xn) is stored as its Galois-closed point set
S = T'_H, a subset of the finite affine space Hom(F(X), H) = H^n. Membership
(t1, t2) in T means t1 and t2 agree at every point of S.
"""
from __future__ import annotations

import functools
import threading
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .algebra import (
    FiniteAlgebra,
    SubalgebraClosure,
    _require_same_signature,
    generate_point,
    generate_subalgebra,
    graph_functional,
)
from .errors import (
    BudgetError,
    InputError,
    NotAMorphismError,
    PreconditionError,
    RankMismatchError,
)
from .terms import (
    EquationSystem,
    Point,
    TermMorphism,
    check_point_budget,
    check_term,
    eval_many,
    eval_points,
    point_array,
    point_index,
)


# --- point sets ---------------------------------------------------------------


@dataclass(frozen=True)
class PointSet:
    algebra: FiniteAlgebra
    rank: int
    indices: tuple  # sorted positions in the lexicographic point list

    def __post_init__(self):
        idx = tuple(sorted(set(int(i) for i in self.indices)))
        total = self.algebra.size**self.rank
        if idx and (idx[0] < 0 or idx[-1] >= total):
            raise InputError("point index out of range")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_mask(cls, algebra, rank, mask):
        return cls(algebra, rank, tuple(np.nonzero(mask)[0]))

    @classmethod
    def from_assignments(cls, algebra, rank, assignments):
        a = np.asarray(list(assignments), dtype=np.int64).reshape(-1, rank)
        return cls(algebra, rank, tuple(point_index(algebra.size, a))) if len(a) else cls(algebra, rank, ())

    @property
    def size(self):
        return self.algebra.size**self.rank

    def __len__(self):
        return len(self.indices)

    @property
    def mask(self):
        m = np.zeros(self.size, bool)
        m[list(self.indices)] = True
        return m

    @functools.cached_property
    def assignments(self) -> np.ndarray:
        """Shape (len, rank); read-only."""
        a = point_array(self.algebra.size, self.rank)[list(self.indices)].reshape(-1, self.rank)
        a.flags.writeable = False
        return a

    @property
    def generator_rows(self) -> np.ndarray:
        """Row i is generator x_{i+1} evaluated at every point (shape (rank, len))."""
        return np.ascontiguousarray(self.assignments.T)

    def points(self):
        return [Point(self.algebra, tuple(int(v) for v in row)) for row in self.assignments]

    def __contains__(self, point):
        a = point.assignment if isinstance(point, Point) else tuple(point)
        return int(point_index(self.algebra.size, a)[0]) in set(self.indices)

    def issubset(self, other):
        return set(self.indices) <= set(other.indices)


# --- coordinate algebras and closed congruences --------------------------------


@dataclass(eq=False)
class CoordinateAlgebra:
    """F(X)/T realized inside H^S, one element per class, with witness terms."""

    sub: SubalgebraClosure
    generator_images: np.ndarray  # element index of each generator x_i
    rank: int

    def __len__(self):
        return len(self.sub)

    @property
    def size(self):
        return len(self.sub)

    @property
    def witnesses(self):
        return self.sub.witnesses

    def witness(self, i):
        return self.sub.witnesses[i]

    @property
    def rows(self):
        return self.sub.rows

    def to_algebra(self, name="") -> FiniteAlgebra:
        return self.sub.to_algebra(name)


class ClosedCongruence:
    """An H-closed congruence, keyed by its Galois-closed point set."""

    def __init__(self, base: PointSet):
        self.base = base
        self._coordinate = None
        self._lock = threading.Lock()

    algebra = property(lambda self: self.base.algebra)
    rank = property(lambda self: self.base.rank)
    signature = property(lambda self: self.base.algebra.signature)

    @property
    def coordinate(self) -> CoordinateAlgebra:
        if self._coordinate is None:
            with self._lock:
                if self._coordinate is None:
                    self._coordinate = _build_coordinate(self.base)
        return self._coordinate

    def __eq__(self, other):
        return isinstance(other, ClosedCongruence) and self.base == other.base

    def __hash__(self):
        return hash(self.base)

    def __repr__(self):
        return f"ClosedCongruence({self.algebra.name}, rank={self.rank}, points={len(self.base)})"


def _build_coordinate(S: PointSet) -> CoordinateAlgebra:
    if len(S) == 0:
        sub = generate_point(S.algebra.signature, S.rank)
    else:
        sub = generate_subalgebra([S.algebra] * len(S), S.generator_rows)
    gens = sub.index.lookup(sub.generators) if len(S) else np.zeros(S.rank, np.int64)
    return CoordinateAlgebra(sub, gens, S.rank)


@functools.lru_cache(maxsize=128)
def _full(H: FiniteAlgebra, rank: int) -> ClosedCongruence:
    n = H.size**rank
    return ClosedCongruence(PointSet(H, rank, tuple(range(n))))


def _space(H, rank, budget=None):
    """(full congruence, relatively free matrix N x |H|^rank)."""
    if rank < 1:
        raise RankMismatchError("rank must be at least 1")
    check_point_budget(H.size, rank, budget)
    full = _full(H, rank)
    return full, full.coordinate.rows


# --- operations ---------------------------------------------------------------


def _check_system(H, T: EquationSystem):
    for l, r in T.pairs:
        check_term(H.signature, l, T.rank)
        check_term(H.signature, r, T.rank)


def solutions(H: FiniteAlgebra, T: EquationSystem, budget=None) -> PointSet:
    check_point_budget(H.size, T.rank, budget)
    _check_system(H, T)
    pts = point_array(H.size, T.rank)
    ok = np.ones(len(pts), bool)
    if T.pairs:
        vals = eval_many(H, [t for pair in T.pairs for t in pair], pts)
        ok = (vals[0::2] == vals[1::2]).all(axis=0)
    return PointSet.from_mask(H, T.rank, ok)


def _graph(ctx_a, ctx_b, seeds):
    """graph_functional that tolerates an empty combined context."""
    if not ctx_a and not ctx_b:
        return True, None
    v = graph_functional(ctx_a, ctx_b, seeds)
    return v.functional, v


def factors_through(S: PointSet, psi: Point) -> bool:
    """Is the congruence of S contained in ker psi?  psi may target another algebra."""
    target = psi.algebra
    _require_same_signature(S.algebra, target)
    if psi.rank != S.rank:
        raise RankMismatchError("point and point set have different ranks")
    rows = S.generator_rows
    seeds = [(tuple(rows[i]), (psi.assignment[i],)) for i in range(S.rank)]
    functional, _ = _graph([S.algebra] * len(S), [target], seeds)
    return functional


def galois_close_points(S: PointSet, budget=None) -> PointSet:
    """S'' via functional dependency of columns in the relatively free matrix."""
    _, F = _space(S.algebra, S.rank, budget)
    return PointSet.from_mask(S.algebra, S.rank, _kernels.fd_closure(F, S.mask, S.algebra.size))


def galois_close_points_direct(S: PointSet) -> PointSet:
    """S'' by testing every point with factors_through (slow reference route)."""
    keep = [i for i, p in enumerate(point_array(S.algebra.size, S.rank))
            if factors_through(S, Point(S.algebra, tuple(int(v) for v in p)))]
    return PointSet(S.algebra, S.rank, tuple(keep))


def closed(S: PointSet, check=True) -> ClosedCongruence:
    """Wrap a point set that is already Galois-closed."""
    if check and galois_close_points(S) != S:
        raise PreconditionError("point set is not Galois-closed")
    return ClosedCongruence(S)


def closure(H: FiniteAlgebra, T: EquationSystem, budget=None) -> ClosedCongruence:
    return ClosedCongruence(solutions(H, T, budget))


def congruence_contains(T: ClosedCongruence, t1, t2) -> bool:
    check_term(T.signature, t1, T.rank)
    check_term(T.signature, t2, T.rank)
    if len(T.base) == 0:
        return True
    pts = T.base.assignments
    return bool(np.array_equal(eval_points(T.algebra, t1, pts), eval_points(T.algebra, t2, pts)))


def coordinate_algebra(T: ClosedCongruence) -> CoordinateAlgebra:
    return T.coordinate


def relatively_free(H: FiniteAlgebra, rank: int, budget=None) -> CoordinateAlgebra:
    full, _ = _space(H, rank, budget)
    return full.coordinate


def defining_system(T: ClosedCongruence) -> EquationSystem:
    """A finite system whose H-closure is T (pairs of witness terms)."""
    full, F = _space(T.algebra, T.rank)
    wit = full.coordinate.witnesses
    cols = list(T.base.indices)
    first = {}
    pairs = []
    for i, row in enumerate(F[:, cols]):
        key = row.tobytes()
        j = first.setdefault(key, i)
        if j != i:
            pairs.append((wit[i], wit[j]))
    return EquationSystem(T.rank, tuple(pairs))


def _composed_points(m: TermMorphism, T2: ClosedCongruence) -> np.ndarray:
    """Column j = the point psi_j o m for psi_j in base(T2); shape (source_rank, |S2|)."""
    pts = T2.base.assignments
    if len(pts) == 0:
        return np.zeros((m.source_rank, 0), np.int32)
    return eval_many(T2.algebra, list(m.images), pts)


def _check_morphism_args(m, T1, T2):
    if T1.algebra != T2.algebra:
        raise InputError("congruences live over different algebras")
    if m.source_rank != T1.rank or m.target_rank != T2.rank:
        raise RankMismatchError("morphism ranks do not match the congruences")
    for t in m.images:
        check_term(T1.signature, t, m.target_rank)


def is_cl_morphism(m: TermMorphism, T1: ClosedCongruence, T2: ClosedCongruence) -> bool:
    """m(T1) is contained in T2, decided by psi o m lying in base(T1) for psi in base(T2)."""
    _check_morphism_args(m, T1, T2)
    Q = _composed_points(m, T2)
    if Q.shape[1] == 0:
        return True
    idx = point_index(T1.algebra.size, Q.T)
    return bool(np.isin(idx, np.array(T1.base.indices, np.int64)).all())


@dataclass(eq=False)
class QuotientHom:
    source: CoordinateAlgebra
    target: CoordinateAlgebra
    map: np.ndarray

    def __post_init__(self):
        self.map = np.asarray(self.map, dtype=np.int64)

    def __eq__(self, other):
        return (
            isinstance(other, QuotientHom)
            and self.source is other.source
            and self.target is other.target
            and np.array_equal(self.map, other.map)
        )

    def then(self, other: "QuotientHom") -> "QuotientHom":
        if other.source is not self.target:
            raise InputError("homomorphisms are not composable")
        return QuotientHom(self.source, other.target, other.map[self.map])

    @classmethod
    def identity(cls, C: CoordinateAlgebra):
        return cls(C, C, np.arange(len(C)))


def induced_hom(m: TermMorphism, T1: ClosedCongruence, T2: ClosedCongruence) -> QuotientHom:
    """The unique F(X1)/T1 -> F(X2)/T2 closing the square with the natural maps."""
    _check_morphism_args(m, T1, T2)
    Q = _composed_points(m, T2)
    if Q.shape[1]:
        idx = point_index(T1.algebra.size, Q.T)
        bad = np.nonzero(~np.isin(idx, np.array(T1.base.indices, np.int64)))[0]
        if len(bad):
            psi = Q[:, bad[0]]
            S1 = T1.base
            rows = S1.generator_rows
            seeds = [(tuple(rows[i]), (int(psi[i]),)) for i in range(S1.rank)]
            _, verdict = _graph([S1.algebra] * len(S1), [S1.algebra], seeds)
            pair = verdict.violation[2:] if verdict is not None else None
            raise NotAMorphismError(
                f"morphism does not map T1 into T2; separating pair {pair[0]} = {pair[1]}", pair
            )
    C1, C2 = T1.coordinate, T2.coordinate
    images = C1.sub.replay(T1.algebra, Q)
    mapped = C2.sub.index.lookup(images)
    assert (mapped >= 0).all(), "image left the target coordinate algebra"
    return QuotientHom(C1, C2, mapped)


def lift_hom(h: QuotientHom) -> TermMorphism:
    """A term morphism whose induced homomorphism is h."""
    C1, C2 = h.source, h.target
    images = tuple(C2.witness(int(h.map[g])) for g in C1.generator_images)
    return TermMorphism(C1.rank, C2.rank, images)


def quotient_hom(T1: ClosedCongruence, T2: ClosedCongruence, generator_targets):
    """The homomorphism sending generator i to element generator_targets[i], or None."""
    C1, C2 = T1.coordinate, T2.coordinate
    if len(generator_targets) != T1.rank:
        raise RankMismatchError("one target per source generator is required")
    rows1 = T1.base.generator_rows
    seeds = [(tuple(rows1[i]), tuple(C2.rows[int(t)])) for i, t in enumerate(generator_targets)]
    functional, verdict = _graph([T1.algebra] * len(T1.base), [T2.algebra] * len(T2.base), seeds)
    if not functional:
        return None
    if verdict is None:
        return QuotientHom(C1, C2, np.zeros(len(C1), np.int64))
    images = np.array([verdict.mapping[tuple(int(v) for v in r)] for r in C1.rows], np.int32)
    images = images.reshape(len(C1), -1)
    return QuotientHom(C1, C2, C2.sub.index.lookup(images))


def all_quotient_homs(T1: ClosedCongruence, T2: ClosedCongruence):
    """Every homomorphism F(X1)/T1 -> F(X2)/T2, by generator assignment."""
    import itertools

    n2 = len(T2.coordinate)
    out = []
    for targets in itertools.product(range(n2), repeat=T1.rank):
        h = quotient_hom(T1, T2, targets)
        if h is not None:
            out.append(h)
    return out


def _determines(rows_a, rows_b) -> bool:
    first = {}
    for a, b in zip(rows_a, rows_b):
        key = a.tobytes()
        seen = first.setdefault(key, b.tobytes())
        if seen != b.tobytes():
            return False
    return True


def _joint(Ta: ClosedCongruence, Tb: ClosedCongruence):
    _require_same_signature(Ta.algebra, Tb.algebra)
    if Ta.rank != Tb.rank:
        raise RankMismatchError("congruences over different ranks")
    ka, kb = len(Ta.base), len(Tb.base)
    if ka + kb == 0:
        return None, 0
    gens = np.concatenate([Ta.base.generator_rows, Tb.base.generator_rows], axis=1)
    return generate_subalgebra([Ta.algebra] * ka + [Tb.algebra] * kb, gens), ka


def congruence_leq(Ta: ClosedCongruence, Tb: ClosedCongruence) -> bool:
    """Ta is contained in Tb (the algebras may differ)."""
    sub, ka = _joint(Ta, Tb)
    return True if sub is None else _determines(sub.rows[:, :ka], sub.rows[:, ka:])


def congruence_equal(Ta: ClosedCongruence, Tb: ClosedCongruence) -> bool:
    sub, ka = _joint(Ta, Tb)
    if sub is None:
        return True
    rows = sub.rows
    return _determines(rows[:, :ka], rows[:, ka:]) and _determines(rows[:, ka:], rows[:, :ka])


def closure_in(T: ClosedCongruence, H2: FiniteAlgebra, budget=None) -> ClosedCongruence:
    """T''_{H2}: the points of H2 whose kernels contain T."""
    check_point_budget(H2.size, T.rank, budget)
    full2 = _full(H2, T.rank)
    sub, ka = _joint(T, full2)
    mask = np.zeros(ka + H2.size**T.rank, bool)
    mask[:ka] = True
    det = _kernels.fd_closure(sub.rows, mask, max(T.algebra.size, H2.size))
    return ClosedCongruence(PointSet.from_mask(H2, T.rank, det[ka:]))


def is_closed_in(T: ClosedCongruence, H2: FiniteAlgebra) -> bool:
    return congruence_equal(T, closure_in(T, H2))


def separating_pair(Ta: ClosedCongruence, Tb: ClosedCongruence):
    """Terms (u, v) with (u, v) in Tb but not in Ta, or None if Tb <= Ta."""
    sub, ka = _joint(Ta, Tb)
    if sub is None:
        return None
    first = {}
    for i, row in enumerate(sub.rows):
        j = first.setdefault(row[ka:].tobytes(), i)
        if not np.array_equal(sub.rows[j, :ka], row[:ka]):
            return sub.witness(j), sub.witness(i)
    return None


def next_closure(n: int, close):
    """All closed subsets of range(n) in lectic order; ``close`` maps masks to masks."""
    A = close(np.zeros(n, bool))
    out = [A]
    while not A.all():
        for i in range(n - 1, -1, -1):
            if A[i]:
                continue
            seed = A.copy()
            seed[i + 1:] = False
            seed[i] = True
            B = close(seed)
            if not (B[:i] & ~A[:i]).any():
                A = B
                out.append(A)
                break
    return out


def _canonical(sets):
    return sorted(sets, key=lambda S: (len(S), S.indices))


def enumerate_closed(H: FiniteAlgebra, rank: int, budget=None) -> list:
    """Cl_H(F(x1..x_rank)) as closed point sets, sorted by (size, indices)."""
    _, F = _space(H, rank, budget)
    masks = next_closure(F.shape[1], lambda m: _kernels.fd_closure(F, m, H.size))
    sets = _canonical(PointSet.from_mask(H, rank, m) for m in masks)
    return [ClosedCongruence(S) for S in sets]


@dataclass
class GeomVerdict:
    equivalent_up_to_rank: bool
    checked_rank: int
    counterexample: ClosedCongruence | None = None
    counterexample_rank: int | None = None
    not_closed_in: FiniteAlgebra | None = None
    budget_exceeded_at: int | None = None

    def __bool__(self):
        return self.equivalent_up_to_rank


def _joint_space(H1, H2, rank):
    sub, _ = _joint(_full(H1, rank), _full(H2, rank))
    return sub.rows


def geom_equiv(H1: FiniteAlgebra, H2: FiniteAlgebra, max_rank: int, budget=None) -> GeomVerdict:
    """Cl_{H1}(F(X)) == Cl_{H2}(F(X)) for every rank up to max_rank.

    Each closed set of either algebra is tested for closedness in the other
    inside the joint relatively free algebra of H1^{P1} x H2^{P2}.
    """
    _require_same_signature(H1, H2)
    if max_rank < 1:
        raise RankMismatchError("max_rank must be at least 1")
    radix = max(H1.size, H2.size)
    for r in range(1, max_rank + 1):
        try:
            check_point_budget(H1.size, r, budget)
            check_point_budget(H2.size, r, budget)
        except BudgetError:
            if r == 1:
                raise
            return GeomVerdict(True, r - 1, budget_exceeded_at=r)
        J = _joint_space(H1, H2, r)
        p1 = H1.size**r
        for own, other, offset, width, other_off, other_width in (
            (H1, H2, 0, p1, p1, H2.size**r),
            (H2, H1, p1, H2.size**r, 0, p1),
        ):
            for T in enumerate_closed(own, r, budget):
                mask = np.zeros(J.shape[1], bool)
                mask[offset + np.array(T.base.indices, np.int64)] = True
                there = _kernels.fd_closure(J, mask, radix)
                back = np.zeros(J.shape[1], bool)
                back[other_off:other_off + other_width] = there[other_off:other_off + other_width]
                again = _kernels.fd_closure(J, back, radix)
                if not np.array_equal(again[offset:offset + width], mask[offset:offset + width]):
                    return GeomVerdict(False, r, T, r, other)
    return GeomVerdict(True, max_rank)
