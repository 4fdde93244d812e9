"""Terms over generators x1..xn, their evaluation at points, and substitution."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import config
from .errors import BudgetError, RankMismatchError, SignatureMismatchError


@dataclass(frozen=True)
class Var:
    index: int  # 1-based

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("generator indices start at 1")

    @property
    def depth(self):
        return 0

    def __str__(self):
        return f"x{self.index}"


@dataclass(frozen=True)
class App:
    symbol: str
    args: tuple = ()

    @property
    def depth(self):
        # constants count as one application
        return 1 + max((a.depth for a in self.args), default=0)

    def __str__(self):
        if not self.args:
            return self.symbol
        return f"{self.symbol}({','.join(map(str, self.args))})"


Term = Var | App


def term_rank(t: Term) -> int:
    """Largest generator index occurring in t (0 for ground terms)."""
    if isinstance(t, Var):
        return t.index
    return max((term_rank(a) for a in t.args), default=0)


def check_term(sig, t: Term, rank: int | None = None) -> None:
    if isinstance(t, Var):
        if rank is not None and t.index > rank:
            raise RankMismatchError(f"{t} used with rank {rank}")
        return
    arity = sig.arity(t.symbol)
    if len(t.args) != arity:
        from .errors import ArityError

        raise ArityError(f"{t.symbol} expects {arity} arguments, got {len(t.args)}")
    for a in t.args:
        check_term(sig, a, rank)


@dataclass(frozen=True)
class Point:
    """A point of Hom(F(X), H): one element of H per generator."""

    algebra: object
    assignment: tuple

    @property
    def rank(self):
        return len(self.assignment)


@dataclass(frozen=True)
class TermMorphism:
    """Homomorphism F(x1..x_source) -> F(x1..x_target) given by generator images."""

    source_rank: int
    target_rank: int
    images: tuple

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        if len(self.images) != self.source_rank:
            raise RankMismatchError("one image per source generator is required")
        for t in self.images:
            if term_rank(t) > self.target_rank:
                raise RankMismatchError(f"image {t} exceeds target rank {self.target_rank}")

    @classmethod
    def identity(cls, rank):
        return cls(rank, rank, tuple(Var(i + 1) for i in range(rank)))

    def then(self, other: "TermMorphism") -> "TermMorphism":
        """Apply self first, then other (images substituted through other)."""
        if other.source_rank != self.target_rank:
            raise RankMismatchError("morphisms are not composable")
        return TermMorphism(
            self.source_rank, other.target_rank, tuple(substitute(t, other) for t in self.images)
        )

    def __str__(self):
        return "; ".join(f"x{i + 1}->{t}" for i, t in enumerate(self.images))


@dataclass(frozen=True)
class EquationSystem:
    rank: int
    pairs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((l, r) for l, r in self.pairs))
        if self.rank < 1:
            raise RankMismatchError("rank must be at least 1")
        for l, r in self.pairs:
            if max(term_rank(l), term_rank(r)) > self.rank:
                raise RankMismatchError(f"equation {l} = {r} exceeds rank {self.rank}")


def _eval_cached(A, t, cols, memo):
    hit = memo.get(t)
    if hit is not None:
        return hit
    if isinstance(t, Var):
        if t.index > len(cols):
            raise RankMismatchError(f"{t} evaluated at a rank-{len(cols)} point")
        val = cols[t.index - 1]
    else:
        table = A.table(t.symbol)
        if table.ndim != len(t.args):
            from .errors import ArityError

            raise ArityError(f"{t.symbol} expects {table.ndim} arguments, got {len(t.args)}")
        if not t.args:
            val = np.full(len(cols[0]) if cols else memo["__m"], table[()], np.int32)
        else:
            val = table[tuple(_eval_cached(A, a, cols, memo) for a in t.args)]
    memo[t] = val
    return val


def eval_points(A, t: Term, points: np.ndarray) -> np.ndarray:
    """Value of t at every row of ``points`` (shape (M, rank))."""
    points = np.asarray(points, dtype=np.int32)
    if points.ndim != 2:
        raise ValueError("points must be a 2-d array")
    cols = [points[:, i] for i in range(points.shape[1])]
    return np.asarray(_eval_cached(A, t, cols, {"__m": points.shape[0]}), np.int32)


def eval_many(A, terms: Sequence[Term], points: np.ndarray) -> np.ndarray:
    """Stacked values, shape (len(terms), M); shared subterms are evaluated once."""
    points = np.asarray(points, dtype=np.int32)
    cols = [points[:, i] for i in range(points.shape[1])]
    memo = {"__m": points.shape[0]}
    out = np.empty((len(terms), points.shape[0]), np.int32)
    for i, t in enumerate(terms):
        out[i] = _eval_cached(A, t, cols, memo)
    return out


def eval_term(A, t: Term, p) -> int:
    assignment = p.assignment if isinstance(p, Point) else tuple(p)
    if isinstance(p, Point) and p.algebra is not None and p.algebra != A:
        raise SignatureMismatchError("point targets a different algebra")
    for v in assignment:
        A.check_index(v)
    return int(eval_points(A, t, np.array([assignment], np.int32).reshape(1, -1))[0])


def substitute(t: Term, m: TermMorphism) -> Term:
    if isinstance(t, Var):
        if t.index > m.source_rank:
            raise RankMismatchError(f"{t} outside source rank {m.source_rank}")
        return m.images[t.index - 1]
    return App(t.symbol, tuple(substitute(a, m) for a in t.args))


def point_array(size: int, rank: int) -> np.ndarray:
    """All assignments in lexicographic order, shape (size**rank, rank)."""
    if rank == 0:
        return np.zeros((1, 0), np.int32)
    return np.indices((size,) * rank, dtype=np.int32).reshape(rank, -1).T.copy()


def point_index(size: int, assignments) -> np.ndarray:
    """Inverse of point_array: position of each assignment in lexicographic order."""
    a = np.asarray(assignments, dtype=np.int64)
    if a.ndim == 1:
        a = a[None, :]
    weights = size ** np.arange(a.shape[1] - 1, -1, -1, dtype=np.int64)
    return a @ weights


def check_point_budget(size: int, rank: int, budget: int | None = None) -> int:
    count = size**rank
    limit = config.point_budget(budget)
    if count > limit:
        raise BudgetError(f"{size}^{rank} = {count} points exceeds the point budget {limit}")
    return count


def enumerate_points(H, rank: int, budget: int | None = None) -> list[Point]:
    if rank < 1:
        raise RankMismatchError("rank must be at least 1")
    check_point_budget(H.size, rank, budget)
    return [Point(H, tuple(int(v) for v in row)) for row in point_array(H.size, rank)]


def enumerate_terms(sig, rank: int, max_depth: int) -> Iterator[Term]:
    """All terms of depth <= max_depth, by depth, then symbol order, then children.

    Children tuples are ordered lexicographically by the emission index of their
    members, so the stream is deterministic and duplicate-free.
    """
    if max_depth < 0:
        return
    terms: list[Term] = [Var(i + 1) for i in range(rank)]
    yield from terms
    prev = 0
    for depth in range(1, max_depth + 1):
        N = len(terms)
        fresh = []
        for sym, arity in sig.ops:
            if arity == 0:
                if depth == 1:
                    fresh.append(App(sym))
                continue
            for idx in itertools.product(range(N), repeat=arity):
                if depth > 1 and max(idx) < prev:
                    continue
                fresh.append(App(sym, tuple(terms[i] for i in idx)))
        yield from fresh
        terms.extend(fresh)
        prev = N
