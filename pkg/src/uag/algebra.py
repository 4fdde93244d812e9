"""Finite algebras, lazily represented products, and subalgebra generation."""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels, config
from .errors import (
    ArityError,
    BudgetError,
    EmptyGenerationError,
    IndexRangeError,
    InputError,
    SignatureMismatchError,
    UnknownSymbolError,
)
from .terms import App, Term, Var


@dataclass(frozen=True)
class Signature:
    name: str
    ops: tuple  # ((symbol, arity), ...)

    def __post_init__(self):
        ops = tuple((str(s), int(a)) for s, a in self.ops)
        object.__setattr__(self, "ops", ops)
        syms = [s for s, _ in ops]
        if len(set(syms)) != len(syms):
            raise InputError(f"duplicate operation symbols in signature {self.name}")
        if any(a < 0 for _, a in ops):
            raise InputError("arities must be nonnegative")

    @functools.cached_property
    def _arity(self):
        return dict(self.ops)

    @property
    def symbols(self):
        return tuple(s for s, _ in self.ops)

    def arity(self, symbol):
        try:
            return self._arity[symbol]
        except KeyError:
            raise UnknownSymbolError(f"unknown operation symbol {symbol!r}") from None

    def has_constants(self):
        return any(a == 0 for _, a in self.ops)

    def compatible(self, other):
        return self.ops == other.ops


class FiniteAlgebra:
    """A finite carrier {0..size-1} with one full table per operation.

    Equality and hashing are by table content (the name is a label only).
    """

    def __init__(self, signature: Signature, size: int, tables, name: str = ""):
        if size < 1:
            raise InputError("algebras must be nonempty")
        self.signature = signature
        self.size = int(size)
        self.name = name
        self._tables = {}
        for sym, arity in signature.ops:
            if sym not in tables:
                raise InputError(f"missing table for {sym!r}")
            t = np.array(tables[sym], dtype=np.int32)
            if t.shape != (self.size,) * arity:
                raise InputError(
                    f"table for {sym!r} has shape {t.shape}, expected {(self.size,) * arity}"
                )
            if t.size and (t.min() < 0 or t.max() >= self.size):
                raise IndexRangeError(f"table for {sym!r} has entries outside [0, {self.size})")
            t.setflags(write=False)
            self._tables[sym] = t
        extra = set(tables) - set(signature.symbols)
        if extra:
            raise UnknownSymbolError(f"tables for unknown symbols {sorted(extra)}")
        self._key = (
            signature.ops,
            self.size,
            tuple(self._tables[s].tobytes() for s in signature.symbols),
        )

    def table(self, symbol) -> np.ndarray:
        try:
            return self._tables[symbol]
        except KeyError:
            raise UnknownSymbolError(f"unknown operation symbol {symbol!r}") from None

    @property
    def tables(self):
        return dict(self._tables)

    def check_index(self, a):
        if not 0 <= a < self.size:
            raise IndexRangeError(f"element {a} outside [0, {self.size})")

    def renamed(self, name):
        return FiniteAlgebra(self.signature, self.size, self._tables, name)

    def __eq__(self, other):
        return isinstance(other, FiniteAlgebra) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"FiniteAlgebra({self.name or '?'}, size={self.size}, sig={self.signature.name})"


def apply_op(A: FiniteAlgebra, symbol: str, args: Sequence[int]) -> int:
    arity = A.signature.arity(symbol)
    if len(args) != arity:
        raise ArityError(f"{symbol} expects {arity} arguments, got {len(args)}")
    for a in args:
        A.check_index(a)
    return int(A.table(symbol)[tuple(args)])


def _require_same_signature(*algebras):
    first = algebras[0].signature
    for B in algebras[1:]:
        if not first.compatible(B.signature):
            raise SignatureMismatchError(
                f"signatures {first.name} and {B.signature.name} differ"
            )


def is_homomorphism(A: FiniteAlgebra, B: FiniteAlgebra, f) -> bool:
    """Exhaustive check of f(w_A(a...)) == w_B(f(a)...) for every operation."""
    _require_same_signature(A, B)
    f = np.asarray(f, dtype=np.int64)
    if f.shape != (A.size,):
        raise InputError("map must be total on the source carrier")
    if f.size and (f.min() < 0 or f.max() >= B.size):
        raise IndexRangeError("map leaves the target carrier")
    for sym, arity in A.signature.ops:
        TA, TB = A.table(sym), B.table(sym)
        if arity == 0:
            if f[TA[()]] != TB[()]:
                return False
        elif not np.array_equal(f[TA], TB[np.ix_(*([f] * arity))]):
            return False
    return True


def direct_product(A: FiniteAlgebra, B: FiniteAlgebra, name: str = "") -> FiniteAlgebra:
    """A x B with pairs (a, b) encoded as a * |B| + b."""
    _require_same_signature(A, B)
    tables = {}
    for sym, arity in A.signature.ops:
        grid = np.indices((A.size * B.size,) * arity).reshape(arity, -1) if arity else None
        if arity == 0:
            tables[sym] = int(A.table(sym)[()]) * B.size + int(B.table(sym)[()])
            continue
        ia, ib = grid // B.size, grid % B.size
        va = A.table(sym)[tuple(ia)]
        vb = B.table(sym)[tuple(ib)]
        tables[sym] = (va * B.size + vb).reshape((A.size * B.size,) * arity)
    return FiniteAlgebra(A.signature, A.size * B.size, tables, name or f"{A.name}x{B.name}")


def trivial_algebra(signature: Signature, name="1") -> FiniteAlgebra:
    tables = {sym: np.zeros((1,) * arity, np.int32) for sym, arity in signature.ops}
    return FiniteAlgebra(signature, 1, tables, name)


# --- packed tables for componentwise evaluation ---------------------------------


@functools.lru_cache(maxsize=256)
def _pack(context: tuple):
    sig = context[0].signature
    radix = max(A.size for A in context)
    offsets, arities, chunks = [], [], []
    total = 0
    for sym, arity in sig.ops:
        offsets.append(total)
        arities.append(arity)
        width = radix**arity
        block = np.zeros((len(context), width), np.int32)
        for c, A in enumerate(context):
            t = A.table(sym)
            if arity == 0:
                block[c, 0] = t[()]
            else:
                padded = np.zeros((radix,) * arity, np.int32)
                padded[(slice(0, A.size),) * arity] = t
                block[c] = padded.reshape(-1)
        chunks.append(block)
        total += width
    big = np.ascontiguousarray(np.concatenate(chunks, axis=1)) if chunks else np.zeros(
        (len(context), 0), np.int32
    )
    return big, np.array(offsets, np.int64), np.array(arities, np.int64), radix


class RowIndex:
    """Exact lookup of tuples (rows) among a fixed set of rows."""

    def __init__(self, rows: np.ndarray):
        self.rows = np.ascontiguousarray(rows, dtype=np.int32)
        self._map = {r.tobytes(): i for i, r in enumerate(self.rows)}

    def lookup(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int32)
        if rows.ndim == 1:
            rows = rows.reshape(1, -1)
        rows = np.ascontiguousarray(rows)
        get = self._map.get
        return np.fromiter((get(r.tobytes(), -1) for r in rows), dtype=np.int64, count=len(rows))

    def __len__(self):
        return len(self.rows)


@dataclass(eq=False)
class SubalgebraClosure:
    """Subalgebra of a product generated by tuples, with one derivation per element.

    ``rows[i]`` is element i (BFS discovery order, generators first);
    ``parent_op[i]`` is -1 for generators (``parent_args[i, 0]`` is then the
    generator position) or the operation index that first produced it.
    """

    signature: Signature
    context: tuple
    generators: np.ndarray
    rows: np.ndarray
    parent_op: np.ndarray
    parent_args: np.ndarray
    depth: np.ndarray
    _witness: list = field(default=None, repr=False)
    _index: RowIndex = field(default=None, repr=False)

    def __len__(self):
        return len(self.rows)

    @property
    def elements(self):
        return [tuple(int(v) for v in r) for r in self.rows]

    @property
    def index(self) -> RowIndex:
        if self._index is None:
            self._index = RowIndex(self.rows)
        return self._index

    def index_of(self, row) -> int:
        return int(self.index.lookup(np.asarray(row).reshape(1, -1))[0])

    def generator_elements(self) -> np.ndarray:
        return self.index.lookup(self.generators)

    @property
    def witnesses(self) -> list:
        if self._witness is None:
            ops = self.signature.ops
            out = []
            for i in range(len(self.rows)):
                o = int(self.parent_op[i])
                if o < 0:
                    out.append(Var(int(self.parent_args[i, 0]) + 1))
                else:
                    sym, arity = ops[o]
                    out.append(App(sym, tuple(out[j] for j in self.parent_args[i, :arity])))
            self._witness = out
        return self._witness

    def witness(self, i) -> Term:
        return self.witnesses[i]

    def replay(self, algebra: FiniteAlgebra, gen_values) -> np.ndarray:
        """Evaluate every witness term in ``algebra`` at many points at once.

        ``gen_values`` has one row per generator and one column per point; the
        result has one row per element.
        """
        gen_values = np.asarray(gen_values, dtype=np.int32)
        m = gen_values.shape[1]
        ops = self.signature.ops
        out = np.empty((len(self.rows), m), np.int32)
        for i in range(len(self.rows)):
            o = int(self.parent_op[i])
            if o < 0:
                out[i] = gen_values[self.parent_args[i, 0]]
            else:
                sym, arity = ops[o]
                table = algebra.table(sym)
                if arity == 0:
                    out[i] = table[()]
                else:
                    out[i] = table[tuple(out[j] for j in self.parent_args[i, :arity])]
        return out

    def to_algebra(self, name: str = "") -> FiniteAlgebra:
        """The generated subalgebra as a standalone algebra on 0..len-1."""
        n = len(self.rows)
        if not self.context:
            return trivial_algebra(self.signature, name)
        big, off, arity, radix = _pack(self.context)
        k = self.rows.shape[1]
        comp = np.arange(k)
        tables = {}
        for o, (sym, a) in enumerate(self.signature.ops):
            if a == 0:
                row = big[comp, off[o]]
                tables[sym] = int(self.index.lookup(row[None, :])[0])
                continue
            args = np.indices((n,) * a).reshape(a, -1).T
            flat = np.zeros((len(args), k), np.int64)
            for j in range(a):
                flat = flat * radix + self.rows[args[:, j]]
            res = big[comp, off[o] + flat]
            idx = self.index.lookup(res)
            tables[sym] = idx.reshape((n,) * a)
        return FiniteAlgebra(self.signature, n, tables, name)


def _as_rows(context, tuples) -> np.ndarray:
    k = len(context)
    rows = np.asarray(tuples, dtype=np.int64).reshape(-1, k) if len(tuples) else np.zeros((0, k), np.int64)
    for c, A in enumerate(context):
        col = rows[:, c]
        if col.size and (col.min() < 0 or col.max() >= A.size):
            raise IndexRangeError(f"tuple component {c} outside [0, {A.size})")
    return rows.astype(np.int32)


def generate_subalgebra(
    context: Sequence[FiniteAlgebra], generators, element_budget: int | None = None
) -> SubalgebraClosure:
    """Least subset of the product closed under componentwise operations."""
    context = tuple(context)
    if not context:
        raise InputError("empty product context; use a zero-width generator list instead")
    _require_same_signature(*context)
    gens = _as_rows(context, generators)
    sig = context[0].signature
    if len(gens) == 0 and not sig.has_constants():
        raise EmptyGenerationError("no generators and no constants")
    big, off, arity, radix = _pack(context)
    limit = config.element_budget(element_budget)
    rows, pop, pargs, depth, status = _kernels.close_rows(gens, big, off, arity, radix, limit)
    if status:
        raise BudgetError(f"generated subalgebra exceeds the element budget {limit}")
    return SubalgebraClosure(sig, context, gens, rows, pop, pargs, depth)


def generate_point(signature: Signature, n_generators: int) -> SubalgebraClosure:
    """Generation inside the empty product (one-element algebra)."""
    if n_generators == 0 and not signature.has_constants():
        raise EmptyGenerationError("no generators and no constants")
    maxar = max([1] + [a for _, a in signature.ops])
    if n_generators:
        pop, pargs = np.array([-1], np.int32), np.zeros((1, maxar), np.int32)
    else:
        first_const = next(i for i, (_, a) in enumerate(signature.ops) if a == 0)
        pop, pargs = np.array([first_const], np.int32), np.zeros((1, maxar), np.int32)
    return SubalgebraClosure(
        signature,
        (),
        np.zeros((n_generators, 0), np.int32),
        np.zeros((1, 0), np.int32),
        pop,
        pargs,
        np.zeros(1, np.int32),
    )


@dataclass
class FunctionalVerdict:
    functional: bool
    closure: SubalgebraClosure
    split: int
    mapping: dict | None = None
    violation: tuple | None = None  # (element_i, element_j, witness_i, witness_j)

    def image_of(self, a_tuple):
        return self.mapping[tuple(a_tuple)]


def graph_functional(context_a, context_b, seeds, element_budget=None) -> FunctionalVerdict:
    """Does the subalgebra generated by seed pairs define a map A-part -> B-part?"""
    context_a, context_b = tuple(context_a), tuple(context_b)
    ka = len(context_a)
    gens = [tuple(a) + tuple(b) for a, b in seeds]
    closure = generate_subalgebra(context_a + context_b, gens, element_budget)
    rows = closure.rows
    first = {}
    mapping = {}
    for i, r in enumerate(rows):
        key = r[:ka].tobytes()
        j = first.get(key)
        if j is None:
            first[key] = i
            mapping[tuple(int(v) for v in r[:ka])] = tuple(int(v) for v in r[ka:])
        elif not np.array_equal(rows[j, ka:], r[ka:]):
            w = closure.witnesses
            return FunctionalVerdict(False, closure, ka, violation=(j, i, w[j], w[i]))
    return FunctionalVerdict(True, closure, ka, mapping=mapping)
