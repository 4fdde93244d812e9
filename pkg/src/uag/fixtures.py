"""Small named algebras and word systems used throughout examples and tests."""
import itertools

import numpy as np

from .algebra import FiniteAlgebra, Signature, direct_product, trivial_algebra
from .terms import App, Var

GRP = Signature("Grp", (("e", 0), ("inv", 1), ("mul", 2)))
SGR = Signature("Sgr", (("mul", 2),))

x1, x2 = Var(1), Var(2)


def mul(a, b):
    return App("mul", (a, b))


def inv(a):
    return App("inv", (a,))


E = App("e")


def group_from_elements(elements, op, name):
    """Cayley tables of a finite group listed with its identity first."""
    index = {g: i for i, g in enumerate(elements)}
    n = len(elements)
    table = np.array([[index[op(a, b)] for b in elements] for a in elements], np.int32)
    inverse = np.array([int(np.nonzero(table[i] == 0)[0][0]) for i in range(n)], np.int32)
    return FiniteAlgebra(GRP, n, {"e": 0, "inv": inverse, "mul": table}, name)


def cyclic(n):
    return group_from_elements(list(range(n)), lambda a, b: (a + b) % n, f"Z{n}")


def symmetric3():
    perms = sorted(itertools.permutations(range(3)))
    return group_from_elements(perms, lambda p, q: tuple(p[q[i]] for i in range(3)), "S3")


def _qmul(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return (
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


def quaternion8():
    units = [(1, 0, 0, 0), (-1, 0, 0, 0), (0, 1, 0, 0), (0, -1, 0, 0),
             (0, 0, 1, 0), (0, 0, -1, 0), (0, 0, 0, 1), (0, 0, 0, -1)]
    return group_from_elements(units, _qmul, "Q8")


def left_zero(n=2):
    return FiniteAlgebra(SGR, n, {"mul": [[a] * n for a in range(n)]}, f"LZ{n}")


def right_zero(n=2):
    return FiniteAlgebra(SGR, n, {"mul": [list(range(n))] * n}, f"RZ{n}")


def semilattice2():
    return FiniteAlgebra(SGR, 2, {"mul": [[0, 0], [0, 1]]}, "S2")


Z2 = cyclic(2)
Z3 = cyclic(3)
S3 = symmetric3()
Q8 = quaternion8()
LZ2 = left_zero()
RZ2 = right_zero()
S2 = semilattice2()
TRIVIAL_GRP = trivial_algebra(GRP, "1")
RECT22 = direct_product(LZ2, RZ2, "LZ2xRZ2")


def commutator(a, b):
    """(a, b) = a^-1 b^-1 a b."""
    return mul(mul(inv(a), inv(b)), mul(a, b))


def word_identity(sig):
    from .verbal import WordSystem

    return WordSystem(sig, {s: App(s, tuple(Var(i + 1) for i in range(a))) for s, a in sig.ops})


def word_opposite(sig):
    """mul(x1, x2) -> mul(x2, x1); every other symbol unchanged."""
    from .verbal import WordSystem

    words = {s: App(s, tuple(Var(i + 1) for i in range(a))) for s, a in sig.ops}
    words["mul"] = mul(x2, x1)
    return WordSystem(sig, words, name="Wop")


def word_group_twist():
    """mul(x1, x2) -> x1 x2 (x2, x1)^2 in the group signature."""
    from .verbal import WordSystem

    c = commutator(x2, x1)
    return WordSystem(GRP, {"e": E, "inv": inv(x1), "mul": mul(mul(x1, x2), mul(c, c))}, name="Wgrp")


ALL = {a.name: a for a in (Z2, Z3, S3, Q8, LZ2, RZ2, S2, TRIVIAL_GRP, RECT22)}
