"""Shared algebra and module corpora for the test suite."""

from __future__ import annotations

import random

from arensalg.algebra import (
    construct_from_generators,
    matrix_algebra,
    polynomial_truncation,
    unitization_square_zero,
)
from arensalg.exactmath import GF, QQ, Matrix
from arensalg.modules import RModule, cyclic_submodule, free_module, regular_module

F5 = GF(5)
F2 = GF(2)


def random_generated_algebra(field, rng, lo=2, hi=6):
    """A subalgebra of M_d generated by one or two random matrices, with dim in [lo, hi]."""
    while True:
        d = rng.choice((2, 3))
        ngens = rng.choice((1, 1, 2))
        gens = []
        for g in range(ngens):
            rows = [[field.random(rng, 2) for _ in range(d)] for _ in range(d)]
            if ngens == 2:
                # upper triangular pairs keep the generated algebra small
                rows = [[v if c >= r else field.zero for c, v in enumerate(row)] for r, row in enumerate(rows)]
            gens.append(Matrix(field, rows, d))
        sub = construct_from_generators(field, gens, d)
        if lo <= sub.algebra.dim <= hi:
            return sub


def generated_corpus(count=52, seed=2024):
    """``count`` generated algebras, alternating between QQ and F_5."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        field = QQ if i % 2 == 0 else F5
        target = 2 + (i // 2) % 5  # cycle the dimension through 2..6
        out.append(random_generated_algebra(field, rng, target, target).algebra)
    return out


def unit_matrix(field, d, i, j):
    return Matrix(field, [[field.one if (r, c) == (i, j) else field.zero for c in range(d)] for r in range(d)], d)


def upper_triangular(field, d=2):
    units = []
    for i in range(d):
        for j in range(i, d):
            units.append(Matrix(field, [[field.one if (r, c) == (i, j) else field.zero for c in range(d)]
                                        for r in range(d)], d))
    return construct_from_generators(field, units, d)


def named_algebras():
    return {
        "F": matrix_algebra(QQ, 1),
        "M2(Q)": matrix_algebra(QQ, 2),
        "M2(F5)": matrix_algebra(F5, 2),
        "T2(Q)": upper_triangular(QQ).algebra,
        "Q[x]/(x^2)": polynomial_truncation(QQ, 2),
        "F5[x]/(x^3)": polynomial_truncation(F5, 3),
        "unitization4(Q)": unitization_square_zero(QQ, 4),
    }


def natural_module(sub):
    """The column module F^d of a matrix subalgebra."""
    return RModule(sub.algebra, list(sub.embedding), dim=sub.embedding[0].rows)


def zero_module_poly(field):
    """The 1-dimensional module of F[x]/(x^2) on which x acts by 0."""
    a = polynomial_truncation(field, 2)
    return RModule(a, [Matrix.identity(field, 1), Matrix(field, [[0]], 1)])


def idempotent_summands(a, sub=None):
    """Cyclic left ideals R e for diagonal matrix-unit idempotents e of a matrix subalgebra."""
    out = []
    if sub is None:
        return out
    d = sub.embedding[0].rows
    f = a.field
    for i in range(d):
        target = Matrix(f, [[f.one if r == c == i else f.zero for c in range(d)] for r in range(d)], d)
        coords = sub.coordinates(target) if hasattr(sub, "coordinates") else None
        if coords is not None:
            out.append(cyclic_submodule(regular_module(a), coords))
    return out


def module_corpus():
    """(label, left module) pairs: free modules, projective summands, simple modules and non-examples."""
    out = []
    for name, a in named_algebras().items():
        if a.dim <= 4:
            out.append((f"{name} regular", regular_module(a)))
            out.append((f"{name} free^2", free_module(a, 2)))
    for field in (QQ, F5):
        m2 = construct_from_generators(field, [Matrix(field, [[1 if (r, c) == (i, j) else 0 for c in range(2)]
                                                              for r in range(2)], 2)
                                               for i in range(2) for j in range(2)], 2)
        out.append((f"F^2 over M2({field})", natural_module(m2)))
        for k, m in enumerate(idempotent_summands(m2.algebra, m2)):
            out.append((f"M2({field}) e{k + 1}{k + 1}", m))
    t2 = upper_triangular(QQ)
    out.append(("F^2 over T2", natural_module(t2)))
    for k, m in enumerate(idempotent_summands(t2.algebra, t2)):
        out.append((f"T2 e{k + 1}{k + 1}", m))
    out.append(("x->0 over Q[x]/(x^2)", zero_module_poly(QQ)))
    out.append(("x->0 over F5[x]/(x^2)", zero_module_poly(F5)))
    scalars = matrix_algebra(QQ, 1)
    out.append(("F^2 over F", RModule(scalars, [Matrix.identity(QQ, 2)], dim=2)))
    return out
