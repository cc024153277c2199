"""The bidual of a finite-dimensional algebra and its two Arens products.

Functionals ``rho`` in R* are coordinate tuples ``(rho(a_0), ..., rho(a_{n-1}))``;
elements of R** are coordinate tuples with respect to the double-dual basis,
so the canonical embedding of R is the identity on coordinates.  The products
are nevertheless assembled from the dual actions, never read off the table.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Mapping, Sequence

from gmpy2 import mpq

from .algebra import LEFT, StructureAlgebra, opposite, require_valid
from .duality import dual_module
from .errors import BadLevel, DimensionMismatch
from .exactmath import Matrix, Subspace, mat_rank
from .modules import bicommutant, commutant, regular_module


def _check(a: StructureAlgebra, *vecs):
    for v in vecs:
        if len(v) != a.dim:
            raise DimensionMismatch(f"vector of length {len(v)} for an algebra of dimension {a.dim}")


def _reduce(a: StructureAlgebra, out):
    p = a.field.p
    return tuple(v % p for v in out) if p else tuple(mpq(v) for v in out)


def dual_actions(a: StructureAlgebra, s: Sequence, rho: Sequence) -> tuple[tuple, tuple]:
    """``(rho s, s rho)`` for ``s`` in R** and ``rho`` in R*.

    ``<r, rho s> = <s, r rho>`` and ``<r, s rho> = <s, rho r>``, where
    ``<x, r rho> = rho(x r)`` and ``<x, rho r> = rho(r x)``.
    """
    _check(a, s, rho)
    n = a.dim
    right = [0] * n  # (rho s)_i = sum_l s_l rho(a_l a_i)
    left = [0] * n  # (s rho)_i = sum_l s_l rho(a_i a_l)
    for (i, j), row in a.mu.items():
        val = 0
        for k, c in row.items():
            r = rho[k]
            if r:
                val += c * r
        if not val:
            continue
        if s[i]:
            right[j] += s[i] * val
        if s[j]:
            left[i] += s[j] * val
    return _reduce(a, right), _reduce(a, left)


def _pair(a, s, rho):
    total = sum((x * y for x, y in zip(s, rho) if x and y), a.field.zero)
    return total % a.field.p if a.field.p else total


def arens_products(a: StructureAlgebra, s: Sequence, t: Sequence) -> tuple[tuple, tuple]:
    """The first and second Arens products ``(s . t, s <> t)``.

    ``<s . t, rho> = <s, t rho>`` and ``<s <> t, rho> = <t, rho s>``, evaluated
    on the dual basis.
    """
    _check(a, s, t)
    n = a.dim
    first, second = [], []
    for k in range(n):
        lam = a.basis_vector(k)
        _, t_lam = dual_actions(a, t, lam)
        lam_s, _ = dual_actions(a, s, lam)
        first.append(_pair(a, s, t_lam))
        second.append(_pair(a, t, lam_s))
    return tuple(first), tuple(second)


def iota(a: StructureAlgebra, r: Sequence) -> tuple:
    """Canonical embedding R -> R** (the identity on coordinates)."""
    _check(a, r)
    return tuple(a.field(x) for x in r)


def topological_center(a: StructureAlgebra) -> Subspace:
    """Left topological center ``{s : s . t = s <> t for all t}``.

    The defining condition is linear in ``s``, so it is the kernel of
    ``s -> (s . e_j - s <> e_j)_j``.
    """
    require_valid(a)
    n, f = a.dim, a.field
    # column i of the system is the image of s = e_i
    cols = []
    for i in range(n):
        e_i = a.basis_vector(i)
        col = []
        for j in range(n):
            st, sd = arens_products(a, e_i, a.basis_vector(j))
            col.extend(x - y for x, y in zip(st, sd))
        cols.append(tuple(v % f.p for v in col) if f.p else tuple(col))
    return Matrix.from_columns(f, cols, n * n).kernel()


def right_topological_center(a: StructureAlgebra) -> Subspace:
    """``{t : s . t = s <> t for all s}``, computed as the left center of the opposite algebra."""
    return topological_center(opposite(a))


@dataclass(frozen=True)
class CrossCheckReport:
    biend_dim: int
    center_image_dim: int
    biend_equals_center_image: bool
    lend_dim: int
    left_mult_dim: int
    lend_equals_left_mults: bool

    @property
    def ok(self) -> bool:
        return self.biend_equals_center_image and self.lend_equals_left_mults

    def to_json(self) -> dict:
        return {
            "biend_dim": self.biend_dim,
            "center_image_dim": self.center_image_dim,
            "biend_equals_center_image": self.biend_equals_center_image,
            "lend_dim": self.lend_dim,
            "left_mult_dim": self.left_mult_dim,
            "lend_equals_left_mults": self.lend_equals_left_mults,
        }


def _action_operator(a: StructureAlgebra, s: Sequence, right: bool) -> Matrix:
    """Matrix of ``rho -> rho s`` (right) or ``rho -> s rho`` on R*."""
    idx = 0 if right else 1
    cols = [dual_actions(a, s, a.basis_vector(j))[idx] for j in range(a.dim)]
    return Matrix.from_columns(a.field, cols, a.dim)


def biend_of_dual(a: StructureAlgebra) -> CrossCheckReport:
    """Compare Biend_R(R*) with right multiplications by the topological center.

    The first side comes from the commutant solver on the dual of the regular
    module, the second from the Arens products; both are operator subspaces
    on R*.  The commutant Lend_R(R*) is compared with left multiplications by
    R** in the same way.
    """
    require_valid(a)
    n, f = a.dim, a.field
    dual = dual_module(regular_module(a, LEFT)).module
    comm = commutant(dual)
    biend = bicommutant(dual, comm).biend.subspace
    center = topological_center(a)
    image = Subspace.span(f, n * n, (_action_operator(a, s, True).vec() for s in center.basis))
    lefts = Subspace.span(f, n * n, (_action_operator(a, a.basis_vector(i), False).vec() for i in range(n)))
    return CrossCheckReport(biend.dim, image.dim, biend == image, comm.subspace.dim, lefts.dim,
                            comm.subspace == lefts)


def rank_map(a: StructureAlgebra, rho: Sequence) -> Matrix:
    """``[rho(a_i a_j)]_{i,j}``."""
    _check(a, rho)
    f, n = a.field, a.dim
    rows = [[0] * n for _ in range(n)]
    for (i, j), row in a.mu.items():
        val = 0
        for k, c in row.items():
            if rho[k]:
                val += c * rho[k]
        rows[i][j] = val
    if f.p:
        rows = [[v % f.p for v in r] for r in rows]
    else:
        rows = [[mpq(v) for v in r] for r in rows]
    return Matrix._raw(f, tuple(tuple(r) for r in rows), n)


def translate_span_dim(a: StructureAlgebra, rho: Sequence) -> int:
    """dim(R rho), spanned by the translates ``a_i rho`` obtained from the dual actions."""
    _check(a, rho)
    vecs = (dual_actions(a, a.basis_vector(i), rho)[1] for i in range(a.dim))
    return Subspace.span(a.field, a.dim, vecs).dim


# ---------------------------------------------------------------------------
# normal extensions of bilinear forms


@dataclass(frozen=True)
class BilinearForm:
    """A bilinear form ``theta(x_i, y_j) = matrix[i][j]``, or a tower of them.

    ``levels`` maps a level to its matrix; alternatively ``builder`` produces
    the matrix on demand.
    """

    levels: Mapping[int, Matrix] = dc_field(default_factory=dict)
    builder: Callable[[int], Matrix] | None = None

    def at(self, level: int) -> Matrix:
        if level in self.levels:
            return self.levels[level]
        if self.builder is None:
            raise BadLevel(f"bilinear form undefined at level {level!r}")
        return self.builder(level)


EXTENDS, DOES_NOT_EXTEND, INCONCLUSIVE = "Extends", "DoesNotExtend", "Inconclusive"


@dataclass(frozen=True)
class ExtensionVerdict:
    kind: str
    levels: tuple
    ranks: tuple
    bound: int | None = None

    def to_json(self) -> dict:
        out = {"kind": self.kind, "levels": list(self.levels), "ranks": list(self.ranks)}
        if self.bound is not None:
            out["bound"] = self.bound
        return out


def normal_extension_check(theta: BilinearForm | Callable[[int], Matrix], levels: Sequence[int]) -> ExtensionVerdict:
    """Over a field, the form extends normally iff the row map has finite-dimensional image.

    Across a truncation tower that means bounded rank.  Ranks that strictly
    increase at every tested level give DoesNotExtend, ranks equal on the two
    largest levels give Extends with the observed maximum, anything else is
    Inconclusive.
    """
    if not isinstance(theta, BilinearForm):
        theta = BilinearForm(builder=theta)
    levels = list(levels)
    if any(not isinstance(n, int) or n < 0 for n in levels):
        raise BadLevel(f"invalid level list {levels!r}")
    if levels != sorted(set(levels)):
        raise BadLevel("levels must be strictly increasing")
    ranks = tuple(mat_rank(theta.at(n)) for n in levels)
    if len(ranks) >= 2 and all(x < y for x, y in zip(ranks, ranks[1:])):
        return ExtensionVerdict(DOES_NOT_EXTEND, tuple(levels), ranks)
    if len(ranks) >= 2 and ranks[-1] == ranks[-2]:
        return ExtensionVerdict(EXTENDS, tuple(levels), ranks, max(ranks))
    return ExtensionVerdict(INCONCLUSIVE, tuple(levels), ranks)
