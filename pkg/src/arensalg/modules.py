"""Modules over structure-constant algebras given by action matrices.

Hom spaces are solved as intertwining systems ``f X_i = Y_i f``; commutants and
bicommutants are Hom spaces of a module with itself.  Operators are stored as
matrices acting on column coordinates, whatever side the module is on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

from .algebra import (
    LEFT,
    RIGHT,
    TWO_SIDED,
    IdealBasis,
    StructureAlgebra,
    ValidationReport,
    algebra_from_json,
    is_ideal,
    opposite,
    require_valid,
)
from .errors import DimensionMismatch, SideMismatch
from .exactmath import Field, Matrix, Subspace, combine, mat_rank, solve_linear

# Endomorphisms act on the right of elements, so the ring product of the
# commutant is composition in reverse order: (f * g)(x) = g(f(x)).
REVERSE_COMPOSITION = "reverse_composition"


class RModule:
    """A left or right module: ``action[i]`` is the operator of basis element ``a_i``.

    For a right module the operators compose in reverse: ``A_j A_i = A_{a_i a_j}``.
    """

    def __init__(self, algebra: StructureAlgebra, action: Sequence[Matrix], side: str = LEFT, dim: int | None = None):
        if side not in (LEFT, RIGHT):
            raise ValueError(f"module side must be {LEFT!r} or {RIGHT!r}")
        if len(action) != algebra.dim:
            raise DimensionMismatch(f"{len(action)} action matrices for an algebra of dimension {algebra.dim}")
        if dim is None:
            dim = action[0].rows
        for m in action:
            if m.shape != (dim, dim):
                raise DimensionMismatch(f"action matrix of shape {m.shape}, expected {(dim, dim)}")
            if m.field != algebra.field:
                raise DimensionMismatch("action matrix over a different field")
        self.algebra = algebra
        self.action = tuple(action)
        self.side = side
        self.dim = dim

    @property
    def field(self) -> Field:
        return self.algebra.field

    def __repr__(self):
        return f"RModule({self.side}, dim={self.dim}, over {self.algebra!r})"

    def act(self, r: Sequence) -> Matrix:
        """Operator of the algebra element with coordinates ``r``."""
        f = self.field
        m = self.dim
        vec = combine(f, r, [A.vec() for A in self.action], m * m)
        return Matrix.from_vec(f, vec, m, m)

    @cached_property
    def image_subspace(self) -> Subspace:
        """span of the action operators, as vectorized m x m matrices."""
        return Subspace.span(self.field, self.dim * self.dim, (A.vec() for A in self.action))

    def to_json(self, inline_algebra: bool = True) -> dict:
        return {
            "algebra": self.algebra.to_json(),
            "dim": self.dim,
            "side": self.side.lower(),
            "action": [A.to_json() for A in self.action],
        }


def module_from_json(obj, base_dir: Path | None = None) -> RModule:
    if isinstance(obj, (str, Path)):
        path = Path(obj)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        base_dir = path.parent
        with open(path) as fh:
            obj = json.load(fh)
    alg = algebra_from_json(obj["algebra"], base_dir)
    side = {"left": LEFT, "right": RIGHT}.get(str(obj.get("side", "left")).lower())
    if side is None:
        raise ValueError(f"module side must be 'left' or 'right', got {obj.get('side')!r}")
    f = alg.field
    action = [Matrix(f, [[f.parse(str(x)) for x in row] for row in mat], obj["dim"]) for mat in obj["action"]]
    return RModule(alg, action, side, obj["dim"])


def validate_module(u: RModule) -> ValidationReport:
    """Representation property on all basis pairs and unit acting as identity."""
    a = u.algebra
    fails = []
    for i in range(a.dim):
        for j in range(a.dim):
            prod = a.product(i, j)
            target = u.act(tuple(prod.get(k, a.field.zero) for k in range(a.dim)))
            lhs = u.action[i] @ u.action[j] if u.side == LEFT else u.action[j] @ u.action[i]
            if lhs != target:
                fails.append((i, j))
    unit_fails = []
    if u.act(a.unit) != Matrix.identity(u.field, u.dim):
        unit_fails.append("unit does not act as the identity")
    return ValidationReport(valid=not fails and not unit_fails, unit_failures=unit_fails,
                            representation_failures=fails)


def regular_module(a: StructureAlgebra, side: str = LEFT) -> RModule:
    require_valid(a)
    action = a.left_regular if side == LEFT else a.right_regular
    return RModule(a, action, side, a.dim)


def direct_sum(*mods: RModule) -> RModule:
    if not mods:
        raise ValueError("need at least one summand")
    a, side = mods[0].algebra, mods[0].side
    for u in mods[1:]:
        if u.side != side:
            raise SideMismatch("summands on different sides")
        if u.algebra != a:
            raise DimensionMismatch("summands over different algebras")
    f = a.field
    total = sum(u.dim for u in mods)
    action = []
    for i in range(a.dim):
        rows = []
        off = 0
        for u in mods:
            for r in u.action[i].data:
                rows.append((f.zero,) * off + tuple(r) + (f.zero,) * (total - off - u.dim))
            off += u.dim
        action.append(Matrix._raw(f, tuple(rows), total))
    return RModule(a, action, side, total)


def free_module(a: StructureAlgebra, k: int, side: str = LEFT) -> RModule:
    """R^k."""
    return direct_sum(*([regular_module(a, side)] * k))


def submodule(u: RModule, s: Subspace) -> RModule:
    """Restriction of the action to an invariant subspace, in its echelon basis."""
    if s.ambient_dim != u.dim:
        raise DimensionMismatch("subspace lives in the wrong ambient space")
    action = []
    for A in u.action:
        cols = [s.coordinates(A.apply(b)) for b in s.basis]
        action.append(Matrix.from_columns(u.field, cols, s.dim))
    return RModule(u.algebra, action, u.side, s.dim)


def cyclic_submodule(u: RModule, x: Sequence) -> RModule:
    """``R x`` (left) or ``x R`` (right)."""
    return submodule(u, Subspace.span(u.field, u.dim, (A.apply(x) for A in u.action)))


def as_opposite(u: RModule) -> RModule:
    """A right R-module viewed as a left R^op-module (and vice versa), same operators."""
    return RModule(opposite(u.algebra), u.action, LEFT if u.side == RIGHT else RIGHT, u.dim)


# ---------------------------------------------------------------------------
# intertwiners


def intertwiners(field: Field, src_dim: int, dst_dim: int, pairs) -> list[Matrix]:
    """Canonical basis of ``{f : f X = Y f for every (X, Y) in pairs}`` (f is dst x src).

    The first constraint is solved on the full matrix space; every later one
    only on the current solution space, which shrinks quickly.
    """
    p = field.p
    m, q = src_dim, dst_dim
    N = m * q
    pairs = list(pairs)
    basis: list[tuple] | None = None  # vectorized candidate maps
    for X, Y in pairs:
        if basis is None:
            rows = []
            Xd, Yd = X.data, Y.data
            for r in range(q):
                for c in range(m):
                    # (f X - Y f)[r][c]
                    row = [0] * N
                    for s in range(m):
                        x = Xd[s][c]
                        if x:
                            row[r * m + s] += x
                    for s in range(q):
                        y = Yd[r][s]
                        if y:
                            row[s * m + c] -= y
                    rows.append([v % p for v in row] if p else row)
            ker = Matrix(field, rows, N).kernel()
            basis = list(ker.basis)
        else:
            if not basis:
                break
            cols = []
            for v in basis:
                F = Matrix.from_vec(field, v, q, m)
                cols.append(((F @ X) - (Y @ F)).vec())
            sys_ = Matrix.from_columns(field, cols, N)
            ker = sys_.kernel()
            basis = [combine(field, c, basis, N) for c in ker.basis]
    if basis is None:
        basis = list(Subspace.full(field, N).basis)
    canon = Subspace.span(field, N, basis)
    return [Matrix.from_vec(field, v, q, m) for v in canon.basis]


@dataclass(frozen=True)
class HomBasis:
    source: RModule
    target: RModule
    maps: tuple

    @property
    def dim(self) -> int:
        return len(self.maps)

    def subspace(self) -> Subspace:
        return Subspace.span(self.source.field, self.source.dim * self.target.dim, (f.vec() for f in self.maps))


def _check_pair(u: RModule, v: RModule):
    if u.side != v.side:
        raise SideMismatch(f"{u.side} vs {v.side} module")
    if u.algebra is not v.algebra and u.algebra != v.algebra:
        raise DimensionMismatch("modules over different algebras")


def hom_space(u: RModule, v: RModule) -> HomBasis:
    """Basis of Hom_R(U, V) as ``v.dim x u.dim`` matrices."""
    _check_pair(u, v)
    maps = intertwiners(u.field, u.dim, v.dim, zip(u.action, v.action))
    return HomBasis(u, v, tuple(maps))


def is_homomorphism(f: Matrix, u: RModule, v: RModule) -> bool:
    if f.shape != (v.dim, u.dim):
        return False
    return all(f @ X == Y @ f for X, Y in zip(u.action, v.action))


class EndoAlgebra:
    """A ring of operators on a module, with its structure constants computed on demand.

    ``inclusion[i]`` is the operator of carrier basis element ``i``; the carrier
    multiplies in ``convention`` order (reverse composition).
    """

    convention = REVERSE_COMPOSITION

    def __init__(self, field: Field, dim: int, operators: Sequence[Matrix]):
        self.field = field
        self.module_dim = dim
        self.inclusion = tuple(operators)
        self.subspace = Subspace.span(field, dim * dim, (o.vec() for o in operators))

    @property
    def dim(self) -> int:
        return len(self.inclusion)

    def contains_operator(self, m: Matrix) -> bool:
        return m.vec() in self.subspace

    def coordinates(self, m: Matrix) -> tuple:
        return self.subspace.coordinates(m.vec())

    @cached_property
    def carrier(self) -> StructureAlgebra:
        f = self.field
        ops = self.inclusion
        entries = []
        for i, Ei in enumerate(ops):
            for j, Ej in enumerate(ops):
                coords = self.coordinates(Ej @ Ei)
                entries.extend((i, j, k, c) for k, c in enumerate(coords) if c)
        unit = self.coordinates(Matrix.identity(f, self.module_dim))
        alg = StructureAlgebra(f, len(ops), entries, unit=unit)
        alg._valid = True
        return alg


def commutant(u: RModule) -> EndoAlgebra:
    """End_R(U)."""
    maps = hom_space(u, u).maps
    return EndoAlgebra(u.field, u.dim, maps)


@dataclass(frozen=True)
class BicommutantResult:
    biend: EndoAlgebra
    commutant: EndoAlgebra
    relation: str  # "equal" | "contains_image" | "differs"

    @property
    def equals_image(self) -> bool:
        return self.relation == "equal"


def bicommutant(u: RModule, comm: EndoAlgebra | None = None) -> BicommutantResult:
    """Biend_R(U) and how it compares with the image of R (as operator subspaces)."""
    if comm is None:
        comm = commutant(u)
    ops = intertwiners(u.field, u.dim, u.dim, ((E, E) for E in comm.inclusion))
    B = EndoAlgebra(u.field, u.dim, ops)
    image = u.image_subspace
    if B.subspace == image:
        rel = "equal"
    elif B.subspace.contains(image):
        rel = "contains_image"
    else:
        rel = "differs"
    return BicommutantResult(B, comm, rel)


# ---------------------------------------------------------------------------
# trace ideal and classification


def trace_ideal(u: RModule) -> IdealBasis:
    """span{ f(x) : x in U, f in Hom_R(U, R) } for a left module."""
    if u.side != LEFT:
        raise SideMismatch("trace ideal is defined here for left modules")
    a = u.algebra
    reg = regular_module(a, LEFT)
    homs = hom_space(u, reg).maps
    values = (f.column(j) for f in homs for j in range(u.dim))
    T = Subspace.span(u.field, a.dim, values)
    if not is_ideal(a, T, TWO_SIDED):
        raise AssertionError("trace ideal failed the two-sided closure check")
    return IdealBasis(T, TWO_SIDED)


@dataclass(frozen=True)
class ModuleFlags:
    faithful: bool
    torsionless: bool
    T_accessible: bool
    generator: bool
    projective: bool
    # some element of the trace ideal acts as the identity on U, equivalently
    # u in T u for every tuple u in U^n
    trace_unital: bool

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in
                ("faithful", "torsionless", "T_accessible", "generator", "projective", "trace_unital")}


def is_faithful(u: RModule) -> bool:
    return u.image_subspace.dim == u.algebra.dim


def classify(u: RModule) -> ModuleFlags:
    if u.side != LEFT:
        raise SideMismatch("classify expects a left module")
    a, f, m = u.algebra, u.field, u.dim
    faithful = is_faithful(u)
    reg = regular_module(a, LEFT)
    homs = hom_space(u, reg).maps
    if m == 0:
        torsionless = True
    elif homs:
        stacked = Matrix._raw(f, tuple(r for h in homs for r in h.data), m)
        torsionless = mat_rank(stacked) == m
    else:
        torsionless = False
    T = Subspace.span(f, a.dim, (h.column(j) for h in homs for j in range(m)))
    tops = [u.act(t) for t in T.basis]
    TU = Subspace.span(f, m, (op.column(j) for op in tops for j in range(m)))
    T_accessible = TU.dim == m
    generator = T.dim == a.dim
    projective = _splits(u, homs)
    if tops:
        sys_ = Matrix.from_columns(f, [op.vec() for op in tops], m * m)
        trace_unital = solve_linear(sys_, Matrix.identity(f, m).vec()) is not None
    else:
        trace_unital = m == 0
    return ModuleFlags(faithful, torsionless, T_accessible, generator, projective, trace_unital)


def _splits(u: RModule, homs: Sequence[Matrix]) -> bool:
    """Does the evaluation map R^m -> U, (r_i) -> sum r_i u_i, have an R-linear section?

    A section is sigma = (sigma_1, ..., sigma_m) with sigma_i in Hom(U, R) and
    sum_i pi_i sigma_i = id, where pi_i(r) = r u_i.
    """
    f, m = u.field, u.dim
    if m == 0:
        return True
    if not homs:
        return False
    cols = []
    for i in range(m):
        # pi_i as an m x n matrix: column k is A_k e_i
        pi = Matrix.from_columns(f, [A.column(i) for A in u.action], m)
        for h in homs:
            cols.append((pi @ h).vec())
    sys_ = Matrix.from_columns(f, cols, m * m)
    return solve_linear(sys_, Matrix.identity(f, m).vec()) is not None


def density_check(u: RModule, b: Matrix, g: Sequence[Sequence]):
    """Some ``r`` in R with ``r x = b x`` for every ``x`` in ``g``, or ``None``."""
    a, f = u.algebra, u.field
    g = list(g)
    if not g:
        return a.zero_vector()
    rows_cols = []
    for k in range(a.dim):
        col = []
        for x in g:
            col.extend(u.action[k].apply(x))
        rows_cols.append(col)
    rhs = [y for x in g for y in b.apply(x)]
    sys_ = Matrix.from_columns(f, rows_cols, len(rhs))
    return solve_linear(sys_, rhs)
