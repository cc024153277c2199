"""Finite-dimensional unital associative algebras given by structure constants.

An algebra of dimension ``n`` stores ``a_i a_j = sum_k mu[i, j, k] a_k`` sparsely
(0-based indices).  Towers of such algebras (:class:`TruncationFamily`) stand in
for countable-dimensional algebras.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Sequence

from gmpy2 import mpq

from .errors import (
    BadLevel,
    DimensionMismatch,
    InvalidAlgebra,
    NotAnIdeal,
    NotUnital,
)
from .exactmath import (
    BasisChange,
    Field,
    Matrix,
    Subspace,
    _Echelon,
    combine,
    mat_rank,
    solve_linear,
)

LEFT, RIGHT, TWO_SIDED = "Left", "Right", "TwoSided"


class StructureAlgebra:
    """A unital associative algebra over ``field`` given by its multiplication table.

    ``mu`` maps ``(i, j)`` to a dict ``{k: coefficient}`` with nonzero entries
    only.  If ``unit`` is omitted it is solved for; :class:`NotUnital` is raised
    when no two-sided identity exists.
    """

    def __init__(self, field: Field, dim: int, mu, unit=None, basis_labels=None):
        if dim < 1:
            raise ValueError("algebra dimension must be at least 1")
        self.field = field
        self.dim = dim
        table: dict[tuple[int, int], dict[int, object]] = {}
        items = mu.items() if isinstance(mu, dict) else None
        if items is None:
            for entry in mu:
                i, j, k, c = entry
                _check_index(dim, i, j, k)
                if (i, j) in table and k in table[(i, j)]:
                    raise ValueError(f"duplicate structure constant ({i}, {j}, {k})")
                c = field(c)
                if c:
                    table.setdefault((i, j), {})[k] = c
        else:
            for (i, j), row in items:
                for k, c in row.items():
                    _check_index(dim, i, j, k)
                    c = field(c)
                    if c:
                        table.setdefault((i, j), {})[k] = c
        self.mu = table
        self.basis_labels = tuple(basis_labels) if basis_labels is not None else tuple(f"a{i}" for i in range(dim))
        if len(self.basis_labels) != dim:
            raise DimensionMismatch("wrong number of basis labels")
        if unit is None:
            unit = _solve_unit(self)
            if unit is None:
                raise NotUnital("multiplication table has no two-sided identity")
        if len(unit) != dim:
            raise DimensionMismatch("unit vector has wrong length")
        self.unit = tuple(field(x) for x in unit)
        self._valid = None

    # ------------------------------------------------------------------
    def __repr__(self):
        return f"StructureAlgebra({self.field}, dim={self.dim})"

    def __eq__(self, other):
        if not isinstance(other, StructureAlgebra):
            return NotImplemented
        return (self.field == other.field and self.dim == other.dim
                and self.mu == other.mu and self.unit == other.unit)

    def __hash__(self):
        return hash((self.field, self.dim, tuple(sorted(self.mu_entries()))))

    def mu_entries(self) -> list[tuple[int, int, int, object]]:
        return sorted((i, j, k, c) for (i, j), row in self.mu.items() for k, c in row.items())

    def basis_vector(self, i: int) -> tuple:
        z, o = self.field.zero, self.field.one
        return tuple(o if k == i else z for k in range(self.dim))

    def zero_vector(self) -> tuple:
        return (self.field.zero,) * self.dim

    def product(self, i: int, j: int) -> dict:
        return self.mu.get((i, j), {})

    def multiply(self, x: Sequence, y: Sequence) -> tuple:
        """Bilinear extension of the table."""
        n = self.dim
        if len(x) != n or len(y) != n:
            raise DimensionMismatch(f"vectors of length {len(x)}, {len(y)} in dimension {n}")
        p = self.field.p
        out = [0] * n
        ny = [(j, b) for j, b in enumerate(y) if b]
        mu = self.mu
        for i, a in enumerate(x):
            if not a:
                continue
            for j, b in ny:
                row = mu.get((i, j))
                if row:
                    ab = a * b
                    for k, c in row.items():
                        out[k] += ab * c
        return tuple(v % p for v in out) if p else tuple(mpq(v) for v in out)

    def structure_matrix(self, k: int) -> Matrix:
        """``[mu_{i,j,k}]_{i,j}``."""
        z = self.field.zero
        rows = [[z] * self.dim for _ in range(self.dim)]
        for (i, j), row in self.mu.items():
            c = row.get(k)
            if c:
                rows[i][j] = c
        return Matrix._raw(self.field, tuple(tuple(r) for r in rows), self.dim)

    def left_mult_matrix(self, x: Sequence) -> Matrix:
        """Matrix of ``y -> x y`` on column coordinates."""
        cols = [self.multiply(x, self.basis_vector(j)) for j in range(self.dim)]
        return Matrix.from_columns(self.field, cols, self.dim)

    def right_mult_matrix(self, x: Sequence) -> Matrix:
        """Matrix of ``y -> y x`` on column coordinates."""
        cols = [self.multiply(self.basis_vector(j), x) for j in range(self.dim)]
        return Matrix.from_columns(self.field, cols, self.dim)

    @cached_property
    def left_regular(self) -> tuple[Matrix, ...]:
        return tuple(self._mult_matrix(i, left=True) for i in range(self.dim))

    @cached_property
    def right_regular(self) -> tuple[Matrix, ...]:
        return tuple(self._mult_matrix(i, left=False) for i in range(self.dim))

    def _mult_matrix(self, i, left):
        n = self.dim
        z = self.field.zero
        rows = [[z] * n for _ in range(n)]
        for j in range(n):
            prod = self.mu.get((i, j) if left else (j, i), {})
            for k, c in prod.items():
                rows[k][j] = c
        return Matrix._raw(self.field, tuple(tuple(r) for r in rows), n)

    def vector_from_matrix_coords(self, coords) -> tuple:
        return tuple(self.field(c) for c in coords)

    # serialization -----------------------------------------------------------
    def to_json(self) -> dict:
        f = self.field.format
        return {
            "field": self.field.to_json(),
            "dim": self.dim,
            "basis": list(self.basis_labels),
            "unit": [f(x) for x in self.unit],
            "mu": [[i, j, k, f(c)] for i, j, k, c in self.mu_entries()],
        }


def _check_index(dim, i, j, k):
    for idx in (i, j, k):
        if not isinstance(idx, int) or not 0 <= idx < dim:
            raise DimensionMismatch(f"structure constant index {idx!r} outside 0..{dim - 1}")


def _solve_unit(a: StructureAlgebra):
    # u a_j = a_j and a_j u = a_j, linear in u
    n, f = a.dim, a.field
    rows, rhs = [], []
    for j in range(n):
        for k in range(n):
            rows.append([a.product(i, j).get(k, f.zero) for i in range(n)])
            rhs.append(f.one if j == k else f.zero)
            rows.append([a.product(j, i).get(k, f.zero) for i in range(n)])
            rhs.append(f.one if j == k else f.zero)
    return solve_linear(Matrix(f, rows, n), rhs)


def algebra_from_json(obj: dict | str | Path, base_dir: Path | None = None) -> StructureAlgebra:
    """Parse the algebra JSON schema; ``obj`` may be a dict or a path to a file."""
    if isinstance(obj, (str, Path)):
        path = Path(obj)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        with open(path) as fh:
            obj = json.load(fh)
    if not isinstance(obj, dict):
        raise ValueError("algebra must be a JSON object")
    for key in ("field", "dim", "mu"):
        if key not in obj:
            raise ValueError(f"algebra object lacks {key!r}")
    f = Field.from_json(obj["field"])
    dim = obj["dim"]
    if not isinstance(dim, int):
        raise ValueError("dim must be an integer")
    entries = []
    for e in obj["mu"]:
        if len(e) != 4:
            raise ValueError(f"structure constant entry {e!r} must be [i, j, k, scalar]")
        i, j, k, c = e
        entries.append((i, j, k, f.parse(str(c))))
    unit = obj.get("unit")
    if unit is not None:
        unit = [f.parse(str(x)) for x in unit]
    return StructureAlgebra(f, dim, entries, unit=unit, basis_labels=obj.get("basis"))


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    valid: bool
    associativity_failures: list = dc_field(default_factory=list)
    unit_failures: list = dc_field(default_factory=list)
    representation_failures: list = dc_field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "associativity_failures": [list(q) for q in self.associativity_failures],
            "unit_failures": list(self.unit_failures),
            "representation_failures": [list(q) for q in self.representation_failures],
        }

    def summary(self) -> str:
        if self.valid:
            return "valid"
        parts = []
        if self.associativity_failures:
            q = self.associativity_failures[0]
            parts.append(f"{len(self.associativity_failures)} associativity failures, first (i,j,k,l)={tuple(q)}")
        if self.unit_failures:
            parts.append("unit: " + "; ".join(self.unit_failures))
        if self.representation_failures:
            parts.append(f"{len(self.representation_failures)} representation failures, "
                         f"first {tuple(self.representation_failures[0])}")
        return "invalid: " + ", ".join(parts)


def validate(a: StructureAlgebra) -> ValidationReport:
    """Check associativity on all basis triples and the two-sided unit.

    Each failure ``(i, j, k, l)`` says the ``a_l`` coefficients of
    ``(a_i a_j) a_k`` and ``a_i (a_j a_k)`` differ.
    """
    n, p = a.dim, a.field.p
    mu = a.mu
    fails = []
    for i in range(n):
        for j in range(n):
            left = mu.get((i, j), {})
            for k in range(n):
                acc: dict[int, object] = {}
                for m, c in left.items():
                    for l, d in mu.get((m, k), {}).items():
                        acc[l] = acc.get(l, 0) + c * d
                for m, c in mu.get((j, k), {}).items():
                    for l, d in mu.get((i, m), {}).items():
                        acc[l] = acc.get(l, 0) - c * d
                for l in sorted(acc):
                    v = acc[l] % p if p else acc[l]
                    if v:
                        fails.append((i, j, k, l))
    unit_fails = []
    u = a.unit
    for j in range(n):
        e = a.basis_vector(j)
        if a.multiply(u, e) != e:
            unit_fails.append(f"unit * a{j} != a{j}")
        if a.multiply(e, u) != e:
            unit_fails.append(f"a{j} * unit != a{j}")
    report = ValidationReport(valid=not fails and not unit_fails,
                              associativity_failures=fails, unit_failures=unit_fails)
    a._valid = report.valid
    return report


def require_valid(a: StructureAlgebra) -> StructureAlgebra:
    if a._valid is None:
        validate(a)
    if not a._valid:
        raise InvalidAlgebra("algebra failed validation", validate(a))
    return a


def mark_valid(a: StructureAlgebra) -> StructureAlgebra:
    """Record validity for tables that are associative by construction (tests re-check)."""
    a._valid = True
    return a


def multiply(a: StructureAlgebra, x: Sequence, y: Sequence) -> tuple:
    return a.multiply(x, y)


# ---------------------------------------------------------------------------
# standard constructions


def change_basis(a: StructureAlgebra, bc: BasisChange) -> StructureAlgebra:
    """Structure constants with respect to the new basis ``a'_i = sum_j F[i][j] a_j``."""
    f = a.field
    F, Finv = bc.forward, bc.inverse
    n = a.dim
    new_basis = [F.data[i] for i in range(n)]
    to_new = Finv.T  # old coords -> new coords
    entries = []
    for i in range(n):
        for j in range(n):
            prod = to_new.apply(a.multiply(new_basis[i], new_basis[j]))
            entries.extend((i, j, k, c) for k, c in enumerate(prod) if c)
    unit = bc.vector_to_new(a.unit)
    b = StructureAlgebra(f, n, entries, unit=unit, basis_labels=[f"b{i}" for i in range(n)])
    b._valid = a._valid
    return b


def opposite(a: StructureAlgebra) -> StructureAlgebra:
    entries = [(j, i, k, c) for i, j, k, c in a.mu_entries()]
    b = StructureAlgebra(a.field, a.dim, entries, unit=a.unit, basis_labels=a.basis_labels)
    b._valid = a._valid
    return b


def direct_product(a: StructureAlgebra, b: StructureAlgebra) -> StructureAlgebra:
    """Blockwise product; ``a``'s basis first."""
    if a.field != b.field:
        raise DimensionMismatch("field mismatch")
    n = a.dim
    entries = list(a.mu_entries()) + [(i + n, j + n, k + n, c) for i, j, k, c in b.mu_entries()]
    unit = a.unit + b.unit
    labels = [f"L.{s}" for s in a.basis_labels] + [f"R.{s}" for s in b.basis_labels]
    c = StructureAlgebra(a.field, n + b.dim, entries, unit=unit, basis_labels=labels)
    if a._valid and b._valid:
        c._valid = True
    return c


def matrix_algebra(field: Field, d: int) -> StructureAlgebra:
    """M_d(F) in the matrix-unit basis E_{rs} (index r*d + s)."""
    entries = []
    for r in range(d):
        for s in range(d):
            for t in range(d):
                entries.append((r * d + s, s * d + t, r * d + t, 1))
    z, o = field.zero, field.one
    unit = [o if (i // d == i % d) else z for i in range(d * d)]
    labels = [f"E{r + 1}{s + 1}" for r in range(d) for s in range(d)]
    return mark_valid(StructureAlgebra(field, d * d, entries, unit=unit, basis_labels=labels))


def polynomial_truncation(field: Field, n: int) -> StructureAlgebra:
    """F[x]/(x^n) in the monomial basis."""
    entries = [(i, j, i + j, 1) for i in range(n) for j in range(n) if i + j < n]
    labels = ["1"] + [f"x^{i}" if i > 1 else "x" for i in range(1, n)]
    return mark_valid(StructureAlgebra(field, n, entries, unit=[1] + [0] * (n - 1), basis_labels=labels))


def unitization_square_zero(field: Field, n: int) -> StructureAlgebra:
    """F*1 + R_0 with R_0 R_0 = 0 and dim R_0 = n - 1."""
    entries = [(0, 0, 0, 1)]
    for j in range(1, n):
        entries.append((0, j, j, 1))
        entries.append((j, 0, j, 1))
    labels = ["1"] + [f"a{j + 1}" for j in range(1, n)]
    return mark_valid(StructureAlgebra(field, n, entries, unit=[1] + [0] * (n - 1), basis_labels=labels))


class MatrixSubalgebra:
    """A unital subalgebra of ``M_d(F)`` with extracted structure constants.

    ``embedding[i]`` is the d x d matrix of basis element ``i``; basis element 0
    is the identity.
    """

    def __init__(self, algebra: StructureAlgebra, embedding: Sequence[Matrix], pivots, solver):
        self.algebra = algebra
        self.embedding = tuple(embedding)
        self._pivots = pivots
        self._solver = solver

    def coordinates(self, m: Matrix) -> tuple:
        """Coordinates of a matrix lying in the subalgebra."""
        vec = m.vec()
        coords = self._solver.apply([vec[q] for q in self._pivots])
        back = combine(m.field, coords, [e.vec() for e in self.embedding], len(vec))
        if back != tuple(vec):
            raise ValueError("matrix is not in the subalgebra")
        return coords

    def __iter__(self):
        # unpacking as (algebra, embedding)
        return iter((self.algebra, self.embedding))


def construct_from_generators(field: Field, gens: Sequence[Matrix], d: int | None = None) -> MatrixSubalgebra:
    """Unital subalgebra of d x d matrices generated by ``gens``.

    Basis: words in the generators discovered breadth-first, starting with the
    identity; each new word is kept only when it enlarges the span.
    """
    if gens:
        d = gens[0].rows
        if any(g.shape != (d, d) for g in gens):
            raise DimensionMismatch("generators must share one square size")
    elif d is None:
        raise ValueError("size d is required when there are no generators")
    ident = Matrix.identity(field, d)
    ech = _Echelon(field.p, d * d)
    ech.add(ident.vec())
    basis = [ident]
    labels = ["1"]
    queue = [(ident, "")]
    while queue:
        m, word = queue.pop(0)
        for gi, g in enumerate(gens):
            w = g @ m
            if ech.add(w.vec()):
                basis.append(w)
                lab = f"g{gi}" + (" " + word if word else "")
                labels.append(lab)
                queue.append((w, lab))
    r = len(basis)
    vecs = [b.vec() for b in basis]
    # r positions where the basis is independent, inverted once for coordinates
    pivots = ech.pivots()
    sub = Matrix(field, [[v[q] for v in vecs] for q in pivots]) if r else None
    solver = sub.inverse()
    entries = []
    for i in range(r):
        for j in range(r):
            prod = (basis[i] @ basis[j]).vec()
            coords = solver.apply([prod[q] for q in pivots])
            entries.extend((i, j, k, c) for k, c in enumerate(coords) if c)
    unit = [field.one] + [field.zero] * (r - 1)
    alg = mark_valid(StructureAlgebra(field, r, entries, unit=unit, basis_labels=labels))
    return MatrixSubalgebra(alg, basis, pivots, solver)


# ---------------------------------------------------------------------------
# ideals


@dataclass(frozen=True)
class IdealBasis:
    subspace: Subspace
    side: str

    @property
    def dim(self) -> int:
        return self.subspace.dim

    @property
    def codim(self) -> int:
        return self.subspace.codim

    def to_json(self) -> dict:
        return {"side": self.side, "basis": self.subspace.to_json()}


def is_ideal(a: StructureAlgebra, s: Subspace, side: str = TWO_SIDED) -> bool:
    """Closure check of ``s`` under multiplication by basis elements on ``side``."""
    for v in s.basis:
        for i in range(a.dim):
            e = a.basis_vector(i)
            if side in (LEFT, TWO_SIDED) and a.multiply(e, v) not in s:
                return False
            if side in (RIGHT, TWO_SIDED) and a.multiply(v, e) not in s:
                return False
    return True


def make_ideal(a: StructureAlgebra, s: Subspace, side: str = TWO_SIDED) -> IdealBasis:
    if s.ambient_dim != a.dim:
        raise DimensionMismatch("subspace ambient dimension differs from algebra dimension")
    if not is_ideal(a, s, side):
        raise NotAnIdeal(f"subspace is not a {side} ideal")
    return IdealBasis(s, side)


def ideal_closure(a: StructureAlgebra, seed: Iterable[Sequence], side: str = TWO_SIDED) -> IdealBasis:
    """Smallest ``side`` ideal containing ``seed`` (breadth-first closure)."""
    if side not in (LEFT, RIGHT, TWO_SIDED):
        raise ValueError(f"unknown side {side!r}")
    n = a.dim
    ech = _Echelon(a.field.p, n)
    queue = []
    for v in seed:
        if len(v) != n:
            raise DimensionMismatch("seed vector of wrong length")
        if ech.add(v):
            queue.append(tuple(v))
    basis_vecs = [a.basis_vector(i) for i in range(n)]
    while queue:
        v = queue.pop(0)
        for e in basis_vecs:
            cands = []
            if side in (LEFT, TWO_SIDED):
                cands.append(a.multiply(e, v))
            if side in (RIGHT, TWO_SIDED):
                cands.append(a.multiply(v, e))
            for w in cands:
                if ech.add(w):
                    queue.append(w)
    return IdealBasis(Subspace(a.field, n, ech.basis(), ech.pivots()), side)


def span_products(a: StructureAlgebra, xs: Sequence[Sequence], ys: Sequence[Sequence]) -> Subspace:
    """span{x y : x in xs, y in ys}."""
    ech = _Echelon(a.field.p, a.dim)
    for x in xs:
        for y in ys:
            ech.add(a.multiply(x, y))
    return Subspace(a.field, a.dim, ech.basis(), ech.pivots())


def is_square_zero(a: StructureAlgebra, s: Subspace) -> bool:
    return all(not any(a.multiply(x, y)) for x in s.basis for y in s.basis)


def annihilator(a: StructureAlgebra, s: Subspace, side: str = TWO_SIDED) -> Subspace:
    """{x : x s = 0} (Left), {x : s x = 0} (Right) or both (TwoSided)."""
    n, f = a.dim, a.field
    rows = []
    for v in s.basis:
        if side in (LEFT, TWO_SIDED):
            rows.extend(a.right_mult_matrix(v).data)  # x -> x v
        if side in (RIGHT, TWO_SIDED):
            rows.extend(a.left_mult_matrix(v).data)  # x -> v x
    if not rows:
        return Subspace.full(f, n)
    return Matrix._raw(f, tuple(rows), n).kernel()


def quotient(a: StructureAlgebra, j: IdealBasis, *, verify: bool = True) -> tuple[StructureAlgebra, Matrix]:
    """Quotient algebra on the complement spanned by non-pivot basis vectors, plus the projection.

    ``verify=False`` skips the closure check for ideals already known to be two-sided.
    """
    if j.side != TWO_SIDED or (verify and not is_ideal(a, j.subspace, TWO_SIDED)):
        raise NotAnIdeal("quotient needs a verified two-sided ideal")
    s = j.subspace
    if s.dim == a.dim:
        raise NotUnital("quotient by the whole algebra is the zero ring")
    pset = set(s.pivots)
    keep = [i for i in range(a.dim) if i not in pset]
    entries = []
    for p_, i in enumerate(keep):
        for q_, jj in enumerate(keep):
            prod = s.quotient_coords(a.multiply(a.basis_vector(i), a.basis_vector(jj)))
            entries.extend((p_, q_, k, c) for k, c in enumerate(prod) if c)
    proj_cols = [s.quotient_coords(a.basis_vector(i)) for i in range(a.dim)]
    proj = Matrix.from_columns(a.field, proj_cols, len(keep))
    unit = s.quotient_coords(a.unit)
    q = StructureAlgebra(a.field, len(keep), entries, unit=unit,
                         basis_labels=[a.basis_labels[i] for i in keep])
    q._valid = a._valid
    return q, proj


def is_algebra_hom(a: StructureAlgebra, b: StructureAlgebra, m: Matrix) -> bool:
    """Whether ``m`` (b.dim x a.dim) is a unital algebra homomorphism a -> b."""
    if m.shape != (b.dim, a.dim):
        return False
    if m.apply(a.unit) != b.unit:
        return False
    imgs = [m.column(i) for i in range(a.dim)]
    for i in range(a.dim):
        for j in range(a.dim):
            lhs = m.apply(a.multiply(a.basis_vector(i), a.basis_vector(j)))
            if lhs != b.multiply(imgs[i], imgs[j]):
                return False
    return True


# ---------------------------------------------------------------------------
# radical


def radical(a: StructureAlgebra) -> Subspace:
    """Jacobson radical.

    Characteristic 0: kernel of the trace form ``tr(L_{xy})``.  Over F_p the
    trace form is refined by the p-power trace digits of the regular
    representation, which cuts down to the radical after ``floor(log_p n)``
    rounds.
    """
    require_valid(a)
    n, f = a.dim, a.field
    L = a.left_regular
    if not f.p:
        traces = [sum(L[k].data[j][j] for j in range(n)) for k in range(n)]
        gram = [[sum((c * traces[k] for k, c in a.product(i, j).items()), mpq(0)) for j in range(n)]
                for i in range(n)]
        return Matrix(f, gram, n).kernel()
    p = f.p
    rounds = int(math.floor(math.log(n, p) + 1e-12)) if n > 1 else 0
    current = Subspace.full(f, n)
    basis_vecs = [a.basis_vector(j) for j in range(n)]
    for i in range(rounds + 1):
        if not current.basis:
            break
        mod = p ** (i + 1)
        power = p ** i
        rows = []
        for bj in basis_vecs:
            row = []
            for x in current.basis:
                z = a.multiply(x, bj)
                lz = a.left_mult_matrix(z)
                row.append(_trace_digit(lz, power, mod, p))
            rows.append(row)
        ker = Matrix(f, rows, current.dim).kernel()
        current = Subspace.span(f, n, (combine(f, c, current.basis, n) for c in ker.basis))
    return current


def _trace_digit(m: Matrix, power: int, mod: int, p: int) -> int:
    """((trace of lift(m)^power) mod p^(i+1)) / p^i, where power = p^i."""
    data = [[int(x) for x in r] for r in m.data]
    result = _int_matpow(data, power, mod)
    tr = sum(result[i][i] for i in range(len(data))) % mod
    return (tr // (mod // p)) % p


def _int_matpow(m, e, mod):
    n = len(m)
    res = [[int(i == j) for j in range(n)] for i in range(n)]
    base = [[x % mod for x in r] for r in m]
    while e:
        if e & 1:
            res = _int_matmul(res, base, mod)
        e >>= 1
        if e:
            base = _int_matmul(base, base, mod)
    return res


def _int_matmul(a, b, mod):
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(r, c)) % mod for c in bt] for r in a]


# ---------------------------------------------------------------------------
# truncation families


@dataclass(eq=False)
class TruncationFamily:
    """A coherent tower of finite-dimensional algebras indexed by levels.

    ``builder(level)`` returns the level algebra.  ``projector(small, big)``
    returns the quotient map from level ``big`` onto level ``small``; when it is
    ``None`` the map keeps the first ``dim(small)`` coordinates, i.e. the tower
    quotients by ``span{a_k : k >= dim(small)}``.
    """

    name: str
    params: dict
    field: Field
    builder: Callable[[int], StructureAlgebra]
    admissible: Callable[[int], bool]
    min_level: int = 1
    projector: Callable[[int, int], Matrix] | None = None
    _cache: dict = dc_field(default_factory=dict, repr=False)
    _checked: set = dc_field(default_factory=set, repr=False)

    def is_admissible(self, n: int) -> bool:
        return isinstance(n, int) and n >= self.min_level and self.admissible(n)

    def build(self, n: int) -> StructureAlgebra:
        if not self.is_admissible(n):
            raise BadLevel(f"level {n!r} is not admissible for family {self.name}")
        if n not in self._cache:
            self._cache[n] = self.builder(n)
        return self._cache[n]

    def projection(self, small: int, big: int) -> Matrix:
        a_small, a_big = self.build(small), self.build(big)
        if self.projector is not None:
            return self.projector(small, big)
        f = self.field
        z, o = f.zero, f.one
        return Matrix._raw(f, tuple(tuple(o if i == j else z for j in range(a_big.dim))
                                    for i in range(a_small.dim)), a_big.dim)

    def previous_level(self, n: int) -> int | None:
        for m in range(n - 1, self.min_level - 1, -1):
            if self.is_admissible(m):
                return m
        return None

    def to_json(self) -> dict:
        return {"family": self.name, "params": self.params}


def check_coherence(f: TruncationFamily, small: int, big: int) -> bool:
    """The projection is a surjective unital homomorphism (so its kernel is an ideal)."""
    a_s, a_b = f.build(small), f.build(big)
    proj = f.projection(small, big)
    return mat_rank(proj) == a_s.dim and is_algebra_hom(a_b, a_s, proj)


def truncate(f: TruncationFamily, n: int) -> StructureAlgebra:
    """Level-``n`` algebra, validated unless known valid, with coherence to the previous level verified once."""
    a = f.build(n)
    if n not in f._checked:
        # algebras valid by construction (or by an earlier check) skip the O(n^4) table scan
        if a._valid is None:
            validate(a)
        if not a._valid:
            raise InvalidAlgebra(f"level {n} of {f.name} is not a valid algebra", validate(a))
        prev = f.previous_level(n)
        if prev is not None and not check_coherence(f, prev, n):
            raise InvalidAlgebra(f"level {n} of {f.name} does not project onto level {prev}")
        f._checked.add(n)
    return a
