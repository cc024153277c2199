"""Exact scalars and dense linear algebra over Q and prime fields.

Rationals are ``gmpy2.mpq`` values (always reduced, positive denominator);
prime-field elements are Python ints in ``range(p)``.  Nothing in this module
touches floating point.

Row reduction uses a fixed pivot rule (leftmost pivot column, first row with a
nonzero entry) so every result, including recorded transforms, is
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpq

from .errors import AmbientMismatch, DimensionMismatch

__all__ = [
    "Field",
    "QQ",
    "GF",
    "Matrix",
    "Subspace",
    "BasisChange",
    "mat_rank",
    "mat_kernel",
    "solve_linear",
    "subspace_ops",
    "rref",
]


# ---------------------------------------------------------------------------
# fields


@dataclass(frozen=True)
class Field:
    """Either the rationals (``p is None``) or the prime field F_p."""

    kind: str
    p: int | None = None

    def __post_init__(self):
        if self.kind == "rational":
            if self.p is not None:
                raise ValueError("rational field takes no modulus")
        elif self.kind == "prime":
            if not isinstance(self.p, int) or self.p < 2 or not gmpy2.is_prime(self.p):
                raise ValueError(f"modulus {self.p!r} is not prime")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    @classmethod
    def rationals(cls) -> "Field":
        return cls("rational")

    @classmethod
    def prime(cls, p: int) -> "Field":
        return cls("prime", int(p))

    @property
    def is_finite(self) -> bool:
        return self.p is not None

    @property
    def order(self) -> int | None:
        return self.p

    @property
    def zero(self):
        return 0 if self.p else mpq(0)

    @property
    def one(self):
        return 1 if self.p else mpq(1)

    def __call__(self, x):
        """Coerce ``x`` (int, str, Fraction, mpq) into this field."""
        p = self.p
        if isinstance(x, str):
            return self.parse(x)
        if p:
            if isinstance(x, (Fraction,)) or type(x).__name__ == "mpq":
                num, den = int(x.numerator), int(x.denominator)
                if den % p == 0:
                    raise ZeroDivisionError(f"{x} has no image in F_{p}")
                return num * pow(den, -1, p) % p
            return int(x) % p
        if isinstance(x, Fraction):
            return mpq(x.numerator, x.denominator)
        return mpq(x)

    def parse(self, text: str):
        text = text.strip()
        if self.p:
            if "/" in text:
                raise ValueError(f"prime-field scalars are residues, got {text!r}")
            value = int(text)
            if not 0 <= value < self.p:
                raise ValueError(f"residue {value} not in [0, {self.p})")
            return value
        if "/" in text:
            num, den = text.split("/")
            if int(den) == 0:
                raise ZeroDivisionError(text)
            return mpq(int(num), int(den))
        return mpq(int(text))

    def format(self, x) -> str:
        if self.p:
            return str(int(x))
        return str(x)

    def inv(self, x):
        if not x:
            raise ZeroDivisionError("inverse of zero")
        if self.p:
            return pow(int(x), -1, self.p)
        return mpq(1) / x

    def elements(self):
        if not self.p:
            raise ValueError("the rationals are infinite")
        return range(self.p)

    def random(self, rng, bound: int = 3):
        """A seeded random scalar; rationals are small integers or halves/thirds."""
        if self.p:
            return rng.randrange(self.p)
        return mpq(rng.randint(-bound, bound), rng.choice((1, 1, 1, 2, 3)))

    def to_json(self) -> dict:
        if self.p:
            return {"kind": "prime", "p": self.p}
        return {"kind": "rational"}

    @classmethod
    def from_json(cls, obj: dict) -> "Field":
        kind = obj.get("kind")
        if kind == "rational":
            return cls.rationals()
        if kind == "prime":
            return cls.prime(obj["p"])
        raise ValueError(f"unknown field kind {kind!r}")

    def __str__(self):
        return f"GF({self.p})" if self.p else "QQ"


QQ = Field.rationals()


def GF(p: int) -> Field:
    return Field.prime(p)


# ---------------------------------------------------------------------------
# row kernels (lists of scalars, mutated in place)


def _axpy(row, c, prow, p, start=0):
    """row[j] -= c * prow[j] for j >= start."""
    if p:
        for j in range(start, len(row)):
            y = prow[j]
            if y:
                row[j] = (row[j] - c * y) % p
    else:
        for j in range(start, len(row)):
            y = prow[j]
            if y:
                row[j] = row[j] - c * y


def _scale(row, c, p):
    if p:
        return [x * c % p for x in row]
    return [x * c for x in row]


def _inv(x, p):
    # mpq(1) keeps plain integer input exact
    return pow(int(x), -1, p) if p else mpq(1) / x


class _Echelon:
    """Incrementally maintained reduced row echelon basis (internal, mutable)."""

    __slots__ = ("p", "ncols", "rows")

    def __init__(self, p, ncols):
        self.p = p
        self.ncols = ncols
        self.rows: dict[int, list] = {}  # pivot column -> row, pivot entry 1

    def reduce(self, v):
        v = list(v)
        p = self.p
        for piv, row in self.rows.items():
            c = v[piv]
            if c:
                _axpy(v, c, row, p, piv)
        return v

    def add(self, v) -> bool:
        v = self.reduce(v)
        piv = next((j for j, x in enumerate(v) if x), None)
        if piv is None:
            return False
        p = self.p
        v = _scale(v, _inv(v[piv], p), p)
        for row in self.rows.values():
            c = row[piv]
            if c:
                _axpy(row, c, v, p, piv)
        self.rows[piv] = v
        return True

    def __len__(self):
        return len(self.rows)

    def basis(self):
        return [tuple(self.rows[k]) for k in sorted(self.rows)]

    def pivots(self):
        return sorted(self.rows)


def rref(field: Field, rows: Iterable[Sequence], ncols: int):
    """Reduced row echelon form of the given rows: ``(nonzero_rows, pivots)``."""
    ech = _Echelon(field.p, ncols)
    for r in rows:
        if len(r) != ncols:
            raise DimensionMismatch("ragged rows")
        ech.add(r)
    return ech.basis(), ech.pivots()


# ---------------------------------------------------------------------------
# matrices


class Matrix:
    """Immutable dense matrix over a :class:`Field` (row-major tuples)."""

    __slots__ = ("field", "rows", "cols", "data", "_hash")

    def __init__(self, field: Field, data: Iterable[Sequence], cols: int | None = None, *, _trusted=False):
        self.field = field
        if _trusted:
            rows = tuple(data)
        else:
            rows = tuple(tuple(field(x) for x in r) for r in data)
        self.data = rows
        self.rows = len(rows)
        if cols is None:
            if not rows:
                raise DimensionMismatch("cannot infer column count of empty matrix")
            cols = len(rows[0])
        self.cols = cols
        if any(len(r) != cols for r in rows):
            raise DimensionMismatch("ragged matrix")
        self._hash = None

    # constructors -------------------------------------------------------
    @classmethod
    def _raw(cls, field, data, cols):
        return cls(field, data, cols, _trusted=True)

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> "Matrix":
        z = field.zero
        return cls._raw(field, tuple((z,) * cols for _ in range(rows)), cols)

    @classmethod
    def identity(cls, field: Field, n: int) -> "Matrix":
        z, o = field.zero, field.one
        return cls._raw(field, tuple(tuple(o if i == j else z for j in range(n)) for i in range(n)), n)

    @classmethod
    def from_columns(cls, field: Field, columns: Sequence[Sequence], nrows: int) -> "Matrix":
        cols = len(columns)
        data = tuple(tuple(columns[j][i] for j in range(cols)) for i in range(nrows))
        return cls._raw(field, data, cols)

    @classmethod
    def from_vec(cls, field: Field, vec: Sequence, rows: int, cols: int) -> "Matrix":
        """Inverse of :meth:`vec` (row-major)."""
        return cls._raw(field, tuple(tuple(vec[i * cols:(i + 1) * cols]) for i in range(rows)), cols)

    # basic protocol -------------------------------------------------------
    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.field == other.field and self.cols == other.cols and self.data == other.data

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field, self.cols, self.data))
        return self._hash

    def __repr__(self):
        f = self.field.format
        body = "; ".join(" ".join(f(x) for x in r) for r in self.data)
        return f"Matrix({self.field}, {self.rows}x{self.cols}, [{body}])"

    def tolist(self):
        return [list(r) for r in self.data]

    def to_json(self):
        f = self.field.format
        return [[f(x) for x in r] for r in self.data]

    def vec(self) -> tuple:
        """Row-major flattening."""
        return tuple(x for r in self.data for x in r)

    def column(self, j) -> tuple:
        return tuple(r[j] for r in self.data)

    @property
    def T(self) -> "Matrix":
        if not self.rows:
            return Matrix._raw(self.field, tuple(() for _ in range(self.cols)), 0)
        return Matrix._raw(self.field, tuple(zip(*self.data)), self.rows)

    def is_zero(self) -> bool:
        return not any(x for r in self.data for x in r)

    # arithmetic -------------------------------------------------------------
    def _check_same(self, other):
        if self.field != other.field:
            raise DimensionMismatch("field mismatch")
        if self.shape != other.shape:
            raise DimensionMismatch(f"shape {self.shape} vs {other.shape}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        p = self.field.p
        if p:
            data = tuple(tuple((x + y) % p for x, y in zip(a, b)) for a, b in zip(self.data, other.data))
        else:
            data = tuple(tuple(x + y for x, y in zip(a, b)) for a, b in zip(self.data, other.data))
        return Matrix._raw(self.field, data, self.cols)

    def __neg__(self) -> "Matrix":
        return self.scale(-1)

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self + (-other)

    def scale(self, c) -> "Matrix":
        c = self.field(c)
        p = self.field.p
        if p:
            data = tuple(tuple(x * c % p for x in r) for r in self.data)
        else:
            data = tuple(tuple(x * c for x in r) for r in self.data)
        return Matrix._raw(self.field, data, self.cols)

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.cols != other.rows:
                raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
            return Matrix._raw(self.field, _matmul(self.data, other.data, other.cols, self.field.p), other.cols)
        return self.apply(other)

    def apply(self, v: Sequence) -> tuple:
        """Matrix times column vector."""
        if len(v) != self.cols:
            raise DimensionMismatch(f"vector of length {len(v)} for {self.shape} matrix")
        p = self.field.p
        out = []
        for r in self.data:
            s = 0
            for a, b in zip(r, v):
                if a and b:
                    s += a * b
            out.append(s % p if p else mpq(s))
        return tuple(out)

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.rows != other.rows:
            raise DimensionMismatch("row counts differ")
        return Matrix._raw(self.field, tuple(a + b for a, b in zip(self.data, other.data)), self.cols + other.cols)

    def vstack(self, other: "Matrix") -> "Matrix":
        if self.cols != other.cols:
            raise DimensionMismatch("column counts differ")
        return Matrix._raw(self.field, self.data + other.data, self.cols)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix._raw(self.field, tuple(tuple(self.data[i][j] for j in cols) for i in rows), len(cols))

    # linear algebra ---------------------------------------------------------
    def rref(self):
        return rref(self.field, self.data, self.cols)

    def rank(self) -> int:
        return mat_rank(self)

    def kernel(self) -> "Subspace":
        return mat_kernel(self)

    def solve(self, b):
        return solve_linear(self, b)

    def row_space(self) -> "Subspace":
        return Subspace.span(self.field, self.cols, self.data)

    def column_space(self) -> "Subspace":
        return Subspace.span(self.field, self.rows, zip(*self.data)) if self.cols else Subspace.zero(self.field, self.rows)

    def inverse(self) -> "Matrix":
        n = self.rows
        if n != self.cols:
            raise DimensionMismatch("inverse of non-square matrix")
        f = self.field
        aug = [list(r) + [f.one if i == j else f.zero for j in range(n)] for i, r in enumerate(self.data)]
        basis, piv = rref(f, aug, 2 * n)
        if piv[:n] != list(range(n)) or len(basis) != n:
            raise ZeroDivisionError("matrix is singular")
        return Matrix._raw(f, tuple(tuple(r[n:]) for r in basis), n)


def _matmul(a, b, bcols, p):
    out = []
    bt = list(zip(*b)) if b else [()] * bcols
    for r in a:
        nz = [(k, x) for k, x in enumerate(r) if x]
        row = []
        for j in range(bcols):
            col = bt[j]
            s = 0
            for k, x in nz:
                y = col[k]
                if y:
                    s += x * y
            row.append(s % p if p else mpq(s))
        out.append(tuple(row))
    return tuple(out)


def mat_rank(m: Matrix) -> int:
    """Exact rank over the matrix's field."""
    if m.rows > m.cols:
        # fewer, longer rows reduce faster
        return len(rref(m.field, zip(*m.data), m.rows)[0])
    return len(rref(m.field, m.data, m.cols)[0])


def _kernel_vectors(field, basis, pivots, ncols):
    pset = set(pivots)
    z, o = field.zero, field.one
    p = field.p
    vecs = []
    for free in range(ncols):
        if free in pset:
            continue
        v = [z] * ncols
        v[free] = o
        for row, piv in zip(basis, pivots):
            c = row[free]
            if c:
                v[piv] = (-c) % p if p else -c
        vecs.append(v)
    return vecs


def mat_kernel(m: Matrix) -> "Subspace":
    """Right null space ``{x : m x = 0}`` as a canonical subspace."""
    basis, pivots = rref(m.field, m.data, m.cols)
    return Subspace.span(m.field, m.cols, _kernel_vectors(m.field, basis, pivots, m.cols))


def solve_linear(a: Matrix, b: Sequence):
    """Return some ``x`` with ``a x = b`` or ``None`` when the system is inconsistent.

    Free variables are set to zero, so the answer is deterministic.
    """
    if len(b) != a.rows:
        raise DimensionMismatch(f"right-hand side of length {len(b)} for {a.rows} rows")
    f = a.field
    aug = [list(r) + [f(bi)] for r, bi in zip(a.data, b)]
    basis, pivots = rref(f, aug, a.cols + 1)
    if pivots and pivots[-1] == a.cols:
        return None
    x = [f.zero] * a.cols
    for row, piv in zip(basis, pivots):
        x[piv] = row[-1]
    return tuple(x)


# ---------------------------------------------------------------------------
# subspaces


class Subspace:
    """A subspace of F^n stored by its reduced row echelon basis.

    Equal subspaces have identical representations, so ``==`` is exact.
    """

    __slots__ = ("field", "ambient_dim", "basis", "pivots")

    def __init__(self, field: Field, ambient_dim: int, basis, pivots):
        self.field = field
        self.ambient_dim = ambient_dim
        self.basis = tuple(tuple(b) for b in basis)
        self.pivots = tuple(pivots)

    @classmethod
    def span(cls, field: Field, ambient_dim: int, vectors: Iterable[Sequence]) -> "Subspace":
        ech = _Echelon(field.p, ambient_dim)
        for v in vectors:
            if len(v) != ambient_dim:
                raise AmbientMismatch(f"vector of length {len(v)} in ambient dimension {ambient_dim}")
            ech.add(v)
        return cls(field, ambient_dim, ech.basis(), ech.pivots())

    @classmethod
    def zero(cls, field: Field, ambient_dim: int) -> "Subspace":
        return cls(field, ambient_dim, (), ())

    @classmethod
    def full(cls, field: Field, ambient_dim: int) -> "Subspace":
        z, o = field.zero, field.one
        basis = [tuple(o if i == j else z for j in range(ambient_dim)) for i in range(ambient_dim)]
        return cls(field, ambient_dim, basis, range(ambient_dim))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def codim(self) -> int:
        return self.ambient_dim - len(self.basis)

    def __len__(self):
        return len(self.basis)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return (self.field == other.field and self.ambient_dim == other.ambient_dim
                and self.basis == other.basis)

    def __hash__(self):
        return hash((self.field, self.ambient_dim, self.basis))

    def __repr__(self):
        return f"Subspace({self.field}, dim {self.dim} in {self.ambient_dim})"

    def _echelon(self):
        ech = _Echelon(self.field.p, self.ambient_dim)
        for piv, row in zip(self.pivots, self.basis):
            ech.rows[piv] = list(row)
        return ech

    def _check(self, other):
        if self.ambient_dim != other.ambient_dim or self.field != other.field:
            raise AmbientMismatch(f"ambient {self.ambient_dim} vs {other.ambient_dim}")

    def residue(self, v: Sequence) -> tuple:
        """``v`` minus its component along the basis; zero exactly when ``v`` lies in the subspace."""
        if len(v) != self.ambient_dim:
            raise AmbientMismatch("vector length differs from ambient dimension")
        v = list(v)
        p = self.field.p
        for piv, row in zip(self.pivots, self.basis):
            c = v[piv]
            if c:
                _axpy(v, c, row, p, piv)
        return tuple(v)

    def quotient_coords(self, v: Sequence) -> tuple:
        """Coordinates of the class of ``v`` in F^n / self (indexed by non-pivot columns)."""
        r = self.residue(v)
        pset = set(self.pivots)
        return tuple(r[j] for j in range(self.ambient_dim) if j not in pset)

    def __contains__(self, v) -> bool:
        return not any(self.residue(v))

    def contains(self, other: "Subspace") -> bool:
        self._check(other)
        return all(b in self for b in other.basis)

    def __le__(self, other: "Subspace") -> bool:
        return other.contains(self)

    def coordinates(self, v: Sequence) -> tuple:
        """Coefficients of ``v`` in the echelon basis; raises if ``v`` is outside."""
        if v not in self:
            raise ValueError("vector not in subspace")
        return tuple(v[piv] for piv in self.pivots)

    def sum(self, other: "Subspace") -> "Subspace":
        self._check(other)
        return Subspace.span(self.field, self.ambient_dim, self.basis + other.basis)

    def __add__(self, other):
        return self.sum(other)

    def intersect(self, other: "Subspace") -> "Subspace":
        self._check(other)
        f = self.field
        if not self.basis or not other.basis:
            return Subspace.zero(f, self.ambient_dim)
        p = f.p
        neg = [tuple((-x) % p if p else -x for x in b) for b in other.basis]
        cols = list(self.basis) + neg
        m = Matrix.from_columns(f, cols, self.ambient_dim)
        ker = mat_kernel(m)
        d = self.dim
        vecs = []
        for k in ker.basis:
            vecs.append(_combine(f, k[:d], self.basis, self.ambient_dim))
        return Subspace.span(f, self.ambient_dim, vecs)

    def __and__(self, other):
        return self.intersect(other)

    def complement_basis(self) -> list:
        """Standard basis vectors at the non-pivot columns (spans a complement)."""
        z, o = self.field.zero, self.field.one
        pset = set(self.pivots)
        return [tuple(o if i == j else z for i in range(self.ambient_dim))
                for j in range(self.ambient_dim) if j not in pset]

    def image(self, m: Matrix) -> "Subspace":
        """Image under ``v -> m v``."""
        if m.cols != self.ambient_dim:
            raise AmbientMismatch("matrix does not act on this ambient space")
        return Subspace.span(self.field, m.rows, (m.apply(b) for b in self.basis))

    def to_json(self):
        f = self.field.format
        return [[f(x) for x in b] for b in self.basis]


def _combine(field, coeffs, vectors, n):
    """sum coeffs[i] * vectors[i]."""
    p = field.p
    out = [0] * n
    for c, v in zip(coeffs, vectors):
        if c:
            for j, x in enumerate(v):
                if x:
                    out[j] += c * x
    return tuple(x % p for x in out) if p else tuple(mpq(x) for x in out)


def combine(field: Field, coeffs: Sequence, vectors: Sequence[Sequence], n: int) -> tuple:
    return _combine(field, coeffs, vectors, n)


def subspace_ops(op: str, v1: Subspace, v2: Subspace):
    """Dispatch ``Sum``/``Intersect`` (-> Subspace) or ``Contains``/``Equal`` (-> bool)."""
    v1._check(v2)
    if op == "Sum":
        return v1.sum(v2)
    if op == "Intersect":
        return v1.intersect(v2)
    if op == "Contains":
        return v1.contains(v2)
    if op == "Equal":
        return v1 == v2
    raise ValueError(f"unknown subspace operation {op!r}")


# ---------------------------------------------------------------------------
# basis changes


@dataclass(frozen=True)
class BasisChange:
    """An invertible change of basis; ``forward @ inverse`` is checked to be the identity.

    Row ``i`` of ``forward`` holds the old-basis coordinates of new basis vector ``i``.
    """

    forward: Matrix
    inverse: Matrix

    def __post_init__(self):
        n = self.forward.rows
        if self.forward @ self.inverse != Matrix.identity(self.forward.field, n):
            raise ValueError("forward @ inverse is not the identity")

    @classmethod
    def from_forward(cls, forward: Matrix) -> "BasisChange":
        return cls(forward, forward.inverse())

    @property
    def dim(self) -> int:
        return self.forward.rows

    def vector_to_new(self, v: Sequence) -> tuple:
        """Old coordinates of an element -> new coordinates (x = F^T x')."""
        return self.inverse.T.apply(v)

    def vector_to_old(self, v: Sequence) -> tuple:
        return self.forward.T.apply(v)

    def functional_to_new(self, rho: Sequence) -> tuple:
        """rho'(a'_i) = sum_j F[i][j] rho(a_j)."""
        return self.forward.apply(rho)

    def functional_to_old(self, rho: Sequence) -> tuple:
        return self.inverse.apply(rho)

    def subspace_to_new(self, s: Subspace) -> Subspace:
        return s.image(self.inverse.T)

    def subspace_to_old(self, s: Subspace) -> Subspace:
        return s.image(self.forward.T)


def random_invertible(field: Field, n: int, rng, bound: int = 2) -> Matrix:
    """A seeded random invertible matrix (rejection sampling)."""
    while True:
        m = Matrix(field, [[field.random(rng, bound) for _ in range(n)] for _ in range(n)])
        if mat_rank(m) == n:
            return m
