"""Arens regularity of truncation towers: rank profiles, square-zero ideals, verdicts.

A tower ``R_1 <- R_2 <- ...`` of finite-dimensional quotients stands in for a
countable-dimensional algebra.  Regularity is read off from the ranks of the
matrices ``[rho(a_i a_j)]``: bounded ranks come with a square-zero two-sided
ideal of constant codimension, growing ranks rule one out.  Finite windows can
only give evidence about the limit, and verdicts say so.
"""

from __future__ import annotations

import itertools
import json
import random
import re
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Callable, Sequence

from .algebra import (
    LEFT,
    RIGHT,
    TWO_SIDED,
    IdealBasis,
    StructureAlgebra,
    TruncationFamily,
    algebra_from_json,
    annihilator,
    change_basis,
    construct_from_generators,
    direct_product,
    is_ideal,
    is_square_zero,
    mark_valid,
    matrix_algebra,
    polynomial_truncation,
    quotient,
    radical,
    truncate,
    unitization_square_zero,
)
from .arens import rank_map, translate_span_dim
from .errors import BadLevel, BadParams, DimensionMismatch, ExtractionFailed, NotMaximalRank, UnknownFamily
from .exactmath import (
    QQ,
    BasisChange,
    Field,
    GF,
    Matrix,
    Subspace,
    _Echelon,
    combine,
    mat_rank,
    random_invertible,
)

GRADE = "EVIDENCE"
REGULAR, NOT_REGULAR, INCONCLUSIVE = "Regular", "NotRegular", "Inconclusive"


# ---------------------------------------------------------------------------
# parameters


def parse_field(value) -> Field:
    """Accepts a Field, a JSON field object, a prime, or strings like ``QQ`` / ``GF(5)``."""
    if value is None:
        return QQ
    if isinstance(value, Field):
        return value
    try:
        if isinstance(value, dict):
            return Field.from_json(value)
        if isinstance(value, bool):
            raise ValueError(value)
        if isinstance(value, int):
            return GF(value)
        if isinstance(value, str):
            text = value.strip().upper().replace(" ", "")
            if text in ("Q", "QQ", "RATIONAL", "RATIONALS"):
                return QQ
            m = re.fullmatch(r"(?:GF|F_?)\(?(\d+)\)?", text) or re.fullmatch(r"(\d+)", text)
            if m:
                return GF(int(m.group(1)))
    except ValueError as exc:
        raise BadParams(f"bad field {value!r}: {exc}") from None
    raise BadParams(f"cannot interpret {value!r} as a field")


def _check_keys(name, params, allowed):
    extra = set(params) - set(allowed)
    if extra:
        raise BadParams(f"{name}: unknown parameter(s) {sorted(extra)}")


def _int_param(name, params, key, default, lo):
    v = params.get(key, default)
    if not isinstance(v, int) or isinstance(v, bool) or v < lo:
        raise BadParams(f"{name}: {key} must be an integer >= {lo}, got {v!r}")
    return v


# ---------------------------------------------------------------------------
# bimodules and square-zero extensions


@dataclass(frozen=True)
class Bimodule:
    """An X-bimodule M: ``left[i]`` is ``v -> a_i v`` and ``right[i]`` is ``v -> v a_i``."""

    algebra: StructureAlgebra
    dim: int
    left: tuple
    right: tuple

    def is_valid(self) -> bool:
        a, f, m = self.algebra, self.algebra.field, self.dim
        ident = Matrix.identity(f, m)

        def op(ops, vec):
            return Matrix.from_vec(f, combine(f, vec, [o.vec() for o in ops], m * m), m, m)

        if op(self.left, a.unit) != ident or op(self.right, a.unit) != ident:
            return False
        for i in range(a.dim):
            for j in range(a.dim):
                prod = a.multiply(a.basis_vector(i), a.basis_vector(j))
                if self.left[i] @ self.left[j] != op(self.left, prod):
                    return False
                if self.right[j] @ self.right[i] != op(self.right, prod):
                    return False
                if self.left[i] @ self.right[j] != self.right[j] @ self.left[i]:
                    return False
        return True


def regular_bimodule(x: StructureAlgebra) -> Bimodule:
    return Bimodule(x, x.dim, x.left_regular, x.right_regular)


def dual_bimodule(x: StructureAlgebra) -> Bimodule:
    """X* with ``(x phi y)(z) = phi(y z x)``."""
    return Bimodule(x, x.dim, tuple(m.T for m in x.right_regular), tuple(m.T for m in x.left_regular))


def square_zero_extension(x: StructureAlgebra, m: Bimodule, copies: int = 1) -> StructureAlgebra:
    """``X ⋉ M^copies``: X's basis first, then the copies of M in order; M M = 0."""
    if m.algebra != x:
        raise DimensionMismatch("bimodule over a different algebra")
    d, k = x.dim, m.dim
    entries = list(x.mu_entries())
    for c in range(copies):
        off = d + c * k
        for i in range(d):
            L, R = m.left[i].data, m.right[i].data
            for t in range(k):
                for s in range(k):
                    if L[s][t]:
                        entries.append((i, off + t, off + s, L[s][t]))
                    if R[s][t]:
                        entries.append((off + t, i, off + s, R[s][t]))
    unit = tuple(x.unit) + (x.field.zero,) * (copies * k)
    labels = list(x.basis_labels) + [f"m{c + 1}.{t}" for c in range(copies) for t in range(k)]
    alg = StructureAlgebra(x.field, d + copies * k, entries, unit=unit, basis_labels=labels)
    if x._valid:
        alg._valid = True
    return alg


def _kron(a: Matrix, b: Matrix) -> Matrix:
    f = a.field
    rows = []
    for ra in a.data:
        for rb in b.data:
            rows.append(tuple(x * y for x in ra for y in rb))
    return Matrix(f, rows, a.cols * b.cols)


def _restrict(ops, s: Subspace):
    f = s.field
    return tuple(Matrix.from_columns(f, [s.coordinates(A.apply(v)) for v in s.basis], s.dim) for A in ops)


def _random_small_algebra(field: Field, rng: random.Random):
    while True:
        d = rng.choice((2, 3))
        ngens = rng.choice((1, 2))
        gens = []
        for _ in range(ngens):
            rows = [[field.random(rng, 2) for _ in range(d)] for _ in range(d)]
            if ngens == 2:  # keep the pair inside a solvable shape so the span stays small
                rows = [[v if c >= r else field.zero for c, v in enumerate(row)] for r, row in enumerate(rows)]
                if d == 3:
                    rows = [[v if c == r else field.zero for c, v in enumerate(row)] for r, row in enumerate(rows)]
            gens.append(Matrix(field, rows, d))
        sub = construct_from_generators(field, gens, d)
        if sub.algebra.dim <= 3:
            return sub.algebra, sub, d


def random_bimodule_instance(field: Field, rng: random.Random, max_dim: int = 8) -> tuple[StructureAlgebra, Bimodule]:
    """A random X (dim <= 3, generated by small matrices) with a bimodule M = V ⊗ W.

    V is the natural column module or the regular left module, W the natural
    row module or the regular right module.  When V ⊗ W is larger than
    ``max_dim`` it is cut down to the sub-bimodule generated by a random
    element.
    """
    while True:
        x, sub, d = _random_small_algebra(field, rng)
        natural_left = sub.embedding
        natural_right = tuple(e.T for e in sub.embedding)
        if rng.random() < 0.5:
            lv, dv = natural_left, d
        else:
            lv, dv = x.left_regular, x.dim
        if rng.random() < 0.5:
            rw, dw = natural_right, d
        else:
            rw, dw = x.right_regular, x.dim
        iv, iw = Matrix.identity(field, dv), Matrix.identity(field, dw)
        left = tuple(_kron(A, iw) for A in lv)
        right = tuple(_kron(iv, B) for B in rw)
        dim = dv * dw
        for _ in range(8):
            if dim <= max_dim:
                break
            v0 = tuple(field.random(rng, 2) for _ in range(dim))
            span = Subspace.span(field, dim, ((L @ R).apply(v0) for L in left for R in right))
            if 0 < span.dim <= max_dim:
                left, right, dim = _restrict(left, span), _restrict(right, span), span.dim
        if dim <= max_dim:
            break
    return x, Bimodule(x, dim, left, right)


# ---------------------------------------------------------------------------
# family registry

_REGISTRY: dict[str, Callable[[dict], TruncationFamily]] = {}


def register_family(name: str):
    def deco(fn):
        _REGISTRY[name] = fn
        return fn
    return deco


def family_names() -> list[str]:
    return sorted(_REGISTRY)


def builtin_family(name: str, params: dict | None = None, levels: Sequence[int] = ()) -> TruncationFamily:
    """Look up a registry family; the tower invariant is checked at every level in ``levels``."""
    if name not in _REGISTRY:
        raise UnknownFamily(f"unknown family {name!r}; known: {', '.join(family_names())}")
    params = dict(params or {})
    fam = _REGISTRY[name](params)
    for n in levels:
        truncate(fam, n)
    return fam


@register_family("unitization_square_zero")
def _unitization(params):
    _check_keys("unitization_square_zero", params, ("field",))
    f = parse_field(params.get("field"))
    return TruncationFamily("unitization_square_zero", params, f,
                            lambda n: unitization_square_zero(f, n), lambda n: True, min_level=2)


@register_family("truncated_polynomial")
def _polynomial(params):
    _check_keys("truncated_polynomial", params, ("field",))
    f = parse_field(params.get("field"))
    return TruncationFamily("truncated_polynomial", params, f,
                            lambda n: polynomial_truncation(f, n), lambda n: True, min_level=1)


@register_family("matrix_tower")
def _matrix_tower(params):
    _check_keys("matrix_tower", params, ("field", "d"))
    f = parse_field(params.get("field"))
    d = _int_param("matrix_tower", params, "d", 2, 1)
    alg = matrix_algebra(f, d)
    ident = Matrix.identity(f, d * d)
    return TruncationFamily("matrix_tower", params, f, lambda n: alg, lambda n: True, min_level=1,
                            projector=lambda small, big: ident)


def _block_diag(a: Matrix, b: Matrix) -> Matrix:
    f = a.field
    z = f.zero
    rows = [tuple(r) + (z,) * b.cols for r in a.data] + [(z,) * a.cols + tuple(r) for r in b.data]
    return Matrix._raw(f, tuple(rows), a.cols + b.cols)


def direct_sum_family(left: TruncationFamily, right: TruncationFamily, params: dict | None = None) -> TruncationFamily:
    """Levelwise direct product, left block first."""
    if left.field != right.field:
        raise BadParams("direct_sum: summands over different fields")
    return TruncationFamily(
        "direct_sum", params if params is not None else {"left": left.to_json(), "right": right.to_json()},
        left.field,
        lambda n: direct_product(left.build(n), right.build(n)),
        lambda n: left.is_admissible(n) and right.is_admissible(n),
        min_level=max(left.min_level, right.min_level),
        projector=lambda s, b: _block_diag(left.projection(s, b), right.projection(s, b)),
    )


def _sub_family(name, spec):
    if isinstance(spec, str):
        return builtin_family(spec, {})
    if isinstance(spec, dict) and "family" in spec:
        return builtin_family(spec["family"], spec.get("params", {}))
    raise BadParams(f"{name}: summand must be a family name or {{'family': ..., 'params': ...}}")


@register_family("direct_sum")
def _direct_sum(params):
    _check_keys("direct_sum", params, ("left", "right"))
    if "left" not in params or "right" not in params:
        raise BadParams("direct_sum needs 'left' and 'right'")
    return direct_sum_family(_sub_family("direct_sum", params["left"]),
                             _sub_family("direct_sum", params["right"]), params)


def square_zero_extension_family(x: StructureAlgebra, m: Bimodule, params: dict | None = None) -> TruncationFamily:
    """Level N is ``X ⋉ M^N``; the tower drops the last copies of M."""
    if params is None:
        params = {"algebra": x.to_json(), "bimodule": "custom"}
    mark_valid(x)
    if not m.is_valid():
        raise BadParams("square_zero_extension: bimodule axioms fail")
    return TruncationFamily("square_zero_extension", params, x.field,
                            lambda n: square_zero_extension(x, m, n), lambda n: True, min_level=1)


@register_family("square_zero_extension")
def _square_zero_extension(params):
    _check_keys("square_zero_extension", params, ("algebra", "bimodule", "base_dir"))
    if "algebra" not in params:
        raise BadParams("square_zero_extension needs 'algebra' (file path or algebra JSON)")
    base = params.get("base_dir")
    try:
        x = algebra_from_json(params["algebra"], Path(base) if base else None)
    except (OSError, KeyError, ValueError) as exc:
        raise BadParams(f"square_zero_extension: cannot load algebra: {exc}") from None
    rule = params.get("bimodule", "regular")
    if rule == "regular":
        m = regular_bimodule(x)
    elif rule == "dual":
        m = dual_bimodule(x)
    else:
        raise BadParams(f"square_zero_extension: bimodule must be 'regular' or 'dual', got {rule!r}")
    public = {k: v for k, v in params.items() if k != "base_dir"}
    return square_zero_extension_family(x, m, public)


def tower_family(algebras: Sequence[StructureAlgebra], quotients: Sequence[Matrix], name: str = "tower") -> TruncationFamily:
    """A user tower: level k is ``algebras[k-1]``; ``quotients[k-1]`` maps level k+1 onto level k."""
    algebras = list(algebras)
    quotients = list(quotients)
    if not algebras:
        raise BadParams("tower needs at least one algebra")
    if len(quotients) != len(algebras) - 1:
        raise BadParams(f"tower of {len(algebras)} algebras needs {len(algebras) - 1} quotient maps")
    f = algebras[0].field
    for k, q in enumerate(quotients):
        if q.shape != (algebras[k].dim, algebras[k + 1].dim):
            raise BadParams(f"quotient map {k} has shape {q.shape}")

    def proj(small, big):
        m = Matrix.identity(f, algebras[big - 1].dim)
        for lvl in range(big - 1, small - 1, -1):
            m = quotients[lvl - 1] @ m
        return m

    return TruncationFamily(name, {"levels": len(algebras)}, f, lambda n: algebras[n - 1],
                            lambda n: n <= len(algebras), min_level=1, projector=proj)


@dataclass(frozen=True)
class ScrambledFamily:
    """A family seen through a seeded random basis change at every level."""

    family: TruncationFamily
    base: TruncationFamily
    seed: int
    changes: dict

    def change(self, n: int) -> BasisChange:
        return self.changes[n]


def sparse_scramble(field: Field, n: int, rng: random.Random, per_row: int = 2) -> BasisChange:
    """A random invertible change of basis with few nonzeros per row.

    Permutation times a unit upper and a unit lower triangular factor, each
    with about ``per_row`` random off-diagonal entries per row, and random
    nonzero scalings; structure constants stay sparse enough for exact work
    at a few dozen dimensions.
    """
    def unit_triangular(upper):
        rows = []
        for i in range(n):
            row = [field.zero] * n
            row[i] = field.one
            pool = list(range(i + 1, n)) if upper else list(range(i))
            for j in rng.sample(pool, min(per_row, len(pool))):
                row[j] = field.random(rng, 2)
            rows.append(row)
        return Matrix(field, rows, n)

    perm = list(range(n))
    rng.shuffle(perm)
    scales = []
    for _ in range(n):
        c = field.zero
        while not c:
            c = field.random(rng, 2)
        scales.append(c)
    P = Matrix(field, [[scales[i] if perm[i] == j else field.zero for j in range(n)] for i in range(n)], n)
    return BasisChange.from_forward(P @ unit_triangular(True) @ unit_triangular(False))


def scrambled_family(base: TruncationFamily, seed: int, dense: bool = False) -> ScrambledFamily:
    """Every level of ``base`` in a seeded random basis (sparse by default, see :func:`sparse_scramble`)."""
    f = base.field
    changes: dict[int, BasisChange] = {}

    def bc(n):
        if n not in changes:
            rng = random.Random(seed ^ (n * 7919))
            dim = base.build(n).dim
            if dense:
                changes[n] = BasisChange.from_forward(random_invertible(f, dim, rng, 2))
            else:
                changes[n] = sparse_scramble(f, dim, rng)
        return changes[n]

    def build(n):
        return change_basis(truncate(base, n), bc(n))

    def proj(small, big):
        # old coords of the big level, project, then new coords of the small level
        return bc(small).inverse.T @ base.projection(small, big) @ bc(big).forward.T

    fam = TruncationFamily(f"scrambled({base.name})", {"base": base.to_json(), "seed": seed}, f,
                           build, base.is_admissible, min_level=base.min_level, projector=proj)
    return ScrambledFamily(fam, base, seed, changes)


# ---------------------------------------------------------------------------
# rank profiles


@dataclass(frozen=True)
class Budget:
    levels: tuple = ()
    seed: int = 0
    samples: int = 8

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))

    def to_json(self) -> dict:
        return {"levels": list(self.levels), "seed": self.seed, "samples": self.samples}


@dataclass(frozen=True)
class RankRecord:
    level: int
    max_rank: int
    witness: tuple
    seed: int
    count: int
    corrections: int = 0

    def to_json(self, field: Field) -> dict:
        return {
            "level": self.level,
            "max_rank": self.max_rank,
            "witness": [field.format(x) for x in self.witness],
            "sampler": {"seed": self.seed, "count": self.count, "corrections": self.corrections},
        }


@dataclass(frozen=True)
class RankMapProfile:
    family: dict
    field: Field
    records: tuple

    @property
    def levels(self) -> tuple:
        return tuple(r.level for r in self.records)

    @property
    def ranks(self) -> tuple:
        return tuple(r.max_rank for r in self.records)

    def to_json(self) -> dict:
        return {"family": self.family, "records": [r.to_json(self.field) for r in self.records]}


def sample_functionals(a: StructureAlgebra, level: int, seed: int, samples: int) -> list[tuple]:
    """Coordinate functionals, the all-ones functional, then seeded random ones (stream ``seed ^ level``)."""
    f, n = a.field, a.dim
    out = [a.basis_vector(i) for i in range(n)]
    out.append((f.one,) * n)
    rng = random.Random(seed ^ level)
    for _ in range(samples):
        out.append(tuple(f.random(rng) for _ in range(n)))
    return out


def best_functional(a: StructureAlgebra, candidates: Sequence[tuple]) -> tuple[int, tuple]:
    """Maximal rank among ``candidates``; ties go to the lexicographically smallest vector."""
    best_rank, best = -1, None
    for rho in candidates:
        r = mat_rank(rank_map(a, rho))
        if r > best_rank or (r == best_rank and tuple(rho) < best):
            best_rank, best = r, tuple(rho)
    return best_rank, best


def _check_levels(f: TruncationFamily, levels):
    levels = list(levels)
    for n in levels:
        if not f.is_admissible(n):
            raise BadLevel(f"level {n!r} is not admissible for family {f.name}")
    if levels != sorted(set(levels)):
        raise BadLevel("levels must be strictly increasing")
    return levels


def rank_profile(f: TruncationFamily, levels: Sequence[int], budget: Budget | None = None) -> RankMapProfile:
    budget = budget or Budget(tuple(levels))
    levels = _check_levels(f, levels)
    records = []
    for n in levels:
        a = truncate(f, n)
        cands = sample_functionals(a, n, budget.seed, budget.samples)
        r, w = best_functional(a, cands)
        records.append(RankRecord(n, r, w, budget.seed, len(cands)))
    return RankMapProfile(f.to_json(), f.field, tuple(records))


# ---------------------------------------------------------------------------
# extraction of a square-zero ideal


@dataclass(frozen=True)
class SquareZeroCertificate:
    level: int
    ideal: IdealBasis
    codim: int
    verified: dict
    diagnostics: dict = dc_field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.verified.values())

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "field": self.ideal.subspace.field.to_json(),
            "ideal": self.ideal.to_json(),
            "codim": self.codim,
            "verified": dict(self.verified),
            "diagnostics": dict(self.diagnostics),
        }


def certificate_from_json(obj: dict, field: Field | None = None) -> SquareZeroCertificate:
    f = Field.from_json(obj["field"]) if "field" in obj else field
    if f is None:
        raise ValueError("certificate does not name its field")
    n = obj["level"]
    vecs = [[f.parse(str(x)) for x in v] for v in obj["ideal"]["basis"]]
    sub = Subspace.span(f, n, vecs)
    return SquareZeroCertificate(obj["level"], IdealBasis(sub, obj["ideal"].get("side", TWO_SIDED)),
                                 obj["codim"], dict(obj.get("verified", {})), dict(obj.get("diagnostics", {})))


class _Exceed(Exception):
    def __init__(self, rho, rank):
        super().__init__(rank)
        self.rho = rho
        self.rank = rank


class _Pairing:
    """The matrices ``[rho(x_i y_j)]`` for fixed bases ``xs`` of X and ``ys`` of Y."""

    def __init__(self, a: StructureAlgebra, xs, ys, products=None):
        self.a = a
        self.xs = list(xs)
        self.ys = list(ys)
        if products is None:
            products = [[tuple((k, c) for k, c in enumerate(a.multiply(x, y)) if c) for y in self.ys]
                        for x in self.xs]
        self.products = products

    @classmethod
    def full(cls, a: StructureAlgebra):
        n = a.dim
        prods = [[tuple(sorted(a.product(i, j).items())) for j in range(n)] for i in range(n)]
        basis = [a.basis_vector(i) for i in range(n)]
        return cls(a, basis, basis, prods)

    def matrix(self, rho) -> Matrix:
        f = self.a.field
        p = f.p
        rows = []
        for prow in self.products:
            row = []
            for terms in prow:
                v = 0
                for k, c in terms:
                    if rho[k]:
                        v += c * rho[k]
                row.append(v % p if p else f(v))
            rows.append(tuple(row))
        return Matrix._raw(f, tuple(rows), len(self.ys))

    def rank(self, rho) -> int:
        if not self.xs or not self.ys:
            return 0
        return mat_rank(self.matrix(rho))

    def kernels(self, rho):
        f, n = self.a.field, self.a.dim
        if not self.xs or not self.ys:
            return self.xs, self.ys
        m = self.matrix(rho)
        left = [combine(f, c, self.xs, n) for c in m.T.kernel().basis]
        right = [combine(f, c, self.ys, n) for c in m.kernel().basis]
        return left, right

    def image(self) -> Subspace:
        f, n = self.a.field, self.a.dim
        ech = _Echelon(f.p, n)
        z = f.zero
        for prow in self.products:
            for terms in prow:
                if terms:
                    v = [z] * n
                    for k, c in terms:
                        v[k] = c
                    ech.add(v)
        return Subspace(f, n, ech.basis(), ech.pivots())


class _Extractor:
    def __init__(self, a: StructureAlgebra, seed: int, samples: int, max_enum: int):
        self.a = a
        self.f = a.field
        self.seed = seed
        self.samples = samples
        self.max_enum = max_enum
        self.compressed = False
        self.depth = 0
        self.corrections = 0

    def _scalars(self, count):
        if self.f.p:
            return [self.f(t) for t in range(min(self.f.p, count))]
        return [self.f(t) for t in range(count)]

    def _combo(self, t, tau, sigma):
        f = self.f
        out = tuple(t * x + y for x, y in zip(tau, sigma))
        return tuple(v % f.p for v in out) if f.p else out

    def _lift(self, w: Subspace, sigma) -> tuple:
        """Functional on R agreeing with ``sigma`` on the echelon basis of ``w``."""
        v = [self.f.zero] * self.a.dim
        for piv, s in zip(w.pivots, sigma):
            v[piv] = s
        return tuple(v)

    def _raise_above(self, fam: _Pairing, tau, n, sigma):
        """Some ``t tau + sigma`` (t = 0 first) has rank above ``n`` in ``fam``; raise it."""
        for t in self._scalars(2 * n + 1):
            rho = self._combo(t, tau, sigma)
            r = fam.rank(rho)
            if r > n:
                raise _Exceed(rho, r)
        raise ExtractionFailed("no functional exceeding the claimed rank was found",
                               {"claimed": n, "depth": self.depth})

    def _child_best(self, child: _Pairing, w: Subspace, depth: int):
        f = self.f
        k = w.dim
        cands = []
        if f.p and f.p ** k <= self.max_enum:
            for combo in itertools.product(range(f.p), repeat=k):
                if any(combo):
                    cands.append(self._lift(w, combo))
        else:
            for i in range(k):
                cands.append(self._lift(w, [f.one if j == i else f.zero for j in range(k)]))
            cands.append(self._lift(w, [f.one] * k))
            rng = random.Random(self.seed ^ (self.a.dim << 8) ^ depth)
            for _ in range(self.samples):
                cands.append(self._lift(w, [f.random(rng) for _ in range(k)]))
        best_r, best = -1, None
        for rho in cands:
            r = child.rank(rho)
            if r > best_r or (r == best_r and rho < best):
                best_r, best = r, rho
        return best, best_r

    def solve(self, fam: _Pairing, tau, n: int, depth: int):
        """Returns bases of X', Y' with X' Y' = 0, or raises _Exceed with a better functional for ``fam``."""
        self.depth = max(self.depth, depth)
        xs, ys = fam.kernels(tau)
        child = _Pairing(self.a, xs, ys)
        w = child.image()
        if w.dim == 0:
            return xs, ys
        p = self.f.p
        if p is None or p > 2 * n:
            # large field: the corner block must vanish, so some t tau + lambda exceeds n
            for i in range(w.dim):
                sigma = self._lift(w, [self.f.one if j == i else self.f.zero for j in range(w.dim)])
                try:
                    self._raise_above(fam, tau, n, sigma)
                except ExtractionFailed:
                    continue
            raise ExtractionFailed("nonzero corner block over a large field without a rank increase",
                                   {"claimed": n, "depth": depth})
        self.compressed = True
        sigma, m = self._child_best(child, w, depth)
        while True:
            if m >= n:
                self._raise_above(fam, tau, n, sigma)
            try:
                return self.solve(child, sigma, m, depth + 1)
            except _Exceed as e:
                self.corrections += 1
                sigma, m = e.rho, e.rank


def _stable(a: StructureAlgebra, sub: Subspace, target: Subspace, side: str) -> Subspace:
    """``{s in sub : a_i s in target}`` (LEFT) or ``{s in sub : s a_i in target}``."""
    f, n = a.field, a.dim
    if not sub.basis:
        return sub
    cols = []
    for b in sub.basis:
        col = []
        for i in range(n):
            e = a.basis_vector(i)
            prod = a.multiply(e, b) if side == LEFT else a.multiply(b, e)
            col.extend(target.residue(prod))
        cols.append(col)
    ker = Matrix.from_columns(f, cols, n * n).kernel()
    return Subspace.span(f, n, (combine(f, c, sub.basis, n) for c in ker.basis))


def _translates(a: StructureAlgebra, sub: Subspace, side: str) -> Subspace:
    n = a.dim
    vecs = []
    for b in sub.basis:
        for i in range(n):
            e = a.basis_vector(i)
            vecs.append(a.multiply(e, b) if side == LEFT else a.multiply(b, e))
    return Subspace.span(a.field, n, vecs)


def _radical_over(a: StructureAlgebra, j: Subspace) -> Subspace:
    """rad(A) as the preimage of rad(A/J); valid because the square-zero ideal J lies in rad(A)."""
    q, proj = quotient(a, IdealBasis(j, TWO_SIDED), verify=False)
    rq = radical(q)
    cols = [rq.residue(proj.column(i)) for i in range(a.dim)]
    return Matrix.from_columns(a.field, cols, q.dim).kernel()


def _saturate(a: StructureAlgebra, j: Subspace) -> Subspace:
    """Enlarge a square-zero ideal canonically.

    rad(A) when it squares to zero (then it is the largest square-zero ideal),
    otherwise the double annihilator of J, which is again a square-zero ideal.
    """
    rad = _radical_over(a, j)
    if is_square_zero(a, rad):
        return rad
    sat = annihilator(a, annihilator(a, j, TWO_SIDED), TWO_SIDED)
    if sat.contains(j) and is_square_zero(a, sat):
        return sat
    return j


def _make_certificate(a: StructureAlgebra, j: Subspace, diagnostics: dict) -> SquareZeroCertificate:
    flags = {
        "is_ideal": is_ideal(a, j, TWO_SIDED),
        "square_zero": is_square_zero(a, j),
        "codim_finite": j.codim == a.dim - j.dim,
    }
    return SquareZeroCertificate(a.dim, IdealBasis(j, TWO_SIDED), j.codim, flags, diagnostics)


def extract_square_zero_ideal(a: StructureAlgebra, witness: Sequence, n0: int, *, seed: int = 0,
                              samples: int = 8, max_enum: int = 256) -> SquareZeroCertificate:
    """A two-sided ideal J with J^2 = 0 built from a functional of maximal rank ``n0``.

    The left and right kernels X, Y of ``[omega(x y)]`` have codimension n0.
    When X Y = 0 the intersection is square-zero; otherwise the corner block
    ``[rho(x y)]`` on X x Y is compressed recursively (its maximal rank is
    strictly smaller) until the products vanish.  Over a field with more than
    2 n0 elements a nonzero corner block means ``omega`` was not maximal.  The
    square-zero subspace is then shrunk to a two-sided ideal and enlarged to
    its double annihilator.

    Raises NotMaximalRank carrying a better functional when one turns up.
    """
    f = a.field
    witness = tuple(f(x) for x in witness)
    if len(witness) != a.dim:
        raise DimensionMismatch(f"witness of length {len(witness)} for dimension {a.dim}")
    top = _Pairing.full(a)
    r = top.rank(witness)
    if r > n0:
        raise NotMaximalRank(witness, r, n0)
    if r < n0:
        raise ExtractionFailed(f"witness has rank {r}, not the claimed {n0}", {"rank": r, "claimed": n0})
    ex = _Extractor(a, seed, samples, max_enum)
    try:
        xs, ys = ex.solve(top, witness, n0, 0)
    except _Exceed as e:
        raise NotMaximalRank(e.rho, e.rank, n0, "compression" if ex.compressed else "direct") from None
    X, Y = Subspace.span(f, a.dim, xs), Subspace.span(f, a.dim, ys)
    r0 = X & Y
    diag = {"n0": n0, "branch": "compression" if ex.compressed else "direct", "depth": ex.depth,
            "corrections": ex.corrections, "codim_R1": X.codim, "codim_R0": r0.codim}
    s = _stable(a, r0, r0, LEFT)
    left_ideal = _translates(a, s, LEFT)
    s2 = _stable(a, left_ideal, left_ideal, RIGHT)
    j = _translates(a, s2, RIGHT)
    diag["ideal_codim_before_saturation"] = j.codim
    j = _saturate(a, j)
    cert = _make_certificate(a, j, diag)
    if not cert.ok:
        raise ExtractionFailed("certificate failed verification", diag)
    return cert


@dataclass(frozen=True)
class ExtractionAttempt:
    rank: int
    outcome: str  # "certificate" or "not_maximal"
    branch: str | None


def extract_self_correcting(a: StructureAlgebra, witness: Sequence, n0: int | None = None, *, seed: int = 0,
                            samples: int = 8, max_rounds: int = 64):
    """Extraction that restarts from the better functional whenever NotMaximalRank is raised.

    Returns the certificate and the list of attempts; ``n0`` defaults to the
    witness's own rank.
    """
    f = a.field
    witness = tuple(f(x) for x in witness)
    if n0 is None:
        n0 = mat_rank(rank_map(a, witness))
    attempts = []
    for _ in range(max_rounds):
        try:
            cert = extract_square_zero_ideal(a, witness, n0, seed=seed, samples=samples)
        except NotMaximalRank as e:
            attempts.append(ExtractionAttempt(n0, "not_maximal", e.branch))
            witness, n0 = tuple(e.witness), e.rank
            continue
        attempts.append(ExtractionAttempt(n0, "certificate", cert.diagnostics["branch"]))
        cert.diagnostics["attempts"] = len(attempts)
        return cert, attempts
    raise ExtractionFailed("rank kept increasing beyond the round limit", {"rounds": max_rounds})


def verify_certificate(a: StructureAlgebra, cert: SquareZeroCertificate) -> bool:
    """Recheck closure, J^2 = 0 and the codimension from scratch."""
    s = cert.ideal.subspace
    if cert.level != a.dim or s.ambient_dim != a.dim or s.field != a.field:
        return False
    basis = list(s.basis)
    n = a.dim
    for v in basis:
        for i in range(n):
            e = a.basis_vector(i)
            if a.multiply(e, v) not in s or a.multiply(v, e) not in s:
                return False
        for w in basis:
            if any(a.multiply(v, w)):
                return False
    return cert.codim == n - mat_rank(Matrix(a.field, basis, n)) if basis else cert.codim == n


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class RegularityVerdict:
    kind: str
    family: dict
    field: Field
    budget: Budget
    records: list
    certificates: list = dc_field(default_factory=list)
    codim: int | None = None
    tower_compatible: bool | None = None
    translate_dims: list | None = None
    reason: str = ""
    grade: str = GRADE

    @property
    def levels(self) -> tuple:
        return tuple(r.level for r in self.records)

    @property
    def ranks(self) -> tuple:
        return tuple(r.max_rank for r in self.records)

    @property
    def witnesses(self) -> tuple:
        return tuple(r.witness for r in self.records)

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "grade": self.grade,
            "family": self.family,
            "budget": self.budget.to_json(),
            "levels": list(self.levels),
            "ranks": list(self.ranks),
            "records": [r.to_json(self.field) for r in self.records],
        }
        if self.kind == REGULAR:
            out["codim"] = self.codim
        if self.certificates:
            out["tower_compatible"] = self.tower_compatible
            out["certificates"] = [c.to_json() for c in self.certificates]
        if self.translate_dims is not None:
            out["translate_dims"] = list(self.translate_dims)
        if self.reason:
            out["reason"] = self.reason
        return out


def _image_under(m: Matrix, s: Subspace) -> Subspace:
    return Subspace.span(s.field, m.rows, (m.apply(v) for v in s.basis))


def _push_down(f: TruncationFamily, records, certs):
    """Replace a level's certificate by the image of the next level's one when that is smaller.

    The tower maps are surjective homomorphisms, so the image of a square-zero
    ideal is again a square-zero ideal; small levels, where the witness rank is
    close to the dimension, profit from the larger window above them.
    """
    certs = list(certs)
    for idx in range(len(certs) - 1, 0, -1):
        small, big = records[idx - 1].level, records[idx].level
        a = truncate(f, small)
        image = _image_under(f.projection(small, big), certs[idx].ideal.subspace)
        if image.codim < certs[idx - 1].codim:
            diag = dict(certs[idx - 1].diagnostics, pushed_from_level=big,
                        extracted_codim=certs[idx - 1].codim)
            cand = _make_certificate(a, image, diag)
            if cand.ok:
                certs[idx - 1] = cand
    return certs


def decide_regularity(f: TruncationFamily, budget: Budget) -> RegularityVerdict:
    """Rank profile, then certificates when the ranks level off.

    Strictly increasing ranks give NotRegular; equal ranks on the two largest
    levels lead to extraction at every level, and certificates of one common
    codimension give Regular.  A NotMaximalRank found during extraction
    replaces that level's witness and the decision is redone.
    """
    profile = rank_profile(f, budget.levels, budget)
    records = list(profile.records)
    fam = f.to_json()
    if len(records) < 3:
        return RegularityVerdict(INCONCLUSIVE, fam, f.field, budget, records,
                                 reason="at least three levels are needed")
    while True:
        ranks = [r.max_rank for r in records]
        if all(x < y for x, y in zip(ranks, ranks[1:])):
            dims = [translate_span_dim(truncate(f, r.level), r.witness) for r in records]
            return RegularityVerdict(NOT_REGULAR, fam, f.field, budget, records, translate_dims=dims,
                                     reason="maximal ranks strictly increase")
        if ranks[-1] != ranks[-2]:
            return RegularityVerdict(INCONCLUSIVE, fam, f.field, budget, records,
                                     reason="ranks neither strictly increase nor level off")
        certs = []
        retry = False
        for idx, rec in enumerate(records):
            a = truncate(f, rec.level)
            try:
                cert = extract_square_zero_ideal(a, rec.witness, rec.max_rank,
                                                 seed=budget.seed ^ rec.level, samples=budget.samples)
                cert.diagnostics["family_level"] = rec.level
                certs.append(cert)
            except NotMaximalRank as e:
                records[idx] = RankRecord(rec.level, e.rank, tuple(e.witness), rec.seed, rec.count,
                                          rec.corrections + 1)
                retry = True
                break
        if retry:
            continue
        certs = _push_down(f, records, certs)
        codims = {c.codim for c in certs}
        compatible = all(
            _image_under(f.projection(small.level, big.level), cb.ideal.subspace) == cs.ideal.subspace
            for (small, cs), (big, cb) in zip(zip(records, certs), zip(records[1:], certs[1:]))
        )
        if len(codims) == 1:
            return RegularityVerdict(REGULAR, fam, f.field, budget, records, certs, certs[0].codim, compatible,
                                     reason="square-zero ideals of constant codimension")
        return RegularityVerdict(INCONCLUSIVE, fam, f.field, budget, records, certs, None, compatible,
                                 reason=f"certificate codimensions vary: {[c.codim for c in certs]}")


# ---------------------------------------------------------------------------
# subalgebras


@dataclass(frozen=True)
class SubalgebraReport:
    levels: tuple
    sub_dims: tuple
    sub_ranks: tuple
    parent_ranks: tuple

    @property
    def parent_bound(self) -> int:
        return max(self.parent_ranks, default=0)

    @property
    def bounded(self) -> bool:
        return all(s <= p for s, p in zip(self.sub_ranks, self.parent_ranks))

    def to_json(self) -> dict:
        return {"levels": list(self.levels), "sub_dims": list(self.sub_dims), "sub_ranks": list(self.sub_ranks),
                "parent_ranks": list(self.parent_ranks), "parent_bound": self.parent_bound,
                "bounded": self.bounded}


def subalgebra_check(f: TruncationFamily, gens_rule: Callable[[int, StructureAlgebra], Sequence[Sequence]],
                     budget: Budget) -> SubalgebraReport:
    """Rank bounds of the unital subalgebras generated by ``gens_rule(level, algebra)``.

    Each subalgebra is realized inside the left regular representation of its level.
    """
    parent = rank_profile(f, budget.levels, budget)
    dims, ranks = [], []
    for n in parent.levels:
        a = truncate(f, n)
        gens = [a.left_mult_matrix(tuple(a.field(x) for x in g)) for g in gens_rule(n, a)]
        sub = construct_from_generators(a.field, gens, a.dim).algebra
        r, _ = best_functional(sub, sample_functionals(sub, n, budget.seed, budget.samples))
        dims.append(sub.dim)
        ranks.append(r)
    return SubalgebraReport(parent.levels, tuple(dims), tuple(ranks), parent.ranks)


# ---------------------------------------------------------------------------
# family specs (JSON)


def family_from_spec(obj, base_dir: Path | None = None) -> tuple[TruncationFamily, Budget | None]:
    """``{"family": name, "params": {...}, "levels": [...], "seed": s, "samples": k}`` or
    ``{"tower": [alg, ...], "quotients": [matrix, ...]}``."""
    if isinstance(obj, (str, Path)):
        path = Path(obj)
        base_dir = path.parent
        with open(path) as fh:
            obj = json.load(fh)
    if "tower" in obj:
        algs = [algebra_from_json(x, base_dir) for x in obj["tower"]]
        f = algs[0].field
        qs = [Matrix(f, [[f.parse(str(x)) for x in row] for row in q],
                     algs[k + 1].dim) for k, q in enumerate(obj.get("quotients", []))]
        fam = tower_family(algs, qs)
    elif "family" in obj:
        params = dict(obj.get("params", {}))
        if obj["family"] == "square_zero_extension" and base_dir is not None:
            params.setdefault("base_dir", str(base_dir))
        fam = builtin_family(obj["family"], params)
    else:
        raise BadParams("family spec needs 'family' or 'tower'")
    budget = None
    if "levels" in obj:
        budget = Budget(tuple(obj["levels"]), obj.get("seed", 0), obj.get("samples", 8))
    return fam, budget


def default_levels(f: TruncationFamily, count: int = 4) -> tuple:
    out, n = [], max(f.min_level, 1)
    while len(out) < count:
        if f.is_admissible(n):
            out.append(n)
        n = n * 2 if n > 1 else 2
    return tuple(out)


__all__ = [
    "Bimodule", "Budget", "GRADE", "INCONCLUSIVE", "NOT_REGULAR", "REGULAR", "RankMapProfile", "RankRecord",
    "ExtractionAttempt", "RegularityVerdict", "ScrambledFamily", "SquareZeroCertificate", "SubalgebraReport", "best_functional",
    "builtin_family", "certificate_from_json", "decide_regularity", "extract_self_correcting", "default_levels", "direct_sum_family",
    "dual_bimodule", "extract_square_zero_ideal", "family_from_spec", "family_names", "parse_field",
    "random_bimodule_instance", "rank_profile", "register_family", "regular_bimodule", "sample_functionals",
    "scrambled_family", "sparse_scramble", "square_zero_extension", "square_zero_extension_family", "subalgebra_check",
    "tower_family", "verify_certificate",
]
