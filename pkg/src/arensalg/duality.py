"""Dual modules, adjoints, and the biendomorphism comparisons between U and U*.

Everything is stated in dual bases: the dual of a left module has the
transposed operators and lives on the right, and the adjoint of a map is its
transpose.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .algebra import LEFT, RIGHT
from .errors import NotAHomomorphism, SideMismatch
from .modules import (
    ModuleFlags,
    RModule,
    _check_pair,
    bicommutant,
    classify,
    hom_space,
    is_homomorphism,
)
from .exactmath import Matrix, Subspace, solve_linear

HOLDS, FAILS, EXPECTED_NA = "HOLDS", "FAILS", "EXPECTED_NA"


@dataclass(frozen=True)
class DualModule:
    base: RModule
    module: RModule
    pairing: str = "dual_basis"

    @property
    def dim(self) -> int:
        return self.module.dim


def dual_module(u: RModule) -> DualModule:
    """U* with ``<x, rho r> = <r x, rho>``: operators are transposed, side flipped."""
    side = RIGHT if u.side == LEFT else LEFT
    return DualModule(u, RModule(u.algebra, [A.T for A in u.action], side, u.dim))


@dataclass(frozen=True)
class AdjointMap:
    original: Matrix
    adjoint: Matrix


def adjoint(f: Matrix, u: RModule, v: RModule) -> AdjointMap:
    if not is_homomorphism(f, u, v):
        raise NotAHomomorphism("map does not intertwine the module actions")
    fs = f.T
    if not is_homomorphism(fs, dual_module(v).module, dual_module(u).module):
        raise AssertionError("adjoint failed to intertwine the dual actions")
    return AdjointMap(f, fs)


def _transposed_span(ops: Sequence[Matrix], n: int, field) -> Subspace:
    return Subspace.span(field, n * n, (o.T.vec() for o in ops))


@dataclass(frozen=True)
class Th3Report:
    hypotheses: dict
    inclusion_i: str
    inclusion_ii: str
    raw_inclusion_i: bool
    raw_inclusion_ii: bool
    biend_dims: tuple

    def to_json(self) -> dict:
        return {
            "hypotheses": dict(self.hypotheses),
            "inclusion_i": self.inclusion_i,
            "inclusion_ii": self.inclusion_ii,
            "raw": {"inclusion_i": self.raw_inclusion_i, "inclusion_ii": self.raw_inclusion_ii},
            "biend_dims": list(self.biend_dims),
        }


def check_biend_inclusion(u: RModule, flags: ModuleFlags | None = None) -> Th3Report:
    """Compare Biend(U) with Biend(U*) under the transpose identification.

    (i)  {b^T : b in Biend(U)} inside Biend(U*)   -- expected for faithful, torsionless, T-accessible U
    (ii) {s^T : s in Biend(U*)} inside Biend(U)   -- expected for faithful projective U
    (a finite separating subset always exists in finite dimension).
    Outside the hypotheses the verdict is EXPECTED_NA and the raw answer is kept.
    """
    if u.side != LEFT:
        raise SideMismatch("check_biend_inclusion expects a left module")
    if flags is None:
        flags = classify(u)
    B = bicommutant(u).biend
    Bt = bicommutant(dual_module(u).module).biend
    m, f = u.dim, u.field
    raw_i = Bt.subspace.contains(_transposed_span(B.inclusion, m, f))
    raw_ii = B.subspace.contains(_transposed_span(Bt.inclusion, m, f))
    hyp_i = flags.faithful and flags.torsionless and flags.T_accessible
    hyp_ii = flags.faithful and flags.projective
    hypotheses = {
        "faithful": flags.faithful,
        "torsionless": flags.torsionless,
        "T_accessible": flags.T_accessible,
        "projective": flags.projective,
        "finite_separating_subset": True,
    }
    verdict_i = (HOLDS if raw_i else FAILS) if hyp_i else EXPECTED_NA
    verdict_ii = (HOLDS if raw_ii else FAILS) if hyp_ii else EXPECTED_NA
    return Th3Report(hypotheses, verdict_i, verdict_ii, raw_i, raw_ii, (B.dim, Bt.dim))


@dataclass(frozen=True)
class AdjointDensityResult:
    surjective: bool
    hom_dim: int
    dual_hom_dim: int
    witness: Matrix | None = None


def adjoint_density_check(u: RModule, v: RModule) -> AdjointDensityResult:
    """Is every map V* -> U* the adjoint of some map U -> V?

    In finite dimension approximation on finite sets is the same as exact
    equality, so this is a subspace comparison; a non-adjoint map is returned
    as witness when it fails.
    """
    _check_pair(u, v)
    H = hom_space(u, v)
    Hd = hom_space(dual_module(v).module, dual_module(u).module)
    adj = Subspace.span(u.field, u.dim * v.dim, (h.T.vec() for h in H.maps))
    target = Hd.subspace()
    if adj == target:
        return AdjointDensityResult(True, H.dim, Hd.dim)
    witness = next((g for g in Hd.maps if g.vec() not in adj), None)
    return AdjointDensityResult(False, H.dim, Hd.dim, witness)


def weak_density_check(u: RModule, s: Matrix, pairs: Sequence[tuple[Sequence, Sequence]]):
    """Some r in R with <x, rho r> = <x, rho s> for all (x, rho) in ``pairs``, else None.

    ``s`` is an operator on U* (for instance an element of Biend(U*)).
    """
    a, f = u.algebra, u.field
    pairs = list(pairs)
    if not pairs:
        return a.zero_vector()
    cols = []
    for k in range(a.dim):
        A = u.action[k]
        cols.append([_dot(f, rho, A.apply(x)) for x, rho in pairs])
    rhs = [_dot(f, x, s.apply(rho)) for x, rho in pairs]
    return solve_linear(Matrix.from_columns(f, cols, len(pairs)), rhs)


def _dot(f, x, y):
    s = sum((a * b for a, b in zip(x, y) if a and b), f.zero)
    return s % f.p if f.p else s
