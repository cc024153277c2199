import random

import pytest

from arensalg.algebra import LEFT, RIGHT, construct_from_generators, matrix_algebra, polynomial_truncation
from arensalg.duality import (
    EXPECTED_NA,
    HOLDS,
    adjoint,
    adjoint_density_check,
    check_biend_inclusion,
    dual_module,
    weak_density_check,
)
from arensalg.errors import NotAHomomorphism
from arensalg.exactmath import QQ, Matrix
from arensalg.modules import (
    RModule,
    bicommutant,
    classify,
    direct_sum,
    free_module,
    hom_space,
    regular_module,
    validate_module,
)

from corpus import F5, generated_corpus, module_corpus, natural_module, unit_matrix, upper_triangular, zero_module_poly


def m2_natural(field=QQ):
    return natural_module(construct_from_generators(field, [unit_matrix(field, 2, i, j) for i in range(2) for j in range(2)]))


def _combo(maps, rng, field):
    out = Matrix.zeros(field, maps[0].rows, maps[0].cols) if maps else None
    for m in maps:
        out = out + m.scale(field.random(rng))
    return out


# --- dual modules -----------------------------------------------------------------

def test_dual_of_regular_module_is_right_module():
    a = polynomial_truncation(QQ, 3)
    d = dual_module(regular_module(a))
    assert d.module.side == RIGHT and d.dim == 3
    assert validate_module(d.module).valid
    for k in range(3):
        assert d.module.action[k] == a.left_mult_matrix(a.basis_vector(k)).T


def test_double_dual_returns_original_actions():
    for _, u in module_corpus():
        dd = dual_module(dual_module(u).module).module
        assert dd.side == u.side and dd.action == u.action


def test_dual_of_natural_m2_module():
    u = m2_natural()
    d = dual_module(u)
    assert validate_module(d.module).valid
    assert all(D == A.T for D, A in zip(d.module.action, u.action))


# --- adjoints -------------------------------------------------------------------------

def test_adjoint_identity_and_zero():
    u = regular_module(matrix_algebra(F5, 2))
    assert adjoint(Matrix.identity(F5, 4), u, u).adjoint == Matrix.identity(F5, 4)
    assert adjoint(Matrix.zeros(F5, 4, 4), u, u).adjoint == Matrix.zeros(F5, 4, 4)


def test_adjoint_rejects_non_homomorphism():
    u = regular_module(polynomial_truncation(QQ, 2))
    with pytest.raises(NotAHomomorphism):
        adjoint(Matrix(QQ, [[1, 0], [0, 0]]), u, u)


@pytest.mark.parametrize("a", generated_corpus(8, seed=31), ids=lambda a: f"dim{a.dim}-{a.field}")
def test_adjoint_reverses_composition(a):
    u, v = regular_module(a), free_module(a, 2)
    rng = random.Random(a.dim)
    huv, hvv = hom_space(u, v).maps, hom_space(v, v).maps
    for _ in range(3):
        f, g = _combo(huv, rng, a.field), _combo(hvv, rng, a.field)
        fs, gs = adjoint(f, u, v).adjoint, adjoint(g, v, v).adjoint
        assert adjoint(g @ f, u, v).adjoint == fs @ gs


# --- biendomorphism inclusions ---------------------------------------------------------

def test_regular_module_inclusions_hold():
    for a in (polynomial_truncation(QQ, 3), matrix_algebra(F5, 2)):
        rep = check_biend_inclusion(regular_module(a))
        assert rep.inclusion_i == HOLDS and rep.inclusion_ii == HOLDS
        assert rep.biend_dims == (a.dim, a.dim)


def test_free_module_over_m2_inclusions_hold():
    rep = check_biend_inclusion(free_module(matrix_algebra(QQ, 2), 2))
    assert rep.inclusion_i == HOLDS and rep.inclusion_ii == HOLDS


def test_out_of_hypothesis_module_is_marked():
    rep = check_biend_inclusion(zero_module_poly(QQ))
    assert rep.inclusion_i == EXPECTED_NA and rep.inclusion_ii == EXPECTED_NA
    assert not rep.hypotheses["faithful"]
    assert isinstance(rep.raw_inclusion_i, bool) and isinstance(rep.raw_inclusion_ii, bool)
    js = rep.to_json()
    assert set(js) == {"hypotheses", "inclusion_i", "inclusion_ii", "raw", "biend_dims"}


@pytest.mark.parametrize("label,u", module_corpus(), ids=lambda x: x if isinstance(x, str) else "")
def test_inclusions_never_fail_inside_hypotheses(label, u):
    rep = check_biend_inclusion(u)
    assert "FAILS" not in (rep.inclusion_i, rep.inclusion_ii)


# --- adjoint density --------------------------------------------------------------------

def test_adjoint_density_examples():
    a = polynomial_truncation(QQ, 3)
    r = adjoint_density_check(regular_module(a), regular_module(a))
    assert r.surjective and r.hom_dim == r.dual_hom_dim == 3
    scalars = RModule(matrix_algebra(QQ, 1), [Matrix.identity(QQ, 2)], LEFT, 2)
    r = adjoint_density_check(scalars, scalars)
    assert r.surjective and r.hom_dim == 4 and r.witness is None


@pytest.mark.parametrize("a", generated_corpus(8, seed=37), ids=lambda a: f"dim{a.dim}-{a.field}")
def test_hom_dimensions_agree_under_duality(a):
    u, v = regular_module(a), direct_sum(regular_module(a), free_module(a, 1))
    r = adjoint_density_check(u, v)
    assert r.surjective
    du, dv = dual_module(u).module, dual_module(v).module
    assert hom_space(u, v).dim == hom_space(dv, du).dim


# --- weak density -------------------------------------------------------------------------

def test_weak_density_for_faithful_torsionless_projective():
    # u in T u for every tuple is part of the hypothesis; see the T2 case below
    checked = 0
    for label, u in module_corpus():
        flags = classify(u)
        if not (flags.faithful and flags.torsionless and flags.projective and flags.trace_unital):
            continue
        d = dual_module(u).module
        for s in bicommutant(d).biend.inclusion:
            rng = random.Random(len(label))
            pairs = [(tuple(u.field.random(rng) for _ in range(u.dim)), tuple(u.field.random(rng) for _ in range(u.dim)))
                     for _ in range(3)]
            assert weak_density_check(u, s, pairs) is not None, label
            checked += 1
    assert checked > 0


def test_weak_density_needs_trace_unital():
    # F^2 over upper triangular 2x2 matrices is faithful, torsionless and projective,
    # but Biend(U*) is all of M_2 while R only reaches upper triangular operators
    u = natural_module(upper_triangular(QQ))
    flags = classify(u)
    assert flags.faithful and flags.torsionless and flags.projective and not flags.trace_unital
    s = Matrix(QQ, [[0, 1], [0, 0]])
    assert s.vec() in bicommutant(dual_module(u).module).biend.subspace
    assert weak_density_check(u, s, [((1, 0), (0, 1))]) is None


def test_weak_density_can_fail_for_non_biend_operator():
    # over the one-dimensional algebra only scalars are reachable
    scalars = RModule(matrix_algebra(QQ, 1), [Matrix.identity(QQ, 2)], LEFT, 2)
    s = Matrix(QQ, [[0, 1], [0, 0]])
    assert weak_density_check(scalars, s, [((1, 0), (0, 1)), ((0, 1), (1, 0))]) is None
    assert weak_density_check(scalars, s, []) == (0,)
