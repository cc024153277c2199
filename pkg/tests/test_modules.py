import itertools
import random

import pytest

from arensalg.algebra import RIGHT, construct_from_generators, matrix_algebra, polynomial_truncation, unitization_square_zero
from arensalg.errors import SideMismatch
from arensalg.exactmath import GF, QQ, Matrix, Subspace
from arensalg.modules import (
    REVERSE_COMPOSITION,
    RModule,
    as_opposite,
    bicommutant,
    classify,
    commutant,
    density_check,
    direct_sum,
    free_module,
    hom_space,
    regular_module,
    trace_ideal,
    validate_module,
)

from corpus import F5, generated_corpus, module_corpus, natural_module, unit_matrix, upper_triangular, zero_module_poly


def m2_natural(field=QQ):
    return construct_from_generators(field, [unit_matrix(field, 2, i, j) for i in range(2) for j in range(2)])


# --- validation and regular modules -------------------------------------------------

def test_validate_module_examples():
    a = polynomial_truncation(QQ, 3)
    assert validate_module(regular_module(a)).valid
    zero_actions = [Matrix.identity(QQ, 2)] + [Matrix.zeros(QQ, 2, 2)] * 3
    broken = RModule(matrix_algebra(QQ, 2), zero_actions, dim=2)
    assert not validate_module(broken).valid
    assert validate_module(natural_module(m2_natural())).valid


def test_regular_module_examples():
    one = matrix_algebra(QQ, 1)
    assert regular_module(one).action == (Matrix.identity(QQ, 1),)
    assert regular_module(matrix_algebra(QQ, 2)).dim == 4
    u = unitization_square_zero(QQ, 4)
    act = regular_module(u).action[1]
    # a2 * 1 = a2 and a2 * a_j = 0 otherwise: only column 0 is nonzero
    assert [j for j in range(4) if any(act.column(j))] == [0]
    assert act.column(0) == (0, 1, 0, 0)


# --- Hom spaces ------------------------------------------------------------------------

def test_hom_space_examples():
    u = natural_module(m2_natural())
    assert hom_space(u, u).subspace().contains(Subspace.span(QQ, 4, [Matrix.identity(QQ, 2).vec()]))
    assert hom_space(u, u).dim == 1
    reg = regular_module(polynomial_truncation(QQ, 2))
    assert hom_space(reg, zero_module_poly(QQ)).dim == 1
    with pytest.raises(SideMismatch):
        hom_space(reg, regular_module(polynomial_truncation(QQ, 2), RIGHT))


def _brute_hom_count(u, v, p):
    count = 0
    for entries in itertools.product(range(p), repeat=u.dim * v.dim):
        f = Matrix(u.field, [entries[r * u.dim:(r + 1) * u.dim] for r in range(v.dim)], u.dim)
        count += all(f @ X == Y @ f for X, Y in zip(u.action, v.action))
    return count


def test_hom_space_dimension_by_enumeration():
    # over F_2 the number of intertwiners is 2^dim Hom
    t2 = upper_triangular(GF(2))
    u = natural_module(t2)
    for v in (u, regular_module(t2.algebra)):
        if u.dim * v.dim <= 8:
            assert _brute_hom_count(u, v, 2) == 2 ** hom_space(u, v).dim


@pytest.mark.parametrize("a", generated_corpus(10, seed=11), ids=lambda a: f"dim{a.dim}-{a.field}")
def test_hom_dimension_matches_opposite_problem(a):
    u, v = regular_module(a), free_module(a, 2)
    uo, vo = as_opposite(u), as_opposite(v)
    assert uo.side == RIGHT
    assert hom_space(u, v).dim == hom_space(uo, vo).dim


# --- commutant and bicommutant -------------------------------------------------------

def test_commutant_examples():
    a = polynomial_truncation(QQ, 3)
    c = commutant(regular_module(a))
    assert c.dim == 3
    rights = Subspace.span(QQ, 9, (a.right_mult_matrix(a.basis_vector(i)).vec() for i in range(3)))
    assert c.subspace == rights
    u = natural_module(m2_natural())
    assert commutant(u).dim == 1
    assert commutant(direct_sum(u, u)).dim == 4
    assert c.convention == REVERSE_COMPOSITION
    assert c.carrier.dim == 3


def test_bicommutant_examples():
    for a in (polynomial_truncation(QQ, 3), matrix_algebra(F5, 2), unitization_square_zero(QQ, 4)):
        assert bicommutant(regular_module(a)).relation == "equal"
        assert bicommutant(free_module(a, 2)).relation == "equal"
    scalars = RModule(matrix_algebra(QQ, 1), [Matrix.identity(QQ, 2)], dim=2)
    res = bicommutant(scalars)
    # End(U) is all of M_2(F), whose commutant is the scalars again
    assert res.commutant.dim == 4
    assert res.biend.dim == 1 and res.relation == "equal"


@pytest.mark.parametrize("label,u", module_corpus(), ids=lambda x: x if isinstance(x, str) else "")
def test_image_inside_bicommutant(label, u):
    res = bicommutant(u)
    assert res.biend.subspace.contains(u.image_subspace)


@pytest.mark.parametrize("label,u", module_corpus(), ids=lambda x: x if isinstance(x, str) else "")
def test_trace_ideal_is_left_ideal_of_biend(label, u):
    # for faithful U the operators of T form a left ideal in Biend(U)
    if not classify(u).faithful:
        pytest.skip("only faithful modules")
    t_ops = Subspace.span(u.field, u.dim * u.dim, (u.act(t).vec() for t in trace_ideal(u).subspace.basis))
    for b in bicommutant(u).biend.inclusion:
        for t in t_ops.basis:
            op = b @ Matrix.from_vec(u.field, t, u.dim, u.dim)
            assert op.vec() in t_ops


# --- trace ideal and classification --------------------------------------------------

def test_trace_ideal_examples():
    a = polynomial_truncation(QQ, 3)
    assert trace_ideal(regular_module(a)).subspace == Subspace.full(QQ, 3)
    p2 = polynomial_truncation(QQ, 2)
    assert trace_ideal(zero_module_poly(QQ)).subspace == Subspace.span(QQ, 2, [p2.basis_vector(1)])
    assert trace_ideal(natural_module(m2_natural())).dim == 4


def test_classify_examples():
    flags = classify(regular_module(polynomial_truncation(QQ, 3)))
    assert all(flags.to_json().values())
    assert all(classify(natural_module(m2_natural())).to_json().values())
    z = classify(zero_module_poly(QQ))
    assert not z.faithful and not z.T_accessible and not z.generator and not z.projective
    # Hom(U, R) is nonzero here (u -> x), so U embeds into R: it is torsionless
    assert z.torsionless


@pytest.mark.parametrize("label,u", module_corpus(), ids=lambda x: x if isinstance(x, str) else "")
def test_classify_consistency(label, u):
    f = classify(u)
    if f.generator:
        assert f.T_accessible
    if f.projective and f.faithful:
        assert f.torsionless
    if f.trace_unital:
        assert f.T_accessible


# --- density ----------------------------------------------------------------------------

def test_density_examples():
    a = matrix_algebra(QQ, 2)
    u = free_module(a, 2)
    rng = random.Random(4)
    r0 = tuple(QQ.random(rng) for _ in range(4))
    g = [tuple(QQ.random(rng) for _ in range(8)) for _ in range(3)]
    r = density_check(u, u.act(r0), g)
    assert r is not None and all(u.act(r).apply(x) == u.act(r0).apply(x) for x in g)
    for b in bicommutant(u).biend.inclusion:
        assert density_check(u, b, g) is not None
    scalars = RModule(matrix_algebra(QQ, 1), [Matrix.identity(QQ, 2)], dim=2)
    non_scalar = Matrix(QQ, [[0, 1], [0, 0]])
    assert density_check(scalars, non_scalar, [(1, 0), (0, 1)]) is None


def test_density_under_tu_hypothesis():
    """Density for faithful modules with u in T u for every tuple u."""
    checked = 0
    for label, u in module_corpus():
        flags = classify(u)
        if not (flags.faithful and flags.trace_unital):
            continue
        for b in bicommutant(u).biend.inclusion:
            for seed in range(10):
                rng = random.Random(seed)
                g = [tuple(u.field.random(rng) for _ in range(u.dim)) for _ in range(rng.randint(1, 3))]
                assert density_check(u, b, g) is not None, label
                checked += 1
    assert checked > 0


def test_t_accessible_alone_does_not_give_density():
    # F^2 over upper triangular 2x2 matrices: faithful and T U = U, yet e1 is not in T e1
    t2 = upper_triangular(QQ)
    u = natural_module(t2)
    flags = classify(u)
    assert flags.faithful and flags.T_accessible and not flags.trace_unital
    assert bicommutant(u).biend.dim == 4
    e21 = Matrix(QQ, [[0, 0], [1, 0]])
    assert density_check(u, e21, [(1, 0)]) is None
