import itertools
import random

import pytest
from gmpy2 import mpq

from arensalg.algebra import matrix_algebra, multiply, polynomial_truncation, unitization_square_zero
from arensalg.arens import (
    DOES_NOT_EXTEND,
    EXTENDS,
    INCONCLUSIVE,
    BilinearForm,
    arens_products,
    biend_of_dual,
    dual_actions,
    iota,
    normal_extension_check,
    rank_map,
    right_topological_center,
    topological_center,
    translate_span_dim,
)
from arensalg.errors import BadLevel, DimensionMismatch
from arensalg.exactmath import GF, QQ, Matrix, mat_rank

from corpus import F5, generated_corpus, upper_triangular

F2 = GF(2)


def rand_vec(field, n, rng):
    return tuple(field.random(rng) for _ in range(n))


# --- dual actions --------------------------------------------------------------------

def test_unit_acts_trivially_on_functionals():
    for a in (polynomial_truncation(QQ, 4), matrix_algebra(F5, 2), unitization_square_zero(QQ, 5)):
        rho = rand_vec(a.field, a.dim, random.Random(a.dim))
        assert dual_actions(a, iota(a, a.unit), rho) == (rho, rho)


def _m2_as_matrix(v):
    return [[v[0], v[1]], [v[2], v[3]]]


def _matmul(x, y):
    return [[sum(x[i][k] * y[k][j] for k in range(2)) for j in range(2)] for i in range(2)]


def test_m2_dual_actions_against_matrix_oracle():
    a = matrix_algebra(QQ, 2)
    s0 = (1, 0, 0, 0)  # E11
    for rho in [(0, 1, 0, 0)] + [rand_vec(QQ, 4, random.Random(k)) for k in range(5)]:
        def ev(x):
            return sum(rho[2 * r + c] * x[r][c] for r in range(2) for c in range(2))
        basis = [_m2_as_matrix(a.basis_vector(j)) for j in range(4)]
        s = _m2_as_matrix(s0)
        # (rho s)(r) = rho(s r) and (s rho)(r) = rho(r s)
        expected_right = tuple(mpq(ev(_matmul(s, b))) for b in basis)
        expected_left = tuple(mpq(ev(_matmul(b, s))) for b in basis)
        assert dual_actions(a, s0, rho) == (expected_right, expected_left)


def test_square_zero_element_kills_unit_functional():
    a = unitization_square_zero(QQ, 3)
    lam1 = a.basis_vector(0)
    rho_s, _ = dual_actions(a, a.basis_vector(1), lam1)
    assert rho_s == (0, 0, 0)


def test_dual_actions_dimension_mismatch():
    a = polynomial_truncation(QQ, 3)
    with pytest.raises(DimensionMismatch):
        dual_actions(a, (1, 0), (1, 0, 0))


# --- Arens products -------------------------------------------------------------------

def test_products_extend_the_algebra_product():
    for a in generated_corpus(10, seed=41):
        rng = random.Random(a.dim * 7)
        r, r2 = rand_vec(a.field, a.dim, rng), rand_vec(a.field, a.dim, rng)
        first, second = arens_products(a, iota(a, r), iota(a, r2))
        assert first == second == iota(a, multiply(a, r, r2))


def test_unit_laws():
    a = matrix_algebra(F5, 2)
    s = rand_vec(F5, 4, random.Random(1))
    u = iota(a, a.unit)
    assert arens_products(a, s, u)[0] == s
    assert arens_products(a, u, s)[1] == s


@pytest.mark.parametrize("a", [polynomial_truncation(F2, 3), unitization_square_zero(F2, 3),
                               upper_triangular(F2).algebra], ids=["poly3", "unit3", "T2"])
def test_products_coincide_exhaustively_over_f2(a):
    vecs = list(itertools.product(range(2), repeat=a.dim))
    for s, t in itertools.product(vecs, repeat=2):
        first, second = arens_products(a, s, t)
        assert first == second == multiply(a, s, t)


@pytest.mark.parametrize("a", generated_corpus(8, seed=43), ids=lambda a: f"dim{a.dim}-{a.field}")
def test_products_are_associative(a):
    rng = random.Random(a.dim)

    def first(x, y):
        return arens_products(a, x, y)[0]

    def second(x, y):
        return arens_products(a, x, y)[1]

    for _ in range(3):
        s, t, u = (rand_vec(a.field, a.dim, rng) for _ in range(3))
        assert first(first(s, t), u) == first(s, first(t, u))
        assert second(second(s, t), u) == second(s, second(t, u))


# --- topological centers -----------------------------------------------------------------

@pytest.mark.parametrize("a", [matrix_algebra(QQ, 1), matrix_algebra(F5, 2), polynomial_truncation(QQ, 4),
                               upper_triangular(QQ, 3).algebra], ids=["F", "M2F5", "poly4", "T3"])
def test_centers_are_everything(a):
    assert topological_center(a).dim == a.dim
    assert right_topological_center(a).dim == a.dim


# --- Biend of the dual --------------------------------------------------------------------

@pytest.mark.parametrize("a,dim", [(matrix_algebra(QQ, 2), 4), (matrix_algebra(QQ, 1), 1),
                                   (unitization_square_zero(QQ, 8), 8)], ids=["M2", "F", "unit8"])
def test_biend_of_dual_cross_check(a, dim):
    rep = biend_of_dual(a)
    assert rep.ok
    assert rep.biend_dim == rep.center_image_dim == dim
    assert rep.lend_dim == rep.left_mult_dim == dim


# --- rank map -------------------------------------------------------------------------------

def test_rank_map_examples():
    u = unitization_square_zero(QQ, 4)
    m = rank_map(u, u.basis_vector(0))
    assert m[0, 0] == 1 and mat_rank(m) == 1
    assert sum(1 for i in range(4) for j in range(4) if m[i, j]) == 1
    p = polynomial_truncation(QQ, 4)
    h = rank_map(p, p.basis_vector(3))
    assert h == Matrix(QQ, [[1 if i + j == 3 else 0 for j in range(4)] for i in range(4)])
    assert mat_rank(h) == 4
    assert mat_rank(rank_map(p, (0, 0, 0, 0))) == 0


@pytest.mark.parametrize("a", generated_corpus(8, seed=47), ids=lambda a: f"dim{a.dim}-{a.field}")
def test_rank_map_linear_and_matches_translates(a):
    rng = random.Random(a.dim)
    rho, sigma = rand_vec(a.field, a.dim, rng), rand_vec(a.field, a.dim, rng)
    total = tuple(a.field(x + y) for x, y in zip(rho, sigma))
    assert rank_map(a, total) == rank_map(a, rho) + rank_map(a, sigma)
    for r in (rho, sigma, a.basis_vector(0)):
        assert translate_span_dim(a, r) == mat_rank(rank_map(a, r))


# --- normal extensions ----------------------------------------------------------------------

def test_normal_extension_examples():
    rank_one = BilinearForm(builder=lambda n: Matrix(QQ, [[1 if i == j == 0 else 0 for j in range(n)] for i in range(n)]))
    v = normal_extension_check(rank_one, [2, 4, 8])
    assert v.kind == EXTENDS and v.bound == 1

    def hankel(n):
        p = polynomial_truncation(QQ, n)
        return rank_map(p, p.basis_vector(n - 1))

    v = normal_extension_check(hankel, [4, 8, 16])
    assert v.kind == DOES_NOT_EXTEND and v.ranks == (4, 8, 16)

    def unit_form(n):
        u = unitization_square_zero(QQ, n)
        return rank_map(u, u.basis_vector(0))

    v = normal_extension_check(unit_form, [4, 8, 16])
    assert v.kind == EXTENDS and v.bound == 1
    assert v.to_json() == {"kind": "Extends", "levels": [4, 8, 16], "ranks": [1, 1, 1], "bound": 1}


def test_normal_extension_inconclusive_and_bad_levels():
    ranks = {2: 1, 4: 3, 8: 2}
    form = BilinearForm({n: Matrix.identity(QQ, r) for n, r in ranks.items()})
    assert normal_extension_check(form, [2, 4, 8]).kind == INCONCLUSIVE
    with pytest.raises(BadLevel):
        normal_extension_check(form, [4, 2])
    with pytest.raises(BadLevel):
        normal_extension_check(form, [16])
