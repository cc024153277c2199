import itertools
import random

import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from arensalg.errors import AmbientMismatch
from arensalg.exactmath import (
    GF,
    QQ,
    BasisChange,
    Field,
    Matrix,
    Subspace,
    mat_kernel,
    mat_rank,
    random_invertible,
    solve_linear,
    subspace_ops,
)

F5 = GF(5)


def small_matrices(max_rows=4, max_cols=4, lo=-3, hi=3):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(lo, hi), min_size=c, max_size=c), min_size=r, max_size=r)))


def q(rows):
    return Matrix(QQ, [[mpq(x) for x in r] for r in rows], len(rows[0]))


# --- fields -------------------------------------------------------------------

def test_field_rejects_composite_modulus():
    with pytest.raises(ValueError):
        GF(6)


def test_scalar_text_syntax():
    assert QQ.parse("3/6") == mpq(1, 2)
    assert QQ.format(mpq(-2, 4)) == "-1/2"
    assert F5.parse("4") == 4
    with pytest.raises(ValueError):
        F5.parse("5")
    with pytest.raises(ValueError):
        F5.parse("1/2")


def test_field_json_round_trip():
    for f in (QQ, F5):
        assert Field.from_json(f.to_json()) == f


# --- rank ------------------------------------------------------------------------

def test_rank_examples():
    assert mat_rank(Matrix.zeros(QQ, 3, 3)) == 0
    assert mat_rank(Matrix.identity(QQ, 4)) == 4
    # ones where i + j = 5 with 1-based indices
    hankel = q([[1 if i + j == 5 else 0 for j in range(1, 5)] for i in range(1, 5)])
    assert mat_rank(hankel) == 4


@given(small_matrices())
@settings(max_examples=60, deadline=None)
def test_rank_matches_sympy(rows):
    assert mat_rank(q(rows)) == sympy.Matrix(rows).rank()


def _brute_kernel_size(rows, p):
    ncols = len(rows[0])
    return sum(all(sum(a * x for a, x in zip(r, v)) % p == 0 for r in rows)
               for v in itertools.product(range(p), repeat=ncols))


@given(small_matrices(3, 3, 0, 4))
@settings(max_examples=40, deadline=None)
def test_rank_over_f5_by_enumeration(rows):
    m = Matrix(F5, rows, len(rows[0]))
    r = mat_rank(m)
    # |ker| = 5^(cols - rank), counted by brute force
    assert _brute_kernel_size(rows, 5) == 5 ** (len(rows[0]) - r)


@given(small_matrices(4, 4, -3, 3))
@settings(max_examples=40, deadline=None)
def test_rank_over_q_equals_rank_mod_large_prime(rows):
    # every minor is bounded by 4! * 3^4 < p, so no nonzero minor vanishes mod p
    p = 1000003
    qm = q(rows)
    pm = Matrix(GF(p), [[x % p for x in r] for r in rows], len(rows[0]))
    assert mat_rank(qm) == mat_rank(pm)


# --- kernel --------------------------------------------------------------------

def test_kernel_examples():
    assert mat_kernel(Matrix.identity(QQ, 3)).dim == 0
    assert mat_kernel(Matrix.zeros(QQ, 2, 3)) == Subspace.full(QQ, 3)
    assert mat_kernel(q([[1, 1], [0, 0]])) == Subspace.span(QQ, 2, [(1, -1)])


@given(small_matrices())
@settings(max_examples=60, deadline=None)
def test_rank_nullity_and_kernel_against_sympy(rows):
    m = q(rows)
    k = mat_kernel(m)
    assert mat_rank(m) + k.dim == m.cols
    for v in k.basis:
        assert all(x == 0 for x in m.apply(v))
    expected = Subspace.span(QQ, m.cols, [[mpq(int(x.p), int(x.q)) for x in v] for v in sympy.Matrix(rows).nullspace()])
    assert k == expected


# --- solving -----------------------------------------------------------------

def test_solve_examples():
    b = (mpq(2), mpq(-1), mpq(1, 3))
    assert solve_linear(Matrix.identity(QQ, 3), b) == b
    assert solve_linear(Matrix.zeros(QQ, 2, 2), (1, 0)) is None
    assert solve_linear(q([[2, 0], [0, 3]]), (1, 1)) == (mpq(1, 2), mpq(1, 3))


@given(small_matrices(), st.lists(st.integers(-3, 3), min_size=4, max_size=4))
@settings(max_examples=60, deadline=None)
def test_solve_is_correct_or_inconsistent(rows, rhs):
    m = q(rows)
    b = tuple(mpq(x) for x in rhs[:m.rows]) + (mpq(0),) * max(0, m.rows - len(rhs))
    x = solve_linear(m, b)
    augmented = sympy.Matrix([list(r) + [int(v)] for r, v in zip(rows, b)])
    if x is None:
        assert augmented.rank() > sympy.Matrix(rows).rank()
    else:
        assert m.apply(x) == b


# --- subspaces ----------------------------------------------------------------

def e(i, n=3):
    return tuple(1 if k == i else 0 for k in range(n))


def test_subspace_examples():
    s12 = Subspace.span(QQ, 3, [e(0), e(1)])
    s23 = Subspace.span(QQ, 3, [e(1), e(2)])
    assert subspace_ops("Intersect", s12, s23) == Subspace.span(QQ, 3, [e(1)])
    assert subspace_ops("Sum", Subspace.span(QQ, 3, [e(0)]), Subspace.span(QQ, 3, [e(1)])) == s12
    assert subspace_ops("Contains", Subspace.full(QQ, 3), s23)
    assert subspace_ops("Equal", s12, Subspace.span(QQ, 3, [(1, 1, 0), (1, -1, 0)]))


def test_subspace_ambient_mismatch():
    with pytest.raises(AmbientMismatch):
        subspace_ops("Sum", Subspace.zero(QQ, 2), Subspace.zero(QQ, 3))


vec_lists = st.lists(st.lists(st.integers(-2, 2), min_size=4, max_size=4), max_size=4)


@given(vec_lists, vec_lists)
@settings(max_examples=60, deadline=None)
def test_grassmann_formula(v1, v2):
    a, b = Subspace.span(QQ, 4, v1), Subspace.span(QQ, 4, v2)
    assert (a + b).dim + (a & b).dim == a.dim + b.dim
    assert (a + b).contains(a) and a.contains(a & b)


@given(vec_lists, st.randoms(use_true_random=False))
@settings(max_examples=40, deadline=None)
def test_canonical_form_independent_of_spanning_set(vecs, rnd):
    s = Subspace.span(QQ, 4, vecs)
    # a different spanning set: random combinations plus the original vectors shuffled
    mixed = []
    for _ in range(3):
        coeffs = [rnd.randint(-2, 2) for _ in vecs]
        mixed.append(tuple(sum(c * v[i] for c, v in zip(coeffs, vecs)) for i in range(4)))
    shuffled = list(vecs)
    rnd.shuffle(shuffled)
    t = Subspace.span(QQ, 4, shuffled + mixed)
    assert t == s and t.basis == s.basis


# --- basis changes -------------------------------------------------------------

def test_basis_change_round_trip():
    rng = random.Random(3)
    for f in (QQ, F5):
        fwd = random_invertible(f, 4, rng)
        bc = BasisChange.from_forward(fwd)
        v = tuple(f.random(rng) for _ in range(4))
        assert bc.vector_to_old(bc.vector_to_new(v)) == v
        rho = tuple(f.random(rng) for _ in range(4))
        # pairing is basis-independent
        pair_old = sum(a * b for a, b in zip(v, rho))
        pair_new = sum(a * b for a, b in zip(bc.vector_to_new(v), bc.functional_to_new(rho)))
        assert (pair_old - pair_new) % (f.p or 1) == 0 if f.p else pair_old == pair_new


def test_basis_change_rejects_non_inverse():
    with pytest.raises(ValueError):
        BasisChange(Matrix.identity(QQ, 2), q([[1, 1], [0, 1]]))


def test_integer_input_stays_exact():
    s = Subspace.span(QQ, 2, [[3, 1]])
    assert s.basis == ((1, mpq(1, 3)),)
    assert all(not isinstance(x, float) for x in s.basis[0])
    assert QQ.inv(3) == mpq(1, 3)
