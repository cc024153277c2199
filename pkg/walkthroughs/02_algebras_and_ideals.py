"""Structure-constant algebras: validation, ideals, radicals and quotients."""

from arensalg.algebra import (
    TWO_SIDED,
    IdealBasis,
    construct_from_generators,
    ideal_closure,
    multiply,
    polynomial_truncation,
    quotient,
    radical,
    unitization_square_zero,
    validate,
)
from arensalg.exactmath import QQ, Matrix, Subspace

# F[x]/(x^4) in the basis 1, x, x^2, x^3
p = polynomial_truncation(QQ, 4)
print(validate(p).summary())
print("x * x^2 =", multiply(p, p.basis_vector(1), p.basis_vector(2)))

# The ideal generated by x^2, and the quotient by it
j = ideal_closure(p, [p.basis_vector(2)])
print("ideal generated by x^2 has dimension", j.subspace.dim)
q, _ = quotient(p, IdealBasis(j.subspace, TWO_SIDED))
print("quotient dimension:", q.dim)

# Radicals: everything but the unit in both of these
print("rad F[x]/(x^4):", radical(p).dim)
u = unitization_square_zero(QQ, 5)
print("rad of the square-zero unitization:", radical(u).dim)

# Algebras can also come from matrices: the span of I, J, J^2 for a nilpotent Jordan block
jordan = Matrix(QQ, [[0, 1, 0], [0, 0, 1], [0, 0, 0]])
sub = construct_from_generators(QQ, [jordan])
print("generated subalgebra has dimension", sub.algebra.dim)
print("it contains J^2:", (jordan @ jordan).vec() in Subspace.span(QQ, 9, (e.vec() for e in sub.embedding)))
