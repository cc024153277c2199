"""The two Arens products on the bidual, followed by rank maps."""

import random

from arensalg.algebra import matrix_algebra, polynomial_truncation, unitization_square_zero
from arensalg.arens import arens_products, biend_of_dual, normal_extension_check, rank_map, topological_center
from arensalg.exactmath import GF, mat_rank

a = matrix_algebra(GF(5), 2)
rng = random.Random(0)
s = tuple(a.field.random(rng) for _ in range(4))
t = tuple(a.field.random(rng) for _ in range(4))
first, second = arens_products(a, s, t)
print("first product: ", first)
print("second product:", second)
print("topological center dimension:", topological_center(a).dim, "of", a.dim)
print(biend_of_dual(a).to_json())

# rank maps [rho(a_i a_j)]: bounded for the square-zero unitization, full for polynomials
u = unitization_square_zero(a.field, 6)
print(rank_map(u, u.basis_vector(0)))
p = polynomial_truncation(a.field, 6)
print("Hankel rank:", mat_rank(rank_map(p, p.basis_vector(5))))


def top_coefficient(n):
    q = polynomial_truncation(a.field, n)
    return rank_map(q, q.basis_vector(n - 1))


print(normal_extension_check(top_coefficient, [4, 8, 16]).to_json())
