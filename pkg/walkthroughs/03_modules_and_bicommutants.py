"""Modules, Hom spaces, commutants and the density test."""

from arensalg.algebra import construct_from_generators, matrix_algebra
from arensalg.exactmath import QQ, Matrix
from arensalg.modules import RModule, bicommutant, classify, commutant, density_check, free_module, trace_ideal

units = [Matrix(QQ, [[1 if (r, c) == (i, j) else 0 for c in range(2)] for r in range(2)])
         for i in range(2) for j in range(2)]
m2 = construct_from_generators(QQ, units)

# F^2 as a module over M_2(Q): the action of an element is its own matrix
natural = RModule(m2.algebra, m2.embedding, dim=2)
print("End(F^2) is", commutant(natural).dim, "dimensional")

res = bicommutant(natural)
print("Biend(F^2):", res.biend.dim, "dims, relation to the image:", res.relation)
print("trace ideal dimension:", trace_ideal(natural).dim)
print(classify(natural).to_json())

# upper triangular matrices acting on F^2: faithful, yet the bicommutant is all of M_2
upper = construct_from_generators(QQ, [units[0], units[1], units[3]])
tri = RModule(upper.algebra, upper.embedding, dim=2)
flags = classify(tri)
print("T2 on F^2:", flags.to_json())
print("Biend dimension:", bicommutant(tri).biend.dim)
e21 = Matrix(QQ, [[0, 0], [1, 0]])
print("an r with r e1 = E21 e1:", density_check(tri, e21, [(1, 0)]))

# free modules of rank two behave like the regular module
free = free_module(matrix_algebra(QQ, 2), 2)
print("R^2 over M_2: commutant", commutant(free).dim, "bicommutant", bicommutant(free).biend.dim)
