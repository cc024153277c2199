"""Exact rank and kernels over Q and F_p, plus canonical subspaces."""

from gmpy2 import mpq

from arensalg.exactmath import GF, QQ, Matrix, Subspace, mat_kernel, mat_rank, solve_linear

# Over Q every entry is a gmpy2 rational, so nothing is ever rounded.
m = Matrix(QQ, [[1, 2, 3], [2, 4, 6], [1, 0, mpq(1, 3)]])
print("rank over Q:", mat_rank(m))
print("kernel basis:", mat_kernel(m).basis)

# The same integer matrix can have a different rank modulo p.
m5 = Matrix(GF(5), [[1, 2, 3], [2, 4, 6], [1, 0, 2]])
print("rank over F_5:", mat_rank(m5))

# Solving either returns an exact solution or None for an inconsistent system
print(solve_linear(Matrix(QQ, [[2, 0], [0, 3]]), (1, 1)))
print(solve_linear(Matrix.zeros(QQ, 2, 2), (1, 0)))

# Subspaces are stored in reduced echelon form, so equality is exact comparison
a = Subspace.span(QQ, 3, [(1, 0, 0), (0, 1, 0)])
b = Subspace.span(QQ, 3, [(1, 1, 0), (1, -1, 0)])
print("same plane:", a == b)
print("intersection with the yz-plane:", (a & Subspace.span(QQ, 3, [(0, 1, 0), (0, 0, 1)])).basis)
