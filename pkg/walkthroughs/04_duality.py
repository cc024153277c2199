"""Dual modules and adjoints, with the biendomorphism comparison between U and U*."""

from arensalg.algebra import polynomial_truncation
from arensalg.duality import adjoint_density_check, check_biend_inclusion, dual_module
from arensalg.exactmath import QQ, Matrix
from arensalg.modules import RModule, free_module, regular_module

a = polynomial_truncation(QQ, 3)
reg = regular_module(a)
d = dual_module(reg)
print("dual side:", d.module.side, "dimension:", d.dim)

rep = check_biend_inclusion(reg)
print(rep.to_json())

# a module that is not faithful: x acts by zero on a line
zero = RModule(polynomial_truncation(QQ, 2), [Matrix.identity(QQ, 1), Matrix.zeros(QQ, 1, 1)], dim=1)
print(check_biend_inclusion(zero).to_json())

# every map V* -> U* is an adjoint in finite dimension
r = adjoint_density_check(reg, free_module(a, 2))
print("adjoints exhaust Hom(V*, U*):", r.surjective, r.hom_dim, r.dual_hom_dim)
