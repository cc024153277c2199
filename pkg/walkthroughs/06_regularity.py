"""Deciding regularity of truncation families and checking certificates."""

import random

from arensalg.algebra import truncate
from arensalg.exactmath import GF, QQ
from arensalg.regularity import (
    Budget,
    builtin_family,
    decide_regularity,
    extract_self_correcting,
    random_bimodule_instance,
    scrambled_family,
    square_zero_extension_family,
    verify_certificate,
)

fam = builtin_family("unitization_square_zero")
v = decide_regularity(fam, Budget((4, 8, 16), seed=1))
print(v.kind, "ranks", v.ranks, "codim", v.codim)
for c in v.certificates:
    level = c.diagnostics["family_level"]
    print("  level", level, "ideal dim", c.ideal.subspace.dim, "verified", verify_certificate(truncate(fam, level), c))

poly = decide_regularity(builtin_family("truncated_polynomial"), Budget((4, 8, 16), seed=1))
print(poly.kind, "ranks", poly.ranks, "translate dims", poly.translate_dims)

# a random square-zero extension, seen in a scrambled basis
x, m = random_bimodule_instance(QQ, random.Random(3))
sc = scrambled_family(square_zero_extension_family(x, m), seed=3)
v = decide_regularity(sc.family, Budget((1, 2, 3), seed=3))
print("random extension of a", x.dim, "dimensional algebra:", v.kind, "codim", v.codim)

# Over F_2 the corner block left after normalizing can be nonzero without
# contradicting maximality, and extraction then compresses recursively.
x, m = random_bimodule_instance(GF(2), random.Random(7002))
b = truncate(scrambled_family(square_zero_extension_family(x, m), seed=0).family, 2)
cert, attempts = extract_self_correcting(b, b.basis_vector(1))
print([(t.rank, t.outcome, t.branch) for t in attempts], "codim", cert.codim, "verified", verify_certificate(b, cert))
