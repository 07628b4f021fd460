"""
Lie-Poisson structures and the supertrace extension
===================================================

The linear Poisson structure of a Lie algebra lifts canonically to the
algebra of densities.  The correction term of the lift is the supertrace
of the adjoint action -- a 1-cocycle on the algebra -- and it transforms
as a covector under a change of basis.
"""
import json
import os

from densalg import (
    LieAlgebraData, classify_lifts, lie_poisson, master_check,
    poly_to_text, supertrace_extension,
)
from densalg.classify import change_basis

HERE = os.path.dirname(__file__)


def fmt(phi):
    return "(" + ", ".join(str(c) for c in phi) + ")"

# so(3): [e1,e2]=e3 and cyclic, loaded from structure constants on disk.
so3 = LieAlgebraData.from_json(os.path.join(HERE, "so3.json"))
pi = lie_poisson(so3)
print("so(3) Poisson bivector:", poly_to_text(pi.body))
print("Jacobi residual zero:", master_check(pi.body).is_zero())
# Unimodular algebra: the supertrace functional vanishes.
print("supertrace functional:", fmt(supertrace_extension(so3)))

# The 2-dimensional solvable algebra [e1, e2] = e2 is not unimodular:
solv = LieAlgebraData.from_json(os.path.join(HERE, "solvable.json"))
print("\nsolvable pi:", poly_to_text(lie_poisson(solv).body))
print("supertrace functional:", fmt(supertrace_extension(solv)))  # (1, 0)

# Covector transformation law under a basis change e'_i = sum_a P[a][i] e_a:
P = [[1, 1], [0, 1]]
print("after basis change:", fmt(supertrace_extension(change_basis(solv, P))))

# Classification: which vector fields Q make pi + Q*w a Poisson lift?
# For so(3) the kernel at linear coefficients is spanned by Hamiltonian-type
# fields annihilated by the bracket with pi.
kb = classify_lifts(pi, 1)
print("\nso(3) lift kernel at coefficient bound 1: dimension", kb.dimension)
for e in kb.elements():
    print("  ", poly_to_text(e))
