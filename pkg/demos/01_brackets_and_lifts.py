"""
Odd brackets, divergence operators, and the canonical lift
==========================================================

A walking tour of the kernel: build a chart, compute odd brackets and
divergences, and lift weighted multivector fields to the extended chart
where the delta operator lives.
"""
from fractions import Fraction

from densalg import (
    Chart, DensityElement, EVEN, ODD,
    antibracket, delta_op, divergence, lift, poly_to_text, project_to_density,
)

# A chart is a list of base coordinates with parities.  Each coordinate x
# automatically comes with its parity-reversed fiber partner #x.
C = Chart([("x", EVEN), ("y", EVEN), ("xi", ODD)])
x, y, xi = C["x"], C["y"], C["xi"]
px, py, pxi = C["#x"], C["#y"], C["#xi"]

# The canonical odd bracket pairs coordinates with their fiber partners:
print("(x, #x)  =", poly_to_text(antibracket(x, px)))    # +1
print("(xi, #xi) =", poly_to_text(antibracket(xi, pxi)))  # -1

# A vector field is a fiber-degree-1 element; its divergence is the usual one.
X = x * x * px + x * y * py
print("div X =", poly_to_text(divergence(X)))

# The bracket of two vector fields is (minus) their commutator:
Y = y * px
print("(X, Y) =", poly_to_text(antibracket(X, Y)))

# Lifting: a weight-lambda density element s goes to the hatted chart
# (extra even coordinate t of weight 1 and odd partner #t, with w = t*#t).
# The lift is the unique delta-closed extension projecting back to s.
s = DensityElement(X, Fraction(0))
S = lift(s)
print("lift(X) =", poly_to_text(S))          # X + w * div X
print("delta of the lift:", poly_to_text(delta_op(S)))  # 0
print("projects back:", project_to_density(S) == [s])

# Weighted example: a half-density vector field.
s_half = DensityElement(X, Fraction(1, 2))
print("lift at weight 1/2 =", poly_to_text(lift(s_half)))

# Weight 1 is the single excluded weight; the lift correction has a pole there.
from densalg import WeightOneError
try:
    lift(DensityElement(X, Fraction(1)))
except WeightOneError as exc:
    print("weight 1 is excluded:", exc)
