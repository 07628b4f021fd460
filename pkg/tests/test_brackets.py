"""The odd bracket, divergence operators, delta, and the pinned convention."""
import random
from fractions import Fraction

import pytest

from densalg import (
    ANY,
    Chart,
    DomainError,
    EVEN,
    MIXED,
    ODD,
    PINNED,
    SignConvention,
    antibracket,
    convention_ledger,
    delta_op,
    divergence,
    divergence_full,
    divergence_wrt,
    pin_convention,
    project_base,
    r_ary_bracket,
    restrict_to_base,
)
from densalg.brackets import _identity_suite
from conftest import SEED, random_poly


class TestConventionPinning:
    def test_identity_suite_passes_for_pinned(self, rng):
        for name, holds in _identity_suite(PINNED, rng):
            assert holds, name

    def test_unique_survivor_is_pinned(self):
        assert pin_convention(seed=2024) == PINNED

    def test_anchors(self, chart):
        assert antibracket(chart["x"], chart["#x"]) == chart.const(1)
        assert antibracket(chart["xi"], chart["#xi"]) == chart.const(-1)
        assert divergence(chart["x"] * chart["#x"]) == chart.const(1)
        assert divergence(chart["xi"] * chart["#xi"]) == chart.const(-1)

    def test_ledger_reports_forcing_identities(self):
        text = convention_ledger()
        assert "Pinned sign convention" in text
        assert "no identity rejects" not in text
        # one forcing line per perturbable field
        assert text.count("forced by:") == 12


class TestBracketIdentities:
    def test_graded_symmetry(self, rng, chart):
        for _ in range(200):
            f = random_poly(rng, chart)
            g = random_poly(rng, chart)
            fp = 0 if f.parity() is ANY else f.parity()
            gp = 0 if g.parity() is ANY else g.parity()
            sign = -1 if fp * gp % 2 else 1
            assert antibracket(f, g) == sign * antibracket(g, f)

    def test_leibniz(self, rng, chart):
        for _ in range(200):
            f = random_poly(rng, chart)
            g = random_poly(rng, chart)
            h = random_poly(rng, chart)
            fp = 0 if f.parity() is ANY else f.parity()
            gp = 0 if g.parity() is ANY else g.parity()
            hp = 0 if h.parity() is ANY else h.parity()
            sf = -1 if fp % 2 else 1
            sgh = -1 if gp * hp % 2 else 1
            assert antibracket(f * g, h) == sf * (f * antibracket(g, h)) + sgh * (
                antibracket(f, h) * g
            )

    def test_odd_jacobi(self, rng, chart):
        for _ in range(200):
            f = random_poly(rng, chart)
            g = random_poly(rng, chart)
            h = random_poly(rng, chart)
            fp = 0 if f.parity() is ANY else f.parity()
            gp = 0 if g.parity() is ANY else g.parity()
            s1 = -1 if (fp + 1) % 2 else 1
            s2 = -1 if (fp + 1) * (gp + 1) % 2 else 1
            lhs = antibracket(f, antibracket(g, h))
            rhs = s1 * antibracket(antibracket(f, g), h) + s2 * antibracket(
                g, antibracket(f, h)
            )
            assert lhs == rhs

    def test_bracket_is_odd(self, rng, chart):
        for _ in range(100):
            f = random_poly(rng, chart)
            g = random_poly(rng, chart)
            b = antibracket(f, g)
            if b.is_zero():
                continue
            fp = 0 if f.parity() is ANY else f.parity()
            gp = 0 if g.parity() is ANY else g.parity()
            assert b.parity() == (fp + gp + 1) % 2


class TestDivergenceAndDelta:
    def test_divergence_nilpotent(self, rng, chart):
        for _ in range(200):
            f = random_poly(rng, chart)
            assert divergence(divergence(f)).is_zero()

    def test_delta_nilpotent(self, rng, chart):
        h = chart.hatted_version()
        for _ in range(200):
            f = random_poly(rng, h)
            assert delta_op(delta_op(f)).is_zero()

    def test_derivation_identity(self, rng, chart):
        for _ in range(200):
            f = random_poly(rng, chart)
            g = random_poly(rng, chart)
            fp = 0 if f.parity() is ANY else f.parity()
            sf = -1 if fp % 2 else 1
            lhs = divergence(antibracket(f, g))
            rhs = -antibracket(divergence(f), g) - sf * antibracket(f, divergence(g))
            assert lhs == rhs

    def test_delta_is_divergence_wrt_canonical_density(self, rng, chart):
        h = chart.hatted_version()
        rho = h.t_power(Fraction(-2))
        for _ in range(200):
            f = random_poly(rng, h)
            assert delta_op(f) == divergence_wrt(f, rho)

    def test_generator_identity(self, rng, chart):
        h = chart.hatted_version()
        for _ in range(200):
            f = random_poly(rng, h)
            g = random_poly(rng, h)
            fp = 0 if f.parity() is ANY else f.parity()
            sf = -1 if fp % 2 else 1
            lhs = delta_op(f * g) - delta_op(f) * g - sf * (f * delta_op(g))
            assert lhs == antibracket(f, g)

    def test_divergence_wrt_requires_monomial_density(self, chart):
        h = chart.hatted_version()
        with pytest.raises(DomainError):
            divergence_wrt(h["x"], h.t_power(1) + h.const(1))

    def test_delta_needs_hatted_chart(self, chart):
        with pytest.raises(DomainError):
            delta_op(chart["x"])

    def test_divergence_full_vs_base(self, rng, chart):
        h = chart.hatted_version()
        for _ in range(50):
            f = random_poly(rng, h)
            extra = f.derive_left(h.tstar_var).derive_left(h.t_var)
            assert divergence_full(f) == divergence(f) + extra


class TestProjection:
    def test_project_base_splits_weights(self, chart):
        h = chart.hatted_version()
        S = (
            chart["x"].transport(h) * h.t_power(Fraction(1, 2))
            + chart["y"].transport(h) * h.t_power(-2)
            + h["x"] * h["#t"]
        )
        parts = project_base(S)
        assert [(p, str(lam)) for p, lam in parts] == [
            (chart["y"], "-2"),
            (chart["x"], "1/2"),
        ]

    def test_restrict_to_base_kills_fibers(self, chart):
        f = chart["x"] + chart["x"] * chart["#y"] + chart["xi"] * chart["#xi"]
        assert restrict_to_base(f) == chart["x"]


class TestRAry:
    def test_two_ary_antisymmetry(self, rng, small_chart):
        # S even of fiber degree 2: {f,g} = (-1)^((f+1)(g+1)) {g,f}
        C = small_chart
        S = C["x"] * C["#x"] * C["#y"] + C["xi"] * C["#xi"] * C["#y"]
        assert S.parity() == EVEN and S.fiber_degree() == 2
        for _ in range(200):
            f = restrict_to_base(random_poly(rng, C, n_terms=2))
            g = restrict_to_base(random_poly(rng, C, n_terms=2))
            fp = 0 if f.parity() is ANY else f.parity()
            gp = 0 if g.parity() is ANY else g.parity()
            sign = -1 if (fp + 1) * (gp + 1) % 2 else 1
            assert r_ary_bracket(S, [f, g]) == sign * r_ary_bracket(S, [g, f])

    def test_operator_parity(self, rng, small_chart):
        # the r-ary bracket operator has parity S + r
        C = small_chart
        cases = [
            (C["x"] * C["#x"], 1),
            (C["x"] * C["#x"] * C["#y"], 2),
            (C["xi"] * C["#x"], 1),
        ]
        for S, r in cases:
            sp = S.parity()
            for _ in range(60):
                args = []
                total = 0
                for _ in range(r):
                    a = restrict_to_base(random_poly(rng, C, n_terms=2))
                    ap = a.parity()
                    if ap is MIXED:
                        break
                    args.append(a)
                    total += 0 if ap is ANY else ap
                else:
                    out = r_ary_bracket(S, args)
                    if out.is_zero():
                        continue
                    assert out.parity() == (sp + r + total) % 2

    def test_jacobi_bridge(self, rng):
        # (pi, pi) = 0 implies the graded Jacobi identity for the 2-ary bracket
        C = Chart([("x1", EVEN), ("x2", EVEN), ("x3", EVEN)])
        pi = (
            C["x3"] * C["#x2"] * C["#x1"]
            + C["x1"] * C["#x3"] * C["#x2"]
            + C["x2"] * C["#x1"] * C["#x3"]
        )
        assert antibracket(pi, pi).is_zero()

        def pb(a, b):
            return r_ary_bracket(pi, [a, b])

        for _ in range(200):
            f = restrict_to_base(random_poly(rng, C, parity=EVEN, n_terms=2))
            g = restrict_to_base(random_poly(rng, C, parity=EVEN, n_terms=2))
            h = restrict_to_base(random_poly(rng, C, parity=EVEN, n_terms=2))
            jacobiator = pb(f, pb(g, h)) + pb(g, pb(h, f)) + pb(h, pb(f, g))
            assert jacobiator.is_zero()

    def test_negative_control_jacobi_violation(self):
        C = Chart([("x1", EVEN), ("x2", EVEN), ("x3", EVEN)])
        bad = (
            C["x3"] * C["#x2"] * C["#x1"]
            + C["x1"] * C["#x3"] * C["#x2"]
            + C["x1"] * C["#x1"] * C["#x3"]
        )
        assert not antibracket(bad, bad).is_zero()

    def test_rejects_fiber_arguments(self, small_chart):
        C = small_chart
        with pytest.raises(DomainError):
            r_ary_bracket(C["x"] * C["#x"], [C["#y"]])
