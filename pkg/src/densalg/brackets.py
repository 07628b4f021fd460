"""The canonical odd bracket, divergence operators, and the delta operator.

Sign conventions are not hard to get wrong when transcribing, so the
coordinate formulas here carry their per-term signs as data (SignConvention)
and the shipped constant PINNED is the unique member of a finite candidate
family that passes the whole identity suite (graded symmetry, Leibniz, odd
Jacobi, the divergence derivation identity, nilpotency, the delta generator
identity) together with two normalization anchors.  `pin_convention` re-runs
that selection and `convention_ledger` renders the result; see
docs/convention_ledger.txt.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

from .spoly import ANY, EVEN, MIXED, ODD, ChartMismatchError, Chart, SPoly


class DomainError(ValueError):
    """Input outside an operation's mathematical domain."""


@dataclass(frozen=True)
class SignConvention:
    """Per-term sign exponents of the coordinate formulas.

    The bracket of parity-homogeneous f, g is

        (f, g) = sum over pairs (q, q*) of
            (-1)^e1(a, f) (d_r f / dq)(d_l g / dq*)
          + (-1)^e2(a, f) (d_r f / dq*)(d_l g / dq)

    with a = parity(q), f = parity(f), and e(a, f) = c0 + c1*a + c2*f + c3*a*f
    for the four recorded bits.  The divergence of f is

        div(f) = sum over base pairs of (-1)^(div_parity*a) d d f

    with both derivatives taken from `div_side`.  `generator_sign` records
    (s0, s1) in the identity

        delta(fg) - delta(f) g - (-1)^f f delta(g) = (-1)^(s0 + s1*f) (f, g).
    """

    term_q_qstar: tuple
    term_qstar_q: tuple
    div_parity: int
    div_side: str  # 'left' or 'right'
    generator_sign: tuple

    def bracket_signs(self, a, fp):
        c = self.term_q_qstar
        b = self.term_qstar_q
        s1 = -1 if (c[0] + c[1] * a + c[2] * fp + c[3] * a * fp) % 2 else 1
        s2 = -1 if (b[0] + b[1] * a + b[2] * fp + b[3] * a * fp) % 2 else 1
        return s1, s2


# Selected by pin_convention(); matches the convention in which the bracket
# is (-1)^parity(f) times the Batalin-Vilkovisky bracket built from right
# derivatives on f and left derivatives on g.
PINNED = SignConvention(
    term_q_qstar=(0, 0, 1, 0),
    term_qstar_q=(1, 0, 1, 0),
    div_parity=1,
    div_side="left",
    generator_sign=(0, 0),
)


def _bracket_homogeneous(f, g, fp, conv):
    chart = f.chart
    result = chart.zero()
    for q, qs in chart.all_pairs():
        a = q.parity
        s1, s2 = conv.bracket_signs(a, fp)
        t1 = f.derive_right(q) * g.derive_left(qs)
        if t1:
            result = result + (t1 if s1 > 0 else -t1)
        t2 = f.derive_right(qs) * g.derive_left(q)
        if t2:
            result = result + (t2 if s2 > 0 else -t2)
    return result


def antibracket(f: SPoly, g: SPoly, conv: SignConvention = PINNED) -> SPoly:
    """The canonical odd bracket on the chart, (t, #t) pair included."""
    if f.chart != g.chart:
        raise ChartMismatchError("bracket operands live on different charts")
    f_even, f_odd = f.parity_components()
    result = f.chart.zero()
    if f_even:
        result = result + _bracket_homogeneous(f_even, g, EVEN, conv)
    if f_odd:
        result = result + _bracket_homogeneous(f_odd, g, ODD, conv)
    return result


def _div_pairs(f, pairs, conv):
    chart = f.chart
    result = chart.zero()
    left = conv.div_side == "left"
    for q, qs in pairs:
        inner = f.derive_left(qs) if left else f.derive_right(qs)
        term = inner.derive_left(q) if left else inner.derive_right(q)
        if term and conv.div_parity and q.parity:
            term = -term
        result = result + term
    return result


def divergence(f: SPoly, conv: SignConvention = PINNED) -> SPoly:
    """Divergence with respect to |Dx|: base coordinate pairs only."""
    return _div_pairs(f, f.chart.base_pairs(), conv)


def divergence_full(f: SPoly, conv: SignConvention = PINNED) -> SPoly:
    """Divergence with respect to |D(x,t)| on a hatted chart."""
    if not f.chart.hatted:
        raise DomainError("divergence_full needs a hatted chart")
    return _div_pairs(f, f.chart.all_pairs(), conv)


def divergence_wrt(f: SPoly, rho_coeff: SPoly, conv: SignConvention = PINNED) -> SPoly:
    """rho^-1 * divergence_full(f * rho) for a unit density coefficient.

    rho_coeff must be a single invertible term c * t^mu on a hatted chart.
    """
    chart = f.chart
    if not isinstance(rho_coeff, SPoly):
        rho_coeff = chart.const(rho_coeff)
    if rho_coeff.chart != chart:
        raise ChartMismatchError("rho lives on the wrong chart")
    if not chart.hatted:
        raise DomainError("divergence_wrt needs a hatted chart")
    if len(rho_coeff.terms) != 1:
        raise DomainError("rho must be a single invertible term")
    (key, c), = rho_coeff.terms.items()
    if any(chart.variables[idx].kind != "t" for idx, _ in key):
        raise DomainError("rho must be a rational multiple of a power of t")
    mu = dict(key).get(chart.t_var.index, Fraction(0))
    rho_inv = (Fraction(1) / c) * chart.t_power(-mu)
    return rho_inv * divergence_full(f * rho_coeff, conv)


def delta_op(f: SPoly, conv: SignConvention = PINNED) -> SPoly:
    """The canonical odd operator: base divergence plus (d_t - 2/t) d_#t."""
    chart = f.chart
    if not chart.hatted:
        raise DomainError("delta_op needs a hatted chart")
    left = conv.div_side == "left"
    inner = f.derive_left(chart.tstar_var) if left else f.derive_right(chart.tstar_var)
    t_part = inner.derive_left(chart.t_var) if left else inner.derive_right(chart.t_var)
    t_part = t_part - 2 * (chart.t_power(-1) * inner)
    return divergence(f, conv) + t_part


def restrict_to_base(f: SPoly) -> SPoly:
    """Pullback along the zero section: all fiber variables (and #t) to 0."""
    chart = f.chart
    zero = chart.zero()
    images = {v: zero for v in chart.variables if v.kind in ("fiber", "tstar")}
    return f.substitute(images)


def project_base(S: SPoly):
    """Set #t to 0 and split by t-power into weighted components.

    Returns a list of (body, weight) pairs over the unhatted chart, sorted by
    weight; fiber variables of the hatted chart are re-read as plain fiber
    variables.
    """
    chart = S.chart
    if not chart.hatted:
        raise DomainError("project_base needs a hatted chart")
    stripped = S.substitute({chart.tstar_var: chart.zero()})
    base_chart = chart.unhatted_version()
    ti = chart.t_var.index
    by_weight = {}
    for key, coeff in stripped.terms.items():
        kd = dict(key)
        lam = kd.pop(ti, Fraction(0))
        by_weight.setdefault(lam, {})[tuple(sorted(kd.items()))] = coeff
    out = []
    for lam in sorted(by_weight):
        body = SPoly(chart, by_weight[lam]).transport(base_chart)
        out.append((body, lam))
    return out


def r_ary_bracket(S: SPoly, args, conv: SignConvention = PINNED) -> SPoly:
    """{f_1 ... f_r} = restrict_to_base(((S, f_1), f_2), ..., f_r).

    Arguments must be functions on the base (fiber degree 0); brackets are
    applied left to right.  Each step carries the sign (-1)^{parity of the
    accumulated bracket}, which orients the induced brackets so that an even
    fiber-degree-2 S satisfies {f,g} = (-1)^((f+1)(g+1)) {g,f}.
    """
    for f in args:
        if f.fiber_degree() != 0:
            raise DomainError("r-ary bracket arguments must have fiber degree 0")
    acc = S
    for f in args:
        acc_even, acc_odd = acc.parity_components()
        acc = antibracket(acc_even - acc_odd, f, conv)
    return restrict_to_base(acc)


# ---------------------------------------------------------------------------
# Convention pinning
# ---------------------------------------------------------------------------

def _random_homogeneous(rng, chart, parity, n_terms=3, max_even_exp=2):
    """Random parity-homogeneous polynomial with small integer coefficients."""
    variables = chart.variables
    terms = {}
    attempts = 0
    while len(terms) < n_terms and attempts < 50 * n_terms:
        attempts += 1
        kd = {}
        for v in variables:
            if v.parity == ODD:
                if rng.random() < 0.4:
                    kd[v.index] = 1
            else:
                e = rng.choice([0, 0, 1, min(2, max_even_exp)])
                if e:
                    kd[v.index] = Fraction(e) if v.kind == "t" else e
        key = tuple(sorted(kd.items()))
        if chart.key_parity(key) != parity:
            continue
        c = rng.choice([-3, -2, -1, 1, 2, 3])
        terms[key] = Fraction(c)
    return SPoly(chart, terms)


def _identity_suite(conv, rng, n_samples=24):
    """Yield (name, holds) for each identity on randomized homogeneous data."""
    chart = Chart([("x", EVEN), ("y", EVEN), ("xi", ODD), ("eta", ODD)])
    hchart = chart.hatted_version()

    def samples(ch, count):
        for _ in range(count):
            yield (
                _random_homogeneous(rng, ch, rng.choice([EVEN, ODD])),
                _random_homogeneous(rng, ch, rng.choice([EVEN, ODD])),
                _random_homogeneous(rng, ch, rng.choice([EVEN, ODD])),
            )

    def sgn(e):
        return -1 if e % 2 else 1

    # anchors fixing the global signs the identities cannot see
    x, xs = chart["x"], chart["#x"]
    xi, xis = chart["xi"], chart["#xi"]
    yield "anchor (x, #x) = +1", antibracket(x, xs, conv) == chart.const(1)
    yield "anchor div(x * #x) = +1", divergence(x * xs, conv) == chart.const(1)
    yield "anchor (xi, #xi) = -1 (odd base)", antibracket(xi, xis, conv) == chart.const(-1)
    yield "anchor div(xi * #xi) = -1 (odd base)", divergence(xi * xis, conv) == chart.const(-1)

    ok = True
    for f, g, _ in samples(chart, n_samples):
        fp, gp = f.parity(), g.parity()
        if fp is MIXED or gp is MIXED:
            continue
        fp = 0 if fp is ANY else fp
        gp = 0 if gp is ANY else gp
        lhs = antibracket(f, g, conv)
        rhs = antibracket(g, f, conv)
        if lhs != (rhs if sgn(fp * gp) > 0 else -rhs):
            ok = False
            break
    yield "graded symmetry (f,g) = (-1)^(fg) (g,f)", ok

    ok = True
    for f, g, h in samples(chart, n_samples):
        fp = f.parity()
        gp = g.parity()
        hp = h.parity()
        if MIXED in (fp, gp, hp):
            continue
        fp = 0 if fp is ANY else fp
        gp = 0 if gp is ANY else gp
        hp = 0 if hp is ANY else hp
        lhs = antibracket(f * g, h, conv)
        rhs = sgn(fp) * (f * antibracket(g, h, conv)) + sgn(gp * hp) * (
            antibracket(f, h, conv) * g
        )
        if lhs != rhs:
            ok = False
            break
    yield "Leibniz (fg,h) = (-1)^f f(g,h) + (-1)^(gh) (f,h)g", ok

    ok = True
    for f, g, h in samples(chart, n_samples):
        fp, gp = f.parity(), g.parity()
        if fp is MIXED or gp is MIXED:
            continue
        fp = 0 if fp is ANY else fp
        gp = 0 if gp is ANY else gp
        lhs = antibracket(f, antibracket(g, h, conv), conv)
        rhs = sgn(fp + 1) * antibracket(antibracket(f, g, conv), h, conv) + sgn(
            (fp + 1) * (gp + 1)
        ) * antibracket(g, antibracket(f, h, conv), conv)
        if lhs != rhs:
            ok = False
            break
    yield (
        "odd Jacobi (f,(g,h)) = (-1)^(f+1) ((f,g),h) + (-1)^((f+1)(g+1)) (g,(f,h))",
        ok,
    )

    ok = True
    for f, g, _ in samples(chart, n_samples):
        fp = f.parity()
        if fp is MIXED:
            continue
        fp = 0 if fp is ANY else fp
        lhs = divergence(antibracket(f, g, conv), conv)
        rhs = -antibracket(divergence(f, conv), g, conv) - sgn(fp) * antibracket(
            f, divergence(g, conv), conv
        )
        if lhs != rhs:
            ok = False
            break
    yield "derivation identity div(f,g) = -(div f, g) - (-1)^f (f, div g)", ok

    ok = True
    for f, _, _ in samples(chart, n_samples):
        if divergence(divergence(f, conv), conv):
            ok = False
            break
    for f, _, _ in samples(hchart, n_samples):
        if delta_op(delta_op(f, conv), conv):
            ok = False
            break
    yield "nilpotency div^2 = 0 and delta^2 = 0", ok

    s0, s1 = conv.generator_sign
    ok = True
    for f, g, _ in samples(hchart, n_samples):
        fp = f.parity()
        if fp is MIXED:
            continue
        fp = 0 if fp is ANY else fp
        lhs = (
            delta_op(f * g, conv)
            - delta_op(f, conv) * g
            - sgn(fp) * (f * delta_op(g, conv))
        )
        rhs = sgn(s0 + s1 * fp) * antibracket(f, g, conv)
        if lhs != rhs:
            ok = False
            break
    yield "generator identity delta(fg) - delta(f)g - (-1)^f f delta(g) = sigma(f)(f,g)", ok


def _passes(conv, rng):
    for _, holds in _identity_suite(conv, rng):
        if not holds:
            return False
    return True


def _candidate_family():
    bits = [0, 1]
    for c in itertools.product(bits, repeat=4):
        for b in itertools.product(bits, repeat=4):
            for dp in bits:
                for side in ("left", "right"):
                    for s in itertools.product(bits, repeat=2):
                        yield SignConvention(c, b, dp, side, s)


def pin_convention(seed=2024, verbose=False):
    """Enumerate the candidate family; return the unique surviving convention."""
    survivors = []
    for conv in _candidate_family():
        rng = random.Random(seed)
        if _passes(conv, rng):
            survivors.append(conv)
    if verbose:
        for s in survivors:
            print(s)
    if len(survivors) != 1:
        raise RuntimeError(
            "expected exactly one surviving sign convention, got %d" % len(survivors)
        )
    return survivors[0]


def convention_ledger(conv: SignConvention = PINNED, seed=2024) -> str:
    """Render the pinned convention: each sign bit with an identity forcing it.

    For every single-field perturbation of the pinned convention, report the
    first identity in the suite that rejects it.
    """
    lines = [
        "Pinned sign convention",
        "======================",
        "",
        "bracket term (d_r f/dq)(d_l g/dq*): sign exponent bits %s" % (conv.term_q_qstar,),
        "bracket term (d_r f/dq*)(d_l g/dq): sign exponent bits %s" % (conv.term_qstar_q,),
        "  exponent = c0 + c1*parity(q) + c2*parity(f) + c3*parity(q)*parity(f)",
        "divergence: sign exponent %d * parity(q), %s derivatives" % (conv.div_parity, conv.div_side),
        "generator identity sign sigma(f) = (-1)^(%d + %d*parity(f))" % conv.generator_sign,
        "",
        "Consequences:",
        "  (x, #x) = (#x, x) = +1 for an even base coordinate x",
        "  (xi, #xi) = -1 for an odd base coordinate xi",
        "  div(x * #x) = +1,  div(xi * #xi) = -1",
        "  Jacobi holds as (f,(g,h)) = (-1)^(f+1) ((f,g),h)"
        " + (-1)^((f+1)(g+1)) (g,(f,h))",
        "",
        "Forcing identities (first failure when one field is perturbed):",
    ]

    def perturbations():
        for i in range(4):
            c = list(conv.term_q_qstar)
            c[i] ^= 1
            yield "term_q_qstar bit c%d" % i, SignConvention(
                tuple(c), conv.term_qstar_q, conv.div_parity, conv.div_side, conv.generator_sign
            )
        for i in range(4):
            b = list(conv.term_qstar_q)
            b[i] ^= 1
            yield "term_qstar_q bit c%d" % i, SignConvention(
                conv.term_q_qstar, tuple(b), conv.div_parity, conv.div_side, conv.generator_sign
            )
        yield "div_parity", SignConvention(
            conv.term_q_qstar, conv.term_qstar_q, conv.div_parity ^ 1, conv.div_side, conv.generator_sign
        )
        yield "div_side", SignConvention(
            conv.term_q_qstar,
            conv.term_qstar_q,
            conv.div_parity,
            "right" if conv.div_side == "left" else "left",
            conv.generator_sign,
        )
        for i in range(2):
            s = list(conv.generator_sign)
            s[i] ^= 1
            yield "generator_sign bit s%d" % i, SignConvention(
                conv.term_q_qstar, conv.term_qstar_q, conv.div_parity, conv.div_side, tuple(s)
            )

    for label, perturbed in perturbations():
        rng = random.Random(seed)
        forced_by = "no identity rejects this perturbation"
        for name, holds in _identity_suite(perturbed, rng):
            if not holds:
                forced_by = name
                break
        lines.append("  %-24s forced by: %s" % (label + ":", forced_by))
    lines.append("")
    return "\n".join(lines)
