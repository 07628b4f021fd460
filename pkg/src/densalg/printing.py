"""Canonical text and JSON forms for charts and polynomials.

The text form is what the expression DSL accepts back: ``#x`` is the fiber
partner of ``x``, ``#t`` the odd partner of ``t``, and a term containing
``t^(m+1) * #t`` is displayed with the weight-0 sugar ``w`` instead.
Terms are ordered by (fiber degree desc, weight desc, lexicographic
exponents desc), so printing is deterministic and parse(print(f)) == f.
"""
from __future__ import annotations

from fractions import Fraction

from .spoly import Chart, SPoly


def _term_sort_key(chart, key):
    exps = [0] * len(chart.variables)
    for idx, exp in key:
        exps[idx] = exp
    return (
        -chart.key_fiber_degree(key),
        -chart.key_weight(key),
        tuple(-e for e in exps),
    )


def _exp_text(exp):
    if isinstance(exp, Fraction) and (exp.denominator != 1 or exp < 0):
        return "(%s)" % exp
    if isinstance(exp, int) and exp < 0:
        return "(%d)" % exp
    return str(exp)


def _monomial_factors(chart, key):
    kd = dict(key)
    use_w = False
    if chart.hatted:
        ts = chart.tstar_var.index
        ti = chart.t_var.index
        if kd.get(ts) == 1 and kd.get(ti, Fraction(0)) >= 1:
            use_w = True
            del kd[ts]
            kd[ti] = kd[ti] - 1
            if not kd[ti]:
                del kd[ti]
    factors = []
    for idx in sorted(kd):
        exp = kd[idx]
        name = chart.variables[idx].name
        factors.append(name if exp == 1 else "%s^%s" % (name, _exp_text(exp)))
    if use_w:
        factors.append("w")
    return factors


def poly_to_text(f: SPoly) -> str:
    if not f.terms:
        return "0"
    chart = f.chart
    keys = sorted(f.terms, key=lambda k: _term_sort_key(chart, k))
    pieces = []
    for key in keys:
        coeff = f.terms[key]
        factors = _monomial_factors(chart, key)
        mag = abs(coeff)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(mag)] + factors)
        if not pieces:
            pieces.append(body if coeff > 0 else "-" + body)
        else:
            pieces.append(("+ " if coeff > 0 else "- ") + body)
    return " ".join(pieces)


def chart_to_dict(chart: Chart) -> dict:
    return {
        "name": chart.name,
        "base": [[n, p] for n, p in chart.base_coords],
        "hatted": chart.hatted,
    }


def chart_from_dict(d: dict) -> Chart:
    return Chart([(n, p) for n, p in d["base"]], hatted=d["hatted"], name=d.get("name", ""))


def poly_to_dict(f: SPoly) -> dict:
    """SerializedPoly: rationals as strings so consumers lose nothing."""
    chart = f.chart
    keys = sorted(f.terms, key=lambda k: _term_sort_key(chart, k))
    terms = []
    for key in keys:
        exps = {}
        for idx, exp in key:
            v = chart.variables[idx]
            exps[v.name] = str(exp) if isinstance(exp, Fraction) else exp
        terms.append({"coeff": str(f.terms[key]), "exponents": exps})
    return {"chart": chart_to_dict(chart), "terms": terms}


def poly_from_dict(d: dict, chart: Chart | None = None) -> SPoly:
    if chart is None:
        chart = chart_from_dict(d["chart"])
    terms = {}
    for t in d["terms"]:
        key = []
        for name, exp in t["exponents"].items():
            v = chart.var(name)
            exp = Fraction(exp) if v.kind == "t" or isinstance(exp, str) else int(exp)
            if v.kind != "t":
                exp = int(exp)
            key.append((v.index, exp))
        key = tuple(sorted(key))
        terms[key] = Fraction(t["coeff"])
    return SPoly(chart, terms)
