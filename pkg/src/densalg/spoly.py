"""Exact supercommutative polynomial arithmetic on odd cotangent charts.

Values are sparse polynomials with Fraction coefficients over the variables of
a chart: base coordinates (even or odd), their parity-flipped fiber partners
(written ``#x``), and, on "hatted" charts, the weight variable ``t`` (even,
weight 1, Laurent powers with rational exponents allowed) and its odd partner
``#t`` (weight -1).

Monomials are stored as exponent maps; odd variables are implicitly kept in
chart declaration order and every reordering sign is absorbed into the
coefficient at construction time, so equal polynomials have equal term maps.
All values are immutable and all operations are pure.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

EVEN = 0
ODD = 1


class ChartMismatchError(ValueError):
    pass


class UnknownVariableError(KeyError):
    pass


class SubstitutionError(ValueError):
    pass


class _Sentinel:
    def __init__(self, label):
        self.label = label

    def __repr__(self):
        return self.label


class _AnyGrade(_Sentinel):
    """Grade of the zero polynomial: compares equal to every definite grade."""

    def __eq__(self, other):
        return other is not MIXED

    def __ne__(self, other):
        return other is MIXED

    def __hash__(self):
        return hash(self.label)


MIXED = _Sentinel("Mixed")
ANY = _AnyGrade("Any")


def _frac(c):
    return c if isinstance(c, Fraction) else Fraction(c)


def rational_power(base, exponent):
    """base**exponent for Fractions, exact or raise.

    Used when rescaling ``t`` (which carries rational Laurent exponents): the
    result must stay rational, so base must be a perfect power when the
    exponent has a denominator.
    """
    base = _frac(base)
    exponent = _frac(exponent)
    if base <= 0:
        raise SubstitutionError("t may only be rescaled by a positive rational")
    if exponent.denominator == 1:
        return base ** int(exponent)
    root = exponent.denominator

    def iroot(n):
        r = round(n ** (1.0 / root))
        for cand in (r - 1, r, r + 1):
            if cand > 0 and cand ** root == n:
                return cand
        return None

    p = iroot(base.numerator)
    q = iroot(base.denominator)
    if p is None or q is None:
        raise SubstitutionError(
            "rescaling t by %s with exponent %s leaves the rationals" % (base, exponent)
        )
    return Fraction(p, q) ** exponent.numerator


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str  # 'base' | 'fiber' | 't' | 'tstar'
    parity: int
    weight: Fraction
    index: int

    def __repr__(self):
        return "Variable(%s)" % self.name


class Chart:
    """A coordinate chart: base coordinates, fiber partners, optional (t, #t).

    The variable order is: base coordinates in declaration order, then their
    fiber partners, then t and #t on hatted charts.  This order is the
    canonical order of odd factors inside a monomial.
    """

    def __init__(self, base_coords, hatted=False, name=""):
        base_coords = [(n, int(p)) for n, p in base_coords]
        seen = set()
        for n, p in base_coords:
            if p not in (EVEN, ODD):
                raise ValueError("parity must be 0 or 1")
            if n in seen or n in ("t", "#t", "w"):
                raise ValueError("bad or duplicate coordinate name: %r" % n)
            seen.add(n)
        self.name = name
        self.hatted = bool(hatted)
        self.base_coords = tuple(base_coords)
        n = len(base_coords)
        variables = []
        for i, (nm, p) in enumerate(base_coords):
            variables.append(Variable(nm, "base", p, Fraction(0), i))
        for i, (nm, p) in enumerate(base_coords):
            variables.append(Variable("#" + nm, "fiber", (p + 1) % 2, Fraction(0), n + i))
        if self.hatted:
            variables.append(Variable("t", "t", EVEN, Fraction(1), 2 * n))
            variables.append(Variable("#t", "tstar", ODD, Fraction(-1), 2 * n + 1))
        self.variables = tuple(variables)
        self.by_name = {v.name: v for v in variables}
        self._n_base = n
        self._key = (self.base_coords, self.hatted)

    # -- identity is structural; the name is display only --
    def __eq__(self, other):
        return isinstance(other, Chart) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return "Chart(%s%s)" % (
            ", ".join(n for n, _ in self.base_coords),
            "; hatted" if self.hatted else "",
        )

    @property
    def n_base(self):
        return self._n_base

    def var(self, name):
        try:
            return self.by_name[name]
        except KeyError:
            raise UnknownVariableError("no variable %r on %r" % (name, self))

    def fiber_of(self, base_var):
        return self.variables[self._n_base + base_var.index]

    def base_of(self, fiber_var):
        return self.variables[fiber_var.index - self._n_base]

    @property
    def t_var(self):
        if not self.hatted:
            raise UnknownVariableError("chart is not hatted")
        return self.variables[2 * self._n_base]

    @property
    def tstar_var(self):
        if not self.hatted:
            raise UnknownVariableError("chart is not hatted")
        return self.variables[2 * self._n_base + 1]

    def base_pairs(self):
        """(x^a, x*_a) pairs, base coordinates only."""
        return [
            (self.variables[i], self.variables[self._n_base + i])
            for i in range(self._n_base)
        ]

    def all_pairs(self):
        """Base pairs plus (t, #t) on hatted charts."""
        pairs = self.base_pairs()
        if self.hatted:
            pairs.append((self.t_var, self.tstar_var))
        return pairs

    def hatted_version(self):
        if self.hatted:
            return self
        return Chart(self.base_coords, hatted=True, name=self.name)

    def unhatted_version(self):
        if not self.hatted:
            return self
        return Chart(self.base_coords, hatted=False, name=self.name)

    # -- polynomial constructors --
    def zero(self):
        return SPoly(self, {})

    def const(self, c):
        c = _frac(c)
        return SPoly(self, {(): c} if c else {})

    def __getitem__(self, name):
        v = self.var(name)
        exp = Fraction(1) if v.kind == "t" else 1
        return SPoly(self, {((v.index, exp),): Fraction(1)})

    def t_power(self, lam):
        lam = _frac(lam)
        if not self.hatted:
            raise UnknownVariableError("chart is not hatted")
        if lam == 0:
            return self.const(1)
        return SPoly(self, {((self.t_var.index, lam),): Fraction(1)})

    def w_star(self):
        """The weight-0 odd coordinate w = t * #t."""
        return self["t"] * self["#t"]

    # -- monomial-key helpers --
    def key_parity(self, key):
        p = 0
        for idx, exp in key:
            if self.variables[idx].parity:
                p ^= int(exp) & 1
        return p

    def key_weight(self, key):
        w = Fraction(0)
        for idx, exp in key:
            wt = self.variables[idx].weight
            if wt:
                w += wt * exp
        return w

    def key_fiber_degree(self, key):
        d = 0
        for idx, exp in key:
            if self.variables[idx].kind in ("fiber", "tstar"):
                d += int(exp)
        return d

    def key_odd_indices(self, key):
        return [idx for idx, _ in key if self.variables[idx].parity]


def _mul_keys(chart, k1, k2):
    """Merge two monomial keys; returns (key, sign) or None if an odd square."""
    odd1 = chart.key_odd_indices(k1)
    odd2 = chart.key_odd_indices(k2)
    sign = 1
    if odd1 and odd2:
        s1 = set(odd1)
        if s1.intersection(odd2):
            return None
        inversions = 0
        for j in odd2:
            for i in odd1:
                if i > j:
                    inversions += 1
        if inversions & 1:
            sign = -1
    merged = dict(k1)
    for idx, exp in k2:
        new = merged.get(idx, 0) + exp
        if new:
            merged[idx] = new
        else:
            del merged[idx]
    return tuple(sorted(merged.items())), sign


class SPoly:
    """Sparse supercommutative polynomial over a chart, exact coefficients."""

    __slots__ = ("chart", "terms")

    def __init__(self, chart, terms):
        self.chart = chart
        self.terms = terms

    @staticmethod
    def zero(chart):
        return chart.zero()

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, SPoly):
            return self.chart == other.chart and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == self.chart.const(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.chart, frozenset(self.terms.items())))

    def _check_chart(self, other):
        if self.chart != other.chart:
            raise ChartMismatchError("operands live on different charts")

    def _coerce(self, other):
        if isinstance(other, SPoly):
            self._check_chart(other)
            return other
        if isinstance(other, (int, Fraction)):
            return self.chart.const(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self.terms)
        for k, c in other.terms.items():
            new = terms.get(k, 0) + c
            if new:
                terms[k] = new
            else:
                terms.pop(k, None)
        return SPoly(self.chart, terms)

    __radd__ = __add__

    def __neg__(self):
        return SPoly(self.chart, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _frac(other)
            if not c:
                return self.chart.zero()
            return SPoly(self.chart, {k: v * c for k, v in self.terms.items()})
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        chart = self.chart
        result = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                merged = _mul_keys(chart, k1, k2)
                if merged is None:
                    continue
                key, sign = merged
                c = result.get(key, 0) + sign * c1 * c2
                if c:
                    result[key] = c
                else:
                    result.pop(key, None)
        return SPoly(chart, result)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / _frac(other))
        return NotImplemented

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers")
        result = self.chart.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __repr__(self):
        from .printing import poly_to_text

        return poly_to_text(self)

    # -- calculus --
    def derive_left(self, v):
        return self._derive(v, left=True)

    def derive_right(self, v):
        return self._derive(v, left=False)

    def _derive(self, v, left):
        chart = self.chart
        if chart.by_name.get(v.name) != v:
            raise UnknownVariableError("%r is not a variable of %r" % (v, chart))
        result = {}
        for key, coeff in self.terms.items():
            kd = dict(key)
            if v.index not in kd:
                continue
            exp = kd.pop(v.index)
            if v.parity == EVEN:
                coeff = coeff * exp
                if exp != 1:
                    kd[v.index] = exp - 1
            else:
                # move v to the boundary, one sign per odd transposition
                if left:
                    crossings = sum(
                        1 for idx in chart.key_odd_indices(key) if idx < v.index
                    )
                else:
                    crossings = sum(
                        1 for idx in chart.key_odd_indices(key) if idx > v.index
                    )
                if crossings & 1:
                    coeff = -coeff
            if not coeff:
                continue
            nk = tuple(sorted(kd.items()))
            c = result.get(nk, 0) + coeff
            if c:
                result[nk] = c
            else:
                result.pop(nk, None)
        return SPoly(chart, result)

    # -- grading --
    def parity(self):
        if not self.terms:
            return ANY
        grades = {self.chart.key_parity(k) for k in self.terms}
        return grades.pop() if len(grades) == 1 else MIXED

    def weight(self):
        if not self.terms:
            return ANY
        grades = {self.chart.key_weight(k) for k in self.terms}
        return grades.pop() if len(grades) == 1 else MIXED

    def fiber_degree(self):
        if not self.terms:
            return ANY
        grades = {self.chart.key_fiber_degree(k) for k in self.terms}
        return grades.pop() if len(grades) == 1 else MIXED

    def parity_components(self):
        """Split into (even part, odd part)."""
        even = {}
        odd = {}
        for k, c in self.terms.items():
            (odd if self.chart.key_parity(k) else even)[k] = c
        return SPoly(self.chart, even), SPoly(self.chart, odd)

    def substitute(self, images, target=None):
        """Simultaneous substitution; variables absent from `images` are fixed.

        `images` maps Variables of this chart to SPoly values over `target`
        (default: this chart).  Odd variables must get odd images, even
        variables even images; `t` may only be rescaled by a positive rational.
        """
        chart = self.chart
        if target is None:
            target = chart
            for img in images.values():
                if isinstance(img, SPoly) and img.chart != chart:
                    target = img.chart
                    break
        t_scale = None
        prepared = {}
        for v, img in images.items():
            if chart.by_name.get(v.name) != v:
                raise UnknownVariableError("%r is not a variable of the chart" % (v,))
            if not isinstance(img, SPoly):
                img = target.const(img)
            if img.chart != target:
                raise ChartMismatchError("image of %s lives on the wrong chart" % v.name)
            if v.kind == "t":
                # only c*t with c > 0 keeps rational Laurent powers exact
                if len(img.terms) != 1:
                    raise SubstitutionError("t image must be a positive multiple of t")
                (key, c), = img.terms.items()
                if key != ((target.t_var.index, Fraction(1)),) or c <= 0:
                    raise SubstitutionError("t image must be a positive multiple of t")
                t_scale = c
                continue
            if img.parity() != v.parity:
                raise SubstitutionError(
                    "image of %s has parity %r, expected %d" % (v.name, img.parity(), v.parity)
                )
            prepared[v.index] = img
        fixed_cache = {}

        def fixed_image(v):
            if v.index not in fixed_cache:
                try:
                    tv = target.var(v.name)
                except UnknownVariableError:
                    raise SubstitutionError(
                        "variable %s has no image and no counterpart on the target chart" % v.name
                    )
                if tv.parity != v.parity:
                    raise SubstitutionError("parity clash transporting %s" % v.name)
                fixed_cache[v.index] = target[v.name]
            return fixed_cache[v.index]

        result = target.zero()
        for key, coeff in self.terms.items():
            acc = target.const(coeff)
            for idx, exp in key:
                v = chart.variables[idx]
                if v.kind == "t":
                    if t_scale is not None:
                        acc = acc * (rational_power(t_scale, exp) * target.t_power(exp))
                    else:
                        acc = acc * target.t_power(exp)
                    continue
                img = prepared.get(idx)
                if img is None:
                    img = fixed_image(v)
                acc = acc * (img if exp == 1 else img ** exp)
                if acc.is_zero():
                    break
            result = result + acc
        return result

    def transport(self, target):
        """Rename-preserving move to another chart (e.g. unhatted -> hatted)."""
        return self.substitute({}, target=target)

    def coefficient(self, key):
        return self.terms.get(key, Fraction(0))

    def constant_term(self):
        return self.terms.get((), Fraction(0))
