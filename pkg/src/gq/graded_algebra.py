"""Exact supercommutative polynomial arithmetic over weighted variables.

Variables carry a non-negative integer weight; parity is weight mod 2.
Odd variables anticommute and square to zero, even variables commute.
Coefficients are exact rationals throughout; equality of polynomials is
structural equality of canonical forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ChartMismatchError, GradingError

Rat = Fraction


def _rat(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


@dataclass(frozen=True)
class GVar:
    """A graded coordinate: a name and a non-negative weight."""

    name: str
    weight: int

    def __post_init__(self):
        if self.weight < 0:
            raise GradingError(f"variable {self.name!r} has negative weight {self.weight}")

    @property
    def parity(self) -> int:
        return self.weight % 2


class Chart:
    """An ordered list of distinct graded variables; fixes the canonical order."""

    def __init__(self, gvars):
        gvars = tuple(gvars)
        names = [v.name for v in gvars]
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names in chart")
        self.gvars = gvars
        self._index = {v.name: i for i, v in enumerate(gvars)}
        self.weights = tuple(v.weight for v in gvars)
        self.parities = tuple(v.parity for v in gvars)

    @classmethod
    def build(cls, *pairs) -> "Chart":
        """Chart from (name, weight) pairs, e.g. Chart.build(("x", 0), ("xi", 1))."""
        return cls(GVar(n, w) for n, w in pairs)

    def __len__(self):
        return len(self.gvars)

    def __eq__(self, other):
        return isinstance(other, Chart) and self.gvars == other.gvars

    def __hash__(self):
        return hash(self.gvars)

    def __repr__(self):
        inner = ", ".join(f"{v.name}:{v.weight}" for v in self.gvars)
        return f"Chart({inner})"

    def index(self, var) -> int:
        name = var.name if isinstance(var, GVar) else var
        if name not in self._index:
            raise KeyError(f"no variable {name!r} in chart")
        return self._index[name]

    def gvar(self, name: str) -> GVar:
        return self.gvars[self.index(name)]

    def degree(self) -> int:
        """Highest coordinate weight; 0 for the point chart."""
        return max(self.weights, default=0)

    # -- polynomial constructors ------------------------------------------

    def zero(self) -> "GPoly":
        return GPoly(self, {})

    def const(self, c) -> "GPoly":
        c = _rat(c)
        if c == 0:
            return self.zero()
        return GPoly(self, {(0,) * len(self.gvars): c})

    def one(self) -> "GPoly":
        return self.const(1)

    def var(self, name: str) -> "GPoly":
        i = self.index(name)
        key = tuple(1 if j == i else 0 for j in range(len(self.gvars)))
        return GPoly(self, {key: Fraction(1)})

    def monomial(self, c, exponents) -> "GPoly":
        """Monomial with explicit exponent tuple (odd exponents clipped to {0,1} rules)."""
        c = _rat(c)
        key = tuple(exponents)
        if len(key) != len(self.gvars):
            raise ValueError("exponent tuple has wrong length")
        for i, e in enumerate(key):
            if e < 0:
                raise ValueError("negative exponent")
            if self.parities[i] == 1 and e > 1:
                return self.zero()  # odd square vanishes
        if c == 0:
            return self.zero()
        return GPoly(self, {key: c})


def _key_weight(chart: Chart, key) -> int:
    return sum(e * w for e, w in zip(key, chart.weights))


def _key_parity(chart: Chart, key) -> int:
    return sum(e for e, p in zip(key, chart.parities) if p) % 2


def _merge_sign(odd_a, odd_b):
    """Koszul sign for concatenating two sorted odd-index words; None if a square appears."""
    if not odd_a or not odd_b:
        return 1
    inversions = 0
    for i in odd_a:
        for j in odd_b:
            if i == j:
                return None
            if i > j:
                inversions += 1
    return -1 if inversions % 2 else 1


class GPoly:
    """A supercommutative polynomial in canonical form.

    Stored as a mapping from exponent tuples (one entry per chart variable,
    odd entries 0 or 1) to nonzero rational coefficients. Instances are
    immutable by convention; all operations return fresh objects.
    """

    __slots__ = ("chart", "terms")

    def __init__(self, chart: Chart, terms):
        self.chart = chart
        self.terms = {k: v for k, v in terms.items() if v != 0}

    # -- basic queries ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def weight(self):
        """Common weight of all terms, 0 for the zero polynomial, None if mixed."""
        ws = {_key_weight(self.chart, k) for k in self.terms}
        if not ws:
            return 0
        if len(ws) > 1:
            return None
        return ws.pop()

    def is_homogeneous(self, weight=None) -> bool:
        """Weight-homogeneous; the zero polynomial is homogeneous of every weight."""
        if not self.terms:
            return True
        w = self.weight()
        if w is None:
            return False
        return weight is None or w == weight

    def parity(self):
        """Parity of all terms, 0 for zero, None if mixed."""
        ps = {_key_parity(self.chart, k) for k in self.terms}
        if not ps:
            return 0
        if len(ps) > 1:
            return None
        return ps.pop()

    def weight_component(self, w: int) -> "GPoly":
        return GPoly(self.chart, {k: c for k, c in self.terms.items()
                                  if _key_weight(self.chart, k) == w})

    def weight_decomposition(self):
        """Mapping weight -> homogeneous component, covering every term."""
        out = {}
        for k, c in self.terms.items():
            w = _key_weight(self.chart, k)
            out.setdefault(w, {})[k] = c
        return {w: GPoly(self.chart, t) for w, t in sorted(out.items())}

    def constant_term(self) -> Fraction:
        zero_key = (0,) * len(self.chart)
        return self.terms.get(zero_key, Fraction(0))

    def _check_chart(self, other):
        if self.chart != other.chart:
            raise ChartMismatchError("operands live on different charts")

    # -- ring operations --------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, GPoly):
            other = self.chart.const(other)
        self._check_chart(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            s = terms.get(k, Fraction(0)) + c
            if s == 0:
                terms.pop(k, None)
            else:
                terms[k] = s
        return GPoly(self.chart, terms)

    __radd__ = __add__

    def __neg__(self):
        return GPoly(self.chart, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, GPoly):
            other = self.chart.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return self.chart.const(other) - self

    def __mul__(self, other):
        if not isinstance(other, GPoly):
            c = _rat(other)
            return GPoly(self.chart, {k: v * c for k, v in self.terms.items()})
        self._check_chart(other)
        chart = self.chart
        parities = chart.parities
        out = {}
        for ka, ca in self.terms.items():
            odd_a = tuple(i for i, e in enumerate(ka) if e and parities[i])
            for kb, cb in other.terms.items():
                odd_b = tuple(i for i, e in enumerate(kb) if e and parities[i])
                sign = _merge_sign(odd_a, odd_b)
                if sign is None:
                    continue
                key = tuple(ea + eb for ea, eb in zip(ka, kb))
                c = out.get(key, Fraction(0)) + sign * ca * cb
                if c == 0:
                    out.pop(key, None)
                else:
                    out[key] = c
        return GPoly(chart, out)

    def __rmul__(self, other):
        # scalars commute with everything
        return self * other

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = self.chart.one()
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.chart.const(other)
        return isinstance(other, GPoly) and self.chart == other.chart and self.terms == other.terms

    def __hash__(self):
        return hash((self.chart, frozenset(self.terms.items())))

    # -- printing ---------------------------------------------------------

    def _key_sort(self, key):
        return (_key_weight(self.chart, key), key)

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for key in sorted(self.terms, key=self._key_sort):
            c = self.terms[key]
            factors = []
            for i, e in enumerate(key):
                if e == 0:
                    continue
                name = self.chart.gvars[i].name
                factors.append(name if e == 1 else f"{name}^{e}")
            body = "*".join(factors)
            if not body:
                pieces.append(str(c))
            elif c == 1:
                pieces.append(body)
            elif c == -1:
                pieces.append(f"-{body}")
            else:
                pieces.append(f"{c}*{body}")
        out = " + ".join(pieces)
        return out.replace("+ -", "- ")

    def __repr__(self):
        return f"GPoly({self})"


def multiply(p: GPoly, q: GPoly) -> GPoly:
    """Supercommutative product with Koszul signs; canonical output."""
    return p * q


def left_derivative(p: GPoly, v) -> GPoly:
    """Left graded derivative by a chart variable.

    Convention: d_v(ab) = (d_v a) b + (-1)^(parity(v) * parity(a)) a (d_v b).
    On a canonical monomial this strips v from the left, picking up one sign
    flip per odd factor standing before it.
    """
    chart = p.chart
    i = chart.index(v)
    parity_v = chart.parities[i]
    out = {}
    for key, c in p.terms.items():
        e = key[i]
        if e == 0:
            continue
        new_key = key[:i] + (e - 1,) + key[i + 1:]
        if parity_v == 0:
            coeff = c * e
        else:
            # odd factors with smaller canonical index stand to the left of v
            before = sum(1 for j in range(i) if key[j] and chart.parities[j])
            coeff = -c if before % 2 else c
        s = out.get(new_key, Fraction(0)) + coeff
        if s == 0:
            out.pop(new_key, None)
        else:
            out[new_key] = s
    return GPoly(chart, out)


def _right_derivative(p: GPoly, v) -> GPoly:
    """Right graded derivative (internal; the public convention is the left one).

    On a canonical monomial this strips v from the right, picking up one sign
    flip per odd factor standing after it.
    """
    chart = p.chart
    i = chart.index(v)
    parity_v = chart.parities[i]
    out = {}
    for key, c in p.terms.items():
        e = key[i]
        if e == 0:
            continue
        new_key = key[:i] + (e - 1,) + key[i + 1:]
        if parity_v == 0:
            coeff = c * e
        else:
            after = sum(1 for j in range(i + 1, len(key)) if key[j] and chart.parities[j])
            coeff = -c if after % 2 else c
        s = out.get(new_key, Fraction(0)) + coeff
        if s == 0:
            out.pop(new_key, None)
        else:
            out[new_key] = s
    return GPoly(chart, out)


def weight_of(p: GPoly):
    """Weight of a homogeneous polynomial, or None for an inhomogeneous one."""
    return p.weight()


def rescale(p: GPoly, lam) -> GPoly:
    """Substitute lam^weight(v) * v for every variable v."""
    lam = _rat(lam)
    chart = p.chart
    out = {}
    for key, c in p.terms.items():
        out[key] = c * lam ** _key_weight(chart, key)
    return GPoly(chart, out)


def scaling_check(p: GPoly, lam) -> bool:
    """Confirm p(lam . x) == lam^deg(p) * p(x) for homogeneous p."""
    w = p.weight()
    if w is None:
        raise GradingError("scaling_check requires a weight-homogeneous polynomial")
    return rescale(p, lam) == p * (_rat(lam) ** w)


def substitute(p: GPoly, v, q: GPoly) -> GPoly:
    """Substitute the polynomial q for the variable v.

    q must be homogeneous of the same weight as v (so parity matches and
    the exchange with the remaining factors is sign-neutral).
    """
    chart = p.chart
    if q.chart != chart:
        raise ChartMismatchError("substitution value lives on a different chart")
    i = chart.index(v)
    if not q.is_homogeneous(chart.weights[i]):
        raise GradingError("substitution value must match the variable's weight")
    result = chart.zero()
    for key, c in p.terms.items():
        e = key[i]
        if e and chart.parities[i]:
            # q replaces v at the right end of the word; moving the odd v
            # there passes the odd factors that follow it
            after = sum(1 for j in range(i + 1, len(key)) if key[j] and chart.parities[j])
            if after % 2:
                c = -c
        rest = chart.monomial(c, key[:i] + (0,) + key[i + 1:])
        term = rest
        for _ in range(e):
            term = term * q
        result = result + term
    return result
