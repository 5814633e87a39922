"""Polynomial Cartan calculus on shifted-tangent charts.

A tangent chart carries base coordinates x^a (weight 0) and their odd
partners xi^a (weight 1); functions on it are polynomial differential
forms. Extra coordinates (e.g. a twist fiber) may be present; the calculus
below only touches the (x, xi) pairs.
"""

from __future__ import annotations

from .errors import GradingError
from .graded_algebra import Chart, GPoly, GVar, left_derivative
from .nq_core import Derivation


class TangentChart:
    """Chart modelling T[1]R^m, optionally with extra fiber coordinates.

    extra: iterable of (name, weight) appended after the (x, xi) block.
    """

    def __init__(self, m: int, extra=(), x="x", xi="xi"):
        self.m = m
        self.x_names = tuple(f"{x}{a}" for a in range(1, m + 1))
        self.xi_names = tuple(f"{xi}{a}" for a in range(1, m + 1))
        gvars = [GVar(n, 0) for n in self.x_names] + [GVar(n, 1) for n in self.xi_names]
        gvars += [GVar(n, w) for n, w in extra]
        self.chart = Chart(gvars)

    def x(self, a: int) -> GPoly:
        return self.chart.var(self.x_names[a - 1])

    def xi(self, a: int) -> GPoly:
        return self.chart.var(self.xi_names[a - 1])

    def zero(self):
        return self.chart.zero()

    def one(self):
        return self.chart.one()

    def is_base_form(self, p: GPoly) -> bool:
        """True if p only involves the (x, xi) block."""
        fixed = set(self.x_names) | set(self.xi_names)
        for key in p.terms:
            for i, e in enumerate(key):
                if e and self.chart.gvars[i].name not in fixed:
                    return False
        return True

    def form_degree(self, p: GPoly):
        """Number of xi factors, if uniform across terms (None otherwise)."""
        degs = set()
        for key in p.terms:
            degs.add(sum(key[self.chart.index(n)] for n in self.xi_names))
        if not degs:
            return 0
        return degs.pop() if len(degs) == 1 else None

    # -- Cartan operations -------------------------------------------------

    def de_rham(self) -> Derivation:
        """The Q sending x^a to xi^a (and every other coordinate to 0)."""
        comps = {xn: self.chart.var(qn) for xn, qn in zip(self.x_names, self.xi_names)}
        return Derivation(self.chart, 1, comps)

    def d(self, p: GPoly) -> GPoly:
        return self.de_rham()(p)

    def contraction(self, v) -> Derivation:
        """Interior product with the polynomial vector field v = (v^1, ..., v^m)."""
        v = list(v)
        if len(v) != self.m:
            raise ValueError("vector field needs one component per base coordinate")
        comps = {}
        for a, comp in enumerate(v, start=1):
            if not comp.is_homogeneous(0):
                raise GradingError("vector field components must be weight-0 polynomials")
            comps[self.xi_names[a - 1]] = comp
        return Derivation(self.chart, -1, comps)

    def iota(self, v, p: GPoly) -> GPoly:
        return self.contraction(v)(p)

    def lie(self, v, p: GPoly) -> GPoly:
        """Lie derivative along v via the Cartan formula d iota + iota d."""
        return self.d(self.iota(v, p)) + self.iota(v, self.d(p))

    def vector_bracket(self, v, w):
        """Commutator of polynomial vector fields, componentwise."""
        out = []
        for a in range(self.m):
            acc = self.zero()
            for b in range(self.m):
                xb = self.x_names[b]
                acc = acc + v[b] * left_derivative(w[a], xb) - w[b] * left_derivative(v[a], xb)
            out.append(acc)
        return out


def dorfman_bracket(tc: TangentChart, sec1, sec2):
    """Dorfman bracket on polynomial sections of TM + T*M.

    Sections are pairs (X, xi): X a list of m weight-0 polynomials, xi a
    weight-1 base form. Returns ([X,Y], L_X zeta - iota_Y d xi).
    """
    X, xi = sec1
    Y, zeta = sec2
    vec = tc.vector_bracket(X, Y)
    form = tc.lie(X, zeta) - tc.iota(Y, tc.d(xi))
    return vec, form
