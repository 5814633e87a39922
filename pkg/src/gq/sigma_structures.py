"""Degree-n symplectic Darboux charts and the structures they encode.

A Darboux chart pairs coordinates of weights k and n-k with a constant
coefficient per pair. The induced bracket has degree -n and satisfies the
shifted graded antisymmetry/Leibniz/Jacobi rules; all signs follow from the
conventions recorded in docs/CONVENTIONS.md. Degree-(n+1) Hamiltonians
correspond to degree-1 vector fields; the master equation {Theta, Theta} = 0
is the Hamiltonian face of Q^2 = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ChartMismatchError, GradingError, StructureError, UnsupportedInputError
from .graded_algebra import Chart, GPoly, GVar, _rat, _right_derivative, left_derivative
from .nq_core import Derivation, q_square


@dataclass(frozen=True)
class ConjugatePair:
    """One Darboux pair: names, weights, and the pair coefficient in omega."""

    q_name: str
    q_weight: int
    p_name: str
    p_weight: int
    sign: Fraction = Fraction(1)


class DarbouxChart:
    """Degree-n symplectic chart made of conjugate coordinate pairs.

    Weights are forced into [0, n] (a degree-n symplectic chart cannot carry
    higher coordinates), and each pair's weights must sum to n. The pairing
    is nondegenerate by construction.
    """

    def __init__(self, n: int, pairs):
        if n < 0:
            raise GradingError("symplectic degree must be non-negative")
        self.n = n
        norm = []
        gvars = []
        for p in pairs:
            if not isinstance(p, ConjugatePair):
                p = ConjugatePair(*p)
            p = ConjugatePair(p.q_name, p.q_weight, p.p_name, p.p_weight, _rat(p.sign))
            if p.sign == 0:
                raise StructureError(f"pair ({p.q_name}, {p.p_name}) has zero coefficient")
            for name, w in ((p.q_name, p.q_weight), (p.p_name, p.p_weight)):
                if w < 0 or w > n:
                    raise GradingError(
                        f"coordinate {name!r} has weight {w} outside [0, {n}]")
            if p.q_weight + p.p_weight != n:
                raise GradingError(
                    f"pair ({p.q_name}, {p.p_name}) weights sum to "
                    f"{p.q_weight + p.p_weight}, expected {n}")
            norm.append(p)
            gvars.append(GVar(p.q_name, p.q_weight))
            gvars.append(GVar(p.p_name, p.p_weight))
        self.pairs = tuple(norm)
        self.chart = Chart(gvars)

    def var(self, name: str) -> GPoly:
        return self.chart.var(name)

    def zero(self) -> GPoly:
        return self.chart.zero()

    def one(self) -> GPoly:
        return self.chart.one()

    def conjugate_of(self, name: str) -> str:
        for p in self.pairs:
            if p.q_name == name:
                return p.p_name
            if p.p_name == name:
                return p.q_name
        raise KeyError(f"{name!r} is not a Darboux coordinate")

    def __repr__(self):
        inner = "; ".join(
            f"({p.q_name}:{p.q_weight}, {p.p_name}:{p.p_weight})" + ("" if p.sign == 1 else f"*{p.sign}")
            for p in self.pairs)
        return f"DarbouxChart(n={self.n}, {inner})"


def poisson_chart(m: int) -> DarbouxChart:
    """T*[1]R^m: pairs (x_a: 0, p_a: 1), coefficient +1."""
    return DarbouxChart(1, [ConjugatePair(f"x{a}", 0, f"p{a}", 1) for a in range(1, m + 1)])


def courant_chart(m: int) -> DarbouxChart:
    """T*[2]T[1]R^m: pairs (x_a: 0, p_a: 2) with coefficient -1 and
    (theta_a: 1, chi_a: 1) with coefficient +1.

    The even-pair coefficient makes the derived bracket of Theta = theta^a p_a
    reproduce the Dorfman bracket on the nose (see docs/CONVENTIONS.md).
    """
    pairs = [ConjugatePair(f"x{a}", 0, f"p{a}", 2, Fraction(-1)) for a in range(1, m + 1)]
    pairs += [ConjugatePair(f"theta{a}", 1, f"chi{a}", 1) for a in range(1, m + 1)]
    return DarbouxChart(2, pairs)


def poisson_bracket(dchart: DarbouxChart, f: GPoly, g: GPoly) -> GPoly:
    """The degree-(-n) bracket induced by omega.

    {f, g} = sum over pairs of
        sign * [ dR_q f * dL_p g  -  (-1)^(|q||p|) dR_p f * dL_q g ].
    On coordinates {q_i, p_j} = sign_i * delta_ij.
    """
    chart = dchart.chart
    if f.chart != chart or g.chart != chart:
        raise ChartMismatchError("arguments do not live on this Darboux chart")
    result = chart.zero()
    for pr in dchart.pairs:
        qp = pr.q_weight % 2
        pp = pr.p_weight % 2
        t1 = _right_derivative(f, pr.q_name) * left_derivative(g, pr.p_name)
        t2 = _right_derivative(f, pr.p_name) * left_derivative(g, pr.q_name)
        contrib = t1 - t2 if (qp * pp) % 2 == 0 else t1 + t2
        result = result + contrib * pr.sign
    return result


class Hamiltonian:
    """A weight-(n+1) function on a Darboux chart."""

    def __init__(self, dchart: DarbouxChart, theta: GPoly):
        if theta.chart != dchart.chart:
            raise ChartMismatchError("Hamiltonian lives on a different chart")
        if not theta.is_homogeneous(dchart.n + 1):
            raise GradingError(
                f"Hamiltonian must be homogeneous of weight {dchart.n + 1}, got {theta}")
        self.dchart = dchart
        self.theta = theta

    def __str__(self):
        return str(self.theta)


def hamiltonian_vector_field(dchart: DarbouxChart, h: GPoly, degree=None) -> Derivation:
    """The derivation {h, .}; degree = weight(h) - n.

    For the zero function every degree is valid; `degree` picks one
    (default 1, the Q-structure case).
    """
    w = h.weight()
    if w is None:
        raise GradingError("Hamiltonian vector field needs a homogeneous function")
    if degree is None:
        degree = 1 if h.is_zero() else w - dchart.n
    comps = {v.name: poisson_bracket(dchart, h, dchart.var(v.name))
             for v in dchart.chart.gvars}
    return Derivation(dchart.chart, degree, comps, check=False)


def hamiltonian_to_q(dchart: DarbouxChart, theta) -> Derivation:
    """Q = {Theta, .} for a weight-(n+1) Hamiltonian; a degree-1 field."""
    if isinstance(theta, Hamiltonian):
        theta = theta.theta
    Hamiltonian(dchart, theta)  # validates the weight
    return hamiltonian_vector_field(dchart, theta)


def q_to_hamiltonian(dchart: DarbouxChart, Q: Derivation) -> GPoly:
    """The unique weight-(n+1) Theta with {Theta, .} = Q.

    Reconstructs Theta through the Euler identity and verifies the round
    trip on every coordinate, which is exactly Q-invariance of omega on a
    Darboux chart; a non-symplectic Q fails with StructureError.
    """
    if dchart.n < 1:
        raise GradingError("q_to_hamiltonian needs symplectic degree >= 1")
    if Q.chart != dchart.chart:
        raise ChartMismatchError("Q lives on a different chart")
    if Q.degree != 1:
        raise GradingError("q_to_hamiltonian expects a degree-1 field")
    n = dchart.n
    theta = dchart.zero()
    for pr in dchart.pairs:
        q, p = dchart.var(pr.q_name), dchart.var(pr.p_name)
        qw, pw = pr.q_weight, pr.p_weight
        # invert Q(p) = sign * dR_q Theta and Q(q) = -sign (-1)^(|q||p|) dR_p Theta
        sq = Fraction(-1) if (qw % 2) * (n % 2) else Fraction(1)
        sp = Fraction(-1) if (pw % 2) * (n % 2) else Fraction(1)
        spar = Fraction(-1) if (qw % 2) * (pw % 2) else Fraction(1)
        inv = Fraction(1) / pr.sign
        theta = theta + q * Q.component(pr.p_name) * (sq * Fraction(qw) * inv)
        theta = theta - p * Q.component(pr.q_name) * (sp * spar * Fraction(pw) * inv)
    theta = theta * Fraction(1, n + 1)
    candidate = theta.weight_component(n + 1)
    if candidate != theta:
        raise StructureError("Q is not symplectic: reconstructed Hamiltonian is inhomogeneous")
    back = hamiltonian_to_q(dchart, candidate)
    for v in dchart.chart.gvars:
        if back.component(v.name) != Q.component(v.name):
            raise StructureError(
                f"Q is not symplectic: L_Q omega != 0 detected at coordinate {v.name!r}")
    return candidate


def master_equation(dchart: DarbouxChart, theta) -> GPoly:
    """{Theta, Theta}; vanishes iff the Hamiltonian field squares to zero."""
    if isinstance(theta, Hamiltonian):
        theta = theta.theta
    return poisson_bracket(dchart, theta, theta)


def derived_bracket(dchart: DarbouxChart, theta, e1: GPoly, e2: GPoly) -> GPoly:
    """{{Theta, e1}, e2}: Poisson bracket of functions at n=1, Dorfman at n=2."""
    if isinstance(theta, Hamiltonian):
        theta = theta.theta
    if not e1.is_homogeneous() or not e2.is_homogeneous():
        raise GradingError("derived_bracket expects weight-homogeneous arguments")
    return poisson_bracket(dchart, poisson_bracket(dchart, theta, e1), e2)


def poisson_theta(dchart: DarbouxChart, pi) -> GPoly:
    """Hamiltonian lift of a bivector: Theta_pi = -1/2 pi^{ab} p_a p_b.

    pi: mapping (a, b) -> weight-0 polynomial (or rational), antisymmetric;
    missing entries default to 0, entries with a > b follow by antisymmetry.
    The normalization makes derived_bracket(Theta_pi, x^a, x^b) = pi^{ab}.
    """
    if dchart.n != 1:
        raise GradingError("poisson_theta lives on a degree-1 chart")
    m = len(dchart.pairs)
    upper = {}
    for (a, b), coeff in pi.items():
        if not (1 <= a <= m and 1 <= b <= m):
            raise ValueError(f"bivector index out of range: {(a, b)}")
        if not isinstance(coeff, GPoly):
            coeff = dchart.chart.const(coeff)
        if a == b:
            if not coeff.is_zero():
                raise ValueError("bivector entries must vanish on the diagonal")
            continue
        key, val = ((a, b), coeff) if a < b else ((b, a), -coeff)
        if key in upper and upper[key] != val:
            raise ValueError(f"conflicting bivector entries at {key}")
        upper[key] = val
    theta = dchart.zero()
    for (a, b), coeff in upper.items():
        # the (a,b) and (b,a) orders of the 1/2 pi^{ab} p_a p_b sum coincide
        theta = theta - coeff * dchart.var(f"p{a}") * dchart.var(f"p{b}")
    return theta


def courant_theta(dchart: DarbouxChart, eta: GPoly | None = None) -> GPoly:
    """Theta = theta^a p_a (+ eta) on the standard degree-2 chart.

    eta, if given, must be a weight-3 polynomial in (x, theta) only: the
    twisting 3-form. The master equation then vanishes iff d eta = 0.
    """
    if dchart.n != 2:
        raise GradingError("courant_theta lives on a degree-2 chart")
    m = len(dchart.pairs) // 2
    theta = dchart.zero()
    for a in range(1, m + 1):
        theta = theta + dchart.var(f"theta{a}") * dchart.var(f"p{a}")
    if eta is not None:
        if not eta.is_homogeneous(3):
            raise GradingError("twisting form must be homogeneous of weight 3")
        banned = {f"p{a}" for a in range(1, m + 1)} | {f"chi{a}" for a in range(1, m + 1)}
        for key in eta.terms:
            for i, e in enumerate(key):
                if e and dchart.chart.gvars[i].name in banned:
                    raise GradingError("twisting form may only involve x and theta")
        theta = theta + eta
    return theta


def section_encode(dchart: DarbouxChart, X, xi) -> GPoly:
    """Vector + 1-form (X^a, xi_a) as the weight-1 function X^a chi_a + xi_a theta^a."""
    m = len(dchart.pairs) // 2
    out = dchart.zero()
    for a in range(1, m + 1):
        Xa = X[a - 1] if isinstance(X[a - 1], GPoly) else dchart.chart.const(X[a - 1])
        xia = xi[a - 1] if isinstance(xi[a - 1], GPoly) else dchart.chart.const(xi[a - 1])
        out = out + Xa * dchart.var(f"chi{a}") + xia * dchart.var(f"theta{a}")
    return out


def section_decode(dchart: DarbouxChart, e: GPoly):
    """Inverse of section_encode for weight-1 functions on the standard chart."""
    m = len(dchart.pairs) // 2
    X = [left_derivative(e, f"chi{a}") for a in range(1, m + 1)]
    xi = [left_derivative(e, f"theta{a}") for a in range(1, m + 1)]
    return X, xi


# -- Lie algebroids as degree-1 Q-structures --------------------------------


class AlgebroidData:
    """Anchor and structure functions of a Lie algebroid in coordinates.

    base_dim m, fiber_dim r; rho[(a, i)] and c[(k, i, j)] are weight-0
    polynomials on the A[1] chart (x1..xm of weight 0, xi1..xir of weight 1);
    c is antisymmetric in (i, j): entries with i < j determine the rest.
    """

    def __init__(self, base_dim: int, fiber_dim: int, rho=None, c=None):
        self.base_dim = base_dim
        self.fiber_dim = fiber_dim
        gvars = [GVar(f"x{a}", 0) for a in range(1, base_dim + 1)]
        gvars += [GVar(f"xi{i}", 1) for i in range(1, fiber_dim + 1)]
        self.chart = Chart(gvars)
        self.rho = {}
        for (a, i), poly in (rho or {}).items():
            if not (1 <= a <= base_dim and 1 <= i <= fiber_dim):
                raise ValueError(f"anchor index out of range: {(a, i)}")
            poly = self._coerce(poly)
            if not poly.is_zero():
                self.rho[(a, i)] = poly
        self.c = {}
        for (k, i, j), poly in (c or {}).items():
            if not all(1 <= t <= fiber_dim for t in (k, i, j)):
                raise ValueError(f"structure index out of range: {(k, i, j)}")
            if i == j:
                if not self._coerce(poly).is_zero():
                    raise ValueError("c must vanish on repeated lower indices")
                continue
            poly = self._coerce(poly)
            if poly.is_zero():
                continue
            key, val = ((k, i, j), poly) if i < j else ((k, j, i), -poly)
            if key in self.c and self.c[key] != val:
                raise ValueError(f"conflicting values for c{key}")
            self.c[key] = val

    def _coerce(self, poly) -> GPoly:
        if not isinstance(poly, GPoly):
            poly = self.chart.const(poly)
        if not poly.is_homogeneous(0):
            raise GradingError("algebroid data must be weight-0 polynomials")
        return poly

    def anchor(self, a: int, i: int) -> GPoly:
        return self.rho.get((a, i), self.chart.zero())

    def structure(self, k: int, i: int, j: int) -> GPoly:
        if i == j:
            return self.chart.zero()
        if i < j:
            return self.c.get((k, i, j), self.chart.zero())
        return -self.c.get((k, j, i), self.chart.zero())

    def __eq__(self, other):
        return (isinstance(other, AlgebroidData)
                and self.base_dim == other.base_dim
                and self.fiber_dim == other.fiber_dim
                and self.rho == other.rho and self.c == other.c)


def algebroid_to_q(A: AlgebroidData) -> Derivation:
    """Q(x^a) = xi^i rho^a_i, Q(xi^k) = -1/2 c^k_ij xi^i xi^j on the A[1] chart."""
    chart = A.chart
    comps = {}
    for a in range(1, A.base_dim + 1):
        acc = chart.zero()
        for i in range(1, A.fiber_dim + 1):
            acc = acc + chart.var(f"xi{i}") * A.anchor(a, i)
        comps[f"x{a}"] = acc
    for k in range(1, A.fiber_dim + 1):
        acc = chart.zero()
        for (kk, i, j), coeff in A.c.items():
            if kk != k:
                continue
            # sum over ordered pairs i < j absorbs the 1/2
            acc = acc - coeff * chart.var(f"xi{i}") * chart.var(f"xi{j}")
        comps[f"xi{k}"] = acc
    return Derivation(chart, 1, comps)


def q_to_algebroid(Q: Derivation) -> AlgebroidData:
    """Read anchor and structure functions off a degree-1 Q on a degree-1 chart."""
    chart = Q.chart
    if chart.degree() > 1:
        raise GradingError("q_to_algebroid needs a chart of degree at most 1")
    if Q.degree != 1:
        raise GradingError("q_to_algebroid expects a degree-1 field")
    base = [v.name for v in chart.gvars if v.weight == 0]
    fiber = [v.name for v in chart.gvars if v.weight == 1]
    m, r = len(base), len(fiber)
    rho = {}
    for a, xname in enumerate(base, start=1):
        qx = Q.component(xname)
        for i, finame in enumerate(fiber, start=1):
            rho[(a, i)] = left_derivative(qx, finame)
    c = {}
    for k, kname in enumerate(fiber, start=1):
        qxi = Q.component(kname)
        for i in range(1, r + 1):
            for j in range(i + 1, r + 1):
                coeff = left_derivative(left_derivative(qxi, fiber[i - 1]), fiber[j - 1])
                c[(k, i, j)] = -coeff
    return AlgebroidData(m, r, rho, c)


# -- Lagrangian Q-invariant coordinate submanifolds --------------------------


def lambda_check(dchart: DarbouxChart, Q: Derivation, constraints) -> bool:
    """True iff setting the given coordinates to zero cuts out a Lagrangian
    Q-invariant locus: exactly one member of each conjugate pair is
    constrained and Q of each constraint lies in the constraint ideal.
    """
    names = list(constraints)
    coord_names = {v.name for v in dchart.chart.gvars}
    for name in names:
        if name not in coord_names:
            raise UnsupportedInputError(
                f"constraint {name!r} is not a Darboux coordinate")
    if Q.chart != dchart.chart:
        raise ChartMismatchError("Q lives on a different chart")
    cset = set(names)
    if len(cset) != len(names):
        return False
    for pr in dchart.pairs:
        if (pr.q_name in cset) == (pr.p_name in cset):
            return False  # neither or both members constrained
    idx = [dchart.chart.index(n) for n in cset]
    for name in cset:
        for key in Q.component(name).terms:
            if not any(key[i] for i in idx):
                return False  # a term of Q(constraint) survives on the locus
    return True
