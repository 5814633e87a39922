"""Twisted fiber bundles over tangent charts, quadratic Lie algebras and their
central extension, grid-sampled group-valued maps with the product 2-form
correction, the truncated loop-algebra cocycle, and symmetry pairs (v, alpha).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ChartMismatchError, GradingError, StructureError
from .forms import TangentChart
from .graded_algebra import GPoly, _rat, substitute
from .linalg import rank
from .nq_core import Derivation, commutator

# ---------------------------------------------------------------------------
# Twisted R[n]-fibers over T[1]R^m
# ---------------------------------------------------------------------------


class TwistData:
    """A trivialized fiber of weight n over T[1]R^m, twisted by a base form eta.

    eta must be a polynomial (n+1)-form in the base variables only; the fiber
    coordinate is named t.
    """

    def __init__(self, m: int, n: int, eta: GPoly | None = None):
        if n < 1:
            raise GradingError("fiber weight must be at least 1")
        self.m = m
        self.n = n
        self.tangent = TangentChart(m, extra=[("t", n)])
        self.chart = self.tangent.chart
        if eta is None:
            eta = self.chart.zero()
        if eta.chart != self.chart:
            raise ChartMismatchError("eta must live on the twist chart")
        if not eta.is_homogeneous(n + 1):
            raise GradingError(f"eta must be homogeneous of weight {n + 1}")
        if not self.tangent.is_base_form(eta):
            raise GradingError("eta may not involve the fiber coordinate")
        self.eta = eta

    def t(self) -> GPoly:
        return self.chart.var("t")


def twisted_q(T: TwistData) -> Derivation:
    """Q = (de Rham on the base) + eta * d/dt; squares to zero iff d eta = 0."""
    comps = {xn: T.chart.var(qn) for xn, qn in zip(T.tangent.x_names, T.tangent.xi_names)}
    comps["t"] = T.eta
    return Derivation(T.chart, 1, comps)


def gauge_change(T: TwistData, alpha: GPoly) -> TwistData:
    """Shift the trivialization by a base n-form: eta -> eta + d alpha."""
    if alpha.chart != T.chart:
        raise ChartMismatchError("alpha must live on the twist chart")
    if not alpha.is_homogeneous(T.n):
        raise GradingError(f"alpha must be homogeneous of weight {T.n}")
    if not T.tangent.is_base_form(alpha):
        raise GradingError("alpha may not involve the fiber coordinate")
    return TwistData(T.m, T.n, T.eta + T.tangent.d(alpha))


def gauge_shift_consistent(T: TwistData, alpha: GPoly) -> bool:
    """The coordinate change t -> t + alpha intertwines the two twisted Q's.

    Checks Phi(Q'(v)) == Q(Phi(v)) on every coordinate, where Q' belongs to
    gauge_change(T, alpha) and Phi substitutes t + alpha for t.
    """
    Q = twisted_q(T)
    Qp = twisted_q(gauge_change(T, alpha))
    shift = T.t() + alpha

    def phi(p):
        return substitute(p, "t", shift)

    for v in T.chart.gvars:
        if phi(Qp.component(v.name)) != Q(phi(T.chart.var(v.name))):
            return False
    return True


# ---------------------------------------------------------------------------
# Quadratic Lie algebras and the central extension
# ---------------------------------------------------------------------------


class QuadraticLieAlgebra:
    """Structure constants plus an invariant nondegenerate symmetric form.

    c[(k, i, j)]: rational, antisymmetric in (i, j) (entries with i < j
    determine the rest); ip: symmetric matrix as a nested list/dict.
    Jacobi and invariance are verified exactly at construction.
    """

    def __init__(self, dim: int, c, ip):
        self.dim = dim
        self.c = {}
        for (k, i, j), val in c.items():
            val = _rat(val)
            if not all(1 <= t <= dim for t in (k, i, j)):
                raise ValueError(f"structure index out of range: {(k, i, j)}")
            if i == j:
                if val != 0:
                    raise ValueError("structure constants must vanish for i == j")
                continue
            if val == 0:
                continue
            key, v = ((k, i, j), val) if i < j else ((k, j, i), -val)
            if key in self.c and self.c[key] != v:
                raise ValueError(f"conflicting structure constants at {key}")
            self.c[key] = v
        self.ip = [[_rat(ip[i][j]) for j in range(dim)] for i in range(dim)]
        for i in range(dim):
            for j in range(dim):
                if self.ip[i][j] != self.ip[j][i]:
                    raise StructureError("inner product must be symmetric")
        if rank(self.ip) != dim:
            raise StructureError("inner product must be nondegenerate")
        bad = self._jacobi_violation()
        if bad is not None:
            raise StructureError(f"Jacobi identity fails on basis triple {bad}")
        bad = self._invariance_violation()
        if bad is not None:
            raise StructureError(f"inner product is not invariant on triple {bad}")

    def structure(self, k: int, i: int, j: int) -> Fraction:
        if i == j:
            return Fraction(0)
        if i < j:
            return self.c.get((k, i, j), Fraction(0))
        return -self.c.get((k, j, i), Fraction(0))

    def bracket_basis(self, i: int, j: int):
        """[e_i, e_j] as a coefficient vector."""
        return [self.structure(k, i, j) for k in range(1, self.dim + 1)]

    def inner(self, u, v) -> Fraction:
        return sum(self.ip[i][j] * u[i] * v[j]
                   for i in range(self.dim) for j in range(self.dim))

    def bracket(self, u, v):
        out = [Fraction(0)] * self.dim
        for i in range(self.dim):
            if u[i] == 0:
                continue
            for j in range(self.dim):
                if v[j] == 0:
                    continue
                for k in range(self.dim):
                    out[k] += u[i] * v[j] * self.structure(k + 1, i + 1, j + 1)
        return out

    def _jacobi_violation(self):
        d = self.dim
        for i in range(1, d + 1):
            for j in range(i + 1, d + 1):
                for k in range(j + 1, d + 1):
                    for t in range(1, d + 1):
                        total = Fraction(0)
                        for s in range(1, d + 1):
                            total += self.structure(s, j, k) * self.structure(t, i, s)
                            total += self.structure(s, k, i) * self.structure(t, j, s)
                            total += self.structure(s, i, j) * self.structure(t, k, s)
                        if total != 0:
                            return (i, j, k)
        return None

    def _invariance_violation(self):
        d = self.dim
        basis = [[Fraction(1) if a == b else Fraction(0) for b in range(d)] for a in range(d)]
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    lhs = self.inner(self.bracket(basis[i], basis[j]), basis[k])
                    rhs = self.inner(basis[j], self.bracket(basis[i], basis[k]))
                    if lhs + rhs != 0:
                        return (i + 1, j + 1, k + 1)
        return None


def so3() -> QuadraticLieAlgebra:
    """so(3) with the Euclidean inner product; c^k_ij = epsilon_ijk."""
    c = {(3, 1, 2): 1, (1, 2, 3): 1, (2, 3, 1): 1}
    ip = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    return QuadraticLieAlgebra(3, c, ip)


def sl2() -> QuadraticLieAlgebra:
    """sl(2) in the (h, e, f) basis with the fundamental trace form."""
    c = {(2, 1, 2): 2, (3, 1, 3): -2, (1, 2, 3): 1}
    ip = [[2, 0, 0], [0, 0, 1], [0, 1, 0]]
    return QuadraticLieAlgebra(3, c, ip)


class GradedLieAlgebra:
    """Finite-dimensional graded Lie algebra with an optional differential.

    basis: list of (name, degree); brackets: dict (i, j) -> {k: coeff}
    on basis indices (0-based), with graded antisymmetry filled in;
    q: dict i -> {k: coeff}, a degree-+1 map.
    """

    def __init__(self, basis, brackets, q):
        self.basis = list(basis)
        self.degrees = [d for _, d in self.basis]
        self.brackets = {}
        for (i, j), vec in brackets.items():
            vec = {k: _rat(v) for k, v in vec.items() if v != 0}
            self.brackets[(i, j)] = vec
            sign = -1 if (self.degrees[i] * self.degrees[j]) % 2 == 0 else 1
            mirrored = {k: sign * v for k, v in vec.items()}
            if (j, i) in self.brackets and self.brackets[(j, i)] != mirrored:
                raise StructureError(f"bracket table breaks graded antisymmetry at {(i, j)}")
            self.brackets.setdefault((j, i), mirrored)
        self.q = {i: {k: _rat(v) for k, v in vec.items() if v != 0} for i, vec in q.items()}

    def dim(self) -> int:
        return len(self.basis)

    def parity(self, i: int) -> int:
        return self.degrees[i] % 2

    def bracket_vec(self, u, v):
        out = {}
        for i, ci in u.items():
            for j, cj in v.items():
                for k, ck in self.brackets.get((i, j), {}).items():
                    out[k] = out.get(k, Fraction(0)) + ci * cj * ck
        return {k: c for k, c in out.items() if c != 0}

    def q_vec(self, u):
        out = {}
        for i, ci in u.items():
            for k, ck in self.q.get(i, {}).items():
                out[k] = out.get(k, Fraction(0)) + ci * ck
        return {k: c for k, c in out.items() if c != 0}

    def jacobi_violation(self):
        """First basis triple violating [a,[b,c]] = [[a,b],c] + (-1)^|a||b| [b,[a,c]]."""
        n = self.dim()
        for a in range(n):
            ea = {a: Fraction(1)}
            for b in range(n):
                eb = {b: Fraction(1)}
                sign = -1 if (self.parity(a) * self.parity(b)) % 2 else 1
                for c in range(n):
                    ec = {c: Fraction(1)}
                    lhs = self.bracket_vec(ea, self.bracket_vec(eb, ec))
                    rhs = self.bracket_vec(self.bracket_vec(ea, eb), ec)
                    for k, v in self.bracket_vec(eb, self.bracket_vec(ea, ec)).items():
                        rhs[k] = rhs.get(k, Fraction(0)) + sign * v
                    rhs = {k: v for k, v in rhs.items() if v != 0}
                    if lhs != rhs:
                        return (a, b, c)
        return None

    def q_derivation_violation(self):
        """First pair violating Q[a,b] = [Qa,b] + (-1)^|a| [a,Qb]."""
        n = self.dim()
        for a in range(n):
            ea = {a: Fraction(1)}
            sign = -1 if self.parity(a) else 1
            for b in range(n):
                eb = {b: Fraction(1)}
                lhs = self.q_vec(self.bracket_vec(ea, eb))
                rhs = self.bracket_vec(self.q_vec(ea), eb)
                for k, v in self.bracket_vec(ea, self.q_vec(eb)).items():
                    rhs[k] = rhs.get(k, Fraction(0)) + sign * v
                rhs = {k: v for k, v in rhs.items() if v != 0}
                if lhs != rhs:
                    return (a, b)
        return None

    def q_square_is_zero(self) -> bool:
        return all(not self.q_vec(self.q_vec({i: Fraction(1)})) for i in range(self.dim()))


def central_extension(g: QuadraticLieAlgebra) -> GradedLieAlgebra:
    """The graded Lie algebra on g + g[1] + R[2] with differential.

    Degrees: g in 0, the shifted copy in -1, the center in -2. The bracket of
    two shifted elements is their inner product times the central generator;
    Q maps the shifted copy identically onto g and kills the rest.
    """
    d = g.dim
    basis = [(f"u{i}", 0) for i in range(1, d + 1)]
    basis += [(f"v{i}", -1) for i in range(1, d + 1)]
    basis += [("z", -2)]
    U = lambda i: i - 1
    V = lambda i: d + i - 1
    Z = 2 * d
    brackets = {}
    for i in range(1, d + 1):
        for j in range(1, d + 1):
            adj = {U(k): g.structure(k, i, j) for k in range(1, d + 1)}
            brackets[(U(i), U(j))] = dict(adj)
            brackets[(U(i), V(j))] = {V(k): g.structure(k, i, j) for k in range(1, d + 1)}
            brackets[(V(i), V(j))] = {Z: g.ip[i - 1][j - 1]}
    q = {V(i): {U(i): Fraction(1)} for i in range(1, d + 1)}
    return GradedLieAlgebra(basis, brackets, q)


def affine_cocycle_check(g: QuadraticLieAlgebra, mode_cutoff: int,
                         cocycle=None) -> bool:
    """Exact 2-cocycle identity on the mode-truncated loop algebra.

    Basis elements are e_i z^m with |m| <= mode_cutoff. The default cocycle is
    c(u z^m, v z^n) = m delta_{m+n,0} <u, v>; the identity checked is
    c([x,y],z) + c([y,z],x) + c([z,x],y) = 0 over all basis triples.
    """
    if mode_cutoff < 1:
        raise ValueError("mode cutoff must be at least 1")
    if cocycle is None:
        def cocycle(u, m, v, n):
            if m + n != 0:
                return Fraction(0)
            return Fraction(m) * g.inner(u, v)

    d = g.dim
    basis = [[Fraction(1) if a == b else Fraction(0) for b in range(d)] for a in range(d)]
    modes = range(-mode_cutoff, mode_cutoff + 1)
    for i in range(d):
        for j in range(d):
            bij = g.bracket(basis[i], basis[j])
            for k in range(d):
                bjk = g.bracket(basis[j], basis[k])
                bki = g.bracket(basis[k], basis[i])
                for m in modes:
                    for n in modes:
                        for l in modes:
                            total = (cocycle(bij, m + n, basis[k], l)
                                     + cocycle(bjk, n + l, basis[i], m)
                                     + cocycle(bki, l + m, basis[j], n))
                            if total != 0:
                                return False
    return True


def broken_cocycle(g: QuadraticLieAlgebra):
    """c'(u z^m, v z^n) = m^2 delta_{m+n,0} <u, v>: fails the cocycle identity."""
    def cocycle(u, m, v, n):
        if m + n != 0:
            return Fraction(0)
        return Fraction(m * m) * g.inner(u, v)
    return cocycle


def cartan_3form(g: QuadraticLieAlgebra) -> GPoly:
    """eta = 1/6 <e_i, [e_j, e_k]> xi^i xi^j xi^k on the shifted chart of g.

    The chart is the one used by the zero-anchor algebroid of g (coordinates
    xi1..xid of weight 1), so the Chevalley-Eilenberg Q applies directly.
    The 1/6 normalization is this module's recorded choice.
    """
    from .sigma_structures import AlgebroidData

    A = AlgebroidData(0, g.dim, {}, {})
    chart = A.chart
    d = g.dim
    basis = [[Fraction(1) if a == b else Fraction(0) for b in range(d)] for a in range(d)]
    eta = chart.zero()
    sixth = Fraction(1, 6)
    for i in range(d):
        for j in range(d):
            for k in range(d):
                coeff = g.inner(basis[i], g.bracket(basis[j], basis[k]))
                if coeff == 0:
                    continue
                eta = eta + sixth * coeff * chart.var(f"xi{i + 1}") \
                    * chart.var(f"xi{j + 1}") * chart.var(f"xi{k + 1}")
    return eta


def chevalley_eilenberg_q(g: QuadraticLieAlgebra) -> Derivation:
    """The zero-anchor algebroid differential of g on its shifted chart."""
    from .sigma_structures import AlgebroidData, algebroid_to_q

    c = {(k, i, j): g.structure(k, i, j)
         for k in range(1, g.dim + 1)
         for i in range(1, g.dim + 1) for j in range(i + 1, g.dim + 1)}
    return algebroid_to_q(AlgebroidData(0, g.dim, {}, c))


# ---------------------------------------------------------------------------
# Symmetry pairs (v, alpha)
# ---------------------------------------------------------------------------


class SymmetryPair:
    """A polynomial vector field v and a base (n-1)-form alpha on T[1]R^m."""

    def __init__(self, m: int, n: int, v, alpha: GPoly):
        self.m = m
        self.n = n
        self.twist = TwistData(m, n)
        self.tangent = self.twist.tangent
        chart = self.twist.chart
        self.v = []
        for comp in v:
            if not isinstance(comp, GPoly):
                comp = chart.const(comp)
            if comp.chart != chart:
                raise ChartMismatchError("vector components must live on the twist chart")
            if not comp.is_homogeneous(0):
                raise GradingError("vector components must be weight-0 polynomials")
            self.v.append(comp)
        if len(self.v) != m:
            raise ValueError("vector field needs m components")
        if alpha.chart != chart:
            raise ChartMismatchError("alpha must live on the twist chart")
        if not alpha.is_homogeneous(n - 1) or not self.tangent.is_base_form(alpha):
            raise GradingError(f"alpha must be a base form of weight {n - 1}")
        self.alpha = alpha

    def __eq__(self, other):
        return (isinstance(other, SymmetryPair) and self.m == other.m
                and self.n == other.n and self.v == other.v and self.alpha == other.alpha)

    def __str__(self):
        vs = ", ".join(str(c) for c in self.v)
        return f"(v = ({vs}), alpha = {self.alpha})"


def iota_encode(s: SymmetryPair) -> Derivation:
    """The degree-(-1) field with iota(xi^a) = v^a and iota(t) = alpha."""
    comps = {xiname: comp for xiname, comp in zip(s.tangent.xi_names, s.v)}
    comps["t"] = s.alpha
    return Derivation(s.twist.chart, -1, comps)


def iota_self_bracket(s: SymmetryPair) -> Derivation:
    """[iota, iota]; vanishes iff the contraction v . alpha is zero."""
    i = iota_encode(s)
    return commutator(i, i)


def pair_decode(s_template: SymmetryPair, D: Derivation) -> SymmetryPair:
    """Read a (v, alpha) pair off a degree-(-1) derivation on the twist chart."""
    if D.degree != -1:
        raise GradingError("pair decoding expects a degree-(-1) derivation")
    v = [D.component(name) for name in s_template.tangent.xi_names]
    alpha = D.component("t")
    return SymmetryPair(s_template.m, s_template.n, v, alpha)


def symmetry_bracket(s1: SymmetryPair, s2: SymmetryPair) -> SymmetryPair:
    """([v1, v2], L_{v1} alpha2 - v2 . d alpha1): a Leibniz bracket, not skew
    for n > 1."""
    if (s1.m, s1.n) != (s2.m, s2.n):
        raise ChartMismatchError("symmetry pairs live on different charts")
    tc = s1.tangent
    vec = tc.vector_bracket(s1.v, s2.v)
    form = tc.lie(s1.v, s2.alpha) - tc.iota(s2.v, tc.d(s1.alpha))
    return SymmetryPair(s1.m, s1.n, vec, form)


# ---------------------------------------------------------------------------
# Unit quaternions and grid-sampled maps into SU(2)
# ---------------------------------------------------------------------------


def quat_mul(a, b):
    """Hamilton product, broadcasting over leading axes."""
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


def quat_conj(a):
    return a * np.array([1.0, -1.0, -1.0, -1.0])


def quat_normalize(a):
    return a / np.linalg.norm(a, axis=-1, keepdims=True)


def quat_log(a):
    """Principal logarithm of a unit quaternion, as a vector in R^3 = su(2)."""
    a = np.asarray(a, dtype=float)
    w = np.clip(a[..., 0], -1.0, 1.0)
    vec = a[..., 1:]
    vnorm = np.linalg.norm(vec, axis=-1)
    angle = np.arctan2(vnorm, w)
    scale = np.where(vnorm > 1e-300, angle / np.where(vnorm > 1e-300, vnorm, 1.0), 0.0)
    return vec * scale[..., None]


def quat_exp(x):
    """Exponential of a pure-imaginary quaternion given as a vector in R^3."""
    x = np.asarray(x, dtype=float)
    norm = np.linalg.norm(x, axis=-1)
    w = np.cos(norm)
    scale = np.where(norm > 1e-300, np.sin(norm) / np.where(norm > 1e-300, norm, 1.0), 1.0)
    return np.concatenate([w[..., None], x * scale[..., None]], axis=-1)


def su2_inner(x, y):
    """Inner product on su(2) = R^3 used throughout the grid checks."""
    return np.sum(x * y, axis=-1)


def su2_bracket(x, y):
    """[x, y] = 2 x cross y in the quaternion model."""
    return 2.0 * np.cross(x, y)


class GridMap:
    """A map sampled on a rectangular grid over [0,1]^2 plus a per-cell 2-form.

    values: unit quaternions, shape (N1+1, N2+1, 4), or matrices of shape
    (N1+1, N2+1, d, d). omega: per-cell samples, shape (N1, N2).
    """

    def __init__(self, values, omega=None, tol=1e-12):
        values = np.asarray(values, dtype=float)
        if values.ndim == 3 and values.shape[-1] == 4:
            self.kind = "quaternion"
        elif values.ndim == 4 and values.shape[-1] == values.shape[-2]:
            self.kind = "matrix"
        else:
            raise ValueError("values must be quaternions (...,4) or square matrices")
        if values.shape[0] < 2 or values.shape[1] < 2:
            raise ValueError("grid must be at least 2x2 nodes")
        if self.kind == "quaternion":
            err = np.max(np.abs(np.linalg.norm(values, axis=-1) - 1.0))
            if err > tol:
                raise StructureError(f"quaternion norms off unit by {err:.3e}")
        else:
            err = np.max(np.abs(np.linalg.det(values) - 1.0))
            if err > tol:
                raise StructureError(f"matrix determinants off 1 by {err:.3e}")
        self.values = values
        n1, n2 = values.shape[0] - 1, values.shape[1] - 1
        if omega is None:
            omega = np.zeros((n1, n2))
        omega = np.asarray(omega, dtype=float)
        if omega.shape != (n1, n2):
            raise ValueError(f"omega must have shape {(n1, n2)}")
        self.omega = omega

    @property
    def nodes_shape(self):
        return self.values.shape[:2]

    def inverse(self) -> "GridMap":
        if self.kind == "quaternion":
            return GridMap(quat_conj(self.values), -self.omega)
        return GridMap(np.linalg.inv(self.values), -self.omega)

    @classmethod
    def identity(cls, n1: int, n2: int) -> "GridMap":
        vals = np.zeros((n1 + 1, n2 + 1, 4))
        vals[..., 0] = 1.0
        return cls(vals)

    @classmethod
    def from_function(cls, f, n1: int, n2: int, omega_fn=None) -> "GridMap":
        """Sample a callable f(s, t) -> unit quaternion on an (n1 x n2)-cell grid."""
        vals = np.zeros((n1 + 1, n2 + 1, 4))
        for i in range(n1 + 1):
            for j in range(n2 + 1):
                vals[i, j] = f(i / n1, j / n2)
        vals = quat_normalize(vals)
        omega = None
        if omega_fn is not None:
            omega = np.zeros((n1, n2))
            for i in range(n1):
                for j in range(n2):
                    omega[i, j] = omega_fn((i + 0.5) / n1, (j + 0.5) / n2) / (n1 * n2)
        return cls(vals, omega)


def _edge_logs_left(f: GridMap):
    """Left Maurer-Cartan edge samples: log(f(node)^-1 f(neighbor))."""
    v = f.values
    ex = quat_log(quat_mul(quat_conj(v[:-1, :]), v[1:, :]))
    ey = quat_log(quat_mul(quat_conj(v[:, :-1]), v[:, 1:]))
    return ex, ey


def _edge_logs_right(f: GridMap):
    """Right Maurer-Cartan edge samples: log(f(neighbor) f(node)^-1)."""
    v = f.values
    ex = quat_log(quat_mul(v[1:, :], quat_conj(v[:-1, :])))
    ey = quat_log(quat_mul(v[:, 1:], quat_conj(v[:, :-1])))
    return ex, ey


def wzw_cross_term(a: GridMap, b: GridMap):
    """Per-cell samples of <a*theta_left wedge b*theta_right>.

    Edge one-forms are discretized as principal logarithms; the wedge on a
    cell uses the average of its two opposite edges in each direction.
    """
    if a.nodes_shape != b.nodes_shape:
        raise ValueError("grids do not match")
    lax, lay = _edge_logs_left(a)
    rbx, rby = _edge_logs_right(b)
    lax_c = 0.5 * (lax[:, :-1] + lax[:, 1:])
    lay_c = 0.5 * (lay[:-1, :] + lay[1:, :])
    rbx_c = 0.5 * (rbx[:, :-1] + rbx[:, 1:])
    rby_c = 0.5 * (rby[:-1, :] + rby[1:, :])
    return su2_inner(lax_c, rby_c) - su2_inner(lay_c, rbx_c)


def wzw_product(a: GridMap, b: GridMap) -> GridMap:
    """Pointwise product with the corrected 2-form:
    f = f1 f2, omega = omega1 + omega2 + <f1*theta_l wedge f2*theta_r>."""
    if a.nodes_shape != b.nodes_shape or a.kind != b.kind:
        raise ValueError("grids do not match")
    if a.kind != "quaternion":
        raise ValueError("the product 2-form correction is implemented for quaternion grids")
    values = quat_mul(a.values, b.values)
    omega = a.omega + b.omega + wzw_cross_term(a, b)
    return GridMap(values, omega)


def wzw_descent_residual(f1, f2, center, h):
    """Finite-difference residual of the product correction's 3-form identity.

    With theta_l, theta_r discretized as edge logarithms and
    eta(u, v, w) = <u, [v, w]>, the exact smooth identity in these
    conventions reads d<f1*theta_l wedge f2*theta_r> =
    f1*eta + f2*eta - (f1 f2)*eta, so the corrected 2-form of wzw_product
    propagates the descent equation d omega = -f*eta. Returns the absolute
    defect of the identity on an h-cube around `center`; O(h^4) ~ h * volume.

    f1, f2: callables R^3 -> unit quaternion.
    """
    center = np.asarray(center, dtype=float)

    def cross_face(f, g, origin, d1, d2):
        # 2x2 node patch spanning the face origin + s*d1 + t*d2, s,t in [0,h]
        corners = [origin, origin + d1, origin + d1 + d2, origin + d2]
        fa = GridMap(np.array([[f(corners[0]), f(corners[3])],
                               [f(corners[1]), f(corners[2])]]))
        fb = GridMap(np.array([[g(corners[0]), g(corners[3])],
                               [g(corners[1]), g(corners[2])]]))
        return wzw_cross_term(fa, fb)[0, 0]

    ex = np.array([h, 0.0, 0.0])
    ey = np.array([0.0, h, 0.0])
    ez = np.array([0.0, 0.0, h])
    o = center - 0.5 * (ex + ey + ez)

    def d_of_cross(f, g):
        total = 0.0
        for d1, d2, d3 in ((ey, ez, ex), (ez, ex, ey), (ex, ey, ez)):
            total += cross_face(f, g, o + d3, d1, d2) - cross_face(f, g, o, d1, d2)
        return total

    def pullback_eta(f):
        # left MC frame by central differences at the cube center
        q0 = np.asarray(f(center))
        logs = []
        for d in (ex, ey, ez):
            plus = np.asarray(f(center + 0.5 * d))
            minus = np.asarray(f(center - 0.5 * d))
            logs.append(quat_log(quat_mul(quat_conj(minus), plus)))
        u, v, w = logs
        return float(su2_inner(u, su2_bracket(v, w)))

    def f12(p):
        return quat_mul(np.asarray(f1(p)), np.asarray(f2(p)))

    lhs = d_of_cross(f1, f2)
    rhs = pullback_eta(f1) + pullback_eta(f2) - pullback_eta(f12)
    return abs(lhs - rhs)


# -- GridMap text format ------------------------------------------------------


def save_gridmap(g: GridMap, path):
    """Plain-text format: 'node i j q0 q1 q2 q3' and 'cell i j omega' lines."""
    if g.kind != "quaternion":
        raise ValueError("the text format stores quaternion grids")
    n1, n2 = g.nodes_shape
    with open(path, "w") as fh:
        fh.write(f"grid {n1 - 1} {n2 - 1}\n")
        for i in range(n1):
            for j in range(n2):
                q = [repr(float(x)) for x in g.values[i, j]]
                fh.write(f"node {i} {j} {q[0]} {q[1]} {q[2]} {q[3]}\n")
        for i in range(n1 - 1):
            for j in range(n2 - 1):
                fh.write(f"cell {i} {j} {float(g.omega[i, j])!r}\n")


def load_gridmap(path) -> GridMap:
    values = None
    omega = None
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "grid":
                n1, n2 = int(parts[1]), int(parts[2])
                values = np.zeros((n1 + 1, n2 + 1, 4))
                omega = np.zeros((n1, n2))
            elif parts[0] == "node":
                i, j = int(parts[1]), int(parts[2])
                values[i, j] = [float(x) for x in parts[3:7]]
            elif parts[0] == "cell":
                i, j = int(parts[1]), int(parts[2])
                omega[i, j] = float(parts[3])
            else:
                raise ValueError(f"unrecognized grid line: {line.strip()!r}")
    if values is None:
        raise ValueError("missing grid header")
    return GridMap(values, omega)
