"""Execution of DSL programs: bindings, named checks, and reports.

A session binds names to constructed objects in statement order (the
semantic pass), then runs checks through a dispatch table. Structural
failures inside a check become failed records, not crashes; unknown names
and weight/arity mistakes are semantic errors raised before anything runs.
"""

from __future__ import annotations

import json
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import apath as ap
from . import complexes as cx
from . import dsl
from . import extensions as ext
from . import sigma_structures as sig
from .errors import GqError, SemanticError
from .forms import TangentChart, dorfman_bracket
from .graded_algebra import Chart, GPoly, GVar, left_derivative, scaling_check
from .nq_core import Derivation, commutator, euler_field, manifold_degree, q_square


@dataclass
class Options:
    steps: int = 10_000
    tolerance: float = 1e-6
    seed: int = 0
    base_dir: Path = field(default_factory=Path)


@dataclass
class CheckRecord:
    name: str
    args: list
    verdict: str                 # pass | fail | degraded-mode
    residual: float | None = None
    witness: str | None = None
    ms: float = 0.0


@dataclass
class Report:
    seed: int
    steps: int
    tolerance: float
    records: list

    @property
    def counts(self):
        out = {"pass": 0, "fail": 0, "degraded-mode": 0}
        for r in self.records:
            out[r.verdict] += 1
        return out

    @property
    def all_ok(self) -> bool:
        return self.counts["fail"] == 0


def report_render(report: Report, fmt: str = "text", include_timing: bool = True) -> bytes:
    """Stable rendering; 'machine' is JSON with fixed field order."""
    if fmt == "text":
        lines = []
        for r in report.records:
            extra = ""
            if r.residual is not None:
                extra += f" residual={r.residual:.3e}"
            if r.witness:
                extra += f" [{r.witness}]"
            ms = f" ({r.ms:.0f} ms)" if include_timing else ""
            args = " ".join(str(a) for a in r.args)
            lines.append(f"{r.verdict.upper():13s} {r.name} {args}{extra}{ms}".rstrip())
        c = report.counts
        lines.append(f"checks: {len(report.records)}  pass: {c['pass']}  "
                     f"fail: {c['fail']}  degraded: {c['degraded-mode']}")
        return ("\n".join(lines) + "\n").encode()
    if fmt == "machine":
        payload = {
            "format": "gq-report",
            "version": 1,
            "seed": report.seed,
            "steps": report.steps,
            "tolerance": report.tolerance,
            "checks": [
                {
                    "name": r.name,
                    "inputs": [str(a) for a in r.args],
                    "verdict": r.verdict,
                    "residual": r.residual,
                    "witness": r.witness,
                    **({"ms": round(r.ms, 3)} if include_timing else {}),
                }
                for r in report.records
            ],
            "summary": report.counts,
        }
        return (json.dumps(payload, indent=2) + "\n").encode()
    raise ValueError(f"unknown report format {fmt!r}")


# ---------------------------------------------------------------------------
# Expression evaluation
# ---------------------------------------------------------------------------


def _eval(expr, chart: Chart, tangent: TangentChart | None, pos):
    if isinstance(expr, dsl.Num):
        return chart.const(expr.value)
    if isinstance(expr, dsl.Var):
        try:
            return chart.var(expr.name)
        except KeyError:
            raise SemanticError(f"unknown variable {expr.name!r}", *pos)
    if isinstance(expr, dsl.Neg):
        return -_eval(expr.arg, chart, tangent, pos)
    if isinstance(expr, dsl.DOp):
        if tangent is None:
            raise SemanticError("d(...) needs a chart with base/xi pairs", *pos)
        return tangent.d(_eval(expr.arg, chart, tangent, pos))
    if isinstance(expr, dsl.BinOp):
        left = _eval(expr.left, chart, tangent, pos)
        if expr.op == "^":
            return left ** int(expr.right.value)
        right = _eval(expr.right, chart, tangent, pos)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        return left * right
    raise SemanticError(f"cannot evaluate expression {expr!r}", *pos)


# ---------------------------------------------------------------------------
# Session: bindings
# ---------------------------------------------------------------------------


class Session:
    def __init__(self, options: Options | None = None):
        self.options = options or Options()
        self.bindings = {}       # name -> (kind, value)
        self.tangents = {}       # name -> TangentChart (for charts carrying one)
        self.rng = random.Random(self.options.seed)

    def bind(self, name, kind, value, pos):
        if name in self.bindings:
            raise SemanticError(f"name {name!r} already bound", *pos)
        self.bindings[name] = (kind, value)

    def get(self, name, *kinds, pos=(0, 0)):
        if name not in self.bindings:
            raise SemanticError(f"unknown identifier {name!r}", *pos)
        kind, value = self.bindings[name]
        if kinds and kind not in kinds:
            raise SemanticError(
                f"{name!r} is a {kind}, expected {' or '.join(kinds)}", *pos)
        return value

    def kind_of(self, name):
        return self.bindings[name][0] if name in self.bindings else None

    # -- statement handlers -------------------------------------------------

    def run_statement(self, st):
        handler = getattr(self, f"_do_{type(st).__name__}")
        handler(st)

    def _do_ChartStmt(self, st):
        for n, w in st.coords:
            if w < 0:
                raise SemanticError(f"negative weight for {n!r}", *st.pos)
        chart = Chart(GVar(n, w) for n, w in st.coords)
        manifold_degree(chart)
        self.bind(st.name, "chart", chart, st.pos)

    def _do_QFieldStmt(self, st):
        target_kind = self.kind_of(st.chart)
        if target_kind == "sigma":
            dchart = self.get(st.chart, "sigma", pos=st.pos)
            chart = dchart.chart
        else:
            chart = self.get(st.chart, "chart", pos=st.pos)
        comps = {}
        for vname, e in st.components:
            if vname not in {v.name for v in chart.gvars}:
                raise SemanticError(f"unknown coordinate {vname!r}", *st.pos)
            comps[vname] = _eval(e, chart, None, st.pos)
        try:
            D = Derivation(chart, st.degree, comps)
        except GqError as exc:
            raise SemanticError(str(exc), *st.pos)
        self.bind(st.name, "qfield", D, st.pos)

    def _do_SigmaStmt(self, st):
        try:
            dchart = sig.DarbouxChart(
                st.degree,
                [sig.ConjugatePair(q, wq, p, wp, s) for q, wq, p, wp, s in st.pairs])
        except GqError as exc:
            raise SemanticError(str(exc), *st.pos)
        self.bind(st.name, "sigma", dchart, st.pos)

    def _do_HamStmt(self, st):
        dchart = self.get(st.target, "sigma", pos=st.pos)
        poly = _eval(st.expr, dchart.chart, None, st.pos)
        try:
            ham = sig.Hamiltonian(dchart, poly)
        except GqError as exc:
            raise SemanticError(str(exc), *st.pos)
        self.bind(st.name, "ham", ham, st.pos)

    def _do_FormStmt(self, st):
        kind = self.kind_of(st.target)
        if kind == "twist":
            tw = self.get(st.target, "twist", pos=st.pos)
            chart, tangent = tw.chart, tw.tangent
        elif kind == "pair":
            sp = self.get(st.target, "pair", pos=st.pos)
            chart, tangent = sp.twist.chart, sp.tangent
        elif kind == "sigma":
            chart, tangent = self.get(st.target, "sigma", pos=st.pos).chart, None
        else:
            chart, tangent = self.get(st.target, "chart", pos=st.pos), None
        poly = _eval(st.expr, chart, tangent, st.pos)
        self.bind(st.name, "form", (st.target, poly), st.pos)

    def _do_AlgebroidStmt(self, st):
        A = sig.AlgebroidData(st.base, st.fiber)
        chart = A.chart
        rho = {}
        for a, i, e in st.anchors:
            rho[(a, i)] = _eval(e, chart, None, st.pos)
        c = {}
        for k, i, j, e in st.structures:
            c[(k, i, j)] = _eval(e, chart, None, st.pos)
        try:
            A = sig.AlgebroidData(st.base, st.fiber, rho, c)
        except (GqError, ValueError) as exc:
            raise SemanticError(str(exc), *st.pos)
        self.bind(st.name, "algebroid", A, st.pos)

    def _do_AlgebraStmt(self, st):
        try:
            if st.builtin == "so3":
                g = ext.so3()
            elif st.builtin == "sl2":
                g = ext.sl2()
            else:
                c = {(k, i, j): v for k, i, j, v in st.structures}
                ip = [[Fraction(0)] * st.dim for _ in range(st.dim)]
                for i, j, v in st.inner:
                    ip[i - 1][j - 1] = v
                    ip[j - 1][i - 1] = v
                g = ext.QuadraticLieAlgebra(st.dim, c, ip)
        except (GqError, ValueError) as exc:
            raise SemanticError(str(exc), *st.pos)
        self.bind(st.name, "algebra", g, st.pos)

    def _do_TwistStmt(self, st):
        shell = ext.TwistData(st.base, st.degree)
        eta = _eval(st.expr, shell.chart, shell.tangent, st.pos)
        try:
            tw = ext.TwistData(st.base, st.degree, eta)
        except GqError as exc:
            raise SemanticError(str(exc), *st.pos)
        self.bind(st.name, "twist", tw, st.pos)

    def _do_PairStmt(self, st):
        shell = ext.TwistData(st.base, st.degree)
        v = [shell.chart.zero()] * st.base
        for i, e in st.vector:
            if not (1 <= i <= st.base):
                raise SemanticError(f"vector index {i} out of range", *st.pos)
            v[i - 1] = _eval(e, shell.chart, shell.tangent, st.pos)
        alpha = _eval(st.alpha, shell.chart, shell.tangent, st.pos)
        try:
            sp = ext.SymmetryPair(st.base, st.degree, v, alpha)
        except (GqError, ValueError) as exc:
            raise SemanticError(str(exc), *st.pos)
        self.bind(st.name, "pair", sp, st.pos)

    def _do_LoadStmt(self, st):
        path = self.options.base_dir / st.filename
        try:
            if st.kind == "path":
                value = ap.load_apath(path)
            elif st.kind == "grid":
                value = ext.load_gridmap(path)
            else:
                value = cx.load_complex(path)
        except (OSError, ValueError, GqError) as exc:
            raise SemanticError(f"cannot load {st.filename!r}: {exc}", *st.pos)
        self.bind(st.name, st.kind, value, st.pos)

    def _do_SaveStmt(self, st):
        kind = self.kind_of(st.name)
        if kind is None:
            raise SemanticError(f"unknown identifier {st.name!r}", *st.pos)
        value = self.bindings[st.name][1]
        path = self.options.base_dir / st.filename
        if kind == "path":
            ap.save_apath(value, path)
        elif kind == "grid":
            ext.save_gridmap(value, path)
        elif kind == "complex":
            target = value.total if isinstance(value, cx.RelativeComplex) else value
            cx.save_complex(target, path)
        else:
            raise SemanticError(f"cannot save a {kind} binding", *st.pos)

    def _do_ComplexStmt(self, st):
        if st.fiber2 is not None:
            fiber = cx.two_term_fiber(st.fiber2)
        else:
            fiber = self.get(st.fiber, "algebra", pos=st.pos)
        try:
            R = cx.lattice_model(st.surface, fiber)
        except (GqError, ValueError) as exc:
            raise SemanticError(str(exc), *st.pos)
        self.bind(st.name, "complex", R, st.pos)

    def _do_NMapStmt(self, st):
        dchart = self.get(st.target, "sigma", pos=st.pos)
        self.bind(st.name, "nmap", cx.nmap_space(dchart, st.dim), st.pos)

    def _do_CheckStmt(self, st):
        pass  # checks are validated and run by execute()


def analyze(program: dsl.Program, options: Options | None = None) -> Session:
    """The semantic pass: build every binding, validate check references."""
    session = Session(options)
    for st in program.statements:
        session.run_statement(st)
    for st in program.statements:
        if isinstance(st, dsl.CheckStmt):
            _validate_check(session, st)
    return session


def _validate_check(session: Session, st: dsl.CheckStmt):
    if st.check not in CHECKS:
        raise SemanticError(f"unknown check {st.check!r}", *st.pos)
    for a in st.args:
        if a in CHECK_MARKERS:
            break  # later arguments are raw names/numbers, not bindings
        if a.isdigit() or (a.startswith("-") and a[1:].isdigit()):
            continue
        if session.kind_of(a) is None:
            raise SemanticError(f"unknown identifier {a!r} in check", *st.pos)


def execute(program: dsl.Program, options: Options | None = None,
            session: Session | None = None) -> Report:
    """Run bindings, then every check in order; never raises past a check."""
    options = options or Options()
    if session is None:
        session = analyze(program, options)
    records = []
    for st in program.statements:
        if not isinstance(st, dsl.CheckStmt):
            continue
        handler, _, _ = CHECKS[st.check]
        t0 = time.perf_counter()
        try:
            verdict, residual, witness = handler(session, st)
        except GqError as exc:
            verdict, residual, witness = "fail", None, f"error: {exc}"
        ms = (time.perf_counter() - t0) * 1000.0
        records.append(CheckRecord(st.check, list(st.args), verdict, residual, witness, ms))
    return Report(options.seed, options.steps, options.tolerance, records)


def run_source(source: str, options: Options | None = None) -> Report:
    return execute(dsl.parse(source), options)


# ---------------------------------------------------------------------------
# Check implementations
# ---------------------------------------------------------------------------

CHECK_MARKERS = {"constraints", "modes", "dims", "samples", "deg", "lambda"}


def _ok(cond, witness_fail=None, residual=None, witness_pass=None):
    if cond:
        return "pass", residual, witness_pass
    return "fail", residual, witness_fail


def _q_of(session, name, pos):
    kind = session.kind_of(name)
    if kind == "qfield":
        return session.get(name, "qfield", pos=pos)
    if kind == "algebroid":
        return sig.algebroid_to_q(session.get(name, pos=pos))
    if kind == "twist":
        return ext.twisted_q(session.get(name, pos=pos))
    if kind == "ham":
        h = session.get(name, pos=pos)
        return sig.hamiltonian_to_q(h.dchart, h)
    raise SemanticError(f"{name!r} does not define a Q-field", *pos)


def check_q2(session, st):
    Q = _q_of(session, st.args[0], st.pos)
    sq = q_square(Q)
    if sq.is_zero():
        return "pass", None, None
    bad = next(v.name for v in Q.chart.gvars if not sq.component(v.name).is_zero())
    return "fail", None, f"Q^2({bad}) = {sq.component(bad)}"


def check_master(session, st):
    h = session.get(st.args[0], "ham", pos=st.pos)
    me = sig.master_equation(h.dchart, h)
    return _ok(me.is_zero(), witness_fail=f"{{Theta,Theta}} = {me}")


def check_jacobi(session, st):
    g = session.get(st.args[0], "algebra", pos=st.pos)
    ce = ext.central_extension(g)
    bad = ce.jacobi_violation()
    if bad is not None:
        return "fail", None, f"graded Jacobi fails on basis triple {bad}"
    bad = ce.q_derivation_violation()
    if bad is not None:
        return "fail", None, f"Q is not a bracket derivation at {bad}"
    return _ok(ce.q_square_is_zero(), witness_fail="Q^2 != 0 on the extension")


def check_cartan(session, st):
    g = session.get(st.args[0], "algebra", pos=st.pos)
    eta = ext.cartan_3form(g)
    closed = ext.chevalley_eilenberg_q(g)(eta)
    return _ok(closed.is_zero(), witness_fail=f"Q_CE(eta) = {closed}",
               witness_pass=f"eta = {eta}")


def check_dirac(session, st):
    h = session.get(st.args[0], "ham", pos=st.pos)
    args = list(st.args[1:])
    if args and args[0] == "constraints":
        args = args[1:]
    Q = sig.hamiltonian_to_q(h.dchart, h)
    good = sig.lambda_check(h.dchart, Q, args)
    return _ok(good, witness_fail="locus is not a Lagrangian Q-invariant submanifold")


def check_lemma1(session, st):
    val = session.get(st.args[0], "complex", pos=st.pos)
    base = val.total.complex if isinstance(val, cx.RelativeComplex) else val
    if isinstance(base, cx.SymplecticComplex):
        base = base.complex
    n = int(st.args[2]) if len(st.args) > 2 and st.args[1] == "deg" else int(st.args[-1])
    rep = cx.suspension_check(base, n)
    wit = f"H(base) = {rep.base_betti}, H(tensor) = {rep.tensor_betti}"
    return rep.verdict, None, wit if rep.verdict == "pass" else wit


def check_lemma3(session, st):
    val = session.get(st.args[0], "complex", pos=st.pos)
    R = val if isinstance(val, cx.RelativeComplex) else cx.closed_relative(_as_symplectic(val, st))
    rep = cx.lemma3_orthogonality(R)
    wit = (f"mode={rep.mode} equality={rep.equality} quotient={rep.quotient_dims} "
           f"nondeg={rep.quotient_nondegenerate}")
    return rep.verdict, None, wit


def _as_symplectic(val, st):
    if isinstance(val, cx.SymplecticComplex):
        return val
    raise SemanticError("this check needs a complex with a pairing", *st.pos)


def check_stokes(session, st):
    val = session.get(st.args[0], "complex", pos=st.pos)
    if isinstance(val, cx.RelativeComplex):
        bad = val.stokes_violation()
        return _ok(bad is None, witness_fail=f"Stokes fails at degree {bad}")
    S = _as_symplectic(val, st)
    bad = S.compatibility_violation()
    return _ok(bad is None, witness_fail=f"compatibility fails at degree {bad}")


def check_boundary_lagrangian(session, st):
    val = session.get(st.args[0], "complex", pos=st.pos)
    if not isinstance(val, cx.RelativeComplex):
        raise SemanticError("boundary-lagrangian needs a relative complex", *st.pos)
    rep = cx.boundary_lagrangian(val)
    wit = f"image {rep.image_dim} of H(boundary) {rep.boundary_h_dim}, isotropic={rep.isotropic}"
    return rep.verdict, None, wit


def check_cocycle(session, st):
    g = session.get(st.args[0], "algebra", pos=st.pos)
    modes = 4
    if len(st.args) > 2 and st.args[1] == "modes":
        modes = int(st.args[2])
    elif len(st.args) == 2:
        modes = int(st.args[1])
    good = ext.affine_cocycle_check(g, modes)
    broken_fails = not ext.affine_cocycle_check(g, modes, ext.broken_cocycle(g))
    if good and broken_fails:
        return "pass", None, f"modes <= {modes}; broken counterexample rejected"
    return "fail", None, ("cocycle identity fails" if not good
                          else "broken cocycle was not rejected")


def check_holonomy(session, st):
    p = session.get(st.args[0], "path", pos=st.pos)
    q = session.get(st.args[1], "path", pos=st.pos)
    steps = session.options.steps
    g = ap.integrate(ap.concatenate(p, q), steps).holonomy
    sep = ap.integrate(p, steps).holonomy @ ap.integrate(q, steps).holonomy
    res = float(np.max(np.abs(g - sep)))
    return _ok(res < session.options.tolerance, residual=res,
               witness_fail="concatenation law residual above tolerance")


def check_reparam(session, st):
    p = session.get(st.args[0], "path", pos=st.pos)
    s = np.linspace(0.0, 1.0, max(len(p.times), 4001))
    phi = np.stack([s, s * s * (3 - 2 * s)], axis=1)   # smooth, monotone, fixed ends
    res = ap.reparametrize_check(p, phi, session.options.steps)
    return _ok(res < session.options.tolerance, residual=res,
               witness_fail="reparametrization residual above tolerance")


def check_exp(session, st):
    from scipy.linalg import expm

    p = session.get(st.args[0], "path", pos=st.pos)
    if float(np.max(np.abs(p.mats - p.mats[0]))) > 0:
        return "fail", None, "exp check needs a constant path"
    g = ap.integrate(p, session.options.steps).holonomy
    res = float(np.max(np.abs(g - expm(p.mats[0]))))
    return _ok(res < session.options.tolerance, residual=res,
               witness_fail="holonomy differs from the exponential")


def check_action(session, st):
    p = session.get(st.args[0], "path", pos=st.pos)
    el = ap.action_integrate(p, session.options.steps,
                             transport_tol=session.options.tolerance)
    res = float(np.max(np.abs(el.holonomy @ el.source - el.target)))
    return _ok(res < session.options.tolerance, residual=res,
               witness_fail="group transport disagrees with the base ODE")


def check_euler(session, st):
    Q = _q_of(session, st.args[0], st.pos)
    E = euler_field(Q.chart)
    match = commutator(E, Q) == Q * Fraction(Q.degree)
    return _ok(match, witness_fail="[E, D] != deg(D) D")


def check_scaling(session, st):
    name = st.args[0]
    lam = Fraction(st.args[1]) if len(st.args) > 1 else Fraction(2)
    kind = session.kind_of(name)
    if kind == "ham":
        poly = session.get(name, pos=st.pos).theta
    elif kind == "twist":
        poly = session.get(name, pos=st.pos).eta
    elif kind == "form":
        poly = session.get(name, pos=st.pos)[1]
    else:
        raise SemanticError(f"{name!r} has no scaling check", *st.pos)
    if poly.is_zero():
        return "pass", None, "zero polynomial"
    comp = poly.weight_decomposition()
    good = all(scaling_check(c, lam) for c in comp.values())
    return _ok(good, witness_fail="scaling law fails",
               witness_pass=f"weights {sorted(comp)}")


def check_hamround(session, st):
    h = session.get(st.args[0], "ham", pos=st.pos)
    Q = sig.hamiltonian_to_q(h.dchart, h)
    back = sig.q_to_hamiltonian(h.dchart, Q)
    return _ok(back == h.theta, witness_fail=f"round trip gave {back}")


def check_alground(session, st):
    A = session.get(st.args[0], "algebroid", pos=st.pos)
    back = sig.q_to_algebroid(sig.algebroid_to_q(A))
    return _ok(back == A, witness_fail="anchor/structure functions changed")


def _bivector_of(h):
    """pi^{ab} = -dL_{p_b} dL_{p_a} Theta on a degree-1 chart."""
    dchart = h.dchart
    m = len(dchart.pairs)
    pi = {}
    for a in range(1, m + 1):
        for b in range(a + 1, m + 1):
            pa, pb = dchart.pairs[a - 1].p_name, dchart.pairs[b - 1].p_name
            pi[(a, b)] = -left_derivative(left_derivative(h.theta, pa), pb)
    return pi


def _schouten_jacobiator(h, pi):
    """Cyclic sum pi^{sa} d_s pi^{bc} for every a<b<c; exact polynomials."""
    dchart = h.dchart
    m = len(dchart.pairs)
    chart = dchart.chart

    def piv(a, b):
        if a == b:
            return chart.zero()
        return pi[(a, b)] if a < b else -pi[(b, a)]

    out = {}
    xs = [p.q_name for p in dchart.pairs]
    for a in range(1, m + 1):
        for b in range(a + 1, m + 1):
            for c in range(b + 1, m + 1):
                acc = chart.zero()
                for s in range(1, m + 1):
                    acc = acc + piv(s, a) * left_derivative(piv(b, c), xs[s - 1])
                    acc = acc + piv(s, b) * left_derivative(piv(c, a), xs[s - 1])
                    acc = acc + piv(s, c) * left_derivative(piv(a, b), xs[s - 1])
                out[(a, b, c)] = acc
    return out


def check_poisson(session, st):
    h = session.get(st.args[0], "ham", pos=st.pos)
    if h.dchart.n != 1:
        raise SemanticError("poisson check needs a degree-1 chart", *st.pos)
    pi = _bivector_of(h)
    jac = _schouten_jacobiator(h, pi)
    oracle_flat = all(v.is_zero() for v in jac.values())
    master_flat = sig.master_equation(h.dchart, h).is_zero()
    if oracle_flat != master_flat:
        return "fail", None, "master equation disagrees with the Schouten oracle"
    m = len(h.dchart.pairs)
    for a in range(1, m + 1):
        for b in range(a + 1, m + 1):
            xa = h.dchart.var(h.dchart.pairs[a - 1].q_name)
            xb = h.dchart.var(h.dchart.pairs[b - 1].q_name)
            if sig.derived_bracket(h.dchart, h, xa, xb) != pi[(a, b)]:
                return "fail", None, f"derived bracket misses pi^({a},{b})"
    wit = "flat" if master_flat else "curved (master equation nonzero), oracle agrees"
    return "pass", None, wit


def _courant_layout(dchart, pos):
    even = [p for p in dchart.pairs if p.q_weight % 2 == 0]
    odd = [p for p in dchart.pairs if p.q_weight % 2 == 1]
    if dchart.n != 2 or len(even) != len(odd):
        raise SemanticError("dorfman check needs a standard degree-2 chart", *pos)
    return even, odd


def _to_tangent(dchart, even, tc, poly):
    """Carry a base polynomial (in the q's of the even pairs) to the tangent chart."""
    out = tc.chart.zero()
    xidx = [dchart.chart.index(p.q_name) for p in even]
    for key, coeff in poly.terms.items():
        exps = [0] * len(tc.chart.gvars)
        for pos_, i in enumerate(xidx):
            exps[pos_] = key[i]
        if sum(key) != sum(exps):
            raise ValueError("polynomial is not base-only")
        out = out + tc.chart.monomial(coeff, tuple(exps))
    return out


def _from_tangent(dchart, even, tc, poly):
    out = dchart.chart.zero()
    back = {pos_: dchart.chart.index(p.q_name) for pos_, p in enumerate(even)}
    for key, coeff in poly.terms.items():
        exps = [0] * len(dchart.chart.gvars)
        for pos_, e in enumerate(key[:len(even)]):
            exps[back[pos_]] = e
        if sum(key) != sum(exps):
            raise ValueError("polynomial is not base-only")
        out = out + dchart.chart.monomial(coeff, tuple(exps))
    return out


def check_dorfman(session, st):
    h = session.get(st.args[0], "ham", pos=st.pos)
    dchart = h.dchart
    even, odd = _courant_layout(dchart, st.pos)
    m = len(even)
    samples = 20
    if len(st.args) > 2 and st.args[1] == "samples":
        samples = int(st.args[2])
    tc = TangentChart(m)
    rng = session.rng

    def rand_base(chart, xnames):
        p = chart.zero()
        for _ in range(rng.randint(1, 2)):
            key = [0] * len(chart.gvars)
            for nm in xnames:
                key[chart.index(nm)] = rng.randint(0, 2)
            p = p + chart.monomial(Fraction(rng.randint(-2, 2)), tuple(key))
        return p

    xnames = [p.q_name for p in even]
    for _ in range(samples):
        X = [rand_base(dchart.chart, xnames) for _ in range(m)]
        xi = [rand_base(dchart.chart, xnames) for _ in range(m)]
        Y = [rand_base(dchart.chart, xnames) for _ in range(m)]
        zeta = [rand_base(dchart.chart, xnames) for _ in range(m)]
        e1 = _encode_section(dchart, even, odd, X, xi)
        e2 = _encode_section(dchart, even, odd, Y, zeta)
        got = sig.derived_bracket(dchart, h, e1, e2)
        sec1 = ([_to_tangent(dchart, even, tc, f) for f in X],
                sum((_to_tangent(dchart, even, tc, f) * tc.xi(a + 1)
                     for a, f in enumerate(xi)), tc.chart.zero()))
        sec2 = ([_to_tangent(dchart, even, tc, f) for f in Y],
                sum((_to_tangent(dchart, even, tc, f) * tc.xi(a + 1)
                     for a, f in enumerate(zeta)), tc.chart.zero()))
        vec, form = dorfman_bracket(tc, sec1, sec2)
        expected = _encode_section(
            dchart, even, odd,
            [_from_tangent(dchart, even, tc, v) for v in vec],
            [_from_tangent(dchart, even, tc, left_derivative(form, tc.xi_names[a]))
             for a in range(m)])
        if got != expected:
            return "fail", None, "derived bracket differs from the Dorfman oracle"
    return "pass", None, f"{samples} random sections agree exactly"


def _encode_section(dchart, even, odd, X, xi):
    out = dchart.zero()
    for a in range(len(even)):
        out = out + X[a] * dchart.var(odd[a].p_name) + xi[a] * dchart.var(odd[a].q_name)
    return out


def check_pairing(session, st):
    dchart = session.get(st.args[0], "sigma", pos=st.pos)
    even, odd = _courant_layout(dchart, st.pos)
    m = len(even)
    rng = session.rng
    xnames = [p.q_name for p in even]

    def rand_base(chart):
        key = [0] * len(chart.gvars)
        for nm in xnames:
            key[chart.index(nm)] = rng.randint(0, 1)
        return chart.monomial(Fraction(rng.randint(-2, 2)), tuple(key))

    for _ in range(20):
        X = [rand_base(dchart.chart) for _ in range(m)]
        xi = [rand_base(dchart.chart) for _ in range(m)]
        Y = [rand_base(dchart.chart) for _ in range(m)]
        zeta = [rand_base(dchart.chart) for _ in range(m)]
        e1 = _encode_section(dchart, even, odd, X, xi)
        e2 = _encode_section(dchart, even, odd, Y, zeta)
        got = sig.poisson_bracket(dchart, e1, e2)
        want = dchart.zero()
        for a in range(m):
            want = want + X[a] * zeta[a] + Y[a] * xi[a]
        if got != want:
            return "fail", None, "section bracket differs from iota_X zeta + iota_Y xi"
    return "pass", None, None


def check_iota(session, st):
    sp = session.get(st.args[0], "pair", pos=st.pos)
    self_bracket_zero = ext.iota_self_bracket(sp).is_zero()
    contraction = sp.tangent.iota(sp.v, sp.alpha)
    agrees = self_bracket_zero == contraction.is_zero()
    wit = f"v . alpha = {contraction}"
    return _ok(agrees, witness_fail="[iota,iota] = 0 disagrees with v . alpha = 0",
               witness_pass=wit)


def check_pairbracket(session, st):
    s1 = session.get(st.args[0], "pair", pos=st.pos)
    s2 = session.get(st.args[1], "pair", pos=st.pos)
    br = ext.symmetry_bracket(s1, s2)
    Q = ext.twisted_q(s1.twist)
    i1, i2 = ext.iota_encode(s1), ext.iota_encode(s2)
    dec = ext.pair_decode(s1, commutator(commutator(Q, i1), i2))
    if dec != br:
        return "fail", None, "bracket differs from [[Q, iota1], iota2]"
    br21 = ext.symmetry_bracket(s2, s1)
    pol = ext.pair_decode(s1, commutator(Q, commutator(i1, i2)))
    defect_v = [a + b for a, b in zip(br.v, br21.v)]
    defect_a = br.alpha + br21.alpha
    if pol.v != defect_v or pol.alpha != defect_a:
        return "fail", None, "polarized identity [[Q,i],i] = 1/2 [Q,[i,i]] fails"
    return "pass", None, None


def check_leibniz(session, st):
    s1 = session.get(st.args[0], "pair", pos=st.pos)
    s2 = session.get(st.args[1], "pair", pos=st.pos)
    s3 = session.get(st.args[2], "pair", pos=st.pos)
    lhs = ext.symmetry_bracket(s1, ext.symmetry_bracket(s2, s3))
    r1 = ext.symmetry_bracket(ext.symmetry_bracket(s1, s2), s3)
    r2 = ext.symmetry_bracket(s2, ext.symmetry_bracket(s1, s3))
    good = (lhs.v == [a + b for a, b in zip(r1.v, r2.v)]
            and lhs.alpha == r1.alpha + r2.alpha)
    return _ok(good, witness_fail="left Leibniz identity fails")


def check_skewwitness(session, st):
    s1 = session.get(st.args[0], "pair", pos=st.pos)
    s2 = session.get(st.args[1], "pair", pos=st.pos)
    b12 = ext.symmetry_bracket(s1, s2)
    b21 = ext.symmetry_bracket(s2, s1)
    skew = (b12.v == [-c for c in b21.v]) and b12.alpha == -b21.alpha
    wit = f"defect alpha = {b12.alpha + b21.alpha}"
    return _ok(not skew, witness_fail="bracket is skew on this pair (no witness)",
               witness_pass=wit)


def check_degbound(session, st):
    rng = session.rng
    cases = [(2, 3, -1), (1, 2, 0), (2, 0, 3)]
    for _ in range(25):
        n = rng.randint(0, 4)
        w = rng.randint(n + 1, n + 5)
        cases.append((n, w, n - w))
    for n, wq, wp in cases:
        try:
            sig.DarbouxChart(n, [sig.ConjugatePair("a", wq, "b", wp)])
            return "fail", None, f"accepted weights ({wq}, {wp}) at degree {n}"
        except GqError:
            continue
    return "pass", None, f"{len(cases)} out-of-range charts rejected"


def check_moduli(session, st):
    val = session.get(st.args[0], "complex", pos=st.pos)
    S = val.total if isinstance(val, cx.RelativeComplex) else _as_symplectic(val, st)
    rep = cx.cohomology_pairing(S)
    expected = None
    if len(st.args) > 1 and st.args[1] == "dims":
        expected = [int(a) for a in st.args[2:]]
    dims = [rep.dims.get(k, 0) for k in sorted(rep.dims)]
    if expected is not None and dims != expected:
        return "fail", None, f"H dims {dims}, expected {expected}"
    return _ok(rep.nondegenerate, witness_fail=f"induced pairing degenerate; H dims {dims}",
               witness_pass=f"H dims {dims}, induced pairing nondegenerate")


def check_nmap(session, st):
    N = session.get(st.args[0], "nmap", pos=st.pos)
    n = N.source_dim
    for name, w, d in N.components:
        expected = math.comb(n, w) if 0 <= w <= n else 0
        if d != expected:
            return "fail", None, f"component {name} has dim {d}, expected {expected}"
    return _ok(N.nondegenerate, witness_fail="component pairing is degenerate",
               witness_pass=f"total dim {N.total_dim}")


def check_wzw(session, st):
    a = session.get(st.args[0], "grid", pos=st.pos)
    b = session.get(st.args[1], "grid", pos=st.pos)
    prod = ext.wzw_product(a, b)
    n1, n2 = a.nodes_shape
    ident = ext.GridMap.identity(n1 - 1, n2 - 1)
    right_unit = ext.wzw_product(a, ident)
    if not (np.array_equal(right_unit.values, a.values)
            and np.array_equal(right_unit.omega, a.omega)):
        return "fail", None, "identity grid is not a right unit"
    inv = b.inverse()
    cancel = ext.GridMap(inv.values, -b.omega - ext.wzw_cross_term(inv, b))
    res = float(np.max(np.abs(ext.wzw_product(cancel, b).omega)))
    ok = res < 1e-9
    return _ok(ok, residual=float(np.max(np.abs(prod.omega))) if ok else res,
               witness_fail="inverse cancellation failed",
               witness_pass="unit and inverse laws hold")


def check_gauge(session, st):
    tw = session.get(st.args[0], "twist", pos=st.pos)
    _, alpha = session.get(st.args[1], "form", pos=st.pos)
    shifted = ext.gauge_change(tw, alpha)
    d_preserved = tw.tangent.d(shifted.eta) == tw.tangent.d(tw.eta)
    conjugate = ext.gauge_shift_consistent(tw, alpha)
    return _ok(d_preserved and conjugate,
               witness_fail="gauge change broke d eta or the fiber shift conjugation",
               witness_pass=f"eta' = {shifted.eta}")


CHECKS = {
    "q2": (check_q2, ["q_square", "apply", "algebroid_to_q", "twisted_q"],
           "Q^2 = 0 for a Q-field, algebroid, or twist"),
    "master": (check_master, ["master_equation", "poisson_bracket"],
               "{Theta, Theta} = 0"),
    "jacobi": (check_jacobi, ["central_extension"],
               "graded Jacobi + Q derivation on the central extension"),
    "cartan": (check_cartan, ["cartan_3form"],
               "Cartan 3-form is Chevalley-Eilenberg closed"),
    "dirac": (check_dirac, ["lambda_check", "hamiltonian_to_q"],
              "constraint locus is a Lagrangian Q-invariant submanifold"),
    "lemma1": (check_lemma1, ["suspension_check"],
               "relative ball tensor shifts cohomology by n"),
    "lemma3": (check_lemma3, ["lemma3_orthogonality", "cohomology"],
               "cocycles vs orthogonal complement of relative coboundaries"),
    "stokes": (check_stokes, ["lattice_model"],
               "boundary pairing of restrictions equals the d-pairing combination"),
    "boundary-lagrangian": (check_boundary_lagrangian,
                            ["boundary_lagrangian", "cohomology_pairing"],
                            "image of H(total) in H(boundary) is Lagrangian"),
    "cocycle": (check_cocycle, ["affine_cocycle_check"],
                "loop-algebra 2-cocycle identity at mode cutoff"),
    "holonomy": (check_holonomy, ["integrate", "concatenate"],
                 "holonomy of a concatenation is the product of holonomies"),
    "reparam": (check_reparam, ["reparametrize_check"],
                "holonomy is reparametrization invariant"),
    "exp": (check_exp, ["integrate"],
            "constant-path holonomy matches the matrix exponential"),
    "action": (check_action, ["action_integrate"],
               "base transport matches group transport"),
    "euler": (check_euler, ["euler_field", "commutator", "manifold_degree"],
              "[E, D] = deg(D) D"),
    "scaling": (check_scaling, ["scaling_check", "weight_of", "multiply", "left_derivative"],
                "f(lambda . x) = lambda^deg f(x) on homogeneous components"),
    "hamround": (check_hamround, ["q_to_hamiltonian", "hamiltonian_to_q"],
                 "Hamiltonian <-> Q round trip"),
    "alground": (check_alground, ["q_to_algebroid", "algebroid_to_q"],
                 "algebroid <-> Q round trip"),
    "poisson": (check_poisson, ["derived_bracket", "master_equation"],
                "derived bracket reproduces the bivector; master = Schouten oracle"),
    "dorfman": (check_dorfman, ["derived_bracket"],
                "derived bracket equals the Dorfman bracket on sections"),
    "pairing": (check_pairing, ["poisson_bracket"],
                "section bracket is the tangent-plus-cotangent pairing"),
    "iota": (check_iota, ["iota_encode"],
             "[iota, iota] = 0 iff the contraction vanishes"),
    "pairbracket": (check_pairbracket, ["symmetry_bracket", "iota_encode", "commutator"],
                    "symmetry bracket matches [[Q, iota1], iota2]"),
    "leibniz": (check_leibniz, ["symmetry_bracket"],
                "left Leibniz identity for symmetry pairs"),
    "skewwitness": (check_skewwitness, ["symmetry_bracket"],
                    "records a non-skew witness pair"),
    "degbound": (check_degbound, ["manifold_degree"],
                 "Darboux charts reject weights outside [0, n]"),
    "moduli": (check_moduli, ["cohomology_pairing", "lattice_model", "cohomology"],
               "cohomology dimensions and induced pairing of a lattice model"),
    "nmap": (check_nmap, ["nmap_space"],
             "component dimensions are binomial and the pairing is symplectic"),
    "wzw": (check_wzw, ["wzw_product"],
            "grid product: unit and inverse laws for the corrected 2-form"),
    "gauge": (check_gauge, ["gauge_change", "twisted_q"],
              "gauge change shifts eta by d alpha and conjugates Q"),
}

# operations reachable only through statements (not checks)
STATEMENT_OPS = {
    "parse": "dsl.parse",
    "execute": "session.execute",
    "report_render": "session.report_render",
}
