"""Numeric integration of matrix Lie-algebra and linear action-algebroid paths.

Paths are time-sampled and linearly interpolated; holonomy solves the
left-invariant ODE g' = g a(t) with a classical fourth-order one-step
method. Concatenation rescales time, so holonomies compose as
g_p g_q (first factor first); see docs/CONVENTIONS.md for the action case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CompositionError, InconsistentPathError

__all__ = [
    "APath", "GroupoidElement", "integrate", "concatenate", "reverse",
    "reparametrize", "reparametrize_check", "action_integrate",
    "group_residual", "save_apath", "load_apath", "constant_path",
]


class APath:
    """Samples (t_j, a_j) with t in [0,1] increasing, a_j square matrices.

    Repeated time stamps mark jump discontinuities in a (concatenation
    points); the base curve, when present, must be continuous there.
    a(t) is linearly interpolated inside each smooth block.
    """

    def __init__(self, times, mats, base=None):
        times = np.asarray(times, dtype=float)
        mats = np.asarray(mats, dtype=float)
        if times.ndim != 1 or len(times) < 2:
            raise ValueError("need at least two samples")
        if mats.ndim != 3 or mats.shape[0] != len(times) or mats.shape[1] != mats.shape[2]:
            raise ValueError("samples must be square matrices, one per time")
        if abs(times[0]) > 1e-15 or abs(times[-1] - 1.0) > 1e-12:
            raise ValueError("paths are parametrized over [0, 1]")
        if np.any(np.diff(times) < 0):
            raise ValueError("times must be non-decreasing")
        self.times = times
        self.mats = mats
        self.dim = mats.shape[1]
        if base is not None:
            base = np.asarray(base, dtype=float)
            if base.ndim != 2 or base.shape[0] != len(times):
                raise ValueError("base samples must align with times")
            for j in np.nonzero(np.diff(times) == 0)[0]:
                if not np.allclose(base[j], base[j + 1], atol=1e-9):
                    raise InconsistentPathError("base curve jumps at a concatenation point")
        self.base = base

    def blocks(self):
        """Index ranges [lo, hi] of maximal smooth (strictly increasing) pieces."""
        out = []
        lo = 0
        for j in range(len(self.times) - 1):
            if self.times[j + 1] == self.times[j]:
                out.append((lo, j))
                lo = j + 1
        out.append((lo, len(self.times) - 1))
        return [(lo, hi) for lo, hi in out if hi > lo]

    def value(self, t, lo, hi):
        """Linear interpolation of a within the sample block [lo, hi]."""
        ts = self.times[lo:hi + 1]
        j = int(np.searchsorted(ts, t, side="right")) - 1
        j = min(max(j, 0), len(ts) - 2)
        t0, t1 = ts[j], ts[j + 1]
        lam = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
        return (1 - lam) * self.mats[lo + j] + lam * self.mats[lo + j + 1]

    def anchor_residual(self, action=None) -> float:
        """Max deviation of the base slope from the anchor direction.

        action(a, x) defaults to the matrix-vector product a @ x; the residual
        is the discrete form of the compatibility gamma' = rho(a) gamma.
        """
        if self.base is None:
            raise ValueError("path has no base samples")
        if action is None:
            action = lambda a, x: a @ x
        worst = 0.0
        for j in range(len(self.times) - 1):
            dt = self.times[j + 1] - self.times[j]
            if dt == 0:
                continue
            slope = (self.base[j + 1] - self.base[j]) / dt
            mid_a = 0.5 * (self.mats[j] + self.mats[j + 1])
            mid_x = 0.5 * (self.base[j] + self.base[j + 1])
            worst = max(worst, float(np.max(np.abs(slope - action(mid_a, mid_x)))))
        return worst


@dataclass
class GroupoidElement:
    """Holonomy matrix plus source/target base points (None for algebra paths)."""

    holonomy: np.ndarray
    source: np.ndarray | None = None
    target: np.ndarray | None = None


def group_residual(g: np.ndarray, orthogonal=True) -> float:
    """Distance from the structure group: orthogonality defect and det - 1."""
    res = abs(float(np.linalg.det(g)) - 1.0)
    if orthogonal:
        res = max(res, float(np.max(np.abs(g.T @ g - np.eye(g.shape[0])))))
    return res


def _rk4_matrix(a_of_t, g0, t0, t1, steps):
    """RK4 for g' = g a(t) (side='left') or g' = a(t) g (side='right')."""
    g = g0
    h = (t1 - t0) / steps
    for k in range(steps):
        t = t0 + k * h
        g = _rk4_step(a_of_t, g, t, h, left=True)
    return g


def _rk4_step(a_of_t, g, t, h, left=True):
    def f(gv, tv):
        a = a_of_t(tv)
        return gv @ a if left else a @ gv

    k1 = f(g, t)
    k2 = f(g + 0.5 * h * k1, t + 0.5 * h)
    k3 = f(g + 0.5 * h * k2, t + 0.5 * h)
    k4 = f(g + h * k3, t + h)
    return g + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _integrate_blocks(p: APath, steps: int, left=True, rhs_dim=None, vec_rhs=None):
    """Integrate over every smooth block, splitting steps proportionally.

    vec_rhs, if given, integrates the base ODE x' = a(t) x alongside.
    """
    blocks = p.blocks()
    g = np.eye(p.dim)
    x = None if vec_rhs is None else np.array(vec_rhs, dtype=float)
    for lo, hi in blocks:
        t0, t1 = p.times[lo], p.times[hi]
        nsteps = max(1, int(round(steps * (t1 - t0))))
        a_of_t = lambda t, lo=lo, hi=hi: p.value(t, lo, hi)
        h = (t1 - t0) / nsteps
        for k in range(nsteps):
            t = t0 + k * h
            if x is not None:
                x = _rk4_vec_step(a_of_t, x, t, h)
            g = _rk4_step(a_of_t, g, t, h, left=left)
    return g, x


def _rk4_vec_step(a_of_t, x, t, h):
    def f(xv, tv):
        return a_of_t(tv) @ xv

    k1 = f(x, t)
    k2 = f(x + 0.5 * h * k1, t + 0.5 * h)
    k3 = f(x + 0.5 * h * k2, t + 0.5 * h)
    k4 = f(x + h * k3, t + h)
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(p: APath, steps: int = 10_000) -> GroupoidElement:
    """Holonomy of the path: solve g' = g a(t), g(0) = I; error O(steps^-4)."""
    g, _ = _integrate_blocks(p, steps, left=True)
    src = tgt = None
    if p.base is not None:
        src, tgt = p.base[0].copy(), p.base[-1].copy()
    return GroupoidElement(g, src, tgt)


def concatenate(p: APath, q: APath, tol: float = 1e-9) -> APath:
    """Time-rescaled concatenation: p on [0, 1/2], q on [1/2, 1].

    Sample values double (the ODE is reparametrization-covariant), so
    integrate(concatenate(p, q)).holonomy == integrate(p) @ integrate(q)
    up to the integration error.
    """
    if p.dim != q.dim:
        raise ValueError("paths have different matrix dimensions")
    if (p.base is None) != (q.base is None):
        raise CompositionError("cannot concatenate a based path with an unbased one")
    if p.base is not None and np.max(np.abs(p.base[-1] - q.base[0])) > tol:
        raise CompositionError("target of the first path differs from source of the second")
    times = np.concatenate([p.times * 0.5, 0.5 + q.times * 0.5])
    mats = np.concatenate([p.mats * 2.0, q.mats * 2.0])
    base = None
    if p.base is not None:
        base = np.concatenate([p.base, q.base])
    return APath(times, mats, base)


def reverse(p: APath) -> APath:
    """Time reversal; integrates to the inverse holonomy."""
    times = 1.0 - p.times[::-1]
    mats = -p.mats[::-1]
    base = None if p.base is None else p.base[::-1].copy()
    return APath(times, mats, base)


def reparametrize(p: APath, phi_samples) -> APath:
    """The path p o phi with a rescaled by phi', sampled at phi's grid.

    phi_samples: array of (s, phi(s)) rows with phi(0) = 0, phi(1) = 1,
    strictly monotone. phi' comes from second-order finite differences.
    An exact-identity phi returns the original samples unchanged.
    """
    phi_samples = np.asarray(phi_samples, dtype=float)
    s = phi_samples[:, 0]
    phi = phi_samples[:, 1]
    if abs(phi[0]) > 1e-15 or abs(phi[-1] - 1.0) > 1e-12:
        raise ValueError("phi must fix the endpoints 0 and 1")
    if np.any(np.diff(phi) <= 0) or np.any(np.diff(s) <= 0):
        raise ValueError("phi must be strictly monotone")
    if np.array_equal(s, phi) and len(s) == len(p.times) and np.array_equal(s, p.times):
        return p
    dphi = np.gradient(phi, s, edge_order=2)
    mats = np.empty((len(s), p.dim, p.dim))
    blocks = p.blocks()
    for j, (sj, pj) in enumerate(zip(s, phi)):
        lo, hi = next((b for b in blocks if p.times[b[0]] <= pj <= p.times[b[1]]), blocks[-1])
        mats[j] = p.value(pj, lo, hi) * dphi[j]
    base = None
    if p.base is not None:
        base = np.empty((len(s), p.base.shape[1]))
        for j, pj in enumerate(phi):
            base[j] = _interp_rows(p.times, p.base, pj)
    return APath(s, mats, base)


def _interp_rows(times, rows, t):
    j = int(np.searchsorted(times, t, side="right")) - 1
    j = min(max(j, 0), len(times) - 2)
    t0, t1 = times[j], times[j + 1]
    lam = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
    return (1 - lam) * rows[j] + lam * rows[j + 1]


def reparametrize_check(p: APath, phi_samples, steps: int = 10_000) -> float:
    """Norm of holonomy(p) - holonomy(p o phi): the reparametrization residual."""
    g1 = integrate(p, steps).holonomy
    g2 = integrate(reparametrize(p, phi_samples), steps).holonomy
    return float(np.max(np.abs(g1 - g2)))


def action_integrate(p: APath, steps: int = 10_000, compat_tol: float = 0.05,
                     transport_tol: float = 1e-6) -> GroupoidElement:
    """Integrate a linear action-algebroid path: base ODE plus group transport.

    The base solves gamma' = a(t) gamma; the matching group element solves the
    time-ordered ODE G' = a(t) G, so that target = G(1) gamma(0). Both routes
    are computed and must agree within transport_tol.
    """
    if p.base is None:
        raise ValueError("action_integrate needs base samples")
    res = p.anchor_residual()
    if res > compat_tol:
        raise InconsistentPathError(
            f"anchor compatibility residual {res:.3e} exceeds {compat_tol:.3e}")
    g, x = _integrate_blocks(p, steps, left=False, vec_rhs=p.base[0])
    target_via_group = g @ p.base[0]
    drift = float(np.max(np.abs(target_via_group - x)))
    if drift > transport_tol:
        raise InconsistentPathError(
            f"transported base and group transport disagree by {drift:.3e}")
    return GroupoidElement(g, p.base[0].copy(), x)


def constant_path(X, nsamples: int = 2, base_point=None) -> APath:
    """The constant path a(t) = X, optionally with the transported base curve."""
    X = np.asarray(X, dtype=float)
    times = np.linspace(0.0, 1.0, nsamples)
    mats = np.repeat(X[None, :, :], nsamples, axis=0)
    base = None
    if base_point is not None:
        from scipy.linalg import expm

        base = np.stack([expm(t * X) @ np.asarray(base_point, dtype=float) for t in times])
    return APath(times, mats, base)


# -- text format --------------------------------------------------------------


def save_apath(p: APath, path):
    """Header 'dim m'; rows 't a_11 ... a_mm [base coords]'."""
    with open(path, "w") as fh:
        fh.write(f"dim {p.dim}\n")
        for j, t in enumerate(p.times):
            row = [repr(float(t))] + [repr(float(x)) for x in p.mats[j].ravel()]
            if p.base is not None:
                row += [repr(float(x)) for x in p.base[j]]
            fh.write(" ".join(row) + "\n")


def load_apath(path) -> APath:
    dim = None
    times, mats, base = [], [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "dim":
                dim = int(parts[1])
                continue
            if dim is None:
                raise ValueError("missing 'dim m' header")
            vals = [float(x) for x in parts]
            times.append(vals[0])
            mats.append(np.array(vals[1:1 + dim * dim]).reshape(dim, dim))
            rest = vals[1 + dim * dim:]
            if rest:
                base.append(np.array(rest))
    if dim is None:
        raise ValueError("missing 'dim m' header")
    if base and len(base) != len(times):
        raise ValueError("base coordinates must appear on every row or none")
    return APath(np.array(times), np.array(mats), np.array(base) if base else None)
