"""Tangent-cocycle computations along orbits: Lyapunov spectra (QR method),
covariant Lyapunov vectors (forward/backward sweep), splitting angles and
local unstable-manifold segments.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (HyperbolicityError, NumericalDegeneracyError,
                     ParameterError, UnsupportedDimensionError)
from .stats import batch_means_series


@dataclass
class TangentCocycle:
    """An orbit together with the one-step tangent maps along it."""

    orbit: np.ndarray       # (n+1, d)
    jacobians: np.ndarray   # (n, d, d), jacobians[j] = Df(orbit[j])

    @classmethod
    def from_orbit(cls, family, alpha, orbit):
        orbit = np.asarray(orbit, dtype=float)
        return cls(orbit=orbit, jacobians=family.jacobian(alpha, orbit[:-1]))

    @property
    def dimension(self):
        return self.orbit.shape[1]

    def __len__(self):
        return self.jacobians.shape[0]

    def product(self, start, n):
        """T_{x_start} f^n by chained multiplication."""
        d = self.dimension
        P = np.eye(d)
        for j in range(start, start + n):
            P = self.jacobians[j] @ P
        return P


def _qr_pos(A):
    """Batched QR with positive diagonal of R."""
    Q, R = np.linalg.qr(A)
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    s = np.where(diag < 0, -1.0, 1.0)
    Q = Q * s[..., None, :]
    R = R * s[..., :, None]
    return Q, R


@dataclass
class LyapunovSpectrum:
    """Exponents in nats per iteration, sorted descending."""

    all_exponents: np.ndarray     # (d,) one per tangent direction
    all_stderr: np.ndarray
    exponents: np.ndarray         # distinct values
    multiplicities: np.ndarray
    stderr: np.ndarray            # per distinct value
    n_steps: int
    mean_log_det: float

    @property
    def dimension(self):
        return self.all_exponents.size

    def sum(self):
        return float(self.all_exponents.sum())

    def zero_threshold(self, factor=10.0, floor=1e-6):
        return max(floor, factor * float(np.nanmax(self.all_stderr)))

    def is_hyperbolic(self, eps0=None):
        eps0 = eps0 if eps0 is not None else self.zero_threshold()
        return bool(np.all(np.abs(self.all_exponents) > eps0))


def _group_exponents(vals, ses):
    """Cluster adjacent exponents whose gap is within combined error."""
    groups = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals):
            groups.append((start, i))
            break
        tol = max(1e-7, 3.0 * (ses[i - 1] + ses[i]))
        if abs(vals[i - 1] - vals[i]) > tol:
            groups.append((start, i))
            start = i
    ex, mult, se = [], [], []
    for a, b in groups:
        ex.append(float(vals[a:b].mean()))
        mult.append(b - a)
        se.append(float(np.sqrt(np.sum(ses[a:b] ** 2)) / (b - a)))
    return np.array(ex), np.array(mult, dtype=int), np.array(se)


def _block_products(J, interval):
    """Products of `interval` consecutive jacobians: (nb, d, d)."""
    n = J.shape[0]
    nb = n // interval
    B = J[: nb * interval].reshape(nb, interval, *J.shape[1:])
    P = B[:, 0]
    for i in range(1, interval):
        P = B[:, i] @ P
    return P, nb


def benettin_spectrum(cocycle, steps=None, reorth_interval=1, n_batches=20,
                      q0=None):
    """Lyapunov spectrum by QR reorthonormalization.

    Standard errors come from batch means over the per-block stretch series
    (at least n_batches batches).
    """
    if reorth_interval < 1:
        raise ParameterError("reorth_interval must be >= 1")
    J = cocycle.jacobians
    n = J.shape[0] if steps is None else min(steps, J.shape[0])
    d = cocycle.dimension
    if n < reorth_interval:
        raise ParameterError("steps must be >= reorth_interval")
    P, nb = _block_products(J[:n], reorth_interval)
    Q = np.eye(d) if q0 is None else np.array(q0, dtype=float)
    logs = np.empty((nb, d))
    for i in range(nb):
        Q, R = _qr_pos(P[i] @ Q)
        diag = np.diagonal(R)
        if not np.all(np.isfinite(diag)) or np.any(diag <= 0.0):
            raise NumericalDegeneracyError(
                f"QR rank loss at step {i * reorth_interval}",
                step=i * reorth_interval)
        logs[i] = np.log(diag)
    used = nb * reorth_interval
    per_step = logs.T / reorth_interval          # (d, nb)
    means, ses = batch_means_series(per_step[:, None, :], n_batches=n_batches)
    order = np.argsort(means)[::-1]
    vals = means[order]
    errs = ses[order]
    ex, mult, se = _group_exponents(vals, errs)
    return LyapunovSpectrum(
        all_exponents=vals, all_stderr=errs,
        exponents=ex, multiplicities=mult, stderr=se,
        n_steps=used, mean_log_det=float(logs.sum() / used))


@dataclass
class OseledetsSplitting:
    """Covariant Lyapunov vectors on a window of the orbit.

    clvs[j] has the CLVs as columns, ordered by descending exponent; the
    first n_unstable columns span E^u, the rest E^s.  Window index j
    corresponds to orbit index j + offset.
    """

    points: np.ndarray       # (w, d)
    clvs: np.ndarray         # (w, d, d)
    n_unstable: int
    offset: int
    spectrum: LyapunovSpectrum
    _bases: dict = field(default_factory=dict, repr=False)

    @property
    def n_stable(self):
        return self.clvs.shape[2] - self.n_unstable

    def basis(self, which):
        """Orthonormal per-point basis of E^u ('u') or E^s ('s')."""
        if which not in self._bases:
            cols = (self.clvs[:, :, : self.n_unstable] if which == "u"
                    else self.clvs[:, :, self.n_unstable:])
            Q, _ = _qr_pos(cols)
            self._bases[which] = Q
        return self._bases[which]


def _clv_sweep(J, warmup, q0=None):
    """Ginelli forward/backward sweep for a batch of cocycles.

    J has shape (B, n, d, d); returns (clvs (B, w, d, d), logs (B, n, d),
    window start) with w = n + 1 - 2*warmup.
    """
    B, n, d, _ = J.shape
    if n + 1 <= 2 * warmup:
        raise ParameterError("orbit shorter than twice the CLV warmup")
    Qs = np.empty((B, n + 1, d, d))
    Rs = np.empty((B, n, d, d))
    logs = np.empty((B, n, d))
    Q = np.broadcast_to(np.eye(d), (B, d, d)).copy() if q0 is None else q0
    Qs[:, 0] = Q
    for j in range(n):
        Q, R = _qr_pos(J[:, j] @ Q)
        diag = np.diagonal(R, axis1=-2, axis2=-1)
        if not np.all(np.isfinite(diag)) or np.any(diag <= 0.0):
            raise NumericalDegeneracyError(f"QR rank loss at step {j}", step=j)
        Qs[:, j + 1] = Q
        Rs[:, j] = R
        logs[:, j] = np.log(diag)
    lo, hi = warmup, n + 1 - warmup     # window of converged CLVs
    clvs = np.empty((B, hi - lo, d, d))
    A = np.broadcast_to(np.triu(np.ones((d, d))), (B, d, d)).copy()
    A = A / np.linalg.norm(A, axis=1, keepdims=True)
    for j in range(n - 1, -1, -1):
        A = np.linalg.solve(Rs[:, j], A)
        A = A / np.linalg.norm(A, axis=1, keepdims=True)
        if lo <= j < hi:
            V = Qs[:, j] @ A
            clvs[:, j - lo] = V / np.linalg.norm(V, axis=1, keepdims=True)
    return clvs, logs, lo


def compute_clvs(cocycle, warmup=1000, eps0=None, n_batches=20):
    """Covariant Lyapunov vectors and the Oseledets splitting they induce.

    Requires a hyperbolic spectrum: raises HyperbolicityError if any exponent
    is within eps0 (default 10x its standard error) of zero.
    """
    J = cocycle.jacobians[None]
    clvs, logs, lo = _clv_sweep(J, warmup)
    n = logs.shape[1]
    means, ses = batch_means_series(logs[0].T[:, None, :], n_batches=n_batches)
    order = np.argsort(means)[::-1]
    vals, errs = means[order], ses[order]
    ex, mult, se = _group_exponents(vals, errs)
    spectrum = LyapunovSpectrum(vals, errs, ex, mult, se, n,
                                float(logs.sum() / n))
    threshold = eps0 if eps0 is not None else spectrum.zero_threshold()
    if np.any(np.abs(vals) <= threshold):
        raise HyperbolicityError(
            f"Lyapunov exponent within {threshold:.3g} of zero: {vals}")
    n_unstable = int(np.sum(vals > 0))
    w = clvs.shape[1]
    return OseledetsSplitting(
        points=cocycle.orbit[lo:lo + w].copy(),
        clvs=clvs[0], n_unstable=n_unstable, offset=lo, spectrum=spectrum)


def principal_angle(bu, bs):
    """Minimal principal angle (radians in [0, pi/2]) between two subspaces
    given by orthonormal column bases."""
    bu = np.atleast_2d(np.asarray(bu, dtype=float))
    bs = np.atleast_2d(np.asarray(bs, dtype=float))
    if bu.shape[0] == 1:
        bu = bu.T
    if bs.shape[0] == 1:
        bs = bs.T
    s = np.linalg.svd(bu.T @ bs, compute_uv=False)
    return float(np.arccos(np.clip(s.max(initial=0.0), 0.0, 1.0)))


def splitting_angles(splitting):
    """Per-point minimal principal angle between E^s and E^u."""
    bu = splitting.basis("u")
    bs = splitting.basis("s")
    M = np.swapaxes(bu, -2, -1) @ bs
    s = np.linalg.svd(M, compute_uv=False)
    smax = s[..., 0] if s.ndim > 1 else s
    return np.arccos(np.clip(smax, 0.0, 1.0))


def covariance_residuals(splitting, cocycle):
    """One-step pushforward residual of the unstable/stable subspaces.

    Returns (res_u, res_s) with res[j] = ||(I - P_{j+1}) Df V_j|| / ||Df V_j||
    where P is the orthogonal projector on the corresponding subspace.
    """
    lo = splitting.offset
    w = splitting.clvs.shape[0]
    J = cocycle.jacobians[lo:lo + w - 1]
    out = []
    for which in ("u", "s"):
        basis = splitting.basis(which)
        V = J @ basis[:-1]
        Pn = basis[1:]
        coeff = np.swapaxes(Pn, -2, -1) @ V
        resid = V - Pn @ coeff
        num = np.linalg.norm(resid, axis=(-2, -1))
        den = np.linalg.norm(V, axis=(-2, -1))
        out.append(num / den)
    return out[0], out[1]


def _lift(chart, poly):
    """Continuous lift of a torus polyline."""
    diffs = chart.difference(poly[1:], poly[:-1])
    lift = np.empty_like(poly)
    lift[0] = poly[0]
    np.cumsum(diffs, axis=0, out=lift[1:])
    lift[1:] += poly[0]
    return lift


def _resample(chart, poly, max_spacing):
    lift = _lift(chart, poly)
    seg = np.linalg.norm(np.diff(lift, axis=0), axis=1)
    if not np.any(seg > max_spacing):
        return poly
    pieces = [lift[:1]]
    for i in range(len(seg)):
        k = int(np.ceil(seg[i] / max_spacing))
        t = np.linspace(0.0, 1.0, k + 1)[1:, None]
        pieces.append(lift[i] + t * (lift[i + 1] - lift[i]))
    return chart.reduce(np.concatenate(pieces, axis=0))


def unstable_segment(family, alpha, x, e_u, half_width, refine,
                     max_spacing=None, seed_points=17, max_points=20000):
    """Polyline approximating the local unstable manifold through x.

    Seeds a short segment along the pulled-back unstable direction `refine`
    steps in the past and pushes it forward, resampling to bounded spacing.
    """
    e_u = np.asarray(e_u, dtype=float)
    if e_u.ndim != 1:
        raise UnsupportedDimensionError(
            "unstable_segment requires a one-dimensional unstable direction")
    if half_width <= 0:
        raise ParameterError("half_width must be positive")
    if family.inverse is None:
        raise ParameterError(f"family {family.name} has no inverse")
    if max_spacing is None:
        max_spacing = half_width / 32.0
    x = family.chart.reduce(np.asarray(x, dtype=float))
    # backward orbit and pulled-back unstable direction
    past = [x]
    for _ in range(refine):
        past.append(family.inverse(alpha, past[-1]))
    v = e_u / np.linalg.norm(e_u)
    growth = 1.0
    vs = [v]
    for k in range(refine):
        Jb = family.jacobian(alpha, past[k + 1])
        v = np.linalg.solve(Jb, vs[-1])
        v = v / np.linalg.norm(v)
        vs.append(v)
    # forward expansion along the chain fixes the seed width
    for k in range(refine):
        Jf = family.jacobian(alpha, past[refine - k])
        w = Jf @ vs[refine - k]
        growth *= np.linalg.norm(w)
    w0 = half_width / max(growth, 1e-300)
    t = np.linspace(-1.0, 1.0, seed_points)[:, None]
    poly = family.chart.reduce(past[refine] + t * (w0 * vs[refine]))
    for _ in range(refine):
        poly = family.step(alpha, poly)
        poly = _resample(family.chart, poly, max_spacing)
        if poly.shape[0] > max_points:
            raise NumericalDegeneracyError(
                "unstable segment refinement exceeded max_points")
    # trim to arclength half_width around the image of the center seed
    lift = _lift(family.chart, poly)
    dist = np.linalg.norm(family.chart.difference(poly, x), axis=1)
    i0 = int(np.argmin(dist))
    seg = np.linalg.norm(np.diff(lift, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    keep = np.abs(s - s[i0]) <= half_width
    return poly[keep]
