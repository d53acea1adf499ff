"""Error bars for correlated time series via non-overlapping batch means."""
from __future__ import annotations

import numpy as np

from .errors import InsufficientDataError


def batch_means(x, n_batches=20):
    """Mean and standard error of a correlated series.

    x is 1-D (single series) or 2-D (members, time); each member is split
    into contiguous batches so that at least n_batches batch means enter the
    dispersion estimate.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    m, L = x.shape
    if m * L == 0:
        raise InsufficientDataError("empty series")
    per_member = max(1, int(np.ceil(n_batches / m)))
    if L < per_member:
        per_member = L
    b = L // per_member
    means = x[:, : per_member * b].reshape(m, per_member, b).mean(axis=2)
    means = means.ravel()
    mu = float(x.mean())
    if means.size < 2:
        return mu, float("nan")
    se = float(means.std(ddof=1) / np.sqrt(means.size))
    return mu, se


def batch_means_series(x, n_batches=20):
    """Vectorized batch means over the last axis.

    x has shape (..., members, time); returns (mean, se) with shape (...).
    """
    x = np.asarray(x, dtype=float)
    m, L = x.shape[-2], x.shape[-1]
    per_member = max(1, int(np.ceil(n_batches / m)))
    if L < per_member:
        per_member = L
    b = L // per_member
    trimmed = x[..., : per_member * b].reshape(x.shape[:-1] + (per_member, b))
    means = trimmed.mean(axis=-1).reshape(x.shape[:-2] + (m * per_member,))
    mu = x.mean(axis=(-2, -1))
    n = means.shape[-1]
    if n < 2:
        return mu, np.full(mu.shape, np.nan)
    se = means.std(axis=-1, ddof=1) / np.sqrt(n)
    return mu, se


def masked_batch_means(x, mask, n_batches=20):
    """Batch means over a (members, time) array where mask marks the entries
    that enter the average (contiguous batches, excluded entries dropped)."""
    x = np.asarray(x, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    if x.ndim == 1:
        x = x[None, :]
        mask = mask[None, :]
    m, L = x.shape
    total = int(mask.sum())
    if total == 0:
        raise InsufficientDataError("all samples excluded")
    mu = float(x[mask].mean())
    per_member = max(1, int(np.ceil(n_batches / m)))
    b = max(1, L // per_member)
    means = []
    for i in range(m):
        for k in range(per_member):
            sl = slice(k * b, (k + 1) * b if k < per_member - 1 else L)
            mk = mask[i, sl]
            if mk.any():
                means.append(x[i, sl][mk].mean())
    means = np.asarray(means)
    if means.size < 2:
        return mu, float("nan")
    se = float(means.std(ddof=1) / np.sqrt(means.size))
    return mu, se


def linear_fit(x, y):
    """Least-squares line y = a + b x; returns (a, b, se_b, r2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    A = np.vstack([np.ones(n), x]).T
    coef, res, _, _ = np.linalg.lstsq(A, y, rcond=None)
    a, b = coef
    yhat = a + b * x
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    if n > 2:
        sigma2 = ss_res / (n - 2)
        sxx = float(np.sum((x - x.mean()) ** 2))
        se_b = float(np.sqrt(sigma2 / sxx)) if sxx > 0 else float("nan")
    else:
        se_b = float("nan")
    return float(a), float(b), se_b, r2
