"""Robust Pade approximants for power series resummation.

Follows the SVD-based degree-reduction strategy of Gonnet, Guettel and
Trefethen (SIAM Rev. 55, 2013): rank-deficient Toeplitz systems lower the
effective (L, M) so that spurious pole/zero (Froissart) pairs are removed at
the linear-algebra level.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PadeDegeneracyError


@dataclass
class PadeApproximant:
    """Rational approximant p(z)/q(z), coefficients in ascending order."""

    numerator: np.ndarray
    denominator: np.ndarray
    order: tuple

    def __call__(self, z):
        p = np.polyval(self.numerator[::-1], z)
        q = np.polyval(self.denominator[::-1], z)
        return p / q

    def poles(self):
        b = np.trim_zeros(self.denominator, "b")
        scale = np.abs(b).max()
        # drop numerically-zero leading coefficients of the reversed poly
        bb = b.copy()
        while bb.size > 1 and abs(bb[-1]) < 1e-13 * scale:
            bb = bb[:-1]
        if bb.size < 2:
            return np.array([], dtype=complex)
        return np.roots(bb[::-1])

    def residues(self):
        poles = self.poles()
        dq = np.polyder(self.denominator[::-1])
        res = []
        for p in poles:
            num = np.polyval(self.numerator[::-1], p)
            den = np.polyval(dq, p)
            res.append(num / den if den != 0 else np.inf)
        return np.array(res, dtype=complex)


def robust_pade(coeffs, m, n, tol=1e-14):
    """(m, n) Pade approximant to sum coeffs[k] z^k with SVD rank reduction.

    Returns a PadeApproximant whose effective order may be lower than
    requested when the coefficient Toeplitz system is rank deficient.
    """
    c = np.asarray(coeffs, dtype=float)
    if m < 0 or n < 0:
        raise PadeDegeneracyError("Pade orders must be nonnegative")
    if c.size < m + n + 1:
        c = np.pad(c, (0, m + n + 1 - c.size))
    c = c[: m + n + 1]
    norm_c = np.linalg.norm(c)
    if norm_c == 0.0:
        return PadeApproximant(np.zeros(1), np.ones(1), (0, 0))
    ts = tol * norm_c
    if np.max(np.abs(c[: m + 1])) <= tol * np.max(np.abs(c)):
        return PadeApproximant(np.zeros(1), np.ones(1), (0, 0))
    while True:
        if n == 0:
            a = c[: m + 1].copy()
            b = np.ones(1)
            break
        # rows m+1 .. m+n of the Toeplitz system Z b = 0
        Z = np.zeros((n, n + 1))
        for i in range(n):
            for j in range(n + 1):
                k = m + 1 + i - j
                if 0 <= k < c.size:
                    Z[i, j] = c[k]
        try:
            _, S, Vh = np.linalg.svd(Z)
        except np.linalg.LinAlgError as exc:
            raise PadeDegeneracyError(
                f"SVD failed for Pade order ({m},{n}); try smaller M") from exc
        rho = int(np.sum(S > ts)) if S.size else 0
        if rho == n:
            b = Vh[-1]
            break
        # rank deficiency: reduce both degrees and retry
        m -= n - rho
        n = rho
        if m < 0:
            raise PadeDegeneracyError(
                "Pade degree reduction exhausted the numerator; "
                "try a smaller denominator order")
    if n > 0:
        # drop leading near-zero denominator coefficients
        lead = 0
        bmax = np.abs(b).max()
        while lead < b.size - 1 and abs(b[lead]) < 1e-13 * bmax:
            lead += 1
        b = b[lead:]
        m = max(m - lead, 0)
        n = b.size - 1
        if abs(b[0]) < 1e-13 * np.abs(b).max():
            raise PadeDegeneracyError(
                "singular Pade denominator (b0 ~ 0); try smaller M")
        a = np.zeros(m + 1)
        for k in range(m + 1):
            jmax = min(k, n)
            a[k] = np.dot(b[: jmax + 1], c[k - np.arange(jmax + 1)])
        a = a / b[0]
        b = b / b[0]
    return PadeApproximant(a, b, (m, n))
