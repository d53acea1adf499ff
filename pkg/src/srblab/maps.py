"""Phase spaces, built-in diffeomorphism families, observables and
perturbation vector fields.

All map callables are vectorized: they accept points of shape (..., d) and
return arrays with matching leading dimensions.  Torus coordinates are kept
reduced to [0, 1) by floor subtraction after every step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import OrbitEscapeError, ParameterError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Chart:
    """Per-coordinate wrap flags.  wrap[i] True means coordinate i lives on
    the unit circle and is reduced mod 1."""

    wrap: tuple

    def __post_init__(self):
        object.__setattr__(self, "_mask", np.array(self.wrap, dtype=bool))
        object.__setattr__(self, "_all_wrap", all(self.wrap))

    @property
    def dimension(self):
        return len(self.wrap)

    @property
    def any_wrap(self):
        return any(self.wrap)

    def reduce(self, x):
        x = np.asarray(x, dtype=float)
        if not self.any_wrap:
            return x
        if self._all_wrap:
            return x - np.floor(x)
        out = x.copy()
        out[..., self._mask] -= np.floor(out[..., self._mask])
        return out

    def difference(self, a, b):
        """Minimal-image a - b (wrapped coordinates mapped to [-1/2, 1/2))."""
        d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        if not self.any_wrap:
            return d
        if self._all_wrap:
            return d - np.round(d)
        d[..., self._mask] -= np.round(d[..., self._mask])
        return d


def flat(d):
    return Chart(wrap=(False,) * d)


def torus(d):
    return Chart(wrap=(True,) * d)


@dataclass(frozen=True)
class MapFamily:
    """A parametrized diffeomorphism family alpha -> f_alpha.

    step, jacobian and param_derivative take (alpha, x) with x of shape
    (..., d).  inverse, when present, satisfies step(alpha, inverse(alpha, y))
    == y to 1e-10.
    """

    name: str
    dimension: int
    chart: Chart
    step: Callable
    jacobian: Callable
    param_derivative: Callable
    inverse: Optional[Callable] = None
    volume_preserving: bool = False
    escape_radius: float = 100.0
    params: dict = field(default_factory=dict)

    def escaped(self, x):
        """Boolean mask over leading dims: non-finite or out of the basin."""
        x = np.asarray(x)
        bad = ~np.all(np.isfinite(x), axis=-1)
        if not self.chart.any_wrap:
            bad |= np.einsum("...i,...i->...", x, x) > self.escape_radius**2
        return bad


def iterate(family, alpha, x0, n):
    """Orbit [x0, f(x0), ..., f^n(x0)] as an (n+1, d) array."""
    if n < 0:
        raise ParameterError("n must be >= 0")
    x = family.chart.reduce(np.asarray(x0, dtype=float))
    if x.shape != (family.dimension,):
        raise ParameterError(f"x0 must have shape ({family.dimension},)")
    orbit = np.empty((n + 1, family.dimension))
    orbit[0] = x
    step = family.step
    # escape is detected after the loop: non-finite values propagate, so a
    # vectorized scan recovers the first bad step without per-step checks
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n):
            x = step(alpha, x)
            orbit[k + 1] = x
    bad = family.escaped(orbit)
    if bad.any():
        raise OrbitEscapeError(int(np.argmax(bad)))
    return orbit


def iterate_batch(family, alpha, x, n, out=None):
    """Advance a batch of points n steps; returns (n+1, m, d) history.

    Escaped members are frozen at nan from the escape step onward.
    """
    x = family.chart.reduce(np.asarray(x, dtype=float))
    m, d = x.shape
    hist = out if out is not None else np.empty((n + 1, m, d))
    hist[0] = x
    alive = ~family.escaped(x)
    for k in range(n):
        x = np.where(alive[:, None], family.step(alpha, np.where(alive[:, None], x, 0.0)), np.nan)
        newly = alive & family.escaped(x)
        if newly.any():
            alive = alive & ~newly
            x[~alive] = np.nan
        hist[k + 1] = x
    return hist


# ---------------------------------------------------------------------------
# Built-in families
# ---------------------------------------------------------------------------

CAT = np.array([[2.0, 1.0], [1.0, 1.0]])
CAT_INV = np.array([[1.0, -1.0], [-1.0, 2.0]])


def cat_translate(v=(1.0, 0.0)):
    """Arnold cat map composed with a translation alpha*v on the 2-torus.

    Lebesgue measure is invariant for every alpha.
    """
    v = np.asarray(v, dtype=float)
    chart = torus(2)

    def step(a, x):
        return chart.reduce(np.asarray(x) @ CAT.T + a * v)

    def jac(a, x):
        x = np.asarray(x)
        return np.broadcast_to(CAT, x.shape[:-1] + (2, 2)).copy()

    def d_alpha(a, x):
        x = np.asarray(x)
        return np.broadcast_to(v, x.shape).copy()

    def inverse(a, y):
        return chart.reduce((np.asarray(y) - a * v) @ CAT_INV.T)

    return MapFamily("cat_translate", 2, chart, step, jac, d_alpha, inverse,
                     volume_preserving=True, params={"v": tuple(v)})


def cat_shear():
    """Cat map plus a trigonometric shear alpha*(sin(2 pi x2)/(2 pi), 0).

    Uniformly hyperbolic for |alpha| well below 1; not volume preserving
    for alpha != 0.
    """
    chart = torus(2)

    def g(x):
        out = np.zeros_like(np.asarray(x, dtype=float))
        out[..., 0] = np.sin(TWO_PI * x[..., 1]) / TWO_PI
        return out

    def step(a, x):
        return chart.reduce(np.asarray(x) @ CAT.T + a * g(x))

    def jac(a, x):
        x = np.asarray(x)
        J = np.broadcast_to(CAT, x.shape[:-1] + (2, 2)).copy()
        J[..., 0, 1] += a * np.cos(TWO_PI * x[..., 1])
        return J

    def d_alpha(a, x):
        return g(np.asarray(x, dtype=float))

    def inverse(a, y, tol=1e-14, maxit=200):
        y = np.asarray(y, dtype=float)
        x = chart.reduce(y @ CAT_INV.T)
        for _ in range(maxit):
            x_new = chart.reduce((y - a * g(x)) @ CAT_INV.T)
            if np.max(np.abs(chart.difference(x_new, x))) < tol:
                return x_new
            x = x_new
        return x

    return MapFamily("cat_shear", 2, chart, step, jac, d_alpha, inverse)


def henon(b=0.3):
    """Henon family (x, y) -> (1 + y - a x^2, b x); alpha is the a parameter."""
    chart = flat(2)

    def step(a, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        out[..., 0] = 1.0 + x[..., 1] - a * x[..., 0] ** 2
        out[..., 1] = b * x[..., 0]
        return out

    def jac(a, x):
        x = np.asarray(x, dtype=float)
        J = np.zeros(x.shape[:-1] + (2, 2))
        J[..., 0, 0] = -2.0 * a * x[..., 0]
        J[..., 0, 1] = 1.0
        J[..., 1, 0] = b
        return J

    def d_alpha(a, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        out[..., 0] = -(x[..., 0] ** 2)
        return out

    def inverse(a, y):
        y = np.asarray(y, dtype=float)
        out = np.empty_like(y)
        out[..., 0] = y[..., 1] / b
        out[..., 1] = y[..., 0] - 1.0 + a * (y[..., 1] / b) ** 2
        return out

    return MapFamily("henon", 2, chart, step, jac, d_alpha, inverse,
                     params={"b": b})


def standard_map():
    """Chirikov standard map on the 2-torus, alpha is the kicking strength K.

    (p, t) -> (p + (K/2pi) sin(2 pi t), t + p') mod 1.  Area preserving.
    """
    chart = torus(2)

    def step(a, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        p1 = x[..., 0] + a / TWO_PI * np.sin(TWO_PI * x[..., 1])
        out[..., 0] = p1
        out[..., 1] = x[..., 1] + p1
        return chart.reduce(out)

    def jac(a, x):
        x = np.asarray(x, dtype=float)
        c = a * np.cos(TWO_PI * x[..., 1])
        J = np.empty(x.shape[:-1] + (2, 2))
        J[..., 0, 0] = 1.0
        J[..., 0, 1] = c
        J[..., 1, 0] = 1.0
        J[..., 1, 1] = 1.0 + c
        return J

    def d_alpha(a, x):
        x = np.asarray(x, dtype=float)
        s = np.sin(TWO_PI * x[..., 1]) / TWO_PI
        return np.stack([s, s], axis=-1)

    def inverse(a, y):
        y = np.asarray(y, dtype=float)
        t = y[..., 1] - y[..., 0]
        p = y[..., 0] - a / TWO_PI * np.sin(TWO_PI * t)
        return chart.reduce(np.stack([p, t], axis=-1))

    return MapFamily("standard_map", 2, chart, step, jac, d_alpha, inverse,
                     volume_preserving=True)


def coupled_henon(b=0.3, c=0.3):
    """Two Henon maps under convex image exchange of strength c; d = 4.

    Each new pair state is the mixture (1-c) F(p_i) + c F(p_j) of the two
    Henon images.  The synchronized subspace carries plain Henon dynamics,
    while transverse perturbations pick up the contraction factor |1-2c|
    per step; for c around 0.3 this yields a genuine four-dimensional
    attractor with three contracting directions, a candidate for a stable
    dimension above 1/2.
    """
    if abs(1.0 - 2.0 * c) < 1e-10:
        raise ParameterError("coupling c = 1/2 makes the exchange singular")
    chart = flat(4)

    def _henon_image(a, xc, yc):
        return 1.0 + yc - a * xc**2, b * xc

    def step(a, x):
        x = np.asarray(x, dtype=float)
        f1x, f1y = _henon_image(a, x[..., 0], x[..., 1])
        f2x, f2y = _henon_image(a, x[..., 2], x[..., 3])
        out = np.empty_like(x)
        out[..., 0] = (1.0 - c) * f1x + c * f2x
        out[..., 1] = (1.0 - c) * f1y + c * f2y
        out[..., 2] = (1.0 - c) * f2x + c * f1x
        out[..., 3] = (1.0 - c) * f2y + c * f1y
        return out

    def jac(a, x):
        x = np.asarray(x, dtype=float)
        J = np.zeros(x.shape[:-1] + (4, 4))
        d1 = -2.0 * a * x[..., 0]
        d2 = -2.0 * a * x[..., 2]
        J[..., 0, 0] = (1.0 - c) * d1
        J[..., 0, 1] = 1.0 - c
        J[..., 0, 2] = c * d2
        J[..., 0, 3] = c
        J[..., 1, 0] = (1.0 - c) * b
        J[..., 1, 2] = c * b
        J[..., 2, 0] = c * d1
        J[..., 2, 1] = c
        J[..., 2, 2] = (1.0 - c) * d2
        J[..., 2, 3] = 1.0 - c
        J[..., 3, 0] = c * b
        J[..., 3, 2] = (1.0 - c) * b
        return J

    def d_alpha(a, x):
        x = np.asarray(x, dtype=float)
        s1 = -(x[..., 0] ** 2)
        s2 = -(x[..., 2] ** 2)
        out = np.zeros_like(x)
        out[..., 0] = (1.0 - c) * s1 + c * s2
        out[..., 2] = (1.0 - c) * s2 + c * s1
        return out

    def inverse(a, y):
        y = np.asarray(y, dtype=float)
        den = 1.0 - 2.0 * c
        # unmix the exchanged images, then invert each Henon factor
        a1x = ((1.0 - c) * y[..., 0] - c * y[..., 2]) / den
        a1y = ((1.0 - c) * y[..., 1] - c * y[..., 3]) / den
        a2x = ((1.0 - c) * y[..., 2] - c * y[..., 0]) / den
        a2y = ((1.0 - c) * y[..., 3] - c * y[..., 1]) / den
        out = np.empty_like(y)
        out[..., 0] = a1y / b
        out[..., 1] = a1x - 1.0 + a * (a1y / b) ** 2
        out[..., 2] = a2y / b
        out[..., 3] = a2x - 1.0 + a * (a2y / b) ** 2
        return out

    return MapFamily("coupled_henon", 4, chart, step, jac, d_alpha, inverse,
                     params={"b": b, "c": c})


_FACTORIES = {
    "cat_translate": cat_translate,
    "cat_shear": cat_shear,
    "henon": henon,
    "standard_map": standard_map,
    "coupled_henon": coupled_henon,
}


def builtin_catalog():
    """All built-in families with default parameters."""
    return [factory() for factory in _FACTORIES.values()]


def get_family(name, params=None):
    if name not in _FACTORIES:
        raise ParameterError(f"unknown map family {name!r}; "
                             f"known: {sorted(_FACTORIES)}")
    return _FACTORIES[name](**(params or {}))


# ---------------------------------------------------------------------------
# Observables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Observable:
    name: str
    value: Callable
    gradient: Callable


def fourier_mode(p):
    """cos(2 pi p.x) with its exact gradient."""
    p = np.asarray(p, dtype=float)

    def value(x):
        return np.cos(TWO_PI * np.asarray(x) @ p)

    def gradient(x):
        x = np.asarray(x)
        s = -TWO_PI * np.sin(TWO_PI * x @ p)
        return s[..., None] * p

    tag = "_".join(f"{int(c)}" for c in p)
    return Observable(f"cos_{tag}", value, gradient)


def coordinate(i, d):
    def value(x):
        return np.asarray(x)[..., i]

    def gradient(x):
        x = np.asarray(x)
        out = np.zeros(x.shape)
        out[..., i] = 1.0
        return out

    return Observable(f"coord_{i}", value, gradient)


def product_x1x2():
    def value(x):
        x = np.asarray(x)
        return x[..., 0] * x[..., 1]

    def gradient(x):
        x = np.asarray(x)
        out = np.zeros(x.shape)
        out[..., 0] = x[..., 1]
        out[..., 1] = x[..., 0]
        return out

    return Observable("x1x2", value, gradient)


def bump(center, width):
    """Smooth bump exp(-1/(1 - r^2)) supported on |x - c| < width."""
    center = np.asarray(center, dtype=float)

    def value(x):
        x = np.asarray(x, dtype=float)
        s = np.einsum("...i,...i->...", x - center, x - center) / width**2
        out = np.zeros(s.shape)
        inside = s < 1.0
        out[inside] = np.exp(-1.0 / (1.0 - s[inside]))
        return out

    def gradient(x):
        x = np.asarray(x, dtype=float)
        diff = x - center
        s = np.einsum("...i,...i->...", diff, diff) / width**2
        out = np.zeros(x.shape)
        inside = s < 1.0
        f = np.zeros(s.shape)
        f[inside] = -np.exp(-1.0 / (1.0 - s[inside])) / (1.0 - s[inside]) ** 2
        out[inside] = f[inside, None] * (2.0 * diff[inside] / width**2)
        return out

    return Observable("bump", value, gradient)


def constant(c=1.0):
    def value(x):
        x = np.asarray(x)
        return np.full(x.shape[:-1], c)

    def gradient(x):
        x = np.asarray(x)
        return np.zeros(x.shape)

    return Observable("const", value, gradient)


def observable_catalog(dimension):
    if dimension < 2:
        raise ParameterError("dimension must be >= 2")
    p1 = np.zeros(dimension)
    p1[0] = 1.0
    p11 = np.zeros(dimension)
    p11[0] = 1.0
    p11[1] = 1.0
    obs = [
        fourier_mode(p1),
        fourier_mode(p11),
        coordinate(0, dimension),
        coordinate(1, dimension),
        product_x1x2(),
        bump(np.full(dimension, 0.5), 0.4),
        constant(),
    ]
    return obs


def get_observable(name, dimension):
    for obs in observable_catalog(dimension):
        if obs.name == name:
            return obs
    raise ParameterError(f"unknown observable {name!r} for dimension {dimension}")


# ---------------------------------------------------------------------------
# Perturbation field
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PerturbationField:
    """The vector field X with X(f x) = d f_alpha(x) / d alpha.

    along_orbit evaluates X at orbit[1:] using the preimages supplied by the
    orbit; at_points uses the family inverse when available.
    """

    family: MapFamily
    alpha: float

    def along_orbit(self, orbit):
        orbit = np.asarray(orbit)
        return self.family.param_derivative(self.alpha, orbit[..., :-1, :])

    @property
    def has_closed_form(self):
        return self.family.inverse is not None

    def at_points(self, y):
        if self.family.inverse is None:
            raise ParameterError(
                f"family {self.family.name} has no inverse; use along_orbit")
        y = self.family.chart.reduce(np.asarray(y, dtype=float))
        return self.family.param_derivative(self.alpha, self.family.inverse(self.alpha, y))

    def divergence(self, y, step=1e-6):
        """div X by central differences of the closed-form evaluator."""
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape[:-1])
        for i in range(self.family.dimension):
            e = np.zeros(self.family.dimension)
            e[i] = step
            out += (self.at_points(y + e)[..., i] - self.at_points(y - e)[..., i]) / (2 * step)
        return out


@dataclass(frozen=True)
class ExplicitField:
    """A vector field given in closed form, x -> X(x).

    div_fn, when supplied, is the analytic divergence; otherwise the
    divergence falls back to central differences.
    """

    fn: Callable
    dimension: int
    div_fn: Optional[Callable] = None

    def along_orbit(self, orbit):
        orbit = np.asarray(orbit)
        return self.fn(orbit[..., 1:, :])

    @property
    def has_closed_form(self):
        return True

    def at_points(self, y):
        return self.fn(np.asarray(y, dtype=float))

    def divergence(self, y, step=1e-6):
        y = np.asarray(y, dtype=float)
        if self.div_fn is not None:
            return self.div_fn(y)
        out = np.zeros(y.shape[:-1])
        for i in range(self.dimension):
            e = np.zeros(self.dimension)
            e[i] = step
            out += (self.fn(y + e)[..., i] - self.fn(y - e)[..., i]) / (2 * step)
        return out


def zero_field(family, alpha=0.0):
    """X identically zero (useful baseline)."""

    def d_alpha(a, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    fam = MapFamily(family.name + "_frozen", family.dimension, family.chart,
                    family.step, family.jacobian, d_alpha, family.inverse,
                    family.volume_preserving, family.escape_radius, dict(family.params))
    return PerturbationField(fam, alpha)
