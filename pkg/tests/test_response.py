import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srblab import maps, measure, response
from srblab.errors import InsufficientDataError, ParameterError
from srblab.response import SusceptibilitySeries


@pytest.fixture(scope="module")
def cat_translate_measure():
    fam = maps.get_family("cat_translate")
    emp = measure.srb_sample(fam, 0.1, transient=500, length=20_000,
                             ensemble=8, seed=3)
    return fam, emp


def _quadrature_kappa(fam, alpha, X_fn, obs, N, grid=400):
    """Dense-grid quadrature oracle for kappa_n on a Lebesgue-invariant
    torus family: kappa_n = int X . (Df^n)^T grad(phi)(f^n x) dx."""
    t = (np.arange(grid) + 0.5) / grid
    xx, yy = np.meshgrid(t, t, indexing="ij")
    pts = np.stack([xx.ravel(), yy.ravel()], axis=-1)
    X = X_fn(pts)
    out = np.empty(N + 1)
    cur = pts
    V = X.copy()
    for n in range(N + 1):
        g = obs.gradient(cur)
        out[n] = np.mean(np.sum(V * g, axis=-1))
        J = fam.jacobian(alpha, cur)
        V = np.einsum("sab,sb->sa", J, V)
        cur = fam.chart.reduce(fam.step(alpha, cur))
    return out


def test_kappa_matches_quadrature_oracle(cat_translate_measure):
    fam, emp = cat_translate_measure
    alpha = 0.1
    phi = maps.get_observable("bump", 2)
    X = maps.PerturbationField(fam, alpha)
    ser = response.susceptibility_coefficients(emp, X, phi, 6)
    v = np.asarray(fam.params["v"])
    oracle = _quadrature_kappa(fam, alpha,
                               lambda p: np.broadcast_to(v, p.shape).copy(),
                               phi, 6)
    sig = np.abs(ser.coeffs - oracle) / ser.stderr
    assert np.all(sig < 3.5)


def test_kappa_adjoint_identity(cat_translate_measure):
    fam, emp = cat_translate_measure
    phi = maps.get_observable("bump", 2)
    X = maps.PerturbationField(fam, 0.1)
    ser = response.susceptibility_coefficients(emp, X, phi, 8)
    adj = response.kappa_adjoint(emp, X, phi, 8)
    scale = np.abs(ser.coeffs).max()
    assert np.abs(ser.coeffs - adj).max() < 1e-10 * max(scale, 1.0)


def test_kappa_linearity_in_field(cat_translate_measure):
    """kappa is linear in X: scaling and adding fields act coefficient-wise."""
    fam, emp = cat_translate_measure
    phi = maps.get_observable("cos_1_0", 2)
    two_pi = 2 * np.pi

    def f1(x):
        return np.stack([np.sin(two_pi * x[..., 1]),
                         np.zeros(x.shape[:-1])], axis=-1)

    def f2(x):
        return np.stack([np.zeros(x.shape[:-1]),
                         np.cos(two_pi * x[..., 0])], axis=-1)

    a, b = 0.7, -1.3
    X1 = maps.ExplicitField(f1, 2)
    X2 = maps.ExplicitField(f2, 2)
    X12 = maps.ExplicitField(lambda x: a * f1(x) + b * f2(x), 2)
    k1 = response.susceptibility_coefficients(emp, X1, phi, 5).coeffs
    k2 = response.susceptibility_coefficients(emp, X2, phi, 5).coeffs
    k12 = response.susceptibility_coefficients(emp, X12, phi, 5).coeffs
    assert np.abs(k12 - (a * k1 + b * k2)).max() < 1e-10


def test_kappa_finite_and_errors_positive(catshear_split):
    _, _, _, split = catshear_split
    for ser in (split.direct, split.stable, split.unstable):
        assert np.all(np.isfinite(ser.coeffs))
        assert np.all(ser.stderr > 0)


def test_kappa_overflow_truncates():
    fam = maps.get_family("henon")
    emp = measure.srb_sample(fam, 1.4, transient=1000, length=3000,
                             ensemble=4, seed=2)
    phi = maps.get_observable("coord_0", 2)
    X = maps.PerturbationField(fam, 1.4)
    ser = response.susceptibility_coefficients(emp, X, phi, 900)
    assert ser.meta["truncated_at"] is not None
    assert np.all(np.isfinite(ser.coeffs))


def test_radius_requires_enough_coefficients():
    ser = SusceptibilitySeries(np.ones(5), np.full(5, 0.1), {})
    with pytest.raises(ParameterError):
        response.radius_estimate(ser)


def test_radius_zero_series_flag():
    ser = SusceptibilitySeries(np.zeros(12), np.zeros(12), {})
    est = response.radius_estimate(ser)
    assert est.value == np.inf
    assert est.flag == "zero-series"


@pytest.mark.parametrize("r", [0.5, 1.2, 3.0])
@pytest.mark.parametrize("method", ["root-test", "pade-pole"])
def test_radius_calibration_geometric(r, method):
    n = np.arange(16)
    coeffs = 2.0 * r ** (-n.astype(float))
    ser = SusceptibilitySeries(coeffs, np.full(16, 1e-10), {})
    est = response.radius_estimate(ser, method=method)
    assert not est.indeterminate
    assert est.value == pytest.approx(r, rel=0.02)


def test_radius_noise_dominated_indeterminate():
    rng = np.random.default_rng(0)
    ser = SusceptibilitySeries(rng.standard_normal(12) * 1e-6,
                               np.full(12, 1e-4), {})
    est = response.radius_estimate(ser)
    assert est.indeterminate


def test_radius_lower_bound_when_tail_below_noise():
    # resolved head decaying into a flat noise floor
    coeffs = np.array([1e-1, 4e-1, 1e-5, -2e-5, 1e-5, 8e-6, -1e-5,
                       5e-6, -3e-6, 1e-5, -8e-6, 4e-6])
    ser = SusceptibilitySeries(coeffs, np.full(12, 1e-5), {})
    est = response.radius_estimate(ser)
    assert est.flag == "lower-bound-tail-below-noise"
    assert est.value > 1.0
    assert est.ci[0] > 1.0 and est.ci[1] == np.inf


@given(st.floats(1.3, 4.0), st.floats(0.05, 2.0))
@settings(max_examples=30, deadline=None)
def test_radius_interval_contains_estimate(r, c):
    n = np.arange(14)
    ser = SusceptibilitySeries(c * r ** (-n.astype(float)),
                               np.full(14, 1e-11), {})
    est = response.radius_estimate(ser)
    assert est.value > 0
    assert est.ci[0] <= est.value <= est.ci[1]


def test_psi_eval_truncated_and_pade():
    n = np.arange(16)
    ser = SusceptibilitySeries(0.5 ** n, np.full(16, 1e-9), {})
    t = response.psi_eval(ser, 0.5, mode="truncated")
    assert t.value == pytest.approx(4.0 / 3.0, abs=1e-4)
    p = response.psi_eval(ser, 1.0, mode=("pade", 3, 3))
    assert p.value == pytest.approx(2.0, abs=1e-6)
    assert p.error > 0
    assert np.min(np.abs(p.poles)) == pytest.approx(2.0, rel=1e-6)


def test_finite_difference_translate_family_zero_response():
    """Affine torus family: the invariant measure never moves, so both the
    derivative and the truncated series sum vanish within errors."""
    fam = maps.get_family("cat_translate")
    sampling = response.SamplingConfig(transient=500, length=20_000,
                                       ensemble=8, seed=11)
    phi = maps.get_observable("bump", 2)
    fd = response.finite_difference_response(fam, 0.1, 0.05, phi, sampling)
    assert abs(fd.derivative) < 3 * fd.stderr
    emp = measure.srb_sample(fam, 0.1, transient=500, length=20_000,
                             ensemble=8, seed=12)
    X = maps.PerturbationField(fam, 0.1)
    ser = response.susceptibility_coefficients(emp, X, phi, 8)
    psi1, err1 = ser.truncated_sum(1.0)
    assert abs(psi1) < 3 * err1


def test_finite_difference_richardson_runs():
    fam = maps.get_family("cat_shear")
    sampling = response.SamplingConfig(transient=300, length=5_000,
                                       ensemble=4, seed=13)
    phi = maps.get_observable("bump", 2)
    fd = response.finite_difference_response(fam, 0.2, 0.1, phi, sampling,
                                             richardson=True)
    assert np.isfinite(fd.derivative) and fd.stderr > 0


def test_volume_identity_two_analytic_fields():
    two_pi = 2 * np.pi
    fam = maps.get_family("cat_translate")
    emp = measure.srb_sample(fam, 0.0, transient=200, length=20_000,
                             ensemble=8, seed=11)
    phi = maps.get_observable("cos_1_0", 2)

    def f1(x):
        return np.stack([np.sin(two_pi * x[..., 1]),
                         np.cos(two_pi * x[..., 0])], axis=-1) / two_pi

    def f2(x):
        return np.stack([np.sin(two_pi * x[..., 0]),
                         np.cos(two_pi * x[..., 1])], axis=-1) / two_pi

    def d2(x):
        return np.cos(two_pi * x[..., 0]) - np.sin(two_pi * x[..., 1])

    for X in (maps.ExplicitField(f1, 2, lambda x: np.zeros(x.shape[:-1])),
              maps.ExplicitField(f2, 2, d2)):
        rep = response.volume_preserving_identity(emp, X, phi, 10)
        assert rep.passed
        assert max(r.sigma_units for r in rep.rows) < 3.0


def test_volume_identity_rejects_dissipative_family(henon_measure):
    phi = maps.get_observable("coord_0", 2)
    X = maps.PerturbationField(maps.get_family("henon"), 1.4)
    with pytest.raises(ParameterError):
        response.volume_preserving_identity(henon_measure, X, phi, 5)


def test_split_reconstruction_and_stable_decay(catshear_split):
    fam, alpha, phi, split = catshear_split
    assert np.all(split.reconstruction_sigma()[:11] < 3.0)
    # stable-term decay is governed by the stable exponent (lambda_s is
    # close to -0.98 here); mixing modulation can only steepen it
    from srblab.stats import linear_fit
    mags = np.abs(split.stable.coeffs[1:])
    n = np.arange(1, split.stable.coeffs.size)
    _, rate, _, _ = linear_fit(n, np.log(mags))
    assert 0.7 < rate / -0.98 < 2.0
    assert 0.0 <= split.excluded_fraction < 0.5
    assert split.min_angle > 0.0


def test_split_unstable_divergence_vanishes_for_translate():
    fam = maps.get_family("cat_translate")
    emp = measure.srb_sample(fam, 0.1, transient=500, length=4000,
                             ensemble=8, seed=5)
    phi = maps.get_observable("cos_1_0", 2)
    X = maps.PerturbationField(fam, 0.1)
    res = response.stable_unstable_split(emp, X, phi, 6)
    # constant field, linear map: the unstable divergence term is zero
    assert np.abs(res.unstable.coeffs).max() < 1e-4
