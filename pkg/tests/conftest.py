import numpy as np
import pytest

from srblab import maps, measure, response, tangent

HENON_A = 1.4


@pytest.fixture(scope="session")
def henon_family():
    return maps.get_family("henon")


@pytest.fixture(scope="session")
def henon_measure(henon_family):
    return measure.srb_sample(henon_family, HENON_A, transient=2000,
                              length=20_000, ensemble=8, seed=1)


@pytest.fixture(scope="session")
def henon_orbit(henon_family):
    x0 = maps.iterate(henon_family, HENON_A, np.array([0.1, 0.1]), 2000)[-1]
    return maps.iterate(henon_family, HENON_A, x0, 102_000)


@pytest.fixture(scope="session")
def henon_splitting(henon_family, henon_orbit):
    coc = tangent.TangentCocycle.from_orbit(henon_family, HENON_A, henon_orbit)
    return coc, tangent.compute_clvs(coc, warmup=1000)


@pytest.fixture(scope="session")
def cat_orbit():
    fam = maps.get_family("cat_translate")
    return fam, maps.iterate(fam, 0.0, np.array([0.2357, 0.7113]), 200_000)


@pytest.fixture(scope="session")
def catshear_split():
    """Large-sample susceptibility split on the sheared torus family.

    Shared by the response-reconstruction and linear-response acceptance
    checks (same data by design: the reconstruction validates the series
    that the radius fit consumes)."""
    fam = maps.get_family("cat_shear")
    alpha = 0.25
    emp = measure.srb_sample(fam, alpha, transient=500, length=50_000,
                             ensemble=16, seed=5)
    phi = maps.get_observable("bump", 2)
    X = maps.PerturbationField(fam, alpha)
    split = response.stable_unstable_split(emp, X, phi, 12)
    return fam, alpha, phi, split
