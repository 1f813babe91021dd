import numpy as np
import pytest

from heisencorr.correlation import CorrelationMatrix, TimeGrid
from heisencorr.errors import ConfigError
from heisencorr.grid import PotentialSpec, RadialGrid, build_ground_state
from heisencorr.model import (CrossTerms, IonizationProfile, RateProvider,
                              assemble_model, cross_terms, ionization_profile,
                              model_correlation, quasistatic_rate)
from heisencorr.oracles import hydrogen_1s_moments, volkov_zz
from heisencorr.pulse import PulseParams


def test_quasistatic_rate_values():
    assert quasistatic_rate(0.0) == 0.0
    # high-precision evaluation of (4/E) exp(-2/(3E)) at E = 0.06
    assert quasistatic_rate(0.06) == pytest.approx(9.9635590165209637e-4,
                                                   rel=1e-12)
    e = np.linspace(1e-3, 0.2, 400)
    assert np.all(np.diff(quasistatic_rate(e)) > 0)  # monotone in the field
    with pytest.raises(ValueError):
        quasistatic_rate(-0.1)


def test_rate_table_round_trip(tmp_path):
    t = np.linspace(0.0, 100.0, 11)
    w = np.abs(np.sin(t / 7)) * 1e-3
    path = tmp_path / "rates.tsv"
    np.savetxt(path, np.column_stack([t, w]))
    prov = RateProvider.from_table(path)
    assert np.allclose(prov.rates(None, t), w, rtol=1e-15)  # exact at nodes
    mid = 0.5 * (t[3] + t[4])
    assert prov.rates(None, np.array([mid]))[0] == pytest.approx(
        0.5 * (w[3] + w[4]), rel=1e-12)
    with pytest.raises(ConfigError):
        prov.rates(None, np.array([150.0]))  # outside the table


def test_rate_provider_validation(tmp_path):
    with pytest.raises(ConfigError):
        RateProvider("magic")
    with pytest.raises(ConfigError):
        RateProvider("table", np.array([0.0, 1.0, 1.0]),
                     np.array([0.0, 1.0, 2.0]))  # not strictly increasing
    with pytest.raises(ConfigError):
        RateProvider("table", np.array([0.0, 1.0]), np.array([0.0, -1.0]))


def test_nonadiabatic_rate_is_explicitly_unavailable():
    prov = RateProvider("yudin_ivanov")
    with pytest.raises(ConfigError, match="not implemented"):
        prov.rates(PulseParams(0.06, 0.057), np.array([1.0]))


def test_ionization_profile_basics():
    pls = PulseParams(0.06, 0.057, 1.0)
    tg = TimeGrid(16, pls.duration)
    prof = ionization_profile(pls, RateProvider.quasistatic(), tg)
    assert prof.p[0] == 0.0
    assert np.all(np.diff(prof.p) >= 0)
    assert prof.w[0] == 0.0  # zero field at the pulse edges
    # quadrature convergence: doubling the samples barely moves P(T1)
    prof2 = ionization_profile(pls, RateProvider.quasistatic(), tg,
                               refine=128)
    assert abs(prof.p[-1] - prof2.p[-1]) <= 1e-6 * prof2.p[-1]


def test_ionization_profile_zero_field():
    pls = PulseParams(0.0, 0.057, 1.0)
    tg = TimeGrid(8, pls.duration)
    prof = ionization_profile(pls, RateProvider.quasistatic(), tg)
    assert np.all(prof.p == 0.0) and np.all(prof.w == 0.0)


def test_ionization_profile_saturation_warns_not_clamps():
    tg = TimeGrid(8, 10.0)
    prov = RateProvider("table", np.array([0.0, 10.0]), np.array([0.3, 0.3]))
    with pytest.warns(UserWarning, match="> 1"):
        prof = ionization_profile(None, prov, tg)
    assert prof.p[-1] == pytest.approx(3.0, rel=1e-12)  # not clamped


def test_cross_terms_hydrogen_initial_values():
    grid = RadialGrid.from_rmax(0.05, 30.0, absorber_fraction=0.2)
    tg = TimeGrid(4, 2.0)
    cr = cross_terms(PotentialSpec.coulomb(), grid, tg, n_l=3, dt=0.01)
    assert cr.a[0] == pytest.approx(1.0, abs=1e-3)  # <z^2>
    assert cr.b[0] == pytest.approx(0.5j, abs=1e-3)  # <z p_z>
    assert np.all(np.abs(cr.a) <= np.abs(cr.a[0]) + 1e-12)  # Cauchy-Schwarz


def test_cross_terms_harmonic_oscillator():
    # z phi0 is a single excitation: a(t) = (1/2 Omega) e^{-i Omega t}
    grid = RadialGrid.from_rmax(0.01, 10.0, absorber_fraction=0.2)
    tg = TimeGrid(6, 5.0)
    cr = cross_terms(PotentialSpec.harmonic(1.0), grid, tg, n_l=3, dt=0.002)
    ref = 0.5 * np.exp(-1j * tg.times)
    assert np.max(np.abs(cr.a - ref)) < 1e-4


@pytest.fixture()
def synthetic_decomposition():
    pls = PulseParams(0.06, 0.057, 1.0)
    tg = TimeGrid(12, pls.duration)
    t = tg.times
    prof = ionization_profile(pls, RateProvider.quasistatic(), tg)
    cross = CrossTerms(tg, np.exp(-0.5j * t), 0.5j * np.exp(-0.5j * t))
    c0 = CorrelationMatrix("zz", "free", tg,
                           np.exp(-0.5j * (t[:, None] - t[None, :])))
    return assemble_model(c0, cross, prof, hydrogen_1s_moments()), prof, cross, c0


def test_model_zero_constant_reduces_to_field_free(synthetic_decomposition):
    d, _, _, c0 = synthetic_decomposition
    m = model_correlation(d, 0.0)
    assert np.array_equal(m.values, c0.values)
    assert m.source == "model"
    assert m.meta["c"] == 0.0


def test_model_bilinear_term_matches_free_motion_oracle(synthetic_decomposition):
    d, prof, _, _ = synthetic_decomposition
    mom = hydrogen_1s_moments()
    t = d.c0.grid.times
    p = prof.p
    for i in (3, 7, 11):
        for j in (2, 6, 10):
            assert d.q_mat[i, j] / (p[i] * p[j]) == pytest.approx(
                volkov_zz(mom, t[j], t[i]), rel=1e-12)


def test_model_is_exactly_quadratic_in_c(synthetic_decomposition):
    d, _, _, _ = synthetic_decomposition
    m0 = model_correlation(d, 0.0).values
    m1 = model_correlation(d, 0.4).values
    m2 = model_correlation(d, 0.8).values
    # second difference in c is constant: m2 - 2 m1 + m0 = 2 (0.4)^2 q
    assert np.max(np.abs((m2 - 2 * m1 + m0) - 2 * 0.16 * d.q_mat)) < 1e-12


def test_rate_rescaling_covariance(synthetic_decomposition):
    d, prof, cross, c0 = synthetic_decomposition
    scaled = IonizationProfile(prof.tgrid, 10 * prof.w, 10 * prof.p)
    d10 = assemble_model(c0, cross, scaled, hydrogen_1s_moments())
    a = model_correlation(d, 0.37).values
    b = model_correlation(d10, 0.037).values
    assert np.max(np.abs(a - b)) < 1e-12


def test_assemble_model_rejects_grid_mismatch(synthetic_decomposition):
    d, prof, cross, c0 = synthetic_decomposition
    other = TimeGrid(12, 55.0)
    bad = CrossTerms(other, cross.a, cross.b)
    with pytest.raises(ValueError):
        assemble_model(c0, bad, prof, hydrogen_1s_moments())


def test_model_correlation_rejects_non_finite_constant(synthetic_decomposition):
    d, _, _, _ = synthetic_decomposition
    with pytest.raises(ValueError):
        model_correlation(d, np.nan)
