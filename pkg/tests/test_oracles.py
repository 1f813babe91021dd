import numpy as np
import pytest
from scipy.integrate import quad

from heisencorr.correlation import CorrelationMatrix, TimeGrid, velocity_from_zz
from heisencorr.oracles import SecondMoments, ho_zz, hydrogen_1s_moments, \
    volkov_zz


def test_moment_invariants_enforced():
    with pytest.raises(ValueError):
        SecondMoments(-1.0, 0.5j, -0.5j, 1 / 3)  # <z^2> not positive
    with pytest.raises(ValueError):
        SecondMoments(1.0, 0.5j, -0.5j, -1 / 3)  # <p^2> not positive
    with pytest.raises(ValueError):
        SecondMoments(1.0, 0.5j, 0.5j, 1 / 3)  # breaks m_zp = conj(m_pz)
    with pytest.raises(ValueError):
        SecondMoments(1.0, 0.4j, -0.4j, 1 / 3)  # breaks [z, p_z] = i


def test_hydrogen_moments_against_radial_quadrature():
    # 1s radial density 4 r^2 e^{-2r}: <r^2> = 3, so isotropy gives <z^2> = 1
    r2, _ = quad(lambda r: 4.0 * r**4 * np.exp(-2 * r), 0, 40)
    mom = hydrogen_1s_moments()
    assert mom.m_zz == pytest.approx(r2 / 3, rel=1e-10)
    # virial: <p^2> = -2 E = 1, isotropy gives <p_z^2> = 1/3
    assert mom.m_pp == pytest.approx(1 / 3, rel=1e-14)
    # stationarity: Re<z p_z> = 0; commutator fixes the imaginary part
    assert mom.m_zp == pytest.approx(0.5j, abs=1e-14)
    assert mom.m_pz == pytest.approx(-0.5j, abs=1e-14)


def test_volkov_zz_values():
    mom = hydrogen_1s_moments()
    assert volkov_zz(mom, 0.0, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert volkov_zz(mom, 2.0, 1.0) == pytest.approx(5 / 3 + 0.5j, abs=1e-14)


def test_volkov_zz_hermitian_symmetry():
    mom = hydrogen_1s_moments()
    rng = np.random.default_rng(7)
    for t1, t2 in rng.uniform(0, 100, size=(20, 2)):
        assert volkov_zz(mom, t1, t2) == pytest.approx(
            np.conj(volkov_zz(mom, t2, t1)), abs=1e-12)


def test_ho_zz_values():
    assert ho_zz(1.0, 3.7, 3.7) == pytest.approx(0.5, abs=1e-15)
    assert ho_zz(1.0, 1.0, 1.0 + np.pi) == pytest.approx(-0.5, abs=1e-14)
    t = np.linspace(0, 20, 50)
    mat = ho_zz(2.0, t[None, :], t[:, None])
    assert np.allclose(np.abs(mat), 0.25)  # pure phase at |.| = 1/(2 Omega)
    with pytest.raises(ValueError):
        ho_zz(0.0, 0.0, 1.0)


def test_ho_zz_mixed_partial_matches_velocity_route():
    # d^2/dt1 dt2 of e^{-i O (t2-t1)}/(2 O) = (O/2) e^{-i O (t2-t1)},
    # i.e. the oscillator velocity correlation; check the finite-difference
    # velocity route against it on a sampled grid
    omega_ho = 1.0
    tg = TimeGrid(128, 0.2)
    t = tg.times
    zz = CorrelationMatrix("zz", "oracle", tg,
                           ho_zz(omega_ho, t[None, :], t[:, None]))
    vv = velocity_from_zz(zz)
    ref = (omega_ho / 2) * np.exp(-1j * omega_ho * (t[:, None] - t[None, :]))
    err = np.abs(vv.values[1:-1, 1:-1] - ref[1:-1, 1:-1])
    assert np.max(err) < 1e-6
