import numpy as np
import pytest

from tpslab import hamiltonians as hm
from tpslab.errors import DimensionOverflow, IndexOutOfRange
from tpslab.qla import eig_hermitian, hermiticity_residual


class TestXxChain:
    def test_two_sites(self):
        h = 0.7
        spec = eig_hermitian(hm.build_xx_chain(hm.XxChainSpec(N=2, h=h)))
        np.testing.assert_allclose(spec.eigenvalues, sorted([h, 0.5, -0.5, -h]), atol=1e-14)

    def test_matches_pauli_construction(self):
        N, h = 4, 0.3
        ref = sum(
            0.25 * (hm.pauli_site_operator(N, n, "x") @ hm.pauli_site_operator(N, n + 1, "x")
                    + hm.pauli_site_operator(N, n, "y") @ hm.pauli_site_operator(N, n + 1, "y"))
            for n in range(1, N)
        ) + 0.5 * h * sum(hm.pauli_site_operator(N, n, "z") for n in range(1, N + 1))
        np.testing.assert_allclose(hm.build_xx_chain(hm.XxChainSpec(N=N, h=h)), ref, atol=1e-15)

    @pytest.mark.parametrize("N,h", [(3, 0.0), (5, 0.5), (6, -0.2)])
    def test_free_fermion_spectrum(self, N, h):
        spec = eig_hermitian(hm.build_xx_chain(hm.XxChainSpec(N=N, h=h)))
        basis, energies = hm.xx_free_fermion_oracle(hm.XxChainSpec(N=N, h=h))
        np.testing.assert_allclose(spec.eigenvalues, energies, atol=1e-10)
        # mode energies in closed form
        eps = h + np.cos(np.arange(1, N + 1) * np.pi / (N + 1))
        np.testing.assert_allclose(basis.mode_energies, np.sort(eps), atol=1e-12)

    def test_conserves_magnetisation(self):
        h = hm.build_xx_chain(hm.XxChainSpec(N=5, h=0.4))
        sz = hm.total_sz(5)
        assert np.max(np.abs(h @ sz - sz @ h)) == 0

    def test_size_limits(self):
        with pytest.raises(DimensionOverflow):
            hm.XxChainSpec(N=13)
        with pytest.raises(DimensionOverflow):
            hm.XxChainSpec(N=1)
        with pytest.raises(DimensionOverflow):
            hm.build_xx_chain(hm.XxChainSpec(N=8), max_dim=128)


class TestCentralSpin:
    def test_two_bath_spins(self):
        spec = eig_hermitian(hm.build_central_spin(hm.CentralSpinSpec(N=2, g=(1.0, 0.5))))
        np.testing.assert_allclose(spec.eigenvalues, [-1.5, -1.5, -0.5, -0.5, 0.5, 0.5, 1.5, 1.5], atol=1e-15)

    def test_default_couplings(self):
        assert hm.CentralSpinSpec(N=3).g == (1.0, 0.5, 1 / 3)

    def test_is_diagonal_zz(self):
        N = 3
        h = hm.build_central_spin(hm.CentralSpinSpec(N=N))
        ref = sum(
            g * hm.pauli_site_operator(N + 1, 1, "z") @ hm.pauli_site_operator(N + 1, k + 2, "z")
            for k, g in enumerate(hm.CentralSpinSpec(N=N).g)
        )
        np.testing.assert_allclose(h, ref, atol=1e-15)

    def test_bad_couplings(self):
        with pytest.raises(ValueError):
            hm.CentralSpinSpec(N=2, g=(1.0,))


class TestRandom:
    def test_hermitian_and_reproducible(self):
        a = hm.build_random_gue(hm.RandomSpec(d=12, seed=7))
        b = hm.build_random_gue(hm.RandomSpec(d=12, seed=7))
        assert hermiticity_residual(a) == 0
        assert np.array_equal(a, b)
        assert not np.array_equal(a, hm.build_random_gue(hm.RandomSpec(d=12, seed=8)))

    def test_draw_order(self):
        rng = hm.philox_generator(3, 0)
        diag = rng.standard_normal(3)
        pairs = rng.standard_normal((3, 2))
        h = hm.build_random_gue(hm.RandomSpec(d=3, seed=3))
        np.testing.assert_array_equal(h.diagonal().real, diag)
        assert h[0, 1] == (pairs[0, 0] + 1j * pairs[0, 1]) / np.sqrt(2)
        assert h[1, 2] == (pairs[2, 0] + 1j * pairs[2, 1]) / np.sqrt(2)

    def test_second_moments(self):
        h = hm.build_random_gue(hm.RandomSpec(d=200, seed=1))
        off = h[np.triu_indices(200, 1)]
        assert np.mean(np.abs(off) ** 2) == pytest.approx(1.0, rel=0.02)
        assert np.mean(h.diagonal().real ** 2) == pytest.approx(1.0, rel=0.25)

    def test_nondegenerate(self):
        assert hm.min_level_gap(hm.build_random_gue(hm.RandomSpec(d=16, seed=11))) > 1e-6

    def test_bad_ensemble(self):
        with pytest.raises(ValueError):
            hm.RandomSpec(d=4, ensemble="GOE")


def test_philox_streams_independent():
    a = hm.philox_generator(5, 0).standard_normal(4)
    b = hm.philox_generator(5, 1).standard_normal(4)
    assert not np.allclose(a, b)
    np.testing.assert_array_equal(a, hm.philox_generator(5, 0).standard_normal(4))


def test_haar_vector_normalised():
    v = hm.haar_vector(hm.philox_generator(0), 9)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-15)


def test_site_operator_range():
    with pytest.raises(IndexOutOfRange):
        hm.pauli_site_operator(3, 4, "z")
    np.testing.assert_array_equal(hm.pauli_site_operator(2, 1, "z").diagonal().real, [1, 1, -1, -1])
