import numpy as np
import pytest

from tpslab import qla
from tpslab.diagnostics import factorizability
from tpslab.errors import BadFactorization, DimensionMismatch, IndexOutOfRange, NonUnitaryBasis, OddBathDimension
from tpslab.hamiltonians import PAULI, XxChainSpec, build_xx_chain, pauli_site_operator, xx_free_fermion_oracle
from tpslab.tps import (
    ProductState,
    TpsDescriptor,
    dft_system_basis,
    embed_product,
    fermion_mode_creators,
    fock_states,
    fermion_mode_tps,
    jordan_wigner_creators,
    site_tps,
    tps1_from_spectrum,
    tps2_from_spectrum,
    tps_from_basis,
)


class TestDescriptor:
    def test_rejects_non_unitary(self):
        with pytest.raises(NonUnitaryBasis):
            TpsDescriptor(m=2, n=2, frame=2 * np.eye(4))

    def test_rejects_bad_shape(self):
        with pytest.raises(BadFactorization):
            TpsDescriptor(m=2, n=3, frame=np.eye(4))
        with pytest.raises(BadFactorization):
            TpsDescriptor(m=1, n=4, frame=np.eye(4))

    def test_frame_read_only(self, tps1_12):
        with pytest.raises(ValueError):
            tps1_12.frame[0, 0] = 1

    def test_json_roundtrip(self, tps2_12, tmp_path):
        path = tmp_path / "frame.json"
        tps2_12.save(path)
        back = TpsDescriptor.load(path)
        assert (back.m, back.n, back.label) == (3, 4, "tps2")
        assert np.array_equal(back.frame, tps2_12.frame)

    def test_json_layout(self):
        doc = TpsDescriptor(m=2, n=2, frame=np.diag([1, 1j, 1, 1])).to_json()
        assert doc["frame"][1][1] == [0.0, 1.0]
        assert doc["frame"][0][1] == [0.0, 0.0]


class TestEigenTps:
    def test_tps1_cells_are_eigenstates(self, gue12, tps1_12):
        for l in range(12):
            assert np.array_equal(tps1_12.cell(l // 4, l % 4), gue12.frame[:, l])

    def test_assignment(self, gue12):
        assign = np.roll(np.arange(12), 1)
        tps = tps1_from_spectrum(gue12, 3, 4, assign)
        assert np.array_equal(tps.frame[:, 11], gue12.frame[:, 0])
        assert np.array_equal(tps.frame[:, 0], gue12.frame[:, 1])
        with pytest.raises(ValueError):
            tps1_from_spectrum(gue12, 3, 4, [0] * 12)

    def test_factorization_errors(self, gue12):
        with pytest.raises(BadFactorization):
            tps1_from_spectrum(gue12, 5, 2)
        with pytest.raises(OddBathDimension):
            tps2_from_spectrum(gue12, 4, 3)

    def test_tps2_unitary_and_structure(self, gue12, tps2_12):
        assert qla.unitarity_residual(tps2_12.frame) <= 1e-12
        # first half columns untouched
        for i in range(3):
            for j in range(2):
                np.testing.assert_array_equal(tps2_12.cell(i, j), gue12.frame[:, i * 4 + j])
        # second half: explicit DFT sum
        for i in range(3):
            for j in (2, 3):
                expected = sum(np.exp(2j * np.pi * i * k / 3) * gue12.frame[:, k * 4 + j] for k in range(3)) / np.sqrt(3)
                np.testing.assert_allclose(tps2_12.cell(i, j), expected, atol=1e-14)

    def test_eigenstates_factorize(self, gue12, tps1_12, tps2_12):
        assert factorizability(gue12, tps1_12) <= 1e-12
        assert factorizability(gue12, tps2_12) <= 1e-12

    def test_tps2_eigenstates_are_dft_products(self, gue12, tps2_12):
        # E_{k,j} for j >= n/2 equals phi~_k (x) chi_j
        rotated = dft_system_basis(3)
        for k in range(3):
            psi = embed_product(ProductState(rotated[:, k], np.eye(4)[3]), tps2_12)
            assert abs(np.vdot(psi, gue12.frame[:, k * 4 + 3])) == pytest.approx(1, abs=1e-12)

    def test_dft_system_basis_unbiased(self):
        f = dft_system_basis(4)
        np.testing.assert_allclose(np.abs(f) ** 2, 0.25, atol=1e-15)


class TestSiteTps:
    def test_reduced_operator(self):
        N = 4
        psi = np.random.default_rng(0).normal(size=(16, 2)) @ [1, 1j]
        psi /= np.linalg.norm(psi)
        for site in range(1, N + 1):
            tps = site_tps(N, site)
            rho = qla.reduce_pure(psi, tps)
            for axis in "xyz":
                op = pauli_site_operator(N, site, axis)
                full = np.vdot(psi, op @ psi).real
                assert np.trace(rho @ PAULI[axis]).real == pytest.approx(full, abs=1e-12)

    def test_range(self):
        with pytest.raises(IndexOutOfRange):
            site_tps(3, 0)


class TestFermions:
    def test_jordan_wigner_anticommutation(self):
        ops = jordan_wigner_creators(3)
        for a in range(3):
            for b in range(3):
                anti = ops[a] @ ops[b].conj().T + ops[b].conj().T @ ops[a]
                np.testing.assert_allclose(anti, np.eye(8) * (a == b), atol=1e-15)
                np.testing.assert_allclose(ops[a] @ ops[b] + ops[b] @ ops[a], 0, atol=1e-15)

    def test_mode_hamiltonian(self):
        spec = XxChainSpec(N=4, h=0.3)
        basis, _ = xx_free_fermion_oracle(spec)
        creators = fermion_mode_creators(basis)
        rebuilt = sum(e * (c @ c.conj().T - 0.5 * np.eye(16)) for e, c in zip(basis.mode_energies, creators))
        np.testing.assert_allclose(rebuilt, build_xx_chain(spec), atol=1e-13)

    def test_fock_states_diagonalize(self):
        spec = XxChainSpec(N=4, h=0.3)
        basis, _ = xx_free_fermion_oracle(spec)
        states, occ = fock_states(basis)
        h = build_xx_chain(spec)
        assert qla.unitarity_residual(states) <= 1e-12
        energies = (occ - 0.5) @ basis.mode_energies
        np.testing.assert_allclose(states.conj().T @ h @ states, np.diag(energies), atol=1e-12)

    def test_mode_tps_occupation(self):
        basis, _ = xx_free_fermion_oracle(XxChainSpec(N=4, h=0.3))
        creators = fermion_mode_creators(basis)
        for mode in (1, 3):
            tps = fermion_mode_tps(basis, mode)
            number = creators[mode - 1] @ creators[mode - 1].conj().T
            # the system row encodes the occupation of the chosen mode
            for i in range(2):
                for j in range(tps.n):
                    v = tps.cell(i, j)
                    assert np.vdot(v, number @ v).real == pytest.approx(i, abs=1e-12)
        with pytest.raises(IndexOutOfRange):
            fermion_mode_tps(basis, 5)


def test_embed_product(tps1_12):
    ps = ProductState(np.eye(3)[1], np.eye(4)[2])
    np.testing.assert_array_equal(embed_product(ps, tps1_12), tps1_12.cell(1, 2))
    with pytest.raises(DimensionMismatch):
        embed_product(ProductState(np.eye(2)[0], np.eye(4)[0]), tps1_12)
    with pytest.raises(ValueError):
        ProductState(np.array([1.0, 1.0]), np.eye(2)[0])


def test_tps_from_basis_checks():
    with pytest.raises(NonUnitaryBasis):
        tps_from_basis(np.ones((4, 4)), 2, 2)
    with pytest.raises(DimensionMismatch):
        tps_from_basis(np.ones((4, 2)), 2, 2)
