import json

import numpy as np
import pytest

from tpslab import diagnostics as dg
from tpslab.dynamics import TimeGrid, Trajectory, diagonal_ensemble, reduced_trajectory
from tpslab.errors import DimensionMismatch, EmptyTrajectory, EmptyWindow, NonHermitianInput
from tpslab.hamiltonians import PAULI
from tpslab.qla import dft_frame, trace_distance
from tpslab.tps import ProductState, TpsDescriptor, dft_system_basis, embed_product, tps2_from_spectrum

from .conftest import random_state


class TestObservables:
    def test_validation(self):
        with pytest.raises(NonHermitianInput):
            dg.ObservableSet((np.array([[0, 1], [0, 0]]),))
        with pytest.raises(DimensionMismatch):
            dg.ObservableSet((np.eye(2), np.eye(3)))
        with pytest.raises(ValueError):
            dg.ObservableSet((np.eye(2),), epsilon=0)

    def test_projectors(self):
        obs = dg.ObservableSet.projectors(np.eye(3))
        assert len(obs.operators) == 3 and obs.dim == 3

    def test_variance_examples(self):
        up = np.diag([1.0, 0.0])
        plus = np.full((2, 2), 0.5)
        assert dg.variance(up, PAULI["z"]) == pytest.approx(0)
        assert dg.variance(plus, PAULI["z"]) == pytest.approx(1)
        assert dg.variance(np.eye(2) / 2, PAULI["x"]) == pytest.approx(1)

    def test_quasiclassicality(self):
        obs = dg.ObservableSet((PAULI["z"],), epsilon=0.1)
        assert dg.quasiclassicality(np.array([1, 0]), obs).in_set
        res = dg.quasiclassicality(np.array([1, 1]) / np.sqrt(2), obs)
        assert not res.in_set and res.max_var == pytest.approx(1)


class TestEquilibration:
    def test_metric(self):
        states = np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], dtype=complex)
        traj = Trajectory(np.array([0.0, 1.0]), states)
        assert dg.equilibration_metric(traj, np.eye(2) / 2) == pytest.approx(0.5)
        assert dg.max_deviation_from_initial(traj) == pytest.approx(1)
        with pytest.raises(DimensionMismatch):
            dg.equilibration_metric(traj, np.eye(3) / 3)

    def test_empty(self):
        traj = Trajectory(np.zeros(0), np.zeros((0, 2, 2)))
        with pytest.raises(EmptyTrajectory):
            dg.equilibration_metric(traj, np.eye(2) / 2)
        with pytest.raises(EmptyTrajectory):
            dg.max_deviation_from_initial(traj)


class TestIsi:
    def test_tps1_system_dependence(self, gue12, tps1_12):
        states = list(np.eye(3))
        assert dg.system_isi(gue12, tps1_12, np.eye(4)[0], states) == pytest.approx(1, abs=1e-12)

    def test_tps1_bath_independent(self, gue12, tps1_12):
        phi = random_state(4, 3)
        assert dg.bath_isi(gue12, tps1_12, phi, [random_state(k, 4, 9) for k in range(3)]) <= 1e-12

    def test_tps2_bath_dependence(self, gue12, tps2_12):
        phi = np.eye(3)[0]
        val = dg.bath_isi(gue12, tps2_12, phi, [np.eye(4)[0], np.eye(4)[3]])
        assert val == pytest.approx(1 - 1 / 3, abs=1e-12)

    def test_needs_two(self, gue12, tps1_12):
        with pytest.raises(ValueError):
            dg.system_isi(gue12, tps1_12, np.eye(4)[0], [np.eye(3)[0]])


class TestClosedForm:
    @pytest.mark.parametrize("seed", range(5))
    def test_tps2_matches_dephasing(self, gue12, tps2_12, seed):
        phi, chi = random_state(seed, 3, 1), random_state(seed, 4, 2)
        psi = embed_product(ProductState(phi, chi), tps2_12)
        expected = dg.closed_form_equilibrium("tps2", phi, chi, 3, 4)
        assert trace_distance(expected, diagonal_ensemble(psi, gue12, tps2_12)) <= 1e-10

    def test_tps1(self, gue12, tps1_12):
        phi, chi = random_state(0, 3, 1), random_state(0, 4, 2)
        psi = embed_product(ProductState(phi, chi), tps1_12)
        expected = dg.closed_form_equilibrium("tps1", phi, chi, 3, 4)
        np.testing.assert_allclose(expected, np.diag(np.abs(phi) ** 2))
        assert trace_distance(expected, diagonal_ensemble(psi, gue12, tps1_12)) <= 1e-10

    def test_second_half_bath_gives_rotated_dephasing(self):
        # chi in the second half only: dephase in the DFT basis
        phi = np.eye(3)[0]
        rho = dg.closed_form_equilibrium("tps2", phi, np.eye(4)[3], 3, 4)
        np.testing.assert_allclose(rho, np.eye(3) / 3, atol=1e-15)


class TestEth:
    def test_tps1_maximal(self, gue12, tps1_12):
        assert dg.eth_statistic(gue12, tps1_12, (-10, 10)) == pytest.approx(1, abs=1e-12)

    def test_empty_window(self, gue12, tps1_12):
        with pytest.raises(EmptyWindow):
            dg.eth_statistic(gue12, tps1_12, (100, 200))

    def test_window_indices(self, gue12):
        lo, hi = gue12.eigenvalues[2], gue12.eigenvalues[4]
        assert list(dg.window_indices(gue12, (lo, hi))) == [2, 3, 4]


class TestEdh:
    def test_tps1_pure_and_sharp(self, gue12, tps1_12):
        res = dg.edh_statistic(gue12, tps1_12, dg.ObservableSet.projectors(np.eye(3)))
        assert res.max_variance <= 1e-12 and res.max_mixedness <= 1e-12 and res.holds

    def test_tps2_variance(self, gue16):
        tps = tps2_from_spectrum(gue16, 2, 8)
        res = dg.edh_statistic(gue16, tps, dg.ObservableSet.projectors(np.eye(2)))
        assert res.max_variance == pytest.approx(0.25, abs=1e-12)
        assert res.max_mixedness <= 1e-12 and not res.holds

    def test_dimension(self, gue12, tps1_12):
        with pytest.raises(DimensionMismatch):
            dg.edh_statistic(gue12, tps1_12, dg.ObservableSet.projectors(np.eye(2)))


@pytest.mark.parametrize("m", [2, 3, 5, 8])
def test_mutual_unbiasedness(m):
    assert dg.mutual_unbiasedness(np.eye(m), dft_system_basis(m)) <= 1e-12
    assert dg.mutual_unbiasedness(np.eye(m), np.eye(m)) == pytest.approx(1 - 1 / m)
    assert dg.mutual_unbiasedness(dft_frame(m, 1), dft_frame(m, -1) @ np.eye(m)) >= 0


def test_mutual_unbiasedness_shapes():
    with pytest.raises(DimensionMismatch):
        dg.mutual_unbiasedness(np.eye(2), np.eye(3))


class TestGibbs:
    def test_state(self):
        h = np.diag([0.0, 1.0])
        rho = dg.gibbs_state(h, np.log(3))
        np.testing.assert_allclose(rho.diagonal().real, [0.75, 0.25], atol=1e-15)
        np.testing.assert_allclose(dg.gibbs_state(h, 0), np.eye(2) / 2)
        assert np.all(np.isfinite(dg.gibbs_state(np.diag([0, 1e4]), -5)))

    @pytest.mark.parametrize("beta", [-0.7, 0.0, 1.0, 2.5])
    def test_round_trip(self, beta):
        h = np.diag([-1.0, 0.2, 1.3])
        fit = dg.gibbs_fit(dg.gibbs_state(h, beta), h)
        assert fit.beta == pytest.approx(beta, abs=1e-6)
        assert fit.residual <= 1e-6

    def test_flat_hamiltonian(self):
        fit = dg.gibbs_fit(np.eye(2) / 2, np.eye(2))
        assert fit.beta == 0 and fit.residual == pytest.approx(0)

    def test_checks(self):
        with pytest.raises(NonHermitianInput):
            dg.gibbs_fit(np.eye(2) / 2, np.array([[0, 1], [0, 0]]))
        with pytest.raises(DimensionMismatch):
            dg.gibbs_fit(np.eye(3) / 3, np.eye(2))


class TestReport:
    def test_serialisation(self):
        rep = dg.DiagnosticsReport(metadata={"seed": np.int64(3), "arr": np.array([0.1, 0.2])})
        rep.add("x", 1 / 3, window=(0.0, 1.0))
        rep.add("flag", np.bool_(True))
        doc = json.loads(rep.to_json())
        assert doc["results"][0]["value"] == 0.333333333333333
        assert doc["results"][1]["value"] is True
        assert doc["metadata"]["seed"] == 3
        assert rep.to_csv_rows() == [["name", "value"], ["x", "0.333333333333333"], ["flag", "true"]]
        assert rep.value("x") == rep.scalars()["x"]
        with pytest.raises(KeyError):
            rep.value("missing")

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            dg.DiagnosticsReport().add("bad", float("nan"))

    def test_negative_zero(self):
        rep = dg.DiagnosticsReport()
        rep.add("z", -0.0)
        assert json.dumps(rep.value("z")) == "0.0"


def test_factorizability_generic_frame(gue12):
    tps = TpsDescriptor(m=3, n=4, frame=np.eye(12))
    assert dg.factorizability(gue12, tps) > 1e-3


def test_equilibration_of_trajectory(gue12, tps2_12):
    psi = random_state(1, 12)
    traj = reduced_trajectory(psi, gue12, tps2_12, TimeGrid(50.0, 200))
    rho_bar = diagonal_ensemble(psi, gue12, tps2_12)
    assert 0 <= dg.equilibration_metric(traj, rho_bar) <= 1
