"""Exact unitary dynamics and infinite-time averages of reduced states (hbar = 1)."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, InsufficientHorizon, NotEigenbasisInduced
from .qla import SpectralDecomposition, reduce_pure
from .tps import TpsDescriptor

HORIZON_FACTOR = 50.0
DEFAULT_HORIZON_FACTOR = 200.0
DEFAULT_SAMPLES = 4096


@dataclass(frozen=True)
class TimeGrid:
    """Uniform samples ``t_k = k * t_max / (samples - 1)``.

    ``samples == 1`` is accepted and means the single instant ``t = 0``.
    """

    t_max: float
    samples: int

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.samples > 1 and not self.t_max > 0:
            raise ValueError("t_max must be positive")

    @property
    def times(self) -> np.ndarray:
        if self.samples == 1:
            return np.zeros(1)
        return np.linspace(0.0, self.t_max, self.samples)

    @classmethod
    def for_spectrum(cls, spec: SpectralDecomposition, factor=DEFAULT_HORIZON_FACTOR, samples=DEFAULT_SAMPLES):
        gap = spec.min_gap()
        t_max = factor / gap if np.isfinite(gap) and gap > 0 else 1.0
        return cls(t_max=t_max, samples=samples)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    reduced_states: np.ndarray  # shape (samples, m, m)

    def __len__(self):
        return self.times.size

    def write_csv(self, path):
        """Columns ``t`` then row-major entries as interleaved re/im pairs."""
        m = self.reduced_states.shape[1]
        header = ["t"]
        for a in range(m):
            for b in range(m):
                header += [f"rho_{a}_{b}_re", f"rho_{a}_{b}_im"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for t, rho in zip(self.times, self.reduced_states):
                row = [f"{t:.15g}"]
                for z in rho.reshape(-1):
                    row += [f"{_clean(z.real):.15g}", f"{_clean(z.imag):.15g}"]
                writer.writerow(row)


def _clean(x: float) -> float:
    return 0.0 if x == 0 else float(x)


def _check_state(psi0, spec: SpectralDecomposition) -> np.ndarray:
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (spec.dim,):
        raise DimensionMismatch(f"state dim {psi0.shape} does not match Hamiltonian dim {spec.dim}")
    return psi0


def evolve_state(psi0, spec: SpectralDecomposition, t: float) -> np.ndarray:
    """``exp(-iHt) psi0`` through the eigenframe."""
    psi0 = _check_state(psi0, spec)
    if t == 0:
        return psi0.copy()
    coeffs = spec.frame.conj().T @ psi0
    return spec.frame @ (np.exp(-1j * spec.eigenvalues * t) * coeffs)


def evolve_many(psi0, spec: SpectralDecomposition, times) -> np.ndarray:
    """States at every time as rows, shape ``(len(times), d)``."""
    psi0 = _check_state(psi0, spec)
    coeffs = spec.frame.conj().T @ psi0
    phases = np.exp(-1j * np.outer(times, spec.eigenvalues))
    return (phases * coeffs) @ spec.frame.T


def reduced_trajectory(psi0, spec: SpectralDecomposition, tps: TpsDescriptor, grid: TimeGrid) -> Trajectory:
    """System reduced states along the time grid."""
    if tps.dim != spec.dim:
        raise DimensionMismatch(f"TPS dimension {tps.dim} does not match Hamiltonian dim {spec.dim}")
    times = grid.times
    states = evolve_many(psi0, spec, times)
    # grid amplitudes c[t, i, j] in the TPS frame
    c = (states @ tps.frame.conj()).reshape(times.size, tps.m, tps.n)
    rho = np.einsum("tij,tkj->tik", c, c.conj())
    return Trajectory(times=times, reduced_states=rho)


def diagonal_ensemble(psi0, spec: SpectralDecomposition, tps: TpsDescriptor) -> np.ndarray:
    """Infinite-time average of the reduced state.

    Dephases ``psi0`` over the spectral projectors of every degenerate
    block, ``sum_b tr_B(P_b |psi0><psi0| P_b)``.
    """
    psi0 = _check_state(psi0, spec)
    if tps.dim != spec.dim:
        raise DimensionMismatch(f"TPS dimension {tps.dim} does not match Hamiltonian dim {spec.dim}")
    coeffs = spec.frame.conj().T @ psi0
    rho = np.zeros((tps.m, tps.m), dtype=complex)
    for idx in spec.blocks:
        component = spec.frame[:, idx] @ coeffs[idx]
        rho += reduce_pure(component, tps)
    return 0.5 * (rho + rho.conj().T)


def horizon_threshold(spec: SpectralDecomposition) -> float:
    gap = spec.min_gap()
    return HORIZON_FACTOR / gap if np.isfinite(gap) and gap > 0 else 0.0


def numeric_time_average(psi0, spec: SpectralDecomposition, tps: TpsDescriptor, grid: TimeGrid) -> np.ndarray:
    """Uniform-sample average of the reduced state.

    Independent check of :func:`diagonal_ensemble`.  The deviation from the
    infinite-time limit is of order ``1/(t_max * gap_min)`` plus aliasing
    of Bohr frequencies near multiples of ``2 pi / dt``.  Warns with
    :class:`InsufficientHorizon` when ``t_max < 50 / gap_min``.
    """
    if grid.samples > 1 and grid.t_max < horizon_threshold(spec):
        warnings.warn(
            f"t_max={grid.t_max:.4g} is below 50/gap_min={horizon_threshold(spec):.4g}",
            InsufficientHorizon,
            stacklevel=2,
        )
    traj = reduced_trajectory(psi0, spec, tps, grid)
    rho = traj.reduced_states.mean(axis=0)
    return 0.5 * (rho + rho.conj().T)


def frame_energies(spec: SpectralDecomposition, tps: TpsDescriptor, tol: float = 1e-9) -> np.ndarray:
    """Energy of every frame column, shape ``(m, n)``.

    Raises :class:`NotEigenbasisInduced` if some column is not an
    eigenvector (energy spread above ``tol * max|E|``).
    """
    coeffs = spec.frame.conj().T @ tps.frame
    weights = np.abs(coeffs) ** 2
    energies = spec.eigenvalues @ weights
    spread = np.sqrt(np.sum(weights * (spec.eigenvalues[:, None] - energies[None, :]) ** 2, axis=0))
    scale = max(float(np.max(np.abs(spec.eigenvalues))), 1.0)
    if np.max(spread) > tol * scale:
        raise NotEigenbasisInduced(f"frame column energy spread {np.max(spread):.3g} exceeds tolerance")
    return energies.reshape(tps.m, tps.n)


def conditional_system_hamiltonian(spec: SpectralDecomposition, tps1: TpsDescriptor, j: int) -> np.ndarray:
    """Effective system Hamiltonian ``diag(E_{i,j})`` for bath basis state ``chi_j`` (1-based ``j``)."""
    if not 1 <= j <= tps1.n:
        raise IndexOutOfRange(f"bath index {j} outside 1..{tps1.n}")
    energies = frame_energies(spec, tps1)
    return np.diag(energies[:, j - 1]).astype(complex)
