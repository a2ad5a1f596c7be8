"""Tensor-product structures induced by orthonormal frames.

A TPS is stored as a unitary ``frame`` of the closed-system space together
with the factor dimensions ``(m, n)``.  Column ``i*n + j`` (0-based) of the
frame is the basis state identified with ``phi_i (x) chi_j``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadFactorization,
    DimensionMismatch,
    IndexOutOfRange,
    NonUnitaryBasis,
    OddBathDimension,
)
from .hamiltonians import FermionModeBasis
from .qla import SpectralDecomposition, dft_frame, unitarity_residual

UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class TpsDescriptor:
    m: int
    n: int
    frame: np.ndarray
    label: str = ""

    def __post_init__(self):
        frame = np.asarray(self.frame, dtype=complex)
        if self.m < 2 or self.n < 2:
            raise BadFactorization(f"factor dimensions must be >= 2, got m={self.m}, n={self.n}")
        if frame.shape != (self.m * self.n, self.m * self.n):
            raise BadFactorization(f"frame shape {frame.shape} incompatible with m*n={self.m * self.n}")
        if unitarity_residual(frame) > UNITARITY_TOL:
            raise NonUnitaryBasis("TPS frame is not unitary within 1e-10")
        frame.setflags(write=False)
        object.__setattr__(self, "frame", frame)

    @property
    def dim(self) -> int:
        return self.m * self.n

    def cell(self, i: int, j: int) -> np.ndarray:
        """Frame vector at 0-based grid position ``(i, j)``."""
        return self.frame[:, i * self.n + j]

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "m": self.m,
            "n": self.n,
            "frame": [[[float(z.real), float(z.imag)] for z in row] for row in self.frame],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "TpsDescriptor":
        arr = np.asarray(doc["frame"], dtype=float)
        return cls(m=int(doc["m"]), n=int(doc["n"]), frame=arr[..., 0] + 1j * arr[..., 1], label=doc.get("label", ""))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path) -> "TpsDescriptor":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class ProductState:
    system: np.ndarray
    bath: np.ndarray

    def __post_init__(self):
        for name in ("system", "bath"):
            v = np.asarray(getattr(self, name), dtype=complex)
            if abs(np.linalg.norm(v) - 1) > 1e-12:
                raise ValueError(f"{name} state is not normalized")
            object.__setattr__(self, name, v)


def default_assignment(d: int) -> np.ndarray:
    """Row-major grid: level ``l`` (0-based) sits at ``(l // n, l % n)``."""
    return np.arange(d)


def _check_assignment(assign, d: int) -> np.ndarray:
    if assign is None:
        return default_assignment(d)
    assign = np.asarray(assign, dtype=int)
    if assign.shape != (d,) or not np.array_equal(np.sort(assign), np.arange(d)):
        raise ValueError(f"assignment must be a permutation of 0..{d - 1}")
    return assign


def _check_factorization(d: int, m: int, n: int):
    if m < 2 or n < 2 or m * n != d:
        raise BadFactorization(f"cannot split dimension {d} as m={m} x n={n}")


def tps_from_basis(basis, m: int, n: int, assign=None, label: str = "basis") -> TpsDescriptor:
    """TPS in which every column of ``basis`` is a product state.

    ``assign[l]`` is the grid cell (row-major, 0-based) receiving basis
    column ``l``.
    """
    basis = np.asarray(basis, dtype=complex)
    d = basis.shape[0]
    if basis.shape != (d, d):
        raise DimensionMismatch(f"basis must be square, got {basis.shape}")
    _check_factorization(d, m, n)
    if unitarity_residual(basis) > UNITARITY_TOL:
        raise NonUnitaryBasis("basis is not orthonormal within 1e-10")
    assign = _check_assignment(assign, d)
    frame = np.empty_like(basis)
    frame[:, assign] = basis
    return TpsDescriptor(m=m, n=n, frame=frame, label=label)


def tps1_from_spectrum(spec: SpectralDecomposition, m: int, n: int, assign=None, label: str = "tps1") -> TpsDescriptor:
    """Eigenbasis arranged on an ``m x n`` table (ascending energies row-major by default)."""
    return tps_from_basis(spec.frame, m, n, assign, label=label)


def tps2_from_spectrum(spec: SpectralDecomposition, m: int, n: int, assign=None, label: str = "tps2") -> TpsDescriptor:
    """Hybrid frame: eigenstates in bath columns ``j < n/2``, DFT mixtures over rows beyond.

    For columns ``j >= n/2`` the cell ``(i, j)`` holds
    ``m**-0.5 * sum_k exp(+2 pi i k i / m) |E_{k,j}>``.
    """
    if n % 2:
        raise OddBathDimension(f"TPS-2 needs an even bath dimension, got n={n}")
    tps1 = tps1_from_spectrum(spec, m, n, assign)
    grid = tps1.frame.reshape(-1, m, n)  # [:, k, j] = |E_{k,j}>
    f_plus = dft_frame(m, +1)
    mixed = np.einsum("dkj,ik->dij", grid[:, :, n // 2:], f_plus)
    grid = grid.copy()
    grid[:, :, n // 2:] = mixed
    return TpsDescriptor(m=m, n=n, frame=grid.reshape(-1, m * n), label=label)


def dft_system_basis(m: int) -> np.ndarray:
    """Columns are ``phi~_k`` in ``phi`` coordinates (the TPS-2 rotated system basis)."""
    return dft_frame(m, -1)


def site_tps(N: int, site: int, label: str | None = None) -> TpsDescriptor:
    """One qubit of an ``N``-qubit register as the system, the rest as bath."""
    if not 1 <= site <= N:
        raise IndexOutOfRange(f"site {site} outside 1..{N}")
    d, n = 2**N, 2 ** (N - 1)
    shift = N - site
    i = np.repeat(np.arange(2), n)
    j = np.tile(np.arange(n), 2)
    # insert bit i at position `shift` of the bath index j
    low = j & ((1 << shift) - 1)
    high = j >> shift
    ref = (high << (shift + 1)) | (i << shift) | low
    frame = np.zeros((d, d), dtype=complex)
    frame[ref, np.arange(d)] = 1.0
    return TpsDescriptor(m=2, n=n, frame=frame, label=label or f"site{site}")


def jordan_wigner_creators(N: int) -> list[np.ndarray]:
    """Site creation operators ``a+_n = prod_{l<n} (-sigma^z_l) sigma^+_n``.

    Spin up is the occupied state, so the all-down state is the vacuum and
    the string equals ``(-1)^(number of particles on sites l < n)``.
    """
    raising = np.array([[0, 1], [0, 0]], dtype=complex)  # |up><down|
    string = np.array([[-1, 0], [0, 1]], dtype=complex)  # -sigma^z
    ops = []
    for n in range(1, N + 1):
        op = np.array([[1.0 + 0j]])
        for l in range(1, N + 1):
            factor = string if l < n else raising if l == n else np.eye(2)
            op = np.kron(op, factor)
        ops.append(op)
    return ops


def fermion_mode_creators(basis: FermionModeBasis) -> list[np.ndarray]:
    """``c+_k = sum_n U[n, k] a+_n`` for every mode ``k`` (energy ascending)."""
    site_ops = jordan_wigner_creators(basis.N)
    return [sum(basis.mode_vectors[n, k] * site_ops[n] for n in range(basis.N)) for k in range(basis.N)]


def fock_states(basis: FermionModeBasis) -> tuple[np.ndarray, np.ndarray]:
    """All Fock states as columns and their occupation patterns.

    Column ``c`` has occupations ``occ[c]`` (mode 1 most significant bit);
    creators are applied to the all-down vacuum in ascending mode order.
    """
    N = basis.N
    creators = fermion_mode_creators(basis)
    vacuum = np.zeros(2**N, dtype=complex)
    vacuum[-1] = 1.0
    occ = (np.arange(2**N)[:, None] >> (N - 1 - np.arange(N))[None, :]) & 1
    states = np.empty((2**N, 2**N), dtype=complex)
    for c, pattern in enumerate(occ):
        psi = vacuum
        for k in range(N):
            if pattern[k]:
                psi = creators[k] @ psi
        states[:, c] = psi
    return states, occ


def fermion_mode_tps(basis: FermionModeBasis, mode: int, label: str | None = None) -> TpsDescriptor:
    """One fermion mode as the system (row 0 empty, row 1 occupied), the others as bath."""
    N = basis.N
    if not 1 <= mode <= N:
        raise IndexOutOfRange(f"mode {mode} outside 1..{N}")
    states, occ = fock_states(basis)
    others = [k for k in range(N) if k != mode - 1]
    rows = occ[:, mode - 1]
    cols = np.zeros(2**N, dtype=int)
    for k in others:
        cols = (cols << 1) | occ[:, k]
    assign = rows * 2 ** (N - 1) + cols
    return tps_from_basis(states, 2, 2 ** (N - 1), assign, label=label or f"mode{mode}")


def embed_product(ps: ProductState, tps: TpsDescriptor) -> np.ndarray:
    """Closed-system vector ``sum_ij phi(0)[i] chi(0)[j] Psi_ij``."""
    if ps.system.shape != (tps.m,) or ps.bath.shape != (tps.n,):
        raise DimensionMismatch(
            f"product state dims ({ps.system.size}, {ps.bath.size}) do not match TPS ({tps.m}, {tps.n})"
        )
    return tps.frame @ np.kron(ps.system, ps.bath)
