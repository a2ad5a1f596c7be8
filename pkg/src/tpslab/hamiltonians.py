"""Model Hamiltonians as dense Hermitian matrices.

Basis convention: for a chain of qubits, site 1 is the most significant bit
of the basis index and basis state 0 of every site is spin up
(``sigma^z = +1``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionOverflow, IndexOutOfRange
from .qla import DEFAULT_MAX_DIM

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class XxChainSpec:
    N: int
    h: float = 0.0

    def __post_init__(self):
        if not 2 <= self.N <= 12:
            raise DimensionOverflow(f"XX chain needs 2 <= N <= 12, got N={self.N}")


@dataclass(frozen=True)
class CentralSpinSpec:
    N: int
    g: tuple | None = None

    def __post_init__(self):
        if not 1 <= self.N <= 11:
            raise DimensionOverflow(f"central spin model needs 1 <= N <= 11, got N={self.N}")
        if self.g is None:
            object.__setattr__(self, "g", tuple(1.0 / n for n in range(1, self.N + 1)))
        else:
            object.__setattr__(self, "g", tuple(float(x) for x in self.g))
        if len(self.g) != self.N or not np.all(np.isfinite(self.g)):
            raise ValueError(f"need {self.N} finite couplings, got {self.g}")


@dataclass(frozen=True)
class RandomSpec:
    d: int
    seed: int = 0
    ensemble: str = "GUE"

    def __post_init__(self):
        if not 2 <= self.d <= 2**12:
            raise DimensionOverflow(f"random Hamiltonian needs 2 <= d <= 4096, got d={self.d}")
        if self.ensemble.upper() != "GUE":
            raise ValueError(f"unsupported ensemble {self.ensemble!r}")


@dataclass(frozen=True)
class FermionModeBasis:
    """Single-particle modes of the open XX chain.

    ``mode_vectors[:, k]`` is mode ``k`` in site amplitudes; energies ascend.
    """

    N: int
    mode_vectors: np.ndarray
    mode_energies: np.ndarray


def philox_generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based PRNG (Philox-4x64) keyed by ``(seed, stream)``.

    The seed fills the first key word and the stream the second, so the
    output is identical across platforms for a given pair.
    """
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def haar_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Uniform random unit vector: normalised complex Gaussian, re/im drawn as pairs."""
    z = rng.standard_normal((dim, 2))
    v = z[:, 0] + 1j * z[:, 1]
    return v / np.linalg.norm(v)


def _check_dim(N: int, max_dim: int):
    if 2**N > max_dim:
        raise DimensionOverflow(f"dimension 2^{N} exceeds cap {max_dim}")


def pauli_site_operator(N: int, site: int, axis: str) -> np.ndarray:
    """``I (x) ... (x) sigma^axis (x) ... (x) I`` with the Pauli at ``site`` (1-based)."""
    if not 1 <= site <= N:
        raise IndexOutOfRange(f"site {site} outside 1..{N}")
    sigma = PAULI[axis.lower()]
    return np.kron(np.kron(np.eye(2 ** (site - 1)), sigma), np.eye(2 ** (N - site)))


def _z_diagonal(N: int, site: int) -> np.ndarray:
    bit = (np.arange(2**N) >> (N - site)) & 1
    return 1.0 - 2.0 * bit


def total_sz(N: int) -> np.ndarray:
    return np.diag(sum(_z_diagonal(N, s) for s in range(1, N + 1))).astype(complex)


def build_xx_chain(spec: XxChainSpec, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """Open XX chain ``1/4 sum (sx sx + sy sy) + h/2 sum sz``."""
    N = spec.N
    _check_dim(N, max_dim)
    dim = 2**N
    idx = np.arange(dim)
    h = np.zeros((dim, dim), dtype=complex)
    h[idx, idx] = 0.5 * spec.h * sum(_z_diagonal(N, s) for s in range(1, N + 1))
    for n in range(1, N):
        # (sx sx + sy sy) / 4 flips antiparallel neighbours with amplitude 1/2
        mask = (1 << (N - n)) | (1 << (N - n - 1))
        b1 = (idx >> (N - n)) & 1
        b2 = (idx >> (N - n - 1)) & 1
        src = idx[b1 != b2]
        h[src ^ mask, src] += 0.5
    return h


def single_particle_matrix(spec: XxChainSpec) -> np.ndarray:
    return np.diag(np.full(spec.N, float(spec.h))) + 0.5 * (np.eye(spec.N, k=1) + np.eye(spec.N, k=-1))


def xx_free_fermion_oracle(spec: XxChainSpec) -> tuple[FermionModeBasis, np.ndarray]:
    """Mode basis and sorted many-body spectrum ``sum_k eps_k (n_k - 1/2)``."""
    eps, vecs = np.linalg.eigh(single_particle_matrix(spec))
    # deterministic sign: largest component positive
    pivots = np.argmax(np.abs(vecs), axis=0)
    vecs = vecs * np.sign(vecs[pivots, np.arange(spec.N)])
    occupations = np.array(list(itertools.product((0, 1), repeat=spec.N)), dtype=float)
    energies = (occupations - 0.5) @ eps
    return FermionModeBasis(N=spec.N, mode_vectors=vecs, mode_energies=eps), np.sort(energies)


def build_central_spin(spec: CentralSpinSpec, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """``sigma^z_central * sum_n g_n sigma^z_n``; the central qubit is site 1."""
    N = spec.N
    _check_dim(N + 1, max_dim)
    central = _z_diagonal(N + 1, 1)
    bath = sum(g * _z_diagonal(N + 1, n + 2) for n, g in enumerate(spec.g))
    return np.diag(central * bath).astype(complex)


def build_random_gue(spec: RandomSpec) -> np.ndarray:
    """GUE sample with unit off-diagonal second moment.

    Draw order from ``philox_generator(seed, stream=0)``: ``d`` real normals
    for the diagonal, then ``(a, b)`` normal pairs for the strict upper
    triangle in row-major order, ``H[i, j] = (a + i b) / sqrt(2)``.
    """
    d = spec.d
    rng = philox_generator(spec.seed, 0)
    diag = rng.standard_normal(d)
    iu = np.triu_indices(d, k=1)
    pairs = rng.standard_normal((iu[0].size, 2))
    h = np.zeros((d, d), dtype=complex)
    h[iu] = (pairs[:, 0] + 1j * pairs[:, 1]) / np.sqrt(2.0)
    h = h + h.conj().T
    h[np.arange(d), np.arange(d)] = diag
    return h


def min_level_gap(h: np.ndarray) -> float:
    """Smallest nearest-neighbour eigenvalue spacing of a Hermitian matrix."""
    return float(np.min(np.diff(np.linalg.eigvalsh(h))))
