"""Dense complex linear algebra used throughout the package.

Matrices and state vectors are plain ``numpy`` arrays (complex128).  The
Hermitian eigensolver is a cyclic Jacobi method with round-robin pair
ordering, so that every sweep applies ``d/2`` disjoint rotations at once as
vectorised row/column updates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    DimensionOverflow,
    NonHermitianInput,
)

DEFAULT_MAX_DIM = 2**14
MAX_SWEEPS = 100
OFF_DIAGONAL_THRESHOLD = 1e-13


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending), unitary eigenframe and degenerate blocks.

    ``frame[:, l]`` is the eigenvector for ``eigenvalues[l]``.  ``blocks`` is a
    tuple of index arrays grouping levels closer than ``degeneracy_tol``.
    """

    eigenvalues: np.ndarray
    frame: np.ndarray
    blocks: tuple
    degeneracy_tol: float

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def block_of(self) -> np.ndarray:
        """Block label for every level index."""
        labels = np.empty(self.dim, dtype=int)
        for b, idx in enumerate(self.blocks):
            labels[idx] = b
        return labels

    def level_energies(self) -> np.ndarray:
        """Mean energy of every degenerate block."""
        return np.array([self.eigenvalues[idx].mean() for idx in self.blocks])

    def min_gap(self) -> float:
        """Smallest spacing between distinct levels (inf for one level)."""
        levels = self.level_energies()
        if levels.size < 2:
            return float("inf")
        return float(np.min(np.diff(levels)))

    def hamiltonian(self) -> np.ndarray:
        return (self.frame * self.eigenvalues) @ self.frame.conj().T


@dataclass(frozen=True)
class SchmidtForm:
    """Bi-orthogonal decomposition ``psi = sum_i sqrt(p_i) left_i (x) right_i``.

    ``left`` and ``right`` hold the vectors as columns, expressed in the
    subsystem bases implied by the TPS (``phi_i`` and ``chi_j``).
    """

    coefficients: np.ndarray
    left: np.ndarray
    right: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.coefficients.size)

    def reconstruct(self) -> np.ndarray:
        amp = np.sqrt(self.coefficients)
        return np.einsum("k,ik,jk->ij", amp, self.left, self.right).reshape(-1)


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2 or min(a.shape) < 1:
        raise DimensionMismatch(f"expected a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def hermiticity_residual(h: np.ndarray) -> float:
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def _round_robin(d: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings for one sweep: every unordered pair appears exactly once.

    Circle method; for odd ``d`` a dummy player gets a bye.
    """
    players = list(range(d + (d % 2)))
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        p, q = [], []
        for k in range(size // 2):
            a, b = players[k], players[size - 1 - k]
            if a < d and b < d:
                p.append(min(a, b))
                q.append(max(a, b))
        rounds.append((np.array(p, dtype=int), np.array(q, dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude component real positive; argmax picks the lowest index on ties
    pivots = np.argmax(np.abs(vectors), axis=0)
    cols = np.arange(vectors.shape[1])
    lead = vectors[pivots, cols]
    return vectors * (np.abs(lead) / lead)


def degeneracy_blocks(eigenvalues: np.ndarray, tol: float) -> tuple:
    """Group ascending eigenvalues whose consecutive gaps are below ``tol``."""
    if eigenvalues.size == 0:
        return ()
    breaks = np.nonzero(np.diff(eigenvalues) >= tol)[0] + 1
    return tuple(np.split(np.arange(eigenvalues.size), breaks))


def eig_hermitian(h, degeneracy_tol: float | None = None) -> SpectralDecomposition:
    """Diagonalise a Hermitian matrix with the cyclic Jacobi method.

    Parameters
    ----------
    h : array_like
        Square Hermitian matrix.
    degeneracy_tol : float, optional
        Levels closer than this share a block.  Defaults to
        ``1e-9 * (max(E) - min(E))``.

    Returns
    -------
    SpectralDecomposition
        Ascending eigenvalues with phase-fixed eigenvectors.
    """
    a = _as_matrix(h)
    d = a.shape[0]
    if a.shape[1] != d:
        raise DimensionMismatch(f"matrix is not square: {a.shape}")
    scale = float(np.max(np.abs(a)))
    if hermiticity_residual(a) > 1e-10 * max(scale, 1e-300):
        raise NonHermitianInput("matrix is not Hermitian within 1e-10*||H||")
    if degeneracy_tol is not None and degeneracy_tol <= 0:
        raise ValueError("degeneracy_tol must be positive")

    a = 0.5 * (a + a.conj().T)
    v = np.eye(d, dtype=complex)
    threshold = OFF_DIAGONAL_THRESHOLD * max(np.linalg.norm(a), 1e-300)
    rounds = _round_robin(d)
    off_mask = ~np.eye(d, dtype=bool)

    for _ in range(MAX_SWEEPS + 1):
        if d < 2 or np.max(np.abs(a[off_mask])) <= threshold:
            break
        for p, q in rounds:
            apq = a[p, q]
            mag = np.abs(apq)
            active = mag > threshold
            if not np.any(active):
                continue
            p, q, apq, mag = p[active], q[active], apq[active], mag[active]
            phase = apq / mag  # e^{i alpha}
            theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta**2 + 1.0))
            c = 1.0 / np.sqrt(t**2 + 1.0)
            s = t * c
            # U restricted to (p, q): [[c, s], [-s e^{-i alpha}, c e^{-i alpha}]]
            u_qp = -s * phase.conj()
            u_qq = c * phase.conj()
            cols_p, cols_q = a[:, p], a[:, q]
            a[:, p] = cols_p * c + cols_q * u_qp
            a[:, q] = cols_p * s + cols_q * u_qq
            rows_p, rows_q = a[p, :], a[q, :]
            a[p, :] = c[:, None] * rows_p + u_qp.conj()[:, None] * rows_q
            a[q, :] = s[:, None] * rows_p + u_qq.conj()[:, None] * rows_q
            vp, vq = v[:, p], v[:, q]
            v[:, p] = vp * c + vq * u_qp
            v[:, q] = vp * s + vq * u_qq
    else:
        raise ConvergenceFailure(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")

    evals = np.real(np.diag(a)).copy()
    order = np.argsort(evals, kind="stable")
    evals = evals[order]
    v = _fix_phases(v[:, order])
    if degeneracy_tol is None:
        spread = float(evals[-1] - evals[0]) if d else 0.0
        degeneracy_tol = 1e-9 * spread if spread > 0 else 1e-9
    return SpectralDecomposition(
        eigenvalues=evals,
        frame=v,
        blocks=degeneracy_blocks(evals, degeneracy_tol),
        degeneracy_tol=float(degeneracy_tol),
    )


def tensor_product(a, b, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """Kronecker product; 1-D inputs give a 1-D (state vector) result."""
    a_arr, b_arr = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    rows = a_arr.shape[0] * b_arr.shape[0]
    cols = (a_arr.shape[1] if a_arr.ndim > 1 else 1) * (b_arr.shape[1] if b_arr.ndim > 1 else 1)
    if max(rows, cols) > max_dim:
        raise DimensionOverflow(f"product dimension {max(rows, cols)} exceeds cap {max_dim}")
    return np.kron(a_arr, b_arr)


def frame_coordinates(rho, tps) -> np.ndarray:
    """Express an operator on the closed system in the TPS frame."""
    rho = np.asarray(rho, dtype=complex)
    d = tps.m * tps.n
    if rho.shape != (d, d):
        raise DimensionMismatch(f"operator shape {rho.shape} does not match TPS dimension {d}")
    f = tps.frame
    return f.conj().T @ rho @ f


def partial_trace(rho, tps, keep: str = "system") -> np.ndarray:
    """Reduced density matrix of a closed-system operator.

    The result is written in the subsystem basis implied by ``tps``
    (``phi_i`` for the system, ``chi_j`` for the bath).
    """
    c = frame_coordinates(rho, tps).reshape(tps.m, tps.n, tps.m, tps.n)
    keep = keep.lower()
    if keep == "system":
        return np.einsum("ijkj->ik", c)
    if keep == "bath":
        return np.einsum("ijil->jl", c)
    raise ValueError(f"keep must be 'system' or 'bath', got {keep!r}")


def state_grid(psi, tps) -> np.ndarray:
    """Amplitudes of a pure state on the TPS grid, shape ``(m, n)``."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (tps.m * tps.n,):
        raise DimensionMismatch(f"state dim {psi.shape} does not match TPS dimension {tps.m * tps.n}")
    return (tps.frame.conj().T @ psi).reshape(tps.m, tps.n)


def reduce_pure(psi, tps, keep: str = "system") -> np.ndarray:
    """``partial_trace(|psi><psi|)`` without forming the d x d projector."""
    c = state_grid(psi, tps)
    if keep == "system":
        return c @ c.conj().T
    if keep == "bath":
        return c.T @ c.conj()
    raise ValueError(f"keep must be 'system' or 'bath', got {keep!r}")


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def trace_distance(rho, sigma) -> float:
    rho, sigma = np.asarray(rho, dtype=complex), np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"shapes differ: {rho.shape} vs {sigma.shape}")
    diff = rho - sigma
    diff = 0.5 * (diff + diff.conj().T)
    return float(min(1.0, 0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff)))))


def purity(rho) -> float:
    rho = np.asarray(rho, dtype=complex)
    return float(np.real(np.vdot(rho.conj().T, rho)))


def schmidt(psi, tps) -> SchmidtForm:
    """Schmidt decomposition of a pure state with respect to ``tps``.

    Coefficients below ``1e-30`` are dropped, so ``rank`` counts the
    numerically nonzero terms.
    """
    c = state_grid(psi, tps)
    u, sv, vh = np.linalg.svd(c, full_matrices=False)
    p = sv**2
    keep = p > 1e-30
    return SchmidtForm(coefficients=p[keep], left=u[:, keep], right=vh.T[:, keep])


def dft_frame(m: int, sign: int = -1) -> np.ndarray:
    """Unitary DFT matrix ``F[i, k] = m**-0.5 * exp(sign * 2j*pi*i*k/m)``."""
    if m < 2:
        raise ValueError("dft_frame requires m >= 2")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    idx = np.arange(m)
    return np.exp(sign * 2j * np.pi * np.outer(idx, idx) / m) / np.sqrt(m)


def unitarity_residual(u) -> float:
    u = np.asarray(u, dtype=complex)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))


def is_density_matrix(rho, tol: float = 1e-12) -> bool:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if hermiticity_residual(rho) > tol or abs(np.trace(rho) - 1) > tol:
        return False
    return bool(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))) >= -1e-10)
