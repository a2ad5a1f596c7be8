"""Scalar diagnostics of thermalization and decoherence properties per TPS."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Trajectory, diagonal_ensemble
from .errors import DimensionMismatch, EmptyTrajectory, EmptyWindow, NonHermitianInput
from .qla import SpectralDecomposition, hermiticity_residual, purity, reduce_pure, trace_distance
from .tps import ProductState, TpsDescriptor, dft_system_basis, embed_product

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ObservableSet:
    """Observables regarded as classical, with the uncertainty threshold ``epsilon``."""

    operators: tuple
    epsilon: float = 0.1

    def __post_init__(self):
        ops = tuple(np.asarray(a, dtype=complex) for a in self.operators)
        for a in ops:
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise DimensionMismatch(f"observable must be square, got {a.shape}")
            if hermiticity_residual(a) > 1e-12:
                raise NonHermitianInput("observable is not Hermitian")
        if len({a.shape for a in ops}) > 1:
            raise DimensionMismatch("observables have different dimensions")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @classmethod
    def projectors(cls, basis, epsilon=0.1) -> "ObservableSet":
        """Rank-one projectors onto the columns of ``basis``."""
        basis = np.asarray(basis, dtype=complex)
        return cls(tuple(np.outer(v, v.conj()) for v in basis.T), epsilon)


@dataclass
class DiagnosticsReport:
    """Named scalar results plus run metadata, serialised with stable key order."""

    metadata: dict = field(default_factory=dict)
    entries: list = field(default_factory=list)

    def add(self, name: str, value, **context):
        self.entries.append({"name": name, "value": _round15(value), "context": _jsonable(context)})

    def value(self, name: str):
        for entry in self.entries:
            if entry["name"] == name:
                return entry["value"]
        raise KeyError(name)

    def scalars(self) -> dict:
        return {e["name"]: e["value"] for e in self.entries}

    def to_dict(self) -> dict:
        return {"metadata": _jsonable(self.metadata), "results": self.entries}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv_rows(self) -> list[list[str]]:
        rows = [["name", "value"]]
        rows += [[e["name"], _fmt(e["value"])] for e in self.entries]
        return rows


def _round15(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if not np.isfinite(x):
        raise ValueError("diagnostic values must be finite")
    x = float(f"{x:.15g}")
    return 0.0 if x == 0 else x


def _fmt(x) -> str:
    return str(x).lower() if isinstance(x, bool) else f"{x:.15g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (float, np.floating, int, np.integer, bool, np.bool_)):
        return _round15(obj)
    return obj


def _max_pairwise_distance(states) -> float:
    best = 0.0
    for a, b in itertools.combinations(states, 2):
        best = max(best, trace_distance(a, b))
    return best


def equilibration_metric(traj: Trajectory, rho_bar) -> float:
    """Time-averaged trace distance of the trajectory from ``rho_bar``."""
    if len(traj) == 0:
        raise EmptyTrajectory("trajectory has no samples")
    rho_bar = np.asarray(rho_bar, dtype=complex)
    if rho_bar.shape != traj.reduced_states.shape[1:]:
        raise DimensionMismatch("reference state does not match trajectory dimension")
    return float(np.mean([trace_distance(r, rho_bar) for r in traj.reduced_states]))


def max_deviation_from_initial(traj: Trajectory) -> float:
    """``max_t D(rho(t), rho(0))``."""
    if len(traj) == 0:
        raise EmptyTrajectory("trajectory has no samples")
    rho0 = traj.reduced_states[0]
    return max(trace_distance(r, rho0) for r in traj.reduced_states)


def system_isi(spec: SpectralDecomposition, tps: TpsDescriptor, bath_state, system_states) -> float:
    """Largest trace distance between equilibrium states for different system inputs."""
    if len(system_states) < 2:
        raise ValueError("need at least two system states")
    averages = [
        diagonal_ensemble(embed_product(ProductState(phi, bath_state), tps), spec, tps) for phi in system_states
    ]
    return _max_pairwise_distance(averages)


def bath_isi(spec: SpectralDecomposition, tps: TpsDescriptor, system_state, bath_states) -> float:
    """Largest trace distance between equilibrium states for different bath inputs."""
    if len(bath_states) < 2:
        raise ValueError("need at least two bath states")
    averages = [
        diagonal_ensemble(embed_product(ProductState(system_state, chi), tps), spec, tps) for chi in bath_states
    ]
    return _max_pairwise_distance(averages)


def reduced_eigenstates(spec: SpectralDecomposition, tps: TpsDescriptor, indices=None) -> list[np.ndarray]:
    if tps.dim != spec.dim:
        raise DimensionMismatch(f"TPS dimension {tps.dim} does not match Hamiltonian dim {spec.dim}")
    if indices is None:
        indices = range(spec.dim)
    return [reduce_pure(spec.frame[:, l], tps) for l in indices]


def window_indices(spec: SpectralDecomposition, window) -> np.ndarray:
    lo, hi = window
    return np.nonzero((spec.eigenvalues >= lo) & (spec.eigenvalues <= hi))[0]


def eth_statistic(spec: SpectralDecomposition, tps: TpsDescriptor, window) -> float:
    """Max pairwise trace distance between reduced eigenstates with energy in ``[lo, hi]``."""
    idx = window_indices(spec, window)
    if idx.size < 2:
        raise EmptyWindow(f"window {tuple(window)} holds {idx.size} eigenstate(s); need >= 2")
    reduced = reduced_eigenstates(spec, tps, idx)
    return _max_pairwise_distance(reduced)


def variance(rho, a) -> float:
    rho = np.asarray(rho, dtype=complex)
    mean = np.trace(rho @ a).real
    return float(np.trace(rho @ a @ a).real - mean**2)


@dataclass(frozen=True)
class EdhResult:
    max_variance: float
    max_mixedness: float
    epsilon: float

    @property
    def holds(self) -> bool:
        return self.max_variance <= self.epsilon and self.max_mixedness <= self.epsilon


def edh_statistic(spec: SpectralDecomposition, tps: TpsDescriptor, obs: ObservableSet) -> EdhResult:
    """Worst observable variance and worst mixedness over all reduced eigenstates."""
    if obs.dim != tps.m:
        raise DimensionMismatch(f"observables act on dim {obs.dim}, system has dim {tps.m}")
    max_var, max_mix = 0.0, 0.0
    for rho in reduced_eigenstates(spec, tps):
        for a in obs.operators:
            max_var = max(max_var, variance(rho, a))
        max_mix = max(max_mix, 1.0 - purity(rho))
    return EdhResult(max_variance=max_var, max_mixedness=max(max_mix, 0.0), epsilon=obs.epsilon)


def mutual_unbiasedness(basis_a, basis_b) -> float:
    """``max_ik | |<a_i|b_k>|^2 - 1/m |``; zero for mutually unbiased bases."""
    basis_a = np.asarray(basis_a, dtype=complex)
    basis_b = np.asarray(basis_b, dtype=complex)
    if basis_a.shape != basis_b.shape or basis_a.shape[0] != basis_a.shape[1]:
        raise DimensionMismatch(f"basis shapes differ: {basis_a.shape} vs {basis_b.shape}")
    m = basis_a.shape[0]
    overlaps = np.abs(basis_a.conj().T @ basis_b) ** 2
    return float(np.max(np.abs(overlaps - 1.0 / m)))


@dataclass(frozen=True)
class Quasiclassicality:
    in_set: bool
    max_var: float


def quasiclassicality(phi, obs: ObservableSet) -> Quasiclassicality:
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != (obs.dim,):
        raise DimensionMismatch(f"state dim {phi.shape} does not match observables dim {obs.dim}")
    rho = np.outer(phi, phi.conj())
    max_var = max(variance(rho, a) for a in obs.operators)
    return Quasiclassicality(in_set=bool(max_var < obs.epsilon), max_var=max_var)


def gibbs_state(h_eff, beta: float) -> np.ndarray:
    evals, vecs = np.linalg.eigh(h_eff)
    w = np.exp(-beta * (evals - evals.min() if beta >= 0 else evals - evals.max()))
    w /= w.sum()
    return (vecs * w) @ vecs.conj().T


@dataclass(frozen=True)
class GibbsFit:
    beta: float
    residual: float


def gibbs_fit(rho_bar, h_eff, beta_max: float | None = None, xtol: float = 1e-10) -> GibbsFit:
    """Golden-section search for the inverse temperature closest in trace distance.

    ``beta`` ranges over ``[-beta_max, beta_max]`` with default
    ``beta_max = 50 / spectral range``.  The objective need not be unimodal,
    so the result is a diagnostic only.
    """
    h_eff = np.asarray(h_eff, dtype=complex)
    rho_bar = np.asarray(rho_bar, dtype=complex)
    if hermiticity_residual(h_eff) > 1e-12 * max(1.0, float(np.max(np.abs(h_eff)))):
        raise NonHermitianInput("effective Hamiltonian is not Hermitian")
    if h_eff.shape != rho_bar.shape:
        raise DimensionMismatch(f"shapes differ: {rho_bar.shape} vs {h_eff.shape}")
    evals = np.linalg.eigvalsh(h_eff)
    spread = float(evals[-1] - evals[0])
    if spread <= 0:
        return GibbsFit(beta=0.0, residual=trace_distance(rho_bar, gibbs_state(h_eff, 0.0)))
    if beta_max is None:
        beta_max = 50.0 / spread

    def cost(beta):
        return trace_distance(rho_bar, gibbs_state(h_eff, beta))

    a, b = -beta_max, beta_max
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = cost(c), cost(d)
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = cost(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = cost(d)
    beta = 0.5 * (a + b)
    return GibbsFit(beta=float(beta), residual=cost(beta))


def factorizability(spec: SpectralDecomposition, tps: TpsDescriptor) -> float:
    """Largest second Schmidt coefficient over all eigenstates (0 when all factorize)."""
    worst = 0.0
    for l in range(spec.dim):
        grid = (tps.frame.conj().T @ spec.frame[:, l]).reshape(tps.m, tps.n)
        sv = np.linalg.svd(grid, compute_uv=False)
        if sv.size > 1:
            worst = max(worst, float(sv[1] ** 2))
    return worst


def closed_form_equilibrium(kind: str, phi0, chi0, m: int, n: int) -> np.ndarray:
    """Equilibrium reduced state predicted for TPS-1 / TPS-2 and product inputs."""
    first = np.diag(np.abs(phi0) ** 2).astype(complex)
    if kind == "tps1":
        return first
    w1 = float(np.sum(np.abs(chi0[: n // 2]) ** 2))
    rotated = dft_system_basis(m)
    probs = np.abs(rotated.conj().T @ phi0) ** 2
    second = (rotated * probs) @ rotated.conj().T
    return w1 * first + (1.0 - w1) * second
