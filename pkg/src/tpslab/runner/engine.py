"""Scenario execution: model -> spectrum -> TPS -> states -> dynamics -> diagnostics."""

from __future__ import annotations

import copy
import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from .. import diagnostics as dg
from .. import dynamics as dyn
from .. import hamiltonians as ham
from ..errors import BadFactorization, ConfigInvalid, DimensionOverflow, TpsLabError
from ..qla import eig_hermitian
from ..tps import (
    ProductState,
    TpsDescriptor,
    dft_system_basis,
    embed_product,
    fermion_mode_tps,
    site_tps,
    tps1_from_spectrum,
    tps2_from_spectrum,
)
from .config import ScenarioConfig, parse_config

_STREAM_BASE = 1000


@dataclass
class RunRecord:
    scenario: str
    config_hash: str
    version: str
    status: str = "ok"
    wall_time: float = 0.0
    files: list = field(default_factory=list)
    error: str = ""
    scalars: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = asdict(self)
        doc.pop("scalars")
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def model_dimension(cfg: ScenarioConfig) -> int:
    model = cfg.model
    if model.kind == "gue":
        return model.d
    if model.kind == "xx_chain":
        return 2**model.N
    return 2 ** (model.N + 1)


def qubit_count(cfg: ScenarioConfig):
    model = cfg.model
    if model.kind == "xx_chain":
        return model.N
    if model.kind == "central_spin":
        return model.N + 1
    return None


def build_hamiltonian(cfg: ScenarioConfig) -> np.ndarray:
    model = cfg.model
    if model_dimension(cfg) > cfg.max_dim:
        raise DimensionOverflow(f"model dimension {model_dimension(cfg)} exceeds max_dim {cfg.max_dim}")
    if model.kind == "gue":
        seed = cfg.seed if model.seed is None else model.seed
        return ham.build_random_gue(ham.RandomSpec(d=model.d, seed=seed))
    if model.kind == "xx_chain":
        return ham.build_xx_chain(ham.XxChainSpec(N=model.N, h=model.h), cfg.max_dim)
    g = None if model.g is None else tuple(model.g)
    return ham.build_central_spin(ham.CentralSpinSpec(N=model.N, g=g), cfg.max_dim)


def build_tps(cfg: ScenarioConfig, spec) -> TpsDescriptor:
    t = cfg.tps
    if t.kind in ("tps1", "tps2"):
        assign = None if t.assignment is None else np.asarray(t.assignment) - 1
        builder = tps1_from_spectrum if t.kind == "tps1" else tps2_from_spectrum
        return builder(spec, t.m, t.n, assign)
    if t.kind == "site":
        nq = qubit_count(cfg)
        if nq is None:
            raise ConfigInvalid("tps.kind", "site TPS needs a qubit model")
        return site_tps(nq, t.site)
    if t.kind == "fermion_mode":
        if cfg.model.kind != "xx_chain":
            raise ConfigInvalid("tps.kind", "fermion_mode TPS needs the xx_chain model")
        basis, _ = ham.xx_free_fermion_oracle(ham.XxChainSpec(N=cfg.model.N, h=cfg.model.h))
        return fermion_mode_tps(basis, t.mode)
    return TpsDescriptor.load(t.path)


class _Builder:
    """Turns vector specs into arrays; random draws get successive PRNG streams."""

    def __init__(self, cfg: ScenarioConfig, spec, tps: TpsDescriptor):
        self.cfg, self.spec, self.tps = cfg, spec, tps
        self._stream = _STREAM_BASE

    def rng(self, seed=None):
        self._stream += 1
        return ham.philox_generator(self.cfg.seed if seed is None else seed, self._stream)

    def vector(self, vs, dim: int, where: str) -> np.ndarray:
        if vs.kind == "basis":
            if vs.index > dim:
                raise ConfigInvalid(f"{where}.index", f"index {vs.index} exceeds dimension {dim}")
            v = np.zeros(dim, dtype=complex)
            v[vs.index - 1] = 1.0
            return v
        if vs.kind == "dft":
            if vs.index > dim:
                raise ConfigInvalid(f"{where}.index", f"index {vs.index} exceeds dimension {dim}")
            return dft_system_basis(dim)[:, vs.index - 1].copy()
        if vs.kind == "amplitudes":
            im = vs.im if vs.im is not None else [0.0] * len(vs.re)
            if len(vs.re) != dim or len(im) != dim:
                raise ConfigInvalid(f"{where}.re", f"need {dim} amplitudes")
            v = np.asarray(vs.re, dtype=float) + 1j * np.asarray(im, dtype=float)
            norm = np.linalg.norm(v)
            if norm == 0:
                raise ConfigInvalid(f"{where}.re", "zero vector")
            return v / norm
        lo, hi = 0, dim
        if vs.subspace == "B1":
            hi = dim // 2
        elif vs.subspace == "B2":
            lo = dim // 2
        elif vs.subspace is not None:
            if len(vs.subspace) != 2 or not 1 <= vs.subspace[0] <= vs.subspace[1] <= dim:
                raise ConfigInvalid(f"{where}.subspace", f"need [lo, hi] within 1..{dim}")
            lo, hi = vs.subspace[0] - 1, vs.subspace[1]
        rng = self.rng(vs.seed)
        v = np.zeros(dim, dtype=complex)
        v[lo:hi] = ham.haar_vector(rng, hi - lo)
        return v

    def initial_state(self) -> np.ndarray:
        init = self.cfg.initial_state
        if init is None:
            raise ConfigInvalid("initial_state", "required by the requested diagnostics")
        d = self.spec.dim
        if init.kind == "product":
            phi = self.vector(init.system, self.tps.m, "initial_state.system")
            chi = self.vector(init.bath, self.tps.n, "initial_state.bath")
            return embed_product(ProductState(phi, chi), self.tps)
        if init.kind == "eigenstate":
            if init.index > d:
                raise ConfigInvalid("initial_state.index", f"index exceeds dimension {d}")
            return self.spec.frame[:, init.index - 1].copy()
        if init.kind == "haar_closed":
            return ham.haar_vector(self.rng(init.seed), d)
        nq = qubit_count(self.cfg)
        if nq is None:
            raise ConfigInvalid("initial_state.kind", f"{init.kind} needs a qubit model")
        if init.kind == "neel":
            bits = "".join("01"[k % 2] for k in range(nq))
            v = np.zeros(d, dtype=complex)
            v[int(bits, 2)] = 1.0
            return v
        rng = self.rng(init.seed)
        v = np.ones(1, dtype=complex)
        for _ in range(nq):
            v = np.kron(v, ham.haar_vector(rng, 2))
        return v


def _time_grid(cfg: ScenarioConfig, spec) -> dyn.TimeGrid:
    g = cfg.grid
    if g is None:
        raise ConfigInvalid("grid", "required by the requested diagnostics")
    if g.t_max is not None:
        return dyn.TimeGrid(t_max=g.t_max, samples=g.samples)
    factor = g.gap_factor if g.gap_factor is not None else dyn.DEFAULT_HORIZON_FACTOR
    return dyn.TimeGrid.for_spectrum(spec, factor=factor, samples=g.samples)


def _observables(kind: str, m: int, epsilon: float) -> dg.ObservableSet:
    if kind == "sigma_z":
        if m != 2:
            raise ConfigInvalid("diagnostics.observables", "sigma_z needs a two-level system")
        return dg.ObservableSet((ham.PAULI["z"],), epsilon)
    if kind == "projectors":
        return dg.ObservableSet.projectors(np.eye(m), epsilon)
    if kind == "dft_projectors":
        return dg.ObservableSet.projectors(dft_system_basis(m), epsilon)
    return dg.ObservableSet((np.eye(m),), epsilon)


def _random_unitary(rng, m: int) -> np.ndarray:
    z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def evaluate(cfg: ScenarioConfig, out_dir: Path | None = None) -> tuple[dg.DiagnosticsReport, list[str]]:
    """Run the scenario pipeline and collect diagnostics; optionally write trajectories."""
    h = build_hamiltonian(cfg)
    spec = eig_hermitian(h, cfg.degeneracy_tol)
    tps = build_tps(cfg, spec)
    if tps.dim != spec.dim:
        raise BadFactorization(f"TPS dimension {tps.dim} does not match model dimension {spec.dim}")
    build = _Builder(cfg, spec, tps)
    report = dg.DiagnosticsReport(
        metadata={
            "scenario": cfg.name,
            "model": cfg.model.model_dump(mode="json"),
            "tps": tps.label,
            "m": tps.m,
            "n": tps.n,
            "seed": cfg.seed,
            "min_gap": spec.min_gap() if np.isfinite(spec.min_gap()) else 0.0,
            "levels": len(spec.blocks),
            "version": __version__,
        }
    )
    files: list[str] = []
    cache: dict = {}

    def psi0():
        if "psi0" not in cache:
            cache["psi0"] = build.initial_state()
        return cache["psi0"]

    def trajectory():
        if "traj" not in cache:
            grid = _time_grid(cfg, spec)
            cache["grid"] = grid
            cache["traj"] = dyn.reduced_trajectory(psi0(), spec, tps, grid)
            report.metadata["grid"] = {"t_max": grid.t_max, "samples": grid.samples}
            if out_dir is not None:
                path = out_dir / f"trajectory_{tps.label}.csv"
                cache["traj"].write_csv(path)
                files.append(path.name)
        return cache["traj"]

    for k, diag in enumerate(cfg.diagnostics):
        where = f"diagnostics.{k}"
        name = diag.name
        if name == "factorizability":
            report.add("factorizability", dg.factorizability(spec, tps))
        elif name == "system_isi":
            chi = build.vector(diag.bath, tps.n, f"{where}.bath")
            if diag.system_states == "basis":
                phis = list(np.eye(tps.m, dtype=complex))
            else:
                phis = [build.vector(v, tps.m, f"{where}.system_states.{a}") for a, v in enumerate(diag.system_states)]
            report.add("system_isi", dg.system_isi(spec, tps, chi, phis), states=len(phis))
        elif name == "bath_isi":
            phi = build.vector(diag.system, tps.m, f"{where}.system")
            chis = [build.vector(v, tps.n, f"{where}.bath_states.{a}") for a, v in enumerate(diag.bath_states)]
            report.add("bath_isi", dg.bath_isi(spec, tps, phi, chis), states=len(chis))
        elif name == "closed_form":
            kind = cfg.tps.kind
            if kind not in ("tps1", "tps2"):
                raise ConfigInvalid(f"{where}.name", "closed_form needs a tps1 or tps2 TPS")
            worst = 0.0
            for _ in range(diag.samples):
                phi = ham.haar_vector(build.rng(), tps.m)
                if diag.bath is None:
                    chi = ham.haar_vector(build.rng(), tps.n)
                else:
                    chi = build.vector(diag.bath, tps.n, f"{where}.bath")
                rho = dyn.diagonal_ensemble(embed_product(ProductState(phi, chi), tps), spec, tps)
                expected = dg.closed_form_equilibrium(kind, phi, chi, tps.m, tps.n)
                worst = max(worst, float(np.max(np.abs(rho - expected))))
            report.add("closed_form_max_dev", worst, samples=diag.samples)
        elif name == "eth":
            window = diag.window or [float(spec.eigenvalues[0]), float(spec.eigenvalues[-1])]
            report.add("eth", dg.eth_statistic(spec, tps, window), window=window)
        elif name == "edh":
            res = dg.edh_statistic(spec, tps, _observables(diag.observables, tps.m, diag.epsilon))
            report.add("edh_max_variance", res.max_variance, observables=diag.observables)
            report.add("edh_max_mixedness", res.max_mixedness, observables=diag.observables)
            report.add("edh_holds", res.holds, epsilon=diag.epsilon)
        elif name == "mutual_unbiasedness":
            if diag.dims is None:
                value = dg.mutual_unbiasedness(np.eye(tps.m), dft_system_basis(tps.m))
            else:
                value = 0.0
                for m in diag.dims:
                    b = _random_unitary(build.rng(), m)
                    value = max(value, dg.mutual_unbiasedness(b, b @ dft_system_basis(m)))
            report.add("mutual_unbiasedness", value, dims=diag.dims or [tps.m])
        elif name == "equilibration":
            rho_bar = dyn.diagonal_ensemble(psi0(), spec, tps)
            report.add("equilibration", dg.equilibration_metric(trajectory(), rho_bar))
        elif name == "frozen":
            report.add("frozen_max_dev", dg.max_deviation_from_initial(trajectory()))
        elif name == "min_purity":
            report.add("min_purity", min(dg.purity(r) for r in trajectory().reduced_states))
        elif name == "time_average_oracle":
            rho_bar = dyn.diagonal_ensemble(psi0(), spec, tps)
            trajectory()
            numeric = dyn.numeric_time_average(psi0(), spec, tps, cache["grid"])
            report.add("time_average_oracle", dg.trace_distance(rho_bar, numeric))
        elif name == "spectrum_oracle":
            if cfg.model.kind != "xx_chain":
                raise ConfigInvalid(f"{where}.name", "spectrum_oracle needs the xx_chain model")
            _, ff = ham.xx_free_fermion_oracle(ham.XxChainSpec(N=cfg.model.N, h=cfg.model.h))
            report.add("spectrum_oracle", float(np.max(np.abs(ff - spec.eigenvalues))))
        elif name == "conditional_match":
            h_s = dyn.conditional_system_hamiltonian(spec, tps, diag.j)
            phi0 = tps_system_state(psi0(), tps, diag.j)
            traj = trajectory()
            worst = 0.0
            for t, rho in zip(traj.times, traj.reduced_states):
                u = np.diag(np.exp(-1j * np.diag(h_s).real * t))
                v = u @ phi0
                worst = max(worst, dg.trace_distance(rho, np.outer(v, v.conj())))
            report.add("conditional_match", worst, j=diag.j)
        elif name == "gibbs_fit":
            h_s = dyn.conditional_system_hamiltonian(spec, tps, diag.j)
            fit = dg.gibbs_fit(dyn.diagonal_ensemble(psi0(), spec, tps), h_s)
            report.add("gibbs_beta", fit.beta, j=diag.j)
            report.add("gibbs_residual", fit.residual, j=diag.j)
    return report, files


def tps_system_state(psi, tps: TpsDescriptor, j: int) -> np.ndarray:
    """System factor of ``psi`` assuming it is ``phi (x) chi_j``."""
    grid = (tps.frame.conj().T @ psi).reshape(tps.m, tps.n)
    others = np.delete(grid, j - 1, axis=1)
    if np.max(np.abs(others), initial=0.0) > 1e-10:
        raise ConfigInvalid("initial_state.bath", f"conditional evolution needs bath basis state chi_{j}")
    return grid[:, j - 1]


def run_scenario(cfg: ScenarioConfig, out_dir=None) -> RunRecord:
    """Execute one scenario and write ``report.json``, ``report.csv``, trajectories and ``run_record.json``."""
    out = Path(out_dir or cfg.output or f"out/{cfg.name}")
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    record = RunRecord(scenario=cfg.name, config_hash=cfg.config_hash(), version=__version__)
    report, files = evaluate(cfg, out)
    (out / "report.json").write_text(report.to_json())
    with open(out / "report.csv", "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(report.to_csv_rows())
    record.files = sorted(files + ["report.json", "report.csv", "run_record.json"])
    record.scalars = report.scalars()
    record.wall_time = time.perf_counter() - start
    (out / "run_record.json").write_text(record.to_json())
    return record


def set_path(doc: dict, path: str, value):
    """Assign ``value`` at a dotted path; integer parts index lists."""
    parts = path.split(".")
    node = doc
    for k, part in enumerate(parts[:-1]):
        try:
            node = node[int(part)] if isinstance(node, list) else node[part]
        except (KeyError, IndexError, ValueError):
            raise ConfigInvalid(".".join(parts[: k + 1]), "sweep axis not found in template") from None
    last = parts[-1]
    if isinstance(node, list):
        try:
            node[int(last)] = value
        except (IndexError, ValueError):
            raise ConfigInvalid(path, "sweep axis not found in template") from None
    elif isinstance(node, dict):
        node[last] = value
    else:
        raise ConfigInvalid(path, "sweep axis not found in template")


def _sweep_item(args):
    doc, out = args
    try:
        cfg = parse_config(doc)
        return run_scenario(cfg, out)
    except (TpsLabError, np.linalg.LinAlgError) as exc:
        name = doc.get("name", "?") if isinstance(doc, dict) else "?"
        return RunRecord(scenario=name, config_hash="", version=__version__, status="failed", error=str(exc))


def _axis_label(value) -> str:
    return json.dumps(value, separators=(",", ":")).replace("/", "_").strip('"')


def sweep(template: ScenarioConfig, axis: str, values, out_dir=None, workers: int = 1) -> list[RunRecord]:
    """One run per axis value plus ``summary.csv``; failed items are recorded, not raised."""
    base = template.to_dict()
    set_path(copy.deepcopy(base), axis, None)  # axis must resolve
    out = Path(out_dir or template.output or f"out/{template.name}-sweep")
    out.mkdir(parents=True, exist_ok=True)
    jobs = []
    for value in values:
        doc = copy.deepcopy(base)
        set_path(doc, axis, value)
        jobs.append((doc, out / f"{axis}={_axis_label(value)}"))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_sweep_item, jobs))
    else:
        records = [_sweep_item(job) for job in jobs]

    names: list[str] = []
    for rec in records:
        for name in rec.scalars:
            if name not in names:
                names.append(name)
    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([axis, "status"] + names)
        for value, rec in zip(values, records):
            row = [_axis_label(value), rec.status]
            for name in names:
                v = rec.scalars.get(name, "")
                row.append(v if isinstance(v, str) else dg._fmt(v))
            writer.writerow(row)
    return records


def validate(cfg) -> list[dict]:
    """Static checks of a config (mapping or parsed); findings are returned, never raised.

    Each finding is ``{"code", "field", "message"}``.  The horizon check
    diagonalises the model, so it only runs when the cheaper checks pass.
    """
    findings = []

    def finding(code, where, message):
        findings.append({"code": code, "field": where, "message": message})

    if not isinstance(cfg, ScenarioConfig):
        try:
            cfg = parse_config(cfg)
        except ConfigInvalid as exc:
            finding("ConfigInvalid", exc.field, str(exc))
            return findings
    d = model_dimension(cfg)
    if d > cfg.max_dim:
        finding("DimensionOverflow", "model", f"dimension {d} exceeds max_dim {cfg.max_dim}")
        return findings
    t = cfg.tps
    if t.kind in ("tps1", "tps2"):
        if t.m * t.n != d:
            finding("BadFactorization", "tps.m", f"m*n = {t.m * t.n} but the model dimension is {d}")
        if t.kind == "tps2" and t.n % 2:
            finding("OddBathDimension", "tps.n", f"TPS-2 needs an even bath dimension, got n={t.n}")
        if t.assignment is not None and sorted(t.assignment) != list(range(1, d + 1)):
            finding("ConfigInvalid", "tps.assignment", f"assignment must be a permutation of 1..{d}")
    elif t.kind == "site":
        nq = qubit_count(cfg)
        if nq is None:
            finding("ConfigInvalid", "tps.kind", "site TPS needs a qubit model")
        elif t.site > nq:
            finding("IndexOutOfRange", "tps.site", f"site {t.site} outside 1..{nq}")
    elif t.kind == "fermion_mode":
        if cfg.model.kind != "xx_chain":
            finding("ConfigInvalid", "tps.kind", "fermion_mode TPS needs the xx_chain model")
        elif t.mode > cfg.model.N:
            finding("IndexOutOfRange", "tps.mode", f"mode {t.mode} outside 1..{cfg.model.N}")
    elif not Path(t.path).exists():
        finding("ConfigInvalid", "tps.path", f"frame file {t.path} not found")
    if findings:
        return findings

    needs_oracle = any(diag.name == "time_average_oracle" for diag in cfg.diagnostics)
    if needs_oracle and cfg.grid is not None and cfg.grid.t_max is not None:
        spec = eig_hermitian(build_hamiltonian(cfg), cfg.degeneracy_tol)
        threshold = dyn.horizon_threshold(spec)
        if cfg.grid.t_max < threshold:
            finding("InsufficientHorizon", "grid.t_max", f"t_max={cfg.grid.t_max:.6g} below 50/gap_min={threshold:.6g}")
    return findings
