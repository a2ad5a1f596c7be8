"""Scenario configuration schema.

A scenario is one JSON document.  Unknown keys are rejected, and every
validation error names the offending field as a dotted path (``tps.m``).
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..errors import ConfigInvalid


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# --- models ----------------------------------------------------------------


class GueModel(_Strict):
    kind: Literal["gue"]
    d: int = Field(ge=2, le=4096)
    seed: Optional[int] = None


class XxChainModel(_Strict):
    kind: Literal["xx_chain"]
    N: int = Field(ge=2, le=12)
    h: float = 0.0


class CentralSpinModel(_Strict):
    kind: Literal["central_spin"]
    N: int = Field(ge=1, le=11)
    g: Optional[list[float]] = None


Model = Annotated[Union[GueModel, XxChainModel, CentralSpinModel], Field(discriminator="kind")]


# --- tensor product structures ---------------------------------------------


class EigenTps(_Strict):
    kind: Literal["tps1", "tps2"]
    m: int = Field(ge=2)
    n: int = Field(ge=2)
    assignment: Optional[list[int]] = None


class SiteTps(_Strict):
    kind: Literal["site"]
    site: int = Field(ge=1)


class FermionModeTps(_Strict):
    kind: Literal["fermion_mode"]
    mode: int = Field(ge=1)


class FrameFileTps(_Strict):
    kind: Literal["frame_file"]
    path: str


Tps = Annotated[Union[EigenTps, SiteTps, FermionModeTps, FrameFileTps], Field(discriminator="kind")]


# --- states ----------------------------------------------------------------


class BasisVector(_Strict):
    kind: Literal["basis"]
    index: int = Field(ge=1)


class DftVector(_Strict):
    """Vector ``phi~_index`` of the Fourier-rotated system basis."""

    kind: Literal["dft"]
    index: int = Field(ge=1)


class AmplitudeVector(_Strict):
    kind: Literal["amplitudes"]
    re: list[float]
    im: Optional[list[float]] = None


class HaarVector(_Strict):
    """Haar-random unit vector, optionally confined to a coordinate subspace.

    ``subspace`` is ``"B1"``/``"B2"`` (first/second half of the bath basis) or
    an inclusive 1-based index range ``[lo, hi]``.  Without ``seed`` the
    scenario seed is used with a per-draw stream.
    """

    kind: Literal["haar"]
    seed: Optional[int] = None
    subspace: Optional[Union[Literal["B1", "B2"], list[int]]] = None


VectorSpec = Annotated[Union[BasisVector, DftVector, AmplitudeVector, HaarVector], Field(discriminator="kind")]


class ProductInit(_Strict):
    kind: Literal["product"]
    system: VectorSpec
    bath: VectorSpec


class NeelInit(_Strict):
    """Alternating up/down spins starting with up at site 1 (qubit models)."""

    kind: Literal["neel"]


class RandomClosedInit(_Strict):
    kind: Literal["haar_closed", "random_spin_product"]
    seed: Optional[int] = None


class EigenstateInit(_Strict):
    kind: Literal["eigenstate"]
    index: int = Field(ge=1)


InitialState = Annotated[
    Union[ProductInit, NeelInit, RandomClosedInit, EigenstateInit], Field(discriminator="kind")
]


class GridConfig(_Strict):
    """Either an explicit ``t_max`` or ``gap_factor / gap_min`` (default 200)."""

    t_max: Optional[float] = Field(default=None, gt=0)
    gap_factor: Optional[float] = Field(default=None, gt=0)
    samples: int = Field(default=64, ge=1)


# --- diagnostics -----------------------------------------------------------


class FactorizabilityDiag(_Strict):
    name: Literal["factorizability"]


class SystemIsiDiag(_Strict):
    name: Literal["system_isi"]
    bath: VectorSpec
    system_states: Union[Literal["basis"], list[VectorSpec]] = "basis"


class BathIsiDiag(_Strict):
    name: Literal["bath_isi"]
    system: VectorSpec
    bath_states: list[VectorSpec]


class ClosedFormDiag(_Strict):
    """Max entrywise gap between the diagonal ensemble and the TPS-1/TPS-2 closed form."""

    name: Literal["closed_form"]
    samples: int = Field(default=20, ge=1)
    bath: Optional[VectorSpec] = None


class EthDiag(_Strict):
    name: Literal["eth"]
    window: Optional[list[float]] = None


class EdhDiag(_Strict):
    name: Literal["edh"]
    observables: Literal["sigma_z", "projectors", "dft_projectors", "identity"]
    epsilon: float = Field(default=0.1, gt=0)


class MubDiag(_Strict):
    name: Literal["mutual_unbiasedness"]
    dims: Optional[list[int]] = None


class TrajectoryDiag(_Strict):
    name: Literal["equilibration", "frozen", "min_purity", "time_average_oracle", "spectrum_oracle"]


class ConditionalDiag(_Strict):
    name: Literal["conditional_match", "gibbs_fit"]
    j: int = Field(default=1, ge=1)


Diagnostic = Annotated[
    Union[
        FactorizabilityDiag,
        SystemIsiDiag,
        BathIsiDiag,
        ClosedFormDiag,
        EthDiag,
        EdhDiag,
        MubDiag,
        TrajectoryDiag,
        ConditionalDiag,
    ],
    Field(discriminator="name"),
]


class ScenarioConfig(_Strict):
    name: str
    description: str = ""
    seed: int = 0
    max_dim: int = Field(default=2**14, ge=2)
    degeneracy_tol: Optional[float] = Field(default=None, gt=0)
    budget_seconds: Optional[float] = Field(default=None, gt=0)
    model: Model
    tps: Tps
    initial_state: Optional[InitialState] = None
    grid: Optional[GridConfig] = None
    diagnostics: list[Diagnostic] = Field(default_factory=list)
    output: Optional[str] = None

    def to_dict(self) -> dict:
        return self.model_dump(mode="json")

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


_TAGS = {
    "gue", "xx_chain", "central_spin", "tps1", "tps2", "site", "fermion_mode", "frame_file",
    "basis", "dft", "amplitudes", "haar", "product", "neel", "haar_closed", "random_spin_product",
    "eigenstate", "factorizability", "system_isi", "bath_isi", "closed_form", "eth", "edh",
    "mutual_unbiasedness", "equilibration", "frozen", "min_purity", "time_average_oracle",
    "spectrum_oracle", "conditional_match", "gibbs_fit",
}


def _dotted(loc) -> str:
    # pydantic inserts union tags / branch names into locations; drop them
    parts = []
    for k, p in enumerate(loc):
        if isinstance(p, str) and ("[" in p or (p in _TAGS and k < len(loc) - 1)):
            continue
        parts.append(str(p))
    return ".".join(parts) or "<root>"


def parse_config(data) -> ScenarioConfig:
    """Validate a config mapping; raise :class:`ConfigInvalid` naming the first bad field."""
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid("<root>", f"not valid JSON: {exc}") from None
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        err = max(exc.errors(), key=lambda e: len(e["loc"]))
        raise ConfigInvalid(_dotted(err["loc"]), err["msg"]) from None


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigInvalid("<file>", str(exc)) from None
    cfg = parse_config(text)
    if cfg.tps.kind == "frame_file" and not Path(cfg.tps.path).is_absolute():
        resolved = str((path.parent / cfg.tps.path).resolve())
        cfg = cfg.model_copy(update={"tps": cfg.tps.model_copy(update={"path": resolved})})
    return cfg
