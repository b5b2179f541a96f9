"""
Noise models
------------
Attachment policies turning a noiseless circuit into a noisy one:

  * SCEM         one rate p on every gate, idle, reset and measurement
  * multichannel per-kind rates (p_1q, p_2q, p_ct, p_m, p_r) plus idle
                 dephasing from resolved idle durations and T2

Both are pure circuit-to-circuit transformations; circuits flagged
``noiseless`` (ideal encoders) pass through untouched.
"""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Mapping

from pydantic import BaseModel, ConfigDict, Field, field_validator

from circuits.circuit import Circuit
from circuits.instructions import Idle, Measure, Noise, Reset
from circuits.protocol_tree import ProtocolTree
from engine.gates import CliffordAction, GateKind
from noise.channels import NoiseChannel

logger = logging.getLogger(__name__)

DATA_VERSION = 1
DEFAULT_PATH = Path(__file__).resolve().parent.parent / "data" / "noise_parameters.json"
SCENARIOS    = ("current", "intermediate", "optimistic")

_Probability = Field(ge=0.0, le=1.0)


# ──────────────────────────────────────────────────────────────────────────────
# PARAMETERS
# ──────────────────────────────────────────────────────────────────────────────

class ScemParams(BaseModel):
    """Single-parameter standard circuit-level error model."""

    model_config = ConfigDict(frozen=True)

    p:    float = _Probability
    idle: bool  = True


class MultiChannelParams(BaseModel):
    """Per-kind trapped-ion error rates (one architecture, one scenario)."""

    model_config = ConfigDict(frozen=True)

    p_1q:     float = _Probability
    p_2q:     float = _Probability
    p_ct:     float = Field(default=0.0, ge=0.0, le=1.0)
    p_m:      float = _Probability
    p_r:      float = _Probability
    t2:       float = Field(default=2.0, gt=0.0)
    scenario: str   = "current"

    @field_validator("scenario")
    @classmethod
    def _known_scenario(cls, value: str) -> str:
        if value not in SCENARIOS:
            raise ValueError(f"unknown timing scenario '{value}' (expected one of {SCENARIOS})")
        return value

    @classmethod
    def uniform(cls, p: float, t2: float = math.inf) -> "MultiChannelParams":
        """All per-kind rates equal to ``p``, no crosstalk: the SCEM special case."""
        return cls(p_1q=p, p_2q=p, p_ct=0.0, p_m=p, p_r=p, t2=t2)

    @classmethod
    def scem_equivalent(cls, p: float) -> "MultiChannelParams":
        """
        Uniform rates whose readout flip also absorbs SCEM's pre-measurement
        depol1: p_m = p ⊕ 2p/3.  Matches ``ScemParams(p, idle=False)`` in
        distribution on circuits that reset every measured qubit before reuse.
        """
        flip = 2.0 * p / 3.0
        return cls(p_1q=p, p_2q=p, p_ct=0.0, p_m=p + flip - 2.0 * p * flip, p_r=p, t2=math.inf)


def load_noise_parameters(architecture: str, scenario: str, *, t2: float | None = None,
                          path: str | Path = DEFAULT_PATH) -> MultiChannelParams:
    """Table row for (architecture, scenario), with T2 from the file unless overridden."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if data.get("version") != DATA_VERSION:
        raise ValueError(f"❌ Unsupported noise-parameter file version {data.get('version')!r}")

    rows = data["architectures"].get(architecture)
    if rows is None:
        raise ValueError(f"❌ Unknown architecture '{architecture}'. Must be one of: {', '.join(data['architectures'])}")
    if scenario not in rows:
        raise ValueError(f"❌ Unknown scenario '{scenario}'. Must be one of: {', '.join(rows)}")

    params = MultiChannelParams(**rows[scenario], t2=t2 or data.get("default_t2_s", 2.0), scenario=scenario)
    logger.info(f"📂 Noise parameters loaded: {architecture}/{scenario} (T2={params.t2} s)")
    return params


# ──────────────────────────────────────────────────────────────────────────────
# ATTACHMENT
# ──────────────────────────────────────────────────────────────────────────────

def _guard(circuit: Circuit) -> None:
    if circuit.noise_tag is not None or circuit.has_noise:
        raise ValueError(f"❌ Circuit '{circuit.name}' already carries noise ({circuit.noise_tag})")


def scem_attach(circuit: Circuit, params: ScemParams) -> Circuit:
    """
    depol1(p) after every 1q gate and idle marker, and before every measurement;
    depol2(p) after every 2q gate; meas_flip(p) on measurements; reset_flip(p)
    after resets.
    """
    _guard(circuit)
    if circuit.noiseless:
        return circuit.with_instructions(circuit.instructions, noise_tag="scem")
    p   = params.p
    out = []
    for ins in circuit.instructions:
        if isinstance(ins, CliffordAction):
            out.append(ins)
            if ins.kind is GateKind.I and not params.idle:
                continue
            if ins.kind.arity == 2:
                out.append(Noise(NoiseChannel.depol2(*ins.qubits, p)))
            else:
                out.append(Noise(NoiseChannel.depol1(ins.qubits[0], p)))
        elif isinstance(ins, Reset):
            out.append(ins)
            out.append(Noise(NoiseChannel.reset_flip(ins.qubit, p, ins.basis)))
        elif isinstance(ins, Measure):
            out.append(Noise(NoiseChannel.depol1(ins.qubit, p)))
            out.append(Measure(ins.qubit, ins.basis, ins.label, ins.random, NoiseChannel.meas_flip(ins.qubit, p)))
        elif isinstance(ins, Idle):
            out.append(ins)
            if params.idle:
                out.extend(Noise(NoiseChannel.depol1(q, p)) for q in ins.qubits)
        else:
            out.append(ins)
    return circuit.with_instructions(out, noise_tag=f"scem(p={p:g})")


def multichannel_attach(circuit: Circuit, params: MultiChannelParams,
                        neighbours: Mapping[int, tuple[int, ...]] | None = None) -> Circuit:
    """
    Per-kind channels: p_2q per entangling gate (its single-qubit wrappers
    included), crosstalk depol2(p_ct) on (target, neighbour) pairs, classical
    p_m readout flips only, p_r reset flips, idle_dephase(t, T2) per idle marker.
    With T2 = ∞ idle markers carry no channel and need no resolved duration.
    """
    _guard(circuit)
    if circuit.noiseless:
        return circuit.with_instructions(circuit.instructions, noise_tag="multichannel")
    neighbours = neighbours or {}
    out = []
    for ins in circuit.instructions:
        if isinstance(ins, CliffordAction):
            out.append(ins)
            if ins.kind.arity == 2:
                out.append(Noise(NoiseChannel.depol2(*ins.qubits, params.p_2q)))
                if params.p_ct > 0:
                    for target in ins.qubits:
                        for other in neighbours.get(target, ()):
                            if other not in ins.qubits:
                                out.append(Noise(NoiseChannel.crosstalk(target, other, params.p_ct)))
            elif ins.kind is not GateKind.I:
                out.append(Noise(NoiseChannel.depol1(ins.qubits[0], params.p_1q)))
        elif isinstance(ins, Reset):
            out.append(ins)
            out.append(Noise(NoiseChannel.reset_flip(ins.qubit, params.p_r, ins.basis)))
        elif isinstance(ins, Measure):
            out.append(Measure(ins.qubit, ins.basis, ins.label, ins.random, NoiseChannel.meas_flip(ins.qubit, params.p_m)))
        elif isinstance(ins, Idle):
            out.append(ins)
            if math.isinf(params.t2):
                continue
            if ins.duration is None:
                raise ValueError(f"❌ Idle marker on {ins.qubits} in '{circuit.name}' has no resolved duration")
            if ins.duration > 0:
                out.extend(Noise(NoiseChannel.idle_dephase(q, ins.duration, params.t2)) for q in ins.qubits)
        else:
            out.append(ins)
    return circuit.with_instructions(out, noise_tag=f"multichannel({params.scenario}, T2={params.t2:g})")


# ──────────────────────────────────────────────────────────────────────────────
# MODELS
# ──────────────────────────────────────────────────────────────────────────────

class NoiseModel:
    """Attach a policy to every circuit of a protocol tree."""

    tag = "noise"

    def attach(self, circuit: Circuit) -> Circuit:
        raise NotImplementedError

    def attach_tree(self, tree: ProtocolTree) -> ProtocolTree:
        noisy = tree.map_circuits(self.attach, name=tree.name)
        noisy.meta = {**tree.meta, "noise": self.tag}
        logger.debug(f"🧪 Attached {self.tag} to tree '{tree.name}' ({len(tree)} nodes)")
        return noisy


class ScemModel(NoiseModel):
    def __init__(self, p: float, idle: bool = True):
        self.params = ScemParams(p=p, idle=idle)
        self.tag    = f"scem_p{p:g}" + ("" if idle else "_noidle")

    def attach(self, circuit: Circuit) -> Circuit:
        return scem_attach(circuit, self.params)


class MultiChannelModel(NoiseModel):
    def __init__(self, params: MultiChannelParams, neighbours: Mapping[int, tuple[int, ...]] | None = None):
        self.params     = params
        self.neighbours = dict(neighbours or {})
        self.tag        = f"multichannel_{params.scenario}_t2_{params.t2:g}"

    def attach(self, circuit: Circuit) -> Circuit:
        return multichannel_attach(circuit, self.params, self.neighbours)
